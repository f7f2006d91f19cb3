use crate::error::Result;
use crate::force::{distribute_forces_with, AppliedLoads, Apportionment, ForceVector};
use crate::rod::{
    integrate_curvature_backward, reconstruct_shape, solve_bvp_reference_with, BvpOptions, CurvatureField, NodeGrid,
    RodProperties, RodState,
};

/// Maps nodal loads to a curvature field.
pub trait CurvatureSolver {
    fn solve(&self, props: &RodProperties, loads: &AppliedLoads) -> Result<CurvatureField>;
}

/// Single backward sweep of the local-frame equations.
#[derive(Debug, Clone, Copy, Default)]
pub struct LocalFrame;

impl CurvatureSolver for LocalFrame {
    fn solve(&self, props: &RodProperties, loads: &AppliedLoads) -> Result<CurvatureField> {
        integrate_curvature_backward(props, &loads.distributed, &loads.tip)
    }
}

/// Global-frame boundary value problem solved by shooting, cold-started at
/// every call.
#[derive(Debug, Clone, Copy, Default)]
pub struct ShootingBvp {
    pub options: BvpOptions,
}

impl CurvatureSolver for ShootingBvp {
    fn solve(&self, props: &RodProperties, loads: &AppliedLoads) -> Result<CurvatureField> {
        solve_bvp_reference_with(props, &loads.distributed, &loads.tip, &self.options).map(|s| s.curvature)
    }
}

/// Point forces to curvature (or shape) on a fixed grid.
#[derive(Debug, Clone, Copy)]
pub struct ForwardModel<S = LocalFrame> {
    pub props: RodProperties,
    pub grid: NodeGrid,
    pub apportionment: Apportionment,
    pub solver: S,
}

impl ForwardModel<LocalFrame> {
    pub fn new(props: RodProperties, q: usize) -> Result<Self> {
        props.validate()?;
        Ok(Self {
            props,
            grid: NodeGrid::for_rod(&props, q)?,
            apportionment: Apportionment::Linear,
            solver: LocalFrame,
        })
    }
}

impl<S: CurvatureSolver> ForwardModel<S> {
    pub fn with_solver<T: CurvatureSolver>(self, solver: T) -> ForwardModel<T> {
        ForwardModel {
            props: self.props,
            grid: self.grid,
            apportionment: self.apportionment,
            solver,
        }
    }

    pub fn with_apportionment(mut self, apportionment: Apportionment) -> Self {
        self.apportionment = apportionment;
        self
    }

    pub fn with_props(mut self, props: RodProperties) -> Self {
        self.props = props;
        self
    }

    pub fn curvature(&self, fv: &ForceVector) -> Result<CurvatureField> {
        let loads = distribute_forces_with(fv, &self.grid, self.apportionment)?;
        self.solver.solve(&self.props, &loads)
    }

    pub fn shape(&self, fv: &ForceVector) -> Result<RodState> {
        reconstruct_shape(&self.curvature(fv)?)
    }
}
