//! Forward mechanics of a straight, circular, inextensible rod clamped at
//! `s = 0`.
//!
//! Three routes are provided:
//!
//! - [`integrate_curvature_backward`]: the local-frame curvature model. The
//!   bending curvature `(u_x, u_y)` and local internal force `n` are
//!   integrated from the free tip towards the clamp in a single pass, with
//!   no iteration.
//! - [`solve_bvp_reference`]: the global-frame Cosserat equations for
//!   position, orientation, internal force and moment, solved as a boundary
//!   value problem by shooting on the base loads. Slow, but independent of
//!   the local-frame route, so it serves as an oracle and timing baseline.
//! - [`reconstruct_shape`]: positions and frames recovered from a curvature
//!   field by forward integration from the clamp.
//!
//! All external loads are expressed in the local (material) frame, i.e. they
//! follow the rod as it deforms. Both integrators use fixed-step classical
//! RK4 with one step per grid segment.

mod bvp;
mod local;
mod shape;

pub use bvp::{solve_bvp_reference, solve_bvp_reference_with, BvpOptions, BvpSolution};
pub use local::integrate_curvature_backward;
pub use shape::reconstruct_shape;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry and material of a tube with an annular cross-section.
///
/// All lengths are in meters, the modulus in pascals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RodProperties {
    pub length: f64,
    pub d_in: f64,
    pub d_out: f64,
    pub youngs_modulus: f64,
}

impl RodProperties {
    pub fn new(length: f64, d_in: f64, d_out: f64, youngs_modulus: f64) -> Result<Self> {
        let props = Self {
            length,
            d_in,
            d_out,
            youngs_modulus,
        };
        props.validate()?;
        Ok(props)
    }

    /// The calibrated 290 mm Nitinol tube used throughout the experiments.
    pub fn nitinol_tube() -> Self {
        Self {
            length: 0.290,
            d_in: 1.118e-3,
            d_out: 1.397e-3,
            youngs_modulus: 67.0e9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.length, self.d_in, self.d_out, self.youngs_modulus];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("rod properties"));
        }
        if self.length <= 0.0 {
            return Err(Error::InvalidRod(format!("length {} m must be positive", self.length)));
        }
        if self.d_in < 0.0 {
            return Err(Error::InvalidRod(format!("inner diameter {} m is negative", self.d_in)));
        }
        if self.d_in >= self.d_out {
            return Err(Error::InvalidRod(format!(
                "inner diameter {} m must be smaller than outer diameter {} m",
                self.d_in, self.d_out
            )));
        }
        if self.youngs_modulus <= 0.0 {
            return Err(Error::InvalidRod(format!(
                "Young's modulus {} Pa must be positive",
                self.youngs_modulus
            )));
        }
        Ok(())
    }

    /// Second moment of area `π (d_out⁴ − d_in⁴) / 64` in m⁴.
    pub fn second_moment(&self) -> f64 {
        std::f64::consts::PI * (self.d_out.powi(4) - self.d_in.powi(4)) / 64.0
    }

    /// Copy with the Young's modulus multiplied by `scale`.
    pub fn with_stiffness_scale(&self, scale: f64) -> Self {
        Self {
            youngs_modulus: self.youngs_modulus * scale,
            ..*self
        }
    }
}

/// Diagonal bending/torsion stiffness `diag(K11, K22, K33)` in N·m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendingStiffness {
    pub k11: f64,
    pub k22: f64,
    pub k33: f64,
}

impl BendingStiffness {
    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.k11, self.k22, self.k33)
    }
}

/// `(E·I, E·I, 2·E·I)` for a circular cross-section.
pub fn bending_stiffness(props: &RodProperties) -> Result<BendingStiffness> {
    props.validate()?;
    let ei = props.youngs_modulus * props.second_moment();
    Ok(BendingStiffness {
        k11: ei,
        k22: ei,
        k33: 2.0 * ei,
    })
}

/// Uniform arc-length grid `loc_i = i · L / (q − 1)`, `i = 0..q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGrid {
    length: f64,
    q: usize,
}

impl NodeGrid {
    pub fn uniform(length: f64, q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes, got {q}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length {length} m must be positive")));
        }
        Ok(Self { length, q })
    }

    pub fn for_rod(props: &RodProperties, q: usize) -> Result<Self> {
        Self::uniform(props.length, q)
    }

    pub fn len(&self) -> usize {
        self.q
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Segment length Δ.
    pub fn spacing(&self) -> f64 {
        self.length / (self.q - 1) as f64
    }

    pub fn location(&self, i: usize) -> f64 {
        if i + 1 == self.q {
            self.length
        } else {
            i as f64 * self.spacing()
        }
    }

    pub fn locations(&self) -> Vec<f64> {
        (0..self.q).map(|i| self.location(i)).collect()
    }

    /// Segment index `j` and fraction `t ∈ [0, 1]` with
    /// `s = loc_j + t · Δ`. Clamps to the grid.
    pub fn locate(&self, s: f64) -> (usize, f64) {
        let x = (s / self.spacing()).clamp(0.0, (self.q - 1) as f64);
        let j = (x.floor() as usize).min(self.q - 2);
        (j, x - j as f64)
    }

    pub(crate) fn check_rod(&self, props: &RodProperties) -> Result<()> {
        if (self.length - props.length).abs() > 1e-12 * props.length {
            return Err(Error::LengthMismatch {
                grid_m: self.length,
                rod_m: props.length,
            });
        }
        Ok(())
    }
}

pub(crate) fn lerp_nodes(values: &[f64], grid: &NodeGrid, s: f64) -> f64 {
    let (j, t) = grid.locate(s);
    values[j] + t * (values[j + 1] - values[j])
}

/// Bending curvature `(u_x, u_y)` (1/m) at every grid node. Torsion is
/// identically zero for the rods modeled here and is not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub grid: NodeGrid,
    pub u_x: Vec<f64>,
    pub u_y: Vec<f64>,
}

impl CurvatureField {
    pub fn zeros(grid: NodeGrid) -> Self {
        Self {
            grid,
            u_x: vec![0.0; grid.len()],
            u_y: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: NodeGrid, u_x: f64, u_y: f64) -> Self {
        Self {
            grid,
            u_x: vec![u_x; grid.len()],
            u_y: vec![u_y; grid.len()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.u_x.len() != self.grid.len() || self.u_y.len() != self.grid.len() {
            return Err(Error::InvalidGrid(format!(
                "curvature has {}/{} entries for {} nodes",
                self.u_x.len(),
                self.u_y.len(),
                self.grid.len()
            )));
        }
        if self.u_x.iter().chain(&self.u_y).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("curvature field"));
        }
        Ok(())
    }

    /// Linear interpolation between nodes.
    pub fn sample(&self, s: f64) -> (f64, f64) {
        (
            lerp_nodes(&self.u_x, &self.grid, s),
            lerp_nodes(&self.u_y, &self.grid, s),
        )
    }

    /// Largest `√(u_x² + u_y²)` over the nodes.
    pub fn max_magnitude(&self) -> f64 {
        self.u_x
            .iter()
            .zip(&self.u_y)
            .map(|(x, y)| x.hypot(*y))
            .fold(0.0, f64::max)
    }
}

/// Force per unit length (N/m) at every node, in the local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributedLoad {
    pub grid: NodeGrid,
    pub f_x: Vec<f64>,
    pub f_y: Vec<f64>,
    pub f_z: Vec<f64>,
}

impl DistributedLoad {
    pub fn zeros(grid: NodeGrid) -> Self {
        Self {
            grid,
            f_x: vec![0.0; grid.len()],
            f_y: vec![0.0; grid.len()],
            f_z: vec![0.0; grid.len()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.grid.len();
        if self.f_x.len() != q || self.f_y.len() != q || self.f_z.len() != q {
            return Err(Error::InvalidGrid(format!(
                "distributed load must have {q} entries per component"
            )));
        }
        if self
            .f_x
            .iter()
            .chain(&self.f_y)
            .chain(&self.f_z)
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("distributed load"));
        }
        Ok(())
    }

    pub(crate) fn at_node(&self, i: usize) -> Vector3<f64> {
        Vector3::new(self.f_x[i], self.f_y[i], self.f_z[i])
    }

    /// Trapezoid-rule integral of each component over the grid (N).
    pub fn integral(&self) -> Vector3<f64> {
        let delta = self.grid.spacing();
        let q = self.grid.len();
        let trap = |v: &[f64]| {
            let interior: f64 = v[1..q - 1].iter().sum();
            delta * (interior + 0.5 * (v[0] + v[q - 1]))
        };
        Vector3::new(trap(&self.f_x), trap(&self.f_y), trap(&self.f_z))
    }
}

/// Concentrated load at the free end, in the tip's local frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TipLoad {
    pub force: Vector3<f64>,
    pub moment: Vector3<f64>,
}

impl TipLoad {
    pub fn force(force: Vector3<f64>) -> Self {
        Self {
            force,
            moment: Vector3::zeros(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.force.iter().chain(self.moment.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tip load"));
        }
        Ok(())
    }
}

/// Pose and (optionally) internal loads at every node, in the global frame
/// of the clamp.
#[derive(Debug, Clone, PartialEq)]
pub struct RodState {
    pub grid: NodeGrid,
    pub positions: Vec<Vector3<f64>>,
    pub rotations: Vec<Matrix3<f64>>,
    pub internal_force: Option<Vec<Vector3<f64>>>,
    pub internal_moment: Option<Vec<Vector3<f64>>>,
}

impl RodState {
    pub fn tip_position(&self) -> Vector3<f64> {
        *self.positions.last().expect("grid has at least two nodes")
    }

    /// Local curvature `K⁻¹ Rᵀ M` per node, including torsion. `None` when
    /// the internal moment was not computed.
    pub fn local_curvature(&self, stiffness: &BendingStiffness) -> Option<Vec<Vector3<f64>>> {
        let k = stiffness.as_vector();
        let moments = self.internal_moment.as_ref()?;
        Some(
            self.rotations
                .iter()
                .zip(moments)
                .map(|(r, m)| (r.transpose() * m).component_div(&k))
                .collect(),
        )
    }

    /// Position at arc length `s`, linearly interpolated between nodes.
    pub fn position_at(&self, s: f64) -> Vector3<f64> {
        let (j, t) = self.grid.locate(s);
        self.positions[j] + (self.positions[j + 1] - self.positions[j]) * t
    }
}

pub(crate) fn hat(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Closest rotation to a nearly orthonormal matrix (Newton–Schulz polar
/// iteration).
pub(crate) fn orthonormalize(m: &Matrix3<f64>) -> Matrix3<f64> {
    let mut r = *m;
    for _ in 0..6 {
        let err = r.transpose() * r - Matrix3::identity();
        if err.amax() < 1e-15 {
            break;
        }
        r = r * (Matrix3::identity() * 1.5 - (r.transpose() * r) * 0.5);
    }
    r
}
