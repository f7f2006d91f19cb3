//! Point contact forces and their conversion to nodal force densities.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rod::{DistributedLoad, NodeGrid, TipLoad};

/// A transverse point force (N) at arc length `s` (m). Contact forces are
/// normal to the rod surface, so there is no axial component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointForce {
    pub s: f64,
    pub f_x: f64,
    pub f_y: f64,
}

impl PointForce {
    pub fn new(s: f64, f_x: f64, f_y: f64) -> Self {
        Self { s, f_x, f_y }
    }

    pub fn magnitude(&self) -> f64 {
        self.f_x.hypot(self.f_y)
    }
}

/// Point forces ordered by strictly increasing location. May be empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<PointForce>", into = "Vec<PointForce>")]
pub struct ForceVector {
    forces: Vec<PointForce>,
}

impl TryFrom<Vec<PointForce>> for ForceVector {
    type Error = Error;

    fn try_from(forces: Vec<PointForce>) -> Result<Self> {
        Self::new(forces)
    }
}

impl From<ForceVector> for Vec<PointForce> {
    fn from(fv: ForceVector) -> Self {
        fv.forces
    }
}

impl ForceVector {
    pub fn new(forces: Vec<PointForce>) -> Result<Self> {
        for f in &forces {
            if !(f.s.is_finite() && f.f_x.is_finite() && f.f_y.is_finite()) {
                return Err(Error::NonFinite("point force"));
            }
        }
        if let Some(i) = forces.windows(2).position(|w| w[1].s <= w[0].s) {
            return Err(Error::Unordered { index: i + 1 });
        }
        Ok(Self { forces })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(s: f64, f_x: f64, f_y: f64) -> Self {
        Self {
            forces: vec![PointForce::new(s, f_x, f_y)],
        }
    }

    pub fn len(&self) -> usize {
        self.forces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forces.is_empty()
    }

    pub fn forces(&self) -> &[PointForce] {
        &self.forces
    }

    pub fn iter(&self) -> impl Iterator<Item = &PointForce> {
        self.forces.iter()
    }

    /// Flat `[s¹, f¹_x, f¹_y, s², …]`.
    pub fn pack(&self) -> Vec<f64> {
        self.forces.iter().flat_map(|f| [f.s, f.f_x, f.f_y]).collect()
    }

    /// Inverse of [`pack`](Self::pack). Rejects sequences whose locations
    /// are not strictly increasing.
    pub fn unpack(params: &[f64]) -> Result<Self> {
        if !params.len().is_multiple_of(3) {
            return Err(Error::ParameterLength(params.len()));
        }
        Self::new(
            params
                .chunks_exact(3)
                .map(|c| PointForce::new(c[0], c[1], c[2]))
                .collect(),
        )
    }

    /// Every force rotated by `angle` (rad) about the rod axis.
    pub fn rotated(&self, angle: f64) -> Self {
        let (sin, cos) = angle.sin_cos();
        Self {
            forces: self
                .forces
                .iter()
                .map(|f| PointForce::new(f.s, cos * f.f_x - sin * f.f_y, sin * f.f_x + cos * f.f_y))
                .collect(),
        }
    }

    /// Every component multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            forces: self
                .forces
                .iter()
                .map(|f| PointForce::new(f.s, k * f.f_x, k * f.f_y))
                .collect(),
        }
    }

    /// Sum of all force components (N).
    pub fn total(&self) -> (f64, f64) {
        self.forces.iter().fold((0.0, 0.0), |(x, y), f| (x + f.f_x, y + f.f_y))
    }

    pub fn check_within(&self, length: f64) -> Result<()> {
        for f in &self.forces {
            if !(0.0..=length).contains(&f.s) {
                return Err(Error::LocationOutOfRange {
                    s_m: f.s,
                    length_m: length,
                });
            }
        }
        Ok(())
    }
}

/// How a point force between two nodes is split between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Apportionment {
    /// Linear shape functions: the nearer node gets the larger share. This
    /// keeps both the resultant and the first moment of the load exact.
    #[default]
    Linear,
    /// Shares swapped (the farther node gets the larger share). Conserves
    /// the resultant only.
    PaperLiteral,
}

/// Nodal densities plus the concentrated load at the tip.
#[derive(Debug, Clone, PartialEq)]
pub struct AppliedLoads {
    pub distributed: DistributedLoad,
    pub tip: TipLoad,
}

/// [`distribute_forces_with`] using linear apportionment.
pub fn distribute_forces(fv: &ForceVector, grid: &NodeGrid) -> Result<AppliedLoads> {
    distribute_forces_with(fv, grid, Apportionment::Linear)
}

/// Spreads each point force over the two nodes bounding its segment so that
/// the trapezoid-rule integral of the densities reproduces the force. The
/// end nodes carry half a trapezoid weight, so their share is doubled.
/// Forces sitting exactly at the tip become the tip boundary load instead.
pub fn distribute_forces_with(fv: &ForceVector, grid: &NodeGrid, mode: Apportionment) -> Result<AppliedLoads> {
    let length = grid.length();
    fv.check_within(length)?;
    let q = grid.len();
    let delta = grid.spacing();
    let mut distributed = DistributedLoad::zeros(*grid);
    let mut tip = TipLoad::default();

    let end_weight = |i: usize| if i == 0 || i == q - 1 { 2.0 } else { 1.0 };
    for f in fv.iter() {
        if f.s >= length {
            tip.force += Vector3::new(f.f_x, f.f_y, 0.0);
            continue;
        }
        let (j, t) = grid.locate(f.s);
        let (w_lo, w_hi) = match mode {
            Apportionment::Linear => (1.0 - t, t),
            Apportionment::PaperLiteral => (t, 1.0 - t),
        };
        for (node, w) in [(j, w_lo), (j + 1, w_hi)] {
            let scale = w * end_weight(node) / delta;
            distributed.f_x[node] += scale * f.f_x;
            distributed.f_y[node] += scale * f.f_y;
        }
    }
    Ok(AppliedLoads { distributed, tip })
}
