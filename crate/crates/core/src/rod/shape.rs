use nalgebra::{Matrix3, Vector3};

use super::{hat, orthonormalize, CurvatureField, RodState};
use crate::error::Result;

/// Curvature at the midpoint of segment `j`, from a cubic through the
/// nearest (up to) four nodes.
fn midpoint_value(values: &[f64], j: usize) -> f64 {
    let q = values.len();
    if q < 4 {
        return 0.5 * (values[j] + values[j + 1]);
    }
    // window start so that nodes j and j+1 are inside, centered when possible
    let start = j.saturating_sub(1).min(q - 4);
    let x = j as f64 + 0.5 - start as f64;
    let mut acc = 0.0;
    for a in 0..4 {
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (x - b as f64) / (a as f64 - b as f64);
            }
        }
        acc += w * values[start + a];
    }
    acc
}

/// Pose of the rod from its curvature field, integrating `Ṗ = R e_z` and
/// `Ṙ = R û` forward from the clamp (`P = 0`, `R = I`). Frames are
/// re-projected onto SO(3) after every step. Internal loads are not
/// computed.
pub fn reconstruct_shape(field: &CurvatureField) -> Result<RodState> {
    field.validate()?;
    let grid = field.grid;
    let q = grid.len();
    let h = grid.spacing();
    let e3 = Vector3::z();

    let u_at = |i: usize| Vector3::new(field.u_x[i], field.u_y[i], 0.0);
    let mut positions = Vec::with_capacity(q);
    let mut rotations = Vec::with_capacity(q);
    let mut p = Vector3::zeros();
    let mut r = Matrix3::identity();
    positions.push(p);
    rotations.push(r);

    for j in 0..q - 1 {
        let u0 = hat(&u_at(j));
        let um = hat(&Vector3::new(
            midpoint_value(&field.u_x, j),
            midpoint_value(&field.u_y, j),
            0.0,
        ));
        let u1 = hat(&u_at(j + 1));

        let r1 = r;
        let kr1 = r1 * u0;
        let r2 = r + kr1 * (0.5 * h);
        let kr2 = r2 * um;
        let r3 = r + kr2 * (0.5 * h);
        let kr3 = r3 * um;
        let r4 = r + kr3 * h;
        let kr4 = r4 * u1;

        p += (r1 * e3 + (r2 * e3) * 2.0 + (r3 * e3) * 2.0 + r4 * e3) * (h / 6.0);
        r = orthonormalize(&(r + (kr1 + kr2 * 2.0 + kr3 * 2.0 + kr4) * (h / 6.0)));
        positions.push(p);
        rotations.push(r);
    }

    Ok(RodState {
        grid,
        positions,
        rotations,
        internal_force: None,
        internal_moment: None,
    })
}
