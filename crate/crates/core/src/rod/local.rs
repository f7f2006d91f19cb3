use super::{bending_stiffness, CurvatureField, DistributedLoad, RodProperties, TipLoad};
use crate::error::{Error, Result};

/// RK4 steps per grid segment.
const SUBSTEPS: usize = 2;

/// State `[u_x, u_y, n_x, n_y, n_z]`.
type State = [f64; 5];

/// Local-frame equilibrium of a straight, shear-free, circular rod without
/// distributed moments. With torsion identically zero:
///
/// ```text
/// u̇_x =  n_y / K11          ṅ_x = −f_x − u_y n_z
/// u̇_y = −n_x / K22          ṅ_y = −f_y + u_x n_z
///                           ṅ_z = −f_z − u_x n_y + u_y n_x
/// ```
#[inline]
fn rhs(y: &State, f: [f64; 3], k11: f64, k22: f64) -> State {
    let [ux, uy, nx, ny, nz] = *y;
    [
        ny / k11,
        -nx / k22,
        -f[0] - uy * nz,
        -f[1] + ux * nz,
        -f[2] - ux * ny + uy * nx,
    ]
}

#[inline]
fn axpy(y: &State, h: f64, k: &State) -> State {
    let mut out = *y;
    for (o, d) in out.iter_mut().zip(k) {
        *o += h * d;
    }
    out
}

/// Curvature at every node from the distal boundary conditions
/// `u(L) = 0`, `n(L) = tip.force`, by one RK4 sweep from the tip to the
/// clamp with two steps per segment. The load is interpolated linearly
/// between nodes.
///
/// The tip moment must be zero: a tip couple would make `u(L) ≠ 0`.
pub fn integrate_curvature_backward(
    props: &RodProperties,
    load: &DistributedLoad,
    tip: &TipLoad,
) -> Result<CurvatureField> {
    let k = bending_stiffness(props)?;
    load.grid.check_rod(props)?;
    load.validate()?;
    tip.validate()?;
    if tip.moment.norm() != 0.0 {
        return Err(Error::InvalidConfig(
            "the local-frame integrator requires a zero tip moment".into(),
        ));
    }

    let grid = load.grid;
    let q = grid.len();
    let h = -grid.spacing();
    let mut field = CurvatureField::zeros(grid);
    let mut y: State = [0.0, 0.0, tip.force.x, tip.force.y, tip.force.z];
    let node = |i: usize| [load.f_x[i], load.f_y[i], load.f_z[i]];

    let h = h / SUBSTEPS as f64;
    for j in (1..q).rev() {
        let f_hi = node(j);
        let f_lo = node(j - 1);
        // load at fraction t of the way from node j down to node j-1
        let at = |t: f64| {
            [
                f_hi[0] + t * (f_lo[0] - f_hi[0]),
                f_hi[1] + t * (f_lo[1] - f_hi[1]),
                f_hi[2] + t * (f_lo[2] - f_hi[2]),
            ]
        };
        for sub in 0..SUBSTEPS {
            let t0 = sub as f64 / SUBSTEPS as f64;
            let t1 = (sub + 1) as f64 / SUBSTEPS as f64;
            let f_mid = at(0.5 * (t0 + t1));
            let k1 = rhs(&y, at(t0), k.k11, k.k22);
            let k2 = rhs(&axpy(&y, 0.5 * h, &k1), f_mid, k.k11, k.k22);
            let k3 = rhs(&axpy(&y, 0.5 * h, &k2), f_mid, k.k11, k.k22);
            let k4 = rhs(&axpy(&y, h, &k3), at(t1), k.k11, k.k22);
            for i in 0..5 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        field.u_x[j - 1] = y[0];
        field.u_y[j - 1] = y[1];
    }
    Ok(field)
}
