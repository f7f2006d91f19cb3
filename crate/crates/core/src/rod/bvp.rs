use nalgebra::{DVector, Matrix3, Vector3};

use super::{
    bending_stiffness, hat, orthonormalize, CurvatureField, DistributedLoad, RodProperties, RodState, TipLoad,
};
use crate::error::{Error, Result};
use crate::lm::{self, LmOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvpOptions {
    /// Levenberg–Marquardt iterations allowed per load level.
    pub max_iterations: usize,
    /// Required 2-norm of the tip residual `(N(L) − R f_tip, M(L) − R T_tip)`.
    pub tolerance: f64,
    /// Base internal force and moment `(N(0), M(0))`; zero when `None`.
    pub initial_guess: Option<[f64; 6]>,
    /// Ramp the load up from zero if the direct solve fails.
    pub continuation: bool,
    /// RK4 steps per grid segment. Two matches the local-frame integrator
    /// step for step; RK4 does not conserve torsion exactly, so the default
    /// is finer to keep the spurious `u_z` below 1e-9 under large loads.
    pub substeps: usize,
}

impl Default for BvpOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-10,
            initial_guess: None,
            continuation: true,
            substeps: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub state: RodState,
    /// Bending curvature `K⁻¹ Rᵀ M` per node.
    pub curvature: CurvatureField,
    /// Torsional curvature per node.
    pub torsion: Vec<f64>,
    /// Total LM iterations over all load levels.
    pub iterations: usize,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, Copy)]
struct Global {
    p: Vector3<f64>,
    r: Matrix3<f64>,
    n: Vector3<f64>,
    m: Vector3<f64>,
}

impl Global {
    fn add(&self, k: &Global, h: f64) -> Global {
        Global {
            p: self.p + k.p * h,
            r: self.r + k.r * h,
            n: self.n + k.n * h,
            m: self.m + k.m * h,
        }
    }
}

/// `Ṗ = R v`, `Ṙ = R û`, `Ṅ = −R f`, `Ṁ = −Ṗ × N` with `v = e_z` and
/// `u = K⁻¹ Rᵀ M`.
fn deriv(y: &Global, f_local: &Vector3<f64>, k: &Vector3<f64>) -> Global {
    let u = (y.r.transpose() * y.m).component_div(k);
    let pdot = y.r.column(2).into_owned();
    Global {
        p: pdot,
        r: y.r * hat(&u),
        n: -(y.r * f_local),
        m: -pdot.cross(&y.n),
    }
}

struct Shooter<'a> {
    k: Vector3<f64>,
    substeps: usize,
    load: &'a DistributedLoad,
    tip: &'a TipLoad,
}

impl Shooter<'_> {
    fn integrate(&self, base: &DVector<f64>, scale: f64, mut record: Option<&mut Vec<Global>>) -> Global {
        let grid = self.load.grid;
        let h = grid.spacing();
        let mut y = Global {
            p: Vector3::zeros(),
            r: Matrix3::identity(),
            n: Vector3::new(base[0], base[1], base[2]),
            m: Vector3::new(base[3], base[4], base[5]),
        };
        if let Some(out) = record.as_deref_mut() {
            out.push(y);
        }
        let n_sub = self.substeps.max(1);
        let h = h / n_sub as f64;
        for j in 0..grid.len() - 1 {
            let f_lo = self.load.at_node(j) * scale;
            let f_hi = self.load.at_node(j + 1) * scale;
            let at = |t: f64| f_lo + (f_hi - f_lo) * t;
            for sub in 0..n_sub {
                let t0 = sub as f64 / n_sub as f64;
                let t1 = (sub + 1) as f64 / n_sub as f64;
                let (f0, fm, f1) = (at(t0), at(0.5 * (t0 + t1)), at(t1));
                let k1 = deriv(&y, &f0, &self.k);
                let k2 = deriv(&y.add(&k1, 0.5 * h), &fm, &self.k);
                let k3 = deriv(&y.add(&k2, 0.5 * h), &fm, &self.k);
                let k4 = deriv(&y.add(&k3, h), &f1, &self.k);
                let mut next = y.add(&k1, h / 6.0);
                next = next.add(&k2, h / 3.0);
                next = next.add(&k3, h / 3.0);
                next = next.add(&k4, h / 6.0);
                next.r = orthonormalize(&next.r);
                y = next;
            }
            if let Some(out) = record.as_deref_mut() {
                out.push(y);
            }
        }
        y
    }

    fn residual(&self, base: &DVector<f64>, scale: f64) -> DVector<f64> {
        let end = self.integrate(base, scale, None);
        let dn = end.n - end.r * self.tip.force * scale;
        let dm = end.m - end.r * self.tip.moment * scale;
        DVector::from_vec(vec![dn.x, dn.y, dn.z, dm.x, dm.y, dm.z])
    }
}

/// Shooting solution of the global-frame Cosserat equations. Convenience
/// wrapper over [`solve_bvp_reference_with`] with default options.
pub fn solve_bvp_reference(props: &RodProperties, load: &DistributedLoad, tip: &TipLoad) -> Result<RodState> {
    solve_bvp_reference_with(props, load, tip, &BvpOptions::default()).map(|s| s.state)
}

/// Guesses the six base loads, integrates forward to the tip and drives the
/// tip residual to zero with Levenberg–Marquardt. If the direct solve fails
/// and continuation is enabled, the load is ramped from zero in adaptive
/// increments, warm-starting each level from the previous one.
pub fn solve_bvp_reference_with(
    props: &RodProperties,
    load: &DistributedLoad,
    tip: &TipLoad,
    opts: &BvpOptions,
) -> Result<BvpSolution> {
    let stiffness = bending_stiffness(props)?;
    load.grid.check_rod(props)?;
    load.validate()?;
    tip.validate()?;

    let shooter = Shooter {
        k: stiffness.as_vector(),
        substeps: opts.substeps,
        load,
        tip,
    };
    let lm_opts = LmOptions {
        max_iterations: opts.max_iterations,
        tolerance: opts.tolerance,
        initial_damping: 1e-3,
        fd_step: 1e-7,
    };

    let mut x = DVector::from_row_slice(&opts.initial_guess.unwrap_or([0.0; 6]));
    let mut iterations = 0;
    let mut level: f64 = 0.0;
    let mut increment: f64 = 1.0;
    let mut last_residual;
    loop {
        let target = (level + increment).min(1.0);
        let report = lm::solve(|b| Ok(shooter.residual(b, target)), x.clone(), &lm_opts)?;
        iterations += report.iterations;
        last_residual = report.residual_norm;
        if report.converged {
            x = report.x;
            level = target;
            if level >= 1.0 {
                break;
            }
            increment *= 1.5;
        } else {
            if !opts.continuation || increment < 1.0 / 4096.0 {
                return Err(Error::BvpNotConverged {
                    iterations,
                    residual: last_residual,
                });
            }
            increment *= 0.25;
        }
    }

    let mut trajectory = Vec::with_capacity(load.grid.len());
    shooter.integrate(&x, 1.0, Some(&mut trajectory));
    let state = RodState {
        grid: load.grid,
        positions: trajectory.iter().map(|g| g.p).collect(),
        rotations: trajectory.iter().map(|g| g.r).collect(),
        internal_force: Some(trajectory.iter().map(|g| g.n).collect()),
        internal_moment: Some(trajectory.iter().map(|g| g.m).collect()),
    };
    let local = state.local_curvature(&stiffness).expect("moments were recorded");
    let curvature = CurvatureField {
        grid: load.grid,
        u_x: local.iter().map(|u| u.x).collect(),
        u_y: local.iter().map(|u| u.y).collect(),
    };
    let torsion = local.iter().map(|u| u.z).collect();
    Ok(BvpSolution {
        state,
        curvature,
        torsion,
        iterations,
        residual_norm: last_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rod::{integrate_curvature_backward, NodeGrid};

    #[test]
    fn unloaded_rod_has_no_internal_loads() {
        let props = RodProperties::nitinol_tube();
        let grid = NodeGrid::for_rod(&props, 40).unwrap();
        let sol = solve_bvp_reference_with(
            &props,
            &DistributedLoad::zeros(grid),
            &TipLoad::default(),
            &BvpOptions::default(),
        )
        .unwrap();
        assert_eq!(sol.iterations, 0);
        let n = sol.state.internal_force.as_ref().unwrap();
        let m = sol.state.internal_moment.as_ref().unwrap();
        assert!(n.iter().chain(m).all(|v| v.norm() == 0.0));
        assert!((sol.state.tip_position() - Vector3::new(0.0, 0.0, props.length)).norm() < 1e-13);
    }

    #[test]
    fn largest_tip_force_converges() {
        let props = RodProperties::nitinol_tube();
        let grid = NodeGrid::for_rod(&props, 100).unwrap();
        let tip = TipLoad::force(Vector3::new(1.96, 0.0, 0.0));
        let sol =
            solve_bvp_reference_with(&props, &DistributedLoad::zeros(grid), &tip, &BvpOptions::default()).unwrap();
        assert!(sol.residual_norm < 1e-10);
        let fast = integrate_curvature_backward(&props, &DistributedLoad::zeros(grid), &tip).unwrap();
        let scale = fast.max_magnitude();
        for i in 0..grid.len() {
            assert!((fast.u_x[i] - sol.curvature.u_x[i]).abs() < 1e-6 * scale);
            assert!((fast.u_y[i] - sol.curvature.u_y[i]).abs() < 1e-6 * scale);
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let props = RodProperties::nitinol_tube();
        let grid = NodeGrid::for_rod(&props, 50).unwrap();
        let tip = TipLoad::force(Vector3::new(0.5, 0.0, 0.0));
        let opts = BvpOptions {
            max_iterations: 1,
            continuation: false,
            ..BvpOptions::default()
        };
        let err = solve_bvp_reference_with(&props, &DistributedLoad::zeros(grid), &tip, &opts).unwrap_err();
        assert!(matches!(err, Error::BvpNotConverged { .. }), "{err}");
    }
}
