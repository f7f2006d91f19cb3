//! Small dense Levenberg–Marquardt solver for square-ish root-finding
//! problems, with a forward-difference Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

#[derive(Debug, Clone, Copy)]
pub(crate) struct LmOptions {
    pub max_iterations: usize,
    /// Stop once the residual 2-norm is below this.
    pub tolerance: f64,
    pub initial_damping: f64,
    pub fd_step: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct LmReport {
    pub x: DVector<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn jacobian<F>(f: &mut F, x: &DVector<f64>, r: &DVector<f64>, step: f64) -> Result<DMatrix<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut jac = DMatrix::zeros(r.len(), x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        let h = step * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let rp = f(&xp)?;
        jac.set_column(i, &((rp - r) / h));
        xp[i] = x[i];
    }
    Ok(jac)
}

/// Drives `f(x)` towards zero. A failed Cholesky factorisation of the damped
/// normal equations (rank deficiency) is treated like a rejected step: the
/// damping grows and the step is retried.
pub(crate) fn solve<F>(mut f: F, x0: DVector<f64>, opts: &LmOptions) -> Result<LmReport>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut x = x0;
    let mut r = f(&x)?;
    let mut norm = r.norm();
    let mut lambda = opts.initial_damping;
    let mut iterations = 0;

    while norm >= opts.tolerance && iterations < opts.max_iterations {
        iterations += 1;
        let jac = jacobian(&mut f, &x, &r, opts.fd_step)?;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        let scale = jtj.diagonal().amax().max(f64::MIN_POSITIVE);

        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = jtj.clone();
            for i in 0..x.len() {
                damped[(i, i)] += lambda * (jtj[(i, i)] + 1e-12 * scale);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            let x_new = &x + &step;
            let r_new = match f(&x_new) {
                Ok(v) if v.iter().all(|e| e.is_finite()) => v,
                _ => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let norm_new = r_new.norm();
            if norm_new < norm {
                x = x_new;
                r = r_new;
                norm = norm_new;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            break;
        }
    }

    Ok(LmReport {
        converged: norm < opts.tolerance,
        x,
        residual_norm: norm,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_rosenbrock_residuals() {
        let f = |x: &DVector<f64>| Ok(DVector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]));
        let opts = LmOptions {
            max_iterations: 200,
            tolerance: 1e-12,
            initial_damping: 1e-3,
            fd_step: 1e-8,
        };
        let rep = solve(f, DVector::from_vec(vec![-1.2, 1.0]), &opts).unwrap();
        assert!(rep.converged);
        assert!((rep.x[0] - 1.0).abs() < 1e-9 && (rep.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reports_non_convergence() {
        // x² + 1 has no real root
        let f = |x: &DVector<f64>| Ok(DVector::from_vec(vec![x[0] * x[0] + 1.0]));
        let opts = LmOptions {
            max_iterations: 50,
            tolerance: 1e-10,
            initial_damping: 1e-3,
            fd_step: 1e-8,
        };
        let rep = solve(f, DVector::from_vec(vec![3.0]), &opts).unwrap();
        assert!(!rep.converged);
        assert!(rep.residual_norm >= 1.0 - 1e-9);
    }
}
