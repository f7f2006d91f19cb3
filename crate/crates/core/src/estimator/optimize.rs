//! Bounded Gauss–Newton/Levenberg–Marquardt over packed force parameters,
//! with forward-difference Jacobians and projection onto the feasible set.

use nalgebra::{DMatrix, DVector};

/// Feasible set for `h` forces: locations in `[min_sep, length]`, ordered
/// with at least `min_sep` between neighbours, components in
/// `[-bound, bound]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bounds {
    pub length: f64,
    pub min_sep: f64,
    pub bound: f64,
}

impl Bounds {
    /// Euclidean projection of `x` onto the feasible set.
    pub fn project(&self, x: &mut [f64]) {
        let h = x.len() / 3;
        if h == 0 {
            return;
        }
        // shift out the separation so the constraint becomes plain ordering
        let mut t: Vec<f64> = (0..h).map(|i| x[3 * i] - i as f64 * self.min_sep).collect();
        isotonic(&mut t);
        let lo = self.min_sep;
        let hi = self.length - (h - 1) as f64 * self.min_sep;
        for (i, ti) in t.iter().enumerate() {
            x[3 * i] = ti.clamp(lo, hi.max(lo)) + i as f64 * self.min_sep;
            x[3 * i + 1] = x[3 * i + 1].clamp(-self.bound, self.bound);
            x[3 * i + 2] = x[3 * i + 2].clamp(-self.bound, self.bound);
        }
    }

    fn typical(&self, i: usize) -> f64 {
        if i.is_multiple_of(3) {
            self.length
        } else {
            self.bound
        }
    }
}

/// Pool-adjacent-violators: least-squares non-decreasing fit, in place.
fn isotonic(v: &mut [f64]) {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(v.len());
    for &x in v.iter() {
        blocks.push((x, 1));
        while blocks.len() > 1 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let n = n1 + n2;
            *blocks.last_mut().unwrap() = ((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n);
        }
    }
    let mut i = 0;
    for (m, n) in blocks {
        for _ in 0..n {
            v[i] = m;
            i += 1;
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Settings {
    pub max_evaluations: usize,
    pub step_tolerance: f64,
    pub loss_tolerance: f64,
    pub fd_relative_step: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub loss: f64,
}

/// Minimises `‖r(x)‖²` from the projected start `x0`. Residual failures are
/// treated as rejected trial points.
pub(crate) fn minimize<F>(mut residuals: F, x0: &[f64], bounds: &Bounds, settings: &Settings) -> Option<Outcome>
where
    F: FnMut(&[f64]) -> Option<Vec<f64>>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    bounds.project(&mut x);
    // the budget counts residual calls made here; callers may count more
    let mut evaluations = 1;
    let mut r = residuals(&x)?;
    let mut loss = sq(&r);
    let mut lambda = 1e-3;

    'outer: while evaluations < settings.max_evaluations && loss > settings.loss_tolerance {
        // forward differences, stepping inwards where a bound blocks the way
        let mut jac = DMatrix::zeros(r.len(), n);
        for i in 0..n {
            let mut step = settings.fd_relative_step * x[i].abs().max(0.1 * bounds.typical(i));
            let mut xp = x.clone();
            xp[i] += step;
            let mut projected = xp.clone();
            bounds.project(&mut projected);
            if projected[i] != xp[i] {
                step = -step;
                xp[i] = x[i] + step;
            }
            evaluations += 1;
            let Some(rp) = residuals(&xp) else {
                continue;
            };
            for (k, (a, b)) in rp.iter().zip(&r).enumerate() {
                jac[(k, i)] = (a - b) / step;
            }
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * DVector::from_column_slice(&r);
        let diag_max = jtj.diagonal().amax();
        if diag_max == 0.0 {
            break;
        }

        loop {
            if evaluations >= settings.max_evaluations || lambda > 1e12 {
                break 'outer;
            }
            let mut damped = jtj.clone();
            for i in 0..n {
                damped[(i, i)] += lambda * (jtj[(i, i)] + 1e-9 * diag_max);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&(-&grad));
            let mut trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            bounds.project(&mut trial);
            let moved = trial
                .iter()
                .zip(&x)
                .enumerate()
                .map(|(i, (a, b))| ((a - b) / bounds.typical(i)).abs())
                .fold(0.0, f64::max);
            if moved < settings.step_tolerance {
                break 'outer;
            }
            evaluations += 1;
            match residuals(&trial) {
                Some(rt) if sq(&rt) < loss => {
                    let new_loss = sq(&rt);
                    let small_gain = loss - new_loss <= 1e-15 * loss;
                    x = trial;
                    r = rt;
                    loss = new_loss;
                    lambda = (lambda * 0.3).max(1e-12);
                    if small_gain {
                        break 'outer;
                    }
                    break;
                }
                _ => lambda *= 4.0,
            }
        }
    }

    Some(Outcome { x, loss })
}

fn sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}
