//! Newton's method for two real equations in two real unknowns.

use super::NumericsError;

/// Relative step of the central-difference Jacobian.
const FD_STEP: f64 = 1e-6;
/// Maximum number of step halvings per iteration.
const MAX_HALVINGS: usize = 12;

/// Converged Newton iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonRoot {
    pub point: [f64; 2],
    /// `max(|F_1|, |F_2|)` at `point`.
    pub residual: f64,
    pub iterations: usize,
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

/// Solves `F(x) = 0` with a central-difference Jacobian and step halving.
///
/// Returns the first iterate with `max|F| <= tol`; on failure the error
/// carries the best iterate seen.
pub fn newton2d<F>(f: F, x0: [f64; 2], tol: f64, max_iter: usize) -> Result<NewtonRoot, NumericsError>
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    if !(x0[0].is_finite() && x0[1].is_finite()) {
        return Err(NumericsError::NonFinite("Newton starting point".into()));
    }
    let mut x = x0;
    let mut fx = f(x);
    let mut res = norm(fx);
    let mut best = (x, res);
    let fail = |best: ([f64; 2], f64), iterations| NumericsError::NonConvergence {
        best: best.0,
        residual: best.1,
        iterations,
    };
    for it in 0..=max_iter {
        if !res.is_finite() {
            return Err(fail(best, it));
        }
        if res <= tol {
            return Ok(NewtonRoot {
                point: x,
                residual: res,
                iterations: it,
            });
        }
        if it == max_iter {
            break;
        }
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let h = FD_STEP * x[k].abs().max(1.0);
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let (fp, fm) = (f(xp), f(xm));
            for r in 0..2 {
                jac[r][k] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let scale = jac.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        if !(det.abs() > 1e-300 && det.abs() > 1e-14 * scale * scale) {
            return Err(fail(best, it));
        }
        let dx = [
            -(jac[1][1] * fx[0] - jac[0][1] * fx[1]) / det,
            -(-jac[1][0] * fx[0] + jac[0][0] * fx[1]) / det,
        ];
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial = [x[0] + lambda * dx[0], x[1] + lambda * dx[1]];
            let ft = f(trial);
            let rt = norm(ft);
            if rt.is_finite() && rt < res {
                x = trial;
                fx = ft;
                res = rt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // Take the full step anyway; the best iterate is still tracked.
            x = [x[0] + dx[0], x[1] + dx[1]];
            fx = f(x);
            res = norm(fx);
        }
        if res < best.1 {
            best = (x, res);
        }
    }
    Err(fail(best, max_iter))
}
