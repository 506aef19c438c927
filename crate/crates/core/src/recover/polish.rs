//! Joint least-squares refinement of recovered terms against the oracle's
//! values on the real unit sphere.

use num_complex::Complex64;

use crate::model::{ExpTerm, FarFieldOracle};
use crate::numerics::{solve_complex_linear, ComplexMatrix, ComplexVector};

const MAX_ITER: usize = 30;

/// Levenberg-Marquardt refinement of `(c_j, y_j)` so that
/// `sum_j c_j e^{i y_j . theta}` matches `u(theta)` at the given real
/// directions. Returns `None` if the iteration breaks down.
pub(crate) fn polish(u: &FarFieldOracle, terms: &[ExpTerm], directions: &[Vec<f64>]) -> Option<Vec<ExpTerm>> {
    let dim = u.dim();
    let per = 2 + dim;
    let nun = per * terms.len();
    if nun == 0 {
        return Some(Vec::new());
    }
    let data: Vec<Complex64> = directions.iter().map(|t| u.eval_real(t)).collect();
    let mut cur = terms.to_vec();
    let mut lambda = 1e-6;
    let cost = |ts: &[ExpTerm]| -> f64 {
        directions
            .iter()
            .zip(&data)
            .map(|(t, d)| (d - model(ts, t)).norm_sqr())
            .sum()
    };
    let mut cur_cost = cost(&cur);
    for _ in 0..MAX_ITER {
        let mut normal = vec![0.0; nun * nun];
        let mut grad = vec![0.0; nun];
        let mut col = vec![Complex64::new(0.0, 0.0); nun];
        for (theta, d) in directions.iter().zip(&data) {
            let r = d - model(&cur, theta);
            for (j, t) in cur.iter().enumerate() {
                let ph: f64 = t.frequency.iter().zip(theta).map(|(a, b)| a * b).sum();
                let e = Complex64::from_polar(1.0, ph);
                col[j * per] = e;
                col[j * per + 1] = Complex64::new(0.0, 1.0) * e;
                for k in 0..dim {
                    col[j * per + 2 + k] = Complex64::new(0.0, theta[k]) * t.coefficient * e;
                }
            }
            for a in 0..nun {
                grad[a] += col[a].re * r.re + col[a].im * r.im;
                for b in a..nun {
                    normal[a * nun + b] += col[a].re * col[b].re + col[a].im * col[b].im;
                }
            }
        }
        for a in 0..nun {
            for b in 0..a {
                normal[a * nun + b] = normal[b * nun + a];
            }
        }
        let mut improved = false;
        for _ in 0..8 {
            let mut m = ComplexMatrix::zeros(nun);
            for a in 0..nun {
                for b in 0..nun {
                    let mut v = normal[a * nun + b];
                    if a == b {
                        v *= 1.0 + lambda;
                    }
                    m.set(a, b, Complex64::new(v, 0.0));
                }
            }
            let rhs = ComplexVector::new(grad.iter().map(|&g| Complex64::new(g, 0.0)).collect());
            let step = solve_complex_linear(&m, &rhs).ok()?;
            let trial: Vec<ExpTerm> = cur
                .iter()
                .enumerate()
                .map(|(j, t)| ExpTerm {
                    coefficient: t.coefficient + Complex64::new(step[j * per].re, step[j * per + 1].re),
                    frequency: t
                        .frequency
                        .iter()
                        .enumerate()
                        .map(|(k, v)| v + step[j * per + 2 + k].re)
                        .collect(),
                })
                .collect();
            let trial_cost = cost(&trial);
            if trial_cost.is_finite() && trial_cost <= cur_cost {
                let gain = cur_cost - trial_cost;
                cur = trial;
                cur_cost = trial_cost;
                lambda = (lambda * 0.3).max(1e-12);
                improved = gain > 1e-30 * (1.0 + cur_cost);
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Some(cur)
}

fn model(terms: &[ExpTerm], theta: &[f64]) -> Complex64 {
    terms
        .iter()
        .map(|t| {
            let ph: f64 = t.frequency.iter().zip(theta).map(|(a, b)| a * b).sum();
            t.coefficient * Complex64::from_polar(1.0, ph)
        })
        .sum()
}

/// `sup` over the directions of `|u - sum_j c_j e^{i y_j . theta}|`.
pub(crate) fn sup_residual(u: &FarFieldOracle, terms: &[ExpTerm], directions: &[Vec<f64>]) -> f64 {
    directions
        .iter()
        .map(|t| (u.eval_real(t) - model(terms, t)).norm())
        .fold(0.0, f64::max)
}
