//! Locating and extracting the dominant term of an exponential sum from
//! its values on complex rays `theta(tau) = sqrt(1 + tau^2) e1 - i tau e2`.
//!
//! Along such a ray a term `c e^{i y . theta}` has modulus
//! `|c| e^{tau e2 . y}`, so the growth rate of `ln|u|` in `tau` identifies the
//! largest projection `e2 . y`. The search runs in `f64` with a common
//! exponential shift; the extraction runs in double-double precision with the
//! current estimate factored out, so that previously removed terms cancel to
//! about 32 digits.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::model::{dot, norm, sphere_directions, FarFieldOracle, SubtractedTerm};
use crate::numerics::dd::{Dd, DdComplex, DD_EPSILON};

/// Required ratio between a sample and its rounding-error estimate.
const SNR: f64 = 1e7;
/// Samples per ray for slope fits.
const RAY_SAMPLES: usize = 64;
/// Samples per ray used to decide whether a ray length is usable.
const CHECK_SAMPLES: usize = 8;
/// Samples at the far end of a ray used to estimate the coefficient.
const COEFF_SAMPLES: usize = 8;
/// Ray length of the first, coarse growth-rate pass.
const COARSE_TAU: f64 = 10.0;
/// The search ray length is `TAU_BUDGET / max(1, coarse growth rate)`.
const TAU_BUDGET: f64 = 60.0;
/// Growth rates below this are treated as a bounded (constant) remainder.
pub(crate) const BOUNDED_GROWTH: f64 = 1e-6;
/// Number of ray-length doublings tried during extraction.
const MAX_DOUBLINGS: usize = 14;
/// Successive-estimate change at which extraction stops.
const CONVERGED_CHANGE: f64 = 1e-27;
/// Dominance tolerances used in successive candidate rounds.
const DOMINANCE_TOLERANCES: [f64; 3] = [5e-2, 1e-2, 1e-3];
/// Candidate extraction directions per round.
const MAX_CANDIDATES: usize = 5;
/// Minimum angle between two candidate directions.
const CANDIDATE_SEPARATION: f64 = 0.05;
/// Uncertainty assigned when no extraction ray converged.
const FALLBACK_UNCERTAINTY: f64 = 1e-6;
/// Shortest usable fraction of a requested search ray.
const MIN_USABLE_FRACTION: f64 = 1e-2;

pub(crate) fn grid_directions(dim: usize) -> Vec<Vec<f64>> {
    sphere_directions(dim, if dim == 2 { 512 } else { 2048 })
}

/// Orthonormal complements of a unit vector: one vector for `d = 2`, two for
/// `d = 3`.
pub(crate) fn tangent_frames(e2: &[f64]) -> Vec<Vec<f64>> {
    if e2.len() == 2 {
        return vec![vec![-e2[1], e2[0]]];
    }
    let a = if e2[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let p = dot(&a, e2);
    let mut t1: Vec<f64> = a.iter().zip(e2).map(|(x, y)| x - p * y).collect();
    let n = norm(&t1);
    t1.iter_mut().for_each(|v| *v /= n);
    let t2 = vec![
        e2[1] * t1[2] - e2[2] * t1[1],
        e2[2] * t1[0] - e2[0] * t1[2],
        e2[0] * t1[1] - e2[1] * t1[0],
    ];
    vec![t1, t2]
}

pub(crate) fn ray_theta(tau: f64, e1: &[f64], e2: &[f64]) -> Vec<Complex64> {
    let s = (1.0 + tau * tau).sqrt();
    e1.iter()
        .zip(e2)
        .map(|(a, b)| Complex64::new(s * a, -tau * b))
        .collect()
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

/// Least-squares slope and intercept.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn unwrap(phase: &mut [f64]) {
    let tau = 2.0 * std::f64::consts::PI;
    for i in 1..phase.len() {
        let d = phase[i] - phase[i - 1];
        phase[i] -= tau * (d / tau).round();
    }
}

/// `ln(1 + w)` accurate for small `w`.
fn log1p_c(w: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p();
    Complex64::new(re, w.im.atan2(1.0 + w.re))
}

/// `e^z - 1` accurate for small `z`.
fn expm1_c(z: Complex64) -> Complex64 {
    let half = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * z.im.cos() - 2.0 * half * half, z.re.exp() * z.im.sin())
}

/// Plain least-squares growth rate of `ln|u|` over `tau in [tau_max/2, tau_max]`.
pub(crate) fn plain_growth_rate(u: &FarFieldOracle, e1: &[f64], e2: &[f64], tau_max: f64) -> Option<f64> {
    let taus: Vec<f64> = linspace(0.5 * tau_max, tau_max, RAY_SAMPLES).collect();
    let mut logs = Vec::with_capacity(taus.len());
    for &t in &taus {
        let (lv, _) = u.log_eval(&ray_theta(t, e1, e2));
        if !lv.re.is_finite() {
            return None;
        }
        logs.push(lv.re);
    }
    Some(linear_fit(&taus, &logs).0)
}

/// Shrinks `tau` until every check sample exceeds its rounding floor by `SNR`.
fn usable_tau(u: &FarFieldOracle, e1: &[f64], e2: &[f64], mut tau: f64) -> f64 {
    let log_snr = SNR.ln();
    for _ in 0..60 {
        let ok = linspace(0.5 * tau, tau, CHECK_SAMPLES).all(|t| {
            let (lv, lf) = u.log_eval(&ray_theta(t, e1, e2));
            lv.re - lf > log_snr
        });
        if ok {
            return tau;
        }
        tau *= 0.8;
    }
    tau
}

/// Growth rate along `e2`, or `-inf` if rounding errors leave less than
/// `MIN_USABLE_FRACTION` of the requested ray usable.
fn guarded_slope(u: &FarFieldOracle, e2: &[f64], tau: f64) -> f64 {
    let e1 = &tangent_frames(e2)[0];
    let t = usable_tau(u, e1, e2, tau);
    if t < MIN_USABLE_FRACTION * tau {
        return f64::NEG_INFINITY;
    }
    let taus: Vec<f64> = linspace(0.5 * t, t, RAY_SAMPLES).collect();
    let logs: Vec<f64> = taus.iter().map(|&s| u.log_eval(&ray_theta(s, e1, e2)).0.re).collect();
    if logs.iter().any(|v| !v.is_finite()) {
        return f64::NEG_INFINITY;
    }
    linear_fit(&taus, &logs).0
}

fn grid_slopes(u: &FarFieldOracle, grid: &[Vec<f64>], tau: f64) -> Vec<f64> {
    grid.par_iter().map(|e2| guarded_slope(u, e2, tau)).collect()
}

/// Current estimate of the term being extracted.
#[derive(Debug, Clone)]
struct Estimate {
    y: Vec<Dd>,
    c: DdComplex,
}

impl Estimate {
    fn y_f64(&self) -> Vec<f64> {
        self.y.iter().map(|v| v.to_f64()).collect()
    }

    fn is_finite(&self) -> bool {
        self.y.iter().all(|v| v.is_finite()) && self.c.re.is_finite() && self.c.im.is_finite()
    }

    /// Relative change between two estimates.
    fn change(&self, other: &Estimate) -> f64 {
        let dy: f64 = self
            .y
            .iter()
            .zip(&other.y)
            .map(|(a, b)| (*a - *b).to_f64().powi(2))
            .sum::<f64>()
            .sqrt();
        let dc = (self.c - other.c).to_c64().norm() / self.c.to_c64().norm();
        dy + dc
    }
}

/// `(u(theta) e^{-i y . theta} / c - 1, relative rounding floor)`.
fn relative_sample(u: &FarFieldOracle, est: &Estimate, theta: &[Complex64]) -> Option<(Complex64, f64)> {
    let (rho, floor) = u.dd_eval_shifted(theta, &est.y)?;
    let c = est.c.to_c64();
    let w = (rho - est.c).div_c64(c).to_c64();
    let rel_floor = floor / c.norm();
    if w.re.is_finite() && w.im.is_finite() && rel_floor.is_finite() {
        Some((w, rel_floor))
    } else {
        None
    }
}

fn usable_tau_dd(u: &FarFieldOracle, est: &Estimate, e1: &[f64], e2: &[f64], mut tau: f64) -> f64 {
    for _ in 0..60 {
        let ok =
            linspace(0.5 * tau, tau, CHECK_SAMPLES).all(|t| match relative_sample(u, est, &ray_theta(t, e1, e2)) {
                Some((w, floor)) => (Complex64::new(1.0, 0.0) + w).norm() > SNR * floor,
                None => false,
            });
        if ok {
            return tau;
        }
        tau *= 0.8;
    }
    tau
}

/// Fits `ln(u e^{-i y . theta} / c)` along the rays through `e2` and updates
/// the estimate. With `e2 = None` the ray direction follows the estimate.
/// Returns the new estimate and the smallest usable ray length.
fn refine(
    u: &FarFieldOracle,
    start: &Estimate,
    e2_fixed: Option<&[f64]>,
    tau: f64,
    max_iter: usize,
) -> Option<(Estimate, f64)> {
    let mut est = start.clone();
    let mut tau_used = tau;
    let mut last_step = f64::INFINITY;
    for it in 0..max_iter {
        let e2: Vec<f64> = match e2_fixed {
            Some(e) => e.to_vec(),
            None => {
                let y = est.y_f64();
                let n = norm(&y);
                if n == 0.0 {
                    return None;
                }
                y.iter().map(|v| v / n).collect()
            }
        };
        let frames = tangent_frames(&e2);
        let mut re_slopes = Vec::with_capacity(frames.len());
        let mut im_slopes = Vec::with_capacity(frames.len());
        let mut tail: Vec<(usize, f64, f64, Complex64)> = Vec::new();
        tau_used = tau;
        for (fi, e1) in frames.iter().enumerate() {
            let t = usable_tau_dd(u, &est, e1, &e2, tau);
            tau_used = tau_used.min(t);
            let taus: Vec<f64> = linspace(0.5 * t, t, RAY_SAMPLES).collect();
            let mut logs = Vec::with_capacity(RAY_SAMPLES);
            for &s in &taus {
                let (w, _) = relative_sample(u, &est, &ray_theta(s, e1, &e2))?;
                logs.push(log1p_c(w));
            }
            let re: Vec<f64> = logs.iter().map(|l| l.re).collect();
            let mut im: Vec<f64> = logs.iter().map(|l| l.im).collect();
            unwrap(&mut im);
            let ss: Vec<f64> = taus.iter().map(|t| (1.0 + t * t).sqrt()).collect();
            re_slopes.push(linear_fit(&taus, &re).0);
            im_slopes.push(linear_fit(&ss, &im).0);
            for k in RAY_SAMPLES - COEFF_SAMPLES..RAY_SAMPLES {
                tail.push((fi, taus[k], ss[k], Complex64::new(re[k], im[k])));
            }
        }
        let along = re_slopes.iter().sum::<f64>() / re_slopes.len() as f64;
        let mut delta: Vec<f64> = e2.iter().map(|v| along * v).collect();
        for (e1, b) in frames.iter().zip(&im_slopes) {
            for (d, v) in delta.iter_mut().zip(e1) {
                *d += b * v;
            }
        }
        let mean: Complex64 = tail
            .iter()
            .map(|&(fi, t, s, l)| expm1_c(l - Complex64::new(t * along, s * im_slopes[fi])))
            .sum::<Complex64>()
            / tail.len() as f64;
        for (y, d) in est.y.iter_mut().zip(&delta) {
            *y = *y + *d;
        }
        est.c = est.c + est.c.mul_c64(mean);
        if !est.is_finite() {
            return None;
        }
        let step = norm(&delta) + mean.norm();
        let ny = norm(&est.y_f64());
        if step <= 1e-29 * (1.0 + ny) || (it >= 2 && step > 0.5 * last_step) {
            break;
        }
        last_step = step;
    }
    Some((est, tau_used))
}

/// Doubles the ray length along a fixed direction and keeps the estimate
/// whose change from the previous length is smallest.
fn balanced(u: &FarFieldOracle, start: &Estimate, e2: &[f64], tau0: f64) -> Option<(f64, Estimate)> {
    let mut prev: Option<Estimate> = None;
    let mut best: Option<(f64, Estimate)> = None;
    for m in 0..MAX_DOUBLINGS {
        let tau = tau0 * 2f64.powi(m as i32);
        let from = prev.as_ref().unwrap_or(start);
        let Some((est, used)) = refine(u, from, Some(e2), tau, 12) else {
            break;
        };
        if let Some(p) = &prev {
            let dif = est.change(p);
            match &best {
                Some((b, _)) if dif > 10.0 * b => break,
                Some((b, _)) if dif >= *b => {}
                _ => best = Some((dif, est.clone())),
            }
            if dif < CONVERGED_CHANGE {
                break;
            }
        }
        prev = Some(est);
        if used < 0.99 * tau {
            break;
        }
    }
    best
}

/// Outcome of a growth-rate search.
pub(crate) enum Dominant {
    /// The remainder does not grow in any direction.
    Bounded,
    /// A term was extracted.
    Term(SubtractedTerm),
    /// Rounding errors of the removed terms hide the remainder on every ray.
    BelowFloor,
}

/// Finds and extracts the term with the largest growth rate.
pub(crate) fn extract_dominant(u: &FarFieldOracle) -> Dominant {
    let dim = u.dim();
    let grid = grid_directions(dim);
    let coarse = grid_slopes(u, &grid, COARSE_TAU);
    let r_coarse = coarse.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tau = TAU_BUDGET / r_coarse.max(1.0);
    let slopes = grid_slopes(u, &grid, tau);
    let (imax, rmax) = slopes
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &s)| if s > b.1 { (i, s) } else { b });
    if rmax == f64::NEG_INFINITY {
        return Dominant::BelowFloor;
    }
    if rmax.is_nan() || rmax < BOUNDED_GROWTH {
        return Dominant::Bounded;
    }
    let start = Estimate {
        y: grid[imax].iter().map(|v| Dd::from(rmax * v)).collect(),
        c: DdComplex::from(Complex64::new(1.0, 0.0)),
    };
    let Some((mut est, _)) = refine(u, &start, None, tau, 8) else {
        return Dominant::BelowFloor;
    };
    let removed: Vec<Vec<f64>> = u.subtracted().iter().map(|t| t.frequency_f64()).collect();
    let mut overall: Option<(f64, Estimate)> = None;
    for tol in DOMINANCE_TOLERANCES {
        let y = est.y_f64();
        let ny = norm(&y);
        if ny == 0.0 {
            break;
        }
        let candidates = candidate_directions(&grid, &slopes, &y, &removed, tol, imax);
        for e in candidates {
            let Some((dif, cand)) = balanced(u, &est, &e, tau) else {
                continue;
            };
            if overall.as_ref().is_none_or(|(b, _)| dif < *b) {
                overall = Some((dif, cand));
            }
        }
        let Some((dif, best)) = &overall else {
            break;
        };
        est = best.clone();
        if *dif < CONVERGED_CHANGE {
            break;
        }
    }
    match overall {
        Some((dif, best)) => Dominant::Term(SubtractedTerm {
            coefficient: best.c,
            frequency: best.y,
            uncertainty: (10.0 * dif).max(DD_EPSILON),
        }),
        None => Dominant::Term(fallback(&est)),
    }
}

fn fallback(est: &Estimate) -> SubtractedTerm {
    SubtractedTerm {
        coefficient: est.c,
        frequency: est.y.clone(),
        uncertainty: FALLBACK_UNCERTAINTY,
    }
}

/// Ray directions along which the estimated term dominates, ranked by the
/// smaller of its margin over removed terms and its angular depth inside the
/// dominance region. The direction of the estimate itself comes first.
fn candidate_directions(
    grid: &[Vec<f64>],
    slopes: &[f64],
    y: &[f64],
    removed: &[Vec<f64>],
    tol: f64,
    imax: usize,
) -> Vec<Vec<f64>> {
    let ny = norm(y);
    let mut dominant: Vec<bool> = grid
        .iter()
        .zip(slopes)
        .map(|(g, &s)| (s - dot(g, y)).abs() <= tol * (1.0 + ny))
        .collect();
    if !dominant.iter().any(|&b| b) {
        dominant[imax] = true;
    }
    let outside: Vec<&Vec<f64>> = grid
        .iter()
        .zip(&dominant)
        .filter(|(_, &d)| !d)
        .map(|(g, _)| g)
        .collect();
    let scores: Vec<f64> = grid
        .par_iter()
        .zip(dominant.par_iter())
        .map(|(g, &dom)| {
            if !dom {
                return f64::NEG_INFINITY;
            }
            let depth = outside.iter().map(|o| dot(g, o)).fold(f64::NEG_INFINITY, f64::max);
            let depth = if depth == f64::NEG_INFINITY {
                std::f64::consts::PI
            } else {
                depth.clamp(-1.0, 1.0).acos()
            };
            let gy = dot(g, y);
            let margin = removed.iter().map(|r| gy - dot(g, r)).fold(f64::INFINITY, f64::min);
            margin.min(depth.min(std::f64::consts::FRAC_PI_2).sin() * ny.max(1e-3))
        })
        .collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = vec![y.iter().map(|v| v / ny).collect::<Vec<f64>>()];
    let min_cos = CANDIDATE_SEPARATION.cos();
    for j in order {
        if out.len() >= MAX_CANDIDATES || !scores[j].is_finite() {
            break;
        }
        if out.iter().all(|c| dot(&grid[j], c) < min_cos) {
            out.push(grid[j].clone());
        }
    }
    out
}
