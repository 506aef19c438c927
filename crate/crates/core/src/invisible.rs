//! Pairs of distinct point potentials with identical scattering amplitude at
//! one energy and one incident direction.
//!
//! Two constructions are provided. A fitted pair places scatterers at `0` and
//! at `y2` orthogonal to `k` and tunes the strength at the origin so that the
//! second scatterer carries no charge, whatever its own strength. An
//! invisible addition places a new scatterer at a zero of the total field,
//! where it is not excited and so leaves the amplitude unchanged.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::forward::{green_radial, solve_charges, SolvedState};
use crate::model::{dist, dot, norm, sphere_directions, IncidentVector, Potential, Scatterer, Wavenumber};
use crate::numerics::{hankel0_first_kind, newton2d, NumericsError};
use rayon::prelude::*;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Number of outgoing directions compared by the certificates.
pub const CERTIFICATE_DIRECTIONS: usize = 64;
/// Number of points at which the total fields are compared.
const FIELD_POINTS: usize = 16;
/// Relative tolerance of the fitted-pair certificate.
const FITTED_TOLERANCE: f64 = 1e-12;
/// Largest `|psi|` accepted at a claimed field zero.
const ZERO_TOLERANCE: f64 = 1e-8;
/// Relative tolerance of the invisible-addition checks.
const ADDITION_TOLERANCE: f64 = 1e-8;
/// Grid minima with `|psi|` above this are not polished.
const NEWTON_BASIN: f64 = 0.5;
/// Polished zeros closer than this are the same zero.
const DEDUP_RADIUS: f64 = 1e-6;
/// Largest separation at which two polished points may still be one
/// degenerate zero.
const DEGENERATE_RADIUS: f64 = 1e-3;
/// Smallest accepted `|alpha2 - alpha1|` in a fitted pair.
const STRENGTH_SEPARATION: f64 = 1e-9;
/// Minimum distance of a new scatterer from existing ones.
const MIN_DISTANCE: f64 = 1e-6;

/// Numerical evidence that two potentials scatter identically.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// `max_l |f+(l) - f~+(l)|` over the sampled outgoing directions.
    pub amplitude_discrepancy: f64,
    /// `max_l |f+(l)|` over the same directions.
    pub amplitude_scale: f64,
    /// Largest deviation of the charges of the larger potential from the
    /// charges of the smaller one padded with zeros.
    pub charge_discrepancy: f64,
    /// `max_x |psi(x) - psi~(x)|` over sampled points, when computed.
    pub field_discrepancy: Option<f64>,
    pub directions: usize,
}

/// Two distinct potentials with equal scattering amplitude at `(kappa, k)`.
#[derive(Debug, Clone)]
pub struct CounterexamplePair {
    pub nu: Potential,
    pub nu_tilde: Potential,
    pub kappa: Wavenumber,
    pub k: IncidentVector,
    pub charges: Vec<Complex64>,
    pub charges_tilde: Vec<Complex64>,
    pub certificate: Certificate,
}

/// A point where the total field vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldZero {
    pub point: Vec<f64>,
    /// `|psi^+(point)|`.
    pub residual: f64,
}

fn amplitude_comparison(a: &SolvedState, b: &SolvedState) -> Result<(f64, f64)> {
    let dim = a.potential().dim();
    let kappa = a.kappa().value();
    let mut disc: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for dir in sphere_directions(dim, CERTIFICATE_DIRECTIONS) {
        let l: Vec<f64> = dir.iter().map(|v| v * kappa).collect();
        let fa = a.scattering_amplitude(&l)?.f_plus;
        let fb = b.scattering_amplitude(&l)?.f_plus;
        disc = disc.max((fa - fb).norm());
        scale = scale.max(fa.norm());
    }
    Ok((disc, scale))
}

/// The strength at the origin that makes the charge at `y2` vanish.
fn fitted_alpha(dim: usize, kappa: f64, r: f64) -> Result<Complex64> {
    match dim {
        2 => Ok((PI * I - 2.0 * kappa.ln()) / (4.0 * PI) - 0.25 * I * hankel0_first_kind(r * kappa)?),
        3 => Ok(I * kappa / (4.0 * PI) - Complex64::from_polar(1.0, kappa * r) / (4.0 * PI * r)),
        _ => Err(Error::InvalidInput("fitted pairs exist for dimensions 2 and 3".into())),
    }
}

/// Builds the pair `{(0, alpha1), (y2, alpha2)}` and
/// `{(0, alpha1), (-y2, alpha2_tilde)}`, where `k . y2 = 0` and the common
/// origin strength `alpha1` is chosen so that only the origin carries
/// charge. Both second strengths must differ from `alpha1`.
pub fn fitted_pair(
    dim: usize,
    kappa: Wavenumber,
    k: &IncidentVector,
    y2: Vec<f64>,
    alpha2: Complex64,
    alpha2_tilde: Complex64,
) -> Result<CounterexamplePair> {
    if k.dim() != dim || y2.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: if k.dim() != dim { k.dim() } else { y2.len() },
        });
    }
    let r = norm(&y2);
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput("y2 must be finite and nonzero".into()));
    }
    if dot(k.as_slice(), &y2).abs() > 1e-12 * kappa.value() * r {
        return Err(Error::InvalidInput("y2 must be orthogonal to k".into()));
    }
    let alpha1 = fitted_alpha(dim, kappa.value(), r)?;
    if (alpha2 - alpha1).norm() <= STRENGTH_SEPARATION || (alpha2_tilde - alpha1).norm() <= STRENGTH_SEPARATION {
        return Err(Error::InvalidInput(
            "the second strengths must differ from the origin strength".into(),
        ));
    }
    let origin = vec![0.0; dim];
    let nu = Potential::new(
        dim,
        vec![
            Scatterer::new(origin.clone(), alpha1),
            Scatterer::new(y2.clone(), alpha2),
        ],
    )?;
    let mirrored: Vec<f64> = y2.iter().map(|v| -v + 0.0).collect();
    let nu_tilde = Potential::new(
        dim,
        vec![Scatterer::new(origin, alpha1), Scatterer::new(mirrored, alpha2_tilde)],
    )?;
    let s = solve_charges(&nu, kappa, k)?;
    let st = solve_charges(&nu_tilde, kappa, k)?;
    let g = green_radial(dim, r, kappa.value())?;
    let expected = [-1.0 / g, Complex64::new(0.0, 0.0)];
    let charge_discrepancy = (0..2)
        .map(|j| {
            (s.charges()[j] - expected[j])
                .norm()
                .max((st.charges()[j] - expected[j]).norm())
        })
        .fold(0.0, f64::max);
    let charge_bound = FITTED_TOLERANCE * (1.0 + expected[0].norm());
    if charge_discrepancy > charge_bound {
        return Err(Error::VerificationFailed {
            what: "charge deviation from (-1/g, 0)".into(),
            value: charge_discrepancy,
            bound: charge_bound,
        });
    }
    let (disc, scale) = amplitude_comparison(&s, &st)?;
    let bound = FITTED_TOLERANCE * (1.0 + scale);
    if disc > bound {
        return Err(Error::VerificationFailed {
            what: "amplitude discrepancy".into(),
            value: disc,
            bound,
        });
    }
    Ok(CounterexamplePair {
        nu,
        nu_tilde,
        kappa,
        k: k.clone(),
        charges: s.charges().as_slice().to_vec(),
        charges_tilde: st.charges().as_slice().to_vec(),
        certificate: Certificate {
            amplitude_discrepancy: disc,
            amplitude_scale: scale,
            charge_discrepancy,
            field_discrepancy: None,
            directions: CERTIFICATE_DIRECTIONS,
        },
    })
}

/// A one-scatterer potential whose total field vanishes at a known point.
#[derive(Debug, Clone)]
pub struct ClosedFormExample {
    pub potential: Potential,
    pub kappa: Wavenumber,
    pub k: IncidentVector,
    pub zero: FieldZero,
    pub charge: Complex64,
}

/// Single scatterer at the origin whose field vanishes at `k / kappa^2`
/// (`d = 2`, `k = (kappa, 0)`) or at `k` (`d = 3`, `k = (0, 0, kappa)`).
pub fn closed_form_invisible_example(dim: usize, kappa: Wavenumber) -> Result<ClosedFormExample> {
    let kv = kappa.value();
    let (k, alpha, zero_point) = match dim {
        2 => {
            let k = vec![kv, 0.0];
            let alpha = (PI * I - 2.0 * kv.ln()) / (4.0 * PI)
                - I * hankel0_first_kind(1.0)? / (4.0 * Complex64::from_polar(1.0, 1.0));
            let z = vec![1.0 / kv, 0.0];
            (k, alpha, z)
        }
        3 => {
            let k = vec![0.0, 0.0, kv];
            let alpha = I * kv / (4.0 * PI) - 1.0 / (4.0 * PI * kv);
            (k.clone(), alpha, k)
        }
        _ => {
            return Err(Error::InvalidInput(
                "closed-form examples exist for dimensions 2 and 3".into(),
            ))
        }
    };
    let k = IncidentVector::new(k, kappa)?;
    let potential = Potential::new(dim, vec![Scatterer::new(vec![0.0; dim], alpha)])?;
    let s = solve_charges(&potential, kappa, &k)?;
    let residual = s.total_field(&zero_point)?.norm();
    let bound = FITTED_TOLERANCE * (1.0 + s.charges().norm_inf());
    if residual > bound {
        return Err(Error::VerificationFailed {
            what: "field at the closed-form zero".into(),
            value: residual,
            bound,
        });
    }
    Ok(ClosedFormExample {
        charge: s.charges()[0],
        potential,
        kappa,
        k,
        zero: FieldZero {
            point: zero_point,
            residual,
        },
    })
}

/// Finds zeros of `psi^+` in an axis-aligned box by scanning a lattice of
/// `grid_n` points per axis for local minima of `|psi^+|` and polishing them
/// with Newton's method. Zeros are deduplicated and sorted
/// lexicographically.
pub fn find_field_zero(
    p: &Potential,
    kappa: Wavenumber,
    k: &IncidentVector,
    region: &[(f64, f64)],
    grid_n: usize,
) -> Result<Vec<FieldZero>> {
    let state = &solve_charges(p, kappa, k)?;
    let dim = p.dim();
    if region.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: region.len(),
        });
    }
    if !(dim == 2 || dim == 3) {
        return Err(Error::InvalidInput("zero search supports dimensions 2 and 3".into()));
    }
    if grid_n < 3 {
        return Err(Error::InvalidInput("grid_n must be at least 3".into()));
    }
    if region.iter().any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
        return Err(Error::InvalidInput("region bounds must be finite with lo < hi".into()));
    }
    let axis = |a: usize, i: usize| region[a].0 + (region[a].1 - region[a].0) * i as f64 / (grid_n - 1) as f64;
    let near_scatterer = |x: &[f64]| {
        state
            .potential()
            .scatterers()
            .iter()
            .any(|s| dist(x, &s.position) < MIN_DISTANCE)
    };
    let eval = |x: &[f64]| -> f64 {
        if near_scatterer(x) {
            return f64::INFINITY;
        }
        state.total_field(x).map(|v| v.norm()).unwrap_or(f64::INFINITY)
    };
    let n = grid_n;
    let count = n.pow(dim as u32);
    let index = |ix: &[usize]| ix.iter().rev().fold(0, |acc, &i| acc * n + i);
    let coords = |mut flat: usize| -> Vec<usize> {
        (0..dim)
            .map(|_| {
                let i = flat % n;
                flat /= n;
                i
            })
            .collect()
    };
    let values: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|f| {
            let ix = coords(f);
            let x: Vec<f64> = ix.iter().enumerate().map(|(a, &i)| axis(a, i)).collect();
            eval(&x)
        })
        .collect();
    let mut seeds = Vec::new();
    for f in 0..count {
        let v = values[f];
        if v.is_nan() || v >= NEWTON_BASIN {
            continue;
        }
        let ix = coords(f);
        let mut is_min = true;
        for off in 0..3usize.pow(dim as u32) {
            let mut nb = Vec::with_capacity(dim);
            let mut o = off;
            let mut centre = true;
            for &i in &ix {
                let d = (o % 3) as isize - 1;
                o /= 3;
                centre &= d == 0;
                nb.push(i as isize + d);
            }
            if centre || nb.iter().any(|&i| i < 0 || i >= n as isize) {
                continue;
            }
            let nbu: Vec<usize> = nb.iter().map(|&i| i as usize).collect();
            if values[index(&nbu)] < v {
                is_min = false;
                break;
            }
        }
        if is_min {
            seeds.push(ix.iter().enumerate().map(|(a, &i)| axis(a, i)).collect::<Vec<f64>>());
        }
    }
    let mut zeros: Vec<FieldZero> = Vec::new();
    for seed in seeds {
        let Some(point) = polish_zero(state, &seed) else {
            continue;
        };
        let inside = point
            .iter()
            .zip(region)
            .all(|(v, (a, b))| *v >= a - 1e-9 && *v <= b + 1e-9);
        if !inside || near_scatterer(&point) {
            continue;
        }
        let residual = state.total_field(&point)?.norm();
        if residual > ZERO_TOLERANCE {
            continue;
        }
        let mut candidate = FieldZero { point, residual };
        match zeros.iter().position(|z| same_zero(state, z, &candidate)) {
            Some(i) => {
                let mid: Vec<f64> = zeros[i]
                    .point
                    .iter()
                    .zip(&candidate.point)
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect();
                let mid_residual = state.total_field(&mid)?.norm();
                if mid_residual < candidate.residual {
                    candidate = FieldZero {
                        point: mid,
                        residual: mid_residual,
                    };
                }
                if candidate.residual < zeros[i].residual {
                    zeros[i] = candidate;
                }
            }
            None => zeros.push(candidate),
        }
    }
    if zeros.is_empty() {
        return Err(Error::NoZeroFound);
    }
    zeros.sort_by(|a, b| a.point.partial_cmp(&b.point).unwrap_or(std::cmp::Ordering::Equal));
    Ok(zeros)
}

/// Whether two polished points are the same zero. Points within the
/// deduplication radius always are. A degenerate zero, such as one on a
/// mirror axis of the field, is only located to about the square root of
/// the rounding error, and Newton may approach it from both sides; such
/// pairs are recognized by a midpoint that is at least as good a zero.
fn same_zero(state: &SolvedState, a: &FieldZero, b: &FieldZero) -> bool {
    let d = dist(&a.point, &b.point);
    if d <= DEDUP_RADIUS {
        return true;
    }
    if d > DEGENERATE_RADIUS {
        return false;
    }
    let mid: Vec<f64> = a.point.iter().zip(&b.point).map(|(x, y)| 0.5 * (x + y)).collect();
    state
        .total_field(&mid)
        .map(|v| v.norm() <= a.residual.max(b.residual))
        .unwrap_or(false)
}

fn psi_parts(state: &SolvedState, x: &[f64]) -> [f64; 2] {
    match state.total_field(x) {
        Ok(v) => [v.re, v.im],
        Err(_) => [f64::NAN, f64::NAN],
    }
}

fn polish_zero(state: &SolvedState, seed: &[f64]) -> Option<Vec<f64>> {
    if seed.len() == 2 {
        return match newton2d(|x| psi_parts(state, &x), [seed[0], seed[1]], 1e-13, 50) {
            Ok(root) => Some(root.point.to_vec()),
            Err(NumericsError::NonConvergence { best, residual, .. }) if residual <= 1e-12 => Some(best.to_vec()),
            Err(_) => None,
        };
    }
    // Three unknowns, two equations: minimum-norm Gauss-Newton steps land on
    // the zero curve nearest the seed.
    let mut x = seed.to_vec();
    for _ in 0..50 {
        let f = psi_parts(state, &x);
        let res = f[0].abs().max(f[1].abs());
        if !res.is_finite() {
            return None;
        }
        if res <= 1e-13 {
            return Some(x);
        }
        let mut jac = [[0.0; 3]; 2];
        for k in 0..3 {
            let h = 1e-6 * x[k].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let (fp, fm) = (psi_parts(state, &xp), psi_parts(state, &xm));
            for r in 0..2 {
                jac[r][k] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        // step = -J^T (J J^T)^{-1} f
        let m00 = dot(&jac[0], &jac[0]);
        let m01 = dot(&jac[0], &jac[1]);
        let m11 = dot(&jac[1], &jac[1]);
        let det = m00 * m11 - m01 * m01;
        if det.is_nan() || det.abs() <= 1e-300 {
            return None;
        }
        let w0 = (m11 * f[0] - m01 * f[1]) / det;
        let w1 = (-m01 * f[0] + m00 * f[1]) / det;
        for k in 0..3 {
            x[k] -= jac[0][k] * w0 + jac[1][k] * w1;
        }
    }
    let f = psi_parts(state, &x);
    (f[0].abs().max(f[1].abs()) <= 1e-12).then_some(x)
}

fn field_points(p: &Potential, zero: &[f64]) -> Vec<Vec<f64>> {
    let reach = p
        .scatterers()
        .iter()
        .map(|s| norm(&s.position))
        .fold(norm(zero), f64::max);
    let radius = 2.0 + reach;
    sphere_directions(p.dim(), FIELD_POINTS)
        .into_iter()
        .map(|d| d.iter().map(|v| v * radius).collect())
        .collect()
}

/// Adds a scatterer of strength `alpha_new` at a zero of `psi^+` and
/// verifies that it is not excited and that amplitudes and fields agree.
pub fn add_invisible_scatterer(
    p: &Potential,
    kappa: Wavenumber,
    k: &IncidentVector,
    zero: &FieldZero,
    alpha_new: Complex64,
) -> Result<CounterexamplePair> {
    if zero.point.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: zero.point.len(),
        });
    }
    if let Some(index) = p
        .scatterers()
        .iter()
        .position(|s| dist(&s.position, &zero.point) <= MIN_DISTANCE)
    {
        return Err(Error::CoincidesWithScatterer { index });
    }
    let s = solve_charges(p, kappa, k)?;
    let residual = s.total_field(&zero.point)?.norm();
    if residual > ZERO_TOLERANCE {
        return Err(Error::NotAZero { residual });
    }
    let nu_tilde = p.with_scatterer(Scatterer::new(zero.point.clone(), alpha_new))?;
    let st = solve_charges(&nu_tilde, kappa, k)?;
    let n = p.len();
    let qscale = 1.0 + s.charges().norm_inf();
    let charge_discrepancy = (0..=n)
        .map(|j| {
            let expected = if j < n {
                s.charges()[j]
            } else {
                Complex64::new(0.0, 0.0)
            };
            (st.charges()[j] - expected).norm()
        })
        .fold(0.0, f64::max);
    if charge_discrepancy > ADDITION_TOLERANCE * qscale {
        return Err(Error::VerificationFailed {
            what: "charge deviation after the addition".into(),
            value: charge_discrepancy,
            bound: ADDITION_TOLERANCE * qscale,
        });
    }
    let (disc, scale) = amplitude_comparison(&s, &st)?;
    if disc > ADDITION_TOLERANCE * (1.0 + scale) {
        return Err(Error::VerificationFailed {
            what: "amplitude discrepancy".into(),
            value: disc,
            bound: ADDITION_TOLERANCE * (1.0 + scale),
        });
    }
    let mut field: f64 = 0.0;
    for x in field_points(p, &zero.point) {
        field = field.max((s.total_field(&x)? - st.total_field(&x)?).norm());
    }
    if field > ADDITION_TOLERANCE * qscale {
        return Err(Error::VerificationFailed {
            what: "total-field discrepancy".into(),
            value: field,
            bound: ADDITION_TOLERANCE * qscale,
        });
    }
    Ok(CounterexamplePair {
        nu: p.clone(),
        nu_tilde,
        kappa,
        k: k.clone(),
        charges: s.charges().as_slice().to_vec(),
        charges_tilde: st.charges().as_slice().to_vec(),
        certificate: Certificate {
            amplitude_discrepancy: disc,
            amplitude_scale: scale,
            charge_discrepancy,
            field_discrepancy: Some(field),
            directions: CERTIFICATE_DIRECTIONS,
        },
    })
}

/// [`add_invisible_scatterer`] with strength `1`, retried with strengths
/// `1.1, 1.2, ...` (at most five retries) if the enlarged system is singular.
pub fn add_invisible_scatterer_auto(
    p: &Potential,
    kappa: Wavenumber,
    k: &IncidentVector,
    zero: &FieldZero,
) -> Result<CounterexamplePair> {
    let mut last = Error::SingularInteraction;
    for attempt in 0..6 {
        let alpha = Complex64::new(1.0 + 0.1 * attempt as f64, 0.0);
        match add_invisible_scatterer(p, kappa, k, zero, alpha) {
            Err(Error::SingularInteraction) => last = Error::SingularInteraction,
            other => return other,
        }
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kappa(v: f64) -> Wavenumber {
        Wavenumber::new(v).unwrap()
    }

    #[test]
    fn closed_form_zero_in_two_dimensions() {
        let ex = closed_form_invisible_example(2, kappa(2.0)).unwrap();
        assert!(ex.zero.residual <= 1e-12 * (1.0 + ex.charge.norm()));
        assert_eq!(ex.zero.point, vec![0.5, 0.0]);
    }

    #[test]
    fn closed_form_zero_in_three_dimensions() {
        let ex = closed_form_invisible_example(3, kappa(1.3)).unwrap();
        assert!((ex.charge - Complex64::new(4.0 * PI * 1.3, 0.0)).norm() < 1e-12);
        assert!(ex.zero.residual <= 1e-12 * (1.0 + ex.charge.norm()));
    }

    #[test]
    fn fitted_pair_in_two_dimensions() {
        let kp = kappa(1.0);
        let k = IncidentVector::new(vec![1.0, 0.0], kp).unwrap();
        let a1 = fitted_alpha(2, 1.0, 1.0).unwrap();
        let pair = fitted_pair(2, kp, &k, vec![0.0, 1.0], a1 + 1.0, a1 + 2.0).unwrap();
        assert_eq!(pair.nu_tilde.position(1), &[0.0, -1.0][..]);
        assert!(pair.charges_tilde[1].norm() < 1e-15);
        assert!(pair.certificate.amplitude_discrepancy <= 1e-12 * (1.0 + pair.certificate.amplitude_scale));
        assert!(pair.certificate.amplitude_scale > 1e-10);
    }

    #[test]
    fn fitted_pair_in_three_dimensions() {
        let kp = kappa(2.0);
        let k = IncidentVector::new(vec![0.0, 0.0, 2.0], kp).unwrap();
        let a1 = fitted_alpha(3, 2.0, 1.0).unwrap();
        let pair = fitted_pair(3, kp, &k, vec![1.0, 0.0, 0.0], a1 + 1.0, a1 + 2.0).unwrap();
        let g = green_radial(3, 1.0, 2.0).unwrap();
        assert!((pair.charges[0] + 1.0 / g).norm() <= 1e-12 * (1.0 + (1.0 / g).norm()));
        assert!(pair.certificate.amplitude_discrepancy <= 1e-12 * (1.0 + pair.certificate.amplitude_scale));
    }

    #[test]
    fn fitted_pair_rejects_second_strength_equal_to_origin_strength() {
        let kp = kappa(1.0);
        let k = IncidentVector::new(vec![1.0, 0.0], kp).unwrap();
        let a1 = fitted_alpha(2, 1.0, 1.0).unwrap();
        let r = fitted_pair(2, kp, &k, vec![0.0, 1.0], a1, a1 + 2.0);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn fitted_pair_rejects_non_orthogonal_offset() {
        let kp = kappa(1.0);
        let k = IncidentVector::new(vec![1.0, 0.0], kp).unwrap();
        let r = fitted_pair(
            2,
            kp,
            &k,
            vec![1.0, 1.0],
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
        );
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn zero_search_finds_closed_form_zero() {
        let ex = closed_form_invisible_example(2, kappa(1.0)).unwrap();
        let zeros = find_field_zero(&ex.potential, ex.kappa, &ex.k, &[(0.5, 1.5), (-0.5, 0.5)], 41).unwrap();
        assert!(zeros.iter().any(|z| dist(&z.point, &[1.0, 0.0]) < 1e-8));
    }

    #[test]
    fn empty_potential_has_no_zeros() {
        let p = Potential::empty(2).unwrap();
        let k = IncidentVector::new(vec![1.0, 0.0], kappa(1.0)).unwrap();
        assert!(matches!(
            find_field_zero(&p, kappa(1.0), &k, &[(-1.0, 1.0), (-1.0, 1.0)], 21),
            Err(Error::NoZeroFound)
        ));
    }

    #[test]
    fn addition_at_a_scatterer_is_rejected() {
        let ex = closed_form_invisible_example(2, kappa(1.0)).unwrap();
        let z = FieldZero {
            point: vec![0.0, 0.0],
            residual: 0.0,
        };
        assert!(matches!(
            add_invisible_scatterer(&ex.potential, ex.kappa, &ex.k, &z, Complex64::new(1.0, 0.0)),
            Err(Error::CoincidesWithScatterer { index: 0 })
        ));
    }

    #[test]
    fn addition_at_a_non_zero_is_rejected() {
        let ex = closed_form_invisible_example(2, kappa(1.0)).unwrap();
        let z = FieldZero {
            point: vec![0.3, 0.7],
            residual: 0.0,
        };
        assert!(matches!(
            add_invisible_scatterer(&ex.potential, ex.kappa, &ex.k, &z, Complex64::new(1.0, 0.0)),
            Err(Error::NotAZero { .. })
        ));
    }

    #[test]
    fn invisible_addition_to_closed_form_example() {
        let ex = closed_form_invisible_example(3, kappa(0.7)).unwrap();
        let pair = add_invisible_scatterer_auto(&ex.potential, ex.kappa, &ex.k, &ex.zero).unwrap();
        assert_eq!(pair.nu_tilde.len(), 2);
        assert!(pair.charges_tilde[1].norm() < 1e-12);
        assert!(pair.certificate.amplitude_discrepancy < 1e-12);
    }
}
