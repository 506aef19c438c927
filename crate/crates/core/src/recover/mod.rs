//! Recovery of exponential sums, point sources and point potentials from
//! far-field data by successive extraction of the fastest-growing term along
//! complex rays on the complex sphere.

mod peel;
mod polish;
mod potential;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{dot, norm, sphere_directions, ExpTerm, ExponentialSum, FarFieldOracle, SubtractedTerm};
use crate::numerics::dd::{Dd, DdComplex, DD_EPSILON};

pub use potential::{default_probe_directions, recover_potential, recover_source, RecoveredPotential};

/// Real test directions used to decide whether a remainder vanishes.
const TEST_DIRECTIONS: usize = 256;
/// Real directions used by the joint polish, per dimension.
const POLISH_DIRECTIONS_2D: usize = 512;
const POLISH_DIRECTIONS_3D: usize = 1024;

/// A point `theta(tau) = sqrt(1 + tau^2) e1 - i tau e2` of the complex sphere,
/// with `e1`, `e2` orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentFramePoint {
    tau: f64,
    e1: Vec<f64>,
    e2: Vec<f64>,
}

impl TangentFramePoint {
    pub fn new(tau: f64, e1: Vec<f64>, e2: Vec<f64>) -> Result<Self> {
        check_frame(&e1, &e2)?;
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "ray parameter must be finite and >= 0, got {tau}"
            )));
        }
        Ok(Self { tau, e1, e2 })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn e1(&self) -> &[f64] {
        &self.e1
    }

    pub fn e2(&self) -> &[f64] {
        &self.e2
    }
}

fn check_frame(e1: &[f64], e2: &[f64]) -> Result<()> {
    if e1.len() != e2.len() {
        return Err(Error::DimensionMismatch {
            expected: e2.len(),
            got: e1.len(),
        });
    }
    if e1.len() < 2 {
        return Err(Error::InvalidInput("complex rays need dimension >= 2".into()));
    }
    let ok = (norm(e1) - 1.0).abs() <= 1e-12 && (norm(e2) - 1.0).abs() <= 1e-12 && dot(e1, e2).abs() <= 1e-12;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput("e1 and e2 must be orthonormal".into()))
    }
}

/// The complex direction `sqrt(1 + tau^2) e1 - i tau e2`, which satisfies
/// `theta . theta = 1`.
pub fn complex_direction(p: &TangentFramePoint) -> Vec<Complex64> {
    peel::ray_theta(p.tau, &p.e1, &p.e2)
}

/// Least-squares slope of `ln|u(theta(tau))|` over
/// `tau in [tau_max / 2, tau_max]`, which tends to `max_j e2 . y_j`.
pub fn growth_rate(u: &FarFieldOracle, e1: &[f64], e2: &[f64], tau_max: f64) -> Result<f64> {
    check_frame(e1, e2)?;
    if e1.len() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: e1.len(),
        });
    }
    if !(tau_max.is_finite() && tau_max > 0.0) {
        return Err(Error::InvalidInput("tau_max must be positive".into()));
    }
    peel::plain_growth_rate(u, e1, e2, tau_max)
        .ok_or_else(|| Error::DegenerateRay("the oracle vanishes on the sampled ray".into()))
}

/// One extracted term and the remainder it leaves.
#[derive(Debug, Clone)]
pub struct PeeledTerm {
    pub coefficient: Complex64,
    pub frequency: Vec<f64>,
    pub remainder: FarFieldOracle,
}

fn check_oracle(u: &FarFieldOracle) -> Result<()> {
    if u.dim() < 2 {
        return Err(Error::InvalidInput(
            "exponential-sum recovery needs dimension 2 or 3".into(),
        ));
    }
    Ok(())
}

fn test_directions(dim: usize) -> Vec<Vec<f64>> {
    sphere_directions(dim, TEST_DIRECTIONS)
}

fn sup_on(u: &FarFieldOracle, dirs: &[Vec<f64>]) -> f64 {
    dirs.iter().map(|t| u.eval_real(t).norm()).fold(0.0, f64::max)
}

fn constant_term(u: &FarFieldOracle, dirs: &[Vec<f64>]) -> SubtractedTerm {
    let mean = dirs.iter().map(|t| u.eval_real(t)).sum::<Complex64>() / dirs.len() as f64;
    SubtractedTerm {
        coefficient: DdComplex::from(mean),
        frequency: vec![Dd::ZERO; u.dim()],
        uncertainty: f64::EPSILON.max(DD_EPSILON),
    }
}

fn extract(u: &FarFieldOracle, dirs: &[Vec<f64>]) -> Result<(SubtractedTerm, bool)> {
    match peel::extract_dominant(u) {
        peel::Dominant::Term(t) => Ok((t, false)),
        peel::Dominant::Bounded => Ok((constant_term(u, dirs), true)),
        peel::Dominant::BelowFloor => Err(Error::IllSeparated(
            "the remainder is hidden by the rounding error of the removed terms on every ray".into(),
        )),
    }
}

/// Direction `e2*` and rate of the fastest-growing term of `u`, or `None` if
/// `u` is bounded on every ray.
pub fn dominant_growth(u: &FarFieldOracle) -> Result<Option<(Vec<f64>, f64)>> {
    check_oracle(u)?;
    Ok(match peel::extract_dominant(u) {
        peel::Dominant::Bounded => None,
        peel::Dominant::BelowFloor => return Err(Error::IllSeparated("no usable ray for the growth search".into())),
        peel::Dominant::Term(t) => {
            let y = t.frequency_f64();
            let n = norm(&y);
            Some((y.iter().map(|v| v / n).collect(), n))
        }
    })
}

/// Extracts the term with the largest growth rate (or the constant term if
/// `u` is bounded) and returns it with the remainder.
pub fn peel_dominant_term(u: &FarFieldOracle, tol: f64) -> Result<PeeledTerm> {
    check_oracle(u)?;
    let dirs = test_directions(u.dim());
    if sup_on(u, &dirs) <= tol {
        return Err(Error::InvalidInput("the oracle is already zero to tolerance".into()));
    }
    let (term, _) = extract(u, &dirs)?;
    Ok(PeeledTerm {
        coefficient: term.coefficient_f64(),
        frequency: term.frequency_f64(),
        remainder: u.without(term),
    })
}

/// Why a recovery stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The remainder vanished to tolerance after the last extraction.
    ZeroReached,
    /// The remainder became bounded and its constant was the last term.
    ConstantExtracted,
    /// `max_terms` terms were extracted without the remainder vanishing.
    MaxTerms,
}

/// Result of [`recover_exponential_sum`].
#[derive(Debug, Clone)]
pub struct RecoveryReport {
    pub terms: ExponentialSum,
    /// `sup` over real test directions of `|u - recovered|`.
    pub residual: f64,
    /// `sup` over the same directions of `|u|`.
    pub scale: f64,
    /// Number of case analyses performed: one per extracted term plus the
    /// final vanishing check, if reached.
    pub iterations: usize,
    pub termination: Termination,
}

fn to_terms(sub: &[SubtractedTerm]) -> Vec<ExpTerm> {
    sub.iter()
        .map(|t| ExpTerm {
            coefficient: t.coefficient_f64(),
            frequency: t.frequency_f64(),
        })
        .collect()
}

/// Merges terms whose frequencies coincide in `f64` by adding coefficients
/// and drops vanishing coefficients.
fn normalize_terms(dim: usize, terms: Vec<ExpTerm>) -> Result<ExponentialSum> {
    let mut out: Vec<ExpTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        if let Some(o) = out.iter_mut().find(|o| o.frequency == t.frequency) {
            o.coefficient += t.coefficient;
        } else {
            out.push(t);
        }
    }
    out.retain(|t| t.coefficient != Complex64::new(0.0, 0.0));
    ExponentialSum::new(dim, out)
}

/// Recovers `u(theta) = sum_j c_j e^{i y_j . theta}` from oracle access.
///
/// Each iteration either finds the remainder zero to `tol` relative to
/// `sup|u|` on real directions, extracts its constant value when it is
/// bounded on all rays, or extracts the fastest-growing term. After each
/// extraction the recovered terms are jointly refined against `u` on the
/// real sphere, and the refined set is accepted if it matches to `tol`.
pub fn recover_exponential_sum(u: &FarFieldOracle, max_terms: usize, tol: f64) -> Result<RecoveryReport> {
    check_oracle(u)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let dim = u.dim();
    let dirs = test_directions(dim);
    let polish_dirs = sphere_directions(
        dim,
        if dim == 2 {
            POLISH_DIRECTIONS_2D
        } else {
            POLISH_DIRECTIONS_3D
        },
    );
    let scale = sup_on(u, &dirs);
    let mut remainder = u.clone();
    let mut iterations = 0;
    let mut last_constant = false;
    let finish =
        |terms: Vec<ExpTerm>, residual: f64, iterations: usize, termination: Termination| -> Result<RecoveryReport> {
            Ok(RecoveryReport {
                terms: normalize_terms(dim, terms)?,
                residual,
                scale,
                iterations,
                termination,
            })
        };
    loop {
        iterations += 1;
        let reason = if last_constant {
            Termination::ConstantExtracted
        } else {
            Termination::ZeroReached
        };
        let residual = sup_on(&remainder, &dirs);
        if residual <= tol * scale {
            return finish(to_terms(remainder.subtracted()), residual, iterations, reason);
        }
        let current = to_terms(remainder.subtracted());
        if !current.is_empty() {
            if let Some(polished) = polish::polish(u, &current, &polish_dirs) {
                let r = polish::sup_residual(u, &polished, &dirs);
                if r <= tol * scale {
                    return finish(polished, r, iterations, reason);
                }
            }
        }
        if remainder.subtracted().len() >= max_terms {
            return finish(current, residual, iterations, Termination::MaxTerms);
        }
        let (term, constant) = extract(&remainder, &dirs)?;
        if term.frequency.iter().any(|v| !v.is_finite()) {
            return Err(Error::IllSeparated("term extraction diverged".into()));
        }
        remainder = remainder.without(term);
        last_constant = constant;
    }
}
