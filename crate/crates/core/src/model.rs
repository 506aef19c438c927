//! Domain types: point potentials, wavenumbers, incident directions, source
//! terms and exponential sums on the complex sphere.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::dd::{Dd, DdComplex, DD_EPSILON};

/// Minimum distance between two scatterer positions.
pub const MIN_SEPARATION: f64 = 1e-12;

/// Relative tolerance for `|k| = kappa` and `|l| = kappa`.
pub const SHELL_TOLERANCE: f64 = 1e-12;

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("dimension must be 1, 2 or 3, got {dim}")))
    }
}

fn check_point(what: &str, p: &[f64], dim: usize) -> Result<()> {
    if p.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: p.len(),
        });
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("{what} has non-finite coordinates")));
    }
    Ok(())
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A single point scatterer: position and complex strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub position: Vec<f64>,
    pub strength: Complex64,
}

impl Scatterer {
    pub fn new(position: Vec<f64>, strength: Complex64) -> Self {
        Self { position, strength }
    }
}

/// A validated collection of point scatterers in dimension 1, 2 or 3.
///
/// Positions are pairwise separated by more than [`MIN_SEPARATION`] and
/// strengths are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    dim: usize,
    scatterers: Vec<Scatterer>,
}

impl Potential {
    pub fn new(dim: usize, scatterers: Vec<Scatterer>) -> Result<Self> {
        validate_potential(dim, scatterers)
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scatterers(&self) -> &[Scatterer] {
        &self.scatterers
    }

    pub fn len(&self) -> usize {
        self.scatterers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scatterers.is_empty()
    }

    pub fn position(&self, j: usize) -> &[f64] {
        &self.scatterers[j].position
    }

    pub fn strength(&self, j: usize) -> Complex64 {
        self.scatterers[j].strength
    }

    /// Returns a copy with one more scatterer appended.
    pub fn with_scatterer(&self, s: Scatterer) -> Result<Self> {
        let mut scatterers = self.scatterers.clone();
        scatterers.push(s);
        Self::new(self.dim, scatterers)
    }
}

/// Checks dimension, finiteness and separation and builds a [`Potential`].
pub fn validate_potential(dim: usize, scatterers: Vec<Scatterer>) -> Result<Potential> {
    check_dim(dim)?;
    for (j, s) in scatterers.iter().enumerate() {
        check_point(&format!("scatterer {j} position"), &s.position, dim)?;
        if !(s.strength.re.is_finite() && s.strength.im.is_finite()) {
            return Err(Error::InvalidInput(format!("scatterer {j} strength is not finite")));
        }
    }
    for i in 0..scatterers.len() {
        for j in i + 1..scatterers.len() {
            let d = dist(&scatterers[i].position, &scatterers[j].position);
            if d <= MIN_SEPARATION {
                return Err(Error::InvalidInput(format!(
                    "scatterers {i} and {j} coincide (distance {d:e})"
                )));
            }
        }
    }
    Ok(Potential { dim, scatterers })
}

/// A positive energy parameter `kappa = sqrt(E)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavenumber(f64);

impl Wavenumber {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa.is_finite() && kappa > 0.0 {
            Ok(Self(kappa))
        } else {
            Err(Error::InvalidInput(format!(
                "wavenumber must be positive and finite, got {kappa}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A wave vector on the energy shell `|k| = kappa`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidentVector {
    k: Vec<f64>,
}

impl IncidentVector {
    /// Accepts `k` if `||k| - kappa| <= 1e-12 kappa`.
    pub fn new(k: Vec<f64>, kappa: Wavenumber) -> Result<Self> {
        check_shell(&k, kappa)?;
        Ok(Self { k })
    }

    /// Scales a nonzero direction onto the shell of radius `kappa`.
    pub fn from_direction(direction: &[f64], kappa: Wavenumber) -> Result<Self> {
        let n = norm(direction);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidInput("direction must be finite and nonzero".into()));
        }
        Ok(Self {
            k: direction.iter().map(|v| v / n * kappa.value()).collect(),
        })
    }

    /// Takes `kappa = |k|`.
    pub fn from_vector(k: Vec<f64>) -> Result<(Self, Wavenumber)> {
        let kappa = Wavenumber::new(norm(&k))?;
        Ok((Self { k }, kappa))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }
}

/// Checks `||l| - kappa| <= 1e-12 kappa` and finiteness.
pub fn check_shell(l: &[f64], kappa: Wavenumber) -> Result<()> {
    if l.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("wave vector has non-finite components".into()));
    }
    let n = norm(l);
    if (n - kappa.value()).abs() > SHELL_TOLERANCE * kappa.value() {
        return Err(Error::OffShell {
            norm: n,
            kappa: kappa.value(),
        });
    }
    Ok(())
}

/// A point source `c delta(x - y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceTerm {
    pub position: Vec<f64>,
    pub coefficient: Complex64,
}

/// One term `c e^{i y . theta}` of an exponential sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpTerm {
    pub coefficient: Complex64,
    pub frequency: Vec<f64>,
}

/// A finite exponential sum `u(theta) = sum_j c_j e^{i y_j . theta}` with
/// nonzero coefficients and distinct frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialSum {
    dim: usize,
    terms: Vec<ExpTerm>,
}

impl ExponentialSum {
    pub fn new(dim: usize, terms: Vec<ExpTerm>) -> Result<Self> {
        check_dim(dim)?;
        for (j, t) in terms.iter().enumerate() {
            check_point(&format!("term {j} frequency"), &t.frequency, dim)?;
            let c = t.coefficient;
            if !(c.re.is_finite() && c.im.is_finite()) || c == Complex64::new(0.0, 0.0) {
                return Err(Error::InvalidInput(format!(
                    "term {j} coefficient must be finite and nonzero"
                )));
            }
        }
        for i in 0..terms.len() {
            for j in i + 1..terms.len() {
                if terms[i].frequency == terms[j].frequency {
                    return Err(Error::InvalidInput(format!("terms {i} and {j} share a frequency")));
                }
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluates at a complex direction without overflow protection.
    pub fn eval(&self, theta: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * exponent(&t.frequency, theta).exp())
            .sum()
    }

    /// Evaluates at a real direction.
    pub fn eval_real(&self, theta: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * Complex64::from_polar(1.0, dot(&t.frequency, theta)))
            .sum()
    }

    /// Multiplies every coefficient by `s`.
    pub fn scaled(&self, s: Complex64) -> Result<Self> {
        Self::new(
            self.dim,
            self.terms
                .iter()
                .map(|t| ExpTerm {
                    coefficient: t.coefficient * s,
                    frequency: t.frequency.clone(),
                })
                .collect(),
        )
    }
}

/// `i y . theta` for a real frequency and a complex direction.
pub(crate) fn exponent(y: &[f64], theta: &[Complex64]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (a, t) in y.iter().zip(theta) {
        s += t * *a;
    }
    Complex64::new(-s.im, s.re)
}

/// A term already removed from a far-field remainder, held in double-double
/// precision together with an estimate of its relative parameter error.
#[derive(Debug, Clone, PartialEq)]
pub struct SubtractedTerm {
    pub coefficient: DdComplex,
    pub frequency: Vec<Dd>,
    /// Estimated error of the parameters, relative to `1 + |y|` for the
    /// frequency and to `|c|` for the coefficient.
    pub uncertainty: f64,
}

impl SubtractedTerm {
    pub fn coefficient_f64(&self) -> Complex64 {
        self.coefficient.to_c64()
    }

    pub fn frequency_f64(&self) -> Vec<f64> {
        self.frequency.iter().map(|v| v.to_f64()).collect()
    }
}

/// Black-box access to an analytic function on the complex sphere
/// `theta . theta = 1`, backed by an exponential sum from which some terms
/// may already have been subtracted.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldOracle {
    backing: ExponentialSum,
    subtracted: Vec<SubtractedTerm>,
}

/// Tolerance on `theta . theta = 1` for checked evaluation.
const SPHERE_TOLERANCE: f64 = 1e-9;

impl FarFieldOracle {
    pub fn new(backing: ExponentialSum) -> Self {
        Self {
            backing,
            subtracted: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.backing.dim()
    }

    pub fn backing(&self) -> &ExponentialSum {
        &self.backing
    }

    pub fn subtracted(&self) -> &[SubtractedTerm] {
        &self.subtracted
    }

    /// The remainder after subtracting one more term.
    pub fn without(&self, term: SubtractedTerm) -> Self {
        let mut next = self.clone();
        next.subtracted.push(term);
        next
    }

    /// Evaluates at a point of the complex sphere.
    pub fn eval(&self, theta: &[Complex64]) -> Result<Complex64> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        let tt: Complex64 = theta.iter().map(|t| t * t).sum();
        let scale: f64 = theta.iter().map(|t| t.norm_sqr()).sum();
        if (tt - 1.0).norm() > SPHERE_TOLERANCE * (1.0 + scale) {
            return Err(Error::InvalidInput("direction is not on the complex sphere".into()));
        }
        Ok(self.eval_unchecked(theta))
    }

    /// Evaluates at a real unit direction.
    pub fn eval_real(&self, theta: &[f64]) -> Complex64 {
        let z: Vec<Complex64> = theta.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.eval_unchecked(&z)
    }

    pub(crate) fn eval_unchecked(&self, theta: &[Complex64]) -> Complex64 {
        let mut s = self.backing.eval(theta);
        for t in &self.subtracted {
            s -= t.coefficient_f64() * exponent(&t.frequency_f64(), theta).exp();
        }
        s
    }

    /// `ln u(theta)` computed with a common exponential shift so that no
    /// intermediate overflows, together with the natural logarithm of an
    /// estimate of the absolute rounding error of that evaluation.
    pub(crate) fn log_eval(&self, theta: &[Complex64]) -> (Complex64, f64) {
        let mut exps: Vec<(Complex64, Complex64, f64)> = Vec::with_capacity(self.backing.len() + self.subtracted.len());
        for t in self.backing.terms() {
            let z = exponent(&t.frequency, theta);
            exps.push((t.coefficient, z, f64::EPSILON * (1.0 + z.norm())));
        }
        for t in &self.subtracted {
            let z = exponent(&t.frequency_f64(), theta);
            let w = t.uncertainty.max(f64::EPSILON) * (1.0 + z.norm());
            exps.push((-t.coefficient_f64(), z, w));
        }
        let shift = exps.iter().map(|e| e.1.re).fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return (Complex64::new(f64::NEG_INFINITY, 0.0), f64::NEG_INFINITY);
        }
        let mut sum = Complex64::new(0.0, 0.0);
        let mut floor = 0.0;
        for (c, z, w) in exps {
            let e = (z - shift).exp();
            sum += c * e;
            floor += c.norm() * e.re.hypot(e.im) * w;
        }
        (sum.ln() + shift, floor.ln() + shift)
    }

    /// `sum_j c_j e^{i (y_j - y_ref) . theta}` over all backing and
    /// subtracted terms in double-double precision, together with the
    /// absolute rounding-error estimate of the sum. Returns `None` if any
    /// exponential would overflow.
    pub(crate) fn dd_eval_shifted(&self, theta: &[Complex64], y_ref: &[Dd]) -> Option<(DdComplex, f64)> {
        let mut sum = DdComplex::ZERO;
        let mut floor = 0.0;
        let mut add = |c: DdComplex, y: &mut dyn Iterator<Item = Dd>, weight: f64| -> bool {
            // i (y - y_ref) . theta = -(dy . Im theta) + i (dy . Re theta)
            let mut re = Dd::ZERO;
            let mut im = Dd::ZERO;
            for ((yk, rk), t) in y.zip(y_ref).zip(theta) {
                let dy = yk - *rk;
                re -= dy * t.im;
                im += dy * t.re;
            }
            if re.hi > 700.0 {
                return false;
            }
            let e = DdComplex::new(re, im).exp();
            let mag = c.to_c64().norm() * re.hi.exp();
            floor += mag * weight * (1.0 + re.hi.abs() + im.hi.abs());
            sum += c * e;
            true
        };
        for t in self.backing.terms() {
            let mut it = t.frequency.iter().map(|&v| Dd::from(v));
            if !add(DdComplex::from(t.coefficient), &mut it, DD_EPSILON) {
                return None;
            }
        }
        for t in &self.subtracted {
            let mut it = t.frequency.iter().copied();
            if !add(-t.coefficient, &mut it, t.uncertainty.max(DD_EPSILON)) {
                return None;
            }
        }
        Some((sum, floor))
    }
}

/// Quasi-uniform real directions on the unit sphere: equally spaced angles
/// for `d = 2`, a Fibonacci lattice for `d = 3`, and `{-1, +1}` for `d = 1`.
pub fn sphere_directions(dim: usize, n: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..n)
            .map(|m| {
                let a = 2.0 * std::f64::consts::PI * m as f64 / n as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|m| {
                    let z = 1.0 - (2.0 * m as f64 + 1.0) / n as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let a = golden * m as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
    }
}
