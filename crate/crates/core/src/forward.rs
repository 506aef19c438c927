//! Forward scattering: Green functions, the interaction system for the
//! scatterer charges, total fields and far-field amplitudes.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::model::{
    check_shell, dist, dot, norm, ExpTerm, ExponentialSum, FarFieldOracle, IncidentVector, Potential, SourceTerm,
    Wavenumber,
};
use crate::numerics::{hankel0_first_kind, solve_complex_linear, ComplexMatrix, ComplexVector, NumericsError};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Outgoing Green function `G^+(r)` as a function of the radius `r > 0`.
pub(crate) fn green_radial(dim: usize, r: f64, kappa: f64) -> Result<Complex64> {
    Ok(match dim {
        1 => (I * kappa * r).exp() / (2.0 * I * kappa),
        2 => -0.25 * I * hankel0_first_kind(kappa * r)?,
        _ => -(I * kappa * r).exp() / (4.0 * PI * r),
    })
}

/// Outgoing Green function of `Delta + kappa^2` at `x != 0`.
pub fn green(dim: usize, x: &[f64], kappa: Wavenumber) -> Result<Complex64> {
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    let r = norm(x);
    if !r.is_finite() {
        return Err(Error::InvalidInput("evaluation point is not finite".into()));
    }
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    green_radial(dim, r, kappa.value())
}

/// The renormalised self-interaction: `A_jj = alpha_j + diagonal_shift`.
pub fn diagonal_shift(dim: usize, kappa: Wavenumber) -> Complex64 {
    let k = kappa.value();
    match dim {
        1 => 1.0 / (2.0 * I * k),
        2 => -(PI * I - 2.0 * k.ln()) / (4.0 * PI),
        _ => -I * k / (4.0 * PI),
    }
}

/// Factor relating the amplitude `f` to the physical amplitude `f^+ = c f`.
pub fn amplitude_normalization(dim: usize, kappa: Wavenumber) -> Complex64 {
    let base = (2.0 * PI).sqrt() * Complex64::from_polar(1.0, -FRAC_PI_4);
    -PI * I * base.powi(dim as i32 - 1) * kappa.value().powf((dim as f64 - 3.0) / 2.0)
}

/// Builds the interaction matrix `A(kappa)`.
pub fn interaction_matrix(p: &Potential, kappa: Wavenumber) -> Result<ComplexMatrix> {
    let n = p.len();
    let mut a = ComplexMatrix::zeros(n);
    let shift = diagonal_shift(p.dim(), kappa);
    for j in 0..n {
        a.set(j, j, p.strength(j) + shift);
        for jp in j + 1..n {
            let g = green_radial(p.dim(), dist(p.position(j), p.position(jp)), kappa.value())?;
            a.set(j, jp, g);
            a.set(jp, j, g);
        }
    }
    Ok(a)
}

/// The right-hand side `b_j = -e^{i k . y_j}`.
pub fn incident_vector(p: &Potential, k: &IncidentVector) -> Result<ComplexVector> {
    if k.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: k.dim(),
        });
    }
    Ok(ComplexVector::new(
        p.scatterers()
            .iter()
            .map(|s| -Complex64::from_polar(1.0, dot(k.as_slice(), &s.position)))
            .collect(),
    ))
}

/// Far-field amplitude at one outgoing direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    /// `f = (2 pi)^{-d} sum_j q_j e^{-i l . y_j}`.
    pub f: Complex64,
    /// `f^+ = c(d, kappa) f`.
    pub f_plus: Complex64,
}

/// The solved charges for one potential, energy and incident direction.
#[derive(Debug, Clone)]
pub struct SolvedState {
    potential: Potential,
    kappa: Wavenumber,
    k: IncidentVector,
    matrix: ComplexMatrix,
    rhs: ComplexVector,
    charges: ComplexVector,
}

/// Solves `A(kappa) q = b(k)` for the charges.
///
/// An empty potential yields an empty charge vector.
pub fn solve_charges(p: &Potential, kappa: Wavenumber, k: &IncidentVector) -> Result<SolvedState> {
    check_shell(k.as_slice(), kappa)?;
    let matrix = interaction_matrix(p, kappa)?;
    let rhs = incident_vector(p, k)?;
    let charges = solve_complex_linear(&matrix, &rhs).map_err(|e| match e {
        NumericsError::Singular { .. } => Error::SingularInteraction,
        other => Error::Numerics(other),
    })?;
    Ok(SolvedState {
        potential: p.clone(),
        kappa,
        k: k.clone(),
        matrix,
        rhs,
        charges,
    })
}

impl SolvedState {
    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn kappa(&self) -> Wavenumber {
        self.kappa
    }

    pub fn incident(&self) -> &IncidentVector {
        &self.k
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn charges(&self) -> &ComplexVector {
        &self.charges
    }

    /// `||A q - b||_inf`.
    pub fn residual(&self) -> f64 {
        let aq = self.matrix.mul_vec(&self.charges).expect("square system");
        aq.as_slice()
            .iter()
            .zip(self.rhs.as_slice())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.potential.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.potential.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("evaluation point is not finite".into()));
        }
        Ok(())
    }

    /// Scattered part `sum_j q_j G^+(x - y_j)` of the total field.
    pub fn scattered_field(&self, x: &[f64]) -> Result<Complex64> {
        self.check_point(x)?;
        let mut s = Complex64::new(0.0, 0.0);
        for (j, sc) in self.potential.scatterers().iter().enumerate() {
            let r = dist(x, &sc.position);
            if r == 0.0 {
                return Err(Error::Singularity);
            }
            s += self.charges[j] * green_radial(self.potential.dim(), r, self.kappa.value())?;
        }
        Ok(s)
    }

    /// Total field `psi^+(x, k) = e^{i k . x} + sum_j q_j G^+(x - y_j)`.
    pub fn total_field(&self, x: &[f64]) -> Result<Complex64> {
        let sc = self.scattered_field(x)?;
        Ok(Complex64::from_polar(1.0, dot(self.k.as_slice(), x)) + sc)
    }

    /// Scattering amplitude at an outgoing wave vector `l` with `|l| = kappa`.
    pub fn scattering_amplitude(&self, l: &[f64]) -> Result<Amplitude> {
        let d = self.potential.dim();
        if l.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: l.len(),
            });
        }
        check_shell(l, self.kappa)?;
        let sum: Complex64 = self
            .potential
            .scatterers()
            .iter()
            .enumerate()
            .map(|(j, s)| self.charges[j] * Complex64::from_polar(1.0, -dot(l, &s.position)))
            .sum();
        let f = sum / (2.0 * PI).powi(d as i32);
        Ok(Amplitude {
            f,
            f_plus: amplitude_normalization(d, self.kappa) * f,
        })
    }

    /// Coefficient of the local singularity of `psi^+` at scatterer `j`:
    /// `-q_j/(4 pi)` (d = 3), `q_j/(2 pi)` (d = 2), `q_j` (d = 1).
    pub fn singular_coefficient(&self, j: usize) -> Result<Complex64> {
        if j >= self.potential.len() {
            return Err(Error::InvalidInput(format!("no scatterer with index {j}")));
        }
        let q = self.charges[j];
        Ok(match self.potential.dim() {
            1 => q,
            2 => q / (2.0 * PI),
            _ => -q / (4.0 * PI),
        })
    }

    /// The map `theta -> f(k, kappa theta)` as an exponential sum with
    /// coefficients `q_j / (2 pi)^d` and frequencies `-kappa y_j`; exactly
    /// vanishing charges are omitted.
    pub fn amplitude_oracle(&self) -> Result<FarFieldOracle> {
        let d = self.potential.dim();
        let norm = (2.0 * PI).powi(d as i32);
        let terms = self
            .potential
            .scatterers()
            .iter()
            .enumerate()
            .filter(|(j, _)| self.charges[*j] != Complex64::new(0.0, 0.0))
            .map(|(j, s)| ExpTerm {
                coefficient: self.charges[j] / norm,
                frequency: s.position.iter().map(|v| -self.kappa.value() * v).collect(),
            })
            .collect();
        Ok(FarFieldOracle::new(ExponentialSum::new(d, terms)?))
    }
}

fn source_dim(src: &[SourceTerm], dim: usize) -> Result<()> {
    for s in src {
        if s.position.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.position.len(),
            });
        }
    }
    Ok(())
}

/// Field `sum_j c_j G^+(x - y_j)` radiated by point sources.
pub fn source_field(src: &[SourceTerm], kappa: Wavenumber, x: &[f64]) -> Result<Complex64> {
    source_dim(src, x.len())?;
    let mut s = Complex64::new(0.0, 0.0);
    for t in src {
        s += t.coefficient * green(x.len(), &diff(x, &t.position), kappa)?;
    }
    Ok(s)
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Far-field amplitude `a(l) = (2 pi)^{-d} sum_j c_j e^{-i l . y_j}` of point
/// sources and its physical counterpart `a^+ = c(d, kappa) a`.
pub fn source_far_field(src: &[SourceTerm], kappa: Wavenumber, l: &[f64]) -> Result<Amplitude> {
    let d = l.len();
    source_dim(src, d)?;
    check_shell(l, kappa)?;
    let sum: Complex64 = src
        .iter()
        .map(|t| t.coefficient * Complex64::from_polar(1.0, -dot(l, &t.position)))
        .sum();
    let f = sum / (2.0 * PI).powi(d as i32);
    Ok(Amplitude {
        f,
        f_plus: amplitude_normalization(d, kappa) * f,
    })
}

/// The map `theta -> a(kappa theta)` of point sources as an exponential sum.
pub fn source_oracle(dim: usize, src: &[SourceTerm], kappa: Wavenumber) -> Result<FarFieldOracle> {
    source_dim(src, dim)?;
    let norm = (2.0 * PI).powi(dim as i32);
    let terms = src
        .iter()
        .filter(|t| t.coefficient != Complex64::new(0.0, 0.0))
        .map(|t| ExpTerm {
            coefficient: t.coefficient / norm,
            frequency: t.position.iter().map(|v| -kappa.value() * v).collect(),
        })
        .collect();
    Ok(FarFieldOracle::new(ExponentialSum::new(dim, terms)?))
}
