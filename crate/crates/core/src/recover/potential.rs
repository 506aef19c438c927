//! Reconstruction of point sources and point potentials from recovered
//! exponential sums.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{recover_exponential_sum, RecoveryReport, Termination};
use crate::error::{Error, Result};
use crate::forward::{diagonal_shift, green_radial, interaction_matrix, solve_charges};
use crate::model::{
    dist, dot, norm, sphere_directions, FarFieldOracle, IncidentVector, Potential, Scatterer, SourceTerm, Wavenumber,
};
use crate::numerics::ComplexVector;

/// Relative distance within which positions from different probes are
/// identified.
const MATCH_TOLERANCE: f64 = 1e-6;
/// Relative tolerance on the reconstructed interaction system.
const SYSTEM_TOLERANCE: f64 = 1e-8;
/// Minimum number of incident directions consulted when more are available.
const MIN_PROBES: usize = 2;

fn check_success(rep: &RecoveryReport) -> Result<()> {
    if rep.termination == Termination::MaxTerms {
        return Err(Error::IllSeparated(format!(
            "recovery stopped at the term limit with residual {:e} (scale {:e})",
            rep.residual, rep.scale
        )));
    }
    Ok(())
}

/// Recovers point sources `c_j delta(x - y_j)` from the oracle
/// `theta -> a(kappa theta)` of their far-field amplitude.
pub fn recover_source(
    a: &FarFieldOracle,
    kappa: Wavenumber,
    max_terms: usize,
    tol: f64,
) -> Result<(Vec<SourceTerm>, RecoveryReport)> {
    let rep = recover_exponential_sum(a, max_terms, tol)?;
    check_success(&rep)?;
    let d = a.dim();
    let norm_factor = (2.0 * PI).powi(d as i32);
    let sources = rep
        .terms
        .terms()
        .iter()
        .map(|t| SourceTerm {
            position: t.frequency.iter().map(|v| -v / kappa.value() + 0.0).collect(),
            coefficient: t.coefficient * norm_factor,
        })
        .collect();
    Ok((sources, rep))
}

/// Deterministic, generically placed incident directions on the sphere of
/// radius `kappa`.
pub fn default_probe_directions(dim: usize, kappa: Wavenumber) -> Vec<IncidentVector> {
    let dirs: Vec<Vec<f64>> = match dim {
        2 => (0..8)
            .map(|m| {
                let a = 0.3 + 2.399_963_229_728_653 * m as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => sphere_directions(3, 8)
            .into_iter()
            .map(|v| {
                // Small fixed rotation about (1,1,1) to leave the coordinate planes.
                let (s, c) = 0.37f64.sin_cos();
                let k = [1.0 / 3f64.sqrt(); 3];
                let kv = dot(&k, &v);
                let cross = [
                    k[1] * v[2] - k[2] * v[1],
                    k[2] * v[0] - k[0] * v[2],
                    k[0] * v[1] - k[1] * v[0],
                ];
                (0..3)
                    .map(|i| v[i] * c + cross[i] * s + k[i] * kv * (1.0 - c))
                    .collect()
            })
            .collect(),
        _ => vec![vec![1.0], vec![-1.0]],
    };
    dirs.iter()
        .filter_map(|d| IncidentVector::from_direction(d, kappa).ok())
        .collect()
}

/// A reconstructed potential with the charges it produces at the primary
/// incident direction.
#[derive(Debug, Clone)]
pub struct RecoveredPotential {
    pub potential: Potential,
    /// Charges `q(k)` at the primary incident direction; scatterers not
    /// visible at that direction have charge zero.
    pub charges: ComplexVector,
    /// Per scatterer, the largest residual of its row of the interaction
    /// system over all incident directions consulted.
    pub diagnostics: Vec<f64>,
    /// Number of incident directions consulted.
    pub probes_used: usize,
    /// Exponential-sum recovery report for each direction consulted.
    pub reports: Vec<RecoveryReport>,
}

struct Probe {
    k: IncidentVector,
    /// `(index into positions, charge)` for the visible scatterers.
    charges: Vec<(usize, Complex64)>,
}

/// Recovers a point potential from the scattering amplitude.
///
/// `amplitude(k)` must return the oracle `theta -> f(k, kappa theta)`. The
/// primary direction `k` is consulted first, then `probe_ks` in order, until
/// at least two directions agree on the set of positions and every position
/// has a determined strength. Directions whose amplitude cannot be separated
/// into terms are skipped.
pub fn recover_potential<F>(
    amplitude: F,
    kappa: Wavenumber,
    k: &IncidentVector,
    probe_ks: &[IncidentVector],
    max_terms: usize,
    tol: f64,
) -> Result<RecoveredPotential>
where
    F: Fn(&IncidentVector) -> Result<FarFieldOracle>,
{
    let dim = k.dim();
    let kv = kappa.value();
    let shift = diagonal_shift(dim, kappa);
    let norm_factor = (2.0 * PI).powi(dim as i32);
    let mut positions: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<Option<Complex64>> = Vec::new();
    let mut probes: Vec<Probe> = Vec::new();
    let mut reports = Vec::new();
    let mut skipped: Option<Error> = None;
    let wanted = MIN_PROBES.min(1 + probe_ks.len());
    for kp in std::iter::once(k).chain(probe_ks.iter()) {
        let oracle = amplitude(kp)?;
        if oracle.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: oracle.dim(),
            });
        }
        // Separability depends on the charges and hence on the incident
        // direction, so an ill-separated direction is skipped.
        let rep = match recover_exponential_sum(&oracle, max_terms, tol).and_then(|r| check_success(&r).map(|_| r)) {
            Ok(rep) => rep,
            Err(e @ Error::IllSeparated(_)) => {
                skipped = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let qmax = rep
            .terms
            .terms()
            .iter()
            .map(|t| t.coefficient.norm() * norm_factor)
            .fold(0.0, f64::max);
        let mut found_new = false;
        let mut charges = Vec::new();
        for t in rep.terms.terms() {
            // Adding 0.0 normalizes -0.0 so files do not carry signed zeros.
            let y: Vec<f64> = t.frequency.iter().map(|v| -v / kv + 0.0).collect();
            let q = t.coefficient * norm_factor;
            if q.norm() <= tol * qmax {
                continue;
            }
            let idx = match positions
                .iter()
                .position(|p| dist(p, &y) <= MATCH_TOLERANCE * (1.0 + norm(&y)))
            {
                Some(i) => i,
                None => {
                    positions.push(y);
                    alphas.push(None);
                    found_new = true;
                    positions.len() - 1
                }
            };
            charges.push((idx, q));
        }
        // Strengths from this direction's charges.
        for &(j, qj) in &charges {
            if alphas[j].is_some() {
                continue;
            }
            let bj = -Complex64::from_polar(1.0, dot(kp.as_slice(), &positions[j]));
            let mut off = Complex64::new(0.0, 0.0);
            for &(jp, qjp) in &charges {
                if jp != j {
                    off += green_radial(dim, dist(&positions[j], &positions[jp]), kv)? * qjp;
                }
            }
            alphas[j] = Some((bj - off) / qj - shift);
        }
        reports.push(rep);
        probes.push(Probe { k: kp.clone(), charges });
        let complete = alphas.iter().all(|a| a.is_some());
        if complete && probes.len() >= wanted && !found_new {
            break;
        }
    }
    if probes.is_empty() {
        return Err(skipped.unwrap_or_else(|| Error::InvalidInput("no incident direction was consulted".into())));
    }
    let missing: Vec<usize> = alphas
        .iter()
        .enumerate()
        .filter(|(_, a)| a.is_none())
        .map(|(j, _)| j)
        .collect();
    if !missing.is_empty() {
        return Err(Error::UndeterminedStrength(missing));
    }
    let potential = Potential::new(
        dim,
        positions
            .iter()
            .zip(&alphas)
            .map(|(y, a)| Scatterer::new(y.clone(), a.expect("all strengths determined")))
            .collect(),
    )?;
    let a = interaction_matrix(&potential, kappa)?;
    let n = potential.len();
    let mut diagnostics = vec![0.0; n];
    for probe in &probes {
        let mut q = ComplexVector::zeros(n);
        for &(j, qj) in &probe.charges {
            q[j] = qj;
        }
        let aq = a.mul_vec(&q)?;
        for j in 0..n {
            let bj = -Complex64::from_polar(1.0, dot(probe.k.as_slice(), &positions[j]));
            diagnostics[j] = f64::max(diagnostics[j], (aq[j] - bj).norm());
        }
    }
    let mut first = ComplexVector::zeros(n);
    for &(j, qj) in &probes[0].charges {
        first[j] = qj;
    }
    let aq = a.mul_vec(&first)?;
    let residual = (0..n)
        .map(|j| (aq[j] + Complex64::from_polar(1.0, dot(probes[0].k.as_slice(), &positions[j]))).norm())
        .fold(0.0, f64::max);
    let bound = SYSTEM_TOLERANCE * (1.0 + a.norm_inf() * first.norm_inf());
    if residual > bound {
        return Err(Error::VerificationFailed {
            what: "interaction-system residual of the recovered potential".into(),
            value: residual,
            bound,
        });
    }
    let charges = if &probes[0].k == k {
        first
    } else {
        solve_charges(&potential, kappa, k)?.charges().clone()
    };
    Ok(RecoveredPotential {
        potential,
        charges,
        diagnostics,
        probes_used: probes.len(),
        reports,
    })
}
