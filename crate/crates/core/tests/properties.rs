//! Property tests for the invariants of each module.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use pointscatter::forward::{green, interaction_matrix, solve_charges};
use pointscatter::invisible::{add_invisible_scatterer, closed_form_invisible_example, find_field_zero, fitted_pair};
use pointscatter::io::{read_potential, write_potential};
use pointscatter::model::{
    sphere_directions, validate_potential, ExpTerm, ExponentialSum, FarFieldOracle, IncidentVector, Potential,
    Scatterer, Wavenumber,
};
use pointscatter::numerics::{bessel_j0, bessel_y0, newton2d, solve_complex_linear, ComplexMatrix, ComplexVector};
use pointscatter::recover::{
    complex_direction, default_probe_directions, dominant_growth, recover_exponential_sum, recover_potential,
    TangentFramePoint,
};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

/// Unit vector from two angles (d = 3) or one (d = 2).
fn unit(dim: usize, a: f64, b: f64) -> Vec<f64> {
    match dim {
        2 => vec![a.cos(), a.sin()],
        _ => {
            let z = b.clamp(-1.0, 1.0);
            let r = (1.0 - z * z).sqrt();
            vec![r * a.cos(), r * a.sin(), z]
        }
    }
}

/// `n` points in the ball of radius 3 with pairwise separation >= 0.2.
fn positions(dim: usize, n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0..3.0f64, dim), n).prop_filter(
        "separated points in the ball",
        |ys| {
            ys.iter().all(|y| y.iter().map(|v| v * v).sum::<f64>() <= 9.0)
                && (0..ys.len()).all(|i| (i + 1..ys.len()).all(|j| dist(&ys[i], &ys[j]) >= 0.2))
        },
    )
}

/// `(dim, potential)` with real strengths in `[0.5, 2]`.
fn potential(max_n: usize) -> impl Strategy<Value = Potential> {
    (2usize..=3, 1..=max_n)
        .prop_flat_map(|(dim, n)| (Just(dim), positions(dim, n), prop::collection::vec(0.5..2.0f64, n)))
        .prop_map(|(dim, ys, alphas)| {
            let s = ys
                .into_iter()
                .zip(alphas)
                .map(|(y, a)| Scatterer::new(y, Complex64::new(a, 0.0)))
                .collect();
            Potential::new(dim, s).unwrap()
        })
}

fn exp_sum(max_n: usize) -> impl Strategy<Value = ExponentialSum> {
    (2usize..=3, 1..=max_n)
        .prop_flat_map(|(dim, n)| {
            (
                Just(dim),
                positions(dim, n),
                prop::collection::vec((0.5..2.0f64, -PI..PI), n),
            )
        })
        .prop_map(|(dim, ys, cs)| {
            let terms = ys
                .into_iter()
                .zip(cs)
                .map(|(y, (r, ph))| ExpTerm {
                    coefficient: Complex64::from_polar(r, ph),
                    frequency: y,
                })
                .collect();
            ExponentialSum::new(dim, terms).unwrap()
        })
}

fn incident(dim: usize, a: f64, b: f64, kappa: Wavenumber) -> IncidentVector {
    IncidentVector::from_direction(&unit(dim, a, b), kappa).unwrap()
}

/// Matches each expected term to the nearest recovered one and returns the
/// largest frequency and relative coefficient deviations.
fn term_errors(want: &[ExpTerm], got: &[ExpTerm]) -> (f64, f64) {
    let mut df: f64 = 0.0;
    let mut dc: f64 = 0.0;
    for w in want {
        let Some(g) = got
            .iter()
            .min_by(|a, b| dist(&a.frequency, &w.frequency).total_cmp(&dist(&b.frequency, &w.frequency)))
        else {
            return (f64::INFINITY, f64::INFINITY);
        };
        df = df.max(dist(&g.frequency, &w.frequency));
        dc = dc.max((g.coefficient - w.coefficient).norm() / w.coefficient.norm());
    }
    (df, dc)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bessel_wronskian(z in 0.05..50.0f64) {
        let h = 1e-5;
        let dj = (bessel_j0(z + h).unwrap() - bessel_j0(z - h).unwrap()) / (2.0 * h);
        let dy = (bessel_y0(z + h).unwrap() - bessel_y0(z - h).unwrap()) / (2.0 * h);
        let w = bessel_j0(z).unwrap() * dy - dj * bessel_y0(z).unwrap();
        let want = 2.0 / (PI * z);
        prop_assert!((w - want).abs() <= 1e-8 * want, "z = {z}: {w} vs {want}");
    }

    #[test]
    fn linear_solve_residual(n in 1usize..=8, entries in prop::collection::vec(complex(), 64), rhs in prop::collection::vec(complex(), 8)) {
        let rows: Vec<Vec<Complex64>> = (0..n)
            .map(|i| (0..n).map(|j| entries[i * 8 + j] + if i == j { Complex64::new(4.0 * n as f64, 0.0) } else { Complex64::new(0.0, 0.0) }).collect())
            .collect();
        let a = ComplexMatrix::from_rows(&rows).unwrap();
        let b = ComplexVector::new(rhs[..n].to_vec());
        let x = solve_complex_linear(&a, &b).unwrap();
        let ax = a.mul_vec(&x).unwrap();
        let res = (0..n).map(|i| (ax[i] - b[i]).norm()).fold(0.0, f64::max);
        prop_assert!(res <= 1e-12 * (1.0 + a.norm_inf() * x.norm_inf()));
    }

    #[test]
    fn newton_solves_linear_maps_in_two_steps(m in prop::array::uniform4(-3.0..3.0f64), c in prop::array::uniform2(-5.0..5.0f64), x0 in prop::array::uniform2(-5.0..5.0f64)) {
        let det = m[0] * m[3] - m[1] * m[2];
        prop_assume!(det.abs() > 0.1);
        let f = |x: [f64; 2]| [m[0] * x[0] + m[1] * x[1] - c[0], m[2] * x[0] + m[3] * x[1] - c[1]];
        let root = newton2d(f, x0, 1e-10, 50).unwrap();
        prop_assert!(root.iterations <= 2, "{} iterations", root.iterations);
    }

    #[test]
    fn validation_is_idempotent(p in potential(5)) {
        let again = validate_potential(p.dim(), p.scatterers().to_vec()).unwrap();
        prop_assert_eq!(again, p);
    }

    #[test]
    fn oracle_matches_direct_summation(sum in exp_sum(5), a in -PI..PI, b in -1.0..1.0f64) {
        let theta = unit(sum.dim(), a, b);
        let u = FarFieldOracle::new(sum.clone());
        let direct: Complex64 = sum
            .terms()
            .iter()
            .map(|t| t.coefficient * Complex64::from_polar(1.0, t.frequency.iter().zip(&theta).map(|(y, th)| y * th).sum::<f64>()))
            .sum();
        let scale: f64 = sum.terms().iter().map(|t| t.coefficient.norm()).sum();
        prop_assert!((u.eval_real(&theta) - direct).norm() <= 1e-14 * scale);
    }

    #[test]
    fn foldy_lax_residual_and_symmetry(p in potential(6), kv in 0.2..3.0f64, a in -PI..PI, b in -1.0..1.0f64) {
        let kappa = Wavenumber::new(kv).unwrap();
        let k = incident(p.dim(), a, b, kappa);
        let s = solve_charges(&p, kappa, &k).unwrap();
        prop_assert!(s.residual() <= 1e-12 * (1.0 + s.matrix().norm_inf() * s.charges().norm_inf()));
        let m = interaction_matrix(&p, kappa).unwrap();
        for i in 0..p.len() {
            for j in 0..p.len() {
                prop_assert_eq!(m.get(i, j).re.to_bits(), m.get(j, i).re.to_bits());
                prop_assert_eq!(m.get(i, j).im.to_bits(), m.get(j, i).im.to_bits());
            }
        }
    }

    #[test]
    fn green_solves_helmholtz(dim in 1usize..=3, r in 0.5..5.0f64, a in -PI..PI, b in -1.0..1.0f64, kv in 0.5..2.0f64) {
        let kappa = Wavenumber::new(kv).unwrap();
        let dir = match dim { 1 => vec![if a >= 0.0 { 1.0 } else { -1.0 }], d => unit(d, a, b) };
        let x: Vec<f64> = dir.iter().map(|v| v * r).collect();
        let h = 1e-4;
        let g0 = green(dim, &x, kappa).unwrap();
        let mut lap = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            lap += (green(dim, &xp, kappa).unwrap() - 2.0 * g0 + green(dim, &xm, kappa).unwrap()) / (h * h);
        }
        prop_assert!((lap + kv * kv * g0).norm() <= 1e-4 * (1.0 + g0.norm()) * kv * kv);
    }

    #[test]
    fn nonzero_potentials_are_not_transparent(p in potential(4), a in -PI..PI, b in -1.0..1.0f64) {
        let kappa = Wavenumber::new(1.0).unwrap();
        let s = solve_charges(&p, kappa, &incident(p.dim(), a, b, kappa)).unwrap();
        let peak = sphere_directions(p.dim(), 128)
            .iter()
            .map(|d| s.scattering_amplitude(&d.iter().map(|v| v * kappa.value()).collect::<Vec<_>>()).unwrap().f_plus.norm())
            .fold(0.0, f64::max);
        prop_assert!(peak > 1e-10);
    }

    #[test]
    fn frame_points_lie_on_the_complex_sphere(tau in 0.0..100.0f64, a in -PI..PI, b in -1.0..1.0f64, c in -PI..PI) {
        let e1 = unit(3, a, b);
        // A unit vector orthogonal to e1.
        let helper = if e1[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let mut u = [e1[1] * helper[2] - e1[2] * helper[1], e1[2] * helper[0] - e1[0] * helper[2], e1[0] * helper[1] - e1[1] * helper[0]];
        let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        u.iter_mut().for_each(|v| *v /= nu);
        let w = [e1[1] * u[2] - e1[2] * u[1], e1[2] * u[0] - e1[0] * u[2], e1[0] * u[1] - e1[1] * u[0]];
        let e2: Vec<f64> = (0..3).map(|i| c.cos() * u[i] + c.sin() * w[i]).collect();
        let p = TangentFramePoint::new(tau, e1, e2).unwrap();
        let theta = complex_direction(&p);
        let tt: Complex64 = theta.iter().map(|z| z * z).sum();
        prop_assert!((tt - 1.0).norm() <= 1e-12 * (1.0 + tau * tau));
    }

    #[test]
    fn io_round_trip_is_bit_exact(p in potential(5), kv in 1e-3..1e3f64, im in prop::collection::vec(-1e3..1e3f64, 5)) {
        let scatterers = p
            .scatterers()
            .iter()
            .zip(&im)
            .map(|(s, &b)| Scatterer::new(s.position.iter().map(|v| v / 3.0).collect(), Complex64::new(s.strength.re / 7.0, b)))
            .collect();
        let p = Potential::new(p.dim(), scatterers).unwrap();
        let kappa = Wavenumber::new(kv).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        write_potential(&path, &p, Some(kappa)).unwrap();
        let (back, kback) = read_potential(&path).unwrap();
        prop_assert_eq!(back, p);
        prop_assert_eq!(kback.unwrap().value().to_bits(), kv.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn exponential_sum_round_trip(sum in exp_sum(5)) {
        let u = FarFieldOracle::new(sum.clone());
        let rep = recover_exponential_sum(&u, 16, 1e-9).unwrap();
        prop_assert_eq!(rep.terms.len(), sum.len());
        let (df, dc) = term_errors(sum.terms(), rep.terms.terms());
        prop_assert!(df <= 1e-6 && dc <= 1e-6, "frequency {df:e}, coefficient {dc:e}");
        prop_assert!(rep.iterations <= sum.len() + 1);
    }

    #[test]
    fn recovery_is_linear_in_the_amplitude(sum in exp_sum(4), s in complex()) {
        prop_assume!(s.norm() > 0.1);
        let a = recover_exponential_sum(&FarFieldOracle::new(sum.clone()), 16, 1e-9).unwrap();
        let b = recover_exponential_sum(&FarFieldOracle::new(sum.scaled(s).unwrap()), 16, 1e-9).unwrap();
        prop_assert_eq!(a.terms.len(), b.terms.len());
        let scaled: Vec<ExpTerm> = a
            .terms
            .terms()
            .iter()
            .map(|t| ExpTerm { coefficient: t.coefficient * s, frequency: t.frequency.clone() })
            .collect();
        let (df, dc) = term_errors(&scaled, b.terms.terms());
        prop_assert!(df <= 1e-9 && dc <= 1e-6, "frequency {df:e}, coefficient {dc:e}");
    }

    #[test]
    fn dominant_growth_is_maximal(sum in exp_sum(5), seed in any::<u64>()) {
        let u = FarFieldOracle::new(sum.clone());
        let Some((e2, _)) = dominant_growth(&u).unwrap() else {
            // Only a single term at the origin is bounded.
            prop_assert!(sum.terms().iter().all(|t| t.frequency.iter().all(|v| *v == 0.0)));
            return Ok(());
        };
        let g = |e: &[f64]| sum.terms().iter().map(|t| t.frequency.iter().zip(e).map(|(a, b)| a * b).sum::<f64>()).fold(f64::NEG_INFINITY, f64::max);
        let best = g(&e2);
        let mut state = seed | 1;
        for _ in 0..10_000 {
            // xorshift keeps the 10^4 probe directions cheap and reproducible.
            let mut next = || { state ^= state << 13; state ^= state >> 7; state ^= state << 17; (state >> 11) as f64 / (1u64 << 53) as f64 };
            let e = unit(sum.dim(), 2.0 * PI * next() - PI, 2.0 * next() - 1.0);
            prop_assert!(best >= g(&e) - 1e-6);
        }
    }

    #[test]
    fn potential_round_trip(p in potential(5), a in -PI..PI, b in -1.0..1.0f64) {
        let kappa = Wavenumber::new(1.0).unwrap();
        let k = incident(p.dim(), a, b, kappa);
        let r = recover_potential(|kq: &IncidentVector| solve_charges(&p, kappa, kq)?.amplitude_oracle(), kappa, &k, &default_probe_directions(p.dim(), kappa), 16, 1e-9).unwrap();
        prop_assert_eq!(r.potential.len(), p.len());
        for s in p.scatterers() {
            let best = r.potential.scatterers().iter().min_by(|x, y| dist(&x.position, &s.position).total_cmp(&dist(&y.position, &s.position))).unwrap();
            prop_assert!(dist(&best.position, &s.position) <= 1e-6);
            prop_assert!((best.strength - s.strength).norm() <= 1e-5);
        }
    }

    #[test]
    fn recoveries_separate_perturbed_potentials(p in potential(4), which in 0usize..4, shift in prop::bool::ANY, a in -PI..PI, b in -1.0..1.0f64) {
        let kappa = Wavenumber::new(1.0).unwrap();
        let j = which % p.len();
        let mut scatterers = p.scatterers().to_vec();
        if shift {
            scatterers[j].position[0] += 1e-3;
        } else {
            scatterers[j].strength += 1e-3;
        }
        let q = Potential::new(p.dim(), scatterers).unwrap();
        let k = incident(p.dim(), a, b, kappa);
        let probes = default_probe_directions(p.dim(), kappa);
        let rp = recover_potential(|kq: &IncidentVector| solve_charges(&p, kappa, kq)?.amplitude_oracle(), kappa, &k, &probes, 16, 1e-9).unwrap();
        let rq = recover_potential(|kq: &IncidentVector| solve_charges(&q, kappa, kq)?.amplitude_oracle(), kappa, &k, &probes, 16, 1e-9).unwrap();
        let target = &q.scatterers()[j];
        let near = |r: &Potential| r.scatterers().iter().min_by(|x, y| dist(&x.position, &target.position).total_cmp(&dist(&y.position, &target.position))).unwrap().clone();
        let (sp, sq) = (near(&rp.potential), near(&rq.potential));
        let moved = dist(&sp.position, &sq.position);
        let changed = (sp.strength - sq.strength).norm();
        if shift {
            prop_assert!((moved - 1e-3).abs() <= 1e-6, "moved {moved:e}");
        } else {
            prop_assert!((changed - 1e-3).abs() <= 1e-5, "changed {changed:e}");
        }
    }

    #[test]
    fn fitted_pairs_are_certified(dim in 2usize..=3, kv in 0.3..3.0f64, a in -PI..PI, b in -1.0..1.0f64, c in -PI..PI, r in 0.2..3.0f64, d2 in complex(), d2t in complex()) {
        prop_assume!(d2.norm() > 1e-3 && d2t.norm() > 1e-3 && (d2 - d2t).norm() > 1e-3);
        let kappa = Wavenumber::new(kv).unwrap();
        let k = incident(dim, a, b, kappa);
        // Offset orthogonal to k.
        let kd = unit(dim, a, b);
        let y2: Vec<f64> = match dim {
            2 => vec![-kd[1] * r, kd[0] * r],
            _ => {
                let helper = if kd[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
                let u = [kd[1] * helper[2] - kd[2] * helper[1], kd[2] * helper[0] - kd[0] * helper[2], kd[0] * helper[1] - kd[1] * helper[0]];
                let w = [kd[1] * u[2] - kd[2] * u[1], kd[2] * u[0] - kd[0] * u[2], kd[0] * u[1] - kd[1] * u[0]];
                let nu = (u.iter().map(|v| v * v).sum::<f64>()).sqrt();
                let nw = (w.iter().map(|v| v * v).sum::<f64>()).sqrt();
                (0..3).map(|i| r * (c.cos() * u[i] / nu + c.sin() * w[i] / nw)).collect()
            }
        };
        // The fitted origin strength is recovered from a probe call.
        let probe = fitted_pair(dim, kappa, &k, y2.clone(), Complex64::new(1e6, 0.0), Complex64::new(2e6, 0.0)).unwrap();
        let a1 = probe.nu.strength(0);
        let pair = fitted_pair(dim, kappa, &k, y2, a1 + d2, a1 + d2t).unwrap();
        let cert = &pair.certificate;
        prop_assert!(cert.amplitude_discrepancy <= 1e-12 * (1.0 + cert.amplitude_scale));
        prop_assert!(cert.amplitude_scale > 1e-10);
        prop_assert!(pair.nu != pair.nu_tilde);
    }

    #[test]
    fn invisible_additions_leave_the_amplitude_unchanged(dim in 2usize..=3, kv in 0.3..3.0f64, alpha in complex()) {
        let kappa = Wavenumber::new(kv).unwrap();
        let ex = closed_form_invisible_example(dim, kappa).unwrap();
        let Ok(pair) = add_invisible_scatterer(&ex.potential, kappa, &ex.k, &ex.zero, alpha) else {
            return Ok(());
        };
        let q = solve_charges(&ex.potential, kappa, &ex.k).unwrap();
        prop_assert!(pair.charges_tilde[1].norm() <= 1e-8 * (1.0 + q.charges().norm_inf()));
        prop_assert!(pair.certificate.amplitude_discrepancy <= 1e-12 * (1.0 + pair.certificate.amplitude_scale));
        prop_assert!(pair.certificate.amplitude_scale > 1e-10);
    }

    #[test]
    fn found_zeros_are_zeros(kv in 0.3..3.0f64) {
        let kappa = Wavenumber::new(kv).unwrap();
        let ex = closed_form_invisible_example(2, kappa).unwrap();
        let z = &ex.zero.point;
        let region = [(z[0] - 1.0, z[0] + 1.0), (z[1] - 1.0, z[1] + 1.0)];
        let zeros = find_field_zero(&ex.potential, kappa, &ex.k, &region, 60).unwrap();
        let s = solve_charges(&ex.potential, kappa, &ex.k).unwrap();
        // The zero lies on the mirror axis of the field and is degenerate, so
        // it is located only to about the square root of the rounding error.
        prop_assert!(zeros.iter().any(|f| dist(&f.point, z) <= 1e-6));
        for f in &zeros {
            prop_assert!(s.total_field(&f.point).unwrap().norm() <= 1e-8);
            prop_assert!(ex.potential.scatterers().iter().all(|sc| dist(&sc.position, &f.point) > 1e-6));
        }
    }
}
