//! Bessel functions of order zero and the Hankel function `H_0^(1)`.
//!
//! Three regimes are used:
//! * `z <= 2`: ascending power series for `J_0` and `Y_0`;
//! * `2 < z <= 25`: Miller backward recurrence for `J_{2m}`, normalised with
//!   `J_0 + 2 sum J_{2m} = 1`, and the Neumann series for `Y_0`;
//! * `z > 25`: Hankel's asymptotic expansion summed to its smallest term.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use super::NumericsError;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// `H_0^(1)(z) = J_0(z) + i Y_0(z)` for real `z > 0`.
pub fn hankel0_first_kind(z: f64) -> Result<Complex64, NumericsError> {
    check_argument(z)?;
    let (j0, y0) = bessel_pair(z);
    Ok(Complex64::new(j0, y0))
}

/// `J_0(z)` for real `z > 0`.
pub fn bessel_j0(z: f64) -> Result<f64, NumericsError> {
    check_argument(z)?;
    Ok(bessel_pair(z).0)
}

/// `Y_0(z)` for real `z > 0`.
pub fn bessel_y0(z: f64) -> Result<f64, NumericsError> {
    check_argument(z)?;
    Ok(bessel_pair(z).1)
}

fn check_argument(z: f64) -> Result<(), NumericsError> {
    if z.is_nan() || z <= 0.0 || z.is_infinite() {
        return Err(NumericsError::Domain(format!(
            "Hankel argument must be finite and positive, got {z}"
        )));
    }
    Ok(())
}

fn bessel_pair(z: f64) -> (f64, f64) {
    if z <= SERIES_LIMIT {
        power_series(z)
    } else if z <= ASYMPTOTIC_LIMIT {
        miller(z)
    } else {
        asymptotic(z)
    }
}

fn power_series(z: f64) -> (f64, f64) {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut j0 = 1.0;
    let mut tail = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        harmonic += 1.0 / kf;
        j0 += term;
        tail -= harmonic * term;
        if term.abs() < 1e-18 * j0.abs().max(1e-300) && k > 2 {
            break;
        }
    }
    let y0 = 2.0 / PI * (((0.5 * z).ln() + EULER_GAMMA) * j0 + tail);
    (j0, y0)
}

fn miller(z: f64) -> (f64, f64) {
    let start = 2 * (((1.5 * z + 40.0) / 2.0).ceil() as usize);
    let mut next = 0.0; // J_{m+1}
    let mut cur = 1e-30; // J_m
    let mut norm = 0.0;
    let mut neumann = 0.0;
    let mut m = start;
    while m > 0 {
        if m.is_multiple_of(2) {
            let half = (m / 2) as f64;
            norm += 2.0 * cur;
            let sign = if (m / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
            neumann += sign * cur / half;
        }
        let prev = 2.0 * m as f64 / z * cur - next;
        next = cur;
        cur = prev;
        m -= 1;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            neumann *= 1e-250;
        }
    }
    norm += cur;
    let j0 = cur / norm;
    let y0 = 2.0 / PI * ((0.5 * z).ln() + EULER_GAMMA) * j0 - 4.0 / PI * (neumann / norm);
    (j0, y0)
}

fn asymptotic(z: f64) -> (f64, f64) {
    // H_0^(1)(z) ~ sqrt(2/(pi z)) e^{i(z - pi/4)} sum_k i^k a_k / z^k with
    // a_k = (-1)^k prod_{m<=k} (2m-1)^2 / (k! 8^k).
    let mut a = 1.0;
    let mut sum = Complex64::new(1.0, 0.0);
    let mut ipow = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= -(odd * odd) / (kf * 8.0 * z);
        if a.abs() >= last {
            break;
        }
        last = a.abs();
        ipow *= Complex64::new(0.0, 1.0);
        sum += ipow * a;
        if a.abs() < 1e-18 {
            break;
        }
    }
    let phase = Complex64::new(z.cos(), z.sin()) * Complex64::from_polar(1.0, -FRAC_PI_4);
    let h = phase * sum * (2.0 / (PI * z)).sqrt();
    (h.re, h.im)
}

#[cfg(test)]
mod tests {
    use super::*;

    // (z, J_0(z), Y_0(z)) evaluated independently at 40 significant digits.
    #[allow(clippy::excessive_precision)]
    const REFERENCE: &[(f64, f64, f64)] = &[
        (0.001, 0.999999750000015625, -4.4714166113759232557),
        (0.01, 0.99997500015624956597, -3.0054556370836459445),
        (0.1, 0.997501562066040032, -1.5342386513503668083),
        (0.5, 0.93846980724081290423, -0.44451873350670655715),
        (1.0, 0.76519768655796655145, 0.088256964215676957983),
        (2.0, 0.22389077914123566805, 0.5103756726497451196),
        (3.0, -0.26005195490193343762, 0.37685001001279038197),
        (5.0, -0.17759677131433830435, -0.30851762524903378007),
        (7.9, 0.19436184484127823969, 0.20652094814437576859),
        (8.1, 0.1475174540443776703, 0.23809132870223480863),
        (10.0, -0.2459357644513483352, 0.055671167283599391424),
        (12.5, 0.14688405470042110231, -0.17121430684466928735),
        (17.0, -0.16985425215118354791, -0.092637198442323692527),
        (24.9, 0.083245968353015490053, -0.13649918399676523538),
        (25.1, 0.10827567149994945198, -0.1167677076380369472),
        (30.0, -0.086367983581040211336, -0.11729573168666402525),
        (50.0, 0.055812327669251815005, -0.098064995470077079029),
        (100.0, 0.019985850304223122424, -0.077244313365083152254),
        (1000.0, 0.024786686152420174561, 0.0047159179776228133998),
        (10000.0, -0.0070961603533888014773, 0.0036478055589866058867),
    ];

    #[test]
    fn matches_reference_values() {
        for &(z, j, y) in REFERENCE {
            let h = hankel0_first_kind(z).unwrap();
            let err = (h - Complex64::new(j, y)).norm();
            assert!(err <= 1e-13 * (1.0 + y.abs()), "z = {z}: error {err:e}");
        }
    }

    #[test]
    fn regimes_agree_at_their_boundaries() {
        let pairs = [
            (SERIES_LIMIT, power_series(SERIES_LIMIT), miller(SERIES_LIMIT)),
            (ASYMPTOTIC_LIMIT, miller(ASYMPTOTIC_LIMIT), asymptotic(ASYMPTOTIC_LIMIT)),
        ];
        for (b, lo, hi) in pairs {
            assert!((lo.0 - hi.0).abs() < 1e-14, "J0 jump at {b}");
            assert!((lo.1 - hi.1).abs() < 1e-14, "Y0 jump at {b}");
        }
    }

    #[test]
    fn unit_argument() {
        let h = hankel0_first_kind(1.0).unwrap();
        assert!((h.re - 0.7651976866).abs() < 1e-10);
        assert!((h.im - 0.0882569642).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_positive_arguments() {
        for z in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(hankel0_first_kind(z), Err(NumericsError::Domain(_))));
        }
    }
}
