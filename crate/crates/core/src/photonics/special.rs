use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::quadrature::{integrate, QuadOptions};
use crate::error::{Error, Result};

/// `|z|` up to which the Kummer series is summed directly.
const SERIES_RADIUS: f64 = 8.0;

/// `|z|` beyond which the large-argument expansion is used.
const ASYMPTOTIC_RADIUS: f64 = 60.0;

const MAX_TERMS: usize = 4000;

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `1/Γ(x)`, zero at the poles.
fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// Generalized Laguerre polynomial `L_n^α(x)` by upward recurrence.
pub fn laguerre(n: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn check_b(b: f64) -> Result<()> {
    if !b.is_finite() || (b <= 0.0 && b == b.floor()) {
        return Err(Error::validation("b", format!("1F1 needs b ∉ {{0, −1, …}}, got {b}")));
    }
    Ok(())
}

fn series(a: f64, b: f64, z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= z * ((a + kf) / ((b + kf) * (kf + 1.0)));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() && kf > z.norm() {
            break;
        }
        if term.norm() == 0.0 {
            break;
        }
    }
    sum
}

/// `Γ(b)/(Γ(a)Γ(b−a)) ∫₀^{π/2} e^{z sin²θ + w} 2 sin^{2a−1}θ cos^{2b−2a−1}θ dθ`.
fn integral(a: f64, b: f64, z: Complex64, w: Complex64) -> Result<Complex64> {
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-14,
        max_intervals: 4000,
    };
    let body = integrate(
        |t| {
            let (s, c) = t.sin_cos();
            (z * s * s + w).exp() * (2.0 * s.powf(2.0 * a - 1.0) * c.powf(2.0 * b - 2.0 * a - 1.0))
        },
        0.0,
        FRAC_PI_2,
        opts,
    )?;
    Ok(body * (gamma(b) / (gamma(a) * gamma(b - a))))
}

/// Large-`|z|` expansion, each sum truncated at its smallest term.
fn asymptotic(a: f64, b: f64, z: Complex64, w: Complex64) -> Complex64 {
    let sum = |p: f64, q: f64, x: Complex64| {
        let mut term = Complex64::new(1.0, 0.0);
        let mut total = term;
        let mut last = f64::INFINITY;
        for s in 0..MAX_TERMS {
            let sf = s as f64;
            let next = term * ((p + sf) * (q + sf) / (sf + 1.0)) / x;
            if next.norm() >= last || next.norm() <= 1e-17 * total.norm() {
                break;
            }
            last = next.norm();
            term = next;
            total += term;
        }
        total
    };
    let s1 = sum(1.0 - a, b - a, z);
    let s2 = sum(a, a - b + 1.0, -z);
    let sign = if z.im >= 0.0 { 1.0 } else { -1.0 };
    let first = (z + w).exp() * z.powf(a - b) * s1 * rgamma(a);
    let second = w.exp() * Complex64::from_polar(1.0, sign * PI * a) * z.powf(-a) * s2 * rgamma(b - a);
    (first + second) * gamma(b)
}

/// `e^{w} ₁F₁(a; b; z)` for real `a`, `b` and complex `z`.
///
/// The prefactor lets callers cancel the `e^{Re z}` growth of the function
/// before it overflows. Methods: terminating sum for `a ∈ {0, −1, …}`,
/// Kummer series for `|z| ≤ 8`, Euler integral for `a > 0`, `b > a` up to
/// `|z| = 60`, large-argument expansion beyond, and the contiguous relation
/// `₁F₁(a−1; b; z) = ₁F₁(a; b; z) − (z/b) ₁F₁(a; b+1; z)` to reach `a ≤ 0`.
/// For `a ≥ b ≥ 1` at mid-range `|z|`, Kummer's transformation
/// `₁F₁(a; b; z) = e^z ₁F₁(b−a; b; −z)` is applied first.
pub fn hyp1f1_scaled(a: f64, b: f64, z: Complex64, w: Complex64) -> Result<Complex64> {
    check_b(b)?;
    if !a.is_finite() || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::validation("1F1", "arguments must be finite"));
    }
    if a <= 0.0 && a == a.floor() {
        return Ok(w.exp() * series(a, b, z));
    }
    let r = z.norm();
    if r <= SERIES_RADIUS {
        return Ok(w.exp() * series(a, b, z));
    }
    if r > ASYMPTOTIC_RADIUS {
        return Ok(asymptotic(a, b, z, w));
    }
    if a > 0.0 && b > a {
        return integral(a, b, z, w);
    }
    if a <= 0.0 {
        let up = hyp1f1_scaled(a + 1.0, b, z, w)?;
        let side = hyp1f1_scaled(a + 1.0, b + 1.0, z, w)?;
        return Ok(up - z / b * side);
    }
    if b >= 1.0 {
        // Kummer's transformation maps a > b onto b − a < 0.
        return hyp1f1_scaled(b - a, b, -z, w + z);
    }
    Err(Error::validation(
        "1F1",
        format!("no evaluation method for a = {a}, b = {b} at |z| = {r}"),
    ))
}

/// `₁F₁(a; b; z)`.
pub fn hyp1f1(a: f64, b: f64, z: Complex64) -> Result<Complex64> {
    hyp1f1_scaled(a, b, z, Complex64::new(0.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn laguerre_values() {
        assert_eq!(laguerre(0, 2.0, 1.3), 1.0);
        assert!((laguerre(1, 2.0, 1.3) - 1.7).abs() < 1e-15);
        // L_2^1(x) = (x² − 6x + 6)/2
        let x = 0.7;
        assert!((laguerre(2, 1.0, x) - (x * x - 6.0 * x + 6.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn elementary_cases() {
        // ₁F₁(a; a; z) = e^z and ₁F₁(1; 2; z) = (e^z − 1)/z.
        for z in [c(0.5, -0.3), c(5.0, 20.0), c(12.0, -40.0), c(30.0, -200.0)] {
            let a = hyp1f1(1.5, 1.5, z);
            if let Ok(v) = a {
                assert!((v / z.exp() - 1.0).norm() < 1e-10, "{z}");
            }
            let v = hyp1f1(1.0, 2.0, z).unwrap();
            assert!((v - (z.exp() - 1.0) / z).norm() < 1e-10 * v.norm(), "{z}");
        }
    }

    #[test]
    fn terminating_polynomial() {
        // ₁F₁(−2; b; z) = 1 − 2z/b + z²/(b(b+1)).
        let z = c(30.0, -90.0);
        let b = 3.0;
        let exact = 1.0 - 2.0 * z / b + z * z / (b * (b + 1.0));
        assert!((hyp1f1(-2.0, b, z).unwrap() - exact).norm() < 1e-12 * exact.norm());
    }

    #[test]
    fn kummer_transformation() {
        // ₁F₁(a; b; z) = e^z ₁F₁(b−a; b; −z).
        for z in [c(3.0, -9.0), c(20.0, -30.0), c(50.0, -300.0), c(0.4, -70.0)] {
            let lhs = hyp1f1(0.5, 3.0, z).unwrap();
            let rhs = hyp1f1_scaled(2.5, 3.0, -z, z).unwrap();
            assert!((lhs - rhs).norm() < 1e-9 * lhs.norm(), "{z}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn asymptotic_agrees_with_integral() {
        for &(a, b) in &[(0.5, 2.0), (0.5, 3.0), (0.5, 5.0), (1.5, 4.0)] {
            for &z in &[c(60.0, -40.0), c(5.0, -80.0), c(0.6, -65.0), c(30.0, 70.0), c(-40.0, -60.0)] {
                let w = -z.re;
                let w = c(w, 0.0);
                let x = integral(a, b, z, w).unwrap();
                let y = asymptotic(a, b, z, w);
                assert!((x - y).norm() < 1e-9 * x.norm().max(1e-3), "a={a} b={b} z={z}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn series_and_integral_agree() {
        for z in [c(7.5, -2.0), c(-3.0, 7.0), c(1.0, -7.9)] {
            let x = series(0.5, 3.0, z);
            let y = integral(0.5, 3.0, z, c(0.0, 0.0)).unwrap();
            assert!((x - y).norm() < 1e-12 * x.norm());
        }
    }

    #[test]
    fn contiguous_relation_branch() {
        // Series oracle at moderate |z| for a = −1/2.
        let z = c(6.0, -6.0);
        let a = -0.5;
        let direct = series(a, 2.0, z);
        let up = series(a + 1.0, 2.0, z);
        let side = series(a + 1.0, 3.0, z);
        assert!((direct - (up - z / 2.0 * side)).norm() < 1e-12 * direct.norm());
        let z = c(20.0, -40.0);
        let via = hyp1f1(a, 2.0, z).unwrap();
        let kummer = hyp1f1_scaled(2.5, 2.0, -z, z).unwrap();
        assert!((via - kummer).norm() < 1e-9 * via.norm());
    }

    #[test]
    fn rejects_bad_b() {
        assert!(hyp1f1(0.5, 0.0, c(1.0, 0.0)).is_err());
        assert!(hyp1f1(0.5, -2.0, c(1.0, 0.0)).is_err());
    }
}
