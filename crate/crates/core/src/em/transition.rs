//! Fresnel integrals and the UTD transition function.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

/// Below this argument the transition function uses its small-argument series.
pub const SMALL_ARGUMENT: f64 = 0.3;
/// Above this argument the transition function uses its asymptotic series.
pub const LARGE_ARGUMENT: f64 = 5.5;

/// Normalized Fresnel integrals `C(x) = ∫₀ˣ cos(πt²/2) dt`, `S(x) = ∫₀ˣ sin(πt²/2) dt`.
///
/// Power series for `|x| ≤ 1.5`, otherwise a continued fraction for the
/// complementary error function evaluated with the modified Lentz method.
pub fn fresnel_integrals(x: f64) -> (f64, f64) {
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 200;
    const TINY: f64 = 1e-300;
    const SERIES_LIMIT: f64 = 1.5;

    let ax = x.abs();
    let (c, s) = if ax < TINY.sqrt() {
        (ax, 0.0)
    } else if ax <= SERIES_LIMIT {
        let fact = FRAC_PI_2 * ax * ax;
        let (mut sum, mut sum_s, mut sum_c) = (0.0, 0.0, ax);
        let mut sign = 1.0;
        let mut odd = true;
        let mut term = ax;
        let mut n = 3.0;
        for k in 1..=MAX_ITER {
            term *= fact / k as f64;
            sum += sign * term / n;
            let test = sum.abs() * EPS;
            if odd {
                sign = -sign;
                sum_s = sum;
                sum = sum_c;
            } else {
                sum_c = sum;
                sum = sum_s;
            }
            if term < test {
                break;
            }
            odd = !odd;
            n += 2.0;
        }
        (sum_c, sum_s)
    } else {
        let pix2 = PI * ax * ax;
        let mut b = Complex64::new(1.0, -pix2);
        let mut cc = Complex64::new(1.0 / TINY, 0.0);
        let mut d = b.inv();
        let mut h = d;
        let mut n = -1.0;
        for _ in 2..=MAX_ITER {
            n += 2.0;
            let a = -n * (n + 1.0);
            b += Complex64::new(4.0, 0.0);
            d = (d * a + b).inv();
            cc = b + cc.inv() * a;
            let del = cc * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < EPS {
                break;
            }
        }
        h *= Complex64::new(ax, -ax);
        let cs = Complex64::new(0.5, 0.5) * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, 0.5 * pix2) * h);
        (cs.re, cs.im)
    };
    if x < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

/// UTD transition function `F(X) = 2j·√X·e^{jX}·∫_{√X}^∞ e^{−jτ²} dτ` for `X ≥ 0`.
pub fn transition_function(x: f64) -> Complex64 {
    let j = Complex64::new(0.0, 1.0);
    if x <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if x < SMALL_ARGUMENT {
        // ∫₀^{√X} e^{−jτ²} dτ = Σ (−j)^m X^{m+½} / (m!(2m+1))
        let sx = x.sqrt();
        let mut head = Complex64::new(0.0, 0.0);
        let mut power = Complex64::new(sx, 0.0);
        for m in 0..30 {
            let term = power / (2 * m + 1) as f64;
            head += term;
            if term.norm() < 1e-18 {
                break;
            }
            power *= Complex64::new(0.0, -x) / (m + 1) as f64;
        }
        let full = Complex64::from_polar(PI.sqrt() / 2.0, -FRAC_PI_4);
        return 2.0 * j * sx * Complex64::from_polar(1.0, x) * (full - head);
    }
    if x > LARGE_ARGUMENT {
        let x2 = x * x;
        return Complex64::new(1.0 - 0.75 / x2 + 75.0 / (16.0 * x2 * x2), 0.5 / x - 15.0 / (8.0 * x2 * x));
    }
    let sx = x.sqrt();
    let (c, s) = fresnel_integrals(sx * (2.0 / PI).sqrt());
    let tail = (PI / 2.0).sqrt() * Complex64::new(0.5 - c, -(0.5 - s));
    2.0 * j * sx * Complex64::from_polar(1.0, x) * tail
}

#[cfg(test)]
mod tests {
    use super::*;

    // Oracle: composite Simpson quadrature of ∫₀^a e^{−jτ²} dτ, subtracted
    // from the closed-form full integral √π/2·e^{−jπ/4}.
    fn tail_by_quadrature(a: f64) -> Complex64 {
        let n = 200_000;
        let h = a / n as f64;
        let f = |t: f64| Complex64::from_polar(1.0, -t * t);
        let mut acc = f(0.0) + f(a);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += f(i as f64 * h) * w;
        }
        let head = acc * (h / 3.0);
        Complex64::from_polar(PI.sqrt() / 2.0, -FRAC_PI_4) - head
    }

    fn f_oracle(x: f64) -> Complex64 {
        let sx = x.sqrt();
        Complex64::new(0.0, 2.0) * sx * Complex64::from_polar(1.0, x) * tail_by_quadrature(sx)
    }

    #[test]
    fn fresnel_integrals_known_values() {
        // reference values from a standard special-function library
        let (c, s) = fresnel_integrals(1.0);
        assert!((c - 0.779_893_400_4).abs() < 1e-9);
        assert!((s - 0.438_259_147_4).abs() < 1e-9);
        let (c, s) = fresnel_integrals(2.5);
        assert!((c - 0.457_413_009_6).abs() < 1e-9);
        assert!((s - 0.619_181_755_8).abs() < 1e-9);
        let (c, s) = fresnel_integrals(-1.0);
        assert!((c + 0.779_893_400_4).abs() < 1e-9 && (s + 0.438_259_147_4).abs() < 1e-9);
    }

    #[test]
    fn transition_function_matches_quadrature() {
        for &x in &[0.01, 0.1, 0.29, 0.31, 0.5, 1.0, 2.0, 3.7, 5.4, 5.6, 8.0, 20.0] {
            let f = transition_function(x);
            let o = f_oracle(x);
            // the asymptotic branch carries its truncation error
            let tol = if x > LARGE_ARGUMENT { 5e-3 } else { 1e-7 };
            assert!((f - o).norm() < tol, "X={x}: {f} vs {o}");
        }
    }

    #[test]
    fn transition_limits() {
        assert!((transition_function(1e4) - Complex64::new(1.0, 0.0)).norm() < 1e-4);
        assert!(transition_function(1e-8).norm() < 1e-3);
        assert!(transition_function(1e-8).norm() > 0.0);
    }
}
