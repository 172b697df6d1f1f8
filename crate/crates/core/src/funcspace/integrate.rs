use num_complex::Complex64;

use crate::error::{CoreError, Result};

use super::expr::{FuncExpr, Term};
use super::quadrature::{quadrature_graded, QuadratureOptions};

const INTEGER_SNAP: f64 = 1e-9;

/// `integral of x^mu e^(s x) dx` over `(a, b)` with `0 <= a < b <= inf`.
///
/// Dispatch: power rule for `s = 0`; ascending power series around the
/// exponential when it converges without cancellation; integration by parts
/// for non-negative integer `mu`; graded quadrature otherwise (with an
/// analytically bounded truncation for half-line integrals). No special
/// functions are involved.
pub fn power_exp_integral(mu: f64, s: f64, a: f64, b: f64) -> Result<f64> {
    debug_assert!(a >= 0.0 && b > a);
    if a == 0.0 && mu <= -1.0 {
        return Err(CoreError::NonIntegrableSingularity {
            exponent: mu,
            endpoint: 0.0,
        });
    }
    if b.is_infinite() {
        if s >= 0.0 {
            return Err(CoreError::NonIntegrableSingularity {
                exponent: mu,
                endpoint: f64::INFINITY,
            });
        }
        return half_line_integral(mu, s, a);
    }
    if s == 0.0 {
        return Ok(power_rule(mu, a, b));
    }
    let m = mu.round();
    let is_int = (mu - m).abs() <= INTEGER_SNAP && m >= 0.0;
    // the series in s is cancellation-free for s > 0 and mild for small |s|b
    if (s > 0.0 && s * b <= 200.0) || s.abs() * b <= 1.0 {
        return series_integral(mu, s, a, b);
    }
    if is_int {
        return Ok(by_parts_finite(m as usize, s, a, b));
    }
    quadrature_integral(mu, s, a, b)
}

fn power_rule(mu: f64, a: f64, b: f64) -> f64 {
    if (mu + 1.0).abs() <= f64::EPSILON {
        return (b / a).ln();
    }
    let p = mu + 1.0;
    let upper = b.powf(p);
    let lower = if a == 0.0 { 0.0 } else { a.powf(p) };
    (upper - lower) / p
}

/// `sum_j s^j / j! * (b^(mu+j+1) - a^(mu+j+1)) / (mu+j+1)`.
fn series_integral(mu: f64, s: f64, a: f64, b: f64) -> Result<f64> {
    let mut acc = 0.0;
    let mut factor = 1.0; // s^j / j!
    for j in 0..10_000u32 {
        let term = factor * power_rule(mu + f64::from(j), a, b);
        acc += term;
        if term.abs() <= 1e-17 * acc.abs().max(f64::MIN_POSITIVE) && j > 2 {
            return Ok(acc);
        }
        factor *= s / f64::from(j + 1);
    }
    Err(CoreError::ToleranceNotMet {
        achieved: f64::NAN,
        target: 1e-15,
    })
}

/// Upward integration by parts for integer `m`:
/// `I_m = (b^m e^(sb) - a^m e^(sa)) / s - (m/s) I_(m-1)`.
fn by_parts_finite(m: usize, s: f64, a: f64, b: f64) -> f64 {
    let ea = (s * a).exp();
    let eb = (s * b).exp();
    // I_0 via expm1 keeps accuracy when |s (b-a)| is small
    let mut acc = ea * ((s * (b - a)).exp_m1()) / s;
    for k in 1..=m {
        let pa = if a == 0.0 && k > 0 {
            0.0
        } else {
            a.powi(k as i32)
        };
        acc = (b.powi(k as i32) * eb - pa * ea) / s - (k as f64 / s) * acc;
    }
    acc
}

/// Half-line case, `s < 0`. Integer powers integrate by parts with all
/// positive contributions; other powers truncate at an `L` with a provably
/// negligible tail and integrate `[a, L]` by graded quadrature.
fn half_line_integral(mu: f64, s: f64, a: f64) -> Result<f64> {
    let m = mu.round();
    if (mu - m).abs() <= INTEGER_SNAP && m >= 0.0 {
        let ea = (s * a).exp();
        let mut acc = -ea / s;
        for k in 1..=(m as usize) {
            let pa = if a == 0.0 { 0.0 } else { a.powi(k as i32) };
            acc = -pa * ea / s - (k as f64 / s) * acc;
        }
        return Ok(acc);
    }
    let l = a + (80.0 + 2.0 * mu.max(0.0) * (1.0 + mu.abs()).ln().max(1.0)) / (-s);
    quadrature_integral(mu, s, a, l)
}

fn quadrature_integral(mu: f64, s: f64, a: f64, b: f64) -> Result<f64> {
    let opts = QuadratureOptions {
        max_panel_len: (6.0 / s.abs()).max(1e-3),
        ..QuadratureOptions::default()
    };
    // the integrand is singular at the left end only when a = 0 and mu < 0
    let sigma = if a == 0.0 { mu.min(0.0) } else { 0.0 };
    quadrature_graded(|x: f64| x.powf(mu) * (s * x).exp(), a, b, sigma, &opts)
}

fn integrate_term(t: &Term, a: f64, b: f64) -> Result<Complex64> {
    Ok(t.coeff * power_exp_integral(t.power, t.rate, a, b)?)
}

fn integrate_terms(terms: &[Term], a: f64, b: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for t in terms {
        acc += integrate_term(t, a, b)?;
    }
    Ok(acc)
}

/// Plain integral of `f` over its interval.
pub fn integrate(f: &FuncExpr) -> Result<Complex64> {
    let iv = f.interval();
    integrate_terms(f.terms(), iv.lower, iv.upper)
}

/// `integral of x^p conj(f) g` over the common interval. Conjugate symmetric:
/// `inner_product(f, g) = conj(inner_product(g, f))`.
pub fn inner_product(f: &FuncExpr, g: &FuncExpr, p: f64) -> Result<Complex64> {
    let iv = f.interval();
    debug_assert_eq!(iv, g.interval(), "interval mismatch");
    let mut terms = Vec::with_capacity(f.terms().len() * g.terms().len());
    for s in f.terms() {
        for t in g.terms() {
            terms.push(Term::new(
                s.coeff.conj() * t.coeff,
                s.power + t.power + p,
                s.rate + t.rate,
            ));
        }
    }
    integrate_terms(&terms, iv.lower, iv.upper)
}

/// `integral of x^p |f|^2` over the interval; real and non-negative up to
/// rounding.
pub fn integrate_abs2(f: &FuncExpr, p: f64) -> Result<f64> {
    let v = inner_product(f, f, p)?;
    debug_assert!(
        v.im.abs() <= 1e-10 * v.re.abs().max(1.0),
        "self inner product must be real"
    );
    Ok(v.re)
}
