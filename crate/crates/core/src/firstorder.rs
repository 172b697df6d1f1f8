//! Dissipative extensions of the singular first-order operator
//! `A f = i f' + i (gamma/x) f` on `L^2(0, 1)` with domain `H^1_0(0, 1)`,
//! for `gamma > 0`.
//!
//! The imaginary-part operator is multiplication by `gamma/x`, so every
//! ingredient of the general criterion is explicit. A complement direction
//! `v` is admissible iff `sqrt(x) v(x)` splits as an `H^1_0(0,1)` part plus a
//! multiple of `x^(gamma + 1/2)`; the extension mapping `v` to `l` is
//! dissipative iff
//!
//! `Im<v, l> >= (1/4) int_0^1 | sqrt(x/g) l - i (sqrt(x/g) v)' + i ((2g+1)/(2 sqrt(g x))) v |^2 dx`.
//!
//! Both memberships are decided symbolically by exponent analysis; grid
//! sampled inputs are rejected for the membership test, since Sobolev
//! membership is not decidable from samples.

use num_complex::Complex64;
use serde::Serialize;

use crate::decision::{BoundaryBand, Decision};
use crate::error::{CoreError, Result};
use crate::funcspace::{inner_product, integrate_abs2, FuncExpr, Interval, Term};

/// Parameters of the operator: the singularity strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularParams {
    pub gamma: f64,
}

impl SingularParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(CoreError::InvalidInput(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        Ok(SingularParams { gamma })
    }
}

/// Outcome of the W* domain membership test with its certificate.
#[derive(Debug, Clone, Serialize)]
pub struct WStarMembership {
    pub in_domain: bool,
    /// Coefficient of `x^(gamma+1/2)` in the decomposition of `sqrt(x) v`;
    /// pinned to `v(1)` because the `H^1_0` part must vanish at 1.
    #[serde(with = "crate::serde_cx")]
    pub coefficient: Complex64,
    /// Whether the residual part `h = sqrt(x) v - c x^(gamma+1/2)` lies in
    /// `H^1_0(0, 1)`.
    pub h_h10_ok: bool,
    /// Leading exponent of `v` at 0.
    pub v_leading_exponent: f64,
    /// Leading exponent of `h` at 0 (`inf` when `h` vanishes identically).
    pub h_leading_exponent: f64,
    /// Leading exponent of `h'` at 0 (`inf` when `h'` vanishes identically).
    pub h_prime_leading_exponent: f64,
    /// `|h(1)|`; zero by construction up to rounding.
    pub h_value_at_one: f64,
}

/// Decision record for one extension direction of the singular operator.
#[derive(Debug, Clone, Serialize)]
pub struct DissipativityReport {
    /// `Im<v, l>`.
    pub lhs: f64,
    /// The quarter-norm of the criterion integrand.
    pub rhs: f64,
    pub margin: f64,
    pub decision: Decision,
    /// Relative boundary band applied to the margin.
    pub boundary_band_rel: f64,
    pub membership: WStarMembership,
}

fn leading_or_inf(f: &FuncExpr) -> f64 {
    f.leading_exponent_at_zero()
        .map(|(e, _)| e)
        .unwrap_or(f64::INFINITY)
}

/// Decides `v in D(W*)`: with `c := v(1)` and
/// `h := sqrt(x) v - c x^(gamma+1/2)`, membership holds iff `h` lies in
/// `H^1_0(0, 1)`, which the exponent table decides: `h(0+) = 0`,
/// `h(1) = 0` (forced by the choice of `c`), and the leading exponent of
/// `h'` above `-1/2`.
pub fn wstar_domain_test(v: &FuncExpr, params: SingularParams) -> WStarMembership {
    let c = v.eval(1.0);
    let sqrt_x_v = v.shift_power(0.5);
    let spike = FuncExpr::raw(v.interval(), vec![Term::new(c, params.gamma + 0.5, 0.0)]);
    let h = sqrt_x_v.sub(&spike).merge_terms();
    let h_prime = h.differentiate();

    let h_leading = leading_or_inf(&h);
    let h_prime_leading = leading_or_inf(&h_prime);
    let h_at_one = h.eval(1.0).norm();

    let vanishes_at_zero = h_leading > 0.0;
    let derivative_l2 = h_prime_leading > -0.5;
    let h_h10_ok = vanishes_at_zero && derivative_l2;

    WStarMembership {
        in_domain: h_h10_ok,
        coefficient: c,
        h_h10_ok,
        v_leading_exponent: leading_or_inf(v),
        h_leading_exponent: h_leading,
        h_prime_leading_exponent: h_prime_leading,
        h_value_at_one: h_at_one,
    }
}

/// Whether `v` lies in `H^1_0(0, 1)` (in which case it does not extend the
/// domain at all).
fn in_h10(v: &FuncExpr) -> bool {
    let vanishes_zero = leading_or_inf(v) > 0.0;
    let vanishes_one = v.eval(1.0).norm() <= 1e-11 * v.coeff_scale().max(1.0);
    let derivative_l2 = leading_or_inf(&v.differentiate()) > -0.5;
    vanishes_zero && vanishes_one && derivative_l2
}

/// The criterion integrand
/// `sqrt(x/g) l - i (sqrt(x/g) v)' + i ((2g+1)/(2 sqrt(g x))) v`,
/// assembled exactly as displayed, without algebraic simplification.
pub fn condition_integrand(v: &FuncExpr, ell: &FuncExpr, params: SingularParams) -> FuncExpr {
    let g = params.gamma;
    let inv_sqrt_g = Complex64::new(1.0 / g.sqrt(), 0.0);
    let term_ell = ell.shift_power(0.5).scale(inv_sqrt_g);
    let term_w = v
        .shift_power(0.5)
        .scale(inv_sqrt_g)
        .differentiate()
        .scale(Complex64::new(0.0, -1.0));
    let term_mult = v
        .shift_power(-0.5)
        .scale(Complex64::new(0.0, (2.0 * g + 1.0) / (2.0 * g.sqrt())));
    term_ell.add(&term_w).add(&term_mult)
}

/// The simplified path used only for the cancellation check: the integrand
/// with terms merged, so exact coefficient cancellation yields an actually
/// empty expression.
pub fn condition_integrand_merged(
    v: &FuncExpr,
    ell: &FuncExpr,
    params: SingularParams,
) -> FuncExpr {
    condition_integrand(v, ell, params).merge_terms()
}

/// Symbolic right-hand side for `l = 0`; exactly zero when the W*-part
/// cancels identically (as it does for `v = x^gamma`).
pub fn cancellation_rhs_symbolic(v: &FuncExpr, params: SingularParams) -> Result<f64> {
    let zero = FuncExpr::zero(v.interval());
    let u = condition_integrand_merged(v, &zero, params);
    if u.is_zero() {
        return Ok(0.0);
    }
    Ok((0.25 * integrate_abs2(&u, 0.0)?).max(0.0))
}

/// Decides dissipativity of the extension sending `v` to `l`.
///
/// Errors: `NotInWStarDomain` when the membership test fails (the extension
/// cannot be dissipative); `NonIntegrableSingularity` when the right-hand
/// side diverges (same conclusion); `DomainViolation` when `v` lies in
/// `H^1_0` and adds nothing.
pub fn dissipativity_check(
    v: &FuncExpr,
    ell: &FuncExpr,
    params: SingularParams,
    band: BoundaryBand,
) -> Result<DissipativityReport> {
    let membership = wstar_domain_test(v, params);
    if !membership.in_domain {
        return Err(CoreError::NotInWStarDomain {
            leading_exponent: membership.h_prime_leading_exponent,
        });
    }
    if in_h10(v) {
        return Err(CoreError::DomainViolation {
            what: "v lies in H^1_0(0,1); it does not extend the domain".into(),
        });
    }
    let lhs = inner_product(v, ell, 0.0)?.im;
    let u = condition_integrand(v, ell, params);
    // a squared norm; clamp away the last-digit cancellation noise
    let rhs = (0.25 * integrate_abs2(&u, 0.0)?).max(0.0);
    let margin = lhs - rhs;
    let scale = 1.0_f64.max(lhs.abs()).max(rhs.abs());
    Ok(DissipativityReport {
        lhs,
        rhs,
        margin,
        decision: band.classify(margin, scale),
        boundary_band_rel: band.rel,
        membership,
    })
}

/// Serializable description of a maximally dissipative extension.
#[derive(Debug, Clone, Serialize)]
pub struct ExtensionDescriptor {
    pub gamma: f64,
    pub decision: Decision,
    pub margin: f64,
    /// The complement dimension equals the defect dimension, which certifies
    /// maximality of the extension.
    pub complement_dimension: usize,
    pub defect_dimension: usize,
    pub domain: String,
    pub action: String,
}

/// Builds the descriptor of the extension `f + lambda v -> A f + lambda l`,
/// provided the dissipativity condition holds (boundary included).
pub fn build_extension(
    v: &FuncExpr,
    ell: &FuncExpr,
    params: SingularParams,
    band: BoundaryBand,
) -> Result<ExtensionDescriptor> {
    let report = dissipativity_check(v, ell, params, band)?;
    if report.decision == Decision::NotDissipative {
        return Err(CoreError::ConditionFailed {
            margin: report.margin,
        });
    }
    Ok(ExtensionDescriptor {
        gamma: params.gamma,
        decision: report.decision,
        margin: report.margin,
        complement_dimension: 1,
        defect_dimension: 1,
        domain: "H^1_0(0,1) + span{v}".into(),
        action: "f + lambda v -> A f + lambda l".into(),
    })
}

/// Generator of `ker(A* - i)`: the function `x^gamma e^x`.
pub fn defect_kernel(params: SingularParams) -> FuncExpr {
    FuncExpr::raw(
        Interval::unit(),
        vec![Term::new(Complex64::new(1.0, 0.0), params.gamma, 1.0)],
    )
}

/// The residual `i k' - i (gamma/x) k - i k` of the kernel candidate,
/// term-merged; identically zero certifies the kernel claim symbolically.
pub fn defect_kernel_residual(params: SingularParams) -> FuncExpr {
    let k = defect_kernel(params);
    let i = Complex64::new(0.0, 1.0);
    let d = k.differentiate().scale(i);
    let mult = k
        .shift_power(-1.0)
        .scale(i * Complex64::new(params.gamma, 0.0));
    let shift = k.scale(i);
    d.sub(&mult).sub(&shift).merge_terms()
}

/// One row of a parameter sweep along `l = i c x^gamma`, `v = x^gamma`.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub gamma: f64,
    pub coefficient: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub decision: Option<Decision>,
    pub error: Option<String>,
}

/// The canonical ray family: `v = x^gamma`, `l = i c x^gamma`.
pub fn ray_pair(params: SingularParams, c: f64) -> (FuncExpr, FuncExpr) {
    let v = FuncExpr::raw(
        Interval::unit(),
        vec![Term::new(Complex64::new(1.0, 0.0), params.gamma, 0.0)],
    );
    let ell = v.scale(Complex64::new(0.0, c));
    (v, ell)
}

/// Closed-form threshold of the ray family: `c* = 8 g (g+1) / (2g+1)`.
pub fn ray_threshold(params: SingularParams) -> f64 {
    let g = params.gamma;
    8.0 * g * (g + 1.0) / (2.0 * g + 1.0)
}

/// Evaluates one sweep point, folding errors into the row.
pub fn scan_point(gamma: f64, c: f64, band: BoundaryBand) -> ScanRow {
    let run = || -> Result<DissipativityReport> {
        let params = SingularParams::new(gamma)?;
        let (v, ell) = ray_pair(params, c);
        dissipativity_check(&v, &ell, params, band)
    };
    match run() {
        Ok(rep) => ScanRow {
            gamma,
            coefficient: c,
            lhs: rep.lhs,
            rhs: rep.rhs,
            margin: rep.margin,
            decision: Some(rep.decision),
            error: None,
        },
        Err(e) => ScanRow {
            gamma,
            coefficient: c,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            decision: None,
            error: Some(e.to_string()),
        },
    }
}

/// Locates the dissipativity threshold along the ray family by bisection on
/// the margin sign.
pub fn locate_ray_threshold(params: SingularParams, band: BoundaryBand) -> Result<f64> {
    let margin_at = |c: f64| -> Result<f64> {
        let (v, ell) = ray_pair(params, c);
        Ok(dissipativity_check(&v, &ell, params, band)?.margin)
    };
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while margin_at(hi)? > 0.0 {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(CoreError::InvalidInput("no sign change found".into()));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if margin_at(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
