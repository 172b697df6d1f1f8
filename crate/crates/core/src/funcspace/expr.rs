use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Interval `(a, b)` with `0 <= a < b <= infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || lower < 0.0 || upper.is_nan() || upper <= lower {
            return Err(CoreError::InvalidInput(format!(
                "interval must satisfy 0 <= a < b <= inf, got ({lower}, {upper})"
            )));
        }
        Ok(Interval { lower, upper })
    }

    pub fn unit() -> Self {
        Interval {
            lower: 0.0,
            upper: 1.0,
        }
    }

    pub fn half_line() -> Self {
        Interval {
            lower: 0.0,
            upper: f64::INFINITY,
        }
    }

    pub fn is_half_line(&self) -> bool {
        self.upper.is_infinite()
    }
}

/// One term `c * x^power * e^(rate x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub power: f64,
    pub rate: f64,
}

impl Term {
    pub fn new(coeff: Complex64, power: f64, rate: f64) -> Self {
        Term { coeff, power, rate }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.coeff * x.powf(self.power) * (self.rate * x).exp()
    }
}

/// Endpoint selector for exponent analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Lower,
    Upper,
}

/// Tolerance for merging nearby exponents in asymptotic tables.
pub(crate) const EXPONENT_MERGE_TOL: f64 = 1e-9;

/// Finite sum of power-exponential terms on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct FuncExpr {
    interval: Interval,
    terms: Vec<Term>,
}

impl FuncExpr {
    /// Validating constructor. Enforces the square-integrability shape
    /// conditions: every `power > -1/2` when the interval starts at 0, and
    /// every `rate < 0` when it extends to infinity.
    pub fn new(interval: Interval, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if !t.coeff.re.is_finite()
                || !t.coeff.im.is_finite()
                || !t.power.is_finite()
                || !t.rate.is_finite()
            {
                return Err(CoreError::InvalidInput("non-finite term parameter".into()));
            }
            if t.coeff.norm() == 0.0 {
                continue;
            }
            if interval.lower == 0.0 && t.power <= -0.5 {
                return Err(CoreError::NonIntegrableSingularity {
                    exponent: t.power,
                    endpoint: 0.0,
                });
            }
            if interval.is_half_line() && t.rate >= 0.0 {
                return Err(CoreError::InvalidInput(format!(
                    "term with rate {} is not square integrable on the half line",
                    t.rate
                )));
            }
        }
        Ok(Self::raw(interval, terms))
    }

    /// Non-validating constructor for intermediate objects (derivatives,
    /// integrands) that may leave the L^2 class; integration routines check
    /// integrability where it matters.
    pub(crate) fn raw(interval: Interval, terms: Vec<Term>) -> Self {
        let terms = terms
            .into_iter()
            .filter(|t| t.coeff.norm() != 0.0)
            .collect();
        FuncExpr { interval, terms }
    }

    pub fn zero(interval: Interval) -> Self {
        FuncExpr {
            interval,
            terms: Vec::new(),
        }
    }

    /// Single monomial `c * x^power`.
    pub fn monomial(interval: Interval, coeff: Complex64, power: f64) -> Result<Self> {
        Self::new(interval, vec![Term::new(coeff, power, 0.0)])
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// Largest `|coeff|` among the terms; the natural scale for coefficient
    /// comparisons.
    pub fn coeff_scale(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.norm())
            .fold(0.0, f64::max)
    }

    /// Exact termwise derivative:
    /// `c x^a e^(bx) -> c a x^(a-1) e^(bx) + c b x^a e^(bx)`.
    ///
    /// The result may violate the L^2 shape conditions near 0; it is still
    /// returned (derivatives only ever appear inside integrands whose
    /// combined exponent is checked at integration time). Use
    /// [`FuncExpr::is_square_integrable`] to query the flag.
    pub fn differentiate(&self) -> FuncExpr {
        let mut out = Vec::with_capacity(self.terms.len() * 2);
        for t in &self.terms {
            if t.power != 0.0 {
                out.push(Term::new(t.coeff * t.power, t.power - 1.0, t.rate));
            }
            if t.rate != 0.0 {
                out.push(Term::new(t.coeff * t.rate, t.power, t.rate));
            }
        }
        FuncExpr::raw(self.interval, out).merge_terms()
    }

    /// Whether the termwise L^2 shape conditions hold.
    pub fn is_square_integrable(&self) -> bool {
        self.terms.iter().all(|t| {
            (self.interval.lower > 0.0 || t.power > -0.5)
                && (!self.interval.is_half_line() || t.rate < 0.0)
        })
    }

    pub fn conj(&self) -> FuncExpr {
        FuncExpr::raw(
            self.interval,
            self.terms
                .iter()
                .map(|t| Term::new(t.coeff.conj(), t.power, t.rate))
                .collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> FuncExpr {
        FuncExpr::raw(
            self.interval,
            self.terms
                .iter()
                .map(|t| Term::new(t.coeff * c, t.power, t.rate))
                .collect(),
        )
    }

    pub fn add(&self, other: &FuncExpr) -> FuncExpr {
        debug_assert_eq!(self.interval, other.interval, "interval mismatch");
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        FuncExpr::raw(self.interval, terms)
    }

    pub fn sub(&self, other: &FuncExpr) -> FuncExpr {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Pointwise product; exponents and rates add.
    pub fn multiply(&self, other: &FuncExpr) -> FuncExpr {
        debug_assert_eq!(self.interval, other.interval, "interval mismatch");
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for s in &self.terms {
            for t in &other.terms {
                terms.push(Term::new(
                    s.coeff * t.coeff,
                    s.power + t.power,
                    s.rate + t.rate,
                ));
            }
        }
        FuncExpr::raw(self.interval, terms)
    }

    /// Multiplies by `x^dp`.
    pub fn shift_power(&self, dp: f64) -> FuncExpr {
        FuncExpr::raw(
            self.interval,
            self.terms
                .iter()
                .map(|t| Term::new(t.coeff, t.power + dp, t.rate))
                .collect(),
        )
    }

    /// Combines terms with (numerically) identical `(power, rate)` and drops
    /// coefficients that cancel to below `1e-14` of the coefficient scale.
    pub fn merge_terms(&self) -> FuncExpr {
        let scale = self.coeff_scale();
        let mut groups: Vec<Term> = Vec::new();
        for t in &self.terms {
            if let Some(g) = groups.iter_mut().find(|g| {
                (g.power - t.power).abs() <= EXPONENT_MERGE_TOL
                    && (g.rate - t.rate).abs() <= EXPONENT_MERGE_TOL
            }) {
                g.coeff += t.coeff;
            } else {
                groups.push(*t);
            }
        }
        groups.retain(|g| g.coeff.norm() > 1e-14 * scale);
        FuncExpr {
            interval: self.interval,
            terms: groups,
        }
    }

    /// Asymptotic expansion coefficients at `x -> 0`: exponents ascending
    /// with merged coefficients, keeping exponents `<= max_exponent`.
    /// Exponentials are Taylor expanded exactly as far as needed.
    pub fn asymptotics_at_zero(&self, max_exponent: f64) -> Vec<(f64, Complex64)> {
        let mut rows: Vec<(f64, Complex64)> = Vec::new();
        for t in &self.terms {
            // c x^a e^(bx) = sum_j c b^j / j! x^(a + j)
            let mut factor = t.coeff;
            let mut j = 0u32;
            loop {
                let expo = t.power + f64::from(j);
                if expo > max_exponent {
                    break;
                }
                if let Some(row) = rows
                    .iter_mut()
                    .find(|(e, _)| (*e - expo).abs() <= EXPONENT_MERGE_TOL)
                {
                    row.1 += factor;
                } else {
                    rows.push((expo, factor));
                }
                if t.rate == 0.0 {
                    break;
                }
                j += 1;
                factor *= Complex64::new(t.rate / f64::from(j), 0.0);
            }
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        rows
    }

    /// Leading behaviour at `x -> 0`: smallest exponent whose merged
    /// coefficient survives cancellation, with that coefficient. Returns
    /// `None` when the function vanishes to all inspected orders.
    pub fn leading_exponent_at_zero(&self) -> Option<(f64, Complex64)> {
        if self.terms.is_empty() {
            return None;
        }
        let scale = self.coeff_scale();
        let min_power = self
            .terms
            .iter()
            .map(|t| t.power)
            .fold(f64::INFINITY, f64::min);
        // Expanding 64 orders past the smallest power is far beyond any
        // cancellation the term language can produce.
        let rows = self.asymptotics_at_zero(min_power + 64.0);
        rows.into_iter().find(|(_, c)| c.norm() > 1e-12 * scale)
    }

    /// Boundary value at `x = 0` when it exists: 0 for positive leading
    /// exponent, the coefficient for leading exponent 0, `None` when the
    /// function blows up.
    pub fn value_at_zero(&self) -> Option<Complex64> {
        match self.leading_exponent_at_zero() {
            None => Some(Complex64::new(0.0, 0.0)),
            Some((e, c)) => {
                if e.abs() <= EXPONENT_MERGE_TOL {
                    Some(c)
                } else if e > 0.0 {
                    Some(Complex64::new(0.0, 0.0))
                } else {
                    None
                }
            }
        }
    }

    /// Endpoint exponent analysis: at the lower endpoint the leading
    /// `(exponent, coefficient)` pair; at a finite upper endpoint the pair
    /// `(0, f(b))`.
    pub fn endpoint_exponent(&self, at: Endpoint) -> (f64, Complex64) {
        match at {
            Endpoint::Lower => self
                .leading_exponent_at_zero()
                .unwrap_or((f64::INFINITY, Complex64::new(0.0, 0.0))),
            Endpoint::Upper => {
                assert!(
                    !self.interval.is_half_line(),
                    "upper endpoint value requires a finite interval"
                );
                (0.0, self.eval(self.interval.upper))
            }
        }
    }
}
