//! Closed-form functions on an interval: finite sums of terms
//! `c * x^alpha * e^(beta x)` with exact differentiation, endpoint exponent
//! analysis, and integration that is robust to algebraic endpoint
//! singularities.
//!
//! The term language spans every function the continuum checks need
//! (powers `x^g`, `x^(g+1/2)`, exponentials, products of both) while keeping
//! derivatives and endpoint asymptotics exact. Logarithmic terms are
//! deliberately not representable.

mod expr;
mod grid;
mod integrate;
mod quadrature;

pub use expr::{Endpoint, FuncExpr, Interval, Term};
pub use grid::GridFunction;
pub use integrate::{inner_product, integrate, integrate_abs2, power_exp_integral};
pub use quadrature::{quadrature_graded, QuadratureOptions};
