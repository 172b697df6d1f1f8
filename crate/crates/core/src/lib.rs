//! disext-core: numerical toolkit for deciding whether a proposed extension
//! of a dissipative operator is still dissipative.
//!
//! The crate has three layers:
//!
//! - a finite-dimensional layer ([`findim`]) that decides dissipativity of an
//!   extension through a Schur-complement style criterion on the complement
//!   subspace, cross-checked against a direct positive-semidefiniteness
//!   oracle on the full form;
//! - an analytic layer ([`schrodinger`], [`firstorder`]) for two continuum
//!   operators where every ingredient of the criterion is available in
//!   closed form: the half-line Schrodinger operator `-d^2/dx^2 + V` and the
//!   singular first-order operator `i d/dx + i gamma/x` on `(0, 1)`;
//! - a discretization layer ([`gridoracle`]) that validates the analytic
//!   decisions against finite-difference models on refining meshes.
//!
//! Supporting modules provide dense complex linear algebra ([`linalg`]),
//! closed-form function expressions with exact differentiation and
//! singularity-aware quadrature ([`funcspace`]), decision policies
//! ([`decision`]) and random instance generation ([`instances`]).

pub mod decision;
pub mod error;
pub mod exec;
pub mod findim;
pub mod firstorder;
pub mod funcspace;
pub mod gridoracle;
pub mod instances;
pub mod linalg;
pub mod schrodinger;

pub use decision::{AccretiveDecision, BoundaryBand, Decision, DEFAULT_BOUNDARY_BAND};
pub use error::{CoreError, Result};

pub(crate) mod serde_cx {
    //! Serialize complex scalars as `[re, im]` pairs.
    use num_complex::Complex64;
    use serde::{Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }
}
