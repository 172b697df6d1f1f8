//! JSON instance formats.
//!
//! Complex scalars are `[re, im]` pairs; matrices are row-major nested
//! arrays of pairs. The schema files under `schemas/` mirror these shapes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use disext_core::funcspace::{FuncExpr, GridFunction, Interval, Term};
use disext_core::linalg::ComplexMatrix;
use disext_core::schrodinger::PotentialSpec;
use disext_core::{CoreError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceFile {
    Matrix(MatrixInstance),
    Schrodinger(SchrodingerInstance),
    FirstOrder(FirstOrderInstance),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixInstance {
    pub schema_version: u32,
    pub ambient_dim: usize,
    /// `n x d`, row-major, entries `[re, im]`.
    pub domain_basis: Vec<Vec<[f64; 2]>>,
    pub domain_action: Vec<Vec<[f64; 2]>>,
    pub complement_basis: Vec<Vec<[f64; 2]>>,
    pub complement_action: Vec<Vec<[f64; 2]>>,
    /// Strict-positivity floor; defaults to `1e-6 ||VA||`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchrodingerInstance {
    pub schema_version: u32,
    pub potential: PotentialJson,
    /// Complement direction terms.
    pub v: Vec<TermJson>,
    /// Image direction terms.
    pub l: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstOrderInstance {
    pub schema_version: u32,
    pub gamma: f64,
    pub v: Vec<TermJson>,
    pub l: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

/// One closed-form term `c * x^alpha * e^(beta x)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub c: [f64; 2],
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialJson {
    Constant(f64),
    Terms {
        terms: Vec<TermJson>,
        lower: f64,
        upper: f64,
    },
    Grid {
        nodes: Vec<f64>,
        values: Vec<f64>,
        lower: f64,
        upper: f64,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_band: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_tol: Option<f64>,
}

fn field_err(field: &str, detail: impl std::fmt::Display) -> CoreError {
    CoreError::InvalidInput(format!("{field}: {detail}"))
}

pub fn matrix_from_json(rows: &[Vec<[f64; 2]>], n: usize, field: &str) -> Result<ComplexMatrix> {
    if rows.len() != n {
        return Err(field_err(
            field,
            format!("expected {n} rows, got {}", rows.len()),
        ));
    }
    let cols = rows.first().map(|r| r.len()).unwrap_or(0);
    if cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(field_err(
            field,
            "rows must be non-empty and of equal length",
        ));
    }
    let mut entries = Vec::with_capacity(n * cols);
    for row in rows {
        for &[re, im] in row {
            entries.push(Complex64::new(re, im));
        }
    }
    ComplexMatrix::from_rows(n, cols, &entries).map_err(|e| field_err(field, e))
}

pub fn terms_from_json(terms: &[TermJson], interval: Interval, field: &str) -> Result<FuncExpr> {
    let parsed: Vec<Term> = terms
        .iter()
        .map(|t| Term::new(Complex64::new(t.c[0], t.c[1]), t.alpha, t.beta))
        .collect();
    FuncExpr::new(interval, parsed).map_err(|e| field_err(field, e))
}

pub fn potential_from_json(p: &PotentialJson) -> Result<PotentialSpec> {
    match p {
        PotentialJson::Constant(c) => PotentialSpec::constant(*c),
        PotentialJson::Terms {
            terms,
            lower,
            upper,
        } => {
            let parsed: Vec<Term> = terms
                .iter()
                .map(|t| Term::new(Complex64::new(t.c[0], t.c[1]), t.alpha, t.beta))
                .collect();
            PotentialSpec::from_terms(parsed, *lower, *upper)
        }
        PotentialJson::Grid {
            nodes,
            values,
            lower,
            upper,
        } => {
            let grid = GridFunction::new(
                nodes.clone(),
                values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            )?;
            PotentialSpec::from_grid(grid, *lower, *upper)
        }
    }
    .map_err(|e| field_err("potential", e))
}

pub fn check_schema_version(version: u32) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(field_err(
            "schema_version",
            format!("expected {SCHEMA_VERSION}, got {version}"),
        ));
    }
    Ok(())
}
