//! Finite-dimensional dissipativity criterion for operator extensions.
//!
//! A linear map defined on a proper subspace `D` of `C^n` models an operator
//! with non-dense domain; an extension acts additionally on a complement
//! subspace `V`. The check assembles the form matrix `VA` of
//! `f -> Im<f, Af>` on the domain, the matrix `M` of
//! `(VA^{-1/2} B - WA^*)` restricted to the complement, and decides
//! positive semidefiniteness of `K = R - (1/4) M^* M` on the complement.
//! A direct oracle diagonalizes the full imaginary-part Gram matrix on
//! `D + V`; both routes must agree in sign, which is checked throughout the
//! test suite.
//!
//! Inner products are linear in the second argument, conjugate linear in the
//! first.

use num_complex::Complex64;
use serde::Serialize;

use crate::decision::{BoundaryBand, Decision};
use crate::error::{CoreError, Result};
use crate::linalg::{
    imaginary_part, inv_sqrt_pd, orthonormalize, psd_margin, solve_upper_triangular_right,
    ComplexMatrix, HermitianDecomposition,
};

/// Tolerance for orthonormality of basis inputs.
pub const BASIS_TOL: f64 = 1e-10;

/// Default strict-positivity floor relative to `||VA||`.
pub const DEFAULT_EPSILON_REL: f64 = 1e-6;

/// A linear map defined on a subspace of `C^n`.
///
/// `domain_basis` is `n x d` with orthonormal columns spanning the domain;
/// `domain_action` column `j` is the image of domain basis vector `j`.
#[derive(Debug, Clone)]
pub struct PartialOperator {
    domain_basis: ComplexMatrix,
    domain_action: ComplexMatrix,
}

impl PartialOperator {
    pub fn new(domain_basis: ComplexMatrix, domain_action: ComplexMatrix) -> Result<Self> {
        let n = domain_basis.rows();
        let d = domain_basis.cols();
        if d < 1 || d >= n {
            return Err(CoreError::InvalidDomainDimension { d, n });
        }
        if domain_action.rows() != n || domain_action.cols() != d {
            return Err(CoreError::DimensionMismatch {
                context: format!(
                    "domain action must be {n}x{d}, got {}x{}",
                    domain_action.rows(),
                    domain_action.cols()
                ),
            });
        }
        let gram_dev = domain_basis
            .adjoint()
            .mul(&domain_basis)
            .sub(&ComplexMatrix::identity(d))
            .frobenius_norm();
        if gram_dev > BASIS_TOL {
            return Err(CoreError::NotOrthonormal {
                deviation: gram_dev,
            });
        }
        Ok(PartialOperator {
            domain_basis,
            domain_action,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.domain_basis.rows()
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_basis.cols()
    }

    pub fn domain_basis(&self) -> &ComplexMatrix {
        &self.domain_basis
    }

    pub fn domain_action(&self) -> &ComplexMatrix {
        &self.domain_action
    }
}

/// Complement subspace and the extension's action on it.
///
/// The complement is normalized to an orthonormal basis orthogonal to the
/// domain. The check's outcome does not depend on the choice of complement;
/// orthonormality just conditions the numerics.
#[derive(Debug, Clone)]
pub struct ExtensionSpec {
    complement_basis: ComplexMatrix,
    complement_action: ComplexMatrix,
}

impl ExtensionSpec {
    /// Accepts an already-orthonormal complement orthogonal to the domain.
    pub fn new(
        p: &PartialOperator,
        complement_basis: ComplexMatrix,
        complement_action: ComplexMatrix,
    ) -> Result<Self> {
        let n = p.ambient_dim();
        let k = complement_basis.cols();
        if k == 0 {
            return Err(CoreError::EmptyExtension);
        }
        if complement_basis.rows() != n
            || complement_action.rows() != n
            || complement_action.cols() != k
        {
            return Err(CoreError::DimensionMismatch {
                context: "complement basis/action shapes".into(),
            });
        }
        let gram_dev = complement_basis
            .adjoint()
            .mul(&complement_basis)
            .sub(&ComplexMatrix::identity(k))
            .frobenius_norm();
        if gram_dev > BASIS_TOL {
            return Err(CoreError::NotOrthonormal {
                deviation: gram_dev,
            });
        }
        let cross = p
            .domain_basis()
            .adjoint()
            .mul(&complement_basis)
            .frobenius_norm();
        if cross > BASIS_TOL {
            return Err(CoreError::NotOrthonormal { deviation: cross });
        }
        Ok(ExtensionSpec {
            complement_basis,
            complement_action,
        })
    }

    /// Accepts any complement with trivial intersection with the domain,
    /// re-bases it to the orthogonal complement convention, and transforms
    /// the action accordingly: for `W = D (D^*W) + Q R`, the extension maps
    /// `Q` columns to `(BW - AD (D^*W)) R^{-1}`.
    pub fn from_raw_complement(
        p: &PartialOperator,
        raw_complement: ComplexMatrix,
        raw_action: ComplexMatrix,
    ) -> Result<Self> {
        if raw_complement.cols() == 0 {
            return Err(CoreError::EmptyExtension);
        }
        if raw_complement.rows() != p.ambient_dim()
            || raw_action.rows() != p.ambient_dim()
            || raw_action.cols() != raw_complement.cols()
        {
            return Err(CoreError::DimensionMismatch {
                context: "raw complement/action shapes".into(),
            });
        }
        let d = p.domain_basis();
        let (q, r) = orthonormalize(&raw_complement, Some(d))?;
        let d_coeffs = d.adjoint().mul(&raw_complement);
        let corrected = raw_action.sub(&p.domain_action().mul(&d_coeffs));
        let action = solve_upper_triangular_right(&corrected, &r);
        ExtensionSpec::new(p, q, action)
    }

    pub fn complement_dim(&self) -> usize {
        self.complement_basis.cols()
    }

    pub fn complement_basis(&self) -> &ComplexMatrix {
        &self.complement_basis
    }

    pub fn complement_action(&self) -> &ComplexMatrix {
        &self.complement_action
    }
}

/// Intermediate matrices of the criterion.
#[derive(Debug, Clone)]
pub struct CriterionAssembly {
    /// `d x d` Hermitian form matrix of `f -> Im<f, Af>` in domain coordinates.
    pub va: ComplexMatrix,
    /// `VA^{-1/2}`.
    pub va_inv_sqrt: ComplexMatrix,
    /// `n x d`: the operator `W_A = A VA^{-1/2}` on domain coordinates.
    pub wa: ComplexMatrix,
    /// `d x n`: its adjoint.
    pub wa_star: ComplexMatrix,
    /// `d x k`: `(VA^{-1/2} P_D B - W_A^*)` restricted to the complement.
    pub m: ComplexMatrix,
    /// `k x k` Hermitian form matrix of `v -> Im<v, Bv>` on the complement.
    pub r: ComplexMatrix,
    /// `d x k` cross form `(<d_i, B v_j> - <A d_i, v_j>) / (2i)`.
    pub c_cross: ComplexMatrix,
    /// Strict-positivity floor used.
    pub epsilon: f64,
}

/// Result of a criterion check together with the direct oracle margin.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub decision: Decision,
    /// Minimum eigenvalue of `K = R - (1/4) M^* M`.
    pub criterion_margin: f64,
    /// Minimum eigenvalue of the full imaginary-part Gram matrix on `D + V`.
    pub oracle_margin: f64,
    pub epsilon_used: f64,
    /// Relative boundary band applied to the margin.
    pub boundary_band_rel: f64,
    /// Whether the two margins agree in sign (vacuously true when either is
    /// inside its boundary band).
    pub agreement: bool,
    /// Spectrum of `VA`, ascending.
    pub va_spectrum: Vec<f64>,
    pub m_norm: f64,
    pub r_norm: f64,
}

/// Form matrix of `q_A` in domain coordinates:
/// `(VA)_{ij} = (<d_i, A d_j> - <A d_i, d_j>) / (2i)`.
pub fn assemble_form_matrix(p: &PartialOperator) -> ComplexMatrix {
    let t = p.domain_basis().adjoint().mul(p.domain_action());
    imaginary_part(&t).expect("D* AD is square by construction")
}

/// Whether the form matrix dominates `epsilon` on the whole domain.
pub fn check_strict_positivity(va: &ComplexMatrix, epsilon: f64) -> Result<bool> {
    Ok(psd_margin(va)? >= epsilon)
}

/// Default positivity floor `1e-6 ||VA||_F` (overridable at the call sites).
pub fn default_epsilon(va: &ComplexMatrix) -> f64 {
    DEFAULT_EPSILON_REL * va.frobenius_norm()
}

/// Assembles every matrix the criterion needs. Fails with
/// `StrictPositivityViolated` when the form matrix is not `>= epsilon`,
/// in which case only the oracle route remains applicable.
pub fn assemble_criterion(
    p: &PartialOperator,
    e: &ExtensionSpec,
    epsilon: f64,
) -> Result<CriterionAssembly> {
    let va = assemble_form_matrix(p);
    let va_inv_sqrt = inv_sqrt_pd(&va, epsilon)?;
    let wa = p.domain_action().mul(&va_inv_sqrt);
    let wa_star = wa.adjoint();
    let d = p.domain_basis();
    let v = e.complement_basis();
    let bv = e.complement_action();
    let ad = p.domain_action();

    // M = VA^{-1/2} D^* BV - WA^* V = VA^{-1/2} (D^* BV - AD^* V)
    let cross_raw = d.adjoint().mul(bv).sub(&ad.adjoint().mul(v));
    let m = va_inv_sqrt.mul(&cross_raw);
    let r = imaginary_part(&v.adjoint().mul(bv)).expect("V* BV is square");
    let c_cross = cross_raw.scale(Complex64::new(0.0, -0.5)); // divide by 2i

    Ok(CriterionAssembly {
        va,
        va_inv_sqrt,
        wa,
        wa_star,
        m,
        r,
        c_cross,
        epsilon,
    })
}

impl CriterionAssembly {
    /// `K = R - (1/4) M^* M`, the Hermitian matrix whose positive
    /// semidefiniteness is the criterion.
    pub fn criterion_matrix(&self) -> ComplexMatrix {
        let quarter = Complex64::new(0.25, 0.0);
        self.r.sub(&self.m.adjoint().mul(&self.m).scale(quarter))
    }

    /// Largest entrywise deviation of the completing-the-square identity
    /// `(1/4) M^* M = C^* VA^{-1} C`.
    pub fn schur_identity_deviation(&self) -> f64 {
        let quarter = Complex64::new(0.25, 0.0);
        let lhs = self.m.adjoint().mul(&self.m).scale(quarter);
        let va_inv = self.va_inv_sqrt.mul(&self.va_inv_sqrt);
        let rhs = self.c_cross.adjoint().mul(&va_inv).mul(&self.c_cross);
        lhs.sub(&rhs).max_abs()
    }
}

/// Full criterion check with the boundary-band decision policy, including
/// the direct oracle margin for cross-reference.
pub fn criterion_check(
    p: &PartialOperator,
    e: &ExtensionSpec,
    epsilon: f64,
    band: BoundaryBand,
) -> Result<CheckReport> {
    let assembly = assemble_criterion(p, e, epsilon)?;
    let k = assembly.criterion_matrix();
    let criterion_margin = psd_margin(&k)?;
    let oracle_margin = oracle_check(p, e)?;
    let decision = band.classify(criterion_margin, k.frobenius_norm());

    let va_dec = HermitianDecomposition::of(&assembly.va)?;
    let crit_resolved = criterion_margin.abs() > band.width(k.frobenius_norm());
    let oracle_resolved = oracle_margin.abs() > band.width(1.0_f64.max(oracle_margin.abs()));
    let agreement =
        !(crit_resolved && oracle_resolved) || (criterion_margin > 0.0) == (oracle_margin > 0.0);

    Ok(CheckReport {
        decision,
        criterion_margin,
        oracle_margin,
        epsilon_used: epsilon,
        boundary_band_rel: band.rel,
        agreement,
        va_spectrum: va_dec.eigenvalues().to_vec(),
        m_norm: assembly.m.frobenius_norm(),
        r_norm: assembly.r.frobenius_norm(),
    })
}

/// The `(d+k) x (d+k)` Hermitian Gram matrix of `f -> Im<f, Bf>` on the
/// combined basis `[D V]`.
pub fn oracle_gram(p: &PartialOperator, e: &ExtensionSpec) -> ComplexMatrix {
    let basis = p.domain_basis().hstack(e.complement_basis());
    let action = p.domain_action().hstack(e.complement_action());
    let t = basis.adjoint().mul(&action);
    imaginary_part(&t).expect("combined Gram is square")
}

/// Ground truth: minimum eigenvalue of the full imaginary-part Gram matrix.
/// The extension is dissipative iff this is `>= 0` (in exact arithmetic);
/// no strict-positivity hypothesis is needed.
pub fn oracle_check(p: &PartialOperator, e: &ExtensionSpec) -> Result<f64> {
    psd_margin(&oracle_gram(p, e))
}

/// The domain vector minimizing the full form against a fixed complement
/// coordinate vector `v`: `f = D VA^{-1/2} (i/2) M v`. The form value at
/// `f + Vv` equals `<v, K v>`.
pub fn minimizing_witness(
    assembly: &CriterionAssembly,
    p: &PartialOperator,
    v_coords: &[Complex64],
) -> Vec<Complex64> {
    let mv = assembly.m.mul_vec(v_coords);
    let g: Vec<Complex64> = mv.iter().map(|z| z * Complex64::new(0.0, 0.5)).collect();
    let f_coords = assembly.va_inv_sqrt.mul_vec(&g);
    p.domain_basis().mul_vec(&f_coords)
}

/// Evaluates `Im<w, Bw>` for `w = f + V v` with `f` an ambient vector in the
/// domain span and `v` complement coordinates.
pub fn form_value_at(
    p: &PartialOperator,
    e: &ExtensionSpec,
    domain_vector: &[Complex64],
    v_coords: &[Complex64],
) -> f64 {
    let d_coords = p.domain_basis().adjoint().mul_vec(domain_vector);
    let w: Vec<Complex64> = {
        let part_d = p.domain_basis().mul_vec(&d_coords);
        let part_v = e.complement_basis().mul_vec(v_coords);
        part_d.iter().zip(&part_v).map(|(a, b)| a + b).collect()
    };
    let bw: Vec<Complex64> = {
        let bd = p.domain_action().mul_vec(&d_coords);
        let bv = e.complement_action().mul_vec(v_coords);
        bd.iter().zip(&bv).map(|(a, b)| a + b).collect()
    };
    let ip: Complex64 = w.iter().zip(&bw).map(|(a, b)| a.conj() * b).sum();
    ip.im
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::DEFAULT_BOUNDARY_BAND;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn e1_domain(action: Complex64) -> PartialOperator {
        // n = 2, D = e1, A e1 = action * e1 (or general column)
        let d = ComplexMatrix::from_rows(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let ad = ComplexMatrix::from_rows(2, 1, &[action, c(0.0, 0.0)]).unwrap();
        PartialOperator::new(d, ad).unwrap()
    }

    fn e2_extension(p: &PartialOperator, b_e2: [Complex64; 2]) -> ExtensionSpec {
        let v = ComplexMatrix::from_rows(2, 1, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let bv = ComplexMatrix::from_rows(2, 1, &b_e2).unwrap();
        ExtensionSpec::new(p, v, bv).unwrap()
    }

    #[test]
    fn form_matrix_examples() {
        // A e1 = i e1 -> VA = [1]
        let p = e1_domain(c(0.0, 1.0));
        let va = assemble_form_matrix(&p);
        assert!((va.at(0, 0) - c(1.0, 0.0)).norm() < 1e-14);

        // A e1 = e2 -> VA = [0]
        let d = ComplexMatrix::from_rows(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let ad = ComplexMatrix::from_rows(2, 1, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let p = PartialOperator::new(d, ad).unwrap();
        let va = assemble_form_matrix(&p);
        assert!(va.at(0, 0).norm() < 1e-14);
    }

    #[test]
    fn strict_positivity_examples() {
        let id = ComplexMatrix::identity(2);
        assert!(check_strict_positivity(&id, 0.5).unwrap());
        let zero = ComplexMatrix::zeros(1, 1);
        assert!(!check_strict_positivity(&zero, 1e-3).unwrap());
        let diag =
            ComplexMatrix::from_rows(2, 2, &[c(1e-4, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
                .unwrap();
        assert!(!check_strict_positivity(&diag, 1e-3).unwrap());
    }

    #[test]
    fn assembly_decoupled_extension() {
        // A e1 = i e1, B e2 = i e2: everything decouples
        let p = e1_domain(c(0.0, 1.0));
        let e = e2_extension(&p, [c(0.0, 0.0), c(0.0, 1.0)]);
        let a = assemble_criterion(&p, &e, 1e-6).unwrap();
        assert!((a.va.at(0, 0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((a.wa.at(0, 0) - c(0.0, 1.0)).norm() < 1e-14);
        assert!(a.wa.at(1, 0).norm() < 1e-14);
        assert!(a.m.at(0, 0).norm() < 1e-14);
        assert!((a.r.at(0, 0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(a.c_cross.at(0, 0).norm() < 1e-14);
    }

    #[test]
    fn assembly_coupled_dissipative() {
        // B e2 = e1 + i e2: M = [1], R = [1], criterion 1 >= 1/4 holds
        let p = e1_domain(c(0.0, 1.0));
        let e = e2_extension(&p, [c(1.0, 0.0), c(0.0, 1.0)]);
        let a = assemble_criterion(&p, &e, 1e-6).unwrap();
        assert!((a.m.at(0, 0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((a.r.at(0, 0) - c(1.0, 0.0)).norm() < 1e-14);
        let report = criterion_check(&p, &e, 1e-6, DEFAULT_BOUNDARY_BAND).unwrap();
        assert_eq!(report.decision, Decision::Dissipative);
        assert!((report.criterion_margin - 0.75).abs() < 1e-12);
        assert!(report.agreement);
    }

    #[test]
    fn assembly_coupled_not_dissipative() {
        // B e2 = 10 e1: M = [10], R = [0], criterion 0 >= 25 fails
        let p = e1_domain(c(0.0, 1.0));
        let e = e2_extension(&p, [c(10.0, 0.0), c(0.0, 0.0)]);
        let a = assemble_criterion(&p, &e, 1e-6).unwrap();
        assert!((a.m.at(0, 0) - c(10.0, 0.0)).norm() < 1e-12);
        assert!(a.r.at(0, 0).norm() < 1e-14);
        let report = criterion_check(&p, &e, 1e-6, DEFAULT_BOUNDARY_BAND).unwrap();
        assert_eq!(report.decision, Decision::NotDissipative);
        // oracle margin is the indefinite [[1, -5i], [5i, 0]] minimum eigenvalue
        let expected = (1.0 - 101.0_f64.sqrt()) / 2.0;
        assert!((report.oracle_margin - expected).abs() < 1e-12);
        assert!(report.agreement);
    }

    #[test]
    fn oracle_examples() {
        // B = iI: G = I, margin 1
        let p = e1_domain(c(0.0, 1.0));
        let e = e2_extension(&p, [c(0.0, 0.0), c(0.0, 1.0)]);
        assert!((oracle_check(&p, &e).unwrap() - 1.0).abs() < 1e-14);

        // any real symmetric action: margin 0
        let d = ComplexMatrix::from_rows(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let ad = ComplexMatrix::from_rows(2, 1, &[c(2.0, 0.0), c(1.0, 0.0)]).unwrap();
        let p = PartialOperator::new(d, ad).unwrap();
        let e = e2_extension(&p, [c(1.0, 0.0), c(-3.0, 0.0)]);
        assert!(oracle_check(&p, &e).unwrap().abs() < 1e-14);
    }

    #[test]
    fn strict_positivity_gate() {
        // A e1 = e2 has VA = 0: criterion inapplicable
        let d = ComplexMatrix::from_rows(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let ad = ComplexMatrix::from_rows(2, 1, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let p = PartialOperator::new(d, ad).unwrap();
        let e = e2_extension(&p, [c(0.0, 0.0), c(0.0, 1.0)]);
        let r = assemble_criterion(&p, &e, 1e-6);
        assert!(matches!(r, Err(CoreError::StrictPositivityViolated { .. })));
    }

    #[test]
    fn empty_extension_rejected() {
        let p = e1_domain(c(0.0, 1.0));
        let v = ComplexMatrix::zeros(2, 0);
        let bv = ComplexMatrix::zeros(2, 0);
        assert!(matches!(
            ExtensionSpec::new(&p, v, bv),
            Err(CoreError::EmptyExtension)
        ));
    }

    #[test]
    fn witness_reaches_criterion_value() {
        // B e2 = e1 + i e2, v = e2: form value at witness + v is 3/4
        let p = e1_domain(c(0.0, 1.0));
        let e = e2_extension(&p, [c(1.0, 0.0), c(0.0, 1.0)]);
        let a = assemble_criterion(&p, &e, 1e-6).unwrap();
        let v = [c(1.0, 0.0)];
        let witness = minimizing_witness(&a, &p, &v);
        let value = form_value_at(&p, &e, &witness, &v);
        assert!((value - 0.75).abs() < 1e-12, "got {value}");

        // M = 0 gives a zero witness
        let e0 = e2_extension(&p, [c(0.0, 0.0), c(0.0, 1.0)]);
        let a0 = assemble_criterion(&p, &e0, 1e-6).unwrap();
        let w0 = minimizing_witness(&a0, &p, &v);
        assert!(w0.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn raw_complement_rebasing_preserves_decisions() {
        // skewed complement spanning the same extension as e2 -> e1 + i e2
        let p = e1_domain(c(0.0, 1.0));
        // raw complement w = e1 + e2 (not orthogonal to D), B w = A e1 + B e2
        // with B e2 = e1 + i e2: B w = i e1 + e1 + i e2
        let raw = ComplexMatrix::from_rows(2, 1, &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let raw_action = ComplexMatrix::from_rows(2, 1, &[c(1.0, 1.0), c(0.0, 1.0)]).unwrap();
        let e = ExtensionSpec::from_raw_complement(&p, raw, raw_action).unwrap();
        // the re-based complement is e2 again with action e1 + i e2
        assert!((e.complement_basis().at(1, 0) - c(1.0, 0.0)).norm() < 1e-12);
        let rep = criterion_check(&p, &e, 1e-6, DEFAULT_BOUNDARY_BAND).unwrap();
        assert!((rep.criterion_margin - 0.75).abs() < 1e-10);
    }

    #[test]
    fn schur_identity_small_case() {
        let p = e1_domain(c(0.0, 1.0));
        let e = e2_extension(&p, [c(1.0, 2.0), c(0.5, 1.0)]);
        let a = assemble_criterion(&p, &e, 1e-6).unwrap();
        assert!(a.schur_identity_deviation() < 1e-12);
    }
}
