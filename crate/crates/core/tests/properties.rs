//! Property tests of the module invariants: unitary invariance, the Schur
//! identity, decision equivalence between the criterion and the oracle,
//! form identities, and the symbolic function-space algebra.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use disext_core::decision::DEFAULT_BOUNDARY_BAND;
use disext_core::findim::{
    assemble_criterion, criterion_check, form_value_at, minimizing_witness, oracle_check,
    ExtensionSpec,
};
use disext_core::firstorder::{defect_kernel_residual, SingularParams};
use disext_core::funcspace::{
    inner_product, integrate, integrate_abs2, power_exp_integral, quadrature_graded, FuncExpr,
    Interval, QuadratureOptions, Term,
};
use disext_core::instances::{
    random_batch, random_instance_with, random_matrix, random_unitary, InstanceShape,
};
use disext_core::linalg::{imaginary_part, inv_sqrt_pd, psd_margin, ComplexMatrix};
use disext_core::schrodinger::{
    accretive_check, friedrichs_form, krein_form, solve_eta, PotentialSpec, DEFAULT_ETA_TOL,
};

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ---------------------------------------------------------------------------
// linear algebra

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn psd_margin_unitary_invariant(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = StdRng::seed_from_u64(seed);
        let h = {
            let raw = random_matrix(&mut rng, n, n);
            raw.add(&raw.adjoint()).scale(c64(0.5, 0.0))
        };
        let u = random_unitary(&mut rng, n);
        let conj = u.adjoint().mul(&h).mul(&u);
        let a = psd_margin(&h).unwrap();
        let b = psd_margin(&conj).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * h.frobenius_norm().max(1.0));
    }

    #[test]
    fn inv_sqrt_squares_to_inverse(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = StdRng::seed_from_u64(seed);
        // condition number up to 1e6
        let h = disext_core::instances::random_hermitian_with_spectrum(&mut rng, n, 1e-3, 1e3);
        let r = inv_sqrt_pd(&h, 1e-4).unwrap();
        let res = r.mul(&h).mul(&r).sub(&ComplexMatrix::identity(n)).frobenius_norm();
        prop_assert!(res <= 1e-8, "residual {res}");
    }

    #[test]
    fn imaginary_part_is_hermitian(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = StdRng::seed_from_u64(seed);
        let b = random_matrix(&mut rng, n, n);
        let h = imaginary_part(&b).unwrap();
        prop_assert!(h.hermitian_deviation() <= 1e-12 * b.frobenius_norm().max(1.0));
    }
}

// ---------------------------------------------------------------------------
// finite-dimensional criterion vs oracle

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn criterion_matches_oracle_in_sign(seed in any::<u64>()) {
        let batch = random_batch(seed, 4, 6, 1e-3);
        for inst in &batch {
            let report =
                criterion_check(&inst.operator, &inst.extension, 1e-4, DEFAULT_BOUNDARY_BAND)
                    .unwrap();
            if report.criterion_margin.abs() > 1e-7 && report.oracle_margin.abs() > 1e-7 {
                prop_assert_eq!(
                    report.criterion_margin > 0.0,
                    report.oracle_margin > 0.0,
                    "criterion {} vs oracle {}",
                    report.criterion_margin,
                    report.oracle_margin
                );
            }
            prop_assert!(report.agreement);
        }
    }

    #[test]
    fn form_matrix_represents_the_form(seed in any::<u64>()) {
        // <c, VA c> = Im <D c, A D c> for random coordinate vectors
        let mut rng = StdRng::seed_from_u64(seed);
        let inst = random_instance_with(
            &mut rng,
            InstanceShape { ambient: 6, domain: 3, complement: 1, va_floor: 1e-3 },
            false,
        );
        let va = disext_core::findim::assemble_form_matrix(&inst.operator);
        for _ in 0..100 {
            let c = random_matrix(&mut rng, 3, 1).column(0);
            let quad: Complex64 = {
                let vac = va.mul_vec(&c);
                c.iter().zip(&vac).map(|(a, b)| a.conj() * b).sum()
            };
            let dc = inst.operator.domain_basis().mul_vec(&c);
            let adc = inst.operator.domain_action().mul_vec(&c);
            let form: Complex64 = dc.iter().zip(&adc).map(|(a, b)| a.conj() * b).sum();
            prop_assert!((quad.re - form.im).abs() <= 1e-10 * form.im.abs().max(1.0));
            prop_assert!(quad.im.abs() <= 1e-10);
        }
    }

    #[test]
    fn schur_identity_holds(seed in any::<u64>(), n in 3usize..8) {
        let mut rng = StdRng::seed_from_u64(seed);
        let d = 1 + (seed as usize % (n - 1));
        let k = 1 + (seed as usize / 7 % (n - d));
        let inst = random_instance_with(
            &mut rng,
            InstanceShape { ambient: n, domain: d, complement: k, va_floor: 1e-3 },
            false,
        );
        let a = assemble_criterion(&inst.operator, &inst.extension, 1e-4).unwrap();
        prop_assert!(a.schur_identity_deviation() <= 1e-8);
    }

    #[test]
    fn criterion_margin_invariant_under_complement_rebasing(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let inst = random_instance_with(
            &mut rng,
            InstanceShape { ambient: 6, domain: 2, complement: 2, va_floor: 1e-2 },
            false,
        );
        let report =
            criterion_check(&inst.operator, &inst.extension, 1e-4, DEFAULT_BOUNDARY_BAND).unwrap();
        // right-multiply the complement basis and action by a random unitary
        let q = random_unitary(&mut rng, 2);
        let e2 = ExtensionSpec::new(
            &inst.operator,
            inst.extension.complement_basis().mul(&q),
            inst.extension.complement_action().mul(&q),
        )
        .unwrap();
        let report2 = criterion_check(&inst.operator, &e2, 1e-4, DEFAULT_BOUNDARY_BAND).unwrap();
        prop_assert!((report.criterion_margin - report2.criterion_margin).abs() <= 1e-9);
        prop_assert_eq!(report.decision, report2.decision);
    }

    #[test]
    fn scaling_covariance_with_decoupled_range(seed in any::<u64>(), lam in 0.1f64..4.0) {
        // domain action avoiding the complement makes (R, M) scale linearly
        let mut rng = StdRng::seed_from_u64(seed);
        let inst = random_instance_with(
            &mut rng,
            InstanceShape { ambient: 6, domain: 2, complement: 2, va_floor: 1e-2 },
            true,
        );
        let a1 = assemble_criterion(&inst.operator, &inst.extension, 1e-4).unwrap();
        let scaled = ExtensionSpec::new(
            &inst.operator,
            inst.extension.complement_basis().clone(),
            inst.extension.complement_action().scale(c64(lam, 0.0)),
        )
        .unwrap();
        let a2 = assemble_criterion(&inst.operator, &scaled, 1e-4).unwrap();
        let r_dev = a2.r.sub(&a1.r.scale(c64(lam, 0.0))).frobenius_norm();
        let m_dev = a2.m.sub(&a1.m.scale(c64(lam, 0.0))).frobenius_norm();
        prop_assert!(r_dev <= 1e-9 * a1.r.frobenius_norm().max(1.0));
        prop_assert!(m_dev <= 1e-9 * a1.m.frobenius_norm().max(1.0));
        // explicit quadratic lam R - lam^2/4 M*M against the oracle sign
        let k = a2.criterion_matrix();
        let pred = a1.r.scale(c64(lam, 0.0)).sub(
            &a1.m.adjoint().mul(&a1.m).scale(c64(0.25 * lam * lam, 0.0)),
        );
        prop_assert!(k.sub(&pred).frobenius_norm() <= 1e-8 * k.frobenius_norm().max(1.0));
        let crit = psd_margin(&k).unwrap();
        let oracle = oracle_check(&inst.operator, &scaled).unwrap();
        if crit.abs() > 1e-7 && oracle.abs() > 1e-7 {
            prop_assert_eq!(crit > 0.0, oracle > 0.0);
        }
    }

    #[test]
    fn witness_minimizes_the_form(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let inst = random_instance_with(
            &mut rng,
            InstanceShape { ambient: 5, domain: 2, complement: 1, va_floor: 1e-2 },
            false,
        );
        let assembly = assemble_criterion(&inst.operator, &inst.extension, 1e-4).unwrap();
        let v = [c64(1.0, 0.0)];
        let witness = minimizing_witness(&assembly, &inst.operator, &v);
        let at_witness = form_value_at(&inst.operator, &inst.extension, &witness, &v);
        // equals the criterion quadratic
        let k = assembly.criterion_matrix();
        prop_assert!((at_witness - k.at(0, 0).re).abs() <= 1e-8 * k.at(0, 0).re.abs().max(1.0));
        // no random domain vector does better
        for _ in 0..50 {
            let f = random_matrix(&mut rng, 5, 1);
            let value = form_value_at(&inst.operator, &inst.extension, &f.column(0), &v);
            prop_assert!(at_witness <= value + 1e-9 * value.abs().max(1.0));
        }
    }
}

// ---------------------------------------------------------------------------
// function space

fn small_terms(max_terms: usize) -> impl Strategy<Value = Vec<Term>> {
    prop::collection::vec(
        (
            -2.0f64..2.0,
            -2.0f64..2.0,
            // powers stay L^2-admissible near zero
            -0.4f64..3.0,
            -2.0f64..1.5,
        ),
        1..=max_terms,
    )
    .prop_map(|raw| {
        raw.into_iter()
            .map(|(re, im, alpha, beta)| Term::new(c64(re, im), alpha, beta))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inner_product_sesquilinear(a in small_terms(3), b in small_terms(3), g in small_terms(2),
                                  lam_re in -2.0f64..2.0, lam_im in -2.0f64..2.0) {
        let iv = Interval::unit();
        let f1 = FuncExpr::new(iv, a).unwrap();
        let f2 = FuncExpr::new(iv, b).unwrap();
        let g = FuncExpr::new(iv, g).unwrap();
        let lam = c64(lam_re, lam_im);

        // linearity in the second argument
        let lhs = inner_product(&g, &f1.scale(lam).add(&f2), 0.0).unwrap();
        let rhs = lam * inner_product(&g, &f1, 0.0).unwrap() + inner_product(&g, &f2, 0.0).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));

        // conjugate linearity in the first argument
        let lhs = inner_product(&f1.scale(lam), &g, 0.0).unwrap();
        let rhs = lam.conj() * inner_product(&f1, &g, 0.0).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));

        // conjugate symmetry
        let ab = inner_product(&f1, &f2, 0.0).unwrap();
        let ba = inner_product(&f2, &f1, 0.0).unwrap();
        prop_assert!((ab - ba.conj()).norm() <= 1e-10 * ab.norm().max(1.0));
    }

    #[test]
    fn closed_form_agrees_with_quadrature(mu in -0.45f64..4.0, s in -6.0f64..3.0) {
        let direct = power_exp_integral(mu, s, 0.0, 1.0).unwrap();
        let opts = QuadratureOptions {
            max_panel_len: (6.0 / s.abs().max(0.5)).max(1e-3),
            ..QuadratureOptions::default()
        };
        let quad = quadrature_graded(|x: f64| x.powf(mu) * (s * x).exp(), 0.0, 1.0, mu.min(0.0), &opts)
            .unwrap();
        prop_assert!(
            (direct - quad).abs() <= 1e-8 * direct.abs().max(1e-6),
            "mu={mu} s={s}: {direct} vs {quad}"
        );
    }

    #[test]
    fn derivative_recovers_boundary_values(terms in small_terms(3)) {
        // force positive leading powers so |f|^2 has a boundary value 0 at 0
        let iv = Interval::unit();
        let shifted: Vec<Term> =
            terms.iter().map(|t| Term::new(t.coeff, t.power.abs() + 0.6, t.rate)).collect();
        let f = FuncExpr::new(iv, shifted).unwrap();
        let df = f.differentiate();
        // (|f|^2)' = conj(f) f' + conj(f') f
        let deriv = f.conj().multiply(&df).add(&df.conj().multiply(&f));
        let integral = integrate(&deriv).unwrap();
        let boundary = f.eval(1.0).norm_sqr();
        prop_assert!(
            (integral.re - boundary).abs() <= 1e-9 * boundary.max(1.0),
            "{} vs {}",
            integral.re,
            boundary
        );
        prop_assert!(integral.im.abs() <= 1e-9 * boundary.max(1.0));
    }

    #[test]
    fn defect_kernel_residual_zero_for_random_gamma(g in 0.01f64..10.0) {
        let params = SingularParams::new(g).unwrap();
        prop_assert!(defect_kernel_residual(params).is_zero());
    }
}

// ---------------------------------------------------------------------------
// half-line forms

fn admissible_h1_terms() -> impl Strategy<Value = Vec<Term>> {
    prop::collection::vec(
        (
            -2.0f64..2.0,
            -2.0f64..2.0,
            prop_oneof![Just(0.0f64), 0.6f64..3.0],
            -3.0f64..-0.2,
        ),
        1..=3,
    )
    .prop_map(|raw| {
        raw.into_iter()
            .map(|(re, im, alpha, beta)| Term::new(c64(re, im), alpha, beta))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn krein_form_nonnegative_and_extends_friedrichs(terms in admissible_h1_terms()) {
        let v = PotentialSpec::constant(1.0).unwrap();
        let eta = solve_eta(&v, v.default_truncation(), DEFAULT_ETA_TOL).unwrap();
        let f = FuncExpr::new(Interval::half_line(), terms.clone()).unwrap();

        let kf = krein_form(&f, eta.eta_prime_0, &v).unwrap();
        let scale = integrate_abs2(&f, 0.0).unwrap().max(1.0);
        prop_assert!(kf >= -1e-8 * scale, "soft form negative: {kf}");

        // vanishing trace: multiply by x (keeps H^1) and compare with the hard form
        let g = f.shift_power(1.0);
        let kg = krein_form(&g, eta.eta_prime_0, &v).unwrap();
        let fg = friedrichs_form(&g, &v).unwrap();
        prop_assert!((kg - fg).abs() <= 1e-9 * fg.abs().max(1.0));
    }

    #[test]
    fn accretive_decision_scale_invariant(lam in 0.05f64..20.0) {
        let v = PotentialSpec::constant(1.0).unwrap();
        let eta = solve_eta(&v, v.default_truncation(), DEFAULT_ETA_TOL).unwrap();
        let vf = FuncExpr::new(Interval::half_line(), vec![Term::new(c64(1.0, 0.0), 0.0, -1.0)])
            .unwrap();
        let ell = FuncExpr::new(Interval::half_line(), vec![Term::new(c64(3.0, 0.0), 1.0, -1.0)])
            .unwrap();
        let base = accretive_check(&vf, &ell, &v, &eta, DEFAULT_BOUNDARY_BAND).unwrap();
        let scaled = accretive_check(
            &vf.scale(c64(lam, 0.0)),
            &ell.scale(c64(lam, 0.0)),
            &v,
            &eta,
            DEFAULT_BOUNDARY_BAND,
        )
        .unwrap();
        prop_assert_eq!(base.decision, scaled.decision);
        prop_assert!((scaled.margin - lam * lam * base.margin).abs()
            <= 1e-8 * (lam * lam * base.margin.abs()).max(1.0));
    }
}

// ---------------------------------------------------------------------------
// quadratic positivity interval vs bisection (the monotonicity probe)

#[test]
fn quadratic_interval_matches_bisection() {
    use disext_core::schrodinger::accretivity_margin_quadratic;
    let v = PotentialSpec::constant(1.0).unwrap();
    let eta = solve_eta(&v, v.default_truncation(), DEFAULT_ETA_TOL).unwrap();
    let vf = FuncExpr::new(
        Interval::half_line(),
        vec![Term::new(c64(1.0, 0.0), 0.0, -1.0)],
    )
    .unwrap();
    let w = FuncExpr::new(
        Interval::half_line(),
        vec![Term::new(c64(1.0, 0.0), 1.0, -1.0)],
    )
    .unwrap();
    let (q0, q1, q2) =
        accretivity_margin_quadratic(&vf, &w, &v, &eta, DEFAULT_BOUNDARY_BAND).unwrap();
    assert!(q2 < 0.0, "margin must be concave in the coefficient");
    // upper root of the quadratic
    let disc = (q1 * q1 - 4.0 * q2 * q0).sqrt();
    let root = (-q1 - disc) / (2.0 * q2);

    // bisection on the margin sign
    let margin_at = |coef: f64| {
        accretive_check(
            &vf,
            &w.scale(c64(coef, 0.0)),
            &v,
            &eta,
            DEFAULT_BOUNDARY_BAND,
        )
        .unwrap()
        .margin
    };
    let (mut lo, mut hi) = (1.0, 100.0);
    assert!(margin_at(lo) > 0.0 && margin_at(hi) < 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if margin_at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let bisected = 0.5 * (lo + hi);
    assert!(
        (root - bisected).abs() <= 1e-6 * bisected,
        "quadratic root {root} vs bisection {bisected}"
    );
}
