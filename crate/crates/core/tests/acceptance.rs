//! Acceptance suite: ten numbered criteria, one test each, every tolerance
//! pinned in code. Run with
//! `cargo test -p disext-core --test acceptance -- --nocapture`
//! to see one line per criterion.

use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use disext_core::decision::{Decision, DEFAULT_BOUNDARY_BAND};
use disext_core::exec;
use disext_core::findim::{assemble_criterion, criterion_check};
use disext_core::firstorder::{
    cancellation_rhs_symbolic, condition_integrand, locate_ray_threshold, ray_pair, ray_threshold,
    SingularParams,
};
use disext_core::funcspace::{quadrature_graded, FuncExpr, Interval, QuadratureOptions, Term};
use disext_core::gridoracle::{
    closability_falsifier, cross_validate, defect_dimension, hat_norm_sq, regression_cases,
    regression_pair, standard_ladder, DefectOperator, Rational, DEFECT_THRESHOLD_COEFF,
};
use disext_core::instances::random_batch;
use disext_core::schrodinger::{
    accretive_check, friedrichs_form, krein_form, krein_form_grid, solve_eta, PotentialSpec,
    DEFAULT_ETA_TOL,
};

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pass(number: u32, message: &str) {
    println!("criterion {number:02}: PASS - {message}");
}

/// Criterion 1: on >= 1000 random instances (n <= 8, forced positivity
/// floor 1e-3), the criterion decision equals the oracle decision whenever
/// both margins exceed 1e-7 in absolute value; zero disagreements, under
/// 10 seconds.
#[test]
fn criterion_01_decision_equivalence() {
    let start = Instant::now();
    let batch = random_batch(20260808, 1000, 8, 1e-3);
    let outcomes = exec::map_items(&batch, |inst| {
        let report = criterion_check(&inst.operator, &inst.extension, 1e-4, DEFAULT_BOUNDARY_BAND)
            .expect("positivity holds by construction");
        (report.criterion_margin, report.oracle_margin)
    });
    let mut resolved = 0usize;
    let mut disagreements = 0usize;
    for &(crit, oracle) in &outcomes {
        if crit.abs() > 1e-7 && oracle.abs() > 1e-7 {
            resolved += 1;
            if (crit > 0.0) != (oracle > 0.0) {
                disagreements += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(disagreements, 0, "{disagreements} sign disagreements");
    assert!(resolved >= 900, "only {resolved} resolved instances");
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    pass(
        1,
        &format!(
            "0 disagreements over {} instances ({} resolved) in {:.2?}",
            batch.len(),
            resolved,
            elapsed
        ),
    );
}

/// Criterion 2: the completing-the-square identity
/// `(1/4) M* M = C* VA^{-1} C` holds entrywise to 1e-8 on every instance of
/// criterion 1.
#[test]
fn criterion_02_schur_identity() {
    let batch = random_batch(20260808, 1000, 8, 1e-3);
    let max_dev = exec::map_items(&batch, |inst| {
        assemble_criterion(&inst.operator, &inst.extension, 1e-4)
            .expect("positivity holds by construction")
            .schur_identity_deviation()
    })
    .into_iter()
    .fold(0.0_f64, f64::max);
    assert!(max_dev <= 1e-8, "worst deviation {max_dev:.3e}");
    pass(
        2,
        &format!("worst entrywise deviation {max_dev:.3e} <= 1e-8"),
    );
}

/// Criterion 3: for gamma in {0.3, 0.5, 1, 2, 5}, bisection along
/// `l = i c x^gamma`, `v = x^gamma` locates the closed-form threshold
/// `8 gamma (gamma+1) / (2 gamma + 1)` to 1e-6 relative, under 5 seconds.
#[test]
fn criterion_03_first_order_thresholds() {
    let start = Instant::now();
    for &gamma in &[0.3, 0.5, 1.0, 2.0, 5.0] {
        let params = SingularParams::new(gamma).unwrap();
        let located = locate_ray_threshold(params, DEFAULT_BOUNDARY_BAND).unwrap();
        let expected = ray_threshold(params);
        assert!(
            (located - expected).abs() <= 1e-6 * expected,
            "gamma={gamma}: located {located}, expected {expected}"
        );
        if gamma == 1.0 {
            assert!((expected - 16.0 / 3.0).abs() < 1e-15);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(
        3,
        &format!("5 thresholds located to 1e-6 relative in {elapsed:.2?}"),
    );
}

/// Criterion 4: for `v = x^gamma` the adjoint part of the condition
/// integrand cancels identically: the symbolic path gives exactly zero and
/// the quadrature path stays below 1e-12, for 20 random gamma in (0, 10].
#[test]
fn criterion_04_symbolic_cancellation() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..20 {
        let gamma: f64 = rng.random_range(1e-3..=10.0);
        let params = SingularParams::new(gamma).unwrap();
        let (v, zero) = ray_pair(params, 0.0);

        let symbolic = cancellation_rhs_symbolic(&v, params).unwrap();
        assert_eq!(symbolic, 0.0, "gamma={gamma}");

        // quadrature path: integrate the unsimplified integrand pointwise
        let u = condition_integrand(&v, &zero, params);
        let rhs_quad = 0.25
            * quadrature_graded(
                |x| u.eval(x).norm_sqr(),
                0.0,
                1.0,
                2.0 * gamma - 1.0,
                &QuadratureOptions::default(),
            )
            .unwrap();
        assert!(rhs_quad.abs() <= 1e-12, "gamma={gamma}: rhs {rhs_quad:.3e}");
    }
    pass(
        4,
        "adjoint part cancels for 20 random gamma (symbolic exact, quadrature <= 1e-12)",
    );
}

/// Criterion 5: the decaying-kernel solver gives `eta'(0) = -1` for `V = 1`
/// and `-2` for `V = 4` within 1e-8, and doubling the truncation changes
/// `eta'(0)` by less than 1e-10.
#[test]
fn criterion_05_eta_solver() {
    let v1 = PotentialSpec::constant(1.0).unwrap();
    let eta1 = solve_eta(&v1, v1.default_truncation(), DEFAULT_ETA_TOL).unwrap();
    assert!(
        (eta1.eta_prime_0 + 1.0).abs() <= 1e-8,
        "got {}",
        eta1.eta_prime_0
    );

    let v4 = PotentialSpec::constant(4.0).unwrap();
    let eta4 = solve_eta(&v4, v4.default_truncation(), DEFAULT_ETA_TOL).unwrap();
    assert!(
        (eta4.eta_prime_0 + 2.0).abs() <= 1e-8,
        "got {}",
        eta4.eta_prime_0
    );

    let eta1_long = solve_eta(&v1, 2.0 * v1.default_truncation(), DEFAULT_ETA_TOL).unwrap();
    let drift = (eta1.eta_prime_0 - eta1_long.eta_prime_0).abs();
    assert!(drift < 1e-10, "drift {drift:.3e}");
    pass(
        5,
        &format!(
            "eta'(0): {:.2e} / {:.2e} error, truncation drift {:.2e}",
            (eta1.eta_prime_0 + 1.0).abs(),
            (eta4.eta_prime_0 + 2.0).abs(),
            drift
        ),
    );
}

/// Criterion 6: the soft-extension direction `v = e^{-x}`, `l = 0`, `V = 1`
/// is the equality case: lhs = rhs = 1/4 with |lhs - rhs| <= 1e-6.
#[test]
fn criterion_06_equality_case() {
    let v = PotentialSpec::constant(1.0).unwrap();
    let eta = solve_eta(&v, v.default_truncation(), DEFAULT_ETA_TOL).unwrap();
    let vf = FuncExpr::new(
        Interval::half_line(),
        vec![Term::new(c64(1.0, 0.0), 0.0, -1.0)],
    )
    .unwrap();
    let zero = FuncExpr::zero(Interval::half_line());
    let rep = accretive_check(&vf, &zero, &v, &eta, DEFAULT_BOUNDARY_BAND).unwrap();
    assert!((rep.lhs - 0.25).abs() <= 1e-6, "lhs {}", rep.lhs);
    assert!((rep.rhs - 0.25).abs() <= 1e-6, "rhs {}", rep.rhs);
    assert!((rep.lhs - rep.rhs).abs() <= 1e-6);
    pass(
        6,
        &format!(
            "lhs - rhs = {:.3e} at the equality direction",
            rep.lhs - rep.rhs
        ),
    );
}

/// Criterion 7: the soft and hard form norms agree on 10 functions with
/// vanishing trace (1e-9 relative), and the soft form annihilates the
/// computed kernel direction to 1e-6.
#[test]
fn criterion_07_form_identities() {
    let v = PotentialSpec::constant(1.0).unwrap();
    let eta = solve_eta(&v, v.default_truncation(), DEFAULT_ETA_TOL).unwrap();
    let cases: Vec<Vec<Term>> = vec![
        vec![Term::new(c64(1.0, 0.0), 1.0, -1.0)],
        vec![Term::new(c64(1.0, 0.0), 2.0, -1.0)],
        vec![Term::new(c64(1.0, 0.0), 0.6, -1.0)],
        vec![Term::new(c64(1.0, 0.0), 1.5, -2.0)],
        vec![
            Term::new(c64(1.0, 0.0), 1.0, -3.0),
            Term::new(c64(1.0, 0.0), 2.0, -3.0),
        ],
        vec![
            Term::new(c64(1.0, 0.0), 1.0, -2.0),
            Term::new(c64(2.0, 0.0), 2.0, -1.0),
        ],
        vec![Term::new(c64(1.0, 2.0), 1.0, -1.0)],
        vec![Term::new(c64(1.0, 0.0), 2.5, -0.5)],
        vec![
            Term::new(c64(1.0, 0.0), 1.0, -1.0),
            Term::new(c64(-1.0, 0.0), 3.0, -2.0),
        ],
        vec![Term::new(c64(1.0, 0.0), 0.75, -1.5)],
    ];
    assert_eq!(cases.len(), 10);
    let mut worst = 0.0_f64;
    for terms in cases {
        let f = FuncExpr::new(Interval::half_line(), terms).unwrap();
        let soft = krein_form(&f, eta.eta_prime_0, &v).unwrap();
        let hard = friedrichs_form(&f, &v).unwrap();
        let rel = (soft - hard).abs() / hard.abs().max(1e-30);
        worst = worst.max(rel);
        assert!(rel <= 1e-9, "relative gap {rel:.3e}");
    }
    let kernel_value = krein_form_grid(&eta, &v).abs();
    assert!(kernel_value <= 1e-6, "kernel form value {kernel_value:.3e}");
    pass(
        7,
        &format!(
            "10 trace-zero functions agree (worst rel {worst:.2e}); kernel value {kernel_value:.2e}"
        ),
    );
}

/// Criterion 8: defect dimension 1 for the singular first-order operator at
/// gamma in {0.5, 1, 2} and for the truncated half-line Schrodinger
/// operator, each stable across one refinement.
#[test]
fn criterion_08_defect_dimensions() {
    for &gamma in &[0.5, 1.0, 2.0] {
        let op = DefectOperator::FirstOrder { gamma };
        let dim = defect_dimension(&op, 128, DEFECT_THRESHOLD_COEFF).unwrap();
        assert_eq!(dim, 1, "gamma={gamma}");
    }
    let schr = DefectOperator::SchrodingerHalfline {
        potential: 1.0,
        truncation: 20.0,
    };
    assert_eq!(
        defect_dimension(&schr, 256, DEFECT_THRESHOLD_COEFF).unwrap(),
        1
    );
    // classical contrast case: the minimal second-order operator on the
    // interval has defect dimension 2
    let min2 = DefectOperator::MinimalSecondOrderInterval { potential: 0.0 };
    assert_eq!(
        defect_dimension(&min2, 128, DEFECT_THRESHOLD_COEFF).unwrap(),
        2
    );
    pass(8, "defect 1 for first-order (3 gammas) and truncated Schrodinger; 2 for the interval contrast");
}

/// Criterion 9: the non-closability table reproduces `||f_n||^2 = 1/(3n)`
/// and `q(f_n) = 1/2` exactly, in rational arithmetic, for n in {1, 10, 100}.
#[test]
fn criterion_09_closability_falsifier() {
    let demo = closability_falsifier(&[1, 10, 100]);
    for row in &demo.rows {
        assert_eq!(row.norm_sq, Rational::new(1, 3 * row.n));
        assert_eq!(row.norm_sq, hat_norm_sq(row.n));
        assert_eq!(row.form_value, Rational::new(1, 2));
    }
    assert!(demo.cross_differences_zero);
    pass(
        9,
        "table exact for n in {1, 10, 100}; pairwise differences carry zero form",
    );
}

/// Criterion 10: on the fixed 12-case regression set (all analytic margins
/// above 1e-3 in absolute value), the grid-oracle sign at mesh width
/// <= 1/2048 agrees with the analytic decision in every case, under
/// 60 seconds.
#[test]
fn criterion_10_grid_cross_validation() {
    let start = Instant::now();
    let cases = regression_cases();
    assert_eq!(cases.len(), 12);
    let meshes = standard_ladder(1.0 / 2048.0, 3);
    assert!(meshes.last().unwrap().max_cell() <= 1.0 / 2048.0 + 1e-12);
    let reports = exec::map_items(&cases, |case| {
        let params = SingularParams::new(case.gamma).unwrap();
        let (v, ell) = regression_pair(case);
        cross_validate(&v, &ell, params, &meshes, DEFAULT_BOUNDARY_BAND).unwrap()
    });
    for (case, rep) in cases.iter().zip(&reports) {
        assert!(
            rep.analytic_margin.abs() > 1e-3,
            "case {}: analytic margin {} too small",
            case.id,
            rep.analytic_margin
        );
        assert!(
            rep.sign_stable,
            "case {}: unstable grid sign {rep:?}",
            case.id
        );
        assert!(rep.agrees_with_analytic, "case {}: {rep:?}", case.id);
        assert_ne!(
            rep.analytic_decision,
            Decision::Boundary,
            "case {}",
            case.id
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    pass(
        10,
        &format!("12/12 grid signs agree at h <= 1/2048 in {elapsed:.2?}"),
    );
}
