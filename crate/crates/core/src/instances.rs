//! Random finite-dimensional instances for stress testing and benchmarks.
//!
//! Instances are built so that the strict-positivity hypothesis holds by
//! construction: the domain action is `A D = D (S + i P) + D_perp Z` with
//! `S` Hermitian, `P` Hermitian with spectrum inside `[floor, 2]`, and `Z`
//! arbitrary, which makes the form matrix exactly `P`.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::findim::{ExtensionSpec, PartialOperator};
use crate::linalg::{orthonormalize, ComplexMatrix};

/// Dimensions and positivity floor of a random instance.
#[derive(Debug, Clone, Copy)]
pub struct InstanceShape {
    pub ambient: usize,
    pub domain: usize,
    pub complement: usize,
    pub va_floor: f64,
}

/// A generated instance.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub operator: PartialOperator,
    pub extension: ExtensionSpec,
    pub shape: InstanceShape,
}

fn random_complex(rng: &mut StdRng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Random matrix with entries uniform in the unit square.
pub fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| random_complex(rng)).expect("finite entries")
}

/// Random unitary via orthonormalization of a random square matrix.
pub fn random_unitary(rng: &mut StdRng, n: usize) -> ComplexMatrix {
    loop {
        let raw = random_matrix(rng, n, n);
        if let Ok((q, _)) = orthonormalize(&raw, None) {
            return q;
        }
    }
}

/// Random Hermitian matrix with spectrum inside `[lo, hi]`.
pub fn random_hermitian_with_spectrum(
    rng: &mut StdRng,
    n: usize,
    lo: f64,
    hi: f64,
) -> ComplexMatrix {
    let u = random_unitary(rng, n);
    let eigs: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    let diag = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(eigs[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
    .unwrap();
    u.mul(&diag).mul(&u.adjoint())
}

/// Random Hermitian matrix (unconstrained spectrum).
pub fn random_hermitian(rng: &mut StdRng, n: usize) -> ComplexMatrix {
    let raw = random_matrix(rng, n, n);
    raw.add(&raw.adjoint()).scale(Complex64::new(0.5, 0.0))
}

/// Generates an instance with form matrix spectrum inside `[va_floor, 2]`.
///
/// When `range_avoids_complement` is set, the domain action has no component
/// along the complement subspace, which makes the criterion data scale
/// linearly when the complement action is scaled.
pub fn random_instance_with(
    rng: &mut StdRng,
    shape: InstanceShape,
    range_avoids_complement: bool,
) -> RandomInstance {
    let InstanceShape {
        ambient: n,
        domain: d,
        complement: k,
        va_floor,
    } = shape;
    assert!(d >= 1 && k >= 1 && d + k <= n, "invalid shape {shape:?}");
    let u = random_unitary(rng, n);
    let d_basis = u.block(0, 0, n, d);
    let v_basis = u.block(0, d, n, k);
    // remaining columns span the rest of the ambient space
    let rest = n - d - k;

    let s = random_hermitian(rng, d);
    let p = random_hermitian_with_spectrum(rng, d, va_floor, 2.0);
    let inside = s.add(&p.scale(Complex64::new(0.0, 1.0)));
    let mut action = d_basis.mul(&inside);
    if range_avoids_complement {
        if rest > 0 {
            let w_basis = u.block(0, d + k, n, rest);
            let z = random_matrix(rng, rest, d);
            action = action.add(&w_basis.mul(&z));
        }
    } else {
        let perp = n - d;
        let perp_basis = u.block(0, d, n, perp);
        let z = random_matrix(rng, perp, d);
        action = action.add(&perp_basis.mul(&z));
    }
    let operator = PartialOperator::new(d_basis, action).expect("constructed valid");

    let bv = random_matrix(rng, n, k);
    let extension = ExtensionSpec::new(&operator, v_basis, bv).expect("constructed valid");
    RandomInstance {
        operator,
        extension,
        shape,
    }
}

/// Deterministic batch of instances with dimensions sampled up to
/// `max_ambient`, driven by a seed.
pub fn random_batch(
    seed: u64,
    count: usize,
    max_ambient: usize,
    va_floor: f64,
) -> Vec<RandomInstance> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=max_ambient);
            let d = rng.random_range(1..=n - 1);
            let k = rng.random_range(1..=n - d);
            random_instance_with(
                &mut rng,
                InstanceShape {
                    ambient: n,
                    domain: d,
                    complement: k,
                    va_floor,
                },
                false,
            )
        })
        .collect()
}
