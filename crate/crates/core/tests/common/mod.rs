#![allow(dead_code)]

use polywell_core::rng;
use polywell_core::{random_rotation, DoubleWell, Matrix};
use rand::Rng;

/// Orthogonal matrix from `seed`, with det −1 when `reflect` is set.
pub fn orthogonal(n: usize, seed: u64, reflect: bool) -> Matrix {
    let mut q = random_rotation(n, seed);
    if reflect {
        for j in 0..n {
            q.set(0, j, -q.get(0, j));
        }
    }
    q
}

/// Wells B ± a·Q with a ∈ [0.1, 2], Gaussian B and Q orthogonal.
pub fn certified_wells(n: usize, seed: u64) -> DoubleWell {
    let mut gen = rng::stream(seed, 0);
    let a = gen.random_range(0.1..2.0);
    let reflect = gen.random::<bool>();
    let q = orthogonal(n, rng::derive_seed(seed, 1), reflect);
    let b = rng::gaussian_matrix(&mut gen, n);
    let aq = q.scale(a);
    DoubleWell::new(&b + &aq, &b - &aq).unwrap()
}

/// Wells with independent Gaussian entries; almost surely not polyconvex.
pub fn generic_wells(n: usize, seed: u64) -> DoubleWell {
    let mut gen = rng::stream(seed, 0);
    DoubleWell::new(
        rng::gaussian_matrix(&mut gen, n),
        rng::gaussian_matrix(&mut gen, n),
    )
    .unwrap()
}

/// Relative error of two matrices in the Frobenius norm.
pub fn rel_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).frobenius_norm() / (1.0 + a.frobenius_norm().max(b.frobenius_norm()))
}
