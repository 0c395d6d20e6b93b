//! Seeded numerical checks of the matrix identities and closed forms the
//! decomposition rests on. Each check reports its largest scaled residual.

use serde::{Deserialize, Serialize};

use crate::energy::{g2_frame, p3_nonpoly, p3_shifted, DoubleWell};
use crate::fd;
use crate::linalg::{random_rotation, Matrix};
use crate::rng;

pub const RANDOM_SAMPLES: usize = 1000;
pub const ROTATION_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub seed: u64,
    pub checks: Vec<IdentityCheck>,
    pub all_passed: bool,
}

impl IdentityReport {
    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    samples: usize,
    max_residual: f64,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tally {
            name,
            tolerance,
            samples: 0,
            max_residual: 0.0,
        }
    }

    fn record(&mut self, residual: f64) {
        self.samples += 1;
        // NaN residuals must fail the check.
        if residual.is_nan() || residual > self.max_residual {
            self.max_residual = if residual.is_nan() {
                f64::INFINITY
            } else {
                residual
            };
        }
    }

    fn finish(self) -> IdentityCheck {
        IdentityCheck {
            name: self.name.to_string(),
            samples: self.samples,
            max_residual: self.max_residual,
            tolerance: self.tolerance,
            passed: self.max_residual <= self.tolerance,
        }
    }
}

/// (tr X)² − tr X² − 2 s₂(X), scaled by 1 + (tr X)².
pub fn trace_minor_residual(x: &Matrix) -> f64 {
    let tr = x.trace();
    (tr * tr - x.matmul(x).trace() - 2.0 * x.s2()).abs() / (1.0 + tr * tr)
}

/// |X|² − tr X² − 2|X_a|², scaled by 1 + |X|².
pub fn skew_residual(x: &Matrix) -> f64 {
    let xx = x.frobenius_norm_sq();
    (xx - x.matmul(x).trace() - 2.0 * x.skew_part().frobenius_norm_sq()).abs() / (1.0 + xx)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// Runs every identity check with random samples drawn from `seed`.
pub fn run_suite(seed: u64) -> IdentityReport {
    let dw2 = DoubleWell::plus_minus_identity(2);
    let dw3 = DoubleWell::plus_minus_identity(3);
    let mut gen = rng::stream(seed, 0);

    let mut trace_minor = Tally::new("trace_minor", 1e-10);
    let mut skew = Tally::new("skew", 1e-10);
    for k in 0..RANDOM_SAMPLES {
        let x = rng::gaussian_matrix(&mut gen, 2 + k % 5);
        trace_minor.record(trace_minor_residual(&x));
        skew.record(skew_residual(&x));
    }

    let mut closed_2 = Tally::new("closed_form_2x2", 1e-10);
    let mut sos_2 = Tally::new("sos_2x2", 1e-10);
    let mut frame_split_2 = Tally::new("frame_split_2x2", 1e-10);
    let mut frame_inv_2 = Tally::new("frame_invariance_2x2", 1e-9);
    let mut closed_3 = Tally::new("closed_form_3x3", 1e-10);
    let mut isotropy_3 = Tally::new("isotropy_3x3", 1e-9);
    let mut cof_conj = Tally::new("cofactor_conjugation", 1e-9);
    let mut shifted_3 = Tally::new("p3_shifted_form", 1e-10);
    let mut nonpoly_3 = Tally::new("p3_nonpoly_form", 1e-10);
    for k in 0..RANDOM_SAMPLES {
        let x = rng::gaussian_matrix(&mut gen, 2);
        let (xx, det) = (x.frobenius_norm_sq(), x.det());
        let off = x.get(1, 0) - x.get(0, 1);
        let f = dw2.eval(&x).expect("2x2");
        closed_2.record(rel(f, xx * xx + 4.0 * off * off - 8.0 * det + 4.0));
        let g = g2_frame(&x).expect("2x2");
        let sym_off = x.get(0, 1) + x.get(1, 0);
        let sos = (xx - 2.0).powi(2) + 4.0 * (x.get(0, 0) - x.get(1, 1)).powi(2) + 4.0 * sym_off * sym_off;
        sos_2.record(rel(g, sos));
        frame_split_2.record(rel(g, f - 4.0 * off * off));
        let r2 = random_rotation(2, rng::derive_seed(seed, 1_000 + k as u64));
        frame_inv_2.record(rel(g2_frame(&r2.matmul(&x)).expect("2x2"), g));

        let x = rng::gaussian_matrix(&mut gen, 3);
        let xx = x.frobenius_norm_sq();
        let f = dw3.eval(&x).expect("3x3");
        let form = xx * xx + 2.0 * xx + 8.0 * x.skew_part().frobenius_norm_sq() - 8.0 * x.s2() + 9.0;
        closed_3.record(rel(f, form));
        let r3 = random_rotation(3, rng::derive_seed(seed, 2_000 + k as u64));
        let conj = r3.matmul(&x).matmul(&r3.transpose());
        isotropy_3.record(rel(dw3.eval(&conj).expect("3x3"), f));
        let lhs = conj.cofactor();
        let rhs = r3.matmul(&x.cofactor()).matmul(&r3.transpose());
        cof_conj.record(lhs.max_abs_diff(&rhs) / (1.0 + rhs.max_abs()));
        shifted_3.record(rel(p3_shifted(&x).expect("3x3"), xx * (xx + 6.0)));
        nonpoly_3.record(rel(p3_nonpoly(&x).expect("3x3"), (xx - 3.0).powi(2)));
    }

    let mut rotations_2 = Tally::new("g2_vanishes_on_rotations", 1e-10);
    for k in 0..ROTATION_SAMPLES {
        let r = random_rotation(2, rng::derive_seed(seed, 3_000 + k as u64));
        rotations_2.record(g2_frame(&r).expect("2x2").abs());
    }
    rotations_2.record(g2_frame(&Matrix::identity(2)).expect("2x2").abs());
    rotations_2.record(g2_frame(&-&Matrix::identity(2)).expect("2x2").abs());

    let mut shifted_identity = Tally::new("p3_shifted_at_identity", 0.0);
    shifted_identity.record((p3_shifted(&Matrix::identity(3)).expect("3x3") - 27.0).abs());

    // Full finite-difference Hessian of p3_nonpoly at the origin against −12·I.
    let mut hessian = Tally::new("p3_nonpoly_hessian", 1e-4);
    let h = fd::hessian(|x| p3_nonpoly(x).expect("3x3"), &Matrix::zeros(3), 1e-4);
    for (a, row) in h.iter().enumerate() {
        for (b, value) in row.iter().enumerate() {
            let expected = if a == b { -12.0 } else { 0.0 };
            hessian.record((value - expected).abs());
        }
    }

    let checks: Vec<IdentityCheck> = [
        trace_minor,
        skew,
        closed_2,
        sos_2,
        frame_split_2,
        rotations_2,
        frame_inv_2,
        closed_3,
        isotropy_3,
        cof_conj,
        shifted_3,
        nonpoly_3,
        shifted_identity,
        hessian,
    ]
    .into_iter()
    .map(Tally::finish)
    .collect();
    let all_passed = checks.iter().all(|c| c.passed);
    IdentityReport {
        seed,
        checks,
        all_passed,
    }
}
