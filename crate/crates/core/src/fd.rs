//! Finite-difference oracles used to cross-check analytic derivatives.

use crate::linalg::Matrix;

/// Step used for first derivatives at `x`.
pub fn gradient_step(x: &Matrix) -> f64 {
    1e-5 * (1.0 + x.frobenius_norm())
}

/// Step used for second derivatives at `x`.
pub fn second_step(x: &Matrix) -> f64 {
    1e-4 * (1.0 + x.frobenius_norm())
}

/// Central-difference gradient of a scalar matrix function.
pub fn central_gradient<F: Fn(&Matrix) -> f64>(f: F, x: &Matrix, h: f64) -> Matrix {
    let n = x.n();
    let mut grad = Matrix::zeros(n);
    let mut probe = x.clone();
    for i in 0..n {
        for j in 0..n {
            let orig = x.get(i, j);
            probe.set(i, j, orig + h);
            let plus = f(&probe);
            probe.set(i, j, orig - h);
            let minus = f(&probe);
            probe.set(i, j, orig);
            grad.set(i, j, (plus - minus) / (2.0 * h));
        }
    }
    grad
}

/// Second central difference of t ↦ f(x + t·dir) at t = 0.
pub fn second_directional<F: Fn(&Matrix) -> f64>(f: F, x: &Matrix, dir: &Matrix, h: f64) -> f64 {
    let plus = f(&(x + &dir.scale(h)));
    let minus = f(&(x - &dir.scale(h)));
    (plus - 2.0 * f(x) + minus) / (h * h)
}

/// Full finite-difference Hessian in the basis of elementary matrices Eᵢⱼ,
/// indexed by row-major position.
pub fn hessian<F: Fn(&Matrix) -> f64>(f: F, x: &Matrix, h: f64) -> Vec<Vec<f64>> {
    let n = x.n();
    let dim = n * n;
    let basis: Vec<Matrix> = (0..dim).map(|k| Matrix::unit(n, k / n, k % n)).collect();
    let mut out = vec![vec![0.0; dim]; dim];
    for a in 0..dim {
        for b in a..dim {
            let value = if a == b {
                second_directional(&f, x, &basis[a], h)
            } else {
                let (ea, eb) = (&basis[a], &basis[b]);
                let at = |sa: f64, sb: f64| f(&(&(x + &ea.scale(sa * h)) + &eb.scale(sb * h)));
                (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h)
            };
            out[a][b] = value;
            out[b][a] = value;
        }
    }
    out
}
