//! Convex plus null-Lagrangian split of a certified double well.
//!
//! With A = a·Q and Y = Qᵀ(X − B):
//!
//! ```text
//! f_C(X) = |Y|⁴ + 2a²(n−2)|Y|² + 8a²|Y_a|² + n²a⁴
//! f_L(X) = −8a² s₂(Y)
//! ```
//!
//! f_C is convex, f_L is a quadratic null Lagrangian, and f = f_C + f_L.

use serde::{Deserialize, Serialize};

use crate::certify::Certificate;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DecompositionRepr", into = "DecompositionRepr")]
pub struct Decomposition {
    n: usize,
    a: f64,
    q: Matrix,
    b: Matrix,
    sigma_spread: f64,
    null_coeff: f64,
}

/// Certificate fields plus `null_coeff`.
#[derive(Serialize, Deserialize)]
struct DecompositionRepr {
    verdict: String,
    a: f64,
    #[serde(rename = "Q")]
    q: Matrix,
    #[serde(rename = "B")]
    b: Matrix,
    #[serde(default)]
    sigma_spread: f64,
    null_coeff: f64,
}

impl From<Decomposition> for DecompositionRepr {
    fn from(d: Decomposition) -> Self {
        DecompositionRepr {
            verdict: "polyconvex".into(),
            a: d.a,
            q: d.q,
            b: d.b,
            sigma_spread: d.sigma_spread,
            null_coeff: d.null_coeff,
        }
    }
}

impl TryFrom<DecompositionRepr> for Decomposition {
    type Error = Error;
    fn try_from(r: DecompositionRepr) -> Result<Self> {
        if r.verdict != "polyconvex" {
            return Err(Error::Parse(format!(
                "decomposition verdict must be polyconvex, got {}",
                r.verdict
            )));
        }
        let d = Decomposition::new(r.a, r.q, r.b, r.sigma_spread)?;
        if d.null_coeff != r.null_coeff {
            return Err(Error::Parse("null_coeff must equal -8 a^2".into()));
        }
        Ok(d)
    }
}

impl Decomposition {
    fn new(a: f64, q: Matrix, b: Matrix, sigma_spread: f64) -> Result<Self> {
        q.check_dim(&b)?;
        let n = q.n();
        let qtq = q.transpose().matmul(&q);
        if qtq.max_abs_diff(&Matrix::identity(n)) > 1e-10 {
            return Err(Error::InvalidMatrix("Q is not orthonormal".into()));
        }
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidOptions(format!("a must be non-negative, got {a}")));
        }
        Ok(Decomposition {
            n,
            a,
            q,
            b,
            sigma_spread,
            null_coeff: -8.0 * a * a,
        })
    }

    /// Decomposition of a polyconvex certificate.
    pub fn build(cert: &Certificate) -> Result<Self> {
        match cert {
            Certificate::Polyconvex {
                a,
                q,
                b,
                sigma_spread,
            } => Decomposition::new(*a, q.clone(), b.clone(), *sigma_spread),
            Certificate::NotPolyconvex { .. } => Err(Error::NotPolyconvex(Box::new(cert.clone()))),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn q(&self) -> &Matrix {
        &self.q
    }
    pub fn b(&self) -> &Matrix {
        &self.b
    }
    /// −8a²
    pub fn null_coeff(&self) -> f64 {
        self.null_coeff
    }

    /// Y = Qᵀ(X − B).
    pub fn to_local(&self, x: &Matrix) -> Result<Matrix> {
        self.b.check_dim(x)?;
        Ok(self.q.transpose().matmul(&(x - &self.b)))
    }

    /// f_C(X).
    pub fn eval_convex(&self, x: &Matrix) -> Result<f64> {
        let y = self.to_local(x)?;
        let a2 = self.a * self.a;
        let n = self.n as f64;
        let yy = y.frobenius_norm_sq();
        let skew = y.skew_part().frobenius_norm_sq();
        Ok(yy * yy + 2.0 * a2 * (n - 2.0) * yy + 8.0 * a2 * skew + n * n * a2 * a2)
    }

    /// f_L(X) = −8a² s₂(Qᵀ(X − B)).
    pub fn eval_null(&self, x: &Matrix) -> Result<f64> {
        Ok(self.null_coeff * self.to_local(x)?.s2())
    }

    /// f_C(X + ΔX) − f_C(X), expanded so that no O(f_C) terms cancel.
    /// With D = QᵀΔX and δ = 2⟨Y, D⟩ + |D|² the increment is
    /// δ(2|Y|² + δ) + 2a²(n−2)δ + 8a²(2⟨Y_a, D_a⟩ + |D_a|²).
    pub fn convex_increment(&self, x: &Matrix, dx: &Matrix) -> Result<f64> {
        let y = self.to_local(x)?;
        let d = self.q.transpose().matmul(dx);
        let a2 = self.a * self.a;
        let n = self.n as f64;
        let delta = 2.0 * y.dot(&d) + d.frobenius_norm_sq();
        let (ya, da) = (y.skew_part(), d.skew_part());
        let skew_delta = 2.0 * ya.dot(&da) + da.frobenius_norm_sq();
        Ok(delta * (2.0 * y.frobenius_norm_sq() + delta)
            + 2.0 * a2 * (n - 2.0) * delta
            + 8.0 * a2 * skew_delta)
    }

    /// ∇f_C(X) = Q (4|Y|²Y + 4a²(n−2)Y + 16a²Y_a).
    pub fn convex_gradient(&self, x: &Matrix) -> Result<Matrix> {
        let y = self.to_local(x)?;
        let a2 = self.a * self.a;
        let n = self.n as f64;
        let radial = 4.0 * y.frobenius_norm_sq() + 4.0 * a2 * (n - 2.0);
        let local = &y.scale(radial) + &y.skew_part().scale(16.0 * a2);
        Ok(self.q.matmul(&local))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{certify, CertifyOptions};
    use crate::energy::DoubleWell;
    use crate::fd;
    use crate::linalg::random_rotation;
    use crate::rng;

    fn dec(dw: &DoubleWell) -> Decomposition {
        Decomposition::build(&certify(dw, &CertifyOptions::default()).unwrap()).unwrap()
    }

    #[test]
    fn build_examples() {
        let d = dec(&DoubleWell::plus_minus_identity(2));
        assert_eq!((d.a(), d.null_coeff()), (1.0, -8.0));
        assert_eq!(d.q(), &Matrix::identity(2));
        assert_eq!(d.b(), &Matrix::zeros(2));

        let m = Matrix::from_rows(&[[0.5, 1.0], [-2.0, 3.0]]).unwrap();
        let d = dec(&DoubleWell::new(m.clone(), m.clone()).unwrap());
        assert_eq!(d.a(), 0.0);
        assert_eq!(d.null_coeff(), 0.0);
        assert_eq!(d.eval_null(&Matrix::identity(2)).unwrap(), 0.0);

        let r = random_rotation(2, 3);
        let d = dec(&DoubleWell::new(r.scale(2.0), Matrix::zeros(2)).unwrap());
        assert!((d.a() - 1.0).abs() < 1e-12);
        assert!(d.q().max_abs_diff(&r) < 1e-12);
        assert!(d.b().max_abs_diff(&r) < 1e-15);

        let bad = DoubleWell::new(Matrix::diag(&[2.0, 1.0]).unwrap(), Matrix::zeros(2)).unwrap();
        let cert = certify(&bad, &CertifyOptions::default()).unwrap();
        assert!(matches!(
            Decomposition::build(&cert),
            Err(Error::NotPolyconvex(_))
        ));
    }

    #[test]
    fn eval_convex_examples() {
        let d = dec(&DoubleWell::plus_minus_identity(2));
        assert_eq!(d.eval_convex(&Matrix::zeros(2)).unwrap(), 4.0);
        // |X|² = 1, X_a = [[0, ½], [−½, 0]] so |X_a|² = ½: 1 + 0 + 8·½ + 4.
        let x = Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(x.skew_part().frobenius_norm_sq(), 0.5);
        assert_eq!(d.eval_convex(&x).unwrap(), 9.0);

        let d3 = dec(&DoubleWell::plus_minus_identity(3));
        assert_eq!(d3.eval_convex(&Matrix::identity(3)).unwrap(), 24.0);
    }

    #[test]
    fn eval_null_examples() {
        let d = dec(&DoubleWell::plus_minus_identity(2));
        let x = Matrix::from_rows(&[[1.5, -2.0], [0.5, 3.0]]).unwrap();
        assert_eq!(d.eval_null(&x).unwrap(), -8.0 * x.det());
        let d3 = dec(&DoubleWell::plus_minus_identity(3));
        assert_eq!(d3.eval_null(&Matrix::identity(3)).unwrap(), -24.0);
        assert_eq!(
            d3.eval_convex(&Matrix::identity(3)).unwrap() + d3.eval_null(&Matrix::identity(3)).unwrap(),
            0.0
        );
    }

    #[test]
    fn convex_gradient_examples() {
        let mut gen = rng::stream(31, 0);
        for n in 2..5 {
            let r = random_rotation(n, n as u64);
            let dw = DoubleWell::new(
                &r.scale(1.3) + &Matrix::identity(n),
                &r.scale(-1.3) + &Matrix::identity(n),
            )
            .unwrap();
            let d = dec(&dw);
            assert!(d.convex_gradient(d.b()).unwrap().max_abs() < 1e-14);
            for _ in 0..20 {
                let x = rng::gaussian_matrix(&mut gen, n);
                let analytic = d.convex_gradient(&x).unwrap();
                let numeric = fd::central_gradient(|y| d.eval_convex(y).unwrap(), &x, fd::gradient_step(&x));
                let rel = (&analytic - &numeric).frobenius_norm() / (1.0 + analytic.frobenius_norm());
                assert!(rel <= 1e-6, "relative error {rel}");
            }
        }

        // a = 0, symmetric Y: only 4|Y|²Y survives.
        let q = random_rotation(3, 8);
        let d = Decomposition::new(0.0, q.clone(), Matrix::zeros(3), 0.0).unwrap();
        let y = Matrix::from_rows(&[[1.0, 2.0, 0.0], [2.0, -1.0, 0.5], [0.0, 0.5, 3.0]]).unwrap();
        let x = q.matmul(&y);
        let expected = q.matmul(&y.scale(4.0 * y.frobenius_norm_sq()));
        assert!(d.convex_gradient(&x).unwrap().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn convex_increment_matches_difference() {
        let mut gen = rng::stream(32, 0);
        for n in 2..5 {
            let r = random_rotation(n, 40 + n as u64);
            let d = dec(&DoubleWell::new(
                &r.scale(0.7) + &Matrix::identity(n),
                &r.scale(-0.7) + &Matrix::identity(n),
            )
            .unwrap());
            for _ in 0..20 {
                let x = rng::gaussian_matrix(&mut gen, n);
                let dx = rng::gaussian_matrix(&mut gen, n).scale(0.3);
                let direct = d.eval_convex(&(&x + &dx)).unwrap() - d.eval_convex(&x).unwrap();
                let inc = d.convex_increment(&x, &dx).unwrap();
                assert!((direct - inc).abs() <= 1e-12 * (1.0 + d.eval_convex(&x).unwrap()));
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let d = dec(&DoubleWell::plus_minus_identity(3));
        let s = serde_json::to_string(&d).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["null_coeff"], -8.0);
        assert_eq!(v["verdict"], "polyconvex");
        assert_eq!(serde_json::from_str::<Decomposition>(&s).unwrap(), d);
    }
}
