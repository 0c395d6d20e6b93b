//! The double-well energy f(X) = |X − X₁|² |X − X₂|² and its relatives.
//!
//! With A = ½(X₁ − X₂), B = ½(X₁ + X₂) and Z = X − B the energy becomes
//! g(Z) = |Z − A|² |Z + A|² = |Z|⁴ + 2|A|²|Z|² + |A|⁴ − 4⟨Z, A⟩².
//! [`DoubleWell::eval`] uses the product form and [`DoubleWell::eval_g`]
//! the expanded quartic, so each checks the other.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Two wells X₁, X₂ with the cached half-difference A and midpoint B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WellsRepr", into = "WellsRepr")]
pub struct DoubleWell {
    x1: Matrix,
    x2: Matrix,
    a: Matrix,
    b: Matrix,
}

#[derive(Serialize, Deserialize)]
struct WellsRepr {
    #[serde(rename = "X1")]
    x1: Matrix,
    #[serde(rename = "X2")]
    x2: Matrix,
}

impl TryFrom<WellsRepr> for DoubleWell {
    type Error = Error;
    fn try_from(r: WellsRepr) -> Result<Self> {
        DoubleWell::new(r.x1, r.x2)
    }
}

impl From<DoubleWell> for WellsRepr {
    fn from(dw: DoubleWell) -> Self {
        WellsRepr { x1: dw.x1, x2: dw.x2 }
    }
}

impl DoubleWell {
    pub fn new(x1: Matrix, x2: Matrix) -> Result<Self> {
        x1.check_dim(&x2)?;
        let a = (&x1 - &x2).scale(0.5);
        let b = (&x1 + &x2).scale(0.5);
        Ok(DoubleWell { x1, x2, a, b })
    }

    /// Wells at ±Iₙ.
    pub fn plus_minus_identity(n: usize) -> Self {
        let id = Matrix::identity(n);
        DoubleWell::new(id.clone(), -&id).expect("same dimension")
    }

    pub fn n(&self) -> usize {
        self.x1.n()
    }
    pub fn x1(&self) -> &Matrix {
        &self.x1
    }
    pub fn x2(&self) -> &Matrix {
        &self.x2
    }
    /// ½(X₁ − X₂)
    pub fn a(&self) -> &Matrix {
        &self.a
    }
    /// ½(X₁ + X₂)
    pub fn b(&self) -> &Matrix {
        &self.b
    }

    /// f(X) = |X − X₁|² |X − X₂|².
    pub fn eval(&self, x: &Matrix) -> Result<f64> {
        self.x1.check_dim(x)?;
        Ok((x - &self.x1).frobenius_norm_sq() * (x - &self.x2).frobenius_norm_sq())
    }

    /// g(Z) = f(Z + B), evaluated through the expansion
    /// |Z|⁴ + 2|A|²|Z|² + |A|⁴ − 4⟨Z, A⟩².
    pub fn eval_g(&self, z: &Matrix) -> Result<f64> {
        self.a.check_dim(z)?;
        let zz = z.frobenius_norm_sq();
        let aa = self.a.frobenius_norm_sq();
        let za = z.dot(&self.a);
        Ok(zz * zz + 2.0 * aa * zz + aa * aa - 4.0 * za * za)
    }

    /// ∇f(X) = 2|X − X₂|²(X − X₁) + 2|X − X₁|²(X − X₂).
    pub fn gradient(&self, x: &Matrix) -> Result<Matrix> {
        self.x1.check_dim(x)?;
        let d1 = x - &self.x1;
        let d2 = x - &self.x2;
        Ok(&d1.scale(2.0 * d2.frobenius_norm_sq()) + &d2.scale(2.0 * d1.frobenius_norm_sq()))
    }

    /// d²/dt² g(Z + t·uvᵀ) at t = 0:
    /// 8⟨Z, uvᵀ⟩² + 4(|Z|² + |A|²)|u|²|v|² − 8(uᵀAv)².
    pub fn hessian_rank_one(&self, z: &Matrix, d: &RankOneDirection) -> Result<f64> {
        self.a.check_dim(z)?;
        d.check_len(self.n())?;
        let z_d = z.bilinear(&d.u, &d.v);
        let a_d = self.a.bilinear(&d.u, &d.v);
        let uv = linalg::norm_sq(&d.u) * linalg::norm_sq(&d.v);
        let scale = z.frobenius_norm_sq() + self.a.frobenius_norm_sq();
        Ok(8.0 * z_d * z_d + 4.0 * scale * uv - 8.0 * a_d * a_d)
    }
}

/// Rank-one direction uvᵀ, stored as the pair (u, v).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneDirection {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl RankOneDirection {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite rank-one direction".into()));
        }
        Ok(RankOneDirection { u, v })
    }

    fn check_len(&self, n: usize) -> Result<()> {
        for len in [self.u.len(), self.v.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        Ok(())
    }

    pub fn matrix(&self) -> Matrix {
        Matrix::outer(&self.u, &self.v).expect("validated direction")
    }
}

fn require_dim(x: &Matrix, n: usize) -> Result<()> {
    if x.n() == n {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: n,
            got: x.n(),
        })
    }
}

/// Frame-invariant 2×2 energy |X|⁴ + 4 − 8 det X.
///
/// Equals f(X) − 4(X₂₁ − X₁₂)² for wells ±I₂ and the sum of squares
/// (|X|² − 2)² + 4(X₁₁ − X₂₂)² + 4(X₁₂ + X₂₁)², so it is non-negative and
/// vanishes exactly on SO(2).
pub fn g2_frame(x: &Matrix) -> Result<f64> {
    require_dim(x, 2)?;
    let xx = x.frobenius_norm_sq();
    Ok(xx * xx + 4.0 - 8.0 * x.det())
}

/// f(X) + 4(tr X)² − 9 for wells ±I₃; equal to |X|²(|X|² + 6).
pub fn p3_shifted(x: &Matrix) -> Result<f64> {
    require_dim(x, 3)?;
    let tr = x.trace();
    Ok(DoubleWell::plus_minus_identity(3).eval(x)? + 4.0 * tr * tr - 9.0)
}

/// f(X) + 4(tr X)² − 12|X|² for wells ±I₃; equal to (|X|² − 3)². Not
/// polyconvex: its Hessian at the origin is −12·I.
pub fn p3_nonpoly(x: &Matrix) -> Result<f64> {
    require_dim(x, 3)?;
    let tr = x.trace();
    Ok(DoubleWell::plus_minus_identity(3).eval(x)? + 4.0 * tr * tr - 12.0 * x.frobenius_norm_sq())
}
