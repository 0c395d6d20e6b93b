//! Polyconvexity certificates for double wells.
//!
//! f is polyconvex exactly when all singular values of X₁ − X₂ coincide,
//! i.e. A = ½(X₁ − X₂) = a·Q with Q orthonormal. When they do not, the
//! direction u = U e₁, v = V e₁ of the largest singular value breaks
//! rank-one convexity at Z = 0 whenever σ₁² > ½ Σ σₖ².

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{DoubleWell, RankOneDirection};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SvdResult};
use crate::rng;

/// Radius of the ball ‖Z‖ ≤ R searched by [`sample_rank_one`].
pub const SAMPLE_RADIUS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    /// Relative tolerance of the singular-value equality test.
    pub tol: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { tol: 1e-8 }
    }
}

impl CertifyOptions {
    pub fn validate(&self) -> Result<()> {
        if self.tol > 0.0 && self.tol.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidOptions(format!(
                "tol must be positive, got {}",
                self.tol
            )))
        }
    }
}

/// A rank-one direction along which the second derivative of g at Z = 0 is
/// negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub direction: RankOneDirection,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CertificateRepr", into = "CertificateRepr")]
pub enum Certificate {
    Polyconvex {
        /// Mean singular value of A.
        a: f64,
        /// Orthonormal factor, A ≈ a·Q. May have det −1.
        q: Matrix,
        b: Matrix,
        /// max σ − min σ of A.
        sigma_spread: f64,
    },
    NotPolyconvex {
        /// `None` when σ₁² ≤ ½ Σ σₖ², where no violation exists at Z = 0.
        witness: Option<Witness>,
        /// Singular values of X₁ − X₂, descending.
        sigma: Vec<f64>,
    },
}

impl Certificate {
    pub fn is_polyconvex(&self) -> bool {
        matches!(self, Certificate::Polyconvex { .. })
    }
}

const NONE_AT_ZERO: &str = "none-at-zero";

#[derive(Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
enum CertificateRepr {
    Polyconvex {
        a: f64,
        #[serde(rename = "Q")]
        q: Matrix,
        #[serde(rename = "B")]
        b: Matrix,
        sigma_spread: f64,
    },
    NotPolyconvex {
        u: Option<Vec<f64>>,
        v: Option<Vec<f64>>,
        value: Option<f64>,
        sigma: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        witness: Option<String>,
    },
}

impl From<Certificate> for CertificateRepr {
    fn from(c: Certificate) -> Self {
        match c {
            Certificate::Polyconvex {
                a,
                q,
                b,
                sigma_spread,
            } => CertificateRepr::Polyconvex {
                a,
                q,
                b,
                sigma_spread,
            },
            Certificate::NotPolyconvex {
                witness: Some(w),
                sigma,
            } => CertificateRepr::NotPolyconvex {
                u: Some(w.direction.u),
                v: Some(w.direction.v),
                value: Some(w.value),
                sigma,
                witness: None,
            },
            Certificate::NotPolyconvex { witness: None, sigma } => CertificateRepr::NotPolyconvex {
                u: None,
                v: None,
                value: None,
                sigma,
                witness: Some(NONE_AT_ZERO.to_string()),
            },
        }
    }
}

impl TryFrom<CertificateRepr> for Certificate {
    type Error = Error;
    fn try_from(r: CertificateRepr) -> Result<Self> {
        match r {
            CertificateRepr::Polyconvex {
                a,
                q,
                b,
                sigma_spread,
            } => {
                q.check_dim(&b)?;
                Ok(Certificate::Polyconvex {
                    a,
                    q,
                    b,
                    sigma_spread,
                })
            }
            CertificateRepr::NotPolyconvex {
                u, v, value, sigma, ..
            } => {
                let witness = match (u, v, value) {
                    (Some(u), Some(v), Some(value)) => Some(Witness {
                        direction: RankOneDirection::new(u, v)?,
                        value,
                    }),
                    (None, None, None) => None,
                    _ => {
                        return Err(Error::Parse(
                            "u, v and value must be all present or all null".into(),
                        ))
                    }
                };
                Ok(Certificate::NotPolyconvex { witness, sigma })
            }
        }
    }
}

/// Decides polyconvexity of `dw` from the singular values of A.
pub fn certify(dw: &DoubleWell, opts: &CertifyOptions) -> Result<Certificate> {
    opts.validate()?;
    let n = dw.n();
    if dw.a().max_abs() == 0.0 {
        return Ok(Certificate::Polyconvex {
            a: 0.0,
            q: Matrix::identity(n),
            b: dw.b().clone(),
            sigma_spread: 0.0,
        });
    }
    let svd = dw.a().svd()?;
    let (largest, smallest) = (svd.sigma[0], svd.sigma[n - 1]);
    let spread = largest - smallest;
    if spread <= opts.tol * (1.0 + largest) {
        let a = svd.sigma.iter().sum::<f64>() / n as f64;
        Ok(Certificate::Polyconvex {
            a,
            q: svd.u.matmul(&svd.v.transpose()),
            b: dw.b().clone(),
            sigma_spread: spread,
        })
    } else {
        Ok(Certificate::NotPolyconvex {
            witness: violation_from_svd(dw, &svd).ok(),
            sigma: svd.sigma.iter().map(|s| 2.0 * s).collect(),
        })
    }
}

/// Rank-one direction of the largest singular value of A, with the (negative)
/// second derivative of g at Z = 0 along it.
pub fn find_violation(dw: &DoubleWell) -> Result<Witness> {
    violation_from_svd(dw, &dw.a().svd()?)
}

fn violation_from_svd(dw: &DoubleWell, svd: &SvdResult) -> Result<Witness> {
    let total: f64 = svd.sigma.iter().map(|s| s * s).sum();
    let top = svd.sigma[0];
    if top * top <= 0.5 * total {
        return Err(Error::NoViolationExists);
    }
    let direction = RankOneDirection::new(svd.u.column(0), svd.v.column(0))?;
    let value = dw.hessian_rank_one(&Matrix::zeros(dw.n()), &direction)?;
    if value >= 0.0 {
        return Err(Error::NoViolationExists);
    }
    Ok(Witness { direction, value })
}

/// Smallest rank-one second derivative found by [`sample_rank_one`].
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneReport {
    pub min_value: f64,
    pub z: Matrix,
    pub direction: RankOneDirection,
    /// Sample index of the minimum; `None` when the deterministic witness won.
    pub index: Option<usize>,
    /// Number of random samples evaluated.
    pub samples: usize,
}

/// Scale used to normalize rank-one sampling bounds: 1 + |A|⁴ + R⁴.
pub fn rank_one_scale(dw: &DoubleWell) -> f64 {
    1.0 + dw.a().frobenius_norm_sq().powi(2) + SAMPLE_RADIUS.powi(4)
}

fn sample_point(dw: &DoubleWell, seed: u64, index: usize) -> (Matrix, RankOneDirection) {
    use rand::Rng;
    let n = dw.n();
    let mut gen = rng::stream(seed, index as u64);
    let g = rng::gaussian_matrix(&mut gen, n);
    let radius = SAMPLE_RADIUS * gen.random::<f64>();
    let norm = g.frobenius_norm();
    let z = if norm > 0.0 { g.scale(radius / norm) } else { g };
    let u = rng::unit_vector(&mut gen, n);
    let v = rng::unit_vector(&mut gen, n);
    (z, RankOneDirection { u, v })
}

/// Evaluates the rank-one second derivative of g at `samples` seeded random
/// points (‖Z‖ ≤ 10, unit u, v) plus the deterministic witness when one
/// exists, and returns the minimum. Parallel but identical to a sequential
/// run: per-sample seeds come from the sample index and ties go to the lower
/// index.
pub fn sample_rank_one(dw: &DoubleWell, samples: usize, seed: u64) -> Result<RankOneReport> {
    if samples == 0 {
        return Err(Error::InvalidOptions("samples must be >= 1".into()));
    }
    let best = (0..samples)
        .into_par_iter()
        .map(|i| {
            let (z, d) = sample_point(dw, seed, i);
            let value = dw.hessian_rank_one(&z, &d).expect("dimensions match");
            (value, i)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX),
            |a, b| {
                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    let (z, direction) = sample_point(dw, seed, best.1);
    let mut report = RankOneReport {
        min_value: best.0,
        z,
        direction,
        index: Some(best.1),
        samples,
    };
    if let Ok(w) = find_violation(dw) {
        if w.value < report.min_value {
            report.min_value = w.value;
            report.z = Matrix::zeros(dw.n());
            report.direction = w.direction;
            report.index = None;
        }
    }
    Ok(report)
}
