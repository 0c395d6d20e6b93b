//! Discrete Dirichlet problem for a polyconvex double well on a 2D mesh.
//!
//! The total energy splits as I = I_C + I_L where I_L depends only on the
//! boundary values. The solver therefore runs gradient descent with Armijo
//! backtracking on I_C over the interior nodal values, keeping the boundary
//! nodes pinned, and evaluates I_L once at the end.
//!
//! Line-search decisions use energy increments from
//! [`Decomposition::convex_increment`], which stay accurate when the
//! decrease is many orders of magnitude below I_C itself.

use rand::Rng;
use rayon::prelude::*;

use crate::certify::{certify, CertifyOptions};
use crate::decompose::Decomposition;
use crate::energy::DoubleWell;
use crate::error::{Error, Result};
use crate::fem::{Mesh2, VectorField};
use crate::rng;

/// Backtracking gives up once the trial step falls below this.
const MIN_STEP: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Stop when the max-norm of the interior gradient is at most
    /// `grad_tol · (1 + interior node count)`.
    pub grad_tol: f64,
    pub max_iters: usize,
    pub armijo_c: f64,
    pub backtrack_ratio: f64,
    pub initial_step: f64,
    /// Certification tolerance used before solving.
    pub certify: CertifyOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            grad_tol: 1e-9,
            max_iters: 100_000,
            armijo_c: 1e-4,
            backtrack_ratio: 0.5,
            initial_step: 1.0,
            certify: CertifyOptions::default(),
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidOptions(format!("{name} must be positive, got {v}")))
            }
        };
        positive("grad_tol", self.grad_tol)?;
        positive("armijo_c", self.armijo_c)?;
        positive("backtrack_ratio", self.backtrack_ratio)?;
        positive("initial_step", self.initial_step)?;
        if self.armijo_c >= 1.0 {
            return Err(Error::InvalidOptions("armijo_c must be < 1".into()));
        }
        if self.backtrack_ratio >= 1.0 {
            return Err(Error::InvalidOptions("backtrack_ratio must be < 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidOptions("max_iters must be >= 1".into()));
        }
        self.certify.validate()
    }
}

/// One accepted gradient step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry {
    pub iter: usize,
    /// I_C after the step, accumulated from exact increments.
    pub energy_convex: f64,
    /// Max-norm of the interior gradient before the step.
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub y_star: VectorField,
    /// I(y*) = ∫ f(∇y*).
    pub energy_total: f64,
    pub energy_convex: f64,
    pub energy_null: f64,
    pub iterations: usize,
    pub final_grad_norm: f64,
    /// `false` when the iteration cap was hit or the line search stalled;
    /// `y_star` is then the last iterate.
    pub converged: bool,
    pub history: Vec<HistoryEntry>,
}

/// I, I_C and I_L of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub total: f64,
    pub convex: f64,
    pub null: f64,
}

fn decomposition_for(dw: &DoubleWell, opts: &CertifyOptions) -> Result<Decomposition> {
    if dw.n() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: dw.n(),
        });
    }
    Decomposition::build(&certify(dw, opts)?)
}

fn report_with(dw: &DoubleWell, dec: &Decomposition, mesh: &Mesh2, y: &VectorField) -> Result<EnergyReport> {
    Ok(EnergyReport {
        total: mesh.integrate(y, |g| dw.eval(g))?,
        convex: mesh.integrate(y, |g| dec.eval_convex(g))?,
        null: mesh.integrate(y, |g| dec.eval_null(g))?,
    })
}

/// I(y), I_C(y) and I_L(y) for a certified polyconvex double well.
pub fn energy_report(dw: &DoubleWell, mesh: &Mesh2, y: &VectorField) -> Result<EnergyReport> {
    let dec = decomposition_for(dw, &CertifyOptions::default())?;
    report_with(dw, &dec, mesh, y)
}

/// Minimizes I over fields equal to `y0` on the boundary, starting from the
/// interior values of `y0`.
pub fn minimize_dirichlet(
    dw: &DoubleWell,
    mesh: &Mesh2,
    y0: &VectorField,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    minimize_dirichlet_from(dw, mesh, y0, y0, opts)
}

/// As [`minimize_dirichlet`], starting from the interior values of `initial`.
pub fn minimize_dirichlet_from(
    dw: &DoubleWell,
    mesh: &Mesh2,
    y0: &VectorField,
    initial: &VectorField,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    opts.validate()?;
    let dec = decomposition_for(dw, &opts.certify)?;
    for field in [y0, initial] {
        if field.len() != mesh.num_nodes() {
            return Err(Error::FieldLength {
                expected: mesh.num_nodes(),
                got: field.len(),
            });
        }
    }
    let interior = mesh.interior();
    let mut y = y0.clone();
    for &v in &interior {
        y.values[v] = initial.values[v];
    }
    let mut result = descend(&dec, mesh, &interior, y, opts)?;
    result.energy_total = mesh.integrate(&result.y_star, |g| dw.eval(g))?;
    Ok(result)
}

fn descend(
    dec: &Decomposition,
    mesh: &Mesh2,
    interior: &[usize],
    mut y: VectorField,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    let threshold = opts.grad_tol * (1.0 + interior.len() as f64);
    let mut grad = vec![0.0; 2 * mesh.num_nodes()];
    let mut energy =
        mesh.integrate_with_gradient(&y, |g| dec.eval_convex(g), |g| dec.convex_gradient(g), &mut grad)?;
    let energy_null = mesh.integrate(&y, |g| dec.eval_null(g))?;
    let mut history = Vec::new();
    let mut direction = VectorField::zeros(mesh.num_nodes());
    let mut converged = false;
    let mut iterations = 0;
    let mut grad_norm;

    loop {
        grad_norm = interior
            .iter()
            .flat_map(|&v| [grad[2 * v].abs(), grad[2 * v + 1].abs()])
            .fold(0.0, f64::max);
        if grad_norm <= threshold {
            converged = true;
            break;
        }
        if iterations >= opts.max_iters {
            break;
        }

        let mut slope = 0.0;
        for &v in interior {
            direction.values[v] = [-grad[2 * v], -grad[2 * v + 1]];
            slope += grad[2 * v].powi(2) + grad[2 * v + 1].powi(2);
        }
        let current: Vec<_> = (0..mesh.triangles().len())
            .map(|t| mesh.triangle_gradient(t, &y))
            .collect();
        let shifts: Vec<_> = (0..mesh.triangles().len())
            .map(|t| mesh.triangle_gradient(t, &direction))
            .collect();

        let mut step = opts.initial_step;
        let accepted = loop {
            let mut change = 0.0;
            for (t, (g, d)) in current.iter().zip(&shifts).enumerate() {
                change += mesh.area(t) * dec.convex_increment(g, &d.scale(step))?;
            }
            if change <= -opts.armijo_c * step * slope {
                break Some(change);
            }
            step *= opts.backtrack_ratio;
            if step < MIN_STEP {
                break None;
            }
        };
        let Some(change) = accepted else { break };

        for &v in interior {
            let d = direction.values[v];
            y.values[v] = [y.values[v][0] + step * d[0], y.values[v][1] + step * d[1]];
        }
        energy += change;
        iterations += 1;
        history.push(HistoryEntry {
            iter: iterations,
            energy_convex: energy,
            grad_norm,
            step,
        });
        mesh.integrate_with_gradient(&y, |g| dec.eval_convex(g), |g| dec.convex_gradient(g), &mut grad)?;
    }

    let energy_convex = mesh.integrate(&y, |g| dec.eval_convex(g))?;
    Ok(SolveResult {
        y_star: y,
        energy_total: energy_convex + energy_null,
        energy_convex,
        energy_null,
        iterations,
        final_grad_norm: grad_norm,
        converged,
        history,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    /// max over pairs of ‖y*ᵢ − y*ⱼ‖∞.
    pub max_pairwise_dist: f64,
    /// max over pairs of |Iᵢ − Iⱼ| / (1 + max |I|).
    pub max_energy_spread: f64,
    pub results: Vec<SolveResult>,
}

/// Random interior start number `start`: y0 plus a uniform perturbation in
/// [−½, ½]² at every interior node.
pub fn random_start(mesh: &Mesh2, y0: &VectorField, seed: u64, start: usize) -> VectorField {
    let mut gen = rng::stream(seed, start as u64);
    let mut y = y0.clone();
    for v in mesh.interior() {
        y.values[v][0] += gen.random_range(-0.5..0.5);
        y.values[v][1] += gen.random_range(-0.5..0.5);
    }
    y
}

/// Solves from `starts` seeded random interior initializations and reports
/// how far apart the minimizers end up.
pub fn uniqueness_probe(
    dw: &DoubleWell,
    mesh: &Mesh2,
    y0: &VectorField,
    opts: &SolveOptions,
    starts: usize,
    seed: u64,
) -> Result<ProbeReport> {
    if starts < 2 {
        return Err(Error::InvalidOptions(
            "uniqueness probe needs at least 2 starts".into(),
        ));
    }
    let results = (0..starts)
        .into_par_iter()
        .map(|k| minimize_dirichlet_from(dw, mesh, y0, &random_start(mesh, y0, seed, k), opts))
        .collect::<Result<Vec<_>>>()?;
    let scale = 1.0 + results.iter().map(|r| r.energy_total.abs()).fold(0.0, f64::max);
    let mut max_pairwise_dist: f64 = 0.0;
    let mut max_energy_spread: f64 = 0.0;
    for i in 0..results.len() {
        for j in (i + 1)..results.len() {
            max_pairwise_dist = max_pairwise_dist.max(results[i].y_star.max_abs_diff(&results[j].y_star));
            max_energy_spread =
                max_energy_spread.max((results[i].energy_total - results[j].energy_total).abs() / scale);
        }
    }
    Ok(ProbeReport {
        max_pairwise_dist,
        max_energy_spread,
        results,
    })
}
