use anyhow::{ensure, Result};
use polywell_core::certify::rank_one_scale;
use polywell_core::identities::run_suite;
use polywell_core::minimize::random_start;
use polywell_core::{
    certify as certify_wells, minimize_dirichlet_from, rng, sample_rank_one, uniqueness_probe, Certificate,
    CertifyOptions, Decomposition, DoubleWell, Matrix, Mesh2, SolveOptions, SolveResult, VectorField,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::input::{boundary_field, emit, field_path, read_wells, to_json, write_file};
use crate::{CertifyArgs, Common, IdentitiesArgs, MinimizeArgs, ProbeArgs, SampledArgs, SolveArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    NotPolyconvex = 2,
    NoConvergence = 3,
}

/// Tolerances for `decompose-check`.
const SPLIT_TOL: f64 = 1e-10;
const MIDPOINT_TOL: f64 = 1e-12;
/// A sampled second derivative below −RANK_ONE_TOL·scale counts as a violation.
const RANK_ONE_TOL: f64 = 1e-9;

struct Certified {
    wells: DoubleWell,
    cert: Certificate,
}

fn load_and_certify(common: &Common) -> Result<Certified> {
    let wells = read_wells(&common.wells)?;
    let opts = CertifyOptions { tol: common.tol };
    opts.validate()?;
    let cert = certify_wells(&wells, &opts)?;
    Ok(Certified { wells, cert })
}

/// Emits the certificate and returns `NotPolyconvex` when the wells fail.
fn require_polyconvex(c: &Certified, out: Option<&str>) -> Result<Option<Decomposition>> {
    if c.cert.is_polyconvex() {
        Ok(Some(Decomposition::build(&c.cert)?))
    } else {
        emit(out, &to_json(&c.cert)?)?;
        Ok(None)
    }
}

pub fn certify(args: &CertifyArgs) -> Result<Status> {
    let c = load_and_certify(&args.common)?;
    emit(args.common.out.as_deref(), &to_json(&c.cert)?)?;
    Ok(if c.cert.is_polyconvex() {
        Status::Ok
    } else {
        Status::NotPolyconvex
    })
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct DecomposeCheckReport {
    pub decomposition: Decomposition,
    pub seed: u64,
    pub samples: usize,
    pub max_split_residual: f64,
    pub max_midpoint_violation: f64,
    pub passed: bool,
}

/// Random point near B with radius uniform in [0, 3(1 + |B|)].
fn sample_near(gen: &mut impl Rng, b: &Matrix) -> Matrix {
    let g = rng::gaussian_matrix(gen, b.n());
    let radius = 3.0 * (1.0 + b.frobenius_norm()) * gen.random::<f64>();
    b + &g.scale(radius / g.frobenius_norm().max(f64::MIN_POSITIVE))
}

pub fn decompose_check(args: &SampledArgs) -> Result<Status> {
    ensure!(args.samples >= 1, "samples must be >= 1");
    let c = load_and_certify(&args.common)?;
    let out = args.common.out.as_deref();
    let Some(dec) = require_polyconvex(&c, out)? else {
        return Ok(Status::NotPolyconvex);
    };
    let (mut split, mut midpoint) = (0.0f64, 0.0f64);
    for i in 0..args.samples {
        let mut gen = rng::stream(args.seed, i as u64);
        let x = sample_near(&mut gen, dec.b());
        let y = sample_near(&mut gen, dec.b());
        let f = c.wells.eval(&x)?;
        let sum = dec.eval_convex(&x)? + dec.eval_null(&x)?;
        split = split.max((sum - f).abs() / f.abs().max(1.0));
        let (cx, cy) = (dec.eval_convex(&x)?, dec.eval_convex(&y)?);
        let mid = dec.eval_convex(&(&x + &y).scale(0.5))?;
        midpoint = midpoint.max((mid - 0.5 * (cx + cy)) / (1.0 + cx + cy));
    }
    let report = DecomposeCheckReport {
        decomposition: dec,
        seed: args.seed,
        samples: args.samples,
        max_split_residual: split,
        max_midpoint_violation: midpoint,
        passed: split <= SPLIT_TOL && midpoint <= MIDPOINT_TOL,
    };
    emit(out, &to_json(&report)?)?;
    Ok(Status::Ok)
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct HessianCheckReport {
    pub verdict: String,
    pub seed: u64,
    pub samples: usize,
    pub min_value: f64,
    pub scale: f64,
    #[serde(rename = "Z")]
    pub z: Matrix,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `None` when the minimum is the closed-form witness at Z = 0.
    pub index: Option<usize>,
    pub rank_one_convex_on_samples: bool,
}

pub fn hessian_check(args: &SampledArgs) -> Result<Status> {
    let c = load_and_certify(&args.common)?;
    let report = sample_rank_one(&c.wells, args.samples, args.seed)?;
    let scale = rank_one_scale(&c.wells);
    let convex = report.min_value >= -RANK_ONE_TOL * scale;
    let out = HessianCheckReport {
        verdict: if c.cert.is_polyconvex() {
            "polyconvex"
        } else {
            "not_polyconvex"
        }
        .into(),
        seed: args.seed,
        samples: report.samples,
        min_value: report.min_value,
        scale,
        z: report.z,
        u: report.direction.u,
        v: report.direction.v,
        index: report.index,
        rank_one_convex_on_samples: convex,
    };
    emit(args.common.out.as_deref(), &to_json(&out)?)?;
    Ok(if convex { Status::Ok } else { Status::NotPolyconvex })
}

pub fn identities(args: &IdentitiesArgs) -> Result<Status> {
    let report = run_suite(args.seed);
    emit(args.out.as_deref(), &to_json(&report)?)?;
    ensure!(report.all_passed, "identity suite failed");
    Ok(Status::Ok)
}

struct Problem {
    certified: Certified,
    mesh: Mesh2,
    y0: VectorField,
    opts: SolveOptions,
}

fn setup(args: &SolveArgs) -> Result<Problem> {
    ensure!(args.mesh_m >= 1, "mesh-m must be >= 1");
    let certified = load_and_certify(&args.common)?;
    ensure!(
        certified.wells.n() == 2,
        "wells must be 2x2 for the Dirichlet solver, got n = {}",
        certified.wells.n()
    );
    let mesh = Mesh2::unit_square(args.mesh_m)?;
    let y0 = boundary_field(
        &mesh,
        args.boundary_affine.as_deref(),
        args.boundary_csv.as_deref(),
    )?;
    let opts = SolveOptions {
        grad_tol: args.grad_tol,
        max_iters: args.max_iters,
        certify: CertifyOptions { tol: args.common.tol },
        ..SolveOptions::default()
    };
    opts.validate()?;
    Ok(Problem {
        certified,
        mesh,
        y0,
        opts,
    })
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct MinimizeReport {
    pub converged: bool,
    pub iterations: usize,
    pub energy_total: f64,
    pub energy_convex: f64,
    pub energy_null: f64,
    pub final_grad_norm: f64,
    pub mesh_m: usize,
    pub seed: u64,
    /// Path of the node_index,x,y,y1,y2 CSV of y*, when written.
    pub field_csv: Option<String>,
}

fn history_csv(r: &SolveResult) -> String {
    let mut s = String::from("iter,I_C,grad_norm,step\n");
    for h in &r.history {
        s.push_str(&format!(
            "{},{},{},{}\n",
            h.iter, h.energy_convex, h.grad_norm, h.step
        ));
    }
    s
}

pub fn minimize(args: &MinimizeArgs) -> Result<Status> {
    let p = setup(&args.solve)?;
    let out = args.solve.common.out.as_deref();
    if require_polyconvex(&p.certified, out)?.is_none() {
        return Ok(Status::NotPolyconvex);
    }
    let initial = if args.random_start {
        random_start(&p.mesh, &p.y0, args.solve.seed, 0)
    } else {
        p.y0.clone()
    };
    let r = minimize_dirichlet_from(&p.certified.wells, &p.mesh, &p.y0, &initial, &p.opts)?;
    let field_csv = match out {
        Some(path) => {
            let field = field_path(path);
            write_file(&field, &p.mesh.field_csv(&r.y_star)?)?;
            Some(field.to_string_lossy().into_owned())
        }
        None => None,
    };
    if let Some(path) = &args.history {
        write_file(std::path::Path::new(path), &history_csv(&r))?;
    }
    let report = MinimizeReport {
        converged: r.converged,
        iterations: r.iterations,
        energy_total: r.energy_total,
        energy_convex: r.energy_convex,
        energy_null: r.energy_null,
        final_grad_norm: r.final_grad_norm,
        mesh_m: args.solve.mesh_m,
        seed: args.solve.seed,
        field_csv,
    };
    emit(out, &to_json(&report)?)?;
    Ok(if r.converged {
        Status::Ok
    } else {
        Status::NoConvergence
    })
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ProbeReport {
    pub starts: usize,
    pub seed: u64,
    pub mesh_m: usize,
    pub max_pairwise_dist: f64,
    pub max_energy_spread: f64,
    pub energies: Vec<f64>,
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
}

pub fn probe_uniqueness(args: &ProbeArgs) -> Result<Status> {
    let p = setup(&args.solve)?;
    let out = args.solve.common.out.as_deref();
    if require_polyconvex(&p.certified, out)?.is_none() {
        return Ok(Status::NotPolyconvex);
    }
    let probe = uniqueness_probe(
        &p.certified.wells,
        &p.mesh,
        &p.y0,
        &p.opts,
        args.starts,
        args.solve.seed,
    )?;
    let report = ProbeReport {
        starts: args.starts,
        seed: args.solve.seed,
        mesh_m: args.solve.mesh_m,
        max_pairwise_dist: probe.max_pairwise_dist,
        max_energy_spread: probe.max_energy_spread,
        energies: probe.results.iter().map(|r| r.energy_total).collect(),
        iterations: probe.results.iter().map(|r| r.iterations).collect(),
        converged: probe.results.iter().map(|r| r.converged).collect(),
    };
    emit(out, &to_json(&report)?)?;
    let all = report.converged.iter().all(|&c| c);
    Ok(if all { Status::Ok } else { Status::NoConvergence })
}
