//! Batch front end: `life`, `assess`, `sample` and `optimize` subcommands.

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::elasticity::surface_field;
use crate::error::{Error, Result};
use crate::geometry::{check_admissible, mesh::ALL_TAGS, surface_quadrature, FaceTag};
use crate::io;
use crate::life::Life;
use crate::material::{en_curve, life_chain};
use crate::reliability::{ks_test, weibull_cdf, HistorySampler, ReliabilityReport};
use crate::shapeopt::{convergence_diagnostic, evaluate_cost, optimize, Evaluation};

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "fatigue-shape",
    version,
    about = "Fatigue reliability and shape optimization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Strain-life curve and the life chain at a probe stress.
    Life(CommonArgs),
    /// One state solve with its reliability report.
    Assess(CommonArgs),
    /// Monte-Carlo crack histories against the Weibull law.
    Sample(CommonArgs),
    /// Shape optimization by pattern search.
    Optimize(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Life(a) | Command::Assess(a) | Command::Sample(a) | Command::Optimize(a) => a,
        }
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    let args = cli.command.args();
    if let Some(n) = args.threads {
        // a second call in the same process keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    fs::create_dir_all(&args.out)?;
    let out = args.out.as_path();
    match &cli.command {
        Command::Life(_) => cmd_life(&cfg, out),
        Command::Assess(_) => cmd_assess(&cfg, out),
        Command::Sample(_) => cmd_sample(&cfg, out),
        Command::Optimize(_) => cmd_optimize(&cfg, out),
    }
}

/// JSON number, or `"inf"`/`"-inf"` for infinities.
fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn life_value(l: Life) -> Value {
    num(l.cycles())
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    io::write_string(path, &(serde_json::to_string_pretty(v)? + "\n"))
}

fn echo_config(cfg: &RunConfig, out: &Path) -> Result<()> {
    io::write_string(&out.join("config.json"), &(cfg.to_json() + "\n"))
}

fn reliability_entries(r: &ReliabilityReport, map: &mut Map<String, Value>) {
    map.insert("H".into(), num(r.hazard));
    map.insert("eta".into(), num(r.eta));
    map.insert("pof".into(), num(r.pof));
    map.insert("survival".into(), num(r.survival));
    map.insert("t_det".into(), life_value(r.t_det));
    map.insert("m".into(), num(r.m));
    map.insert("t_star".into(), num(r.t_star));
}

fn evaluation_entries(ev: &Evaluation, map: &mut Map<String, Value>) {
    reliability_entries(&ev.report, map);
    map.insert("pof_identity_error".into(), num(ev.report.identity_error()));
    map.insert("n_elements".into(), json!(ev.mesh.num_elements()));
    map.insert("n_nodes".into(), json!(ev.mesh.num_nodes()));
    map.insert(
        "n_dirichlet_faces".into(),
        json!(ev.mesh.face_count(FaceTag::Dirichlet)),
    );
    map.insert("n_neumann_faces".into(), json!(ev.mesh.face_count(FaceTag::Neumann)));
    map.insert("n_designed_faces".into(), json!(ev.mesh.face_count(FaceTag::Designed)));
    map.insert("mesh_volume".into(), num(ev.mesh.volume()));
    map.insert("n_surface_points".into(), json!(ev.surface.len()));
    map.insert("cg_iterations".into(), json!(ev.solve_stats.iterations));
    map.insert("cg_rel_residual".into(), num(ev.solve_stats.rel_residual));
    map.insert("volume_violation".into(), num(ev.admissibility.volume_violation()));
}

/// Full-boundary VTK output of an evaluated design.
fn write_fields(ev: &Evaluation, cfg: &config::Problem, out: &Path) -> Result<()> {
    io::write_string(&out.join("mesh.vtk"), &io::mesh_vtk(&ev.mesh, Some(&ev.displacement)))?;
    let u = crate::elasticity::DisplacementField {
        mesh: &ev.mesh,
        values: ev.displacement.clone(),
        stats: ev.solve_stats,
    };
    let all = surface_field(&u, &surface_quadrature(&ev.mesh, &ALL_TAGS), &cfg.ctx.material)?;
    io::write_string(&out.join("surface.vtk"), &io::surface_vtk(&ev.mesh, &all))
}

pub fn cmd_life(cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = cfg.material()?;
    cfg.validate_life()?;
    echo_config(cfg, out)?;
    let l = &cfg.life;
    let table = en_curve(&p, l.n_points, l.n_lo, l.n_hi)?;
    io::write_en_curve(&out.join("en_curve.csv"), &table)?;
    let mut map = Map::new();
    map.insert("youngs_modulus".into(), num(p.youngs_modulus()));
    map.insert("n_points".into(), json!(table.len()));
    if let Some(s) = l.probe_sigma_v {
        let c = life_chain(s, &p)?;
        map.insert("probe_sigma_v".into(), num(c.sigma_v));
        map.insert("probe_sigma_a".into(), num(c.sigma_a));
        map.insert("probe_sigma_elpl".into(), num(c.sigma_elpl));
        map.insert("probe_eps_a".into(), num(c.eps_a));
        map.insert("probe_life".into(), life_value(c.life));
    }
    write_json(&out.join("report.json"), &Value::Object(map))
}

fn assess_problem(cfg: &RunConfig) -> Result<(config::Problem, Evaluation)> {
    let problem = cfg.problem()?;
    let field = problem.initial_field()?;
    let ev = evaluate_cost(&field, &cfg.cost()?, &problem.ctx)?;
    Ok((problem, ev))
}

pub fn cmd_assess(cfg: &RunConfig, out: &Path) -> Result<()> {
    let (problem, ev) = assess_problem(cfg)?;
    echo_config(cfg, out)?;
    let mut map = Map::new();
    map.insert("J".into(), num(ev.j));
    evaluation_entries(&ev, &mut map);
    write_json(&out.join("report.json"), &Value::Object(map))?;
    io::write_design_field(&out.join("design.csv"), &problem.initial_field()?)?;
    write_fields(&ev, &problem, out)
}

pub fn cmd_sample(cfg: &RunConfig, out: &Path) -> Result<()> {
    let (_problem, ev) = assess_problem(cfg)?;
    echo_config(cfg, out)?;
    let r = &ev.report;
    let t_max = match cfg.reliability.t_max {
        Some(t) => t,
        None if r.eta.is_finite() => 1.5 * r.eta,
        None => r.t_star.max(1.0),
    };
    let sampler = HistorySampler::new(&ev.surface, r.m, t_max)?;
    let n = cfg.reliability.histories;
    // history i uses seed + i
    let seeds: Vec<u64> = (0..n as u64).map(|i| cfg.seed.wrapping_add(i)).collect();
    let histories: Vec<_> = seeds.iter().map(|&s| sampler.sample(s)).collect();
    io::write_histories(&out.join("histories.csv"), &histories)?;
    let firsts: Vec<Life> = histories.iter().map(crate::reliability::first_failure).collect();
    io::write_csv(
        &out.join("first_failures.csv"),
        &["history", "seed", "t_first"],
        firsts
            .iter()
            .zip(&seeds)
            .enumerate()
            .map(|(i, (t, s))| [i.to_string(), s.to_string(), io::fmt_f64(t.cycles())]),
    )?;
    let finite: Vec<f64> = firsts.iter().filter(|t| t.is_finite()).map(|t| t.cycles()).collect();
    let ks = ks_test(&finite, |t| weibull_cdf(t, r.m, r.eta));
    let total: usize = histories.iter().map(|h| h.events.len()).sum();
    let mut map = Map::new();
    reliability_entries(r, &mut map);
    map.insert("t_max".into(), num(t_max));
    map.insert("seed".into(), json!(cfg.seed));
    map.insert("histories".into(), json!(n));
    map.insert("expected_count".into(), num(sampler.mean_count()));
    map.insert(
        "mean_count".into(),
        if n == 0 {
            Value::Null
        } else {
            num(total as f64 / n as f64)
        },
    );
    map.insert("n_finite_first_failures".into(), json!(finite.len()));
    map.insert("ks_statistic".into(), num(ks.statistic));
    map.insert("ks_p_value".into(), num(ks.p_value));
    write_json(&out.join("report.json"), &Value::Object(map))
}

pub fn cmd_optimize(cfg: &RunConfig, out: &Path) -> Result<()> {
    let problem = cfg.problem()?;
    let options = cfg.optimizer_options()?;
    let spec = cfg.cost()?;
    let initial = problem.initial_coefficients()?;
    echo_config(cfg, out)?;
    let state = match optimize(&initial, problem.basis.clone(), &spec, &problem.ctx, &options) {
        Ok(s) => s,
        Err(e @ Error::Constraint(_)) => {
            let c = problem
                .basis
                .project_coefficients(&initial, problem.ctx.constraints.volume);
            let field = problem.basis.field(&c)?;
            let adm = check_admissible(
                &field,
                &problem.ctx.constraints,
                &problem.ctx.basic,
                problem.ctx.admissibility_tol,
            )?;
            write_json(&out.join("admissibility.json"), &serde_json::to_value(&adm)?)?;
            return Err(e);
        }
        Err(e) => return Err(e),
    };
    io::write_csv(
        &out.join("trajectory.csv"),
        &["iter", "J", "pof", "t_det", "volume_violation", "step"],
        state.trajectory.iter().map(|it| {
            [
                it.iter.to_string(),
                io::fmt_f64(it.j),
                io::fmt_f64(it.pof()),
                io::fmt_f64(it.t_det().cycles()),
                io::fmt_f64(it.volume_violation()),
                io::fmt_f64(it.step),
            ]
        }),
    )?;
    let designs = out.join("designs");
    fs::create_dir_all(&designs)?;
    for it in &state.trajectory {
        io::write_design_field(&designs.join(format!("iter_{:04}.csv", it.iter)), &it.field)?;
    }
    let first = &state.trajectory[0];
    let last = state.trajectory.last().expect("nonempty trajectory");
    io::write_design_field(&out.join("design_initial.csv"), &first.field)?;
    io::write_design_field(&out.join("design_final.csv"), &last.field)?;
    let k = problem.ctx.constraints.order;
    let diag = convergence_diagnostic(&state, k)?;
    io::write_csv(
        &out.join("convergence.csv"),
        &["iter", "ck_distance", "delta_J"],
        diag.iter()
            .map(|r| [r.iter.to_string(), io::fmt_f64(r.ck_distance), io::fmt_f64(r.delta_j)]),
    )?;
    write_fields(&state.final_evaluation, &problem, out)?;
    let mut map = Map::new();
    map.insert("J".into(), num(last.j));
    map.insert("J_initial".into(), num(first.j));
    map.insert("pof_initial".into(), num(first.pof()));
    map.insert("accepted".into(), json!(state.trajectory.len() - 1));
    map.insert("sweeps".into(), json!(state.sweeps));
    map.insert("evaluations".into(), json!(state.evaluations.len()));
    map.insert("rejected_proposals".into(), json!(state.rejected));
    map.insert("final_step".into(), num(state.final_step));
    map.insert("stop".into(), serde_json::to_value(state.stop)?);
    evaluation_entries(&state.final_evaluation, &mut map);
    write_json(&out.join("report.json"), &Value::Object(map))
}
