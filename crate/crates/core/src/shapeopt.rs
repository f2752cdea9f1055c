//! Cost functionals over shapes and a derivative-free optimizer on a smooth
//! bump basis.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elasticity::{self, assemble, solve, surface_field, LoadCase, SolveOptions, SolveStats, SurfaceField};
use crate::error::{Error, Result};
use crate::geometry::{
    build_mesh, check_admissible, ck_distance, project_volume, surface_quadrature, AdmissibilityReport, BasicDesign,
    DesignConstraints, DesignField, DesignGrid, Mesh,
};
use crate::life::Life;
use crate::material::MaterialParams;
use crate::reliability::{HazardDomain, ReliabilityReport};

/// Tensor product of overlapping 1D bumps `((1 + cos πs)/2)^(k+1)` placed evenly inside
/// `[a + k·dx, b − k·dx]`, so every basis function and its differences up to
/// order `k` vanish on the boundary stencils.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpBasis {
    pub grid: DesignGrid,
    pub n1: usize,
    pub n2: usize,
    pub order: usize,
    alpha_min: f64,
    /// Sampled basis functions, `n1·n2` vectors of grid length.
    samples: Vec<Vec<f64>>,
    /// Trapezoid integral of each basis function.
    integrals: Vec<f64>,
}

fn bump_1d(len: usize, origin: f64, step: f64, count: usize, k: usize) -> Result<Vec<Vec<f64>>> {
    let lo = origin + k as f64 * step;
    let hi = origin + (len - 1 - k) as f64 * step;
    if !(hi > lo) {
        return Err(Error::Config(format!(
            "design grid with {len} nodes leaves no interior support for order-{k} bumps"
        )));
    }
    // centers `spacing` apart, half-width two spacings, outermost bumps touching the ends
    let spacing = (hi - lo) / (count + 3) as f64;
    let half_width = 2.0 * spacing;
    Ok((0..count)
        .map(|i| {
            let c = lo + half_width + i as f64 * spacing;
            (0..len)
                .map(|n| {
                    let s = (origin + n as f64 * step - c) / half_width;
                    if s.abs() >= 1.0 {
                        0.0
                    } else {
                        (0.5 * (1.0 + (std::f64::consts::PI * s).cos())).powi(k as i32 + 1)
                    }
                })
                .collect()
        })
        .collect())
}

impl BumpBasis {
    pub fn new(grid: DesignGrid, n1: usize, n2: usize, order: usize, alpha_min: f64) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::Config("basis needs at least one function per axis".into()));
        }
        let bx = bump_1d(grid.n1, grid.origin[0], grid.dx, n1, order)?;
        let by = bump_1d(grid.n2, grid.origin[1], grid.dy, n2, order)?;
        let mut samples = Vec::with_capacity(n1 * n2);
        let mut integrals = Vec::with_capacity(n1 * n2);
        for fx in &bx {
            for fy in &by {
                let mut v = vec![0.0; grid.len()];
                let mut integral = 0.0;
                for i in 0..grid.n1 {
                    for j in 0..grid.n2 {
                        let val = fx[i] * fy[j];
                        v[grid.index(i, j)] = val;
                        integral += grid.trapezoid_weight(i, j) * val;
                    }
                }
                samples.push(v);
                integrals.push(integral);
            }
        }
        Ok(BumpBasis {
            grid,
            n1,
            n2,
            order,
            alpha_min,
            samples,
            integrals,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `α = α_min + Σ c_i φ_i` on the grid.
    pub fn field(&self, coefficients: &[f64]) -> Result<DesignField> {
        if coefficients.len() != self.len() {
            return Err(Error::Config(format!(
                "expected {} basis coefficients, got {}",
                self.len(),
                coefficients.len()
            )));
        }
        let mut values = vec![self.alpha_min; self.grid.len()];
        for (c, phi) in coefficients.iter().zip(&self.samples) {
            if *c != 0.0 {
                for (v, p) in values.iter_mut().zip(phi) {
                    *v += c * p;
                }
            }
        }
        Ok(DesignField {
            grid: self.grid,
            values,
        })
    }

    /// Trapezoid volume of the field generated by `coefficients`.
    pub fn volume(&self, coefficients: &[f64]) -> f64 {
        let base =
            self.alpha_min * (self.grid.dx * (self.grid.n1 - 1) as f64) * (self.grid.dy * (self.grid.n2 - 1) as f64);
        base + coefficients
            .iter()
            .zip(&self.integrals)
            .map(|(c, w)| c * w)
            .sum::<f64>()
    }

    /// Orthogonal projection of `coefficients` onto the hyperplane `volume = target`.
    pub fn project_coefficients(&self, coefficients: &[f64], target: f64) -> Vec<f64> {
        let w2: f64 = self.integrals.iter().map(|w| w * w).sum();
        let s = (target - self.volume(coefficients)) / w2;
        coefficients
            .iter()
            .zip(&self.integrals)
            .map(|(c, w)| c + s * w)
            .collect()
    }
}

/// Pointwise state passed to custom integrands.
#[derive(Clone, Copy, Debug)]
pub struct LocalState {
    pub x: [f64; 3],
    pub u: [f64; 3],
    pub grad: Matrix3<f64>,
}

pub type Integrand = Arc<dyn Fn(&LocalState) -> f64 + Send + Sync>;

/// Objective of the shape problem.
#[derive(Clone)]
pub enum CostSpec {
    /// Cumulative hazard `H(t*)`, an argmin-equivalent surrogate of the failure probability.
    Pof { t_star: f64 },
    /// `−T_det`.
    DetLife,
    /// `Σ_cells |cell| F_vol + Σ_faces w F_sur`, first-order integrands only.
    CustomLocal { f_vol: Integrand, f_sur: Integrand },
}

impl fmt::Debug for CostSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostSpec::Pof { t_star } => f.debug_struct("Pof").field("t_star", t_star).finish(),
            CostSpec::DetLife => f.write_str("DetLife"),
            CostSpec::CustomLocal { .. } => f.write_str("CustomLocal(..)"),
        }
    }
}

/// Everything besides `α` that a cost evaluation depends on.
#[derive(Clone, Debug)]
pub struct EvalContext {
    pub basic: BasicDesign,
    pub constraints: DesignConstraints,
    pub material: MaterialParams,
    pub load: LoadCase,
    pub h: f64,
    pub solver: SolveOptions,
    pub hazard_domain: HazardDomain,
    /// Relative tolerance of the admissibility surrogate.
    pub admissibility_tol: f64,
}

/// Result of one pipeline run.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub j: f64,
    pub report: ReliabilityReport,
    pub surface: SurfaceField,
    pub mesh: Mesh,
    pub displacement: Vec<[f64; 3]>,
    pub solve_stats: SolveStats,
    pub admissibility: AdmissibilityReport,
}

/// Builds the mesh, solves the state problem and evaluates `J`.
pub fn evaluate_cost(alpha: &DesignField, spec: &CostSpec, ctx: &EvalContext) -> Result<Evaluation> {
    let admissibility = check_admissible(alpha, &ctx.constraints, &ctx.basic, ctx.admissibility_tol)?;
    if !admissibility.pass {
        return Err(Error::Constraint(format!(
            "design not admissible: {}",
            admissibility.failures().join(", ")
        )));
    }
    let mesh = build_mesh(&ctx.basic, alpha, ctx.h)?;
    let system = assemble(&mesh, &ctx.material, &ctx.load)?;
    let u = solve(&mesh, &system, &ctx.solver)?;
    let quad = surface_quadrature(&mesh, ctx.hazard_domain.tags());
    let surface = surface_field(&u, &quad, &ctx.material)?;
    let m = ctx.material.weibull_shape();
    let t_star = match spec {
        CostSpec::Pof { t_star } => *t_star,
        _ => ctx.load.t_star,
    };
    let report = ReliabilityReport::new(&surface, m, t_star)?;
    let j = match spec {
        CostSpec::Pof { .. } => report.hazard,
        CostSpec::DetLife => -report.t_det.cycles(),
        CostSpec::CustomLocal { f_vol, f_sur } => {
            let vol = mesh.cell_volume();
            let cells: f64 = (0..mesh.num_elements())
                .map(|e| {
                    let state = LocalState {
                        x: mesh.element_center(e),
                        u: u.value_at(e, [0.0; 3]),
                        grad: elasticity::grad_at(&u, e, [0.0; 3]),
                    };
                    vol * f_vol(&state)
                })
                .sum();
            let faces: f64 = surface
                .points
                .iter()
                .map(|p| {
                    p.quad.weight
                        * f_sur(&LocalState {
                            x: p.quad.point,
                            u: p.displacement,
                            grad: p.grad,
                        })
                })
                .sum();
            cells + faces
        }
    };
    let solve_stats = u.stats;
    let displacement = u.values;
    Ok(Evaluation {
        j,
        report,
        surface,
        mesh,
        displacement,
        solve_stats,
        admissibility,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerOptions {
    /// Initial coefficient step.
    pub step: f64,
    #[serde(default = "default_shrink")]
    pub shrink: f64,
    /// Stop once the step falls below this value.
    pub min_step: f64,
    pub max_iterations: usize,
}

fn default_shrink() -> f64 {
    0.5
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) {
            return Err(Error::param("step", "must be > 0"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::param("shrink", "must lie in (0, 1)"));
        }
        if !(self.min_step > 0.0) {
            return Err(Error::param("min_step", "must be > 0"));
        }
        Ok(())
    }
}

/// An accepted design.
#[derive(Clone, Debug)]
pub struct Iterate {
    pub iter: usize,
    pub coefficients: Vec<f64>,
    pub field: DesignField,
    pub j: f64,
    pub report: ReliabilityReport,
    pub admissibility: AdmissibilityReport,
    /// Step size in effect when the iterate was accepted.
    pub step: f64,
}

impl Iterate {
    pub fn pof(&self) -> f64 {
        self.report.pof
    }

    pub fn t_det(&self) -> Life {
        self.report.t_det
    }

    pub fn volume_violation(&self) -> f64 {
        self.admissibility.volume_violation()
    }
}

/// One cost evaluation made during the search, feasible or not.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluatedDesign {
    pub sweep: usize,
    pub j: f64,
    pub hazard: f64,
    pub pof: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIterations,
    StepBelowThreshold,
}

#[derive(Clone, Debug)]
pub struct OptimizerState {
    pub basis: BumpBasis,
    pub options: OptimizerOptions,
    /// Accepted iterates, starting with the projected initial design.
    pub trajectory: Vec<Iterate>,
    pub evaluations: Vec<EvaluatedDesign>,
    /// Proposals rejected by the admissibility check.
    pub rejected: usize,
    pub sweeps: usize,
    pub final_step: f64,
    pub stop: StopReason,
    /// Full evaluation of the last accepted design.
    pub final_evaluation: Evaluation,
}

/// Maps coefficients to an admissible, volume-projected grid field, or `None`
/// when the projected design leaves the admissible set.
fn realize(
    coefficients: &[f64],
    basis: &BumpBasis,
    ctx: &EvalContext,
) -> Result<Option<(Vec<f64>, DesignField, AdmissibilityReport)>> {
    let c = basis.project_coefficients(coefficients, ctx.constraints.volume);
    let field = basis.field(&c)?;
    let field = match project_volume(&field, &ctx.constraints, &ctx.basic) {
        Ok(p) => p.field,
        Err(Error::Constraint(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let adm = check_admissible(&field, &ctx.constraints, &ctx.basic, ctx.admissibility_tol)?;
    Ok(adm.pass.then_some((c, field, adm)))
}

/// Coordinate pattern search with a complete poll.
///
/// Each sweep proposes `c ± step·e_i` for every coefficient in index order
/// (plus before minus), projects onto the volume constraint and discards
/// inadmissible proposals. Feasible proposals are evaluated concurrently; the
/// one with the smallest `J` below the current value is accepted, ties going
/// to the earliest proposal. A sweep without improvement shrinks the step.
pub fn optimize(
    initial: &[f64],
    basis: BumpBasis,
    spec: &CostSpec,
    ctx: &EvalContext,
    options: &OptimizerOptions,
) -> Result<OptimizerState> {
    options.validate()?;
    let Some((c0, f0, adm0)) = realize(initial, &basis, ctx)? else {
        let c = basis.project_coefficients(initial, ctx.constraints.volume);
        let field = basis.field(&c)?;
        let adm = check_admissible(&field, &ctx.constraints, &ctx.basic, ctx.admissibility_tol)?;
        return Err(Error::Constraint(format!(
            "initial design not admissible after volume projection: {}",
            adm.failures().join(", ")
        )));
    };
    let eval0 = evaluate_cost(&f0, spec, ctx)?;
    let mut evaluations = vec![EvaluatedDesign {
        sweep: 0,
        j: eval0.j,
        hazard: eval0.report.hazard,
        pof: eval0.report.pof,
    }];
    let mut trajectory = vec![Iterate {
        iter: 0,
        coefficients: c0,
        field: f0,
        j: eval0.j,
        report: eval0.report.clone(),
        admissibility: adm0,
        step: options.step,
    }];
    let mut current_eval = eval0;
    let mut step = options.step;
    let mut rejected = 0;
    let mut sweeps = 0;
    let stop = loop {
        if sweeps >= options.max_iterations {
            break StopReason::MaxIterations;
        }
        if step < options.min_step {
            break StopReason::StepBelowThreshold;
        }
        sweeps += 1;
        let current = trajectory.last().expect("nonempty trajectory");
        let mut proposals = Vec::with_capacity(2 * basis.len());
        for i in 0..basis.len() {
            for sign in [1.0, -1.0] {
                let mut c = current.coefficients.clone();
                c[i] += sign * step;
                match realize(&c, &basis, ctx)? {
                    Some(p) => proposals.push(p),
                    None => rejected += 1,
                }
            }
        }
        let results: Vec<Result<Evaluation>> = proposals
            .par_iter()
            .map(|(_, field, _)| evaluate_cost(field, spec, ctx))
            .collect();
        let mut best: Option<(usize, Evaluation)> = None;
        for (idx, r) in results.into_iter().enumerate() {
            let ev = r?;
            evaluations.push(EvaluatedDesign {
                sweep: sweeps,
                j: ev.j,
                hazard: ev.report.hazard,
                pof: ev.report.pof,
            });
            let threshold = best.as_ref().map_or(current.j, |(_, b)| b.j);
            if ev.j < threshold {
                best = Some((idx, ev));
            }
        }
        match best {
            Some((idx, ev)) => {
                let (c, field, adm) = proposals.swap_remove(idx);
                log::info!("sweep {sweeps}: accepted J = {:e} (step {step:e})", ev.j);
                trajectory.push(Iterate {
                    iter: trajectory.len(),
                    coefficients: c,
                    field,
                    j: ev.j,
                    report: ev.report.clone(),
                    admissibility: adm,
                    step,
                });
                current_eval = ev;
            }
            None => {
                step *= options.shrink;
                log::info!("sweep {sweeps}: no improvement, step -> {step:e}");
            }
        }
    };
    Ok(OptimizerState {
        basis,
        options: options.clone(),
        trajectory,
        evaluations,
        rejected,
        sweeps,
        final_step: step,
        stop,
        final_evaluation: current_eval,
    })
}

/// `C^k` distance and `J` change between consecutive accepted iterates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub iter: usize,
    pub ck_distance: f64,
    pub delta_j: f64,
}

pub fn convergence_diagnostic(state: &OptimizerState, k: usize) -> Result<Vec<ConvergenceRow>> {
    state
        .trajectory
        .windows(2)
        .map(|w| {
            Ok(ConvergenceRow {
                iter: w[1].iter,
                ck_distance: ck_distance(&w[1].field, &w[0].field, k)?,
                delta_j: w[1].j - w[0].j,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DesignGrid;

    fn basic() -> BasicDesign {
        BasicDesign {
            lower: [0.0; 3],
            upper: [1.0, 1.0, 1.0],
            alpha_min: 0.6,
            alpha_max: 0.9,
            clamp_center: [0.5, 0.5, 0.25],
            clamp_radius: 0.15,
            ext_radius: None,
        }
    }

    #[test]
    fn basis_vanishes_near_boundary_with_derivatives() {
        let b = basic();
        let grid = DesignGrid::over(&b, 21, 21).unwrap();
        let basis = BumpBasis::new(grid, 3, 3, 4, b.alpha_min).unwrap();
        let f = basis.field(&[0.1, -0.05, 0.2, 0.0, 0.3, 0.1, 0.05, 0.0, 0.02]).unwrap();
        for (i, j) in grid.boundary_nodes() {
            assert_eq!(f.at(i, j), b.alpha_min);
        }
        for order in 1..=4 {
            for p in 0..=order {
                let d = f.derivative(p, order - p);
                for (i, j) in grid.boundary_nodes() {
                    assert!(d[grid.index(i, j)].abs() < 1e-9, "order ({p},{})", order - p);
                }
            }
        }
    }

    #[test]
    fn coefficient_projection_hits_volume() {
        let b = basic();
        let grid = DesignGrid::over(&b, 21, 21).unwrap();
        let basis = BumpBasis::new(grid, 4, 4, 4, b.alpha_min).unwrap();
        let target = 0.65;
        let c = basis.project_coefficients(&[0.0; 16], target);
        let f = basis.field(&c).unwrap();
        assert!((f.volume() - target).abs() < 1e-12);
        assert!((basis.volume(&c) - f.volume()).abs() < 1e-12);
    }

    #[test]
    fn grid_too_coarse_for_basis() {
        let b = basic();
        let grid = DesignGrid::over(&b, 9, 9).unwrap();
        assert!(matches!(
            BumpBasis::new(grid, 2, 2, 4, b.alpha_min),
            Err(Error::Config(_))
        ));
    }
}
