//! Run configuration: one JSON document per run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::elasticity::{LoadCase, SolveOptions, TractionFaces, VectorField};
use crate::error::{Error, Result};
use crate::geometry::{BasicDesign, DesignConstraints, DesignField, DesignGrid};
use crate::material::{MaterialParams, MaterialSpec};
use crate::reliability::HazardDomain;
use crate::shapeopt::{BumpBasis, CostSpec, EvalContext, OptimizerOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seed of every random stream in the run.
    #[serde(default)]
    pub seed: u64,
    pub material: MaterialSpec,
    #[serde(default)]
    pub life: LifeBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<LoadBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discretization: Option<DiscretizationBlock>,
    #[serde(default)]
    pub reliability: ReliabilityBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerBlock>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifeBlock {
    #[serde(default = "default_n_points")]
    pub n_points: usize,
    #[serde(default = "default_n_lo")]
    pub n_lo: f64,
    #[serde(default = "default_n_hi")]
    pub n_hi: f64,
    /// Elastic von Mises stress at which the life chain is reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_sigma_v: Option<f64>,
}

fn default_n_points() -> usize {
    50
}
fn default_n_lo() -> f64 {
    1.0
}
fn default_n_hi() -> f64 {
    1e7
}

impl Default for LifeBlock {
    fn default() -> Self {
        LifeBlock {
            n_points: default_n_points(),
            n_lo: default_n_lo(),
            n_hi: default_n_hi(),
            probe_sigma_v: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignBlock {
    pub basic: BasicDesign,
    pub constraints: DesignConstraints,
    #[serde(default)]
    pub initial: InitialDesign,
}

/// Starting design: basis coefficients, a grid CSV file, or the flat design
/// (all coefficients zero, then volume-projected).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDesign {
    #[default]
    Flat,
    Coefficients(Vec<f64>),
    FieldCsv(PathBuf),
}

/// A constant vector `[a, b, c]` or an affine profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Constant([f64; 3]),
    Affine { offset: [f64; 3], gradient: [[f64; 3]; 3] },
}

impl Default for VectorSpec {
    fn default() -> Self {
        VectorSpec::Constant([0.0; 3])
    }
}

impl VectorSpec {
    fn field(&self) -> VectorField {
        match self {
            VectorSpec::Constant(v) => VectorField::Constant(*v),
            VectorSpec::Affine { offset, gradient } => VectorField::Affine {
                offset: *offset,
                gradient: *gradient,
            },
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            VectorSpec::Constant(v) => v.iter().all(|x| x.is_finite()),
            VectorSpec::Affine { offset, gradient } => {
                offset.iter().chain(gradient.iter().flatten()).all(|x| x.is_finite())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadBlock {
    #[serde(default)]
    pub body_force: VectorSpec,
    #[serde(default)]
    pub traction: VectorSpec,
    #[serde(default)]
    pub traction_faces: TractionFaces,
    pub t_star: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationBlock {
    /// Design grid nodes `[n1, n2]`.
    pub grid: [usize; 2],
    /// Voxel edge length.
    pub h: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_admissibility_tol")]
    pub admissibility_tol: f64,
}

fn default_rel_tol() -> f64 {
    SolveOptions::default().rel_tol
}
fn default_max_iter() -> usize {
    SolveOptions::default().max_iter
}
fn default_admissibility_tol() -> f64 {
    1e-6
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReliabilityBlock {
    #[serde(default)]
    pub hazard_domain: HazardDomain,
    /// Number of sampled crack histories.
    #[serde(default)]
    pub histories: usize,
    /// Sampling horizon; `1.5·η` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    Pof,
    DetLife,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerBlock {
    /// Bumps per axis `[n1, n2]`.
    #[serde(default = "default_basis")]
    pub basis: [usize; 2],
    #[serde(default)]
    pub objective: Objective,
    pub step: f64,
    #[serde(default = "default_shrink")]
    pub shrink: f64,
    pub min_step: f64,
    pub max_iterations: usize,
}

fn default_basis() -> [usize; 2] {
    [4, 4]
}
fn default_shrink() -> f64 {
    0.5
}

/// Prefixes the field of a parameter error with the block it came from.
fn within(prefix: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::InvalidParameter { field, reason } => Error::InvalidParameter {
            field: format!("{prefix}.{field}"),
            reason,
        },
        Error::Config(msg) => Error::Config(format!("{prefix}: {msg}")),
        other => other,
    }
}

fn require<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T> {
    block
        .as_ref()
        .ok_or_else(|| Error::Config(format!("missing `{name}` block")))
}

/// Problem data resolved from a configuration.
#[derive(Clone, Debug)]
pub struct Problem {
    pub ctx: EvalContext,
    pub grid: DesignGrid,
    pub basis: BumpBasis,
    pub initial: InitialDesign,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("{path}: {}", e.into_inner()))
        })
    }

    /// Reads a config; relative CSV paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_json(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        if let Some(DesignBlock {
            initial: InitialDesign::FieldCsv(p),
            ..
        }) = &mut cfg.design
        {
            if p.is_relative() {
                *p = path.parent().unwrap_or(Path::new(".")).join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn material(&self) -> Result<MaterialParams> {
        MaterialParams::new(self.material.clone()).map_err(within("material"))
    }

    pub fn validate_life(&self) -> Result<()> {
        let l = &self.life;
        if l.n_points < 2 {
            return Err(Error::param("life.n_points", "must be >= 2"));
        }
        if !(l.n_lo > 0.0 && l.n_hi > l.n_lo && l.n_hi.is_finite()) {
            return Err(Error::param("life.n_lo", "need 0 < n_lo < n_hi < inf"));
        }
        if let Some(s) = l.probe_sigma_v {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::param("life.probe_sigma_v", "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    pub fn optimizer_options(&self) -> Result<OptimizerOptions> {
        let o = require(&self.optimizer, "optimizer")?;
        let opts = OptimizerOptions {
            step: o.step,
            shrink: o.shrink,
            min_step: o.min_step,
            max_iterations: o.max_iterations,
        };
        opts.validate().map_err(within("optimizer"))?;
        Ok(opts)
    }

    pub fn cost(&self) -> Result<CostSpec> {
        let load = require(&self.load, "load")?;
        let objective = self.optimizer.as_ref().map(|o| o.objective).unwrap_or_default();
        Ok(match objective {
            Objective::Pof => CostSpec::Pof { t_star: load.t_star },
            Objective::DetLife => CostSpec::DetLife,
        })
    }

    /// Validates every block the pipeline needs and assembles the problem.
    pub fn problem(&self) -> Result<Problem> {
        let material = self.material()?;
        let design = require(&self.design, "design")?;
        let load = require(&self.load, "load")?;
        let disc = require(&self.discretization, "discretization")?;
        design.basic.validate().map_err(within("design.basic"))?;
        design
            .constraints
            .validate(&design.basic)
            .map_err(within("design.constraints"))?;
        if !(load.t_star >= 0.0 && load.t_star.is_finite()) {
            return Err(Error::param("load.t_star", "must be finite and >= 0"));
        }
        if !load.body_force.is_finite() {
            return Err(Error::param("load.body_force", "must be finite"));
        }
        if !load.traction.is_finite() {
            return Err(Error::param("load.traction", "must be finite"));
        }
        if !(disc.h > 0.0) {
            return Err(Error::param("discretization.h", "must be > 0"));
        }
        if !(disc.rel_tol > 0.0 && disc.rel_tol < 1.0) {
            return Err(Error::param("discretization.rel_tol", "must lie in (0, 1)"));
        }
        if disc.max_iter == 0 {
            return Err(Error::param("discretization.max_iter", "must be >= 1"));
        }
        if !(disc.admissibility_tol >= 0.0) {
            return Err(Error::param("discretization.admissibility_tol", "must be >= 0"));
        }
        if let Some(t) = self.reliability.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::param("reliability.t_max", "must be positive and finite"));
            }
        }
        let grid =
            DesignGrid::over(&design.basic, disc.grid[0], disc.grid[1]).map_err(within("discretization.grid"))?;
        let [b1, b2] = self.optimizer.as_ref().map_or_else(default_basis, |o| o.basis);
        let basis = BumpBasis::new(grid, b1, b2, design.constraints.order, design.basic.alpha_min)
            .map_err(within("optimizer.basis"))?;
        if let InitialDesign::Coefficients(c) = &design.initial {
            if c.len() != basis.len() {
                return Err(Error::param(
                    "design.initial.coefficients",
                    format!("expected {} values for a {b1}x{b2} basis, got {}", basis.len(), c.len()),
                ));
            }
        }
        let ctx = EvalContext {
            basic: design.basic.clone(),
            constraints: design.constraints.clone(),
            material,
            load: LoadCase {
                body_force: load.body_force.field(),
                traction: load.traction.field(),
                traction_faces: load.traction_faces,
                t_star: load.t_star,
            },
            h: disc.h,
            solver: SolveOptions {
                rel_tol: disc.rel_tol,
                max_iter: disc.max_iter,
            },
            hazard_domain: self.reliability.hazard_domain,
            admissibility_tol: disc.admissibility_tol,
        };
        Ok(Problem {
            ctx,
            grid,
            basis,
            initial: design.initial.clone(),
        })
    }
}

impl Problem {
    /// Initial basis coefficients (zero for flat and CSV starts).
    pub fn initial_coefficients(&self) -> Result<Vec<f64>> {
        match &self.initial {
            InitialDesign::Flat => Ok(vec![0.0; self.basis.len()]),
            InitialDesign::Coefficients(c) => Ok(c.clone()),
            InitialDesign::FieldCsv(_) => Err(Error::Config(
                "design.initial: optimization starts from basis coefficients, not a field CSV".into(),
            )),
        }
    }

    /// The volume-projected starting field on the design grid.
    pub fn initial_field(&self) -> Result<DesignField> {
        match &self.initial {
            InitialDesign::FieldCsv(path) => {
                let f = crate::io::read_design_field(path, self.grid.origin)?;
                if !f.grid.same_as(&self.grid) {
                    return Err(Error::GridMismatch(format!(
                        "{} is {}x{}, discretization grid is {}x{}",
                        path.display(),
                        f.grid.n1,
                        f.grid.n2,
                        self.grid.n1,
                        self.grid.n2
                    )));
                }
                Ok(crate::geometry::project_volume(&f, &self.ctx.constraints, &self.ctx.basic)?.field)
            }
            _ => {
                let c = self
                    .basis
                    .project_coefficients(&self.initial_coefficients()?, self.ctx.constraints.volume);
                let f = self.basis.field(&c)?;
                Ok(crate::geometry::project_volume(&f, &self.ctx.constraints, &self.ctx.basic)?.field)
            }
        }
    }
}
