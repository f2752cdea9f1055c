use std::sync::Arc;

use fatigue_shape::cli::RunConfig;
use fatigue_shape::elasticity::LoadCase;
use fatigue_shape::geometry::{ck_distance, DesignGrid};
use fatigue_shape::reliability::HazardDomain;
use fatigue_shape::shapeopt::{
    convergence_diagnostic, evaluate_cost, optimize, BumpBasis, CostSpec, OptimizerOptions, StopReason,
};
use proptest::prelude::*;

const BENCHMARK: &str = include_str!("../../../configs/benchmark.json");

fn benchmark() -> (RunConfig, fatigue_shape::cli::config::Problem) {
    let cfg = RunConfig::from_json(BENCHMARK).unwrap();
    let problem = cfg.problem().unwrap();
    (cfg, problem)
}

#[test]
fn unit_volume_integrand_gives_mesh_volume() {
    let (_, problem) = benchmark();
    let spec = CostSpec::CustomLocal {
        f_vol: Arc::new(|_| 1.0),
        f_sur: Arc::new(|_| 0.0),
    };
    let ev = evaluate_cost(&problem.initial_field().unwrap(), &spec, &problem.ctx).unwrap();
    let h = problem.ctx.h;
    let cells = ev.mesh.num_elements() as f64;
    assert!((ev.j - cells * h * h * h).abs() <= 1e-12 * ev.j);
}

#[test]
fn unit_surface_integrand_gives_boundary_area() {
    let (_, problem) = benchmark();
    let spec = CostSpec::CustomLocal {
        f_vol: Arc::new(|_| 0.0),
        f_sur: Arc::new(|_| 1.0),
    };
    let mut ctx = problem.ctx.clone();
    ctx.hazard_domain = HazardDomain::FullBoundary;
    let ev = evaluate_cost(&problem.initial_field().unwrap(), &spec, &ctx).unwrap();
    let h = ctx.h;
    let faces = ev.mesh.faces.len() as f64;
    assert!((ev.j - faces * h * h).abs() <= 1e-12 * ev.j);
}

#[test]
fn unloaded_optimization_stops_at_zero_cost() {
    let (cfg, problem) = benchmark();
    let mut ctx = problem.ctx.clone();
    ctx.load = LoadCase::unloaded(ctx.load.t_star);
    let options = OptimizerOptions {
        step: 0.02,
        shrink: 0.5,
        min_step: 0.015,
        max_iterations: 5,
    };
    let state = optimize(
        &problem.initial_coefficients().unwrap(),
        problem.basis.clone(),
        &cfg.cost().unwrap(),
        &ctx,
        &options,
    )
    .unwrap();
    assert_eq!(state.trajectory.len(), 1);
    assert_eq!(state.trajectory[0].j, 0.0);
    assert!(state.trajectory[0].t_det().is_infinite());
    assert_eq!(state.stop, StopReason::StepBelowThreshold);
    assert!(state.evaluations.iter().all(|e| e.j == 0.0));
    assert!(convergence_diagnostic(&state, 4).unwrap().is_empty());
}

#[test]
fn det_life_and_pof_agree_on_initial_design() {
    let (_, problem) = benchmark();
    let field = problem.initial_field().unwrap();
    let pof = evaluate_cost(&field, &CostSpec::Pof { t_star: 3e4 }, &problem.ctx).unwrap();
    let det = evaluate_cost(&field, &CostSpec::DetLife, &problem.ctx).unwrap();
    assert_eq!(det.j, -pof.report.t_det.cycles());
    assert_eq!(pof.j, pof.report.hazard);
}

fn grid() -> DesignGrid {
    DesignGrid {
        n1: 25,
        n2: 25,
        origin: [0.0, 0.0],
        dx: 1.0 / 24.0,
        dy: 1.0 / 24.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficient_projection_hits_target(c in prop::collection::vec(-0.2f64..0.2, 9), target in 0.5f64..0.8) {
        let basis = BumpBasis::new(grid(), 3, 3, 4, 0.6).unwrap();
        let p = basis.project_coefficients(&c, target);
        prop_assert!((basis.volume(&p) - target).abs() < 1e-13);
        prop_assert!((basis.field(&p).unwrap().volume() - target).abs() < 1e-13);
        // projecting twice changes nothing
        let q = basis.project_coefficients(&p, target);
        prop_assert!(p.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn ck_distance_is_a_metric(
        a in prop::collection::vec(-0.2f64..0.2, 9),
        b in prop::collection::vec(-0.2f64..0.2, 9),
        c in prop::collection::vec(-0.2f64..0.2, 9),
    ) {
        let basis = BumpBasis::new(grid(), 3, 3, 4, 0.6).unwrap();
        let (fa, fb, fc) = (basis.field(&a).unwrap(), basis.field(&b).unwrap(), basis.field(&c).unwrap());
        let dab = ck_distance(&fa, &fb, 4).unwrap();
        prop_assert_eq!(dab, ck_distance(&fb, &fa, 4).unwrap());
        prop_assert_eq!(ck_distance(&fa, &fa, 4).unwrap(), 0.0);
        let via = ck_distance(&fa, &fc, 4).unwrap() + ck_distance(&fc, &fb, 4).unwrap();
        prop_assert!(dab <= via * (1.0 + 1e-12));
    }
}
