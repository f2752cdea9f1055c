//! Local Weibull model: hazard, failure probability and scale from the
//! deterministic-life field on the surface, and sampling of the crack
//! initiation point process.
//!
//! Sampling uses `ChaCha8Rng::seed_from_u64(seed)`; distinct seeds give
//! independent, reproducible streams.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elasticity::SurfaceField;
use crate::error::{Error, Result};
use crate::geometry::mesh::{ALL_TAGS, TRACTION_TAGS};
use crate::geometry::FaceTag;
use crate::life::{extended_f64, Life};

/// Part of the boundary over which the hazard is integrated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HazardDomain {
    #[default]
    FullBoundary,
    /// NEUMANN and DESIGNED faces only; the clamped cavity is skipped.
    TractionOnly,
}

impl HazardDomain {
    pub fn tags(self) -> &'static [FaceTag] {
        match self {
            HazardDomain::FullBoundary => &ALL_TAGS,
            HazardDomain::TractionOnly => &TRACTION_TAGS,
        }
    }
}

fn max_reciprocal(sf: &SurfaceField) -> f64 {
    sf.points.iter().map(|p| p.n_det.reciprocal()).fold(0.0, f64::max)
}

/// `‖1/N_det‖_{L^m}` over the surface quadrature, with `1/∞ = 0`.
///
/// Scaled by the largest reciprocal so large `m` does not underflow.
pub fn lm_norm(sf: &SurfaceField, m: f64) -> f64 {
    let r_max = max_reciprocal(sf);
    if r_max == 0.0 {
        return 0.0;
    }
    let sum: f64 = sf
        .points
        .iter()
        .map(|p| p.quad.weight * (p.n_det.reciprocal() / r_max).powf(m))
        .sum();
    r_max * sum.powf(1.0 / m)
}

/// Cumulative hazard `H(t) = t^m ‖1/N_det‖^m`.
pub fn hazard(sf: &SurfaceField, m: f64, t: f64) -> f64 {
    hazard_from_norm(lm_norm(sf, m), m, t)
}

fn hazard_from_norm(norm: f64, m: f64, t: f64) -> f64 {
    if norm == 0.0 || t == 0.0 {
        0.0
    } else {
        (t * norm).powf(m)
    }
}

/// Failure probability `1 − exp(−H)`.
pub fn pof_from_hazard(h: f64) -> f64 {
    -(-h).exp_m1()
}

pub fn pof(sf: &SurfaceField, m: f64, t_star: f64) -> f64 {
    pof_from_hazard(hazard(sf, m, t_star))
}

/// Weibull scale `η = ‖1/N_det‖⁻¹`, infinite when the norm vanishes.
pub fn weibull_scale(sf: &SurfaceField, m: f64) -> f64 {
    1.0 / lm_norm(sf, m)
}

pub fn weibull_cdf(t: f64, m: f64, eta: f64) -> f64 {
    if eta.is_infinite() {
        0.0
    } else {
        -(-(t / eta).powf(m)).exp_m1()
    }
}

/// `T_det = min N_det` over the quadrature points.
pub fn deterministic_life(sf: &SurfaceField) -> Result<Life> {
    sf.points
        .iter()
        .map(|p| p.n_det)
        .reduce(Life::min)
        .ok_or(Error::EmptyField)
}

/// Reliability summary at the warranty time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    /// Cumulative hazard `H(t*)`.
    #[serde(rename = "H")]
    pub hazard: f64,
    /// Weibull scale.
    #[serde(with = "extended_f64")]
    pub eta: f64,
    pub pof: f64,
    pub survival: f64,
    pub t_det: Life,
    pub m: f64,
    pub t_star: f64,
}

impl ReliabilityReport {
    pub fn new(sf: &SurfaceField, m: f64, t_star: f64) -> Result<Self> {
        let norm = lm_norm(sf, m);
        let h = hazard_from_norm(norm, m, t_star);
        let pof = pof_from_hazard(h);
        Ok(ReliabilityReport {
            hazard: h,
            eta: 1.0 / norm,
            pof,
            survival: (-h).exp(),
            t_det: deterministic_life(sf)?,
            m,
            t_star,
        })
    }

    /// `|pof − (1 − exp(−(t*/η)^m))|`.
    pub fn identity_error(&self) -> f64 {
        (self.pof - weibull_cdf(self.t_star, self.m, self.eta)).abs()
    }
}

/// One crack initiation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrackEvent {
    pub t: f64,
    pub x: [f64; 3],
    /// Boundary face id of the mesh.
    pub face: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrackHistory {
    /// Sorted by time.
    pub events: Vec<CrackEvent>,
    pub t_max: f64,
    pub seed: u64,
}

/// Earliest initiation time, or infinity for an empty history.
pub fn first_failure(h: &CrackHistory) -> Life {
    h.events.first().map_or(Life::INFINITE, |e| Life::new(e.t))
}

/// Precomputed sampler of the crack point process on `(0, t_max] × ∂Ω`.
#[derive(Clone, Debug)]
pub struct HistorySampler<'a> {
    sf: &'a SurfaceField,
    m: f64,
    t_max: f64,
    mean: f64,
    faces: Option<WeightedIndex<f64>>,
}

impl<'a> HistorySampler<'a> {
    pub fn new(sf: &'a SurfaceField, m: f64, t_max: f64) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::param(
                "t_max",
                format!("must be positive and finite, got {t_max}"),
            ));
        }
        let mean = hazard(sf, m, t_max);
        if !mean.is_finite() {
            return Err(Error::param("t_max", format!("hazard H(t_max) = {mean} is not finite")));
        }
        let faces = if mean > 0.0 {
            let r_max = max_reciprocal(sf);
            let w = sf
                .points
                .iter()
                .map(|p| p.quad.weight * (p.n_det.reciprocal() / r_max).powf(m));
            Some(WeightedIndex::new(w).map_err(|e| Error::Config(format!("face weights: {e}")))?)
        } else {
            None
        };
        Ok(HistorySampler {
            sf,
            m,
            t_max,
            mean,
            faces,
        })
    }

    /// Expected event count `H(t_max)`.
    pub fn mean_count(&self) -> f64 {
        self.mean
    }

    pub fn sample(&self, seed: u64) -> CrackHistory {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut events = Vec::new();
        if let Some(faces) = &self.faces {
            let count = Poisson::new(self.mean).expect("positive finite mean").sample(&mut rng) as usize;
            events.reserve(count);
            for _ in 0..count {
                let u: f64 = rng.gen();
                // inverse of the time CDF (t / t_max)^m, mapped into (0, t_max]
                let t = self.t_max * (1.0 - u).powf(1.0 / self.m);
                let q = &self.sf.points[faces.sample(&mut rng)].quad;
                let (a, b): (f64, f64) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
                let x = std::array::from_fn(|d| q.point[d] + a * q.half_edges[0][d] + b * q.half_edges[1][d]);
                events.push(CrackEvent { t, x, face: q.face });
            }
            events.sort_by(|e, f| e.t.total_cmp(&f.t));
        }
        CrackHistory {
            events,
            t_max: self.t_max,
            seed,
        }
    }

    /// First-failure times for each seed, in seed order.
    pub fn first_failures(&self, seeds: impl IntoParallelIterator<Item = u64>) -> Vec<Life> {
        seeds.into_par_iter().map(|s| first_failure(&self.sample(s))).collect()
    }
}

/// Samples one history of the crack process with horizon `t_max`.
pub fn sample_history(sf: &SurfaceField, m: f64, t_max: f64, seed: u64) -> Result<CrackHistory> {
    Ok(HistorySampler::new(sf, m, t_max)?.sample(seed))
}

/// Kolmogorov-Smirnov statistic and asymptotic p-value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test of `samples` against `cdf`.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let n = samples.len();
    if n == 0 {
        return KsResult {
            n,
            statistic: 0.0,
            p_value: 1.0,
        };
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
        })
        .fold(0.0, f64::max);
    let sq = nf.sqrt();
    KsResult {
        n,
        statistic: d,
        p_value: kolmogorov_q((sq + 0.12 + 0.11 / sq) * d),
    }
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (−1)^{k−1} exp(−2k²λ²)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
