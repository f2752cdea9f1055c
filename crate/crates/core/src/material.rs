//! Elastic-plastic fatigue chain: von Mises stress → Neuber shakedown →
//! Ramberg-Osgood strain → inverse Coffin-Manson-Basquin life.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::life::Life;
use crate::roots::newton_bracketed;

const ROOT_MAX_ITER: usize = 500;

/// Raw, unvalidated material constants as they appear in a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    /// First Lamé coefficient.
    pub lambda: f64,
    /// Second Lamé coefficient (shear modulus).
    pub mu: f64,
    /// Cyclic strain hardening coefficient `K`.
    #[serde(rename = "K")]
    pub k: f64,
    /// Cyclic strain hardening exponent `n'`.
    pub n_prime: f64,
    /// Fatigue strength coefficient `σ'_f`.
    pub sigma_f: f64,
    /// Fatigue ductility coefficient `ε'_f`.
    pub eps_f: f64,
    /// Fatigue strength exponent.
    pub b: f64,
    /// Fatigue ductility exponent.
    pub c: f64,
    /// Weibull shape.
    pub m: f64,
    /// Factor turning the elastic von Mises stress into the stress amplitude.
    #[serde(default = "default_amplitude_factor")]
    pub amplitude_factor: f64,
}

fn default_amplitude_factor() -> f64 {
    0.5
}

impl Default for MaterialSpec {
    /// A steel-like parameter set (E = 200 GPa, ν = 0.3, MPa units).
    fn default() -> Self {
        let (lambda, mu) = lame_from_engineering(200_000.0, 0.3);
        MaterialSpec {
            lambda,
            mu,
            k: 1000.0,
            n_prime: 0.1,
            sigma_f: 2000.0,
            eps_f: 0.5,
            b: -0.1,
            c: -0.6,
            m: 8.0,
            amplitude_factor: 0.5,
        }
    }
}

/// Lamé coefficients `(λ, μ)` from Young's modulus and Poisson's ratio.
pub fn lame_from_engineering(e: f64, nu: f64) -> (f64, f64) {
    let mu = e / (2.0 * (1.0 + nu));
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    (lambda, mu)
}

/// Validated material constants. Immutable once built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MaterialSpec", into = "MaterialSpec")]
pub struct MaterialParams {
    spec: MaterialSpec,
    youngs: f64,
}

impl TryFrom<MaterialSpec> for MaterialParams {
    type Error = Error;

    fn try_from(spec: MaterialSpec) -> Result<Self> {
        MaterialParams::new(spec)
    }
}

impl From<MaterialParams> for MaterialSpec {
    fn from(p: MaterialParams) -> Self {
        p.spec
    }
}

impl MaterialParams {
    pub fn new(spec: MaterialSpec) -> Result<Self> {
        let positive = [
            ("lambda", spec.lambda),
            ("mu", spec.mu),
            ("K", spec.k),
            ("n_prime", spec.n_prime),
            ("sigma_f", spec.sigma_f),
            ("eps_f", spec.eps_f),
            ("amplitude_factor", spec.amplitude_factor),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::param(name, format!("must be > 0, got {v}")));
            }
        }
        for (name, v) in [("b", spec.b), ("c", spec.c)] {
            if !(v < 0.0) {
                return Err(Error::param(name, format!("must be < 0, got {v}")));
            }
        }
        if !(spec.m >= 1.0) || !spec.m.is_finite() {
            return Err(Error::param("m", format!("must be finite and >= 1, got {}", spec.m)));
        }
        let youngs = youngs_modulus_of(spec.lambda, spec.mu);
        if !(youngs > 0.0) || !youngs.is_finite() {
            return Err(Error::param("lambda/mu", "Young's modulus must be positive and finite"));
        }
        Ok(MaterialParams { spec, youngs })
    }

    pub fn spec(&self) -> &MaterialSpec {
        &self.spec
    }
    pub fn lambda(&self) -> f64 {
        self.spec.lambda
    }
    pub fn mu(&self) -> f64 {
        self.spec.mu
    }
    pub fn hardening_coefficient(&self) -> f64 {
        self.spec.k
    }
    pub fn hardening_exponent(&self) -> f64 {
        self.spec.n_prime
    }
    pub fn weibull_shape(&self) -> f64 {
        self.spec.m
    }
    pub fn amplitude_factor(&self) -> f64 {
        self.spec.amplitude_factor
    }

    /// Young's modulus `E = μ(3λ+2μ)/(λ+μ)`.
    pub fn youngs_modulus(&self) -> f64 {
        self.youngs
    }

    /// Same constants with a different Weibull shape.
    pub fn with_weibull_shape(&self, m: f64) -> Result<Self> {
        MaterialParams::new(MaterialSpec { m, ..self.spec.clone() })
    }
}

fn youngs_modulus_of(lambda: f64, mu: f64) -> f64 {
    mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu)
}

pub fn youngs_modulus(p: &MaterialParams) -> f64 {
    p.youngs_modulus()
}

/// Linear isotropic stress `λ tr(M) I + μ (M + Mᵀ)` for a displacement gradient `M`.
pub fn stress_from_gradient(grad: &Matrix3<f64>, p: &MaterialParams) -> Matrix3<f64> {
    Matrix3::identity() * (p.lambda() * grad.trace()) + (grad + grad.transpose()) * p.mu()
}

/// Von Mises stress `√(3/2 tr(σ'²))`. The input is symmetrized first.
pub fn von_mises(sigma: &Matrix3<f64>) -> f64 {
    let sym = (sigma + sigma.transpose()) * 0.5;
    let mean = sym.trace() / 3.0;
    let dev = sym - Matrix3::identity() * mean;
    (1.5 * dev.component_mul(&dev).sum()).sqrt()
}

/// Ramberg-Osgood comparison strain `σ/E + (σ/K)^(1/n')`.
pub fn ramberg_osgood(sigma_elpl: f64, p: &MaterialParams) -> f64 {
    debug_assert!(sigma_elpl >= 0.0);
    sigma_elpl / p.youngs_modulus() + (sigma_elpl / p.hardening_coefficient()).powf(1.0 / p.hardening_exponent())
}

/// Neuber shakedown: the elastic-plastic stress `s ≥ 0` with
/// `σ_v²/E = s²/E + s (s/K)^(1/n')`.
pub fn neuber_shakedown(sigma_v: f64, p: &MaterialParams) -> Result<f64> {
    debug_assert!(sigma_v >= 0.0);
    if sigma_v == 0.0 {
        return Ok(0.0);
    }
    let e = p.youngs_modulus();
    let k = p.hardening_coefficient();
    let inv_n = 1.0 / p.hardening_exponent();
    // residual normalized by σ_v²/E so the iteration is scale free
    let scale = e / (sigma_v * sigma_v);
    let residual = |s: f64| {
        let plastic = (s / k).powf(inv_n);
        let value = (s * s / e + s * plastic) * scale - 1.0;
        let slope = (2.0 * s / e + (1.0 + inv_n) * plastic) * scale;
        (value, slope)
    };
    // convex and increasing on [0, σ_v]; Newton from the right stays in the bracket
    newton_bracketed(residual, 0.0, sigma_v, sigma_v, ROOT_MAX_ITER).map_err(|(lo, hi)| Error::RootNotFound {
        what: "Neuber shakedown",
        lo,
        hi,
    })
}

/// Residual of the Neuber equation, relative to `max(1, σ_v²/E)`.
pub fn neuber_residual(sigma_v: f64, s: f64, p: &MaterialParams) -> f64 {
    let e = p.youngs_modulus();
    let lhs = sigma_v * sigma_v / e;
    let rhs = s * s / e + s * (s / p.hardening_coefficient()).powf(1.0 / p.hardening_exponent());
    (lhs - rhs).abs() / lhs.max(1.0)
}

/// The two CMB terms in the form `A N^b + B N^c`, returned as `(ln A, ln B)`.
fn cmb_log_coefficients(p: &MaterialParams) -> (f64, f64) {
    let s = p.spec();
    let ln_a = (s.sigma_f / p.youngs_modulus()).ln() + s.b * std::f64::consts::LN_2;
    let ln_b = s.eps_f.ln() + s.c * std::f64::consts::LN_2;
    (ln_a, ln_b)
}

/// Coffin-Manson-Basquin strain amplitude `(σ'_f/E)(2N)^b + ε'_f(2N)^c`.
pub fn cmb(cycles: f64, p: &MaterialParams) -> f64 {
    debug_assert!(cycles > 0.0);
    let s = p.spec();
    let two_n = 2.0 * cycles;
    s.sigma_f / p.youngs_modulus() * two_n.powf(s.b) + s.eps_f * two_n.powf(s.c)
}

/// Inverse of [`cmb`]: the cycle count whose CMB strain amplitude is `eps_a`.
///
/// Solved for `ln N` where `ln CMB` is close to linear. Returns `+inf` only when
/// the answer overflows `f64`.
pub fn cmb_inverse(eps_a: f64, p: &MaterialParams) -> Result<f64> {
    debug_assert!(eps_a > 0.0);
    let (b, c) = (p.spec().b, p.spec().c);
    let (ln_a, ln_b) = cmb_log_coefficients(p);
    let ln_eps = eps_a.ln();

    // ln CMB(e^y) - ln ε, decreasing in y; negate to get an increasing residual
    let residual = |y: f64| {
        let ta = ln_a + b * y;
        let tb = ln_b + c * y;
        let hi = ta.max(tb);
        let (wa, wb) = ((ta - hi).exp(), (tb - hi).exp());
        let total = wa + wb;
        let ln_cmb = hi + total.ln();
        let slope = (b * wa + c * wb) / total;
        (ln_eps - ln_cmb, -slope)
    };

    // one term alone reaching ε bounds N from below; both at ε/2 bounds it from above
    let lo = ((ln_eps - ln_a) / b).min((ln_eps - ln_b) / c);
    let half = ln_eps - std::f64::consts::LN_2;
    let hi = ((half - ln_a) / b).max((half - ln_b) / c);
    let y =
        newton_bracketed(residual, lo, hi, 0.5 * (lo + hi), ROOT_MAX_ITER).map_err(|(lo, hi)| Error::RootNotFound {
            what: "inverse Coffin-Manson-Basquin",
            lo: lo.exp(),
            hi: hi.exp(),
        })?;
    Ok(y.exp())
}

/// Composite life map `CMB⁻¹ ∘ RO ∘ SD`, extended by `φ(0) = ∞`.
pub fn phi(sigma_v: f64, p: &MaterialParams) -> Result<Life> {
    debug_assert!(sigma_v >= 0.0);
    if sigma_v == 0.0 {
        return Ok(Life::INFINITE);
    }
    let strain = ramberg_osgood(neuber_shakedown(sigma_v, p)?, p);
    if strain == 0.0 {
        // shakedown stress underflowed
        return Ok(Life::INFINITE);
    }
    Ok(Life::new(cmb_inverse(strain, p)?))
}

/// Intermediate values of the life chain for one stress.
#[derive(Clone, Debug, Serialize)]
pub struct LifeChain {
    pub sigma_v: f64,
    pub sigma_a: f64,
    pub sigma_elpl: f64,
    pub eps_a: f64,
    pub life: Life,
}

/// Runs the chain on the stress amplitude `amplitude_factor · σ_v`.
pub fn life_chain(sigma_v: f64, p: &MaterialParams) -> Result<LifeChain> {
    let sigma_a = p.amplitude_factor() * sigma_v;
    let sigma_elpl = neuber_shakedown(sigma_a, p)?;
    let eps_a = ramberg_osgood(sigma_elpl, p);
    let life = phi(sigma_a, p)?;
    Ok(LifeChain {
        sigma_v,
        sigma_a,
        sigma_elpl,
        eps_a,
        life,
    })
}

/// Deterministic crack-initiation life for a displacement gradient `M`.
pub fn n_det(grad: &Matrix3<f64>, p: &MaterialParams) -> Result<Life> {
    let sigma_v = von_mises(&stress_from_gradient(grad, p));
    phi(p.amplitude_factor() * sigma_v, p)
}

/// Log-spaced samples of the strain-life curve, endpoints included.
pub fn en_curve(p: &MaterialParams, n_points: usize, n_lo: f64, n_hi: f64) -> Result<Vec<(f64, f64)>> {
    if n_points < 2 {
        return Err(Error::param("n_points", format!("need at least 2, got {n_points}")));
    }
    if !(n_lo > 0.0 && n_hi > n_lo) {
        return Err(Error::param(
            "n_range",
            format!("need 0 < lo < hi, got [{n_lo}, {n_hi}]"),
        ));
    }
    let (l0, l1) = (n_lo.ln(), n_hi.ln());
    let last = n_points - 1;
    Ok((0..n_points)
        .map(|i| {
            let n = match i {
                0 => n_lo,
                i if i == last => n_hi,
                i => (l0 + (l1 - l0) * i as f64 / last as f64).exp(),
            };
            (n, cmb(n, p))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // Frozen with a 30/60-digit mpmath bisection oracle, E = 200000 (ν = 0.3),
    // K = 1000, n' = 0.1, σ'_f = 2000, ε'_f = 0.5, b = -0.1, c = -0.6.
    const RO_500: f64 = 0.0034765625;
    const SD_600: f64 = 503.814_383_727_522_55;
    const CMB_1E4: f64 = 0.005_027_735_145_139_719;
    const PHI_600: f64 = 58_034.095_677_767_8;

    fn params() -> MaterialParams {
        MaterialParams::new(MaterialSpec::default()).unwrap()
    }

    fn with(f: impl FnOnce(&mut MaterialSpec)) -> MaterialParams {
        let mut s = MaterialSpec::default();
        f(&mut s);
        MaterialParams::new(s).unwrap()
    }

    /// Plain bisection on the Neuber equation, independent of the Newton path.
    fn neuber_bisection(sv: f64, p: &MaterialParams) -> f64 {
        let e = p.youngs_modulus();
        let (k, inv_n) = (p.hardening_coefficient(), 1.0 / p.hardening_exponent());
        let f = |s: f64| s * s / e + s * (s / k).powf(inv_n) - sv * sv / e;
        let (mut lo, mut hi) = (0.0, sv);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid
            } else {
                lo = mid
            }
        }
        0.5 * (lo + hi)
    }

    /// Bisection on ln N over [1e-6, 1e18].
    fn cmb_inverse_bisection(eps: f64, p: &MaterialParams) -> f64 {
        let (mut lo, mut hi) = (1e-6f64.ln(), 1e18f64.ln());
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if cmb(mid.exp(), p) > eps {
                lo = mid
            } else {
                hi = mid
            }
        }
        (0.5 * (lo + hi)).exp()
    }

    #[test]
    fn youngs_modulus_examples() {
        let p = with(|s| {
            s.lambda = 1.0;
            s.mu = 1.0
        });
        assert_eq!(youngs_modulus(&p), 2.5);
        let p = with(|s| {
            s.lambda = 1e-12;
            s.mu = 1.0
        });
        assert_relative_eq!(youngs_modulus(&p), 2.0, max_relative = 1e-11);
        let p = with(|s| {
            s.lambda = 121_154.0;
            s.mu = 80_769.0
        });
        // direct evaluation: 209999.47999980190469; ν = 0.3 gives 210000 up to the rounded inputs
        assert_relative_eq!(youngs_modulus(&p), 209_999.479_999_801_9, max_relative = 1e-14);
        assert_relative_eq!(youngs_modulus(&p), 210_000.0, max_relative = 1e-5);
    }

    #[test]
    fn invalid_parameters_rejected() {
        for f in [
            (|s: &mut MaterialSpec| s.mu = 0.0) as fn(&mut MaterialSpec),
            |s| s.b = 0.1,
            |s| s.c = 0.0,
            |s| s.m = 0.5,
            |s| s.eps_f = -1.0,
            |s| s.n_prime = f64::NAN,
        ] {
            let mut s = MaterialSpec::default();
            f(&mut s);
            assert!(MaterialParams::new(s).is_err());
        }
    }

    #[test]
    fn von_mises_examples() {
        let s = 123.0;
        assert_relative_eq!(
            von_mises(&Matrix3::from_diagonal(&[-s, 0.0, 0.0].into())),
            s,
            max_relative = 1e-15
        );
        assert_eq!(von_mises(&(Matrix3::identity() * 7.0)), 0.0);
        let tau = 5.0;
        let mut shear = Matrix3::zeros();
        shear[(0, 1)] = tau;
        shear[(1, 0)] = tau;
        assert_relative_eq!(von_mises(&shear), 3f64.sqrt() * tau, max_relative = 1e-15);
    }

    #[test]
    fn von_mises_symmetrizes() {
        let mut a = Matrix3::zeros();
        a[(0, 1)] = 2.0;
        let mut sym = Matrix3::zeros();
        sym[(0, 1)] = 1.0;
        sym[(1, 0)] = 1.0;
        assert_eq!(von_mises(&a), von_mises(&sym));
    }

    #[test]
    fn ramberg_osgood_examples() {
        let p = params();
        assert_eq!(ramberg_osgood(0.0, &p), 0.0);
        assert_relative_eq!(ramberg_osgood(500.0, &p), RO_500, max_relative = 1e-14);
        let elastic = with(|s| s.k = 1e300);
        assert_relative_eq!(
            ramberg_osgood(500.0, &elastic),
            500.0 / elastic.youngs_modulus(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn neuber_examples() {
        let p = params();
        assert_eq!(neuber_shakedown(0.0, &p).unwrap(), 0.0);
        let s = neuber_shakedown(600.0, &p).unwrap();
        assert_relative_eq!(s, neuber_bisection(600.0, &p), max_relative = 1e-12);
        assert_relative_eq!(s, SD_600, max_relative = 1e-13);
        let elastic = with(|s| s.k = 1e300);
        assert_relative_eq!(neuber_shakedown(600.0, &elastic).unwrap(), 600.0, max_relative = 1e-14);
    }

    #[test]
    fn cmb_examples() {
        let p = params();
        assert_relative_eq!(cmb(10_000.0, &p), CMB_1E4, max_relative = 1e-14);
        assert!(cmb(1e300, &p) < 1e-29);
        let same = with(|s| s.c = s.b);
        let n = 777.0;
        let e = same.youngs_modulus();
        assert_relative_eq!(
            cmb(n, &same),
            (2000.0 / e + 0.5) * (2.0 * n).powf(-0.1),
            max_relative = 1e-14
        );
    }

    #[test]
    fn cmb_inverse_examples() {
        let p = params();
        for n in [1.0, 1e3, 1e7] {
            assert_relative_eq!(cmb_inverse(cmb(n, &p), &p).unwrap(), n, max_relative = 1e-9);
        }
        let eps = cmb(10_000.0, &p);
        assert_relative_eq!(cmb_inverse(eps, &p).unwrap(), 10_000.0, max_relative = 1e-12);
        assert_relative_eq!(cmb_inverse_bisection(eps, &p), 10_000.0, max_relative = 1e-12);

        let same = with(|s| s.c = s.b);
        let e = same.youngs_modulus();
        let eps = 3e-3;
        let closed = (eps / (2000.0 / e + 0.5)).powf(1.0 / -0.1) / 2.0;
        assert_relative_eq!(cmb_inverse(eps, &same).unwrap(), closed, max_relative = 1e-12);
    }

    #[test]
    fn phi_examples() {
        let p = params();
        assert!(phi(0.0, &p).unwrap().is_infinite());
        let oracle = cmb_inverse_bisection(ramberg_osgood(neuber_bisection(600.0, &p), &p), &p);
        let got = phi(600.0, &p).unwrap().cycles();
        assert_relative_eq!(got, oracle, max_relative = 1e-10);
        assert_relative_eq!(got, PHI_600, max_relative = 1e-12);
    }

    #[test]
    fn n_det_examples() {
        let p = params();
        assert!(n_det(&Matrix3::zeros(), &p).unwrap().is_infinite());
        let rot = Matrix3::new(0.0, 0.3, -0.1, -0.3, 0.0, 0.2, 0.1, -0.2, 0.0);
        assert!(n_det(&rot, &p).unwrap().is_infinite());

        // uniaxial strain: deviator of diag((λ+2μ)a, λa, λa) is μa·(4/3, -2/3, -2/3), so σ_v = 2μ|a|
        let a = -1.7e-3;
        let m = Matrix3::from_diagonal(&[a, 0.0, 0.0].into());
        let sv = von_mises(&stress_from_gradient(&m, &p));
        assert_relative_eq!(sv, 2.0 * p.mu() * a.abs(), max_relative = 1e-13);
        let expected = phi(0.5 * 2.0 * p.mu() * a.abs(), &p).unwrap().cycles();
        assert_relative_eq!(n_det(&m, &p).unwrap().cycles(), expected, max_relative = 1e-12);
    }

    #[test]
    fn en_curve_examples() {
        let p = params();
        let two = en_curve(&p, 2, 10.0, 1e6).unwrap();
        assert_eq!(two.iter().map(|r| r.0).collect::<Vec<_>>(), vec![10.0, 1e6]);
        let table = en_curve(&p, 50, 1.0, 1e8).unwrap();
        assert_eq!(table.len(), 50);
        for w in table.windows(2) {
            assert!(w[1].1 < w[0].1);
        }
        for &(n, e) in &table {
            assert_eq!(e, cmb(n, &p));
        }
        assert!(en_curve(&p, 1, 1.0, 2.0).is_err());
        assert!(en_curve(&p, 5, 2.0, 2.0).is_err());
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
    }

    #[test]
    fn neuber_residual_and_ordering_on_log_grid() {
        let p = params();
        let mut prev = 0.0;
        for sv in log_grid(1e-3, 1e4, 1000) {
            let s = neuber_shakedown(sv, &p).unwrap();
            assert!(neuber_residual(sv, s, &p) < 1e-10, "residual at {sv}");
            assert!(s > 0.0 && s <= sv);
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn phi_continuity() {
        let p = params();
        for sv in [10.0, 300.0, 900.0] {
            let base = phi(sv, &p).unwrap().cycles();
            let mut last = f64::INFINITY;
            for h in [1e-2, 1e-4, 1e-6] {
                let d = (phi(sv + h, &p).unwrap().cycles() - base).abs() / base;
                assert!(d < last);
                last = d;
            }
            assert!(last < 1e-6);
        }
    }

    fn rotation(a: f64, b: f64, c: f64) -> Matrix3<f64> {
        *nalgebra::Rotation3::from_euler_angles(a, b, c).matrix()
    }

    proptest! {
        #[test]
        fn von_mises_rotation_invariant(
            d in prop::array::uniform6(-500.0f64..500.0),
            ang in prop::array::uniform3(-3.0f64..3.0),
        ) {
            let s = Matrix3::new(d[0], d[3], d[4], d[3], d[1], d[5], d[4], d[5], d[2]);
            let r = rotation(ang[0], ang[1], ang[2]);
            let rotated = r * s * r.transpose();
            let (a, b) = (von_mises(&s), von_mises(&rotated));
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0) * 10.0);
        }

        #[test]
        fn n_det_ignores_antisymmetric_part(
            g in prop::array::uniform9(-2e-3f64..2e-3),
            w in prop::array::uniform3(-1e-2f64..1e-2),
        ) {
            let p = params();
            let m = Matrix3::from_row_slice(&g);
            let skew = Matrix3::new(0.0, w[0], w[1], -w[0], 0.0, w[2], -w[1], -w[2], 0.0);
            let a = n_det(&m, &p).unwrap().cycles();
            let b = n_det(&(m + skew), &p).unwrap().cycles();
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }

        #[test]
        fn ramberg_osgood_increasing(x in 0.0f64..2000.0, dx in 1e-6f64..100.0) {
            let p = params();
            prop_assert!(ramberg_osgood(x + dx, &p) > ramberg_osgood(x, &p));
        }

        #[test]
        fn cmb_round_trip_in_strain(ln_n in 0.0f64..40.0) {
            let p = params();
            let eps = cmb(ln_n.exp(), &p);
            let back = cmb(cmb_inverse(eps, &p).unwrap(), &p);
            prop_assert!((back - eps).abs() <= 1e-9 * eps);
        }
    }
}
