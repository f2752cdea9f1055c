//! Basic design, design variables and the discrete admissibility surrogate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The fixed part of every admissible shape: an axis-aligned box with a
/// spherical clamp cavity below the designed cross-section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasicDesign {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub clamp_center: [f64; 3],
    pub clamp_radius: f64,
    /// Radius of the ball around `clamp_center` containing every shape.
    /// Computed from the box when omitted.
    #[serde(default)]
    pub ext_radius: Option<f64>,
}

impl BasicDesign {
    pub fn validate(&self) -> Result<()> {
        for i in 0..3 {
            if !(self.upper[i] > self.lower[i]) {
                return Err(Error::param(format!("upper[{i}]"), "box must have positive extent"));
            }
        }
        if !(self.alpha_min > self.lower[2] && self.alpha_min < self.upper[2]) {
            return Err(Error::param("alpha_min", "cross-section must cut the open box"));
        }
        if !(self.alpha_max > self.alpha_min) {
            return Err(Error::param("alpha_max", "must exceed alpha_min"));
        }
        let (z, r) = (self.clamp_center, self.clamp_radius);
        if !(r > 0.0) {
            return Err(Error::param("clamp_radius", "must be > 0"));
        }
        for i in 0..3 {
            if !(z[i] - r > self.lower[i] && z[i] + r < self.upper[i]) {
                return Err(Error::param("clamp_center", "clamp ball must lie inside the box"));
            }
        }
        if !(z[2] + r < self.alpha_min) {
            return Err(Error::param("clamp_center", "clamp ball must lie below alpha_min"));
        }
        if let Some(ext) = self.ext_radius {
            if !(ext >= self.enclosing_radius()) {
                return Err(Error::param(
                    "ext_radius",
                    format!("{ext} does not enclose all designs (need {})", self.enclosing_radius()),
                ));
            }
        }
        Ok(())
    }

    /// Smallest radius around the clamp center that contains every `Ω(α)`.
    pub fn enclosing_radius(&self) -> f64 {
        let top = self.alpha_max.max(self.alpha_min);
        let mut best: f64 = 0.0;
        for &x in &[self.lower[0], self.upper[0]] {
            for &y in &[self.lower[1], self.upper[1]] {
                for &zc in &[self.lower[2], top] {
                    let d = [
                        x - self.clamp_center[0],
                        y - self.clamp_center[1],
                        zc - self.clamp_center[2],
                    ];
                    best = best.max((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt());
                }
            }
        }
        best
    }

    pub fn ext_radius(&self) -> f64 {
        self.ext_radius.unwrap_or_else(|| self.enclosing_radius())
    }

    /// Area of the cross-section rectangle.
    pub fn cross_section_area(&self) -> f64 {
        (self.upper[0] - self.lower[0]) * (self.upper[1] - self.lower[1])
    }

    pub fn in_cross_section(&self, x: f64, y: f64) -> bool {
        x > self.lower[0] && x < self.upper[0] && y > self.lower[1] && y < self.upper[1]
    }

    pub fn in_clamp(&self, p: [f64; 3]) -> bool {
        let d = [
            p[0] - self.clamp_center[0],
            p[1] - self.clamp_center[1],
            p[2] - self.clamp_center[2],
        ];
        d[0] * d[0] + d[1] * d[1] + d[2] * d[2] <= self.clamp_radius * self.clamp_radius
    }
}

/// Prescribed boundary derivative `∂^(p+q) α / ∂x₁^p ∂x₂^q` on the boundary
/// nodes, listed in [`DesignGrid::boundary_nodes`] order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDerivative {
    pub order: [usize; 2],
    pub values: Vec<f64>,
}

/// Bounds defining the admissible design set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConstraints {
    /// Target value of `∫ α` over the cross-section.
    pub volume: f64,
    /// Bound on the discrete `C^k` norm.
    pub ck_bound: f64,
    /// Lipschitz bound on the order-`k` differences.
    pub lipschitz_bound: f64,
    #[serde(default = "default_order")]
    pub order: usize,
    /// Boundary derivative data; multi-indices not listed are prescribed as zero.
    #[serde(default)]
    pub boundary_derivatives: Vec<BoundaryDerivative>,
}

fn default_order() -> usize {
    4
}

impl DesignConstraints {
    pub fn validate(&self, basic: &BasicDesign) -> Result<()> {
        for (name, v) in [
            ("volume", self.volume),
            ("ck_bound", self.ck_bound),
            ("lipschitz_bound", self.lipschitz_bound),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        let area = basic.cross_section_area();
        let (lo, hi) = (basic.alpha_min * area, basic.alpha_max * area);
        if !(self.volume >= lo && self.volume <= hi) {
            return Err(Error::param("volume", format!("{} outside [{lo}, {hi}]", self.volume)));
        }
        if self.order == 0 {
            return Err(Error::param("order", "must be >= 1"));
        }
        for bd in &self.boundary_derivatives {
            let o = bd.order[0] + bd.order[1];
            if o == 0 || o > self.order {
                return Err(Error::param(
                    "boundary_derivatives",
                    format!("order {o} outside 1..={}", self.order),
                ));
            }
        }
        Ok(())
    }
}

/// Uniform node grid over the cross-section rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignGrid {
    pub n1: usize,
    pub n2: usize,
    pub origin: [f64; 2],
    pub dx: f64,
    pub dy: f64,
}

impl DesignGrid {
    pub fn over(basic: &BasicDesign, n1: usize, n2: usize) -> Result<Self> {
        if n1 < 2 || n2 < 2 {
            return Err(Error::Config(format!(
                "design grid {n1}x{n2} needs at least 2 nodes per axis"
            )));
        }
        Ok(DesignGrid {
            n1,
            n2,
            origin: [basic.lower[0], basic.lower[1]],
            dx: (basic.upper[0] - basic.lower[0]) / (n1 - 1) as f64,
            dy: (basic.upper[1] - basic.lower[1]) / (n2 - 1) as f64,
        })
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index: rows run along `x₁`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [self.origin[0] + i as f64 * self.dx, self.origin[1] + j as f64 * self.dy]
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.n1 || j + 1 == self.n2
    }

    /// Boundary nodes in row-major order.
    pub fn boundary_nodes(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n1 {
            for j in 0..self.n2 {
                if self.is_boundary(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Trapezoid-rule weight of node `(i, j)` (includes `dx·dy`).
    pub fn trapezoid_weight(&self, i: usize, j: usize) -> f64 {
        let wi = if i == 0 || i + 1 == self.n1 { 0.5 } else { 1.0 };
        let wj = if j == 0 || j + 1 == self.n2 { 0.5 } else { 1.0 };
        wi * wj * self.dx * self.dy
    }

    pub fn interior_area(&self) -> f64 {
        (self.n1.saturating_sub(2) * self.n2.saturating_sub(2)) as f64 * self.dx * self.dy
    }

    pub fn same_as(&self, other: &DesignGrid) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        self.n1 == other.n1
            && self.n2 == other.n2
            && close(self.dx, other.dx)
            && close(self.dy, other.dy)
            && close(self.origin[0], other.origin[0])
            && close(self.origin[1], other.origin[1])
    }
}

/// Nodal samples of the height function `α` over the cross-section.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignField {
    pub grid: DesignGrid,
    pub values: Vec<f64>,
}

impl DesignField {
    pub fn constant(grid: DesignGrid, value: f64) -> Self {
        DesignField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: DesignGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n1 {
            for j in 0..grid.n2 {
                let [x, y] = grid.node(i, j);
                values.push(f(x, y));
            }
        }
        DesignField { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Bilinear interpolation; points outside the grid are clamped onto it.
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        let g = &self.grid;
        let locate = |t: f64, n: usize| {
            let t = t.clamp(0.0, (n - 1) as f64);
            let cell = (t.floor() as usize).min(n - 2);
            (cell, t - cell as f64)
        };
        let (i, s) = locate((x - g.origin[0]) / g.dx, g.n1);
        let (j, t) = locate((y - g.origin[1]) / g.dy, g.n2);
        (1.0 - s) * (1.0 - t) * self.at(i, j)
            + s * (1.0 - t) * self.at(i + 1, j)
            + (1.0 - s) * t * self.at(i, j + 1)
            + s * t * self.at(i + 1, j + 1)
    }

    /// Trapezoid-rule integral over the cross-section.
    pub fn volume(&self) -> f64 {
        let g = &self.grid;
        let mut total = 0.0;
        for i in 0..g.n1 {
            for j in 0..g.n2 {
                total += g.trapezoid_weight(i, j) * self.at(i, j);
            }
        }
        total
    }

    /// Finite-difference approximation of `∂^(p+q) α / ∂x₁^p ∂x₂^q` at every node.
    pub fn derivative(&self, p: usize, q: usize) -> Vec<f64> {
        let g = &self.grid;
        let mut out = self.values.clone();
        if p > 0 {
            let mut line = vec![0.0; g.n1];
            let mut buf = vec![0.0; g.n1];
            for j in 0..g.n2 {
                for i in 0..g.n1 {
                    line[i] = out[g.index(i, j)];
                }
                difference_1d(&line, p, g.dx, &mut buf);
                for i in 0..g.n1 {
                    out[g.index(i, j)] = buf[i];
                }
            }
        }
        if q > 0 {
            let mut buf = vec![0.0; g.n2];
            for i in 0..g.n1 {
                let row = &out[g.index(i, 0)..g.index(i, 0) + g.n2];
                difference_1d(row, q, g.dy, &mut buf);
                out[g.index(i, 0)..g.index(i, 0) + g.n2].copy_from_slice(&buf);
            }
        }
        out
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Forward difference `Δ^order f[start] / h^order`.
fn forward_difference(f: &[f64], start: usize, order: usize, h: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..=order {
        let sign = if (order - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += sign * binomial(order, j) * f[start + j];
    }
    acc / h.powi(order as i32)
}

/// Order-`order` derivative at every sample. Centered stencils in the
/// interior (odd orders average the two adjacent binomial stencils),
/// one-sided stencils near the ends. Requires `f.len() > order`.
fn difference_1d(f: &[f64], order: usize, h: f64, out: &mut [f64]) {
    let n = f.len();
    debug_assert!(n > order);
    let last_start = n - 1 - order;
    for i in 0..n {
        out[i] = if order.is_multiple_of(2) {
            let start = i.saturating_sub(order / 2).min(last_start);
            forward_difference(f, start, order, h)
        } else {
            let half = order.div_ceil(2);
            if i >= half && i + half < n {
                0.5 * (forward_difference(f, i - half, order, h) + forward_difference(f, i + 1 - half, order, h))
            } else {
                let start = i.saturating_sub(order / 2).min(last_start);
                forward_difference(f, start, order, h)
            }
        };
    }
}

/// Multi-indices `(p, q)` with `p + q = order`.
fn multi_indices(order: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=order).map(move |p| (p, order - p))
}

/// One line of an admissibility report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintCheck {
    pub name: &'static str,
    /// Measured quantity.
    pub value: f64,
    /// Bound or target.
    pub limit: f64,
    /// `limit - value` for inequalities; signed deviation `limit - value` for the volume.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub checks: Vec<ConstraintCheck>,
    pub pass: bool,
}

impl AdmissibilityReport {
    pub fn get(&self, name: &str) -> Option<&ConstraintCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Relative volume violation `|V - L₁| / L₁`.
    pub fn volume_violation(&self) -> f64 {
        self.get("volume").map(|c| c.margin.abs() / c.limit).unwrap_or(f64::NAN)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect()
    }
}

/// Discrete `C^k` norm: max over orders `0..=k` and multi-indices of the
/// max-norm of the finite-difference derivatives.
pub fn ck_norm(alpha: &DesignField, k: usize) -> f64 {
    let mut best: f64 = 0.0;
    for order in 0..=k {
        for (p, q) in multi_indices(order) {
            best = alpha.derivative(p, q).iter().fold(best, |m, v| m.max(v.abs()));
        }
    }
    best
}

/// Largest difference quotient of the order-`k` differences between
/// axis-adjacent nodes.
pub fn top_order_lipschitz(alpha: &DesignField, k: usize) -> f64 {
    let g = &alpha.grid;
    let mut best: f64 = 0.0;
    for (p, q) in multi_indices(k) {
        let d = alpha.derivative(p, q);
        for i in 0..g.n1 {
            for j in 0..g.n2 {
                let v = d[g.index(i, j)];
                if i + 1 < g.n1 {
                    best = best.max((d[g.index(i + 1, j)] - v).abs() / g.dx);
                }
                if j + 1 < g.n2 {
                    best = best.max((d[g.index(i, j + 1)] - v).abs() / g.dy);
                }
            }
        }
    }
    best
}

fn check_grid_resolution(grid: &DesignGrid, k: usize) -> Result<()> {
    let need = (k + 1).max(3);
    if grid.n1 < need || grid.n2 < need {
        return Err(Error::Config(format!(
            "design grid {}x{} too coarse for order-{k} differences (need {need} nodes per axis)",
            grid.n1, grid.n2
        )));
    }
    Ok(())
}

/// Evaluates the discrete surrogate of the admissible set.
///
/// `tol` is relative: inequality bounds pass when `value <= limit·(1+tol)`,
/// the volume when `|V - L₁| <= tol·L₁`, box and boundary values within
/// `tol·(α_max - α_min)`, boundary derivatives within `tol·L₂`.
pub fn check_admissible(
    alpha: &DesignField,
    c: &DesignConstraints,
    basic: &BasicDesign,
    tol: f64,
) -> Result<AdmissibilityReport> {
    let g = &alpha.grid;
    let k = c.order;
    check_grid_resolution(g, k)?;
    let span = basic.alpha_max - basic.alpha_min;
    let mut checks = Vec::with_capacity(6);

    let box_margin = alpha
        .values
        .iter()
        .map(|&a| (a - basic.alpha_min).min(basic.alpha_max - a))
        .fold(f64::INFINITY, f64::min);
    checks.push(ConstraintCheck {
        name: "box",
        value: -box_margin,
        limit: 0.0,
        margin: box_margin,
        pass: box_margin >= -tol * span,
    });

    let boundary_nodes = g.boundary_nodes();
    let boundary_dev = boundary_nodes
        .iter()
        .map(|&(i, j)| (alpha.at(i, j) - basic.alpha_min).abs())
        .fold(0.0, f64::max);
    checks.push(ConstraintCheck {
        name: "boundary_value",
        value: boundary_dev,
        limit: 0.0,
        margin: -boundary_dev,
        pass: boundary_dev <= tol * span,
    });

    let volume = alpha.volume();
    checks.push(ConstraintCheck {
        name: "volume",
        value: volume,
        limit: c.volume,
        margin: c.volume - volume,
        pass: (volume - c.volume).abs() <= tol * c.volume,
    });

    let norm = ck_norm(alpha, k);
    checks.push(ConstraintCheck {
        name: "ck_norm",
        value: norm,
        limit: c.ck_bound,
        margin: c.ck_bound - norm,
        pass: norm <= c.ck_bound * (1.0 + tol),
    });

    let lip = top_order_lipschitz(alpha, k);
    checks.push(ConstraintCheck {
        name: "lipschitz",
        value: lip,
        limit: c.lipschitz_bound,
        margin: c.lipschitz_bound - lip,
        pass: lip <= c.lipschitz_bound * (1.0 + tol),
    });

    let mut bd_dev: f64 = 0.0;
    for order in 1..=k {
        for (p, q) in multi_indices(order) {
            let d = alpha.derivative(p, q);
            let prescribed = c.boundary_derivatives.iter().find(|b| b.order == [p, q]);
            if let Some(b) = prescribed {
                if b.values.len() != boundary_nodes.len() {
                    return Err(Error::Config(format!(
                        "boundary derivative {:?} has {} values, grid has {} boundary nodes",
                        b.order,
                        b.values.len(),
                        boundary_nodes.len()
                    )));
                }
            }
            for (n, &(i, j)) in boundary_nodes.iter().enumerate() {
                let target = prescribed.map_or(0.0, |b| b.values[n]);
                bd_dev = bd_dev.max((d[g.index(i, j)] - target).abs());
            }
        }
    }
    checks.push(ConstraintCheck {
        name: "boundary_derivatives",
        value: bd_dev,
        limit: 0.0,
        margin: -bd_dev,
        pass: bd_dev <= tol * c.ck_bound,
    });

    let pass = checks.iter().all(|c| c.pass);
    Ok(AdmissibilityReport { checks, pass })
}

/// Result of [`project_volume`].
#[derive(Clone, Debug)]
pub struct VolumeProjection {
    pub field: DesignField,
    /// Constant added to the interior nodes before clipping.
    pub shift: f64,
    pub iterations: usize,
}

const PROJECTION_REL_TOL: f64 = 1e-10;
const PROJECTION_MAX_ITER: usize = 200;

/// Shifts interior nodes by a constant, clipping to `[α_min, α_max]`, so the
/// trapezoid volume hits `L₁`. Boundary nodes are untouched.
pub fn project_volume(alpha: &DesignField, c: &DesignConstraints, basic: &BasicDesign) -> Result<VolumeProjection> {
    let g = alpha.grid;
    let target = c.volume;
    let tol = PROJECTION_REL_TOL * target;
    if (alpha.volume() - target).abs() <= tol {
        return Ok(VolumeProjection {
            field: alpha.clone(),
            shift: 0.0,
            iterations: 0,
        });
    }
    let (lo_val, hi_val) = (basic.alpha_min, basic.alpha_max);
    let shifted = |s: f64| {
        let mut f = alpha.clone();
        for i in 1..g.n1.saturating_sub(1) {
            for j in 1..g.n2.saturating_sub(1) {
                let idx = g.index(i, j);
                f.values[idx] = (alpha.values[idx] + s).clamp(lo_val, hi_val);
            }
        }
        f
    };

    let boundary_volume: f64 = g
        .boundary_nodes()
        .iter()
        .map(|&(i, j)| g.trapezoid_weight(i, j) * alpha.at(i, j))
        .sum();
    let interior = g.interior_area();
    let (v_min, v_max) = (boundary_volume + lo_val * interior, boundary_volume + hi_val * interior);
    if target < v_min - tol || target > v_max + tol {
        return Err(Error::Constraint(format!(
            "volume {target} not reachable by an interior shift (range [{v_min}, {v_max}])"
        )));
    }

    // first guess assumes no clipping
    let linear = (target - alpha.volume()) / interior;
    let first = shifted(linear);
    if (first.volume() - target).abs() <= tol {
        return Ok(VolumeProjection {
            field: first,
            shift: linear,
            iterations: 1,
        });
    }

    // V(s) is nondecreasing and piecewise linear; regula falsi with bisection fallback
    let reach = hi_val - lo_val
        + alpha
            .values
            .iter()
            .map(|v| (v - lo_val).abs().max((v - hi_val).abs()))
            .fold(0.0, f64::max);
    let (mut a, mut b) = (-reach, reach);
    let (mut fa, mut fb) = (shifted(a).volume() - target, shifted(b).volume() - target);
    for it in 0..PROJECTION_MAX_ITER {
        let mut s = if fb > fa {
            a - fa * (b - a) / (fb - fa)
        } else {
            0.5 * (a + b)
        };
        if !(s > a && s < b) || it % 3 == 2 {
            s = 0.5 * (a + b);
        }
        let f = shifted(s);
        let fs = f.volume() - target;
        if fs.abs() <= tol {
            return Ok(VolumeProjection {
                field: f,
                shift: s,
                iterations: it + 2,
            });
        }
        if fs < 0.0 {
            a = s;
            fa = fs;
        } else {
            b = s;
            fb = fs;
        }
    }
    Err(Error::Constraint(format!(
        "volume projection did not reach tolerance; bracket [{a}, {b}]"
    )))
}

/// Distance in the discrete `C^k` metric: max over orders `0..=k` of the
/// max-norm of the finite-difference derivatives of `a1 - a2`.
pub fn ck_distance(a1: &DesignField, a2: &DesignField, k: usize) -> Result<f64> {
    if !a1.grid.same_as(&a2.grid) {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a1.grid, a2.grid)));
    }
    check_grid_resolution(&a1.grid, k)?;
    let diff = DesignField {
        grid: a1.grid,
        values: a1.values.iter().zip(&a2.values).map(|(a, b)| a - b).collect(),
    };
    Ok(ck_norm(&diff, k))
}
