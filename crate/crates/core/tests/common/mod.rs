//! Oracles shared by the integration test targets.
#![allow(dead_code)]

use fatigue_shape::elasticity::{
    assemble, assemble_with_dirichlet, element, grad_at, solve, LoadCase, SolveOptions, TractionFaces, VectorField,
};
use fatigue_shape::geometry::{FaceTag, Mesh};
use fatigue_shape::material::{MaterialParams, MaterialSpec};
use nalgebra::Matrix3;

pub fn steel() -> MaterialParams {
    MaterialParams::new(MaterialSpec::default()).unwrap()
}

pub fn unit_lame() -> MaterialParams {
    MaterialParams::new(MaterialSpec {
        lambda: 1.0,
        mu: 1.0,
        ..MaterialSpec::default()
    })
    .unwrap()
}

/// Strain of a constant stress state by inverting isotropic Hooke's law.
pub fn strain_from_stress(sigma: &Matrix3<f64>, p: &MaterialParams) -> Matrix3<f64> {
    let (l, m) = (p.lambda(), p.mu());
    (sigma - Matrix3::identity() * (l / (3.0 * l + 2.0 * m) * sigma.trace())) / (2.0 * m)
}

pub fn unit_cube(n: usize, tagger: impl Fn([f64; 3], [f64; 3]) -> FaceTag) -> Mesh {
    let h = 1.0 / n as f64;
    Mesh::structured_box([0.0; 3], [h; 3], [n, n, n], tagger)
}

/// Outward normal of the unit cube face containing `x`.
pub fn unit_cube_normal(x: [f64; 3]) -> [f64; 3] {
    let mut nrm = [0.0; 3];
    for d in 0..3 {
        if x[d] < 1e-12 {
            nrm[d] = -1.0;
            return nrm;
        }
        if x[d] > 1.0 - 1e-12 {
            nrm[d] = 1.0;
            return nrm;
        }
    }
    panic!("{x:?} is not on the unit cube boundary");
}

pub struct PatchResult {
    pub sigma0: Matrix3<f64>,
    /// Largest relative deviation of the recovered stress from `sigma0`.
    pub max_rel_error: f64,
    pub mesh: Mesh,
}

/// Box clamped at the bottom with affine data `u = A x`, loaded by `σ⁰ ν` on the
/// remaining faces; the exact solution is the affine field.
pub fn patch_test(n: usize, p: &MaterialParams) -> PatchResult {
    let sigma0 = Matrix3::new(120.0, 30.0, -15.0, 30.0, -40.0, 25.0, -15.0, 25.0, 80.0);
    let a = strain_from_stress(&sigma0, p);
    let mesh = unit_cube(n, |c, _| {
        if c[2] < 1e-12 {
            FaceTag::Dirichlet
        } else {
            FaceTag::Neumann
        }
    });
    let traction = VectorField::custom(move |x| {
        let v = sigma0 * nalgebra::Vector3::from(unit_cube_normal(x));
        [v[0], v[1], v[2]]
    });
    let load = LoadCase {
        body_force: VectorField::ZERO,
        traction,
        traction_faces: TractionFaces::AllNeumann,
        t_star: 1.0,
    };
    let affine = VectorField::Affine {
        offset: [0.0; 3],
        gradient: [
            [a[(0, 0)], a[(0, 1)], a[(0, 2)]],
            [a[(1, 0)], a[(1, 1)], a[(1, 2)]],
            [a[(2, 0)], a[(2, 1)], a[(2, 2)]],
        ],
    };
    let sys = assemble_with_dirichlet(&mesh, p, &load, &affine).unwrap();
    let opts = SolveOptions {
        rel_tol: 1e-14,
        max_iter: 10_000,
    };
    let u = solve(&mesh, &sys, &opts).unwrap();
    let scale = sigma0.amax();
    let mut worst: f64 = 0.0;
    for e in 0..mesh.num_elements() {
        for xi in element::gauss_points().chain([[1.0, -1.0, 1.0]]) {
            let g = grad_at(&u, e, xi);
            let s = fatigue_shape::material::stress_from_gradient(&g, p);
            worst = worst.max((s - sigma0).amax() / scale);
        }
    }
    drop(u);
    PatchResult {
        sigma0,
        max_rel_error: worst,
        mesh,
    }
}

const MS_AMP: [f64; 3] = [1.0, -0.5, 0.25];

fn ms_s(x: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let pi = std::f64::consts::PI;
    let s = [(pi * x[0]).sin(), (pi * x[1]).sin(), (pi * x[2]).sin()];
    let c = [(pi * x[0]).cos(), (pi * x[1]).cos(), (pi * x[2]).cos()];
    (s, c)
}

/// Exact field `u = sin πx sin πy sin πz · a`.
pub fn ms_exact(x: [f64; 3]) -> [f64; 3] {
    let (s, _) = ms_s(x);
    let v = s[0] * s[1] * s[2];
    MS_AMP.map(|a| a * v)
}

/// Body force `−div σ(u)` for the manufactured field.
pub fn ms_body_force(x: [f64; 3], lambda: f64, mu: f64) -> [f64; 3] {
    let pi2 = std::f64::consts::PI.powi(2);
    let (s, c) = ms_s(x);
    let val = s[0] * s[1] * s[2];
    let hess = |i: usize, j: usize| -> f64 {
        if i == j {
            -pi2 * val
        } else {
            let k = 3 - i - j;
            pi2 * c[i] * c[j] * s[k]
        }
    };
    let mut f = [0.0; 3];
    for i in 0..3 {
        let grad_div: f64 = (0..3).map(|j| MS_AMP[j] * hess(i, j)).sum();
        f[i] = -(lambda + mu) * grad_div + 3.0 * pi2 * mu * MS_AMP[i] * val;
    }
    f
}

/// L² error of the FE solution of the manufactured problem on an `n³` cube.
pub fn manufactured_l2_error(n: usize, p: &MaterialParams) -> f64 {
    let mesh = unit_cube(n, |_, _| FaceTag::Dirichlet);
    let (l, m) = (p.lambda(), p.mu());
    let load = LoadCase {
        body_force: VectorField::custom(move |x| ms_body_force(x, l, m)),
        traction: VectorField::ZERO,
        traction_faces: TractionFaces::AllNeumann,
        t_star: 1.0,
    };
    let sys = assemble(&mesh, p, &load).unwrap();
    let u = solve(
        &mesh,
        &sys,
        &SolveOptions {
            rel_tol: 1e-12,
            max_iter: 20_000,
        },
    )
    .unwrap();
    // 3-point Gauss per axis, finer than the assembly rule
    let pts = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let wts = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let jac = mesh.cell_volume() / 8.0;
    let mut err2 = 0.0;
    for (e, conn) in mesh.elements.iter().enumerate() {
        let corner = mesh.nodes[conn[0]];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let xi = [pts[i], pts[j], pts[k]];
                    let x = element::map_point(corner, mesh.spacing, xi);
                    let uh = u.value_at(e, xi);
                    let ue = ms_exact(x);
                    let d2: f64 = (0..3).map(|c| (uh[c] - ue[c]).powi(2)).sum();
                    err2 += wts[i] * wts[j] * wts[k] * jac * d2;
                }
            }
        }
    }
    err2.sqrt()
}
