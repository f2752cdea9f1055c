//! Trilinear hexahedron on an axis-aligned box.
//!
//! Reference coordinates `ξ ∈ [-1, 1]³`, local nodes ordered
//! `(-,-,-) (+,-,-) (+,+,-) (-,+,-) (-,-,+) (+,-,+) (+,+,+) (-,+,+)`.

use nalgebra::{SMatrix, SVector};

pub type ElementMatrix = SMatrix<f64, 24, 24>;
pub type ElementVector = SVector<f64, 24>;

pub const NODE_SIGNS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

const GAUSS: f64 = 0.577_350_269_189_625_8;

/// 2×2×2 Gauss points (unit weights).
pub fn gauss_points() -> impl Iterator<Item = [f64; 3]> {
    NODE_SIGNS.iter().map(|s| [s[0] * GAUSS, s[1] * GAUSS, s[2] * GAUSS])
}

pub fn shape_values(xi: [f64; 3]) -> [f64; 8] {
    let mut n = [0.0; 8];
    for (a, s) in NODE_SIGNS.iter().enumerate() {
        n[a] = 0.125 * (1.0 + s[0] * xi[0]) * (1.0 + s[1] * xi[1]) * (1.0 + s[2] * xi[2]);
    }
    n
}

/// Physical shape-function gradients `∂N_a/∂x_j` for a box of edge lengths `size`.
pub fn shape_gradients(xi: [f64; 3], size: [f64; 3]) -> [[f64; 3]; 8] {
    let mut g = [[0.0; 3]; 8];
    for (a, s) in NODE_SIGNS.iter().enumerate() {
        let f = [1.0 + s[0] * xi[0], 1.0 + s[1] * xi[1], 1.0 + s[2] * xi[2]];
        g[a] = [
            0.125 * s[0] * f[1] * f[2] * 2.0 / size[0],
            0.125 * f[0] * s[1] * f[2] * 2.0 / size[1],
            0.125 * f[0] * f[1] * s[2] * 2.0 / size[2],
        ];
    }
    g
}

/// Reference → physical point for a box whose lower corner is `corner`.
pub fn map_point(corner: [f64; 3], size: [f64; 3], xi: [f64; 3]) -> [f64; 3] {
    [
        corner[0] + 0.5 * (xi[0] + 1.0) * size[0],
        corner[1] + 0.5 * (xi[1] + 1.0) * size[1],
        corner[2] + 0.5 * (xi[2] + 1.0) * size[2],
    ]
}

/// Isotropic elasticity matrix in Voigt order `xx yy zz xy yz zx` (engineering shear).
fn elasticity_matrix(lambda: f64, mu: f64) -> SMatrix<f64, 6, 6> {
    let mut d = SMatrix::<f64, 6, 6>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            d[(i, j)] = lambda;
        }
        d[(i, i)] = lambda + 2.0 * mu;
        d[(i + 3, i + 3)] = mu;
    }
    d
}

fn strain_displacement(grads: &[[f64; 3]; 8]) -> SMatrix<f64, 6, 24> {
    let mut b = SMatrix::<f64, 6, 24>::zeros();
    for (a, g) in grads.iter().enumerate() {
        let c = 3 * a;
        b[(0, c)] = g[0];
        b[(1, c + 1)] = g[1];
        b[(2, c + 2)] = g[2];
        b[(3, c)] = g[1];
        b[(3, c + 1)] = g[0];
        b[(4, c + 1)] = g[2];
        b[(4, c + 2)] = g[1];
        b[(5, c)] = g[2];
        b[(5, c + 2)] = g[0];
    }
    b
}

/// Element stiffness `∫ Bᵀ D B dx` with 2×2×2 Gauss quadrature.
pub fn stiffness(size: [f64; 3], lambda: f64, mu: f64) -> ElementMatrix {
    let d = elasticity_matrix(lambda, mu);
    let det_j = size[0] * size[1] * size[2] / 8.0;
    let mut k = ElementMatrix::zeros();
    for xi in gauss_points() {
        let b = strain_displacement(&shape_gradients(xi, size));
        k += b.transpose() * d * b * det_j;
    }
    // remove rounding asymmetry from the triple product
    (k + k.transpose()) * 0.5
}

/// Consistent load `∫ N_a f dx` with 2×2×2 Gauss quadrature.
pub fn body_load(corner: [f64; 3], size: [f64; 3], f: impl Fn([f64; 3]) -> [f64; 3]) -> ElementVector {
    let det_j = size[0] * size[1] * size[2] / 8.0;
    let mut out = ElementVector::zeros();
    for xi in gauss_points() {
        let n = shape_values(xi);
        let fx = f(map_point(corner, size, xi));
        for a in 0..8 {
            for c in 0..3 {
                out[3 * a + c] += n[a] * fx[c] * det_j;
            }
        }
    }
    out
}
