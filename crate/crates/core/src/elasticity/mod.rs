//! Linear isotropic elasticity on voxel meshes: assembly of the weak form,
//! Dirichlet elimination, PCG solve and gradient recovery on the boundary.

pub mod element;
pub mod sparse;

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FaceTag, Mesh, SurfaceQuadPoint};
use crate::life::Life;
use crate::material::{n_det, stress_from_gradient, von_mises, MaterialParams};
pub use sparse::{pcg, CsrMatrix, SolveOptions, SolveStats};

/// A vector field on the ambient space, used for body forces, tractions and
/// prescribed displacements.
#[derive(Clone)]
pub enum VectorField {
    Constant([f64; 3]),
    /// `offset + gradient · x`.
    Affine {
        offset: [f64; 3],
        gradient: [[f64; 3]; 3],
    },
    Custom(Arc<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>),
}

impl VectorField {
    pub const ZERO: VectorField = VectorField::Constant([0.0; 3]);

    pub fn custom(f: impl Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static) -> Self {
        VectorField::Custom(Arc::new(f))
    }

    pub fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        match self {
            VectorField::Constant(v) => *v,
            VectorField::Affine { offset, gradient } => {
                let mut out = *offset;
                for i in 0..3 {
                    for j in 0..3 {
                        out[i] += gradient[i][j] * x[j];
                    }
                }
                out
            }
            VectorField::Custom(f) => f(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, VectorField::Constant(v) if *v == [0.0; 3])
    }

    /// The field multiplied by `s`.
    pub fn scaled(&self, s: f64) -> VectorField {
        match self {
            VectorField::Constant(v) => VectorField::Constant(v.map(|c| c * s)),
            VectorField::Affine { offset, gradient } => VectorField::Affine {
                offset: offset.map(|c| c * s),
                gradient: gradient.map(|r| r.map(|c| c * s)),
            },
            VectorField::Custom(f) => {
                let f = f.clone();
                VectorField::custom(move |x| f(x).map(|c| c * s))
            }
        }
    }

    /// Pointwise sum of two fields.
    pub fn plus(&self, other: &VectorField) -> VectorField {
        match (self, other) {
            (VectorField::Constant(a), VectorField::Constant(b)) => {
                VectorField::Constant([a[0] + b[0], a[1] + b[1], a[2] + b[2]])
            }
            _ => {
                let (a, b) = (self.clone(), other.clone());
                VectorField::custom(move |x| {
                    let (u, v) = (a.eval(x), b.eval(x));
                    [u[0] + v[0], u[1] + v[1], u[2] + v[2]]
                })
            }
        }
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorField::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            VectorField::Affine { offset, gradient } => f
                .debug_struct("Affine")
                .field("offset", offset)
                .field("gradient", gradient)
                .finish(),
            VectorField::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Which traction faces receive the surface load `g`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TractionFaces {
    /// Every NEUMANN and DESIGNED face.
    #[default]
    AllNeumann,
    /// DESIGNED faces only.
    DesignedOnly,
}

impl TractionFaces {
    pub fn selects(self, tag: FaceTag) -> bool {
        match self {
            TractionFaces::AllNeumann => tag.is_traction(),
            TractionFaces::DesignedOnly => tag == FaceTag::Designed,
        }
    }
}

/// Loads of the (maximum-load) state problem and the warranty time.
#[derive(Clone, Debug)]
pub struct LoadCase {
    pub body_force: VectorField,
    pub traction: VectorField,
    pub traction_faces: TractionFaces,
    /// Warranty time `t*` in cycles.
    pub t_star: f64,
}

impl LoadCase {
    pub fn unloaded(t_star: f64) -> Self {
        LoadCase {
            body_force: VectorField::ZERO,
            traction: VectorField::ZERO,
            traction_faces: TractionFaces::AllNeumann,
            t_star,
        }
    }
}

const FREE_NONE: usize = usize::MAX;

/// Reduced linear system over the free degrees of freedom.
#[derive(Clone, Debug)]
pub struct System {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Free-dof index of `3·node + component`, or `usize::MAX` if constrained.
    dof_of: Vec<usize>,
    /// Full-length vector with the prescribed values on constrained dofs.
    prescribed: Vec<f64>,
    /// Full-length load vector `L(φ_i)` before elimination.
    load: Vec<f64>,
}

impl System {
    pub fn num_free(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_constrained(&self, node: usize, comp: usize) -> bool {
        self.dof_of[3 * node + comp] == FREE_NONE
    }

    /// Full load vector, including entries at constrained dofs.
    pub fn load_vector(&self) -> &[f64] {
        &self.load
    }
}

/// Assembles with homogeneous Dirichlet data on DIRICHLET faces.
pub fn assemble(mesh: &Mesh, p: &MaterialParams, load: &LoadCase) -> Result<System> {
    assemble_with_dirichlet(mesh, p, load, &VectorField::ZERO)
}

/// Assembles the weak form with prescribed displacement `dirichlet` on the
/// nodes of DIRICHLET faces, eliminated symmetrically.
pub fn assemble_with_dirichlet(
    mesh: &Mesh,
    p: &MaterialParams,
    load: &LoadCase,
    dirichlet: &VectorField,
) -> Result<System> {
    let constrained_nodes = mesh.nodes_with_tag(FaceTag::Dirichlet);
    if constrained_nodes.is_empty() {
        return Err(Error::Assembly(
            "no DIRICHLET faces: stiffness is singular up to rigid-body modes".into(),
        ));
    }
    let n_nodes = mesh.num_nodes();
    let mut prescribed = vec![0.0; 3 * n_nodes];
    let mut constrained = vec![false; n_nodes];
    for &n in &constrained_nodes {
        constrained[n] = true;
        let v = dirichlet.eval(mesh.nodes[n]);
        prescribed[3 * n..3 * n + 3].copy_from_slice(&v);
    }
    let mut dof_of = vec![FREE_NONE; 3 * n_nodes];
    let mut n_free = 0;
    for n in 0..n_nodes {
        if !constrained[n] {
            for c in 0..3 {
                dof_of[3 * n + c] = n_free;
                n_free += 1;
            }
        }
    }

    // node adjacency through shared elements gives the sparsity pattern
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    for conn in &mesh.elements {
        for &a in conn {
            adjacency[a].extend_from_slice(conn);
        }
    }
    let mut rows = vec![Vec::new(); n_free];
    for (n, adj) in adjacency.iter_mut().enumerate() {
        adj.sort_unstable();
        adj.dedup();
        if constrained[n] {
            continue;
        }
        let cols: Vec<usize> = adj
            .iter()
            .flat_map(|&m| (0..3).map(move |c| 3 * m + c))
            .map(|d| dof_of[d])
            .filter(|&d| d != FREE_NONE)
            .collect();
        for c in 0..3 {
            rows[dof_of[3 * n + c]] = cols.clone();
        }
    }
    drop(adjacency);
    let mut matrix = CsrMatrix::from_pattern(rows);

    let ke = element::stiffness(mesh.spacing, p.lambda(), p.mu());
    let mut load_full = vec![0.0; 3 * n_nodes];
    let has_body = !load.body_force.is_zero();
    for conn in &mesh.elements {
        let dofs: [usize; 24] = std::array::from_fn(|k| 3 * conn[k / 3] + k % 3);
        for (i, &gi) in dofs.iter().enumerate() {
            let fi = dof_of[gi];
            if fi == FREE_NONE {
                continue;
            }
            for (j, &gj) in dofs.iter().enumerate() {
                let fj = dof_of[gj];
                if fj != FREE_NONE {
                    matrix.add(fi, fj, ke[(i, j)]);
                }
            }
        }
        if has_body {
            let corner = mesh.nodes[conn[0]];
            let fe = element::body_load(corner, mesh.spacing, |x| load.body_force.eval(x));
            for (k, &g) in dofs.iter().enumerate() {
                load_full[g] += fe[k];
            }
        }
    }

    if !load.traction.is_zero() {
        for face in mesh.faces.iter().filter(|f| load.traction_faces.selects(f.tag)) {
            let g = load.traction.eval(face.center);
            let conn = &mesh.elements[face.element];
            // bilinear face shape functions all equal 1/4 at the face center
            for l in face.side.local_nodes() {
                for c in 0..3 {
                    load_full[3 * conn[l] + c] += 0.25 * face.area * g[c];
                }
            }
        }
    }

    let mut rhs: Vec<f64> = (0..3 * n_nodes)
        .filter(|&d| dof_of[d] != FREE_NONE)
        .map(|d| load_full[d])
        .collect();
    if prescribed.iter().any(|&v| v != 0.0) {
        // move K_fd u_d to the right-hand side
        for conn in &mesh.elements {
            let dofs: [usize; 24] = std::array::from_fn(|k| 3 * conn[k / 3] + k % 3);
            for (i, &gi) in dofs.iter().enumerate() {
                let fi = dof_of[gi];
                if fi == FREE_NONE {
                    continue;
                }
                for (j, &gj) in dofs.iter().enumerate() {
                    if dof_of[gj] == FREE_NONE {
                        rhs[fi] -= ke[(i, j)] * prescribed[gj];
                    }
                }
            }
        }
    }

    Ok(System {
        matrix,
        rhs,
        dof_of,
        prescribed,
        load: load_full,
    })
}

/// Nodal displacements on a mesh.
#[derive(Clone, Debug)]
pub struct DisplacementField<'m> {
    pub mesh: &'m Mesh,
    pub values: Vec<[f64; 3]>,
    pub stats: SolveStats,
}

/// Solves the reduced system and scatters back to all nodes.
pub fn solve<'m>(mesh: &'m Mesh, system: &System, opts: &SolveOptions) -> Result<DisplacementField<'m>> {
    let (x, stats) = pcg(&system.matrix, &system.rhs, opts)?;
    let mut values = vec![[0.0; 3]; mesh.num_nodes()];
    for (n, v) in values.iter_mut().enumerate() {
        for c in 0..3 {
            let d = 3 * n + c;
            v[c] = match system.dof_of[d] {
                FREE_NONE => system.prescribed[d],
                f => x[f],
            };
        }
    }
    Ok(DisplacementField { mesh, values, stats })
}

impl DisplacementField<'_> {
    /// Flattened `[u₀ₓ, u₀ᵧ, u₀𝓏, u₁ₓ, …]`.
    pub fn flat(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }

    pub fn value_at(&self, element: usize, xi: [f64; 3]) -> [f64; 3] {
        let n = element::shape_values(xi);
        let conn = &self.mesh.elements[element];
        let mut u = [0.0; 3];
        for a in 0..8 {
            for c in 0..3 {
                u[c] += n[a] * self.values[conn[a]][c];
            }
        }
        u
    }

    /// Energy `B(u, u) = uᵀ K u` over the whole mesh.
    pub fn energy(&self, p: &MaterialParams) -> f64 {
        let ke = element::stiffness(self.mesh.spacing, p.lambda(), p.mu());
        let mut total = 0.0;
        for conn in &self.mesh.elements {
            let ue = nalgebra::SVector::<f64, 24>::from_fn(|k, _| self.values[conn[k / 3]][k % 3]);
            total += ue.dot(&(ke * ue));
        }
        total
    }
}

/// Exact gradient `∂u_i/∂x_j` of the trilinear interpolant at reference point `xi`.
pub fn grad_at(u: &DisplacementField<'_>, element: usize, xi: [f64; 3]) -> Matrix3<f64> {
    let g = element::shape_gradients(xi, u.mesh.spacing);
    let conn = &u.mesh.elements[element];
    let mut m = Matrix3::zeros();
    for a in 0..8 {
        let ua = u.values[conn[a]];
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] += ua[i] * g[a][j];
            }
        }
    }
    m
}

/// Boundary data at one surface quadrature point.
#[derive(Clone, Debug)]
pub struct SurfacePoint {
    pub quad: SurfaceQuadPoint,
    pub displacement: [f64; 3],
    pub grad: Matrix3<f64>,
    pub sigma_v: f64,
    pub n_det: Life,
}

/// Per-quadrature-point displacement gradient, von Mises stress and
/// deterministic life on (part of) the boundary.
#[derive(Clone, Debug, Default)]
pub struct SurfaceField {
    pub points: Vec<SurfacePoint>,
}

impl SurfaceField {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.points.iter().map(|p| p.quad.weight).sum()
    }

    /// Builds a field directly from `(weight, life)` pairs, for analysis
    /// without a mesh.
    pub fn from_lives(samples: &[(f64, Life)]) -> Self {
        let points = samples
            .iter()
            .enumerate()
            .map(|(i, &(weight, n_det))| SurfacePoint {
                quad: SurfaceQuadPoint {
                    face: i,
                    element: 0,
                    side: crate::geometry::Side::ZPlus,
                    tag: FaceTag::Neumann,
                    point: [i as f64, 0.0, 0.0],
                    normal: [0.0, 0.0, 1.0],
                    weight,
                    half_edges: [[0.5 * weight.sqrt(), 0.0, 0.0], [0.0, 0.5 * weight.sqrt(), 0.0]],
                },
                displacement: [0.0; 3],
                grad: Matrix3::zeros(),
                sigma_v: 0.0,
                n_det,
            })
            .collect();
        SurfaceField { points }
    }
}

/// Evaluates `∇u` one-sided from the owning element at each face center, then
/// `σ_v` and `N_det` through the material chain.
pub fn surface_field(u: &DisplacementField<'_>, quad: &[SurfaceQuadPoint], p: &MaterialParams) -> Result<SurfaceField> {
    let points = quad
        .iter()
        .map(|q| {
            let xi = q.side.center_ref();
            let grad = grad_at(u, q.element, xi);
            let sigma_v = von_mises(&stress_from_gradient(&grad, p));
            Ok(SurfacePoint {
                quad: q.clone(),
                displacement: u.value_at(q.element, xi),
                grad,
                sigma_v,
                n_det: n_det(&grad, p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceField { points })
}
