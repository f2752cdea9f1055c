//! Voxel hexahedral meshes with tagged boundary faces.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::design::{BasicDesign, DesignField};
use crate::error::{Error, Result};

/// Boundary condition class of a boundary face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceTag {
    /// Clamped: `u = 0` (or prescribed data).
    Dirichlet,
    /// Traction boundary that is not part of the designed surface.
    Neumann,
    /// Traction boundary generated by the design variable.
    Designed,
}

impl FaceTag {
    pub fn code(self) -> i32 {
        match self {
            FaceTag::Dirichlet => 0,
            FaceTag::Neumann => 1,
            FaceTag::Designed => 2,
        }
    }

    pub fn is_traction(self) -> bool {
        !matches!(self, FaceTag::Dirichlet)
    }
}

/// One of the six faces of a hexahedron.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    XMinus,
    XPlus,
    YMinus,
    YPlus,
    ZMinus,
    ZPlus,
}

impl Side {
    pub const ALL: [Side; 6] = [
        Side::XMinus,
        Side::XPlus,
        Side::YMinus,
        Side::YPlus,
        Side::ZMinus,
        Side::ZPlus,
    ];

    pub fn axis(self) -> usize {
        match self {
            Side::XMinus | Side::XPlus => 0,
            Side::YMinus | Side::YPlus => 1,
            Side::ZMinus | Side::ZPlus => 2,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Side::XMinus | Side::YMinus | Side::ZMinus => -1.0,
            _ => 1.0,
        }
    }

    pub fn normal(self) -> [f64; 3] {
        let mut n = [0.0; 3];
        n[self.axis()] = self.sign();
        n
    }

    /// Reference coordinates of the face center.
    pub fn center_ref(self) -> [f64; 3] {
        self.normal()
    }

    /// Local node indices on this face (hexahedron ordering of [`crate::elasticity::element`]).
    pub fn local_nodes(self) -> [usize; 4] {
        match self {
            Side::XMinus => [0, 3, 7, 4],
            Side::XPlus => [1, 2, 6, 5],
            Side::YMinus => [0, 1, 5, 4],
            Side::YPlus => [3, 2, 6, 7],
            Side::ZMinus => [0, 1, 2, 3],
            Side::ZPlus => [4, 5, 6, 7],
        }
    }
}

/// A boundary face of the voxel mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFace {
    pub element: usize,
    pub side: Side,
    pub tag: FaceTag,
    pub center: [f64; 3],
    pub normal: [f64; 3],
    pub area: f64,
}

/// Structured voxel mesh; every element is an axis-aligned box of size `spacing`.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub dims: [usize; 3],
    pub nodes: Vec<[f64; 3]>,
    /// Eight node ids per element in the reference hexahedron order.
    pub elements: Vec<[usize; 8]>,
    /// Lattice index `(i, j, k)` of each element.
    pub cells: Vec<[usize; 3]>,
    pub faces: Vec<BoundaryFace>,
}

/// What lies across a boundary face.
#[derive(Clone, Copy, Debug)]
pub enum Across {
    /// Past the edge of the voxel lattice.
    Outside,
    /// An unoccupied lattice cell.
    Empty([usize; 3]),
}

impl Mesh {
    /// Builds a mesh from an occupancy predicate on the voxel lattice.
    /// `tagger` classifies each boundary face.
    pub fn from_voxels(
        origin: [f64; 3],
        spacing: [f64; 3],
        dims: [usize; 3],
        occupied: impl Fn([usize; 3]) -> bool,
        tagger: impl Fn([usize; 3], Side, Across) -> FaceTag,
    ) -> Mesh {
        let [nx, ny, nz] = dims;
        let cell_id = |c: [usize; 3]| (c[2] * ny + c[1]) * nx + c[0];
        let mut occ = vec![false; nx * ny * nz];
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    occ[cell_id([i, j, k])] = occupied([i, j, k]);
                }
            }
        }

        let node_lattice = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
        let mut node_of = vec![usize::MAX; (nx + 1) * (ny + 1) * (nz + 1)];
        let mut nodes = Vec::new();
        let mut elements = Vec::new();
        let mut cells = Vec::new();
        const CORNERS: [[usize; 3]; 8] = [
            [0, 0, 0],
            [1, 0, 0],
            [1, 1, 0],
            [0, 1, 0],
            [0, 0, 1],
            [1, 0, 1],
            [1, 1, 1],
            [0, 1, 1],
        ];
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    if !occ[cell_id([i, j, k])] {
                        continue;
                    }
                    let mut conn = [0; 8];
                    for (a, off) in CORNERS.iter().enumerate() {
                        let (ii, jj, kk) = (i + off[0], j + off[1], k + off[2]);
                        let slot = &mut node_of[node_lattice(ii, jj, kk)];
                        if *slot == usize::MAX {
                            *slot = nodes.len();
                            nodes.push([
                                origin[0] + ii as f64 * spacing[0],
                                origin[1] + jj as f64 * spacing[1],
                                origin[2] + kk as f64 * spacing[2],
                            ]);
                        }
                        conn[a] = *slot;
                    }
                    elements.push(conn);
                    cells.push([i, j, k]);
                }
            }
        }

        let mut faces = Vec::new();
        for (e, &cell) in cells.iter().enumerate() {
            for side in Side::ALL {
                let axis = side.axis();
                let neighbor = if side.sign() < 0.0 {
                    cell[axis].checked_sub(1)
                } else if cell[axis] + 1 < dims[axis] {
                    Some(cell[axis] + 1)
                } else {
                    None
                };
                let across = match neighbor {
                    None => Across::Outside,
                    Some(v) => {
                        let mut n = cell;
                        n[axis] = v;
                        if occ[cell_id(n)] {
                            continue;
                        }
                        Across::Empty(n)
                    }
                };
                let mut center = [0.0; 3];
                for d in 0..3 {
                    center[d] = origin[d] + (cell[d] as f64 + 0.5) * spacing[d];
                }
                center[axis] += side.sign() * 0.5 * spacing[axis];
                let area = (0..3).filter(|&d| d != axis).map(|d| spacing[d]).product();
                faces.push(BoundaryFace {
                    element: e,
                    side,
                    tag: tagger(cell, side, across),
                    center,
                    normal: side.normal(),
                    area,
                });
            }
        }

        Mesh {
            spacing,
            origin,
            dims,
            nodes,
            elements,
            cells,
            faces,
        }
    }

    /// Full box of `dims` voxels with every boundary face tagged by `tagger(center, normal)`.
    pub fn structured_box(
        origin: [f64; 3],
        spacing: [f64; 3],
        dims: [usize; 3],
        tagger: impl Fn([f64; 3], [f64; 3]) -> FaceTag,
    ) -> Mesh {
        Mesh::from_voxels(
            origin,
            spacing,
            dims,
            |_| true,
            |cell, side, _| {
                let mut c = [0.0; 3];
                for d in 0..3 {
                    c[d] = origin[d] + (cell[d] as f64 + 0.5) * spacing[d];
                }
                c[side.axis()] += side.sign() * 0.5 * spacing[side.axis()];
                tagger(c, side.normal())
            },
        )
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.cell_volume() * self.num_elements() as f64
    }

    pub fn element_center(&self, e: usize) -> [f64; 3] {
        let c = self.cells[e];
        let mut x = [0.0; 3];
        for d in 0..3 {
            x[d] = self.origin[d] + (c[d] as f64 + 0.5) * self.spacing[d];
        }
        x
    }

    /// Node ids touching at least one face with the given tag, sorted.
    pub fn nodes_with_tag(&self, tag: FaceTag) -> Vec<usize> {
        let mut mark = vec![false; self.num_nodes()];
        for f in self.faces.iter().filter(|f| f.tag == tag) {
            for l in f.side.local_nodes() {
                mark[self.elements[f.element][l]] = true;
            }
        }
        mark.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect()
    }

    pub fn face_count(&self, tag: FaceTag) -> usize {
        self.faces.iter().filter(|f| f.tag == tag).count()
    }

    /// Number of face-connected components of the element set.
    pub fn connected_components(&self) -> usize {
        let [nx, ny, nz] = self.dims;
        let cell_id = |c: [usize; 3]| (c[2] * ny + c[1]) * nx + c[0];
        let mut elem_of = vec![usize::MAX; nx * ny * nz];
        for (e, &c) in self.cells.iter().enumerate() {
            elem_of[cell_id(c)] = e;
        }
        let mut seen = vec![false; self.num_elements()];
        let mut components = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.num_elements() {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(e) = queue.pop_front() {
                let c = self.cells[e];
                for side in Side::ALL {
                    let axis = side.axis();
                    let v = if side.sign() < 0.0 {
                        c[axis].checked_sub(1)
                    } else {
                        Some(c[axis] + 1).filter(|&v| v < self.dims[axis])
                    };
                    if let Some(v) = v {
                        let mut n = c;
                        n[axis] = v;
                        let other = elem_of[cell_id(n)];
                        if other != usize::MAX && !seen[other] {
                            seen[other] = true;
                            queue.push_back(other);
                        }
                    }
                }
            }
        }
        components
    }
}

/// Voxelizes `Ω(α)` with cubic voxels of edge `h`.
///
/// A voxel is kept iff its center lies in `Ω(α)`. Faces next to clamp-cavity
/// voxels are DIRICHLET; column tops and the risers between epigraph columns
/// are DESIGNED; everything else NEUMANN.
pub fn build_mesh(basic: &BasicDesign, alpha: &DesignField, h: f64) -> Result<Mesh> {
    basic.validate()?;
    if !(h > 0.0) {
        return Err(Error::Mesh(format!("voxel size must be positive, got {h}")));
    }
    if !(h < 0.5 * basic.clamp_radius) {
        return Err(Error::Mesh(format!(
            "voxel size {h} cannot resolve clamp radius {} (need h < r/2)",
            basic.clamp_radius
        )));
    }
    let origin = basic.lower;
    let cells_along = |len: f64| ((len / h) - 1e-9).ceil().max(1.0) as usize;
    let dims = [
        cells_along(basic.upper[0] - basic.lower[0]),
        cells_along(basic.upper[1] - basic.lower[1]),
        cells_along(basic.alpha_max - basic.lower[2]),
    ];
    let center = |c: [usize; 3]| {
        [
            origin[0] + (c[0] as f64 + 0.5) * h,
            origin[1] + (c[1] as f64 + 0.5) * h,
            origin[2] + (c[2] as f64 + 0.5) * h,
        ]
    };
    let in_box = |x: [f64; 3]| (0..3).all(|d| x[d] > basic.lower[d] && x[d] < basic.upper[d]);
    let is_cavity = |c: [usize; 3]| {
        let x = center(c);
        x[2] <= basic.alpha_min && in_box(x) && basic.in_clamp(x)
    };
    let occupied = |c: [usize; 3]| {
        let x = center(c);
        if x[2] <= basic.alpha_min {
            in_box(x) && !basic.in_clamp(x)
        } else {
            basic.in_cross_section(x[0], x[1]) && x[2] < alpha.interpolate(x[0], x[1])
        }
    };
    let tagger = |cell: [usize; 3], side: Side, across: Across| {
        if let Across::Empty(n) = across {
            if is_cavity(n) {
                return FaceTag::Dirichlet;
            }
        }
        match side {
            Side::ZPlus => FaceTag::Designed,
            Side::ZMinus => FaceTag::Neumann,
            _ => {
                let here = center(cell);
                match across {
                    Across::Empty(n) if here[2] > basic.alpha_min => {
                        let there = center(n);
                        if basic.in_cross_section(there[0], there[1]) {
                            FaceTag::Designed
                        } else {
                            FaceTag::Neumann
                        }
                    }
                    _ => FaceTag::Neumann,
                }
            }
        }
    };
    let mesh = Mesh::from_voxels(origin, [h; 3], dims, occupied, tagger);
    if mesh.num_elements() == 0 {
        return Err(Error::Mesh("no voxel centers inside the design".into()));
    }
    if mesh.face_count(FaceTag::Dirichlet) == 0 {
        return Err(Error::Mesh("clamp cavity produced no DIRICHLET faces".into()));
    }
    let parts = mesh.connected_components();
    if parts != 1 {
        return Err(Error::Mesh(format!("voxel mesh has {parts} disconnected parts")));
    }
    Ok(mesh)
}

/// One face-center quadrature point.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceQuadPoint {
    /// Index into [`Mesh::faces`].
    pub face: usize,
    pub element: usize,
    pub side: Side,
    pub tag: FaceTag,
    pub point: [f64; 3],
    pub normal: [f64; 3],
    pub weight: f64,
    /// Half-edge vectors spanning the face around `point`.
    pub half_edges: [[f64; 3]; 2],
}

/// Face-center quadrature over the boundary faces whose tag is in `tags`.
pub fn surface_quadrature(mesh: &Mesh, tags: &[FaceTag]) -> Vec<SurfaceQuadPoint> {
    mesh.faces
        .iter()
        .enumerate()
        .filter(|(_, f)| tags.contains(&f.tag))
        .map(|(i, f)| {
            let axis = f.side.axis();
            let mut half_edges = [[0.0; 3]; 2];
            for (slot, d) in (0..3).filter(|&d| d != axis).enumerate() {
                half_edges[slot][d] = 0.5 * mesh.spacing[d];
            }
            SurfaceQuadPoint {
                face: i,
                element: f.element,
                side: f.side,
                tag: f.tag,
                point: f.center,
                normal: f.normal,
                weight: f.area,
                half_edges,
            }
        })
        .collect()
}

pub const ALL_TAGS: [FaceTag; 3] = [FaceTag::Dirichlet, FaceTag::Neumann, FaceTag::Designed];
pub const TRACTION_TAGS: [FaceTag; 2] = [FaceTag::Neumann, FaceTag::Designed];
