//! Basic design, design variables, admissibility and voxel meshing of `Ω(α)`.

pub mod design;
pub mod mesh;

pub use design::{
    check_admissible, ck_distance, ck_norm, project_volume, top_order_lipschitz, AdmissibilityReport, BasicDesign,
    BoundaryDerivative, ConstraintCheck, DesignConstraints, DesignField, DesignGrid, VolumeProjection,
};
pub use mesh::{build_mesh, surface_quadrature, Across, BoundaryFace, FaceTag, Mesh, Side, SurfaceQuadPoint};
