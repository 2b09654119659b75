//! Shared-boundary surface extraction from labeled voxel volumes.
//!
//! The pipeline runs in independent stages: [`extract`](extract::extract)
//! pulls a quad mesh with smoothing stencils out of a labeled volume in four
//! data-parallel passes, [`smooth`](smooth::smooth) relaxes it under a
//! per-vertex containment constraint, and
//! [`triangulate`](triangulate::triangulate) splits each quad along a chosen
//! diagonal. Every stage is deterministic: results are byte-identical for
//! every thread count, and the `parallel` feature only changes how fast the
//! same bytes are produced.

pub mod exec;
pub mod extract;
pub mod labels;
pub mod mesh;
pub mod oracle;
pub mod smooth;
pub mod triangulate;
pub mod volume;

pub use extract::{extract, extract_with_stats, ExtractError, ExtractOptions, ExtractStats};
pub use labels::{build_label_set, LabelSelector, SelectedLabelSet, BACKGROUND};
pub use mesh::{SurfaceNetMesh, TriangleMesh};
pub use smooth::{smooth, ConstraintMode, SmoothingParams};
pub use triangulate::{triangulate, TriangulationStrategy};
pub use volume::{gen_spheres, load_volume, save_volume, LabeledVolume, Scalars, SphereSpec};
