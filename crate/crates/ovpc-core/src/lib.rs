//! Robot-centric free-space mapping from local point clouds.
//!
//! A cloud is reduced to the points visible from a viewpoint by radially
//! transforming it with an inverting kernel and taking the convex hull of the
//! images ([`ghpr`]). Copying the hull connectivity onto the original
//! coordinates of the visible points yields a closed, watertight triangle
//! mesh whose interior is a conservative estimate of the free space around
//! the viewpoint. The mesh is classified by traversability
//! ([`traversability`]) and exposed as a queryable navigation map
//! ([`navmap`]) supporting nearest-point, state-projection, and collision
//! queries for a local planner.
//!
//! Supporting pieces: a posed-scan ring buffer with voxel down-sampling
//! ([`buffer`]), synthetic scenes and a normal-accuracy study against a
//! covariance baseline ([`eval`]), a wall-clock benchmark of the map build
//! ([`bench`]), and ASCII file formats ([`io`]).

pub mod bench;
pub mod buffer;
pub mod error;
pub mod eval;
pub mod geom;
pub mod ghpr;
pub mod hull;
pub mod io;
pub mod navmap;
pub mod raycast;
pub mod spatial;
pub mod traversability;

pub use error::{Error, ErrorKind};
pub use geom::{Point3, PointCloud, Pose3, TriangleMesh, UnitQuat, Vec3};
