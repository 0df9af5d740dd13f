//! Finite models of the arboreal cube complexes `C(A_{n,m})` and `D(A_{n,m})`
//! built from a braid-free model of asymptotically rigid maps, together with
//! checks of their curvature properties.

pub mod analysis;
pub mod ball;
pub mod collapse;
pub mod complex;
pub mod domination;
pub mod error;
pub mod rigid;
pub mod structure;
pub mod verdict;
pub mod witness;

pub use ball::{build_ball, neighborhood_ball, Ball, BallJson, BallLimits, Cube};
pub use complex::{Complex, Family, Vertex, VertexJson, VertexKey};
pub use error::{Error, Result};
pub use rigid::{ray_shift, rotation, ElementKey, RigidMap, RigidMapJson};
pub use structure::{poly, Flavor, Params, PolygonId, Shape, Surface};
