//! Design synthesis and grasp analysis for planar fractal-finger grippers.
//!
//! The pipeline runs: boundary [`profile`]s -> box-counting [`complexity`]
//! scales -> joint-tree [`synthesis`] -> remote-center linkage design in
//! [`rcm`] -> wrench-closure coverage in [`grasp`], with deterministic SVG
//! and table emission in [`plot`].

pub mod complexity;
pub mod geom;
pub mod grasp;
pub mod plot;
pub mod profile;
pub mod rcm;
pub mod synthesis;
pub mod units;

pub use geom::{BBox, Vec2};
pub use units::Units;
