//! Multi-robot multi-room exploration simulator.
//!
//! The library implements a deterministic occupancy-grid simulator for teams
//! of aerial robots exploring indoor environments, together with the MRMR
//! exploration policy: doors are detected as saddle points of the 2D distance
//! transform of the known map, room free space is decomposed into circles,
//! and robots coordinate by exchanging compact reached-door / reached-circle
//! sets over a simulated message bus. A frontier-based baseline policy and a
//! metrics harness allow side-by-side coverage comparisons.
//!
//! Module map:
//! - [`worldmodel`]: scenario files, rasterization to a ground-truth voxel
//!   grid, room labeling.
//! - [`perception`]: simulated LiDAR and fisheye-camera sensing into a
//!   per-robot known map and observed-voxel set.
//! - [`cues`]: flatten / median filter / exact EDT / Hessian / saddle and
//!   local-maximum classification.
//! - [`circles`]: circular decomposition maintenance (generate, merge, split).
//! - [`coordination`]: target selection filters and the reached-sets wire
//!   protocol plus the simulated bus.
//! - [`explorer`]: A* planning, the MRMR and frontier policies, and the
//!   tick loop.
//! - [`metrics`]: room-coverage accounting, detection scoring, runtimes.
//! - [`harness`]: episode/suite runners and artifact output.

pub mod circles;
pub mod coordination;
pub mod cues;
pub mod explorer;
pub mod geom;
pub mod grid;
pub mod harness;
pub mod metrics;
pub mod perception;
pub mod pgm;
pub mod scenarios;
pub mod worldmodel;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario validation error: {0}")]
    Validation(String),
    #[error("wire protocol error: {0}")]
    Wire(String),
    #[error("metrics error: {0}")]
    Metrics(String),
    #[error("simulation invariant violated: {0}")]
    Sim(String),
    #[error("unknown room id {0}")]
    UnknownRoom(u16),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
