//! Basins of attraction for periodically forced, damped pendulum systems
//! with time-varying dissipation.
//!
//! The crate computes which attractor each initial condition converges to,
//! either by integrating trajectories to their asymptotic regime (ground
//! truth) or by a fast method: integrate only until the damping ramp has
//! finished, then look the asymptotic label up in a precomputed
//! constant-damping atlas. Supporting modules provide stroboscopic
//! integration, attractor classification, phase-space density analytics and
//! Monte Carlo confidence intervals for the estimated areas.

pub mod analysis;
pub mod atlas;
pub mod attractor;
pub mod dynamics;
pub mod error;
pub mod fast;
pub mod integrator;
pub mod raster;
pub mod stats;

mod hash;

pub use analysis::{Cluster, DensityGrid, OccupancyGrid};
pub use atlas::{Atlas, Mesh};
pub use attractor::{AttractorCatalog, AttractorKind, AttractorLabel};
pub use dynamics::{DampingProfile, State, SystemParams};
pub use error::{Error, Result};
pub use fast::{BasinResult, InitialSet, MovementMapRecord, PointOutcome};
pub use integrator::{IntegratorConfig, StroboscopicOrbit};
pub use stats::{ConfidenceLevel, ConfidenceSpec};
