//! Finite ray sets in real 3-space with certified orthogonality constraints,
//! the gadget constructions that force value relations between rays, and
//! exact LP / 0-1 search machinery to verify them.

pub mod error;
pub mod gadgets;
pub mod gleason;
pub mod graph;
pub mod io;
pub mod lp;
pub mod search;
pub mod sphere;
pub mod state;

pub use error::{Error, Result};
pub use gadgets::{ChainPlan, Forge};
pub use gleason::DensityMatrix;
pub use graph::{Claim, GadgetReport, OrthoGraph};
pub use lp::{LpOutcome, LpStatus, Rational};
pub use sphere::{ChartPoint, Ray, Tolerance};
pub use state::{FramePolytope, Semantics, StatePolytope};
