//! Central shadowing for partially hyperbolic, dynamically coherent maps of
//! the torus.
//!
//! Given a `d`-pseudotrajectory of a model system, [`shadow::central_shadow`]
//! builds a pseudotrajectory whose only defects are jumps along central
//! leaves and which stays within `𝓛 d` of the input, then checks every bound
//! of the construction on the computed sequences.

pub mod error;
pub mod linalg;
pub mod pseudotraj;
pub mod shadow;
pub mod system;
pub mod torus;

pub use error::{Result, ShadowError};
pub use pseudotraj::{CentralJumpRecord, Pseudotrajectory};
pub use shadow::{ShadowConstants, ShadowingResult};
pub use system::{HyperbolicityData, SplitFrame, SystemKind, SystemModel};
pub use torus::{Displacement, TorusPoint};
