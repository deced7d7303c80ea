//! Chemical reaction network analysis for kinetics that split into a rate constant times an
//! interaction function: structural numbers, CF-subsets, CF-RM transforms, linear conjugacy
//! search and simulation.

pub mod cfrm;
pub mod conjugacy;
pub mod error;
pub mod format;
pub mod kinetics;
pub mod linalg;
pub mod network;
pub mod ode;
pub mod report;

pub use error::{CrnError, Result};
pub use format::{parse_system, write_system};
pub use kinetics::{KineticSystem, Kinetics, ParamTolerance, RateLaw, DEFAULT_SEED};
pub use network::{Complex, NetworkNumbers, ReactionNetwork, ReactionSpec, StructureFlags};
