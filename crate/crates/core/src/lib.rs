//! Modular efficiency model of an adaptive resonant beam charging (ARBC) link.
//!
//! The link is a chain of conversion stages:
//!
//! ```text
//! source power -> resonant beam -> atmosphere -> PV panel (at MPP) -> DC-DC -> battery
//! ```
//!
//! Each stage lives in its own module. [`link`] composes them into the
//! end-to-end efficiency and solves for the source power that maximises it.

pub mod channel;
pub mod electro_beam;
pub mod error;
pub mod link;
pub mod model;
pub mod pv;
pub mod search;

pub use channel::{chi, ChannelSpec, Visibility};
pub use electro_beam::{BeamModel, LinearFitCoeffs, MeasuredSample};
pub use error::{Error, Result};
pub use link::{OperatingPoint, OptimumResult, SweepRow, SweepSpec};
pub use model::{
    CelsiusTemp, Efficiency, LinkConfig, MppLinearCoeffs, MppTable, PowerW, SqrtFitCoeffs,
    Violation,
};
pub use pv::{DiodeParams, MppResult};
