//! Simulation and analysis of single-ion quantum jumps driven by photons from a
//! spontaneous parametric down-conversion (SPDC) source.
//!
//! The crate is split along the physical chain of the experiment:
//!
//! - [`atom`]: level populations under continuous excitation, the absorption
//!   line of the 850 nm transition and the dark-state dwell.
//! - [`spdc`]: temperature-tuned emission envelope and the cavity filter chain.
//! - [`interaction`]: the factor-chain jump-rate estimate, line convolution and
//!   the analytic temperature / frequency scan models.
//! - [`trajectory`]: Monte Carlo fluorescence traces of the bright/dark
//!   telegraph process.
//! - [`analysis`]: jump detection, rate and dwell estimation, line fitting.
//!
//! Frequencies are detunings from the 850 nm line center, in MHz unless a name
//! says otherwise. Jump rates are events/s internally and events/min wherever
//! they are reported.

pub mod analysis;
pub mod atom;
mod error;
pub mod format;
pub mod interaction;
pub mod profile;
pub mod rng;
pub mod spdc;
pub mod trajectory;

pub use error::{Error, Result};
pub use profile::{LineProfile, ProfileShape};
