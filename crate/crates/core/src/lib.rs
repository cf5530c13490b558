//! Jump detection in intraday log-returns by iterated truncation, with
//! thresholds scaled by a time-of-day volatility profile.
//!
//! The pipeline: [`tod::tod_profile`] estimates the intraday volatility shape,
//! [`spotvol`] turns truncated squared returns into daily volatility levels,
//! and [`detector::detect_jumps`] alternates between flagging returns above
//! the threshold and re-estimating volatility without them. [`simulator`]
//! produces paths with known jumps to check the detector against.

pub mod cli;
pub mod detector;
pub mod error;
pub mod grid;
pub mod io;
pub mod simulator;
pub mod spotvol;
pub mod tod;

pub use detector::{detect_jumps, DetectorConfig, JumpReport, SizeMode};
pub use error::{Error, Result};
pub use grid::{Layout, ReturnGrid};
pub use simulator::{evaluate_detection, simulate_path, SimConfig, SimPath};
pub use spotvol::SpotVolSeries;
pub use tod::TodProfile;
