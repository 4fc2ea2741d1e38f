//! Recovering rates, dwell times and line shapes from traces and scans.

mod dwell;
mod fit;
mod jumps;
mod rate;

pub use dwell::{dark_dwells, dwell_statistics, dwell_statistics_from, DwellStatistics, MIN_COMPLETE_DWELLS};
pub use fit::{fit_convolved_line, fit_lorentzian, lorentzian_model, FitOptions, LorentzianFit};
pub use jumps::{default_threshold, detect_jumps, match_cycles, CycleMatch, JumpEvents, DEFAULT_MIN_RUN};
pub use rate::{estimate_rate, sem_rate, RateEstimate, RateMethod};
