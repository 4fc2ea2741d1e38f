//! Monte Carlo fluorescence traces.
//!
//! The ion alternates between a bright state (fluorescing on the cooling
//! cycle) and a dark state (shelved in D₅/₂). Dwell times are exponential, so
//! the switching is a two-state telegraph process; a photon counter then
//! records Poissonian counts per time bin.

mod io;
mod poisson;

pub use io::{TRACE_CSV_HEADER, TraceMeta};

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Exp};

use crate::rng::{stream_rng, SimRng, Stream};
use crate::{Error, Result};
use poisson::{sample_poisson, PoissonTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluorescenceState {
    #[default]
    Bright,
    Dark,
}

impl FluorescenceState {
    pub fn flipped(self) -> Self {
        match self {
            FluorescenceState::Bright => FluorescenceState::Dark,
            FluorescenceState::Dark => FluorescenceState::Bright,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FluorescenceState::Bright => "bright",
            FluorescenceState::Dark => "dark",
        }
    }

    /// Transition that leaves this state.
    pub fn exit(self) -> Direction {
        match self {
            FluorescenceState::Bright => Direction::BrightToDark,
            FluorescenceState::Dark => Direction::DarkToBright,
        }
    }
}

impl fmt::Display for FluorescenceState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FluorescenceState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bright" => Ok(FluorescenceState::Bright),
            "dark" => Ok(FluorescenceState::Dark),
            other => Err(Error::invalid(format!(
                "unknown state '{other}' (expected bright or dark)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    BrightToDark,
    DarkToBright,
}

impl Direction {
    /// State entered by this transition.
    pub fn target(self) -> FluorescenceState {
        match self {
            Direction::BrightToDark => FluorescenceState::Dark,
            Direction::DarkToBright => FluorescenceState::Bright,
        }
    }
}

/// A state switch at an exact time, s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub direction: Direction,
}

/// Rates defining the fluorescence telegraph process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelegraphParams {
    /// Shelving rate, events/s: SPDC-induced pumping plus background jumps.
    pub bright_to_dark_rate: f64,
    /// Return rate, 1/s (inverse mean dark dwell).
    pub dark_to_bright_rate: f64,
    /// Counts/s while bright.
    pub bright_count_rate: f64,
    /// Counts/s while dark.
    pub dark_count_rate: f64,
}

impl TelegraphParams {
    pub fn new(
        bright_to_dark_rate: f64,
        dark_to_bright_rate: f64,
        bright_count_rate: f64,
        dark_count_rate: f64,
    ) -> Result<Self> {
        let p = Self {
            bright_to_dark_rate,
            dark_to_bright_rate,
            bright_count_rate,
            dark_count_rate,
        };
        p.validate()?;
        Ok(p)
    }

    /// Shelving from an SPDC pump rate (events/s) plus a background jump rate
    /// (events/min), returning after `mean_dark_dwell` seconds on average.
    pub fn from_pump(
        pump_rate: f64,
        background_per_min: f64,
        mean_dark_dwell: f64,
        bright_count_rate: f64,
        dark_count_rate: f64,
    ) -> Result<Self> {
        Self::new(
            pump_rate + background_per_min / 60.0,
            1.0 / mean_dark_dwell,
            bright_count_rate,
            dark_count_rate,
        )
    }

    /// Shelving rate chosen so that complete bright→dark→bright cycles occur
    /// at `cycle_rate` (events/s) on average.
    pub fn for_cycle_rate(
        cycle_rate: f64,
        mean_dark_dwell: f64,
        bright_count_rate: f64,
        dark_count_rate: f64,
    ) -> Result<Self> {
        let k2 = 1.0 / mean_dark_dwell;
        if !(cycle_rate >= 0.0 && cycle_rate < k2) {
            return Err(Error::invalid(format!(
                "cycle rate {cycle_rate}/s unreachable with mean dark dwell {mean_dark_dwell} s"
            )));
        }
        let k1 = cycle_rate * k2 / (k2 - cycle_rate);
        Self::new(k1, k2, bright_count_rate, dark_count_rate)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("bright_to_dark_rate", self.bright_to_dark_rate),
            ("dark_to_bright_rate", self.dark_to_bright_rate),
            ("bright_count_rate", self.bright_count_rate),
            ("dark_count_rate", self.dark_count_rate),
        ];
        for (name, v) in all {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be >= 0 and finite, got {v}")));
            }
        }
        if self.dark_to_bright_rate <= 0.0 {
            return Err(Error::invalid(
                "dark_to_bright_rate must be > 0: the dark state always decays",
            ));
        }
        if self.bright_count_rate <= self.dark_count_rate {
            return Err(Error::invalid(
                "bright_count_rate must exceed dark_count_rate",
            ));
        }
        Ok(())
    }

    fn count_rate(&self, state: FluorescenceState) -> f64 {
        match state {
            FluorescenceState::Bright => self.bright_count_rate,
            FluorescenceState::Dark => self.dark_count_rate,
        }
    }

    /// Mean rate of complete cycles (shelving events) in steady state,
    /// events/s: `k₁k₂/(k₁+k₂)`.
    pub fn cycle_rate(&self) -> f64 {
        let (k1, k2) = (self.bright_to_dark_rate, self.dark_to_bright_rate);
        k1 * k2 / (k1 + k2)
    }
}

/// Long-time fraction of time spent dark.
pub fn stationary_dark_fraction(p: &TelegraphParams) -> f64 {
    let (k1, k2) = (p.bright_to_dark_rate, p.dark_to_bright_rate);
    if k1 == 0.0 {
        0.0
    } else {
        k1 / (k1 + k2)
    }
}

/// Binned photon counts together with the simulated ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTrace {
    pub params: TelegraphParams,
    pub bin_width: f64,
    pub counts: Vec<u32>,
    pub start_state: FluorescenceState,
    pub seed: u64,
    pub trial: u64,
    pub true_jumps: Vec<Jump>,
}

impl CountTrace {
    /// Covered time, s.
    pub fn duration(&self) -> f64 {
        self.counts.len() as f64 * self.bin_width
    }

    /// Expected counts per bin in the dark and bright states.
    pub fn expected_means(&self) -> (f64, f64) {
        (
            self.params.dark_count_rate * self.bin_width,
            self.params.bright_count_rate * self.bin_width,
        )
    }

    /// Number of true bright→dark transitions (one per absorption event).
    pub fn true_cycle_count(&self) -> usize {
        self.true_jumps
            .iter()
            .filter(|j| j.direction == Direction::BrightToDark)
            .count()
    }

    /// Number of true transitions in either direction.
    pub fn true_transition_count(&self) -> usize {
        self.true_jumps.len()
    }

    /// Time spent dark according to the ground truth, s.
    pub fn true_dark_time(&self) -> f64 {
        let end = self.duration();
        let mut state = self.start_state;
        let mut last = 0.0;
        let mut dark = 0.0;
        for j in &self.true_jumps {
            if state == FluorescenceState::Dark {
                dark += j.time - last;
            }
            state = j.direction.target();
            last = j.time;
        }
        if state == FluorescenceState::Dark {
            dark += end - last;
        }
        dark
    }

    /// Complete dark dwells of the ground truth (both edges inside the trace).
    pub fn true_dark_dwells(&self) -> Vec<f64> {
        self.true_jumps
            .windows(2)
            .filter(|w| w[0].direction == Direction::BrightToDark)
            .map(|w| w[1].time - w[0].time)
            .collect()
    }
}

/// Simulates a trace starting in the bright state.
pub fn simulate_trace(p: &TelegraphParams, duration: f64, bin_width: f64, seed: u64) -> Result<CountTrace> {
    simulate_trace_with(p, duration, bin_width, seed, 0, FluorescenceState::Bright)
}

/// Exact-dwell simulation of the telegraph process.
///
/// Dwell times are drawn on the `(seed, trial, Dwell)` stream and counts on the
/// `(seed, trial, Counts)` stream, so the switching record does not depend on
/// the bin width. The trace holds `floor(duration / bin_width)` bins; each
/// bin's count is Poissonian with mean `Σ count_rate(state) · time_in_state`
/// over the bin.
pub fn simulate_trace_with(
    p: &TelegraphParams,
    duration: f64,
    bin_width: f64,
    seed: u64,
    trial: u64,
    start_state: FluorescenceState,
) -> Result<CountTrace> {
    p.validate()?;
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::invalid(format!("bin width must be > 0, got {bin_width}")));
    }
    if !(duration >= bin_width && duration.is_finite()) {
        return Err(Error::invalid(format!(
            "duration {duration} s is shorter than one bin of {bin_width} s"
        )));
    }
    let n_bins = ((duration / bin_width) * (1.0 + 1e-12)).floor() as usize;
    let end = n_bins as f64 * bin_width;

    let true_jumps = simulate_switching(p, end, start_state, &mut stream_rng(seed, trial, Stream::Dwell));
    let counts = draw_counts(
        p,
        n_bins,
        bin_width,
        start_state,
        &true_jumps,
        &mut stream_rng(seed, trial, Stream::Counts),
    );
    Ok(CountTrace {
        params: *p,
        bin_width,
        counts,
        start_state,
        seed,
        trial,
        true_jumps,
    })
}

fn simulate_switching(
    p: &TelegraphParams,
    end: f64,
    start: FluorescenceState,
    rng: &mut SimRng,
) -> Vec<Jump> {
    let exp = |rate: f64| (rate > 0.0).then(|| Exp::new(rate).expect("positive rate"));
    let bright = exp(p.bright_to_dark_rate);
    let dark = exp(p.dark_to_bright_rate);
    let mut jumps = Vec::new();
    let mut state = start;
    let mut t = 0.0;
    loop {
        let dist = match state {
            FluorescenceState::Bright => &bright,
            FluorescenceState::Dark => &dark,
        };
        let Some(dist) = dist else { break };
        t += dist.sample(rng);
        if t >= end {
            break;
        }
        jumps.push(Jump {
            time: t,
            direction: state.exit(),
        });
        state = state.flipped();
    }
    jumps
}

fn draw_counts(
    p: &TelegraphParams,
    n_bins: usize,
    bin_width: f64,
    start: FluorescenceState,
    jumps: &[Jump],
    rng: &mut SimRng,
) -> Vec<u32> {
    let bright = PoissonTable::new(p.bright_count_rate * bin_width);
    let dark = PoissonTable::new(p.dark_count_rate * bin_width);
    let mut counts = Vec::with_capacity(n_bins);
    let mut state = start;
    let mut next = 0usize;
    for bin in 0..n_bins {
        let lo = bin as f64 * bin_width;
        let hi = lo + bin_width;
        if next >= jumps.len() || jumps[next].time >= hi {
            let table = match state {
                FluorescenceState::Bright => &bright,
                FluorescenceState::Dark => &dark,
            };
            counts.push(table.sample(rng));
            continue;
        }
        let mut mean = 0.0;
        let mut t = lo;
        while next < jumps.len() && jumps[next].time < hi {
            mean += p.count_rate(state) * (jumps[next].time - t);
            t = jumps[next].time;
            state = jumps[next].direction.target();
            next += 1;
        }
        mean += p.count_rate(state) * (hi - t);
        counts.push(sample_poisson(mean, rng));
    }
    counts
}

/// Poisson mean of each bin given the exact switching record.
pub fn bin_means(
    p: &TelegraphParams,
    n_bins: usize,
    bin_width: f64,
    start: FluorescenceState,
    jumps: &[Jump],
) -> Vec<f64> {
    let mut means = Vec::with_capacity(n_bins);
    let mut state = start;
    let mut next = 0usize;
    for bin in 0..n_bins {
        let lo = bin as f64 * bin_width;
        let hi = lo + bin_width;
        let mut mean = 0.0;
        let mut t = lo;
        while next < jumps.len() && jumps[next].time < hi {
            mean += p.count_rate(state) * (jumps[next].time - t);
            t = jumps[next].time;
            state = jumps[next].direction.target();
            next += 1;
        }
        mean += p.count_rate(state) * (hi - t);
        means.push(mean);
    }
    means
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k1: f64) -> TelegraphParams {
        TelegraphParams::new(k1, 1.0 / 1.2, 20_000.0, 100.0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(TelegraphParams::new(0.01, 0.0, 10.0, 1.0).is_err());
        assert!(TelegraphParams::new(-0.01, 1.0, 10.0, 1.0).is_err());
        assert!(TelegraphParams::new(0.01, 1.0, 1.0, 1.0).is_err());
        let p = params(0.01);
        assert!(simulate_trace(&p, 0.001, 0.002, 1).is_err());
        assert!(simulate_trace(&p, 10.0, 0.0, 1).is_err());
    }

    #[test]
    fn dark_fraction_formula() {
        assert_eq!(stationary_dark_fraction(&TelegraphParams::new(2.0, 2.0, 2.0, 1.0).unwrap()), 0.5);
        assert_eq!(stationary_dark_fraction(&params(0.0)), 0.0);
        let f = stationary_dark_fraction(&params(0.00909));
        assert!((f - 0.01079).abs() < 1e-5, "{f}");
    }

    #[test]
    fn no_pump_means_all_bright() {
        let p = params(0.0);
        let t = simulate_trace(&p, 20.0, 0.01, 3).unwrap();
        assert!(t.true_jumps.is_empty());
        assert_eq!(t.counts.len(), 2000);
        let mean = t.counts.iter().map(|&c| c as f64).sum::<f64>() / t.counts.len() as f64;
        let expected = 200.0;
        let three_sigma = 3.0 * (expected / t.counts.len() as f64).sqrt();
        assert!((mean - expected).abs() < three_sigma, "{mean}");
    }

    #[test]
    fn reproducible_and_alternating() {
        let p = params(0.5);
        let a = simulate_trace_with(&p, 200.0, 0.01, 11, 4, FluorescenceState::Bright).unwrap();
        let b = simulate_trace_with(&p, 200.0, 0.01, 11, 4, FluorescenceState::Bright).unwrap();
        assert_eq!(a, b);
        let c = simulate_trace_with(&p, 200.0, 0.01, 11, 5, FluorescenceState::Bright).unwrap();
        assert_ne!(a.true_jumps, c.true_jumps);
        assert!(a.true_jumps.windows(2).all(|w| w[1].time > w[0].time));
        assert!(a.true_jumps.windows(2).all(|w| w[1].direction != w[0].direction));
        assert_eq!(a.true_jumps[0].direction, Direction::BrightToDark);
    }

    #[test]
    fn switching_does_not_depend_on_bins() {
        let p = params(0.5);
        let a = simulate_trace(&p, 100.0, 0.01, 5).unwrap();
        let b = simulate_trace(&p, 100.0, 0.1, 5).unwrap();
        assert_eq!(a.true_jumps, b.true_jumps);
    }

    #[test]
    fn dark_start() {
        let p = params(0.01);
        let t = simulate_trace_with(&p, 100.0, 0.01, 2, 0, FluorescenceState::Dark).unwrap();
        assert_eq!(t.true_jumps[0].direction, Direction::DarkToBright);
    }

    #[test]
    fn partial_bin_mean() {
        let p = TelegraphParams::new(1.0, 1.0, 1000.0, 10.0).unwrap();
        let jumps = [Jump {
            time: 0.125,
            direction: Direction::BrightToDark,
        }];
        let m = bin_means(&p, 3, 0.1, FluorescenceState::Bright, &jumps);
        assert!((m[0] - 100.0).abs() < 1e-9);
        // φ = 0.25 bright, 0.75 dark
        assert!((m[1] - (0.25 * 100.0 + 0.75 * 1.0)).abs() < 1e-9);
        assert!((m[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cycle_rate_calibration() {
        let p = TelegraphParams::for_cycle_rate(0.7 / 60.0, 1.2, 20_000.0, 100.0).unwrap();
        assert!((p.cycle_rate() - 0.7 / 60.0).abs() < 1e-15);
        assert!(TelegraphParams::for_cycle_rate(1.0, 1.2, 2.0, 1.0).is_err());
    }
}
