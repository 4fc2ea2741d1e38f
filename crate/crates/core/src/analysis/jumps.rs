//! Threshold and run-length classification of fluorescence traces.

use crate::trajectory::{CountTrace, Direction, FluorescenceState};
use crate::{Error, Result};

/// Consecutive bins needed to confirm a state change.
pub const DEFAULT_MIN_RUN: usize = 2;

/// Detected state transitions of one trace.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpEvents {
    /// State of the first confirmed run.
    pub initial_state: FluorescenceState,
    /// `(bin_index, direction)`, bin indices strictly increasing, directions
    /// alternating.
    pub transitions: Vec<(usize, Direction)>,
    /// Bright→dark transitions, i.e. detected absorption events.
    pub n_cycles: usize,
    /// s.
    pub observation_time: f64,
    pub bin_width: f64,
}

impl JumpEvents {
    pub fn observation_minutes(&self) -> f64 {
        self.observation_time / 60.0
    }
}

/// Threshold halfway between the dark and bright means on a log scale,
/// `√((dark + 1) · bright)`, or the arithmetic midpoint when the two means are
/// too close for that to separate them.
pub fn default_threshold(trace: &CountTrace) -> f64 {
    let (dark, bright) = trace.expected_means();
    let t = ((dark + 1.0) * bright).sqrt();
    if t > dark && t < bright {
        t
    } else {
        0.5 * (dark + bright)
    }
}

/// Classifies each bin as bright (`count > threshold`) or dark and flips the
/// state once `min_run` consecutive bins fall on the other side. A transition
/// is recorded at the first bin of the confirming run. The initial state is
/// the class of the first run of `min_run` equal bins.
pub fn detect_jumps(trace: &CountTrace, threshold: f64, min_run: usize) -> Result<JumpEvents> {
    let (dark_mean, bright_mean) = trace.expected_means();
    if !(threshold > dark_mean && threshold < bright_mean) {
        return Err(Error::InvalidThreshold {
            threshold,
            dark_mean,
            bright_mean,
        });
    }
    if min_run == 0 {
        return Err(Error::invalid("min_run must be >= 1"));
    }
    let class = |c: u32| {
        if c as f64 > threshold {
            FluorescenceState::Bright
        } else {
            FluorescenceState::Dark
        }
    };

    let mut state: Option<FluorescenceState> = None;
    let mut initial_state = None;
    let mut run_class = FluorescenceState::Bright;
    let mut run_start = 0usize;
    let mut run_len = 0usize;
    let mut transitions = Vec::new();
    for (i, &c) in trace.counts.iter().enumerate() {
        let k = class(c);
        if run_len > 0 && k == run_class {
            run_len += 1;
        } else {
            run_class = k;
            run_start = i;
            run_len = 1;
        }
        if run_len == min_run {
            match state {
                None => {
                    state = Some(k);
                    initial_state = Some(k);
                }
                Some(s) if s != k => {
                    transitions.push((run_start, s.exit()));
                    state = Some(k);
                }
                Some(_) => {}
            }
        }
    }
    let n_cycles = transitions
        .iter()
        .filter(|(_, d)| *d == Direction::BrightToDark)
        .count();
    Ok(JumpEvents {
        initial_state: initial_state.unwrap_or_else(|| {
            trace
                .counts
                .first()
                .map(|&c| class(c))
                .unwrap_or(FluorescenceState::Bright)
        }),
        transitions,
        n_cycles,
        observation_time: trace.duration(),
        bin_width: trace.bin_width,
    })
}

/// Comparison of detected cycles with the simulated ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CycleMatch {
    pub true_cycles: usize,
    pub detected_cycles: usize,
    pub matched: usize,
}

impl CycleMatch {
    pub fn recall(&self) -> f64 {
        if self.true_cycles == 0 {
            1.0
        } else {
            self.matched as f64 / self.true_cycles as f64
        }
    }

    pub fn false_cycles(&self) -> usize {
        self.detected_cycles - self.matched
    }

    pub fn merge(self, other: CycleMatch) -> CycleMatch {
        CycleMatch {
            true_cycles: self.true_cycles + other.true_cycles,
            detected_cycles: self.detected_cycles + other.detected_cycles,
            matched: self.matched + other.matched,
        }
    }
}

/// One-to-one matching of detected bright→dark transitions with true ones,
/// in time order, accepting a detection within `tolerance_bins` of the bin
/// holding the true jump.
pub fn match_cycles(trace: &CountTrace, events: &JumpEvents, tolerance_bins: usize) -> CycleMatch {
    let truth: Vec<usize> = trace
        .true_jumps
        .iter()
        .filter(|j| j.direction == Direction::BrightToDark)
        .map(|j| (j.time / trace.bin_width) as usize)
        .collect();
    let detected: Vec<usize> = events
        .transitions
        .iter()
        .filter(|(_, d)| *d == Direction::BrightToDark)
        .map(|(b, _)| *b)
        .collect();
    let mut matched = 0;
    let mut d = 0;
    for &t in &truth {
        while d < detected.len() && detected[d] + tolerance_bins < t {
            d += 1;
        }
        if d < detected.len() && detected[d] <= t + tolerance_bins {
            matched += 1;
            d += 1;
        }
    }
    CycleMatch {
        true_cycles: truth.len(),
        detected_cycles: detected.len(),
        matched,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{Jump, TelegraphParams};

    fn synthetic(pattern: &[(usize, bool)]) -> CountTrace {
        let mut counts = Vec::new();
        let mut jumps = Vec::new();
        let mut bright = true;
        for &(len, b) in pattern {
            if b != bright {
                jumps.push(Jump {
                    time: counts.len() as f64 * 0.1,
                    direction: if b {
                        Direction::DarkToBright
                    } else {
                        Direction::BrightToDark
                    },
                });
                bright = b;
            }
            counts.extend(std::iter::repeat(if b { 200 } else { 5 }).take(len));
        }
        CountTrace {
            params: TelegraphParams::new(0.01, 1.0, 1000.0, 10.0).unwrap(),
            bin_width: 0.1,
            counts,
            start_state: FluorescenceState::Bright,
            seed: 0,
            trial: 0,
            true_jumps: jumps,
        }
    }

    #[test]
    fn noise_free_trace_is_exact() {
        let t = synthetic(&[(10, true), (3, false), (7, true), (1, false), (5, true)]);
        let ev = detect_jumps(&t, 50.0, 1).unwrap();
        let truth: Vec<(usize, Direction)> = t
            .true_jumps
            .iter()
            .map(|j| ((j.time / 0.1).round() as usize, j.direction))
            .collect();
        assert_eq!(ev.transitions, truth);
        assert_eq!(ev.n_cycles, 2);
        assert_eq!(ev.initial_state, FluorescenceState::Bright);
        let m = match_cycles(&t, &ev, 0);
        assert_eq!(m.recall(), 1.0);
        assert_eq!(m.false_cycles(), 0);
    }

    #[test]
    fn min_run_suppresses_single_bin_outliers() {
        let t = synthetic(&[(10, true), (1, false), (10, true), (4, false), (5, true)]);
        let ev = detect_jumps(&t, 50.0, 2).unwrap();
        assert_eq!(
            ev.transitions,
            vec![(21, Direction::BrightToDark), (25, Direction::DarkToBright)]
        );
    }

    #[test]
    fn all_bright_has_no_transitions() {
        let t = synthetic(&[(50, true)]);
        let ev = detect_jumps(&t, 50.0, 2).unwrap();
        assert!(ev.transitions.is_empty());
        assert_eq!(ev.n_cycles, 0);
        assert!((ev.observation_time - 5.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_must_separate_means() {
        let t = synthetic(&[(5, true)]);
        // dark mean 1, bright mean 100
        assert!(matches!(
            detect_jumps(&t, 0.5, 2),
            Err(Error::InvalidThreshold { .. })
        ));
        assert!(detect_jumps(&t, 100.0, 2).is_err());
        assert!(detect_jumps(&t, 50.0, 0).is_err());
        let th = default_threshold(&t);
        assert!(th > 1.0 && th < 100.0);
    }

    #[test]
    fn dark_start_is_recognized() {
        let t = synthetic(&[(0, true), (4, false), (6, true)]);
        let ev = detect_jumps(&t, 50.0, 2).unwrap();
        assert_eq!(ev.initial_state, FluorescenceState::Dark);
        assert_eq!(ev.transitions, vec![(4, Direction::DarkToBright)]);
        assert_eq!(ev.n_cycles, 0);
    }
}
