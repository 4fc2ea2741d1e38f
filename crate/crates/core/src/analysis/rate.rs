//! Event-rate estimates with Poissonian or standard-error-of-the-mean bars.

use super::jumps::JumpEvents;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMethod {
    /// `√n` counting error of the pooled events.
    PoissonSqrt,
    /// Standard deviation of the mean of per-measurement rates.
    Sem,
}

impl RateMethod {
    pub fn name(self) -> &'static str {
        match self {
            RateMethod::PoissonSqrt => "poisson-sqrt",
            RateMethod::Sem => "sem",
        }
    }
}

/// Rate in events/min.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub rate: f64,
    pub error: f64,
    pub n_events: usize,
    pub observation_minutes: f64,
    pub method: RateMethod,
}

/// Cycle rate of one or more measurements.
///
/// `PoissonSqrt` pools every measurement: `rate = Σn / Σt`, `error = √Σn / Σt`.
/// `Sem` averages the per-measurement rates and reports the sample standard
/// deviation over `√k`; it needs at least two measurements.
pub fn estimate_rate(events: &[JumpEvents], method: RateMethod) -> Result<RateEstimate> {
    if events.is_empty() {
        return Err(Error::invalid("no measurements to estimate a rate from"));
    }
    if let Some(e) = events.iter().find(|e| !(e.observation_time > 0.0)) {
        return Err(Error::invalid(format!(
            "observation time must be > 0, got {}",
            e.observation_time
        )));
    }
    let n_events: usize = events.iter().map(|e| e.n_cycles).sum();
    let minutes: f64 = events.iter().map(|e| e.observation_minutes()).sum();
    match method {
        RateMethod::PoissonSqrt => Ok(RateEstimate {
            rate: n_events as f64 / minutes,
            error: (n_events as f64).sqrt() / minutes,
            n_events,
            observation_minutes: minutes,
            method,
        }),
        RateMethod::Sem => {
            let rates: Vec<f64> = events
                .iter()
                .map(|e| e.n_cycles as f64 / e.observation_minutes())
                .collect();
            let (rate, error) = sem_rate(&rates)?;
            Ok(RateEstimate {
                rate,
                error,
                n_events,
                observation_minutes: minutes,
                method,
            })
        }
    }
}

/// Mean and standard deviation of the mean of repeated measurements.
pub fn sem_rate(rates: &[f64]) -> Result<(f64, f64)> {
    if rates.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: rates.len(),
        });
    }
    let k = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / k;
    let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok((mean, (var / k).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::FluorescenceState;

    fn events(n: usize, minutes: f64) -> JumpEvents {
        JumpEvents {
            initial_state: FluorescenceState::Bright,
            transitions: Vec::new(),
            n_cycles: n,
            observation_time: minutes * 60.0,
            bin_width: 0.002,
        }
    }

    #[test]
    fn poisson_rate() {
        let r = estimate_rate(&[events(42, 60.0)], RateMethod::PoissonSqrt).unwrap();
        assert!((r.rate - 0.7).abs() < 1e-12);
        assert!((r.error - 42f64.sqrt() / 60.0).abs() < 1e-12);
        assert!((r.error - 0.108).abs() < 1e-3);
        let zero = estimate_rate(&[events(0, 60.0)], RateMethod::PoissonSqrt).unwrap();
        assert_eq!((zero.rate, zero.error), (0.0, 0.0));
    }

    #[test]
    fn sem_of_sixteen() {
        let subs: Vec<JumpEvents> = (0..16).map(|i| events(i % 5, 5.0)).collect();
        let r = estimate_rate(&subs, RateMethod::Sem).unwrap();
        let rates: Vec<f64> = (0..16).map(|i| (i % 5) as f64 / 5.0).collect();
        let mean = rates.iter().sum::<f64>() / 16.0;
        let sd = (rates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 15.0).sqrt();
        assert!((r.rate - mean).abs() < 1e-12);
        assert!((r.error - sd / 4.0).abs() < 1e-12);
        assert_eq!(r.n_events, rates.iter().map(|x| (x * 5.0) as usize).sum::<usize>());
        assert!(estimate_rate(&subs[..1], RateMethod::Sem).is_err());
    }

    #[test]
    fn zero_time_is_rejected() {
        assert!(estimate_rate(&[events(3, 0.0)], RateMethod::PoissonSqrt).is_err());
        assert!(estimate_rate(&[], RateMethod::PoissonSqrt).is_err());
    }
}
