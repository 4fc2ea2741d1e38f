use std::path::PathBuf;

use ionjump_core::interaction::unfiltered_signal_rate;
use ionjump_core::trajectory::{simulate_trace_with, CountTrace, TelegraphParams, TraceMeta};

use super::{par_map, Context};
use crate::config::ExperimentConfig;
use crate::error::CliError;

/// SPDC pump rate, events/s: the configured value, or the model's
/// unfiltered-arm signal rate at the reference temperature.
pub fn signal_pump_rate(config: &ExperimentConfig) -> f64 {
    config.telegraph.pump_rate_per_s.unwrap_or_else(|| {
        unfiltered_signal_rate(
            &config.spdc,
            &config.coupling.window(),
            &config.coupling.factors,
            config.spdc.ref_temperature_c,
            config.coupling.flux_model,
        )
    })
}

/// Telegraph rates for an SPDC pump of `pump_rate` events/s on top of the
/// configured background.
pub fn telegraph_params(config: &ExperimentConfig, pump_rate: f64) -> Result<TelegraphParams, CliError> {
    let t = &config.telegraph;
    Ok(TelegraphParams::from_pump(
        pump_rate,
        t.background.background_jump_rate,
        config.atom.dark.mean_dwell(),
        t.background.bright_count_rate,
        t.background.dark_count_rate,
    )?)
}

/// Simulates the given trials (trial index = RNG stream index) of length
/// `duration` seconds.
pub fn simulate_trials(
    config: &ExperimentConfig,
    duration: f64,
    trials: &[u64],
    jobs: usize,
) -> Result<Vec<CountTrace>, CliError> {
    let bin = config.telegraph.bin_width_s;
    if !(duration >= bin) {
        return Err(CliError::Usage(format!(
            "duration {duration} s is shorter than the {bin} s bin width"
        )));
    }
    let params = telegraph_params(config, signal_pump_rate(config))?;
    par_map(jobs, trials.len(), |i| {
        Ok(simulate_trace_with(
            &params,
            duration,
            bin,
            config.seed,
            trials[i],
            config.telegraph.start_state,
        )?)
    })
}

/// Writes `trace_<trial>.csv` and its `.meta` sidecar for each trial.
pub fn simulate(ctx: &Context, duration: f64, trials: &[u64]) -> Result<Vec<PathBuf>, CliError> {
    let traces = simulate_trials(&ctx.config, duration, trials, ctx.jobs)?;
    ctx.write_resolved_config()?;
    let meta = TraceMeta {
        config_digest: ctx.config.digest().to_string(),
    };
    let mut paths = Vec::with_capacity(traces.len());
    for t in &traces {
        let path = ctx.output(&format!("trace_{:04}.csv", t.trial))?;
        t.save(&path, &meta)?;
        log::info!(
            "trial {}: {} bins, {} true cycles -> {}",
            t.trial,
            t.counts.len(),
            t.true_cycle_count(),
            path.display()
        );
        paths.push(path);
    }
    Ok(paths)
}
