use std::path::PathBuf;

use ionjump_core::analysis::{default_threshold, detect_jumps, estimate_rate, JumpEvents, RateMethod};
use ionjump_core::interaction::{
    filtered_peak_rate, frequency_scan_model_with, temperature_scan_model_with, ErrorRule,
    ScanKind, ScanMeta, ScanResult,
};
use ionjump_core::trajectory::simulate_trace_with;

use super::{par_map, telegraph_params, Context};
use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    Analytic,
    MonteCarlo,
}

impl ScanMode {
    pub fn name(self) -> &'static str {
        match self {
            ScanMode::Analytic => "analytic",
            ScanMode::MonteCarlo => "montecarlo",
        }
    }
}

impl std::str::FromStr for ScanMode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "analytic" => Ok(ScanMode::Analytic),
            "montecarlo" | "monte-carlo" => Ok(ScanMode::MonteCarlo),
            other => Err(CliError::Usage(format!(
                "unknown scan mode '{other}' (expected analytic or montecarlo)"
            ))),
        }
    }
}

/// Expected jump rate (events/min, background included) on the configured
/// grid.
pub fn analytic_scan(config: &ExperimentConfig, kind: ScanKind) -> Result<ScanResult, CliError> {
    let bg = &config.telegraph.background;
    let mut scan = match kind {
        ScanKind::Temperature => temperature_scan_model_with(
            &config.spdc,
            &config.coupling.window(),
            &config.coupling.factors,
            bg,
            &config.scan.temperatures(),
            config.coupling.flux_model,
        )?,
        ScanKind::Frequency => {
            let peak = config.scan.frequency_peak_rate_per_min.unwrap_or_else(|| {
                filtered_peak_rate(
                    &config.spdc,
                    &config.coupling.window(),
                    &config.coupling.factors,
                    &config.filter.chain,
                )
            });
            frequency_scan_model_with(
                &config.filter.chain,
                &config.atom.line(),
                peak,
                bg,
                &config.scan.detunings(),
                config.filter.line_model,
            )?
        }
    };
    scan.meta.config_digest = config.digest().to_string();
    Ok(scan)
}

/// Simulated measurement of the analytic scan.
///
/// Each point is driven at its analytic signal rate (analytic rate minus the
/// background). A temperature point is one trace of `temperature_duration_s`
/// with a `√n` error; a frequency point is `frequency_sub_measurements` traces
/// of `frequency_sub_duration_s` averaged with a standard-error bar. The trace
/// of sub-measurement `s` at point `i` uses trial index `i · subs + s`.
pub fn montecarlo_scan(
    config: &ExperimentConfig,
    kind: ScanKind,
    jobs: usize,
) -> Result<ScanResult, CliError> {
    let model = analytic_scan(config, kind)?;
    let (subs, duration, method, rule) = match kind {
        ScanKind::Temperature => (
            1,
            config.scan.temperature_duration_s,
            RateMethod::PoissonSqrt,
            ErrorRule::PoissonSqrt,
        ),
        ScanKind::Frequency => (
            config.scan.frequency_sub_measurements,
            config.scan.frequency_sub_duration_s,
            RateMethod::Sem,
            ErrorRule::Sem,
        ),
    };
    if method == RateMethod::Sem && subs < 2 {
        return Err(CliError::config(
            "scan",
            "frequency_sub_measurements",
            "need at least 2 sub-measurements for a standard error",
        ));
    }
    let bin = config.telegraph.bin_width_s;
    if !(duration >= bin) {
        return Err(CliError::Usage(format!(
            "measurement time {duration} s is shorter than the {bin} s bin width"
        )));
    }
    let bg = config.telegraph.background.background_jump_rate;
    let n_points = model.len();
    let events = par_map(jobs, n_points * subs, |k| {
        let point = k / subs;
        let pump = (model.rates()[point] - bg).max(0.0) / 60.0;
        let params = telegraph_params(config, pump)?;
        let trace = simulate_trace_with(
            &params,
            duration,
            bin,
            config.seed,
            k as u64,
            config.telegraph.start_state,
        )?;
        let threshold = config
            .telegraph
            .detect_threshold
            .unwrap_or_else(|| default_threshold(&trace));
        Ok(detect_jumps(&trace, threshold, config.telegraph.detect_min_run)?)
    })?;

    let mut rates = Vec::with_capacity(n_points);
    let mut errors = Vec::with_capacity(n_points);
    for chunk in events.chunks(subs) {
        let est = estimate_rate(chunk as &[JumpEvents], method)?;
        rates.push(est.rate);
        errors.push(est.error);
    }
    let meta = ScanMeta {
        kind,
        error_rule: rule,
        config_digest: config.digest().to_string(),
        seed: Some(config.seed),
    };
    Ok(ScanResult::new(model.x().to_vec(), rates, errors, meta)?)
}

/// Runs the scan and writes `scan_<kind>_<mode>.csv` plus its `.meta`.
pub fn scan(ctx: &Context, kind: ScanKind, mode: ScanMode) -> Result<(ScanResult, PathBuf), CliError> {
    let result = match mode {
        ScanMode::Analytic => analytic_scan(&ctx.config, kind)?,
        ScanMode::MonteCarlo => montecarlo_scan(&ctx.config, kind, ctx.jobs)?,
    };
    ctx.write_resolved_config()?;
    let path = ctx.output(&format!("scan_{}_{}.csv", kind.name(), mode.name()))?;
    result.save(&path)?;
    log::info!("{} points -> {}", result.len(), path.display());
    Ok((result, path))
}
