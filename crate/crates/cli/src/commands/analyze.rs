use std::path::{Path, PathBuf};

use ionjump_core::analysis::{
    dark_dwells, default_threshold, detect_jumps, dwell_statistics_from, estimate_rate,
    fit_convolved_line, fit_lorentzian, match_cycles, CycleMatch, JumpEvents, LorentzianFit,
    RateMethod,
};
use ionjump_core::interaction::{ScanKind, ScanResult};
use ionjump_core::trajectory::CountTrace;

use super::{file_stem, Context};
use crate::error::CliError;
use crate::report::Report;

/// Two-sided 95 % normal quantile used for the reported fit intervals.
pub const CI95_Z: f64 = 1.959_963_984_540_054;

/// Detected transitions within this many bins of a true jump count as a match.
const MATCH_TOLERANCE_BINS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisTask {
    Jumps,
    Dwell,
    Fit,
    FitConvolved,
}

impl AnalysisTask {
    pub fn name(self) -> &'static str {
        match self {
            AnalysisTask::Jumps => "jumps",
            AnalysisTask::Dwell => "dwell",
            AnalysisTask::Fit => "fit",
            AnalysisTask::FitConvolved => "fit-convolved",
        }
    }
}

impl std::str::FromStr for AnalysisTask {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "jumps" => Ok(AnalysisTask::Jumps),
            "dwell" => Ok(AnalysisTask::Dwell),
            "fit" => Ok(AnalysisTask::Fit),
            "fit-convolved" => Ok(AnalysisTask::FitConvolved),
            other => Err(CliError::Usage(format!(
                "unknown analysis task '{other}' (expected jumps, dwell, fit or fit-convolved)"
            ))),
        }
    }
}

/// Runs `task` on `inputs`, prints the report and writes
/// `<first input stem>.<task>.txt`. A fit that fails to converge is reported
/// and then returned as [`CliError::NonConvergence`].
pub fn analyze(ctx: &Context, task: AnalysisTask, inputs: &[PathBuf]) -> Result<Report, CliError> {
    let first = inputs
        .first()
        .ok_or_else(|| CliError::Usage("analyze needs at least one --input".into()))?;
    for p in inputs {
        require_file(p)?;
    }
    let mut report = Report::new(ctx.config.digest());
    report.text("task", task.name());
    report.text(
        "inputs",
        inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(","),
    );
    let converged = match task {
        AnalysisTask::Jumps => {
            jumps_report(ctx, &load_traces(inputs)?, &mut report)?;
            true
        }
        AnalysisTask::Dwell => {
            dwell_report(ctx, &load_traces(inputs)?, &mut report)?;
            true
        }
        AnalysisTask::Fit | AnalysisTask::FitConvolved => {
            if inputs.len() != 1 {
                return Err(CliError::Usage("fits take exactly one scan --input".into()));
            }
            let scan = ScanResult::load(first, ScanKind::Frequency)?;
            let fit = if task == AnalysisTask::Fit {
                fit_lorentzian(&scan)?
            } else {
                let filter = ctx.config.filter.line_model.profile(&ctx.config.filter.chain);
                report.num("filter_fwhm_mhz", filter.fwhm());
                fit_convolved_line(&scan, &filter)?
            };
            fit_report(&fit, &mut report);
            fit.converged
        }
    };
    print!("{}", report.render());
    report.write(&ctx.output(&format!("{}.{}.txt", file_stem(first), task.name()))?)?;
    if !converged {
        return Err(CliError::NonConvergence(format!(
            "{} on {} stopped without meeting the step tolerance",
            task.name(),
            first.display()
        )));
    }
    Ok(report)
}

fn load_traces(inputs: &[PathBuf]) -> Result<Vec<CountTrace>, CliError> {
    inputs
        .iter()
        .map(|p| Ok(CountTrace::load(p)?.0))
        .collect()
}

fn require_file(path: &Path) -> Result<(), CliError> {
    std::fs::metadata(path)
        .map(|_| ())
        .map_err(|e| CliError::io(path, e))
}

fn detect(ctx: &Context, trace: &CountTrace) -> Result<(f64, JumpEvents), CliError> {
    let threshold = ctx
        .config
        .telegraph
        .detect_threshold
        .unwrap_or_else(|| default_threshold(trace));
    let events = detect_jumps(trace, threshold, ctx.config.telegraph.detect_min_run)?;
    Ok((threshold, events))
}

fn jumps_report(ctx: &Context, traces: &[CountTrace], r: &mut Report) -> Result<(), CliError> {
    let mut all = Vec::with_capacity(traces.len());
    let mut matched = CycleMatch::default();
    let mut expected_events = 0.0;
    for t in traces {
        let (threshold, events) = detect(ctx, t)?;
        if traces.len() == 1 {
            r.num("threshold_counts", threshold);
        }
        matched = matched.merge(match_cycles(t, &events, MATCH_TOLERANCE_BINS));
        expected_events += t.params.cycle_rate() * t.duration();
        all.push(events);
    }
    let est = estimate_rate(&all, RateMethod::PoissonSqrt)?;
    let expected_rate = expected_events / est.observation_minutes;
    let sigma = expected_events.sqrt() / est.observation_minutes;
    r.text("traces", traces.len())
        .num("observation_min", est.observation_minutes)
        .text("n_cycles", est.n_events)
        .text(
            "n_transitions",
            all.iter().map(|e| e.transitions.len()).sum::<usize>(),
        )
        .num("rate_per_min", est.rate)
        .num("err_per_min", est.error)
        .text("method", est.method.name())
        .num("expected_cycle_rate_per_min", expected_rate)
        .num("z_score", if sigma > 0.0 { (est.rate - expected_rate) / sigma } else { 0.0 })
        .text("true_cycles", matched.true_cycles)
        .text("matched_cycles", matched.matched)
        .num("recall", matched.recall())
        .text("false_cycles", matched.false_cycles());
    Ok(())
}

fn dwell_report(ctx: &Context, traces: &[CountTrace], r: &mut Report) -> Result<(), CliError> {
    let mut complete = Vec::new();
    let mut censored = Vec::new();
    for t in traces {
        let (_, events) = detect(ctx, t)?;
        let (c, s) = dark_dwells(&events, t.counts.len(), t.bin_width);
        complete.extend(c);
        censored.extend(s);
    }
    let s = dwell_statistics_from(&complete, &censored)?;
    r.text("n_complete", s.n_complete)
        .text("n_censored", s.n_censored)
        .num("mean_dwell_s", s.mean_dwell)
        .num("mle_mean_s", s.mle_mean)
        .num("ci95_low_s", s.ci_low)
        .num("ci95_high_s", s.ci_high);
    Ok(())
}

fn fit_report(fit: &LorentzianFit, r: &mut Report) {
    r.num("center_mhz", fit.center)
        .num("center_err_mhz", fit.center_err)
        .num("center_ci95_mhz", fit.center_ci(CI95_Z))
        .num("fwhm_mhz", fit.fwhm)
        .num("fwhm_err_mhz", fit.fwhm_err)
        .num("fwhm_ci95_mhz", fit.fwhm_ci(CI95_Z))
        .num("amplitude_per_min", fit.amplitude)
        .num("amplitude_err_per_min", fit.amplitude_err)
        .num("offset_per_min", fit.offset)
        .num("offset_err_per_min", fit.offset_err)
        .num("residual_norm", fit.residual_norm)
        .num("chi2", fit.chi2)
        .text("iterations", fit.iterations)
        .text("converged", fit.converged);
}
