//! The four experiment commands.

mod analyze;
mod predict;
mod scan;
mod simulate;

pub use analyze::{analyze, AnalysisTask};
pub use predict::{predict, Prediction};
pub use scan::{analytic_scan, montecarlo_scan, scan, ScanMode};
pub use simulate::{signal_pump_rate, simulate, simulate_trials, telegraph_params};

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Resolved configuration plus where and how to run.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    /// Worker threads; results never depend on this.
    pub jobs: usize,
}

impl Context {
    pub fn new(config: ExperimentConfig, out_dir: impl Into<PathBuf>, jobs: usize) -> Self {
        Self {
            config,
            out_dir: out_dir.into(),
            jobs: jobs.max(1),
        }
    }

    fn output(&self, name: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| CliError::io(&self.out_dir, e))?;
        Ok(self.out_dir.join(name))
    }

    /// Writes the resolved configuration next to the outputs.
    fn write_resolved_config(&self) -> Result<(), CliError> {
        let path = self.output("config.resolved.ini")?;
        std::fs::write(&path, self.config.to_ini()).map_err(|e| CliError::io(&path, e))
    }
}

/// `f(0..n)` on `jobs` threads, results in index order.
pub(crate) fn par_map<T, F>(jobs: usize, n: usize, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(usize) -> Result<T, CliError> + Sync + Send,
{
    if jobs <= 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} worker threads: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}
