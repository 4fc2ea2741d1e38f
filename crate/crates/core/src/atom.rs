//! Ca⁺ level structure: steady-state populations under continuous 397/866 nm
//! excitation, the 850 nm absorption line and the D₅/₂ dark-state dwell.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Exp};

use crate::profile::LineProfile;
use crate::rng::{stream_rng, SimRng, Stream};
use crate::{Error, Result};

/// Relative singular-value threshold below which a direction counts as part
/// of the null space of a rate matrix.
pub const NULL_SPACE_RTOL: f64 = 1e-10;

/// Electronic levels of ⁴⁰Ca⁺ involved in the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    S12,
    P12,
    D32,
    P32,
    D52,
}

impl Level {
    pub const ALL: [Level; 5] = [Level::S12, Level::P12, Level::D32, Level::P32, Level::D52];

    pub fn label(self) -> &'static str {
        match self {
            Level::S12 => "S12",
            Level::P12 => "P12",
            Level::D32 => "D32",
            Level::P32 => "P32",
            Level::D52 => "D52",
        }
    }
}

/// Square matrix of transition rates (1/s). Entry `(i, j)` is the rate from
/// level `j` into level `i`; the diagonal holds minus the total outflow so that
/// `dp/dt = R p` and every column sums to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    labels: Vec<String>,
    rates: DMatrix<f64>,
}

impl RateMatrix {
    /// Validates a full matrix: non-negative off-diagonals and columns summing
    /// to zero within `1e-9 * max|entry|`.
    pub fn new(labels: Vec<String>, rates: DMatrix<f64>) -> Result<Self> {
        let n = labels.len();
        if n == 0 || rates.nrows() != n || rates.ncols() != n {
            return Err(Error::invalid(format!(
                "rate matrix must be {n}x{n} to match its labels, got {}x{}",
                rates.nrows(),
                rates.ncols()
            )));
        }
        if rates.iter().any(|r| !r.is_finite()) {
            return Err(Error::invalid("rate matrix entries must be finite"));
        }
        for j in 0..n {
            for i in 0..n {
                if i != j && rates[(i, j)] < 0.0 {
                    return Err(Error::invalid(format!(
                        "negative rate {} from {} to {}",
                        rates[(i, j)],
                        labels[j],
                        labels[i]
                    )));
                }
            }
        }
        let scale = rates.amax();
        for j in 0..n {
            let sum: f64 = rates.column(j).sum();
            if sum.abs() > 1e-9 * scale {
                return Err(Error::invalid(format!(
                    "column {} sums to {sum}, probability is not conserved",
                    labels[j]
                )));
            }
        }
        Ok(Self { labels, rates })
    }

    /// Builds the matrix from `(from, to, rate)` triples, filling the diagonal.
    pub fn from_transitions(labels: Vec<String>, transitions: &[(usize, usize, f64)]) -> Result<Self> {
        let n = labels.len();
        let mut rates = DMatrix::zeros(n, n);
        for &(from, to, rate) in transitions {
            if from >= n || to >= n || from == to {
                return Err(Error::invalid(format!("bad transition {from} -> {to}")));
            }
            if rate < 0.0 {
                return Err(Error::invalid(format!(
                    "negative rate {rate} from {} to {}",
                    labels[from], labels[to]
                )));
            }
            rates[(to, from)] += rate;
            rates[(from, from)] -= rate;
        }
        Self::new(labels, rates)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rates(&self) -> &DMatrix<f64> {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Time derivative `R p` of a population vector.
    pub fn apply(&self, populations: &[f64]) -> Vec<f64> {
        let p = DVector::from_column_slice(populations);
        (&self.rates * p).iter().copied().collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            labels: self.labels.clone(),
            rates: &self.rates * factor,
        }
    }
}

/// Calibrated excitation of the five relevant levels with the 397 nm and
/// 866 nm lasers on and the 850/854 nm light off.
///
/// | transition           | rate (1/s)  | origin                                  |
/// |----------------------|-------------|-----------------------------------------|
/// | P12 → S12            | 1.3174e8    | Γ(P½) = 2π·22.4 MHz, 93.6 % branch      |
/// | P12 → D32            | 9.008e6     | 6.4 % branch                            |
/// | S12 ↔ P12 (397 nm)   | 2.0e7       | pump and stimulated emission, chosen    |
/// | D32 ↔ P12 (866 nm)   | 7.582e5     | tuned so that p(D32) = 0.600            |
/// | P32 → S12            | 1.46705e8   | Γ(P3/2) = 2π·25 MHz, 93.4 % branch      |
/// | P32 → D52            | 9.2668e6    | 5.9 % branch                            |
/// | P32 → D32            | 1.0996e6    | 0.7 % branch                            |
/// | D52 → S12            | 1/1.2       | observed dark-state return              |
///
/// Only the 0.6 D₃/₂ population is a measured number; every pump rate is a
/// repo calibration reproducing it. P32 and D52 are undriven and carry no
/// steady-state population.
pub fn default_rate_matrix() -> RateMatrix {
    use Level::*;
    let idx = |l: Level| Level::ALL.iter().position(|&m| m == l).unwrap();
    let t = |from, to, rate| (idx(from), idx(to), rate);
    let transitions = [
        t(P12, S12, 1.3174e8),
        t(P12, D32, 9.008e6),
        t(S12, P12, 2.0e7),
        t(P12, S12, 2.0e7),
        t(D32, P12, 7.582e5),
        t(P12, D32, 7.582e5),
        t(P32, S12, 1.46705e8),
        t(P32, D52, 9.2668e6),
        t(P32, D32, 1.0996e6),
        t(D52, S12, 1.0 / 1.2),
    ];
    let labels = Level::ALL.iter().map(|l| l.label().to_string()).collect();
    RateMatrix::from_transitions(labels, &transitions).expect("default calibration is valid")
}

/// Level occupation probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    labels: Vec<String>,
    populations: Vec<f64>,
}

impl LevelSet {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.populations[i])
    }

    pub fn level(&self, level: Level) -> Option<f64> {
        self.get(level.label())
    }
}

/// Stationary distribution of the rate equations: the normalized null vector
/// of `R`.
///
/// The null space is located with an SVD and must be one-dimensional
/// (exactly one singular value at or below [`NULL_SPACE_RTOL`] times the
/// largest). The vector itself is then obtained by replacing one balance
/// equation with the normalization condition and solving the resulting
/// non-singular system.
pub fn steady_state_populations(matrix: &RateMatrix) -> Result<LevelSet> {
    let n = matrix.len();
    let rates = matrix.rates();
    if n == 1 {
        return Ok(LevelSet {
            labels: matrix.labels.clone(),
            populations: vec![1.0],
        });
    }
    let svd = rates.clone().svd(false, false);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Err(Error::DegenerateDynamics("all rates are zero".into()));
    }
    let null_dim = svd
        .singular_values
        .iter()
        .filter(|&&s| s <= NULL_SPACE_RTOL * smax)
        .count();
    if null_dim != 1 {
        return Err(Error::DegenerateDynamics(format!(
            "rate matrix has a {null_dim}-dimensional null space, no unique stationary state"
        )));
    }

    let mut a = rates.clone();
    // Replace the balance row of the level with the largest outflow; it is the
    // one most redundant with the rest.
    let replace = (0..n)
        .max_by(|&i, &j| (-rates[(i, i)]).total_cmp(&(-rates[(j, j)])))
        .unwrap();
    for j in 0..n {
        a[(replace, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[replace] = 1.0;
    let p = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::DegenerateDynamics("normalized balance system is singular".into()))?;

    if let Some(bad) = p.iter().find(|&&x| x < -1e-9) {
        return Err(Error::DegenerateDynamics(format!(
            "stationary vector has negative component {bad}"
        )));
    }
    let mut populations: Vec<f64> = p.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = populations.iter().sum();
    populations.iter_mut().for_each(|x| *x /= total);
    Ok(LevelSet {
        labels: matrix.labels.clone(),
        populations,
    })
}

/// Effective absorption line of the D₃/₂–P₃/₂ transition: a single Lorentzian
/// at zero detuning whose width is the natural width plus the unresolved
/// Zeeman broadening, with unit peak.
pub fn absorption_profile(natural_fwhm: f64, zeeman_broadening: f64) -> Result<LineProfile> {
    if !(natural_fwhm > 0.0) {
        return Err(Error::invalid(format!(
            "natural linewidth must be > 0, got {natural_fwhm}"
        )));
    }
    if !(zeeman_broadening >= 0.0) {
        return Err(Error::invalid(format!(
            "Zeeman broadening must be >= 0, got {zeeman_broadening}"
        )));
    }
    LineProfile::lorentzian(0.0, natural_fwhm + zeeman_broadening, 1.0)
}

/// Residence in the metastable D₅/₂ level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkStateParams {
    mean_dwell: f64,
}

impl DarkStateParams {
    pub fn new(mean_dwell: f64) -> Result<Self> {
        if !(mean_dwell > 0.0 && mean_dwell.is_finite()) {
            return Err(Error::invalid(format!(
                "mean dark dwell must be > 0, got {mean_dwell}"
            )));
        }
        Ok(Self { mean_dwell })
    }

    pub fn mean_dwell(&self) -> f64 {
        self.mean_dwell
    }

    pub fn return_rate(&self) -> f64 {
        1.0 / self.mean_dwell
    }
}

impl Default for DarkStateParams {
    fn default() -> Self {
        Self { mean_dwell: 1.2 }
    }
}

/// Endless stream of exponentially distributed dark dwells.
#[derive(Debug, Clone)]
pub struct DwellSampler {
    rng: SimRng,
    dist: Exp<f64>,
}

impl Iterator for DwellSampler {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.dist.sample(&mut self.rng))
    }
}

pub fn dark_dwell_sampler(params: DarkStateParams, seed: u64) -> DwellSampler {
    DwellSampler {
        rng: stream_rng(seed, 0, Stream::Sampler),
        dist: Exp::new(params.return_rate()).expect("positive rate"),
    }
}
