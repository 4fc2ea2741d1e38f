//! Weighted least-squares line fitting.
//!
//! Both fits share one damped Gauss–Newton optimizer over the parameters
//! `(center, fwhm, amplitude, offset)` with a fixed, data-derived starting
//! point, so repeated fits of the same data are bit-identical.

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};

use crate::interaction::{MassGrid, ScanResult};
use crate::profile::LineProfile;
use crate::{Error, Result};

const N_PARAMS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop once `|step| / |params|` falls below this.
    pub relative_step_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            relative_step_tol: 1e-8,
        }
    }
}

/// Parameters of `offset + amplitude / (1 + (2 (x − center) / fwhm)²)` (or
/// the convolved model for [`fit_convolved_line`]), with 1σ uncertainties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianFit {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub center_err: f64,
    pub fwhm_err: f64,
    pub amplitude_err: f64,
    pub offset_err: f64,
    /// `√(Σ w r²) / √(Σ w y²)`.
    pub residual_norm: f64,
    pub chi2: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LorentzianFit {
    /// Half-width of the two-sided confidence interval at `z` standard errors.
    pub fn fwhm_ci(&self, z: f64) -> f64 {
        z * self.fwhm_err
    }

    pub fn center_ci(&self, z: f64) -> f64 {
        z * self.center_err
    }
}

pub fn lorentzian_model(x: f64, p: &[f64; N_PARAMS]) -> f64 {
    let [c, w, a, o] = *p;
    let u = 2.0 * (x - c) / w;
    o + a / (1.0 + u * u)
}

fn lorentzian_jacobian(x: f64, p: &[f64; N_PARAMS]) -> [f64; N_PARAMS] {
    let [c, w, a, _] = *p;
    let u = 2.0 * (x - c) / w;
    let d = 1.0 + u * u;
    let da_du = -2.0 * a * u / (d * d);
    [da_du * (-2.0 / w), da_du * (-u / w), 1.0 / d, 1.0]
}

/// Weighted data prepared for fitting.
struct FitData<'a> {
    x: &'a [f64],
    y: &'a [f64],
    weights: Vec<f64>,
    /// Errors were given, so the covariance is not rescaled by χ²/dof.
    absolute_sigma: bool,
}

impl<'a> FitData<'a> {
    fn new(scan: &'a ScanResult) -> Result<Self> {
        if scan.len() < 5 {
            return Err(Error::InsufficientData {
                needed: 5,
                got: scan.len(),
            });
        }
        let (lo, hi) = min_max(scan.rates());
        if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
            return Err(Error::FlatData);
        }
        let floor = scan
            .errors()
            .iter()
            .cloned()
            .filter(|&e| e > 0.0)
            .fold(f64::INFINITY, f64::min);
        let absolute_sigma = floor.is_finite();
        let weights = if absolute_sigma {
            scan.errors().iter().map(|&e| 1.0 / e.max(floor).powi(2)).collect()
        } else {
            vec![1.0; scan.len()]
        };
        Ok(Self {
            x: scan.x(),
            y: scan.rates(),
            weights,
            absolute_sigma,
        })
    }

    fn norm_y(&self) -> f64 {
        self.y
            .iter()
            .zip(&self.weights)
            .map(|(y, w)| w * y * y)
            .sum::<f64>()
            .sqrt()
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y)))
}

/// Starting point: offset = min, amplitude = max − min, center = argmax,
/// fwhm = distance between the half-maximum crossings (x-range / 4 when a
/// crossing is missing).
fn initial_guess(x: &[f64], y: &[f64]) -> [f64; N_PARAMS] {
    let (lo, hi) = min_max(y);
    let imax = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let half = lo + 0.5 * (hi - lo);
    let cross = |i: usize, j: usize| x[i] + (x[j] - x[i]) * (half - y[i]) / (y[j] - y[i]);
    let right = (imax + 1..y.len()).find(|&i| y[i] < half).map(|i| cross(i - 1, i));
    let left = (0..imax).rev().find(|&i| y[i] < half).map(|i| cross(i + 1, i));
    let fwhm = match (left, right) {
        (Some(l), Some(r)) if r > l => r - l,
        _ => (x[x.len() - 1] - x[0]) / 4.0,
    };
    [x[imax], fwhm, hi - lo, lo]
}

trait Model {
    fn value(&self, x: f64, p: &[f64; N_PARAMS]) -> f64;
    fn gradient(&self, x: f64, p: &[f64; N_PARAMS]) -> [f64; N_PARAMS];
}

struct Lorentzian;

impl Model for Lorentzian {
    fn value(&self, x: f64, p: &[f64; N_PARAMS]) -> f64 {
        lorentzian_model(x, p)
    }

    fn gradient(&self, x: f64, p: &[f64; N_PARAMS]) -> [f64; N_PARAMS] {
        lorentzian_jacobian(x, p)
    }
}

/// `offset + amplitude · K(x − center) / K(0)` with `K = filter ⊗ L(fwhm)`.
struct Convolved {
    filter: MassGrid,
    scale: f64,
}

impl Convolved {
    fn kernel(&self, x: f64, fwhm: f64) -> f64 {
        let hw = 0.5 * fwhm;
        self.filter.convolve_at(x, |d| {
            let u = d / hw;
            1.0 / (1.0 + u * u)
        })
    }
}

impl Model for Convolved {
    fn value(&self, x: f64, p: &[f64; N_PARAMS]) -> f64 {
        let [c, w, a, o] = *p;
        o + a * self.kernel(x - c, w) / self.kernel(0.0, w)
    }

    fn gradient(&self, x: f64, p: &[f64; N_PARAMS]) -> [f64; N_PARAMS] {
        let mut g = [0.0; N_PARAMS];
        let [_, w, a, _] = *p;
        // Shape derivatives by central differences; amplitude and offset enter linearly.
        for (k, h) in [(0usize, 1e-6 * self.scale), (1, 1e-6 * w.abs().max(1e-3 * self.scale))] {
            let mut up = *p;
            let mut dn = *p;
            up[k] += h;
            dn[k] -= h;
            g[k] = (self.value(x, &up) - self.value(x, &dn)) / (2.0 * h);
        }
        let shape = if a != 0.0 {
            (self.value(x, p) - p[3]) / a
        } else {
            let unit = [p[0], p[1], 1.0, 0.0];
            self.value(x, &unit)
        };
        g[2] = shape;
        g[3] = 1.0;
        g
    }
}

struct Outcome {
    params: [f64; N_PARAMS],
    covariance: Option<Matrix4<f64>>,
    chi2: f64,
    iterations: usize,
    converged: bool,
}

fn chi2_of(model: &dyn Model, data: &FitData, p: &[f64; N_PARAMS]) -> f64 {
    data.x
        .iter()
        .zip(data.y)
        .zip(&data.weights)
        .map(|((&x, &y), &w)| w * (y - model.value(x, p)).powi(2))
        .sum()
}

fn normal_equations(model: &dyn Model, data: &FitData, p: &[f64; N_PARAMS]) -> (Matrix4<f64>, Vector4<f64>) {
    let n = data.x.len();
    let mut j = DMatrix::zeros(n, N_PARAMS);
    let mut r = DVector::zeros(n);
    for i in 0..n {
        let sw = data.weights[i].sqrt();
        let g = model.gradient(data.x[i], p);
        for k in 0..N_PARAMS {
            j[(i, k)] = sw * g[k];
        }
        r[i] = sw * (data.y[i] - model.value(data.x[i], p));
    }
    let jtj = j.transpose() * &j;
    let jtr = j.transpose() * r;
    (
        Matrix4::from_iterator(jtj.iter().copied()),
        Vector4::from_iterator(jtr.iter().copied()),
    )
}

/// Levenberg-style damped Gauss–Newton: solve `(JᵀWJ + λ diag) δ = JᵀW r`,
/// accept the step if χ² does not increase and the width stays positive.
fn optimize(model: &dyn Model, data: &FitData, start: [f64; N_PARAMS], opts: &FitOptions) -> Outcome {
    let mut p = start;
    let mut chi2 = chi2_of(model, data, &p);
    let floor = 1e-30 * data.norm_y().powi(2);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        if chi2 <= floor {
            converged = true;
            break;
        }
        let (jtj, jtr) = normal_equations(model, data, &p);
        let mut accepted = false;
        while lambda < 1e20 {
            let mut a = jtj;
            for k in 0..N_PARAMS {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = p;
            for k in 0..N_PARAMS {
                trial[k] += step[k];
            }
            let trial_chi2 = if trial[1] > 0.0 && trial.iter().all(|v| v.is_finite()) {
                chi2_of(model, data, &trial)
            } else {
                f64::INFINITY
            };
            if trial_chi2 <= chi2 {
                let pnorm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                let snorm = step.norm();
                p = trial;
                chi2 = trial_chi2;
                lambda = (lambda * 0.1).max(1e-12);
                accepted = true;
                if snorm <= opts.relative_step_tol * pnorm {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if converged {
            break;
        }
        if !accepted {
            // No descent direction left at any damping: a stationary point.
            converged = chi2.is_finite();
            break;
        }
    }
    let (jtj, _) = normal_equations(model, data, &p);
    let covariance = jtj.try_inverse().filter(|c| {
        (0..N_PARAMS).all(|k| c[(k, k)].is_finite() && c[(k, k)] >= 0.0)
    });
    Outcome {
        params: p,
        covariance,
        chi2,
        iterations,
        converged,
    }
}

fn finish(outcome: Outcome, data: &FitData) -> LorentzianFit {
    let [center, fwhm, amplitude, offset] = outcome.params;
    let dof = (data.x.len() - N_PARAMS).max(1) as f64;
    let scale = if data.absolute_sigma { 1.0 } else { outcome.chi2 / dof };
    let err = |k: usize| {
        outcome
            .covariance
            .map(|c| (c[(k, k)] * scale).sqrt())
            .unwrap_or(f64::INFINITY)
    };
    LorentzianFit {
        center,
        fwhm,
        amplitude,
        offset,
        center_err: err(0),
        fwhm_err: err(1),
        amplitude_err: err(2),
        offset_err: err(3),
        residual_norm: outcome.chi2.sqrt() / data.norm_y(),
        chi2: outcome.chi2,
        iterations: outcome.iterations,
        converged: outcome.converged && outcome.covariance.is_some(),
    }
}

/// Weighted Lorentzian fit of a scan (weights `1/error²`, unit weights when
/// all errors are zero; zero errors among non-zero ones are floored at the
/// smallest non-zero error).
pub fn fit_lorentzian(scan: &ScanResult) -> Result<LorentzianFit> {
    fit_lorentzian_with(scan, &FitOptions::default())
}

pub fn fit_lorentzian_with(scan: &ScanResult, opts: &FitOptions) -> Result<LorentzianFit> {
    let data = FitData::new(scan)?;
    let start = initial_guess(data.x, data.y);
    Ok(finish(optimize(&Lorentzian, &data, start, opts), &data))
}

/// Fit of an atomic Lorentzian seen through a known filter spectrum: the
/// model is the filter convolved with a Lorentzian of free width, normalized
/// so `amplitude` is the height above `offset` at `center`. The returned
/// `fwhm` is the atomic width.
///
/// The atomic width is not identifiable when the filter is wider than the
/// scanned range; such fits are returned with `converged = false`.
pub fn fit_convolved_line(scan: &ScanResult, known_filter: &LineProfile) -> Result<LorentzianFit> {
    fit_convolved_line_with(scan, known_filter, &FitOptions::default())
}

/// Upper bound on the number of cells used to represent the known filter.
const MAX_FILTER_CELLS: f64 = 20_000.0;

pub fn fit_convolved_line_with(
    scan: &ScanResult,
    known_filter: &LineProfile,
    opts: &FitOptions,
) -> Result<LorentzianFit> {
    let data = FitData::new(scan)?;
    let span = data.x[data.x.len() - 1] - data.x[0];
    let filter = known_filter.recentered(0.0);
    let total = fit_lorentzian_with(scan, opts)
        .ok()
        .filter(|f| f.fwhm.is_finite() && f.fwhm > 0.0);
    let mut start = initial_guess(data.x, data.y);
    let overall = total.map(|f| f.fwhm).unwrap_or(start[1]);
    if let Some(f) = total {
        start = [f.center, f.fwhm, f.amplitude, f.offset];
    }
    start[1] = (overall - filter.fwhm()).max(0.1 * overall);

    let step = match filter.grid() {
        Some(g) => g.step(),
        None => filter.fwhm().min(start[1]) / 100.0,
    };
    let half_span = match filter.grid() {
        Some(g) => (g.end() - g.start()) / 2.0 + g.step(),
        None => 50.0 * filter.fwhm(),
    };
    let step = step.max(2.0 * half_span / MAX_FILTER_CELLS);
    let model = Convolved {
        filter: MassGrid::new(&filter, step, half_span),
        scale: span.max(overall),
    };
    let mut fit = finish(optimize(&model, &data, start, opts), &data);
    if filter.fwhm() >= span {
        fit.converged = false;
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::{ScanKind, ScanMeta};

    fn scan_of(x: Vec<f64>, y: Vec<f64>) -> ScanResult {
        let n = x.len();
        ScanResult::new(x, y, vec![0.0; n], ScanMeta::analytic(ScanKind::Frequency)).unwrap()
    }

    fn samples(p: [f64; 4]) -> ScanResult {
        let x: Vec<f64> = (0..21).map(|i| -90.0 + 9.0 * i as f64).collect();
        let y = x.iter().map(|&x| lorentzian_model(x, &p)).collect();
        scan_of(x, y)
    }

    #[test]
    fn recovers_noise_free_lorentzian() {
        let truth = [0.0, 36.0, 0.6, 0.09];
        let fit = fit_lorentzian(&samples(truth)).unwrap();
        assert!(fit.converged);
        assert!(fit.center.abs() < 1e-6);
        assert!((fit.fwhm / 36.0 - 1.0).abs() < 1e-3);
        assert!((fit.amplitude / 0.6 - 1.0).abs() < 1e-3);
        assert!((fit.offset / 0.09 - 1.0).abs() < 1e-3);
        assert!(fit.residual_norm < 1e-10, "{}", fit.residual_norm);
    }

    #[test]
    fn analytic_jacobian_matches_differences() {
        let p = [3.0, 20.0, 1.5, 0.2];
        for x in [-30.0, 0.0, 7.0, 40.0] {
            let g = lorentzian_jacobian(x, &p);
            for k in 0..4 {
                let h = 1e-6;
                let mut up = p;
                let mut dn = p;
                up[k] += h;
                dn[k] -= h;
                let fd = (lorentzian_model(x, &up) - lorentzian_model(x, &dn)) / (2.0 * h);
                assert!((fd - g[k]).abs() < 1e-6, "k={k}: {fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn flat_data_is_an_error() {
        let x: Vec<f64> = (0..7).map(|i| i as f64).collect();
        assert!(matches!(
            fit_lorentzian(&scan_of(x.clone(), vec![0.3; 7])),
            Err(Error::FlatData)
        ));
        assert!(matches!(
            fit_lorentzian(&scan_of(x[..4].to_vec(), vec![0.0, 1.0, 0.0, 0.0])),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn near_delta_filter_matches_plain_fit() {
        let truth = [5.0, 40.0, 0.5, 0.1];
        let scan = samples(truth);
        let plain = fit_lorentzian(&scan).unwrap();
        let delta = LineProfile::lorentzian(0.0, 1e-3, 1.0).unwrap();
        let conv = fit_convolved_line(&scan, &delta).unwrap();
        assert!(conv.converged);
        assert!((conv.fwhm / plain.fwhm - 1.0).abs() < 0.01, "{} vs {}", conv.fwhm, plain.fwhm);
        assert!((conv.center - plain.center).abs() < 0.01 * plain.fwhm);
    }

    #[test]
    fn filter_wider_than_scan_is_not_converged() {
        let scan = samples([0.0, 58.0, 0.3, 0.09]);
        let wide = LineProfile::lorentzian(0.0, 1000.0, 1.0).unwrap();
        let fit = fit_convolved_line(&scan, &wide).unwrap();
        assert!(!fit.converged);
    }
}
