//! Spectral line profiles.

use std::f64::consts::{LN_2, PI};

use statrs::function::erf::erf;

use crate::{Error, Result};

/// Functional form of a [`LineProfile`].
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileShape {
    Lorentzian,
    Gaussian,
    Sampled(SampledGrid),
}

/// Values on a uniform grid `start + i * step`. Linear interpolation between
/// points, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    start: f64,
    step: f64,
    values: Vec<f64>,
}

impl SampledGrid {
    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.x(self.values.len() - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.x(i), v))
    }

    fn interpolate(&self, x: f64) -> f64 {
        let u = (x - self.start) / self.step;
        if u < 0.0 || u > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = u.floor() as usize;
        if i + 1 >= self.values.len() {
            return self.values[self.values.len() - 1];
        }
        let frac = u - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        let n = self.values.len();
        let inner: f64 = self.values[1..n - 1].iter().sum();
        self.step * (inner + 0.5 * (self.values[0] + self.values[n - 1]))
    }
}

/// A spectral response: center (MHz detuning), full width at half maximum
/// and the value at the center.
///
/// For sampled profiles the three descriptors are measured from the grid:
/// `peak` is the largest grid value, `fwhm` the distance between the
/// interpolated half-maximum crossings and `center` their midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct LineProfile {
    center: f64,
    fwhm: f64,
    peak: f64,
    shape: ProfileShape,
}

impl LineProfile {
    pub fn lorentzian(center: f64, fwhm: f64, peak: f64) -> Result<Self> {
        Self::analytic(center, fwhm, peak, ProfileShape::Lorentzian)
    }

    pub fn gaussian(center: f64, fwhm: f64, peak: f64) -> Result<Self> {
        Self::analytic(center, fwhm, peak, ProfileShape::Gaussian)
    }

    fn analytic(center: f64, fwhm: f64, peak: f64, shape: ProfileShape) -> Result<Self> {
        if !(fwhm > 0.0 && fwhm.is_finite()) {
            return Err(Error::invalid(format!("profile fwhm must be > 0, got {fwhm}")));
        }
        if !(peak >= 0.0 && peak.is_finite()) {
            return Err(Error::invalid(format!("profile peak must be >= 0, got {peak}")));
        }
        if !center.is_finite() {
            return Err(Error::invalid("profile center must be finite"));
        }
        Ok(Self {
            center,
            fwhm,
            peak,
            shape,
        })
    }

    /// Builds a sampled profile from values on a uniform grid.
    pub fn sampled(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) || !start.is_finite() {
            return Err(Error::invalid(format!("grid step must be > 0, got {step}")));
        }
        if values.len() < 3 {
            return Err(Error::invalid("sampled profile needs at least 3 points"));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!(
                "sampled profile values must be finite and >= 0, found {v}"
            )));
        }
        let grid = SampledGrid { start, step, values };
        let (left, right, peak) = half_max_crossings(&grid)?;
        Ok(Self {
            center: 0.5 * (left + right),
            fwhm: right - left,
            peak,
            shape: ProfileShape::Sampled(grid),
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn fwhm(&self) -> f64 {
        self.fwhm
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn shape(&self) -> &ProfileShape {
        &self.shape
    }

    pub fn grid(&self) -> Option<&SampledGrid> {
        match &self.shape {
            ProfileShape::Sampled(g) => Some(g),
            _ => None,
        }
    }

    pub fn is_sampled(&self) -> bool {
        self.grid().is_some()
    }

    /// Gaussian standard deviation corresponding to the FWHM.
    pub fn gaussian_sigma(&self) -> f64 {
        self.fwhm / (2.0 * (2.0 * LN_2).sqrt())
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match &self.shape {
            ProfileShape::Lorentzian => {
                let u = 2.0 * (x - self.center) / self.fwhm;
                self.peak / (1.0 + u * u)
            }
            ProfileShape::Gaussian => {
                let u = (x - self.center) / self.fwhm;
                self.peak * (-4.0 * LN_2 * u * u).exp()
            }
            ProfileShape::Sampled(g) => g.interpolate(x),
        }
    }

    /// Integral of the profile over `[a, b]`. Exact for the analytic shapes,
    /// midpoint rule for sampled profiles.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        match &self.shape {
            ProfileShape::Lorentzian => {
                let hw = 0.5 * self.fwhm;
                let ua = ((a - self.center) / hw).atan();
                let ub = ((b - self.center) / hw).atan();
                self.peak * hw * (ub - ua)
            }
            ProfileShape::Gaussian => {
                let s = self.gaussian_sigma() * 2f64.sqrt();
                let ea = erf((a - self.center) / s);
                let eb = erf((b - self.center) / s);
                self.peak * self.gaussian_sigma() * (2.0 * PI).sqrt() * 0.5 * (eb - ea)
            }
            ProfileShape::Sampled(g) => g.interpolate(0.5 * (a + b)) * (b - a),
        }
    }

    /// Total area under the profile.
    pub fn integral(&self) -> f64 {
        match &self.shape {
            ProfileShape::Lorentzian => self.peak * PI * self.fwhm / 2.0,
            ProfileShape::Gaussian => self.peak * self.gaussian_sigma() * (2.0 * PI).sqrt(),
            ProfileShape::Sampled(g) => g.integral(),
        }
    }

    /// Same profile shifted so its center sits at `center`.
    pub fn recentered(&self, center: f64) -> Self {
        let mut out = self.clone();
        let shift = center - self.center;
        out.center = center;
        if let ProfileShape::Sampled(g) = &mut out.shape {
            g.start += shift;
        }
        out
    }

    /// Same shape with unit peak.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        if self.peak > 0.0 {
            if let ProfileShape::Sampled(g) = &mut out.shape {
                g.values.iter_mut().for_each(|v| *v /= self.peak);
            }
            out.peak = 1.0;
        }
        out
    }
}

/// Locates the interpolated half-maximum crossings on either side of the
/// global maximum. Returns `(left, right, peak)`.
fn half_max_crossings(grid: &SampledGrid) -> Result<(f64, f64, f64)> {
    let v = &grid.values;
    let (imax, &peak) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if peak <= 0.0 {
        return Err(Error::invalid("sampled profile is identically zero"));
    }
    let half = 0.5 * peak;
    let right = (imax + 1..v.len())
        .find(|&i| v[i] < half)
        .map(|i| grid.x(i - 1) + grid.step * (v[i - 1] - half) / (v[i - 1] - v[i]));
    let left = (0..imax)
        .rev()
        .find(|&i| v[i] < half)
        .map(|i| grid.x(i + 1) - grid.step * (v[i + 1] - half) / (v[i + 1] - v[i]));
    match (left, right) {
        (Some(l), Some(r)) => Ok((l, r, peak)),
        _ => Err(Error::invalid(
            "sampled profile does not fall below half maximum inside its grid",
        )),
    }
}
