//! The down-conversion source: the broadband, temperature-tuned emission
//! envelope of the unfiltered arm and the two-cavity filter chain of the
//! filtered arm.

use std::f64::consts::LN_2;
use std::str::FromStr;

use log::warn;

use crate::profile::LineProfile;
use crate::{Error, Result};

/// Argument at which `sinc²` drops to one half: `(sin u / u)² = 1/2`.
const SINC2_HALF_ARG: f64 = 1.391_557_378_251_51;

/// Minimum number of grid points per chain FWHM in sampled spectra.
pub const POINTS_PER_FWHM: usize = 2000;

/// Half-span of sampled filtered spectra, in chain FWHMs.
pub const SPECTRUM_HALF_SPAN_FWHM: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnvelopeShape {
    #[default]
    Gaussian,
    SincSquared,
}

impl EnvelopeShape {
    pub fn name(self) -> &'static str {
        match self {
            EnvelopeShape::Gaussian => "gaussian",
            EnvelopeShape::SincSquared => "sinc-squared",
        }
    }

    /// Unit-peak shape as a function of `x = offset / fwhm`.
    fn unit(self, x: f64) -> f64 {
        match self {
            EnvelopeShape::Gaussian => (-4.0 * LN_2 * x * x).exp(),
            EnvelopeShape::SincSquared => {
                let u = 2.0 * SINC2_HALF_ARG * x;
                if u.abs() < 1e-8 {
                    1.0
                } else {
                    let s = u.sin() / u;
                    s * s
                }
            }
        }
    }
}

impl FromStr for EnvelopeShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(EnvelopeShape::Gaussian),
            "sinc-squared" | "sinc2" => Ok(EnvelopeShape::SincSquared),
            other => Err(Error::invalid(format!(
                "unknown envelope shape '{other}' (expected gaussian or sinc-squared)"
            ))),
        }
    }
}

/// Emission envelope of the unfiltered arm.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdcSourceConfig {
    /// Envelope FWHM, GHz.
    pub envelope_fwhm_ghz: f64,
    /// On-peak spectral flux density, photons/(s·MHz).
    pub peak_flux_density: f64,
    /// Shift of the envelope center per degree of crystal temperature, GHz/°C.
    pub temp_slope_ghz_per_c: f64,
    /// Crystal temperature at which the envelope is centered on the line, °C.
    pub ref_temperature_c: f64,
    pub envelope_shape: EnvelopeShape,
}

impl Default for SpdcSourceConfig {
    fn default() -> Self {
        Self {
            envelope_fwhm_ghz: 200.0,
            peak_flux_density: 250.0,
            temp_slope_ghz_per_c: -59.0,
            ref_temperature_c: 30.0,
            envelope_shape: EnvelopeShape::Gaussian,
        }
    }
}

impl SpdcSourceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.envelope_fwhm_ghz > 0.0 && self.envelope_fwhm_ghz.is_finite()) {
            return Err(Error::invalid(format!(
                "envelope_fwhm_ghz must be > 0, got {}",
                self.envelope_fwhm_ghz
            )));
        }
        if !(self.peak_flux_density > 0.0 && self.peak_flux_density.is_finite()) {
            return Err(Error::invalid(format!(
                "peak_flux_density must be > 0, got {}",
                self.peak_flux_density
            )));
        }
        if self.temp_slope_ghz_per_c == 0.0 || !self.temp_slope_ghz_per_c.is_finite() {
            return Err(Error::invalid(
                "temp_slope_ghz_per_c must be non-zero and finite",
            ));
        }
        if !self.ref_temperature_c.is_finite() {
            return Err(Error::invalid("ref_temperature_c must be finite"));
        }
        Ok(())
    }

    /// Envelope center as a detuning from the line, GHz.
    pub fn envelope_center(&self, temperature_c: f64) -> f64 {
        self.temp_slope_ghz_per_c * (temperature_c - self.ref_temperature_c)
    }

    /// Spectral flux density at `detuning_ghz`, photons/(s·MHz).
    pub fn spectral_flux_density(&self, detuning_ghz: f64, temperature_c: f64) -> f64 {
        let offset = detuning_ghz - self.envelope_center(temperature_c);
        self.peak_flux_density * self.envelope_shape.unit(offset / self.envelope_fwhm_ghz)
    }

    /// Area of the unit-peak envelope in MHz, so that total flux is
    /// `peak_flux_density * effective_width_mhz()`.
    pub fn effective_width_mhz(&self) -> f64 {
        let fwhm_mhz = self.envelope_fwhm_ghz * 1e3;
        match self.envelope_shape {
            EnvelopeShape::Gaussian => fwhm_mhz * (std::f64::consts::PI / (4.0 * LN_2)).sqrt(),
            EnvelopeShape::SincSquared => {
                // ∫ sinc²(a x) dx = π / a with a = 2·SINC2_HALF_ARG / fwhm
                std::f64::consts::PI * fwhm_mhz / (2.0 * SINC2_HALF_ARG)
            }
        }
    }
}

pub fn envelope_center(config: &SpdcSourceConfig, temperature_c: f64) -> f64 {
    config.envelope_center(temperature_c)
}

pub fn spectral_flux_density(config: &SpdcSourceConfig, detuning_ghz: f64, temperature_c: f64) -> f64 {
    config.spectral_flux_density(detuning_ghz, temperature_c)
}

/// Cascade of Fabry-Perot filter cavities, each with a Lorentzian
/// transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterChainConfig {
    /// Per-cavity FWHM, MHz.
    pub cavity_fwhms_mhz: Vec<f64>,
    /// Total on-resonance transmission.
    pub peak_transmission: f64,
    /// Filter center relative to the line, MHz.
    pub detuning_offset_mhz: f64,
}

impl Default for FilterChainConfig {
    /// Two identical cavities giving a 22 MHz chain at 50 % transmission.
    fn default() -> Self {
        Self::identical(2, 22.0, 0.5, 0.0).expect("valid default chain")
    }
}

impl FilterChainConfig {
    /// `n` identical cavities whose product has FWHM `chain_fwhm`.
    pub fn identical(n: usize, chain_fwhm: f64, peak_transmission: f64, offset: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("filter chain needs at least one cavity"));
        }
        let width = chain_fwhm / identical_narrowing(n);
        let chain = Self {
            cavity_fwhms_mhz: vec![width; n],
            peak_transmission,
            detuning_offset_mhz: offset,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cavity_fwhms_mhz.is_empty() {
            return Err(Error::invalid("filter chain needs at least one cavity"));
        }
        if let Some(w) = self
            .cavity_fwhms_mhz
            .iter()
            .find(|w| !(**w > 0.0 && w.is_finite()))
        {
            return Err(Error::invalid(format!("cavity_fwhm_mhz must be > 0, got {w}")));
        }
        if !(self.peak_transmission > 0.0 && self.peak_transmission <= 1.0) {
            return Err(Error::invalid(format!(
                "peak_transmission must be in (0, 1], got {}",
                self.peak_transmission
            )));
        }
        if !self.detuning_offset_mhz.is_finite() {
            return Err(Error::invalid("detuning_offset_mhz must be finite"));
        }
        Ok(())
    }

    /// Transmission at `detuning_mhz`: product of the cavity Lorentzians,
    /// scaled to `peak_transmission` on resonance.
    pub fn transmission(&self, detuning_mhz: f64) -> f64 {
        let d = detuning_mhz - self.detuning_offset_mhz;
        self.peak_transmission * self.unit_transmission(d)
    }

    fn unit_transmission(&self, offset: f64) -> f64 {
        self.cavity_fwhms_mhz
            .iter()
            .map(|w| {
                let u = 2.0 * offset / w;
                1.0 / (1.0 + u * u)
            })
            .product()
    }

    /// FWHM of the chain transmission, MHz. Closed form for identical
    /// cavities, bisection on the half-maximum otherwise.
    pub fn chain_fwhm(&self) -> f64 {
        let first = self.cavity_fwhms_mhz[0];
        if self.cavity_fwhms_mhz.iter().all(|&w| w == first) {
            return first * identical_narrowing(self.cavity_fwhms_mhz.len());
        }
        // The product is even and strictly decreasing in |offset|.
        let mut lo = 0.0;
        let mut hi = self
            .cavity_fwhms_mhz
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.unit_transmission(mid) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 * hi {
                break;
            }
        }
        lo + hi
    }

    /// Lorentzian with the chain's center, FWHM and peak transmission.
    pub fn effective_lorentzian(&self) -> LineProfile {
        LineProfile::lorentzian(self.detuning_offset_mhz, self.chain_fwhm(), self.peak_transmission)
            .expect("validated chain")
    }

    /// Exact chain transmission sampled on the standard spectrum grid.
    pub fn sampled_transmission(&self) -> LineProfile {
        let (start, step, n) = spectrum_grid(self);
        let values = (0..n)
            .map(|i| self.transmission(start + i as f64 * step))
            .collect();
        LineProfile::sampled(start, step, values).expect("transmission is a valid profile")
    }

    pub fn with_offset(&self, offset: f64) -> Self {
        Self {
            detuning_offset_mhz: offset,
            ..self.clone()
        }
    }
}

/// Ratio of chain FWHM to cavity FWHM for `n` identical Lorentzian cavities.
fn identical_narrowing(n: usize) -> f64 {
    (2f64.powf(1.0 / n as f64) - 1.0).sqrt()
}

pub fn filter_transmission(chain: &FilterChainConfig, detuning_mhz: f64) -> f64 {
    chain.transmission(detuning_mhz)
}

fn spectrum_grid(chain: &FilterChainConfig) -> (f64, f64, usize) {
    let fwhm = chain.chain_fwhm();
    let step = fwhm / POINTS_PER_FWHM as f64;
    let half_points = (SPECTRUM_HALF_SPAN_FWHM * POINTS_PER_FWHM as f64) as usize;
    let start = chain.detuning_offset_mhz - half_points as f64 * step;
    (start, step, 2 * half_points + 1)
}

/// Photon spectrum behind the filter chain: envelope flux density times
/// chain transmission on a grid of ±10 chain FWHM around the filter center,
/// photons/(s·MHz).
pub fn filtered_photon_spectrum(
    config: &SpdcSourceConfig,
    chain: &FilterChainConfig,
    temperature_c: f64,
) -> Result<LineProfile> {
    let fwhm = chain.chain_fwhm();
    if fwhm * 10.0 > config.envelope_fwhm_ghz * 1e3 {
        warn!(
            "filter chain FWHM {fwhm} MHz is not much narrower than the {} GHz envelope",
            config.envelope_fwhm_ghz
        );
    }
    let (start, step, n) = spectrum_grid(chain);
    let values = (0..n)
        .map(|i| {
            let d = start + i as f64 * step;
            config.spectral_flux_density(d * 1e-3, temperature_c) * chain.transmission(d)
        })
        .collect();
    LineProfile::sampled(start, step, values).map_err(|_| {
        Error::invalid(format!(
            "filtered spectrum vanishes at {temperature_c} °C (envelope far from filter)"
        ))
    })
}

/// Total photon rate of a sampled spectrum, photons/s.
pub fn integrated_rate(spectrum: &LineProfile) -> f64 {
    spectrum.integral()
}

/// Writes `detuning_mhz,flux_density` rows with six significant digits.
pub fn write_spectrum_csv<W: std::io::Write>(spectrum: &LineProfile, mut out: W) -> Result<()> {
    writeln!(out, "detuning_mhz,flux_density")?;
    match spectrum.grid() {
        Some(g) => {
            for (x, v) in g.points() {
                writeln!(out, "{},{}", crate::format::sig6(x), crate::format::sig6(v))?;
            }
        }
        None => return Err(Error::invalid("spectrum export needs a sampled profile")),
    }
    Ok(())
}
