//! From incident photon flux to quantum-jump rate.
//!
//! The jump rate is the resonant flux times a chain of five efficiencies
//! (D₃/₂ population, dipole fraction, branching into D₅/₂, polarization match
//! and geometric overlap). The scan models build on this to predict jump rate
//! versus crystal temperature (unfiltered arm) and versus filter frequency
//! (filtered arm).

mod convolve;
mod scan;

pub use convolve::{convolve_profiles, MassGrid, MIN_POINTS_PER_FWHM};
pub use scan::{parse_scan_csv, ErrorRule, ScanKind, ScanMeta, ScanResult, SCAN_CSV_HEADER};

use crate::profile::LineProfile;
use crate::spdc::{FilterChainConfig, SpdcSourceConfig};
use crate::{Error, Result};

/// The five reduction factors between resonant flux and jump rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingFactors {
    pub d32_population: f64,
    pub dipole_fraction: f64,
    pub branching_to_d52: f64,
    pub polarization_match: f64,
    pub geometric_overlap: f64,
}

impl Default for CouplingFactors {
    fn default() -> Self {
        Self {
            d32_population: 0.6,
            dipole_fraction: 0.007,
            branching_to_d52: 0.059,
            polarization_match: 1.0 / 3.0,
            geometric_overlap: 0.02,
        }
    }
}

impl CouplingFactors {
    pub fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("d32_population", self.d32_population),
            ("dipole_fraction", self.dipole_fraction),
            ("branching_to_d52", self.branching_to_d52),
            ("polarization_match", self.polarization_match),
            ("geometric_overlap", self.geometric_overlap),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named() {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(format!("{name} must be in (0, 1], got {v}")));
            }
        }
        Ok(())
    }

    pub fn product(&self) -> f64 {
        self.named().iter().map(|(_, v)| v).product()
    }
}

/// Background jump rate and fluorescence count rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundRates {
    /// Jumps without SPDC light, events/min.
    pub background_jump_rate: f64,
    /// Fluorescence while bright, counts/s.
    pub bright_count_rate: f64,
    /// Dark counts and stray light, counts/s.
    pub dark_count_rate: f64,
}

impl Default for BackgroundRates {
    fn default() -> Self {
        Self {
            background_jump_rate: 0.09,
            bright_count_rate: 20_000.0,
            dark_count_rate: 100.0,
        }
    }
}

impl BackgroundRates {
    pub fn validate(&self) -> Result<()> {
        if !(self.background_jump_rate >= 0.0) {
            return Err(Error::invalid("background_jump_rate must be >= 0"));
        }
        if !(self.dark_count_rate >= 0.0) {
            return Err(Error::invalid("dark_count_rate must be >= 0"));
        }
        if !(self.bright_count_rate > self.dark_count_rate) {
            return Err(Error::invalid(
                "bright_count_rate must exceed dark_count_rate",
            ));
        }
        Ok(())
    }
}

/// How incident flux within the absorption line is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxModel {
    /// Density at line center times the window width.
    #[default]
    Rectangular,
    /// ∫ density(ν) · L(ν)/L(0) dν over the line profile.
    Overlap,
}

impl FluxModel {
    pub fn name(self) -> &'static str {
        match self {
            FluxModel::Rectangular => "rectangular",
            FluxModel::Overlap => "overlap",
        }
    }
}

impl std::str::FromStr for FluxModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rectangular" => Ok(FluxModel::Rectangular),
            "overlap" => Ok(FluxModel::Overlap),
            other => Err(Error::invalid(format!(
                "unknown flux model '{other}' (expected rectangular or overlap)"
            ))),
        }
    }
}

/// Photons/s within a rectangular absorption window.
pub fn resonant_flux(density: f64, absorption_bandwidth: f64) -> Result<f64> {
    if !(density > 0.0) || !(absorption_bandwidth > 0.0) {
        return Err(Error::invalid(format!(
            "flux density and bandwidth must be > 0, got {density} and {absorption_bandwidth}"
        )));
    }
    Ok(density * absorption_bandwidth)
}

/// Photons/s weighted by the unit-peak line profile.
pub fn overlap_flux(spdc: &SpdcSourceConfig, line: &LineProfile, temperature_c: f64) -> f64 {
    let unit = line.normalized();
    let step = line.fwhm() / 200.0;
    let grid = MassGrid::new(&unit, step, 200.0 * line.fwhm());
    grid.convolve_at(0.0, |y| spdc.spectral_flux_density(-y * 1e-3, temperature_c))
}

/// Jump rate in events/s: flux times the five coupling factors.
pub fn predicted_jump_rate(flux: f64, factors: &CouplingFactors) -> Result<f64> {
    if !(flux > 0.0) {
        return Err(Error::invalid(format!("flux must be > 0, got {flux}")));
    }
    Ok(flux
        * factors.d32_population
        * factors.dipole_fraction
        * factors.branching_to_d52
        * factors.polarization_match
        * factors.geometric_overlap)
}

/// Signal jump rate (events/s, background excluded) induced by the unfiltered
/// arm at `temperature_c`.
pub fn unfiltered_signal_rate(
    spdc: &SpdcSourceConfig,
    line: &LineProfile,
    factors: &CouplingFactors,
    temperature_c: f64,
    flux_model: FluxModel,
) -> f64 {
    let flux = match flux_model {
        FluxModel::Rectangular => spdc.spectral_flux_density(0.0, temperature_c) * line.fwhm(),
        FluxModel::Overlap => overlap_flux(spdc, line, temperature_c),
    };
    if flux > 0.0 {
        predicted_jump_rate(flux, factors).expect("positive flux")
    } else {
        0.0
    }
}

fn check_grid(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::invalid("scan grid is empty"));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("scan grid must be strictly increasing"));
    }
    Ok(())
}

/// Jump rate (events/min) versus crystal temperature for the unfiltered arm.
/// `line` sets the absorption window: its FWHM is the rectangular window
/// width, or its full shape with [`FluxModel::Overlap`].
pub fn temperature_scan_model(
    spdc: &SpdcSourceConfig,
    line: &LineProfile,
    factors: &CouplingFactors,
    bg: &BackgroundRates,
    temperatures: &[f64],
) -> Result<ScanResult> {
    temperature_scan_model_with(spdc, line, factors, bg, temperatures, FluxModel::Rectangular)
}

pub fn temperature_scan_model_with(
    spdc: &SpdcSourceConfig,
    line: &LineProfile,
    factors: &CouplingFactors,
    bg: &BackgroundRates,
    temperatures: &[f64],
    flux_model: FluxModel,
) -> Result<ScanResult> {
    check_grid(temperatures)?;
    let rates = temperatures
        .iter()
        .map(|&t| bg.background_jump_rate + 60.0 * unfiltered_signal_rate(spdc, line, factors, t, flux_model))
        .collect();
    ScanResult::new(
        temperatures.to_vec(),
        rates,
        vec![0.0; temperatures.len()],
        ScanMeta::analytic(ScanKind::Temperature),
    )
}

/// Spectral shape of the filtered photons used in the frequency scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterLineModel {
    /// Lorentzian with the chain's measured FWHM.
    #[default]
    EffectiveLorentzian,
    /// Exact product of the cavity Lorentzians.
    CavityProduct,
}

impl std::str::FromStr for FilterLineModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "effective-lorentzian" => Ok(FilterLineModel::EffectiveLorentzian),
            "cavity-product" => Ok(FilterLineModel::CavityProduct),
            other => Err(Error::invalid(format!(
                "unknown filter line model '{other}' (expected effective-lorentzian or cavity-product)"
            ))),
        }
    }
}

impl FilterLineModel {
    /// Unit-peak filter spectrum centered at zero detuning.
    pub fn profile(self, chain: &FilterChainConfig) -> LineProfile {
        let centered = chain.with_offset(0.0);
        match self {
            FilterLineModel::EffectiveLorentzian => {
                LineProfile::lorentzian(0.0, centered.chain_fwhm(), 1.0).expect("validated chain")
            }
            FilterLineModel::CavityProduct => centered.sampled_transmission().normalized(),
        }
    }
}

/// Resonance of the filtered-arm jump rate as a function of filter detuning:
/// the filter spectrum convolved with the atomic line, normalized to
/// `peak_rate` (events/min) at zero detuning.
pub fn frequency_resonance(
    chain: &FilterChainConfig,
    line: &LineProfile,
    model: FilterLineModel,
) -> Result<LineProfile> {
    convolve_profiles(&model.profile(chain), line)
}

pub fn frequency_scan_model(
    chain: &FilterChainConfig,
    line: &LineProfile,
    peak_rate: f64,
    bg: &BackgroundRates,
    detunings: &[f64],
) -> Result<ScanResult> {
    frequency_scan_model_with(chain, line, peak_rate, bg, detunings, FilterLineModel::default())
}

pub fn frequency_scan_model_with(
    chain: &FilterChainConfig,
    line: &LineProfile,
    peak_rate: f64,
    bg: &BackgroundRates,
    detunings: &[f64],
    model: FilterLineModel,
) -> Result<ScanResult> {
    check_grid(detunings)?;
    if !(peak_rate >= 0.0) {
        return Err(Error::invalid(format!("peak rate must be >= 0, got {peak_rate}")));
    }
    let resonance = frequency_resonance(chain, line, model)?;
    let c0 = resonance.evaluate(0.0);
    let rates = detunings
        .iter()
        .map(|&d| bg.background_jump_rate + peak_rate * resonance.evaluate(d) / c0)
        .collect();
    ScanResult::new(
        detunings.to_vec(),
        rates,
        vec![0.0; detunings.len()],
        ScanMeta::analytic(ScanKind::Frequency),
    )
}

/// Default filtered-arm peak rate, events/min: the unfiltered on-peak signal
/// attenuated by the chain's peak transmission.
pub fn filtered_peak_rate(
    spdc: &SpdcSourceConfig,
    line: &LineProfile,
    factors: &CouplingFactors,
    chain: &FilterChainConfig,
) -> f64 {
    60.0 * unfiltered_signal_rate(spdc, line, factors, spdc.ref_temperature_c, FluxModel::Rectangular)
        * chain.peak_transmission
}
