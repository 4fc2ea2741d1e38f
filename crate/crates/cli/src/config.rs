//! Experiment configuration: flat INI-style sections of `key = value` lines.
//!
//! Every key has a default, so an empty file (or no file) is a valid
//! configuration. Unknown sections and keys are rejected. The resolved
//! configuration is rendered in a canonical form (`section.key=value`, fixed
//! key order, shortest round-trip numbers) whose SHA-256 is the config digest
//! written into every output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ionjump_core::atom::{absorption_profile, DarkStateParams};
use ionjump_core::interaction::{
    BackgroundRates, CouplingFactors, FilterLineModel, FluxModel,
};
use ionjump_core::spdc::{EnvelopeShape, FilterChainConfig, SpdcSourceConfig};
use ionjump_core::trajectory::FluorescenceState;
use ionjump_core::LineProfile;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// Finite float; `a/b` fractions accepted.
    Float,
    /// Float or empty (meaning "derive from the model").
    OptFloat,
    /// Comma-separated floats, possibly empty.
    FloatList,
    UInt,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    Any,
    Positive,
    NonNegative,
    /// In (0, 1].
    Fraction,
}

struct KeySpec {
    section: &'static str,
    key: &'static str,
    kind: Kind,
    bound: Bound,
    default: &'static str,
}

const fn spec(
    section: &'static str,
    key: &'static str,
    kind: Kind,
    bound: Bound,
    default: &'static str,
) -> KeySpec {
    KeySpec {
        section,
        key,
        kind,
        bound,
        default,
    }
}

use Bound::*;
use Kind::*;

/// All recognized keys, in canonical order.
const KEYS: &[KeySpec] = &[
    spec("atom", "natural_fwhm_mhz", Float, Positive, "25"),
    spec("atom", "zeeman_broadening_mhz", Float, NonNegative, "11"),
    spec("atom", "dark_dwell_s", Float, Positive, "1.2"),
    spec("spdc", "envelope_fwhm_ghz", Float, Positive, "200"),
    spec("spdc", "peak_flux_density", Float, Positive, "250"),
    spec("spdc", "temp_slope_ghz_per_c", Float, Any, "-59"),
    spec("spdc", "ref_temperature_c", Float, Any, "30"),
    spec("spdc", "envelope_shape", Text, Any, "gaussian"),
    spec("filter", "cavities", UInt, Positive, "2"),
    spec("filter", "chain_fwhm_mhz", Float, Positive, "22"),
    spec("filter", "cavity_fwhms_mhz", FloatList, Positive, ""),
    spec("filter", "peak_transmission", Float, Fraction, "0.5"),
    spec("filter", "detuning_offset_mhz", Float, Any, "0"),
    spec("filter", "line_model", Text, Any, "effective-lorentzian"),
    spec("coupling", "d32_population", Float, Fraction, "0.6"),
    spec("coupling", "dipole_fraction", Float, Fraction, "0.007"),
    spec("coupling", "branching_to_d52", Float, Fraction, "0.059"),
    spec("coupling", "polarization_match", Float, Fraction, "1/3"),
    spec("coupling", "geometric_overlap", Float, Fraction, "0.02"),
    spec("coupling", "flux_window_mhz", Float, Positive, "22"),
    spec("coupling", "flux_model", Text, Any, "rectangular"),
    spec("telegraph", "bin_width_s", Float, Positive, "0.002"),
    spec("telegraph", "bright_count_rate", Float, Positive, "20000"),
    spec("telegraph", "dark_count_rate", Float, NonNegative, "100"),
    spec("telegraph", "background_jump_rate_per_min", Float, NonNegative, "0.09"),
    spec("telegraph", "pump_rate_per_s", OptFloat, NonNegative, ""),
    spec("telegraph", "start_state", Text, Any, "bright"),
    spec("telegraph", "detect_threshold", OptFloat, Positive, ""),
    spec("telegraph", "detect_min_run", UInt, Positive, "2"),
    spec("scan", "temperature_min_c", OptFloat, Any, ""),
    spec("scan", "temperature_max_c", OptFloat, Any, ""),
    spec("scan", "temperature_points", UInt, Positive, "11"),
    spec("scan", "temperature_duration_s", Float, Positive, "3600"),
    spec("scan", "detuning_min_mhz", Float, Any, "-90"),
    spec("scan", "detuning_max_mhz", Float, Any, "90"),
    spec("scan", "detuning_points", UInt, Positive, "21"),
    spec("scan", "frequency_sub_measurements", UInt, Positive, "16"),
    spec("scan", "frequency_sub_duration_s", Float, Positive, "300"),
    spec("scan", "frequency_peak_rate_per_min", OptFloat, NonNegative, ""),
    spec("rng", "seed", UInt, Any, "1"),
];

/// Half-width of the default temperature grid around the reference
/// temperature, °C.
pub const DEFAULT_TEMPERATURE_HALF_RANGE: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AtomSection {
    pub natural_fwhm_mhz: f64,
    pub zeeman_broadening_mhz: f64,
    pub dark: DarkStateParams,
}

impl AtomSection {
    /// Absorption line of the D₃/₂ → P₃/₂ transition, unit peak at zero
    /// detuning.
    pub fn line(&self) -> LineProfile {
        absorption_profile(self.natural_fwhm_mhz, self.zeeman_broadening_mhz)
            .expect("validated widths")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterSection {
    pub chain: FilterChainConfig,
    pub line_model: FilterLineModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSection {
    pub factors: CouplingFactors,
    pub flux_window_mhz: f64,
    pub flux_model: FluxModel,
}

impl CouplingSection {
    /// Absorption window used for the unfiltered-arm flux.
    pub fn window(&self) -> LineProfile {
        LineProfile::lorentzian(0.0, self.flux_window_mhz, 1.0).expect("validated window")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelegraphSection {
    pub bin_width_s: f64,
    pub background: BackgroundRates,
    pub pump_rate_per_s: Option<f64>,
    pub start_state: FluorescenceState,
    pub detect_threshold: Option<f64>,
    pub detect_min_run: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSection {
    pub temperature_min_c: f64,
    pub temperature_max_c: f64,
    pub temperature_points: usize,
    pub temperature_duration_s: f64,
    pub detuning_min_mhz: f64,
    pub detuning_max_mhz: f64,
    pub detuning_points: usize,
    pub frequency_sub_measurements: usize,
    pub frequency_sub_duration_s: f64,
    pub frequency_peak_rate_per_min: Option<f64>,
}

impl ScanSection {
    pub fn temperatures(&self) -> Vec<f64> {
        grid(self.temperature_min_c, self.temperature_max_c, self.temperature_points)
    }

    pub fn detunings(&self) -> Vec<f64> {
        grid(self.detuning_min_mhz, self.detuning_max_mhz, self.detuning_points)
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub atom: AtomSection,
    pub spdc: SpdcSourceConfig,
    pub filter: FilterSection,
    pub coupling: CouplingSection,
    pub telegraph: TelegraphSection,
    pub scan: ScanSection,
    pub seed: u64,
    canonical: String,
    digest: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_str_with("", &[]).expect("defaults are valid")
    }
}

impl ExperimentConfig {
    /// Reads `path` (if given) and applies `section.key=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?,
            None => String::new(),
        };
        Self::from_str_with(&text, overrides)
    }

    pub fn from_str_with(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut raw = parse_ini(text)?;
        for o in overrides {
            let (name, value) = o
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("override '{o}' is not section.key=value")))?;
            let (section, key) = name.trim().split_once('.').ok_or_else(|| {
                CliError::Usage(format!("override '{o}' must name section.key"))
            })?;
            lookup(section, key)?;
            raw.insert((section.to_string(), key.to_string()), value.trim().to_string());
        }
        Self::resolve(&raw)
    }

    /// Canonical text: one `section.key=value` line per key.
    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    /// Hex SHA-256 of [`canonical`](Self::canonical).
    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// Resolved configuration as an INI file that reloads to the same digest.
    pub fn to_ini(&self) -> String {
        let mut out = format!("# config_digest={}\n", self.digest);
        let mut current = "";
        for line in self.canonical.lines() {
            let (name, value) = line.split_once('=').expect("canonical line");
            let (section, key) = name.split_once('.').expect("canonical name");
            if section != current {
                let _ = write!(out, "\n[{section}]\n");
                current = section;
            }
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    fn resolve(raw: &BTreeMap<(String, String), String>) -> Result<Self, CliError> {
        let mut values = Values::default();
        let mut canonical = String::new();
        for s in KEYS {
            let text = raw
                .get(&(s.section.to_string(), s.key.to_string()))
                .map(String::as_str)
                .unwrap_or(s.default);
            let value = parse_value(s, text)?;
            let _ = writeln!(canonical, "{}.{}={}", s.section, s.key, value.canonical());
            values.0.insert((s.section, s.key), value);
        }
        let digest = hex(&Sha256::digest(canonical.as_bytes()));
        values.build(canonical, digest)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Float(f64),
    OptFloat(Option<f64>),
    FloatList(Vec<f64>),
    UInt(u64),
    Text(String),
}

impl Value {
    fn canonical(&self) -> String {
        match self {
            Value::Float(x) => format!("{x}"),
            Value::OptFloat(Some(x)) => format!("{x}"),
            Value::OptFloat(None) => String::new(),
            Value::FloatList(v) => v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(","),
            Value::UInt(n) => n.to_string(),
            Value::Text(s) => s.clone(),
        }
    }
}

#[derive(Default)]
struct Values(BTreeMap<(&'static str, &'static str), Value>);

impl Values {
    fn f(&self, section: &'static str, key: &'static str) -> f64 {
        match &self.0[&(section, key)] {
            Value::Float(x) => *x,
            other => unreachable!("{section}.{key} is {other:?}"),
        }
    }

    fn opt(&self, section: &'static str, key: &'static str) -> Option<f64> {
        match &self.0[&(section, key)] {
            Value::OptFloat(x) => *x,
            other => unreachable!("{section}.{key} is {other:?}"),
        }
    }

    fn list(&self, section: &'static str, key: &'static str) -> Vec<f64> {
        match &self.0[&(section, key)] {
            Value::FloatList(v) => v.clone(),
            other => unreachable!("{section}.{key} is {other:?}"),
        }
    }

    fn n(&self, section: &'static str, key: &'static str) -> u64 {
        match &self.0[&(section, key)] {
            Value::UInt(n) => *n,
            other => unreachable!("{section}.{key} is {other:?}"),
        }
    }

    fn text(&self, section: &'static str, key: &'static str) -> &str {
        match &self.0[&(section, key)] {
            Value::Text(s) => s,
            other => unreachable!("{section}.{key} is {other:?}"),
        }
    }

    fn parsed<T>(&self, section: &'static str, key: &'static str) -> Result<T, CliError>
    where
        T: std::str::FromStr<Err = ionjump_core::Error>,
    {
        self.text(section, key)
            .parse()
            .map_err(|e: ionjump_core::Error| CliError::config(section, key, e.to_string()))
    }

    fn build(self, canonical: String, digest: String) -> Result<ExperimentConfig, CliError> {
        let in_section = |section: &'static str| {
            move |e: ionjump_core::Error| CliError::config(section, "", e.to_string())
        };

        let dark = DarkStateParams::new(self.f("atom", "dark_dwell_s"))
            .map_err(|e| CliError::config("atom", "dark_dwell_s", e.to_string()))?;
        let atom = AtomSection {
            natural_fwhm_mhz: self.f("atom", "natural_fwhm_mhz"),
            zeeman_broadening_mhz: self.f("atom", "zeeman_broadening_mhz"),
            dark,
        };

        let spdc = SpdcSourceConfig {
            envelope_fwhm_ghz: self.f("spdc", "envelope_fwhm_ghz"),
            peak_flux_density: self.f("spdc", "peak_flux_density"),
            temp_slope_ghz_per_c: self.f("spdc", "temp_slope_ghz_per_c"),
            ref_temperature_c: self.f("spdc", "ref_temperature_c"),
            envelope_shape: self.parsed::<EnvelopeShape>("spdc", "envelope_shape")?,
        };
        spdc.validate().map_err(in_section("spdc"))?;

        let explicit = self.list("filter", "cavity_fwhms_mhz");
        let peak_transmission = self.f("filter", "peak_transmission");
        let offset = self.f("filter", "detuning_offset_mhz");
        let chain = if explicit.is_empty() {
            FilterChainConfig::identical(
                self.n("filter", "cavities") as usize,
                self.f("filter", "chain_fwhm_mhz"),
                peak_transmission,
                offset,
            )
            .map_err(in_section("filter"))?
        } else {
            let chain = FilterChainConfig {
                cavity_fwhms_mhz: explicit,
                peak_transmission,
                detuning_offset_mhz: offset,
            };
            chain.validate().map_err(in_section("filter"))?;
            chain
        };
        let filter = FilterSection {
            chain,
            line_model: self.parsed("filter", "line_model")?,
        };

        let factors = CouplingFactors {
            d32_population: self.f("coupling", "d32_population"),
            dipole_fraction: self.f("coupling", "dipole_fraction"),
            branching_to_d52: self.f("coupling", "branching_to_d52"),
            polarization_match: self.f("coupling", "polarization_match"),
            geometric_overlap: self.f("coupling", "geometric_overlap"),
        };
        let coupling = CouplingSection {
            factors,
            flux_window_mhz: self.f("coupling", "flux_window_mhz"),
            flux_model: self.parsed("coupling", "flux_model")?,
        };

        let background = BackgroundRates {
            background_jump_rate: self.f("telegraph", "background_jump_rate_per_min"),
            bright_count_rate: self.f("telegraph", "bright_count_rate"),
            dark_count_rate: self.f("telegraph", "dark_count_rate"),
        };
        background.validate().map_err(in_section("telegraph"))?;
        let telegraph = TelegraphSection {
            bin_width_s: self.f("telegraph", "bin_width_s"),
            background,
            pump_rate_per_s: self.opt("telegraph", "pump_rate_per_s"),
            start_state: self.parsed("telegraph", "start_state")?,
            detect_threshold: self.opt("telegraph", "detect_threshold"),
            detect_min_run: self.n("telegraph", "detect_min_run") as usize,
        };

        let ref_t = spdc.ref_temperature_c;
        let scan = ScanSection {
            temperature_min_c: self
                .opt("scan", "temperature_min_c")
                .unwrap_or(ref_t - DEFAULT_TEMPERATURE_HALF_RANGE),
            temperature_max_c: self
                .opt("scan", "temperature_max_c")
                .unwrap_or(ref_t + DEFAULT_TEMPERATURE_HALF_RANGE),
            temperature_points: self.n("scan", "temperature_points") as usize,
            temperature_duration_s: self.f("scan", "temperature_duration_s"),
            detuning_min_mhz: self.f("scan", "detuning_min_mhz"),
            detuning_max_mhz: self.f("scan", "detuning_max_mhz"),
            detuning_points: self.n("scan", "detuning_points") as usize,
            frequency_sub_measurements: self.n("scan", "frequency_sub_measurements") as usize,
            frequency_sub_duration_s: self.f("scan", "frequency_sub_duration_s"),
            frequency_peak_rate_per_min: self.opt("scan", "frequency_peak_rate_per_min"),
        };
        check_range(
            "temperature_min_c",
            scan.temperature_min_c,
            scan.temperature_max_c,
            scan.temperature_points,
        )?;
        check_range(
            "detuning_min_mhz",
            scan.detuning_min_mhz,
            scan.detuning_max_mhz,
            scan.detuning_points,
        )?;

        Ok(ExperimentConfig {
            atom,
            spdc,
            filter,
            coupling,
            telegraph,
            scan,
            seed: self.n("rng", "seed"),
            canonical,
            digest,
        })
    }
}

fn check_range(key: &'static str, lo: f64, hi: f64, points: usize) -> Result<(), CliError> {
    if points > 1 && !(hi > lo) {
        return Err(CliError::config(
            "scan",
            key,
            format!("range [{lo}, {hi}] must be increasing for {points} points"),
        ));
    }
    Ok(())
}

fn lookup(section: &str, key: &str) -> Result<&'static KeySpec, CliError> {
    if !KEYS.iter().any(|s| s.section == section) {
        return Err(CliError::Config {
            section: section.to_string(),
            key: key.to_string(),
            message: "unknown section".into(),
        });
    }
    KEYS.iter()
        .find(|s| s.section == section && s.key == key)
        .ok_or_else(|| CliError::Config {
            section: section.to_string(),
            key: key.to_string(),
            message: "unknown key".into(),
        })
}

fn parse_ini(text: &str) -> Result<BTreeMap<(String, String), String>, CliError> {
    let mut out = BTreeMap::new();
    let mut section: Option<String> = None;
    for (i, line) in text.lines().enumerate() {
        let line = match line.find(['#', ';']) {
            Some(c) => &line[..c],
            None => line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            lookup_section(name, i + 1)?;
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key = value, got '{line}'", i + 1))
        })?;
        let section = section.as_deref().ok_or_else(|| {
            CliError::Usage(format!("config line {}: key outside of any [section]", i + 1))
        })?;
        let key = key.trim();
        lookup(section, key)?;
        if out
            .insert((section.to_string(), key.to_string()), value.trim().to_string())
            .is_some()
        {
            return Err(CliError::config(section, key, "given more than once"));
        }
    }
    Ok(out)
}

fn lookup_section(name: &str, line: usize) -> Result<(), CliError> {
    if KEYS.iter().any(|s| s.section == name) {
        Ok(())
    } else {
        Err(CliError::Config {
            section: name.to_string(),
            key: String::new(),
            message: format!("unknown section on line {line}"),
        })
    }
}

fn parse_value(s: &KeySpec, text: &str) -> Result<Value, CliError> {
    let err = |m: String| CliError::config(s.section, s.key, m);
    let value = match s.kind {
        Kind::Float => Value::Float(parse_float(text).map_err(err)?),
        Kind::OptFloat if text.is_empty() => Value::OptFloat(None),
        Kind::OptFloat => Value::OptFloat(Some(parse_float(text).map_err(err)?)),
        Kind::FloatList if text.is_empty() => Value::FloatList(Vec::new()),
        Kind::FloatList => Value::FloatList(
            text.split(',')
                .map(|t| parse_float(t.trim()))
                .collect::<Result<_, _>>()
                .map_err(err)?,
        ),
        Kind::UInt => Value::UInt(
            text.parse()
                .map_err(|_| err(format!("expected a non-negative integer, got '{text}'")))?,
        ),
        Kind::Text => Value::Text(text.to_string()),
    };
    let floats: Vec<f64> = match &value {
        Value::Float(x) | Value::OptFloat(Some(x)) => vec![*x],
        Value::FloatList(v) => v.clone(),
        Value::UInt(n) => vec![*n as f64],
        _ => Vec::new(),
    };
    for x in floats {
        let ok = match s.bound {
            Bound::Any => true,
            Bound::Positive => x > 0.0,
            Bound::NonNegative => x >= 0.0,
            Bound::Fraction => x > 0.0 && x <= 1.0,
        };
        if !ok {
            let want = match s.bound {
                Bound::Any => unreachable!(),
                Bound::Positive => "> 0",
                Bound::NonNegative => ">= 0",
                Bound::Fraction => "in (0, 1]",
            };
            return Err(err(format!("must be {want}, got {x}")));
        }
    }
    Ok(value)
}

/// Finite float, or a fraction `a/b` of two finite floats.
fn parse_float(text: &str) -> Result<f64, String> {
    let one = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("expected a number, got '{text}'"))
    };
    match text.split_once('/') {
        Some((a, b)) => {
            let d = one(b)?;
            if d == 0.0 {
                return Err(format!("division by zero in '{text}'"));
            }
            Ok(one(a)? / d)
        }
        None => one(text),
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let c = ExperimentConfig::default();
        assert_eq!(c.coupling.factors, CouplingFactors::default());
        assert_eq!(c.filter.chain, FilterChainConfig::default());
        assert_eq!(c.scan.temperatures().len(), 11);
        assert_eq!(c.scan.temperatures()[0], 24.0);
        assert_eq!(c.seed, 1);
        assert_eq!(c.digest().len(), 64);
    }

    #[test]
    fn equivalent_spellings_share_a_digest() {
        let a = ExperimentConfig::from_str_with("[coupling]\npolarization_match = 1/3\n", &[]).unwrap();
        let b = ExperimentConfig::from_str_with(
            "[coupling]\npolarization_match=0.3333333333333333 # same\n",
            &[],
        )
        .unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.digest(), ExperimentConfig::default().digest());
    }

    #[test]
    fn any_change_changes_the_digest() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig::from_str_with("", &["rng.seed=2".into()]).unwrap();
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        let e = ExperimentConfig::from_str_with("[spdc]\nbandwith = 3\n", &[]).unwrap_err();
        assert!(e.to_string().contains("spdc.bandwith"), "{e}");
        let e = ExperimentConfig::from_str_with("[laser]\n", &[]).unwrap_err();
        assert!(e.to_string().contains("laser"), "{e}");
        assert!(ExperimentConfig::from_str_with("", &["atom.nope=1".into()]).is_err());
    }

    #[test]
    fn invalid_values_name_the_key() {
        let e = ExperimentConfig::from_str_with("[spdc]\nenvelope_fwhm_ghz = -5\n", &[]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("spdc.envelope_fwhm_ghz"), "{e}");
        let e = ExperimentConfig::from_str_with("", &["coupling.dipole_fraction=2".into()]).unwrap_err();
        assert!(e.to_string().contains("coupling.dipole_fraction"), "{e}");
    }

    #[test]
    fn resolved_ini_round_trips() {
        let c = ExperimentConfig::from_str_with(
            "",
            &["filter.cavity_fwhms_mhz=30, 40".into(), "scan.temperature_min_c=20".into()],
        )
        .unwrap();
        let again = ExperimentConfig::from_str_with(&c.to_ini(), &[]).unwrap();
        assert_eq!(again.digest(), c.digest());
        assert_eq!(again.filter.chain.cavity_fwhms_mhz, vec![30.0, 40.0]);
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        assert!(ExperimentConfig::from_str_with("[rng]\nseed=1\nseed=2\n", &[]).is_err());
    }
}
