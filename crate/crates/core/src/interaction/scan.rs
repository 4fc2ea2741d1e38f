//! Scan results and their CSV / metadata persistence.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use crate::format::sig6;
use crate::{Error, Result};

pub const SCAN_CSV_HEADER: &str = "x,rate_per_min,err_per_min";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    /// x in °C.
    Temperature,
    /// x in MHz.
    Frequency,
}

impl ScanKind {
    pub fn name(self) -> &'static str {
        match self {
            ScanKind::Temperature => "temperature",
            ScanKind::Frequency => "frequency",
        }
    }
}

impl fmt::Display for ScanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScanKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "temperature" => Ok(ScanKind::Temperature),
            "frequency" => Ok(ScanKind::Frequency),
            other => Err(Error::invalid(format!("unknown scan kind '{other}'"))),
        }
    }
}

/// How the per-point error bars were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorRule {
    /// Analytic model, no error.
    None,
    /// √n of the counted events.
    PoissonSqrt,
    /// Standard deviation of the mean of repeated sub-measurements.
    Sem,
}

impl ErrorRule {
    pub fn name(self) -> &'static str {
        match self {
            ErrorRule::None => "none",
            ErrorRule::PoissonSqrt => "poisson-sqrt",
            ErrorRule::Sem => "sem",
        }
    }
}

impl FromStr for ErrorRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ErrorRule::None),
            "poisson-sqrt" => Ok(ErrorRule::PoissonSqrt),
            "sem" => Ok(ErrorRule::Sem),
            other => Err(Error::invalid(format!("unknown error rule '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanMeta {
    pub kind: ScanKind,
    pub error_rule: ErrorRule,
    pub config_digest: String,
    pub seed: Option<u64>,
}

impl ScanMeta {
    pub fn analytic(kind: ScanKind) -> Self {
        Self {
            kind,
            error_rule: ErrorRule::None,
            config_digest: String::new(),
            seed: None,
        }
    }
}

/// Jump rate versus scan coordinate, events/min.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    x: Vec<f64>,
    rates: Vec<f64>,
    errors: Vec<f64>,
    pub meta: ScanMeta,
}

impl ScanResult {
    pub fn new(x: Vec<f64>, rates: Vec<f64>, errors: Vec<f64>, meta: ScanMeta) -> Result<Self> {
        if x.len() != rates.len() || x.len() != errors.len() {
            return Err(Error::invalid(format!(
                "scan columns differ in length: {} x, {} rates, {} errors",
                x.len(),
                rates.len(),
                errors.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::invalid("scan has no points"));
        }
        check_increasing(&x)?;
        if let Some(r) = rates.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::invalid(format!("scan rate must be >= 0, got {r}")));
        }
        if let Some(e) = errors.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
            return Err(Error::invalid(format!("scan error must be >= 0, got {e}")));
        }
        Ok(Self {
            x,
            rates,
            errors,
            meta,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{SCAN_CSV_HEADER}")?;
        for i in 0..self.x.len() {
            writeln!(
                out,
                "{},{},{}",
                sig6(self.x[i]),
                sig6(self.rates[i]),
                sig6(self.errors[i])
            )?;
        }
        Ok(())
    }

    pub fn write_meta<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "format=ionjump-scan-v1")?;
        writeln!(out, "kind={}", self.meta.kind)?;
        writeln!(out, "error_rule={}", self.meta.error_rule.name())?;
        writeln!(out, "config_digest={}", self.meta.config_digest)?;
        match self.meta.seed {
            Some(s) => writeln!(out, "seed={s}")?,
            None => writeln!(out, "seed=none")?,
        }
        writeln!(out, "points={}", self.x.len())?;
        Ok(())
    }

    /// Writes `path` and its `.meta` sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut csv = Vec::new();
        self.write_csv(&mut csv)?;
        std::fs::write(path, csv)?;
        let mut meta = Vec::new();
        self.write_meta(&mut meta)?;
        std::fs::write(path.with_extension("meta"), meta)?;
        Ok(())
    }

    /// Reads a scan CSV. The `.meta` sidecar is used when present; without it
    /// the kind defaults to `fallback_kind` and the error rule is inferred.
    pub fn load(path: &Path, fallback_kind: ScanKind) -> Result<Self> {
        let name = path.display().to_string();
        let file = std::fs::File::open(path)?;
        let (x, rates, errors) = parse_scan_csv(std::io::BufReader::new(file), &name)?;
        let meta_path = path.with_extension("meta");
        let meta = if meta_path.exists() {
            let text = std::fs::read_to_string(&meta_path)?;
            parse_scan_meta(&text, &meta_path.display().to_string())?
        } else {
            let rule = if errors.iter().all(|&e| e == 0.0) {
                ErrorRule::None
            } else {
                ErrorRule::PoissonSqrt
            };
            ScanMeta {
                kind: fallback_kind,
                error_rule: rule,
                config_digest: String::new(),
                seed: None,
            }
        };
        ScanResult::new(x, rates, errors, meta).map_err(|e| Error::Parse {
            file: name,
            line: 0,
            message: e.to_string(),
        })
    }
}

fn check_increasing(x: &[f64]) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("scan coordinates must be finite"));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("scan coordinates must be strictly increasing"));
    }
    Ok(())
}

type Columns = (Vec<f64>, Vec<f64>, Vec<f64>);

pub fn parse_scan_csv<R: BufRead>(reader: R, name: &str) -> Result<Columns> {
    let err = |line: usize, message: String| Error::Parse {
        file: name.to_string(),
        line,
        message,
    };
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h.trim() == SCAN_CSV_HEADER => {}
        Some((_, Ok(h))) => return Err(err(1, format!("expected header '{SCAN_CSV_HEADER}', got '{h}'"))),
        Some((_, Err(e))) => return Err(e.into()),
        None => return Err(err(1, "empty file".into())),
    }
    let (mut x, mut r, mut e) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(err(i + 1, format!("expected 3 fields, got {}", fields.len())));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| err(i + 1, format!("not a number: '{s}'")))
        };
        x.push(parse(fields[0])?);
        r.push(parse(fields[1])?);
        e.push(parse(fields[2])?);
    }
    Ok((x, r, e))
}

fn parse_scan_meta(text: &str, name: &str) -> Result<ScanMeta> {
    let mut kind = None;
    let mut rule = ErrorRule::None;
    let mut digest = String::new();
    let mut seed = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            file: name.into(),
            line: i + 1,
            message: "expected key=value".into(),
        })?;
        let wrap = |e: Error| Error::Parse {
            file: name.into(),
            line: i + 1,
            message: e.to_string(),
        };
        match k {
            "kind" => kind = Some(v.parse().map_err(wrap)?),
            "error_rule" => rule = v.parse().map_err(wrap)?,
            "config_digest" => digest = v.to_string(),
            "seed" if v != "none" => {
                seed = Some(v.parse().map_err(|_| Error::Parse {
                    file: name.into(),
                    line: i + 1,
                    message: format!("bad seed '{v}'"),
                })?)
            }
            _ => {}
        }
    }
    Ok(ScanMeta {
        kind: kind.ok_or_else(|| Error::Parse {
            file: name.into(),
            line: 0,
            message: "missing kind".into(),
        })?,
        error_rule: rule,
        config_digest: digest,
        seed,
    })
}
