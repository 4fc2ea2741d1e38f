//! Trace persistence: `bin_index,count` CSV plus a `.meta` sidecar.
//!
//! Floating-point values in the sidecar use Rust's shortest round-trip
//! decimal form, so a loaded trace is bit-identical to the saved one and a
//! re-save is byte-identical.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{CountTrace, FluorescenceState, Jump, TelegraphParams};
use crate::{Error, Result};

pub const TRACE_CSV_HEADER: &str = "bin_index,count";

const FORMAT_TAG: &str = "ionjump-trace-v1";

/// Sidecar fields that are not part of the trace itself.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TraceMeta {
    pub config_digest: String,
}

impl CountTrace {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = std::io::BufWriter::new(out);
        writeln!(out, "{TRACE_CSV_HEADER}")?;
        for (i, c) in self.counts.iter().enumerate() {
            writeln!(out, "{i},{c}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn meta_text(&self, meta: &TraceMeta) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "format={FORMAT_TAG}");
        let _ = writeln!(s, "config_digest={}", meta.config_digest);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "trial={}", self.trial);
        let _ = writeln!(s, "bin_width_s={}", self.bin_width);
        let _ = writeln!(s, "n_bins={}", self.counts.len());
        let _ = writeln!(s, "start_state={}", self.start_state);
        let _ = writeln!(s, "bright_to_dark_rate={}", p.bright_to_dark_rate);
        let _ = writeln!(s, "dark_to_bright_rate={}", p.dark_to_bright_rate);
        let _ = writeln!(s, "bright_count_rate={}", p.bright_count_rate);
        let _ = writeln!(s, "dark_count_rate={}", p.dark_count_rate);
        let times: Vec<String> = self.true_jumps.iter().map(|j| j.time.to_string()).collect();
        let _ = writeln!(s, "jump_times_s={}", times.join(","));
        s
    }

    /// Writes `path` and the sidecar `path` with extension `.meta`.
    pub fn save(&self, path: &Path, meta: &TraceMeta) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)?;
        std::fs::write(path.with_extension("meta"), self.meta_text(meta))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<(CountTrace, TraceMeta)> {
        let csv_name = path.display().to_string();
        let counts = read_counts(BufReader::new(std::fs::File::open(path)?), &csv_name)?;
        let meta_path = path.with_extension("meta");
        let meta_name = meta_path.display().to_string();
        let text = std::fs::read_to_string(&meta_path)?;
        let (mut trace, meta) = parse_meta(&text, &meta_name)?;
        if counts.len() != trace.counts.len() {
            return Err(Error::Parse {
                file: csv_name,
                line: 0,
                message: format!(
                    "{} bins in CSV but n_bins={} in metadata",
                    counts.len(),
                    trace.counts.len()
                ),
            });
        }
        trace.counts = counts;
        Ok((trace, meta))
    }
}

fn read_counts<R: BufRead>(reader: R, name: &str) -> Result<Vec<u32>> {
    let err = |line: usize, message: String| Error::Parse {
        file: name.to_string(),
        line,
        message,
    };
    let mut lines = reader.lines();
    match lines.next().transpose()? {
        Some(h) if h.trim() == TRACE_CSV_HEADER => {}
        Some(_) => return Err(err(1, format!("expected header '{TRACE_CSV_HEADER}'"))),
        None => return Err(err(1, "empty file".into())),
    }
    let mut counts = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let (idx, c) = line
            .split_once(',')
            .ok_or_else(|| err(lineno, "expected bin_index,count".into()))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| err(lineno, format!("bad bin index '{idx}'")))?;
        if idx != counts.len() {
            return Err(err(lineno, format!("bin index {idx} out of sequence")));
        }
        counts.push(
            c.trim()
                .parse()
                .map_err(|_| err(lineno, format!("bad count '{c}'")))?,
        );
    }
    Ok(counts)
}

fn parse_meta(text: &str, name: &str) -> Result<(CountTrace, TraceMeta)> {
    let mut fields = std::collections::HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            file: name.into(),
            line: i + 1,
            message: "expected key=value".into(),
        })?;
        fields.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
    }
    let get = |key: &str| -> Result<(usize, &str)> {
        fields
            .get(key)
            .map(|(l, v)| (*l, v.as_str()))
            .ok_or_else(|| Error::Parse {
                file: name.into(),
                line: 0,
                message: format!("missing key '{key}'"),
            })
    };
    fn num<T: std::str::FromStr>(name: &str, (line, v): (usize, &str)) -> Result<T> {
        v.parse().map_err(|_| Error::Parse {
            file: name.into(),
            line,
            message: format!("bad value '{v}'"),
        })
    }
    let (tag_line, tag) = get("format")?;
    if tag != FORMAT_TAG {
        return Err(Error::Parse {
            file: name.into(),
            line: tag_line,
            message: format!("unsupported format '{tag}'"),
        });
    }
    let params = TelegraphParams::new(
        num(name, get("bright_to_dark_rate")?)?,
        num(name, get("dark_to_bright_rate")?)?,
        num(name, get("bright_count_rate")?)?,
        num(name, get("dark_count_rate")?)?,
    )
    .map_err(|e| Error::Parse {
        file: name.into(),
        line: 0,
        message: e.to_string(),
    })?;
    let (state_line, state) = get("start_state")?;
    let start_state: FluorescenceState = state.parse().map_err(|e: Error| Error::Parse {
        file: name.into(),
        line: state_line,
        message: e.to_string(),
    })?;
    let (jl, jumps_text) = get("jump_times_s")?;
    let mut true_jumps = Vec::new();
    let mut state = start_state;
    for t in jumps_text.split(',').filter(|t| !t.is_empty()) {
        let time: f64 = num(name, (jl, t))?;
        true_jumps.push(Jump {
            time,
            direction: state.exit(),
        });
        state = state.flipped();
    }
    let n_bins: usize = num(name, get("n_bins")?)?;
    let trace = CountTrace {
        params,
        bin_width: num(name, get("bin_width_s")?)?,
        counts: vec![0; n_bins],
        start_state,
        seed: num(name, get("seed")?)?,
        trial: num(name, get("trial")?)?,
        true_jumps,
    };
    let meta = TraceMeta {
        config_digest: get("config_digest")?.1.to_string(),
    };
    Ok((trace, meta))
}
