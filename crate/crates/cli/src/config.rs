//! Experiment configuration: a TOML file with one level of tables, overlaid
//! by command-line flags.
//!
//! ```toml
//! seed = 7
//! trials = 2000
//! slots = 100
//! mode = "musca"
//! dist = "1:0.1,2:0.3,3:0.6"
//! snr_db = 8.0               # number, list, or "start:stop:step"
//! g = "0.5:1.8:0.05"
//! per_tables = ["builtin:extended", "extra.csv"]
//! out = "result.csv"
//!
//! [decoder]
//! signalling_max_interferers = 1
//! retry = "on-improvement"   # or "never"
//! erasure_threshold = 2
//!
//! [optimize]
//! degrees = [1, 2, 3]
//! step = 0.1
//!
//! [stop]
//! rel_half_width = 0.1
//! batch = 1000
//! ```
//!
//! Relative paths in a file are taken relative to the file's directory.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use musca::decoder::RetryRule;
use musca::montecarlo::StopRule;
use musca::per::{
    anchor_points, load_per_table_with_threshold, PerTable, DEFAULT_ERASURE_THRESHOLD,
    EXTENDED_TABLE_CSV,
};
use musca::{CodeId, DecodePolicy, DegreeDistribution, Mode};

/// Problem with the configuration; the process exits with status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

macro_rules! bail {
    ($($t:tt)*) => { return Err(ConfigError(format!($($t)*))) };
}

/// A grid of values: a single number, a list, or `"start:stop:step"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    One(f64),
    List(Vec<f64>),
    Text(String),
}

impl GridValue {
    pub fn values(&self, what: &str) -> Result<Vec<f64>, ConfigError> {
        let v = match self {
            GridValue::One(x) => vec![*x],
            GridValue::List(v) => v.clone(),
            GridValue::Text(s) => parse_grid(s, what)?,
        };
        if v.is_empty() {
            bail!("{what} grid is empty");
        }
        if let Some(x) = v.iter().find(|x| !x.is_finite()) {
            bail!("{what} value {x} is not finite");
        }
        Ok(v)
    }
}

/// Parses `"a,b,c"` or `"start:stop:step"` (inclusive of `stop` up to
/// rounding).
pub fn parse_grid(s: &str, what: &str) -> Result<Vec<f64>, ConfigError> {
    let s = s.trim();
    if s.is_empty() {
        bail!("{what} grid is empty");
    }
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| ConfigError(format!("{what}: cannot parse {t:?} as a number")))
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            bail!("{what}: range must look like start:stop:step, got {s:?}");
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || stop < start {
            bail!("{what}: range {s:?} needs step > 0 and stop >= start");
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        if n > 100_000 {
            bail!("{what}: range {s:?} has too many points");
        }
        // round away accumulated binary noise so 0.1:1.6:0.1 prints as typed
        Ok((0..=n)
            .map(|i| {
                let x = start + step * i as f64;
                (x * 1e9).round() / 1e9
            })
            .collect())
    } else {
        s.split(',').map(num).collect()
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecoderSection {
    signalling_max_interferers: Option<u32>,
    retry: Option<String>,
    erasure_threshold: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizeSection {
    degrees: Option<Vec<u32>>,
    step: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StopSection {
    rel_half_width: f64,
    batch: u64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    trials: Option<u64>,
    slots: Option<usize>,
    mode: Option<String>,
    dist: Option<String>,
    snr_db: Option<GridValue>,
    g: Option<GridValue>,
    per_tables: Option<Vec<String>>,
    out: Option<PathBuf>,
    #[serde(default)]
    decoder: DecoderSection,
    #[serde(default)]
    optimize: OptimizeSection,
    stop: Option<StopSection>,
}

/// Values given on the command line; `None` falls back to the file, then
/// to the subcommand default.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub slots: Option<usize>,
    pub mode: Option<String>,
    pub dist: Option<String>,
    pub snr: Option<String>,
    pub g: Option<String>,
    pub per_tables: Vec<String>,
    pub out: Option<PathBuf>,
    pub degrees: Option<String>,
    pub step: Option<f64>,
}

/// Defaults that differ between subcommands.
#[derive(Debug, Clone)]
pub struct Defaults {
    pub trials: u64,
    pub snr: &'static str,
    pub g: &'static str,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: u64,
    pub slots: usize,
    pub dist: DegreeDistribution,
    pub policy: DecodePolicy,
    pub snr_db: Vec<f64>,
    pub g: Vec<f64>,
    pub table: PerTable,
    pub out: Option<PathBuf>,
    pub degrees: Vec<u32>,
    pub step: f64,
    pub stop: Option<StopRule>,
}

pub const CODES: [&str; 4] = ["rm_14_64", "turbo_r12", "turbo_r14", "turbo_r16"];

fn default_dist(mode: Mode) -> &'static str {
    match mode {
        Mode::Musca => "1:0.1,2:0.3,3:0.6",
        Mode::Crdsa => "2:1",
        Mode::Irsa => "2:0.5,3:0.5",
        Mode::Sa => "1:1",
    }
}

impl ExperimentConfig {
    pub fn resolve(o: &Overrides, d: &Defaults) -> Result<Self, ConfigError> {
        let (file, base) = match &o.config {
            Some(path) => (read_file(path)?, path.parent().map(Path::to_path_buf)),
            None => (ConfigFile::default(), None),
        };
        let rebase = |p: &Path| match &base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        };

        let seed = o.seed.or(file.seed).unwrap_or(0);
        let trials = o.trials.or(file.trials).unwrap_or(d.trials);
        if trials == 0 {
            bail!("trials must be at least 1");
        }
        let slots = o.slots.or(file.slots).unwrap_or(100);
        if slots == 0 {
            bail!("slots must be at least 1");
        }

        let mode: Mode = match o.mode.as_deref().or(file.mode.as_deref()) {
            Some(m) => m.parse().map_err(ConfigError)?,
            None => Mode::Musca,
        };
        let dist_text = o
            .dist
            .clone()
            .or(file.dist.clone())
            .unwrap_or_else(|| default_dist(mode).to_string());
        let dist: DegreeDistribution = dist_text
            .parse()
            .map_err(|e| ConfigError(format!("degree distribution {dist_text:?}: {e}")))?;
        if dist.max_degree() as usize > slots {
            bail!("degree {} does not fit in {slots} slots", dist.max_degree());
        }
        if mode == Mode::Sa && dist.max_degree() > 1 {
            bail!("mode sa needs every user to have degree 1, got {dist}");
        }

        let mut policy = DecodePolicy::with_mode(mode);
        if let Some(k) = file.decoder.signalling_max_interferers {
            policy.signalling_max_interferers = k;
        }
        if let Some(r) = &file.decoder.retry {
            policy.retry = r.parse::<RetryRule>().map_err(ConfigError)?;
        }
        let threshold = file
            .decoder
            .erasure_threshold
            .unwrap_or(DEFAULT_ERASURE_THRESHOLD);

        let snr_db = match (&o.snr, &file.snr_db) {
            (Some(s), _) => parse_grid(s, "snr")?,
            (None, Some(v)) => v.values("snr")?,
            (None, None) => parse_grid(d.snr, "snr")?,
        };
        let g = match (&o.g, &file.g) {
            (Some(s), _) => parse_grid(s, "g")?,
            (None, Some(v)) => v.values("g")?,
            (None, None) => parse_grid(d.g, "g")?,
        };
        if let Some(x) = g.iter().find(|&&x| x < 0.0) {
            bail!("load g = {x} is negative");
        }

        let specs: Vec<(String, bool)> = if !o.per_tables.is_empty() {
            o.per_tables.iter().map(|s| (s.clone(), false)).collect()
        } else if let Some(list) = &file.per_tables {
            list.iter().map(|s| (s.clone(), true)).collect()
        } else if mode == Mode::Musca {
            vec![("builtin:extended".into(), false)]
        } else {
            vec![("builtin:collision".into(), false)]
        };
        let mut table: Option<PerTable> = None;
        for (spec, from_file) in &specs {
            let t = if spec.starts_with("builtin:") {
                builtin_table(spec, threshold)?
            } else {
                let path = if *from_file {
                    rebase(Path::new(spec))
                } else {
                    PathBuf::from(spec)
                };
                if !path.is_file() {
                    bail!("PER table {} does not exist", path.display());
                }
                load_per_table_with_threshold(&path, threshold)
                    .map_err(|e| ConfigError(format!("PER table {}: {e}", path.display())))?
            };
            match &mut table {
                None => table = Some(t),
                Some(acc) => acc
                    .merge(&t)
                    .map_err(|e| ConfigError(format!("merging PER table {spec}: {e}")))?,
            }
        }
        let table = table.expect("at least one table spec");

        let degrees = match (&o.degrees, &file.optimize.degrees) {
            (Some(s), _) => parse_degrees(s)?,
            (None, Some(v)) => v.clone(),
            (None, None) => vec![1, 2, 3],
        };
        let step = o.step.or(file.optimize.step).unwrap_or(0.1);

        let stop = match file.stop {
            Some(s) => {
                if !(s.rel_half_width > 0.0) || s.batch == 0 {
                    bail!("stop rule needs rel_half_width > 0 and batch >= 1");
                }
                Some(StopRule {
                    rel_half_width: s.rel_half_width,
                    batch: s.batch,
                })
            }
            None => None,
        };

        let out = o.out.clone().or(file.out.as_deref().map(rebase));

        Ok(Self {
            seed,
            trials,
            slots,
            dist,
            policy,
            snr_db,
            g,
            table,
            out,
            degrees,
            step,
            stop,
        })
    }
}

fn read_file(path: &Path) -> Result<ConfigFile, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| ConfigError(format!("config {}: {e}", path.display())))
}

fn parse_degrees(s: &str) -> Result<Vec<u32>, ConfigError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .ok()
                .filter(|&d| d >= 1)
                .ok_or_else(|| ConfigError(format!("bad degree {t:?}")))
        })
        .collect()
}

/// `builtin:anchors`, `builtin:extended`, `builtin:collision` or
/// `builtin:ideal`.
pub fn builtin_table(spec: &str, threshold: u32) -> Result<PerTable, ConfigError> {
    let codes: Vec<CodeId> = CODES.iter().map(|&c| CodeId::new(c)).collect();
    Ok(match spec {
        "builtin:anchors" => {
            let mut t = PerTable::new(threshold);
            for (code, snr, config, per) in anchor_points() {
                t.insert(&code, snr, &config, per)
                    .map_err(|e| ConfigError(e.to_string()))?;
            }
            t
        }
        "builtin:extended" => PerTable::parse(EXTENDED_TABLE_CSV, threshold)
            .map_err(|e| ConfigError(e.to_string()))?,
        "builtin:collision" => PerTable::collision_channel(&codes),
        "builtin:ideal" => PerTable::ideal(&codes),
        other => bail!(
            "unknown table {other:?} (expected builtin:anchors, builtin:extended, builtin:collision or builtin:ideal)"
        ),
    })
}
