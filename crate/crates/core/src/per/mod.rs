//! Packet error rate model: probability that decoding a field fails given
//! its code, the SNR and the interference configuration across its bursts.
//!
//! Tables are keyed by `(code, config)` and hold a PER curve over SNR.
//! Lookups apply the erasure rule first (counts above the threshold become
//! [`InterferenceConfig::ERASED`]), then interpolate `log10(PER)` linearly in
//! SNR (dB), clamping outside the stored range. A configuration without a
//! curve falls back to the nearest stored configuration that dominates it
//! componentwise, or PER = 1 if there is none.

pub mod link;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::frame::{CodeId, InterferenceConfig, SIGNALLING_CODE};

pub const DEFAULT_ERASURE_THRESHOLD: u32 = 2;

/// Committed anchor-extended table (see [`link::extended_table`]).
pub const EXTENDED_TABLE_CSV: &str = include_str!("../../../../data/per_anchor_extended.csv");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerError {
    #[error("unknown code id {0:?}")]
    UnknownCode(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: PER {per} is outside [0, 1]")]
    Range { line: usize, per: f64 },
    #[error("line {line}: duplicate entry for {code} {config} at {snr_db} dB (first at line {first})")]
    Duplicate {
        line: usize,
        first: usize,
        code: String,
        config: String,
        snr_db: f64,
    },
    #[error("line {line}: PER of {code} {config} increases with SNR ({lower} dB -> {higher} dB)")]
    SnrMonotonicity {
        line: usize,
        code: String,
        config: String,
        lower: f64,
        higher: f64,
    },
    #[error("line {line}: PER of {code} {config} at {snr_db} dB is below that of the dominated {dominated} (line {other})")]
    ConfigMonotonicity {
        line: usize,
        other: usize,
        code: String,
        config: String,
        dominated: String,
        snr_db: f64,
    },
    #[error("code {0:?} is defined twice with incompatible models")]
    CodeConflict(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    snr_db: f64,
    per: f64,
    line: usize,
}

/// PER over SNR for one `(code, config)`, sorted by SNR.
#[derive(Debug, Clone, PartialEq, Default)]
struct Curve {
    points: Vec<Point>,
}

impl Curve {
    fn find(&self, snr_db: f64) -> Result<usize, usize> {
        self.points
            .binary_search_by(|p| p.snr_db.total_cmp(&snr_db))
    }

    fn eval(&self, snr_db: f64) -> f64 {
        let pts = &self.points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if snr_db <= first.snr_db || snr_db.is_nan() {
            return first.per;
        }
        if snr_db >= last.snr_db {
            return last.per;
        }
        let hi = pts.partition_point(|p| p.snr_db <= snr_db);
        let a = pts[hi - 1];
        if a.snr_db == snr_db {
            return a.per;
        }
        let b = pts[hi];
        let t = (snr_db - a.snr_db) / (b.snr_db - a.snr_db);
        let v = if a.per > 0.0 && b.per > 0.0 {
            let (la, lb) = (a.per.log10(), b.per.log10());
            10f64.powf(la + t * (lb - la))
        } else {
            a.per + t * (b.per - a.per)
        };
        v.clamp(a.per.min(b.per), a.per.max(b.per))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum CodeModel {
    Tabulated(BTreeMap<InterferenceConfig, Curve>),
    /// Success iff every burst is clean.
    Collision,
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq)]
struct CodeEntry {
    id: CodeId,
    model: CodeModel,
}

/// Decode-failure probabilities for a set of codes.
#[derive(Debug, Clone, PartialEq)]
pub struct PerTable {
    codes: Vec<CodeEntry>,
    index: HashMap<CodeId, usize>,
    erasure_threshold: u32,
}

impl Default for PerTable {
    fn default() -> Self {
        Self::new(DEFAULT_ERASURE_THRESHOLD)
    }
}

impl PerTable {
    pub fn new(erasure_threshold: u32) -> Self {
        Self {
            codes: Vec::new(),
            index: HashMap::new(),
            erasure_threshold,
        }
    }

    pub fn erasure_threshold(&self) -> u32 {
        self.erasure_threshold
    }

    pub fn code_ids(&self) -> impl Iterator<Item = &CodeId> {
        self.codes.iter().map(|c| &c.id)
    }

    pub fn code_index(&self, code: &CodeId) -> Result<usize, PerError> {
        self.index
            .get(code)
            .copied()
            .ok_or_else(|| PerError::UnknownCode(code.0.clone()))
    }

    fn entry_mut(&mut self, code: &CodeId, model: impl FnOnce() -> CodeModel) -> &mut CodeEntry {
        let idx = match self.index.get(code) {
            Some(&i) => i,
            None => {
                self.codes.push(CodeEntry {
                    id: code.clone(),
                    model: model(),
                });
                self.index.insert(code.clone(), self.codes.len() - 1);
                self.codes.len() - 1
            }
        };
        &mut self.codes[idx]
    }

    /// Stores one point. The configuration is canonicalized with the erasure
    /// rule before it is used as a key.
    pub fn insert(
        &mut self,
        code: &CodeId,
        snr_db: f64,
        config: &InterferenceConfig,
        per: f64,
    ) -> Result<(), PerError> {
        self.insert_at_line(code, snr_db, config, per, 0)
    }

    fn insert_at_line(
        &mut self,
        code: &CodeId,
        snr_db: f64,
        config: &InterferenceConfig,
        per: f64,
        line: usize,
    ) -> Result<(), PerError> {
        if !(0.0..=1.0).contains(&per) {
            return Err(PerError::Range { line, per });
        }
        if !snr_db.is_finite() {
            return Err(PerError::Parse {
                line,
                msg: format!("SNR {snr_db} is not finite"),
            });
        }
        let key = config.erased(self.erasure_threshold);
        let entry = self.entry_mut(code, || CodeModel::Tabulated(BTreeMap::new()));
        let CodeModel::Tabulated(curves) = &mut entry.model else {
            return Err(PerError::CodeConflict(code.0.clone()));
        };
        let curve = curves.entry(key.clone()).or_default();
        match curve.find(snr_db) {
            Ok(i) => Err(PerError::Duplicate {
                line,
                first: curve.points[i].line,
                code: code.0.clone(),
                config: key.to_string(),
                snr_db,
            }),
            Err(i) => {
                curve.points.insert(i, Point { snr_db, per, line });
                Ok(())
            }
        }
    }

    /// Pure collision channel for the given codes: PER 0 on all-clean
    /// configurations, 1 otherwise.
    pub fn collision_channel<'a>(codes: impl IntoIterator<Item = &'a CodeId>) -> Self {
        let mut t = Self::default();
        for c in codes {
            t.entry_mut(c, || CodeModel::Collision);
        }
        t
    }

    /// PER 0 everywhere for the given codes.
    pub fn ideal<'a>(codes: impl IntoIterator<Item = &'a CodeId>) -> Self {
        Self::constant(codes, 0.0)
    }

    pub fn constant<'a>(codes: impl IntoIterator<Item = &'a CodeId>, per: f64) -> Self {
        let mut t = Self::default();
        for c in codes {
            t.entry_mut(c, || CodeModel::Constant(per.clamp(0.0, 1.0)));
        }
        t
    }

    /// Adds every code of `other`. Tabulated codes present in both are
    /// merged point by point; duplicate points are an error.
    pub fn merge(&mut self, other: &PerTable) -> Result<(), PerError> {
        for entry in &other.codes {
            match &entry.model {
                CodeModel::Tabulated(curves) => {
                    for (config, curve) in curves {
                        for p in &curve.points {
                            self.insert_at_line(&entry.id, p.snr_db, config, p.per, p.line)?;
                        }
                    }
                }
                model => {
                    if self.index.contains_key(&entry.id) {
                        return Err(PerError::CodeConflict(entry.id.0.clone()));
                    }
                    self.entry_mut(&entry.id, || model.clone());
                }
            }
        }
        Ok(())
    }

    /// Checks PER is non-increasing in SNR along every curve, and
    /// non-decreasing under configuration dominance at shared SNR points.
    pub fn validate(&self) -> Result<(), PerError> {
        for entry in &self.codes {
            let CodeModel::Tabulated(curves) = &entry.model else {
                continue;
            };
            for (config, curve) in curves {
                for w in curve.points.windows(2) {
                    if w[1].per > w[0].per {
                        return Err(PerError::SnrMonotonicity {
                            line: w[1].line,
                            code: entry.id.0.clone(),
                            config: config.to_string(),
                            lower: w[0].snr_db,
                            higher: w[1].snr_db,
                        });
                    }
                }
            }
            for (big, big_curve) in curves {
                for (small, small_curve) in curves {
                    if big == small || !big.dominates(small) {
                        continue;
                    }
                    for p in &big_curve.points {
                        if let Ok(i) = small_curve.find(p.snr_db) {
                            let q = small_curve.points[i];
                            if p.per < q.per {
                                return Err(PerError::ConfigMonotonicity {
                                    line: p.line,
                                    other: q.line,
                                    code: entry.id.0.clone(),
                                    config: big.to_string(),
                                    dominated: small.to_string(),
                                    snr_db: p.snr_db,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn lookup(
        &self,
        code: &CodeId,
        snr_db: f64,
        config: &InterferenceConfig,
    ) -> Result<f64, PerError> {
        Ok(self.lookup_index(self.code_index(code)?, snr_db, config))
    }

    /// Lookup by the index returned from [`Self::code_index`].
    pub fn lookup_index(&self, code: usize, snr_db: f64, config: &InterferenceConfig) -> f64 {
        let key = config.erased(self.erasure_threshold);
        match &self.codes[code].model {
            CodeModel::Constant(p) => *p,
            CodeModel::Collision => {
                if key.is_all_clean() {
                    0.0
                } else {
                    1.0
                }
            }
            CodeModel::Tabulated(curves) => {
                if let Some(curve) = curves.get(&key) {
                    return curve.eval(snr_db);
                }
                self.dominating_fallback(curves, &key, snr_db)
            }
        }
    }

    fn dominating_fallback(
        &self,
        curves: &BTreeMap<InterferenceConfig, Curve>,
        key: &InterferenceConfig,
        snr_db: f64,
    ) -> f64 {
        let cap = |c: u32| c.min(self.erasure_threshold + 1) as u64;
        let mut best: Option<(u64, f64)> = None;
        for (stored, curve) in curves {
            if !stored.dominates(key) {
                continue;
            }
            let distance: u64 = stored
                .counts()
                .iter()
                .zip(key.counts())
                .map(|(&s, &q)| cap(s) - cap(q))
                .sum();
            let per = curve.eval(snr_db);
            best = match best {
                Some((d, p)) if d < distance || (d == distance && p >= per) => Some((d, p)),
                _ => Some((distance, per)),
            };
        }
        best.map_or(1.0, |(_, p)| p)
    }

    /// A memoizing view at a fixed SNR.
    pub fn at_snr(&self, snr_db: f64) -> PerLookup<'_> {
        PerLookup {
            table: self,
            snr_db,
            memo: vec![HashMap::new(); self.codes.len()],
        }
    }

    /// Parses the line-oriented text format:
    ///
    /// ```text
    /// # comment
    /// code_id,snr_db,config,per
    /// turbo_r16,5.0,1|2|3,0.02
    /// ```
    ///
    /// Config components are joined by `|`; `e` marks an erased burst. The
    /// header line is optional.
    pub fn parse(text: &str, erasure_threshold: u32) -> Result<Self, PerError> {
        let mut table = Self::new(erasure_threshold);
        let mut seen_data = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let row = raw.trim();
            if row.is_empty() || row.starts_with('#') {
                continue;
            }
            if !seen_data && row.starts_with("code_id") {
                seen_data = true;
                continue;
            }
            seen_data = true;
            let fields: Vec<&str> = row.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(PerError::Parse {
                    line,
                    msg: format!("expected 4 comma-separated fields, found {}", fields.len()),
                });
            }
            let parse_err = |msg: String| PerError::Parse { line, msg };
            if fields[0].is_empty() {
                return Err(parse_err("empty code id".into()));
            }
            let snr_db: f64 = fields[1]
                .parse()
                .map_err(|_| parse_err(format!("bad SNR {:?}", fields[1])))?;
            let counts = fields[2]
                .split('|')
                .map(|c| match c.trim() {
                    "e" => Ok(InterferenceConfig::ERASED),
                    c => c
                        .parse::<u32>()
                        .map_err(|_| parse_err(format!("bad config component {c:?}"))),
                })
                .collect::<Result<Vec<u32>, _>>()?;
            let config = InterferenceConfig::from_counts(counts)
                .map_err(|e| parse_err(e.to_string()))?;
            let per: f64 = fields[3]
                .parse()
                .map_err(|_| parse_err(format!("bad PER {:?}", fields[3])))?;
            table.insert_at_line(&CodeId::new(fields[0]), snr_db, &config, per, line)?;
        }
        table.validate()?;
        Ok(table)
    }

    /// Serializes tabulated codes in the format read by [`Self::parse`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from("code_id,snr_db,config,per\n");
        for entry in &self.codes {
            let CodeModel::Tabulated(curves) = &entry.model else {
                continue;
            };
            for (config, curve) in curves {
                let cfg: Vec<String> = config
                    .counts()
                    .iter()
                    .map(|&c| {
                        if c == InterferenceConfig::ERASED {
                            "e".to_string()
                        } else {
                            c.to_string()
                        }
                    })
                    .collect();
                for p in &curve.points {
                    let _ = writeln!(
                        out,
                        "{},{:.1},{},{:.6e}",
                        entry.id,
                        p.snr_db,
                        cfg.join("|"),
                        p.per
                    );
                }
            }
        }
        out
    }
}

/// Reads a PER table file with the default erasure threshold.
pub fn load_per_table(path: impl AsRef<Path>) -> Result<PerTable, PerError> {
    load_per_table_with_threshold(path, DEFAULT_ERASURE_THRESHOLD)
}

pub fn load_per_table_with_threshold(
    path: impl AsRef<Path>,
    erasure_threshold: u32,
) -> Result<PerTable, PerError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| PerError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    PerTable::parse(&text, erasure_threshold)
}

fn cfg(counts: &[u32]) -> InterferenceConfig {
    InterferenceConfig::from_counts(counts.to_vec()).expect("non-empty")
}

/// Anchor points read off the worked example and the signalling code
/// description, all at 5 dB. Bounds of the form "PER < 1e-4" are stored as
/// exactly 1e-4.
pub fn anchor_points() -> Vec<(CodeId, f64, InterferenceConfig, f64)> {
    let e = InterferenceConfig::ERASED;
    let rm = CodeId::new(SIGNALLING_CODE);
    vec![
        (rm.clone(), 5.0, cfg(&[1]), 0.109),
        (rm, 5.0, cfg(&[0]), 1e-4),
        (CodeId::new("turbo_r16"), 5.0, cfg(&[1, 2, e]), 0.02),
        (CodeId::new("turbo_r14"), 5.0, cfg(&[0, 2]), 1e-4),
        (CodeId::new("turbo_r14"), 5.0, cfg(&[1, 1]), 1e-4),
    ]
}

/// Table containing only the anchor points.
pub fn builtin_anchor_table() -> PerTable {
    let mut t = PerTable::default();
    for (code, snr, config, per) in anchor_points() {
        t.insert(&code, snr, &config, per)
            .expect("anchor points are distinct");
    }
    t
}

/// The committed anchor-extended table compiled into the binary.
pub fn builtin_extended_table() -> PerTable {
    PerTable::parse(EXTENDED_TABLE_CSV, DEFAULT_ERASURE_THRESHOLD)
        .expect("committed table is valid")
}

/// Memoizing lookups at one SNR.
#[derive(Debug, Clone)]
pub struct PerLookup<'a> {
    table: &'a PerTable,
    snr_db: f64,
    memo: Vec<HashMap<InterferenceConfig, f64>>,
}

impl<'a> PerLookup<'a> {
    pub fn table(&self) -> &'a PerTable {
        self.table
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    pub fn code_index(&self, code: &CodeId) -> Result<usize, PerError> {
        self.table.code_index(code)
    }

    pub fn per(&mut self, code: usize, config: &InterferenceConfig) -> f64 {
        if let Some(&p) = self.memo[code].get(config) {
            return p;
        }
        let p = self.table.lookup_index(code, self.snr_db, config);
        self.memo[code].insert(config.clone(), p);
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> CodeId {
        CodeId::new(s)
    }

    #[test]
    fn anchors_are_exact() {
        let t = builtin_anchor_table();
        assert_eq!(t.lookup(&id("rm_14_64"), 5.0, &cfg(&[1])).unwrap(), 0.109);
        assert_eq!(
            t.lookup(&id("turbo_r16"), 5.0, &cfg(&[1, 2, 3])).unwrap(),
            0.02
        );
        assert!(t.lookup(&id("turbo_r14"), 5.0, &cfg(&[0, 2])).unwrap() <= 1e-4);
        assert_eq!(t.lookup(&id("turbo_r14"), 5.0, &cfg(&[2, 0])).unwrap(), 1e-4);
    }

    #[test]
    fn anchor_table_has_no_raw_counts_above_threshold() {
        let t = builtin_anchor_table();
        for entry in &t.codes {
            let CodeModel::Tabulated(curves) = &entry.model else {
                panic!("anchor table is tabulated")
            };
            for config in curves.keys() {
                assert!(config
                    .counts()
                    .iter()
                    .all(|&c| c <= 2 || c == InterferenceConfig::ERASED));
            }
        }
    }

    #[test]
    fn unknown_code() {
        let t = builtin_anchor_table();
        assert_eq!(
            t.lookup(&id("nope"), 5.0, &cfg(&[0])),
            Err(PerError::UnknownCode("nope".into()))
        );
    }

    #[test]
    fn ideal_and_collision() {
        let codes = [id("a")];
        let ideal = PerTable::ideal(&codes);
        assert_eq!(ideal.lookup(&codes[0], -3.0, &cfg(&[4, 5, 9])).unwrap(), 0.0);
        let coll = PerTable::collision_channel(&codes);
        assert_eq!(coll.lookup(&codes[0], 0.0, &cfg(&[0, 0])).unwrap(), 0.0);
        assert_eq!(coll.lookup(&codes[0], 0.0, &cfg(&[0, 1])).unwrap(), 1.0);
        assert_eq!(coll.lookup(&codes[0], 0.0, &cfg(&[0, 7])).unwrap(), 1.0);
    }

    #[test]
    fn interpolation_is_log_linear_and_clamped() {
        let mut t = PerTable::default();
        let c = id("c");
        t.insert(&c, 0.0, &cfg(&[1]), 0.1).unwrap();
        t.insert(&c, 2.0, &cfg(&[1]), 0.001).unwrap();
        // midpoint of log10 values -1 and -3
        let mid = t.lookup(&c, 1.0, &cfg(&[1])).unwrap();
        assert!((mid - 0.01).abs() < 1e-15, "{mid}");
        assert_eq!(t.lookup(&c, -5.0, &cfg(&[1])).unwrap(), 0.1);
        assert_eq!(t.lookup(&c, 9.0, &cfg(&[1])).unwrap(), 0.001);
    }

    #[test]
    fn zero_endpoint_interpolates_linearly() {
        let mut t = PerTable::default();
        let c = id("c");
        t.insert(&c, 0.0, &cfg(&[0]), 0.2).unwrap();
        t.insert(&c, 1.0, &cfg(&[0]), 0.0).unwrap();
        assert!((t.lookup(&c, 0.5, &cfg(&[0])).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn erasure_substitution() {
        let mut t = PerTable::default();
        let c = id("c");
        t.insert(&c, 3.0, &cfg(&[1, InterferenceConfig::ERASED]), 0.3)
            .unwrap();
        let a = t.lookup(&c, 3.0, &cfg(&[1, 5])).unwrap();
        let b = t
            .lookup(&c, 3.0, &cfg(&[1, InterferenceConfig::ERASED]))
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(a, 0.3);
        // inserting [1 3] collides with the stored [1 e]
        assert!(matches!(
            t.insert(&c, 3.0, &cfg(&[1, 3]), 0.3),
            Err(PerError::Duplicate { .. })
        ));
    }

    #[test]
    fn dominance_fallback() {
        let t = builtin_anchor_table();
        let r14 = id("turbo_r14");
        // [0 0] is dominated by both [0 2] and [1 1]
        assert_eq!(t.lookup(&r14, 5.0, &cfg(&[0, 0])).unwrap(), 1e-4);
        // nothing dominates [1 2]
        assert_eq!(t.lookup(&r14, 5.0, &cfg(&[1, 2])).unwrap(), 1.0);
        assert_eq!(t.lookup(&r14, 5.0, &cfg(&[1, 3])).unwrap(), 1.0);
        // different degree never matches
        assert_eq!(t.lookup(&r14, 5.0, &cfg(&[0])).unwrap(), 1.0);
        // nearest dominating config wins
        let mut t = PerTable::default();
        let c = id("c");
        t.insert(&c, 0.0, &cfg(&[0, 1]), 0.01).unwrap();
        t.insert(&c, 0.0, &cfg(&[2, 2]), 0.5).unwrap();
        assert_eq!(t.lookup(&c, 0.0, &cfg(&[0, 0])).unwrap(), 0.01);
    }

    #[test]
    fn parse_rows_and_errors() {
        let t = PerTable::parse("# c\ncode_id,snr_db,config,per\nturbo_r16,5.0,1|2|3,0.02\n", 2).unwrap();
        assert_eq!(
            t.lookup(&id("turbo_r16"), 5.0, &cfg(&[1, 2, 3])).unwrap(),
            0.02
        );
        assert_eq!(
            PerTable::parse("a,1.0,0,1.5", 2),
            Err(PerError::Range { line: 1, per: 1.5 })
        );
        let dup = PerTable::parse("a,1.0,0|1,0.5\n\na,1.0,1|0,0.4\n", 2);
        assert!(matches!(dup, Err(PerError::Duplicate { line: 3, first: 1, .. })));
        assert!(matches!(
            PerTable::parse("a,1.0,0", 2),
            Err(PerError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            PerTable::parse("a,x,0,0.1", 2),
            Err(PerError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            PerTable::parse("a,1.0,,0.1", 2),
            Err(PerError::Parse { line: 1, .. })
        ));
        let snr = PerTable::parse("a,1.0,0,0.1\na,2.0,0,0.2\n", 2);
        assert!(matches!(snr, Err(PerError::SnrMonotonicity { line: 2, .. })));
        let dom = PerTable::parse("a,1.0,0|0,0.1\na,1.0,0|1,0.05\n", 2);
        assert!(matches!(dom, Err(PerError::ConfigMonotonicity { line: 2, other: 1, .. })));
    }

    #[test]
    fn csv_round_trip() {
        let t = builtin_anchor_table();
        let back = PerTable::parse(&t.to_csv(), 2).unwrap();
        for (code, snr, config, per) in anchor_points() {
            assert_eq!(back.lookup(&code, snr, &config).unwrap(), per);
        }
    }

    #[test]
    fn merge_tables() {
        let mut t = builtin_anchor_table();
        t.merge(&PerTable::collision_channel(&[id("turbo_r12")])).unwrap();
        assert_eq!(t.lookup(&id("turbo_r12"), 5.0, &cfg(&[1])).unwrap(), 1.0);
        assert!(t.merge(&builtin_anchor_table()).is_err());
        assert!(t
            .merge(&PerTable::ideal(&[id("turbo_r12")]))
            .is_err());
    }

    #[test]
    fn memo_agrees_with_table() {
        let t = builtin_anchor_table();
        let mut view = t.at_snr(5.0);
        let i = view.code_index(&id("turbo_r14")).unwrap();
        for _ in 0..2 {
            assert_eq!(view.per(i, &cfg(&[2, 0])), 1e-4);
            assert_eq!(view.per(i, &cfg(&[3, 1])), 1.0);
        }
    }
}
