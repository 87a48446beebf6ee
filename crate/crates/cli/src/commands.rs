use std::io::Write;

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use musca::decoder::{ForcedSuccess, RandomDraws};
use musca::montecarlo::{peak_index, sweep_load, sweep_snr};
use musca::optimizer::{optimize, SearchSpec};
use musca::per::link::{extended_table, ExtendedTableSpec};
use musca::scenario::{follows_expected_trace, run_worked_example, SNR_DB};
use musca::{estimate, DecodeReport, Mode, TrialPlan};

use crate::config::{ConfigError, ExperimentConfig};
use crate::output::{estimate_row, fmt6, open, ESTIMATE_HEADER};

/// Outcome of a subcommand: configuration problems are reported apart
/// from runtime failures.
#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Runtime(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn single(values: &[f64], what: &str) -> Result<f64, ConfigError> {
    match values {
        [x] => Ok(*x),
        _ => Err(ConfigError(format!(
            "{what} takes a single value here, got {}",
            values.len()
        ))),
    }
}

fn plan(cfg: &ExperimentConfig, snr_db: f64) -> Result<TrialPlan, ConfigError> {
    let plan = TrialPlan {
        trials: cfg.trials,
        master_seed: cfg.seed,
        stop: cfg.stop,
        ..TrialPlan::new(cfg.slots, 0, cfg.dist.clone(), snr_db, cfg.policy)
    };
    check_codes(cfg, &plan)?;
    plan.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(plan)
}

/// Every code the profiles need must be in the PER table.
fn check_codes(cfg: &ExperimentConfig, plan: &TrialPlan) -> Result<(), ConfigError> {
    for p in plan.profiles.iter() {
        let signalling = match cfg.policy.mode {
            Mode::Musca if p.degree > 1 => p.signalling_code.as_ref(),
            _ => None,
        };
        for code in std::iter::once(&p.data_code).chain(signalling) {
            cfg.table.code_index(code).map_err(|_| {
                ConfigError(format!(
                    "PER table has no entries for code {code} (needed by degree {})",
                    p.degree
                ))
            })?;
        }
    }
    Ok(())
}

fn csv_writer(cfg: &ExperimentConfig) -> Result<csv::Writer<Box<dyn Write>>, Failure> {
    let out = open(cfg.out.as_deref()).with_context(|| match &cfg.out {
        Some(p) => format!("cannot create {}", p.display()),
        None => "cannot open standard output".into(),
    })?;
    Ok(csv::Writer::from_writer(out))
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let snr = single(&cfg.snr_db, "snr")?;
    let g = single(&cfg.g, "g")?;
    let plan = plan(cfg, snr)?.at_load(g).map_err(|e| ConfigError(e.to_string()))?;
    let r = estimate(&plan, &cfg.table).context("simulation failed")?;
    let mut w = csv_writer(cfg)?;
    w.write_record(ESTIMATE_HEADER).context("write failed")?;
    w.write_record(estimate_row(&r, cfg.seed)).context("write failed")?;
    w.flush()?;
    Ok(())
}

fn sweep_header() -> Vec<&'static str> {
    let mut h = ESTIMATE_HEADER.to_vec();
    h.push("is_peak");
    h
}

pub fn sweep_load_cmd(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let snr = single(&cfg.snr_db, "snr")?;
    let plan = plan(cfg, snr)?;
    let rows = sweep_load(&plan, &cfg.table, &cfg.g).context("load sweep failed")?;
    let peak = peak_index(&rows);
    let mut w = csv_writer(cfg)?;
    w.write_record(sweep_header()).context("write failed")?;
    for (i, r) in rows.iter().enumerate() {
        let mut row = estimate_row(r, cfg.seed);
        row.push(u8::from(Some(i) == peak).to_string());
        w.write_record(row).context("write failed")?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_snr_cmd(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let plan = plan(cfg, cfg.snr_db[0])?;
    let sweep = sweep_snr(&plan, &cfg.table, &cfg.snr_db, &cfg.g).context("SNR sweep failed")?;
    let mut w = csv_writer(cfg)?;
    w.write_record(sweep_header()).context("write failed")?;
    for (s, rows) in sweep.results.iter().enumerate() {
        let peak = sweep.peak_index(s);
        for (i, r) in rows.iter().enumerate() {
            let mut row = estimate_row(r, cfg.seed);
            row.push(u8::from(i == peak).to_string());
            w.write_record(row).context("write failed")?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn optimize_cmd(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let snr = single(&cfg.snr_db, "snr")?;
    let spec = SearchSpec {
        degrees: cfg.degrees.clone(),
        step: cfg.step,
        snr_db: snr,
        slots: cfg.slots,
        trials: cfg.trials,
        g_grid: cfg.g.clone(),
        master_seed: cfg.seed,
        policy: cfg.policy,
    };
    let max = cfg.degrees.iter().copied().max().unwrap_or(0);
    if max as usize > cfg.slots {
        return Err(ConfigError(format!("degree {max} does not fit in {} slots", cfg.slots)).into());
    }
    if cfg.policy.mode == Mode::Sa && max > 1 {
        return Err(ConfigError("mode sa only supports degree 1".into()).into());
    }
    // the widest candidate uses every degree, so checking it covers the rest
    let full = musca::DegreeDistribution::new(
        cfg.degrees.iter().map(|&d| (d, 1.0 / cfg.degrees.len() as f64)).collect(),
    )
    .map_err(|e| ConfigError(e.to_string()))?;
    check_codes(
        cfg,
        &TrialPlan::new(cfg.slots, 0, full, snr, cfg.policy),
    )?;
    let opt = match optimize(&spec, &cfg.table) {
        Ok(o) => o,
        Err(e @ musca::optimizer::SearchError::BadStep(_)) => {
            return Err(ConfigError(e.to_string()).into())
        }
        Err(e) => return Err(anyhow::Error::new(e).context("search failed").into()),
    };
    let mut w = csv_writer(cfg)?;
    let mut header = vec!["rank".to_string()];
    header.extend(cfg.degrees.iter().map(|d| format!("p{d}")));
    header.extend(["mean_degree", "peak_T", "peak_G", "peak_plr"].map(String::from));
    w.write_record(&header).context("write failed")?;
    for (rank, c) in opt.ranking.iter().enumerate() {
        let mut row = vec![(rank + 1).to_string()];
        row.extend(cfg.degrees.iter().map(|&d| fmt6(c.dist.probability(d))));
        row.push(fmt6(c.mean_degree()));
        row.push(fmt6(c.peak_throughput));
        row.push(fmt6(c.peak_load));
        row.push(fmt6(c.peak_plr));
        w.write_record(&row).context("write failed")?;
    }
    w.flush()?;
    Ok(())
}

fn write_trace(out: &mut dyn Write, report: &DecodeReport) -> std::io::Result<()> {
    for e in &report.events {
        writeln!(out, "  {e}")?;
    }
    let decoded: Vec<String> = report.decoded.iter().map(|u| format!("u{u}")).collect();
    writeln!(
        out,
        "  decoded: {}{}",
        if decoded.is_empty() { "none".into() } else { decoded.join(" ") },
        if report.deadlock { " (deadlock)" } else { "" }
    )
}

/// Runs the four-user example; returns whether the forced run matched.
pub fn example(seed: u64, out: Option<&std::path::Path>) -> Result<bool, Failure> {
    let mut w = open(out).context("cannot open output")?;
    let (_, forced) = run_worked_example(&mut ForcedSuccess).context("decoding failed")?;
    writeln!(w, "every attempt succeeds ({SNR_DB} dB):")?;
    write_trace(&mut w, &forced)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (_, drawn) = run_worked_example(&mut RandomDraws(&mut rng)).context("decoding failed")?;
    writeln!(w, "random draws, seed {seed}:")?;
    write_trace(&mut w, &drawn)?;
    let ok = follows_expected_trace(&forced);
    writeln!(
        w,
        "{}",
        if ok {
            "forced run matches the expected decoding order"
        } else {
            "forced run DOES NOT match the expected decoding order"
        }
    )?;
    w.flush()?;
    Ok(ok)
}

pub fn gen_per_table(out: Option<&std::path::Path>) -> Result<(), Failure> {
    let table = extended_table(&ExtendedTableSpec::default());
    let mut w = open(out).context("cannot open output")?;
    w.write_all(table.to_csv().as_bytes())?;
    w.flush()?;
    Ok(())
}
