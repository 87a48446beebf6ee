//! Browser bindings: throughput curves, the four-user decoding trace and
//! PER lookups, driven from `www/index.html`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

use musca::decoder::{DecodePolicy, ForcedSuccess, Mode, RandomDraws};
use musca::montecarlo::sweep_load;
use musca::per::{builtin_extended_table, PerTable};
use musca::scenario::run_worked_example;
use musca::{CodeId, DegreeDistribution, InterferenceConfig, TrialPlan};

fn table_for(mode: Mode) -> PerTable {
    match mode {
        Mode::Musca => builtin_extended_table(),
        _ => PerTable::collision_channel(&[CodeId::new("turbo_r12")]),
    }
}

/// Throughput at each load in `g`, in order.
pub fn curve(
    mode: &str,
    dist: &str,
    snr_db: f64,
    slots: usize,
    trials: u64,
    seed: u64,
    g: &[f64],
) -> Result<Vec<f64>, String> {
    let mode: Mode = mode.parse()?;
    let dist: DegreeDistribution = dist.parse().map_err(|e| format!("{e}"))?;
    if trials == 0 || trials > 100_000 {
        return Err("trials must be between 1 and 100000".into());
    }
    let plan = TrialPlan {
        trials,
        master_seed: seed,
        ..TrialPlan::new(slots, 0, dist, snr_db, DecodePolicy::with_mode(mode))
    };
    plan.validate().map_err(|e| e.to_string())?;
    let rows = sweep_load(&plan, &table_for(mode), g).map_err(|e| e.to_string())?;
    Ok(rows.iter().map(|r| r.throughput).collect())
}

/// Event log of the four-user example: every attempt succeeding when
/// `forced`, otherwise with outcomes drawn from `seed`.
pub fn trace(forced: bool, seed: u64) -> Result<String, String> {
    let (_, report) = if forced {
        run_worked_example(&mut ForcedSuccess)
    } else {
        run_worked_example(&mut RandomDraws(&mut ChaCha8Rng::seed_from_u64(seed)))
    }
    .map_err(|e| e.to_string())?;
    let mut out: Vec<String> = report.events.iter().map(|e| e.to_string()).collect();
    let decoded: Vec<String> = report.decoded.iter().map(|u| format!("u{u}")).collect();
    out.push(format!(
        "decoded: {}",
        if decoded.is_empty() { "none".into() } else { decoded.join(" ") }
    ));
    Ok(out.join("\n"))
}

/// PER from the built-in table. `config` lists per-burst interferer
/// counts separated by spaces or commas, `e` for an erased burst.
pub fn per_value(code: &str, snr_db: f64, config: &str) -> Result<f64, String> {
    let counts = config
        .split([' ', ','])
        .filter(|t| !t.is_empty())
        .map(|t| match t {
            "e" => Ok(InterferenceConfig::ERASED),
            _ => t.parse::<u32>().map_err(|_| format!("bad count {t:?}")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let config = InterferenceConfig::from_counts(counts).map_err(|e| e.to_string())?;
    builtin_extended_table()
        .lookup(&CodeId::new(code), snr_db, &config)
        .map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = throughputCurve)]
#[allow(clippy::too_many_arguments)]
pub fn throughput_curve(
    mode: &str,
    dist: &str,
    snr_db: f64,
    slots: u32,
    trials: u32,
    seed: u32,
    g: Vec<f64>,
) -> Result<Vec<f64>, JsError> {
    curve(mode, dist, snr_db, slots as usize, trials as u64, seed as u64, &g)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = exampleTrace)]
pub fn example_trace(forced: bool, seed: u32) -> Result<String, JsError> {
    trace(forced, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = perLookup)]
pub fn per_lookup(code: &str, snr_db: f64, config: &str) -> Result<f64, JsError> {
    per_value(code, snr_db, config).map_err(|e| JsError::new(&e))
}
