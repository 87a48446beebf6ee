//! CSV emission. Reals are written with six significant digits in plain
//! decimal notation, so parsing a cell gives back exactly the rounded value.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use musca::EstimateResult;

/// `x` rounded to six significant digits, shortest round-trip form.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    rounded.to_string()
}

/// Destination for a subcommand's output.
pub fn open(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

pub const ESTIMATE_HEADER: [&str; 7] = ["g", "snr_db", "plr", "plr_ci95", "throughput", "trials", "seed"];

pub fn estimate_row(r: &EstimateResult, seed: u64) -> Vec<String> {
    vec![
        fmt6(r.g),
        fmt6(r.snr_db),
        fmt6(r.plr),
        fmt6(r.plr_ci95),
        fmt6(r.throughput),
        r.trials_run.to_string(),
        seed.to_string(),
    ]
}
