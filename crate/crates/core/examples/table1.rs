//! Peak throughput of the six reference distributions at one SNR.
//!
//! `cargo run --release -p musca --example table1 -- [snr_db] [trials] [turbo_spread] [rm_spread]`

use musca::optimizer::{rank, SearchSpec};
use musca::per::link::{extended_table, ExtendedTableSpec};
use musca::DegreeDistribution;

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    let snr = args.first().copied().unwrap_or(8.0);
    let trials = args.get(1).copied().unwrap_or(300.0) as u64;
    let mut ts = ExtendedTableSpec::default();
    if let Some(&s) = args.get(2) {
        ts.turbo_spread_db = s;
    }
    if let Some(&s) = args.get(3) {
        ts.signalling_spread_db = s;
    }
    let table = extended_table(&ts);
    let dists: Vec<DegreeDistribution> = [
        "1:1", "2:1", "3:1", "2:0.7,3:0.3", "1:0.1,2:0.3,3:0.6", "1:0.2,2:0.3,3:0.5",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect();
    let spec = SearchSpec {
        trials,
        ..SearchSpec::new(snr)
    };
    let opt = rank(&spec, &dists, &table).unwrap();
    for c in &opt.ranking {
        println!("{:<22} T={:.3} G={:.2} plr={:.4}", c.dist.to_string(), c.peak_throughput, c.peak_load, c.peak_plr);
    }
}
