//! Exhaustive search over degree distributions on a simplex grid.

use thiserror::Error;

use crate::decoder::DecodePolicy;
use crate::frame::{DegreeDistribution, FrameError};
use crate::montecarlo::{peak_index, sweep_load, SimError, TrialPlan};
use crate::per::PerTable;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("step {0} must lie in (0, 1] and divide 1")]
    BadStep(f64),
    #[error("no degrees to search over")]
    NoDegrees,
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Default inner load grid: 0.50, 0.55, ..., 1.80.
pub fn default_g_grid() -> Vec<f64> {
    (0..=26).map(|i| 0.5 + 0.05 * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpec {
    pub degrees: Vec<u32>,
    pub step: f64,
    pub snr_db: f64,
    pub slots: usize,
    pub trials: u64,
    pub g_grid: Vec<f64>,
    pub master_seed: u64,
    pub policy: DecodePolicy,
}

impl SearchSpec {
    pub fn new(snr_db: f64) -> Self {
        Self {
            degrees: vec![1, 2, 3],
            step: 0.05,
            snr_db,
            slots: 100,
            trials: 1_000,
            g_grid: default_g_grid(),
            master_seed: 0,
            policy: DecodePolicy::default(),
        }
    }

    fn plan(&self, dist: DegreeDistribution) -> TrialPlan {
        TrialPlan {
            trials: self.trials,
            master_seed: self.master_seed,
            ..TrialPlan::new(self.slots, 0, dist, self.snr_db, self.policy)
        }
    }
}

/// Every distribution over `degrees` whose probabilities are multiples of
/// `step`. Degrees with probability zero are left out of the distribution.
pub fn enumerate_simplex(degrees: &[u32], step: f64) -> Result<Vec<DegreeDistribution>, SearchError> {
    if degrees.is_empty() {
        return Err(SearchError::NoDegrees);
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(SearchError::BadStep(step));
    }
    let units = (1.0 / step).round();
    if (units * step - 1.0).abs() > 1e-9 {
        return Err(SearchError::BadStep(step));
    }
    let units = units as u32;
    let mut out = Vec::new();
    let mut parts = vec![0u32; degrees.len()];
    compositions(units, 0, &mut parts, &mut |parts| {
        let entries = degrees
            .iter()
            .zip(parts)
            .filter(|(_, &k)| k > 0)
            .map(|(&d, &k)| (d, k as f64 / units as f64))
            .collect();
        out.push(DegreeDistribution::new(entries));
    });
    out.into_iter().map(|d| d.map_err(Into::into)).collect()
}

fn compositions(remaining: u32, pos: usize, parts: &mut [u32], emit: &mut impl FnMut(&[u32])) {
    if pos + 1 == parts.len() {
        parts[pos] = remaining;
        emit(parts);
        return;
    }
    for k in 0..=remaining {
        parts[pos] = k;
        compositions(remaining - k, pos + 1, parts, emit);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub dist: DegreeDistribution,
    pub peak_throughput: f64,
    pub peak_load: f64,
    pub peak_plr: f64,
}

impl Candidate {
    pub fn mean_degree(&self) -> f64 {
        self.dist.mean_degree()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub best: Candidate,
    /// Every candidate, best first.
    pub ranking: Vec<Candidate>,
}

/// Peak throughput of one distribution over the search's load grid.
pub fn evaluate(spec: &SearchSpec, dist: &DegreeDistribution, table: &PerTable) -> Result<Candidate, SearchError> {
    let plan = spec.plan(dist.clone());
    let curve = sweep_load(&plan, table, &spec.g_grid)?;
    let i = peak_index(&curve).expect("non-empty grid");
    Ok(Candidate {
        dist: dist.clone(),
        peak_throughput: curve[i].throughput,
        peak_load: curve[i].g,
        peak_plr: curve[i].plr,
    })
}

/// Evaluates every grid distribution and ranks them by peak throughput;
/// ties go to the lower mean degree, then to enumeration order.
pub fn optimize(spec: &SearchSpec, table: &PerTable) -> Result<Optimum, SearchError> {
    let candidates = enumerate_simplex(&spec.degrees, spec.step)?;
    rank(spec, &candidates, table)
}

/// Ranks an explicit candidate list.
pub fn rank(
    spec: &SearchSpec,
    candidates: &[DegreeDistribution],
    table: &PerTable,
) -> Result<Optimum, SearchError> {
    if candidates.is_empty() {
        return Err(SearchError::NoDegrees);
    }
    let evaluated = evaluate_all(spec, candidates, table)?;
    let mut order: Vec<usize> = (0..evaluated.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&evaluated[a], &evaluated[b]);
        y.peak_throughput
            .total_cmp(&x.peak_throughput)
            .then(x.mean_degree().total_cmp(&y.mean_degree()))
            .then(a.cmp(&b))
    });
    let ranking: Vec<Candidate> = order.into_iter().map(|i| evaluated[i].clone()).collect();
    Ok(Optimum {
        best: ranking[0].clone(),
        ranking,
    })
}

#[cfg(feature = "parallel")]
fn evaluate_all(
    spec: &SearchSpec,
    candidates: &[DegreeDistribution],
    table: &PerTable,
) -> Result<Vec<Candidate>, SearchError> {
    use rayon::prelude::*;
    candidates
        .par_iter()
        .map(|d| evaluate(spec, d, table))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_all(
    spec: &SearchSpec,
    candidates: &[DegreeDistribution],
    table: &PerTable,
) -> Result<Vec<Candidate>, SearchError> {
    candidates.iter().map(|d| evaluate(spec, d, table)).collect()
}
