//! Seeded Monte Carlo trial runner and performance measures.
//!
//! Trial `i` of a plan draws all of its randomness from a ChaCha8 stream
//! selected by `(master_seed, i)`, and per-trial counters are reduced by
//! integer addition. Results therefore do
//! not depend on scheduling or on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::decoder::{decode_frame, DecodeError, DecodePolicy, Mode, RandomDraws};
use crate::frame::{build_frame, DegreeDistribution, FrameError, ProfileSet, Rate};
use crate::per::{PerLookup, PerTable};

pub const DEFAULT_TRIALS: u64 = 10_000;

/// z-value of a two-sided 95% normal interval.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Stop early once the PLR interval is narrow enough, checking after every
/// `batch` trials. `trials` in the plan stays the cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    /// Stop when `plr_ci95 < rel_half_width * plr`.
    pub rel_half_width: f64,
    pub batch: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            rel_half_width: 0.1,
            batch: 1_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan {
    pub slots: usize,
    pub users: usize,
    pub dist: DegreeDistribution,
    pub profiles: ProfileSet,
    pub snr_db: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub policy: DecodePolicy,
    pub stop: Option<StopRule>,
}

impl TrialPlan {
    /// Plan with default trial count, seed 0 and the profile family that
    /// matches `policy.mode`.
    pub fn new(
        slots: usize,
        users: usize,
        dist: DegreeDistribution,
        snr_db: f64,
        policy: DecodePolicy,
    ) -> Self {
        let degrees: Vec<u32> = dist.support().collect();
        let profiles = if policy.mode.uses_replicas() {
            ProfileSet::replica(degrees)
        } else {
            ProfileSet::musca(degrees)
        };
        Self {
            slots,
            users,
            dist,
            profiles,
            snr_db,
            trials: DEFAULT_TRIALS,
            master_seed: 0,
            policy,
            stop: None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.slots == 0 {
            return Err(SimError::Plan("frame needs at least one slot".into()));
        }
        if self.trials == 0 {
            return Err(SimError::Plan("at least one trial is required".into()));
        }
        if !self.snr_db.is_finite() {
            return Err(SimError::Plan(format!("SNR {} is not finite", self.snr_db)));
        }
        let max = self.dist.max_degree();
        if max as usize > self.slots {
            return Err(FrameError::DegreeTooLarge {
                degree: max,
                slots: self.slots,
            }
            .into());
        }
        if self.policy.mode == Mode::Sa && max > 1 {
            return Err(SimError::Plan(
                "slotted ALOHA requires every user to have degree 1".into(),
            ));
        }
        if let Some(stop) = self.stop {
            if stop.batch == 0 || !(stop.rel_half_width > 0.0) {
                return Err(SimError::Plan("stop rule needs a positive batch and width".into()));
            }
        }
        self.profiles.covers(&self.dist)?;
        Ok(())
    }

    /// Copy of the plan with `round(g * slots)` users.
    pub fn at_load(&self, g: f64) -> Result<Self, SimError> {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(SimError::Plan(format!("load {g} must be finite and >= 0")));
        }
        Ok(Self {
            users: (g * self.slots as f64).round() as usize,
            ..self.clone()
        })
    }

    pub fn load(&self) -> f64 {
        normalized_load(self.users, self.slots)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub g: f64,
    pub users: usize,
    pub snr_db: f64,
    pub plr: f64,
    /// Half-width of the 95% normal interval on `plr`, from the spread of
    /// per-frame loss fractions.
    pub plr_ci95: f64,
    pub throughput: f64,
    pub trials_run: u64,
    pub decoded_total: u64,
    pub offered_total: u64,
}

/// Integer counters; adding tallies is associative and commutative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub frames: u64,
    pub offered: u64,
    pub decoded: u64,
    /// Sum over frames of squared lost-packet counts.
    pub lost_sq: u128,
}

impl Tally {
    fn frame(offered: u64, decoded: u64) -> Self {
        let lost = (offered - decoded) as u128;
        Self {
            frames: 1,
            offered,
            decoded,
            lost_sq: lost * lost,
        }
    }

    fn plus(self, o: Self) -> Self {
        Self {
            frames: self.frames + o.frames,
            offered: self.offered + o.offered,
            decoded: self.decoded + o.decoded,
            lost_sq: self.lost_sq + o.lost_sq,
        }
    }

    fn plr(&self) -> f64 {
        if self.offered == 0 {
            0.0
        } else {
            1.0 - self.decoded as f64 / self.offered as f64
        }
    }

    fn plr_ci95(&self, users: usize) -> f64 {
        if self.frames < 2 || users == 0 {
            return 0.0;
        }
        let n = self.frames as f64;
        let u = users as f64;
        let lost = (self.offered - self.decoded) as f64;
        let mean = lost / n / u;
        let mean_sq = self.lost_sq as f64 / n / (u * u);
        let var = ((mean_sq - mean * mean) * n / (n - 1.0)).max(0.0);
        Z95 * (var / n).sqrt()
    }
}

/// RNG for trial `index` of a plan seeded with `master_seed`.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Builds and decodes frame `index`; returns its tally.
pub fn run_trial(plan: &TrialPlan, lookup: &mut PerLookup<'_>, index: u64) -> Result<Tally, SimError> {
    let mut rng = trial_rng(plan.master_seed, index);
    let mut frame = build_frame(plan.users, plan.slots, &plan.dist, &plan.profiles, &mut rng)?;
    let report = decode_frame(
        &mut frame.state,
        &frame.users,
        &plan.profiles,
        lookup,
        plan.policy,
        &mut RandomDraws(&mut rng),
    )?;
    Ok(Tally::frame(
        frame.users.len() as u64,
        report.decoded.len() as u64,
    ))
}

#[cfg(feature = "parallel")]
fn run_range(plan: &TrialPlan, table: &PerTable, range: std::ops::Range<u64>) -> Result<Tally, SimError> {
    use rayon::prelude::*;
    range
        .into_par_iter()
        .map_init(
            || table.at_snr(plan.snr_db),
            |lookup, i| run_trial(plan, lookup, i),
        )
        .try_reduce(Tally::default, |a, b| Ok(a.plus(b)))
}

#[cfg(not(feature = "parallel"))]
fn run_range(plan: &TrialPlan, table: &PerTable, range: std::ops::Range<u64>) -> Result<Tally, SimError> {
    let mut lookup = table.at_snr(plan.snr_db);
    let mut total = Tally::default();
    for i in range {
        total = total.plus(run_trial(plan, &mut lookup, i)?);
    }
    Ok(total)
}

/// Runs the plan's trials and pools packet losses over all of them.
pub fn estimate(plan: &TrialPlan, table: &PerTable) -> Result<EstimateResult, SimError> {
    plan.validate()?;
    let tally = match plan.stop {
        None => run_range(plan, table, 0..plan.trials)?,
        Some(stop) => {
            let mut tally = Tally::default();
            let mut next = 0;
            while next < plan.trials {
                let end = (next + stop.batch).min(plan.trials);
                tally = tally.plus(run_range(plan, table, next..end)?);
                next = end;
                let plr = tally.plr();
                if plr > 0.0 && tally.plr_ci95(plan.users) < stop.rel_half_width * plr {
                    break;
                }
            }
            tally
        }
    };
    Ok(summarize(plan, &tally))
}

/// [`estimate`] on a dedicated pool of `workers` threads.
#[cfg(feature = "parallel")]
pub fn estimate_with_workers(
    plan: &TrialPlan,
    table: &PerTable,
    workers: usize,
) -> Result<EstimateResult, SimError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Plan(format!("cannot start worker pool: {e}")))?;
    pool.install(|| estimate(plan, table))
}

fn summarize(plan: &TrialPlan, tally: &Tally) -> EstimateResult {
    let g = plan.load();
    let plr = tally.plr();
    EstimateResult {
        g,
        users: plan.users,
        snr_db: plan.snr_db,
        plr,
        plr_ci95: tally.plr_ci95(plan.users),
        throughput: g * (1.0 - plr),
        trials_run: tally.frames,
        decoded_total: tally.decoded,
        offered_total: tally.offered,
    }
}

/// Average packet transmissions per slot.
pub fn normalized_load(users: usize, slots: usize) -> f64 {
    users as f64 / slots as f64
}

/// One estimate per load, with `round(g * slots)` users.
pub fn sweep_load(
    plan: &TrialPlan,
    table: &PerTable,
    g_values: &[f64],
) -> Result<Vec<EstimateResult>, SimError> {
    if g_values.is_empty() {
        return Err(SimError::Plan("load grid is empty".into()));
    }
    g_values
        .iter()
        .map(|&g| estimate(&plan.at_load(g)?, table))
        .collect()
}

/// Load sweeps at several SNRs.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrSweep {
    pub snr_db: Vec<f64>,
    /// `results[i]` is the load sweep at `snr_db[i]`.
    pub results: Vec<Vec<EstimateResult>>,
}

impl SnrSweep {
    /// Index (into the load grid) of the highest throughput at SNR index `i`.
    pub fn peak_index(&self, i: usize) -> usize {
        peak_index(&self.results[i]).expect("grids are non-empty")
    }

    pub fn peak(&self, i: usize) -> &EstimateResult {
        &self.results[i][self.peak_index(i)]
    }
}

pub fn sweep_snr(
    plan: &TrialPlan,
    table: &PerTable,
    snr_values: &[f64],
    g_values: &[f64],
) -> Result<SnrSweep, SimError> {
    if snr_values.is_empty() {
        return Err(SimError::Plan("SNR grid is empty".into()));
    }
    let results = snr_values
        .iter()
        .map(|&snr| {
            let p = TrialPlan {
                snr_db: snr,
                ..plan.clone()
            };
            sweep_load(&p, table, g_values)
        })
        .collect::<Result<_, _>>()?;
    Ok(SnrSweep {
        snr_db: snr_values.to_vec(),
        results,
    })
}

/// First index of the maximum throughput.
pub fn peak_index(results: &[EstimateResult]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in results.iter().enumerate() {
        if best.is_none_or(|b| r.throughput > results[b].throughput) {
            best = Some(i);
        }
    }
    best
}

/// Bits per symbol: `max_t * R_d * N_b * log2(M)`.
pub fn spectral_efficiency(max_t: f64, data_rate: Rate, degree: u32, modulation_order: u32) -> f64 {
    max_t * data_rate.value() * degree as f64 * (modulation_order as f64).log2()
}

/// Slotted ALOHA throughput `G e^-G` on an infinite population.
pub fn sa_analytic_throughput(g: f64) -> f64 {
    g * (-g).exp()
}

/// Exact slotted ALOHA throughput with `users` users on `slots` slots:
/// a user succeeds iff none of the others picks its slot.
pub fn sa_finite_throughput(users: usize, slots: usize) -> f64 {
    if users == 0 {
        return 0.0;
    }
    let g = normalized_load(users, slots);
    g * (1.0 - 1.0 / slots as f64).powi(users as i32 - 1)
}
