//! Parametric link abstraction used to extend the anchor points into full
//! PER curves.
//!
//! Each burst is treated as an AWGN channel whose interferers (equal power,
//! one per other user on the slot) add to the noise. The mutual information
//! of every non-erased burst is averaged and mapped back to an effective SNR;
//! the code fails with probability `Q((snr_eff - threshold) / spread)` where
//! the threshold is the modulation-constrained capacity limit for the code
//! rate plus a gap. The gap of each code family is solved so that the
//! family reproduces its anchor point exactly.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use super::{anchor_points, PerTable, DEFAULT_ERASURE_THRESHOLD};
use crate::frame::{turbo_code_id, CodeId, InterferenceConfig, Rate, SIGNALLING_CODE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Bpsk,
    Qpsk,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> f64 {
        match self {
            Modulation::Bpsk => 1.0,
            Modulation::Qpsk => 2.0,
        }
    }

    /// Mutual information in bits per symbol at linear `Es/N0`.
    pub fn mutual_information(self, es_n0: f64) -> f64 {
        match self {
            Modulation::Bpsk => j_function(4.0 * es_n0),
            Modulation::Qpsk => 2.0 * j_function(2.0 * es_n0),
        }
    }
}

/// `1 - E[log2(1 + e^-L)]` for a consistent Gaussian LLR `L ~ N(mu, 2 mu)`.
fn j_function(mu: f64) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    let sigma = (2.0 * mu).sqrt();
    const STEPS: usize = 1600;
    const HALF_WIDTH: f64 = 8.0;
    let h = 2.0 * HALF_WIDTH / STEPS as f64;
    let mut acc = 0.0;
    let mut wsum = 0.0;
    for i in 0..=STEPS {
        let z = -HALF_WIDTH + i as f64 * h;
        let w = if i == 0 || i == STEPS { 0.5 } else { 1.0 } * (-0.5 * z * z).exp();
        let l = mu + sigma * z;
        acc += w * softplus(-l);
        wsum += w;
    }
    (1.0 - acc / wsum / std::f64::consts::LN_2).clamp(0.0, 1.0)
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Signal to interference plus noise ratio of a burst with `interferers`
/// equal-power colliding bursts.
pub fn burst_sinr(snr_db: f64, interferers: u32) -> f64 {
    1.0 / (interferers as f64 + 1.0 / db_to_linear(snr_db))
}

const MAX_EFFECTIVE_DB: f64 = 40.0;
const MIN_EFFECTIVE_DB: f64 = -40.0;

/// SNR (dB) at which the modulation carries `mi` bits per symbol.
pub fn inverse_mutual_information(modulation: Modulation, mi: f64) -> f64 {
    if mi <= modulation.mutual_information(db_to_linear(MIN_EFFECTIVE_DB)) {
        return MIN_EFFECTIVE_DB;
    }
    if mi >= modulation.mutual_information(db_to_linear(MAX_EFFECTIVE_DB)) {
        return MAX_EFFECTIVE_DB;
    }
    let (mut lo, mut hi) = (MIN_EFFECTIVE_DB, MAX_EFFECTIVE_DB);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if modulation.mutual_information(db_to_linear(mid)) < mi {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// PER curve family of one code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkModel {
    pub modulation: Modulation,
    /// Information bits per coded bit.
    pub rate: f64,
    /// Distance from the capacity limit to the 50% PER point, dB.
    pub gap_db: f64,
    /// Standard deviation of the waterfall, dB.
    pub spread_db: f64,
    pub erasure_threshold: u32,
}

impl LinkModel {
    /// Effective SNR (dB) of a configuration: the SNR whose mutual
    /// information equals the mean over all bursts, erased bursts counting
    /// as zero.
    pub fn effective_snr_db(&self, snr_db: f64, config: &InterferenceConfig) -> f64 {
        let erased = config.erased(self.erasure_threshold);
        let total: f64 = erased
            .counts()
            .iter()
            .filter(|&&c| c != InterferenceConfig::ERASED)
            .map(|&c| self.modulation.mutual_information(burst_sinr(snr_db, c)))
            .sum();
        inverse_mutual_information(self.modulation, total / config.len() as f64)
    }

    pub fn capacity_threshold_db(&self) -> f64 {
        inverse_mutual_information(
            self.modulation,
            self.rate * self.modulation.bits_per_symbol(),
        )
    }

    pub fn per(&self, snr_db: f64, config: &InterferenceConfig) -> f64 {
        let margin = self.effective_snr_db(snr_db, config)
            - self.capacity_threshold_db()
            - self.gap_db;
        0.5 * erfc(margin / (self.spread_db * std::f64::consts::SQRT_2))
    }

    /// Solves the gap so that `per(snr_db, config) == target`.
    pub fn calibrate(
        mut self,
        snr_db: f64,
        config: &InterferenceConfig,
        target: f64,
    ) -> Self {
        let q_inv = Normal::standard().inverse_cdf(1.0 - target);
        self.gap_db = self.effective_snr_db(snr_db, config)
            - self.capacity_threshold_db()
            - self.spread_db * q_inv;
        self
    }
}

/// Parameters of the committed anchor-extended table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedTableSpec {
    pub snr_grid_db: Vec<f64>,
    pub max_degree: u32,
    pub turbo_spread_db: f64,
    pub signalling_spread_db: f64,
    /// PER values are floored here so every curve stays log-interpolable.
    pub per_floor: f64,
}

impl Default for ExtendedTableSpec {
    fn default() -> Self {
        Self {
            snr_grid_db: (0..=24).map(|i| i as f64 * 0.5 - 2.0).collect(),
            max_degree: 3,
            turbo_spread_db: 0.25,
            signalling_spread_db: 1.0,
            per_floor: 1e-9,
        }
    }
}

/// Turbo family model, gap solved on the rate-1/6 anchor.
pub fn turbo_family(spec: &ExtendedTableSpec) -> LinkModel {
    let (_, snr, config, per) = anchor_points()
        .into_iter()
        .find(|a| a.0.as_str() == "turbo_r16")
        .expect("rate 1/6 anchor");
    LinkModel {
        modulation: Modulation::Qpsk,
        rate: 1.0 / 6.0,
        gap_db: 0.0,
        spread_db: spec.turbo_spread_db,
        erasure_threshold: DEFAULT_ERASURE_THRESHOLD,
    }
    .calibrate(snr, &config, per)
}

/// RM(14, 64) BPSK model, gap solved on the one-interferer anchor.
pub fn signalling_model(spec: &ExtendedTableSpec) -> LinkModel {
    let (_, snr, config, per) = anchor_points()
        .into_iter()
        .find(|a| a.0.as_str() == SIGNALLING_CODE && a.3 > 1e-3)
        .expect("signalling anchor");
    LinkModel {
        modulation: Modulation::Bpsk,
        rate: 14.0 / 64.0,
        gap_db: 0.0,
        spread_db: spec.signalling_spread_db,
        erasure_threshold: DEFAULT_ERASURE_THRESHOLD,
    }
    .calibrate(snr, &config, per)
}

/// Every sorted multiset of `len` components over `{0..=threshold, e}`.
pub fn canonical_configs(len: usize, threshold: u32) -> Vec<InterferenceConfig> {
    let values: Vec<u32> = (0..=threshold)
        .chain(std::iter::once(InterferenceConfig::ERASED))
        .collect();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(len);
    fn rec(
        values: &[u32],
        start: usize,
        len: usize,
        current: &mut Vec<u32>,
        out: &mut Vec<InterferenceConfig>,
    ) {
        if current.len() == len {
            out.push(InterferenceConfig::from_counts(current.clone()).expect("len >= 1"));
            return;
        }
        for i in start..values.len() {
            current.push(values[i]);
            rec(values, i, len, current, out);
            current.pop();
        }
    }
    rec(&values, 0, len, &mut current, &mut out);
    out
}

/// Builds the anchor-extended table: parametric curves for the signalling
/// code and the turbo codes of degrees `1..=max_degree`, anchors written
/// over the grid values, then every value raised to the maximum over
/// dominated configurations and higher SNRs so that both monotonicity
/// invariants hold.
pub fn extended_table(spec: &ExtendedTableSpec) -> PerTable {
    let thr = DEFAULT_ERASURE_THRESHOLD;
    let turbo = turbo_family(spec);
    let rm = signalling_model(spec);

    // (code, model, config length)
    let mut families: Vec<(CodeId, LinkModel, usize)> =
        vec![(CodeId::new(SIGNALLING_CODE), rm, 1)];
    for d in 1..=spec.max_degree {
        let model = LinkModel {
            rate: 1.0 / (2.0 * d as f64),
            ..turbo
        };
        let code = turbo_code_id(Rate { num: 1, den: 2 * d });
        families.push((code, model, d as usize));
    }

    let anchors = anchor_points();
    let mut table = PerTable::default();
    for (code, model, len) in &families {
        let configs = canonical_configs(*len, thr);
        // grid[c][s]
        let mut grid: Vec<Vec<f64>> = configs
            .iter()
            .map(|c| {
                spec.snr_grid_db
                    .iter()
                    .map(|&s| {
                        let anchored = anchors
                            .iter()
                            .find(|a| &a.0 == code && a.1 == s && &a.2 == c);
                        match anchored {
                            Some(a) => a.3,
                            None => model.per(s, c).clamp(spec.per_floor, 1.0),
                        }
                    })
                    .collect()
            })
            .collect();
        monotone_closure(&configs, &mut grid, thr);
        for (c, row) in configs.iter().zip(&grid) {
            for (&s, &p) in spec.snr_grid_db.iter().zip(row) {
                // round to the precision written to disk
                let p: f64 = format!("{p:.6e}").parse().expect("float");
                table.insert(code, s, c, p).expect("grid points are distinct");
            }
        }
    }
    table
}

/// Raises values until PER is non-increasing in SNR and non-decreasing
/// under configuration dominance. `grid[c][s]` with ascending SNR.
fn monotone_closure(configs: &[InterferenceConfig], grid: &mut [Vec<f64>], thr: u32) {
    let mass = |c: &InterferenceConfig| -> u64 {
        c.counts().iter().map(|&x| x.min(thr + 1) as u64).sum()
    };
    let mut order: Vec<usize> = (0..configs.len()).collect();
    order.sort_by_key(|&i| mass(&configs[i]));
    let n_snr = grid.first().map_or(0, Vec::len);
    for s in (0..n_snr).rev() {
        for &i in &order {
            let mut v = grid[i][s];
            if s + 1 < n_snr {
                v = v.max(grid[i][s + 1]);
            }
            for (j, other) in configs.iter().enumerate() {
                if j != i && configs[i].dominates(other) {
                    v = v.max(grid[j][s]);
                }
            }
            grid[i][s] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(c: &[u32]) -> InterferenceConfig {
        InterferenceConfig::from_counts(c.to_vec()).unwrap()
    }

    #[test]
    fn mutual_information_limits() {
        for m in [Modulation::Bpsk, Modulation::Qpsk] {
            assert!(m.mutual_information(db_to_linear(-30.0)) < 0.01);
            let hi = m.mutual_information(db_to_linear(20.0));
            assert!((hi - m.bits_per_symbol()).abs() < 1e-6, "{hi}");
        }
        // complex baseband: BPSK at Es/N0 = 0 dB sees a real-dimension SNR
        // of 2, where its capacity is 0.721451 bits (numerical quadrature)
        let c = Modulation::Bpsk.mutual_information(1.0);
        assert!((c - 0.721451).abs() < 1e-4, "{c}");
        // QPSK at Es/N0 = x carries twice BPSK at x/2
        let q = Modulation::Qpsk.mutual_information(2.0);
        assert!((q - 2.0 * Modulation::Bpsk.mutual_information(1.0)).abs() < 1e-12);
    }

    #[test]
    fn inverse_round_trip() {
        for db in [-8.0, -2.5, 0.0, 3.0, 7.0] {
            let mi = Modulation::Qpsk.mutual_information(db_to_linear(db));
            let back = inverse_mutual_information(Modulation::Qpsk, mi);
            assert!((back - db).abs() < 1e-6, "{db} -> {back}");
        }
    }

    #[test]
    fn calibrated_models_hit_anchors() {
        let spec = ExtendedTableSpec::default();
        let turbo = turbo_family(&spec);
        assert!((turbo.per(5.0, &cfg(&[1, 2, 3])) - 0.02).abs() < 1e-9);
        let r14 = LinkModel { rate: 0.25, ..turbo };
        assert!(r14.per(5.0, &cfg(&[0, 2])) <= 1e-4);
        assert!(r14.per(5.0, &cfg(&[1, 1])) <= 1e-4);
        let rm = signalling_model(&spec);
        assert!((rm.per(5.0, &cfg(&[1])) - 0.109).abs() < 1e-9);
        assert!(rm.per(5.0, &cfg(&[0])) <= 1e-4);
    }

    #[test]
    fn per_is_monotone_in_snr_and_interference() {
        let turbo = turbo_family(&ExtendedTableSpec::default());
        let mut prev = 1.0;
        for i in 0..40 {
            let p = turbo.per(-2.0 + i as f64 * 0.5, &cfg(&[1, 2, 2]));
            assert!(p <= prev + 1e-15);
            prev = p;
        }
        assert!(turbo.per(4.0, &cfg(&[1, 1, 2])) <= turbo.per(4.0, &cfg(&[1, 2, 2])));
    }

    #[test]
    fn canonical_config_count() {
        // multisets of size k over 4 symbols: C(k + 3, 3)
        assert_eq!(canonical_configs(1, 2).len(), 4);
        assert_eq!(canonical_configs(2, 2).len(), 10);
        assert_eq!(canonical_configs(3, 2).len(), 20);
    }

    #[test]
    fn committed_table_matches_generator() {
        let generated = extended_table(&ExtendedTableSpec::default());
        let committed = super::super::builtin_extended_table();
        for code in generated.code_ids() {
            for len in 1..=3 {
                for c in canonical_configs(len, 2) {
                    for s in ExtendedTableSpec::default().snr_grid_db {
                        let a = generated.lookup(code, s, &c).unwrap();
                        let b = committed.lookup(code, s, &c).unwrap();
                        assert!(
                            (a - b).abs() <= 1e-6 * a.max(b),
                            "{code} {c} {s}: {a} vs {b}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn extended_table_keeps_anchors_exact() {
        let t = extended_table(&ExtendedTableSpec::default());
        t.validate().unwrap();
        for (code, snr, config, per) in anchor_points() {
            assert_eq!(t.lookup(&code, snr, &config).unwrap(), per, "{code} {config}");
        }
    }
}
