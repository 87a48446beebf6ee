//! Two-phase iterative SIC decoder.
//!
//! MuSCA decoding first locates users by decoding signalling fields (a
//! burst is attempted when at most `signalling_max_interferers` other
//! signalling fields share its slot), subtracting every signalling field of
//! a located user. Located users are then decoded from all of their bursts
//! at once, lowest PER first, and their data fields subtracted. The two
//! passes alternate until nothing changes.
//!
//! Replica modes (CRDSA, IRSA, SA) decode a user from any single clean
//! burst; the header inside the replica locates the copies, which are
//! subtracted together.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::frame::{
    Absent, FrameError, FrameState, InterferenceConfig, Layer, ProfileSet, UserId,
    UserTransmission,
};
use crate::per::{PerError, PerLookup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Musca,
    Crdsa,
    Irsa,
    Sa,
}

impl Mode {
    pub fn uses_replicas(self) -> bool {
        !matches!(self, Mode::Musca)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Musca => "musca",
            Mode::Crdsa => "crdsa",
            Mode::Irsa => "irsa",
            Mode::Sa => "sa",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "musca" => Ok(Mode::Musca),
            "crdsa" => Ok(Mode::Crdsa),
            "irsa" => Ok(Mode::Irsa),
            "sa" => Ok(Mode::Sa),
            other => Err(format!(
                "unknown mode {other:?} (expected musca, crdsa, irsa or sa)"
            )),
        }
    }
}

/// When a failed decode attempt may be repeated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RetryRule {
    /// Only once the interference configuration has strictly improved
    /// (componentwise no worse, at least one burst better, after erasure).
    OnImprovement,
    /// Never.
    Never,
}

impl FromStr for RetryRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "on-improvement" => Ok(RetryRule::OnImprovement),
            "never" => Ok(RetryRule::Never),
            other => Err(format!(
                "unknown retry rule {other:?} (expected on-improvement or never)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DecodePolicy {
    pub signalling_max_interferers: u32,
    pub retry: RetryRule,
    pub mode: Mode,
}

impl Default for DecodePolicy {
    fn default() -> Self {
        Self {
            signalling_max_interferers: 1,
            retry: RetryRule::OnImprovement,
            mode: Mode::Musca,
        }
    }
}

impl DecodePolicy {
    pub fn with_mode(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Locate,
    Data,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeEvent {
    pub phase: Phase,
    pub user: UserId,
    pub config: InterferenceConfig,
    pub per: f64,
    pub success: bool,
}

impl fmt::Display for DecodeEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phase = match self.phase {
            Phase::Locate => "locate",
            Phase::Data => "data",
        };
        write!(
            f,
            "{phase} u{} {} per={:.3e} {}",
            self.user,
            self.config,
            self.per,
            if self.success { "ok" } else { "fail" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecodeReport {
    pub decoded: BTreeSet<UserId>,
    pub located: BTreeSet<UserId>,
    pub events: Vec<DecodeEvent>,
    pub deadlock: bool,
    pub iterations: u32,
}

impl DecodeReport {
    pub fn successes(&self, phase: Phase) -> impl Iterator<Item = &DecodeEvent> {
        self.events
            .iter()
            .filter(move |e| e.phase == phase && e.success)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    /// Double subtraction or subtraction of an absent user: a decoder bug.
    #[error("internal invariant violated: {0}")]
    Invariant(#[from] Absent),
    #[error(transparent)]
    Per(#[from] PerError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("degree {0} profile has no signalling code")]
    NoSignallingCode(u32),
}

/// Source of decode attempt outcomes.
pub trait Outcomes {
    /// Whether an attempt with failure probability `per` succeeds.
    fn succeeds(&mut self, per: f64) -> bool;
}

/// Bernoulli draws from an RNG. PER 0 and 1 are decided without a draw.
pub struct RandomDraws<'r, R: ?Sized>(pub &'r mut R);

impl<R: Rng + ?Sized> Outcomes for RandomDraws<'_, R> {
    fn succeeds(&mut self, per: f64) -> bool {
        if per <= 0.0 {
            true
        } else if per >= 1.0 {
            false
        } else {
            self.0.random::<f64>() >= per
        }
    }
}

/// Every attempt succeeds.
#[derive(Debug, Clone, Copy, Default)]
pub struct ForcedSuccess;

impl Outcomes for ForcedSuccess {
    fn succeeds(&mut self, _per: f64) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
struct CachedConfig {
    raw: InterferenceConfig,
    erased: InterferenceConfig,
    per: f64,
}

/// Position of each user id in the user list.
enum IdIndex {
    /// Ids small enough to index a table directly.
    Dense(Vec<Option<usize>>),
    Sparse(HashMap<UserId, usize>),
}

impl IdIndex {
    fn new(users: &[UserTransmission]) -> Self {
        let max = users.iter().map(|u| u.id as usize).max().unwrap_or(0);
        if max <= 4 * users.len() + 64 {
            let mut v = vec![None; max + 1];
            for (i, u) in users.iter().enumerate() {
                v[u.id as usize] = Some(i);
            }
            IdIndex::Dense(v)
        } else {
            IdIndex::Sparse(users.iter().enumerate().map(|(i, u)| (u.id, i)).collect())
        }
    }

    fn get(&self, id: UserId) -> Option<usize> {
        match self {
            IdIndex::Dense(v) => v.get(id as usize).copied().flatten(),
            IdIndex::Sparse(m) => m.get(&id).copied(),
        }
    }
}

/// Decoder state for one frame. [`decode_frame`] drives it to completion;
/// the passes are public for step-by-step use.
pub struct Decoder<'a, 'p> {
    state: &'a mut FrameState,
    users: &'a [UserTransmission],
    per: &'a mut PerLookup<'p>,
    policy: DecodePolicy,
    index: IdIndex,
    data_code: Vec<usize>,
    signalling_code: Vec<Option<usize>>,
    located: Vec<bool>,
    decoded: Vec<bool>,
    /// Per burst: interferer count at the last failed attempt.
    burst_failure: Vec<Vec<Option<u32>>>,
    data_failure: Vec<Option<InterferenceConfig>>,
    cache: Vec<Option<CachedConfig>>,
    report: DecodeReport,
}

impl<'a, 'p> Decoder<'a, 'p> {
    pub fn new(
        state: &'a mut FrameState,
        users: &'a [UserTransmission],
        profiles: &ProfileSet,
        per: &'a mut PerLookup<'p>,
        policy: DecodePolicy,
    ) -> Result<Self, DecodeError> {
        let mut data_code = Vec::with_capacity(users.len());
        let mut signalling_code = Vec::with_capacity(users.len());
        // indexed by degree
        let mut codes: Vec<Option<(usize, Option<usize>)>> = Vec::new();
        for u in users {
            let d = u.degree();
            if codes.len() <= d as usize {
                codes.resize(d as usize + 1, None);
            }
            let (dc, sc) = match codes[d as usize] {
                Some(c) => c,
                None => {
                    let profile = profiles.get(d)?;
                    let dc = per.code_index(&profile.data_code)?;
                    let sc = match (&profile.signalling_code, policy.mode, d) {
                        (Some(code), Mode::Musca, _) => Some(per.code_index(code)?),
                        (None, Mode::Musca, d) if d > 1 => {
                            return Err(DecodeError::NoSignallingCode(d))
                        }
                        _ => None,
                    };
                    codes[d as usize] = Some((dc, sc));
                    (dc, sc)
                }
            };
            data_code.push(dc);
            signalling_code.push(sc);
        }
        let n = users.len();
        Ok(Self {
            state,
            users,
            per,
            policy,
            index: IdIndex::new(users),
            data_code,
            signalling_code,
            located: vec![false; n],
            decoded: vec![false; n],
            burst_failure: users.iter().map(|u| vec![None; u.slots.len()]).collect(),
            data_failure: vec![None; n],
            cache: vec![None; n],
            report: DecodeReport::default(),
        })
    }

    /// Alternates the two passes until an alternation decodes or locates
    /// nothing.
    pub fn run<O: Outcomes>(mut self, outcomes: &mut O) -> Result<DecodeReport, DecodeError> {
        loop {
            self.report.iterations += 1;
            let located = self.locate_pass(outcomes)?;
            let decoded = self.data_pass(outcomes)?;
            if located.is_empty() && decoded.is_empty() {
                break;
            }
        }
        Ok(self.finish())
    }

    pub fn finish(mut self) -> DecodeReport {
        self.report.deadlock = self.decoded.iter().any(|&d| !d);
        self.report
    }

    pub fn report(&self) -> &DecodeReport {
        &self.report
    }

    pub fn state(&self) -> &FrameState {
        self.state
    }

    /// Locates users from their signalling fields; returns the newly
    /// located users. A no-op in replica modes, where the header travels in
    /// the replica and is recovered by [`Self::data_pass`].
    pub fn locate_pass<O: Outcomes>(
        &mut self,
        outcomes: &mut O,
    ) -> Result<Vec<UserId>, DecodeError> {
        let mut newly = Vec::new();
        if self.policy.mode.uses_replicas() {
            return Ok(newly);
        }
        // degree-1 users carry no pointers and locate themselves
        for i in 0..self.users.len() {
            if !self.located[i] && self.users[i].slots.len() == 1 {
                let config = self.state.config_of(&self.users[i], Layer::Signalling);
                self.mark_located(i, config, 0.0, &mut newly)?;
            }
        }
        loop {
            let mut best: Option<(u32, UserId, usize, usize)> = None;
            for (i, u) in self.users.iter().enumerate() {
                if self.located[i] {
                    continue;
                }
                for (b, &slot) in u.slots.iter().enumerate() {
                    let count = self.state.occupants(Layer::Signalling, slot).len() as u32 - 1;
                    if count > self.policy.signalling_max_interferers
                        || !self.burst_retry_allowed(i, b, count)
                    {
                        continue;
                    }
                    let key = (count, u.id, b, i);
                    if best.is_none_or(|cur| (key.0, key.1, key.2) < (cur.0, cur.1, cur.2)) {
                        best = Some(key);
                    }
                }
            }
            let Some((count, _, burst, i)) = best else {
                break;
            };
            let code = self.signalling_code[i].expect("checked in new");
            let config = InterferenceConfig::from_counts(vec![count])?;
            let per = self.per.per(code, &config);
            if per >= 1.0 {
                self.burst_failure[i][burst] = Some(count);
                continue;
            }
            if outcomes.succeeds(per) {
                self.mark_located(i, config, per, &mut newly)?;
            } else {
                self.report.events.push(DecodeEvent {
                    phase: Phase::Locate,
                    user: self.users[i].id,
                    config,
                    per,
                    success: false,
                });
                self.burst_failure[i][burst] = Some(count);
            }
        }
        Ok(newly)
    }

    fn burst_retry_allowed(&self, i: usize, burst: usize, count: u32) -> bool {
        match self.burst_failure[i][burst] {
            None => true,
            Some(failed) => self.policy.retry == RetryRule::OnImprovement && count < failed,
        }
    }

    fn mark_located(
        &mut self,
        i: usize,
        config: InterferenceConfig,
        per: f64,
        newly: &mut Vec<UserId>,
    ) -> Result<(), DecodeError> {
        let user = &self.users[i];
        self.report.events.push(DecodeEvent {
            phase: Phase::Locate,
            user: user.id,
            config,
            per,
            success: true,
        });
        self.state.subtract(user, Layer::Signalling)?;
        self.located[i] = true;
        self.report.located.insert(user.id);
        newly.push(user.id);
        Ok(())
    }

    /// Decodes located users; returns the newly decoded users.
    pub fn data_pass<O: Outcomes>(
        &mut self,
        outcomes: &mut O,
    ) -> Result<Vec<UserId>, DecodeError> {
        if self.policy.mode.uses_replicas() {
            self.replica_data_pass(outcomes)
        } else {
            self.musca_data_pass(outcomes)
        }
    }

    fn musca_data_pass<O: Outcomes>(
        &mut self,
        outcomes: &mut O,
    ) -> Result<Vec<UserId>, DecodeError> {
        let threshold = self.per.table().erasure_threshold();
        let mut newly = Vec::new();
        loop {
            let mut best: Option<(f64, UserId, usize)> = None;
            for i in 0..self.users.len() {
                if !self.located[i] || self.decoded[i] {
                    continue;
                }
                if self.cache[i].is_none() {
                    let raw = self.state.config_of(&self.users[i], Layer::Data);
                    let per = self.per.per(self.data_code[i], &raw);
                    let erased = raw.erased(threshold);
                    self.cache[i] = Some(CachedConfig { raw, erased, per });
                }
                let cached = self.cache[i].as_ref().expect("filled above");
                let allowed = match &self.data_failure[i] {
                    None => true,
                    Some(failed) => {
                        self.policy.retry == RetryRule::OnImprovement
                            && cached.erased.strictly_improves_on(failed)
                    }
                };
                if !allowed || cached.per >= 1.0 {
                    continue;
                }
                let id = self.users[i].id;
                if best.is_none_or(|(p, uid, _)| (cached.per, id) < (p, uid)) {
                    best = Some((cached.per, id, i));
                }
            }
            let Some((per, id, i)) = best else {
                break;
            };
            let cached = self.cache[i].clone().expect("candidate is cached");
            let success = outcomes.succeeds(per);
            self.report.events.push(DecodeEvent {
                phase: Phase::Data,
                user: id,
                config: cached.raw,
                per,
                success,
            });
            if success {
                self.mark_decoded(i)?;
                newly.push(id);
            } else {
                self.data_failure[i] = Some(cached.erased);
            }
        }
        Ok(newly)
    }

    fn replica_data_pass<O: Outcomes>(
        &mut self,
        outcomes: &mut O,
    ) -> Result<Vec<UserId>, DecodeError> {
        let mut newly = Vec::new();
        let clean = InterferenceConfig::from_counts(vec![0])?;
        // indexed by code
        let mut clean_per: Vec<f64> = Vec::new();
        for &code in &self.data_code {
            if clean_per.len() <= code {
                clean_per.resize(code + 1, f64::NAN);
            }
            if clean_per[code].is_nan() {
                clean_per[code] = self.per.per(code, &clean);
            }
        }
        // Clean bursts worth attempting, keyed (per, user id, burst, index).
        // Interference only ever drops, so a burst joins the set when its
        // slot empties and leaves it on decode or failure. PERs are
        // non-negative, so their bit patterns order like the values.
        let mut candidates: BTreeSet<(u64, UserId, usize, usize)> = BTreeSet::new();
        let offer = |me: &Self, i: usize, b: usize, set: &mut BTreeSet<_>| {
            let per = clean_per[me.data_code[i]];
            if !me.decoded[i] && per < 1.0 && me.burst_retry_allowed(i, b, 0) {
                set.insert((per.to_bits(), me.users[i].id, b, i));
            }
        };
        for (i, u) in self.users.iter().enumerate() {
            for (b, &slot) in u.slots.iter().enumerate() {
                if self.state.occupants(Layer::Data, slot).len() == 1 {
                    offer(self, i, b, &mut candidates);
                }
            }
        }
        while let Some((bits, id, burst, i)) = candidates.pop_first() {
            let per = f64::from_bits(bits);
            let success = outcomes.succeeds(per);
            if success {
                self.mark_located(i, clean.clone(), 0.0, &mut Vec::new())?;
            }
            self.report.events.push(DecodeEvent {
                phase: Phase::Data,
                user: id,
                config: clean.clone(),
                per,
                success,
            });
            if !success {
                self.burst_failure[i][burst] = Some(0);
                continue;
            }
            self.mark_decoded(i)?;
            newly.push(id);
            for b in 0..self.users[i].slots.len() {
                candidates.remove(&(bits, id, b, i));
            }
            for &slot in &self.users[i].slots {
                if let [other] = self.state.occupants(Layer::Data, slot) {
                    let j = self.index.get(*other).expect("occupants are frame users");
                    let b = self.users[j]
                        .slots
                        .iter()
                        .position(|&s| s == slot)
                        .expect("occupant has a burst here");
                    offer(self, j, b, &mut candidates);
                }
            }
        }
        Ok(newly)
    }

    fn mark_decoded(&mut self, i: usize) -> Result<(), DecodeError> {
        let user = &self.users[i];
        self.state.subtract(user, Layer::Data)?;
        for &slot in &user.slots {
            for other in self.state.occupants(Layer::Data, slot) {
                if let Some(j) = self.index.get(*other) {
                    self.cache[j] = None;
                }
            }
        }
        self.decoded[i] = true;
        self.report.decoded.insert(user.id);
        Ok(())
    }
}

/// Runs the decoder on one frame to its fixpoint.
pub fn decode_frame<O: Outcomes>(
    state: &mut FrameState,
    users: &[UserTransmission],
    profiles: &ProfileSet,
    per: &mut PerLookup<'_>,
    policy: DecodePolicy,
    outcomes: &mut O,
) -> Result<DecodeReport, DecodeError> {
    Decoder::new(state, users, profiles, per, policy)?.run(outcomes)
}

/// Applies the successful events of a report to a frame: locate successes
/// subtract signalling fields, data successes subtract data fields.
pub fn replay(
    state: &mut FrameState,
    users: &[UserTransmission],
    report: &DecodeReport,
) -> Result<(), Absent> {
    for e in report.events.iter().filter(|e| e.success) {
        let user = users
            .iter()
            .find(|u| u.id == e.user)
            .expect("events name placed users");
        let layer = match e.phase {
            Phase::Locate => Layer::Signalling,
            Phase::Data => Layer::Data,
        };
        state.subtract(user, layer)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{CodeId, Frame};
    use crate::per::{builtin_anchor_table, PerTable};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(
        frame: &Frame,
        table: &PerTable,
        snr: f64,
        policy: DecodePolicy,
        profiles: &ProfileSet,
        seed: u64,
    ) -> (DecodeReport, FrameState) {
        let mut state = frame.state.clone();
        let mut lookup = table.at_snr(snr);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let report = decode_frame(
            &mut state,
            &frame.users,
            profiles,
            &mut lookup,
            policy,
            &mut RandomDraws(&mut rng),
        )
        .unwrap();
        (report, state)
    }

    fn all_codes() -> Vec<CodeId> {
        ["rm_14_64", "turbo_r12", "turbo_r14", "turbo_r16"]
            .map(CodeId::new)
            .to_vec()
    }

    #[test]
    fn empty_frame() {
        let frame = Frame::from_placements(5, []).unwrap();
        let (report, _) = run(
            &frame,
            &builtin_anchor_table(),
            5.0,
            DecodePolicy::default(),
            &ProfileSet::musca(1..=3),
            0,
        );
        assert!(report.events.is_empty());
        assert!(report.decoded.is_empty());
        assert!(!report.deadlock);
    }

    #[test]
    fn worked_example_forced() {
        let frame = crate::scenario::worked_example_frame();
        let mut state = frame.state.clone();
        let table = builtin_anchor_table();
        let mut lookup = table.at_snr(5.0);
        let report = decode_frame(
            &mut state,
            &frame.users,
            &crate::scenario::worked_example_profiles(),
            &mut lookup,
            DecodePolicy::default(),
            &mut ForcedSuccess,
        )
        .unwrap();
        let trace: Vec<String> = report
            .events
            .iter()
            .map(|e| format!("{:?} {} {}", e.phase, e.user, e.config))
            .collect();
        assert_eq!(
            trace,
            [
                "Locate 1 [1]",
                "Locate 4 [0]",
                "Locate 2 [1]",
                "Locate 3 [0]",
                "Data 4 [1 2 3]",
                "Data 1 [0 2]",
                "Data 2 [1 1]",
                "Data 3 [0 0]",
            ]
        );
        assert_eq!(report.events[0].per, 0.109);
        assert_eq!(report.events[4].per, 0.02);
        assert_eq!(report.decoded.len(), 4);
        assert!(!report.deadlock);
    }

    #[test]
    fn two_degree_one_users_on_one_slot_deadlock() {
        let frame = Frame::from_placements(1, [(0, vec![0]), (1, vec![0])]).unwrap();
        let codes = all_codes();
        for mode in [Mode::Musca, Mode::Sa] {
            let (report, _) = run(
                &frame,
                &PerTable::collision_channel(&codes),
                5.0,
                DecodePolicy::with_mode(mode),
                &ProfileSet::musca([1]),
                0,
            );
            assert!(report.decoded.is_empty());
            assert!(report.deadlock);
        }
    }

    #[test]
    fn degree_one_users_locate_immediately() {
        let frame = Frame::from_placements(2, [(0, vec![0]), (1, vec![0]), (2, vec![0])]).unwrap();
        let (report, _) = run(
            &frame,
            &PerTable::collision_channel(&all_codes()),
            5.0,
            DecodePolicy::default(),
            &ProfileSet::musca([1]),
            0,
        );
        assert_eq!(report.located.len(), 3);
    }

    #[test]
    fn no_signalling_attempt_with_two_interferers() {
        let frame =
            Frame::from_placements(2, [(0, vec![0, 1]), (1, vec![0, 1]), (2, vec![0, 1])]).unwrap();
        let (report, _) = run(
            &frame,
            &builtin_anchor_table(),
            5.0,
            DecodePolicy::default(),
            &ProfileSet::musca([2]),
            0,
        );
        assert!(report.events.is_empty());
        assert!(report.deadlock);
        let loose = DecodePolicy {
            signalling_max_interferers: 2,
            ..DecodePolicy::default()
        };
        let mut t = builtin_anchor_table();
        t.insert(&CodeId::new("rm_14_64"), 5.0, &InterferenceConfig::from_counts(vec![2]).unwrap(), 0.5)
            .unwrap();
        let (report, _) = run(&frame, &t, 5.0, loose, &ProfileSet::musca([2]), 0);
        assert!(!report.events.is_empty());
    }

    #[test]
    fn fully_erased_user_is_never_attempted() {
        // user 0 has both bursts under three interferers each; the others
        // are stuck too, so nothing is ever attempted in the data phase
        let placements = [
            (0, vec![0, 1]),
            (1, vec![0, 1]),
            (2, vec![0, 1]),
            (3, vec![0, 1]),
        ];
        let frame = Frame::from_placements(2, placements).unwrap();
        let mut state = frame.state.clone();
        let table = builtin_anchor_table();
        let mut lookup = table.at_snr(5.0);
        let profiles = ProfileSet::musca([2]);
        let mut dec = Decoder::new(
            &mut state,
            &frame.users,
            &profiles,
            &mut lookup,
            DecodePolicy::default(),
        )
        .unwrap();
        // pretend every user was located
        for i in 0..4 {
            dec.located[i] = true;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let decoded = dec.data_pass(&mut RandomDraws(&mut rng)).unwrap();
        assert!(decoded.is_empty());
        assert!(dec.report().events.is_empty());
    }

    #[test]
    fn failed_data_attempt_waits_for_improvement() {
        let mut t = builtin_anchor_table();
        t.merge(&PerTable::collision_channel(&[CodeId::new("turbo_r12")]))
            .unwrap();
        // user 0 sees [1 1] (PER 1e-4); the first attempt is forced to fail
        struct FailFirst(bool);
        impl Outcomes for FailFirst {
            fn succeeds(&mut self, _per: f64) -> bool {
                std::mem::replace(&mut self.0, true)
            }
        }
        let frame = Frame::from_placements(2, [(0, vec![0, 1]), (1, vec![0]), (2, vec![1])]).unwrap();
        let mut state = frame.state.clone();
        let mut lookup = t.at_snr(5.0);
        let profiles = ProfileSet::musca([1, 2]);
        let mut dec = Decoder::new(&mut state, &frame.users, &profiles, &mut lookup, DecodePolicy::default()).unwrap();
        dec.located[0] = true;
        let mut outcomes = FailFirst(false);
        dec.data_pass(&mut outcomes).unwrap();
        assert_eq!(dec.report().events.len(), 1);
        assert!(!dec.report().events[0].success);
        // no improvement: a second pass makes no attempt
        dec.data_pass(&mut outcomes).unwrap();
        assert_eq!(dec.report().events.len(), 1);
    }

    #[test]
    fn replay_reproduces_final_state() {
        let frame = crate::scenario::worked_example_frame();
        for seed in 0..50 {
            let (report, final_state) = run(
                &frame,
                &builtin_anchor_table(),
                5.0,
                DecodePolicy::default(),
                &crate::scenario::worked_example_profiles(),
                seed,
            );
            let mut replayed = frame.state.clone();
            replay(&mut replayed, &frame.users, &report).unwrap();
            assert_eq!(replayed, final_state);
            assert!(report.decoded.is_subset(&report.located));
        }
    }

    #[test]
    fn replica_mode_decodes_clean_bursts_only() {
        // user 0 clean on slot 2; removing it frees user 1 on slot 0
        let frame = Frame::from_placements(
            3,
            [(0, vec![0, 2]), (1, vec![0, 1]), (2, vec![1])],
        )
        .unwrap();
        let codes = all_codes();
        let (report, _) = run(
            &frame,
            &PerTable::collision_channel(&codes),
            5.0,
            DecodePolicy::with_mode(Mode::Crdsa),
            &ProfileSet::replica([1, 2]),
            0,
        );
        assert_eq!(report.decoded, [0, 1, 2].into());
        let order: Vec<UserId> = report.successes(Phase::Data).map(|e| e.user).collect();
        assert_eq!(order, [0, 1, 2]);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("CRDSA".parse::<Mode>(), Ok(Mode::Crdsa));
        assert!("aloha".parse::<Mode>().is_err());
        assert_eq!(Mode::Irsa.to_string(), "irsa");
        assert_eq!("never".parse::<RetryRule>(), Ok(RetryRule::Never));
    }

    #[test]
    fn missing_code_is_an_error() {
        let frame = Frame::from_placements(2, [(0, vec![0])]).unwrap();
        let mut state = frame.state.clone();
        let table = builtin_anchor_table();
        let mut lookup = table.at_snr(5.0);
        let r = decode_frame(
            &mut state,
            &frame.users,
            &ProfileSet::musca([1]),
            &mut lookup,
            DecodePolicy::default(),
            &mut ForcedSuccess,
        );
        assert_eq!(r, Err(DecodeError::Per(PerError::UnknownCode("turbo_r12".into()))));
    }
}
