//! Frames, users, bursts and degree distributions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

pub type UserId = u32;

const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("degree distribution is empty")]
    EmptyDistribution,
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("degree {0} appears more than once")]
    DuplicateDegree(u32),
    #[error("probability {prob} for degree {degree} is outside [0, 1]")]
    BadProbability { degree: u32, prob: f64 },
    #[error("probabilities sum to {0}, expected 1")]
    BadTotal(f64),
    #[error("cannot parse degree distribution {0:?}: expected \"d1:p1,d2:p2,...\"")]
    Parse(String),
    #[error("degree {degree} exceeds the {slots} slots of the frame")]
    DegreeTooLarge { degree: u32, slots: usize },
    #[error("frame must have at least one slot")]
    NoSlots,
    #[error("no code profile for degree {0}")]
    MissingProfile(u32),
    #[error("slot {slot} is out of range for a frame of {slots} slots")]
    SlotOutOfRange { slot: usize, slots: usize },
    #[error("user {0} places two bursts on the same slot")]
    RepeatedSlot(UserId),
    #[error("user id {0} appears twice")]
    DuplicateUser(UserId),
    #[error("interference configuration must have at least one burst")]
    EmptyConfig,
    #[error("invalid rate {0}/{1}")]
    BadRate(u32, u32),
    #[error("data field length {0} is not a whole number of symbols")]
    FractionalDataField(f64),
}

/// Probability mass over user degrees: the coefficient of `x^d` is the
/// probability that a user transmits `d` bursts.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    entries: Vec<(u32, f64)>,
    cumulative: Vec<f64>,
}

impl DegreeDistribution {
    pub fn new(mut entries: Vec<(u32, f64)>) -> Result<Self, FrameError> {
        if entries.is_empty() {
            return Err(FrameError::EmptyDistribution);
        }
        entries.sort_by_key(|&(d, _)| d);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(FrameError::DuplicateDegree(w[0].0));
            }
        }
        let mut total = 0.0;
        for &(degree, prob) in &entries {
            if degree == 0 {
                return Err(FrameError::ZeroDegree);
            }
            if !(0.0..=1.0).contains(&prob) {
                return Err(FrameError::BadProbability { degree, prob });
            }
            total += prob;
        }
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(FrameError::BadTotal(total));
        }
        let mut acc = 0.0;
        let cumulative = entries
            .iter()
            .map(|&(_, p)| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            entries,
            cumulative,
        })
    }

    /// Every user has degree `d`.
    pub fn regular(degree: u32) -> Result<Self, FrameError> {
        Self::new(vec![(degree, 1.0)])
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn probability(&self, degree: u32) -> f64 {
        self.entries
            .iter()
            .find(|&&(d, _)| d == degree)
            .map_or(0.0, |&(_, p)| p)
    }

    /// Largest degree with non-zero probability.
    pub fn max_degree(&self) -> u32 {
        self.support().max().unwrap_or(0)
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().filter(|e| e.1 > 0.0).map(|e| e.0)
    }

    pub fn mean_degree(&self) -> f64 {
        self.entries.iter().map(|&(d, p)| d as f64 * p).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        for (i, &c) in self.cumulative.iter().enumerate() {
            if u < c && self.entries[i].1 > 0.0 {
                return self.entries[i].0;
            }
        }
        // u landed on the rounding slack above the last positive mass
        self.max_degree()
    }
}

impl fmt::Display for DegreeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|&(d, p)| format!("{d}:{p}"))
            .collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for DegreeDistribution {
    type Err = FrameError;

    /// Parses `"1:0.1,2:0.3,3:0.6"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FrameError::Parse(s.to_string());
        let mut entries = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (d, p) = part.split_once(':').ok_or_else(bad)?;
            let d: u32 = d.trim().parse().map_err(|_| bad())?;
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            entries.push((d, p));
        }
        Self::new(entries)
    }
}

/// A positive rational code rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rate {
    pub num: u32,
    pub den: u32,
}

impl Rate {
    pub fn new(num: u32, den: u32) -> Result<Self, FrameError> {
        if num == 0 || den == 0 || num > den {
            return Err(FrameError::BadRate(num, den));
        }
        Ok(Self { num, den })
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Opaque identifier naming a code in a [`crate::PerTable`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodeId(pub String);

impl CodeId {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Code id of the Reed-Muller (14, 64) code protecting signalling fields.
pub const SIGNALLING_CODE: &str = "rm_14_64";

/// Turbo data code of rate `1/den`, e.g. `turbo_r16` for rate 1/6.
pub fn turbo_code_id(rate: Rate) -> CodeId {
    CodeId(format!("turbo_r{}{}", rate.num, rate.den))
}

/// Code parameters a user of a given degree transmits with.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeProfile {
    pub degree: u32,
    pub data_rate: Rate,
    pub info_bits: u32,
    pub modulation_order: u32,
    /// `None` for users whose signalling field is empty (degree 1) or
    /// whose header is carried inside every replica.
    pub signalling_rate: Option<Rate>,
    pub data_code: CodeId,
    pub signalling_code: Option<CodeId>,
}

impl CodeProfile {
    /// Turbo-coded QPSK profile with `R_d = 1/(2 N_b)` and `k = 456`, and the
    /// RM(14, 64) signalling code for degrees above one.
    pub fn musca(degree: u32) -> Self {
        let data_rate = Rate {
            num: 1,
            den: 2 * degree,
        };
        let (signalling_rate, signalling_code) = if degree > 1 {
            (
                Some(Rate { num: 14, den: 64 }),
                Some(CodeId::new(SIGNALLING_CODE)),
            )
        } else {
            (None, None)
        };
        Self {
            degree,
            data_rate,
            info_bits: 456,
            modulation_order: 4,
            signalling_rate,
            data_code: turbo_code_id(data_rate),
            signalling_code,
        }
    }

    /// Replica profile: every burst carries a full rate-1/2 copy of the
    /// packet, so a single clean burst is decoded with the rate-1/2 code.
    pub fn replica(degree: u32) -> Self {
        let copy_rate = Rate { num: 1, den: 2 };
        Self {
            degree,
            data_rate: Rate {
                num: 1,
                den: 2 * degree,
            },
            info_bits: 456,
            modulation_order: 4,
            signalling_rate: None,
            data_code: turbo_code_id(copy_rate),
            signalling_code: None,
        }
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.modulation_order.ilog2()
    }

    /// Data field length `k / (R_d * N_b * log2 M)` in symbols.
    pub fn data_field_symbols(&self) -> Result<u32, FrameError> {
        let num = self.info_bits as u64 * self.data_rate.den as u64;
        let den = self.data_rate.num as u64 * self.degree as u64 * self.bits_per_symbol() as u64;
        if den == 0 || num % den != 0 {
            return Err(FrameError::FractionalDataField(num as f64 / den as f64));
        }
        Ok((num / den) as u32)
    }
}

/// Degree → code profile map.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProfileSet {
    by_degree: BTreeMap<u32, CodeProfile>,
}

impl ProfileSet {
    pub fn new(profiles: impl IntoIterator<Item = CodeProfile>) -> Self {
        Self {
            by_degree: profiles.into_iter().map(|p| (p.degree, p)).collect(),
        }
    }

    pub fn musca(degrees: impl IntoIterator<Item = u32>) -> Self {
        Self::new(degrees.into_iter().map(CodeProfile::musca))
    }

    pub fn replica(degrees: impl IntoIterator<Item = u32>) -> Self {
        Self::new(degrees.into_iter().map(CodeProfile::replica))
    }

    pub fn get(&self, degree: u32) -> Result<&CodeProfile, FrameError> {
        self.by_degree
            .get(&degree)
            .ok_or(FrameError::MissingProfile(degree))
    }

    pub fn iter(&self) -> impl Iterator<Item = &CodeProfile> {
        self.by_degree.values()
    }

    /// Checks that every degree the distribution can draw has a profile.
    pub fn covers(&self, dist: &DegreeDistribution) -> Result<(), FrameError> {
        for d in dist.support() {
            self.get(d)?;
        }
        Ok(())
    }
}

/// One user's bursts: `slots[i]` is the slot index of burst `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserTransmission {
    pub id: UserId,
    pub slots: Vec<usize>,
}

impl UserTransmission {
    pub fn degree(&self) -> u32 {
        self.slots.len() as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    Signalling,
    Data,
}

/// Which users still occupy each slot, tracked separately for signalling
/// fields and data fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameState {
    signalling: Vec<Vec<UserId>>,
    data: Vec<Vec<UserId>>,
}

impl FrameState {
    pub fn empty(slots: usize) -> Self {
        Self {
            signalling: vec![Vec::new(); slots],
            data: vec![Vec::new(); slots],
        }
    }

    pub fn slots(&self) -> usize {
        self.data.len()
    }

    pub fn layer(&self, layer: Layer) -> &[Vec<UserId>] {
        match layer {
            Layer::Signalling => &self.signalling,
            Layer::Data => &self.data,
        }
    }

    fn layer_mut(&mut self, layer: Layer) -> &mut [Vec<UserId>] {
        match layer {
            Layer::Signalling => &mut self.signalling,
            Layer::Data => &mut self.data,
        }
    }

    pub fn occupants(&self, layer: Layer, slot: usize) -> &[UserId] {
        &self.layer(layer)[slot]
    }

    pub fn occupancy(&self, layer: Layer) -> Vec<usize> {
        self.layer(layer).iter().map(Vec::len).collect()
    }

    /// Sum of set sizes over both layers.
    pub fn interferer_mass(&self) -> usize {
        self.signalling.iter().chain(&self.data).map(Vec::len).sum()
    }

    fn place(&mut self, user: &UserTransmission) {
        for &s in &user.slots {
            self.signalling[s].push(user.id);
            self.data[s].push(user.id);
        }
    }

    /// Removes `user` from the given layer at each of its slots. Fails
    /// without modifying anything if the user is absent from any of them.
    pub fn subtract(&mut self, user: &UserTransmission, layer: Layer) -> Result<(), Absent> {
        let sets = self.layer_mut(layer);
        for &s in &user.slots {
            if !sets.get(s).is_some_and(|set| set.contains(&user.id)) {
                return Err(Absent {
                    user: user.id,
                    slot: s,
                    layer,
                });
            }
        }
        for &s in &user.slots {
            sets[s].retain(|&u| u != user.id);
        }
        Ok(())
    }

    /// Burst-by-burst count of other users still present in the layer.
    pub fn config_of(&self, user: &UserTransmission, layer: Layer) -> InterferenceConfig {
        let sets = self.layer(layer);
        let counts = user
            .slots
            .iter()
            .map(|&s| {
                let set = &sets[s];
                (set.len() - usize::from(set.contains(&user.id))) as u32
            })
            .collect();
        InterferenceConfig::from_counts(counts).expect("users have at least one burst")
    }
}

/// A subtraction hit a slot where the user was not present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("user {user} is not present on slot {slot} of the {layer:?} layer")]
pub struct Absent {
    pub user: UserId,
    pub slot: usize,
    pub layer: Layer,
}

/// A built frame: the occupancy state plus every user's placement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub state: FrameState,
    pub users: Vec<UserTransmission>,
}

impl Frame {
    /// Builds a frame from explicit placements.
    pub fn from_placements(
        slots: usize,
        placements: impl IntoIterator<Item = (UserId, Vec<usize>)>,
    ) -> Result<Self, FrameError> {
        if slots == 0 {
            return Err(FrameError::NoSlots);
        }
        let mut state = FrameState::empty(slots);
        let mut users: Vec<UserTransmission> = Vec::new();
        for (id, user_slots) in placements {
            if user_slots.is_empty() {
                return Err(FrameError::ZeroDegree);
            }
            if users.iter().any(|u| u.id == id) {
                return Err(FrameError::DuplicateUser(id));
            }
            for (i, &s) in user_slots.iter().enumerate() {
                if s >= slots {
                    return Err(FrameError::SlotOutOfRange { slot: s, slots });
                }
                if user_slots[..i].contains(&s) {
                    return Err(FrameError::RepeatedSlot(id));
                }
            }
            let user = UserTransmission {
                id,
                slots: user_slots,
            };
            state.place(&user);
            users.push(user);
        }
        Ok(Self { state, users })
    }

    pub fn total_bursts(&self) -> usize {
        self.users.iter().map(|u| u.slots.len()).sum()
    }
}

/// Draws a degree for each of `users` users, then a uniformly random set of
/// that many distinct slots.
pub fn build_frame<R: Rng + ?Sized>(
    users: usize,
    slots: usize,
    dist: &DegreeDistribution,
    profiles: &ProfileSet,
    rng: &mut R,
) -> Result<Frame, FrameError> {
    if slots == 0 {
        return Err(FrameError::NoSlots);
    }
    let max = dist.max_degree();
    if max as usize > slots {
        return Err(FrameError::DegreeTooLarge { degree: max, slots });
    }
    profiles.covers(dist)?;
    let mut state = FrameState::empty(slots);
    let mut placed = Vec::with_capacity(users);
    for id in 0..users {
        let degree = dist.sample(rng);
        let user = UserTransmission {
            id: id as UserId,
            slots: index::sample(rng, slots, degree as usize).into_vec(),
        };
        state.place(&user);
        placed.push(user);
    }
    Ok(Frame {
        state,
        users: placed,
    })
}

/// Per-burst interferer counts of one user, sorted ascending.
///
/// [`InterferenceConfig::ERASED`] marks a burst dropped by the erasure rule;
/// it sorts after every count.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InterferenceConfig(Vec<u32>);

impl InterferenceConfig {
    pub const ERASED: u32 = u32::MAX;

    pub fn from_counts(mut counts: Vec<u32>) -> Result<Self, FrameError> {
        if counts.is_empty() {
            return Err(FrameError::EmptyConfig);
        }
        counts.sort_unstable();
        Ok(Self(counts))
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_all_clean(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn has_clean(&self) -> bool {
        self.0.first() == Some(&0)
    }

    /// Replaces every count above `threshold` with [`Self::ERASED`].
    pub fn erased(&self, threshold: u32) -> Self {
        let mut v: Vec<u32> = self
            .0
            .iter()
            .map(|&c| if c > threshold { Self::ERASED } else { c })
            .collect();
        v.sort_unstable();
        Self(v)
    }

    /// Componentwise `self >= other` on the sorted forms (same length).
    pub fn dominates(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    /// `self <= other` componentwise with at least one strict inequality.
    pub fn strictly_improves_on(&self, other: &Self) -> bool {
        other.dominates(self) && self != other
    }
}

impl fmt::Display for InterferenceConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, &c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if c == Self::ERASED {
                f.write_str("e")?;
            } else {
                write!(f, "{c}")?;
            }
        }
        f.write_str("]")
    }
}

/// Coded signalling length: `ceil(log2 N_s) * (N_b - 1) / R_s` bits, rounded up
/// to whole bits.
pub fn signalling_length_bits(slots: usize, degree: u32, rate: Rate) -> u64 {
    if degree <= 1 {
        return 0;
    }
    let pointer_bits = pointer_bits(slots) as u64 * (degree as u64 - 1);
    (pointer_bits * rate.den as u64).div_ceil(rate.num as u64)
}

/// Bits needed to address one of `slots` slots.
pub fn pointer_bits(slots: usize) -> u32 {
    if slots <= 1 {
        0
    } else {
        usize::BITS - (slots - 1).leading_zeros()
    }
}
