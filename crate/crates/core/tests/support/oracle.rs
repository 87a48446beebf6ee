//! Exhaustive peeling reference for loss-free decoding.
//!
//! Placements are plain slot lists; the reference never touches the
//! crate's frame state, interference configurations or decoder.

#![allow(dead_code)]

use musca::decoder::{decode_frame, DecodePolicy, ForcedSuccess, Mode};
use musca::per::PerTable;
use musca::{CodeId, Frame, ProfileSet};

/// How attempts are judged in the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// Every attempt that is made succeeds.
    Ideal,
    /// An attempt succeeds iff every burst it relies on is alone.
    Collision,
}

fn others_on(slot: usize, me: usize, placements: &[Vec<usize>], alive: &[bool]) -> usize {
    placements
        .iter()
        .enumerate()
        .filter(|&(v, p)| v != me && alive[v] && p.contains(&slot))
        .count()
}

/// Replica peeling: a user is recovered from any burst that is alone among
/// the unrecovered users, which then frees its other slots.
pub fn replica_peel(placements: &[Vec<usize>]) -> Vec<bool> {
    let n = placements.len();
    let mut pending = vec![true; n];
    loop {
        let hit = (0..n).find(|&u| {
            pending[u]
                && placements[u]
                    .iter()
                    .any(|&s| others_on(s, u, placements, &pending) == 0)
        });
        match hit {
            Some(u) => pending[u] = false,
            None => break,
        }
    }
    pending.iter().map(|p| !p).collect()
}

/// Two-layer peeling. A user with more than one burst is located through a
/// header on a slot shared with at most `max_headers` other unlocated
/// multi-burst users (none at all on the collision channel); single-burst
/// users need no header. Located users are decoded on the ideal channel, and
/// on the collision channel only once all their slots are free of other
/// undecoded users.
pub fn two_layer_peel(placements: &[Vec<usize>], max_headers: usize, channel: Channel) -> Vec<bool> {
    let n = placements.len();
    let mut unlocated: Vec<bool> = placements.iter().map(|p| p.len() > 1).collect();
    let mut undecoded = vec![true; n];
    let header_limit = match channel {
        Channel::Ideal => max_headers,
        Channel::Collision => 0,
    };
    loop {
        let mut changed = false;
        for u in 0..n {
            if unlocated[u]
                && placements[u]
                    .iter()
                    .any(|&s| others_on(s, u, placements, &unlocated) <= header_limit)
            {
                unlocated[u] = false;
                changed = true;
            }
        }
        for u in 0..n {
            if unlocated[u] || !undecoded[u] {
                continue;
            }
            let ok = match channel {
                Channel::Ideal => true,
                Channel::Collision => placements[u]
                    .iter()
                    .all(|&s| others_on(s, u, placements, &undecoded) == 0),
            };
            if ok {
                undecoded[u] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    undecoded.iter().map(|p| !p).collect()
}

/// All non-empty slot subsets of size at most `max_degree`.
pub fn slot_subsets(slots: usize, max_degree: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << slots))
        .filter(|m| m.count_ones() as usize <= max_degree)
        .map(|m| (0..slots).filter(|&s| m & (1 << s) != 0).collect())
        .collect()
}

/// Calls `f` for every assignment of subsets to `users` users.
pub fn for_each_placement(subsets: &[Vec<usize>], users: usize, f: &mut impl FnMut(&[Vec<usize>])) {
    let mut idx = vec![0usize; users];
    loop {
        let p: Vec<Vec<usize>> = idx.iter().map(|&i| subsets[i].clone()).collect();
        f(&p);
        let mut k = 0;
        loop {
            if k == users {
                return;
            }
            idx[k] += 1;
            if idx[k] < subsets.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

const CODES: [&str; 4] = ["rm_14_64", "turbo_r12", "turbo_r14", "turbo_r16"];

pub fn table(channel: Channel) -> PerTable {
    let codes: Vec<CodeId> = CODES.iter().map(|&c| CodeId::new(c)).collect();
    match channel {
        Channel::Ideal => PerTable::ideal(&codes),
        Channel::Collision => PerTable::collision_channel(&codes),
    }
}

/// Users the crate's decoder recovers, in placement order.
pub fn decoder_outcome(
    slots: usize,
    placements: &[Vec<usize>],
    policy: DecodePolicy,
    table: &PerTable,
) -> Vec<bool> {
    let frame = Frame::from_placements(
        slots,
        placements.iter().enumerate().map(|(i, p)| (i as u32 + 1, p.clone())),
    )
    .expect("enumerated placements are valid");
    let profiles = if policy.mode.uses_replicas() {
        ProfileSet::replica([1, 2, 3])
    } else {
        ProfileSet::musca([1, 2, 3])
    };
    let mut state = frame.state.clone();
    let mut lookup = table.at_snr(5.0);
    let report = decode_frame(
        &mut state,
        &frame.users,
        &profiles,
        &mut lookup,
        policy,
        &mut ForcedSuccess,
    )
    .expect("decoding never errors");
    (1..=placements.len() as u32)
        .map(|id| report.decoded.contains(&id))
        .collect()
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Tally {
    pub frames: u64,
    pub disagreements: u64,
}

/// Compares decoder and reference on every frame with up to `max_slots`
/// slots, `max_users` users and degree at most 3.
pub fn compare_all(
    max_slots: usize,
    max_users: usize,
    policy: DecodePolicy,
    channel: Channel,
) -> Tally {
    compare_all_up_to_degree(max_slots, max_users, 3, policy, channel)
}

pub fn compare_all_up_to_degree(
    max_slots: usize,
    max_users: usize,
    max_degree: usize,
    policy: DecodePolicy,
    channel: Channel,
) -> Tally {
    let table = table(channel);
    let mut t = Tally::default();
    for slots in 1..=max_slots {
        let subsets = slot_subsets(slots, max_degree);
        for users in 0..=max_users {
            for_each_placement(&subsets, users, &mut |p| {
                let want = match policy.mode {
                    Mode::Musca => two_layer_peel(p, policy.signalling_max_interferers as usize, channel),
                    _ => replica_peel(p),
                };
                let got = decoder_outcome(slots, p, policy, &table);
                t.frames += 1;
                if got != want {
                    t.disagreements += 1;
                }
            });
        }
    }
    t
}
