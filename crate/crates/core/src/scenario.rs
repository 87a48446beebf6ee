//! Four users on a three-slot frame, none of them on a clean slot.
//!
//! Users 1 to 3 have degree 2 (rate 1/4), user 4 has degree 3 (rate 1/6)
//! and occupies every slot:
//!
//! ```text
//! slot 1: u1 u4
//! slot 2: u1 u2 u3 u4
//! slot 3: u2 u3 u4
//! ```
//!
//! At 5 dB the decoder locates u1, u4, u2, u3 and then decodes u4 from
//! `[1 2 3]`, u1 from `[0 2]`, u2 from `[1 1]` and u3 from `[0 0]`.

use crate::decoder::{decode_frame, DecodeError, DecodePolicy, DecodeReport, Outcomes, Phase};
use crate::frame::{Frame, ProfileSet, UserId};
use crate::per::builtin_anchor_table;

pub const SNR_DB: f64 = 5.0;

pub fn worked_example_frame() -> Frame {
    Frame::from_placements(
        3,
        [
            (1, vec![0, 1]),
            (2, vec![1, 2]),
            (3, vec![1, 2]),
            (4, vec![0, 1, 2]),
        ],
    )
    .expect("fixed placement is valid")
}

pub fn worked_example_profiles() -> ProfileSet {
    ProfileSet::musca([2, 3])
}

/// Successful events expected when every attempt succeeds.
pub const EXPECTED_TRACE: [(Phase, UserId, &str); 8] = [
    (Phase::Locate, 1, "[1]"),
    (Phase::Locate, 4, "[0]"),
    (Phase::Locate, 2, "[1]"),
    (Phase::Locate, 3, "[0]"),
    (Phase::Data, 4, "[1 2 3]"),
    (Phase::Data, 1, "[0 2]"),
    (Phase::Data, 2, "[1 1]"),
    (Phase::Data, 3, "[0 0]"),
];

/// Decodes the example with the anchor table at 5 dB.
pub fn run_worked_example<O: Outcomes>(outcomes: &mut O) -> Result<(Frame, DecodeReport), DecodeError> {
    let frame = worked_example_frame();
    let mut state = frame.state.clone();
    let table = builtin_anchor_table();
    let mut lookup = table.at_snr(SNR_DB);
    let report = decode_frame(
        &mut state,
        &frame.users,
        &worked_example_profiles(),
        &mut lookup,
        DecodePolicy::default(),
        outcomes,
    )?;
    Ok((frame, report))
}

/// Whether the successful events of `report` are exactly [`EXPECTED_TRACE`].
pub fn follows_expected_trace(report: &DecodeReport) -> bool {
    let got: Vec<(Phase, UserId, String)> = report
        .events
        .iter()
        .filter(|e| e.success)
        .map(|e| (e.phase, e.user, e.config.to_string()))
        .collect();
    got.len() == EXPECTED_TRACE.len()
        && got
            .iter()
            .zip(EXPECTED_TRACE)
            .all(|(g, e)| g.0 == e.0 && g.1 == e.1 && g.2 == e.2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::{ForcedSuccess, RandomDraws};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn forced_run_follows_trace() {
        let (_, report) = run_worked_example(&mut ForcedSuccess).unwrap();
        assert!(follows_expected_trace(&report));
    }

    #[test]
    fn stochastic_runs_are_seed_deterministic() {
        for seed in 0..20 {
            let a = run_worked_example(&mut RandomDraws(&mut ChaCha8Rng::seed_from_u64(seed)))
                .unwrap()
                .1;
            let b = run_worked_example(&mut RandomDraws(&mut ChaCha8Rng::seed_from_u64(seed)))
                .unwrap()
                .1;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn first_locate_success_probability() {
        // locating u1 first succeeds with probability 1 - 0.109
        let n = 20_000;
        let mut first_ok = 0;
        for seed in 0..n {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (_, report) = run_worked_example(&mut RandomDraws(&mut rng)).unwrap();
            let e = &report.events[0];
            assert_eq!((e.user, e.per), (1, 0.109));
            first_ok += usize::from(e.success);
        }
        let p = first_ok as f64 / n as f64;
        assert!((p - 0.891).abs() < 0.01, "{p}");
    }
}
