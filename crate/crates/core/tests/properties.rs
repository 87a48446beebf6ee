use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use musca::decoder::{decode_frame, replay, DecodePolicy, Mode, RandomDraws};
use musca::per::builtin_extended_table;
use musca::{build_frame, CodeId, DegreeDistribution, InterferenceConfig, Layer, ProfileSet};

const E: u32 = InterferenceConfig::ERASED;

fn config() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(prop_oneof![0u32..6, Just(E)], 1..=3)
}

fn code_for(len: usize) -> CodeId {
    CodeId::new(["turbo_r12", "turbo_r14", "turbo_r16"][len - 1])
}

proptest! {
    #[test]
    fn canonical_form_ignores_order(mut counts in config()) {
        let a = InterferenceConfig::from_counts(counts.clone()).unwrap();
        counts.reverse();
        let b = InterferenceConfig::from_counts(counts).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn lookups_are_probabilities(counts in config(), snr in -10.0f64..20.0) {
        let t = builtin_extended_table();
        let c = InterferenceConfig::from_counts(counts.clone()).unwrap();
        let p = t.lookup(&code_for(counts.len()), snr, &c).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        if counts.len() == 1 {
            let p = t.lookup(&CodeId::new("rm_14_64"), snr, &c).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn per_falls_with_snr(counts in config(), a in -4.0f64..12.0, b in -4.0f64..12.0) {
        let t = builtin_extended_table();
        let c = InterferenceConfig::from_counts(counts.clone()).unwrap();
        let code = code_for(counts.len());
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(t.lookup(&code, hi, &c).unwrap() <= t.lookup(&code, lo, &c).unwrap());
    }

    #[test]
    fn per_rises_with_interference(counts in config(), bump in 0usize..3, snr in -4.0f64..12.0) {
        let t = builtin_extended_table();
        let code = code_for(counts.len());
        let mut worse = counts.clone();
        let i = bump % worse.len();
        worse[i] = worse[i].saturating_add(1);
        let c = InterferenceConfig::from_counts(counts).unwrap();
        let w = InterferenceConfig::from_counts(worse).unwrap();
        prop_assert!(t.lookup(&code, snr, &w).unwrap() >= t.lookup(&code, snr, &c).unwrap());
    }

    #[test]
    fn counts_above_threshold_are_interchangeable(
        counts in config(), pick in 0usize..3, big in 3u32..1000, snr in 0.0f64..10.0
    ) {
        let t = builtin_extended_table();
        let code = code_for(counts.len());
        let mut other = counts.clone();
        let i = pick % other.len();
        if other[i] > 2 {
            other[i] = big;
        }
        let a = InterferenceConfig::from_counts(counts).unwrap();
        let b = InterferenceConfig::from_counts(other).unwrap();
        prop_assert_eq!(t.lookup(&code, snr, &a).unwrap(), t.lookup(&code, snr, &b).unwrap());
    }

    #[test]
    fn frames_conserve_bursts(seed in any::<u64>(), users in 0usize..60, slots in 3usize..40) {
        let dist: DegreeDistribution = "1:0.2,2:0.3,3:0.5".parse().unwrap();
        let profiles = ProfileSet::musca([1, 2, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame = build_frame(users, slots, &dist, &profiles, &mut rng).unwrap();
        prop_assert_eq!(frame.users.len(), users);
        let bursts: usize = frame.users.iter().map(|u| u.slots.len()).sum();
        for layer in [Layer::Signalling, Layer::Data] {
            prop_assert_eq!(frame.state.occupancy(layer).iter().sum::<usize>(), bursts);
        }
        for u in &frame.users {
            let mut s = u.slots.clone();
            s.dedup();
            prop_assert_eq!(s.len(), u.slots.len());
            prop_assert!(u.slots.iter().all(|&x| x < slots));
        }
    }

    #[test]
    fn decoding_conserves_users_and_replays(
        seed in any::<u64>(), users in 0usize..150, snr in 2.0f64..10.0, replicas in any::<bool>()
    ) {
        let dist: DegreeDistribution = "1:0.1,2:0.3,3:0.6".parse().unwrap();
        let (profiles, policy) = if replicas {
            (ProfileSet::replica([1, 2, 3]), DecodePolicy::with_mode(Mode::Irsa))
        } else {
            (ProfileSet::musca([1, 2, 3]), DecodePolicy::default())
        };
        let table = builtin_extended_table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame = build_frame(users, 100, &dist, &profiles, &mut rng).unwrap();
        let mut state = frame.state.clone();
        let mut lookup = table.at_snr(snr);
        let report = decode_frame(
            &mut state, &frame.users, &profiles, &mut lookup, policy, &mut RandomDraws(&mut rng),
        ).unwrap();
        let undecoded = frame.users.iter().filter(|u| !report.decoded.contains(&u.id)).count();
        prop_assert_eq!(report.decoded.len() + undecoded, users);
        prop_assert_eq!(report.deadlock, undecoded > 0);
        prop_assert!(report.decoded.is_subset(&report.located));
        let left: usize = frame.users.iter()
            .filter(|u| !report.decoded.contains(&u.id))
            .map(|u| u.slots.len())
            .sum();
        prop_assert_eq!(state.occupancy(Layer::Data).iter().sum::<usize>(), left);
        let mut again = frame.state.clone();
        replay(&mut again, &frame.users, &report).unwrap();
        prop_assert_eq!(again, state);
    }
}
