mod common;

use proptest::prelude::*;
use rand::Rng;
use semid::identifier::argmax;
use semid::{idw_weights, update_posterior, ElementId, Identity, PosteriorState, Threshold};

#[test]
fn partial_distances_match_naive_loop() {
    let mut rng = common::rng(55);
    for _ in 0..50 {
        let (base, _) = common::random_base(&mut rng, 5, 12, 3, false);
        let probe: Vec<f64> = (0..12).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut positions: Vec<usize> = (0..12).collect();
        for i in (1..12).rev() {
            positions.swap(i, rng.random_range(0..=i));
        }
        let received = &positions[..3];

        let mut state = PosteriorState::new(&base);
        for &p in received {
            state.receive(common::packet(p, probe[p]), &base).unwrap();
        }
        let got = state.partial_distances().unwrap();
        for (k, element) in base.elements().iter().enumerate() {
            let mut s = 0.0;
            for &p in received {
                let diff = probe[p] - element.reference.features()[p];
                s += diff * diff;
            }
            assert!((got[k] - s.sqrt()).abs() <= 1e-12);
        }
    }
}

#[test]
fn enumeration_matches_straight_line_oracle_up_to_four() {
    let (steps, worst) = common::check_enumeration(4, 4, 6, 99);
    assert!(steps > 10_000, "only {steps} steps compared");
    assert!(worst <= 1e-9, "max deviation {worst}");
}

#[test]
fn posterior_stays_valid_over_random_updates() {
    let mut rng = common::rng(3);
    let mut probs = vec![0.25; 4];
    for step in 0..20_000 {
        let d: Vec<f64> = (0..4)
            .map(|_| match rng.random_range(0..10) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random_range(0.0..10.0),
            })
            .collect();
        let w = idw_weights(&d);
        probs = update_posterior(&probs, &w).unwrap();
        let sum: f64 = probs.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9, "step {step}: sum {sum}");
        assert!(probs.iter().all(|p| *p >= 0.0));
    }
}

#[test]
fn identity_at_reference_is_identified_with_certainty() {
    let mut rng = common::rng(8);
    let (base, _) = common::random_base(&mut rng, 3, 40, 4, false);
    let target = base.elements()[2].reference.clone();
    let mut state = PosteriorState::new(&base);
    let lambda = Threshold::new(0.99).unwrap();
    let mut decision = None;
    for p in 0..40 {
        state
            .receive(common::packet(p, target.features()[p]), &base)
            .unwrap();
        if let Some(d) = state.check_stop(lambda) {
            decision = Some(d);
            break;
        }
    }
    let d = decision.expect("exact match should cross 0.99");
    assert_eq!(d.element, ElementId(2));
    assert!(!d.saturated);
}

fn distances() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-6f64..1e3, 2..8)
}

proptest! {
    #[test]
    fn weights_are_a_distribution(d in prop::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0f64..1e4], 1..9)) {
        let w = idw_weights(&d);
        prop_assert_eq!(w.len(), d.len());
        prop_assert!(w.iter().all(|x| (0.0..=1.0).contains(x)));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn closer_means_heavier(d in distances()) {
        let r = d.iter().cloned().fold(0.0, f64::max);
        prop_assume!(d.iter().any(|x| *x != r));
        let w = idw_weights(&d);
        for i in 0..d.len() {
            for j in 0..d.len() {
                if d[i] < d[j] {
                    prop_assert!(w[i] > w[j], "d {:?} w {:?}", d, w);
                }
            }
            if d[i] == r {
                prop_assert_eq!(w[i], 0.0);
            }
        }
    }

    #[test]
    fn weights_ignore_scale(d in distances(), c in 1e-3f64..1e3) {
        let scaled: Vec<f64> = d.iter().map(|x| x * c).collect();
        let a = idw_weights(&d);
        let b = idw_weights(&scaled);
        prop_assert!(common::max_abs_diff(&a, &b) <= 1e-9, "{:?} vs {:?}", a, b);
    }

    #[test]
    fn relabeling_permutes_weights_and_posterior(
        d in distances(),
        seed in any::<u64>(),
    ) {
        let k = d.len();
        let mut rng = common::rng(seed);
        let mut perm: Vec<usize> = (0..k).collect();
        for i in (1..k).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let prior: Vec<f64> = {
            let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / s).collect()
        };
        let w = idw_weights(&d);
        let p = update_posterior(&prior, &w).unwrap();

        let d2: Vec<f64> = perm.iter().map(|&i| d[i]).collect();
        let prior2: Vec<f64> = perm.iter().map(|&i| prior[i]).collect();
        let w2 = idw_weights(&d2);
        let p2 = update_posterior(&prior2, &w2).unwrap();
        for (slot, &i) in perm.iter().enumerate() {
            prop_assert!((w2[slot] - w[i]).abs() <= 1e-12);
            prop_assert!((p2[slot] - p[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn argmax_prefers_lowest_index(probs in prop::collection::vec(0u8..4, 1..10)) {
        let probs: Vec<f64> = probs.into_iter().map(f64::from).collect();
        let (id, best) = argmax(&probs);
        let max = probs.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert_eq!(best, max);
        prop_assert_eq!(id.index(), probs.iter().position(|p| *p == max).unwrap());
    }

    #[test]
    fn receive_keeps_invariants(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (base, _) = common::random_base(&mut rng, 4, 10, 2, seed % 2 == 0);
        let probe: Vec<f64> = (0..10).map(|_| rng.random_range(-3.0..3.0)).collect();
        let plan = semid::TransmitPlan::new(Identity::new(probe).unwrap(), seed);
        let mut state = PosteriorState::new(&base);
        for (t, packet) in plan.enumerate() {
            state.receive(packet, &base).unwrap();
            prop_assert_eq!(state.packets_used(), t + 1);
            prop_assert!((state.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(state.probs().iter().all(|p| *p >= 0.0));
            let mut pos: Vec<usize> = state.received().iter().map(|p| p.position).collect();
            pos.sort_unstable();
            pos.dedup();
            prop_assert_eq!(pos.len(), t + 1);
        }
        prop_assert!(state.force_decision().is_ok());
    }
}
