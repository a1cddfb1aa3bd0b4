//! Independent reference computations used by the integration tests.
//!
//! Nothing here calls into the identifier: distances are re-summed from the
//! raw reference vectors at every step and the weighting rules are written
//! out branch by branch.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semid::{
    build_semantic_base, FeaturePacket, Identity, PosteriorState, SemanticBase, TransmitPlan,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Straight-line posterior trajectory: one probability vector per packet.
pub fn oracle_trajectory(
    references: &[Vec<f64>],
    identity: &[f64],
    order: &[usize],
) -> Vec<Vec<f64>> {
    let k = references.len();
    let mut probs = vec![1.0 / k as f64; k];
    let mut out = Vec::with_capacity(order.len());
    for t in 1..=order.len() {
        let seen = &order[..t];
        let mut d = vec![0.0; k];
        for j in 0..k {
            let mut s = 0.0;
            for &pos in seen {
                s += (identity[pos] - references[j][pos]).powi(2);
            }
            d[j] = s.sqrt();
        }

        let mut w = vec![0.0; k];
        let exact: Vec<usize> = (0..k).filter(|&j| d[j] <= 1e-12).collect();
        let mut r = 0.0f64;
        for &x in &d {
            if x > r {
                r = x;
            }
        }
        let all_equal = d.iter().all(|&x| x == d[0]);
        if !exact.is_empty() {
            for &j in &exact {
                w[j] = 1.0 / exact.len() as f64;
            }
        } else if all_equal {
            for x in w.iter_mut() {
                *x = 1.0 / k as f64;
            }
        } else {
            let mut total = 0.0;
            for j in 0..k {
                w[j] = ((r - d[j]) / (r * d[j])).powi(2);
                total += w[j];
            }
            for x in w.iter_mut() {
                *x /= total;
            }
        }

        let mut norm = 0.0;
        for j in 0..k {
            probs[j] += w[j];
            norm += probs[j].abs();
        }
        for p in probs.iter_mut() {
            *p /= norm;
        }
        out.push(probs.clone());
    }
    out
}

/// Engine trajectory for a fixed feature order.
pub fn engine_trajectory(
    base: &SemanticBase,
    identity: &Identity,
    order: &[usize],
) -> Vec<Vec<f64>> {
    let mut plan =
        TransmitPlan::with_permutation(identity.clone(), order.to_vec()).expect("bijection");
    let mut state = PosteriorState::new(base);
    let mut out = Vec::new();
    while let Some(packet) = plan.next_packet() {
        state.receive(packet, base).unwrap();
        out.push(state.probs().to_vec());
    }
    out
}

pub fn references(base: &SemanticBase) -> Vec<Vec<f64>> {
    base.elements()
        .iter()
        .map(|e| e.reference.features().to_vec())
        .collect()
}

/// Every permutation of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

/// Two-pass mean: plain mean, then the mean residual added back.
pub fn two_pass_mean(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows[0].len();
    let m = rows.len() as f64;
    (0..n)
        .map(|c| {
            let mean = rows.iter().map(|r| r[c]).sum::<f64>() / m;
            let correction = rows.iter().map(|r| r[c] - mean).sum::<f64>() / m;
            mean + correction
        })
        .collect()
}

/// Random base with `k` labels, `members` members each, and values either
/// continuous or drawn from a small integer set (to hit ties and exact matches).
pub fn random_base(
    rng: &mut impl Rng,
    k: usize,
    n: usize,
    members: usize,
    integer: bool,
) -> (SemanticBase, Vec<Identity>) {
    let mut rows = Vec::new();
    for label in 0..k {
        for _ in 0..members {
            let v: Vec<f64> = (0..n)
                .map(|_| {
                    if integer {
                        f64::from(rng.random_range(-2i32..=2))
                    } else {
                        rng.random_range(-3.0..3.0)
                    }
                })
                .collect();
            rows.push(Identity::labeled(format!("e{label}"), v).unwrap());
        }
    }
    (build_semantic_base(&rows, 64).unwrap(), rows)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Oracle and engine trajectories agree on every step of every permutation.
/// Returns the number of steps compared and the largest deviation.
pub fn check_enumeration(
    max_k: usize,
    max_n: usize,
    bases_per_shape: usize,
    seed: u64,
) -> (usize, f64) {
    let mut rng = rng(seed);
    let mut steps = 0;
    let mut worst = 0.0f64;
    for k in 1..=max_k {
        for n in 1..=max_n {
            let perms = permutations(n);
            for b in 0..bases_per_shape {
                let integer = b % 2 == 1;
                let (base, members) = random_base(&mut rng, k, n, 2, integer);
                let refs = references(&base);
                let mut probes: Vec<Identity> = members.clone();
                probes.push(base.elements()[0].reference.clone());
                probes.push(
                    Identity::new((0..n).map(|_| rng.random_range(-4.0..4.0)).collect()).unwrap(),
                );
                for probe in &probes {
                    for order in &perms {
                        let engine = engine_trajectory(&base, probe, order);
                        let oracle = oracle_trajectory(&refs, probe.features(), order);
                        for (e, o) in engine.iter().zip(&oracle) {
                            worst = worst.max(max_abs_diff(e, o));
                            steps += 1;
                        }
                    }
                }
            }
        }
    }
    (steps, worst)
}

pub fn packet(position: usize, value: f64) -> FeaturePacket {
    FeaturePacket { position, value }
}
