//! Receiver-side identification.
//!
//! Every received feature extends the partial identity observed so far. The
//! Euclidean distance from that partial identity to each reference (restricted
//! to the received positions) is turned into inverse-distance weights, which
//! are blended into the running posterior over semantic elements:
//!
//! ```text
//! w_k  ∝ ((R - d_k) / (R · d_k))²        R = max_k d_k
//! P_t  = (P_{t-1} + w_t) / ‖P_{t-1} + w_t‖₁
//! ```
//!
//! The receiver stops as soon as the largest posterior entry reaches the
//! confidence threshold, or decides by argmax once every feature was consumed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{ElementId, FeaturePacket, SemanticBase};

/// Distances at or below this are treated as exact matches.
pub const ZERO_DISTANCE: f64 = 1e-12;

/// Confidence threshold `λ ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda > 0.0 && lambda <= 1.0 {
            Ok(Self(lambda))
        } else {
            Err(Error::InvalidThreshold(lambda))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Threshold {
    type Error = Error;

    fn try_from(lambda: f64) -> Result<Self> {
        Self::new(lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decision {
    pub element: ElementId,
    pub confidence: f64,
    pub packets_used: usize,
    /// Every feature was consumed before the threshold was met.
    pub saturated: bool,
}

/// Posterior over the semantic elements of one base plus the features seen.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorState {
    probs: Vec<f64>,
    received: Vec<FeaturePacket>,
    seen: Vec<bool>,
    // running Σ (value - ref_k[pos])² in arrival order
    sq_dist: Vec<f64>,
}

impl PosteriorState {
    /// Uniform prior over the elements of `base`.
    pub fn new(base: &SemanticBase) -> Self {
        let k = base.k();
        Self {
            probs: vec![1.0 / k as f64; k],
            received: Vec::new(),
            seen: vec![false; base.n()],
            sq_dist: vec![0.0; k],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn received(&self) -> &[FeaturePacket] {
        &self.received
    }

    pub fn packets_used(&self) -> usize {
        self.received.len()
    }

    pub fn is_saturated(&self) -> bool {
        self.received.len() == self.seen.len()
    }

    /// Distances from the received partial identity to every reference.
    pub fn partial_distances(&self) -> Result<Vec<f64>> {
        if self.received.is_empty() {
            return Err(Error::NoFeatures);
        }
        Ok(self.sq_dist.iter().map(|s| s.sqrt()).collect())
    }

    /// Folds one packet into the posterior.
    ///
    /// On error the state is left untouched.
    pub fn receive(&mut self, packet: FeaturePacket, base: &SemanticBase) -> Result<()> {
        let n = self.seen.len();
        if packet.position >= n {
            return Err(Error::PositionOutOfRange {
                position: packet.position,
                n,
            });
        }
        if self.seen[packet.position] {
            return Err(Error::DuplicatePosition(packet.position));
        }
        if !packet.value.is_finite() {
            return Err(Error::NonFinite {
                index: self.received.len(),
                position: packet.position,
            });
        }
        if base.n() != n || base.k() != self.probs.len() {
            return Err(Error::ElementCountMismatch {
                expected: self.probs.len(),
                found: base.k(),
            });
        }

        for (acc, r) in self.sq_dist.iter_mut().zip(base.column(packet.position)) {
            let diff = packet.value - r;
            *acc += diff * diff;
        }
        self.seen[packet.position] = true;
        self.received.push(packet);

        let weights = idw_weights(&self.partial_distances()?);
        self.probs = update_posterior(&self.probs, &weights)?;
        Ok(())
    }

    /// Returns a decision once the largest posterior entry reaches `lambda`.
    pub fn check_stop(&self, lambda: Threshold) -> Option<Decision> {
        let (element, confidence) = argmax(&self.probs);
        (confidence >= lambda.get()).then(|| Decision {
            element,
            confidence,
            packets_used: self.packets_used(),
            saturated: false,
        })
    }

    /// Argmax decision after all `N` features were received.
    pub fn force_decision(&self) -> Result<Decision> {
        if !self.is_saturated() {
            return Err(Error::NotSaturated {
                used: self.packets_used(),
                n: self.seen.len(),
            });
        }
        let (element, confidence) = argmax(&self.probs);
        Ok(Decision {
            element,
            confidence,
            packets_used: self.packets_used(),
            saturated: true,
        })
    }
}

/// Largest entry; the lowest index wins ties.
pub fn argmax(probs: &[f64]) -> (ElementId, f64) {
    let mut best = 0;
    for (i, p) in probs.iter().enumerate().skip(1) {
        if *p > probs[best] {
            best = i;
        }
    }
    (
        ElementId(best as u32),
        probs.get(best).copied().unwrap_or(0.0),
    )
}

/// Inverse-distance weights, normalized to sum to one.
///
/// Exact matches (`d <= ZERO_DISTANCE`) take all the mass, shared evenly.
/// When every distance is equal the result is uniform. The element at the
/// maximum distance always gets zero weight otherwise.
pub fn idw_weights(distances: &[f64]) -> Vec<f64> {
    let k = distances.len();
    if k == 0 {
        return Vec::new();
    }

    let zeros = distances.iter().filter(|d| **d <= ZERO_DISTANCE).count();
    if zeros > 0 {
        let share = 1.0 / zeros as f64;
        return distances
            .iter()
            .map(|d| if *d <= ZERO_DISTANCE { share } else { 0.0 })
            .collect();
    }

    let r = distances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if distances.iter().all(|d| *d == r) {
        return vec![1.0 / k as f64; k];
    }

    let raw: Vec<f64> = distances
        .iter()
        .map(|d| {
            let x = (r - d) / (r * d);
            x * x
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// `(probs + weights) / ‖probs + weights‖₁`.
pub fn update_posterior(probs: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if probs.len() != weights.len() {
        return Err(Error::ElementCountMismatch {
            expected: probs.len(),
            found: weights.len(),
        });
    }
    let blended: Vec<f64> = probs.iter().zip(weights).map(|(p, w)| p + w).collect();
    let norm: f64 = blended.iter().sum();
    Ok(blended.into_iter().map(|v| v / norm).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{build_semantic_base, Identity};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn base(rows: &[(&str, &[f64])]) -> SemanticBase {
        let ids: Vec<_> = rows
            .iter()
            .map(|(l, v)| Identity::labeled(*l, v.to_vec()).unwrap())
            .collect();
        build_semantic_base(&ids, 64).unwrap()
    }

    #[test]
    fn threshold_bounds() {
        assert!(Threshold::new(1.0).is_ok());
        assert!(Threshold::new(1e-9).is_ok());
        for bad in [0.0, -0.1, 1.0000001, f64::NAN] {
            assert!(matches!(
                Threshold::new(bad),
                Err(Error::InvalidThreshold(_))
            ));
        }
    }

    #[test]
    fn uniform_prior() {
        let b10: Vec<(String, Vec<f64>)> =
            (0..10).map(|i| (format!("c{i}"), vec![i as f64])).collect();
        let rows: Vec<(&str, &[f64])> = b10
            .iter()
            .map(|(l, v)| (l.as_str(), v.as_slice()))
            .collect();
        assert!(PosteriorState::new(&base(&rows))
            .probs()
            .iter()
            .all(|p| *p == 0.1));

        assert_eq!(PosteriorState::new(&base(&[("a", &[1.0])])).probs(), &[1.0]);

        let s = PosteriorState::new(&base(&[("a", &[1.0]), ("b", &[2.0]), ("c", &[3.0])]));
        assert!(s.probs().iter().all(|p| *p == 1.0 / 3.0));
        assert!((s.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn idw_reference_values() {
        assert!(close(&idw_weights(&[0.25, 0.75]), &[1.0, 0.0], 1e-12));
        assert!(close(
            &idw_weights(&[0.5, 0.5, 1.5]),
            &[0.5, 0.5, 0.0],
            1e-12
        ));
        assert_eq!(idw_weights(&[0.0, 1.0]), vec![1.0, 0.0]);
        assert_eq!(idw_weights(&[0.0, 0.0, 3.0]), vec![0.5, 0.5, 0.0]);
        for c in [0.0, 1e-3, 2.0, 1e9] {
            assert!(close(&idw_weights(&[c, c, c]), &[1.0 / 3.0; 3], 1e-15));
        }
        assert_eq!(idw_weights(&[4.2]), vec![1.0]);
    }

    #[test]
    fn posterior_update_reference_values() {
        let third = 1.0 / 3.0;
        let p = update_posterior(&[third; 3], &[0.5, 0.5, 0.0]).unwrap();
        assert!(close(&p, &[5.0 / 12.0, 5.0 / 12.0, 1.0 / 6.0], 1e-12));

        let p = update_posterior(&[third; 3], &[third; 3]).unwrap();
        assert!(close(&p, &[third; 3], 1e-15));

        assert!(update_posterior(&[0.5, 0.5], &[1.0]).is_err());
    }

    #[test]
    fn one_hot_updates_increase_monotonically() {
        let mut p = vec![0.7, 0.2, 0.1];
        let w = [0.0, 1.0, 0.0];
        let mut last = p[1];
        for _ in 0..50 {
            p = update_posterior(&p, &w).unwrap();
            assert!(p[1] >= last);
            last = p[1];
        }
        assert!(1.0 - last < 1e-12);
    }

    #[test]
    fn partial_distances_small_cases() {
        let b = base(&[("a", &[0.0, 9.0]), ("b", &[1.0, 9.0])]);
        let mut s = PosteriorState::new(&b);
        assert!(matches!(s.partial_distances(), Err(Error::NoFeatures)));
        s.receive(
            FeaturePacket {
                position: 0,
                value: 0.25,
            },
            &b,
        )
        .unwrap();
        assert!(close(&s.partial_distances().unwrap(), &[0.25, 0.75], 1e-15));

        let b = base(&[("a", &[3.0, 4.0, 17.0])]);
        let mut s = PosteriorState::new(&b);
        s.receive(
            FeaturePacket {
                position: 0,
                value: 0.0,
            },
            &b,
        )
        .unwrap();
        s.receive(
            FeaturePacket {
                position: 1,
                value: 0.0,
            },
            &b,
        )
        .unwrap();
        assert_eq!(s.partial_distances().unwrap(), vec![5.0]);
    }

    #[test]
    fn receive_first_packet() {
        let b = base(&[("a", &[0.0, 5.0]), ("b", &[1.0, 5.0])]);
        let mut s = PosteriorState::new(&b);
        s.receive(
            FeaturePacket {
                position: 0,
                value: 0.25,
            },
            &b,
        )
        .unwrap();
        assert!(close(s.probs(), &[0.75, 0.25], 1e-12));
        assert_eq!(s.packets_used(), 1);
    }

    #[test]
    fn uninformative_packet_leaves_posterior() {
        let b = base(&[("a", &[2.0, 0.0]), ("b", &[2.0, 1.0]), ("c", &[2.0, 7.0])]);
        let mut s = PosteriorState::new(&b);
        s.receive(
            FeaturePacket {
                position: 0,
                value: 5.0,
            },
            &b,
        )
        .unwrap();
        assert!(close(s.probs(), &[1.0 / 3.0; 3], 1e-15));
        assert_eq!(s.packets_used(), 1);
    }

    #[test]
    fn receive_rejects_protocol_violations() {
        let b = base(&[("a", &[0.0, 0.0]), ("b", &[1.0, 1.0])]);
        let mut s = PosteriorState::new(&b);
        s.receive(
            FeaturePacket {
                position: 1,
                value: 0.5,
            },
            &b,
        )
        .unwrap();
        let snapshot = s.clone();
        assert!(matches!(
            s.receive(
                FeaturePacket {
                    position: 1,
                    value: 0.5
                },
                &b
            ),
            Err(Error::DuplicatePosition(1))
        ));
        assert!(matches!(
            s.receive(
                FeaturePacket {
                    position: 2,
                    value: 0.5
                },
                &b
            ),
            Err(Error::PositionOutOfRange { position: 2, n: 2 })
        ));
        assert!(s
            .receive(
                FeaturePacket {
                    position: 0,
                    value: f64::NAN
                },
                &b
            )
            .is_err());
        assert_eq!(s, snapshot);
    }

    fn state_with(probs: Vec<f64>, n: usize, used: usize) -> PosteriorState {
        let k = probs.len();
        PosteriorState {
            probs,
            received: (0..used)
                .map(|position| FeaturePacket {
                    position,
                    value: 0.0,
                })
                .collect(),
            seen: (0..n).map(|i| i < used).collect(),
            sq_dist: vec![0.0; k],
        }
    }

    #[test]
    fn stop_rule() {
        let l = |x| Threshold::new(x).unwrap();
        let d = state_with(vec![0.9, 0.1], 4, 2)
            .check_stop(l(0.72))
            .unwrap();
        assert_eq!(
            (d.element, d.confidence, d.saturated),
            (ElementId(0), 0.9, false)
        );
        assert!(state_with(vec![0.5, 0.5], 4, 2)
            .check_stop(l(0.72))
            .is_none());
        let d = state_with(vec![0.5, 0.5], 4, 2).check_stop(l(0.5)).unwrap();
        assert_eq!(d.element, ElementId(0));
        let d = state_with(vec![0.2, 0.8], 4, 3).check_stop(l(0.8)).unwrap();
        assert_eq!((d.element, d.packets_used), (ElementId(1), 3));
    }

    #[test]
    fn forced_decision() {
        let d = state_with(vec![0.4, 0.35, 0.25], 3, 3)
            .force_decision()
            .unwrap();
        assert_eq!(
            (d.element, d.saturated, d.packets_used),
            (ElementId(0), true, 3)
        );
        let d = state_with(vec![0.25; 4], 5, 5).force_decision().unwrap();
        assert_eq!(d.element, ElementId(0));
        assert!(matches!(
            state_with(vec![0.5, 0.5], 3, 2).force_decision(),
            Err(Error::NotSaturated { used: 2, n: 3 })
        ));
    }
}
