//! Transmitter side: a random ordering of feature positions, drained one
//! packet at a time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::types::{FeaturePacket, Identity};

#[derive(Debug, Clone)]
pub struct TransmitPlan {
    identity: Identity,
    permutation: Vec<usize>,
    cursor: usize,
}

impl TransmitPlan {
    /// Seeded Fisher–Yates permutation of `0..N`.
    pub fn new(identity: Identity, seed: u64) -> Self {
        let permutation = shuffled_positions(identity.dim(), seed);
        Self {
            identity,
            permutation,
            cursor: 0,
        }
    }

    /// Plan with an explicit order. Returns `None` unless `permutation` is a
    /// bijection on `0..N`.
    pub fn with_permutation(identity: Identity, permutation: Vec<usize>) -> Option<Self> {
        let n = identity.dim();
        let mut hit = vec![false; n];
        for &p in &permutation {
            if p >= n || std::mem::replace(&mut hit[p], true) {
                return None;
            }
        }
        (permutation.len() == n).then_some(Self {
            identity,
            permutation,
            cursor: 0,
        })
    }

    pub fn identity(&self) -> &Identity {
        &self.identity
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn sent(&self) -> usize {
        self.cursor
    }

    pub fn remaining(&self) -> usize {
        self.permutation.len() - self.cursor
    }

    /// Next packet in plan order, or `None` once every position was sent.
    pub fn next_packet(&mut self) -> Option<FeaturePacket> {
        let position = *self.permutation.get(self.cursor)?;
        self.cursor += 1;
        Some(FeaturePacket {
            position,
            value: self.identity.features()[position],
        })
    }
}

impl Iterator for TransmitPlan {
    type Item = FeaturePacket;

    fn next(&mut self) -> Option<FeaturePacket> {
        self.next_packet()
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining(), Some(self.remaining()))
    }
}

pub(crate) fn shuffled_positions(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        positions.swap(i, j);
    }
    positions
}
