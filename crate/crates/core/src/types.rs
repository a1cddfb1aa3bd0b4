//! Identities, semantic elements and the shared semantic base.
//!
//! An [`Identity`] is an ordered vector of `N` finite feature values. Identities
//! that carry the same label form a [`SemanticElement`], represented by the
//! component-wise mean of its distinct members (the reference identity). The
//! [`SemanticBase`] is the knowledge both ends of a link hold in common.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Default bit width of one feature value.
pub const DEFAULT_Q: u16 = 64;

/// Dense index of a semantic element inside a [`SemanticBase`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl ElementId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Identity {
    features: Vec<f64>,
    label: Option<String>,
}

impl Identity {
    /// Unlabeled identity. Fails on an empty vector or a non-finite value.
    pub fn new(features: Vec<f64>) -> Result<Self> {
        Self::checked(features, None, 0)
    }

    pub fn labeled(label: impl Into<String>, features: Vec<f64>) -> Result<Self> {
        Self::checked(features, Some(label.into()), 0)
    }

    /// Like [`Identity::labeled`], reporting errors against record `index`.
    pub(crate) fn checked(features: Vec<f64>, label: Option<String>, index: usize) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidRecord {
                index,
                reason: "identity has no features".into(),
            });
        }
        if let Some(position) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index, position });
        }
        Ok(Self { features, label })
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    pub fn value(&self, position: usize) -> Option<f64> {
        self.features.get(position).copied()
    }

    fn bit_key(&self) -> Vec<u64> {
        self.features.iter().map(|v| v.to_bits()).collect()
    }
}

/// One on-air unit: a feature value and its position in the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeaturePacket {
    pub position: usize,
    pub value: f64,
}

impl FeaturePacket {
    /// Ideal packet size: `ceil(log2 N)` position bits plus `q` value bits.
    pub fn ideal_bits(n: usize, q: u16) -> u64 {
        u64::from(position_bits(n)) + u64::from(q)
    }
}

/// `ceil(log2 n)` for `n >= 1`.
pub fn position_bits(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticElement {
    pub id: ElementId,
    pub name: String,
    pub member_count: usize,
    pub reference: Identity,
}

/// Immutable after construction; share it behind `&` or `Arc` across sessions.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticBase {
    n: usize,
    q: u16,
    elements: Vec<SemanticElement>,
    members: Vec<Vec<Identity>>,
    // references laid out position-major: [pos * K + k]
    by_position: Vec<f64>,
    digest: [u8; 32],
}

impl SemanticBase {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u16 {
        self.q
    }

    /// Number of semantic elements, `K`.
    pub fn k(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[SemanticElement] {
        &self.elements
    }

    pub fn element(&self, id: ElementId) -> Option<&SemanticElement> {
        self.elements.get(id.index())
    }

    pub fn members(&self, id: ElementId) -> &[Identity] {
        &self.members[id.index()]
    }

    pub fn element_id(&self, label: &str) -> Option<ElementId> {
        self.elements
            .binary_search_by(|e| e.name.as_str().cmp(label))
            .ok()
            .map(|i| self.elements[i].id)
    }

    /// Reference values of every element at `position`, indexed by element id.
    pub fn column(&self, position: usize) -> &[f64] {
        let k = self.k();
        &self.by_position[position * k..(position + 1) * k]
    }

    /// Canonical byte encoding used for the synchronization digest.
    ///
    /// Layout (all integers big-endian): magic `SEMIDB1\0`, `N: u32`, `q: u16`,
    /// `K: u32`, then per element in id order: name length `u32`, UTF-8 name,
    /// member count `u32`, `N` reference values as IEEE-754 binary64, followed
    /// by each member's `N` values.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(18 + self.k() * (self.n * 8 + 16));
        out.extend_from_slice(b"SEMIDB1\0");
        out.extend_from_slice(&(self.n as u32).to_be_bytes());
        out.extend_from_slice(&self.q.to_be_bytes());
        out.extend_from_slice(&(self.k() as u32).to_be_bytes());
        for (element, members) in self.elements.iter().zip(&self.members) {
            out.extend_from_slice(&(element.name.len() as u32).to_be_bytes());
            out.extend_from_slice(element.name.as_bytes());
            out.extend_from_slice(&(element.member_count as u32).to_be_bytes());
            for v in element.reference.features() {
                out.extend_from_slice(&v.to_be_bytes());
            }
            for member in members {
                for v in member.features() {
                    out.extend_from_slice(&v.to_be_bytes());
                }
            }
        }
        out
    }

    /// SHA-256 of [`SemanticBase::canonical_bytes`].
    pub fn digest(&self) -> [u8; 32] {
        self.digest
    }
}

/// Collapses bit-identical feature vectors, keeping first occurrences in order.
pub fn dedup_identities(identities: &[Identity]) -> Result<Vec<Identity>> {
    let Some(first) = identities.first() else {
        return Ok(Vec::new());
    };
    let n = first.dim();
    let mut seen = HashSet::with_capacity(identities.len());
    let mut out = Vec::new();
    for (index, identity) in identities.iter().enumerate() {
        if identity.dim() != n {
            return Err(Error::DimensionMismatch {
                index,
                expected: n,
                found: identity.dim(),
            });
        }
        if seen.insert(identity.bit_key()) {
            out.push(identity.clone());
        }
    }
    Ok(out)
}

/// Groups labeled identities into semantic elements.
///
/// Elements are ordered by label; duplicates inside one element are collapsed
/// before the reference mean is taken.
pub fn build_semantic_base(identities: &[Identity], q: u16) -> Result<SemanticBase> {
    let first = identities.first().ok_or(Error::EmptyInput)?;
    let n = first.dim();
    if n > u32::MAX as usize {
        return Err(Error::InvalidParameter(format!("N = {n} exceeds u32")));
    }

    let mut groups: BTreeMap<&str, Vec<Identity>> = BTreeMap::new();
    for (index, identity) in identities.iter().enumerate() {
        if identity.dim() != n {
            return Err(Error::DimensionMismatch {
                index,
                expected: n,
                found: identity.dim(),
            });
        }
        if let Some(position) = identity.features().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index, position });
        }
        let label = match identity.label() {
            Some(l) if !l.is_empty() => l,
            _ => {
                return Err(Error::InvalidRecord {
                    index,
                    reason: "identity has no label".into(),
                })
            }
        };
        groups.entry(label).or_default().push(identity.clone());
    }

    let k = groups.len();
    let mut elements = Vec::with_capacity(k);
    let mut members = Vec::with_capacity(k);
    for (id, (label, group)) in groups.into_iter().enumerate() {
        let group = dedup_identities(&group)?;
        let mut sum = vec![0.0; n];
        for identity in &group {
            for (acc, v) in sum.iter_mut().zip(identity.features()) {
                *acc += v;
            }
        }
        let count = group.len() as f64;
        let reference = sum.into_iter().map(|s| s / count).collect();
        elements.push(SemanticElement {
            id: ElementId(id as u32),
            name: label.to_owned(),
            member_count: group.len(),
            reference: Identity {
                features: reference,
                label: None,
            },
        });
        members.push(group);
    }

    let mut by_position = vec![0.0; n * k];
    for (j, element) in elements.iter().enumerate() {
        for (pos, v) in element.reference.features().iter().enumerate() {
            by_position[pos * k + j] = *v;
        }
    }

    let mut base = SemanticBase {
        n,
        q,
        elements,
        members,
        by_position,
        digest: [0; 32],
    };
    base.digest = Sha256::digest(base.canonical_bytes()).into();
    Ok(base)
}
