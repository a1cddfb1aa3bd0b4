//! End-to-end runs over a dataset, threshold sweeps and the accuracy / bit
//! transmission ratio tradeoff.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::identifier::{argmax, Decision, PosteriorState, Threshold};
use crate::teacher::TransmitPlan;
use crate::types::{ElementId, FeaturePacket, Identity, SemanticBase};

/// Outcome of transmitting one identity at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub identity_index: usize,
    pub true_element: ElementId,
    pub decision: Decision,
    pub lambda: f64,
    pub seed: u64,
    pub n: usize,
    pub q: u16,
    /// Ideal packet bits times packets used.
    pub bits_semantic: u64,
    /// Bits to send the whole vector as plain values, `q · N`.
    pub bits_syntactic: u64,
}

impl RunRecord {
    pub fn correct(&self) -> bool {
        self.decision.element == self.true_element
    }

    pub fn btr(&self) -> f64 {
        btr(self.n, self.q, self.decision.packets_used as f64)
    }
}

/// Bit transmission ratio for `packets` packets out of `n` features:
/// `(ceil(log2 n) + q) · packets / (q · n)`.
pub fn btr(n: usize, q: u16, packets: f64) -> f64 {
    let per_packet = FeaturePacket::ideal_bits(n, q) as f64;
    (per_packet * packets) / (f64::from(q) * n as f64)
}

/// Fraction of records whose decision matches the true element.
pub fn accuracy(records: &[RunRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Empty("run records"));
    }
    let errors = records.iter().filter(|r| !r.correct()).count();
    Ok(1.0 - errors as f64 / records.len() as f64)
}

/// Per-identity seed split off a master seed. Independent of the threshold,
/// so every threshold sees the same feature order for a given identity.
pub fn derive_seed(master: u64, index: usize) -> u64 {
    // splitmix64 finalizer over a Weyl sequence
    let mut z = master.wrapping_add(
        (index as u64)
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15),
    );
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Drives teacher and identifier until the threshold is met or every feature
/// was sent.
pub fn identify(
    base: &SemanticBase,
    identity: &Identity,
    lambda: Threshold,
    seed: u64,
) -> Result<Decision> {
    check_dim(base, identity, 0)?;
    let mut plan = TransmitPlan::new(identity.clone(), seed);
    let mut state = PosteriorState::new(base);
    while let Some(packet) = plan.next_packet() {
        state.receive(packet, base)?;
        if let Some(decision) = state.check_stop(lambda) {
            return Ok(decision);
        }
    }
    state.force_decision()
}

pub fn run_once(
    base: &SemanticBase,
    identity: &Identity,
    true_element: ElementId,
    lambda: Threshold,
    seed: u64,
) -> Result<RunRecord> {
    let decision = identify(base, identity, lambda, seed)?;
    Ok(record(base, 0, true_element, decision, lambda, seed))
}

fn record(
    base: &SemanticBase,
    identity_index: usize,
    true_element: ElementId,
    decision: Decision,
    lambda: Threshold,
    seed: u64,
) -> RunRecord {
    let (n, q) = (base.n(), base.q());
    RunRecord {
        identity_index,
        true_element,
        decision,
        lambda: lambda.get(),
        seed,
        n,
        q,
        bits_semantic: FeaturePacket::ideal_bits(n, q) * decision.packets_used as u64,
        bits_syntactic: u64::from(q) * n as u64,
    }
}

fn check_dim(base: &SemanticBase, identity: &Identity, index: usize) -> Result<()> {
    if identity.dim() != base.n() {
        return Err(Error::DimensionMismatch {
            index,
            expected: base.n(),
            found: identity.dim(),
        });
    }
    Ok(())
}

/// Maps each labeled identity to the element of `base` carrying its label.
pub fn true_elements(base: &SemanticBase, dataset: &[Identity]) -> Result<Vec<ElementId>> {
    dataset
        .iter()
        .enumerate()
        .map(|(index, identity)| {
            check_dim(base, identity, index)?;
            let label = identity.label().ok_or_else(|| Error::InvalidRecord {
                index,
                reason: "identity has no label".into(),
            })?;
            base.element_id(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_owned()))
        })
        .collect()
}

/// One run per identity at a single threshold, seeds split from `master_seed`.
pub fn run_dataset(
    base: &SemanticBase,
    dataset: &[Identity],
    lambda: Threshold,
    master_seed: u64,
) -> Result<Vec<RunRecord>> {
    let truth = true_elements(base, dataset)?;
    dataset
        .par_iter()
        .zip(truth.par_iter())
        .enumerate()
        .map(|(i, (identity, &element))| {
            let seed = derive_seed(master_seed, i);
            let decision = identify(base, identity, lambda, seed)?;
            Ok(record(base, i, element, decision, lambda, seed))
        })
        .collect()
}

/// Posterior leader after every packet of one transmission.
#[derive(Debug, Clone)]
struct Trajectory {
    leaders: Vec<(ElementId, f64)>,
    n: usize,
}

impl Trajectory {
    fn trace(base: &SemanticBase, identity: &Identity, seed: u64, stop_at: f64) -> Result<Self> {
        let mut plan = TransmitPlan::new(identity.clone(), seed);
        let mut state = PosteriorState::new(base);
        let mut leaders = Vec::new();
        while let Some(packet) = plan.next_packet() {
            state.receive(packet, base)?;
            let leader = argmax(state.probs());
            leaders.push(leader);
            if leader.1 >= stop_at {
                break;
            }
        }
        Ok(Self {
            leaders,
            n: base.n(),
        })
    }

    // Same outcome as `identify` at `lambda` for any lambda <= stop_at.
    fn decision(&self, lambda: Threshold) -> Decision {
        match self.leaders.iter().position(|(_, p)| *p >= lambda.get()) {
            Some(t) => Decision {
                element: self.leaders[t].0,
                confidence: self.leaders[t].1,
                packets_used: t + 1,
                saturated: false,
            },
            None => {
                let (element, confidence) = *self.leaders.last().expect("at least one packet");
                Decision {
                    element,
                    confidence,
                    packets_used: self.n,
                    saturated: true,
                }
            }
        }
    }
}

/// Inclusive threshold grid `min, min + step, ..., max`.
pub fn lambda_grid(min: f64, max: f64, step: f64) -> Result<Vec<Threshold>> {
    if !step.is_finite() || !min.is_finite() || !max.is_finite() || step <= 0.0 || min > max {
        return Err(Error::InvalidParameter(format!(
            "lambda grid min {min}, max {max}, step {step}"
        )));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| {
            let v = ((min + i as f64 * step) * 1e12).round() / 1e12;
            Threshold::new(v)
        })
        .collect()
}

/// Grid used when none is given: 0.10 to 1.00 in steps of 0.02.
pub fn default_lambda_grid() -> Vec<Threshold> {
    lambda_grid(0.10, 1.00, 0.02).expect("static grid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub accuracy: f64,
    pub mean_btr: f64,
    pub mean_packets: f64,
    pub mean_bits_semantic: f64,
    pub bits_syntactic: u64,
    pub saturation_rate: f64,
    pub runs: usize,
    /// `lambda <= 1/K`: the first packet always decides.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub n: usize,
    pub q: u16,
    pub k: usize,
    pub rows: Vec<SweepRow>,
}

/// Runs every identity of `dataset` at every threshold of `grid`.
///
/// Each identity uses the same feature order at every threshold, so one
/// posterior trajectory per identity answers the whole grid.
pub fn sweep(
    base: &SemanticBase,
    dataset: &[Identity],
    grid: &[Threshold],
    master_seed: u64,
) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::Empty("lambda grid"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "lambda grid must be strictly ascending".into(),
        ));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyInput);
    }
    let truth = true_elements(base, dataset)?;
    let top = grid[grid.len() - 1].get();

    let trajectories = dataset
        .par_iter()
        .enumerate()
        .map(|(i, identity)| Trajectory::trace(base, identity, derive_seed(master_seed, i), top))
        .collect::<Result<Vec<_>>>()?;

    let (n, q, k) = (base.n(), base.q(), base.k());
    let runs = dataset.len();
    let per_packet = FeaturePacket::ideal_bits(n, q);
    let rows = grid
        .iter()
        .map(|&lambda| {
            let mut errors = 0usize;
            let mut packets = 0u64;
            let mut saturated = 0usize;
            for (trajectory, truth) in trajectories.iter().zip(&truth) {
                let d = trajectory.decision(lambda);
                errors += usize::from(d.element != *truth);
                packets += d.packets_used as u64;
                saturated += usize::from(d.saturated);
            }
            let mean_packets = packets as f64 / runs as f64;
            SweepRow {
                lambda: lambda.get(),
                accuracy: 1.0 - errors as f64 / runs as f64,
                mean_btr: btr(n, q, mean_packets),
                mean_packets,
                mean_bits_semantic: per_packet as f64 * mean_packets,
                bits_syntactic: u64::from(q) * n as u64,
                saturation_rate: saturated as f64 / runs as f64,
                runs,
                degenerate: lambda.get() * k as f64 <= 1.0,
            }
        })
        .collect();
    Ok(SweepTable { n, q, k, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimum {
    pub lambda: f64,
    pub accuracy: f64,
    pub btr: f64,
}

/// Row maximizing `accuracy - mean_btr`; the lowest threshold wins ties.
pub fn optimize_lambda(table: &SweepTable) -> Result<Optimum> {
    let mut best: Option<&SweepRow> = None;
    for row in &table.rows {
        let score = row.accuracy - row.mean_btr;
        match best {
            Some(b) if b.accuracy - b.mean_btr > score => {}
            Some(b) if b.accuracy - b.mean_btr == score && b.lambda <= row.lambda => {}
            _ => best = Some(row),
        }
    }
    let row = best.ok_or(Error::Empty("sweep table"))?;
    Ok(Optimum {
        lambda: row.lambda,
        accuracy: row.accuracy,
        btr: row.mean_btr,
    })
}

/// Parameters of the Gaussian-cluster stand-in for learned features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyntheticParams {
    pub classes: usize,
    pub features: usize,
    pub per_class: usize,
    /// Within-class standard deviation per feature.
    pub spread: f64,
    /// Minimum distance between class centers.
    pub separation: f64,
    pub seed: u64,
}

const PLACEMENT_ATTEMPTS: usize = 4096;

/// Labeled identities drawn around `classes` random centers.
///
/// Centers start on a sphere of radius `separation` and are rejected until
/// pairwise at least `separation` apart; the radius grows slowly with failed
/// attempts so low-dimensional layouts stay feasible. Rows are class-major.
pub fn gen_synthetic(p: &SyntheticParams) -> Result<Vec<Identity>> {
    if p.classes == 0 || p.features == 0 || p.per_class == 0 {
        return Err(Error::InvalidParameter(
            "classes, features and per-class count must be >= 1".into(),
        ));
    }
    if !(p.spread >= 0.0 && p.spread.is_finite())
        || !(p.separation >= 0.0 && p.separation.is_finite())
    {
        return Err(Error::InvalidParameter(
            "spread and separation must be finite and >= 0".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(p.classes);
    let mut attempts = 0;
    while centers.len() < p.classes {
        if attempts == PLACEMENT_ATTEMPTS {
            return Err(Error::InfeasiblePlacement {
                k: p.classes,
                n: p.features,
                separation: p.separation,
                attempts,
            });
        }
        let radius = p.separation * (1.0 + (attempts / 64) as f64 * 0.1);
        let candidate = random_direction(&mut rng, p.features)
            .into_iter()
            .map(|x| x * radius)
            .collect::<Vec<_>>();
        attempts += 1;
        if centers
            .iter()
            .all(|c| euclidean(c, &candidate) >= p.separation)
        {
            centers.push(candidate);
        }
    }

    let width = (p.classes - 1).to_string().len();
    let mut out = Vec::with_capacity(p.classes * p.per_class);
    for (c, center) in centers.iter().enumerate() {
        let label = format!("class{c:0width$}");
        for _ in 0..p.per_class {
            let features = center
                .iter()
                .map(|m| {
                    let z: f64 = rng.sample(StandardNormal);
                    m + p.spread * z
                })
                .collect();
            out.push(Identity::labeled(label.clone(), features)?);
        }
    }
    Ok(out)
}

fn random_direction(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
