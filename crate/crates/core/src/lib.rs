//! Identification via semantic features.
//!
//! A teacher reveals randomly chosen features of an identity vector one packet
//! at a time; an apprentice keeps an inverse-distance-weighted posterior over
//! the semantic elements both sides know and interrupts the transmission once
//! the posterior is confident enough. Fewer packets means fewer bits, at some
//! cost in identification accuracy.
//!
//! - [`types`]: identities, semantic elements, the shared semantic base
//! - [`dataset`]: the feature CSV format
//! - [`identifier`]: IDW weights, posterior update, stopping rule
//! - [`teacher`]: random feature ordering and packetization
//! - [`simulator`]: runs, threshold sweeps, accuracy / BTR, optimal threshold
//! - [`report`]: CSV tables for plotting
//! - [`protocol`]: framed wire protocol and networked sessions
//!
//! ```
//! use semid::{build_semantic_base, identify, Identity, Threshold};
//!
//! let ids = vec![
//!     Identity::labeled("a", vec![0.0, 0.0, 0.0]).unwrap(),
//!     Identity::labeled("b", vec![5.0, 5.0, 5.0]).unwrap(),
//! ];
//! let base = build_semantic_base(&ids, 64).unwrap();
//! let probe = Identity::new(vec![4.8, 5.1, 5.2]).unwrap();
//! let decision = identify(&base, &probe, Threshold::new(0.9).unwrap(), 7).unwrap();
//! assert_eq!(base.elements()[decision.element.index()].name, "b");
//! ```

pub mod cli;
pub mod dataset;
pub mod error;
pub mod identifier;
pub mod protocol;
pub mod report;
pub mod simulator;
pub mod teacher;
pub mod types;

pub use error::{Error, Result};
pub use identifier::{idw_weights, update_posterior, Decision, PosteriorState, Threshold};
pub use simulator::{
    accuracy, btr, default_lambda_grid, derive_seed, gen_synthetic, identify, lambda_grid,
    optimize_lambda, run_dataset, run_once, sweep, Optimum, RunRecord, SweepRow, SweepTable,
    SyntheticParams,
};
pub use teacher::TransmitPlan;
pub use types::{
    build_semantic_base, dedup_identities, ElementId, FeaturePacket, Identity, SemanticBase,
    SemanticElement, DEFAULT_Q,
};
