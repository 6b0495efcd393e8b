//! Null-model sampling for vertex-colored multigraphs.
//!
//! The ensemble fixes an observed graph's degree sequence and joint color
//! matrix (the symmetric color-pair edge-count matrix behind color
//! assortativity). Two Metropolis-Hastings double-edge-swap samplers walk
//! it — a color-agnostic walk that rejects matrix-breaking swaps, and a
//! color-aware walk whose every proposal preserves the matrix — next to a
//! plain configuration-model baseline that only keeps degrees.
//!
//! [`oracle`] provides exact small-instance ground truth: full ensemble
//! enumeration, sampler transition matrices built independently of the
//! step engines, and stationarity / connectivity / end-state-distribution
//! verification.

pub mod classify;
pub mod corpus;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod samplers;
pub mod synth;
