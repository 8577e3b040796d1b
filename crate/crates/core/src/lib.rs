//! Influence ranking, dismantling analysis and cohort comparison for
//! retweet corpora around conspiracy content.
//!
//! The usual flow is [`corpus::ingest_path`] → [`metrics::compute_all_metrics`]
//! → [`dismantling::dismantle`] → [`cohorts::classify`], with
//! [`pipeline`] wiring the stages to on-disk artifacts.

pub mod cohorts;
pub mod corpus;
pub mod dismantling;
pub mod error;
pub mod features;
pub mod hashtags;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod synth;

#[cfg(test)]
mod test_util;

pub use error::{Error, Result};
