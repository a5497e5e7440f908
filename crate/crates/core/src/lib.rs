//! Valuation of customer losses and non-energy impacts during
//! extreme-cold power outages.
//!
//! The pipeline runs population → weather → thermal exposure under an
//! outage schedule → hazard (mortality, productivity, freeze damage) →
//! Monte-Carlo valuation, with [`report`] wiring it to files.

pub mod error;
pub mod hazard;
pub mod outage;
pub mod population;
pub mod report;
pub mod rng;
pub mod thermal;
pub mod valuation;
pub mod weather;

pub use error::{Error, Result};
