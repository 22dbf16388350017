//! Randomised and Bayesian decision-tree ensembles, compared through the
//! uncertainty envelope: the fraction of test outcomes that are confidently
//! correct, uncertain, or confidently incorrect at a confidence level `P₀`.
//!
//! * [`tree`]: binary axis-aligned trees, entropy splits, randomised growth.
//! * [`ensemble`]: ensembles of trees grown with top-k randomised splits.
//! * [`bcart`]: Bayesian CART sampled by reversible-jump MCMC with restarts.
//! * [`envelope`]: outcome classification and cross-fold summaries.
//! * [`data`]: datasets, CSV ingestion, folds, the Gaussian-mixture benchmark.
//! * [`experiment`]: configuration, the end-to-end protocol and reports.

pub mod bcart;
pub mod data;
pub mod ensemble;
pub mod envelope;
pub mod error;
pub mod experiment;
pub mod posterior;
pub mod seed;
pub mod tree;

pub use data::{Dataset, LabelColumn};
pub use error::{Error, Result};
pub use posterior::ClassPosterior;
pub use tree::{DecisionTree, SplitRule};

/// How an ensemble turns member outputs into a class posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleMode {
    /// Fraction of members whose most probable class is `c`.
    #[default]
    Vote,
    /// Mean of member posteriors.
    Average,
}

impl std::str::FromStr for EnsembleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vote" => Ok(Self::Vote),
            "average" => Ok(Self::Average),
            other => Err(Error::Config(format!(
                "unknown ensemble mode {other:?} (expected vote|average)"
            ))),
        }
    }
}
