//! Uncertainty envelope.
//!
//! An ensemble outcome for a test datum is *confident* when the top class
//! probability reaches the confidence level `p0`. Confident outcomes are
//! split by whether the top class is the true label; everything else is
//! uncertain. The rates of the three outcomes over a test set summarise how
//! much of a classifier's output can be trusted at level `p0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posterior::{ClassPosterior, SUM_TOLERANCE};

pub const DEFAULT_P0: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnvelopeOutcome {
    ConfidentlyCorrect,
    Uncertain,
    ConfidentlyIncorrect,
}

/// Smallest possible top-class probability, `1/C`.
pub fn p_min(num_classes: usize) -> Result<f64> {
    if num_classes < 2 {
        return Err(Error::TooFewClasses(num_classes));
    }
    Ok(1.0 / num_classes as f64)
}

fn check_p0(p0: f64, num_classes: usize) -> Result<()> {
    let p_min = p_min(num_classes)?;
    if !(p0 > p_min && p0 <= 1.0) {
        return Err(Error::InvalidConfidence { p0, p_min });
    }
    Ok(())
}

pub fn classify_outcome(
    posterior: &ClassPosterior,
    true_label: usize,
    p0: f64,
) -> Result<EnvelopeOutcome> {
    let probs = posterior.probs();
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidPosterior(format!("entries sum to {sum}")));
    }
    if true_label >= probs.len() {
        return Err(Error::LabelOutOfRange {
            label: true_label,
            num_classes: probs.len(),
        });
    }
    check_p0(p0, probs.len())?;
    let top = posterior.argmax();
    Ok(if probs[top] < p0 {
        EnvelopeOutcome::Uncertain
    } else if top == true_label {
        EnvelopeOutcome::ConfidentlyCorrect
    } else {
        EnvelopeOutcome::ConfidentlyIncorrect
    })
}

/// Outcome rates and plain accuracy over one test set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRates {
    pub correct: f64,
    pub uncertain: f64,
    pub incorrect: f64,
    pub accuracy: f64,
    pub n: usize,
}

/// 2 × sample standard deviation across folds, per rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSigmaWidths {
    pub correct: f64,
    pub uncertain: f64,
    pub incorrect: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSummary {
    pub rate_correct: f64,
    pub rate_uncertain: f64,
    pub rate_incorrect: f64,
    pub accuracy: f64,
    /// Per-fold rates; empty for a single evaluation.
    pub per_fold: Vec<EnvelopeRates>,
    /// Present only for cross-fold summaries.
    pub two_sigma: Option<TwoSigmaWidths>,
}

impl EnvelopeSummary {
    /// Summary of a single evaluation (no folds).
    pub fn from_rates(r: EnvelopeRates) -> Self {
        Self {
            rate_correct: r.correct,
            rate_uncertain: r.uncertain,
            rate_incorrect: r.incorrect,
            accuracy: r.accuracy,
            per_fold: Vec::new(),
            two_sigma: None,
        }
    }

    pub fn rates(&self) -> EnvelopeRates {
        EnvelopeRates {
            correct: self.rate_correct,
            uncertain: self.rate_uncertain,
            incorrect: self.rate_incorrect,
            accuracy: self.accuracy,
            n: 0,
        }
    }
}

pub fn envelope_rates(
    posteriors: &[ClassPosterior],
    labels: &[usize],
    p0: f64,
) -> Result<EnvelopeSummary> {
    Ok(EnvelopeSummary::from_rates(fold_rates(posteriors, labels, p0)?))
}

/// Single-fold rates with the test-set size attached.
pub fn fold_rates(posteriors: &[ClassPosterior], labels: &[usize], p0: f64) -> Result<EnvelopeRates> {
    if posteriors.len() != labels.len() {
        return Err(Error::LengthMismatch(posteriors.len(), labels.len()));
    }
    if posteriors.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (mut cc, mut un, mut ci, mut hits) = (0usize, 0usize, 0usize, 0usize);
    for (p, &y) in posteriors.iter().zip(labels) {
        match classify_outcome(p, y, p0)? {
            EnvelopeOutcome::ConfidentlyCorrect => cc += 1,
            EnvelopeOutcome::Uncertain => un += 1,
            EnvelopeOutcome::ConfidentlyIncorrect => ci += 1,
        }
        if p.argmax() == y {
            hits += 1;
        }
    }
    let n = posteriors.len() as f64;
    Ok(EnvelopeRates {
        correct: cc as f64 / n,
        uncertain: un as f64 / n,
        incorrect: ci as f64 / n,
        accuracy: hits as f64 / n,
        n: posteriors.len(),
    })
}

/// Mean of each rate across folds, with widths of 2 × the sample standard
/// deviation.
pub fn cross_fold_summary(folds: &[EnvelopeSummary]) -> Result<EnvelopeSummary> {
    if folds.len() < 2 {
        return Err(Error::TooFewFolds(folds.len()));
    }
    let stat = |f: fn(&EnvelopeSummary) -> f64| {
        crate::ensemble::mean_std(folds.iter().map(f))
    };
    let (c, c_sd) = stat(|s| s.rate_correct);
    let (u, u_sd) = stat(|s| s.rate_uncertain);
    let (i, i_sd) = stat(|s| s.rate_incorrect);
    let (a, a_sd) = stat(|s| s.accuracy);
    Ok(EnvelopeSummary {
        rate_correct: c,
        rate_uncertain: u,
        rate_incorrect: i,
        accuracy: a,
        per_fold: folds
            .iter()
            .map(|s| {
                let mut r = s.rates();
                r.n = s.per_fold.first().map_or(0, |f| f.n);
                r
            })
            .collect(),
        two_sigma: Some(TwoSigmaWidths {
            correct: 2.0 * c_sd,
            uncertain: 2.0 * u_sd,
            incorrect: 2.0 * i_sd,
            accuracy: 2.0 * a_sd,
        }),
    })
}

/// Cross-fold summary of per-fold rate records.
pub fn summarize_folds(folds: &[EnvelopeRates]) -> Result<EnvelopeSummary> {
    let summaries: Vec<EnvelopeSummary> = folds
        .iter()
        .map(|r| {
            let mut s = EnvelopeSummary::from_rates(*r);
            s.per_fold.push(*r);
            s
        })
        .collect();
    cross_fold_summary(&summaries)
}
