//! End-to-end protocol.
//!
//! The randomised technique is cross-validated on the training data: each
//! fold trains an ensemble on the other folds, is evaluated on the shared
//! test set, and picks its best single tree on the held-out fold. The
//! Bayesian technique runs once on the full training set (optionally per
//! fold as well). Every random stream is derived from the master seed.

mod config;
mod report;

use std::io::Write;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bcart::{self, MoveStats};
use crate::data::{kfold_split, load_csv, make_paper_mixture, sample_mixture, Dataset, FoldSplit};
use crate::ensemble::{best_single_tree, mean_std, train_ensemble, tree_accuracy};
use crate::envelope::{fold_rates, p_min, summarize_folds, EnvelopeRates, EnvelopeSummary};
use crate::ClassPosterior;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, Stream};
use crate::LabelColumn;

pub use config::{DatasetConfig, DatasetKind, ExperimentConfig, Preset, ProtocolConfig, Technique};
pub use report::{emit_report, ReportFormat};

/// Which technique a [`TechniqueReport`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TechniqueKind {
    Randomized,
    Bayesian,
}

impl TechniqueKind {
    pub fn name(self) -> &'static str {
        match self {
            TechniqueKind::Randomized => "randomized",
            TechniqueKind::Bayesian => "bayesian",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub num_classes: usize,
}

/// Best member of a fold's ensemble, chosen on the held-out fold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleTree {
    pub index: usize,
    pub validation_accuracy: f64,
    pub test_accuracy: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub size_mean: f64,
    pub size_std: f64,
    pub rates: EnvelopeRates,
    pub single_tree: Option<SingleTree>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechniqueReport {
    pub technique: TechniqueKind,
    /// Leaf counts pooled over every ensemble member (or retained sample).
    pub size_mean: f64,
    pub size_std: f64,
    pub envelope: EnvelopeSummary,
    /// Mean test accuracy of the per-fold best single trees and its 2σ width.
    pub single_tree_accuracy: Option<(f64, f64)>,
    pub folds: Vec<FoldReport>,
    pub move_stats: Option<MoveStats>,
    /// Trees per fold or retained samples per run.
    pub members: usize,
    pub min_leaf: Option<usize>,
    /// Envelope at each extra confidence level, in config order.
    pub sweep: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub p0: f64,
    pub envelope: EnvelopeSummary,
}

impl TechniqueReport {
    pub fn accuracy(&self) -> f64 {
        self.envelope.accuracy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: DatasetSummary,
    pub config: ExperimentConfig,
    pub techniques: Vec<TechniqueReport>,
    /// Wall-clock time. Not part of the emitted report.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl ExperimentReport {
    pub fn technique(&self, kind: TechniqueKind) -> Option<&TechniqueReport> {
        self.techniques.iter().find(|t| t.technique == kind)
    }
}

/// Train and test sets as described by `config`.
pub fn load_datasets(config: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let ds = &config.dataset;
    let seed = config.experiment.seed;
    match ds.kind {
        DatasetKind::Synthetic => {
            let mix = make_paper_mixture();
            Ok((
                sample_mixture(&mix, ds.train, derive_seed(seed, Stream::TrainData, 0))?,
                sample_mixture(&mix, ds.test, derive_seed(seed, Stream::TestData, 0))?,
            ))
        }
        DatasetKind::Csv => {
            let path = ds
                .path
                .as_ref()
                .ok_or_else(|| Error::Config("csv dataset needs `path`".into()))?;
            let label: LabelColumn = ds.label_column.parse().unwrap_or(LabelColumn::Last);
            let all = load_csv(path, &label)?;
            all.train_test_split(ds.train, ds.test, derive_seed(seed, Stream::Split, 0))
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_traced(config, None)
}

/// As [`run_experiment`], also writing the Bayesian chain trace to `trace`.
/// With Bayesian cross-validation each fold's trace follows a `# fold f` line.
pub fn run_experiment_traced(
    config: &ExperimentConfig,
    trace: Option<&mut dyn Write>,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    config.validate()?;
    let (train, test) = load_datasets(config)?;
    let pm = p_min(train.num_classes())?;
    for &p0 in std::iter::once(&config.experiment.p0).chain(&config.experiment.sweep) {
        if !(p0 > pm && p0 <= 1.0) {
            return Err(Error::InvalidConfidence { p0, p_min: pm });
        }
    }

    let technique = config.experiment.technique;
    let needs_folds =
        technique.runs_randomized() || (technique.runs_bayesian() && config.experiment.bayesian_cv);
    let folds = if needs_folds {
        Some(kfold_split(
            train.len(),
            config.experiment.folds,
            derive_seed(config.experiment.seed, Stream::Folds, 0),
        )?)
    } else {
        None
    };

    let mut techniques = Vec::new();
    if technique.runs_randomized() {
        techniques.push(run_randomized(config, &train, &test, folds.as_ref().unwrap())?);
    }
    if technique.runs_bayesian() {
        techniques.push(run_bayesian(config, &train, &test, folds.as_ref(), trace)?);
    }

    Ok(ExperimentReport {
        dataset: DatasetSummary {
            name: config.dataset.display_name(),
            n_train: train.len(),
            n_test: test.len(),
            n_features: train.n_features(),
            num_classes: train.num_classes(),
        },
        config: config.clone(),
        techniques,
        elapsed: start.elapsed(),
    })
}

fn run_randomized(
    config: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
    folds: &FoldSplit,
) -> Result<TechniqueReport> {
    let exp = &config.experiment;
    let mut reports = Vec::with_capacity(folds.k());
    let mut sizes = Vec::new();
    let mut min_leaf = None;
    let mut fold_posteriors = Vec::with_capacity(folds.k());
    for f in 0..folds.k() {
        let fold_train = train.subset(&folds.training(f));
        let validation = train.subset(&folds.held_out(f));
        let cfg = crate::ensemble::EnsembleConfig {
            seed: derive_seed(exp.seed, Stream::Fold, f as u64),
            ..config.randomized.clone()
        };
        let ens = train_ensemble(&fold_train, &cfg);
        min_leaf = Some(ens.min_leaf());
        let posteriors: Vec<_> = test.rows().map(|x| ens.posterior(x, exp.envelope_mode)).collect();
        let rates = fold_rates(&posteriors, test.labels(), exp.p0)?;
        fold_posteriors.push(posteriors);
        let (index, validation_accuracy) = best_single_tree(&ens, &validation);
        let best = &ens.trees()[index];
        let (size_mean, size_std) = ens.size_stats();
        sizes.extend(ens.trees().iter().map(|t| t.tree_size() as f64));
        reports.push(FoldReport {
            fold: f,
            n_train: fold_train.len(),
            size_mean,
            size_std,
            rates,
            single_tree: Some(SingleTree {
                index,
                validation_accuracy,
                test_accuracy: tree_accuracy(best, test),
                size: best.tree_size(),
            }),
        });
    }
    let envelope = summarize_folds(&reports.iter().map(|r| r.rates).collect::<Vec<_>>())?;
    let (single_mean, single_sd) = mean_std(
        reports
            .iter()
            .filter_map(|r| r.single_tree.map(|s| s.test_accuracy)),
    );
    let (size_mean, size_std) = mean_std(sizes.into_iter());
    Ok(TechniqueReport {
        technique: TechniqueKind::Randomized,
        size_mean,
        size_std,
        envelope,
        single_tree_accuracy: Some((single_mean, 2.0 * single_sd)),
        folds: reports,
        move_stats: None,
        members: config.randomized.n_trees.max(1),
        min_leaf,
        sweep: sweep(&exp.sweep, &fold_posteriors, test.labels())?,
    })
}

/// Envelope at each level in `levels`, summarised across the posterior sets.
fn sweep(levels: &[f64], per_fold: &[Vec<ClassPosterior>], labels: &[usize]) -> Result<Vec<SweepPoint>> {
    levels
        .iter()
        .map(|&p0| {
            let rates = per_fold
                .iter()
                .map(|ps| fold_rates(ps, labels, p0))
                .collect::<Result<Vec<_>>>()?;
            let envelope = if rates.len() == 1 {
                EnvelopeSummary::from_rates(rates[0])
            } else {
                summarize_folds(&rates)?
            };
            Ok(SweepPoint { p0, envelope })
        })
        .collect()
}

fn trace_error(source: std::io::Error) -> Error {
    Error::Io {
        path: "chain trace".into(),
        source,
    }
}

type BayesRun = (EnvelopeRates, bcart::PosteriorEnsemble, Vec<ClassPosterior>);

fn run_bayesian(
    config: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
    folds: Option<&FoldSplit>,
    mut trace: Option<&mut dyn Write>,
) -> Result<TechniqueReport> {
    let exp = &config.experiment;
    let mcmc_for = |index: u64| bcart::McmcConfig {
        seed: derive_seed(exp.seed, Stream::Bayesian, index),
        ..config.mcmc.clone()
    };
    let mut evaluate = |data: &Dataset, index: u64| -> Result<BayesRun> {
        let ens = bcart::run_with_restarts(data, &mcmc_for(index))?;
        if let Some(out) = trace.as_deref_mut() {
            if index > 0 {
                writeln!(out, "# fold {}", index - 1).map_err(trace_error)?;
            }
            ens.write_trace(&mut *out).map_err(trace_error)?;
        }
        let posteriors = bcart::predict_dataset(&ens, test, exp.envelope_mode);
        Ok((fold_rates(&posteriors, test.labels(), exp.p0)?, ens, posteriors))
    };

    match folds.filter(|_| exp.bayesian_cv) {
        None => {
            let (rates, ens, posteriors) = evaluate(train, 0)?;
            let (size_mean, size_std) = bcart::ensemble_mean_size(&ens);
            Ok(TechniqueReport {
                technique: TechniqueKind::Bayesian,
                size_mean,
                size_std,
                envelope: EnvelopeSummary::from_rates(rates),
                single_tree_accuracy: None,
                folds: Vec::new(),
                move_stats: Some(*ens.stats()),
                members: ens.len(),
                min_leaf: None,
                sweep: sweep(&exp.sweep, &[posteriors], test.labels())?,
            })
        }
        Some(folds) => {
            let mut reports = Vec::with_capacity(folds.k());
            let mut sizes = Vec::new();
            let mut stats = MoveStats::default();
            let mut members = 0;
            let mut fold_posteriors = Vec::with_capacity(folds.k());
            for f in 0..folds.k() {
                let fold_train = train.subset(&folds.training(f));
                let (rates, ens, posteriors) = evaluate(&fold_train, 1 + f as u64)?;
                fold_posteriors.push(posteriors);
                let (size_mean, size_std) = bcart::ensemble_mean_size(&ens);
                sizes.extend(ens.samples().iter().map(|s| s.tree.tree_size() as f64));
                stats.merge(ens.stats());
                members = ens.len();
                reports.push(FoldReport {
                    fold: f,
                    n_train: fold_train.len(),
                    size_mean,
                    size_std,
                    rates,
                    single_tree: None,
                });
            }
            let envelope = summarize_folds(&reports.iter().map(|r| r.rates).collect::<Vec<_>>())?;
            let (size_mean, size_std) = mean_std(sizes.into_iter());
            Ok(TechniqueReport {
                technique: TechniqueKind::Bayesian,
                size_mean,
                size_std,
                envelope,
                single_tree_accuracy: None,
                folds: reports,
                move_stats: Some(stats),
                members,
                min_leaf: None,
                sweep: sweep(&exp.sweep, &fold_posteriors, test.labels())?,
            })
        }
    }
}
