use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bcart::McmcConfig;
use crate::ensemble::EnsembleConfig;
use crate::envelope::DEFAULT_P0;
use crate::error::{Error, Result};
use crate::EnsembleMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    /// Draws from the five-kernel Gaussian mixture.
    Synthetic,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    /// Label used in reports; defaults to `synthetic` or the file stem.
    pub name: Option<String>,
    pub path: Option<PathBuf>,
    /// Column name, 0-based index, or `last`.
    pub label_column: String,
    pub train: usize,
    pub test: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            kind: DatasetKind::Synthetic,
            name: None,
            path: None,
            label_column: "last".into(),
            train: 250,
            test: 1000,
        }
    }
}

impl DatasetConfig {
    pub fn display_name(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        match (&self.kind, &self.path) {
            (DatasetKind::Csv, Some(p)) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "csv".into()),
            (DatasetKind::Csv, None) => "csv".into(),
            (DatasetKind::Synthetic, _) => "synthetic".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    Randomized,
    Bayesian,
    Both,
}

impl Technique {
    pub fn runs_randomized(self) -> bool {
        matches!(self, Technique::Randomized | Technique::Both)
    }

    pub fn runs_bayesian(self) -> bool {
        matches!(self, Technique::Bayesian | Technique::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub technique: Technique,
    pub folds: usize,
    pub p0: f64,
    pub envelope_mode: EnsembleMode,
    /// Master seed; every other seed is derived from it.
    pub seed: u64,
    /// Cross-validate the Bayesian technique as well (off: one full-train run).
    pub bayesian_cv: bool,
    /// Extra confidence levels reported as a table next to `p0`.
    pub sweep: Vec<f64>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            technique: Technique::Both,
            folds: 5,
            p0: DEFAULT_P0,
            envelope_mode: EnsembleMode::Vote,
            seed: 1,
            bayesian_cv: false,
            sweep: Vec::new(),
        }
    }
}

/// Everything needed to reproduce a run. Serialised as TOML with the
/// sections `[dataset]`, `[experiment]`, `[randomized]` and `[mcmc]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub experiment: ProtocolConfig,
    #[serde(with = "ensemble_section")]
    pub randomized: EnsembleConfig,
    #[serde(with = "mcmc_section")]
    pub mcmc: McmcConfig,
}

/// Named bundles of run sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 10 restarts of 500 + 500 steps, 50 trees.
    Desk,
    /// 50 restarts of 2000 + 2000 steps, 200 trees.
    Paper,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            other => Err(Error::Config(format!(
                "unknown preset {other:?} (expected desk|paper)"
            ))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Desk => "desk",
            Preset::Paper => "paper",
        })
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; a relative dataset path is resolved against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let (Some(p), Some(dir)) = (&cfg.dataset.path, path.parent()) {
            if p.is_relative() {
                cfg.dataset.path = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    pub fn apply_preset(&mut self, preset: Preset) {
        let (restarts, steps, trees) = match preset {
            Preset::Desk => (10, 500, 50),
            Preset::Paper => (50, 2000, 200),
        };
        self.mcmc.restarts = restarts;
        self.mcmc.burn_in = steps;
        self.mcmc.post_burn_in = steps;
        self.randomized.n_trees = trees;
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.experiment.technique;
        if (t.runs_randomized() || (t.runs_bayesian() && self.experiment.bayesian_cv))
            && self.experiment.folds < 2
        {
            return Err(Error::Config(format!(
                "cross-validation needs at least 2 folds, got {}",
                self.experiment.folds
            )));
        }
        for &p in std::iter::once(&self.experiment.p0).chain(&self.experiment.sweep) {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Config(format!("p0 = {p} outside (0, 1]")));
            }
        }
        if t.runs_randomized() {
            if self.randomized.n_trees == 0 || self.randomized.top_k == 0 {
                return Err(Error::Config("n_trees and top_k must be at least 1".into()));
            }
            if self.randomized.min_leaf == Some(0) {
                return Err(Error::Config("min_leaf must be at least 1".into()));
            }
        }
        if t.runs_bayesian() {
            self.mcmc.validate()?;
        }
        match self.dataset.kind {
            DatasetKind::Synthetic if self.dataset.train == 0 || self.dataset.test == 0 => {
                Err(Error::Config("synthetic train and test sizes must be positive".into()))
            }
            DatasetKind::Csv if self.dataset.path.is_none() => {
                Err(Error::Config("csv dataset needs `path`".into()))
            }
            _ => Ok(()),
        }
    }
}

// The technique seeds are derived from the master seed by the experiment, so
// they are not part of the file format.
mod ensemble_section {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(default, deny_unknown_fields)]
    struct Section {
        n_trees: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        min_leaf: Option<usize>,
        top_k: usize,
    }

    impl Default for Section {
        fn default() -> Self {
            let d = EnsembleConfig::default();
            Self {
                n_trees: d.n_trees,
                min_leaf: d.min_leaf,
                top_k: d.top_k,
            }
        }
    }

    pub fn serialize<S: serde::Serializer>(c: &EnsembleConfig, s: S) -> Result<S::Ok, S::Error> {
        Section {
            n_trees: c.n_trees,
            min_leaf: c.min_leaf,
            top_k: c.top_k,
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<EnsembleConfig, D::Error> {
        let s = Section::deserialize(d)?;
        Ok(EnsembleConfig {
            n_trees: s.n_trees,
            min_leaf: s.min_leaf,
            top_k: s.top_k,
            seed: 0,
        })
    }
}

mod mcmc_section {
    use super::*;
    use crate::bcart::MoveProbs;

    #[derive(Serialize, Deserialize)]
    #[serde(default, deny_unknown_fields)]
    struct Section {
        restarts: usize,
        burn_in: usize,
        post_burn_in: usize,
        move_probs: MoveProbs,
        max_leaves: usize,
        thinning: usize,
        alpha: f64,
    }

    impl Default for Section {
        fn default() -> Self {
            from(&McmcConfig::default())
        }
    }

    fn from(c: &McmcConfig) -> Section {
        Section {
            restarts: c.restarts,
            burn_in: c.burn_in,
            post_burn_in: c.post_burn_in,
            move_probs: c.move_probs,
            max_leaves: c.max_leaves,
            thinning: c.thinning,
            alpha: c.alpha,
        }
    }

    pub fn serialize<S: serde::Serializer>(c: &McmcConfig, s: S) -> Result<S::Ok, S::Error> {
        from(c).serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<McmcConfig, D::Error> {
        let s = Section::deserialize(d)?;
        Ok(McmcConfig {
            restarts: s.restarts,
            burn_in: s.burn_in,
            post_burn_in: s.post_burn_in,
            move_probs: s.move_probs,
            max_leaves: s.max_leaves,
            thinning: s.thinning,
            alpha: s.alpha,
            seed: 0,
        })
    }
}
