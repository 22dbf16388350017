//! Datasets, CSV ingestion, fold splitting and the synthetic Gaussian-mixture
//! benchmark.

mod mixture;

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

pub use mixture::{
    bayes_posterior, estimate_bayes_error, make_paper_mixture, sample_mixture, GaussianComponent,
    GaussianMixtureSpec,
};

/// Feature matrix (row-major) with dense integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<usize>,
    num_classes: usize,
    feature_names: Vec<String>,
    class_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        num_classes: usize,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let n_features = feature_names.len();
        let mut features = Vec::with_capacity(rows.len() * n_features);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::RaggedRow {
                    row: i,
                    found: row.len(),
                    expected: n_features,
                });
            }
            features.extend(row);
        }
        Self::from_flat(features, labels, num_classes, feature_names)
    }

    pub fn from_flat(
        features: Vec<f64>,
        labels: Vec<usize>,
        num_classes: usize,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if num_classes < 2 {
            return Err(Error::TooFewClasses(num_classes));
        }
        let n_features = feature_names.len();
        if features.len() != labels.len() * n_features {
            return Err(Error::RaggedRow {
                row: features.len() / n_features.max(1),
                found: features.len(),
                expected: labels.len() * n_features,
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::LabelOutOfRange { label, num_classes });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                row: pos / n_features,
                column: pos % n_features,
                name: feature_names[pos % n_features].clone(),
                value: features[pos].to_string(),
            });
        }
        Ok(Self {
            features,
            n_features,
            labels,
            num_classes,
            feature_names,
            class_names: (0..num_classes).map(|c| c.to_string()).collect(),
        })
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.num_classes);
        self.class_names = names;
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn value(&self, i: usize, feature: usize) -> f64 {
        self.features[i * self.n_features + feature]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.features.chunks_exact(self.n_features)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Per-class counts over the given row indices.
    pub fn class_counts(&self, indices: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &i in indices {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    /// Rows `indices` in order, keeping the class space of `self`.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            features,
            n_features: self.n_features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
        }
    }

    /// Shuffles with `seed` and takes the first `train` rows for training and
    /// the next `test` rows for testing.
    pub fn train_test_split(
        &self,
        train: usize,
        test: usize,
        seed: u64,
    ) -> Result<(Dataset, Dataset)> {
        if train == 0 || test == 0 || train + test > self.len() {
            return Err(Error::Config(format!(
                "train {train} + test {test} does not fit {} rows",
                self.len()
            )));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut rng_from_seed(seed));
        Ok((
            self.subset(&order[..train]),
            self.subset(&order[train..train + test]),
        ))
    }

    /// Writes the dataset in the repository CSV schema: one header row with
    /// the feature names followed by `class`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.feature_names.clone();
        header.push("class".to_string());
        w.write_record(&header)?;
        for (row, &label) in self.rows().zip(&self.labels) {
            let mut record: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            record.push(self.class_names[label].clone());
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<csv output>".into(),
            source: e,
        })?;
        Ok(())
    }
}

/// Selects the label column of a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    Last,
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "last" | "" => LabelColumn::Last,
            _ => match s.parse::<usize>() {
                Ok(i) => LabelColumn::Index(i),
                Err(_) => LabelColumn::Name(s.to_string()),
            },
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Name(n) => f.write_str(n),
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Last => f.write_str("last"),
        }
    }
}

/// Loads a comma-separated file with one header row.
///
/// Labels are re-encoded as `0..C` in order of first appearance; every other
/// column must parse as a real number.
pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, label)
}

pub fn read_csv<R: std::io::Read>(input: R, label: &LabelColumn) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let label_idx = match label {
        LabelColumn::Name(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnknownLabelColumn(name.clone()))?,
        LabelColumn::Index(i) if *i < header.len() => *i,
        LabelColumn::Index(i) => return Err(Error::UnknownLabelColumn(i.to_string())),
        LabelColumn::Last if !header.is_empty() => header.len() - 1,
        LabelColumn::Last => return Err(Error::UnknownLabelColumn("last".into())),
    };
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut class_index: HashMap<String, usize> = HashMap::new();
    let mut class_names = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row,
                found: record.len(),
                expected: header.len(),
            });
        }
        for (column, cell) in record.iter().enumerate() {
            if column == label_idx {
                let next = class_index.len();
                let id = *class_index.entry(cell.to_string()).or_insert_with(|| {
                    class_names.push(cell.to_string());
                    next
                });
                labels.push(id);
            } else {
                let value = cell
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        row,
                        column,
                        name: header[column].clone(),
                        value: cell.to_string(),
                    })?;
                features.push(value);
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if class_names.len() < 2 {
        return Err(Error::SingleClass);
    }
    Ok(Dataset::from_flat(features, labels, class_names.len(), feature_names)?
        .with_class_names(class_names))
}

/// Assignment of each datum to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    assignments: Vec<usize>,
    k: usize,
}

impl FoldSplit {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    /// Indices held out in fold `fold`, ascending.
    pub fn held_out(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    /// Indices used for training when `fold` is held out, ascending.
    pub fn training(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Random permutation of `0..n` cut into `k` contiguous folds whose sizes
/// differ by at most one (the first `n mod k` folds get the extra item).
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 || n < k {
        return Err(Error::InvalidFolds { n, k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let base = n / k;
    let extra = n % k;
    let mut assignments = vec![0; n];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &i in &order[pos..pos + size] {
            assignments[i] = fold;
        }
        pos += size;
    }
    Ok(FoldSplit { assignments, k })
}
