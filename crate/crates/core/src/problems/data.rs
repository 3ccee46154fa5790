use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, StamError};
use crate::sampling::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    Classes { ids: Vec<usize>, n_classes: usize },
    Targets(Vec<Vec<f64>>),
}

/// Row-major examples with class ids or real-valued targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Labels,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Labels) -> Result<Self> {
        let n = features.len();
        if n == 0 {
            return Err(StamError::Dataset("no examples".into()));
        }
        let d = features[0].len();
        for (i, row) in features.iter().enumerate() {
            if row.len() != d {
                return Err(StamError::Dataset(format!("example {i} has {} features, expected {d}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(StamError::Dataset(format!("example {i} has a non-finite feature")));
            }
        }
        match &labels {
            Labels::Classes { ids, n_classes } => {
                if ids.len() != n {
                    return Err(StamError::Dataset("label count differs from example count".into()));
                }
                if let Some((i, id)) = ids.iter().enumerate().find(|(_, &c)| c >= *n_classes) {
                    return Err(StamError::Dataset(format!("label out of range: example {i} has class {id}")));
                }
            }
            Labels::Targets(t) => {
                if t.len() != n {
                    return Err(StamError::Dataset("target count differs from example count".into()));
                }
            }
        }
        Ok(Dataset { features, labels })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn n_classes(&self) -> Option<usize> {
        match &self.labels {
            Labels::Classes { n_classes, .. } => Some(*n_classes),
            Labels::Targets(_) => None,
        }
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let features = idx.iter().map(|&i| self.features[i].clone()).collect();
        let labels = match &self.labels {
            Labels::Classes { ids, n_classes } => Labels::Classes {
                ids: idx.iter().map(|&i| ids[i]).collect(),
                n_classes: *n_classes,
            },
            Labels::Targets(t) => Labels::Targets(idx.iter().map(|&i| t[i].clone()).collect()),
        };
        Dataset { features, labels }
    }
}

/// Class means at mutual distance `separation`: the centred standard basis of
/// `R^K` expressed in an orthonormal basis of its span, padded to `d`.
fn simplex_means(n_classes: usize, d: usize, separation: f64) -> Result<Vec<Vec<f64>>> {
    if n_classes == 1 {
        return Ok(vec![vec![0.0; d]]);
    }
    if d + 1 < n_classes {
        return Err(StamError::arg(format!(
            "{n_classes} equidistant class means need at least {} dimensions",
            n_classes - 1
        )));
    }
    let k = n_classes;
    let centred: Vec<Vec<f64>> = (0..k)
        .map(|c| (0..k).map(|j| if j == c { 1.0 } else { 0.0 } - 1.0 / k as f64).collect())
        .collect();
    // Gram–Schmidt on the first K−1 centred vectors spans the whole simplex.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in centred.iter().take(k - 1) {
        let mut w = v.clone();
        for b in &basis {
            let p: f64 = w.iter().zip(b).map(|(a, c)| a * c).sum();
            w.iter_mut().zip(b).for_each(|(a, c)| *a -= p * c);
        }
        let nrm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        w.iter_mut().for_each(|a| *a /= nrm);
        basis.push(w);
    }
    let scale = separation / 2f64.sqrt();
    Ok(centred
        .iter()
        .map(|v| {
            let mut m: Vec<f64> = basis
                .iter()
                .map(|b| scale * v.iter().zip(b).map(|(a, c)| a * c).sum::<f64>())
                .collect();
            m.resize(d, 0.0);
            m
        })
        .collect())
}

/// Gaussian blobs with unit variance, `n_per_class` examples per class, stored
/// class by class.
pub fn make_blobs(
    n_per_class: usize,
    n_classes: usize,
    d: usize,
    separation: f64,
    rng: &mut RngStream,
) -> Result<Dataset> {
    if n_per_class == 0 || n_classes == 0 || d == 0 {
        return Err(StamError::arg("blobs need positive sizes"));
    }
    let means = simplex_means(n_classes, d, separation)?;
    let mut features = Vec::with_capacity(n_per_class * n_classes);
    let mut ids = Vec::with_capacity(n_per_class * n_classes);
    for (c, mean) in means.iter().enumerate() {
        for _ in 0..n_per_class {
            let row = mean
                .iter()
                .map(|m| {
                    let e: f64 = StandardNormal.sample(rng.rng());
                    m + e
                })
                .collect();
            features.push(row);
            ids.push(c);
        }
    }
    Dataset::new(features, Labels::Classes { ids, n_classes })
}

/// Seeded shuffle, then the first `round(n · test_fraction)` examples form the
/// test set.
pub fn train_test_split(
    data: &Dataset,
    test_fraction: f64,
    rng: &mut RngStream,
) -> Result<(Dataset, Dataset)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(StamError::arg(format!("test fraction {test_fraction} outside [0, 1)")));
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(rng.rng());
    let n_test = (data.len() as f64 * test_fraction).round() as usize;
    if n_test >= data.len() {
        return Err(StamError::arg("test split leaves no training examples"));
    }
    let (test, train) = idx.split_at(n_test);
    Ok((data.subset(train), data.subset(test)))
}

/// Reads a headed CSV file. The label column holds class ids in
/// `0..n_classes` when `n_classes` is given, otherwise a real target. All
/// other columns are features, in header order.
pub fn load_csv_dataset(
    path: impl AsRef<Path>,
    label_column: &str,
    n_classes: Option<usize>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| StamError::Dataset(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| StamError::Dataset(format!("{}: {e}", path.display())))?
        .clone();
    let label_idx = headers
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| StamError::Dataset(format!("unknown label column `{label_column}`")))?;

    let mut features = Vec::new();
    let mut ids = Vec::new();
    let mut targets = Vec::new();
    for (k, record) in reader.records().enumerate() {
        // header is line 1
        let line = k + 2;
        let record = record.map_err(|e| StamError::Dataset(format!("line {line}: {e}")))?;
        let mut row = Vec::with_capacity(record.len().saturating_sub(1));
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if j == label_idx {
                match n_classes {
                    Some(n_classes) => {
                        let id: usize = cell.parse().map_err(|_| {
                            StamError::Dataset(format!("line {line}: label `{cell}` is not a class id"))
                        })?;
                        if id >= n_classes {
                            return Err(StamError::Dataset(format!(
                                "line {line}: label out of range ({id} ≥ {n_classes})"
                            )));
                        }
                        ids.push(id);
                    }
                    None => {
                        let v: f64 = cell.parse().map_err(|_| {
                            StamError::Dataset(format!("line {line}: non-numeric target `{cell}`"))
                        })?;
                        targets.push(vec![v]);
                    }
                }
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                StamError::Dataset(format!(
                    "line {line}: non-numeric cell `{cell}` in column `{}`",
                    &headers[j]
                ))
            })?;
            row.push(v);
        }
        features.push(row);
    }
    if features.is_empty() {
        return Err(StamError::Dataset("no examples".into()));
    }
    let labels = match n_classes {
        Some(n_classes) => Labels::Classes { ids, n_classes },
        None => Labels::Targets(targets),
    };
    Dataset::new(features, labels)
}
