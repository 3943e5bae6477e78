//! Dataset loading, cross-validation splits, target statistics and error
//! metrics.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::expr::Semantics;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: no data rows")]
    Empty { path: String },
    #[error("{path}: row {row}, column {col}: cannot parse {value:?} as a number")]
    NonNumeric {
        path: String,
        row: usize,
        col: usize,
        value: String,
    },
    #[error("{path}: row {row}, column {col}: non-finite value")]
    NonFinite { path: String, row: usize, col: usize },
    #[error("{path}: row {row} has {found} columns, expected {expected}")]
    Ragged {
        path: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("target column {col} out of range for {ncols} columns")]
    TargetColumnOutOfRange { col: usize, ncols: usize },
    #[error("a dataset needs at least one feature column and one row")]
    Degenerate,
    #[error("dataset values must be finite")]
    NonFiniteValue,
    #[error("rows have inconsistent widths")]
    InconsistentWidths,
    #[error("k-fold split needs 2 <= k <= n, got k={k} with n={n}")]
    BadFoldCount { k: usize, n: usize },
    #[error("target standard deviation needs at least 2 rows, got {n}")]
    TooFewRows { n: usize },
    #[error("length mismatch: predicted has {predicted}, target has {target}")]
    LengthMismatch { predicted: usize, target: usize },
}

/// A feature matrix plus a target vector.
#[derive(Debug, Clone)]
pub struct Dataset {
    name: String,
    features: Vec<Vec<f64>>,
    target: Vec<f64>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: Vec<Vec<f64>>,
        target: Vec<f64>,
    ) -> Result<Self, DataError> {
        if features.is_empty() || features[0].is_empty() || features.len() != target.len() {
            return Err(DataError::Degenerate);
        }
        let width = features[0].len();
        if features.iter().any(|row| row.len() != width) {
            return Err(DataError::InconsistentWidths);
        }
        let all_finite = features
            .iter()
            .flat_map(|row| row.iter())
            .chain(target.iter())
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(DataError::NonFiniteValue);
        }
        Ok(Dataset {
            name: name.into(),
            features,
            target,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of rows.
    pub fn n(&self) -> usize {
        self.target.len()
    }

    /// Number of feature columns.
    pub fn d(&self) -> usize {
        self.features[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }
}

/// Which CSV column holds the regression target.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TargetColumn {
    #[default]
    Last,
    Index(usize),
}

/// Loads a numeric CSV file. A header line is detected automatically: if any
/// cell of the first row fails to parse as a number, that row is skipped.
/// The target is extracted from the designated column (last by default) and
/// the remaining columns become features in file order.
pub fn load_csv(path: impl AsRef<Path>, target: TargetColumn) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: display.clone(),
        source,
    })?;

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let first = lines.next().ok_or(DataError::Empty {
        path: display.clone(),
    })?;
    let first_cells: Vec<&str> = first.1.split(',').map(str::trim).collect();
    let header_present = first_cells.iter().any(|c| c.parse::<f64>().is_err());

    let ncols = first_cells.len();
    let target_idx = match target {
        TargetColumn::Last => ncols - 1,
        TargetColumn::Index(i) if i < ncols => i,
        TargetColumn::Index(i) => {
            return Err(DataError::TargetColumnOutOfRange { col: i, ncols });
        }
    };
    if ncols < 2 {
        return Err(DataError::Degenerate);
    }

    let mut features = Vec::new();
    let mut target_values = Vec::new();
    let data_lines: Vec<(usize, &str)> = if header_present {
        lines.collect()
    } else {
        std::iter::once(first).chain(lines).collect()
    };
    if data_lines.is_empty() {
        return Err(DataError::Empty { path: display });
    }

    for (line_no, line) in data_lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != ncols {
            return Err(DataError::Ragged {
                path: display,
                row: line_no,
                expected: ncols,
                found: cells.len(),
            });
        }
        let mut row = Vec::with_capacity(ncols - 1);
        for (col, cell) in cells.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| DataError::NonNumeric {
                path: display.clone(),
                row: line_no,
                col: col + 1,
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(DataError::NonFinite {
                    path: display,
                    row: line_no,
                    col: col + 1,
                });
            }
            if col == target_idx {
                target_values.push(value);
            } else {
                row.push(value);
            }
        }
        features.push(row);
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| display.clone());
    Dataset::new(name, features, target_values)
}

/// Assignment of every row to one of `k` folds; sizes differ by at most one.
#[derive(Debug, Clone, Serialize)]
pub struct FoldAssignment {
    fold_of: Vec<usize>,
    k: usize,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self) -> &[usize] {
        &self.fold_of
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }

    /// Materializes (train, test) datasets where `fold` is held out.
    pub fn split(&self, dataset: &Dataset, fold: usize) -> (Dataset, Dataset) {
        assert!(fold < self.k);
        let mut train_rows = Vec::new();
        let mut train_target = Vec::new();
        let mut test_rows = Vec::new();
        let mut test_target = Vec::new();
        for (i, row) in dataset.rows().iter().enumerate() {
            if self.fold_of[i] == fold {
                test_rows.push(row.clone());
                test_target.push(dataset.target()[i]);
            } else {
                train_rows.push(row.clone());
                train_target.push(dataset.target()[i]);
            }
        }
        let train = Dataset::new(
            format!("{}[fold{}|train]", dataset.name(), fold),
            train_rows,
            train_target,
        )
        .expect("train partition is well-formed");
        let test = Dataset::new(
            format!("{}[fold{}|test]", dataset.name(), fold),
            test_rows,
            test_target,
        )
        .expect("test partition is well-formed");
        (train, test)
    }
}

/// Deterministic k-fold assignment: rows are shuffled under the seed and then
/// assigned round-robin, so the same seed always yields the same folds.
pub fn kfold_split(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment, DataError> {
    let n = dataset.n();
    if k < 2 || k > n {
        return Err(DataError::BadFoldCount { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut fold_of = vec![0usize; n];
    for (position, &row) in order.iter().enumerate() {
        fold_of[row] = position % k;
    }
    Ok(FoldAssignment { fold_of, k })
}

/// Population standard deviation (divisor n) of the target vector.
pub fn target_std(dataset: &Dataset) -> Result<f64, DataError> {
    let t = dataset.target();
    let n = t.len();
    if n < 2 {
        return Err(DataError::TooFewRows { n });
    }
    let mean = t.iter().sum::<f64>() / n as f64;
    let var = t.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    Ok(var.sqrt())
}

/// Root mean square error between a semantics vector and the target.
pub fn rmse(predicted: &Semantics, target: &[f64]) -> Result<f64, DataError> {
    if predicted.len() != target.len() {
        return Err(DataError::LengthMismatch {
            predicted: predicted.len(),
            target: target.len(),
        });
    }
    Ok(rmse_unchecked(predicted.as_slice(), target))
}

pub(crate) fn rmse_unchecked(predicted: &[f64], target: &[f64]) -> f64 {
    debug_assert_eq!(predicted.len(), target.len());
    let n = target.len() as f64;
    let sum: f64 = predicted
        .iter()
        .zip(target)
        .map(|(p, y)| (p - y) * (p - y))
        .sum();
    (sum / n).sqrt()
}

/// Synthetic regression problems used by the examples and the test suite in
/// place of external data files.
pub mod synthetic {
    use super::Dataset;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// y = x0 * x1 + x2 (+ uniform noise), features uniform in [-1, 1].
    pub fn product_plus_term(n: usize, seed: u64, noise: f64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(n);
        let mut target = Vec::with_capacity(n);
        for _ in 0..n {
            let x0 = rng.gen_range(-1.0..=1.0);
            let x1 = rng.gen_range(-1.0..=1.0);
            let x2 = rng.gen_range(-1.0..=1.0);
            let eps = if noise > 0.0 {
                rng.gen_range(-noise..=noise)
            } else {
                0.0
            };
            rows.push(vec![x0, x1, x2]);
            target.push(x0 * x1 + x2 + eps);
        }
        Dataset::new("product-plus-term", rows, target).expect("generator is well-formed")
    }

    /// y = x0 / sqrt(1 + x1^2) + 0.5 * x2, features uniform in [-2, 2].
    pub fn damped_ratio(n: usize, seed: u64, noise: f64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(n);
        let mut target = Vec::with_capacity(n);
        for _ in 0..n {
            let x0: f64 = rng.gen_range(-2.0..=2.0);
            let x1: f64 = rng.gen_range(-2.0..=2.0);
            let x2: f64 = rng.gen_range(-2.0..=2.0);
            let eps = if noise > 0.0 {
                rng.gen_range(-noise..=noise)
            } else {
                0.0
            };
            rows.push(vec![x0, x1, x2]);
            target.push(x0 / (1.0 + x1 * x1).sqrt() + 0.5 * x2 + eps);
        }
        Dataset::new("damped-ratio", rows, target).expect("generator is well-formed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn temp_csv(name: &str, contents: &str) -> std::path::PathBuf {
        let mut path = std::env::temp_dir();
        path.push(format!("gsgp_red_data_test_{}_{}.csv", std::process::id(), name));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_plain_numeric_csv() {
        let p = temp_csv("plain", "1,2,5\n2,3,8\n0,0,0\n");
        let ds = load_csv(&p, TargetColumn::Last).unwrap();
        assert_eq!(ds.n(), 3);
        assert_eq!(ds.d(), 2);
        assert_eq!(ds.target(), &[5.0, 8.0, 0.0]);
        std::fs::remove_file(p).ok();
    }

    #[test]
    fn detects_and_skips_header() {
        let p = temp_csv("header", "a,b,y\n1.5,2.5,4.0\n");
        let ds = load_csv(&p, TargetColumn::Last).unwrap();
        assert_eq!(ds.n(), 1);
        assert_eq!(ds.d(), 2);
        assert_eq!(ds.target(), &[4.0]);
        std::fs::remove_file(p).ok();
    }

    #[test]
    fn seven_columns_give_six_features() {
        // same shape as the yacht data: 6 features + trailing target
        let p = temp_csv("yacht", "1,2,3,4,5,6,9\n7,6,5,4,3,2,1\n");
        let ds = load_csv(&p, TargetColumn::Last).unwrap();
        assert_eq!(ds.d(), 6);
        assert_eq!(ds.target(), &[9.0, 1.0]);
        std::fs::remove_file(p).ok();
    }

    #[test]
    fn reports_bad_cells_with_position() {
        let p = temp_csv("bad", "1,2,3\n4,oops,6\n");
        match load_csv(&p, TargetColumn::Last) {
            Err(DataError::NonNumeric { row, col, value, .. }) => {
                assert_eq!((row, col), (2, 2));
                assert_eq!(value, "oops");
            }
            other => panic!("unexpected: {other:?}"),
        }
        std::fs::remove_file(p).ok();
    }

    #[test]
    fn rejects_ragged_and_empty_files() {
        let p = temp_csv("ragged", "1,2,3\n4,5\n");
        assert!(matches!(
            load_csv(&p, TargetColumn::Last),
            Err(DataError::Ragged { row: 2, .. })
        ));
        std::fs::remove_file(p).ok();

        let p = temp_csv("empty", "");
        assert!(matches!(
            load_csv(&p, TargetColumn::Last),
            Err(DataError::Empty { .. })
        ));
        std::fs::remove_file(p).ok();

        assert!(matches!(
            load_csv("/definitely/not/here.csv", TargetColumn::Last),
            Err(DataError::Io { .. })
        ));
    }

    #[test]
    fn target_column_override() {
        let p = temp_csv("first_col", "9,1,2\n8,3,4\n");
        let ds = load_csv(&p, TargetColumn::Index(0)).unwrap();
        assert_eq!(ds.target(), &[9.0, 8.0]);
        assert_eq!(ds.rows()[0], vec![1.0, 2.0]);
        std::fs::remove_file(p).ok();
    }

    fn toy_dataset(n: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        let target: Vec<f64> = (0..n).map(|i| i as f64).collect();
        Dataset::new("toy", rows, target).unwrap()
    }

    #[test]
    fn kfold_sizes_exact_and_remainder() {
        let folds = kfold_split(&toy_dataset(10), 5, 1).unwrap();
        assert_eq!(folds.fold_sizes(), vec![2, 2, 2, 2, 2]);

        let folds = kfold_split(&toy_dataset(11), 5, 1).unwrap();
        let mut sizes = folds.fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 2, 2, 3]);
    }

    #[test]
    fn kfold_is_deterministic_and_validates_k() {
        let a = kfold_split(&toy_dataset(20), 4, 9).unwrap();
        let b = kfold_split(&toy_dataset(20), 4, 9).unwrap();
        assert_eq!(a.fold_of(), b.fold_of());

        assert!(matches!(
            kfold_split(&toy_dataset(3), 5, 0),
            Err(DataError::BadFoldCount { k: 5, n: 3 })
        ));
        assert!(matches!(
            kfold_split(&toy_dataset(3), 1, 0),
            Err(DataError::BadFoldCount { .. })
        ));
    }

    #[test]
    fn target_std_hand_cases() {
        let ds = Dataset::new("c", vec![vec![0.0]; 3], vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(target_std(&ds).unwrap(), 0.0);

        let ds = Dataset::new("two", vec![vec![0.0]; 2], vec![0.0, 2.0]).unwrap();
        assert_eq!(target_std(&ds).unwrap(), 1.0);

        let ds = Dataset::new("four", vec![vec![0.0]; 4], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(target_std(&ds).unwrap(), 1.25_f64.sqrt());

        let ds = Dataset::new("one", vec![vec![0.0]], vec![5.0]).unwrap();
        assert!(matches!(target_std(&ds), Err(DataError::TooFewRows { n: 1 })));
    }

    #[test]
    fn rmse_hand_cases() {
        let s = Semantics(vec![3.0, 4.0]);
        assert_eq!(rmse(&s, &[3.0, 4.0]).unwrap(), 0.0);

        let s = Semantics(vec![0.0, 0.0]);
        assert_eq!(rmse(&s, &[3.0, 4.0]).unwrap(), 12.5_f64.sqrt());

        let s = Semantics(vec![1.0]);
        assert_eq!(rmse(&s, &[0.0]).unwrap(), 1.0);

        let s = Semantics(vec![1.0, 2.0]);
        assert!(matches!(
            rmse(&s, &[1.0]),
            Err(DataError::LengthMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn rmse_zero_iff_equal(values in proptest::collection::vec(-100.0f64..100.0, 1..20)) {
            let s = Semantics(values.clone());
            prop_assert_eq!(rmse(&s, &values).unwrap(), 0.0);

            let mut shifted = values.clone();
            shifted[0] += 1.0;
            let s = Semantics(shifted);
            prop_assert!(rmse(&s, &values).unwrap() > 0.0);
        }

        #[test]
        fn kfold_partitions_every_row_once(n in 6usize..60, k in 2usize..6, seed in 0u64..500) {
            prop_assume!(k <= n);
            let folds = kfold_split(&toy_dataset(n), k, seed).unwrap();
            prop_assert_eq!(folds.fold_of().len(), n);
            let sizes = folds.fold_sizes();
            prop_assert_eq!(sizes.iter().sum::<usize>(), n);
            let max = sizes.iter().max().unwrap();
            let min = sizes.iter().min().unwrap();
            prop_assert!(max - min <= 1);
        }

        #[test]
        fn target_std_shift_invariant(values in proptest::collection::vec(-50.0f64..50.0, 2..30), shift in -100.0f64..100.0) {
            let rows = vec![vec![0.0]; values.len()];
            let base = Dataset::new("a", rows.clone(), values.clone()).unwrap();
            let shifted_values: Vec<f64> = values.iter().map(|v| v + shift).collect();
            let shifted = Dataset::new("b", rows, shifted_values).unwrap();
            let a = target_std(&base).unwrap();
            let b = target_std(&shifted).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }
}
