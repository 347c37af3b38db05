//! Dataset ingestion and preparation: CSV loading with missing-value
//! handling, one-hot encoding, train-statistics normalization, seeded
//! splitting, and a synthetic two-group generator.
//!
//! CSV contract: UTF-8, comma-separated, first row is the header, numeric
//! fields parse as decimals, categorical fields are arbitrary strings, and
//! the group column holds exactly `"0"` or `"1"`. The tokens `""`, `"?"`
//! and `"NA"` (after trimming) count as missing.

use std::path::Path;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{RealMatrix, RealVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

/// What to do with rows whose used columns contain missing values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Drop the whole row (the default).
    #[default]
    Drop,
    /// Replace missing numeric features with the train-split column mean;
    /// missing categorical tokens become their own category. Rows with a
    /// missing target or group are still dropped.
    MeanImpute,
}

/// Names the columns a CSV experiment uses and how to read them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub feature_columns: Vec<ColumnSpec>,
    pub target_column: String,
    pub group_column: String,
    #[serde(default)]
    pub missing_policy: MissingPolicy,
}

impl DatasetSchema {
    /// Schema for an all-numeric CSV with features `x0..x{d-1}`,
    /// target `y`, group `a` — the layout written by [`Dataset::to_csv`].
    pub fn numeric(feature_dim: usize) -> Self {
        DatasetSchema {
            feature_columns: (0..feature_dim)
                .map(|i| ColumnSpec { name: format!("x{i}"), kind: ColumnKind::Numeric })
                .collect(),
            target_column: "y".into(),
            group_column: "a".into(),
            missing_policy: MissingPolicy::Drop,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_columns.is_empty() {
            return Err(Error::Config("schema: no feature columns".into()));
        }
        for c in &self.feature_columns {
            if c.name == self.target_column || c.name == self.group_column {
                return Err(Error::Config(format!(
                    "schema: column {} is both a feature and the target/group",
                    c.name
                )));
            }
        }
        if self.target_column == self.group_column {
            return Err(Error::Config("schema: target and group columns coincide".into()));
        }
        Ok(())
    }
}

/// Typed rows straight out of a CSV, before encoding and normalization.
///
/// Missing numeric cells are held as NaN until `preprocess` resolves them.
#[derive(Debug, Clone)]
pub struct RawTable {
    /// `(name, column)` in schema order for numeric features.
    pub numeric: Vec<(String, RealVector)>,
    /// `(name, column)` in schema order for categorical features.
    pub categorical: Vec<(String, Vec<String>)>,
    pub y: RealVector,
    pub a: Vec<u8>,
    /// Rows removed because of missing values.
    pub dropped_rows: usize,
}

impl RawTable {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Fully numeric dataset ready for training.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: RealMatrix,
    pub y: RealVector,
    pub a: Vec<u8>,
    /// Expanded feature names (one per column of `x`).
    pub feature_names: Vec<String>,
    /// Per-column `(mean, std)` recorded from the fitting split; empty when
    /// the features were not normalized (synthetic data).
    pub normalization: Vec<(f64, f64)>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.x.cols()
    }

    /// Rows `indices` as a new dataset.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            a: indices.iter().map(|&i| self.a[i]).collect(),
            feature_names: self.feature_names.clone(),
            normalization: self.normalization.clone(),
        }
    }

    pub fn has_both_groups(&self) -> bool {
        self.a.iter().any(|&g| g == 0) && self.a.iter().any(|&g| g == 1)
    }

    /// Writes the dataset as CSV (`x0..`, `y`, `a`). Values use the shortest
    /// round-trip decimal form, so reloading with [`Dataset::from_csv`]
    /// reproduces the numbers bit-exactly.
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        let mut header: Vec<String> =
            (0..self.feature_dim()).map(|i| format!("x{i}")).collect();
        header.push("y".into());
        header.push("a".into());
        w.write_record(&header).map_err(csv_err)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> =
                self.x.row(i).iter().map(|v| format!("{v}")).collect();
            rec.push(format!("{}", self.y[i]));
            rec.push(format!("{}", self.a[i]));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a CSV written by [`Dataset::to_csv`] without any preprocessing.
    pub fn from_csv(path: &Path) -> Result<Dataset> {
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let headers = r.headers().map_err(csv_err)?.clone();
        let ncols = headers.len();
        if ncols < 3 {
            return Err(Error::Data("dataset csv needs at least x0, y, a columns".into()));
        }
        let feature_names: Vec<String> =
            headers.iter().take(ncols - 2).map(str::to_owned).collect();
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut a = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record.map_err(csv_err)?;
            if record.len() != ncols {
                return Err(Error::Data(format!("row {}: wrong field count", line + 2)));
            }
            for field in record.iter().take(ncols - 2) {
                x.push(parse_numeric(field, line + 2)?);
            }
            y.push(parse_numeric(&record[ncols - 2], line + 2)?);
            a.push(parse_group(&record[ncols - 1], line + 2)?);
        }
        if y.is_empty() {
            return Err(Error::Data("dataset csv has no data rows".into()));
        }
        let rows = y.len();
        Ok(Dataset {
            x: RealMatrix::from_vec(rows, ncols - 2, x)?,
            y,
            a,
            feature_names,
            normalization: Vec::new(),
        })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(e.to_string())
}

fn is_missing(field: &str) -> bool {
    let t = field.trim();
    t.is_empty() || t == "?" || t.eq_ignore_ascii_case("na")
}

fn parse_numeric(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Data(format!("row {line}: cannot parse '{field}' as a number")))
}

fn parse_group(field: &str, line: usize) -> Result<u8> {
    match field.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(Error::Data(format!(
            "row {line}: group column must be 0 or 1, got '{other}'"
        ))),
    }
}

/// Loads the columns named by `schema` from a CSV file.
///
/// Rows with a missing target or group are always dropped. Missing feature
/// cells drop the row under [`MissingPolicy::Drop`]; under
/// [`MissingPolicy::MeanImpute`] numeric gaps are kept as NaN for
/// [`preprocess`] to fill and categorical gaps become their own category.
pub fn load_csv(path: &Path, schema: &DatasetSchema) -> Result<RawTable> {
    schema.validate()?;
    if !path.exists() {
        return Err(Error::Data(format!("dataset file not found: {}", path.display())));
    }
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = r.headers().map_err(csv_err)?.clone();
    let col_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("column '{name}' not found in header")))
    };
    let target_idx = col_index(&schema.target_column)?;
    let group_idx = col_index(&schema.group_column)?;
    let feature_idx: Vec<(usize, &ColumnSpec)> = schema
        .feature_columns
        .iter()
        .map(|c| col_index(&c.name).map(|i| (i, c)))
        .collect::<Result<_>>()?;

    let mut numeric: Vec<(String, RealVector)> = schema
        .feature_columns
        .iter()
        .filter(|c| c.kind == ColumnKind::Numeric)
        .map(|c| (c.name.clone(), Vec::new()))
        .collect();
    let mut categorical: Vec<(String, Vec<String>)> = schema
        .feature_columns
        .iter()
        .filter(|c| c.kind == ColumnKind::Categorical)
        .map(|c| (c.name.clone(), Vec::new()))
        .collect();
    let mut y = Vec::new();
    let mut a = Vec::new();
    let mut dropped = 0usize;

    for (line0, record) in r.records().enumerate() {
        let line = line0 + 2; // 1-based, after the header
        let record = record.map_err(csv_err)?;

        let target_field = record.get(target_idx).unwrap_or("");
        let group_field = record.get(group_idx).unwrap_or("");
        if is_missing(target_field) || is_missing(group_field) {
            dropped += 1;
            continue;
        }

        let mut row_numeric = Vec::with_capacity(numeric.len());
        let mut row_categorical = Vec::with_capacity(categorical.len());
        let mut row_missing = false;
        for &(idx, spec) in &feature_idx {
            let field = record.get(idx).unwrap_or("");
            match spec.kind {
                ColumnKind::Numeric => {
                    if is_missing(field) {
                        row_missing = true;
                        row_numeric.push(f64::NAN);
                    } else {
                        row_numeric.push(parse_numeric(field, line)?);
                    }
                }
                ColumnKind::Categorical => {
                    row_categorical.push(field.trim().to_owned());
                }
            }
        }
        if row_missing && schema.missing_policy == MissingPolicy::Drop {
            dropped += 1;
            continue;
        }

        y.push(parse_numeric(target_field, line)?);
        a.push(parse_group(group_field, line)?);
        for (col, v) in numeric.iter_mut().zip(row_numeric) {
            col.1.push(v);
        }
        for (col, v) in categorical.iter_mut().zip(row_categorical) {
            col.1.push(v);
        }
    }

    if y.is_empty() {
        return Err(Error::Data(format!(
            "no usable rows in {} ({dropped} dropped)",
            path.display()
        )));
    }
    Ok(RawTable { numeric, categorical, y, a, dropped_rows: dropped })
}

/// Preprocessing output: the encoded dataset plus any column warnings.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub dataset: Dataset,
    pub warnings: Vec<String>,
}

/// One-hot encodes categoricals and standardizes every resulting column
/// with mean/std computed on `fit_on` rows only (population convention).
/// Columns with zero variance on the fitting rows are dropped with a
/// warning.
pub fn preprocess(raw: &RawTable, schema: &DatasetSchema, fit_on: &[usize]) -> Result<Preprocessed> {
    if fit_on.is_empty() {
        return Err(Error::Domain("preprocess: empty fitting split".into()));
    }
    let n = raw.len();
    if let Some(&bad) = fit_on.iter().find(|&&i| i >= n) {
        return Err(Error::Domain(format!("preprocess: fit index {bad} out of range")));
    }

    // expand to named numeric columns
    let mut columns: Vec<(String, RealVector)> = Vec::new();
    for (name, col) in &raw.numeric {
        let mut col = col.clone();
        if col.iter().any(|v| v.is_nan()) {
            if schema.missing_policy != MissingPolicy::MeanImpute {
                return Err(Error::Data(format!(
                    "column {name}: unexpected missing values under drop policy"
                )));
            }
            let (mut sum, mut cnt) = (0.0, 0usize);
            for &i in fit_on {
                if !col[i].is_nan() {
                    sum += col[i];
                    cnt += 1;
                }
            }
            if cnt == 0 {
                return Err(Error::Data(format!(
                    "column {name}: all fitting rows are missing"
                )));
            }
            let mean = sum / cnt as f64;
            for v in &mut col {
                if v.is_nan() {
                    *v = mean;
                }
            }
        }
        columns.push((name.clone(), col));
    }
    for (name, col) in &raw.categorical {
        let mut categories: Vec<&String> = col.iter().collect();
        categories.sort();
        categories.dedup();
        for cat in categories {
            let indicator: RealVector =
                col.iter().map(|v| if v == cat { 1.0 } else { 0.0 }).collect();
            columns.push((format!("{name}={cat}"), indicator));
        }
    }

    // standardize on the fitting rows; drop zero-variance columns
    let mut warnings = Vec::new();
    let mut kept: Vec<(String, RealVector, (f64, f64))> = Vec::new();
    for (name, col) in columns {
        let mean = fit_on.iter().map(|&i| col[i]).sum::<f64>() / fit_on.len() as f64;
        let var = fit_on
            .iter()
            .map(|&i| (col[i] - mean) * (col[i] - mean))
            .sum::<f64>()
            / fit_on.len() as f64;
        let std = var.sqrt();
        if std <= 1e-12 {
            warnings.push(format!("dropping zero-variance column {name}"));
            continue;
        }
        let scaled = col.iter().map(|v| (v - mean) / std).collect();
        kept.push((name, scaled, (mean, std)));
    }
    if kept.is_empty() {
        return Err(Error::Data("all feature columns are constant".into()));
    }

    let d = kept.len();
    let mut data = Vec::with_capacity(n * d);
    for i in 0..n {
        for (_, col, _) in &kept {
            data.push(col[i]);
        }
    }
    let dataset = Dataset {
        x: RealMatrix::from_vec(n, d, data)?,
        y: raw.y.clone(),
        a: raw.a.clone(),
        feature_names: kept.iter().map(|(n, _, _)| n.clone()).collect(),
        normalization: kept.iter().map(|(_, _, ms)| *ms).collect(),
    };
    Ok(Preprocessed { dataset, warnings })
}

/// Deterministic shuffled split indices: `floor(n * test_fraction)` test
/// rows, the rest train.
pub fn split_indices(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config("test_fraction must be in (0, 1)".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = StdRng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_test = ((n as f64) * test_fraction).floor() as usize;
    let test = order[..n_test].to_vec();
    let train = order[n_test..].to_vec();
    Ok((train, test))
}

/// A train/test split plus warnings about group coverage.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub warnings: Vec<String>,
}

/// Splits a dataset with [`split_indices`], warning when a side is missing
/// one of the groups.
pub fn split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<Split> {
    let (train_idx, test_idx) = split_indices(dataset.len(), test_fraction, seed)?;
    let train = dataset.select(&train_idx);
    let test = dataset.select(&test_idx);
    let mut warnings = Vec::new();
    for (name, side) in [("train", &train), ("test", &test)] {
        if !side.is_empty() && !side.has_both_groups() {
            warnings.push(format!("{name} split does not contain both groups"));
        }
    }
    Ok(Split { train, test, warnings })
}

/// Parameters of the synthetic two-group generator.
///
/// Features are standard normal; the target is
/// `y = scale_a * w·x + shift_a + noise_a * e` with `w` a fixed unit vector
/// drawn from the seed, `shift_0 = 0`, `shift_1 = label_mean_shift`, and
/// `e` standard normal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Samples per group `(n0, n1)`.
    pub n_per_group: (usize, usize),
    pub feature_dim: usize,
    /// Added to group-1 targets.
    pub label_mean_shift: f64,
    /// Signal multiplier per group.
    pub label_scale: (f64, f64),
    /// Noise standard deviation per group.
    pub conditional_noise_scale: (f64, f64),
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_group.0 == 0 || self.n_per_group.1 == 0 {
            return Err(Error::Config("synthetic: n_per_group must be positive".into()));
        }
        if self.feature_dim == 0 {
            return Err(Error::Config("synthetic: feature_dim must be positive".into()));
        }
        if self.conditional_noise_scale.0 < 0.0 || self.conditional_noise_scale.1 < 0.0 {
            return Err(Error::Config("synthetic: noise scales must be >= 0".into()));
        }
        Ok(())
    }

    /// The two-group benchmark used throughout the guide: same-shape
    /// feature clouds, group-dependent signal scale and noise level. The
    /// high-noise group 0 carries the weaker label signal, so a global
    /// least-squares fit favors group 1 and opens a large error gap that
    /// representation alignment can close.
    pub fn mitigation(n_per_group: usize, seed: u64) -> Self {
        SyntheticSpec {
            n_per_group: (n_per_group, n_per_group),
            feature_dim: 8,
            label_mean_shift: 0.0,
            label_scale: (0.5, 1.2),
            conditional_noise_scale: (0.55, 0.4),
            seed,
        }
    }
}

/// Draws a synthetic dataset; fully deterministic given the spec's seed.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = StdRng::seed_from_u64(spec.seed);
    let d = spec.feature_dim;

    // fixed unit-norm weight vector
    let mut w: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut w {
            *v /= norm;
        }
    }

    let n = spec.n_per_group.0 + spec.n_per_group.1;
    let mut x = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    for group in 0..2u8 {
        let (count, scale, noise, shift) = if group == 0 {
            (spec.n_per_group.0, spec.label_scale.0, spec.conditional_noise_scale.0, 0.0)
        } else {
            (
                spec.n_per_group.1,
                spec.label_scale.1,
                spec.conditional_noise_scale.1,
                spec.label_mean_shift,
            )
        };
        for _ in 0..count {
            let row: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let signal: f64 = row.iter().zip(&w).map(|(xi, wi)| xi * wi).sum();
            let eps: f64 = rng.sample(StandardNormal);
            y.push(scale * signal + shift + noise * eps);
            a.push(group);
            x.extend(row);
        }
    }
    Ok(Dataset {
        x: RealMatrix::from_vec(n, d, x)?,
        y,
        a,
        feature_names: (0..d).map(|i| format!("x{i}")).collect(),
        normalization: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::constant_predictor_check;
    use crate::metrics::wasserstein1d_exact;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn simple_schema() -> DatasetSchema {
        DatasetSchema {
            feature_columns: vec![
                ColumnSpec { name: "age".into(), kind: ColumnKind::Numeric },
                ColumnSpec { name: "color".into(), kind: ColumnKind::Categorical },
            ],
            target_column: "y".into(),
            group_column: "a".into(),
            missing_policy: MissingPolicy::Drop,
        }
    }

    #[test]
    fn load_drops_rows_with_missing_values() {
        let f = write_csv("age,color,y,a\n1,red,0.5,0\n?,blue,0.25,1\n3,red,0.75,1\n");
        let raw = load_csv(f.path(), &simple_schema()).unwrap();
        assert_eq!(raw.len(), 2);
        assert_eq!(raw.dropped_rows, 1);
    }

    #[test]
    fn load_rejects_non_binary_group() {
        let f = write_csv("age,color,y,a\n1,red,0.5,2\n");
        let err = load_csv(f.path(), &simple_schema()).unwrap_err();
        assert!(err.to_string().contains("group"));
    }

    #[test]
    fn load_rejects_empty_data_and_missing_column() {
        let f = write_csv("age,color,y,a\n");
        assert!(load_csv(f.path(), &simple_schema()).is_err());

        let f = write_csv("age,y,a\n1,0.5,0\n");
        let err = load_csv(f.path(), &simple_schema()).unwrap_err();
        assert!(err.to_string().contains("color"));

        assert!(load_csv(Path::new("/nonexistent.csv"), &simple_schema()).is_err());
    }

    #[test]
    fn mean_impute_fills_from_fit_rows() {
        let mut schema = simple_schema();
        schema.missing_policy = MissingPolicy::MeanImpute;
        let f = write_csv("age,color,y,a\n1,red,0.5,0\n?,blue,0.25,1\n3,red,0.75,1\n");
        let raw = load_csv(f.path(), &schema).unwrap();
        assert_eq!(raw.len(), 3);
        assert!(raw.numeric[0].1[1].is_nan());
        let pre = preprocess(&raw, &schema, &[0, 2]).unwrap();
        // imputed to the fit mean 2.0, which standardizes to 0
        assert!(pre.dataset.x.get(1, 0).abs() < 1e-12);
    }

    #[test]
    fn preprocess_standardizes_with_fit_statistics() {
        let schema = DatasetSchema {
            feature_columns: vec![ColumnSpec { name: "v".into(), kind: ColumnKind::Numeric }],
            target_column: "y".into(),
            group_column: "a".into(),
            missing_policy: MissingPolicy::Drop,
        };
        let f = write_csv("v,y,a\n1,0,0\n3,0,1\n9,0,1\n");
        let raw = load_csv(f.path(), &schema).unwrap();
        // fit on the first two rows: mean 2, population std 1
        let pre = preprocess(&raw, &schema, &[0, 1]).unwrap();
        assert!((pre.dataset.x.get(0, 0) + 1.0).abs() < 1e-12);
        assert!((pre.dataset.x.get(1, 0) - 1.0).abs() < 1e-12);
        // the held-out row uses the fit statistics, not its own
        assert!((pre.dataset.x.get(2, 0) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn preprocess_one_hot_and_zero_variance() {
        let f = write_csv("age,color,y,a\n1,red,0.1,0\n2,blue,0.2,1\n3,red,0.3,1\n");
        let raw = load_csv(f.path(), &simple_schema()).unwrap();
        let pre = preprocess(&raw, &simple_schema(), &[0, 1, 2]).unwrap();
        // age + two indicator columns
        assert_eq!(pre.dataset.feature_dim(), 3);
        assert!(pre.dataset.feature_names.contains(&"color=red".into()));
        assert!(pre.dataset.feature_names.contains(&"color=blue".into()));
        assert!(pre.warnings.is_empty());

        // fitting on rows where color is constant drops both indicators
        let pre = preprocess(&raw, &simple_schema(), &[0, 2]).unwrap();
        assert_eq!(pre.dataset.feature_dim(), 1);
        assert_eq!(pre.warnings.len(), 2);
    }

    #[test]
    fn preprocess_train_columns_are_standardized() {
        let spec = SyntheticSpec {
            n_per_group: (60, 40),
            feature_dim: 3,
            label_mean_shift: 0.5,
            label_scale: (1.0, 1.0),
            conditional_noise_scale: (0.1, 0.1),
            seed: 9,
        };
        let ds = gen_synthetic(&spec).unwrap();
        let raw = RawTable {
            numeric: (0..3)
                .map(|c| {
                    (format!("x{c}"), (0..ds.len()).map(|r| ds.x.get(r, c)).collect())
                })
                .collect(),
            categorical: vec![],
            y: ds.y.clone(),
            a: ds.a.clone(),
            dropped_rows: 0,
        };
        let schema = DatasetSchema::numeric(3);
        let (train_idx, _) = split_indices(ds.len(), 0.3, 4).unwrap();
        let pre = preprocess(&raw, &schema, &train_idx).unwrap();
        for c in 0..3 {
            let vals: Vec<f64> = train_idx.iter().map(|&i| pre.dataset.x.get(i, c)).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / vals.len() as f64;
            assert!(mean.abs() < 1e-9);
            assert!((var.sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn split_examples() {
        let (train, test) = split_indices(10, 0.3, 1).unwrap();
        assert_eq!((train.len(), test.len()), (7, 3));

        let (train, test) = split_indices(1823, 0.2, 1).unwrap();
        assert_eq!((train.len(), test.len()), (1459, 364));

        let again = split_indices(10, 0.3, 1).unwrap();
        assert_eq!(again.0, train_of(10, 0.3, 1));
        assert_eq!(split_indices(10, 0.3, 2).unwrap().0.len(), 7);
        assert!(split_indices(10, 0.0, 1).is_err());
    }

    fn train_of(n: usize, f: f64, seed: u64) -> Vec<usize> {
        split_indices(n, f, seed).unwrap().0
    }

    #[test]
    fn splits_partition_the_index_range() {
        let (train, test) = split_indices(101, 0.25, 77).unwrap();
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..101).collect::<Vec<_>>());
    }

    #[test]
    fn synthetic_is_deterministic() {
        let spec = SyntheticSpec::mitigation(50, 3);
        let a = gen_synthetic(&spec).unwrap();
        let b = gen_synthetic(&spec).unwrap();
        assert_eq!(a.x.data(), b.x.data());
        assert_eq!(a.y, b.y);
        assert_eq!(a.a, b.a);
    }

    #[test]
    fn synthetic_moment_matching_and_shift() {
        // equal scales and noise, no shift: the groups share label moments
        let spec = SyntheticSpec {
            n_per_group: (5000, 5000),
            feature_dim: 4,
            label_mean_shift: 0.0,
            label_scale: (1.0, 1.0),
            conditional_noise_scale: (0.5, 0.5),
            seed: 21,
        };
        let ds = gen_synthetic(&spec).unwrap();
        assert!(constant_predictor_check(&ds.y, &ds.a, 0.05).unwrap());

        // a mean shift of 2 moves the label distributions far apart
        let spec = SyntheticSpec { label_mean_shift: 2.0, ..spec };
        let ds = gen_synthetic(&spec).unwrap();
        let y0: Vec<f64> = ds.y.iter().zip(&ds.a).filter(|(_, &a)| a == 0).map(|(&y, _)| y).collect();
        let y1: Vec<f64> = ds.y.iter().zip(&ds.a).filter(|(_, &a)| a == 1).map(|(&y, _)| y).collect();
        assert!(wasserstein1d_exact(&y0, &y1).unwrap() >= 1.5);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let ds = gen_synthetic(&SyntheticSpec::mitigation(20, 5)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        ds.to_csv(&path).unwrap();
        let reloaded = Dataset::from_csv(&path).unwrap();
        assert_eq!(ds.x.data(), reloaded.x.data());
        assert_eq!(ds.y, reloaded.y);
        assert_eq!(ds.a, reloaded.a);
    }
}
