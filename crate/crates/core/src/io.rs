//! File formats: CSV datasets, the model file, ROC exports, group files.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! dataset export reloads to bit-identical values and a saved model scores
//! bit-identically after loading.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, PUDataset};
use crate::datagen::SyntheticBundle;
use crate::error::{Error, Result};
use crate::hypothesis::GroupPartition;
use crate::metrics::{roc_curve, trapezoid, RocCurve};
use crate::model::{Model, ObjectiveKind};
use crate::solver::TrainConfig;

/// Which label alphabet a CSV uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsvMode {
    /// `1` = labeled positive, `0` = unlabeled.
    Pu,
    /// `1` = positive, `-1` = negative.
    Labeled,
}

struct ParsedCsv {
    features: Array2<f64>,
    labels: Vec<i8>,
    feature_names: Vec<String>,
}

fn parse_csv(path: &Path, label_column: &str, mode: CsvMode) -> Result<ParsedCsv> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::invalid(format!(
            "{}: missing header row",
            path.display()
        )));
    }
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| {
            Error::invalid(format!(
                "{}: no column named '{label_column}' in header",
                path.display()
            ))
        })?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    let dim = feature_names.len();
    if dim == 0 {
        return Err(Error::invalid(format!(
            "{}: no feature columns besides the label",
            path.display()
        )));
    }

    let mut rows: Vec<f64> = Vec::new();
    let mut labels: Vec<i8> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::invalid(format!(
                "{}: row {} has {} fields, header has {}",
                path.display(),
                r + 1,
                record.len(),
                headers.len()
            )));
        }
        for (c, field) in record.iter().enumerate() {
            if c == label_idx {
                let value: f64 = field.parse().map_err(|_| {
                    Error::invalid(format!(
                        "{}: row {}: label '{field}' is not numeric",
                        path.display(),
                        r + 1
                    ))
                })?;
                let label = match (mode, value) {
                    (CsvMode::Pu, v) if v == 1.0 => 1,
                    (CsvMode::Pu, v) if v == 0.0 => 0,
                    (CsvMode::Labeled, v) if v == 1.0 => 1,
                    (CsvMode::Labeled, v) if v == -1.0 => -1,
                    _ => {
                        let expected = match mode {
                            CsvMode::Pu => "1 or 0",
                            CsvMode::Labeled => "1 or -1",
                        };
                        return Err(Error::invalid(format!(
                            "{}: row {}: label '{field}' outside alphabet ({expected})",
                            path.display(),
                            r + 1
                        )));
                    }
                };
                labels.push(label);
            } else {
                let value: f64 = field.parse().map_err(|_| {
                    Error::invalid(format!(
                        "{}: row {}, column '{}': '{field}' is not numeric",
                        path.display(),
                        r + 1,
                        headers.get(c).unwrap_or("?")
                    ))
                })?;
                if !value.is_finite() {
                    return Err(Error::invalid(format!(
                        "{}: row {}, column '{}': non-finite value",
                        path.display(),
                        r + 1,
                        headers.get(c).unwrap_or("?")
                    )));
                }
                rows.push(value);
            }
        }
    }
    let n = labels.len();
    let features = Array2::from_shape_vec((n, dim), rows)
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    Ok(ParsedCsv {
        features,
        labels,
        feature_names,
    })
}

/// Loads a PU-mode CSV (`1` = labeled positive, `0` = unlabeled). Row order
/// is preserved within each block: slack indexing follows the order in which
/// positive rows appear in the file.
pub fn load_pu_csv(path: &Path, label_column: &str) -> Result<PUDataset> {
    let parsed = parse_csv(path, label_column, CsvMode::Pu)?;
    let pos_rows: Vec<usize> = parsed
        .labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == 1)
        .map(|(i, _)| i)
        .collect();
    let unl_rows: Vec<usize> = parsed
        .labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == 0)
        .map(|(i, _)| i)
        .collect();
    if pos_rows.is_empty() {
        return Err(Error::invalid(format!(
            "{}: no labeled-positive rows (label 1)",
            path.display()
        )));
    }
    if unl_rows.is_empty() {
        return Err(Error::invalid(format!(
            "{}: no unlabeled rows (label 0)",
            path.display()
        )));
    }
    let take = |idx: &[usize]| {
        Array2::from_shape_fn((idx.len(), parsed.features.ncols()), |(r, c)| {
            parsed.features[[idx[r], c]]
        })
    };
    PUDataset::new(
        take(&pos_rows),
        take(&unl_rows),
        Some(parsed.feature_names),
    )
}

/// Loads a labeled-mode CSV (`1` / `-1`).
pub fn load_labeled_csv(path: &Path, label_column: &str) -> Result<LabeledDataset> {
    let parsed = parse_csv(path, label_column, CsvMode::Labeled)?;
    LabeledDataset::new(parsed.features, parsed.labels)
}

fn write_csv_rows(
    out: &mut String,
    label_column: &str,
    names: Option<&[String]>,
    dim: usize,
    blocks: &[(&Array2<f64>, &dyn Fn(usize) -> String)],
) {
    out.push_str(label_column);
    for c in 0..dim {
        out.push(',');
        match names {
            Some(n) => out.push_str(&n[c]),
            None => {
                let _ = write!(out, "x{}", c + 1);
            }
        }
    }
    out.push('\n');
    for (matrix, label_of) in blocks {
        for (r, row) in matrix.rows().into_iter().enumerate() {
            out.push_str(&label_of(r));
            for v in row.iter() {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
    }
}

/// Writes a PU dataset as CSV: positive rows first (label 1), then unlabeled
/// rows (label 0), preserving row order.
pub fn write_pu_csv(path: &Path, data: &PUDataset, label_column: &str) -> Result<()> {
    let mut out = String::new();
    let one = |_: usize| "1".to_string();
    let zero = |_: usize| "0".to_string();
    write_csv_rows(
        &mut out,
        label_column,
        data.feature_names(),
        data.dim(),
        &[(data.positives(), &one), (data.unlabeled(), &zero)],
    );
    fs::write(path, out)?;
    Ok(())
}

/// Writes a labeled dataset as CSV with `±1` labels.
pub fn write_labeled_csv(path: &Path, data: &LabeledDataset, label_column: &str) -> Result<()> {
    let mut out = String::new();
    let labels = data.labels().to_vec();
    let label_of = move |r: usize| labels[r].to_string();
    write_csv_rows(
        &mut out,
        label_column,
        None,
        data.dim(),
        &[(data.features(), &label_of)],
    );
    fs::write(path, out)?;
    Ok(())
}

/// Writes a synthetic bundle as `<prefix>_train.csv` (PU mode),
/// `<prefix>_test.csv` (labeled mode) and `<prefix>_truth.csv` (ground
/// truth: planted support columns, outlier rows, true unlabeled positives;
/// all indices 1-based).
pub fn write_bundle_csvs(bundle: &SyntheticBundle, prefix: &Path) -> Result<()> {
    let with_suffix = |suffix: &str| {
        let mut name = prefix.as_os_str().to_os_string();
        name.push(suffix);
        std::path::PathBuf::from(name)
    };
    write_pu_csv(&with_suffix("_train.csv"), &bundle.train, "label")?;
    write_labeled_csv(&with_suffix("_test.csv"), &bundle.test, "label")?;
    let mut truth = String::from("kind,index\n");
    for &c in &bundle.true_support {
        let _ = writeln!(truth, "support_column,{}", c + 1);
    }
    for &r in &bundle.outlier_rows {
        let _ = writeln!(truth, "outlier_row,{}", r + 1);
    }
    for (r, &l) in bundle.unlabeled_truth.iter().enumerate() {
        if l == 1 {
            let _ = writeln!(truth, "unlabeled_positive_row,{}", r + 1);
        }
    }
    fs::write(with_suffix("_truth.csv"), truth)?;
    Ok(())
}

/// Shape and content identity of the training data a model was fitted on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataFingerprint {
    pub n_pos: usize,
    pub n_unlabeled: usize,
    pub dim: usize,
    /// FNV-1a over the little-endian bit patterns of all entries.
    pub content_hash: String,
}

pub fn fingerprint(data: &PUDataset) -> DataFingerprint {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: f64| {
        for byte in v.to_bits().to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
        }
    };
    for &v in data.positives().iter() {
        eat(v);
    }
    for &v in data.unlabeled().iter() {
        eat(v);
    }
    DataFingerprint {
        n_pos: data.n_pos(),
        n_unlabeled: data.n_unlabeled(),
        dim: data.dim(),
        content_hash: format!("{hash:016x}"),
    }
}

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// On-disk model representation: sparse weight and slack entries (0-based
/// index, value), the training config echo, and the training-data
/// fingerprint.
#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    schema_version: u32,
    objective_kind: ObjectiveKind,
    hypothesis: crate::hypothesis::SparsityHypothesis,
    dim: usize,
    n_slack: usize,
    weights: Vec<(usize, f64)>,
    slack: Vec<(usize, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    intercept: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    standardizer: Option<crate::dataset::Standardizer>,
    config: TrainConfig,
    data_fingerprint: DataFingerprint,
}

fn sparse_pairs(v: &Array1<f64>) -> Vec<(usize, f64)> {
    v.iter()
        .enumerate()
        .filter(|(_, &x)| x != 0.0)
        .map(|(i, &x)| (i, x))
        .collect()
}

fn dense(pairs: &[(usize, f64)], len: usize, what: &str) -> Result<Array1<f64>> {
    let mut out = Array1::zeros(len);
    for &(i, v) in pairs {
        if i >= len {
            return Err(Error::ModelFormat(format!(
                "{what} index {i} out of range for length {len}"
            )));
        }
        out[i] = v;
    }
    Ok(out)
}

/// Saves a model together with its training config and data fingerprint.
pub fn save_model(
    model: &Model,
    config: &TrainConfig,
    data_fingerprint: &DataFingerprint,
    path: &Path,
) -> Result<()> {
    let file = ModelFile {
        schema_version: MODEL_SCHEMA_VERSION,
        objective_kind: model.objective_kind,
        hypothesis: model.hypothesis.clone(),
        dim: model.weights.len(),
        n_slack: model.slack.len(),
        weights: sparse_pairs(&model.weights),
        slack: sparse_pairs(&model.slack),
        intercept: model.intercept,
        standardizer: model.standardizer.clone(),
        config: config.clone(),
        data_fingerprint: data_fingerprint.clone(),
    };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::ModelFormat(e.to_string()))?;
    let mut f = fs::File::create(path)?;
    f.write_all(json.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Metadata stored alongside the model parameters.
#[derive(Clone, Debug)]
pub struct ModelMeta {
    pub config: TrainConfig,
    pub data_fingerprint: DataFingerprint,
}

/// Loads a model file; refuses files written by a newer schema version and
/// validates the stored hypothesis.
pub fn load_model(path: &Path) -> Result<(Model, ModelMeta)> {
    let text = fs::read_to_string(path)?;
    let file: ModelFile =
        serde_json::from_str(&text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    if file.schema_version > MODEL_SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: file.schema_version,
            supported: MODEL_SCHEMA_VERSION,
        });
    }
    file.hypothesis.validate()?;
    if file.hypothesis.dim() != file.dim {
        return Err(Error::ModelFormat(format!(
            "hypothesis dimension {} does not match model dimension {}",
            file.hypothesis.dim(),
            file.dim
        )));
    }
    if let Some(st) = &file.standardizer {
        if st.dim() != file.dim || st.mean.len() != st.sd.len() {
            return Err(Error::ModelFormat(
                "standardizer dimensions do not match the model".into(),
            ));
        }
    }
    let model = Model {
        weights: dense(&file.weights, file.dim, "weight")?,
        slack: dense(&file.slack, file.n_slack, "slack")?,
        intercept: file.intercept,
        hypothesis: file.hypothesis,
        objective_kind: file.objective_kind,
        standardizer: file.standardizer,
    };
    Ok((
        model,
        ModelMeta {
            config: file.config,
            data_fingerprint: file.data_fingerprint,
        },
    ))
}

/// Scores a labeled dataset, writes the ROC curve as CSV
/// (`threshold,fpr,tpr` with the AUC in a header comment) and returns it.
pub fn emit_roc(model: &Model, data: &LabeledDataset, path: &Path) -> Result<RocCurve> {
    let scores = model.score(data.features())?;
    let curve = roc_curve(scores.as_slice().unwrap(), data.labels())?;
    write_roc_csv(&curve, path)?;
    Ok(curve)
}

pub fn write_roc_csv(curve: &RocCurve, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# auc = {}", curve.auc);
    out.push_str("threshold,fpr,tpr\n");
    for ((t, f), tp) in curve
        .thresholds
        .iter()
        .zip(curve.fpr.iter())
        .zip(curve.tpr.iter())
    {
        let _ = writeln!(out, "{t},{f},{tp}");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads back a ROC CSV written by [`write_roc_csv`]: returns the header AUC
/// and the (fpr, tpr) points.
pub fn read_roc_csv(path: &Path) -> Result<(f64, Vec<(f64, f64)>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::invalid(format!("{}: empty ROC file", path.display())))?;
    let auc: f64 = header
        .strip_prefix("# auc = ")
        .ok_or_else(|| Error::invalid(format!("{}: missing AUC header", path.display())))?
        .parse()
        .map_err(|_| Error::invalid(format!("{}: bad AUC header", path.display())))?;
    let mut points = Vec::new();
    for line in lines.skip(1) {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let _threshold = parts.next();
        let f: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::invalid(format!("{}: bad fpr in '{line}'", path.display())))?;
        let t: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::invalid(format!("{}: bad tpr in '{line}'", path.display())))?;
        points.push((f, t));
    }
    Ok((auc, points))
}

/// Re-integrates a ROC CSV with the trapezoid rule.
pub fn reintegrate_roc_csv(path: &Path) -> Result<(f64, f64)> {
    let (auc, points) = read_roc_csv(path)?;
    let fpr: Vec<f64> = points.iter().map(|p| p.0).collect();
    let tpr: Vec<f64> = points.iter().map(|p| p.1).collect();
    Ok((auc, trapezoid(&fpr, &tpr)))
}

/// Parses a group file: one group per line, comma-separated 1-based feature
/// indices. The groups must partition `1..=dim`.
pub fn parse_group_file(path: &Path, dim: usize) -> Result<GroupPartition> {
    let text = fs::read_to_string(path)?;
    let mut groups = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        groups.push(parse_index_list(line, ln + 1, path)?);
    }
    GroupPartition::new(groups, dim)
}

/// Parses an exclusive-sparsity file: one group per line as
/// `i,j,k:budget` — comma-separated 1-based indices, a colon, then the
/// group's nonzero budget.
pub fn parse_exclusive_file(path: &Path, dim: usize) -> Result<(GroupPartition, Vec<usize>)> {
    let text = fs::read_to_string(path)?;
    let mut groups = Vec::new();
    let mut budgets = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (indices, budget) = line.split_once(':').ok_or_else(|| {
            Error::invalid(format!(
                "{}: line {}: expected 'i,j,k:budget'",
                path.display(),
                ln + 1
            ))
        })?;
        groups.push(parse_index_list(indices, ln + 1, path)?);
        budgets.push(budget.trim().parse().map_err(|_| {
            Error::invalid(format!(
                "{}: line {}: budget '{budget}' is not an integer",
                path.display(),
                ln + 1
            ))
        })?);
    }
    let partition = GroupPartition::new(groups, dim)?;
    Ok((partition, budgets))
}

fn parse_index_list(s: &str, line: usize, path: &Path) -> Result<Vec<usize>> {
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            let idx: usize = tok.parse().map_err(|_| {
                Error::invalid(format!(
                    "{}: line {line}: '{tok}' is not a feature index",
                    path.display()
                ))
            })?;
            if idx == 0 {
                return Err(Error::invalid(format!(
                    "{}: line {line}: feature indices are 1-based",
                    path.display()
                )));
            }
            Ok(idx - 1)
        })
        .collect()
}

/// Writes a training trace as CSV: epoch, objective, training BAUC.
pub fn write_trace_csv(trace: &crate::solver::TrainTrace, path: &Path) -> Result<()> {
    let mut out = String::from("epoch,objective,train_bauc\n");
    for (e, (obj, bauc)) in trace
        .objective_values
        .iter()
        .zip(trace.train_bauc.iter())
        .enumerate()
    {
        let _ = writeln!(out, "{},{obj},{bauc}", e + 1);
    }
    fs::write(path, out)?;
    Ok(())
}
