//! Experiment orchestration: method-comparison sweeps over synthetic
//! benchmarks and the unlabeled-set-size study.
//!
//! Sweep cells (grid value × seed × method) are independent fits with
//! derived seeds and run in parallel; the report is assembled in a fixed
//! order so identical invocations produce byte-identical CSVs. Runtimes are
//! recorded in the in-memory report but never written to the CSV.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::datagen::{figure1_series, generate, SyntheticSpec};
use crate::error::{Error, Result};
use crate::hypothesis::SparsityHypothesis;
use crate::metrics::{auc_from_bauc, empirical_auc, empirical_bauc};
use crate::objective::{BaucOfParams, ErrOfParams};
use crate::rng::derive_seed;
use crate::solver::{psg_fit, GradientMode, Objective, TrainConfig};

/// Which benchmark dimension a table sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    /// Vary the total feature count; 40 relevant features, 7 outliers.
    Features,
    /// Vary the outlier count; 200 features of which 40 relevant.
    Outliers,
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepKind::Features => write!(f, "features"),
            SweepKind::Outliers => write!(f, "outliers"),
        }
    }
}

impl FromStr for SweepKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "features" => Ok(SweepKind::Features),
            "outliers" => Ok(SweepKind::Outliers),
            other => Err(Error::invalid(format!(
                "unknown sweep kind '{other}' (features | outliers)"
            ))),
        }
    }
}

/// The six method variants compared in the sweeps. The plain variants run
/// with a zero outlier budget and full support; `-O` adds the outlier
/// budget; `-OF` adds feature selection on top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Bauc,
    BaucO,
    BaucOf,
    Err,
    ErrO,
    ErrOf,
}

pub const ALL_METHODS: [Method; 6] = [
    Method::Bauc,
    Method::BaucO,
    Method::BaucOf,
    Method::Err,
    Method::ErrO,
    Method::ErrOf,
];

impl Method {
    fn is_err_family(self) -> bool {
        matches!(self, Method::Err | Method::ErrO | Method::ErrOf)
    }

    fn uses_outlier_budget(self) -> bool {
        matches!(
            self,
            Method::BaucO | Method::BaucOf | Method::ErrO | Method::ErrOf
        )
    }

    fn uses_feature_selection(self) -> bool {
        matches!(self, Method::BaucOf | Method::ErrOf)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Method::Bauc => "BAUC",
            Method::BaucO => "BAUC-O",
            Method::BaucOf => "BAUC-OF",
            Method::Err => "ERR",
            Method::ErrO => "ERR-O",
            Method::ErrOf => "ERR-OF",
        };
        write!(f, "{name}")
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BAUC" => Ok(Method::Bauc),
            "BAUC-O" | "BAUC_O" => Ok(Method::BaucO),
            "BAUC-OF" | "BAUC_OF" => Ok(Method::BaucOf),
            "ERR" => Ok(Method::Err),
            "ERR-O" | "ERR_O" => Ok(Method::ErrO),
            "ERR-OF" | "ERR_OF" => Ok(Method::ErrOf),
            other => Err(Error::invalid(format!("unknown method '{other}'"))),
        }
    }
}

/// One completed fit inside a sweep.
#[derive(Clone, Debug)]
pub struct FitRecord {
    pub method: Method,
    pub grid_value: usize,
    pub seed_index: usize,
    pub test_auc: f64,
    pub runtime: Duration,
    /// Nonzero-weight columns of the fitted model (0-based).
    pub support: Vec<usize>,
    /// Detected outlier rows (0-based).
    pub outliers: Vec<usize>,
}

/// Aggregated cell of the report table.
#[derive(Clone, Debug)]
pub struct CellSummary {
    pub method: Method,
    pub grid_value: usize,
    pub mean: f64,
    pub sd: f64,
    pub per_seed: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub kind: SweepKind,
    pub cells: Vec<CellSummary>,
    pub records: Vec<FitRecord>,
}

impl ExperimentReport {
    pub fn cell(&self, method: Method, grid_value: usize) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.grid_value == grid_value)
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (mean, sd)
}

fn sweep_spec(kind: SweepKind, grid_value: usize, seed: u64) -> SyntheticSpec {
    let mut spec = SyntheticSpec {
        seed,
        ..SyntheticSpec::defaults()
    };
    match kind {
        SweepKind::Features => spec.dim = grid_value,
        SweepKind::Outliers => spec.n_outliers = grid_value,
    }
    spec
}

fn method_config(method: Method, spec: &SyntheticSpec, seed: u64) -> Result<TrainConfig> {
    let alpha = 1e-3;
    let beta = 1e-3;
    let objective = if method.is_err_family() {
        // the true class prior of the unlabeled population
        let pi = spec.n_unlabeled_pos as f64 / spec.n_unlabeled as f64;
        Objective::ErrOf(ErrOfParams::new(alpha, beta, pi)?)
    } else {
        Objective::BaucOf(BaucOfParams::new(alpha, beta)?)
    };
    let hypothesis = if method.uses_feature_selection() {
        SparsityHypothesis::plain_l0(spec.dim, spec.relevant.min(spec.dim))?
    } else {
        SparsityHypothesis::full_support(spec.dim)
    };
    let mut cfg = TrainConfig::new(objective, hypothesis);
    cfg.outlier_budget = if method.uses_outlier_budget() {
        spec.n_outliers.min(spec.n_pos_labeled)
    } else {
        0
    };
    // full-batch projected steps: the budget projections threshold the
    // averaged pair signal rather than single-sample noise
    cfg.gradient_mode = GradientMode::FullBatch;
    cfg.epochs = 400;
    cfg.seed = seed;
    Ok(cfg)
}

fn run_one_fit(
    kind: SweepKind,
    method: Method,
    grid_value: usize,
    seed_index: usize,
    base_seed: u64,
) -> Result<FitRecord> {
    let bundle_seed = derive_seed(base_seed, grid_value as u64, seed_index as u64);
    let spec = sweep_spec(kind, grid_value, bundle_seed);
    let bundle = generate(&spec)?;
    let cfg = method_config(method, &spec, bundle_seed)?;
    let started = Instant::now();
    let (model, _) = psg_fit(&bundle.train, &cfg).map_err(|e| {
        Error::invalid(format!(
            "fit failed for method {method}, grid {grid_value}, seed {seed_index}: {e}"
        ))
    })?;
    let runtime = started.elapsed();
    let scores = model.score(bundle.test.features())?;
    let test_auc = empirical_auc(scores.as_slice().unwrap(), bundle.test.labels())?;
    let support = model
        .weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(i, _)| i)
        .collect();
    Ok(FitRecord {
        method,
        grid_value,
        seed_index,
        test_auc,
        runtime,
        support,
        outliers: model.outlier_indices(),
    })
}

/// Runs rayon work inside a pool sized by the `PU_THREADS` environment
/// variable (default: machine parallelism).
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match std::env::var("PU_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        Some(n) if n >= 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        _ => f(),
    }
}

/// Fits every (grid value × seed × method) cell of a benchmark sweep,
/// aggregates mean ± sd of test AUC per cell, and optionally writes the
/// aggregate table as CSV (one row per grid value, two columns per method).
pub fn run_table_sweep(
    kind: SweepKind,
    grid: &[usize],
    methods: &[Method],
    seeds: usize,
    base_seed: u64,
    out_path: Option<&Path>,
) -> Result<ExperimentReport> {
    if grid.is_empty() {
        return Err(Error::invalid("sweep grid must be nonempty"));
    }
    if methods.is_empty() {
        return Err(Error::invalid("sweep needs at least one method"));
    }
    if seeds == 0 {
        return Err(Error::invalid("sweep needs at least one seed"));
    }
    let mut tasks = Vec::new();
    for &g in grid {
        for &m in methods {
            for s in 0..seeds {
                tasks.push((g, m, s));
            }
        }
    }
    let results: Vec<Result<FitRecord>> = with_thread_cap(|| {
        tasks
            .par_iter()
            .map(|&(g, m, s)| run_one_fit(kind, m, g, s, base_seed))
            .collect()
    });
    let mut records = Vec::with_capacity(results.len());
    for r in results {
        records.push(r?);
    }

    let mut cells = Vec::new();
    for &g in grid {
        for &m in methods {
            let per_seed: Vec<f64> = records
                .iter()
                .filter(|r| r.grid_value == g && r.method == m)
                .map(|r| r.test_auc)
                .collect();
            let (mean, sd) = mean_sd(&per_seed);
            cells.push(CellSummary {
                method: m,
                grid_value: g,
                mean,
                sd,
                per_seed,
            });
        }
    }
    let report = ExperimentReport {
        kind,
        cells,
        records,
    };
    if let Some(path) = out_path {
        std::fs::write(path, sweep_csv(&report, grid, methods))?;
    }
    Ok(report)
}

fn sweep_csv(report: &ExperimentReport, grid: &[usize], methods: &[Method]) -> String {
    let mut out = String::new();
    let grid_name = match report.kind {
        SweepKind::Features => "n_features",
        SweepKind::Outliers => "n_outliers",
    };
    out.push_str(grid_name);
    for m in methods {
        let tag = m.to_string().to_ascii_lowercase().replace('-', "_");
        let _ = write!(out, ",{tag}_mean,{tag}_sd");
    }
    out.push('\n');
    for &g in grid {
        let _ = write!(out, "{g}");
        for &m in methods {
            let cell = report.cell(m, g).expect("cell exists for every task");
            let _ = write!(out, ",{},{}", cell.mean, cell.sd);
        }
        out.push('\n');
    }
    out
}

/// One aggregated grid point of the unlabeled-set-size study.
#[derive(Clone, Debug)]
pub struct Figure1Row {
    pub unlabeled_size: usize,
    /// Mean test AUC over repeats.
    pub mean_auc: f64,
    pub sd_auc: f64,
    /// Mean of (training AUC estimate − test AUC); the estimate maps the
    /// training blind AUC through the linear relation with the known
    /// positive fraction.
    pub mean_estimate_gap: f64,
    pub sd_estimate_gap: f64,
}

/// Default unlabeled-size grid; extends past five times the positive count
/// so the flattening of the curve is visible.
pub const FIGURE1_GRID: [usize; 11] = [10, 20, 40, 60, 80, 100, 125, 150, 175, 200, 250];
pub const FIGURE1_N_POS: usize = 50;
pub const FIGURE1_POS_FRAC: f64 = 0.1;

/// Runs the unlabeled-set-size study: for each grid size, fits the plain
/// blind-AUC model on `repeats` fresh bundles, records test AUC and the
/// training-side AUC estimate, and optionally writes the plot-ready table.
pub fn run_figure1(
    n_grid: &[usize],
    repeats: usize,
    base_seed: u64,
    out_path: Option<&Path>,
) -> Result<Vec<Figure1Row>> {
    let series = figure1_series(FIGURE1_N_POS, n_grid, FIGURE1_POS_FRAC, repeats, base_seed)?;
    let outcomes: Vec<Result<(usize, f64, f64)>> = with_thread_cap(|| {
        series
            .par_iter()
            .map(|cell| {
                let dim = cell.bundle.train.dim();
                let mut cfg = TrainConfig::new(
                    Objective::BaucOf(BaucOfParams::default()),
                    SparsityHypothesis::full_support(dim),
                );
                cfg.seed = derive_seed(base_seed, cell.unlabeled_size as u64, 1 + cell.repeat as u64);
                let (model, _) = psg_fit(&cell.bundle.train, &cfg)?;
                let scores = model.score(cell.bundle.test.features())?;
                let test_auc = empirical_auc(scores.as_slice().unwrap(), cell.bundle.test.labels())?;
                let train_bauc = empirical_bauc(&model, &cell.bundle.train)?;
                let n_pos_in_unl = cell
                    .bundle
                    .unlabeled_truth
                    .iter()
                    .filter(|&&l| l == 1)
                    .count();
                let pi_hat = n_pos_in_unl as f64 / cell.bundle.train.n_unlabeled() as f64;
                let auc_estimate = auc_from_bauc(train_bauc, pi_hat)?;
                Ok((cell.unlabeled_size, test_auc, auc_estimate - test_auc))
            })
            .collect()
    });
    let mut flat = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        flat.push(o?);
    }

    let mut rows = Vec::new();
    for &n in n_grid {
        let aucs: Vec<f64> = flat
            .iter()
            .filter(|(size, _, _)| *size == n)
            .map(|&(_, auc, _)| auc)
            .collect();
        let gaps: Vec<f64> = flat
            .iter()
            .filter(|(size, _, _)| *size == n)
            .map(|&(_, _, gap)| gap)
            .collect();
        let (mean_auc, sd_auc) = mean_sd(&aucs);
        let (mean_estimate_gap, sd_estimate_gap) = mean_sd(&gaps);
        rows.push(Figure1Row {
            unlabeled_size: n,
            mean_auc,
            sd_auc,
            mean_estimate_gap,
            sd_estimate_gap,
        });
    }

    if let Some(path) = out_path {
        let mut out =
            String::from("n_unlabeled,mean_auc,sd_auc,mean_estimate_gap,sd_estimate_gap\n");
        for r in &rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.unlabeled_size, r.mean_auc, r.sd_auc, r.mean_estimate_gap, r.sd_estimate_gap
            );
        }
        std::fs::write(path, out)?;
    }
    Ok(rows)
}

/// Spearman rank correlation (average ranks on ties).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rx = ranks(xs);
    let ry = ranks(ys);
    pearson(&rx, &ry)
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_unstable_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && xs[order[j]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            out[k] = avg;
        }
        i = j;
    }
    out
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn single_cell_sweep() {
        let report = run_table_sweep(
            SweepKind::Features,
            &[40],
            &[Method::Bauc],
            1,
            7,
            None,
        )
        .unwrap();
        assert_eq!(report.cells.len(), 1);
        assert_eq!(report.records.len(), 1);
        let cell = &report.cells[0];
        assert_eq!(cell.per_seed.len(), 1);
        assert_eq!(cell.sd, 0.0);
        assert!(cell.mean > 0.5 && cell.mean <= 1.0, "AUC {}", cell.mean);
    }

    #[test]
    fn report_sanity_mean_inside_min_max() {
        let report = run_table_sweep(
            SweepKind::Outliers,
            &[2],
            &[Method::Bauc, Method::BaucOf],
            3,
            11,
            None,
        )
        .unwrap();
        for cell in &report.cells {
            let min = cell.per_seed.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = cell
                .per_seed
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(cell.mean >= min && cell.mean <= max);
            assert!(cell.sd >= 0.0);
        }
    }

    #[test]
    fn sweep_csv_is_deterministic() {
        let dir = tempdir().unwrap();
        let p1 = dir.path().join("a.csv");
        let p2 = dir.path().join("b.csv");
        run_table_sweep(SweepKind::Features, &[40], &[Method::Bauc], 2, 5, Some(&p1)).unwrap();
        run_table_sweep(SweepKind::Features, &[40], &[Method::Bauc], 2, 5, Some(&p2)).unwrap();
        let a = std::fs::read(&p1).unwrap();
        let b = std::fs::read(&p2).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }

    #[test]
    fn method_parsing() {
        assert_eq!("BAUC-OF".parse::<Method>().unwrap(), Method::BaucOf);
        assert_eq!("err_o".parse::<Method>().unwrap(), Method::ErrO);
        assert!("what".parse::<Method>().is_err());
    }

    #[test]
    fn spearman_signs() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0]) + 1.0).abs() < 1e-12);
        // monotone but nonlinear is still rank-perfect
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 8.0, 27.0, 64.0]) - 1.0).abs() < 1e-12);
        assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn figure1_row_shape() {
        let rows = run_figure1(&[10, 20], 2, 3, None).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].unlabeled_size, 10);
        assert!(rows.iter().all(|r| r.mean_auc.is_finite()));
    }
}
