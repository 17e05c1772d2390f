//! Command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::datagen::{generate, SyntheticSpec};
use crate::error::{Error, Result};
use crate::experiments::{
    run_figure1, run_table_sweep, Method, SweepKind, ALL_METHODS, FIGURE1_GRID,
};
use crate::hypothesis::SparsityHypothesis;
use crate::io;
use crate::metrics::empirical_auc;
use crate::objective::{BaucOfParams, ErrOfParams};
use crate::solver::{detect_outliers, greedy_tune, psg_fit, LrDecay, Objective, TrainConfig,
    TuneOptions};

#[derive(Parser)]
#[command(
    name = "pu-auc",
    about = "Positive-unlabeled classification by blind-AUC maximization with outlier detection and feature selection",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark and write its CSVs.
    Synth(SynthArgs),
    /// Fit a model from a PU-mode CSV and write a model file.
    Train(TrainArgs),
    /// Score a labeled CSV with a saved model and print its AUC.
    Eval(EvalArgs),
    /// Print the outlier rows detected by a saved model (1-based).
    Outliers(OutliersArgs),
    /// Run a benchmark sweep comparing methods across a grid.
    Sweep(SweepArgs),
    /// Run the unlabeled-set-size study and write its table.
    Figure1(Figure1Args),
    /// Greedy search over the sparsity and outlier budgets.
    Tune(TuneArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output prefix; writes <prefix>_train.csv, _test.csv, _truth.csv.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 200)]
    p: usize,
    #[arg(long = "s-true", default_value_t = 40)]
    s_true: usize,
    #[arg(long = "n-pos", default_value_t = 100)]
    n_pos: usize,
    #[arg(long = "n-unlabeled", default_value_t = 300)]
    n_unlabeled: usize,
    #[arg(long = "n-unlabeled-pos", default_value_t = 20)]
    n_unlabeled_pos: usize,
    #[arg(long = "n-outliers", default_value_t = 7)]
    n_outliers: usize,
    #[arg(long = "n-test-pos", default_value_t = 1200)]
    n_test_pos: usize,
    #[arg(long = "n-test-neg", default_value_t = 2800)]
    n_test_neg: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct CommonTrainArgs {
    /// PU-mode CSV (label 1 = positive, 0 = unlabeled).
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "label-col", default_value = "label")]
    label_col: String,
    /// Objective: bauc | err.
    #[arg(long, default_value = "bauc")]
    objective: String,
    /// Sparsity: l0:S | group:FILE:S | excl:FILE (default: full support).
    #[arg(long)]
    sparsity: Option<String>,
    /// Outlier budget (maximum nonzero slack entries).
    #[arg(long, default_value_t = 0)]
    t: usize,
    #[arg(long, default_value_t = 1e-3)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-3)]
    beta: f64,
    /// Class prior in (0,1); required for the err objective.
    #[arg(long, required_if_eq("objective", "err"))]
    pi: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    /// Learning-rate schedule: inverse-sqrt | constant.
    #[arg(long = "lr-decay", default_value = "inverse-sqrt")]
    lr_decay: String,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Standardize features: on | off.
    #[arg(long, default_value = "off")]
    standardize: String,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonTrainArgs,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-epoch trace CSV.
    #[arg(long = "trace-out")]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Labeled CSV (labels +1 / -1).
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "label-col", default_value = "label")]
    label_col: String,
    /// Also write the ROC curve to this CSV.
    #[arg(long = "roc-out")]
    roc_out: Option<PathBuf>,
}

#[derive(Args)]
struct OutliersArgs {
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// features | outliers.
    #[arg(long)]
    kind: String,
    /// Grid as a comma list ("40,80,120") or inclusive range ("1..8").
    #[arg(long)]
    grid: String,
    /// Comma list of methods (default: all six).
    #[arg(long)]
    methods: Option<String>,
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Figure1Args {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Override the unlabeled-size grid (comma list or range).
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    common: CommonTrainArgs,
    /// Holdout PU-mode CSV; defaults to a deterministic 75/25 split of the
    /// training data.
    #[arg(long)]
    holdout: Option<PathBuf>,
    /// Outlier-budget grid (comma list or range).
    #[arg(long = "t-grid", default_value = "0..5")]
    t_grid: String,
    /// Sparsity-budget grid (comma list or range).
    #[arg(long = "s-grid")]
    s_grid: Option<String>,
    /// Score candidates on the training data instead of the holdout.
    #[arg(long = "score-on-train")]
    score_on_train: bool,
    /// Write the selected configuration as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI; returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version to stdout with success status
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NonFinite { .. } => 3,
                _ => 2,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(args) => run_synth(args),
        Command::Train(args) => run_train(args),
        Command::Eval(args) => run_eval(args),
        Command::Outliers(args) => run_outliers(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Figure1(args) => run_figure1_cmd(args),
        Command::Tune(args) => run_tune(args),
    }
}

fn parse_grid(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad grid start '{lo}'")))?;
        let hi: usize = hi
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad grid end '{hi}'")))?;
        if hi < lo {
            return Err(Error::invalid(format!("empty grid range {lo}..{hi}")));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad grid value '{tok}'")))
        })
        .collect()
}

fn parse_lr_decay(s: &str) -> Result<LrDecay> {
    match s {
        "inverse-sqrt" => Ok(LrDecay::InverseSqrt),
        "constant" => Ok(LrDecay::Constant),
        other => Err(Error::invalid(format!(
            "unknown lr decay '{other}' (inverse-sqrt | constant)"
        ))),
    }
}

fn parse_switch(s: &str, flag: &str) -> Result<bool> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(Error::invalid(format!(
            "--{flag} expects on|off, got '{other}'"
        ))),
    }
}

fn parse_sparsity(spec: Option<&str>, dim: usize) -> Result<SparsityHypothesis> {
    let Some(spec) = spec else {
        return Ok(SparsityHypothesis::full_support(dim));
    };
    if let Some(budget) = spec.strip_prefix("l0:") {
        let s: usize = budget
            .parse()
            .map_err(|_| Error::invalid(format!("bad sparsity budget '{budget}'")))?;
        return SparsityHypothesis::plain_l0(dim, s);
    }
    if let Some(rest) = spec.strip_prefix("group:") {
        let (file, budget) = rest
            .rsplit_once(':')
            .ok_or_else(|| Error::invalid("expected group:FILE:S"))?;
        let s: usize = budget
            .parse()
            .map_err(|_| Error::invalid(format!("bad group budget '{budget}'")))?;
        let groups = io::parse_group_file(Path::new(file), dim)?;
        return SparsityHypothesis::group_l0(groups, s);
    }
    if let Some(file) = spec.strip_prefix("excl:") {
        let (groups, budgets) = io::parse_exclusive_file(Path::new(file), dim)?;
        return SparsityHypothesis::exclusive(groups, budgets);
    }
    Err(Error::invalid(format!(
        "unknown sparsity spec '{spec}' (l0:S | group:FILE:S | excl:FILE)"
    )))
}

fn build_config(common: &CommonTrainArgs, dim: usize) -> Result<TrainConfig> {
    let objective = match common.objective.as_str() {
        "bauc" => Objective::BaucOf(BaucOfParams::new(common.alpha, common.beta)?),
        "err" => {
            let pi = common
                .pi
                .ok_or_else(|| Error::invalid("the err objective requires --pi"))?;
            Objective::ErrOf(ErrOfParams::new(common.alpha, common.beta, pi)?)
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown objective '{other}' (bauc | err)"
            )))
        }
    };
    let hypothesis = parse_sparsity(common.sparsity.as_deref(), dim)?;
    let mut cfg = TrainConfig::new(objective, hypothesis);
    cfg.outlier_budget = common.t;
    cfg.learning_rate = common.lr;
    cfg.lr_decay = parse_lr_decay(&common.lr_decay)?;
    cfg.epochs = common.epochs;
    cfg.tol = common.tol;
    cfg.seed = common.seed;
    cfg.standardize = parse_switch(&common.standardize, "standardize")?;
    Ok(cfg)
}

fn run_synth(args: SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        dim: args.p,
        relevant: args.s_true,
        n_pos_labeled: args.n_pos,
        n_unlabeled: args.n_unlabeled,
        n_unlabeled_pos: args.n_unlabeled_pos,
        n_outliers: args.n_outliers,
        n_test_pos: args.n_test_pos,
        n_test_neg: args.n_test_neg,
        seed: args.seed,
        ..SyntheticSpec::defaults()
    };
    let bundle = generate(&spec)?;
    io::write_bundle_csvs(&bundle, &args.out)?;
    println!(
        "wrote {}_train.csv ({} positives, {} unlabeled, {} features), {}_test.csv ({} rows), {}_truth.csv",
        args.out.display(),
        bundle.train.n_pos(),
        bundle.train.n_unlabeled(),
        bundle.train.dim(),
        args.out.display(),
        bundle.test.n_samples(),
        args.out.display()
    );
    Ok(())
}

fn run_train(args: TrainArgs) -> Result<()> {
    let data = io::load_pu_csv(&args.common.data, &args.common.label_col)?;
    let cfg = build_config(&args.common, data.dim())?;
    let (model, trace) = psg_fit(&data, &cfg)?;
    io::save_model(&model, &cfg, &io::fingerprint(&data), &args.out)?;
    if let Some(trace_path) = &args.trace_out {
        io::write_trace_csv(&trace, trace_path)?;
    }
    let bauc = crate::metrics::empirical_bauc(&model, &data)?;
    println!(
        "trained {} on {} positives / {} unlabeled: {} epochs ({:?}), training BAUC {bauc:.4}, {} nonzero weights, {} outliers flagged",
        model.objective_kind,
        data.n_pos(),
        data.n_unlabeled(),
        trace.epochs_run,
        trace.stop,
        model.weights.iter().filter(|&&w| w != 0.0).count(),
        model.outlier_indices().len()
    );
    println!("model written to {}", args.out.display());
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let (model, meta) = io::load_model(&args.model)?;
    let data = io::load_labeled_csv(&args.data, &args.label_col)?;
    if data.dim() != meta.data_fingerprint.dim {
        eprintln!(
            "warning: data has {} features but the model was trained on {}",
            data.dim(),
            meta.data_fingerprint.dim
        );
    }
    let scores = model.score(data.features())?;
    let auc = empirical_auc(scores.as_slice().unwrap(), data.labels())?;
    println!("AUC {auc:.6} on {} samples", data.n_samples());
    if let Some(roc_path) = &args.roc_out {
        let curve = io::emit_roc(&model, &data, roc_path)?;
        println!("ROC ({} thresholds) written to {}", curve.thresholds.len(), roc_path.display());
    }
    Ok(())
}

fn run_outliers(args: OutliersArgs) -> Result<()> {
    let (model, _) = io::load_model(&args.model)?;
    let outliers = detect_outliers(&model);
    if outliers.is_empty() {
        println!("no outliers flagged");
    } else {
        // 1-based row numbers into the positive block of the training CSV
        let rows: Vec<String> = outliers.iter().map(|i| (i + 1).to_string()).collect();
        println!("{}", rows.join(","));
    }
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let kind: SweepKind = args.kind.parse()?;
    let grid = parse_grid(&args.grid)?;
    let methods: Vec<Method> = match &args.methods {
        None => ALL_METHODS.to_vec(),
        Some(list) => list
            .split(',')
            .map(|tok| tok.trim().parse())
            .collect::<Result<_>>()?,
    };
    let report = run_table_sweep(kind, &grid, &methods, args.seeds, args.seed, Some(&args.out))?;
    println!("{kind} sweep over {:?}, {} seeds:", grid, args.seeds);
    for &g in &grid {
        let cells: Vec<String> = methods
            .iter()
            .map(|&m| {
                let c = report.cell(m, g).expect("cell");
                format!("{m} {:.2}±{:.2}", 100.0 * c.mean, 100.0 * c.sd)
            })
            .collect();
        println!("  {g}: {}", cells.join("  "));
    }
    println!("report written to {}", args.out.display());
    Ok(())
}

fn run_figure1_cmd(args: Figure1Args) -> Result<()> {
    let grid = match &args.grid {
        Some(g) => parse_grid(g)?,
        None => FIGURE1_GRID.to_vec(),
    };
    let rows = run_figure1(&grid, args.repeats, args.seed, Some(&args.out))?;
    println!("n_unlabeled  mean_auc  estimate_gap");
    for r in &rows {
        println!(
            "{:>11}  {:.4}    {:+.4}",
            r.unlabeled_size, r.mean_auc, r.mean_estimate_gap
        );
    }
    println!("table written to {}", args.out.display());
    Ok(())
}

/// Deterministic 75/25 row split of a PU dataset for holdout evaluation.
fn split_holdout(
    data: &crate::dataset::PUDataset,
    seed: u64,
) -> Result<(crate::dataset::PUDataset, crate::dataset::PUDataset)> {
    use crate::rng::SplitMix64;
    use ndarray::Array2;
    let mut rng = SplitMix64::new(seed ^ 0x5911_7);
    let split_rows = |m: &Array2<f64>, rng: &mut SplitMix64| {
        let n = m.nrows();
        let mut idx: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut idx);
        let cut = (n * 3 / 4).max(1).min(n - 1);
        let take = |rows: &[usize]| {
            Array2::from_shape_fn((rows.len(), m.ncols()), |(r, c)| m[[rows[r], c]])
        };
        (take(&idx[..cut]), take(&idx[cut..]))
    };
    if data.n_pos() < 2 || data.n_unlabeled() < 2 {
        return Err(Error::invalid(
            "holdout split needs at least two positives and two unlabeled rows",
        ));
    }
    let (pos_train, pos_hold) = split_rows(data.positives(), &mut rng);
    let (unl_train, unl_hold) = split_rows(data.unlabeled(), &mut rng);
    Ok((
        crate::dataset::PUDataset::new(pos_train, unl_train, None)?,
        crate::dataset::PUDataset::new(pos_hold, unl_hold, None)?,
    ))
}

fn run_tune(args: TuneArgs) -> Result<()> {
    let full = io::load_pu_csv(&args.common.data, &args.common.label_col)?;
    let base = build_config(&args.common, full.dim())?;
    let t_grid = parse_grid(&args.t_grid)?;
    let s_grid = match &args.s_grid {
        Some(g) => parse_grid(g)?,
        None => {
            // default: 5% of the features up to all of them, doubling
            let mut g = Vec::new();
            let mut s = (full.dim() / 20).max(1);
            while s < full.dim() {
                g.push(s);
                s *= 2;
            }
            g.push(full.dim());
            g
        }
    };
    let opts = TuneOptions {
        score_on_train: args.score_on_train,
        ..TuneOptions::default()
    };
    let (train, holdout) = match &args.holdout {
        Some(path) => (
            full.clone(),
            io::load_pu_csv(path, &args.common.label_col)?,
        ),
        None if args.score_on_train => (full.clone(), full.clone()),
        None => split_holdout(&full, base.seed)?,
    };
    let tuned = greedy_tune(&train, &holdout, &base, &t_grid, &s_grid, opts)?;
    let s = match &tuned.hypothesis {
        SparsityHypothesis::PlainL0 { max_nonzeros, .. } => Some(*max_nonzeros),
        _ => None,
    };
    match s {
        Some(s) => println!("selected s={s}, t={}", tuned.outlier_budget),
        None => println!(
            "selected t={} (s grid not applicable to this hypothesis)",
            tuned.outlier_budget
        ),
    }
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&tuned)
            .map_err(|e| Error::invalid(e.to_string()))?;
        std::fs::write(out, json)?;
        println!("config written to {}", out.display());
    }
    Ok(())
}
