// scratch calibration probe; not part of the deliverable
use ndarray::Array2;
use pu_auc::datagen::{generate, SyntheticSpec};
use pu_auc::dataset::PUDataset;
use pu_auc::experiments::with_thread_cap;
use pu_auc::hypothesis::SparsityHypothesis;
use pu_auc::metrics::empirical_auc;
use pu_auc::objective::BaucOfParams;
use pu_auc::rng::SplitMix64;
use pu_auc::solver::{psg_fit, GradientMode, Objective, TrainConfig};
use rayon::prelude::*;

/// Rewrites the outlier rows' irrelevant columns as ordinary N(0, sd_irrel)
/// noise, i.e. the "corruption on relevant features only" reading.
fn relevant_only(bundle: &pu_auc::datagen::SyntheticBundle, spec: &SyntheticSpec) -> PUDataset {
    let mut pos: Array2<f64> = bundle.train.positives().clone();
    let mut rng = SplitMix64::new(spec.seed ^ 0xABCD);
    for &r in &bundle.outlier_rows {
        for c in spec.relevant..spec.dim {
            pos[[r, c]] = rng.next_gaussian_with(0.0, spec.sd_irrel);
        }
    }
    PUDataset::new(pos, bundle.train.unlabeled().clone(), None).unwrap()
}

fn main() {
    // name, s, t, full_batch, relevant_only_corruption
    let variants: Vec<(&str, usize, usize, bool, bool)> = vec![
        ("ALL  BAUC    full", 200, 0, true, false),
        ("ALL  BAUC-OF full", 40, 7, true, false),
        ("REL  BAUC    full", 200, 0, true, true),
        ("REL  BAUC-O  full", 200, 7, true, true),
        ("REL  BAUC-OF full", 40, 7, true, true),
        ("REL  BAUC    stoch", 200, 0, false, true),
        ("REL  BAUC-OF stoch", 40, 7, false, true),
    ];

    let tasks: Vec<(usize, u64)> = (0..variants.len())
        .flat_map(|vi| (0..3u64).map(move |s| (vi, s)))
        .collect();

    let results: Vec<(usize, f64, usize, usize, f64)> = with_thread_cap(|| {
        tasks
            .par_iter()
            .map(|&(vi, seed)| {
                let (_, s, t, full, rel_only) = variants[vi];
                let spec = SyntheticSpec {
                    seed: seed + 1,
                    ..SyntheticSpec::defaults()
                };
                let bundle = generate(&spec).unwrap();
                let train = if rel_only {
                    relevant_only(&bundle, &spec)
                } else {
                    bundle.train.clone()
                };
                let mut cfg = TrainConfig::new(
                    Objective::BaucOf(BaucOfParams::default()),
                    SparsityHypothesis::plain_l0(200, s).unwrap(),
                );
                cfg.outlier_budget = t;
                cfg.gradient_mode = if full {
                    GradientMode::FullBatch
                } else {
                    GradientMode::Stochastic
                };
                cfg.epochs = if full { 400 } else { 200 };
                cfg.seed = seed + 1;
                let (model, _) = psg_fit(&train, &cfg).unwrap();
                let scores = model.score(bundle.test.features()).unwrap();
                let auc = empirical_auc(scores.as_slice().unwrap(), bundle.test.labels()).unwrap();
                let hit = model
                    .outlier_indices()
                    .iter()
                    .filter(|&&i| i >= 93)
                    .count();
                let overlap = model
                    .weights
                    .iter()
                    .enumerate()
                    .filter(|(i, &w)| *i < 40 && w != 0.0)
                    .count();
                let max_slack = model.slack.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
                (vi, auc, hit, overlap, max_slack)
            })
            .collect()
    });

    for (vi, &(name, _, t, _, _)) in variants.iter().enumerate() {
        let rows: Vec<_> = results.iter().filter(|r| r.0 == vi).collect();
        let aucs: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let mean_auc = aucs.iter().sum::<f64>() / aucs.len() as f64;
        let hits: Vec<usize> = rows.iter().map(|r| r.2).collect();
        let support: Vec<usize> = rows.iter().map(|r| r.3).collect();
        let max_eps: Vec<f64> = rows.iter().map(|r| r.4).collect();
        println!(
            "{name}: meanAUC={mean_auc:.4} {aucs:.3?}  hits {hits:?}/{t}  true-support {support:?}  max|eps| {max_eps:.2?}"
        );
    }
}
