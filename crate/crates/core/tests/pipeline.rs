mod common;

use std::collections::BTreeSet;

use albench::acquisition::AlgorithmKind;
use albench::config::{resolve_source, ExperimentConfig};
use albench::report::{read_records, write_record, ScoreTable};
use albench::rng::{RngBundle, Seeds};
use albench::runner::{
    determine_budget, prepare_run_data, run_al_loop, run_restart, run_restarts, worker_pool,
    BudgetRule,
};

use common::{config_path, load_config, shipped_run_config};

#[test]
fn shorter_budget_is_a_prefix_of_a_longer_one() {
    for alg in AlgorithmKind::ALL {
        let short = run_restart(&shipped_run_config("three_clust.toml", alg, Some(5)), Seeds::default(), 1).unwrap();
        let long = run_restart(&shipped_run_config("three_clust.toml", alg, Some(9)), Seeds::default(), 1).unwrap();
        assert_eq!(short, long.truncate(5), "{alg}");
    }
    for alg in [AlgorithmKind::Random, AlgorithmKind::Oracle] {
        let short = run_restart(&shipped_run_config("tabular.toml", alg, Some(4)), Seeds::default(), 0).unwrap();
        let long = run_restart(&shipped_run_config("tabular.toml", alg, Some(7)), Seeds::default(), 0).unwrap();
        assert_eq!(short, long.truncate(4), "{alg} fine-tune");
    }
}

#[test]
fn restarts_replay_in_isolation() {
    let rc = shipped_run_config("diverging_sin.toml", AlgorithmKind::Margin, Some(6));
    let pool = worker_pool(1).unwrap();
    let one = run_restarts(&rc, Seeds::default(), 1, &pool).unwrap();
    let three = run_restarts(&rc, Seeds::default(), 3, &pool).unwrap();
    assert_eq!(one[0], three[0]);
    assert_eq!(run_restart(&rc, Seeds::default(), 2).unwrap(), three[2]);
    assert_eq!(three[2].seeds, Seeds::new(1, 3, 3));
    assert_ne!(three[1].accuracies, three[2].accuracies);
}

#[test]
fn loop_acquires_budget_distinct_points_outside_the_seed_set() {
    for alg in AlgorithmKind::ALL {
        let rc = shipped_run_config("three_clust.toml", alg, Some(8));
        let bundle = RngBundle::new(Seeds::default());
        let (_, state) = prepare_run_data(&rc, &bundle).unwrap();
        let seed_rows: BTreeSet<usize> = state.labeled.iter().map(|&k| state.pool[k]).collect();
        let curve = run_al_loop(&rc, bundle).unwrap();
        assert_eq!(curve.len(), 8, "{alg}");
        let chosen: BTreeSet<usize> = curve.chosen.iter().copied().collect();
        assert_eq!(chosen.len(), 8, "{alg}: repeated acquisition");
        assert!(chosen.is_disjoint(&seed_rows), "{alg}: acquired a seed point");
        assert_eq!(seed_rows.len() + chosen.len(), 2 + 8);
        assert!(curve.accuracies.iter().all(|a| (0.0..=1.0).contains(a)));
        let is_oracle = alg == AlgorithmKind::Oracle;
        assert!(curve.fallback.iter().all(|f| f.is_some() == is_oracle), "{alg}");
        assert!(curve.probe_acc.iter().all(|p| p.is_some() == is_oracle), "{alg}");
    }
}

#[test]
fn shipped_configs_load() {
    for file in ["three_clust.toml", "diverging_sin.toml", "tabular.toml", "splice.toml"] {
        let cfg = load_config(file);
        assert!(!cfg.datasets.is_empty(), "{file}");
        assert!(cfg.datasets.iter().all(|d| d.budget >= 1), "{file}");
    }
    let cfg = load_config("tabular.toml");
    let ds = &cfg.datasets[0];
    let rc = shipped_run_config("tabular.toml", AlgorithmKind::Random, None);
    let (data, _) = prepare_run_data(&rc, &RngBundle::new(Seeds::default())).unwrap();
    assert_eq!((data.features.rows(), data.dim(), data.n_classes), (569, 30, 2));
    assert_eq!(data.test_idx.len(), 114);
    assert!(data.train_idx.iter().all(|&r| data.features.row(r).iter().all(|v| (0.0..=1.0).contains(v))));
    assert!(resolve_source(ds).is_ok());
}

#[test]
fn config_errors_name_the_field() {
    let base = std::fs::read_to_string(config_path("three_clust.toml")).unwrap();
    let bad = base.replace("budget = 21", "budget = 0");
    let e = ExperimentConfig::parse(&bad, std::path::Path::new("x.toml")).unwrap_err();
    assert!(e.is_config() && e.to_string().contains("budget"), "{e}");
    let bad = base.replace("restarts = 50", "restarts = 50\nrestart_count = 3");
    let e = ExperimentConfig::parse(&bad, std::path::Path::new("x.toml")).unwrap_err();
    assert!(e.is_config() && e.to_string().contains("restart_count"), "{e}");
    let bad = base.replace("\"bald\"", "\"bold\"");
    assert!(ExperimentConfig::parse(&bad, std::path::Path::new("x.toml")).unwrap_err().is_config());
}

#[test]
fn records_reproduce_the_score_table() {
    let dir = tempfile::tempdir().unwrap();
    let pool = worker_pool(1).unwrap();
    let mut curves = Vec::new();
    for alg in [AlgorithmKind::Random, AlgorithmKind::Coreset, AlgorithmKind::Oracle] {
        let rc = shipped_run_config("three_clust.toml", alg, Some(5));
        curves.extend(run_restarts(&rc, Seeds::default(), 3, &pool).unwrap());
    }
    for c in &curves {
        write_record(dir.path(), c).unwrap();
    }
    let back = read_records(dir.path()).unwrap();
    let want = ScoreTable::from_curves(&curves).unwrap();
    assert_eq!(ScoreTable::from_curves(&back).unwrap(), want);
    let mut sorted = curves.clone();
    sorted.sort_by(|a, b| (a.algorithm, a.restart).cmp(&(b.algorithm, b.restart)));
    assert_eq!(back, sorted);
}

#[test]
fn budget_takes_the_earlier_of_the_two_rules() {
    // fast learner: reaches 0.99 * 0.8 = 0.792 at iteration 5
    let fast: Vec<f64> = (1..=40).map(|i| (0.5 + 0.06 * i as f64).min(0.8)).collect();
    // slow learner: +0.005 per iteration, never reaches the target
    let slow: Vec<f64> = (1..=40).map(|i| 0.4 + 0.005 * i as f64).collect();
    let rule = BudgetRule { min_window: 5, ..BudgetRule::default() };
    assert_eq!(determine_budget(&[fast.clone()], 0.8, &rule).unwrap(), 5);
    // any window of at least 5 iterations gains at least 0.025, so the slow
    // learner runs to the end of the pilot
    assert_eq!(determine_budget(&[slow.clone()], 0.8, &rule).unwrap(), 40);
    assert_eq!(determine_budget(&[slow.clone(), fast], 0.8, &rule).unwrap(), 5);
    // flat from iteration 10: with windows of 5 or more the first check is
    // i = 25; with single-iteration windows, i = 12 compares 10 and 12
    let plateau: Vec<f64> = (1..=40).map(|i| 0.4 + 0.03 * (i.min(10) as f64)).collect();
    assert_eq!(determine_budget(&[plateau.clone()], 0.8, &rule).unwrap(), 25);
    assert_eq!(determine_budget(&[plateau], 0.8, &BudgetRule::default()).unwrap(), 12);
}
