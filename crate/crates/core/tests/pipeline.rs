use std::fs::{self, File};
use std::path::Path;

use swapaudit::data::{FeatureKind, TabularDataset};
use swapaudit::divergence::DivergenceKind;
use swapaudit::fairness::{t_score, Scenario};
use swapaudit::pipeline::{
    emit_plot_data, read_plot_csv, read_report, run_audit, write_report, AuditConfig, SwapKind,
    REPORT_FILES,
};
use swapaudit::synth::{generate, ColumnDist, SyntheticSpec};

fn fixture(dir: &Path, n_rows: usize, seed: u64) -> std::path::PathBuf {
    let ds = generate(&SyntheticSpec {
        n_rows,
        weights: vec![2.0, -1.0, 0.8, 0.5, -0.3, 0.1],
        columns: vec![
            ColumnDist::Bernoulli(0.35),
            ColumnDist::Normal,
            ColumnDist::Normal,
            ColumnDist::Bernoulli(0.6),
            ColumnDist::Normal,
            ColumnDist::Normal,
        ],
        intercept: 0.1,
        seed,
    })
    .unwrap();
    let path = dir.join("fixture.csv");
    ds.write_csv(File::create(&path).unwrap()).unwrap();
    path
}

fn config(data: std::path::PathBuf) -> AuditConfig {
    AuditConfig {
        data,
        target: "y".into(),
        seed: 17,
        folds: 5,
        threads: 2,
        ..Default::default()
    }
}

#[test]
fn report_shape_for_six_features() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(fixture(dir.path(), 200, 1));
    let report = run_audit(&cfg).unwrap();
    assert_eq!(report.impact.mean.len(), 6);
    for feat in &report.impact.mean {
        assert_eq!(feat.cdi.len(), 4);
    }
    let plots = emit_plot_data(&report);
    // 6 features x 4 ratios x 4 divergences
    assert_eq!(plots.single_swap.len(), 96);
    assert_eq!(report.rankings.len(), 2 * 4 * 4);
    assert_eq!(report.stability.len(), 2 * 4 * 4);
    assert_eq!(report.labels.len(), 6);
    assert_eq!(report.importance.mean.len(), 6);
    assert_eq!(report.version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn scenario_table_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(fixture(dir.path(), 300, 2));
    let report = run_audit(&cfg).unwrap();
    assert_eq!(report.scenarios[0].scenario, Scenario::Default);
    assert_eq!(report.scenarios.len(), 3);
    let most_biased = report
        .labels
        .iter()
        .find(|l| l.bias_rank == 1)
        .unwrap()
        .feature
        .clone();
    assert_eq!(report.group_feature.as_deref(), Some(most_biased.as_str()));
    assert!(report
        .scenarios
        .iter()
        .any(|s| s.scenario == Scenario::Drop(most_biased.clone())));
    let mut ranks: Vec<usize> = report.scenarios.iter().map(|s| s.rank).collect();
    ranks.sort();
    assert_eq!(ranks, vec![1, 2, 3]);
    for s in &report.scenarios {
        assert!((s.t_score - t_score(&s.performance, &s.fairness)).abs() < 0.01);
        assert_eq!(s.comparisons.len(), 9);
        assert_eq!(s.folds.len(), 5);
    }
}

#[test]
fn rerun_is_byte_identical_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(fixture(dir.path(), 200, 3));
    let a = run_audit(&cfg).unwrap();
    cfg.threads = 1;
    let b = run_audit(&cfg).unwrap();
    write_report(&a, dir.path().join("a")).unwrap();
    write_report(&b, dir.path().join("b")).unwrap();
    for f in REPORT_FILES {
        if f == "report.json" {
            continue; // echoes the thread count
        }
        assert_eq!(
            fs::read(dir.path().join("a").join(f)).unwrap(),
            fs::read(dir.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(a.impact, b.impact);
    assert_eq!(a.scenarios, b.scenarios);
}

#[test]
fn unknown_order_feature_fails_in_order_stage_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(fixture(dir.path(), 100, 4));
    cfg.temporal_order = vec!["x1".into(), "nope".into()];
    let out = dir.path().join("out");
    let result = run_audit(&cfg).and_then(|r| write_report(&r, &out));
    let err = result.unwrap_err();
    assert_eq!(err.stage(), Some("order"));
    assert!(err.to_string().contains("nope"));
    assert!(!out.exists());
}

#[test]
fn missing_data_fails_in_load_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path().join("absent.csv"));
    assert_eq!(run_audit(&cfg).unwrap_err().stage(), Some("load"));
    let bad = AuditConfig {
        folds: 1,
        ..config(dir.path().join("absent.csv"))
    };
    assert_eq!(run_audit(&bad).unwrap_err().stage(), Some("config"));
}

#[test]
fn plot_csv_round_trips_report_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(fixture(dir.path(), 200, 5));
    let report = run_audit(&cfg).unwrap();
    let out = dir.path().join("out");
    write_report(&report, &out).unwrap();

    let single = read_plot_csv(File::open(out.join("single_swap.csv")).unwrap()).unwrap();
    for row in &single {
        let feat = report.impact.feature(&row.feature).unwrap();
        let want = feat.cdi_at(row.ratio.unwrap()).unwrap()[row.divergence.unwrap()];
        assert_eq!(row.value, want);
    }
    let double = read_plot_csv(File::open(out.join("double_swap.csv")).unwrap()).unwrap();
    let emitted = emit_plot_data(&report);
    assert_eq!(double, emitted.double_swap);
    assert_eq!(read_report(&out).unwrap(), report);

    // The last feature in temporal order has no mediators.
    let last = report.temporal_order.names[*report.temporal_order.order.last().unwrap()].clone();
    let flagged: Vec<_> = double
        .iter()
        .filter(|r| r.feature == last && r.metric == "no_mediators")
        .collect();
    assert_eq!(flagged.len(), 16);
    assert!(double
        .iter()
        .filter(|r| r.feature == last && r.metric == "total_natural")
        .all(|r| r.value == 0.0));
}

#[test]
fn totals_equal_summed_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_audit(&config(fixture(dir.path(), 150, 6))).unwrap();
    for feat in &report.impact.mean {
        for (k, total) in feat.total_natural.iter().enumerate() {
            for kind in DivergenceKind::ALL {
                let sum: f64 = feat
                    .mediators
                    .iter()
                    .map(|m| m.ratios[k].ndi[kind] + m.ratios[k].nii[kind])
                    .sum();
                assert!((total.scores[kind] - sum).abs() < 1e-9);
            }
        }
    }
    assert!(report
        .ranking(SwapKind::Double, 0.5, DivergenceKind::Hellinger)
        .is_some());
}

#[test]
fn correlated_columns_are_dropped_before_analysis() {
    let n = 120;
    let a: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
    let b: Vec<f64> = a.iter().map(|v| 2.0 * v + 0.01).collect();
    let c: Vec<f64> = (0..n).map(|i| ((i * 7) % 13) as f64).collect();
    let y: Vec<u8> = a.iter().zip(&c).map(|(x, z)| u8::from(x + z / 13.0 > 0.5)).collect();
    let ds = TabularDataset::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec![FeatureKind::Continuous; 3],
        vec![a, b, c],
        "y",
        y,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corr.csv");
    ds.write_csv(File::create(&path).unwrap()).unwrap();
    let mut cfg = config(path);
    cfg.scenarios.clear();
    let report = run_audit(&cfg).unwrap();
    assert_eq!(report.dropped_correlated, vec!["b".to_owned()]);
    assert_eq!(report.schema.names, vec!["a".to_owned(), "c".to_owned()]);
    assert!(report.scenarios.is_empty());
    assert!(report.group_feature.is_none());
}
