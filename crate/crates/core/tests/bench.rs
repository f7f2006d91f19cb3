use rodforce::bench::*;
use rodforce::estimator::EstimatorConfig;
use rodforce::force::ForceVector;
use rodforce::rod::RodProperties;
use rodforce::sensor::{NoiseModel, SensorLayout};

fn setup() -> (RodProperties, SensorLayout, EstimatorConfig) {
    (
        RodProperties::nitinol_tube(),
        SensorLayout::default(),
        EstimatorConfig::default(),
    )
}

#[test]
fn curvature_loss_map_bottoms_out_at_the_truth() {
    let (props, layout, cfg) = setup();
    let model = cfg.model(&props).unwrap();
    let (s, f) = default_map_ranges();
    let map = loss_map(
        &ForceVector::single(0.2, 0.3, 0.0),
        s,
        f,
        LossKind::Curvature,
        &model,
        &layout,
    )
    .unwrap();
    let (i, j) = map.argmin();
    assert!((map.s[i] - 0.2).abs() < 1e-12 && (map.f[j] - 0.3).abs() < 1e-12);
    assert!(map.loss.iter().flatten().all(|v| *v >= 0.0));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.csv");
    map.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("s_m,f_N,loss"));
    assert_eq!(text.lines().count(), 1 + 96 * 51);
}

#[test]
fn loss_map_rejects_ranges_off_the_rod() {
    let (props, layout, cfg) = setup();
    let model = cfg.model(&props).unwrap();
    let s = Range {
        lo: 0.1,
        hi: 0.4,
        count: 5,
    };
    let f = Range {
        lo: 0.0,
        hi: 0.5,
        count: 5,
    };
    assert!(loss_map(
        &ForceVector::single(0.2, 0.3, 0.0),
        s,
        f,
        LossKind::Shape,
        &model,
        &layout
    )
    .is_err());
}

#[test]
fn noisy_monte_carlo_lands_near_experimental_errors() {
    let (props, layout, cfg) = setup();
    let settings = AccuracySettings {
        draws: 50,
        ..AccuracySettings::default()
    };
    let cells = accuracy_vs_q(&Scenario::defaults(), &[250], &props, &layout, &cfg, &settings).unwrap();
    for c in &cells {
        eprintln!(
            "{} q={} mag_rmse={:.4} N loc_rmse={:.2} mm mag_err={:.2}% loc_err={:.2}%L failures={}",
            c.report.scenario,
            c.report.q,
            c.report.mag_rmse_n,
            c.report.loc_rmse_m * 1e3,
            c.mag_error_pct,
            c.loc_error_pct,
            c.report.failures
        );
        assert_eq!(c.report.repetitions, 50);
        assert_eq!(c.report.failures, 0);
        // same order of magnitude as the experimental ranges
        assert!(
            c.mag_error_pct > 0.1 * REFERENCE_MAG_ERROR_PCT.0 && c.mag_error_pct < 10.0 * REFERENCE_MAG_ERROR_PCT.1
        );
        assert!(c.loc_error_pct < 10.0 * REFERENCE_LOC_ERROR_PCT.1);
    }
}

#[test]
fn accuracy_rows_are_reproducible_and_written_with_fixed_header() {
    let (props, layout, cfg) = setup();
    let settings = AccuracySettings {
        draws: 6,
        ..AccuracySettings::default()
    };
    let sc = &Scenario::defaults()[..1];
    let a = accuracy_vs_q(sc, &[50, 100], &props, &layout, &cfg, &settings).unwrap();
    let b = accuracy_vs_q(sc, &[50, 100], &props, &layout, &cfg, &settings).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.report.mag_rmse_n, y.report.mag_rmse_n);
        assert_eq!(x.report.loc_rmse_m, y.report.loc_rmse_m);
        assert_eq!(x.report.evaluations, y.report.evaluations);
        assert!(x.report.mean_s > 0.0);
    }
    assert!(accuracy_vs_q(sc, &[100, 50], &props, &layout, &cfg, &settings).is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("acc.csv");
    let mut rows: Vec<BenchReport> = a.iter().map(|c| c.report.clone()).collect();
    rows.extend(reference_rows());
    write_reports(&path, &rows).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scenario,q,method,mean_s,std_s,mag_rmse_N,loc_rmse_m");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[3], "experiment_single,250,reference,,,0.084,0.00295");
}

#[test]
fn force_number_curve_drops_at_the_true_count() {
    let (props, layout, cfg) = setup();
    let sc = &Scenario::defaults()[2];
    let curve = force_number_curve(sc, 4, &props, &layout, &cfg, &NoiseModel::noiseless()).unwrap();
    assert_eq!(curve.len(), 4);
    let loss: Vec<f64> = curve.iter().map(|c| c.1).collect();
    assert!(loss.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)), "{loss:?}");
    assert!(loss[1] > cfg.loss_threshold && loss[2] < cfg.loss_threshold, "{loss:?}");
}

#[test]
fn timing_compare_reports_both_methods() {
    let (props, layout, cfg) = setup();
    let rows = timing_compare(&[40], &[1], 10, &props, &layout, &cfg).unwrap();
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(r.simplified.repetitions, 10);
    assert!(r.simplified.mean_s > 0.0 && r.bvp_lm.mean_s > 0.0);
    assert_eq!(r.bvp_lm.failures, 0);
    assert!(r.speedup > 1.0);
    let dir = tempfile::tempdir().unwrap();
    write_timing(dir.path(), &rows).unwrap();
    let speed = std::fs::read_to_string(dir.path().join("speedup.csv")).unwrap();
    assert!(speed.starts_with("h,q,simplified_mean_s,bvp_lm_mean_s,speedup,bvp_failures\n"));
    let timing = std::fs::read_to_string(dir.path().join("timing.csv")).unwrap();
    assert!(timing.contains(",simplified,") && timing.contains(",bvp_lm,"));
}
