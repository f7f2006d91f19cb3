use rodforce::estimator::{
    calibrate_location_bias, calibrate_stiffness, estimate_forces, force_count_sweep, select_force_count,
    EstimatorConfig, ForwardModel, MeasuredCurvature,
};
use rodforce::force::{ForceVector, PointForce};
use rodforce::rod::RodProperties;
use rodforce::sensor::{simulate_fbg, NoiseModel, SensorLayout};

fn measure(props: &RodProperties, fv: &ForceVector, q: usize, noise: NoiseModel) -> MeasuredCurvature {
    let model = ForwardModel::new(*props, q).unwrap();
    simulate_fbg(fv, &model, &SensorLayout::default(), &noise).unwrap()
}

fn assert_recovers(truth: &ForceVector) {
    let props = RodProperties::nitinol_tube();
    let cfg = EstimatorConfig::default();
    let delta = props.length / (cfg.q - 1) as f64;
    let meas = measure(&props, truth, cfg.q, NoiseModel::noiseless());
    let t0 = std::time::Instant::now();
    let res = estimate_forces(&meas, truth.len(), &props, &cfg).unwrap();
    eprintln!(
        "h={} loss={:.3e} evals={} {:.2}s",
        truth.len(),
        res.loss,
        res.evaluations,
        t0.elapsed().as_secs_f64()
    );
    for (est, tru) in res.forces.iter().zip(truth.iter()) {
        assert!((est.s - tru.s).abs() < delta, "{res:?}");
        assert!(
            (est.magnitude() - tru.magnitude()).abs() < 0.01 * tru.magnitude(),
            "{res:?}"
        );
    }
}

#[test]
fn noiseless_single_double_triple_round_trip() {
    assert_recovers(&ForceVector::single(0.2, 0.3, 0.0));
    assert_recovers(
        &ForceVector::new(vec![PointForce::new(0.08, 0.4, -0.2), PointForce::new(0.19, -0.3, 0.5)]).unwrap(),
    );
    assert_recovers(
        &ForceVector::new(vec![
            PointForce::new(0.06, 0.5, 0.1),
            PointForce::new(0.13, -0.2, 0.3),
            PointForce::new(0.24, 0.3, -0.3),
        ])
        .unwrap(),
    );
}

mod random {
    use super::*;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    /// Forces at least 40 mm apart, the first one past the second grating,
    /// magnitudes in the experimental 0.27–1.96 N range.
    pub fn forces(rng: &mut ChaCha8Rng, h: usize, length: f64) -> ForceVector {
        loop {
            let mut s: Vec<f64> = (0..h).map(|_| rng.random_range(0.045..=length)).collect();
            s.sort_by(f64::total_cmp);
            if s.windows(2).all(|w| w[1] - w[0] >= 0.04) {
                return ForceVector::new(
                    s.into_iter()
                        .map(|s| {
                            let mag = rng.random_range(0.27..1.96);
                            let dir: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                            PointForce::new(s, mag * dir.cos(), mag * dir.sin())
                        })
                        .collect(),
                )
                .unwrap();
            }
        }
    }
}

#[test]
fn noiseless_random_round_trips() {
    use rand::SeedableRng;
    let props = RodProperties::nitinol_tube();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for h in 1..=3 {
        for _ in 0..8 {
            assert_recovers(&random::forces(&mut rng, h, props.length));
        }
    }
}

#[test]
fn force_count_selection_follows_threshold() {
    let props = RodProperties::nitinol_tube();
    let cfg = EstimatorConfig::default();
    let model = cfg.model(&props).unwrap();

    let single = measure(
        &props,
        &ForceVector::single(0.2, 0.3, 0.0),
        cfg.q,
        NoiseModel::noiseless(),
    );
    let res = select_force_count(&single, &props, &cfg).unwrap();
    assert_eq!(res.h_selected, 1);
    assert!(res.threshold_met);

    let double = ForceVector::new(vec![PointForce::new(0.09, 0.8, 0.3), PointForce::new(0.21, -0.6, 0.7)]).unwrap();
    let meas = measure(&props, &double, cfg.q, NoiseModel::noiseless());
    let curve = force_count_sweep(&meas, &model, &cfg, 3, false).unwrap();
    eprintln!("{:?}", curve.iter().map(|r| r.loss).collect::<Vec<_>>());
    assert!(curve[0].loss > cfg.loss_threshold);
    assert!(curve[0].loss / curve[1].loss > 100.0);
    assert!(curve.windows(2).all(|w| w[1].loss <= w[0].loss));
    let res = select_force_count(&meas, &props, &cfg).unwrap();
    assert_eq!(res.h_selected, 2);
    assert!(res.threshold_met);
    assert!(res.evaluations >= curve[0].evaluations);
}

#[test]
fn unmet_threshold_is_flagged() {
    let props = RodProperties::nitinol_tube();
    let cfg = EstimatorConfig {
        max_force_count: 1,
        ..EstimatorConfig::default()
    };
    let double = ForceVector::new(vec![PointForce::new(0.09, 0.8, 0.3), PointForce::new(0.21, -0.6, 0.7)]).unwrap();
    let meas = measure(&props, &double, cfg.q, NoiseModel::noiseless());
    let res = select_force_count(&meas, &props, &cfg).unwrap();
    assert!(!res.threshold_met && !res.no_contact);
    assert_eq!(res.h_selected, 1);
}

fn shifted_cases(shift: f64) -> Vec<(MeasuredCurvature, f64)> {
    let props = RodProperties::nitinol_tube();
    [(0.12, 0.5, 0.1), (0.17, 0.3, -0.4), (0.23, -0.6, 0.2)]
        .iter()
        .map(|&(s, fx, fy)| {
            (
                measure(&props, &ForceVector::single(s, fx, fy), 250, NoiseModel::noiseless()),
                s + shift,
            )
        })
        .collect()
}

#[test]
fn location_bias_recovers_constructed_offset() {
    let props = RodProperties::nitinol_tube();
    let cfg = EstimatorConfig::default();
    let delta = props.length / 249.0;
    let bias = calibrate_location_bias(&shifted_cases(0.003), &props, &cfg).unwrap();
    assert!((bias.s_bias - 0.003).abs() < delta, "{bias:?}");
    assert_eq!(bias.used, 3);
    let bias = calibrate_location_bias(&shifted_cases(0.0), &props, &cfg).unwrap();
    assert!(bias.s_bias.abs() < delta);

    let zero = MeasuredCurvature::new(SensorLayout::default().locations(), vec![0.0; 14], vec![0.0; 14]).unwrap();
    let mut cases = shifted_cases(0.0);
    cases.push((zero.clone(), 0.1));
    let bias = calibrate_location_bias(&cases, &props, &cfg).unwrap();
    assert_eq!(bias.excluded, vec![3]);
    assert!(calibrate_location_bias(&[(zero, 0.1)], &props, &cfg).is_err());
    assert!(calibrate_location_bias(&[], &props, &cfg).is_err());
}

fn stiffness_cases(e_scale: f64) -> Vec<(MeasuredCurvature, f64)> {
    let real = RodProperties::nitinol_tube().with_stiffness_scale(e_scale);
    [(0.12, 0.5, 0.1), (0.17, 0.3, -0.4), (0.23, -0.6, 0.2)]
        .iter()
        .map(|&(s, fx, fy)| {
            let fv = ForceVector::single(s, fx, fy);
            (
                measure(&real, &fv, 250, NoiseModel::noiseless()),
                fv.forces()[0].magnitude(),
            )
        })
        .collect()
}

#[test]
fn stiffness_calibration_finds_modulus_mismatch() {
    let props = RodProperties::nitinol_tube();
    let cfg = EstimatorConfig::default();
    let delta = props.length / 249.0;
    let cal = calibrate_stiffness(&stiffness_cases(1.1), &props, &cfg).unwrap();
    assert!((cal.scale - 1.1).abs() < 0.02 * 1.1, "{cal:?}");
    assert!(cal.location_shift < delta);
    let cal = calibrate_stiffness(&stiffness_cases(1.0), &props, &cfg).unwrap();
    assert!((cal.scale - 1.0).abs() < 0.01, "{cal:?}");

    // a modulus far outside the bracket
    let err = calibrate_stiffness(&stiffness_cases(3.0), &props, &cfg).unwrap_err();
    assert!(matches!(err, rodforce::Error::Calibration(_)), "{err}");
}

#[test]
fn stiffness_barely_moves_locations() {
    let props = RodProperties::nitinol_tube();
    let cfg = EstimatorConfig::default();
    let delta = props.length / 249.0;
    for (meas, _) in stiffness_cases(1.0) {
        let base = estimate_forces(&meas, 1, &props, &cfg).unwrap().forces.forces()[0].s;
        for scale in [0.9, 0.95, 1.05, 1.1] {
            let s = estimate_forces(&meas, 1, &props.with_stiffness_scale(scale), &cfg)
                .unwrap()
                .forces
                .forces()[0]
                .s;
            assert!((s - base).abs() < delta, "scale {scale}: {s} vs {base}");
        }
    }
}
