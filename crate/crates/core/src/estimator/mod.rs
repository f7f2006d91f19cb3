//! Recovery of point-force locations, magnitudes and count from measured
//! curvature by bounded nonlinear least squares.

mod calibrate;
mod model;
mod optimize;

pub use calibrate::{calibrate_location_bias, calibrate_stiffness, LocationBias, StiffnessCalibration};
pub use model::{CurvatureSolver, ForwardModel, LocalFrame, ShootingBvp};

use std::time::Instant;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::force::{Apportionment, ForceVector, PointForce};
use crate::rod::{NodeGrid, RodProperties};
use optimize::{Bounds, Settings};

/// Curvature read at the gratings of a sensing fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredCurvature {
    pub locations: Vec<f64>,
    pub u_x: Vec<f64>,
    pub u_y: Vec<f64>,
}

impl MeasuredCurvature {
    pub fn new(locations: Vec<f64>, u_x: Vec<f64>, u_y: Vec<f64>) -> Result<Self> {
        if locations.len() < 2 {
            return Err(Error::InvalidMeasurement(format!(
                "need at least 2 gratings, got {}",
                locations.len()
            )));
        }
        if u_x.len() != locations.len() || u_y.len() != locations.len() {
            return Err(Error::InvalidMeasurement(
                "component lengths differ from grating count".into(),
            ));
        }
        if locations.iter().chain(&u_x).chain(&u_y).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("measured curvature"));
        }
        if let Some(i) = locations.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMeasurement(format!(
                "grating locations must increase (index {})",
                i + 1
            )));
        }
        Ok(Self { locations, u_x, u_y })
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn check_within(&self, length: f64) -> Result<()> {
        let last = *self.locations.last().expect("at least two gratings");
        if self.locations[0] < 0.0 || last > length * (1.0 + 1e-12) {
            return Err(Error::InvalidMeasurement(format!(
                "gratings span [{}, {last}] m, outside the rod [0, {length}] m",
                self.locations[0]
            )));
        }
        Ok(())
    }

    /// Sum of squared readings, i.e. the loss of the unloaded model.
    pub fn energy(&self) -> f64 {
        self.u_x.iter().chain(&self.u_y).map(|v| v * v).sum()
    }

    /// Readings rotated by `angle` about the rod axis.
    pub fn rotated(&self, angle: f64) -> Self {
        let (sin, cos) = angle.sin_cos();
        let (u_x, u_y) = self
            .u_x
            .iter()
            .zip(&self.u_y)
            .map(|(x, y)| (cos * x - sin * y, sin * x + cos * y))
            .unzip();
        Self {
            locations: self.locations.clone(),
            u_x,
            u_y,
        }
    }
}

/// Positions of points on the rod (m, clamp frame) at known arc lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredShape {
    pub arc_lengths: Vec<f64>,
    pub points: Vec<Vector3<f64>>,
}

impl MeasuredShape {
    pub fn rotated_about_axis(&self, angle: f64) -> Self {
        let rot = nalgebra::Rotation3::from_axis_angle(&Vector3::z_axis(), angle);
        Self {
            arc_lengths: self.arc_lengths.clone(),
            points: self.points.iter().map(|p| rot * p).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    /// Grid nodes of the forward model.
    pub q: usize,
    /// Curvature-loss threshold τ ((1/m)², summed over all components).
    pub loss_threshold: f64,
    pub max_force_count: usize,
    /// Bound on each force component (N).
    pub magnitude_bound: f64,
    /// Minimum distance between forces and from the clamp (m).
    pub min_separation: f64,
    /// Initial location seeds tried per force count.
    pub multistart_locations: usize,
    /// Stop when no parameter moves by more than this fraction of its scale.
    pub step_tolerance: f64,
    /// Stop when the loss falls below this.
    pub loss_tolerance: f64,
    /// Objective evaluations allowed per start.
    pub max_evaluations: usize,
    /// Relative forward-difference step.
    pub fd_relative_step: f64,
    pub apportionment: Apportionment,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            q: 250,
            loss_threshold: 3.0,
            max_force_count: 3,
            magnitude_bound: 2.5,
            min_separation: 0.02,
            multistart_locations: 8,
            step_tolerance: 1e-10,
            loss_tolerance: 1e-24,
            max_evaluations: 2000,
            fd_relative_step: 1e-6,
            apportionment: Apportionment::Linear,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.q < 2 {
            return bad(format!("q = {} must be at least 2", self.q));
        }
        if self.loss_threshold.is_nan() || self.loss_threshold <= 0.0 {
            return bad(format!("loss threshold {} must be positive", self.loss_threshold));
        }
        if self.max_force_count < 1 {
            return bad("max_force_count must be at least 1".into());
        }
        if !(self.magnitude_bound > 0.0 && self.min_separation > 0.0) {
            return bad("magnitude bound and minimum separation must be positive".into());
        }
        if self.multistart_locations < 1 || self.max_evaluations < 1 {
            return bad("need at least one start and one evaluation".into());
        }
        if !(self.fd_relative_step > 0.0 && self.step_tolerance >= 0.0 && self.loss_tolerance >= 0.0) {
            return bad("optimizer tolerances must be non-negative and the difference step positive".into());
        }
        Ok(())
    }

    pub fn model(&self, props: &RodProperties) -> Result<ForwardModel> {
        Ok(ForwardModel::new(*props, self.q)?.with_apportionment(self.apportionment))
    }

    fn settings(&self) -> Settings {
        Settings {
            max_evaluations: self.max_evaluations,
            step_tolerance: self.step_tolerance,
            loss_tolerance: self.loss_tolerance,
            fd_relative_step: self.fd_relative_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    /// Model-frame locations (no location bias applied).
    pub forces: ForceVector,
    pub loss: f64,
    pub h_selected: usize,
    /// Objective evaluations over all starts (and all force counts when
    /// selecting).
    pub evaluations: usize,
    /// Wall time (s).
    pub elapsed: f64,
    /// No start improved on the unloaded model.
    pub no_contact: bool,
    /// `loss < τ`.
    pub threshold_met: bool,
    /// Converged loss of every start, in seed order.
    pub start_losses: Vec<f64>,
}

impl EstimationResult {
    fn no_contact(loss: f64, threshold: f64, evaluations: usize, started: Instant) -> Self {
        Self {
            forces: ForceVector::empty(),
            loss,
            h_selected: 0,
            evaluations,
            elapsed: started.elapsed().as_secs_f64(),
            no_contact: true,
            threshold_met: loss < threshold,
            start_losses: Vec::new(),
        }
    }
}

fn residuals_from<S: CurvatureSolver>(
    model: &ForwardModel<S>,
    fv: &ForceVector,
    measured: &MeasuredCurvature,
) -> Result<Vec<f64>> {
    let field = model.curvature(fv)?;
    let mut r = Vec::with_capacity(2 * measured.len());
    for i in 0..measured.len() {
        let (x, y) = field.sample(measured.locations[i]);
        r.push(x - measured.u_x[i]);
        r.push(y - measured.u_y[i]);
    }
    Ok(r)
}

/// Sum over gratings of squared differences between modeled and measured
/// curvature components, (1/m)².
pub fn curvature_loss(
    fv: &ForceVector,
    measured: &MeasuredCurvature,
    props: &RodProperties,
    grid: &NodeGrid,
) -> Result<f64> {
    let model = ForwardModel::new(*props, grid.len())?;
    curvature_loss_with(&model, fv, measured)
}

pub fn curvature_loss_with<S: CurvatureSolver>(
    model: &ForwardModel<S>,
    fv: &ForceVector,
    measured: &MeasuredCurvature,
) -> Result<f64> {
    measured.check_within(model.props.length)?;
    Ok(residuals_from(model, fv, measured)?.iter().map(|v| v * v).sum())
}

/// Sum of squared distances (m²) between the modeled shape and measured
/// points at matching arc lengths.
pub fn shape_loss(fv: &ForceVector, measured: &MeasuredShape, props: &RodProperties, grid: &NodeGrid) -> Result<f64> {
    let model = ForwardModel::new(*props, grid.len())?;
    shape_loss_with(&model, fv, measured)
}

pub fn shape_loss_with<S: CurvatureSolver>(
    model: &ForwardModel<S>,
    fv: &ForceVector,
    measured: &MeasuredShape,
) -> Result<f64> {
    if measured.arc_lengths.len() != measured.points.len() {
        return Err(Error::InvalidMeasurement(
            "shape arc lengths and points differ in count".into(),
        ));
    }
    let state = model.shape(fv)?;
    Ok(measured
        .arc_lengths
        .iter()
        .zip(&measured.points)
        .map(|(&s, p)| (state.position_at(s) - p).norm_squared())
        .sum())
}

/// Noiseless shape "measurement" from the forward model at the given arc
/// lengths.
pub fn sample_shape<S: CurvatureSolver>(
    model: &ForwardModel<S>,
    fv: &ForceVector,
    arc_lengths: &[f64],
) -> Result<MeasuredShape> {
    let state = model.shape(fv)?;
    Ok(MeasuredShape {
        arc_lengths: arc_lengths.to_vec(),
        points: arc_lengths.iter().map(|&s| state.position_at(s)).collect(),
    })
}

/// Best `h`-force fit to the measurement. See [`estimate_forces_with`].
pub fn estimate_forces(
    measured: &MeasuredCurvature,
    h: usize,
    props: &RodProperties,
    cfg: &EstimatorConfig,
) -> Result<EstimationResult> {
    estimate_forces_with(measured, h, &cfg.model(props)?, cfg, &[])
}

/// Minimises the curvature loss over `h` forces from several starting
/// points and keeps the best, ties going to the earlier start.
///
/// Starts, in order: locations at the gratings where the measured curvature
/// kinks most, then evenly spread locations shifted by a fraction of their
/// pitch, then any `extra_starts` (packed parameter vectors of length 3h).
/// Component magnitudes of the location-only starts come from a linear
/// least-squares fit with the locations held fixed.
pub fn estimate_forces_with<S: CurvatureSolver>(
    measured: &MeasuredCurvature,
    h: usize,
    model: &ForwardModel<S>,
    cfg: &EstimatorConfig,
    extra_starts: &[Vec<f64>],
) -> Result<EstimationResult> {
    let started = Instant::now();
    cfg.validate()?;
    if h == 0 {
        return Err(Error::InvalidConfig("force count must be at least 1".into()));
    }
    measured.check_within(model.props.length)?;
    if h as f64 * cfg.min_separation > model.props.length {
        return Err(Error::InvalidConfig(format!(
            "{h} forces {} m apart do not fit on the rod",
            cfg.min_separation
        )));
    }

    let baseline = measured.energy();
    if baseline == 0.0 {
        return Ok(EstimationResult::no_contact(0.0, cfg.loss_threshold, 0, started));
    }

    let bounds = Bounds {
        length: model.props.length,
        min_sep: cfg.min_separation,
        bound: cfg.magnitude_bound,
    };
    let mut evaluations = 0;
    let mut residuals = |x: &[f64]| -> Option<Vec<f64>> {
        evaluations += 1;
        let fv = ForceVector::unpack(x).ok()?;
        residuals_from(model, &fv, measured).ok()
    };

    let mut starts: Vec<Vec<f64>> = location_seeds(measured, h, cfg, &bounds)
        .into_iter()
        .map(|locs| with_linear_magnitudes(&locs, &bounds, &mut residuals))
        .collect();
    for extra in extra_starts {
        if extra.len() != 3 * h {
            return Err(Error::ParameterLength(extra.len()));
        }
        starts.push(extra.clone());
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut start_losses = Vec::with_capacity(starts.len());
    let settings = cfg.settings();
    for start in &starts {
        let Some(outcome) = optimize::minimize(&mut residuals, start, &bounds, &settings) else {
            start_losses.push(f64::INFINITY);
            continue;
        };
        start_losses.push(outcome.loss);
        if best.as_ref().is_none_or(|(loss, _)| outcome.loss < *loss) {
            best = Some((outcome.loss, outcome.x));
        }
    }

    match best {
        Some((loss, x)) if loss < baseline => {
            let forces = ForceVector::unpack(&x)?;
            Ok(EstimationResult {
                forces,
                loss,
                h_selected: h,
                evaluations,
                elapsed: started.elapsed().as_secs_f64(),
                no_contact: false,
                threshold_met: loss < cfg.loss_threshold,
                start_losses,
            })
        }
        _ => {
            let mut out = EstimationResult::no_contact(baseline, cfg.loss_threshold, evaluations, started);
            out.start_losses = start_losses;
            Ok(out)
        }
    }
}

/// Location-only seeds: kink-driven first, then shifted uniform spreads.
fn location_seeds(measured: &MeasuredCurvature, h: usize, cfg: &EstimatorConfig, bounds: &Bounds) -> Vec<Vec<f64>> {
    let n = cfg.multistart_locations;
    let mut seeds = Vec::with_capacity(n);

    // slope change of the measured curvature at each interior grating
    let g = measured.len();
    let mut kinks: Vec<(f64, f64)> = (1..g - 1)
        .map(|k| {
            let (s0, s1, s2) = (
                measured.locations[k - 1],
                measured.locations[k],
                measured.locations[k + 1],
            );
            let jump = |u: &[f64]| (u[k + 1] - u[k]) / (s2 - s1) - (u[k] - u[k - 1]) / (s1 - s0);
            (jump(&measured.u_x).hypot(jump(&measured.u_y)), s1)
        })
        .collect();
    kinks.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
    let mut picked: Vec<f64> = Vec::with_capacity(h);
    for &(_, s) in &kinks {
        if picked.len() == h {
            break;
        }
        if picked.iter().all(|p| (p - s).abs() >= cfg.min_separation) {
            picked.push(s);
        }
    }
    let span = bounds.length - bounds.min_sep;
    let mut k = 0;
    while picked.len() < h {
        // pad with evenly spread locations
        picked.push(bounds.min_sep + span * (k as f64 + 0.5) / h as f64);
        k += 1;
    }
    picked.sort_by(f64::total_cmp);
    seeds.push(picked);

    for k in 1..n {
        let phase = k as f64 / n as f64;
        seeds.push(
            (0..h)
                .map(|i| bounds.min_sep + span * (i as f64 + phase) / h as f64)
                .collect(),
        );
    }
    seeds
}

/// Packs `locs` with components from the linearised least-squares fit
/// around zero load, clipped to the bounds.
fn with_linear_magnitudes<F>(locs: &[f64], bounds: &Bounds, residuals: &mut F) -> Vec<f64>
where
    F: FnMut(&[f64]) -> Option<Vec<f64>>,
{
    let h = locs.len();
    let mut x: Vec<f64> = locs.iter().flat_map(|&s| [s, 0.0, 0.0]).collect();
    bounds.project(&mut x);
    let Some(r0) = residuals(&x) else {
        return x;
    };
    let probe = 1e-3;
    let mut columns = Vec::with_capacity(2 * h);
    for i in 0..h {
        for c in 1..=2 {
            let mut xp = x.clone();
            xp[3 * i + c] = probe;
            let Some(rp) = residuals(&xp) else {
                return x;
            };
            columns.push(rp.iter().zip(&r0).map(|(a, b)| (a - b) / probe).collect::<Vec<_>>());
        }
    }
    let jac = nalgebra::DMatrix::from_fn(r0.len(), 2 * h, |row, col| columns[col][row]);
    let jtj = jac.transpose() * &jac;
    let ridge = 1e-12 * jtj.diagonal().amax().max(f64::MIN_POSITIVE);
    let rhs = -(jac.transpose() * nalgebra::DVector::from_column_slice(&r0));
    let system = jtj + nalgebra::DMatrix::identity(2 * h, 2 * h) * ridge;
    if let Some(chol) = system.cholesky() {
        let c = chol.solve(&rhs);
        for i in 0..h {
            x[3 * i + 1] = c[2 * i];
            x[3 * i + 2] = c[2 * i + 1];
        }
        bounds.project(&mut x);
    }
    x
}

/// Increases the force count from one until the loss drops below τ.
pub fn select_force_count(
    measured: &MeasuredCurvature,
    props: &RodProperties,
    cfg: &EstimatorConfig,
) -> Result<EstimationResult> {
    select_force_count_with(measured, &cfg.model(props)?, cfg)
}

/// Each larger count is also started from the previous optimum plus a
/// zero-magnitude force in the widest gap, so the best loss never
/// increases with `h`. If no count meets τ, the best result is returned with
/// `threshold_met == false`.
pub fn select_force_count_with<S: CurvatureSolver>(
    measured: &MeasuredCurvature,
    model: &ForwardModel<S>,
    cfg: &EstimatorConfig,
) -> Result<EstimationResult> {
    let started = Instant::now();
    let curve = force_count_sweep(measured, model, cfg, cfg.max_force_count, true)?;
    let evaluations = curve.iter().map(|r| r.evaluations).sum();
    let mut chosen = curve
        .iter()
        .find(|r| r.no_contact || r.threshold_met)
        .or_else(|| curve.iter().min_by(|a, b| a.loss.total_cmp(&b.loss)))
        .cloned()
        .expect("at least one force count is tried");
    chosen.evaluations = evaluations;
    chosen.elapsed = started.elapsed().as_secs_f64();
    Ok(chosen)
}

/// Best fit for `h = 1..=h_max`, nesting each count's start set in the
/// previous optimum. Stops early at the first passing count when
/// `stop_at_threshold` is set.
pub fn force_count_sweep<S: CurvatureSolver>(
    measured: &MeasuredCurvature,
    model: &ForwardModel<S>,
    cfg: &EstimatorConfig,
    h_max: usize,
    stop_at_threshold: bool,
) -> Result<Vec<EstimationResult>> {
    let mut out: Vec<EstimationResult> = Vec::with_capacity(h_max);
    for h in 1..=h_max {
        let extra: Vec<Vec<f64>> = out
            .last()
            .and_then(|prev| pad_with_idle_force(&prev.forces, model.props.length, cfg.min_separation))
            .map(|fv| vec![fv.pack()])
            .unwrap_or_default();
        let result = estimate_forces_with(measured, h, model, cfg, &extra)?;
        let stop = result.no_contact || (stop_at_threshold && result.threshold_met);
        out.push(result);
        if stop {
            break;
        }
    }
    Ok(out)
}

/// `fv` plus a zero force centred in the widest admissible gap.
fn pad_with_idle_force(fv: &ForceVector, length: f64, min_sep: f64) -> Option<ForceVector> {
    let mut edges = vec![0.0];
    edges.extend(fv.iter().map(|f| f.s));
    let mut best: Option<(f64, f64)> = None;
    for w in edges.windows(2) {
        let (lo, hi) = (w[0] + min_sep, w[1] - min_sep);
        if hi >= lo && best.is_none_or(|(width, _)| hi - lo > width) {
            best = Some((hi - lo, 0.5 * (lo + hi)));
        }
    }
    // after the last force, up to the tip
    let last = *edges.last().unwrap();
    let (lo, hi) = (last + min_sep, length);
    if hi >= lo && best.is_none_or(|(width, _)| hi - lo > width) {
        best = Some((hi - lo, 0.5 * (lo + hi)));
    }
    let (_, s) = best?;
    let mut forces = fv.forces().to_vec();
    forces.push(PointForce::new(s, 0.0, 0.0));
    forces.sort_by(|a, b| a.s.total_cmp(&b.s));
    ForceVector::new(forces).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::{simulate_fbg, NoiseModel, SensorLayout};

    fn measure(fv: &ForceVector, q: usize) -> MeasuredCurvature {
        let model = ForwardModel::new(RodProperties::nitinol_tube(), q).unwrap();
        simulate_fbg(fv, &model, &SensorLayout::default(), &NoiseModel::noiseless()).unwrap()
    }

    #[test]
    fn self_generated_data_has_zero_loss() {
        let props = RodProperties::nitinol_tube();
        let fv = ForceVector::single(0.2, 0.3, 0.0);
        let grid = NodeGrid::for_rod(&props, 250).unwrap();
        let meas = measure(&fv, 250);
        assert!(curvature_loss(&fv, &meas, &props, &grid).unwrap() < 1e-16);
        let moved = ForceVector::single(0.21, 0.3, 0.0);
        assert!(curvature_loss(&moved, &meas, &props, &grid).unwrap() > 0.0);
    }

    #[test]
    fn shape_loss_is_zero_on_own_shape_and_sees_rotation() {
        let props = RodProperties::nitinol_tube();
        let grid = NodeGrid::for_rod(&props, 250).unwrap();
        let model = ForwardModel::new(props, 250).unwrap();
        let fv = ForceVector::single(0.2, 0.3, 0.0);
        let shape = sample_shape(&model, &fv, &SensorLayout::default().locations()).unwrap();
        assert!(shape_loss(&fv, &shape, &props, &grid).unwrap() < 1e-16);
        assert!(shape_loss(&fv, &shape.rotated_about_axis(0.4), &props, &grid).unwrap() > 1e-8);

        // the curvature loss does not care if the candidate and data are
        // rotated together
        let meas = measure(&fv, 250);
        let cand = ForceVector::single(0.18, 0.25, 0.05);
        let a = curvature_loss(&cand, &meas, &props, &grid).unwrap();
        let b = curvature_loss(&cand.rotated(0.4), &meas.rotated(0.4), &props, &grid).unwrap();
        assert!((a - b).abs() <= 1e-9 * a);
    }

    #[test]
    fn recovers_single_force() {
        let props = RodProperties::nitinol_tube();
        let cfg = EstimatorConfig::default();
        let truth = ForceVector::single(0.2, 0.3, 0.0);
        let res = estimate_forces(&measure(&truth, cfg.q), 1, &props, &cfg).unwrap();
        let f = res.forces.forces()[0];
        let delta = props.length / (cfg.q - 1) as f64;
        assert!((f.s - 0.2).abs() < delta, "{res:?}");
        assert!((f.magnitude() - 0.3).abs() < 0.003, "{res:?}");
        assert!(res.threshold_met && !res.no_contact);
        assert!(res.start_losses.iter().all(|l| res.loss <= *l));
        assert_eq!(res.start_losses.len(), cfg.multistart_locations);
    }

    #[test]
    fn zero_curvature_means_no_contact() {
        let props = RodProperties::nitinol_tube();
        let cfg = EstimatorConfig::default();
        let meas = MeasuredCurvature::new(SensorLayout::default().locations(), vec![0.0; 14], vec![0.0; 14]).unwrap();
        let res = estimate_forces(&meas, 1, &props, &cfg).unwrap();
        assert!(res.no_contact);
        assert_eq!(res.loss, 0.0);
        assert!(res.forces.is_empty());
        let sel = select_force_count(&meas, &props, &cfg).unwrap();
        assert!(sel.no_contact && sel.h_selected == 0);
    }

    #[test]
    fn idle_force_goes_in_widest_gap() {
        let fv = ForceVector::single(0.05, 0.3, 0.0);
        let padded = pad_with_idle_force(&fv, 0.29, 0.02).unwrap();
        assert_eq!(padded.len(), 2);
        assert!((padded.forces()[1].s - 0.18).abs() < 1e-12);
        assert_eq!(padded.forces()[1].magnitude(), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let props = RodProperties::nitinol_tube();
        let cfg = EstimatorConfig::default();
        let meas = measure(&ForceVector::single(0.2, 0.3, 0.0), 50);
        assert!(estimate_forces(&meas, 0, &props, &cfg).is_err());
        let bad = EstimatorConfig {
            loss_threshold: 0.0,
            ..cfg
        };
        assert!(estimate_forces(&meas, 1, &props, &bad).is_err());
        assert!(MeasuredCurvature::new(vec![0.1], vec![0.0], vec![0.0]).is_err());
        assert!(MeasuredCurvature::new(vec![0.1, 0.1], vec![0.0; 2], vec![0.0; 2]).is_err());
        let outside = MeasuredCurvature::new(vec![0.1, 0.4], vec![0.0; 2], vec![1.0; 2]).unwrap();
        assert!(estimate_forces(&outside, 1, &props, &cfg).is_err());
    }
}
