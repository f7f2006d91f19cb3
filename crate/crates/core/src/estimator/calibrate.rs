use log::warn;

use super::{estimate_forces, EstimatorConfig, MeasuredCurvature};
use crate::error::{Error, Result};
use crate::rod::RodProperties;

#[derive(Debug, Clone, PartialEq)]
pub struct LocationBias {
    /// Offset added to model locations, `s_est = s_cal + s_bias` (m).
    pub s_bias: f64,
    pub used: usize,
    pub excluded: Vec<usize>,
}

/// Mean of `true − estimated` location over single-force cases. Cases whose
/// estimate fails are skipped with a warning.
pub fn calibrate_location_bias(
    cases: &[(MeasuredCurvature, f64)],
    props: &RodProperties,
    cfg: &EstimatorConfig,
) -> Result<LocationBias> {
    if cases.is_empty() {
        return Err(Error::Calibration("no calibration cases".into()));
    }
    let mut offsets = Vec::with_capacity(cases.len());
    let mut excluded = Vec::new();
    for (i, (meas, truth)) in cases.iter().enumerate() {
        match estimate_forces(meas, 1, props, cfg) {
            Ok(res) if !res.no_contact => offsets.push(truth - res.forces.forces()[0].s),
            Ok(_) => {
                warn!("calibration case {i}: no contact detected, excluded");
                excluded.push(i);
            }
            Err(e) => {
                warn!("calibration case {i}: {e}, excluded");
                excluded.push(i);
            }
        }
    }
    if offsets.is_empty() {
        return Err(Error::Calibration("every location calibration case failed".into()));
    }
    Ok(LocationBias {
        s_bias: offsets.iter().sum::<f64>() / offsets.len() as f64,
        used: offsets.len(),
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessCalibration {
    /// Multiplier on the Young's modulus.
    pub scale: f64,
    /// Sum of squared magnitude errors at `scale` (N²).
    pub residual: f64,
    /// Largest change of an estimated location between scale 1 and `scale`
    /// (m).
    pub location_shift: f64,
}

const BRACKET: (f64, f64) = (0.5, 2.0);

/// Scale on E minimising `Σ (|f_est| − |f_true|)²` over single-force cases,
/// by golden-section search on [0.5, 2]. A minimum on the bracket edge is a
/// failure.
pub fn calibrate_stiffness(
    cases: &[(MeasuredCurvature, f64)],
    props: &RodProperties,
    cfg: &EstimatorConfig,
) -> Result<StiffnessCalibration> {
    if cases.is_empty() {
        return Err(Error::Calibration("no calibration cases".into()));
    }
    let estimates = |scale: f64| -> Result<Vec<(f64, f64)>> {
        let scaled = props.with_stiffness_scale(scale);
        cases
            .iter()
            .map(|(meas, _)| {
                let res = estimate_forces(meas, 1, &scaled, cfg)?;
                let f = res
                    .forces
                    .forces()
                    .first()
                    .ok_or_else(|| Error::Calibration("no contact detected in a stiffness case".into()))?;
                Ok((f.s, f.magnitude()))
            })
            .collect()
    };
    let objective = |scale: f64| -> Result<f64> {
        Ok(estimates(scale)?
            .iter()
            .zip(cases)
            .map(|((_, mag), (_, truth))| (mag - truth).powi(2))
            .sum())
    };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = BRACKET;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c)?, objective(d)?);
    while b - a > 1e-6 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d)?;
        }
    }
    let scale = 0.5 * (a + b);
    if scale - BRACKET.0 < 1e-4 || BRACKET.1 - scale < 1e-4 {
        return Err(Error::Calibration(format!(
            "stiffness scale ran into the search bracket [{}, {}]",
            BRACKET.0, BRACKET.1
        )));
    }

    let before = estimates(1.0)?;
    let after = estimates(scale)?;
    let location_shift = before
        .iter()
        .zip(&after)
        .map(|((s0, _), (s1, _))| (s1 - s0).abs())
        .fold(0.0, f64::max);
    let delta = props.length / (cfg.q - 1) as f64;
    if location_shift >= delta {
        warn!("stiffness rescaling moved a location estimate by {location_shift:.4} m (grid spacing {delta:.4} m)");
    }
    Ok(StiffnessCalibration {
        scale,
        residual: objective(scale)?,
        location_shift,
    })
}
