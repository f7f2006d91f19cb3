//! Synthetic FBG readings and the measurement CSV format.
//!
//! ```text
//! s_m,u_x_per_m,u_y_per_m
//! 0.02,-3.1,0.0
//! ...
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{CurvatureSolver, ForwardModel, MeasuredCurvature};
use crate::force::ForceVector;
use crate::rod::RodProperties;

pub const CSV_HEADER: &str = "s_m,u_x_per_m,u_y_per_m";

/// Evenly pitched gratings along the fiber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorLayout {
    pub spacing: f64,
    pub first_offset: f64,
    pub count: usize,
}

impl Default for SensorLayout {
    /// 14 gratings at a 20 mm pitch starting 20 mm from the clamp.
    fn default() -> Self {
        Self {
            spacing: 0.020,
            first_offset: 0.020,
            count: 14,
        }
    }
}

impl SensorLayout {
    pub fn locations(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| self.first_offset + i as f64 * self.spacing)
            .collect()
    }

    pub fn validate(&self, props: &RodProperties) -> Result<()> {
        if self.count < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 gratings, got {}",
                self.count
            )));
        }
        if !(self.spacing > 0.0 && self.first_offset >= 0.0) {
            return Err(Error::InvalidConfig(
                "grating spacing must be positive and offset non-negative".into(),
            ));
        }
        let last = self.first_offset + (self.count - 1) as f64 * self.spacing;
        if last > props.length * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "last grating at {last} m lies beyond the rod tip at {} m",
                props.length
            )));
        }
        Ok(())
    }
}

/// Additive Gaussian noise with standard deviation `sigma_rel · max|u|`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma_rel: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }
}

/// Curvature readings the given forces would produce at the gratings. The
/// forward model is evaluated on `model.grid` and interpolated linearly.
pub fn simulate_fbg<S: CurvatureSolver>(
    fv: &ForceVector,
    model: &ForwardModel<S>,
    layout: &SensorLayout,
    noise: &NoiseModel,
) -> Result<MeasuredCurvature> {
    layout.validate(&model.props)?;
    if !(noise.sigma_rel >= 0.0 && noise.sigma_rel.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "noise level {} must be non-negative",
            noise.sigma_rel
        )));
    }
    let field = model.curvature(fv)?;
    let locations = layout.locations();
    let (mut u_x, mut u_y): (Vec<f64>, Vec<f64>) = locations.iter().map(|&s| field.sample(s)).unzip();

    if noise.sigma_rel > 0.0 {
        let peak = u_x.iter().zip(&u_y).map(|(x, y)| x.hypot(*y)).fold(0.0, f64::max);
        let sigma = noise.sigma_rel * peak;
        if sigma > 0.0 {
            let normal = Normal::new(0.0, sigma).expect("finite positive sigma");
            let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
            for (x, y) in u_x.iter_mut().zip(u_y.iter_mut()) {
                *x += normal.sample(&mut rng);
                *y += normal.sample(&mut rng);
            }
        }
    }
    MeasuredCurvature::new(locations, u_x, u_y)
}

pub fn write_measurement(path: impl AsRef<Path>, m: &MeasuredCurvature) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{CSV_HEADER}")?;
    for i in 0..m.len() {
        writeln!(out, "{},{},{}", m.locations[i], m.u_x[i], m.u_y[i])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_measurement(path: impl AsRef<Path>) -> Result<MeasuredCurvature> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER.split(',').collect::<Vec<_>>() {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{CSV_HEADER}`, found `{}`", header.join(",")),
        });
    }

    let (mut s, mut ux, mut uy) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let mut values = [0.0; 3];
        for (v, field) in values.iter_mut().zip(record.iter()) {
            *v = field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("`{field}` is not a finite number"),
                })?;
        }
        if let Some(&prev) = s.last() {
            if values[0] <= prev {
                return Err(Error::Parse {
                    line,
                    msg: format!("grating location {} m does not increase (previous {prev} m)", values[0]),
                });
            }
        }
        s.push(values[0]);
        ux.push(values[1]);
        uy.push(values[2]);
    }
    if s.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "no data rows".into(),
        });
    }
    MeasuredCurvature::new(s, ux, uy)
}
