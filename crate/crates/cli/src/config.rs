//! TOML run configuration. Every dimensional key carries its unit in the
//! name; lengths may be given in `_m` or `_mm`, never both.

use std::path::{Path, PathBuf};

use rodforce::bench::AccuracySettings;
use rodforce::estimator::EstimatorConfig;
use rodforce::force::Apportionment;
use rodforce::rod::RodProperties;
use rodforce::sensor::SensorLayout;
use rodforce::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "is_default")]
    pub rod: RawRod,
    #[serde(skip_serializing_if = "is_default")]
    pub sensor: RawSensor,
    #[serde(skip_serializing_if = "is_default")]
    pub estimator: RawEstimator,
    #[serde(skip_serializing_if = "is_default")]
    pub calibration: RawCalibration,
    #[serde(skip_serializing_if = "is_default")]
    pub seeds: RawSeeds,
    #[serde(skip_serializing_if = "is_default")]
    pub bench: RawBench,
    #[serde(skip_serializing_if = "is_default")]
    pub paths: RawPaths,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawRod {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_diameter_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_diameter_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_diameter_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_diameter_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub youngs_modulus_pa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub youngs_modulus_gpa: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawSensor {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_offset_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_offset_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_sigma_rel: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawEstimator {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_force_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub magnitude_bound_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_separation_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_separation_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multistart_locations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_evaluations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_relative_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub apportionment: Option<Apportionment>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawCalibration {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_bias_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_bias_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stiffness_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawSeeds {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawBench {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth_q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_levels: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_q_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_repetitions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub force_number_h_max: Option<usize>,
}

/// Relative paths are taken from the directory holding the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawPaths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSettings {
    pub q_list: Vec<usize>,
    pub accuracy: AccuracySettings,
    pub noise_levels: Vec<f64>,
    pub timing_q_list: Vec<usize>,
    pub timing_repetitions: usize,
    pub force_number_h_max: usize,
}

/// Validated configuration in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Nominal rod; see [`RunConfig::model_props`] for the calibrated one.
    pub props: RodProperties,
    pub layout: SensorLayout,
    pub noise_sigma_rel: f64,
    pub estimator: EstimatorConfig,
    pub s_bias: f64,
    pub stiffness_scale: f64,
    pub noise_seed: u64,
    pub bench: BenchSettings,
    pub measurement: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

fn metres(key: &str, m: Option<f64>, mm: Option<f64>, default: f64) -> Result<f64> {
    match (m, mm) {
        (Some(_), Some(_)) => Err(Error::InvalidConfig(format!("both {key}_m and {key}_mm are set"))),
        (Some(v), None) => Ok(v),
        (None, Some(v)) => Ok(v / 1e3),
        (None, None) => Ok(default),
    }
}

impl RawConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)?;
        let raw: RawConfig =
            toml::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string().trim_end().to_string()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((raw, base))
    }

    pub fn resolve(&self, base: &Path) -> Result<RunConfig> {
        let table = RodProperties::nitinol_tube();
        let r = &self.rod;
        let modulus = match (r.youngs_modulus_pa, r.youngs_modulus_gpa) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig(
                    "both youngs_modulus_pa and youngs_modulus_gpa are set".into(),
                ))
            }
            (Some(v), None) => v,
            (None, Some(v)) => v * 1e9,
            (None, None) => table.youngs_modulus,
        };
        let props = RodProperties::new(
            metres("length", r.length_m, r.length_mm, table.length)?,
            metres("inner_diameter", r.inner_diameter_m, r.inner_diameter_mm, table.d_in)?,
            metres("outer_diameter", r.outer_diameter_m, r.outer_diameter_mm, table.d_out)?,
            modulus,
        )?;

        let s = &self.sensor;
        let dl = SensorLayout::default();
        let layout = SensorLayout {
            first_offset: metres("first_offset", s.first_offset_m, s.first_offset_mm, dl.first_offset)?,
            spacing: metres("spacing", s.spacing_m, s.spacing_mm, dl.spacing)?,
            count: s.count.unwrap_or(dl.count),
        };
        layout.validate(&props)?;
        let noise_sigma_rel = s.noise_sigma_rel.unwrap_or(0.0);
        if !noise_sigma_rel.is_finite() || noise_sigma_rel < 0.0 {
            return Err(Error::InvalidConfig(
                "sensor.noise_sigma_rel must be finite and >= 0".into(),
            ));
        }

        let e = &self.estimator;
        let de = EstimatorConfig::default();
        let estimator = EstimatorConfig {
            q: e.q.unwrap_or(de.q),
            loss_threshold: e.loss_threshold.unwrap_or(de.loss_threshold),
            max_force_count: e.max_force_count.unwrap_or(de.max_force_count),
            magnitude_bound: e.magnitude_bound_n.unwrap_or(de.magnitude_bound),
            min_separation: metres(
                "min_separation",
                e.min_separation_m,
                e.min_separation_mm,
                de.min_separation,
            )?,
            multistart_locations: e.multistart_locations.unwrap_or(de.multistart_locations),
            step_tolerance: e.step_tolerance.unwrap_or(de.step_tolerance),
            loss_tolerance: e.loss_tolerance.unwrap_or(de.loss_tolerance),
            max_evaluations: e.max_evaluations.unwrap_or(de.max_evaluations),
            fd_relative_step: e.fd_relative_step.unwrap_or(de.fd_relative_step),
            apportionment: e.apportionment.unwrap_or(de.apportionment),
        };
        estimator.validate()?;

        let c = &self.calibration;
        let s_bias = metres("s_bias", c.s_bias_m, c.s_bias_mm, DEFAULT_S_BIAS_M)?;
        let stiffness_scale = c.stiffness_scale.unwrap_or(1.0);
        if !s_bias.is_finite() || s_bias.abs() >= props.length {
            return Err(Error::InvalidConfig(
                "calibration.s_bias must be finite and shorter than the rod".into(),
            ));
        }
        if !(stiffness_scale.is_finite() && stiffness_scale > 0.0) {
            return Err(Error::InvalidConfig(
                "calibration.stiffness_scale must be positive".into(),
            ));
        }

        let b = &self.bench;
        let da = AccuracySettings::default();
        let bench = BenchSettings {
            q_list: b.q_list.clone().unwrap_or_else(|| vec![50, 100, 150, 200, 250]),
            accuracy: AccuracySettings {
                noise_sigma_rel: if noise_sigma_rel > 0.0 {
                    noise_sigma_rel
                } else {
                    da.noise_sigma_rel
                },
                draws: b.draws.unwrap_or(da.draws),
                seed: self.seeds.bench.unwrap_or(da.seed),
                truth_q: b.truth_q.unwrap_or(da.truth_q),
            },
            noise_levels: b.noise_levels.clone().unwrap_or_else(|| vec![0.01, 0.02, 0.05]),
            timing_q_list: b.timing_q_list.clone().unwrap_or_else(|| vec![50, 100, 150, 200]),
            timing_repetitions: b.timing_repetitions.unwrap_or(10),
            force_number_h_max: b.force_number_h_max.unwrap_or(4),
        };
        let increasing = |v: &[usize]| !v.is_empty() && v[0] >= 2 && v.windows(2).all(|w| w[1] > w[0]);
        if !increasing(&bench.q_list) || !increasing(&bench.timing_q_list) {
            return Err(Error::InvalidConfig(
                "bench q lists must be non-empty, >= 2 and increasing".into(),
            ));
        }
        if bench.accuracy.draws == 0 || bench.accuracy.truth_q < 2 || bench.force_number_h_max == 0 {
            return Err(Error::InvalidConfig(
                "bench.draws, bench.truth_q and bench.force_number_h_max must be positive".into(),
            ));
        }
        if bench.timing_repetitions < 10 {
            return Err(Error::InvalidConfig(
                "bench.timing_repetitions must be at least 10".into(),
            ));
        }
        if bench.noise_levels.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidConfig(
                "bench.noise_levels must be finite and >= 0".into(),
            ));
        }

        let rebase = |p: &Option<PathBuf>| p.as_ref().map(|p| base.join(p));
        Ok(RunConfig {
            props,
            layout,
            noise_sigma_rel,
            estimator,
            s_bias,
            stiffness_scale,
            noise_seed: self.seeds.noise.unwrap_or(0),
            bench,
            measurement: rebase(&self.paths.measurement),
            report: rebase(&self.paths.report),
            output_dir: rebase(&self.paths.output_dir),
        })
    }

    /// Replaces the calibration section, keeping every other key as written.
    pub fn with_calibration(&self, s_bias: f64, stiffness_scale: f64) -> Self {
        let mut out = self.clone();
        out.calibration = RawCalibration {
            s_bias_m: None,
            s_bias_mm: Some(s_bias * 1e3),
            stiffness_scale: Some(stiffness_scale),
        };
        out
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

pub const DEFAULT_S_BIAS_M: f64 = -3.12e-3;

impl RunConfig {
    /// Rod used by the estimator: nominal properties with the calibrated
    /// stiffness scale.
    pub fn model_props(&self) -> RodProperties {
        self.props.with_stiffness_scale(self.stiffness_scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        raw.resolve(Path::new("."))
    }

    #[test]
    fn defaults_are_the_tube_table() {
        let c = parse("").unwrap();
        assert_eq!(c.props.length, 0.290);
        assert_eq!(c.props.d_in, 1.118e-3);
        assert_eq!(c.props.d_out, 1.397e-3);
        assert_eq!(c.props.youngs_modulus, 67e9);
        assert_eq!(c.s_bias, -3.12e-3);
        assert_eq!(c.stiffness_scale, 1.0);
        assert_eq!(c.estimator, EstimatorConfig::default());
    }

    #[test]
    fn units_convert_at_the_boundary() {
        let c = parse("[rod]\nlength_mm = 300\nyoungs_modulus_pa = 6.0e10\n[calibration]\ns_bias_m = 0.001").unwrap();
        assert!((c.props.length - 0.3).abs() < 1e-15);
        assert_eq!(c.props.youngs_modulus, 6e10);
        assert_eq!(c.s_bias, 0.001);
    }

    #[test]
    fn both_units_for_one_quantity_is_an_error() {
        let err = parse("[rod]\nlength_mm = 250\nlength_m = 0.25").unwrap_err();
        assert!(err.to_string().contains("length_m"), "{err}");
    }

    #[test]
    fn unknown_and_invalid_keys_are_rejected() {
        assert!(parse("[rod]\nlength = 0.25").is_err());
        assert!(parse("[estimator]\nq = 1").is_err());
        assert!(parse("[sensor]\ncount = 30").is_err());
        assert!(parse("[calibration]\nstiffness_scale = -1").is_err());
        assert!(parse("[estimator]\napportionment = \"paper-literal\"").is_ok());
    }

    #[test]
    fn calibration_round_trips_through_toml() {
        let raw: RawConfig = toml::from_str("[rod]\nlength_mm = 290\n").unwrap();
        let text = raw.with_calibration(-0.002, 1.05).to_toml().unwrap();
        assert!(!text.contains("[sensor]"), "{text}");
        let back: RawConfig = toml::from_str(&text).unwrap();
        let c = back.resolve(Path::new(".")).unwrap();
        assert!((c.s_bias + 0.002).abs() < 1e-15);
        assert_eq!(c.stiffness_scale, 1.05);
        assert_eq!(back.rod.length_mm, Some(290.0));
    }

    #[test]
    fn shipped_example_config_matches_the_defaults() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
        let (raw, base) = RawConfig::load(&path).unwrap();
        assert_eq!(raw.resolve(&base).unwrap(), parse("").unwrap());
    }
}
