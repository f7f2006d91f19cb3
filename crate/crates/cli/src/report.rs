use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rodforce::estimator::{EstimationResult, MeasuredCurvature};
use rodforce::force::Apportionment;
use rodforce::sensor::read_measurement;
use rodforce::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportForce {
    /// Location in the model frame (m).
    pub s_model_m: f64,
    /// Model location plus the calibrated bias (m).
    pub s_est_m: f64,
    #[serde(rename = "f_x_N")]
    pub f_x_n: f64,
    #[serde(rename = "f_y_N")]
    pub f_y_n: f64,
    #[serde(rename = "magnitude_N")]
    pub magnitude_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportModel {
    pub q: usize,
    pub s_bias_m: f64,
    pub stiffness_scale: f64,
    pub apportionment: Apportionment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_s: f64,
}

/// JSON written by `estimate`. Everything except `timing` is a function of
/// the input file and configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub forces: Vec<ReportForce>,
    pub loss: f64,
    pub h: usize,
    pub threshold: f64,
    pub threshold_met: bool,
    pub no_contact: bool,
    pub evaluations: usize,
    pub model: ReportModel,
    pub timing: Timing,
}

impl EstimateReport {
    pub fn new(res: &EstimationResult, cfg: &RunConfig) -> Self {
        Self {
            forces: res
                .forces
                .iter()
                .map(|f| ReportForce {
                    s_model_m: f.s,
                    s_est_m: f.s + cfg.s_bias,
                    f_x_n: f.f_x,
                    f_y_n: f.f_y,
                    magnitude_n: f.magnitude(),
                })
                .collect(),
            loss: res.loss,
            h: res.h_selected,
            threshold: cfg.estimator.loss_threshold,
            threshold_met: res.threshold_met,
            no_contact: res.no_contact,
            evaluations: res.evaluations,
            model: ReportModel {
                q: cfg.estimator.q,
                s_bias_m: cfg.s_bias,
                stiffness_scale: cfg.stiffness_scale,
                apportionment: cfg.estimator.apportionment,
            },
            timing: Timing { elapsed_s: res.elapsed },
        }
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub const CASES_HEADER: [&str; 3] = ["measurement_path", "true_s_m", "true_f_N"];

#[derive(Debug, Deserialize)]
struct CaseRow {
    measurement_path: String,
    true_s_m: f64,
    #[serde(rename = "true_f_N")]
    true_f_n: f64,
}

pub struct Case {
    pub measurement: MeasuredCurvature,
    pub s: f64,
    pub f: f64,
}

/// Labeled single-force cases. Measurement paths are relative to the cases
/// file.
pub fn read_cases(path: &Path, cfg: &RunConfig) -> Result<Vec<Case>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header = reader.headers()?.clone();
    if header.iter().ne(CASES_HEADER) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{}`", CASES_HEADER.join(",")),
        });
    }
    let mut cases = Vec::new();
    for (i, row) in reader.deserialize::<CaseRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        if !(row.true_s_m.is_finite() && row.true_f_n.is_finite()) {
            return Err(Error::Parse {
                line,
                msg: "non-finite label".into(),
            });
        }
        let mpath = base.join(&row.measurement_path);
        let measurement =
            read_measurement(&mpath).map_err(|e| Error::InvalidMeasurement(format!("{}: {e}", mpath.display())))?;
        measurement.check_within(cfg.props.length)?;
        cases.push(Case {
            measurement,
            s: row.true_s_m,
            f: row.true_f_n,
        });
    }
    if cases.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "no calibration cases".into(),
        });
    }
    Ok(cases)
}
