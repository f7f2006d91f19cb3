mod config;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rodforce::bench::{self, LossKind, Range, Scenario};
use rodforce::estimator::{
    calibrate_location_bias, calibrate_stiffness, estimate_forces_with, select_force_count_with, MeasuredCurvature,
};
use rodforce::force::{Apportionment, ForceVector, PointForce};
use rodforce::sensor::{read_measurement, simulate_fbg, write_measurement, NoiseModel};

use config::{RawConfig, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "rodforce",
    version,
    about = "Contact force estimation on a slender tube from FBG curvature"
)]
struct Cli {
    /// TOML run configuration (defaults to the Nitinol tube if omitted).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Split point forces onto nodes with swapped weights (the far node gets the larger share).
    #[arg(long, global = true)]
    paper_literal_weights: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic FBG measurement CSV for known point forces.
    Simulate {
        /// Model-frame point force; repeat for several, ordered by location.
        #[arg(long = "force", required = true, value_name = "S_MM,FX_N,FY_N", value_parser = parse_force)]
        forces: Vec<PointForce>,
        /// Relative noise level (overrides sensor.noise_sigma_rel).
        #[arg(long)]
        noise: Option<f64>,
        /// Noise seed (overrides seeds.noise).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Estimate contact forces from a measurement CSV and write a JSON report.
    Estimate {
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Fixed force count; otherwise chosen by the loss threshold.
        #[arg(long, value_name = "H")]
        forces: Option<usize>,
    },
    /// Fit location bias and/or stiffness scale to labeled single-force cases.
    Calibrate {
        /// CSV with header `measurement_path,true_s_m,true_f_N`.
        #[arg(long)]
        cases: PathBuf,
        /// Updated TOML configuration.
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Target::Both)]
        what: Target,
    },
    /// Loss over a grid of single candidate forces.
    Lossmap {
        /// Ground-truth force generating noiseless data.
        #[arg(long, value_name = "S_MM,FX_N,FY_N", value_parser = parse_force, default_value = "200,0.3,0")]
        truth: PointForce,
        /// Use a measurement CSV instead of a ground truth (curvature only).
        #[arg(long, conflicts_with = "truth")]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Kind::Curvature)]
        kind: Kind,
        #[arg(long, value_name = "LO,HI,N", value_parser = parse_range, default_value = "100,290,96")]
        s_range_mm: Range,
        #[arg(long, value_name = "LO,HI,N", value_parser = parse_range, default_value = "0,0.5,51")]
        f_range_n: Range,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run benchmark suites and write CSV reports.
    Bench {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(short, long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    Bias,
    Stiffness,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Curvature,
    Shape,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    Accuracy,
    Noise,
    Timing,
    ForceNumber,
    Lossmap,
}

fn parse_triple(text: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got `{text}`"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse::<f64>().map_err(|_| format!("`{p}` is not a number"))?;
        if !o.is_finite() {
            return Err(format!("`{p}` is not finite"));
        }
    }
    Ok(out)
}

fn parse_force(text: &str) -> std::result::Result<PointForce, String> {
    let [s_mm, fx, fy] = parse_triple(text)?;
    Ok(PointForce::new(s_mm / 1e3, fx, fy))
}

fn parse_range(text: &str) -> std::result::Result<Range, String> {
    let [lo, hi, n] = parse_triple(text)?;
    if n < 1.0 || n.fract() != 0.0 {
        return Err(format!("sample count `{n}` must be a positive integer"));
    }
    Ok(Range {
        lo,
        hi,
        count: n as usize,
    })
}

enum Failure {
    Usage(String),
    Data(String),
    ThresholdUnmet,
}

impl From<rodforce::Error> for Failure {
    fn from(e: rodforce::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::ThresholdUnmet) => {
            eprintln!("warning: loss threshold not met; report written");
            ExitCode::from(3)
        }
    }
}

fn load_config(cli: &Cli) -> std::result::Result<(RawConfig, RunConfig), Failure> {
    let (raw, base) = match &cli.config {
        Some(path) => RawConfig::load(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?,
        None => (RawConfig::default(), PathBuf::from(".")),
    };
    let mut cfg = raw.resolve(&base)?;
    if cli.paper_literal_weights {
        cfg.estimator.apportionment = Apportionment::PaperLiteral;
    }
    Ok((raw, cfg))
}

fn required(flag: Option<PathBuf>, from_config: &Option<PathBuf>, name: &str) -> std::result::Result<PathBuf, Failure> {
    flag.or_else(|| from_config.clone())
        .ok_or_else(|| Failure::Usage(format!("no {name} path given (flag or [paths] in the config)")))
}

fn read_input(path: &Path, cfg: &RunConfig) -> std::result::Result<MeasuredCurvature, Failure> {
    let meas = read_measurement(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    meas.check_within(cfg.props.length)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    Ok(meas)
}

fn run(cli: Cli) -> Outcome {
    let (raw, cfg) = load_config(&cli)?;
    match cli.command {
        Command::Simulate {
            forces,
            noise,
            seed,
            output,
        } => {
            let output = required(output, &cfg.measurement, "output")?;
            let fv = ForceVector::new(forces)?;
            fv.check_within(cfg.props.length)?;
            let noise = NoiseModel {
                sigma_rel: noise.unwrap_or(cfg.noise_sigma_rel),
                seed: seed.unwrap_or(cfg.noise_seed),
            };
            if !(noise.sigma_rel.is_finite() && noise.sigma_rel >= 0.0) {
                return Err(Failure::Usage("--noise must be finite and >= 0".into()));
            }
            let model = cfg.estimator.model(&cfg.model_props())?;
            let meas = simulate_fbg(&fv, &model, &cfg.layout, &noise)?;
            write_measurement(&output, &meas)?;
            println!("wrote {} gratings to {}", meas.len(), output.display());
            Ok(())
        }
        Command::Estimate { input, output, forces } => {
            let input = required(input, &cfg.measurement, "input")?;
            let output = required(output, &cfg.report, "output")?;
            if forces == Some(0) {
                return Err(Failure::Usage("--forces must be at least 1".into()));
            }
            let meas = read_input(&input, &cfg)?;
            let model = cfg.estimator.model(&cfg.model_props())?;
            let result = match forces {
                Some(h) => estimate_forces_with(&meas, h, &model, &cfg.estimator, &[])?,
                None => select_force_count_with(&meas, &model, &cfg.estimator)?,
            };
            let rep = report::EstimateReport::new(&result, &cfg);
            report::write_json(&output, &rep)?;
            for f in &rep.forces {
                println!(
                    "s = {:.2} mm, f = ({:.4}, {:.4}) N, |f| = {:.4} N",
                    f.s_est_m * 1e3,
                    f.f_x_n,
                    f.f_y_n,
                    f.magnitude_n
                );
            }
            println!("loss = {:.4e}, h = {}", rep.loss, rep.h);
            if result.threshold_met {
                Ok(())
            } else {
                Err(Failure::ThresholdUnmet)
            }
        }
        Command::Calibrate { cases, output, what } => {
            let labeled = report::read_cases(&cases, &cfg)?;
            let by_s: Vec<(MeasuredCurvature, f64)> = labeled.iter().map(|c| (c.measurement.clone(), c.s)).collect();
            let by_f: Vec<(MeasuredCurvature, f64)> = labeled.iter().map(|c| (c.measurement.clone(), c.f)).collect();
            let mut scale = cfg.stiffness_scale;
            if matches!(what, Target::Stiffness | Target::Both) {
                let st = calibrate_stiffness(&by_f, &cfg.props, &cfg.estimator)?;
                println!("stiffness scale = {:.6} (residual {:.3e} N^2)", st.scale, st.residual);
                scale = st.scale;
            }
            let mut s_bias = cfg.s_bias;
            if matches!(what, Target::Bias | Target::Both) {
                let b = calibrate_location_bias(&by_s, &cfg.props.with_stiffness_scale(scale), &cfg.estimator)?;
                println!(
                    "s_bias = {:.4} mm from {} cases ({} excluded)",
                    b.s_bias * 1e3,
                    b.used,
                    b.excluded.len()
                );
                s_bias = b.s_bias;
            }
            let text = raw.with_calibration(s_bias, scale).to_toml()?;
            fs::write(&output, text).map_err(|e| Failure::Data(format!("{}: {e}", output.display())))?;
            Ok(())
        }
        Command::Lossmap {
            truth,
            input,
            kind,
            s_range_mm,
            f_range_n,
            output,
        } => {
            let s_range = Range {
                lo: s_range_mm.lo / 1e3,
                hi: s_range_mm.hi / 1e3,
                count: s_range_mm.count,
            };
            let model = cfg.estimator.model(&cfg.model_props())?;
            let map = match (input, kind) {
                (Some(_), Kind::Shape) => {
                    return Err(Failure::Usage("a shape loss map needs --truth, not --input".into()));
                }
                (Some(path), Kind::Curvature) => {
                    let meas = read_input(&path, &cfg)?;
                    bench::curvature_loss_map(&meas, s_range, f_range_n, &model)?
                }
                (None, kind) => {
                    let fv = ForceVector::new(vec![truth])?;
                    fv.check_within(cfg.props.length)?;
                    let kind = match kind {
                        Kind::Curvature => LossKind::Curvature,
                        Kind::Shape => LossKind::Shape,
                    };
                    bench::loss_map(&fv, s_range, f_range_n, kind, &model, &cfg.layout)?
                }
            };
            map.write_csv(&output)?;
            let (i, j) = map.argmin();
            println!(
                "argmin s = {:.2} mm, f = {:.4} N, loss = {:.4e}; 10x sublevel size {}",
                map.s[i] * 1e3,
                map.f[j],
                map.loss[i][j],
                map.sublevel_size(10.0)
            );
            Ok(())
        }
        Command::Bench { suite, output_dir } => {
            let dir = required(output_dir, &cfg.output_dir, "output directory")?;
            fs::create_dir_all(&dir).map_err(|e| Failure::Data(format!("{}: {e}", dir.display())))?;
            run_bench(suite, &dir, &cfg)
        }
    }
}

fn run_bench(suite: Suite, dir: &Path, cfg: &RunConfig) -> Outcome {
    let props = cfg.model_props();
    let scenarios = Scenario::defaults();
    let wants = |s: Suite| suite == Suite::All || suite == s;

    if wants(Suite::Accuracy) {
        let cells = bench::accuracy_vs_q(
            &scenarios,
            &cfg.bench.q_list,
            &props,
            &cfg.layout,
            &cfg.estimator,
            &cfg.bench.accuracy,
        )?;
        let mut rows: Vec<_> = cells.iter().map(|c| c.report.clone()).collect();
        rows.extend(bench::reference_rows());
        bench::write_reports(dir.join("accuracy.csv"), &rows)?;
        for c in &cells {
            println!(
                "accuracy {} q={}: mag rmse {:.4} N, loc rmse {:.2} mm, failures {}",
                c.report.scenario,
                c.report.q,
                c.report.mag_rmse_n,
                c.report.loc_rmse_m * 1e3,
                c.report.failures
            );
        }
    }
    if wants(Suite::Noise) {
        let q = cfg.estimator.q;
        let mut rows = Vec::new();
        for &sigma in &cfg.bench.noise_levels {
            let settings = bench::AccuracySettings {
                noise_sigma_rel: sigma,
                ..cfg.bench.accuracy.clone()
            };
            for cell in bench::accuracy_vs_q(&scenarios, &[q], &props, &cfg.layout, &cfg.estimator, &settings)? {
                println!(
                    "noise {sigma}: {} magnitude error {:.2}%, location error {:.2}% of L",
                    cell.report.scenario, cell.mag_error_pct, cell.loc_error_pct
                );
                rows.push((sigma, cell));
            }
        }
        bench::write_noise_sweep(dir.join("noise_sweep.csv"), &rows)?;
    }
    if wants(Suite::Timing) {
        let rows = bench::timing_compare(
            &cfg.bench.timing_q_list,
            &[1],
            cfg.bench.timing_repetitions,
            &props,
            &cfg.layout,
            &cfg.estimator,
        )?;
        for r in &rows {
            println!(
                "timing q={}: simplified {:.4} s, bvp_lm {:.4} s, speedup {:.1}x",
                r.q, r.simplified.mean_s, r.bvp_lm.mean_s, r.speedup
            );
        }
        bench::write_timing(dir, &rows)?;
    }
    if wants(Suite::ForceNumber) {
        let noise = NoiseModel {
            sigma_rel: cfg.noise_sigma_rel,
            seed: cfg.noise_seed,
        };
        let mut rows = Vec::new();
        for sc in &scenarios {
            let curve = bench::force_number_curve(
                sc,
                cfg.bench.force_number_h_max,
                &props,
                &cfg.layout,
                &cfg.estimator,
                &noise,
            )?;
            rows.push((sc.id.clone(), curve));
        }
        bench::write_force_number(dir.join("force_number.csv"), &rows)?;
    }
    if wants(Suite::Lossmap) {
        let model = cfg.estimator.model(&props)?;
        let (s, f) = bench::default_map_ranges();
        let truth = ForceVector::single(0.2, 0.3, 0.0);
        for (kind, name) in [(LossKind::Curvature, "curvature"), (LossKind::Shape, "shape")] {
            let map = bench::loss_map(&truth, s, f, kind, &model, &cfg.layout)?;
            map.write_csv(dir.join(format!("lossmap_{name}.csv")))?;
            println!(
                "lossmap {name}: argmin {:?}, 10x sublevel size {}",
                map.argmin(),
                map.sublevel_size(10.0)
            );
        }
    }
    Ok(())
}
