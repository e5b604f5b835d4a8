//! Command-line orchestration: reproducible experiments over the four model
//! spaces with machine-readable JSON/CSV outputs.
//!
//! Exit codes: 0 success, 1 assertion-style failure (a check that was
//! expected to hold did not), 2 invalid configuration.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ergowalk_core::horo::{self, BoundaryDirection, Horofunction};
use ergowalk_core::linalg::Mat;
use ergowalk_core::lln::{
    aggregate_drift, check_lln, find_good_times, halfplane_boundary_estimates,
    limit_horofunction, ray_approx_check, tail_mean, GoodTimeScanMode, RayApproxVerdict,
};
use ergowalk_core::matrixcocycle::{
    aggregate_spectra, oseledec_direction, posn_drift_identity, spectrum_for_seed,
};
use ergowalk_core::report::{self, csv_float};
use ergowalk_core::rng::stream_rng;
use ergowalk_core::shadows::{find_intersection_witness, suggest_start_time, WitnessSearch};
use ergowalk_core::spaces::{self, sampling, IsometryElement, PointedSpace, SpaceKind, SpacePoint};
use ergowalk_core::walks::{sample_walk_stream, CocycleDriver, IncrementLaw};
use ergowalk_core::Error as CoreError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ASSERTION: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "ergowalk",
    about = "Random walks and ergodic cocycles on metric spaces: drift, horofunctions, shadows, Lyapunov spectra",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Space: z:N, f:N, h2, pos:N
    #[arg(long)]
    pub space: Option<String>,
    /// Driver: srw | biased:P | det:e1 | diag:A,B | conjdiag:THETA | rotations |
    /// rotdiag:R | markov:@FILE | matrix:@FILE
    #[arg(long)]
    pub driver: Option<String>,
    /// Trajectory length T
    #[arg(long, short = 'T')]
    pub steps: Option<usize>,
    /// Base seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of seeds (seed, seed+1, ...)
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Output directory (env ERGOWALK_OUT, default ./ergowalk-out)
    #[arg(long)]
    pub out: Option<String>,
    /// Worker pool size for per-seed fan-out (default: machine parallelism)
    #[arg(long)]
    pub workers: Option<usize>,
    /// JSON config file supplying defaults for any of the above
    #[arg(long)]
    pub config: Option<String>,
    /// Expected value for an assertion-style check
    #[arg(long)]
    pub expect: Option<f64>,
    /// Tolerance for --expect
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a trajectory and write the radial series (k, a_k)
    Walk(CommonArgs),
    /// Estimate the drift A over seeds
    Drift(CommonArgs),
    /// Construct the limit horofunction and check -h(Z_n x0)/n -> A
    Lln(CommonArgs),
    /// Scan good times of the subadditive lemma
    Goodtimes {
        #[command(flatten)]
        common: CommonArgs,
        /// Margin parameter eps
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Cutoff K
        #[arg(long, default_value_t = 50)]
        k_cutoff: usize,
    },
    /// Suggest start parameters and search the shadow intersection witness
    Shadows {
        #[command(flatten)]
        common: CommonArgs,
        /// Shadow widths to test
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.2])]
        eps: Vec<f64>,
        /// Band width M - N
        #[arg(long, default_value_t = 100)]
        band: usize,
        /// Horizon as a multiple of M
        #[arg(long, default_value_t = 10)]
        horizon_factor: usize,
    },
    /// Ray-approximation check on the sqrt-perturbed lattice family
    Rayapprox {
        #[command(flatten)]
        common: CommonArgs,
        /// Premise bound delta_max
        #[arg(long, default_value_t = 0.1)]
        premise_bound: f64,
    },
    /// Lyapunov spectrum of a matrix cocycle
    Lyapunov(CommonArgs),
    /// Oseledec direction Lambda = exp X and residual decay
    Oseledec(CommonArgs),
    /// Semiparallelogram checks per space (exit 1 on unexpected behavior)
    CatzeroCheck {
        #[command(flatten)]
        common: CommonArgs,
        /// Sampled midpoint quadruples
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Small multi-space tour
    Demo,
}

/// File-form of the common experiment knobs; round-trips losslessly.
#[derive(Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub driver: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_path(path: &str) -> Result<Self, String> {
        let body = std::fs::read_to_string(path)
            .map_err(|e| format!("config file '{path}': {e}"))?;
        serde_json::from_str(&body).map_err(|e| format!("config file '{path}': {e}"))
    }

    pub fn merge_into(&self, args: &mut CommonArgs) {
        macro_rules! fill {
            ($field:ident) => {
                if args.$field.is_none() {
                    args.$field = self.$field.clone();
                }
            };
        }
        fill!(space);
        fill!(driver);
        fill!(steps);
        fill!(seed);
        fill!(seeds);
        fill!(out);
        fill!(workers);
        fill!(expect);
        fill!(tolerance);
    }
}

/// Resolved run parameters after flag/config/default merging.
struct Resolved {
    space: PointedSpace,
    space_name: String,
    driver: CocycleDriver,
    driver_name: String,
    steps: usize,
    seed: u64,
    seeds: usize,
    out: PathBuf,
    workers: usize,
    expect: Option<f64>,
    tolerance: f64,
}

fn fail_config(msg: &str) -> u8 {
    eprintln!("error: {msg}");
    EXIT_CONFIG
}

pub fn parse_space(text: &str) -> Result<PointedSpace, String> {
    let t = text.trim().to_lowercase();
    let kind = if t == "h2" {
        SpaceKind::HyperbolicPlane
    } else if let Some(rest) = t.strip_prefix("pos") {
        let n: usize = rest
            .trim_start_matches(':')
            .parse()
            .map_err(|_| format!("space '{text}': expected pos:N"))?;
        SpaceKind::PosMatrices { size: n }
    } else if let Some(rest) = t.strip_prefix('z') {
        let n: usize = rest
            .trim_start_matches(':')
            .parse()
            .map_err(|_| format!("space '{text}': expected z:N"))?;
        SpaceKind::ZdWord { dim: n }
    } else if let Some(rest) = t.strip_prefix('f') {
        let n: usize = rest
            .trim_start_matches(':')
            .parse()
            .map_err(|_| format!("space '{text}': expected f:N"))?;
        SpaceKind::FreeGroup { rank: n }
    } else {
        return Err(format!("space '{text}': expected one of z:N, f:N, h2, pos:N"));
    };
    PointedSpace::new(kind).map_err(|e| format!("space '{text}': {e}"))
}

pub fn parse_driver(text: &str, space: &PointedSpace) -> Result<CocycleDriver, String> {
    let t = text.trim();
    let driver = if t == "srw" {
        CocycleDriver::iid(
            IncrementLaw::uniform_generators(space).map_err(|e| format!("driver 'srw': {e}"))?,
        )
    } else if let Some(p) = t.strip_prefix("biased:") {
        let p: f64 = p.parse().map_err(|_| format!("driver '{t}': expected biased:P"))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(format!("driver '{t}': P must be in [0, 1]"));
        }
        if !matches!(space.kind(), SpaceKind::ZdWord { dim: 1 }) {
            return Err(format!("driver '{t}' needs space z:1"));
        }
        CocycleDriver::iid(IncrementLaw::Finite {
            support: vec![
                IsometryElement::Translation(vec![1]),
                IsometryElement::Translation(vec![-1]),
            ],
            probabilities: vec![p, 1.0 - p],
        })
    } else if t == "det:e1" {
        match space.kind() {
            SpaceKind::ZdWord { dim } => {
                let mut v = vec![0i64; *dim];
                v[0] = 1;
                CocycleDriver::iid(IncrementLaw::Finite {
                    support: vec![IsometryElement::Translation(v)],
                    probabilities: vec![1.0],
                })
            }
            _ => return Err(format!("driver '{t}' needs a lattice space")),
        }
    } else if let Some(rest) = t.strip_prefix("diag:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(format!("driver '{t}': expected diag:A,B"));
        }
        let a: f64 = parts[0].parse().map_err(|_| format!("driver '{t}': bad diagonal"))?;
        let b: f64 = parts[1].parse().map_err(|_| format!("driver '{t}': bad diagonal"))?;
        CocycleDriver::iid(IncrementLaw::Finite {
            support: vec![IsometryElement::Linear(Mat::diag(&[a, b]))],
            probabilities: vec![1.0],
        })
    } else if let Some(theta) = t.strip_prefix("conjdiag:") {
        let th: f64 = theta.parse().map_err(|_| format!("driver '{t}': bad angle"))?;
        let r = Mat::from_rows(&[vec![th.cos(), -th.sin()], vec![th.sin(), th.cos()]]);
        let conj = |d: Mat| IsometryElement::Linear(r.mul(&d).mul(&r.transpose()));
        CocycleDriver::iid(IncrementLaw::Finite {
            support: vec![conj(Mat::diag(&[2.0, 0.5])), conj(Mat::diag(&[3.0, 1.0 / 3.0]))],
            probabilities: vec![0.5, 0.5],
        })
    } else if t == "rotations" {
        CocycleDriver::iid(IncrementLaw::UniformRotation2)
    } else if let Some(r) = t.strip_prefix("rotdiag:") {
        let log_ratio: f64 = r.parse().map_err(|_| format!("driver '{t}': bad log ratio"))?;
        CocycleDriver::iid(IncrementLaw::RotationTimesDiag2 { log_ratio })
    } else if let Some(path) = t.strip_prefix("markov:@") {
        let body =
            std::fs::read_to_string(path).map_err(|e| format!("driver file '{path}': {e}"))?;
        let v: Value =
            serde_json::from_str(&body).map_err(|e| format!("driver file '{path}': {e}"))?;
        report::driver_from_json(&v).map_err(|e| format!("driver file '{path}': {e}"))?
    } else if let Some(path) = t.strip_prefix("matrix:@") {
        let body =
            std::fs::read_to_string(path).map_err(|e| format!("driver file '{path}': {e}"))?;
        let v: Value =
            serde_json::from_str(&body).map_err(|e| format!("driver file '{path}': {e}"))?;
        CocycleDriver::iid(report::law_from_json(&v).map_err(|e| format!("driver file '{path}': {e}"))?)
    } else {
        return Err(format!(
            "driver '{t}': expected srw | biased:P | det:e1 | diag:A,B | conjdiag:THETA | \
             rotations | rotdiag:R | markov:@FILE | matrix:@FILE"
        ));
    };
    driver.validate(space).map_err(|e| format!("driver '{t}': {e}"))?;
    Ok(driver)
}

fn resolve(mut args: CommonArgs, default_steps: usize) -> Result<Resolved, String> {
    if let Some(path) = &args.config {
        let cfg = ExperimentConfig::from_path(path)?;
        cfg.merge_into(&mut args);
    }
    let space_name = args.space.clone().unwrap_or_else(|| "z:1".to_string());
    let space = parse_space(&space_name)?;
    let driver_name = args.driver.clone().unwrap_or_else(|| "srw".to_string());
    let driver = parse_driver(&driver_name, &space)?;
    let out = args
        .out
        .clone()
        .or_else(|| std::env::var("ERGOWALK_OUT").ok())
        .unwrap_or_else(|| "ergowalk-out".to_string());
    Ok(Resolved {
        space,
        space_name,
        driver,
        driver_name,
        steps: args.steps.unwrap_or(default_steps),
        seed: args.seed.unwrap_or(0),
        seeds: args.seeds.unwrap_or(1).max(1),
        out: PathBuf::from(out),
        workers: args.workers.unwrap_or(0),
        expect: args.expect,
        tolerance: args.tolerance.unwrap_or(0.05),
    })
}

fn timestamped(mut v: Value) -> Value {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    if let Some(map) = v.as_object_mut() {
        map.insert("generated_at_unix".to_string(), json!(secs));
    }
    v
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
}

pub fn run_from_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            // clap prints its own help/version through this path
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: Cli) -> u8 {
    match cli.command {
        Command::Walk(args) => cmd_walk(args),
        Command::Drift(args) => cmd_drift(args),
        Command::Lln(args) => cmd_lln(args),
        Command::Goodtimes { common, eps, k_cutoff } => cmd_goodtimes(common, eps, k_cutoff),
        Command::Shadows { common, eps, band, horizon_factor } => {
            cmd_shadows(common, eps, band, horizon_factor)
        }
        Command::Rayapprox { common, premise_bound } => cmd_rayapprox(common, premise_bound),
        Command::Lyapunov(args) => cmd_lyapunov(args),
        Command::Oseledec(args) => cmd_oseledec(args),
        Command::CatzeroCheck { common, samples } => cmd_catzero(common, samples),
        Command::Demo => cmd_demo(),
    }
}

fn write_outputs(out: &Path, name: &str, json_value: &Value) -> Result<(), String> {
    report::write_json(&out.join(format!("{name}.json")), json_value)
        .map_err(|e| format!("writing {name}.json: {e}"))
}

fn cmd_walk(args: CommonArgs) -> u8 {
    let r = match resolve(args, 10_000) {
        Ok(r) => r,
        Err(m) => return fail_config(&m),
    };
    let traj = match sample_walk_stream(&r.space, &r.driver, r.steps, r.seed, 0) {
        Ok(t) => t,
        Err(e) => return fail_config(&format!("sampling: {e}")),
    };
    let rows = (1..=traj.len()).map(|k| {
        vec![k.to_string(), csv_float(traj.radial(k).unwrap())]
    });
    if let Err(e) = report::write_csv(&r.out.join("walk.csv"), &["k", "a_k"], rows) {
        return fail_config(&format!("writing walk.csv: {e}"));
    }
    let header = timestamped(report::trajectory_header(&traj));
    if let Err(m) = write_outputs(&r.out, "walk", &header) {
        return fail_config(&m);
    }
    println!(
        "walk: {} on {} for T = {}, a(T)/T = {:.5} -> {}",
        r.driver_name,
        r.space_name,
        r.steps,
        traj.radial(traj.len()).unwrap() / traj.len() as f64,
        r.out.display()
    );
    EXIT_OK
}

fn cmd_drift(args: CommonArgs) -> u8 {
    let r = match resolve(args, 100_000) {
        Ok(r) => r,
        Err(m) => return fail_config(&m),
    };
    let seeds: Vec<u64> = (0..r.seeds as u64).map(|s| r.seed + s).collect();
    let per_seed: Result<Vec<(u64, f64)>, CoreError> = pool(r.workers).install(|| {
        seeds
            .par_iter()
            .map(|&s| {
                let traj = sample_walk_stream(&r.space, &r.driver, r.steps, s, 0)?;
                Ok((s, tail_mean(&traj, 0.5)?))
            })
            .collect()
    });
    let mut per_seed = match per_seed {
        Ok(v) => v,
        Err(e) => return fail_config(&format!("sampling: {e}")),
    };
    per_seed.sort_by_key(|(s, _)| *s);
    let est = aggregate_drift(per_seed.iter().map(|(_, v)| *v).collect(), r.steps, 0.5);
    let rows = per_seed
        .iter()
        .map(|(s, v)| vec![s.to_string(), csv_float(*v)]);
    if let Err(e) = report::write_csv(&r.out.join("drift_per_seed.csv"), &["seed", "tail_mean"], rows)
    {
        return fail_config(&format!("writing drift_per_seed.csv: {e}"));
    }
    let value = timestamped(report::drift_report(&est, &r.space_name, &r.driver_name));
    if let Err(m) = write_outputs(&r.out, "drift", &value) {
        return fail_config(&m);
    }
    println!(
        "drift: A_hat = {:.6} +- {:.2e} over {} seeds at T = {} -> {}",
        est.a_hat,
        est.ci_half_width,
        r.seeds,
        r.steps,
        r.out.display()
    );
    if let Some(expect) = r.expect {
        if (est.a_hat - expect).abs() > r.tolerance {
            eprintln!(
                "assertion failed: |{} - {expect}| > {}",
                est.a_hat, r.tolerance
            );
            return EXIT_ASSERTION;
        }
    }
    EXIT_OK
}

fn cmd_lln(args: CommonArgs) -> u8 {
    let r = match resolve(args, 100_000) {
        Ok(r) => r,
        Err(m) => return fail_config(&m),
    };
    let traj = match sample_walk_stream(&r.space, &r.driver, r.steps, r.seed, 0) {
        Ok(t) => t,
        Err(e) => return fail_config(&format!("sampling: {e}")),
    };
    let a_hat = match tail_mean(&traj, 0.5) {
        Ok(v) => v,
        Err(e) => return fail_config(&format!("drift: {e}")),
    };
    let dir = match limit_horofunction(&traj, a_hat) {
        Ok(d) => d,
        Err(CoreError::NotBallistic { a_hat, threshold }) => {
            eprintln!("not ballistic: a_hat = {a_hat:.3e} <= {threshold:.0e}; refusing to construct a direction");
            return EXIT_ASSERTION;
        }
        Err(e) => return fail_config(&format!("direction: {e}")),
    };
    let a_used = r.expect.unwrap_or(a_hat);
    let report_data = match check_lln(&traj, &dir.horofunction, a_used) {
        Ok(x) => x,
        Err(e) => return fail_config(&format!("lln check: {e}")),
    };
    let rows = report_data
        .series
        .iter()
        .map(|(n, v)| vec![n.to_string(), csv_float(*v)]);
    if let Err(e) = report::write_csv(&r.out.join("lln.csv"), &["n", "minus_h_over_n"], rows) {
        return fail_config(&format!("writing lln.csv: {e}"));
    }
    if matches!(r.space.kind(), SpaceKind::HyperbolicPlane) {
        if let Ok(estimates) = halfplane_boundary_estimates(&traj) {
            let rows = estimates.iter().map(|(n, xi)| vec![n.to_string(), csv_float(*xi)]);
            let _ = report::write_csv(&r.out.join("lln_boundary.csv"), &["n", "xi"], rows);
        }
    }
    let mut value = report::lln_report(&report_data, report::trajectory_header(&traj));
    if let Some(map) = value.as_object_mut() {
        map.insert("a_hat".to_string(), json!(a_hat));
        map.insert("construction_notes".to_string(), json!(dir.notes));
        map.insert(
            "horofunction_descriptor".to_string(),
            report::horofunction_descriptor(&dir.horofunction),
        );
    }
    let value = timestamped(value);
    if let Err(m) = write_outputs(&r.out, "lln", &value) {
        return fail_config(&m);
    }
    println!(
        "lln: terminal -h(Z_T)/T = {:.5}, deviation {:.5} from A = {:.5} -> {}",
        report_data.series.last().map(|(_, v)| *v).unwrap_or(f64::NAN),
        report_data.terminal_deviation,
        a_used,
        r.out.display()
    );
    if r.expect.is_some() && report_data.terminal_deviation > r.tolerance {
        eprintln!(
            "assertion failed: deviation {} > {}",
            report_data.terminal_deviation, r.tolerance
        );
        return EXIT_ASSERTION;
    }
    EXIT_OK
}

fn cmd_goodtimes(args: CommonArgs, eps: f64, k_cutoff: usize) -> u8 {
    let r = match resolve(args, 10_000) {
        Ok(r) => r,
        Err(m) => return fail_config(&m),
    };
    let traj = match sample_walk_stream(&r.space, &r.driver, r.steps, r.seed, 0) {
        Ok(t) => t,
        Err(e) => return fail_config(&format!("sampling: {e}")),
    };
    let a_hat = r.expect.unwrap_or_else(|| tail_mean(&traj, 0.5).unwrap_or(0.0));
    let mode = if r.steps > 100_000 {
        GoodTimeScanMode::SubsampledGeometric { ratio: 1.1 }
    } else {
        GoodTimeScanMode::Exact
    };
    let rep = match find_good_times(&traj, eps, a_hat, k_cutoff, mode) {
        Ok(x) => x,
        Err(e) => return fail_config(&format!("good times: {e}")),
    };
    let rows = rep
        .good_times
        .iter()
        .zip(&rep.min_margins)
        .map(|(n, m)| vec![n.to_string(), csv_float(*m)]);
    if let Err(e) = report::write_csv(&r.out.join("goodtimes.csv"), &["n", "min_margin"], rows) {
        return fail_config(&format!("writing goodtimes.csv: {e}"));
    }
    let value = timestamped(report::goodtime_report(&rep, report::trajectory_header(&traj)));
    if let Err(m) = write_outputs(&r.out, "goodtimes", &value) {
        return fail_config(&m);
    }
    println!(
        "goodtimes: {} good times in [{}, {}], density {:.4} (eps {}, A {:.4}) -> {}",
        rep.good_times.len(),
        k_cutoff,
        r.steps,
        rep.density,
        eps,
        a_hat,
        r.out.display()
    );
    EXIT_OK
}

fn cmd_shadows(args: CommonArgs, eps_list: Vec<f64>, band: usize, horizon_factor: usize) -> u8 {
    let r = match resolve(args, 100_000) {
        Ok(r) => r,
        Err(m) => return fail_config(&m),
    };
    let traj = match sample_walk_stream(&r.space, &r.driver, r.steps, r.seed, 0) {
        Ok(t) => t,
        Err(e) => return fail_config(&format!("sampling: {e}")),
    };
    let a_hat = match tail_mean(&traj, 0.5) {
        Ok(v) => v,
        Err(e) => return fail_config(&format!("drift: {e}")),
    };
    let mut all_found = true;
    for eps in eps_list {
        let suggestion = match suggest_start_time(&traj, eps, a_hat) {
            Ok(s) => s,
            Err(CoreError::NotBallistic { a_hat, threshold }) => {
                eprintln!(
                    "not ballistic: a_hat = {a_hat:.3e} <= {threshold:.0e}; refusing the shadow construction"
                );
                return EXIT_ASSERTION;
            }
            Err(e) => return fail_config(&format!("start time: {e}")),
        };
        let m = suggestion.start_n + band;
        let horizon = (horizon_factor * m).min(traj.len());
        if m >= horizon {
            return fail_config(&format!(
                "band [N={}, M={m}] leaves no search room at T = {}",
                suggestion.start_n,
                traj.len()
            ));
        }
        let search =
            match find_intersection_witness(&traj, eps, suggestion.start_n, m, horizon) {
                Ok(s) => s,
                Err(e) => return fail_config(&format!("witness search: {e}")),
            };
        let tag = format!("shadows_eps{}", csv_float(eps).replace('.', "_"));
        if let WitnessSearch::NotFound { near_misses, .. } = &search {
            let rows = near_misses
                .iter()
                .map(|(n, m)| vec![n.to_string(), csv_float(*m)]);
            let _ = report::write_csv(
                &r.out.join(format!("{tag}_nearmiss.csv")),
                &["n", "min_margin"],
                rows,
            );
        }
        let note = format!(
            "horizon = {horizon_factor} * M (heuristic; the theorem gives no rate), delta = {}",
            suggestion.delta
        );
        let value = timestamped(report::witness_report(
            &search,
            report::trajectory_header(&traj),
            &note,
        ));
        if let Err(m) = write_outputs(&r.out, &tag, &value) {
            return fail_config(&m);
        }
        match search {
            WitnessSearch::Found(w) => println!(
                "shadows eps {eps}: witness n = {} for band [{}, {}] (delta {:.4}, K {})",
                w.witness, w.start_n, w.end_m, suggestion.delta, suggestion.k_cutoff
            ),
            WitnessSearch::NotFound { best_n, best_min_margin, .. } => {
                println!(
                    "shadows eps {eps}: no witness within horizon {horizon}; best n {best_n} margin {best_min_margin:.4}"
                );
                all_found = false;
            }
        }
    }
    if all_found {
        EXIT_OK
    } else {
        EXIT_ASSERTION
    }
}

fn cmd_rayapprox(args: CommonArgs, premise_bound: f64) -> u8 {
    let r = match resolve(args, 10_000) {
        Ok(r) => r,
        Err(m) => return fail_config(&m),
    };
    let space = match PointedSpace::new(SpaceKind::ZdWord { dim: 2 }) {
        Ok(s) => s,
        Err(e) => return fail_config(&format!("space: {e}")),
    };
    let points: Vec<SpacePoint> = (1..=r.steps)
        .map(|n| SpacePoint::Lattice(vec![n as i64, (n as f64).sqrt().floor() as i64]))
        .collect();
    let ray = BoundaryDirection::lattice(vec![1, 0]).unwrap();
    let rep = match ray_approx_check(&space, &points, &ray, 1.0, premise_bound, 1e-9) {
        Ok(x) => x,
        Err(e) => return fail_config(&format!("ray approximation: {e}")),
    };
    let rows = rep
        .premise
        .iter()
        .zip(&rep.conclusion)
        .map(|((n, p), (_, c))| vec![n.to_string(), csv_float(*p), csv_float(*c)]);
    if let Err(e) = report::write_csv(
        &r.out.join("rayapprox.csv"),
        &["n", "premise", "conclusion"],
        rows,
    ) {
        return fail_config(&format!("writing rayapprox.csv: {e}"));
    }
    let value = timestamped(report::ray_approx_report(&rep));
    if let Err(m) = write_outputs(&r.out, "rayapprox", &value) {
        return fail_config(&m);
    }
    println!(
        "rayapprox: verdict {:?}, premise tail bound {:.4} -> {}",
        rep.verdict,
        rep.delta,
        r.out.display()
    );
    if rep.verdict == RayApproxVerdict::ConclusionFails {
        return EXIT_ASSERTION;
    }
    EXIT_OK
}

fn cmd_lyapunov(args: CommonArgs) -> u8 {
    let mut args = args;
    if args.space.is_none() {
        args.space = Some("pos:2".to_string());
    }
    if args.driver.is_none() {
        args.driver = Some("rotdiag:0.3".to_string());
    }
    let r = match resolve(args, 100_000) {
        Ok(r) => r,
        Err(m) => return fail_config(&m),
    };
    let dim = match r.space.kind() {
        SpaceKind::PosMatrices { size } => *size,
        _ => return fail_config("lyapunov needs a pos:N space"),
    };
    let seeds: Vec<u64> = (0..r.seeds as u64).map(|s| r.seed + s).collect();
    let per_seed: Result<Vec<(u64, Vec<f64>, Vec<String>)>, CoreError> =
        pool(r.workers).install(|| {
            seeds
                .par_iter()
                .map(|&s| {
                    let (exps, warns) = spectrum_for_seed(&r.driver, dim, r.steps, s)?;
                    Ok((s, exps, warns))
                })
                .collect()
        });
    let mut per_seed = match per_seed {
        Ok(v) => v,
        Err(e) => return fail_config(&format!("spectrum: {e}")),
    };
    per_seed.sort_by_key(|(s, _, _)| *s);
    let mut warnings: Vec<String> = per_seed.iter().flat_map(|(_, _, w)| w.clone()).collect();
    warnings.truncate(8);
    let spec = aggregate_spectra(
        per_seed.iter().map(|(_, e, _)| e.clone()).collect(),
        r.steps,
        warnings,
    );
    let rows = per_seed.iter().map(|(s, e, _)| {
        let mut row = vec![s.to_string()];
        row.extend(e.iter().map(|x| csv_float(*x)));
        row
    });
    let mut header = vec!["seed".to_string()];
    header.extend((1..=dim).map(|i| format!("lambda_{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    if let Err(e) = report::write_csv(&r.out.join("lyapunov_per_seed.csv"), &header_refs, rows) {
        return fail_config(&format!("writing lyapunov_per_seed.csv: {e}"));
    }
    let value = timestamped(report::spectrum_report(&spec, &r.driver_name));
    if let Err(m) = write_outputs(&r.out, "lyapunov", &value) {
        return fail_config(&m);
    }
    println!(
        "lyapunov: exponents {:?} at n = {} over {} seeds -> {}",
        spec.exponents,
        r.steps,
        r.seeds,
        r.out.display()
    );
    EXIT_OK
}

fn cmd_oseledec(args: CommonArgs) -> u8 {
    let mut args = args;
    if args.space.is_none() {
        args.space = Some("pos:2".to_string());
    }
    if args.driver.is_none() {
        args.driver = Some("conjdiag:0.7".to_string());
    }
    let r = match resolve(args, 10_000) {
        Ok(r) => r,
        Err(m) => return fail_config(&m),
    };
    let traj = match sample_walk_stream(&r.space, &r.driver, r.steps, r.seed, 0) {
        Ok(t) => t,
        Err(e) => return fail_config(&format!("sampling: {e}")),
    };
    let dir = match oseledec_direction(&traj) {
        Ok(d) => d,
        Err(e) => return fail_config(&format!("oseledec: {e}")),
    };
    let rows = dir.residuals.iter().map(|(n, v)| vec![n.to_string(), csv_float(*v)]);
    if let Err(e) =
        report::write_csv(&r.out.join("oseledec_residuals.csv"), &["n", "r_n"], rows)
    {
        return fail_config(&format!("writing oseledec_residuals.csv: {e}"));
    }
    // drift identity against the spectrum of this trajectory
    let a_hat = tail_mean(&traj, 0.5).unwrap_or(f64::NAN);
    let spec = aggregate_spectra(vec![dir.lambda_log_eigs.clone()], r.steps, Vec::new());
    let identity = posn_drift_identity(&spec, a_hat, r.tolerance);
    let mut value = match report::oseledec_report(&dir) {
        Ok(v) => v,
        Err(e) => return fail_config(&format!("report: {e}")),
    };
    if let Some(map) = value.as_object_mut() {
        map.insert("drift_identity_a_hat".to_string(), json!(identity.a_hat));
        map.insert("drift_identity_spectrum_side".to_string(), json!(identity.spectrum_side));
        map.insert("drift_identity_deviation".to_string(), json!(identity.deviation));
    }
    let value = timestamped(value);
    if let Err(m) = write_outputs(&r.out, "oseledec", &value) {
        return fail_config(&m);
    }
    let (n_last, r_last) = dir.residuals.last().copied().unwrap_or((0, f64::NAN));
    println!(
        "oseledec: lambda logs {:?}, residual r_{} = {:.5}, drift identity dev {:.5} -> {}",
        dir.lambda_log_eigs,
        n_last,
        r_last,
        identity.deviation,
        r.out.display()
    );
    EXIT_OK
}

fn cmd_catzero(mut args: CommonArgs, samples: usize) -> u8 {
    if let Some(path) = &args.config {
        let cfg = match ExperimentConfig::from_path(path) {
            Ok(c) => c,
            Err(m) => return fail_config(&m),
        };
        cfg.merge_into(&mut args);
    }
    let space = match parse_space(&args.space.unwrap_or_else(|| "h2".to_string())) {
        Ok(s) => s,
        Err(m) => return fail_config(&m),
    };
    let seed = args.seed.unwrap_or(0);
    let expect_cat0 = match space.kind() {
        SpaceKind::HyperbolicPlane | SpaceKind::PosMatrices { .. } => true,
        SpaceKind::ZdWord { .. } => false,
        SpaceKind::FreeGroup { .. } => {
            return fail_config("catzero-check covers z:N, h2 and pos:N")
        }
    };
    if expect_cat0 {
        let mut rng = stream_rng(seed, 0);
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            let x = sampling::sample_point(&space, &mut rng);
            let y = sampling::sample_point(&space, &mut rng);
            let ws: Vec<SpacePoint> =
                (0..4).map(|_| sampling::sample_point(&space, &mut rng)).collect();
            match spaces::semiparallelogram_check(&space, &x, &y, &ws, 1e-9) {
                Ok(rep) => {
                    worst = worst.min(rep.worst_slack);
                    if !rep.holds {
                        println!(
                            "catzero-check {}: FAILED with slack {:.3e} (unexpected)",
                            space.kind().name(),
                            rep.worst_slack
                        );
                        return EXIT_ASSERTION;
                    }
                }
                Err(e) => return fail_config(&format!("checker: {e}")),
            }
        }
        println!(
            "catzero-check {}: semiparallelogram law holds on {samples} quadruples (worst slack {:.2e})",
            space.kind().name(),
            worst
        );
    } else {
        // the L1 plane must FAIL on the witness quadruple
        let report = spaces::semiparallelogram_check(
            &space,
            &SpacePoint::Lattice(vec![1, 0]),
            &SpacePoint::Lattice(vec![0, 1]),
            &[SpacePoint::Lattice(vec![1, 1]), SpacePoint::Lattice(vec![0, 0])],
            1e-9,
        );
        match report {
            Ok(rep) if !rep.holds => println!(
                "catzero-check {}: counterexample quadruple fails the law as expected (slack {:.1})",
                space.kind().name(),
                rep.worst_slack
            ),
            Ok(_) => {
                println!(
                    "catzero-check {}: counterexample not detected (unexpected)",
                    space.kind().name()
                );
                return EXIT_ASSERTION;
            }
            Err(e) => return fail_config(&format!("checker: {e}")),
        }
    }
    EXIT_OK
}

fn cmd_demo() -> u8 {
    println!("== ergowalk demo ==");
    let f2 = PointedSpace::new(SpaceKind::FreeGroup { rank: 2 }).unwrap();
    let driver = CocycleDriver::iid(IncrementLaw::uniform_generators(&f2).unwrap());
    let traj = sample_walk_stream(&f2, &driver, 20_000, 1, 0).unwrap();
    let a = tail_mean(&traj, 0.5).unwrap();
    println!("f:2 srw     drift a(n)/n tail mean = {a:.4} (birth-death oracle 0.5)");
    let dir = limit_horofunction(&traj, a).unwrap();
    let rep = check_lln(&traj, &dir.horofunction, a).unwrap();
    println!(
        "f:2 srw     -h(Z_T)/T = {:.4} (terminal deviation {:.4})",
        rep.series.last().unwrap().1,
        rep.terminal_deviation
    );
    let z1 = PointedSpace::new(SpaceKind::ZdWord { dim: 1 }).unwrap();
    let biased = parse_driver("biased:0.7", &z1).unwrap();
    let traj = sample_walk_stream(&z1, &biased, 50_000, 2, 0).unwrap();
    let s = suggest_start_time(&traj, 0.2, tail_mean(&traj, 0.5).unwrap()).unwrap();
    match find_intersection_witness(&traj, 0.2, s.start_n, s.start_n + 100, traj.len()).unwrap() {
        WitnessSearch::Found(w) => println!(
            "z:1 biased  shadow witness n = {} for band [{}, {}] at eps 0.2",
            w.witness, w.start_n, w.end_m
        ),
        WitnessSearch::NotFound { .. } => println!("z:1 biased  no witness (unexpected)"),
    }
    let pos = PointedSpace::new(SpaceKind::PosMatrices { size: 2 }).unwrap();
    let diag = parse_driver("diag:2,0.5", &pos).unwrap();
    let traj = sample_walk_stream(&pos, &diag, 1_000, 0, 0).unwrap();
    let d = oseledec_direction(&traj).unwrap();
    println!(
        "pos:2 diag  lambda logs = ({:.4}, {:.4}), terminal residual {:.1e}",
        d.lambda_log_eigs[0],
        d.lambda_log_eigs[1],
        d.residuals.last().unwrap().1
    );
    let h2 = PointedSpace::new(SpaceKind::HyperbolicPlane).unwrap();
    let g1 = spaces::Moebius::new(1.0, 0.6, 0.0, 1.0).unwrap();
    let g2 = spaces::Moebius::new(1.3, 0.0, 0.0, 1.0 / 1.3).unwrap();
    let hdriver = CocycleDriver::iid(IncrementLaw::Finite {
        support: vec![IsometryElement::Moebius(g1), IsometryElement::Moebius(g2)],
        probabilities: vec![0.5, 0.5],
    });
    let traj = sample_walk_stream(&h2, &hdriver, 600, 3, 0).unwrap();
    let estimates = halfplane_boundary_estimates(&traj).unwrap();
    if estimates.len() >= 2 {
        let last = estimates[estimates.len() - 1].1;
        let prev = estimates[estimates.len() - 2].1;
        println!(
            "h2 walk     boundary estimate xi_n settling: |xi_last - xi_prev| = {:.2e} at xi = {:.4}",
            (last - prev).abs(),
            last
        );
    }
    let h = Horofunction::busemann(&h2, BoundaryDirection::HalfPlaneBoundary(None)).unwrap();
    let v = horo::eval(&h, &SpacePoint::HalfPlane { re: 0.0, im: 2.0 }).unwrap();
    println!("h2          busemann at infinity evaluated at 2i = {v:.6} (-log 2)");
    println!("== demo done ==");
    EXIT_OK
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_roundtrip_is_lossless() {
        let cfg = ExperimentConfig {
            space: Some("f:2".to_string()),
            driver: Some("srw".to_string()),
            steps: Some(12345),
            seed: Some(7),
            seeds: Some(4),
            out: Some("/tmp/x".to_string()),
            workers: Some(2),
            expect: Some(0.5),
            tolerance: Some(0.01),
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn space_dsl_parses_both_forms() {
        for (text, name) in [
            ("z:2", "z:2"),
            ("z2", "z:2"),
            ("f:3", "f:3"),
            ("f2", "f:2"),
            ("h2", "h2"),
            ("pos:2", "pos:2"),
            ("pos2", "pos:2"),
        ] {
            assert_eq!(parse_space(text).unwrap().kind().name(), name);
        }
        assert!(parse_space("q:9").is_err());
        assert!(parse_space("f:1").is_err());
    }

    #[test]
    fn driver_dsl_validates_against_space() {
        let z1 = parse_space("z:1").unwrap();
        assert!(parse_driver("srw", &z1).is_ok());
        assert!(parse_driver("biased:0.7", &z1).is_ok());
        assert!(parse_driver("biased:1.5", &z1).is_err());
        let pos = parse_space("pos:2").unwrap();
        assert!(parse_driver("diag:2,0.5", &pos).is_ok());
        assert!(parse_driver("rotations", &pos).is_ok());
        assert!(parse_driver("srw", &pos).is_err());
        assert!(parse_driver("nonsense", &z1).is_err());
    }
}
