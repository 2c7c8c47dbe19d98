//! Config-driven experiments behind the `varwave` binary.
//!
//! A run is described by one JSON document:
//!
//! ```json
//! {
//!   "setup": {"d": 3, "r0": 1.0, "eps": 0.05, "u0": 0.7853981633974483,
//!             "speed": {"kind": "oseen_frank", "k1": 2.0, "k3": 1.0,
//!                       "c0": 1.0, "c1": 1.4142135623730951},
//!             "profile": "theorem"},
//!   "grid": {"n": 4096, "domain": "auto"},
//!   "scheme": {"cfl": 0.9, "scheme": "upwind1", "gradient_ceiling": {"relative": 10000.0}},
//!   "output": {"snapshot_stride": 200, "svg": false},
//!   "experiment": {"kind": "simulate"}
//! }
//! ```

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::characteristics::{c_prime_sign_along, u_drift_along, DriftReport, SignReport};
use crate::diagnostics::{
    blowup_report, blowup_verdict, compute_constants, triangle_identity, BlowupReport, EnergyObserver, EnergySample,
    HatMonitor, TheoremConstants, TriangleReport, Verdict, VerdictReport,
};
use crate::error::{Error, Result};
use crate::initial::{make_theorem_profile, BumpProfile, Domain, DomainChoice, ProblemSetup, SetupParams};
use crate::output::{self, Series};
use crate::solver::{Flow, Grid, GridState, Observer, RunContext, RunResult, SchemeConfig, Solver, StopReason};
use crate::speed::WaveSpeedModel;

/// Upper bound on energy samples embedded in the diagnostics JSON.
const JSON_ENERGY_SAMPLES: usize = 1000;
/// Snapshots drawn in the `u(r)` plot.
const SVG_SNAPSHOTS: usize = 8;

pub const THREADS_ENV: &str = "VARWAVE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProfileConfig {
    /// Threshold amplitude from the blow-up construction.
    #[default]
    Theorem,
    Polynomial { amplitude: f64 },
    /// C∞ bump with the same slope `-amplitude` at the centre.
    Smooth { amplitude: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupConfig {
    pub d: u32,
    pub r0: f64,
    pub eps: f64,
    pub u0: f64,
    pub speed: WaveSpeedModel,
    #[serde(default)]
    pub profile: ProfileConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum AutoKeyword {
    #[serde(rename = "auto")]
    Auto,
}

/// `"auto"` or `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(untagged)]
pub enum DomainConfig {
    #[default]
    #[serde(with = "auto_keyword")]
    Auto,
    Bounds([f64; 2]),
}

mod auto_keyword {
    use super::AutoKeyword;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        AutoKeyword::Auto.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        AutoKeyword::deserialize(d).map(|_| ())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(default)]
    pub domain: DomainConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Keep every k-th state; 0 keeps only the initial and final states.
    pub snapshot_stride: usize,
    pub svg: bool,
    /// Default output directory when `--out-dir` is not given.
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    #[default]
    Simulate,
    Triangle {
        r1: f64,
        r2: f64,
    },
    EpsSweep {
        eps_list: Vec<f64>,
    },
    Convergence {
        n_list: Vec<usize>,
        /// Comparison time; defaults to `scheme.stop_time`, then `t_final`.
        #[serde(default)]
        t_end: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub setup: SetupConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub experiment: Experiment,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Normalised config, embedded in every artifact.
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config is always serialisable")
    }

    pub fn build_setup(&self) -> Result<ProblemSetup> {
        self.build_setup_with_eps(self.setup.eps)
    }

    pub fn build_setup_with_eps(&self, eps: f64) -> Result<ProblemSetup> {
        let s = &self.setup;
        let profile = match s.profile {
            ProfileConfig::Theorem => make_theorem_profile(s.d, s.r0, s.u0, &s.speed)?,
            ProfileConfig::Polynomial { amplitude } => BumpProfile::polynomial(amplitude)?,
            ProfileConfig::Smooth { amplitude } => BumpProfile::smooth(amplitude)?,
        };
        let domain = match self.grid.domain {
            DomainConfig::Auto => DomainChoice::Auto,
            DomainConfig::Bounds([lo, hi]) => DomainChoice::Explicit(Domain { lo, hi }),
        };
        ProblemSetup::new(SetupParams {
            d: s.d,
            r0: s.r0,
            eps,
            u0: s.u0,
            speed: s.speed.clone(),
            profile,
            domain,
        })
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        let setup = self.build_setup()?;
        Grid::for_setup(&setup, self.grid.n)?;
        match &self.experiment {
            Experiment::Simulate => {}
            Experiment::Triangle { r1, r2 } => {
                if !(*r1 > 0.0 && r2 > r1) {
                    return Err(Error::Config(format!("triangle needs 0 < r1 < r2, got {r1}, {r2}")));
                }
            }
            Experiment::EpsSweep { eps_list } => {
                if eps_list.is_empty() {
                    return Err(Error::Config("eps_list must not be empty".into()));
                }
                for &eps in eps_list {
                    self.build_setup_with_eps(eps)?;
                }
            }
            Experiment::Convergence { n_list, t_end } => {
                if n_list.len() < 3 {
                    return Err(Error::Config(format!("n_list needs at least 3 entries, got {}", n_list.len())));
                }
                if n_list.windows(2).any(|w| w[1] != 2 * w[0]) {
                    return Err(Error::Config(format!("each n_list entry must double the last: {n_list:?}")));
                }
                for &n in n_list {
                    Grid::for_setup(&setup, n)?;
                }
                if let Some(t) = t_end {
                    if !(*t >= 0.0 && t.is_finite()) {
                        return Err(Error::Config(format!("t_end must be finite and >= 0, got {t}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Thread pool sized by `VARWAVE_THREADS`, or rayon's default when unset.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))
}

/// Keeps the initial state and every `stride`-th state after it.
struct SnapshotObserver {
    stride: usize,
    states: Vec<GridState>,
}

impl Observer for SnapshotObserver {
    fn start(&mut self, _ctx: &RunContext<'_>, initial: &GridState) {
        self.states.clear();
        self.states.push(initial.clone());
    }

    fn observe(&mut self, ctx: &RunContext<'_>, _before: &GridState, after: &GridState) -> Flow {
        if self.stride > 0 && ctx.step.is_multiple_of(self.stride) {
            self.states.push(after.clone());
        }
        Flow::Continue
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SetupSummary {
    pub d: u32,
    pub alpha: f64,
    pub r0: f64,
    pub eps: f64,
    pub u0: f64,
    pub amplitude: f64,
    pub c0: f64,
    pub c1: f64,
    pub t_final: f64,
    pub domain: Domain,
    pub n: usize,
    pub h: f64,
}

impl SetupSummary {
    fn new(setup: &ProblemSetup, grid: &Grid) -> Self {
        Self {
            d: setup.d(),
            alpha: setup.alpha(),
            r0: setup.r0(),
            eps: setup.eps(),
            u0: setup.u0(),
            amplitude: setup.profile().amplitude(),
            c0: setup.speed().c0(),
            c1: setup.speed().c1(),
            t_final: setup.t_final(),
            domain: setup.domain(),
            n: grid.len(),
            h: grid.h(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergySummary {
    pub initial: f64,
    #[serde(rename = "final")]
    pub last: f64,
    pub max_relative_drift: f64,
    pub samples: usize,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlowupFlags {
    pub u_drift_ok: Option<bool>,
    pub c_prime_sign_ok: bool,
    pub inv_S_inequality_ok: bool,
    #[serde(rename = "t_star_within_paper_bound")]
    pub t_star_within_bound: Option<bool>,
    pub s_above_one: bool,
    pub eps_below_eps0: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupSection {
    pub detected: bool,
    pub t_detect: Option<f64>,
    pub r_detect: Option<f64>,
    pub t_star_extrapolated: Option<f64>,
    pub verdict: Verdict,
    pub flags: BlowupFlags,
    pub stop: StopReason,
    pub t_end: f64,
    pub steps: usize,
    pub max_gradient_growth: f64,
    pub inv_s_min: Option<(f64, f64)>,
    pub inequality_fraction: f64,
    pub monotone_tail_fraction: f64,
    pub nonpositive_s_samples: usize,
    pub hat_exit: Option<(f64, f64)>,
    pub u_drift: Option<DriftReport>,
    pub c_prime_sign: Option<SignReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub setup: SetupSummary,
    pub constants: Option<TheoremConstants>,
    pub constants_error: Option<String>,
    pub energy: Vec<EnergySample>,
    pub energy_summary: EnergySummary,
    pub triangle: Option<TriangleReport>,
    pub blowup: BlowupSection,
}

/// Everything a single simulation produced.
pub struct Simulation {
    pub setup: ProblemSetup,
    pub grid: Grid,
    pub run: RunResult,
    pub energy: EnergyObserver,
    pub hat: HatMonitor,
    pub snapshots: Vec<GridState>,
    pub constants: Option<TheoremConstants>,
    pub report: BlowupReport,
    pub verdict: Option<VerdictReport>,
    pub diagnostics: Diagnostics,
}

/// Runs the solver with the energy, hat-path and snapshot observers and
/// evaluates the monitors up to the detection time.
pub fn simulate(cfg: &RunConfig, setup: ProblemSetup) -> Result<Simulation> {
    let grid = Grid::for_setup(&setup, cfg.grid.n)?;
    let mut solver = Solver::new(&setup, &grid, cfg.scheme)?;
    let mut energy = EnergyObserver::new();
    let mut hat = HatMonitor::new(&setup);
    let mut snaps = SnapshotObserver {
        stride: cfg.output.snapshot_stride,
        states: Vec::new(),
    };
    let run = solver.run(&mut [&mut energy, &mut hat, &mut snaps])?;
    let mut snapshots = snaps.states;
    if snapshots.last().map(|s| s.t) != Some(run.final_state.t) {
        snapshots.push(run.final_state.clone());
    }

    let (constants, constants_error) = match compute_constants(&setup) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = blowup_report(&run, &hat);
    let verdict = constants.as_ref().map(|c| blowup_verdict(&report, c, &setup));

    let t_cut = report.t_detect.unwrap_or(run.final_state.t);
    let hat_path = hat.path().map(|p| p.truncated(t_cut));
    let u_drift = match (&hat_path, &constants) {
        (Some(p), Some(c)) => Some(u_drift_along(p, &setup, c.k_envelope)),
        _ => None,
    };
    let c_prime_sign = hat_path.as_ref().map(|p| c_prime_sign_along(p, &setup));

    let triangle = match cfg.experiment {
        Experiment::Triangle { r1, r2 } => Some(triangle_identity(&setup, &grid, cfg.scheme, r1, r2)?),
        _ => None,
    };

    let e0 = energy.initial().unwrap_or(0.0);
    let last = energy.samples.last().map_or(0.0, |s| s.energy);
    let energy_summary = EnergySummary {
        initial: e0,
        last,
        max_relative_drift: energy.max_relative_drift(f64::INFINITY),
        samples: energy.samples.len(),
    };
    let diagnostics = Diagnostics {
        setup: SetupSummary::new(&setup, &grid),
        constants,
        constants_error,
        energy: thin(&energy.samples, JSON_ENERGY_SAMPLES),
        energy_summary,
        triangle,
        blowup: BlowupSection {
            detected: report.detected,
            t_detect: report.t_detect,
            r_detect: report.r_detect,
            t_star_extrapolated: report.t_star_extrapolated,
            verdict: verdict.map_or_else(|| Verdict::classify(&report, setup.t_final()), |v| v.verdict),
            flags: BlowupFlags {
                u_drift_ok: u_drift.map(|d| d.holds),
                c_prime_sign_ok: c_prime_sign.is_some_and(|s| s.holds),
                inv_S_inequality_ok: report.inequality_ok,
                t_star_within_bound: verdict.and_then(|v| v.t_star_within_bound),
                s_above_one: report.s_above_one,
                eps_below_eps0: verdict.map(|v| v.eps_below_eps0),
            },
            stop: run.stop,
            t_end: run.t_end,
            steps: run.steps,
            max_gradient_growth: report.max_gradient_growth,
            inv_s_min: report.inv_s_min,
            inequality_fraction: report.inequality_fraction,
            monotone_tail_fraction: report.monotone_tail_fraction,
            nonpositive_s_samples: report.nonpositive_s_samples,
            hat_exit: report.hat_exit,
            u_drift,
            c_prime_sign,
        },
    };
    Ok(Simulation {
        setup,
        grid,
        run,
        energy,
        hat,
        snapshots,
        constants,
        report,
        verdict,
        diagnostics,
    })
}

/// At most `max` evenly spaced samples, always keeping the last.
fn thin<T: Clone>(xs: &[T], max: usize) -> Vec<T> {
    if xs.len() <= max {
        return xs.to_vec();
    }
    let stride = xs.len().div_ceil(max);
    let mut out: Vec<T> = xs.iter().step_by(stride).cloned().collect();
    if !(xs.len() - 1).is_multiple_of(stride) {
        out.push(xs[xs.len() - 1].clone());
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

/// Writes the artifacts of one simulation into `dir`.
pub fn write_simulation(sim: &Simulation, config: &Value, dir: &Path, svg: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    let weights: Vec<f64> = sim.grid.r().iter().map(|&r| crate::riemann::weight(r, sim.setup.alpha())).collect();
    let snaps: Vec<(GridState, Vec<f64>)> = sim
        .snapshots
        .iter()
        .map(|s| (s.clone(), s.u_r(&sim.setup, &weights)))
        .collect();
    output::initial_csv(config, &sim.grid, &sim.snapshots[0]).write(&dir.join("initial.csv"))?;
    output::snapshots_csv(config, &sim.grid, &snaps).write(&dir.join("snapshots.csv"))?;
    output::energy_csv(config, &sim.energy.samples).write(&dir.join("energy.csv"))?;
    if let Some(p) = sim.hat.path() {
        output::path_csv(config, p).write(&dir.join("hat_path.csv"))?;
    }
    output::inv_s_csv(config, &sim.hat.trace).write(&dir.join("inv_s.csv"))?;
    output::write_json(&dir.join("diagnostics.json"), config, &sim.diagnostics)?;
    if svg {
        let n = sim.snapshots.len();
        let picks: Vec<usize> = if n <= SVG_SNAPSHOTS {
            (0..n).collect()
        } else {
            (0..SVG_SNAPSHOTS).map(|k| k * (n - 1) / (SVG_SNAPSHOTS - 1)).collect()
        };
        let u_series: Vec<Series> = picks
            .iter()
            .map(|&k| {
                let s = &sim.snapshots[k];
                let pts = sim.grid.r().iter().zip(&s.u).map(|(&r, &u)| (r, u)).collect();
                Series::new(format!("t = {:.4}", s.t), pts)
            })
            .collect();
        write_text(&dir.join("u_snapshots.svg"), &output::svg_plot(config, "u(t, r)", "r", "u", &u_series))?;
        let e_pts = sim.energy.samples.iter().map(|s| (s.t, s.energy)).collect();
        write_text(
            &dir.join("energy.svg"),
            &output::svg_plot(config, "energy", "t", "E", &[Series::new("E(t)", e_pts)]),
        )?;
        write_text(
            &dir.join("inv_s.svg"),
            &output::svg_plot(
                config,
                "1/S along the hat characteristic",
                "t",
                "1/S",
                &[Series::new("1/S", sim.report.inv_s_trace.clone())],
            ),
        )?;
    }
    Ok(())
}

pub fn cmd_simulate(cfg: &RunConfig, out_dir: &Path, svg: bool) -> Result<Simulation> {
    cfg.validate()?;
    let sim = simulate(cfg, cfg.build_setup()?)?;
    write_simulation(&sim, &cfg.to_value(), out_dir, svg || cfg.output.svg)?;
    Ok(sim)
}

pub fn cmd_triangle(cfg: &RunConfig, out_dir: &Path, svg: bool) -> Result<TriangleReport> {
    cfg.validate()?;
    let Experiment::Triangle { r1, r2 } = cfg.experiment else {
        return Err(Error::Config("triangle needs experiment {\"kind\": \"triangle\", \"r1\", \"r2\"}".into()));
    };
    let setup = cfg.build_setup()?;
    let grid = Grid::for_setup(&setup, cfg.grid.n)?;
    let rep = triangle_identity(&setup, &grid, cfg.scheme, r1, r2)?;
    let config = cfg.to_value();
    fs::create_dir_all(out_dir)?;
    output::write_json(&out_dir.join("triangle.json"), &config, &json!({ "triangle": rep }))?;
    output::path_csv(&config, &rep.plus_path).write(&out_dir.join("triangle_plus.csv"))?;
    output::path_csv(&config, &rep.minus_path).write(&out_dir.join("triangle_minus.csv"))?;
    if svg || cfg.output.svg {
        let trace = |p: &crate::characteristics::CharacteristicPath| p.points.iter().map(|q| (q.r, q.t)).collect();
        let plot = output::svg_plot(
            &config,
            "characteristic triangle",
            "r",
            "t",
            &[Series::new("plus", trace(&rep.plus_path)), Series::new("minus", trace(&rep.minus_path))],
        );
        write_text(&out_dir.join("triangle.svg"), &plot)?;
    }
    Ok(rep)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub detected: Option<bool>,
    pub t_detect: Option<f64>,
    pub t_star_extrapolated: Option<f64>,
    pub t_final: f64,
    pub verdict: Option<Verdict>,
    pub dir: String,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    /// Largest ε whose run crossed the ceiling before `t_final`.
    pub largest_eps_detected: Option<f64>,
    pub failed_runs: usize,
}

/// One simulation per ε, in parallel; a failing member is recorded and the sweep continues.
pub fn cmd_eps_sweep(cfg: &RunConfig, out_dir: &Path, svg: bool) -> Result<SweepSummary> {
    cfg.validate()?;
    let Experiment::EpsSweep { eps_list } = &cfg.experiment else {
        return Err(Error::Config("eps-sweep needs experiment {\"kind\": \"eps_sweep\", \"eps_list\"}".into()));
    };
    let config = cfg.to_value();
    let svg = svg || cfg.output.svg;
    fs::create_dir_all(out_dir)?;
    let pool = thread_pool()?;
    let rows: Vec<SweepRow> = pool.install(|| {
        eps_list
            .par_iter()
            .enumerate()
            .map(|(k, &eps)| {
                let dir = format!("eps_{k:02}");
                let t_final = (cfg.setup.r0 - eps) / cfg.setup.speed.c1();
                let outcome = cfg
                    .build_setup_with_eps(eps)
                    .and_then(|setup| simulate(cfg, setup))
                    .and_then(|sim| write_simulation(&sim, &config, &out_dir.join(&dir), svg).map(|_| sim));
                match outcome {
                    Ok(sim) => SweepRow {
                        eps,
                        detected: Some(sim.report.detected),
                        t_detect: sim.report.t_detect,
                        t_star_extrapolated: sim.report.t_star_extrapolated,
                        t_final: sim.setup.t_final(),
                        verdict: Some(sim.diagnostics.blowup.verdict),
                        dir,
                        error: None,
                    },
                    Err(e) => SweepRow {
                        eps,
                        detected: None,
                        t_detect: None,
                        t_star_extrapolated: None,
                        t_final,
                        verdict: None,
                        dir,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });

    let mut table = output::CsvTable::new(&config, &["eps", "detected", "t_detect", "t_star_extrapolated", "t_final"]);
    let opt = |x: Option<f64>| x.map_or_else(|| "nan".to_string(), output::fmt_f64);
    for row in &rows {
        let detected = match row.detected {
            Some(true) => "1",
            Some(false) => "0",
            None => "nan",
        };
        table.raw_row(&[
            output::fmt_f64(row.eps),
            detected.to_string(),
            opt(row.t_detect),
            opt(row.t_star_extrapolated),
            output::fmt_f64(row.t_final),
        ]);
    }
    table.write(&out_dir.join("eps_sweep.csv"))?;
    let largest_eps_detected = rows
        .iter()
        .filter(|r| r.verdict == Some(Verdict::Pass))
        .map(|r| r.eps)
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))));
    let failed_runs = rows.iter().filter(|r| r.error.is_some()).count();
    let summary = SweepSummary {
        rows,
        largest_eps_detected,
        failed_runs,
    };
    output::write_json(&out_dir.join("eps_sweep.json"), &config, &summary)?;
    Ok(summary)
}

/// Observed order between consecutive errors, `"exact"` when both vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Order(f64),
    Exact,
    Undefined,
}

impl Serialize for Rate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Rate::Order(p) => s.serialize_f64(*p),
            Rate::Exact => s.serialize_str("exact"),
            Rate::Undefined => s.serialize_none(),
        }
    }
}

impl Rate {
    pub fn between(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> Self {
        if e_coarse == 0.0 && e_fine == 0.0 {
            Rate::Exact
        } else if e_coarse > 0.0 && e_fine > 0.0 {
            Rate::Order((e_coarse / e_fine).ln() / (h_coarse / h_fine).ln())
        } else {
            Rate::Undefined
        }
    }

    pub fn order(self) -> Option<f64> {
        match self {
            Rate::Order(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceLevel {
    pub n: usize,
    pub h: f64,
    pub t_end: f64,
    /// `∫ |R_h - R_{h/2}| + |S_h - S_{h/2}| dr` against the next finer level.
    pub l1_self: Option<f64>,
    /// `∫ |R_h - R| + |S_h - S| dr` against the translated initial data.
    pub l1_exact: Option<f64>,
    pub energy_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<ConvergenceLevel>,
    pub self_rates: Vec<Rate>,
    pub exact_rates: Option<Vec<Rate>>,
    pub energy_drift_rates: Vec<Rate>,
}

/// Trapezoid-weighted L¹ of `f(i)` on `grid`.
fn l1(grid: &Grid, f: impl Fn(usize) -> f64) -> f64 {
    let n = grid.len();
    let interior: f64 = (1..n - 1).map(&f).sum();
    grid.h() * (0.5 * (f(0) + f(n - 1)) + interior)
}

/// Exact solution exists when the equation is linear and flat: `d = 1`, constant speed.
fn has_exact_solution(setup: &ProblemSetup) -> bool {
    setup.d() == 1 && setup.speed().c0() == setup.speed().c1()
}

pub fn convergence_study(cfg: &RunConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let Experiment::Convergence { n_list, t_end } = &cfg.experiment else {
        return Err(Error::Config("convergence needs experiment {\"kind\": \"convergence\", \"n_list\"}".into()));
    };
    let setup = cfg.build_setup()?;
    let t_end = t_end.or(cfg.scheme.stop_time).unwrap_or(setup.t_final());
    let scheme = SchemeConfig {
        stop_time: Some(t_end),
        ..cfg.scheme
    };
    let pool = thread_pool()?;
    let runs: Vec<Result<(Grid, GridState, f64)>> = pool.install(|| {
        n_list
            .par_iter()
            .map(|&n| {
                let grid = Grid::for_setup(&setup, n)?;
                let mut energy = EnergyObserver::new();
                let run = Solver::new(&setup, &grid, scheme)?.run(&mut [&mut energy])?;
                if run.stop != StopReason::FinalTime {
                    return Err(Error::RunIncomplete(format!(
                        "n = {n} stopped at t = {} ({:?}) before t_end = {t_end}",
                        run.t_end, run.stop
                    )));
                }
                let drift = energy.relative_drift_at(f64::INFINITY);
                Ok((grid, run.final_state, drift))
            })
            .collect()
    });
    let runs: Vec<(Grid, GridState, f64)> = runs.into_iter().collect::<Result<_>>()?;

    let exact = has_exact_solution(&setup);
    let c = setup.speed().c0();
    let mut levels = Vec::with_capacity(runs.len());
    for (k, (grid, st, drift)) in runs.iter().enumerate() {
        let l1_self = runs.get(k + 1).map(|(fine, fst, _)| {
            l1(grid, |i| {
                let r = grid.r()[i];
                let fr = fine.interp(&fst.big_r, r).unwrap_or(0.0);
                let fs = fine.interp(&fst.big_s, r).unwrap_or(0.0);
                (st.big_r[i] - fr).abs() + (st.big_s[i] - fs).abs()
            })
        });
        let l1_exact = exact.then(|| {
            l1(grid, |i| {
                let r = grid.r()[i];
                let (r_ex, _) = setup.initial_riemann(r + c * st.t);
                let (_, s_ex) = setup.initial_riemann(r - c * st.t);
                (st.big_r[i] - r_ex).abs() + (st.big_s[i] - s_ex).abs()
            })
        });
        levels.push(ConvergenceLevel {
            n: grid.len(),
            h: grid.h(),
            t_end: st.t,
            l1_self,
            l1_exact,
            energy_drift: *drift,
        });
    }
    let rates = |get: &dyn Fn(&ConvergenceLevel) -> Option<f64>| -> Vec<Rate> {
        levels
            .windows(2)
            .filter_map(|w| Some(Rate::between(get(&w[0])?, get(&w[1])?, w[0].h, w[1].h)))
            .collect()
    };
    let self_rates = rates(&|l| l.l1_self);
    let exact_rates = exact.then(|| rates(&|l| l.l1_exact));
    let energy_drift_rates = rates(&|l| Some(l.energy_drift));
    Ok(ConvergenceReport {
        levels,
        self_rates,
        exact_rates,
        energy_drift_rates,
    })
}

pub fn cmd_convergence(cfg: &RunConfig, out_dir: &Path, svg: bool) -> Result<ConvergenceReport> {
    let rep = convergence_study(cfg)?;
    let config = cfg.to_value();
    fs::create_dir_all(out_dir)?;
    let mut table = output::CsvTable::new(&config, &["n", "h", "t_end", "l1_self", "l1_exact", "energy_drift"]);
    let opt = |x: Option<f64>| x.map_or_else(|| "nan".to_string(), output::fmt_f64);
    for l in &rep.levels {
        table.raw_row(&[
            l.n.to_string(),
            output::fmt_f64(l.h),
            output::fmt_f64(l.t_end),
            opt(l.l1_self),
            opt(l.l1_exact),
            output::fmt_f64(l.energy_drift),
        ]);
    }
    table.write(&out_dir.join("convergence.csv"))?;
    output::write_json(&out_dir.join("convergence.json"), &config, &rep)?;
    if svg || cfg.output.svg {
        let log_pts = |get: &dyn Fn(&ConvergenceLevel) -> Option<f64>| -> Vec<(f64, f64)> {
            rep.levels
                .iter()
                .filter_map(|l| get(l).filter(|&e| e > 0.0).map(|e| (l.h.log10(), e.log10())))
                .collect()
        };
        let mut series = vec![
            Series::new("self L1", log_pts(&|l| l.l1_self)),
            Series::new("energy drift", log_pts(&|l| Some(l.energy_drift))),
        ];
        if rep.exact_rates.is_some() {
            series.push(Series::new("exact L1", log_pts(&|l| l.l1_exact)));
        }
        let plot = output::svg_plot(&config, "refinement", "log10 h", "log10 error", &series);
        write_text(&out_dir.join("convergence.svg"), &plot)?;
    }
    Ok(rep)
}

#[derive(Debug, Parser)]
#[command(name = "varwave", about = "Radial nonlinear variational wave equation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single run with energy, hat-path and blow-up diagnostics.
    Simulate(CommonArgs),
    /// Energy balance on a characteristic triangle.
    Triangle(CommonArgs),
    /// One simulation per ε.
    EpsSweep(CommonArgs),
    /// Refinement study over a doubling list of grid sizes.
    Convergence(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub svg: bool,
}

fn dispatch(cmd: &Command) -> Result<String> {
    let (Command::Simulate(a) | Command::Triangle(a) | Command::EpsSweep(a) | Command::Convergence(a)) = cmd;
    let cfg = RunConfig::load(&a.config)?;
    let out = a
        .out_dir
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("varwave-out"));
    let msg = match cmd {
        Command::Simulate(_) => {
            let sim = cmd_simulate(&cfg, &out, a.svg)?;
            let b = &sim.diagnostics.blowup;
            format!(
                "simulate: stop {:?} at t = {:.6}, growth {:.3}, verdict {:?}",
                b.stop, b.t_end, b.max_gradient_growth, b.verdict
            )
        }
        Command::Triangle(_) => {
            let rep = cmd_triangle(&cfg, &out, a.svg)?;
            format!("triangle: lhs {:.6e}, rhs {:.6e}, residual {:.4e}", rep.lhs, rep.rhs, rep.residual)
        }
        Command::EpsSweep(_) => {
            let s = cmd_eps_sweep(&cfg, &out, a.svg)?;
            if s.failed_runs > 0 {
                return Err(Error::RunIncomplete(format!(
                    "{} of {} sweep runs failed; see eps_sweep.json",
                    s.failed_runs,
                    s.rows.len()
                )));
            }
            format!("eps-sweep: {} runs, largest detected eps {:?}", s.rows.len(), s.largest_eps_detected)
        }
        Command::Convergence(_) => {
            let rep = cmd_convergence(&cfg, &out, a.svg)?;
            format!("convergence: self rates {:?}", rep.self_rates)
        }
    };
    Ok(format!("{msg}\nartifacts in {}", out.display()))
}

/// Parses `args`, runs the command, and returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}
