//! Explicit upwind solver for the coupled fields `(u, R, S)` on a uniform
//! radial grid.
//!
//! `R` is transported with speed `-c(u)` and upwinded from the right, `S`
//! with `+c(u)` and upwinded from the left. Sources are added in the same
//! stage as advection, and `u` follows `u_t = (R + S) / (2 r^α)`. The time
//! step is `cfl * h / c1`, with the last step clipped to land on the stop time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial::ProblemSetup;
use crate::riemann::{self, sources};

pub const MIN_NODES: usize = 8;

/// Uniform radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    r: Vec<f64>,
    h: f64,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::DomainMismatch(format!("grid needs >= {MIN_NODES} nodes, got {n}")));
        }
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::DomainMismatch(format!("grid interval must satisfy 0 < lo < hi, got [{lo}, {hi}]")));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let mut r: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
        r[n - 1] = hi;
        Ok(Self { r, h })
    }

    /// Grid spanning the setup's domain.
    pub fn for_setup(setup: &ProblemSetup, n: usize) -> Result<Self> {
        let dom = setup.domain();
        Self::new(dom.lo, dom.hi, n)
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn len(&self) -> usize {
        self.r.len()
    }
    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
    pub fn lo(&self) -> f64 {
        self.r[0]
    }
    pub fn hi(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    /// Cell index `i` and fraction `θ` with `x = r_i + θ h`, or `None` outside.
    #[inline]
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        if !(x >= self.lo() && x <= self.hi()) {
            return None;
        }
        let s = (x - self.lo()) / self.h;
        let i = (s.floor() as usize).min(self.len() - 2);
        Some((i, s - i as f64))
    }

    /// Linear interpolation of nodal `values` at `x`.
    #[inline]
    pub fn interp(&self, values: &[f64], x: f64) -> Option<f64> {
        self.locate(x).map(|(i, th)| values[i] + th * (values[i + 1] - values[i]))
    }
}

/// Discrete solution at one time level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridState {
    pub t: f64,
    pub u: Vec<f64>,
    pub big_r: Vec<f64>,
    pub big_s: Vec<f64>,
}

impl GridState {
    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.u.iter().all(|x| x.is_finite())
            && self.big_r.iter().all(|x| x.is_finite())
            && self.big_s.iter().all(|x| x.is_finite())
    }

    /// `max_i |S_i| / r_i^α` and its node.
    pub fn max_scaled_s(&self, weights: &[f64]) -> (f64, usize) {
        self.big_s
            .iter()
            .zip(weights)
            .enumerate()
            .fold((0.0, 0), |(best, at), (i, (s, w))| {
                let v = s.abs() / w;
                if v > best {
                    (v, i)
                } else {
                    (best, at)
                }
            })
    }

    /// `u_r = (R - S) / (2 c(u) r^α)` at every node.
    pub fn u_r(&self, setup: &ProblemSetup, weights: &[f64]) -> Vec<f64> {
        (0..self.u.len())
            .map(|i| (self.big_r[i] - self.big_s[i]) / (2.0 * setup.speed().c(self.u[i]) * weights[i]))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// First-order upwind, forward Euler.
    #[default]
    Upwind1,
    /// Minmod-limited reconstruction, two-stage SSP Runge-Kutta.
    Muscl2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientCeiling {
    /// Multiple of the initial `max |S| / r^α`.
    Relative(f64),
    Absolute(f64),
}

impl Default for GradientCeiling {
    fn default() -> Self {
        GradientCeiling::Relative(1e4)
    }
}

impl GradientCeiling {
    /// Resolves to an absolute threshold. Zero initial data never trips a relative ceiling.
    pub fn resolve(self, initial_max: f64) -> f64 {
        match self {
            GradientCeiling::Relative(f) if initial_max > 0.0 => f * initial_max,
            GradientCeiling::Relative(_) => f64::INFINITY,
            GradientCeiling::Absolute(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchemeConfig {
    pub cfl: f64,
    pub scheme: Scheme,
    pub max_steps: usize,
    pub gradient_ceiling: GradientCeiling,
    /// Run until this time instead of the setup's `t_final`.
    pub stop_time: Option<f64>,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            cfl: 0.9,
            scheme: Scheme::Upwind1,
            max_steps: 10_000_000,
            gradient_ceiling: GradientCeiling::default(),
            stop_time: None,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidScheme(format!("cfl must be in (0, 1], got {}", self.cfl)));
        }
        let ceiling_ok = match self.gradient_ceiling {
            GradientCeiling::Relative(f) | GradientCeiling::Absolute(f) => f > 0.0,
        };
        if !ceiling_ok {
            return Err(Error::InvalidScheme("gradient ceiling must be positive".into()));
        }
        if let Some(t) = self.stop_time {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidScheme(format!("stop_time must be finite and >= 0, got {t}")));
            }
        }
        Ok(())
    }
}

/// Per-run data shared with observers.
pub struct RunContext<'a> {
    pub setup: &'a ProblemSetup,
    pub grid: &'a Grid,
    /// `r_i^α`.
    pub weights: &'a [f64],
    pub step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Hook invoked once before the first step and after every step.
pub trait Observer {
    fn start(&mut self, _ctx: &RunContext<'_>, _initial: &GridState) {}
    fn observe(&mut self, ctx: &RunContext<'_>, before: &GridState, after: &GridState) -> Flow;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum StopReason {
    FinalTime,
    GradientCeiling { t: f64, r: f64 },
    MaxSteps,
    Observer,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_state: GridState,
    pub steps: usize,
    pub stop: StopReason,
    pub t_end: f64,
    pub initial_max_scaled_s: f64,
    pub ceiling: f64,
    /// `(t, max |S| / r^α)` after every step, starting with `t = 0`.
    pub gradient_trace: Vec<(f64, f64)>,
}

impl RunResult {
    pub fn max_gradient_growth(&self) -> f64 {
        if self.initial_max_scaled_s == 0.0 {
            return 0.0;
        }
        self.gradient_trace.iter().map(|p| p.1).fold(0.0, f64::max) / self.initial_max_scaled_s
    }
}

/// Stepper bound to one setup and grid; caches `r^α`, `1/r` and stage buffers.
pub struct Solver<'a> {
    setup: &'a ProblemSetup,
    grid: &'a Grid,
    cfg: SchemeConfig,
    weights: Vec<f64>,
    inv_r: Vec<f64>,
    c: Vec<f64>,
    cp: Vec<f64>,
    slope_r: Vec<f64>,
    slope_s: Vec<f64>,
}

struct Rates {
    u: Vec<f64>,
    r: Vec<f64>,
    s: Vec<f64>,
}

impl<'a> Solver<'a> {
    pub fn new(setup: &'a ProblemSetup, grid: &'a Grid, cfg: SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        let dom = setup.domain();
        let tol = 1e-12 * dom.hi.abs().max(1.0);
        if (grid.lo() - dom.lo).abs() > tol || (grid.hi() - dom.hi).abs() > tol {
            return Err(Error::DomainMismatch(format!(
                "grid spans [{}, {}], setup domain is [{}, {}]",
                grid.lo(),
                grid.hi(),
                dom.lo,
                dom.hi
            )));
        }
        let alpha = setup.alpha();
        let n = grid.len();
        Ok(Self {
            setup,
            grid,
            cfg,
            weights: grid.r().iter().map(|&r| riemann::weight(r, alpha)).collect(),
            inv_r: grid.r().iter().map(|&r| 1.0 / r).collect(),
            c: vec![0.0; n],
            cp: vec![0.0; n],
            slope_r: vec![0.0; n],
            slope_s: vec![0.0; n],
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    /// Global step `cfl * h / c1`.
    pub fn dt(&self) -> f64 {
        self.cfg.cfl * self.grid.h() / self.setup.speed().c1()
    }

    pub fn init_state(&self) -> GridState {
        let mut u = Vec::with_capacity(self.grid.len());
        let mut big_r = Vec::with_capacity(self.grid.len());
        let mut big_s = Vec::with_capacity(self.grid.len());
        for &r in self.grid.r() {
            u.push(self.setup.initial_u(r));
            let (a, b) = self.setup.initial_riemann(r);
            big_r.push(a);
            big_s.push(b);
        }
        GridState { t: 0.0, u, big_r, big_s }
    }

    fn rates(&mut self, st: &GridState) -> Rates {
        let n = self.grid.len();
        let speed = self.setup.speed();
        let alpha = self.setup.alpha();
        let inv_h = 1.0 / self.grid.h();
        for i in 0..n {
            let (c, cp) = speed.c_and_prime(st.u[i]);
            self.c[i] = c;
            self.cp[i] = cp;
        }
        let (rv, sv) = (&st.big_r, &st.big_s);
        match self.cfg.scheme {
            Scheme::Upwind1 => {
                self.slope_r.iter_mut().for_each(|x| *x = 0.0);
                self.slope_s.iter_mut().for_each(|x| *x = 0.0);
            }
            Scheme::Muscl2 => {
                self.slope_r[0] = 0.0;
                self.slope_s[0] = 0.0;
                self.slope_r[n - 1] = 0.0;
                self.slope_s[n - 1] = 0.0;
                for i in 1..n - 1 {
                    self.slope_r[i] = minmod(rv[i] - rv[i - 1], rv[i + 1] - rv[i]);
                    self.slope_s[i] = minmod(sv[i] - sv[i - 1], sv[i + 1] - sv[i]);
                }
            }
        }
        let mut out = Rates {
            u: vec![0.0; n],
            r: vec![0.0; n],
            s: vec![0.0; n],
        };
        for i in 1..n - 1 {
            let (f_r, f_s) = sources(self.c[i], self.cp[i], self.weights[i], self.inv_r[i], alpha, rv[i], sv[i]);
            // R: faces reconstructed from the right-hand cell.
            let r_face_hi = rv[i + 1] - 0.5 * self.slope_r[i + 1];
            let r_face_lo = rv[i] - 0.5 * self.slope_r[i];
            // S: faces reconstructed from the left-hand cell.
            let s_face_hi = sv[i] + 0.5 * self.slope_s[i];
            let s_face_lo = sv[i - 1] + 0.5 * self.slope_s[i - 1];
            out.r[i] = self.c[i] * (r_face_hi - r_face_lo) * inv_h + f_r;
            out.s[i] = -self.c[i] * (s_face_hi - s_face_lo) * inv_h + f_s;
            out.u[i] = (rv[i] + sv[i]) / (2.0 * self.weights[i]);
        }
        out
    }

    fn euler(&self, st: &GridState, k: &Rates, dt: f64) -> GridState {
        let n = self.grid.len();
        let mut next = GridState {
            t: st.t + dt,
            u: Vec::with_capacity(n),
            big_r: Vec::with_capacity(n),
            big_s: Vec::with_capacity(n),
        };
        for i in 0..n {
            next.u.push(st.u[i] + dt * k.u[i]);
            next.big_r.push(st.big_r[i] + dt * k.r[i]);
            next.big_s.push(st.big_s[i] + dt * k.s[i]);
        }
        self.apply_boundary(&mut next);
        next
    }

    fn apply_boundary(&self, st: &mut GridState) {
        let u0 = self.setup.u0();
        for i in [0, self.grid.len() - 1] {
            st.u[i] = u0;
            st.big_r[i] = 0.0;
            st.big_s[i] = 0.0;
        }
    }

    /// Advances by `dt` (at most the CFL step).
    pub fn step_by(&mut self, st: &GridState, dt: f64) -> Result<GridState> {
        let next = match self.cfg.scheme {
            Scheme::Upwind1 => {
                let k = self.rates(st);
                self.euler(st, &k, dt)
            }
            Scheme::Muscl2 => {
                let k1 = self.rates(st);
                let s1 = self.euler(st, &k1, dt);
                let k2 = self.rates(&s1);
                let s2 = self.euler(&s1, &k2, dt);
                let mut avg = GridState {
                    t: st.t + dt,
                    u: st.u.iter().zip(&s2.u).map(|(a, b)| 0.5 * (a + b)).collect(),
                    big_r: st.big_r.iter().zip(&s2.big_r).map(|(a, b)| 0.5 * (a + b)).collect(),
                    big_s: st.big_s.iter().zip(&s2.big_s).map(|(a, b)| 0.5 * (a + b)).collect(),
                };
                self.apply_boundary(&mut avg);
                avg
            }
        };
        if next.is_finite() {
            Ok(next)
        } else {
            Err(Error::NonFiniteState {
                last_finite: Box::new(st.clone()),
            })
        }
    }

    /// One step with the CFL time step.
    pub fn step(&mut self, st: &GridState) -> Result<GridState> {
        let dt = self.dt();
        self.step_by(st, dt)
    }

    pub fn run(&mut self, observers: &mut [&mut dyn Observer]) -> Result<RunResult> {
        let mut state = self.init_state();
        let t_end = self.cfg.stop_time.unwrap_or(self.setup.t_final());
        let dt0 = self.dt();
        let (initial_max, _) = state.max_scaled_s(&self.weights);
        let ceiling = self.cfg.gradient_ceiling.resolve(initial_max);
        let mut gradient_trace = vec![(0.0, initial_max)];
        {
            let ctx = self.context(0);
            for obs in observers.iter_mut() {
                obs.start(&ctx, &state);
            }
        }
        let mut steps = 0usize;
        let stop = loop {
            let remaining = t_end - state.t;
            if remaining <= 1e-12 * dt0 {
                break StopReason::FinalTime;
            }
            if steps >= self.cfg.max_steps {
                break StopReason::MaxSteps;
            }
            let clipped = remaining < dt0;
            let dt = if clipped { remaining } else { dt0 };
            let mut next = self.step_by(&state, dt)?;
            if clipped {
                next.t = t_end;
            }
            steps += 1;
            let mut halt = false;
            {
                let ctx = self.context(steps);
                for obs in observers.iter_mut() {
                    halt |= obs.observe(&ctx, &state, &next) == Flow::Stop;
                }
            }
            state = next;
            let (m, at) = state.max_scaled_s(&self.weights);
            gradient_trace.push((state.t, m));
            if m >= ceiling {
                break StopReason::GradientCeiling {
                    t: state.t,
                    r: self.grid.r()[at],
                };
            }
            if halt {
                break StopReason::Observer;
            }
        };
        Ok(RunResult {
            final_state: state,
            steps,
            stop,
            t_end,
            initial_max_scaled_s: initial_max,
            ceiling,
            gradient_trace,
        })
    }

    fn context(&self, step: usize) -> RunContext<'_> {
        RunContext {
            setup: self.setup,
            grid: self.grid,
            weights: &self.weights,
            step,
        }
    }
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

pub fn init_state(setup: &ProblemSetup, grid: &Grid) -> Result<GridState> {
    Ok(Solver::new(setup, grid, SchemeConfig::default())?.init_state())
}

pub fn step(state: &GridState, setup: &ProblemSetup, grid: &Grid, cfg: SchemeConfig) -> Result<GridState> {
    Solver::new(setup, grid, cfg)?.step(state)
}

pub fn run(setup: &ProblemSetup, grid: &Grid, cfg: SchemeConfig, observers: &mut [&mut dyn Observer]) -> Result<RunResult> {
    Solver::new(setup, grid, cfg)?.run(observers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::{BumpProfile, DomainChoice, SetupParams};
    use crate::speed::WaveSpeedModel;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    fn canonical(eps: f64) -> ProblemSetup {
        let speed = WaveSpeedModel::oseen_frank(2.0, 1.0, 1.0, SQRT_2).unwrap();
        ProblemSetup::theorem(3, 1.0, eps, FRAC_PI_4, speed).unwrap()
    }

    fn constant_speed(d: u32, amplitude: f64) -> ProblemSetup {
        ProblemSetup::new(SetupParams {
            d,
            r0: 1.0,
            eps: 0.1,
            u0: 0.0,
            speed: WaveSpeedModel::constant(1.0).unwrap(),
            profile: BumpProfile::polynomial(amplitude).unwrap(),
            domain: DomainChoice::Auto,
        })
        .unwrap()
    }

    #[test]
    fn grid_validation_and_lookup() {
        assert!(Grid::new(0.1, 1.0, 7).is_err());
        assert!(Grid::new(0.0, 1.0, 16).is_err());
        assert!(Grid::new(1.0, 0.5, 16).is_err());
        let g = Grid::new(1.0, 2.0, 11).unwrap();
        assert!((g.h() - 0.1).abs() < 1e-15);
        assert_eq!(g.hi(), 2.0);
        let v: Vec<f64> = g.r().iter().map(|r| 3.0 * r - 1.0).collect();
        assert!((g.interp(&v, 1.234).unwrap() - (3.0 * 1.234 - 1.0)).abs() < 1e-13);
        assert_eq!(g.interp(&v, 2.0), Some(5.0));
        assert_eq!(g.interp(&v, 0.99), None);
    }

    #[test]
    fn init_state_samples_initial_data() {
        let setup = canonical(0.05);
        let grid = Grid::for_setup(&setup, 4097).unwrap();
        let st = init_state(&setup, &grid).unwrap();
        assert_eq!(st.t, 0.0);
        for (i, &r) in grid.r().iter().enumerate() {
            if (r - 1.0).abs() >= 0.05 {
                assert_eq!((st.big_r[i], st.big_s[i]), (0.0, 0.0));
                assert_eq!(st.u[i], FRAC_PI_4);
            } else {
                assert_eq!((st.big_r[i], st.big_s[i]), setup.initial_riemann(r));
            }
        }
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let setup = canonical(0.05);
        let grid = Grid::new(0.5, 2.0, 64).unwrap();
        assert!(matches!(init_state(&setup, &grid), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn invalid_cfl_is_rejected() {
        let setup = canonical(0.05);
        let grid = Grid::for_setup(&setup, 64).unwrap();
        for cfl in [0.0, 1.2, -0.5] {
            let cfg = SchemeConfig { cfl, ..Default::default() };
            assert!(matches!(Solver::new(&setup, &grid, cfg), Err(Error::InvalidScheme(_))));
        }
    }

    #[test]
    fn zero_state_is_stationary() {
        let setup = constant_speed(3, 0.0);
        let grid = Grid::for_setup(&setup, 256).unwrap();
        for scheme in [Scheme::Upwind1, Scheme::Muscl2] {
            let cfg = SchemeConfig { scheme, ..Default::default() };
            let st = init_state(&setup, &grid).unwrap();
            let next = step(&st, &setup, &grid, cfg).unwrap();
            assert_eq!(next.u, st.u);
            assert!(next.big_r.iter().chain(&next.big_s).all(|&x| x == 0.0));
            assert!(next.t > 0.0);
        }
    }

    #[test]
    fn euler_source_update_by_hand() {
        // S = const, R = 0, c = 1, α = 1: R_i gains -dt α c S / r_i, S is unchanged inside.
        let setup = constant_speed(3, 1.0);
        let grid = Grid::for_setup(&setup, 128).unwrap();
        let n = grid.len();
        let st = GridState {
            t: 0.0,
            u: vec![0.0; n],
            big_r: vec![0.0; n],
            big_s: vec![2.0; n],
        };
        let mut solver = Solver::new(&setup, &grid, SchemeConfig::default()).unwrap();
        let dt = solver.dt();
        assert!((dt - 0.9 * grid.h()).abs() < 1e-16);
        let next = solver.step(&st).unwrap();
        for i in 1..n - 1 {
            let expected = -dt * 2.0 / grid.r()[i];
            assert!((next.big_r[i] - expected).abs() < 1e-15, "node {i}");
            if i > 1 {
                assert_eq!(next.big_s[i], 2.0);
            }
            assert!((next.u[i] - dt * 2.0 / (2.0 * grid.r()[i])).abs() < 1e-15);
        }
        assert_eq!((next.big_r[0], next.big_s[0]), (0.0, 0.0));
        assert_eq!((next.big_r[n - 1], next.big_s[n - 1]), (0.0, 0.0));
    }

    #[test]
    fn non_finite_state_is_reported_with_last_good_state() {
        let setup = constant_speed(3, 1.0);
        let grid = Grid::for_setup(&setup, 64).unwrap();
        let mut st = init_state(&setup, &grid).unwrap();
        st.big_s[10] = f64::MAX;
        st.big_s[11] = -f64::MAX;
        match step(&st, &setup, &grid, SchemeConfig::default()) {
            Err(Error::NonFiniteState { last_finite }) => assert_eq!(*last_finite, st),
            other => panic!("expected NonFiniteState, got {other:?}"),
        }
    }

    #[test]
    fn max_steps_zero_returns_initial_state() {
        let setup = canonical(0.05);
        let grid = Grid::for_setup(&setup, 512).unwrap();
        let cfg = SchemeConfig { max_steps: 0, ..Default::default() };
        let res = run(&setup, &grid, cfg, &mut []).unwrap();
        assert_eq!(res.stop, StopReason::MaxSteps);
        assert_eq!(res.steps, 0);
        assert_eq!(res.final_state, init_state(&setup, &grid).unwrap());
    }

    #[test]
    fn zero_data_runs_to_final_time() {
        let setup = constant_speed(3, 0.0);
        let grid = Grid::for_setup(&setup, 256).unwrap();
        let res = run(&setup, &grid, SchemeConfig::default(), &mut []).unwrap();
        assert_eq!(res.stop, StopReason::FinalTime);
        assert_eq!(res.final_state.t, setup.t_final());
        assert_eq!(res.ceiling, f64::INFINITY);
        assert!(res.final_state.big_s.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn stop_time_is_hit_exactly() {
        let setup = constant_speed(1, 1.0);
        let grid = Grid::for_setup(&setup, 300).unwrap();
        let cfg = SchemeConfig {
            stop_time: Some(0.123),
            ..Default::default()
        };
        let res = run(&setup, &grid, cfg, &mut []).unwrap();
        assert_eq!(res.final_state.t, 0.123);
        assert_eq!(res.stop, StopReason::FinalTime);
    }

    #[test]
    fn absolute_ceiling_stops_run() {
        let setup = canonical(0.05);
        let grid = Grid::for_setup(&setup, 1024).unwrap();
        let cfg = SchemeConfig {
            gradient_ceiling: GradientCeiling::Absolute(1.0),
            ..Default::default()
        };
        let res = run(&setup, &grid, cfg, &mut []).unwrap();
        assert!(matches!(res.stop, StopReason::GradientCeiling { .. }));
        assert_eq!(res.steps, 1);
    }

    #[test]
    fn ceiling_resolution() {
        assert_eq!(GradientCeiling::Relative(10.0).resolve(2.0), 20.0);
        assert_eq!(GradientCeiling::Relative(10.0).resolve(0.0), f64::INFINITY);
        assert_eq!(GradientCeiling::Absolute(3.0).resolve(0.0), 3.0);
    }

    #[test]
    fn minmod_cases() {
        assert_eq!(minmod(1.0, 2.0), 1.0);
        assert_eq!(minmod(-3.0, -2.0), -2.0);
        assert_eq!(minmod(1.0, -1.0), 0.0);
        assert_eq!(minmod(0.0, 5.0), 0.0);
    }

    struct SupportMonitor {
        prev_width: Option<(f64, f64)>,
        worst_excess: f64,
        c1: f64,
        /// Cells each step may reach regardless of `dt`, if any.
        stencil_cells: Option<f64>,
    }

    fn support(st: &GridState, grid: &Grid) -> Option<(f64, f64)> {
        let nz = |i: &usize| st.big_r[*i] != 0.0 || st.big_s[*i] != 0.0;
        let first = (0..grid.len()).find(nz)?;
        let last = (0..grid.len()).rev().find(nz)?;
        Some((grid.r()[first], grid.r()[last]))
    }

    impl Observer for SupportMonitor {
        fn start(&mut self, ctx: &RunContext<'_>, initial: &GridState) {
            self.prev_width = support(initial, ctx.grid);
        }
        fn observe(&mut self, ctx: &RunContext<'_>, before: &GridState, after: &GridState) -> Flow {
            let dt = after.t - before.t;
            if let (Some((a0, b0)), Some((a1, b1))) = (self.prev_width, support(after, ctx.grid)) {
                let allowed = match self.stencil_cells {
                    Some(k) => k * ctx.grid.h(),
                    None => self.c1 * dt + ctx.grid.h(),
                };
                let excess = ((a0 - a1) - allowed).max((b1 - b0) - allowed);
                self.worst_excess = self.worst_excess.max(excess);
                self.prev_width = Some((a1, b1));
            }
            Flow::Continue
        }
    }

    #[test]
    fn discrete_finite_propagation_speed() {
        let setup = canonical(0.1);
        let grid = Grid::for_setup(&setup, 2048).unwrap();
        // Upwind1 stays inside the cone plus one cell. Each MUSCL2 stage
        // reaches one cell, so a step reaches two even when clipped.
        for (scheme, stencil_cells) in [(Scheme::Upwind1, None), (Scheme::Muscl2, Some(2.0))] {
            let mut mon = SupportMonitor {
                prev_width: None,
                worst_excess: 0.0,
                c1: SQRT_2,
                stencil_cells,
            };
            let cfg = SchemeConfig {
                scheme,
                stop_time: Some(0.2),
                ..Default::default()
            };
            run(&setup, &grid, cfg, &mut [&mut mon]).unwrap();
            assert!(mon.worst_excess <= 1e-12, "{scheme:?}: {}", mon.worst_excess);
        }
    }

    #[test]
    fn constant_speed_runs_stay_bounded() {
        // Linear 3-D transport: no explosion to t_final under CFL.
        let setup = constant_speed(3, 5.0);
        let grid = Grid::for_setup(&setup, 1024).unwrap();
        for scheme in [Scheme::Upwind1, Scheme::Muscl2] {
            let cfg = SchemeConfig { scheme, ..Default::default() };
            let res = run(&setup, &grid, cfg, &mut []).unwrap();
            assert_eq!(res.stop, StopReason::FinalTime);
            assert!(res.max_gradient_growth() <= 1.0 + 1e-9, "{scheme:?}: {}", res.max_gradient_growth());
        }
    }
}
