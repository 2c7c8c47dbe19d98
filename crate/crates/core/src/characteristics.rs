//! Characteristic curves `dr/dt = ±c(u(t, r))` traced through the discrete
//! field in lock-step with the solver.
//!
//! Each step uses the midpoint rule with `u` interpolated linearly in `r`
//! and in `t` between the two bracketing solver states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::initial::ProblemSetup;
use crate::solver::{Flow, Grid, GridState, Observer, RunContext};
use crate::speed::WaveSpeedModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Plus,
    Minus,
}

impl Family {
    fn sign(self) -> f64 {
        match self {
            Family::Plus => 1.0,
            Family::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSample {
    pub t: f64,
    pub r: f64,
    pub u: f64,
    pub big_r: f64,
    pub big_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacteristicPath {
    pub family: Family,
    pub t_start: f64,
    pub r_start: f64,
    pub points: Vec<PathSample>,
}

fn sample(grid: &Grid, st: &GridState, r: f64) -> Option<PathSample> {
    Some(PathSample {
        t: st.t,
        r,
        u: grid.interp(&st.u, r)?,
        big_r: grid.interp(&st.big_r, r)?,
        big_s: grid.interp(&st.big_s, r)?,
    })
}

impl CharacteristicPath {
    /// Starts a path at `r_start` on the given state.
    pub fn launch(family: Family, grid: &Grid, state: &GridState, r_start: f64) -> Result<Self> {
        let first = sample(grid, state, r_start).ok_or(Error::PathLeftDomain { t: state.t, r: r_start })?;
        Ok(Self {
            family,
            t_start: state.t,
            r_start,
            points: vec![first],
        })
    }

    pub fn last(&self) -> &PathSample {
        self.points.last().expect("path has at least its start sample")
    }

    /// Integrates across one solver step and appends the new sample.
    pub fn advance(&mut self, grid: &Grid, speed: &WaveSpeedModel, before: &GridState, after: &GridState) -> Result<()> {
        let dt = after.t - before.t;
        let sigma = self.family.sign();
        let r = self.last().r;
        let left = |t: f64, r: f64| Error::PathLeftDomain { t, r };
        let u_before = grid.interp(&before.u, r).ok_or_else(|| left(before.t, r))?;
        let r_half = r + 0.5 * dt * sigma * speed.c(u_before);
        let u_half = match (grid.interp(&before.u, r_half), grid.interp(&after.u, r_half)) {
            (Some(a), Some(b)) => 0.5 * (a + b),
            _ => return Err(left(before.t + 0.5 * dt, r_half)),
        };
        let r_new = r + dt * sigma * speed.c(u_half);
        let next = sample(grid, after, r_new).ok_or_else(|| left(after.t, r_new))?;
        self.points.push(next);
        Ok(())
    }

    /// Copy restricted to samples with `t <= t_max`.
    pub fn truncated(&self, t_max: f64) -> Self {
        Self {
            points: self.points.iter().copied().take_while(|p| p.t <= t_max).collect(),
            ..self.clone()
        }
    }
}

/// First crossing of a plus path launched left of a minus path.
pub fn find_intersection(plus: &CharacteristicPath, minus: &CharacteristicPath) -> Result<(f64, f64)> {
    if plus.family != Family::Plus || minus.family != Family::Minus {
        return Err(Error::HypothesisViolated("intersection needs one plus and one minus path".into()));
    }
    if !(plus.r_start < minus.r_start) || plus.t_start != minus.t_start {
        return Err(Error::HypothesisViolated(format!(
            "plus path must start left of the minus path at the same time (r1 = {}, r2 = {})",
            plus.r_start, minus.r_start
        )));
    }
    let n = plus.points.len().min(minus.points.len());
    let gap = |k: usize| minus.points[k].r - plus.points[k].r;
    for k in 1..n {
        let (a, b) = (&plus.points[k - 1], &plus.points[k]);
        if (a.t - minus.points[k - 1].t).abs() > 1e-12 || (b.t - minus.points[k].t).abs() > 1e-12 {
            return Err(Error::HypothesisViolated("paths do not share the solver time grid".into()));
        }
        let (g0, g1) = (gap(k - 1), gap(k));
        if g1 <= 0.0 {
            let theta = g0 / (g0 - g1);
            return Ok((a.t + theta * (b.t - a.t), a.r + theta * (b.r - a.r)));
        }
    }
    let t_end = if n > 0 { plus.points[n - 1].t } else { plus.t_start };
    Err(Error::NoIntersection { t_end })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftReport {
    pub max_drift: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `max |u(t, r̂(t)) - u(0, r0)|` against `sqrt(K (r0 - ε) / (c0 c1)) sqrt(ε)`.
pub fn u_drift_along(path: &CharacteristicPath, setup: &ProblemSetup, k_envelope: f64) -> DriftReport {
    let base = setup.initial_u(setup.r0());
    let max_drift = path.points.iter().map(|p| (p.u - base).abs()).fold(0.0, f64::max);
    let speed = setup.speed();
    let bound = (k_envelope * (setup.r0() - setup.eps()) / (speed.c0() * speed.c1())).sqrt() * setup.eps().sqrt();
    DriftReport {
        max_drift,
        bound,
        holds: max_drift <= bound,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignReport {
    pub min_c_prime: f64,
    pub threshold: f64,
    pub holds: bool,
}

/// `min c'(u)` along the path against `c'(u0) / 4`. Fails when `c'(u0) <= 0`.
pub fn c_prime_sign_along(path: &CharacteristicPath, setup: &ProblemSetup) -> SignReport {
    let speed = setup.speed();
    let min_c_prime = path.points.iter().map(|p| speed.c_prime(p.u)).fold(f64::INFINITY, f64::min);
    let threshold = speed.c_prime(setup.u0()) / 4.0;
    SignReport {
        min_c_prime,
        threshold,
        holds: threshold > 0.0 && min_c_prime >= threshold,
    }
}

/// Observer that launches paths on the initial state and advances them every step.
/// A path that leaves the domain stops there and records where.
#[derive(Debug, Clone, Default)]
pub struct PathTracer {
    starts: Vec<(Family, f64)>,
    pub paths: Vec<CharacteristicPath>,
    pub exits: Vec<Option<(f64, f64)>>,
}

impl PathTracer {
    pub fn new(starts: &[(Family, f64)]) -> Self {
        Self {
            starts: starts.to_vec(),
            paths: Vec::new(),
            exits: Vec::new(),
        }
    }
}

impl Observer for PathTracer {
    fn start(&mut self, ctx: &RunContext<'_>, initial: &GridState) {
        self.paths.clear();
        self.exits.clear();
        for &(family, r) in &self.starts {
            match CharacteristicPath::launch(family, ctx.grid, initial, r) {
                Ok(p) => {
                    self.paths.push(p);
                    self.exits.push(None);
                }
                Err(_) => {
                    self.paths.push(CharacteristicPath {
                        family,
                        t_start: initial.t,
                        r_start: r,
                        points: Vec::new(),
                    });
                    self.exits.push(Some((initial.t, r)));
                }
            }
        }
    }

    fn observe(&mut self, ctx: &RunContext<'_>, before: &GridState, after: &GridState) -> Flow {
        for (path, exit) in self.paths.iter_mut().zip(self.exits.iter_mut()) {
            if exit.is_some() {
                continue;
            }
            if let Err(Error::PathLeftDomain { t, r }) = path.advance(ctx.grid, ctx.setup.speed(), before, after) {
                *exit = Some((t, r));
            }
        }
        Flow::Continue
    }
}
