use serde::Serialize;

use crate::riemann::energy_density;
use crate::solver::{Flow, Grid, GridState, Observer, RunContext};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySample {
    pub t: f64,
    pub energy: f64,
    /// `c (S^2 - R^2)` at the left and right grid ends.
    pub flux_lo: f64,
    pub flux_hi: f64,
}

/// Trapezoid rule for `∫ (R^2 + S^2) dr` over the whole grid.
pub fn energy(state: &GridState, grid: &Grid) -> f64 {
    let n = grid.len();
    let dens = |i: usize| energy_density(state.big_r[i], state.big_s[i]);
    let interior: f64 = (1..n - 1).map(dens).sum();
    grid.h() * (0.5 * (dens(0) + dens(n - 1)) + interior)
}

/// Trapezoid rule for nodal `density` on `[a, b]`, with the density taken
/// piecewise linear between nodes so that partial end cells are exact.
pub fn trapezoid_between(grid: &Grid, density: &[f64], a: f64, b: f64) -> f64 {
    let (a, b) = (a.max(grid.lo()), b.min(grid.hi()));
    if !(b > a) {
        return 0.0;
    }
    let (ia, _) = grid.locate(a).expect("clamped into grid");
    let (ib, _) = grid.locate(b).expect("clamped into grid");
    let r = grid.r();
    let fa = grid.interp(density, a).unwrap();
    let fb = grid.interp(density, b).unwrap();
    if ia == ib {
        return 0.5 * (fa + fb) * (b - a);
    }
    // [a, r_{ia+1}], full cells, [r_ib, b]
    let mut acc = 0.5 * (fa + density[ia + 1]) * (r[ia + 1] - a);
    for i in ia + 1..ib {
        acc += 0.5 * (density[i] + density[i + 1]) * (r[i + 1] - r[i]);
    }
    acc + 0.5 * (density[ib] + fb) * (b - r[ib])
}

#[derive(Debug, Clone, Default)]
pub struct EnergyObserver {
    pub samples: Vec<EnergySample>,
}

impl EnergyObserver {
    pub fn new() -> Self {
        Self::default()
    }

    fn record(&mut self, ctx: &RunContext<'_>, st: &GridState) {
        let n = st.u.len();
        let speed = ctx.setup.speed();
        let flux = |i: usize| speed.c(st.u[i]) * (st.big_s[i].powi(2) - st.big_r[i].powi(2));
        self.samples.push(EnergySample {
            t: st.t,
            energy: energy(st, ctx.grid),
            flux_lo: flux(0),
            flux_hi: flux(n - 1),
        });
    }

    pub fn initial(&self) -> Option<f64> {
        self.samples.first().map(|s| s.energy)
    }

    /// `max |E(t) - E(0)| / E(0)` over samples with `t <= t_max`.
    pub fn max_relative_drift(&self, t_max: f64) -> f64 {
        let Some(e0) = self.initial() else { return 0.0 };
        if e0 == 0.0 {
            return 0.0;
        }
        self.samples
            .iter()
            .take_while(|s| s.t <= t_max)
            .map(|s| (s.energy - e0).abs() / e0)
            .fold(0.0, f64::max)
    }

    /// `|E(t) - E(0)| / E(0)` at the last sample with `t <= t_max`.
    pub fn relative_drift_at(&self, t_max: f64) -> f64 {
        let Some(e0) = self.initial() else { return 0.0 };
        if e0 == 0.0 {
            return 0.0;
        }
        let last = self.samples.iter().take_while(|s| s.t <= t_max).last().unwrap();
        (last.energy - e0).abs() / e0
    }
}

impl Observer for EnergyObserver {
    fn start(&mut self, ctx: &RunContext<'_>, initial: &GridState) {
        self.samples.clear();
        self.record(ctx, initial);
    }

    fn observe(&mut self, ctx: &RunContext<'_>, _before: &GridState, after: &GridState) -> Flow {
        self.record(ctx, after);
        Flow::Continue
    }
}
