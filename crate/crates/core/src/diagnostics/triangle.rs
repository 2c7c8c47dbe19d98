//! Energy balance on the characteristic triangle cut out by a plus path from
//! `(0, r1)`, a minus path from `(0, r2)` and the initial segment.
//!
//! For smooth solutions the `R^2` flux through the plus side plus the `S^2`
//! flux through the minus side equals half the initial energy on `[r1, r2]`.

use serde::Serialize;

use crate::characteristics::{find_intersection, CharacteristicPath, Family, PathTracer};
use crate::error::{Error, Result};
use crate::initial::ProblemSetup;
use crate::riemann::energy_density;
use crate::solver::{Flow, Grid, GridState, Observer, RunContext, SchemeConfig, Solver};

use super::energy::trapezoid_between;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleReport {
    pub r1: f64,
    pub r2: f64,
    pub t_m: f64,
    pub r_m: f64,
    /// `∫_{r1}^{r_m} R^2` along the plus side.
    pub plus_side: f64,
    /// `∫_{r_m}^{r2} S^2` along the minus side.
    pub minus_side: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    #[serde(skip)]
    pub plus_path: CharacteristicPath,
    #[serde(skip)]
    pub minus_path: CharacteristicPath,
}

/// Traces both sides and stops the run once they have crossed.
struct TriangleTracer {
    inner: PathTracer,
}

impl Observer for TriangleTracer {
    fn start(&mut self, ctx: &RunContext<'_>, initial: &GridState) {
        self.inner.start(ctx, initial);
    }

    fn observe(&mut self, ctx: &RunContext<'_>, before: &GridState, after: &GridState) -> Flow {
        self.inner.observe(ctx, before, after);
        let (p, m) = (&self.inner.paths[0], &self.inner.paths[1]);
        let crossed = match (p.points.last(), m.points.last()) {
            (Some(a), Some(b)) => b.r <= a.r,
            _ => false,
        };
        if crossed || self.inner.exits.iter().any(Option::is_some) {
            Flow::Stop
        } else {
            Flow::Continue
        }
    }
}

/// Integral of `value^2 |dr|` along `path` up to the crossing time `t_m`.
fn side_integral(path: &CharacteristicPath, t_m: f64, value: impl Fn(&crate::characteristics::PathSample) -> f64) -> f64 {
    let mut acc = 0.0;
    for w in path.points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.t >= t_m {
            break;
        }
        let (va, vb) = (value(a).powi(2), value(b).powi(2));
        if b.t <= t_m {
            acc += 0.5 * (va + vb) * (b.r - a.r).abs();
        } else {
            let theta = (t_m - a.t) / (b.t - a.t);
            let v_m = value(a) + theta * (value(b) - value(a));
            acc += 0.5 * (va + v_m * v_m) * (theta * (b.r - a.r)).abs();
            break;
        }
    }
    acc
}

pub fn triangle_identity(setup: &ProblemSetup, grid: &Grid, cfg: SchemeConfig, r1: f64, r2: f64) -> Result<TriangleReport> {
    if !(r1 > 0.0 && r2 > r1) {
        return Err(Error::HypothesisViolated(format!("need 0 < r1 < r2, got r1 = {r1}, r2 = {r2}")));
    }
    let speed = setup.speed();
    let width_cap = 2.0 * speed.c0() * (setup.r0() - setup.eps()) / speed.c1();
    if !(r2 - r1 < width_cap) {
        return Err(Error::HypothesisViolated(format!(
            "r2 - r1 = {} must be below 2 c0 (r0 - eps) / c1 = {width_cap}",
            r2 - r1
        )));
    }
    let mut solver = Solver::new(setup, grid, cfg)?;
    let initial = solver.init_state();
    let mut tracer = TriangleTracer {
        inner: PathTracer::new(&[(Family::Plus, r1), (Family::Minus, r2)]),
    };
    solver.run(&mut [&mut tracer])?;
    let plus_path = tracer.inner.paths.swap_remove(0);
    let minus_path = tracer.inner.paths.swap_remove(0);
    let (t_m, r_m) = find_intersection(&plus_path, &minus_path)?;

    let plus_side = side_integral(&plus_path, t_m, |p| p.big_r);
    let minus_side = side_integral(&minus_path, t_m, |p| p.big_s);
    let density: Vec<f64> = initial
        .big_r
        .iter()
        .zip(&initial.big_s)
        .map(|(&a, &b)| energy_density(a, b))
        .collect();
    let rhs = 0.5 * trapezoid_between(grid, &density, r1, r2);
    let lhs = plus_side + minus_side;
    let residual = (lhs - rhs).abs() / rhs.max(f64::MIN_POSITIVE);
    Ok(TriangleReport {
        r1,
        r2,
        t_m,
        r_m,
        plus_side,
        minus_side,
        lhs,
        rhs,
        residual,
        plus_path,
        minus_path,
    })
}
