//! Blow-up monitoring along the plus characteristic launched from `(0, r0)`.

use serde::Serialize;

use crate::characteristics::{CharacteristicPath, Family};
use crate::error::Error;
use crate::initial::ProblemSetup;
use crate::solver::{Flow, GridState, Observer, RunContext, RunResult, StopReason};

use super::TheoremConstants;

/// Required share of samples satisfying the discrete `d(1/S)/dt` inequality.
pub const INEQUALITY_FRACTION: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvSSample {
    pub t: f64,
    pub r: f64,
    pub s: f64,
    /// `1/S`, `None` when `S <= 0`.
    pub inv_s: Option<f64>,
}

/// Observer tracing the hat characteristic and the reciprocal of `S` along it.
#[derive(Debug, Clone)]
pub struct HatMonitor {
    path: Option<CharacteristicPath>,
    pub exit: Option<(f64, f64)>,
    pub trace: Vec<InvSSample>,
    /// One entry per consecutive pair with `S > 0` at both ends.
    pub inequality: Vec<bool>,
    rate: f64,
    quad_coeff: f64,
    lin_coeff: f64,
}

impl HatMonitor {
    pub fn new(setup: &ProblemSetup) -> Self {
        let speed = setup.speed();
        let (c0, c1) = (speed.c0(), speed.c1());
        let (r0, alpha) = (setup.r0(), setup.alpha());
        Self {
            path: None,
            exit: None,
            trace: Vec::new(),
            inequality: Vec::new(),
            rate: speed.c_prime(setup.u0()) / (16.0 * c1 * (2.0 * r0).powf(alpha)),
            quad_coeff: c1 / (4.0 * c0 * r0.powf(alpha)),
            lin_coeff: alpha * c1 / r0,
        }
    }

    pub fn path(&self) -> Option<&CharacteristicPath> {
        self.path.as_ref()
    }

    fn push(&mut self, t: f64, r: f64, s: f64) {
        self.trace.push(InvSSample {
            t,
            r,
            s,
            inv_s: (s > 0.0).then(|| 1.0 / s),
        });
    }

    /// Upper bound for `d(1/S)/dt` given the current `S` and `R` on the curve.
    pub fn inequality_rhs(&self, s: f64, big_r: f64) -> f64 {
        -self.rate + (self.quad_coeff * big_r * big_r + self.lin_coeff * big_r.abs()) / (s * s)
    }
}

impl Observer for HatMonitor {
    fn start(&mut self, ctx: &RunContext<'_>, initial: &GridState) {
        self.trace.clear();
        self.inequality.clear();
        self.exit = None;
        let r0 = ctx.setup.r0();
        match CharacteristicPath::launch(Family::Plus, ctx.grid, initial, r0) {
            Ok(p) => {
                let first = *p.last();
                self.path = Some(p);
                self.push(first.t, first.r, first.big_s);
            }
            Err(_) => self.exit = Some((initial.t, r0)),
        }
    }

    fn observe(&mut self, ctx: &RunContext<'_>, before: &GridState, after: &GridState) -> Flow {
        if self.exit.is_some() {
            return Flow::Continue;
        }
        let Some(path) = self.path.as_mut() else { return Flow::Continue };
        let prev = *path.last();
        match path.advance(ctx.grid, ctx.setup.speed(), before, after) {
            Ok(()) => {}
            Err(Error::PathLeftDomain { t, r }) => {
                self.exit = Some((t, r));
                return Flow::Continue;
            }
            Err(_) => return Flow::Continue,
        }
        let next = *path.last();
        if prev.big_s > 0.0 && next.big_s > 0.0 {
            let lhs = (1.0 / next.big_s - 1.0 / prev.big_s) / (next.t - prev.t);
            self.inequality.push(lhs <= self.inequality_rhs(prev.big_s, prev.big_r));
        }
        self.push(next.t, next.r, next.big_s);
        Flow::Continue
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    pub detected: bool,
    pub t_detect: Option<f64>,
    pub r_detect: Option<f64>,
    pub stop: StopReason,
    pub t_end: f64,
    pub max_gradient_growth: f64,
    /// `(t, 1/S)` along the hat path, samples with `S > 0` only.
    pub inv_s_trace: Vec<(f64, f64)>,
    pub t_star_extrapolated: Option<f64>,
    /// Time and value of the smallest `1/S`, the end of the fitted tail.
    pub inv_s_min: Option<(f64, f64)>,
    pub nonpositive_s_samples: usize,
    pub inequality_fraction: f64,
    pub inequality_ok: bool,
    /// `S > 1` at every hat sample after the first.
    pub s_above_one: bool,
    /// Share of non-increasing `1/S` steps over the final quarter of the trace.
    pub monotone_tail_fraction: f64,
    pub hat_exit: Option<(f64, f64)>,
}

/// Least-squares line through `pts`; returns `(slope, intercept)`.
fn fit_line(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mt))
}

/// Zero of the line fitted to the last quarter of `1/S` up to its minimum.
fn extrapolate_zero(trace: &[(f64, f64)]) -> (Option<f64>, Option<(f64, f64)>) {
    let Some(argmin) = trace
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
    else {
        return (None, None);
    };
    let window = &trace[..=argmin];
    let tail = (window.len() / 4).max(2).min(window.len());
    let fit = fit_line(&window[window.len() - tail..]);
    let t_star = fit.and_then(|(a, b)| (a < 0.0).then(|| -b / a));
    (t_star, Some(trace[argmin]))
}

pub fn blowup_report(run: &RunResult, hat: &HatMonitor) -> BlowupReport {
    let (detected, t_detect, r_detect) = match run.stop {
        StopReason::GradientCeiling { t, r } => (true, Some(t), Some(r)),
        _ => (false, None, None),
    };
    let inv_s_trace: Vec<(f64, f64)> = hat.trace.iter().filter_map(|s| s.inv_s.map(|v| (s.t, v))).collect();
    let (t_star_extrapolated, inv_s_min) = extrapolate_zero(&inv_s_trace);
    let nonpositive_s_samples = hat.trace.iter().filter(|s| s.inv_s.is_none()).count();
    let inequality_fraction = if hat.inequality.is_empty() {
        0.0
    } else {
        hat.inequality.iter().filter(|&&ok| ok).count() as f64 / hat.inequality.len() as f64
    };
    let s_above_one = hat.trace.len() > 1 && hat.trace.iter().skip(1).all(|s| s.s > 1.0);
    let q = inv_s_trace.len() / 4;
    let tail = &inv_s_trace[inv_s_trace.len() - q.max(2).min(inv_s_trace.len())..];
    let monotone_tail_fraction = if tail.len() < 2 {
        0.0
    } else {
        tail.windows(2).filter(|w| w[1].1 <= w[0].1).count() as f64 / (tail.len() - 1) as f64
    };
    BlowupReport {
        detected,
        t_detect,
        r_detect,
        stop: run.stop,
        t_end: run.final_state.t,
        max_gradient_growth: run.max_gradient_growth(),
        inv_s_trace,
        t_star_extrapolated,
        inv_s_min,
        nonpositive_s_samples,
        inequality_fraction,
        inequality_ok: !hat.inequality.is_empty() && inequality_fraction >= INEQUALITY_FRACTION,
        s_above_one,
        monotone_tail_fraction,
        hat_exit: hat.exit,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    /// Ceiling crossed before `t_final`.
    Pass,
    /// Ran to `t_final` without crossing the ceiling.
    FailAsExpected,
    /// Stopped by the step budget or an observer before either event.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerdictReport {
    pub verdict: Verdict,
    /// Whether the extrapolated `t*` is below `(r0 - ε)/(2 c1) + r0/(4 c1)`.
    #[serde(rename = "t_star_within_paper_bound")]
    pub t_star_within_bound: Option<bool>,
    /// Whether `ε < eps0`, i.e. the data lie in the regime the constants cover.
    pub eps_below_eps0: bool,
}

impl Verdict {
    /// Verdict from the run outcome alone.
    pub fn classify(report: &BlowupReport, t_final: f64) -> Self {
        match (report.t_detect, report.stop) {
            (Some(t), _) if t < t_final => Verdict::Pass,
            (_, StopReason::MaxSteps | StopReason::Observer) => Verdict::Inconclusive,
            _ => Verdict::FailAsExpected,
        }
    }
}

pub fn blowup_verdict(report: &BlowupReport, constants: &TheoremConstants, setup: &ProblemSetup) -> VerdictReport {
    VerdictReport {
        verdict: Verdict::classify(report, setup.t_final()),
        t_star_within_bound: report.t_star_extrapolated.map(|t| t < constants.t_star_bound),
        eps_below_eps0: constants.eps_below_threshold(setup),
    }
}
