//! Wave-speed functions `c(u)` with derivatives and declared bounds.
//!
//! Every model carries two declared constants: a lower speed bound `c0` and
//! an upper bound `c1` that caps both `c` and `|c'|`. They are checked by
//! sampling when the model is built and are then used verbatim by the
//! blow-up constants, never replaced by sampled extremes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probe count used when a model is validated at construction.
pub const DEFAULT_PROBES: usize = 1 << 14;

/// Relative slack allowed when comparing sampled values to declared bounds.
pub const BOUNDS_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SpeedKind {
    /// `c(u)^2 = k1 sin^2 u + k3 cos^2 u`.
    OseenFrank { k1: f64, k3: f64 },
    Tabulated(MonotoneCubic),
    Constant { c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpeedSpec", into = "SpeedSpec")]
pub struct WaveSpeedModel {
    kind: SpeedKind,
    c0: f64,
    c1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub probes: usize,
    pub min_c: f64,
    pub max_c: f64,
    pub max_abs_c_prime: f64,
}

impl WaveSpeedModel {
    /// Builds a model and checks the declared bounds on [`DEFAULT_PROBES`] samples.
    pub fn new(kind: SpeedKind, c0: f64, c1: f64) -> Result<Self> {
        if !(c0.is_finite() && c1.is_finite() && c0 > 0.0 && c1 >= c0) {
            return Err(Error::InvalidSpeed(format!(
                "declared bounds must satisfy 0 < c0 <= c1, got c0 = {c0}, c1 = {c1}"
            )));
        }
        match &kind {
            SpeedKind::OseenFrank { k1, k3 } => {
                if !(*k1 > 0.0 && *k3 > 0.0 && k1.is_finite() && k3.is_finite()) {
                    return Err(Error::InvalidSpeed(format!(
                        "elastic constants must be positive, got k1 = {k1}, k3 = {k3}"
                    )));
                }
            }
            SpeedKind::Constant { c } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::InvalidSpeed(format!("constant speed must be positive, got {c}")));
                }
            }
            SpeedKind::Tabulated(_) => {}
        }
        let model = Self { kind, c0, c1 };
        model.validate_bounds(DEFAULT_PROBES)?;
        Ok(model)
    }

    pub fn oseen_frank(k1: f64, k3: f64, c0: f64, c1: f64) -> Result<Self> {
        Self::new(SpeedKind::OseenFrank { k1, k3 }, c0, c1)
    }

    /// Oseen-Frank speed with `c0 = sqrt(min(k1, k3))`, `c1 = max(sqrt(max(k1, k3)), max |c'|)`.
    pub fn oseen_frank_tight(k1: f64, k3: f64) -> Result<Self> {
        let c0 = k1.min(k3).sqrt();
        let c_max = k1.max(k3).sqrt();
        let probe = Self {
            kind: SpeedKind::OseenFrank { k1, k3 },
            c0,
            c1: c_max,
        };
        let slope = probe.sample(DEFAULT_PROBES).max_abs_c_prime;
        Self::oseen_frank(k1, k3, c0, c_max.max(slope))
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(SpeedKind::Constant { c }, c, c)
    }

    pub fn tabulated(knots: Vec<f64>, values: Vec<f64>, derivatives: Vec<f64>, c0: f64, c1: f64) -> Result<Self> {
        let table = MonotoneCubic::new(knots, values, derivatives)?;
        Self::new(SpeedKind::Tabulated(table), c0, c1)
    }

    pub fn kind(&self) -> &SpeedKind {
        &self.kind
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    #[inline]
    pub fn c(&self, u: f64) -> f64 {
        match &self.kind {
            SpeedKind::OseenFrank { k1, k3 } => {
                let (s, c) = u.sin_cos();
                (k1 * s * s + k3 * c * c).sqrt()
            }
            SpeedKind::Tabulated(t) => t.value(u),
            SpeedKind::Constant { c } => *c,
        }
    }

    #[inline]
    pub fn c_prime(&self, u: f64) -> f64 {
        match &self.kind {
            SpeedKind::OseenFrank { k1, k3 } => {
                let (s, c) = u.sin_cos();
                (k1 - k3) * s * c / (k1 * s * s + k3 * c * c).sqrt()
            }
            SpeedKind::Tabulated(t) => t.derivative(u),
            SpeedKind::Constant { .. } => 0.0,
        }
    }

    /// `(c(u), c'(u))` with one trig evaluation.
    #[inline]
    pub fn c_and_prime(&self, u: f64) -> (f64, f64) {
        match &self.kind {
            SpeedKind::OseenFrank { k1, k3 } => {
                let (s, co) = u.sin_cos();
                let c = (k1 * s * s + k3 * co * co).sqrt();
                (c, (k1 - k3) * s * co / c)
            }
            _ => (self.c(u), self.c_prime(u)),
        }
    }

    fn probe_range(&self) -> (f64, f64, bool) {
        match &self.kind {
            SpeedKind::Tabulated(t) => (t.knots[0], *t.knots.last().unwrap(), true),
            _ => (0.0, 2.0 * PI, false),
        }
    }

    fn sample(&self, probe_count: usize) -> BoundsReport {
        let (lo, hi, closed) = self.probe_range();
        // A period is sampled half-open; a table range includes both ends.
        let step = if closed {
            (hi - lo) / (probe_count - 1) as f64
        } else {
            (hi - lo) / probe_count as f64
        };
        let mut report = BoundsReport {
            probes: probe_count,
            min_c: f64::INFINITY,
            max_c: f64::NEG_INFINITY,
            max_abs_c_prime: 0.0,
        };
        for k in 0..probe_count {
            let u = lo + k as f64 * step;
            let (c, cp) = self.c_and_prime(u);
            report.min_c = report.min_c.min(c);
            report.max_c = report.max_c.max(c);
            report.max_abs_c_prime = report.max_abs_c_prime.max(cp.abs());
        }
        report
    }

    /// Samples `c` and `c'` and checks them against the declared `c0`, `c1`.
    pub fn validate_bounds(&self, probe_count: usize) -> Result<BoundsReport> {
        if probe_count < 2 {
            return Err(Error::InvalidSpeed(format!("probe_count must be >= 2, got {probe_count}")));
        }
        let report = self.sample(probe_count);
        let mut breaches = Vec::new();
        if report.min_c < self.c0 * (1.0 - BOUNDS_RTOL) {
            breaches.push(format!("min c = {} < c0 = {}", report.min_c, self.c0));
        }
        if report.max_c > self.c1 * (1.0 + BOUNDS_RTOL) {
            breaches.push(format!("max c = {} > c1 = {}", report.max_c, self.c1));
        }
        if report.max_abs_c_prime > self.c1 * (1.0 + BOUNDS_RTOL) {
            breaches.push(format!("max |c'| = {} > c1 = {}", report.max_abs_c_prime, self.c1));
        }
        if breaches.is_empty() {
            Ok(report)
        } else {
            Err(Error::BoundsViolation(breaches.join("; ")))
        }
    }
}

/// Piecewise cubic Hermite interpolant whose slopes are limited so that each
/// interval is monotone. Values therefore stay inside the hull of the table.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Derivatives as supplied.
    raw_slopes: Vec<f64>,
    /// Limited derivatives used for evaluation.
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, derivatives: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 2 || values.len() != n || derivatives.len() != n {
            return Err(Error::InvalidSpeed(
                "tabulated speed needs >= 2 knots with matching values and derivatives".into(),
            ));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSpeed("tabulated knots must be strictly increasing".into()));
        }
        if knots.iter().chain(&values).chain(&derivatives).any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpeed("tabulated data must be finite".into()));
        }
        let mut slopes = derivatives.clone();
        for i in 0..n - 1 {
            let secant = (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]);
            if secant == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            // Fritsch-Carlson: slopes must share the secant's sign and
            // (alpha, beta) must lie in the disc of radius 3.
            for j in [i, i + 1] {
                if slopes[j] * secant < 0.0 {
                    slopes[j] = 0.0;
                }
            }
            let a = slopes[i] / secant;
            let b = slopes[i + 1] / secant;
            let norm = a.hypot(b);
            if norm > 3.0 {
                let tau = 3.0 / norm;
                slopes[i] = tau * a * secant;
                slopes[i + 1] = tau * b * secant;
            }
        }
        Ok(Self {
            knots,
            values,
            raw_slopes: derivatives,
            slopes,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn locate(&self, x: f64) -> Option<(usize, f64, f64)> {
        let n = self.knots.len();
        if x <= self.knots[0] || x >= self.knots[n - 1] {
            return None;
        }
        let i = self.knots.partition_point(|&k| k <= x) - 1;
        let h = self.knots[i + 1] - self.knots[i];
        Some((i, h, (x - self.knots[i]) / h))
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.locate(x) {
            None if x <= self.knots[0] => self.values[0],
            None => *self.values.last().unwrap(),
            Some((i, h, s)) => {
                let s2 = s * s;
                let s3 = s2 * s;
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                h00 * self.values[i] + h10 * h * self.slopes[i] + h01 * self.values[i + 1] + h11 * h * self.slopes[i + 1]
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self.locate(x) {
            // Constant extension outside the table.
            None => {
                let n = self.knots.len();
                if x == self.knots[0] {
                    self.slopes[0]
                } else if x == self.knots[n - 1] {
                    self.slopes[n - 1]
                } else {
                    0.0
                }
            }
            Some((i, h, s)) => {
                let s2 = s * s;
                let d00 = 6.0 * s2 - 6.0 * s;
                let d10 = 3.0 * s2 - 4.0 * s + 1.0;
                let d01 = -6.0 * s2 + 6.0 * s;
                let d11 = 3.0 * s2 - 2.0 * s;
                (d00 * self.values[i] + d01 * self.values[i + 1]) / h + d10 * self.slopes[i] + d11 * self.slopes[i + 1]
            }
        }
    }
}

/// Serialized form: `{"kind": "oseen_frank", "k1": .., "k3": .., "c0": .., "c1": ..}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeedSpec {
    #[serde(flatten)]
    pub kind: SpeedKindSpec,
    pub c0: f64,
    pub c1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpeedKindSpec {
    OseenFrank { k1: f64, k3: f64 },
    Tabulated { knots: Vec<f64>, values: Vec<f64>, derivatives: Vec<f64> },
    Constant { c: f64 },
}

impl TryFrom<SpeedSpec> for WaveSpeedModel {
    type Error = Error;

    fn try_from(spec: SpeedSpec) -> Result<Self> {
        let kind = match spec.kind {
            SpeedKindSpec::OseenFrank { k1, k3 } => SpeedKind::OseenFrank { k1, k3 },
            SpeedKindSpec::Tabulated { knots, values, derivatives } => {
                SpeedKind::Tabulated(MonotoneCubic::new(knots, values, derivatives)?)
            }
            SpeedKindSpec::Constant { c } => SpeedKind::Constant { c },
        };
        WaveSpeedModel::new(kind, spec.c0, spec.c1)
    }
}

impl From<WaveSpeedModel> for SpeedSpec {
    fn from(model: WaveSpeedModel) -> Self {
        let kind = match model.kind {
            SpeedKind::OseenFrank { k1, k3 } => SpeedKindSpec::OseenFrank { k1, k3 },
            SpeedKind::Tabulated(t) => SpeedKindSpec::Tabulated {
                knots: t.knots,
                values: t.values,
                derivatives: t.raw_slopes,
            },
            SpeedKind::Constant { c } => SpeedKindSpec::Constant { c },
        };
        SpeedSpec {
            kind,
            c0: model.c0,
            c1: model.c1,
        }
    }
}
