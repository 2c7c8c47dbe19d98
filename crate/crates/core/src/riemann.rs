//! Weighted Riemann variables `R = r^α (u_t + c u_r)`, `S = r^α (u_t - c u_r)`
//! and the right-hand sides of their transport equations
//!
//! ```text
//! R_t - c R_r = c'/(4 c r^α) (R^2 - S^2) - α c S / r
//! S_t + c S_r = c'/(4 c r^α) (S^2 - R^2) + α c R / r
//! ```

use serde::Serialize;

use crate::speed::WaveSpeedModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiemannPoint {
    pub radius: f64,
    pub u: f64,
    pub big_r: f64,
    pub big_s: f64,
}

/// `r^α`, exact 1 for `α = 0`.
#[inline]
pub fn weight(r: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        1.0
    } else if alpha == 1.0 {
        r
    } else {
        (alpha * r.ln()).exp()
    }
}

pub fn to_riemann(r: f64, u: f64, u_t: f64, u_r: f64, alpha: f64, speed: &WaveSpeedModel) -> (f64, f64) {
    let w = weight(r, alpha);
    let cu = speed.c(u) * u_r;
    (w * (u_t + cu), w * (u_t - cu))
}

/// Inverse change of variables, returns `(u_t, u_r)`.
pub fn from_riemann(p: &RiemannPoint, alpha: f64, speed: &WaveSpeedModel) -> (f64, f64) {
    let w2 = 2.0 * weight(p.radius, alpha);
    ((p.big_r + p.big_s) / w2, (p.big_r - p.big_s) / (w2 * speed.c(p.u)))
}

/// Sources `(f_R, f_S)` from precomputed speed data at one point.
#[inline]
pub fn sources(c: f64, c_prime: f64, w: f64, inv_r: f64, alpha: f64, big_r: f64, big_s: f64) -> (f64, f64) {
    let quad = c_prime / (4.0 * c * w) * (big_r * big_r - big_s * big_s);
    let geo = alpha * c * inv_r;
    (quad - geo * big_s, -quad + geo * big_r)
}

pub fn rhs(p: &RiemannPoint, alpha: f64, speed: &WaveSpeedModel) -> (f64, f64) {
    let (c, cp) = speed.c_and_prime(p.u);
    sources(c, cp, weight(p.radius, alpha), 1.0 / p.radius, alpha, p.big_r, p.big_s)
}

/// Energy density `R^2 + S^2`.
#[inline]
pub fn energy_density(big_r: f64, big_s: f64) -> f64 {
    big_r * big_r + big_s * big_s
}
