use serde::Serialize;

use crate::error::{Error, Result};
use crate::initial::ProblemSetup;
use crate::riemann::energy_density;

/// Intervals used for the measured initial energy.
const ENERGY_QUAD_INTERVALS: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub struct TheoremConstants {
    #[serde(rename = "K_measured")]
    pub k_measured: f64,
    /// `[ε^2 + (2 c1 + ε)^2] ((r0 + ε)/r0)^{2α} ∫ phi'^2`. Used for `M` and `eps0`.
    #[serde(rename = "K_envelope")]
    pub k_envelope: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub eps0: f64,
    #[serde(rename = "S0_lower")]
    pub s0_lower: f64,
    pub t_star_bound: f64,
    /// Stand-in for the non-constructive smallness constant of the sign step.
    pub eps_prime_proxy: f64,
    pub c_prime_u0: f64,
    /// Initial energy measured by quadrature on the bump support.
    pub initial_energy: f64,
}

impl TheoremConstants {
    /// `K_envelope r0^{2α} ε`, the bound on the initial energy.
    pub fn energy_bound(&self, setup: &ProblemSetup) -> f64 {
        self.k_envelope * setup.r0().powf(2.0 * setup.alpha()) * setup.eps()
    }

    pub fn eps_below_threshold(&self, setup: &ProblemSetup) -> bool {
        setup.eps() < self.eps0
    }
}

pub fn compute_constants(setup: &ProblemSetup) -> Result<TheoremConstants> {
    let speed = setup.speed();
    let (c0, c1) = (speed.c0(), speed.c1());
    let (r0, eps, alpha) = (setup.r0(), setup.eps(), setup.alpha());
    let c_prime_u0 = speed.c_prime(setup.u0());
    if !(c_prime_u0 > 0.0) {
        return Err(Error::HypothesisViolated(format!("c'(u0) = {c_prime_u0} must be positive")));
    }
    if !(eps < c0.min(r0 / 2.0)) {
        return Err(Error::HypothesisViolated(format!("eps = {eps} must be below min(c0, r0/2)")));
    }

    let r0_2a = r0.powf(2.0 * alpha);
    let initial_energy = support_energy(setup);
    let k_measured = initial_energy / (r0_2a * eps);
    let k_envelope = (eps * eps + (2.0 * c1 + eps).powi(2))
        * ((r0 + eps) / r0).powf(2.0 * alpha)
        * setup.profile().slope_energy();

    let r0_a = r0.powf(alpha);
    let m = k_envelope * c1 * r0_a * r0.sqrt() / (4.0 * c0 * c0) + alpha * (k_envelope * c1).sqrt() * r0_a / (r0 * c0).sqrt();

    let two_r0_a = (2.0 * r0).powf(alpha);
    let eps_prime_proxy = r0 / 2.0;
    let sqrt_eps0 = [
        r0 * c_prime_u0 / (64.0 * m * c1 * c1 * two_r0_a),
        1.0 / (2.0 * m),
        eps_prime_proxy.sqrt(),
        (r0 / 2.0).sqrt(),
        c0.sqrt(),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);

    let s0_lower = (32.0 * c1 * c1 * two_r0_a / ((r0 - eps) * c_prime_u0)).max(2.0);
    let t_star_bound = (r0 - eps) / (2.0 * c1) + r0 / (4.0 * c1);

    Ok(TheoremConstants {
        k_measured,
        k_envelope,
        m,
        eps0: sqrt_eps0 * sqrt_eps0,
        s0_lower,
        t_star_bound,
        eps_prime_proxy,
        c_prime_u0,
        initial_energy,
    })
}

/// Trapezoid rule for `∫ (R^2 + S^2)(0, r) dr` over `[r0 - ε, r0 + ε]`.
fn support_energy(setup: &ProblemSetup) -> f64 {
    let (a, b) = (setup.r0() - setup.eps(), setup.r0() + setup.eps());
    let n = ENERGY_QUAD_INTERVALS;
    let h = (b - a) / n as f64;
    let f = |r: f64| {
        let (x, y) = setup.initial_riemann(r);
        energy_density(x, y)
    };
    let interior: f64 = (1..n).map(|k| f(a + k as f64 * h)).sum();
    h * (0.5 * (f(a) + f(b)) + interior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::{BumpProfile, DomainChoice, SetupParams};
    use crate::speed::WaveSpeedModel;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    fn lc() -> WaveSpeedModel {
        WaveSpeedModel::oseen_frank(2.0, 1.0, 1.0, SQRT_2).unwrap()
    }

    #[test]
    fn zero_amplitude_gives_zero_measured_k() {
        let setup = ProblemSetup::new(SetupParams {
            d: 3,
            r0: 1.0,
            eps: 0.1,
            u0: FRAC_PI_4,
            speed: lc(),
            profile: BumpProfile::polynomial(0.0).unwrap(),
            domain: DomainChoice::Auto,
        })
        .unwrap();
        let k = compute_constants(&setup).unwrap();
        assert_eq!(k.k_measured, 0.0);
        assert_eq!(k.k_envelope, 0.0);
    }

    #[test]
    fn flat_speed_violates_hypothesis() {
        let setup = ProblemSetup::new(SetupParams {
            d: 3,
            r0: 1.0,
            eps: 0.1,
            u0: 0.0,
            speed: WaveSpeedModel::constant(1.0).unwrap(),
            profile: BumpProfile::polynomial(1.0).unwrap(),
            domain: DomainChoice::Auto,
        })
        .unwrap();
        assert!(matches!(compute_constants(&setup), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn measured_k_below_envelope() {
        for eps in [0.02, 0.05, 0.1, 0.3] {
            let setup = ProblemSetup::theorem(3, 1.0, eps, FRAC_PI_4, lc()).unwrap();
            let k = compute_constants(&setup).unwrap();
            assert!(k.k_measured > 0.0 && k.k_measured <= k.k_envelope, "eps = {eps}");
            assert!(k.t_star_bound < setup.t_final());
            assert!(k.eps0 > 0.0 && k.eps0 < eps);
        }
    }
}
