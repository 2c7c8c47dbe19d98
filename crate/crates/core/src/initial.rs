//! Initial data: the compactly supported bump, the problem setup, and the
//! pointwise initial fields in both primitive and Riemann form.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::riemann;
use crate::speed::WaveSpeedModel;

/// Closed-form `∫_{-1}^{1} [(1 - z^2)(1 - 5 z^2)]^2 dz`.
pub const POLY_SLOPE_ENERGY: f64 = 256.0 / 315.0;

/// Auto-domain right margin and left floor, as fractions of `r0`.
pub const AUTO_MARGIN: f64 = 0.05;
pub const AUTO_LEFT_FLOOR: f64 = 0.02;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ProfileForm {
    /// `phi(z) = -A z (1 - z^2)^2` on `(-1, 1)`.
    Polynomial,
    /// User profile; values outside `(-1, 1)` are ignored and taken as zero.
    Custom { phi: ScalarFn, phi_prime: ScalarFn },
}

impl fmt::Debug for ProfileForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileForm::Polynomial => f.write_str("Polynomial"),
            ProfileForm::Custom { .. } => f.write_str("Custom"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BumpProfile {
    amplitude: f64,
    form: ProfileForm,
}

impl BumpProfile {
    pub fn polynomial(amplitude: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidSetup(format!("bump amplitude must be >= 0, got {amplitude}")));
        }
        Ok(Self {
            amplitude,
            form: ProfileForm::Polynomial,
        })
    }

    /// Custom profile. The amplitude is read off as `-phi'(0)`.
    pub fn custom<F, G>(phi: F, phi_prime: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let amplitude = -phi_prime(0.0);
        Self {
            amplitude,
            form: ProfileForm::Custom {
                phi: Arc::new(phi),
                phi_prime: Arc::new(phi_prime),
            },
        }
    }

    /// `phi(z) = -A z b(z)` with the C∞ bump `b(z) = exp(1 - 1/(1 - z^2))`.
    pub fn smooth(amplitude: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidSetup(format!("bump amplitude must be >= 0, got {amplitude}")));
        }
        let b = |z: f64| if z.abs() < 1.0 { (1.0 - 1.0 / (1.0 - z * z)).exp() } else { 0.0 };
        Ok(Self::custom(
            move |z| -amplitude * z * b(z),
            move |z| {
                let (w, bz) = (1.0 - z * z, b(z));
                if bz == 0.0 {
                    return 0.0;
                }
                -amplitude * bz * (1.0 - 2.0 * z * z / (w * w))
            },
        ))
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn form(&self) -> &ProfileForm {
        &self.form
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self.form, ProfileForm::Polynomial)
    }

    pub fn phi(&self, z: f64) -> f64 {
        if z.abs() >= 1.0 {
            return 0.0;
        }
        match &self.form {
            ProfileForm::Polynomial => {
                let w = 1.0 - z * z;
                -self.amplitude * z * w * w
            }
            ProfileForm::Custom { phi, .. } => phi(z),
        }
    }

    pub fn phi_prime(&self, z: f64) -> f64 {
        if z.abs() >= 1.0 {
            return 0.0;
        }
        match &self.form {
            ProfileForm::Polynomial => {
                let z2 = z * z;
                -self.amplitude * (1.0 - z2) * (1.0 - 5.0 * z2)
            }
            ProfileForm::Custom { phi_prime, .. } => phi_prime(z),
        }
    }

    /// `∫_{-1}^{1} phi'(z)^2 dz`, closed form for the polynomial bump.
    pub fn slope_energy(&self) -> f64 {
        match self.form {
            ProfileForm::Polynomial => self.amplitude * self.amplitude * POLY_SLOPE_ENERGY,
            ProfileForm::Custom { .. } => {
                // Composite Simpson.
                let n = 20_000;
                let h = 2.0 / n as f64;
                let f = |z: f64| self.phi_prime(z).powi(2);
                let mut acc = f(-1.0) + f(1.0);
                for k in 1..n {
                    let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                    acc += w * f(-1.0 + k as f64 * h);
                }
                acc * h / 3.0
            }
        }
    }
}

/// Bump whose slope at the centre is exactly the blow-up threshold:
/// `A = 2 max{32 c1^2 2^α / (r0 c0 c'(u0)), 1 / (c0 r0^α)}`.
pub fn make_theorem_profile(d: u32, r0: f64, u0: f64, speed: &WaveSpeedModel) -> Result<BumpProfile> {
    let c_prime = speed.c_prime(u0);
    if !(c_prime > 0.0) {
        return Err(Error::SpeedNotIncreasing { c_prime });
    }
    if !(r0 > 0.0) {
        return Err(Error::InvalidSetup(format!("r0 must be positive, got {r0}")));
    }
    let alpha = alpha_of(d);
    let (c0, c1) = (speed.c0(), speed.c1());
    let slope_term = 32.0 * c1 * c1 * 2f64.powf(alpha) / (r0 * c0 * c_prime);
    let size_term = 1.0 / (c0 * r0.powf(alpha));
    BumpProfile::polynomial(2.0 * slope_term.max(size_term))
}

pub fn alpha_of(d: u32) -> f64 {
    (d as f64 - 1.0) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DomainChoice {
    #[default]
    Auto,
    Explicit(Domain),
}

#[derive(Debug, Clone)]
pub struct SetupParams {
    pub d: u32,
    pub r0: f64,
    pub eps: f64,
    pub u0: f64,
    pub speed: WaveSpeedModel,
    pub profile: BumpProfile,
    pub domain: DomainChoice,
}

#[derive(Debug, Clone)]
pub struct ProblemSetup {
    d: u32,
    alpha: f64,
    r0: f64,
    eps: f64,
    u0: f64,
    speed: WaveSpeedModel,
    profile: BumpProfile,
    t_final: f64,
    domain: Domain,
}

impl ProblemSetup {
    pub fn new(params: SetupParams) -> Result<Self> {
        let SetupParams {
            d,
            r0,
            eps,
            u0,
            speed,
            profile,
            domain,
        } = params;
        if d < 1 {
            return Err(Error::InvalidSetup("dimension must be >= 1".into()));
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::InvalidSetup(format!("r0 must be positive, got {r0}")));
        }
        if !u0.is_finite() {
            return Err(Error::InvalidSetup("u0 must be finite".into()));
        }
        let eps_cap = speed.c0().min(r0 / 2.0);
        if !(eps > 0.0 && eps < eps_cap) {
            return Err(Error::InvalidSetup(format!(
                "eps must satisfy 0 < eps < min(c0, r0/2) = {eps_cap}, got {eps}"
            )));
        }
        let c1 = speed.c1();
        let t_final = (r0 - eps) / c1;
        let reach = c1 * t_final;
        let domain = match domain {
            DomainChoice::Auto => {
                let margin = AUTO_MARGIN * r0;
                // r0 - eps - c1 t_final is 0, so the left edge is a floor.
                let lo = (r0 - eps - reach - margin).max(AUTO_LEFT_FLOOR * r0);
                Domain {
                    lo,
                    hi: r0 + eps + reach + margin,
                }
            }
            DomainChoice::Explicit(dom) => {
                if !(dom.lo > 0.0 && dom.hi > dom.lo && dom.hi.is_finite()) {
                    return Err(Error::InvalidSetup(format!(
                        "domain must satisfy 0 < lo < hi, got [{}, {}]",
                        dom.lo, dom.hi
                    )));
                }
                if dom.lo >= r0 - eps || dom.hi < r0 + eps + reach {
                    return Err(Error::InvalidSetup(format!(
                        "domain [{}, {}] must contain [.., {}] with lo < {}",
                        dom.lo,
                        dom.hi,
                        r0 + eps + reach,
                        r0 - eps
                    )));
                }
                dom
            }
        };
        Ok(Self {
            d,
            alpha: alpha_of(d),
            r0,
            eps,
            u0,
            speed,
            profile,
            t_final,
            domain,
        })
    }

    /// Setup with the threshold bump from [`make_theorem_profile`] and an auto domain.
    pub fn theorem(d: u32, r0: f64, eps: f64, u0: f64, speed: WaveSpeedModel) -> Result<Self> {
        let profile = make_theorem_profile(d, r0, u0, &speed)?;
        Self::new(SetupParams {
            d,
            r0,
            eps,
            u0,
            speed,
            profile,
            domain: DomainChoice::Auto,
        })
    }

    /// Same setup with a different `eps` (domain recomputed if it was automatic).
    pub fn with_eps(&self, eps: f64, domain: DomainChoice) -> Result<Self> {
        Self::new(SetupParams {
            d: self.d,
            r0: self.r0,
            eps,
            u0: self.u0,
            speed: self.speed.clone(),
            profile: self.profile.clone(),
            domain,
        })
    }

    pub fn d(&self) -> u32 {
        self.d
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn r0(&self) -> f64 {
        self.r0
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn u0(&self) -> f64 {
        self.u0
    }
    pub fn speed(&self) -> &WaveSpeedModel {
        &self.speed
    }
    pub fn profile(&self) -> &BumpProfile {
        &self.profile
    }
    pub fn t_final(&self) -> f64 {
        self.t_final
    }
    pub fn domain(&self) -> Domain {
        self.domain
    }

    #[inline]
    fn z(&self, r: f64) -> f64 {
        (r - self.r0) / self.eps
    }

    /// `u(0, r)`.
    pub fn initial_u(&self, r: f64) -> f64 {
        self.u0 + self.eps * self.profile.phi(self.z(r))
    }

    /// `u_r(0, r) = phi'((r - r0)/eps)`, taken analytically.
    pub fn initial_u_r(&self, r: f64) -> f64 {
        self.profile.phi_prime(self.z(r))
    }

    /// `(u(0, r), u_t(0, r))` with `u_t = (-c(u) + eps) u_r`.
    pub fn initial_fields(&self, r: f64) -> (f64, f64) {
        let u = self.initial_u(r);
        let u_t = (-self.speed.c(u) + self.eps) * self.initial_u_r(r);
        (u, u_t)
    }

    /// `(R(0, r), S(0, r)) = (eps r^α u_r, (-2c(u) + eps) r^α u_r)`.
    pub fn initial_riemann(&self, r: f64) -> (f64, f64) {
        let u_r = self.initial_u_r(r);
        if u_r == 0.0 {
            return (0.0, 0.0);
        }
        let w = riemann::weight(r, self.alpha);
        let c = self.speed.c(self.initial_u(r));
        (self.eps * w * u_r, (-2.0 * c + self.eps) * w * u_r)
    }

    /// Route through the generic change of variables, for cross-checking.
    pub fn initial_riemann_via_fields(&self, r: f64) -> (f64, f64) {
        let (u, u_t) = self.initial_fields(r);
        riemann::to_riemann(r, u, u_t, self.initial_u_r(r), self.alpha, &self.speed)
    }
}
