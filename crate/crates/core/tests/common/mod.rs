#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use varwave::initial::make_theorem_profile;
use varwave::{BumpProfile, DomainChoice, Grid, GridState, ProblemSetup, SetupParams, WaveSpeedModel};

pub fn liquid_crystal() -> WaveSpeedModel {
    WaveSpeedModel::oseen_frank(2.0, 1.0, 1.0, SQRT_2).unwrap()
}

/// d = 3, r0 = 1, u0 = π/4, threshold bump, auto domain.
pub fn canonical(eps: f64) -> ProblemSetup {
    ProblemSetup::theorem(3, 1.0, eps, FRAC_PI_4, liquid_crystal()).unwrap()
}

pub fn canonical_amplitude() -> f64 {
    make_theorem_profile(3, 1.0, FRAC_PI_4, &liquid_crystal()).unwrap().amplitude()
}

pub fn with_profile(d: u32, eps: f64, u0: f64, speed: WaveSpeedModel, profile: BumpProfile) -> ProblemSetup {
    ProblemSetup::new(SetupParams {
        d,
        r0: 1.0,
        eps,
        u0,
        speed,
        profile,
        domain: DomainChoice::Auto,
    })
    .unwrap()
}

/// d = 1, c = 1: the Riemann variables translate rigidly.
pub fn flat_transport(eps: f64, profile: BumpProfile) -> ProblemSetup {
    with_profile(1, eps, 0.0, WaveSpeedModel::constant(1.0).unwrap(), profile)
}

/// Small smooth bump on the liquid-crystal speed in 3-D.
pub fn smooth_nonlinear(eps: f64, amplitude: f64) -> ProblemSetup {
    with_profile(3, eps, FRAC_PI_4, liquid_crystal(), BumpProfile::smooth(amplitude).unwrap())
}

/// Trapezoid-weighted `∫ |R - R_exact| + |S - S_exact| dr` for rigid translation at speed `c`.
pub fn transport_l1_error(setup: &ProblemSetup, grid: &Grid, st: &GridState, c: f64) -> f64 {
    let n = grid.len();
    let err = |i: usize| {
        let r = grid.r()[i];
        let (r_ex, _) = setup.initial_riemann(r + c * st.t);
        let (_, s_ex) = setup.initial_riemann(r - c * st.t);
        (st.big_r[i] - r_ex).abs() + (st.big_s[i] - s_ex).abs()
    };
    grid.h() * (0.5 * (err(0) + err(n - 1)) + (1..n - 1).map(err).sum::<f64>())
}

/// Trapezoid-weighted L¹ distance of `coarse` from `fine` interpolated onto the coarse nodes.
pub fn self_l1_difference(coarse_grid: &Grid, coarse: &GridState, fine_grid: &Grid, fine: &GridState) -> f64 {
    let n = coarse_grid.len();
    let diff = |i: usize| {
        let r = coarse_grid.r()[i];
        (coarse.big_r[i] - fine_grid.interp(&fine.big_r, r).unwrap()).abs()
            + (coarse.big_s[i] - fine_grid.interp(&fine.big_s, r).unwrap()).abs()
    };
    coarse_grid.h() * (0.5 * (diff(0) + diff(n - 1)) + (1..n - 1).map(diff).sum::<f64>())
}

pub fn order(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

/// Least-squares slope of `ln e` against `ln h`.
pub fn fitted_order(hs: &[f64], es: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = es.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
