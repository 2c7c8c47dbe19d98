//! Threshold data on the liquid-crystal speed: gradient growth, the `1/S`
//! trace along the hat characteristic, and the verdict.
//!
//! `cargo run --release --example blowup_run -- 8192 0.05`

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use varwave::diagnostics::{blowup_report, blowup_verdict, compute_constants, EnergyObserver, HatMonitor};
use varwave::solver::run;
use varwave::{Grid, ProblemSetup, SchemeConfig, WaveSpeedModel};

fn main() -> varwave::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(4096, |s| s.parse().expect("grid size"));
    let eps: f64 = args.next().map_or(0.05, |s| s.parse().expect("eps"));

    let speed = WaveSpeedModel::oseen_frank(2.0, 1.0, 1.0, SQRT_2)?;
    let setup = ProblemSetup::theorem(3, 1.0, eps, FRAC_PI_4, speed)?;
    let grid = Grid::for_setup(&setup, n)?;
    let mut hat = HatMonitor::new(&setup);
    let mut energy = EnergyObserver::new();
    let res = run(&setup, &grid, SchemeConfig::default(), &mut [&mut hat, &mut energy])?;

    let constants = compute_constants(&setup)?;
    let report = blowup_report(&res, &hat);
    let verdict = blowup_verdict(&report, &constants, &setup);

    println!("amplitude {:.4}, t_final {:.6}, N {n}", setup.profile().amplitude(), setup.t_final());
    println!("stop {:?} after {} steps at t = {:.6}", res.stop, res.steps, res.t_end);
    println!("max |S|/r^a growth {:.4}", res.max_gradient_growth());
    let stride = (res.gradient_trace.len() / 12).max(1);
    for (t, g) in res.gradient_trace.iter().step_by(stride) {
        println!("  t = {t:.5}  max |S|/r^a = {g:.4e}");
    }
    let e0 = energy.initial().unwrap_or(0.0);
    println!("energy E(0) = {e0:.6e}, E(end)/E(0) = {:.4}", energy.samples.last().map_or(0.0, |s| s.energy / e0));
    if let Some((t, v)) = report.inv_s_min {
        println!("min 1/S = {v:.4e} at t = {t:.5}");
    }
    println!(
        "t* extrapolated {:?}, bound {:.6}, S > 1 throughout {}, 1/S inequality fraction {:.3}",
        report.t_star_extrapolated, constants.t_star_bound, report.s_above_one, report.inequality_fraction
    );
    println!("verdict {:?}", verdict);
    Ok(())
}
