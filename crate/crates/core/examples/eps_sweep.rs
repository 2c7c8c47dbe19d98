//! Threshold runs across a range of bump widths, in parallel.
//!
//! `cargo run --release --example eps_sweep -- 4096`

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use rayon::prelude::*;
use varwave::diagnostics::{blowup_report, HatMonitor, Verdict};
use varwave::solver::run;
use varwave::{Grid, ProblemSetup, SchemeConfig, WaveSpeedModel};

fn main() -> varwave::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(2048, |s| s.parse().expect("grid size"));
    let speed = WaveSpeedModel::oseen_frank(2.0, 1.0, 1.0, SQRT_2)?;
    let eps_list = [0.02, 0.05, 0.1, 0.2];

    let rows: Vec<_> = eps_list
        .par_iter()
        .map(|&eps| -> varwave::Result<_> {
            let setup = ProblemSetup::theorem(3, 1.0, eps, FRAC_PI_4, speed.clone())?;
            let grid = Grid::for_setup(&setup, n)?;
            let mut hat = HatMonitor::new(&setup);
            let res = run(&setup, &grid, SchemeConfig::default(), &mut [&mut hat])?;
            let report = blowup_report(&res, &hat);
            let verdict = Verdict::classify(&report, setup.t_final());
            Ok((eps, setup.t_final(), res.max_gradient_growth(), report, verdict))
        })
        .collect::<varwave::Result<_>>()?;

    println!("{:>6} {:>10} {:>10} {:>12} {:>16}", "eps", "t_final", "growth", "t* extrap", "verdict");
    for (eps, t_final, growth, report, verdict) in rows {
        let t_star = report.t_star_extrapolated.map_or("-".into(), |t| format!("{t:.5}"));
        println!("{eps:>6} {t_final:>10.5} {growth:>10.4} {t_star:>12} {:>16?}", verdict);
    }
    Ok(())
}
