//! Tracing plus and minus characteristics through a running solution.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use varwave::characteristics::find_intersection;
use varwave::solver::run;
use varwave::{BumpProfile, DomainChoice, Family, Grid, PathTracer, ProblemSetup, SchemeConfig, SetupParams, WaveSpeedModel};

fn main() -> varwave::Result<()> {
    let setup = ProblemSetup::new(SetupParams {
        d: 3,
        r0: 1.0,
        eps: 0.25,
        u0: FRAC_PI_4,
        speed: WaveSpeedModel::oseen_frank(2.0, 1.0, 1.0, SQRT_2)?,
        profile: BumpProfile::smooth(5.0)?,
        domain: DomainChoice::Auto,
    })?;
    let grid = Grid::for_setup(&setup, 4096)?;
    let mut tracer = PathTracer::new(&[(Family::Plus, 0.8), (Family::Minus, 1.2), (Family::Plus, 1.0)]);
    let cfg = SchemeConfig {
        stop_time: Some(0.4),
        ..Default::default()
    };
    run(&setup, &grid, cfg, &mut [&mut tracer])?;

    let c_bg = setup.speed().c(setup.u0());
    for path in &tracer.paths {
        let last = path.last();
        let sign = if path.family == Family::Plus { 1.0 } else { -1.0 };
        println!(
            "{:?} from r = {:.2}: r(0.4) = {:.6} (background line {:.6}), u = {:.6}",
            path.family,
            path.r_start,
            last.r,
            path.r_start + sign * c_bg * last.t,
            last.u
        );
    }
    let (t_m, r_m) = find_intersection(&tracer.paths[0], &tracer.paths[1])?;
    println!("plus from 0.8 meets minus from 1.2 at t = {t_m:.6}, r = {r_m:.6}");
    Ok(())
}
