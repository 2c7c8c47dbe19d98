//! Linear transport in one dimension with constant speed: the Riemann
//! variables translate rigidly, so the discrete error is measurable exactly.

use varwave::solver::run;
use varwave::{BumpProfile, DomainChoice, Grid, ProblemSetup, Scheme, SchemeConfig, SetupParams, WaveSpeedModel};

fn l1_error(setup: &ProblemSetup, grid: &Grid, st: &varwave::GridState) -> f64 {
    let n = grid.len();
    let err = |i: usize| {
        let r = grid.r()[i];
        let (r_ex, _) = setup.initial_riemann(r + st.t);
        let (_, s_ex) = setup.initial_riemann(r - st.t);
        (st.big_r[i] - r_ex).abs() + (st.big_s[i] - s_ex).abs()
    };
    grid.h() * (0.5 * (err(0) + err(n - 1)) + (1..n - 1).map(err).sum::<f64>())
}

fn main() -> varwave::Result<()> {
    let t_end = 0.3;
    for (label, profile) in [
        ("polynomial", BumpProfile::polynomial(1.0)?),
        ("smooth", BumpProfile::smooth(1.0)?),
    ] {
        let setup = ProblemSetup::new(SetupParams {
            d: 1,
            r0: 1.0,
            eps: 0.1,
            u0: 0.0,
            speed: WaveSpeedModel::constant(1.0)?,
            profile,
            domain: DomainChoice::Auto,
        })?;
        for scheme in [Scheme::Upwind1, Scheme::Muscl2] {
            println!("{label} bump, {scheme:?}");
            let mut prev: Option<(f64, f64)> = None;
            for n in [1024, 2048, 4096, 8192] {
                let grid = Grid::for_setup(&setup, n)?;
                let cfg = SchemeConfig {
                    scheme,
                    stop_time: Some(t_end),
                    ..Default::default()
                };
                let res = run(&setup, &grid, cfg, &mut [])?;
                let e = l1_error(&setup, &grid, &res.final_state);
                let rate = prev.map(|(h0, e0)| (e0 / e).ln() / (h0 / grid.h()).ln());
                println!(
                    "  N = {n:>5}  h = {:.3e}  L1 = {e:.6e}  order = {}",
                    grid.h(),
                    rate.map_or("-".into(), |p| format!("{p:.3}"))
                );
                prev = Some((grid.h(), e));
            }
        }
    }
    Ok(())
}
