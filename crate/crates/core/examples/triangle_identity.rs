//! Energy flux balance on a characteristic triangle, for smooth data and for
//! the threshold data.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use varwave::diagnostics::triangle_identity;
use varwave::{BumpProfile, DomainChoice, Grid, ProblemSetup, SchemeConfig, SetupParams, WaveSpeedModel};

fn main() -> varwave::Result<()> {
    let speed = WaveSpeedModel::oseen_frank(2.0, 1.0, 1.0, SQRT_2)?;
    let smooth = ProblemSetup::new(SetupParams {
        d: 3,
        r0: 1.0,
        eps: 0.1,
        u0: FRAC_PI_4,
        speed: speed.clone(),
        profile: BumpProfile::smooth(1.0)?,
        domain: DomainChoice::Auto,
    })?;
    let threshold = ProblemSetup::theorem(3, 1.0, 0.1, FRAC_PI_4, speed)?;

    for (label, setup) in [("smooth", &smooth), ("threshold", &threshold)] {
        println!("{label} data, triangle on [0.85, 1.15]");
        for n in [1024, 2048, 4096, 8192] {
            let grid = Grid::for_setup(setup, n)?;
            let rep = triangle_identity(setup, &grid, SchemeConfig::default(), 0.85, 1.15)?;
            println!(
                "  N = {n:>5}  apex ({:.5}, {:.5})  plus {:.6e}  minus {:.6e}  base/2 {:.6e}  residual {:.4e}",
                rep.t_m, rep.r_m, rep.plus_side, rep.minus_side, rep.rhs, rep.residual
            );
        }
    }
    Ok(())
}
