//! Constants of the blow-up construction for the liquid-crystal speed.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use varwave::diagnostics::compute_constants;
use varwave::{ProblemSetup, WaveSpeedModel};

fn main() -> varwave::Result<()> {
    let speed = WaveSpeedModel::oseen_frank(2.0, 1.0, 1.0, SQRT_2)?;
    for eps in [0.02, 0.05, 0.1, 0.2] {
        let setup = ProblemSetup::theorem(3, 1.0, eps, FRAC_PI_4, speed.clone())?;
        let k = compute_constants(&setup)?;
        println!("eps = {eps}");
        println!("  amplitude     {:.10}", setup.profile().amplitude());
        println!("  K measured    {:.10e}", k.k_measured);
        println!("  K envelope    {:.10e}", k.k_envelope);
        println!("  M             {:.10e}", k.m);
        println!("  eps0          {:.10e}  (eps below: {})", k.eps0, k.eps_below_threshold(&setup));
        println!("  S0 lower      {:.10}", k.s0_lower);
        println!("  S(0, r0)      {:.10}", setup.initial_riemann(setup.r0()).1);
        println!("  t* bound      {:.10}  t_final {:.10}", k.t_star_bound, setup.t_final());
        println!("  E(0) {:.6e} <= {:.6e}", k.initial_energy, k.energy_bound(&setup));
    }
    Ok(())
}
