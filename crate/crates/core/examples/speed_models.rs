//! Wave speed models: evaluation, derivatives and bound validation.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use varwave::speed::DEFAULT_PROBES;
use varwave::WaveSpeedModel;

fn main() -> varwave::Result<()> {
    let lc = WaveSpeedModel::oseen_frank(2.0, 1.0, 1.0, SQRT_2)?;
    let flat = WaveSpeedModel::constant(1.0)?;
    let table = WaveSpeedModel::tabulated(
        vec![0.0, 0.5, 1.0, 1.5],
        vec![1.0, 1.1, 1.3, 1.4],
        vec![0.1, 0.3, 0.3, 0.1],
        1.0,
        1.4,
    )?;

    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "u", "c_lc", "c'_lc", "c_table", "c'_table");
    for k in 0..=8 {
        let u = k as f64 * FRAC_PI_4 / 2.0;
        let (c, cp) = lc.c_and_prime(u);
        println!(
            "{u:>8.4} {c:>12.8} {cp:>12.8} {:>12.8} {:>12.8}",
            table.c(u),
            table.c_prime(u)
        );
    }
    println!("c'(pi/4) for k1=2, k3=1: {:.15}", lc.c_prime(FRAC_PI_4));

    for (name, m) in [("oseen-frank", &lc), ("constant", &flat), ("tabulated", &table)] {
        let rep = m.validate_bounds(DEFAULT_PROBES)?;
        println!(
            "{name:<12} c in [{:.6}, {:.6}] within [{}, {}], max |c'| {:.6}",
            rep.min_c,
            rep.max_c,
            m.c0(),
            m.c1(),
            rep.max_abs_c_prime
        );
    }

    // Declared bounds tighter than the model are rejected.
    match WaveSpeedModel::oseen_frank(2.0, 1.0, 1.0, 1.2) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
