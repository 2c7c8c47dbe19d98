//! Full artifact set from a JSON configuration file, as `varwave simulate` writes it.
//!
//! `cargo run --release --example run_config -- configs/negative_control.json /tmp/varwave-run`

use std::path::PathBuf;

use varwave::cli::{cmd_simulate, RunConfig};

fn main() -> varwave::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args.next().map_or_else(|| PathBuf::from("configs/simulate.json"), PathBuf::from);
    let out_dir = args.next().map_or_else(|| std::env::temp_dir().join("varwave-run"), PathBuf::from);

    let cfg = RunConfig::load(&config)?;
    let sim = cmd_simulate(&cfg, &out_dir, true)?;
    let blowup = &sim.diagnostics.blowup;
    println!("wrote artifacts to {}", out_dir.display());
    println!("stop {:?} at t = {:.6}", sim.run.stop, sim.run.t_end);
    println!("verdict {:?}, growth {:.4}", blowup.verdict, blowup.max_gradient_growth);
    for entry in std::fs::read_dir(&out_dir)? {
        println!("  {}", entry?.file_name().to_string_lossy());
    }
    Ok(())
}
