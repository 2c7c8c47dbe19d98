//! Grid refinement study driven through the run configuration, as the
//! `convergence` command does, with the report printed instead of written.

use varwave::cli::{convergence_study, RunConfig};

const CONFIG: &str = r#"{
  "setup": {"d": 3, "r0": 1.0, "eps": 0.45, "u0": 0.7853981633974483,
            "speed": {"kind": "oseen_frank", "k1": 2.0, "k3": 1.0, "c0": 1.0, "c1": 1.4142135623730951},
            "profile": {"smooth": {"amplitude": 1.0}}},
  "grid": {"n": 2048},
  "scheme": {"scheme": "muscl2"},
  "experiment": {"kind": "convergence", "n_list": [2048, 4096, 8192], "t_end": 0.3}
}"#;

fn main() -> varwave::Result<()> {
    for scheme in ["upwind1", "muscl2"] {
        let cfg = RunConfig::from_json(&CONFIG.replace("muscl2", scheme))?;
        let rep = convergence_study(&cfg)?;
        println!("{scheme}");
        for lvl in &rep.levels {
            println!(
                "  N = {:>5}  h = {:.3e}  L1 self = {}  energy drift = {:.3e}",
                lvl.n,
                lvl.h,
                lvl.l1_self.map_or("-".into(), |e| format!("{e:.4e}")),
                lvl.energy_drift
            );
        }
        let rates: Vec<String> = rep
            .self_rates
            .iter()
            .map(|r| r.order().map_or("-".into(), |p| format!("{p:.3}")))
            .collect();
        println!("  self-convergence orders: {}", rates.join(", "));
    }
    Ok(())
}
