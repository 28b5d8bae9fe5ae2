//! Drive an experiment from a configuration string, as the `pin` binary does.

use pinning::cli::{parse_config, run, Experiment};

fn main() {
    let text = "\
run.seed = 42
run.replicas = 16
sim.n = 256
sim.beta_hat = 0.5, 1
sim.h_hat = -1, 0, 1
";
    let mut cfg = match parse_config(text, Experiment::Sim) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    cfg.out = std::env::temp_dir().join("pinning-example-sim");
    let outcome = run(&cfg, text);
    println!("exit {} ({})", outcome.code, outcome.status);
    for f in &outcome.files {
        println!("{}", f.display());
    }
    if let Some(summary) = outcome
        .files
        .iter()
        .find(|f| f.ends_with("sim_summary.csv"))
    {
        print!("{}", std::fs::read_to_string(summary).unwrap_or_default());
    }
}
