// Drive an experiment from a TOML configuration, as the `run` subcommand does.

use siegel_radon::cli::{run_experiment, ExperimentConfig, EXPERIMENTS};

const CONFIG: &str = r#"
experiment = "cps_density"
seed = 12
n_samples = 1000

[scheme]
kind = "zsqrt2"

[window]
half_width = 0.5
"#;

pub fn run_example() -> siegel_radon::Result<()> {
    println!("{} experiments available", EXPERIMENTS.len());
    let report = run_experiment(&ExperimentConfig::parse(CONFIG)?)?;
    print!("{}", report.to_json());
    assert!(report.pass);
    Ok(())
}

fn main() -> siegel_radon::Result<()> {
    run_example()
}
