//! Drives the command-line front end end to end: simulate a panel from
//! `examples/data/model.toml`, then estimate, test fit and interpret the selection
//! function on the simulated data.
//!
//! Run with `cargo run --release --example cli_pipeline -- [out_dir]`.

use std::path::{Path, PathBuf};

use clap::Parser;
use saom_quadratic::cli::{run, Cli};

fn saomq(command: &str, config: &Path, out: &Path) -> Result<(), Box<dyn std::error::Error>> {
    let args = ["saomq", command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    println!("$ {}", args.join(" "));
    run(Cli::try_parse_from(args)?).map_err(|e| format!("{e} (exit code {})", e.exit_code()).into())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "cli_pipeline".into()));
    let model = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/model.toml");
    saomq("simulate", &model, &out)?;

    // the simulated panel comes with a configuration that reads it back
    let config = out.join("simulated.toml");
    saomq("estimate", &config, &out)?;
    println!("{}", std::fs::read_to_string(out.join("estimates.txt"))?);
    saomq("gof", &config, &out)?;
    println!("{}", std::fs::read_to_string(out.join("gof.txt"))?);
    saomq("analyze-selection", &config, &out)?;
    println!("{}", std::fs::read_to_string(out.join("selection_summary.txt"))?);
    Ok(())
}
