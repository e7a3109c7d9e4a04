use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use molqudit::pipeline::{
    config_violations, exit_status, load_config, parse_override, run_with_threads, Artifact, Pipeline,
};
use molqudit::Error;

#[derive(Parser)]
#[command(name = "molqudit", version, about = "Molecular spin-qudit analysis pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one pipeline and write its CSV payloads plus a manifest.
    Run(RunArgs),
    /// Check a config without running anything.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// universality-sweep, qec-gain, cavity-gate or trotter-scan; defaults
    /// to the `pipeline` key of the config.
    #[arg(long)]
    pipeline: Option<String>,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Override a parameter, `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    ideal_pulses: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn overrides(raw: &[String]) -> Result<Vec<(String, String)>, Error> {
    raw.iter().map(|s| parse_override(s)).collect()
}

/// Write-temp-then-rename so readers never see a partial file.
fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), Error> {
    let io = |e: std::io::Error| Error::Config(format!("cannot write {name} in {}: {e}", dir.display()));
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, dir.join(name)).map_err(io)
}

fn manifest(pipeline: Pipeline, canonical: &str, threads: usize, artifacts: &[Artifact], seconds: f64) -> String {
    let mut t = toml::Table::new();
    t.insert("pipeline".into(), pipeline.name().into());
    t.insert("tool_version".into(), env!("CARGO_PKG_VERSION").into());
    t.insert("threads".into(), (threads as i64).into());
    t.insert("wall_time_s".into(), seconds.into());
    let names: Vec<toml::Value> = artifacts.iter().map(|a| a.name.clone().into()).collect();
    t.insert("artifacts".into(), names.into());
    t.insert("config".into(), canonical.into());
    toml::to_string(&t).expect("manifest serializes")
}

fn run(args: RunArgs) -> Result<(), Error> {
    let start = Instant::now();
    let text = read(&args.spec)?;
    let cfg = load_config(&text, &overrides(&args.overrides)?)?;
    let name = args
        .pipeline
        .or_else(|| cfg.pipeline.clone())
        .ok_or_else(|| Error::Config("no pipeline given by --pipeline or the config".into()))?;
    let pipeline = Pipeline::from_name(&name)?;
    let threads = match args.threads {
        Some(0) => return Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let artifacts = run_with_threads(pipeline, &cfg, args.ideal_pulses, threads)?;
    fs::create_dir_all(&args.out)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", args.out.display())))?;
    for a in &artifacts {
        write_atomic(&args.out, &a.name, &a.contents)?;
    }
    let m = manifest(pipeline, &cfg.to_canonical_toml(), threads, &artifacts, start.elapsed().as_secs_f64());
    write_atomic(&args.out, "manifest.toml", &m)?;
    for a in &artifacts {
        println!("{}", args.out.join(&a.name).display());
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<(), Error> {
    let text = read(&args.spec)?;
    let violations = config_violations(&text, &overrides(&args.overrides)?)?;
    if violations.is_empty() {
        println!("ok");
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{} violation(s):\n  {}",
            violations.len(),
            violations.join("\n  ")
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_status(&e) as u8)
        }
    }
}
