//! `omaxcones` command-line front end.
//!
//! Exit codes: 0 definitive verdict, 2 Undetermined, 1 input or usage error.
//! Machine output goes to stdout (or `--output`), diagnostics to stderr.

mod batch;
mod jobs;
mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use jobs::{Command as JobCommand, JobOptions, NormKind, Outcome, Raw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "omaxcones", version, about = "Minimal and maximal cones on matrix tensor products")]
struct Cli {
    /// Seed for every randomized search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance (sign decisions for cone tests, bracket width for norms).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Independent restarts of randomized searches.
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Iteration cap per restart.
    #[arg(long, global = true)]
    iterations: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(short, long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Write the verdict together with its input as a certificate bundle.
    #[arg(long, global = true, value_name = "PATH")]
    emit_certificates: Option<PathBuf>,
    /// Re-verify a certificate bundle by direct evaluation only.
    #[arg(long, value_name = "PATH")]
    verify: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Block-positivity test of a BlockElement.
    ConeMinTest { input: PathBuf },
    /// Separability test of a BlockElement.
    ConeMaxTest { input: PathBuf },
    /// Entanglement-breaking classification of a MatrixMap.
    Classify { input: PathBuf },
    /// Order, minimal or decomposition norm of a ComplexMatrix.
    Norm {
        #[arg(long, value_enum)]
        kind: NormKind,
        input: PathBuf,
    },
    /// Flat adjoint of a MatrixMap, alongside the Hilbert–Schmidt adjoint.
    Flat { input: PathBuf },
    /// Sampled pairing check between the separable and block-positive cones.
    DualVerify {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Archimedeanization of a GeneratedCone.
    Arch {
        input: PathBuf,
        /// State-sampling LP objectives (default 64·dim).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run the bundled acceptance suite.
    Selftest,
    /// Run a JSON array of jobs.
    Batch { manifest: PathBuf },
}

/// A failure reported on stderr with exit code 1.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    // clap's own usage-error code would collide with Undetermined
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("OMAXCONES_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Failure(format!("OMAXCONES_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        return Ok(std::io::read_to_string(std::io::stdin())?);
    }
    std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write_out(cli: &Cli, value: &Value) -> Result<(), Failure> {
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(value)? + "\n",
        Format::Text => render::text(value),
    };
    match &cli.output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    configure_threads()?;
    if let Some(path) = &cli.verify {
        if cli.command.is_some() {
            return Err(Failure("--verify takes no subcommand".into()));
        }
        let text = read(path)?;
        let bundle = jobs::decode(&Raw::Text(&text)).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        let report = omaxcones::verify::verify_bundle(&bundle)?;
        write_out(cli, &serde_json::to_value(&report)?)?;
        if !report.ok {
            eprintln!("certificate bundle did not verify");
            return Ok(1);
        }
        return Ok(0);
    }
    let Some(command) = &cli.command else {
        return Err(Failure("no subcommand given (see --help)".into()));
    };
    let mut opts = JobOptions {
        tol: cli.tol,
        restarts: cli.restarts,
        iterations: cli.iterations,
        ..Default::default()
    };
    let (job, input) = match command {
        Command::ConeMinTest { input } => (JobCommand::ConeMinTest, Some(input)),
        Command::ConeMaxTest { input } => (JobCommand::ConeMaxTest, Some(input)),
        Command::Classify { input } => (JobCommand::Classify, Some(input)),
        Command::Norm { kind, input } => {
            opts.kind = Some(*kind);
            (JobCommand::Norm, Some(input))
        }
        Command::Flat { input } => (JobCommand::Flat, Some(input)),
        Command::DualVerify { n, m, samples } => {
            opts.n = Some(*n);
            opts.m = Some(*m);
            opts.samples = Some(*samples);
            (JobCommand::DualVerify, None)
        }
        Command::Arch { input, samples } => {
            opts.samples = *samples;
            (JobCommand::Arch, Some(input))
        }
        Command::Selftest => (JobCommand::Selftest, None),
        Command::Batch { manifest } => {
            let text = read(manifest)?;
            let base = manifest.parent().unwrap_or(Path::new("."));
            let summary = batch::run(&text, base).map_err(|e| Failure(format!("{}: {e}", manifest.display())))?;
            write_out(cli, &serde_json::to_value(&summary)?)?;
            return Ok(0);
        }
    };
    let text = input.map(|p| read(p)).transpose()?;
    let raw = text.as_deref().map(Raw::Text);
    let outcome: Outcome = jobs::execute(job, raw.as_ref(), &opts, cli.seed).map_err(|e| match input {
        Some(p) => Failure(format!("{}: {e}", p.display())),
        None => Failure(e),
    })?;
    if let Some(path) = &cli.emit_certificates {
        match &outcome.bundle {
            Some(b) => std::fs::write(path, serde_json::to_string_pretty(b)? + "\n")
                .map_err(|e| Failure(format!("{}: {e}", path.display())))?,
            None => eprintln!("note: {} emits no certificates", job.name()),
        }
    }
    write_out(cli, &outcome.value)?;
    Ok(if outcome.undetermined { 2 } else { 0 })
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn argument_definitions_are_consistent() {
        super::Cli::command().debug_assert();
    }
}
