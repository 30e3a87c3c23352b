use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use subglue::field::read_field;
use subglue_cli::config::{parse_config, Scene};
use subglue_cli::render::{render, RangePolicy};
use subglue_cli::run::{run, write_atomic, RunOptions, RunReport, Status};

/// Certified gluing of subharmonic functions on grids.
#[derive(Debug, Parser)]
#[command(name = "subglue", version)]
struct Cli {
    /// Scene file (TOML).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Override both the Laplacian and the value tolerance.
    #[arg(long, value_name = "FLOAT")]
    tol: Option<f64>,

    /// Also write a PGM image next to every field file.
    #[arg(long)]
    render: bool,

    /// Seed recorded in the report (the runner itself is deterministic).
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// Do not print the check summary.
    #[arg(long)]
    quiet: bool,

    #[command(subcommand)]
    action: Option<Action>,
}

#[derive(Debug, Subcommand)]
enum Action {
    /// Render a field file as a plain PGM image.
    Render {
        field: PathBuf,
        output: PathBuf,
        /// Fixed gray-map range `LO:HI` instead of the finite value range.
        #[arg(long, value_name = "LO:HI", allow_hyphen_values = true)]
        range: Option<String>,
    },
}

fn parse_range(s: &str) -> Option<RangePolicy> {
    let (lo, hi) = s.split_once(':')?;
    Some(RangePolicy::Fixed(lo.trim().parse().ok()?, hi.trim().parse().ok()?))
}

fn render_file(field: &PathBuf, output: &PathBuf, range: Option<&str>) -> Status {
    let policy = match range.map(parse_range) {
        None => RangePolicy::Finite,
        Some(Some(p)) => p,
        Some(None) => {
            eprintln!("error: --range expects LO:HI");
            return Status::ParseError;
        }
    };
    let f = match fs::File::open(field)
        .map_err(subglue::Error::from)
        .and_then(|f| read_field(std::io::BufReader::new(f)))
    {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {}: {e}", field.display());
            return Status::ParseError;
        }
    };
    let img = render(&f, policy);
    if let Some(w) = &img.warning {
        eprintln!("warning: {w}");
    }
    let dir = output.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(std::path::Path::new("."));
    let name = output.file_name().and_then(|n| n.to_str()).unwrap_or("render.pgm");
    match write_atomic(dir, name, img.to_pgm().as_bytes()) {
        Ok(_) => Status::Certified,
        Err(e) => {
            eprintln!("error: {}: {e}", output.display());
            Status::InternalError
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(Action::Render { field, output, range }) = &cli.action {
        return ExitCode::from(render_file(field, output, range.as_deref()).code() as u8);
    }
    let Some(path) = &cli.config else {
        eprintln!("error: --config is required");
        return ExitCode::from(Status::ParseError.code() as u8);
    };
    let opts = RunOptions {
        out: cli.out.clone(),
        tol: cli.tol,
        render: cli.render,
        seed: cli.seed,
    };
    if let Some(t) = cli.tol {
        if !(t >= 0.0 && t.is_finite()) {
            eprintln!("error: --tol must be a nonnegative number");
            return ExitCode::from(Status::ParseError.code() as u8);
        }
    }

    let base = path.parent().map(PathBuf::from).unwrap_or_default();
    let scene = fs::read_to_string(path)
        .map_err(|e| subglue_cli::config::ConfigError::Read {
            path: path.clone(),
            msg: e.to_string(),
        })
        .and_then(|text| parse_config(&text))
        .and_then(|cfg| Scene::build(cfg, &base));
    let report = match scene {
        Ok(scene) => match run(&scene, &opts) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: writing outputs: {e}");
                return ExitCode::from(Status::InternalError.code() as u8);
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            let r = RunReport::parse_failure(&e, cli.seed);
            if let Err(e) = write_atomic(&opts.out, "report.json", r.to_json().as_bytes()) {
                eprintln!("error: writing report: {e}");
            }
            r
        }
    };
    if !cli.quiet {
        print!("{}", report.summary());
    }
    ExitCode::from(report.exit_code as u8)
}
