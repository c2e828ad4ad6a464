use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use corrnoise::scan::{
    emit_figure_data, linspace, run_scan_with_progress, OutputFormat, Quantity, ScanSpec, FIGURES,
};

#[derive(Parser)]
#[command(
    name = "corrnoise",
    version,
    about = "Capacities of a lossy bosonic channel with squeezed thermal (correlated) noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep quantities over a grid of (eta, T, s).
    Scan(ScanArgs),
    /// Write the data behind one of the pre-baked figures.
    Figure(FigureArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Scenario {
    Global,
    Local,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(clap::Args)]
struct ScanArgs {
    /// TOML scan file; flags given on the command line take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Channel uses per block (correlation length) [default: 10]
    #[arg(long)]
    n: Option<usize>,
    /// Transmissivities, comma separated [default: 0.9]
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// Environment temperatures, comma separated [default: 0]
    #[arg(long, value_delimiter = ',')]
    temp: Option<Vec<f64>>,
    /// Mean photon number per use [default: 8]
    #[arg(long)]
    nbar: Option<f64>,
    /// [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    s_min: Option<f64>,
    /// [default: 3]
    #[arg(long, allow_hyphen_values = true)]
    s_max: Option<f64>,
    /// Number of s values, ends included [default: 31]
    #[arg(long)]
    s_steps: Option<usize>,
    /// Quantities, comma separated (e.g. classical-lower,quantum) [default: classical-lower]
    #[arg(long, value_delimiter = ',')]
    quantity: Option<Vec<String>>,
    /// Which scenario to compute for scenario-dependent quantities [default: global]
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
    /// [default: csv]
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores [default: 0]
    #[arg(long)]
    jobs: Option<usize>,
    /// No progress on standard error.
    #[arg(long, short)]
    quiet: bool,
}

/// Scan file contents; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct ScanFile {
    n: Option<usize>,
    eta: Option<Vec<f64>>,
    temp: Option<Vec<f64>>,
    nbar: Option<f64>,
    s_min: Option<f64>,
    s_max: Option<f64>,
    s_steps: Option<usize>,
    /// Explicit s values, instead of the s-min/s-max/s-steps range.
    s: Option<Vec<f64>>,
    quantity: Option<Vec<String>>,
    scenario: Option<Scenario>,
    format: Option<Format>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
}

#[derive(clap::Args)]
struct FigureArgs {
    /// One of 2a, 2b, 3a, 3b, 4a, 4b, 5, 6.
    id: String,
    /// Directory for the output files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads, 0 for all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, short)]
    quiet: bool,
}

fn expand_quantities(names: &[String], scenario: Scenario) -> Result<Vec<Quantity>> {
    let mut out = Vec::new();
    for name in names {
        let q: Quantity = name.trim().parse()?;
        let picked = match (scenario, q.local()) {
            (Scenario::Global, _) | (_, None) => vec![q],
            (Scenario::Local, Some(local)) => vec![local],
            (Scenario::Both, Some(local)) if local == q => vec![q],
            (Scenario::Both, Some(local)) => vec![q, local],
        };
        for p in picked {
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    Ok(out)
}

fn build_spec(args: &ScanArgs) -> Result<ScanSpec> {
    let file: ScanFile = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading scan file {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing scan file {}", path.display()))?
        }
        None => ScanFile::default(),
    };

    let ranged = args.s_min.is_some() || args.s_max.is_some() || args.s_steps.is_some();
    let s = match (&file.s, ranged) {
        (Some(explicit), false) => explicit.clone(),
        _ => {
            let steps = args.s_steps.or(file.s_steps).unwrap_or(31);
            if steps == 0 {
                bail!("--s-steps must be at least 1");
            }
            linspace(
                args.s_min.or(file.s_min).unwrap_or(0.0),
                args.s_max.or(file.s_max).unwrap_or(3.0),
                steps,
            )
        }
    };
    let names = args
        .quantity
        .clone()
        .or(file.quantity)
        .unwrap_or_else(|| vec!["classical-lower".into()]);
    let scenario = args.scenario.or(file.scenario).unwrap_or(Scenario::Global);

    let spec = ScanSpec {
        n: args.n.or(file.n).unwrap_or(10),
        nbar: args.nbar.or(file.nbar).unwrap_or(8.0),
        eta: args.eta.clone().or(file.eta).unwrap_or_else(|| vec![0.9]),
        temp: args.temp.clone().or(file.temp).unwrap_or_else(|| vec![0.0]),
        s,
        quantities: expand_quantities(&names, scenario)?,
        format: args.format.or(file.format).unwrap_or(Format::Csv).into(),
        out: args.out.clone().or(file.out),
        jobs: args.jobs.or(file.jobs).unwrap_or(0),
    };
    spec.validate()?;
    Ok(spec)
}

fn progress(quiet: bool) -> impl Fn(usize, usize) + Sync {
    move |done, total| {
        if !quiet {
            eprint!("\r{done}/{total} points");
            if done == total {
                eprintln!();
            }
        }
    }
}

fn scan(args: ScanArgs) -> Result<()> {
    let spec = build_spec(&args)?;
    let data = run_scan_with_progress(&spec, progress(args.quiet))?;
    match &spec.out {
        Some(path) => data
            .write_file(spec.format, path)
            .with_context(|| format!("writing {}", path.display()))?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            data.write(spec.format, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn figure(args: FigureArgs) -> Result<()> {
    if !FIGURES.contains(&args.id.as_str()) {
        bail!("unknown figure '{}' (known: {})", args.id, FIGURES.join(", "));
    }
    let written = emit_figure_data(
        &args.id,
        Path::new(&args.out_dir),
        args.format.into(),
        args.jobs,
        progress(args.quiet),
    )?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Scan(args) => scan(args),
        Command::Figure(args) => figure(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
