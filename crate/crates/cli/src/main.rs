use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use seqemp::experiments::{family_rank, run_experiment};
use seqemp::hermite::{coefficient_table, PointRank};
use seqemp::io::{write_atomic, write_manifest, write_report, RunManifest, OUT_DIR_ENV};
use seqemp::lrd::sample_path;
use seqemp::{Error, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "seqemp", version, about = "Sequential empirical process experiments for LRD Gaussian vectors")]
struct Cli {
    /// JSON config file (a run manifest is accepted too).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, or output file for `simulate`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the master seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replications.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one path; adds `y` columns when a subordinator is configured.
    Simulate {
        #[arg(long)]
        length: Option<usize>,
    },
    /// Family Hermite rank on the configured grid.
    Rank,
    /// Hermite coefficient table up to an order.
    Coeffs {
        #[arg(long, default_value_t = 2)]
        max_order: usize,
    },
    /// Run a Monte Carlo experiment.
    Experiment {
        #[arg(value_enum)]
        kind: Kind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Reduction,
    Limit,
    Moment,
    Variance,
    PartitionCheck,
}

impl From<Kind> for ExperimentKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Reduction => ExperimentKind::Reduction,
            Kind::Limit => ExperimentKind::Limit,
            Kind::Moment => ExperimentKind::Moment,
            Kind::Variance => ExperimentKind::Variance,
            Kind::PartitionCheck => ExperimentKind::PartitionCheck,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::RankConditionViolated { .. }
        | Error::RankNotFound(_)
        | Error::NotPositiveDefinite { .. }
        | Error::DominationViolated { .. } => 3,
        Error::QuadratureNotConverged { .. } => 4,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config {
        field: "--config".into(),
        message: "a config file is required".into(),
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        field: "--config".into(),
        message: format!("{}: {e}", path.display()),
    })?;
    let manifest = serde_json::from_str::<serde_json::Value>(&text)
        .ok()
        .filter(|v| v.get("schema").is_none() && v.get("config_hash").is_some())
        .and_then(|v| v.get("config").cloned());
    let mut cfg = match manifest {
        Some(inner) => ExperimentConfig::from_json(&inner.to_string())?,
        None => ExperimentConfig::from_json(&text)?,
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn simulate(cli: &Cli, length: Option<usize>) -> Result<(), Error> {
    let cfg = load_config(cli)?;
    let n = length
        .or(cfg.length)
        .or(cfg.n_ladder.last().copied())
        .ok_or_else(|| Error::Config {
            field: "length".into(),
            message: "no path length given".into(),
        })?;
    let path = sample_path(&cfg.model, n, cfg.seed)?;
    let csv = match &cfg.subordinator {
        None => path.to_csv(),
        Some(g) => {
            let mut out = String::from("j");
            for i in 1..=path.p() {
                let _ = write!(out, ",x{i}");
            }
            for i in 1..=g.q() {
                let _ = write!(out, ",y{i}");
            }
            out.push('\n');
            for j in 0..n {
                let _ = write!(out, "{}", j + 1);
                let row = path.row(j);
                for v in row.iter().chain(g.eval(row).iter()) {
                    let _ = write!(out, ",{v}");
                }
                out.push('\n');
            }
            out
        }
    };
    match (&cli.out, std::env::var_os(OUT_DIR_ENV)) {
        (Some(file), _) => write_atomic(file, csv.as_bytes()),
        (None, Some(dir)) => write_atomic(
            &Path::new(&dir).join(format!("simulate_{}.csv", cfg.short_hash())),
            csv.as_bytes(),
        ),
        (None, None) => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn rank(cli: &Cli) -> Result<(), Error> {
    let cfg = load_config(cli)?;
    let (m, result, grid) = match family_rank(&cfg) {
        Ok(r) => r,
        Err(Error::RankNotFound(q)) => {
            println!("family rank exceeds qmax = {q}");
            return Err(Error::RankNotFound(q));
        }
        Err(e) => return Err(e),
    };
    let dir = out_dir(cli);
    let path = dir.join(format!("rank_{}.json", cfg.short_hash()));
    let mut json = serde_json::to_string_pretty(&result).expect("rank result serializes");
    json.push('\n');
    write_atomic(&path, json.as_bytes())?;
    println!("family rank  {m}");
    println!("D            {}", cfg.model.d);
    println!("1/m          {:.6}", 1.0 / m as f64);
    println!("admissible   {}", cfg.model.d < 1.0 / m as f64);
    if let Some(w) = &result.witness {
        println!("witness      x = {:?}, l = {:?}, J = {:.10} (+/- {:.1e})", w.point, w.index, w.value, w.error);
    }
    println!("{:>8}  {:>8}", "rank", "points");
    for r in 1..=cfg.qmax {
        let c = result.pointwise.iter().filter(|p| **p == PointRank::Finite(r)).count();
        if c > 0 {
            println!("{r:>8}  {c:>8}");
        }
    }
    let none = result.pointwise.iter().filter(|p| **p == PointRank::ExceedsQmax).count();
    println!("{:>8}  {none:>8}", format!(">{}", cfg.qmax));
    println!("grid points  {}", grid.len());
    println!("wrote {}", path.display());
    Ok(())
}

fn coeffs(cli: &Cli, max_order: usize) -> Result<(), Error> {
    let cfg = load_config(cli)?;
    let g = cfg.subordinator();
    let grid = cfg.grid.build(&g)?;
    let table = coefficient_table(&g, &grid, max_order, &cfg.quadrature)?;
    let path = out_dir(cli).join(format!("coeffs_{}.csv", cfg.short_hash()));
    write_atomic(&path, table.to_csv().as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn experiment(cli: &Cli, kind: ExperimentKind) -> Result<(), Error> {
    let mut cfg = load_config(cli)?;
    cfg.experiment = Some(kind);
    let start = Instant::now();
    let report = run_experiment(kind, &cfg)?;
    let dir = out_dir(cli);
    let files = write_report(&dir, &report)?;
    let names: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = RunManifest::new(&cfg, kind.name(), names, start.elapsed().as_secs_f64());
    let mpath = write_manifest(&dir, &report.stem(), &manifest)?;
    if let Some(a) = &report.admissibility {
        println!("rank m = {}, D = {}, 1/m = {:.6}", a.rank, a.d, a.bound);
    }
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for f in files.iter().chain(std::iter::once(&mpath)) {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Simulate { length } => simulate(&cli, *length),
        Command::Rank => rank(&cli),
        Command::Coeffs { max_order } => coeffs(&cli, *max_order),
        Command::Experiment { kind } => experiment(&cli, (*kind).into()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
