//! `hetreg`: estimate from a dataset, simulate data, and run the Monte Carlo studies.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hetreg::basis::DesignGrid;
use hetreg::error::{Error, Result};
use hetreg::experiments::{
    csv_string, efficiency_study, estimate_dataset, lower_bound_study, oracle_study, resolve_test_function,
    risk_study, write_csv, write_json, ExperimentConfig,
};
use hetreg::models::{DataGenerator, ScaleModel};
use hetreg::theory::{pinsker_constant, pinsker_constant_as_printed};
use serde_json::json;

#[derive(Parser)]
#[command(name = "hetreg", version, about = "Adaptive estimation for heteroscedastic regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the adaptive estimator to a `x,y` CSV and print the result as JSON.
    Estimate {
        data: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Draw one synthetic dataset at the first `n` of the grid.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
    },
    /// Risk table for every estimator, `n` and noise law.
    Risk(#[command(flatten)] Common),
    /// Adaptive risk against the best family member.
    Oracle(#[command(flatten)] Common),
    /// Normalized risks of the adaptive and oracle-weight estimators.
    Efficiency(#[command(flatten)] Common),
    /// van Trees bound and Bayes risks under the least favorable prior.
    LowerBound(#[command(flatten)] Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "HETREG_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, env = "HETREG_WORKERS")]
    workers: Option<usize>,
    /// CSV destination; the JSON summary goes next to it with a `.json` extension.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-replicate losses (risk study only).
    #[arg(long)]
    replicates: Option<PathBuf>,
    /// Also report the Pinsker constant with the exponents exactly as printed
    /// in the source formula; diagnostic only.
    #[arg(long)]
    as_printed: bool,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.reps {
            cfg.reps = r;
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        if self.out.is_some() {
            cfg.output_path = self.out.clone();
        }
        if self.replicates.is_some() {
            cfg.replicates_path = self.replicates.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn summary_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn emit<T: serde::Serialize>(cfg: &ExperimentConfig, rows: &[T], summary: serde_json::Value) -> Result<()> {
    match &cfg.output_path {
        Some(p) => {
            write_csv(p, rows)?;
            write_json(&summary_path(p), &summary)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(csv_string(rows)?.as_bytes())?;
            eprintln!("{}", serde_json::to_string_pretty(&summary)?);
        }
    }
    Ok(())
}

fn constants(cfg: &ExperimentConfig, as_printed: bool) -> Result<serde_json::Value> {
    let test = resolve_test_function(&cfg.test_function, cfg.ball)?;
    let varsigma = cfg.scale.varsigma(test.function.as_ref());
    let (k, r) = (test.ball.k, test.ball.r);
    let mut v = json!({
        "test_function": test.name,
        "k": k,
        "r": r,
        "varsigma": varsigma,
        "membership_margin": test.membership.margin,
        "gamma_k": pinsker_constant(k, r, varsigma)?,
    });
    if as_printed {
        v["gamma_k_as_printed"] = json!(pinsker_constant_as_printed(k, r, varsigma)?);
    }
    Ok(v)
}

fn read_dataset(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = headers
        .iter()
        .position(|h| h.trim() == "y")
        .ok_or_else(|| Error::Config(format!("{} has no `y` column", path.display())))?;
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            rec.get(col)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("bad y value in {}", path.display())))
        })
        .collect()
}

#[derive(serde::Serialize)]
struct Observation {
    x: f64,
    y: f64,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate { data, common } => {
            let cfg = common.config()?;
            let y = read_dataset(&data)?;
            let fit = estimate_dataset(&y, &cfg)?;
            let text = serde_json::to_string_pretty(&fit)?;
            match &cfg.output_path {
                Some(p) => std::fs::write(p, text + "\n")?,
                None => println!("{text}"),
            }
        }
        Command::Simulate { common, replicate } => {
            let cfg = common.config()?;
            let n = cfg.n_grid[0];
            let grid = DesignGrid::new(n)?;
            let test = resolve_test_function(&cfg.test_function, cfg.ball)?;
            let generator = DataGenerator::new(test.function.as_ref(), &cfg.scale, &grid);
            let y = generator.draw(cfg.noise_menu[0], cfg.seed, replicate);
            let rows: Vec<Observation> = grid.points().iter().zip(y).map(|(&x, y)| Observation { x, y }).collect();
            match &cfg.output_path {
                Some(p) => write_csv(p, &rows)?,
                None => print!("{}", csv_string(&rows)?),
            }
        }
        Command::Risk(common) => {
            let cfg = common.config()?;
            let study = risk_study(&cfg)?;
            if let Some(p) = &cfg.replicates_path {
                write_csv(p, &study.replicates)?;
            }
            let summary = json!({ "study": "risk", "seed": cfg.seed, "reps": cfg.reps,
                "constants": constants(&cfg, common.as_printed)? });
            emit(&cfg, &study.rows, summary)?;
        }
        Command::Oracle(common) => {
            let cfg = common.config()?;
            let rep = oracle_study(&cfg)?;
            let summary = json!({ "study": "oracle", "seed": cfg.seed, "reps": cfg.reps,
                "constants": constants(&cfg, common.as_printed)?,
                "summary": rep.summary, "trends": rep.trends });
            emit(&cfg, &rep.rows, summary)?;
        }
        Command::Efficiency(common) => {
            let cfg = common.config()?;
            let rep = efficiency_study(&cfg, common.as_printed)?;
            let mut summary = serde_json::to_value(&rep)?;
            summary.as_object_mut().map(|o| o.remove("rows"));
            summary["study"] = json!("efficiency");
            emit(&cfg, &rep.rows, summary)?;
        }
        Command::LowerBound(common) => {
            let cfg = common.config()?;
            let rep = lower_bound_study(&cfg)?;
            let mut summary = serde_json::to_value(&rep)?;
            summary.as_object_mut().map(|o| o.remove("rows"));
            summary["study"] = json!("lower_bound");
            emit(&cfg, &rep.rows, summary)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
