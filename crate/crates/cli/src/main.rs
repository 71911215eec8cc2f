#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use stefan_core::pipeline::{
    cmd_check, cmd_oracle, cmd_solve, profile_csv, snapshot_csv, sweep_row, sweep_values, SolveOutcome, ORACLE_TOL,
};
use stefan_core::{Error, RunConfig};

#[derive(Parser)]
#[command(name = "stefan", version, about = "Similarity solutions of a spherical two-phase Stefan problem with Joule heating")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `output.dir`, else `stefan-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solve even when hypotheses or existence conditions fail.
    #[arg(long)]
    force: bool,
    /// Picard tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Grid nodes per phase.
    #[arg(long)]
    grid: Option<usize>,
    /// Time of the physical temperature snapshot.
    #[arg(long)]
    snapshot_time: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Checks hypotheses and existence conditions without solving.
    Check(Common),
    /// Solves for the melt front and writes profiles and a report.
    Solve(Common),
    /// Solves, then compares against an independent shooting solver.
    Oracle(Common),
    /// Repeats the solve over a range of one physical parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter name, as in the `[physical]` section.
        #[arg(long)]
        param: String,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
}

fn load(c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::from_path(&c.config)?;
    let bad = |field: &str, msg: &str| Error::Config {
        field: field.into(),
        line: None,
        message: msg.into(),
    };
    if let Some(t) = c.tol {
        cfg.picard.tol = t;
    }
    if let Some(g) = c.grid {
        cfg.picard.grid_size = g;
    }
    cfg.picard.validate().map_err(|e| bad("--tol/--grid", &e.to_string()))?;
    if let Some(t) = c.snapshot_time {
        if !(t > 0.0) {
            return Err(bad("--snapshot-time", "must be positive"));
        }
        cfg.output.snapshot_time = t;
    }
    if let Some(d) = &c.out {
        cfg.output.dir = Some(d.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("stefan-out"))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), Error> {
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(dir.join(name), text))
        .map_err(|e| Error::Model(format!("cannot write {}: {e}", dir.join(name).display())))
}

fn write_solution(cfg: &RunConfig, out: &SolveOutcome) -> Result<(), Error> {
    let dir = out_dir(cfg);
    write(&dir, "profiles.csv", &profile_csv(&out.solution))?;
    let snap = snapshot_csv(&out.solution, &out.problem.front, cfg.output.snapshot_time, 32)?;
    write(&dir, "snapshot.csv", &snap)?;
    write(&dir, "report.txt", &out.report.render())
}

fn code(e: &Error) -> ExitCode {
    match e {
        Error::Config { .. } => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Check(c) => {
            let cfg = load(&c)?;
            let out = cmd_check(&cfg)?;
            print!("{}", out.report.render());
            Ok(match out.report.blocking_failure() {
                None => ExitCode::SUCCESS,
                Some((tag, detail)) => {
                    eprintln!("check failed: {tag}: {detail}");
                    ExitCode::from(1)
                }
            })
        }
        Command::Solve(c) => {
            let cfg = load(&c)?;
            let out = cmd_solve(&cfg, c.force)?;
            write_solution(&cfg, &out)?;
            print!("{}", out.report.render());
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle(c) => {
            let cfg = load(&c)?;
            let (out, cmp) = cmd_oracle(&cfg, c.force).map_err(|e| match e {
                Error::Oracle(_) => e,
                other => Error::Model(format!("solver failed before the oracle ran: {other}")),
            })?;
            write_solution(&cfg, &out)?;
            print!("{}", out.report.render());
            if cmp.agrees(ORACLE_TOL) {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "oracle disagreement above {ORACLE_TOL:e}: liquid {:e}, solid {:e}",
                    cmp.liquid, cmp.solid
                );
                Ok(ExitCode::from(1))
            }
        }
        Command::Sweep {
            common,
            param,
            lo,
            hi,
            count,
        } => {
            let cfg = load(&common)?;
            cfg.with_parameter(&param, lo)?;
            let rows: Vec<_> = sweep_values(lo, hi, count)
                .into_par_iter()
                .map(|v| sweep_row(&cfg, &param, v, common.force))
                .collect();
            let f = |x: Option<f64>| x.map(|v| format!("{v:.12e}")).unwrap_or_default();
            let mut table = format!("{param},alpha0,xi_star,max_bc_residual,max_ode_residual,error\n");
            for r in &rows {
                let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
                table.push_str(&format!(
                    "{:.12e},{},{},{},{},{err}\n",
                    r.value,
                    f(r.alpha0),
                    f(r.xi_star),
                    f(r.max_bc_residual),
                    f(r.max_ode_residual)
                ));
            }
            write(&out_dir(&cfg), "sweep.csv", &table)?;
            print!("{table}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            code(&e)
        }
    }
}
