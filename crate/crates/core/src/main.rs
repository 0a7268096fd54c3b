use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uaosc::harness::study::{
    asymptotic_slope, compare_cn, oracle_study, single_run, space_study, time_study, ConvergenceStudy,
};
use uaosc::harness::table::{write_file, write_rows, Row};
use uaosc::harness::StudyConfig;
use uaosc::Result;

/// Oscillatory advection-diffusion around a circular obstacle: runs and
/// convergence studies.
#[derive(Debug, Parser)]
#[command(name = "uaosc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single integration; writes the detector trace as `t,value`.
    Run(Common),
    /// Error against the fine reference for every (eps, dt).
    ConvergeTime(Common),
    /// Error against the N_ref reference for every (eps, N).
    ConvergeSpace(Common),
    /// Detector traces of reference, ua2 and cn.
    CompareCn(Common),
    /// Averaged models against the oscillating solution.
    Twoscale(Common),
    /// Error against the dense RK4 oracle for every (eps, dt).
    Oracle(Common),
    /// Print the effective configuration.
    Config(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// `key = value` configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides in the form `--key=value` (e.g. `--eps=1,1e-2 --N=40`).
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--key=value")]
    overrides: Vec<String>,
}

impl Common {
    fn load(&self) -> Result<StudyConfig> {
        let mut cfg = match &self.config {
            Some(p) => StudyConfig::load(p)?,
            None => StudyConfig::default(),
        };
        cfg.apply_overrides(&self.overrides)?;
        Ok(cfg)
    }
}

fn emit<R: Row>(rows: &[R], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            write_file(rows, p)?;
            eprintln!("wrote {} rows to {}", rows.len(), p.display());
            Ok(())
        }
        None => write_rows(rows, std::io::stdout().lock()),
    }
}

/// `out.csv` → `out_<suffix>.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn report(study: &ConvergenceStudy, cfg: &StudyConfig, what: &str) -> Result<()> {
    emit(&study.rows, cfg.output.as_deref())?;
    for o in &study.orders {
        eprintln!("eps = {:e}: fitted {what} order {:.3}", o.eps, o.order);
    }
    if what == "temporal" && cfg.eps.len() > 1 {
        for (dt, r) in study.uniformity() {
            eprintln!("dt = {dt:e}: max/min error over eps = {r:.3}");
        }
    }
    if let Some(p) = &cfg.output {
        write_file(&study.orders, &sibling(p, "orders"))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(c) => {
            let cfg = c.load()?;
            let r = single_run(&cfg)?;
            eprintln!(
                "{} steps of dt = {:e} on {} unknowns; final norm {:.6e}, max norm {:.6e}",
                r.steps, r.dt, r.unknowns, r.final_norm, r.max_norm
            );
            emit(&r.trace, cfg.output.as_deref())
        }
        Command::ConvergeTime(c) => {
            let cfg = c.load()?;
            report(&time_study(&cfg)?, &cfg, "temporal")
        }
        Command::ConvergeSpace(c) => {
            let cfg = c.load()?;
            report(&space_study(&cfg)?, &cfg, "spatial")
        }
        Command::CompareCn(c) => {
            let cfg = c.load()?;
            let cmp = compare_cn(&cfg)?;
            eprintln!(
                "eps = {:e}, dt = {:e}: max relative detector deviation ua2 {:.3e}, cn {:.3e}",
                cmp.eps, cmp.dt, cmp.ua2_deviation, cmp.cn_deviation
            );
            match &cfg.output {
                Some(p) => {
                    write_file(&cmp.reference, &sibling(p, "ref"))?;
                    write_file(&cmp.ua2, &sibling(p, "ua2"))?;
                    write_file(&cmp.cn, &sibling(p, "cn"))?;
                    eprintln!("wrote {}, {}, {}", sibling(p, "ref").display(), sibling(p, "ua2").display(), sibling(p, "cn").display());
                    Ok(())
                }
                None => emit(&cmp.ua2, None),
            }
        }
        Command::Twoscale(c) => {
            let cfg = c.load()?;
            let rows = uaosc::harness::study::twoscale_study(&cfg)?;
            if cfg.eps.len() > 1 {
                for order in [1, 2] {
                    eprintln!("order {order}: error slope in eps {:.3}", asymptotic_slope(&rows, order)?);
                }
            }
            emit(&rows, cfg.output.as_deref())
        }
        Command::Oracle(c) => {
            let cfg = c.load()?;
            emit(&oracle_study(&cfg)?, cfg.output.as_deref())
        }
        Command::Config(c) => {
            print!("{}", c.load()?.to_text());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
