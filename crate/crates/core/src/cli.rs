//! Command-line front end.
//!
//! Exit codes: `check` returns 0 when the conditions hold, 1 when they fail
//! and 2 when the outcome is inconclusive or rests on the gradient truncation;
//! `solve` returns 0 on convergence and 1 otherwise; every command returns 3
//! on usage, configuration or I/O errors.

use crate::config::{ConfigError, ProblemConfig};
use crate::format::sig9;
use crate::geometry::Extremum;
use crate::hypothesis::{
    existence_check, multiplicity_check, nonexistence_check, CheckError, HypothesisReport, Setting,
};
use crate::kernels::{KernelConstants, KernelKind};
use crate::operator::ReducedSystem;
use crate::presets::{reproduce_example, REPRODUCTION_TOLERANCE};
use crate::scan::ScanConfig;
use crate::solver::solve;
use crate::Expr;
use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "annulus-radial",
    version,
    about = "Radial solutions of elliptic systems on an annulus"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Problem file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path for `solve` (CSV); stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override `[numerics] grid`.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Override `[thresholds] Zmax`.
    #[arg(long, global = true)]
    pub zmax: Option<f64>,
    /// Print nothing on success; rely on the exit code.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Print only `key=value` lines.
    #[arg(long, global = true)]
    pub machine: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transform and kernel constants, weight extremes and thresholds.
    Constants,
    /// Screen the hypotheses of one of the theorems.
    Check {
        #[arg(value_enum)]
        which: Which,
    },
    /// Damped fixed-point iteration; writes the candidate solution as CSV.
    Solve,
    /// Recompute the printed numbers of the built-in worked example.
    ReproduceExample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Existence,
    Multiplicity,
    Nonexistence,
}

/// Failures that map to the usage exit code.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

struct Output<'a> {
    out: &'a mut dyn Write,
    quiet: bool,
    machine: bool,
}

impl Output<'_> {
    fn human(&mut self, text: &str) -> Result<()> {
        if !self.quiet && !self.machine {
            self.out.write_all(text.as_bytes())?;
        }
        Ok(())
    }

    fn kv(&mut self, key: &str, value: impl std::fmt::Display) -> Result<()> {
        if !self.quiet {
            writeln!(self.out, "{key}={value}")?;
        }
        Ok(())
    }

    fn kv_block(&mut self, text: &str) -> Result<()> {
        if !self.quiet {
            self.out.write_all(text.as_bytes())?;
        }
        Ok(())
    }
}

/// Parse `args` (program name first) and run; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let g = &cli.global;
    let mut o = Output {
        out,
        quiet: g.quiet,
        machine: g.machine,
    };
    match cli.command {
        Command::Constants => cmd_constants(&load(g)?, &mut o),
        Command::Check { which } => cmd_check(&load(g)?, which, &mut o),
        Command::Solve => cmd_solve(&load(g)?, g.out.as_ref(), &mut o, err),
        Command::ReproduceExample => cmd_reproduce_example(&mut o),
    }
}

fn load(g: &GlobalOpts) -> Result<ProblemConfig> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| usage("--config <path> is required"))?;
    let mut cfg = ProblemConfig::load(path).map_err(config_error)?;
    if let Some(n) = g.grid {
        cfg.numerics.grid = n;
    }
    if let Some(z) = g.zmax {
        cfg.thresholds.zmax = Some(z);
    }
    Ok(cfg)
}

fn config_error(e: ConfigError) -> anyhow::Error {
    usage(e.to_string())
}

fn cmd_constants(cfg: &ProblemConfig, o: &mut Output<'_>) -> Result<i32> {
    let domain = cfg.domain().map_err(config_error)?;
    let windows = cfg.windows().map_err(config_error)?;
    let constants = KernelConstants::new(&windows);
    let p = |a: f64, b: f64, mode| {
        domain
            .extremize_p(a, b, mode)
            .expect("interval inside [0, 1]")
    };

    let mut rows: Vec<(String, f64)> = Vec::new();
    let mut notes = Vec::new();
    match domain.constants() {
        Some(tc) => {
            rows.push(("A".into(), tc.a));
            rows.push(("B".into(), tc.b));
        }
        None => notes.push(
            "A and B are not defined for n = 2 (logarithmic change of variables)".to_string(),
        ),
    }
    rows.push(("sup_p".into(), p(0.0, 1.0, Extremum::Sup)));
    rows.push(("inf_p".into(), p(0.0, 1.0, Extremum::Inf)));
    for w in &windows {
        let i = w.kind().index();
        rows.push((format!("sup_p_window{i}"), p(w.a(), w.b(), Extremum::Sup)));
        rows.push((format!("inf_p_window{i}"), p(w.a(), w.b(), Extremum::Inf)));
    }
    for i in 0..2 {
        rows.push((format!("c{}", i + 1), constants.c[i]));
    }
    for i in 0..2 {
        rows.push((format!("m{}", i + 1), constants.m[i]));
    }
    for i in 0..2 {
        rows.push((format!("M{}", i + 1), constants.big_m[i]));
    }
    match cfg.threshold_spec() {
        Ok(spec) => {
            // Thresholds only read the geometry; the nonlinearities are placeholders.
            let sys = ReducedSystem::new(domain, Expr::Num(0.0), Expr::Num(0.0));
            let setting = Setting::new(&sys, windows);
            for kind in KernelKind::BOTH {
                let i = kind.index();
                rows.push((
                    format!("threshold_sup_f{i}"),
                    setting.upper_threshold(kind, spec.rho[i - 1]),
                ));
            }
            for kind in KernelKind::BOTH {
                let i = kind.index();
                rows.push((
                    format!("threshold_inf_f{i}"),
                    setting.lower_threshold(kind, spec.s[i - 1]),
                ));
            }
        }
        Err(_) => notes.push("thresholds need rho1, rho2, s1, s2 in [thresholds]".to_string()),
    }

    let mut text = String::from("constants\n");
    for (k, v) in &rows {
        text += &format!("  {k:<18} {}\n", sig9(*v));
    }
    for n in &notes {
        text += &format!("  note: {n}\n");
    }
    o.human(&text)?;
    if o.machine {
        for (k, v) in &rows {
            o.kv(&format!("constants.{k}"), sig9(*v))?;
        }
    }
    Ok(0)
}

fn cmd_check(cfg: &ProblemConfig, which: Which, o: &mut Output<'_>) -> Result<i32> {
    let sys = cfg.system().map_err(config_error)?;
    let windows = cfg.windows().map_err(config_error)?;
    let scan = cfg.scan_config().map_err(config_error)?;
    let setting = Setting::new(&sys, windows);
    let report: HypothesisReport = match which {
        Which::Existence => existence_check(
            &setting,
            &cfg.threshold_spec().map_err(config_error)?,
            &scan,
        ),
        Which::Multiplicity => multiplicity_check(
            &setting,
            &cfg.threshold_spec().map_err(config_error)?,
            &scan,
        ),
        Which::Nonexistence => nonexistence_check(&setting, cfg.wmax(), cfg.zmax(), &scan),
    }
    .map_err(|e| match e {
        CheckError::Scan { .. } => anyhow!(e),
        other => usage(other.to_string()),
    })?;
    o.human(&report.to_string())?;
    o.human("\n")?;
    o.kv_block(&report.to_key_values())?;
    Ok(report.exit_code())
}

fn cmd_solve(
    cfg: &ProblemConfig,
    out_path: Option<&PathBuf>,
    o: &mut Output<'_>,
    err: &mut dyn Write,
) -> Result<i32> {
    let sys = cfg.system().map_err(config_error)?;
    let windows = cfg.windows().map_err(config_error)?;
    let spec = cfg.threshold_spec().map_err(config_error)?;
    let solve_cfg = cfg.solve_config().map_err(config_error)?;
    let result = solve(&sys, &windows, &spec, &solve_cfg)
        .map_err(|e| anyhow!(e))
        .context("solve")?;
    match out_path {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            result
                .write_csv(&sys, &mut w)
                .with_context(|| format!("writing {}", path.display()))?;
            w.flush()
                .with_context(|| format!("writing {}", path.display()))?;
            o.human(&result.to_string())?;
            if o.machine {
                for (k, v) in result.metadata() {
                    o.kv(&format!("solve.{k}"), v)?;
                }
            }
        }
        None => {
            result
                .write_csv(&sys, &mut *o.out)
                .context("writing CSV to stdout")?;
            if !o.quiet && !o.machine {
                write!(err, "{result}")?;
            }
        }
    }
    Ok(if result.converged() { 0 } else { 1 })
}

fn cmd_reproduce_example(o: &mut Output<'_>) -> Result<i32> {
    let values = reproduce_example(&ScanConfig::default()).map_err(|e| anyhow!(e))?;
    let mut text = format!(
        "{:<18} {:<28} {:>12} {:>14} {:>12}\n",
        "key", "quantity", "printed", "recomputed", "rel_error"
    );
    let mut ok = true;
    for v in &values {
        let rel = v.relative_error();
        ok &= rel <= REPRODUCTION_TOLERANCE;
        text += &format!(
            "{:<18} {:<28} {:>12} {:>14} {:>12}\n",
            v.key,
            v.description,
            sig9(v.printed),
            sig9(v.recomputed),
            sig9(rel)
        );
    }
    text += &format!("all within {}: {}\n", sig9(REPRODUCTION_TOLERANCE), ok);
    o.human(&text)?;
    if o.machine {
        for v in &values {
            o.kv(&format!("example.{}.printed", v.key), sig9(v.printed))?;
            o.kv(&format!("example.{}.recomputed", v.key), sig9(v.recomputed))?;
            o.kv(
                &format!("example.{}.rel_error", v.key),
                sig9(v.relative_error()),
            )?;
        }
        o.kv("example.all_within_tolerance", ok)?;
    }
    Ok(if ok { 0 } else { 1 })
}
