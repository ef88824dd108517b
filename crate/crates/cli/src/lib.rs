//! Command-line front end for `kendall-renewal`.
//!
//! [`run`] parses arguments (merging an optional `--config` file), executes
//! one subcommand and returns the process exit code. Tables go to stdout or
//! `--output`; diagnostics go to stderr.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod error;
pub mod table;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};

use clap::error::ErrorKind;
use clap::Parser;
use kendall_renewal::asymptotics::{
    blackwell_classic, blackwell_derivative, blackwell_log_case, blackwell_normalized, blackwell_tail_case,
    elementary_renewal, limit_law_sim, sn_scaling_sim, tail_ratios,
};
use kendall_renewal::renewal::{moments_n, pmf_table};
use kendall_renewal::verify::{run_suite, Suite, VerifyOptions};
use kendall_renewal::walk::{sample_paths, simulate_counts};
use kendall_renewal::{catalog_lookup, AsymptoticsReport, Error, Grid, StepDistribution, WalkConfig, CATALOG};

use crate::args::{
    expand_config, AsymptoticsArgs, Cli, Command, DistArgs, LimitLawArgs, OutputArgs, PmfArgs, RenewalArgs,
    SimulateArgs, VerifyArgs,
};
use crate::error::{CliError, EXIT_CHECK_FAILED};
use crate::table::{Cell, Table};

/// Outcome of a successful run: the table, and whether requested checks held.
struct Outcome {
    table: Table,
    passed: bool,
}

impl Outcome {
    fn report(table: Table) -> Self {
        Self { table, passed: true }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    match try_run(args, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.line());
            e.exit_code()
        }
    }
}

fn try_run(args: Vec<OsString>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let args = expand_config(args)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            write!(stdout, "{}", e.render())?;
            return Ok(0);
        }
        Err(e) => {
            let text = e.render().to_string();
            let head: Vec<&str> = text.lines().take_while(|l| !l.trim().is_empty()).map(str::trim).collect();
            return Err(CliError::Usage(head.join(" ").trim_start_matches("error: ").to_string()));
        }
    };
    let (outcome, out) = match cli.command {
        Command::Simulate(a) => (simulate(&a)?, a.out),
        Command::Renewal(a) => (renewal(&a)?, a.out),
        Command::Pmf(a) => (pmf(&a)?, a.out),
        Command::Asymptotics(a) => (asymptotics(&a)?, a.out),
        Command::LimitLaw(a) => (limit_law(&a)?, a.out),
        Command::Verify(a) => (verify(&a, stderr)?, a.out),
        Command::Catalog(out) => (catalog(), out),
    };
    emit(&outcome.table, &out, stdout)?;
    Ok(if outcome.passed { 0 } else { EXIT_CHECK_FAILED })
}

fn emit(table: &Table, out: &OutputArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &out.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(out.format, &mut w)?;
            w.flush()?;
        }
        None => match table.write(out.format, stdout) {
            // A closed reader (`| head`) is not a failure.
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            r => r?,
        },
    }
    Ok(())
}

fn step_law(d: &DistArgs) -> Result<StepDistribution<f64>, CliError> {
    Ok(catalog_lookup(&d.dist, d.alpha, d.beta)?)
}

fn simulate(a: &SimulateArgs) -> Result<Outcome, CliError> {
    let mut cfg = WalkConfig::new(step_law(&a.dist)?, a.seed);
    if let Some(m) = a.max_steps {
        cfg = cfg.with_max_steps(m)?;
    }
    let mut table = Table::new(&["path_id", "step_index", "value"]);
    match (a.t, a.n) {
        (Some(t), _) => {
            for (k, c) in simulate_counts(&cfg, t, a.paths)?.into_iter().enumerate() {
                table.push(vec![Cell::Int(k as u64), Cell::Int(0), Cell::Int(c)]);
            }
        }
        (None, Some(n)) => {
            for (k, path) in sample_paths(&cfg, n, a.paths)?.into_iter().enumerate() {
                for (i, v) in path.values.into_iter().enumerate() {
                    table.push(vec![Cell::Int(k as u64), Cell::Int(i as u64 + 1), Cell::Float(v)]);
                }
            }
        }
        (None, None) => return Err(CliError::Usage("one of --n or --t is required".into())),
    }
    Ok(Outcome::report(table))
}

fn renewal(a: &RenewalArgs) -> Result<Outcome, CliError> {
    if !(a.tmin < a.tmax) {
        return Err(CliError::Usage(format!("--tmin {} must be below --tmax {}", a.tmin, a.tmax)));
    }
    let d = step_law(&a.dist)?;
    let grid = Grid::new(a.tmin, a.tmax, a.points as usize, a.spacing.into())?;
    let mut table = Table::new(&["t", "R", "EN2", "VarN"]);
    for t in grid.values() {
        let e = moments_n(&d, t)?;
        table.push(vec![t.into(), e.r.into(), e.en2.into(), e.var_n.into()]);
    }
    Ok(Outcome::report(table))
}

fn pmf(a: &PmfArgs) -> Result<Outcome, CliError> {
    let d = step_law(&a.dist)?;
    let mut table = Table::new(&["n", "pmf"]);
    for (n, p) in pmf_table(&d, a.t, a.nmax)?.into_iter().enumerate() {
        table.push(vec![Cell::Int(n as u64), p.into()]);
    }
    Ok(Outcome::report(table))
}

/// `Ok(None)` for reports that do not apply to the step law.
fn applicable<T>(r: Result<T, Error>) -> Result<Option<T>, Error> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::OutOfScope(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn asymptotics(a: &AsymptoticsArgs) -> Result<Outcome, CliError> {
    let d = step_law(&a.dist)?;
    let (x, h) = (a.x, a.h);
    let mut reports: Vec<AsymptoticsReport<f64>> = Vec::new();
    if let Some(r) = applicable(tail_ratios(&d, x))? {
        reports.extend(r);
    }
    reports.extend(applicable(elementary_renewal(&d, x))?);
    reports.extend(applicable(blackwell_classic(&d, x, h))?);
    reports.extend(applicable(blackwell_derivative(&d, x))?);
    reports.extend(applicable(blackwell_normalized(&d, x, h))?);
    reports.extend(applicable(blackwell_log_case(&d, x, h))?);
    reports.extend(applicable(blackwell_tail_case(&d, x, h))?);
    let mut table = Table::new(&["quantity", "x", "finite", "limit", "rel_error"]);
    let mut passed = true;
    for r in &reports {
        if let Some(tol) = a.tol {
            passed &= r.rel_error <= tol;
        }
        table.push(vec![
            r.quantity.clone().into(),
            r.x.into(),
            r.finite.into(),
            r.limit.into(),
            r.rel_error.into(),
        ]);
    }
    Ok(Outcome { table, passed })
}

fn limit_law(a: &LimitLawArgs) -> Result<Outcome, CliError> {
    let cfg = WalkConfig::new(step_law(&a.dist)?, a.seed);
    let table = match (a.t, a.n) {
        (Some(t), _) => {
            let s = limit_law_sim(&cfg, t, a.sims)?;
            let mut table = Table::new(&[
                "t", "g_bar", "weight", "n_sims", "mean", "var", "limit_mean", "limit_var", "ks", "ks_critical",
            ]);
            table.push(vec![
                s.t.into(),
                s.g_bar.into(),
                s.weight.into(),
                s.n_sims.into(),
                s.mean.into(),
                s.var.into(),
                s.limit_mean.into(),
                s.limit_var.into(),
                s.ks.into(),
                s.ks_critical.into(),
            ]);
            table
        }
        (None, Some(n)) => {
            let s = sn_scaling_sim(&cfg, n, a.sims)?;
            let mut table = Table::new(&["n", "normalizer", "weight", "n_sims", "ks", "ks_critical"]);
            table.push(vec![
                s.n.into(),
                s.normalizer.into(),
                s.weight.into(),
                s.n_sims.into(),
                s.ks.into(),
                s.ks_critical.into(),
            ]);
            table
        }
        (None, None) => return Err(CliError::Usage("one of --t or --n is required".into())),
    };
    Ok(Outcome::report(table))
}

fn verify(a: &VerifyArgs, stderr: &mut dyn Write) -> Result<Outcome, CliError> {
    let dist = match (&a.dist, a.alpha) {
        (Some(name), Some(alpha)) => Some(catalog_lookup(name, alpha, a.beta)?),
        _ => None,
    };
    let suites: Vec<Suite> = if a.suite == "all" {
        Suite::ALL
            .into_iter()
            .filter(|s| dist.is_none() || s.takes_distribution())
            .collect()
    } else {
        let s: Suite = a.suite.parse().map_err(|e: Error| CliError::Usage(e.to_string()))?;
        if dist.is_some() && !s.takes_distribution() {
            return Err(CliError::Usage(format!("suite `{s}` does not take --dist")));
        }
        vec![s]
    };
    let opts = VerifyOptions { seed: a.seed, dist };
    let mut table = Table::new(&["criterion", "suite", "check", "value", "lo", "hi", "passed"]);
    let mut passed = true;
    for s in suites {
        let report = run_suite(s, &opts)?;
        writeln!(
            stderr,
            "criterion {} {} {} ({} checks, {:.2}s)",
            s.criterion(),
            s,
            if report.passed() { "PASS" } else { "FAIL" },
            report.checks.len(),
            report.seconds
        )?;
        passed &= report.passed();
        for c in report.checks {
            table.push(vec![
                Cell::Int(s.criterion() as u64),
                s.name().into(),
                c.label.into(),
                c.value.into(),
                c.lo.into(),
                c.hi.into(),
                c.passed.into(),
            ]);
        }
    }
    Ok(Outcome { table, passed })
}

fn catalog() -> Outcome {
    let mut table = Table::new(&["name", "params", "summary"]);
    for e in CATALOG {
        table.push(vec![e.name.into(), e.params.join(" ").into(), e.summary.into()]);
    }
    Outcome::report(table)
}
