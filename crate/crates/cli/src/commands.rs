use crate::config::RunConfig;
use adg_core::problem::Direction;
use adg_core::verification::{
    adjoint_identity_check, convergence_outcomes, convergence_study, fd_outcomes, weak_strong_consistency,
    weak_strong_outcomes, write_convergence_csv, write_outcomes_csv, CheckOutcome, DEFAULT_EPSILONS,
};
use adg_core::DgField;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Core(#[from] adg_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum VerifyWhich {
    Fd,
    Adjoint,
    Weakstrong,
    All,
}

fn write_file(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<PathBuf, CommandError> {
    let path = dir.join(name);
    let io_err = |source| CommandError::Io {
        path: path.clone(),
        source,
    };
    fs::create_dir_all(dir).map_err(io_err)?;
    let mut out = BufWriter::new(File::create(&path).map_err(io_err)?);
    body(&mut out).and_then(|_| out.flush()).map_err(io_err)?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

fn write_header<W: Write>(header: &[String], out: &mut W) -> io::Result<()> {
    header.iter().try_for_each(|line| writeln!(out, "# {line}"))
}

/// Runs the forward model and writes solution snapshots and the cost.
pub fn forward(cfg: &RunConfig) -> Result<f64, CommandError> {
    let problem = &cfg.problem;
    let params = problem.default_params();
    let disc = problem.disc.clone();
    let names: Vec<&str> = problem.operator(&params)?.component_names().to_vec();
    let n_steps = problem.grid.n_steps;
    let every = if cfg.output_every == 0 { n_steps } else { cfg.output_every };
    let mut snapshots = Vec::new();
    let run = problem.forward_with(&params, &mut |n, t, q| {
        if n.is_multiple_of(every) || n == n_steps {
            snapshots.push((t, q.to_vec()));
        }
    })?;
    let header = cfg.header();
    write_file(&cfg.output_dir, "forward_solution.csv", |out| {
        write_header(&header, out)?;
        for (i, (t, q)) in snapshots.into_iter().enumerate() {
            let field = DgField::from_vec(&names, disc.n_elements(), disc.n_nodes(), q)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
            field.write_csv(&disc, Some(t), i == 0, out)?;
        }
        Ok(())
    })?;
    write_file(&cfg.output_dir, "forward_summary.csv", |out| {
        write_header(&header, out)?;
        writeln!(out, "quantity,value")?;
        writeln!(out, "cost,{:.15e}", run.cost)?;
        writeln!(out, "n_steps,{n_steps}")?;
        writeln!(out, "dt,{:.15e}", problem.grid.dt())
    })?;
    println!("cost = {:.15e}", run.cost);
    Ok(run.cost)
}

/// Computes the discrete gradient and its directional derivatives.
pub fn gradient(cfg: &RunConfig, direction: Direction) -> Result<(), CommandError> {
    let problem = &cfg.problem;
    let params = problem.default_params();
    let (cost, report) = problem.gradient(&params)?;
    let d = problem.direction(direction, cfg.seed)?;
    let d_di = report
        .directional_derivative(&d)
        .map_err(adg_core::Error::from)?;
    let d_co = report
        .comparator_directional(&d)
        .map_err(adg_core::Error::from)?;
    let mut header = cfg.header();
    header.push(format!("direction = {direction}"));
    write_file(&cfg.output_dir, "gradient.csv", |out| report.write_csv(&header, out))?;
    write_file(&cfg.output_dir, "gradient_summary.csv", |out| {
        write_header(&header, out)?;
        writeln!(out, "quantity,value")?;
        writeln!(out, "cost,{cost:.15e}")?;
        writeln!(out, "d_di,{d_di:.15e}")?;
        writeln!(out, "d_co,{d_co:.15e}")?;
        writeln!(out, "gap,{:.15e}", (d_di - d_co).abs() / d_di.abs().max(f64::MIN_POSITIVE))
    })?;
    println!("cost = {cost:.15e}");
    println!("d_di = {d_di:.15e}");
    println!("d_co = {d_co:.15e}");
    Ok(())
}

/// Runs the selected verification checks; fails if any check fails.
pub fn verify(cfg: &RunConfig, which: VerifyWhich, direction: Direction) -> Result<(), CommandError> {
    let problem = &cfg.problem;
    let kind = problem.kind();
    let k = problem.disc.n_elements();
    let order = problem.disc.basis.order();
    let header = cfg.header();
    let mut outcomes: Vec<CheckOutcome> = Vec::new();

    if matches!(which, VerifyWhich::Adjoint | VerifyWhich::All) {
        let op = problem.operator(&problem.default_params())?;
        let worst = (cfg.seed..cfg.seed + 20)
            .map(|s| adjoint_identity_check(op.as_ref(), s))
            .fold(0.0f64, f64::max);
        outcomes.push(CheckOutcome::at_most(format!("adjoint_identity/{kind}"), worst, 1e-12));
    }
    if matches!(which, VerifyWhich::Fd | VerifyWhich::All) {
        let params = problem.default_params();
        let d = problem.direction(direction, cfg.seed)?;
        let (sweep, checks) = fd_outcomes(problem, &params, &d, &DEFAULT_EPSILONS, &format!("{kind}/{direction}"))?;
        write_file(&cfg.output_dir, "verify_fd.csv", |out| sweep.write_csv(&header, out))?;
        outcomes.extend(checks);
    }
    if matches!(which, VerifyWhich::Weakstrong | VerifyWhich::All) {
        let report = weak_strong_consistency(kind, k, order)?;
        outcomes.extend(weak_strong_outcomes(&report, &format!("{kind}/N={order}/K={k}"), 1e-12));
    }

    write_file(&cfg.output_dir, "verify_checks.csv", |out| {
        write_header(&header, out)?;
        write_outcomes_csv(&outcomes, out)
    })?;
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    if failed > 0 {
        return Err(CommandError::ChecksFailed {
            failed,
            total: outcomes.len(),
        });
    }
    Ok(())
}

/// h-refinement study of state and adjoint errors for the configured model.
pub fn convergence(cfg: &RunConfig, orders: &[usize], levels: &[usize]) -> Result<(), CommandError> {
    let kind = cfg.problem.kind();
    let rows = convergence_study(kind, orders, levels, 0.0)?;
    let mut header = cfg.header();
    header.push(format!(
        "orders = {}; levels = {}",
        orders.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(","),
        levels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
    ));
    write_file(&cfg.output_dir, "convergence.csv", |out| write_convergence_csv(&rows, &header, out))?;
    for r in &rows {
        println!(
            "N={} K={:>4} state {:.3e} (rate {:.2})  adjoint {:.3e} (rate {:.2})",
            r.order, r.k, r.state_error, r.state_rate, r.adjoint_error, r.adjoint_rate
        );
    }
    for o in convergence_outcomes(kind, &rows).iter().filter(|o| !o.pass) {
        log::warn!("{o}");
    }
    Ok(())
}
