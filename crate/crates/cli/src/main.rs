mod args;
mod commands;
mod record;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context as _, Result};
use clap::Parser;

use args::{Cli, Command};
use commands::Context;
use record::{Outcome, RunRecord};

fn run(cli: &Cli) -> Result<bool> {
    let common = match &cli.command {
        Command::Report(a) => {
            let path = report::report(&a.run_dir)?;
            println!("wrote {}", path.display());
            return Ok(true);
        }
        Command::Eigs(a) => &a.common,
        Command::Weyl(a) => &a.common,
        Command::Nentire(a) => &a.common,
        Command::Verify(a) => &a.common,
        Command::Cconds(a) => &a.common,
        Command::Kernel(a) => &a.common,
    };
    let tol = commands::load_tolerances(common.tol.as_deref())?;
    let problem = nentire_core::resolve_problem(&common.problem)?;
    std::fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    let ctx = Context { problem: &problem, engine: nentire_core::ode::Engine::new(&problem, tol.clone()), out: common.out.clone() };
    let start = Instant::now();
    let outcome: Outcome = match &cli.command {
        Command::Eigs(a) => commands::eigs(&ctx, a)?,
        Command::Weyl(a) => commands::weyl(&ctx, a)?,
        Command::Nentire(a) => commands::nentire(&ctx, a)?,
        Command::Verify(a) => commands::verify(&ctx, a)?,
        Command::Cconds(a) => commands::cconds(&ctx, a)?,
        Command::Kernel(a) => commands::kernel(&ctx, a)?,
        Command::Report(_) => unreachable!(),
    };
    let failed: Vec<String> = outcome.failed().iter().map(|c| format!("{} = {:e} (threshold {:e})", c.name, c.value, c.threshold)).collect();
    let rec = RunRecord {
        problem_hash: record::problem_hash(&problem),
        problem: serde_json::to_value(problem.to_config())?,
        command: cli.command.name().into(),
        parameters: serde_json::to_value(&cli.command)?,
        outputs: outcome.outputs.clone(),
        tolerances: tol,
        wall_time_s: start.elapsed().as_secs_f64(),
        checks: outcome.checks.clone(),
        pass: failed.is_empty(),
        summary: outcome.summary,
    };
    record::append(&common.out, &rec)?;
    for p in &outcome.outputs {
        println!("wrote {}", p.display());
    }
    for f in &failed {
        eprintln!("check failed: {f}");
    }
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
