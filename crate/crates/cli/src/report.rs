use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};

use crate::record::{self, Check, RunRecord};

const ORDER: [&str; 6] = ["eigs", "weyl", "nentire", "verify", "cconds", "kernel"];

fn fmt(x: f64) -> String {
    if x.is_nan() {
        "-".into()
    } else {
        format!("{x:.3e}")
    }
}

fn check_rows(out: &mut String, checks: &[Check]) {
    for c in checks {
        let status = if !c.hard { "info" } else if c.pass { "pass" } else { "FAIL" };
        let _ = writeln!(out, "| {} | {} | {} | {} |", c.name, fmt(c.value), fmt(c.threshold), status);
    }
}

fn headline(r: &RunRecord) -> Option<String> {
    let s = &r.summary;
    match r.command.as_str() {
        "eigs" => s["tail"]["p"].as_f64().map(|p| format!("tail-fit exponent p = {p:.4} over {} atoms", s["atoms"])),
        "nentire" => Some(format!(
            "minimal n (empirical) = {}; threshold bound n >= {}; floor(l + 5/2) reading = {}; moment test n = {}",
            s["minimal_n"], s["n_threshold"], s["n_floor_reading"], s["moment_n"]
        )),
        "verify" => s["identity"].as_str().map(|i| match s["residual"].as_f64() {
            Some(res) => format!("identity {i}: residual {res:.3e}"),
            None => format!("identity {i}: not applicable"),
        }),
        "cconds" => Some(format!("C1 value {}; C3 decay exponent {}; convergent {}", s["c1_value"], s["c3_decay_exponent"], s["c3_convergent"])),
        "kernel" => Some(format!("max route difference {}; Hermite-Biehler margin {}", s["max_rel_diff"], s["hb_margin"])),
        "weyl" => Some(format!("residue residual {}; Stieltjes residual {}", s["residue"]["residual"], s["stieltjes"]["residual"])),
        _ => None,
    }
}

/// Writes `report.md` into the run directory and returns its path.
pub fn report(dir: &Path) -> Result<PathBuf> {
    if !dir.is_dir() {
        bail!("run directory {} does not exist", dir.display());
    }
    if !dir.join(record::RUNS_FILE).exists() {
        bail!("no run records in {}", dir.display());
    }
    let records = record::load(dir)?;
    if records.is_empty() {
        bail!("no readable run records in {}", dir.display());
    }
    let mut by_cmd: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in &records {
        by_cmd.entry(r.command.as_str()).or_default().push(r);
    }
    let mut out = String::from("# Run report\n\n");
    let _ = writeln!(out, "{} runs, {} failing.\n", records.len(), records.iter().filter(|r| !r.pass).count());
    for cmd in ORDER {
        let Some(runs) = by_cmd.get(cmd) else { continue };
        let _ = writeln!(out, "## {cmd}\n");
        for r in runs {
            let _ = writeln!(out, "### problem {} ({:.2} s)\n", &r.problem_hash[..12], r.wall_time_s);
            if let Some(h) = headline(r) {
                let _ = writeln!(out, "{h}\n");
            }
            out.push_str("| check | value | threshold | status |\n|---|---|---|---|\n");
            check_rows(&mut out, &r.checks);
            let plots: Vec<String> = r.outputs.iter().filter(|p| p.extension().is_some_and(|e| e == "csv")).map(|p| format!("`{}`", p.display())).collect();
            if !plots.is_empty() {
                let _ = writeln!(out, "\nPlot data: {}", plots.join(", "));
            }
            let _ = writeln!(out, "\nTolerances: `{}`\n", serde_json::to_string(&r.tolerances)?);
        }
    }
    let path = dir.join("report.md");
    std::fs::write(&path, out)?;
    Ok(path)
}
