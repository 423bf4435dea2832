use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context as _, Result};
use nentire_core::config::Tolerances;
use nentire_core::debranges::{self, HermiteBiehler};
use nentire_core::nentire::{self, ExtensionPair, L2Class};
use nentire_core::ode::Engine;
use nentire_core::spectral::{self, minimal_moment_order};
use nentire_core::weyl::{self, WeylFunction, WeylGauge};
use nentire_core::{Error, SturmLiouvilleProblem, C64};
use rand::{Rng, SeedableRng};
use serde_json::json;

use crate::args::*;
use crate::record::{write_csv, write_json, Check, Outcome};

pub struct Context<'a> {
    pub problem: &'a SturmLiouvilleProblem,
    pub engine: Engine<'a>,
    pub out: PathBuf,
}

impl Context<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

pub fn load_tolerances(path: Option<&Path>) -> Result<Tolerances> {
    match path {
        None => Ok(Tolerances::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(Tolerances::from_json(&text)?)
        }
    }
}

/// Accepts `x`, `x+yi`, `x-yi`, `yi` or `x,y`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let t = s.trim();
    if let Some((a, b)) = t.split_once(',') {
        return Ok(C64::new(a.trim().parse()?, b.trim().parse()?));
    }
    C64::from_str(t).map_err(|_| anyhow!("cannot parse complex number '{s}'"))
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn read_table(path: &Path, width: usize) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let vals: std::result::Result<Vec<f64>, _> = rec.iter().map(|v| v.trim().parse::<f64>()).collect();
        match vals {
            Ok(v) if v.len() == width => rows.push(v),
            // header line
            Err(_) if rows.is_empty() => continue,
            _ => bail!("{}: expected {width} numeric columns, got '{}'", path.display(), rec.iter().collect::<Vec<_>>().join(",")),
        }
    }
    Ok(rows)
}

pub fn eigs(ctx: &Context<'_>, a: &EigsArgs) -> Result<Outcome> {
    let spec = spectral::compute_spectrum(&ctx.engine, a.lmax, if a.lmax.is_some() { usize::MAX } else { a.count })?;
    let csv_path = ctx.path("eigs.csv");
    write_csv(
        &csv_path,
        &["k", "lambda", "gamma", "c", "wprime"],
        (0..spec.len()).map(|i| vec![(i + 1).to_string(), num(spec.eigenvalues[i]), num(spec.gamma[i]), num(spec.c[i]), num(spec.wprime[i])]),
    )?;
    let probes = spectral::completeness_probes(&ctx.engine, &spec)?;
    let validation = nentire_core::validate_potential(ctx.problem, ctx.engine.tol.weighted_ceiling)?;
    let mut checks = vec![
        Check::flag("completeness_probes", probes.iter().all(|p| p.count == p.expected)),
        Check::flag("potential_admissible", validation.pass),
        Check::info("atoms", spec.len() as f64),
    ];
    if let Some(t) = &spec.tail {
        checks.push(Check::info("tail_exponent_p", t.p));
        checks.push(Check::info("tail_mass_exponent_r", t.r));
    }
    let json_path = ctx.path("eigs.json");
    let summary = json!({ "atoms": spec.len(), "tail": spec.tail, "probes": probes, "validation": validation });
    write_json(&json_path, &summary)?;
    Ok(Outcome { checks, outputs: vec![csv_path, json_path], summary })
}

pub fn weyl(ctx: &Context<'_>, a: &WeylArgs) -> Result<Outcome> {
    let spec = spectral::compute_spectrum(&ctx.engine, None, a.count.max(1))?;
    let wf = WeylFunction::new(&ctx.engine)?.with_spectrum(&spec);
    let zs: Vec<C64> = match &a.z_grid {
        Some(p) => read_table(p, 2)?.into_iter().map(|v| C64::new(v[0], v[1])).collect(),
        None => {
            let top = spec.eigenvalues.last().copied().unwrap_or(10.0) + 5.0;
            let lo = spec.eigenvalues.first().copied().unwrap_or(0.0) - 5.0;
            (0..200).map(|i| C64::new(lo + (top - lo) * i as f64 / 199.0, 0.5)).collect()
        }
    };
    let gauge = match &a.gauge {
        Some(p) => Some(WeylGauge::from_json(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?),
        None => None,
    };
    let mut rows = Vec::with_capacity(zs.len());
    for &z in &zs {
        let mut row = vec![num(z.re), num(z.im)];
        match wf.eval(z) {
            Ok(m) => row.extend([num(m.re), num(m.im), num(m.norm())]),
            Err(Error::NearPole { .. }) => row.extend(["".into(), "".into(), "".into()]),
            Err(e) => return Err(e.into()),
        }
        if let Some(g) = &gauge {
            match wf.eval_gauged(z, g) {
                Ok(m) => row.extend([num(m.re), num(m.im)]),
                Err(Error::NearPole { .. }) => row.extend(["".into(), "".into()]),
                Err(e) => return Err(e.into()),
            }
        }
        rows.push(row);
    }
    let mut header = vec!["re_z", "im_z", "re_m", "im_m", "abs_m"];
    if gauge.is_some() {
        header.extend(["re_m_gauged", "im_m_gauged"]);
    }
    let csv_path = ctx.path("weyl.csv");
    write_csv(&csv_path, &header, rows)?;

    let tol = &ctx.engine.tol;
    let residue = weyl::residue_check(&wf, &spec, 0)?;
    let stieltjes = weyl::stieltjes_recovery(&wf, &spec, 0)?;
    let samples = [C64::new(0.3, 1.0), C64::new(-2.0, 0.5), C64::new(7.5, 2.0)];
    let conj = weyl::conjugation_defect(&wf, &samples)?;
    let herglotz = weyl::herglotz_gauge(&spec, tol.moment_margin).ok();
    let checks = vec![
        Check::at_most("residue_at_lambda_1", residue.residual, tol.identity_tol),
        Check::at_most("stieltjes_gamma_1", stieltjes.residual, 1e-4),
        Check::at_most("conjugation_symmetry", conj, 1e-8),
        Check::info("convention_defect", wf.convention_defect),
    ];
    let json_path = ctx.path("weyl.json");
    let summary = json!({ "sigma": wf.sigma, "residue": residue, "stieltjes": stieltjes, "conjugation_defect": conj, "herglotz": herglotz });
    write_json(&json_path, &summary)?;
    Ok(Outcome { checks, outputs: vec![csv_path, json_path], summary })
}

pub fn nentire(ctx: &Context<'_>, a: &NentireArgs) -> Result<Outcome> {
    let z = parse_complex(&a.z)?;
    let spec = spectral::compute_spectrum(&ctx.engine, None, a.count.max(8))?;
    let mut report = nentire::minimal_n_estimate(&ctx.engine, z, a.jmax, Some(&spec))?;
    if report.moment_n.is_none() {
        report.moment_n = minimal_moment_order(&spec, ctx.engine.tol.moment_margin, a.jmax + 1);
    }
    let mut outputs = Vec::new();
    for r in &report.classifications {
        let p = ctx.path(&format!("ladder_j{}.csv", r.j));
        write_csv(&p, &["eps", "integral"], r.ladder.iter().map(|&(e, v)| vec![num(e), num(v)]))?;
        outputs.push(p);
    }
    if a.dump_jets {
        outputs.push(dump_jets(ctx, z, a.jmax)?);
    }
    let marginal = report.classifications.iter().any(|r| r.class == L2Class::Marginal);
    let mut checks = vec![Check::flag("no_marginal_orders", !marginal), Check::flag("monotone_ladder", report.monotone)];
    match report.minimal_n {
        Some(n) => {
            checks.push(Check::flag("threshold_matches", n == report.n_threshold));
            if let Some(m) = report.moment_n {
                checks.push(Check::flag("moment_equivalence", n == m));
            }
        }
        None => checks.push(Check::flag("integrable_order_found", false)),
    }
    let json_path = ctx.path("nentire.json");
    write_json(&json_path, &report)?;
    outputs.push(json_path);
    let summary = json!({
        "l": report.l,
        "minimal_n": report.minimal_n,
        "n_threshold": report.n_threshold,
        "n_floor_reading": report.n_floor_reading,
        "moment_n": report.moment_n,
        "classes": report.classifications.iter().map(|r| json!({"j": r.j, "class": r.class, "s": r.s})).collect::<Vec<_>>(),
    });
    Ok(Outcome { checks, outputs, summary })
}

fn dump_jets(ctx: &Context<'_>, z: C64, order: usize) -> Result<PathBuf> {
    let order = order.min(ctx.engine.tol.max_jet_order);
    let phi = ctx.engine.regular_solution(z, order)?;
    let p = ctx.path("phi_jets.csv");
    fs::write(&p, phi.to_csv()).with_context(|| format!("writing {}", p.display()))?;
    Ok(p)
}

pub fn verify(ctx: &Context<'_>, a: &VerifyArgs) -> Result<Outcome> {
    let z = parse_complex(&a.z)?;
    let w = parse_complex(&a.w)?;
    let tol = ctx.engine.tol.clone();
    let eng = &ctx.engine;
    let result: nentire_core::Result<(serde_json::Value, f64, f64)> = (|| {
        Ok(match a.identity {
            Identity::Mf1 => {
                let r = spectral::mf1_check(eng, w, z)?;
                (json!(r), r.residual, tol.identity_tol)
            }
            Identity::Mf2 => {
                let r = nentire::verify_mf2(eng, w, z, a.j)?;
                (json!(r), r.residual, tol.identity_tol)
            }
            Identity::Mf3 => {
                if a.k == 0 {
                    return Err(Error::Domain("atom index k is 1-based".into()));
                }
                let spec = spectral::eigenvalues(eng, None, a.k)?;
                let r = nentire::verify_mf3(eng, &spec, a.k - 1, z, a.j)?;
                (json!(r), r.residual, tol.identity_tol)
            }
            Identity::Trace => {
                let spec = spectral::compute_spectrum(eng, None, a.count)?;
                let r = spectral::trace_identity(eng, &spec, z)?;
                let abs = (r.spectral_side - r.integral_side).norm();
                (json!(r), abs, tol.trace_tol)
            }
            Identity::Kernel => {
                let e = HermiteBiehler::new(eng, 0.0)?;
                let c = debranges::compare_routes(eng, &e, &[(w, z)]).pop().expect("one pair")?;
                (json!(c), c.rel_diff, tol.kernel_tol)
            }
            Identity::Parseval => {
                let spec = spectral::compute_spectrum(eng, None, a.count)?;
                let r = nentire::parseval_check(eng, &spec, z, a.j)?;
                (json!(r), r.residual, 1e-4)
            }
        })
    })();
    let name = serde_json::to_value(a.identity)?.as_str().unwrap_or("identity").to_string();
    let mut outputs = Vec::new();
    if a.dump_jets {
        outputs.push(dump_jets(ctx, z, a.j)?);
    }
    let (summary, checks) = match result {
        Ok((report, residual, threshold)) => {
            println!("{name}: residual {residual:e} (threshold {threshold:e})");
            (json!({ "identity": name, "report": report, "residual": residual }), vec![Check::at_most(&name, residual, threshold)])
        }
        Err(Error::NotApplicable(why)) => {
            println!("{name}: not applicable ({why})");
            (json!({ "identity": name, "not_applicable": why }), vec![Check::info(&format!("{name}_not_applicable"), f64::NAN)])
        }
        Err(e) => return Err(e.into()),
    };
    let json_path = ctx.path(&format!("verify_{name}.json"));
    write_json(&json_path, &summary)?;
    outputs.push(json_path);
    Ok(Outcome { checks, outputs, summary })
}

pub fn cconds(ctx: &Context<'_>, a: &CcondsArgs) -> Result<Outcome> {
    let first = spectral::compute_spectrum(&ctx.engine, None, a.count)?;
    let other = ctx.problem.with_beta(a.beta2)?;
    let e2 = Engine::new(&other, ctx.engine.tol.clone());
    let second = spectral::compute_spectrum(&e2, None, a.count)?;
    let pair = ExtensionPair { beta1: ctx.problem.bc_right.beta, beta2: a.beta2, first, second };
    let interlaced = pair.check_interlacing();
    let r = nentire::c_conditions(&pair, a.n, ctx.engine.tol.moment_margin)?;
    let csv_path = ctx.path("cconds.csv");
    let c1 = &r.c1_partial_sums;
    let offset = r.c3_terms.len() - c1.len();
    write_csv(
        &csv_path,
        &["k", "x_k", "c1_partial", "c3_term", "c3_partial"],
        (0..r.c3_terms.len()).map(|k| {
            let c1v = if k >= offset { num(c1[k - offset]) } else { String::new() };
            vec![(k + 1).to_string(), num(pair.first.eigenvalues[k]), c1v, num(r.c3_terms[k]), num(r.c3_partial_sums[k])]
        }),
    )?;
    let checks = vec![
        Check::flag("interlacing", interlaced.is_ok()),
        Check::flag("c3_convergent", r.c3_convergent),
        Check::info("c1_value", r.c1_value),
        Check::info("c2_last_ratio", r.c2_last_ratio),
        Check::info("c3_decay_exponent", r.c3_decay_exponent),
    ];
    let json_path = ctx.path("cconds.json");
    let summary = json!({
        "n": r.n, "beta1": pair.beta1, "beta2": pair.beta2,
        "c1_value": r.c1_value, "c2_last_ratio": r.c2_last_ratio, "c2_limit": r.c2_limit,
        "c3_decay_exponent": r.c3_decay_exponent, "c3_convergent": r.c3_convergent,
        "interlacing_error": interlaced.err().map(|e| e.to_string()),
    });
    write_json(&json_path, &summary)?;
    Ok(Outcome { checks, outputs: vec![csv_path, json_path], summary })
}

pub fn kernel(ctx: &Context<'_>, a: &KernelArgs) -> Result<Outcome> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let random_point = |rng: &mut rand_chacha::ChaCha8Rng| C64::new(rng.gen_range(-5.0..30.0), rng.gen_range(-3.0..3.0));
    let pairs: Vec<(C64, C64)> = match &a.pairs {
        Some(p) => read_table(p, 4)?.into_iter().map(|v| (C64::new(v[0], v[1]), C64::new(v[2], v[3]))).collect(),
        None => (0..20).map(|_| (random_point(&mut rng), random_point(&mut rng))).collect(),
    };
    let e = HermiteBiehler::new(&ctx.engine, 0.0)?;
    let comparisons = debranges::compare_routes(&ctx.engine, &e, &pairs).into_iter().collect::<nentire_core::Result<Vec<_>>>()?;
    let csv_path = ctx.path("kernel.csv");
    write_csv(
        &csv_path,
        &["re_w", "im_w", "re_z", "im_z", "re_k_integral", "im_k_integral", "re_k_formula", "im_k_formula", "rel_diff"],
        comparisons.iter().map(|c| {
            vec![num(c.w.re), num(c.w.im), num(c.z.re), num(c.z.im), num(c.integral.re), num(c.integral.im), num(c.formula.re), num(c.formula.im), num(c.rel_diff)]
        }),
    )?;
    let worst = comparisons.iter().map(|c| c.rel_diff).fold(0.0, f64::max);
    let upper: Vec<C64> = (0..50)
        .map(|_| {
            let (r, t) = (rng.gen_range(0.05..10.0), rng.gen_range(0.01..std::f64::consts::PI - 0.01));
            C64::from_polar(r, t)
        })
        .collect();
    let margin = debranges::hb_check(&e, &upper)?;
    let gram_points: Vec<C64> = (0..5).map(|_| random_point(&mut rng)).collect();
    let (gram_min, gram_trace) = debranges::gram_check(&e, &gram_points)?;
    let (min_e, max_im) = debranges::real_axis_check(&e, -10.0, 100.0, 221)?;
    let checks = vec![
        Check::at_most("kernel_routes", worst, ctx.engine.tol.kernel_tol),
        Check::at_least("hermite_biehler_margin", margin, f64::MIN_POSITIVE),
        Check::at_least("gram_min_eigenvalue", gram_min, -1e-9 * gram_trace),
        Check::at_least("real_axis_min_abs_e", min_e, f64::MIN_POSITIVE),
        Check::at_most("real_axis_imag_ab", max_im, 1e-10),
        Check::at_most("wronskian_c_s", e.wronskian_defect()?, 1e-10),
    ];
    let json_path = ctx.path("kernel.json");
    let summary = json!({
        "pairs": comparisons.len(), "max_rel_diff": worst, "hb_margin": margin,
        "gram_min_eigenvalue": gram_min, "gram_trace": gram_trace, "real_axis_min_abs_e": min_e,
    });
    write_json(&json_path, &summary)?;
    Ok(Outcome { checks, outputs: vec![csv_path, json_path], summary })
}
