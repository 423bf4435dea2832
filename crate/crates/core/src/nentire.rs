//! Derivatives of the Weyl solution `psi = chi / W = theta + M phi`, their
//! square integrability at the singular endpoint, the identities relating
//! them to the spectrum, the products `h_beta` and conditions (C1)–(C3).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::jet::{factorial, Jet, C64};
use crate::ode::{Engine, Grid, PassSpec};
use crate::quadrature;
use crate::spectral::{cross_integrals, minimal_moment_order, Spectrum, TailFit};
use crate::weyl::{contour_derivative, WeylFunction};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PsiRoute {
    /// `chi * (1/W)` with the exact reciprocal recursion.
    Leibniz,
    /// `theta + M phi` with `M`-derivatives from contour averages.
    WeylCoefficients,
}

/// `psi^{(j)}(z, x)` and its x-derivative on a grid (derivative form).
#[derive(Clone, Debug)]
pub struct PsiJet {
    pub z: C64,
    pub order: usize,
    pub grid: Arc<Grid>,
    /// `values[i][j] = d^j psi / dz^j` at grid point `i`.
    pub values: Vec<Vec<C64>>,
    pub slopes: Vec<Vec<C64>>,
    pub route: PsiRoute,
}

impl PsiJet {
    /// Largest relative difference to another jet on the same grid.
    pub fn max_relative_difference(&self, other: &PsiJet) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut worst: f64 = 0.0;
        for j in 0..=self.order.min(other.order) {
            let scale = self.values.iter().map(|v| v[j].norm()).fold(0.0, f64::max);
            for (a, b) in self.values.iter().zip(&other.values) {
                worst = worst.max((a[j] - b[j]).norm() / scale);
            }
        }
        Ok(worst)
    }
}

fn min_wronskian(engine: &Engine<'_>) -> f64 {
    engine.tol.pole_exclusion * 1e-4
}

/// `psi` jets via `chi / W`.
pub fn psi_jet(engine: &Engine<'_>, z: C64, order: usize) -> Result<PsiJet> {
    let grid = engine.grid_for(&[(z, order)])?;
    psi_jet_on(engine, z, order, &grid)
}

pub fn psi_jet_on(engine: &Engine<'_>, z: C64, order: usize, grid: &Arc<Grid>) -> Result<PsiJet> {
    let chi = engine.endpoint_solution(z, order, grid)?;
    let f = engine.fundamental(z, order, grid, false)?;
    let last = grid.points.len() - 1;
    let w = engine.endpoint_wronskian(&f.phi.values[last], &f.phi.slopes[last]);
    if w.value().norm() < min_wronskian(engine) {
        return Err(Error::NearPole { z: format!("{z}"), pole: z.re, radius: w.value().norm() });
    }
    let inv = w.recip();
    let conv = |u: &Jet| (u * &inv).derivatives();
    Ok(PsiJet {
        z,
        order,
        grid: grid.clone(),
        values: chi.values.iter().map(conv).collect(),
        slopes: chi.slopes.iter().map(conv).collect(),
        route: PsiRoute::Leibniz,
    })
}

/// `psi` jets via `theta + M phi` on the same grid as [`psi_jet`], with the
/// Taylor coefficients of `M` taken from contour averages of radius `radius`.
pub fn psi_jet_weyl_route(wf: &WeylFunction<'_>, z: C64, order: usize, radius: f64) -> Result<PsiJet> {
    let engine = wf.engine();
    let grid = engine.grid_for(&[(z, order)])?;
    let f = engine.fundamental(z, order, &grid, true)?;
    let theta = f.theta.expect("theta requested");
    let mut m = Jet::zero(order);
    for j in 0..=order {
        m.0[j] = contour_derivative(|w| wf.eval(w), z, radius, 64, j)? / factorial(j);
    }
    let build = |t: &Jet, p: &Jet| (t + &(&m * p)).derivatives();
    Ok(PsiJet {
        z,
        order,
        grid: grid.clone(),
        values: theta.values.iter().zip(&f.phi.values).map(|(t, p)| build(t, p)).collect(),
        slopes: theta.slopes.iter().zip(&f.phi.slopes).map(|(t, p)| build(t, p)).collect(),
        route: PsiRoute::WeylCoefficients,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum L2Class {
    Integrable,
    Divergent,
    Marginal,
}

/// Ladder of `I(eps) = int_eps^b |psi^{(j)}|^2` at `eps = b 2^{-m}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct L2Report {
    pub j: usize,
    pub z: C64,
    /// `(eps_m, I(eps_m))`, `m = 1..=levels`.
    pub ladder: Vec<(f64, f64)>,
    /// `log2(dI_{m+1} / dI_m)` for consecutive octaves.
    pub exponents: Vec<f64>,
    /// Exponent `s` used for the verdict (deepest octaves).
    pub s: f64,
    /// Fitted local exponent `e` with `|psi_j(x)| ~ x^e` near 0.
    pub local_exponent: f64,
    pub stabilized: bool,
    pub class: L2Class,
}

/// Taylor coefficients of `psi` from `theta`/`phi` block data and `M`.
fn psi_taylor(m: &Jet, block: &crate::ode::BlockView<'_>, j: usize) -> C64 {
    block.theta(j) + (0..=j).map(|i| m.coeff(i) * block.phi(j - i)).sum::<C64>()
}

/// Weyl coefficient jet `W(theta,chi)/W(chi,phi)` at `z`.
fn weyl_jet(engine: &Engine<'_>, z: C64, order: usize) -> Result<Jet> {
    let (phi, dphi, th) = engine.at_endpoint(z, order, true)?;
    let (theta, dtheta) = th.expect("theta requested");
    let w = engine.endpoint_wronskian(&phi, &dphi);
    if w.value().norm() < min_wronskian(engine) {
        return Err(Error::NearPole { z: format!("{z}"), pole: z.re, radius: w.value().norm() });
    }
    Ok(&(-&engine.endpoint_wronskian(&theta, &dtheta)) * &w.recip())
}

/// Classifies `psi^{(j)}(z, .)` as square integrable near `0` or not.
pub fn l2_classification(engine: &Engine<'_>, z: C64, j: usize) -> Result<L2Report> {
    let tol: &Tolerances = &engine.tol;
    let b = engine.problem.b;
    let levels = tol.ladder_levels.max(6);
    let m = weyl_jet(engine, z, j)?;
    let eps: Vec<f64> = (1..=levels).map(|k| b * 0.5f64.powi(k as i32)).collect();
    let stops = &eps[..];
    let lower = 0.5 * eps[levels - 1];
    let fact = factorial(j);
    let integrand = |_x: f64, blocks: crate::ode::Blocks<'_>, out: &mut [C64]| {
        let v = psi_taylor(&m, &blocks.get(0), j) * fact;
        out[0] = C64::new(v.norm_sqr(), 0.0);
    };
    let r = engine.pass(&[PassSpec { z, order: j, theta: true }], lower, stops, 1, &integrand)?;
    let ladder: Vec<(f64, f64)> = stops.iter().zip(&r.upper).map(|(&e, u)| (e, u[0].re)).collect();
    // dI_m = int_{eps_{m+1}}^{eps_m}
    let d: Vec<f64> = r.pieces.iter().skip(1).map(|p| p[0].re).collect();
    if d.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::Quadrature("ladder is not monotone".into()));
    }
    let exponents: Vec<f64> = d.windows(2).map(|w| (w[1] / w[0]).log2()).collect();
    let tail = &exponents[exponents.len().saturating_sub(5)..];
    let mut sorted = tail.to_vec();
    sorted.sort_by(f64::total_cmp);
    let s = sorted[sorted.len() / 2];
    let n = ladder.len();
    let last3 = &ladder[n - 3..];
    let top = last3.iter().map(|p| p.1).fold(0.0, f64::max);
    let bottom = last3.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let stabilized = top.is_finite() && (top - bottom) <= tol.ladder_stabilization * top.abs().max(1e-300);
    let class = if s > tol.divergent_exponent {
        L2Class::Divergent
    } else if s <= 0.0 && stabilized {
        L2Class::Integrable
    } else {
        L2Class::Marginal
    };
    Ok(L2Report { j, z, ladder, exponents, s, local_exponent: -(s + 1.0) / 2.0, stabilized, class })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    pub j: usize,
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
}

/// `((w-z)^{j+1}/j!) int phi(w) psi^{(j)}(z) = 1 + sum_{k<=j} ((w-z)^k/k!) W_b(phi(w), psi^{(k)}(z))`.
pub fn verify_mf2(engine: &Engine<'_>, w: C64, z: C64, j: usize) -> Result<IdentityReport> {
    if (w - z).norm() == 0.0 {
        return Err(Error::Domain("mf2 needs w != z".into()));
    }
    let x = cross_integrals(engine, w, z, j, 0.0)?;
    if !x.converged {
        return Err(Error::NotApplicable(format!("int phi(w) psi^({j})(z) diverges")));
    }
    let d = w - z;
    let lhs = d.powi(j as i32 + 1) / factorial(j) * x.phi_psi()[j];
    let (pw, dpw) = x.end_phi_w;
    let rhs = C64::new(1.0, 0.0)
        + x.psi_at_b()
            .iter()
            .enumerate()
            .map(|(k, &(u, du))| d.powi(k as i32) / factorial(k) * (pw * du - dpw * u))
            .sum::<C64>();
    Ok(IdentityReport { identity: "mf2".into(), j, lhs, rhs, residual: (lhs - rhs).norm() / rhs.norm().max(1e-300) })
}

/// `int phi(lambda_k) psi^{(j)}(z) = j! / (lambda_k - z)^{j+1}` (0-based `k`).
pub fn verify_mf3(engine: &Engine<'_>, spectrum: &Spectrum, k: usize, z: C64, j: usize) -> Result<IdentityReport> {
    let lambda = *spectrum
        .eigenvalues
        .get(k)
        .ok_or_else(|| Error::NotApplicable(format!("atom {k} not computed")))?;
    let lc = C64::new(lambda, 0.0);
    let x = cross_integrals(engine, lc, z, j, 0.0)?;
    if !x.converged {
        return Err(Error::NotApplicable(format!("int phi psi^({j}) diverges")));
    }
    let lhs = x.phi_psi()[j];
    let rhs = factorial(j) / (lc - z).powi(j as i32 + 1);
    Ok(IdentityReport { identity: "mf3".into(), j, lhs, rhs, residual: (lhs - rhs).norm() / rhs.norm() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParsevalReport {
    pub j: usize,
    pub z: C64,
    pub class: L2Class,
    pub norm_squared: f64,
    pub spectral_sum: f64,
    pub tail: f64,
    pub residual: f64,
}

/// `int |psi^{(j)}|^2 = sum gamma_k (j!)^2 |lambda_k - z|^{-2(j+1)}` plus the model tail.
pub fn parseval_check(engine: &Engine<'_>, spectrum: &Spectrum, z: C64, j: usize) -> Result<ParsevalReport> {
    let cls = l2_classification(engine, z, j)?;
    if cls.class != L2Class::Integrable {
        return Err(Error::NotApplicable(format!("psi^({j}) is classified {:?}", cls.class)));
    }
    let m = weyl_jet(engine, z, j)?;
    let fact = factorial(j);
    let integrand = |_x: f64, blocks: crate::ode::Blocks<'_>, out: &mut [C64]| {
        let v = psi_taylor(&m, &blocks.get(0), j) * fact;
        out[0] = C64::new(v.norm_sqr(), 0.0);
    };
    let r = engine.pass(&[PassSpec { z, order: j, theta: true }], 0.0, &[], 1, &integrand)?;
    let norm_squared = r.total[0].re;
    let p = 2 * (j as i32 + 1);
    let term = |l: f64, g: f64| g * fact * fact / (C64::new(l, 0.0) - z).norm().powi(p);
    let spectral_sum: f64 = spectrum.atoms().map(|(l, g)| term(l, g)).sum();
    let fit = spectrum.tail.clone().or_else(|| spectrum.fit_tail().ok());
    let tail = match &fit {
        Some(t) => quadrature::tail_sum(|k| C64::new(term(t.lambda(k), t.gamma(k)), 0.0), spectrum.len()).re,
        None => 0.0,
    };
    let total = spectral_sum + tail;
    Ok(ParsevalReport {
        j,
        z,
        class: cls.class,
        norm_squared,
        spectral_sum,
        tail,
        residual: (norm_squared - total).abs() / norm_squared,
    })
}

/// `h(z) = prod (1 - z / lambda_k)` over the atoms times the model tail
/// `exp(sum_{k>N} log(1 - z/lambda_k))`; a zero atom contributes the factor `z`.
pub fn h_beta(spectrum: &Spectrum, z: C64) -> Result<C64> {
    let mut prod = C64::new(1.0, 0.0);
    for &l in &spectrum.eigenvalues {
        if z == C64::new(l, 0.0) {
            return Ok(C64::new(0.0, 0.0));
        }
        prod *= if l == 0.0 { z } else { 1.0 - z / l };
    }
    let fit = spectrum
        .tail
        .clone()
        .or_else(|| spectrum.fit_tail().ok())
        .ok_or_else(|| Error::TailFit("h_beta needs a tail model".into()))?;
    Ok(prod * h_tail(&fit, spectrum.len(), z).exp())
}

/// `sum_{k > n} log(1 - z / (a (k + delta)^2))`.
fn h_tail(fit: &TailFit, n: usize, z: C64) -> C64 {
    quadrature::tail_sum(|k| (1.0 - z / fit.lambda(k)).ln(), n)
}

/// `h'` at `lambda_k` by centered differences starting at a tenth of the local gap.
pub fn h_beta_derivative_at(spectrum: &Spectrum, k: usize) -> Result<f64> {
    let e = &spectrum.eigenvalues;
    let gap = if k + 1 < e.len() { e[k + 1] - e[k] } else { e[k] - e[k - 1] };
    let gap = if k > 0 { gap.min(e[k] - e[k - 1]) } else { gap };
    let h = 0.1 * gap;
    let f = |x: f64| h_beta(spectrum, C64::new(x, 0.0)).map(|v| v.re);
    // centered differences at h, h/2, h/4, ... with Richardson extrapolation
    let mut table: Vec<Vec<f64>> = Vec::new();
    for level in 0..5 {
        let step = h * 0.5f64.powi(level);
        let mut row = vec![(f(e[k] + step)? - f(e[k] - step)?) / (2.0 * step)];
        for m in 1..=level as usize {
            let p = 4f64.powi(m as i32);
            row.push((p * row[m - 1] - table[level as usize - 1][m - 1]) / (p - 1.0));
        }
        table.push(row);
    }
    Ok(*table.last().unwrap().last().unwrap())
}

/// Spectra of two self-adjoint realizations differing only in the angle at `b`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtensionPair {
    pub beta1: f64,
    pub beta2: f64,
    pub first: Spectrum,
    pub second: Spectrum,
}

impl ExtensionPair {
    pub fn new(beta1: f64, first: Spectrum, beta2: f64, second: Spectrum) -> Result<Self> {
        let p = Self { beta1, beta2, first, second };
        p.check_interlacing()?;
        Ok(p)
    }

    /// Strict alternation of the merged atoms.
    pub fn check_interlacing(&self) -> Result<()> {
        let mut merged: Vec<(f64, u8)> = self
            .first
            .eigenvalues
            .iter()
            .map(|&l| (l, 0))
            .chain(self.second.eigenvalues.iter().map(|&l| (l, 1)))
            .collect();
        merged.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = self.first.len().min(self.second.len());
        // compare the common range only
        let cut = merged
            .iter()
            .position(|&(l, _)| l > self.first.eigenvalues[n - 1].max(self.second.eigenvalues[n - 1]))
            .unwrap_or(merged.len());
        for w in merged[..cut].windows(2) {
            if w[0].1 == w[1].1 || w[0].0 == w[1].0 {
                return Err(Error::Interlacing(format!("atoms near {} and {} do not alternate", w[0].0, w[1].0)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CConditionsReport {
    pub n: usize,
    /// Partial sums of `sum 1/x_j` over the first spectrum.
    pub c1_partial_sums: Vec<f64>,
    pub c1_tail: f64,
    pub c1_value: f64,
    /// `j / x_j` at the last computed atom; the limit on the negative side is vacuous.
    pub c2_last_ratio: f64,
    pub c2_limit: f64,
    pub c2_vacuous_negative: bool,
    /// Terms `|1 / (x_j^{2n} h_2(x_j) h_1'(x_j))|`.
    pub c3_terms: Vec<f64>,
    pub c3_partial_sums: Vec<f64>,
    /// Log-log decay exponent of the terms over the last half.
    pub c3_decay_exponent: f64,
    pub c3_convergent: bool,
}

/// Conditions (C1)–(C3) for an extension pair, with the atoms `x_j` of the
/// first spectrum as the zero set of `h_1`.
pub fn c_conditions(pair: &ExtensionPair, n: usize, margin: f64) -> Result<CConditionsReport> {
    let s1 = &pair.first;
    let fit = s1.tail.clone().or_else(|| s1.fit_tail().ok()).ok_or_else(|| Error::TailFit("first spectrum".into()))?;
    let mut acc = 0.0;
    let c1_partial_sums: Vec<f64> = s1
        .eigenvalues
        .iter()
        .filter(|&&x| x != 0.0)
        .map(|&x| {
            acc += 1.0 / x;
            acc
        })
        .collect();
    let c1_tail = quadrature::tail_sum(|k| C64::new(1.0 / fit.lambda(k), 0.0), s1.len()).re;
    let c1_value = acc + c1_tail;
    let last = s1.len();
    let c2_last_ratio = last as f64 / s1.eigenvalues[last - 1];
    let c2_limit = if fit.p > 1.0 { 0.0 } else { f64::NAN };
    let mut c3_terms = Vec::with_capacity(last);
    for k in 0..last {
        let x = s1.eigenvalues[k];
        let h2 = h_beta(&pair.second, C64::new(x, 0.0))?.re;
        let dh1 = h_beta_derivative_at(s1, k)?;
        c3_terms.push((1.0 / (x.powi(2 * n as i32) * h2 * dh1)).abs());
    }
    let mut acc = 0.0;
    let c3_partial_sums = c3_terms
        .iter()
        .map(|t| {
            acc += t;
            acc
        })
        .collect();
    let from = last / 2;
    let xs: Vec<f64> = (from..last).map(|k| ((k + 1) as f64).ln()).collect();
    let ys: Vec<f64> = (from..last).map(|k| c3_terms[k].ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let c3_decay_exponent = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    Ok(CConditionsReport {
        n,
        c1_partial_sums,
        c1_tail,
        c1_value,
        c2_last_ratio,
        c2_limit,
        c2_vacuous_negative: true,
        c3_terms,
        c3_partial_sums,
        c3_decay_exponent,
        c3_convergent: c3_decay_exponent < -1.0 - margin,
    })
}

/// Smallest `n` with `2n >= floor(l + 5/2)`.
pub fn threshold_n(l: f64) -> usize {
    let f = (l + 2.5).floor().max(0.0) as usize;
    f.div_ceil(2)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntireIndexReport {
    pub l: f64,
    pub z: C64,
    pub classifications: Vec<L2Report>,
    /// `j* + 1` for the first integrable order `j*`.
    pub minimal_n: Option<usize>,
    /// `min {n : 2n >= floor(l + 5/2)}`.
    pub n_threshold: usize,
    /// `floor(l + 5/2)`, the alternative reading printed for comparison.
    pub n_floor_reading: usize,
    /// Smallest `n` passing the moment test, when a spectrum was supplied.
    pub moment_n: Option<usize>,
    /// False if an integrable order is followed by a non-integrable one.
    pub monotone: bool,
}

/// Runs the ladder for `j = 0, 1, ...` up to one order past the first
/// integrable one (at most `jmax`).
pub fn minimal_n_estimate(engine: &Engine<'_>, z: C64, jmax: usize, spectrum: Option<&Spectrum>) -> Result<EntireIndexReport> {
    let mut classifications = Vec::new();
    let mut first = None;
    for j in 0..=jmax.min(engine.tol.max_jet_order) {
        let r = l2_classification(engine, z, j)?;
        let integrable = r.class == L2Class::Integrable;
        classifications.push(r);
        if integrable && first.is_none() {
            first = Some(j);
        } else if first.is_some() {
            break;
        }
    }
    let monotone = match first {
        Some(j0) => classifications[j0..].iter().all(|r| r.class == L2Class::Integrable),
        None => true,
    };
    let l = engine.problem.l;
    Ok(EntireIndexReport {
        l,
        z,
        classifications,
        minimal_n: first.map(|j| j + 1),
        n_threshold: threshold_n(l),
        n_floor_reading: (l + 2.5).floor() as usize,
        moment_n: spectrum.and_then(|s| minimal_moment_order(s, engine.tol.moment_margin, 8)),
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::SturmLiouvilleProblem;
    use crate::spectral::compute_spectrum;
    use std::f64::consts::PI;

    #[test]
    fn threshold_table() {
        assert_eq!([0.0, 1.0, 2.0, 3.0].map(threshold_n), [1, 2, 2, 3]);
    }

    #[test]
    fn psi_routes_agree_and_match_finite_difference() {
        let p = SturmLiouvilleProblem::bessel(0.0, PI).unwrap();
        let e = Engine::with_defaults(&p);
        let z = C64::new(-1.0, 0.0);
        let a = psi_jet(&e, z, 2).unwrap();
        let wf = WeylFunction::new(&e).unwrap();
        let b = psi_jet_weyl_route(&wf, z, 2, 0.5).unwrap();
        assert!(a.max_relative_difference(&b).unwrap() < 1e-6);
        let h = 1e-4;
        let grid = a.grid.clone();
        let up = psi_jet_on(&e, z + h, 0, &grid).unwrap();
        let dn = psi_jet_on(&e, z - h, 0, &grid).unwrap();
        for i in (0..grid.points.len()).step_by(7) {
            let fd = (up.values[i][0] - dn.values[i][0]) / (2.0 * h);
            assert!((fd - a.values[i][1]).norm() < 1e-5 * a.values[i][1].norm().max(1e-3));
        }
    }

    #[test]
    fn ladder_classes_for_bessel() {
        let z = C64::new(-1.0, 1.0);
        let p = SturmLiouvilleProblem::bessel(2.0, 1.0).unwrap();
        let e = Engine::with_defaults(&p);
        let r0 = l2_classification(&e, z, 0).unwrap();
        assert_eq!(r0.class, L2Class::Divergent);
        assert!((r0.s - 3.0).abs() < 0.05, "s = {}", r0.s);
        assert_eq!(l2_classification(&e, z, 1).unwrap().class, L2Class::Integrable);
        let p0 = SturmLiouvilleProblem::bessel(0.0, 1.0).unwrap();
        let e0 = Engine::with_defaults(&p0);
        assert_eq!(l2_classification(&e0, z, 0).unwrap().class, L2Class::Integrable);
    }

    #[test]
    fn mf2_and_mf3_free() {
        let p = SturmLiouvilleProblem::bessel(0.0, PI).unwrap();
        let e = Engine::with_defaults(&p);
        for j in 0..3 {
            let r = verify_mf2(&e, C64::new(-1.0, 0.0), C64::new(-2.0, 0.0), j).unwrap();
            assert!(r.residual < 1e-7, "{r:?}");
        }
        let s = compute_spectrum(&e, None, 3).unwrap();
        let r0 = verify_mf3(&e, &s, 0, C64::new(-1.0, 0.0), 0).unwrap();
        assert!((r0.lhs - 0.5).norm() < 1e-7);
        let r1 = verify_mf3(&e, &s, 0, C64::new(-1.0, 0.0), 1).unwrap();
        assert!((r1.lhs - 0.25).norm() < 1e-7);
    }

    #[test]
    fn h_beta_free_closed_form() {
        let eig: Vec<f64> = (1..=2000).map(|k| (k * k) as f64).collect();
        let s = Spectrum::from_atoms(eig, Vec::new());
        let h = h_beta(&s, C64::new(0.25, 0.0)).unwrap();
        assert!((h.re - 2.0 / PI).abs() < 1e-8);
        assert_eq!(h_beta(&s, C64::new(9.0, 0.0)).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(h_beta(&s, C64::new(0.0, 0.0)).unwrap(), C64::new(1.0, 0.0));
        let d = h_beta_derivative_at(&s, 2).unwrap();
        assert!((d + 1.0 / 18.0).abs() < 1e-8, "{d}");
    }

    #[test]
    fn c_conditions_free_pair() {
        let d: Vec<f64> = (1..=200).map(|k| (k * k) as f64).collect();
        let nm: Vec<f64> = (1..=200).map(|k| (k as f64 - 0.5).powi(2)).collect();
        let pair = ExtensionPair::new(0.0, Spectrum::from_atoms(d, Vec::new()), PI / 2.0, Spectrum::from_atoms(nm, Vec::new())).unwrap();
        let r = c_conditions(&pair, 1, 0.25).unwrap();
        assert!((r.c1_value - PI * PI / 6.0).abs() < 1e-7);
        assert!(r.c3_convergent);
        assert!((r.c3_decay_exponent + 2.0).abs() < 0.05);
        for (k, t) in r.c3_terms.iter().enumerate().take(20) {
            let k = (k + 1) as f64;
            assert!((t - 2.0 / (k * k)).abs() < 1e-6 * t, "{k}: {t}");
        }
    }
}
