//! The singular Weyl function `M(z)`, its gauges, pole diagnostics and the
//! integral representation against the spectral measure.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, C64};
use crate::ode::{Engine, Grid};
use crate::quadrature;
use crate::spectral::{moment_test, Spectrum, Verdict};

/// Real polynomial, coefficients in increasing degree.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn eval(&self, z: C64) -> C64 {
        self.0.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    /// Taylor jet of the polynomial at `z0`.
    pub fn jet(&self, z0: C64, order: usize) -> Jet {
        let x = Jet::variable(z0, order);
        self.0
            .iter()
            .rev()
            .fold(Jet::zero(order), |acc, &c| &(&acc * &x) + &Jet::constant(C64::new(c, 0.0), order))
    }
}

/// Gauge pair: `phi -> e^g phi`, `theta -> e^{-g} theta - f phi`.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WeylGauge {
    #[serde(default)]
    pub g: Polynomial,
    #[serde(default)]
    pub f: Polynomial,
}

impl WeylGauge {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Regularizing weight `ghat(z) = exp(2 g(z))`.
    pub fn ghat(&self, z: C64) -> C64 {
        (2.0 * self.g.eval(z)).exp()
    }

    /// `e^{-2g} M + e^{-g} f` applied to a value of the untransformed function.
    pub fn transform(&self, m: C64, z: C64) -> C64 {
        let g = self.g.eval(z);
        (-2.0 * g).exp() * m + (-g).exp() * self.f.eval(z)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoleEntry {
    pub lambda: f64,
    pub gamma: Option<f64>,
    pub residue: Option<f64>,
}

/// `M(z) = sigma W(theta, chi) / W(chi, phi)` with `sigma` fixed by the
/// requirement that `theta + M phi` be proportional to `chi`.
pub struct WeylFunction<'a> {
    engine: &'a Engine<'a>,
    pub sigma: f64,
    pub convention_defect: f64,
    pub poles: Vec<PoleEntry>,
}

/// Relative defect of `psi(x) chi(x_ref) - psi(x_ref) chi(x)` on a grid,
/// where `psi = theta + sigma * W(theta,chi)/W(chi,phi) * phi`.
pub fn proportionality_defect(engine: &Engine<'_>, z: C64, sigma: f64) -> Result<f64> {
    let grid = engine.grid_for(&[(z, 0)])?;
    let f = engine.fundamental(z, 0, &grid, true)?;
    let theta = f.theta.expect("theta requested");
    let chi = engine.endpoint_solution(z, 0, &grid)?;
    let last = grid.points.len() - 1;
    let w = engine.endpoint_wronskian(&f.phi.values[last], &f.phi.slopes[last]).value();
    let wt = -engine.endpoint_wronskian(&theta.values[last], &theta.slopes[last]).value();
    let m = sigma * wt / w;
    let psi: Vec<C64> = (0..=last).map(|i| theta.u(i, 0) + m * f.phi.u(i, 0)).collect();
    let r = last / 2;
    let scale = psi.iter().map(|p| p.norm()).fold(0.0, f64::max) * chi.values.iter().map(|c| c.value().norm()).fold(0.0, f64::max);
    Ok((0..=last)
        .map(|i| (psi[i] * chi.u(r, 0) - psi[r] * chi.u(i, 0)).norm())
        .fold(0.0, f64::max)
        / scale)
}

impl<'a> WeylFunction<'a> {
    /// Fixes the sign convention at a probe point off the real axis.
    pub fn new(engine: &'a Engine<'a>) -> Result<Self> {
        let z = C64::new(0.37, 1.0 + engine.problem.negative_envelope().abs().sqrt());
        let plus = proportionality_defect(engine, z, 1.0)?;
        let minus = proportionality_defect(engine, z, -1.0)?;
        let (sigma, convention_defect) = if plus <= minus { (1.0, plus) } else { (-1.0, minus) };
        if convention_defect > 1e-6 {
            return Err(Error::IllConditioned(format!("no sign makes psi proportional to chi (defect {convention_defect:e})")));
        }
        Ok(Self { engine, sigma, convention_defect, poles: Vec::new() })
    }

    pub fn engine(&self) -> &Engine<'a> {
        self.engine
    }

    pub fn with_spectrum(mut self, spectrum: &Spectrum) -> Self {
        self.poles = spectrum
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &lambda)| PoleEntry { lambda, gamma: spectrum.gamma.get(k).copied(), residue: None })
            .collect();
        self
    }

    fn exclusion(&self, lambda: f64) -> f64 {
        self.engine.tol.pole_exclusion * (1.0 + lambda.abs())
    }

    fn check_pole(&self, z: C64) -> Result<()> {
        for p in &self.poles {
            let r = self.exclusion(p.lambda);
            if (z - p.lambda).norm() < r {
                return Err(Error::NearPole { z: format!("{z}"), pole: p.lambda, radius: r });
            }
        }
        Ok(())
    }

    /// `M(z)` in the base gauge.
    pub fn eval(&self, z: C64) -> Result<C64> {
        self.eval_gauged(z, &WeylGauge::trivial())
    }

    /// Weyl function of the transformed system `e^g phi`, `e^{-g} theta - f phi`.
    pub fn eval_gauged(&self, z: C64, gauge: &WeylGauge) -> Result<C64> {
        self.check_pole(z)?;
        let (phi, dphi, th) = self.engine.at_endpoint(z, 0, true)?;
        let (theta, dtheta) = th.expect("theta requested");
        let g = gauge.g.eval(z);
        let f = gauge.f.eval(z);
        let (eg, emg) = (g.exp(), (-g).exp());
        let phi_t = Jet(vec![eg * phi.value()]);
        let dphi_t = Jet(vec![eg * dphi.value()]);
        let theta_t = Jet(vec![emg * theta.value() - f * phi.value()]);
        let dtheta_t = Jet(vec![emg * dtheta.value() - f * dphi.value()]);
        let w = self.engine.endpoint_wronskian(&phi_t, &dphi_t).value();
        let wt = -self.engine.endpoint_wronskian(&theta_t, &dtheta_t).value();
        Ok(self.sigma * wt / w)
    }

    /// Taylor jet of `M` at `z` through the z-jets of `theta` and `phi`.
    pub fn jet(&self, z: C64, order: usize) -> Result<Jet> {
        self.check_pole(z)?;
        let (phi, dphi, th) = self.engine.at_endpoint(z, order, true)?;
        let (theta, dtheta) = th.expect("theta requested");
        let w = self.engine.endpoint_wronskian(&phi, &dphi);
        let wt = -&self.engine.endpoint_wronskian(&theta, &dtheta);
        Ok((&wt * &w.recip()).scale(C64::new(self.sigma, 0.0)))
    }

    /// Contour radius for the pole at `lambdas[k]`.
    fn contour_radius(&self, lambdas: &[f64], k: usize) -> Result<f64> {
        let mut gap = f64::INFINITY;
        if k > 0 {
            gap = gap.min(lambdas[k] - lambdas[k - 1]);
        }
        if k + 1 < lambdas.len() {
            gap = gap.min(lambdas[k + 1] - lambdas[k]);
        }
        let r = if gap.is_finite() { 0.25 * gap } else { 0.25 * (1.0 + lambdas[k].abs()) };
        let min = 10.0 * self.exclusion(lambdas[k]);
        if r < min {
            return Err(Error::IllConditioned(format!("eigenvalue spacing near {} too small for a contour", lambdas[k])));
        }
        Ok(r)
    }

    /// `Res_{lambda_k} M` by the trapezoid rule on a circle.
    pub fn residue(&self, spectrum: &Spectrum, k: usize) -> Result<C64> {
        let r = self.contour_radius(&spectrum.eigenvalues, k)?;
        contour_residue(|z| self.eval(z), spectrum.eigenvalues[k], r, 64)
    }

    /// Fills the residue column of the pole table.
    pub fn fill_residues(&mut self, spectrum: &Spectrum) -> Result<()> {
        let res: Vec<Result<C64>> = (0..spectrum.len()).map(|k| self.residue(spectrum, k)).collect();
        for (p, r) in self.poles.iter_mut().zip(res) {
            p.residue = Some(r?.re);
        }
        Ok(())
    }
}

/// `(1/2 pi i) oint f dz` on the circle `|z - center| = radius` (trapezoid rule).
pub fn contour_residue(f: impl Fn(C64) -> Result<C64>, center: f64, radius: f64, points: usize) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..points {
        // half-step offset keeps nodes off the real axis
        let e = C64::from_polar(1.0, 2.0 * PI * (i as f64 + 0.5) / points as f64);
        acc += f(center + radius * e)? * e;
    }
    Ok(acc * radius / points as f64)
}

/// `j`-th derivative at `center` of an `f` analytic on the closed disk, by Cauchy's formula.
pub fn contour_derivative(f: impl Fn(C64) -> Result<C64>, center: C64, radius: f64, points: usize, j: usize) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..points {
        let e = C64::from_polar(1.0, 2.0 * PI * (i as f64 + 0.5) / points as f64);
        acc += f(center + radius * e)? * e.powi(-(j as i32));
    }
    Ok(acc / points as f64 * radius.powi(-(j as i32)) * crate::jet::factorial(j))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidueReport {
    pub k: usize,
    pub lambda: f64,
    pub residue: C64,
    pub gamma: f64,
    /// `|Res + gamma_k| / gamma_k`.
    pub residual: f64,
}

/// Checks `Res_{lambda_k} M = -gamma_k` (0-based `k`).
pub fn residue_check(wf: &WeylFunction<'_>, spectrum: &Spectrum, k: usize) -> Result<ResidueReport> {
    if k >= spectrum.len() || !spectrum.is_normed() {
        return Err(Error::NotApplicable(format!("atom {k} not available")));
    }
    let residue = wf.residue(spectrum, k)?;
    let gamma = spectrum.gamma[k];
    Ok(ResidueReport { k, lambda: spectrum.eigenvalues[k], residue, gamma, residual: (residue + gamma).norm() / gamma })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HerglotzGauge {
    pub gauge: WeylGauge,
    pub degree: usize,
    /// `sum e^{-2 g(lambda_k)} gamma_k` over the computed atoms.
    pub weighted_sum: f64,
    /// Largest weighted term in the last tenth of the atoms, relative to the sum.
    pub last_term_ratio: f64,
}

/// Polynomial `g` with `e^{-2g(lambda_k)} gamma_k` summable; `g = 0` when
/// the masses already are. `f` is left zero.
pub fn herglotz_gauge(spectrum: &Spectrum, margin: f64) -> Result<HerglotzGauge> {
    if !spectrum.is_normed() || spectrum.is_empty() {
        return Err(Error::NotApplicable("herglotz gauge needs norming constants".into()));
    }
    let g = match moment_test(spectrum, 0, margin).verdict {
        Verdict::Summable => Polynomial(vec![0.0]),
        Verdict::Divergent => {
            let top = spectrum.eigenvalues.last().copied().unwrap().max(1.0);
            Polynomial(vec![0.0, 20.0 / top])
        }
        Verdict::Inconclusive => return Err(Error::TailFit("mass decay inconclusive".into())),
    };
    let gauge = WeylGauge { g, f: Polynomial::default() };
    let terms: Vec<f64> = spectrum.atoms().map(|(l, m)| m * (-2.0 * gauge.g.eval(C64::new(l, 0.0)).re).exp()).collect();
    let weighted_sum: f64 = terms.iter().sum();
    let tenth = (terms.len() / 10).max(1);
    let last = terms[terms.len() - tenth..].iter().copied().fold(0.0, f64::max);
    Ok(HerglotzGauge { degree: gauge.g.degree(), gauge, weighted_sum, last_term_ratio: last / weighted_sum })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepresentationReport {
    /// Largest `|Res_{lambda_k} D| / gamma_k` over the checked atoms.
    pub max_residue_ratio: f64,
    pub atoms_checked: usize,
    /// Largest `|D(z*) - D(z)*| / |D(z)|` over the samples.
    pub conjugation_defect: f64,
    pub samples: Vec<(C64, C64)>,
}

/// `D(z) = M(z) - ghat(z) sum_k [1/(lambda_k - z) - lambda_k/(1+lambda_k^2)] gamma_k / ghat(lambda_k)`.
pub fn representation_difference(wf: &WeylFunction<'_>, spectrum: &Spectrum, gauge: &WeylGauge, z: C64) -> Result<C64> {
    let m = wf.eval(z)?;
    let s: C64 = spectrum
        .atoms()
        .map(|(l, g)| {
            let lc = C64::new(l, 0.0);
            (1.0 / (lc - z) - l / (1.0 + l * l)) * g / gauge.ghat(lc)
        })
        .sum();
    Ok(m - gauge.ghat(z) * s)
}

/// Checks that `D` has no poles at the first `count` eigenvalues.
pub fn integral_representation_check(
    wf: &WeylFunction<'_>,
    spectrum: &Spectrum,
    gauge: &WeylGauge,
    samples: &[C64],
    count: usize,
) -> Result<RepresentationReport> {
    let n = count.min(spectrum.len());
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let r = wf.contour_radius(&spectrum.eigenvalues, k)?;
        let res = contour_residue(|z| representation_difference(wf, spectrum, gauge, z), spectrum.eigenvalues[k], r, 64)?;
        worst = worst.max(res.norm() / spectrum.gamma[k]);
    }
    let mut conj: f64 = 0.0;
    let mut out = Vec::new();
    for &z in samples {
        let d = representation_difference(wf, spectrum, gauge, z)?;
        let dc = representation_difference(wf, spectrum, gauge, z.conj())?;
        conj = conj.max((dc - d.conj()).norm() / d.norm().max(1e-300));
        out.push((z, d));
    }
    Ok(RepresentationReport { max_residue_ratio: worst, atoms_checked: n, conjugation_defect: conj, samples: out })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StieltjesReport {
    pub k: usize,
    pub gamma: f64,
    /// `(eps, (1/pi) int Im M(x + i eps) dx)`.
    pub levels: Vec<(f64, f64)>,
    pub extrapolated: f64,
    pub residual: f64,
}

/// Recovers `gamma_k` from `(1/pi) int Im M(x + i eps) dx` over an interval
/// around `lambda_k`, extrapolated to `eps = 0`.
pub fn stieltjes_recovery(wf: &WeylFunction<'_>, spectrum: &Spectrum, k: usize) -> Result<StieltjesReport> {
    if k >= spectrum.len() || !spectrum.is_normed() {
        return Err(Error::NotApplicable(format!("atom {k} not available")));
    }
    let lam = spectrum.eigenvalues[k];
    let half = 2.0 * wf.contour_radius(&spectrum.eigenvalues, k)?;
    let level = |eps: f64| -> Result<f64> {
        // x = lam + eps tan t flattens the Lorentzian peak
        let t_max = (half / eps).atan();
        let mut err = None;
        let v = quadrature::adaptive_real(
            |t| {
                let x = lam + eps * t.tan();
                match wf.eval(C64::new(x, eps)) {
                    Ok(m) => m.im * eps / t.cos().powi(2),
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                }
            },
            -t_max,
            t_max,
            1e-10 * spectrum.gamma[k],
            1e-10,
        )?;
        match err {
            Some(e) => Err(e),
            None => Ok(v / PI),
        }
    };
    let eps: Vec<f64> = (0..4).map(|i| 0.2 * half * 0.5f64.powi(i)).collect();
    let vals: Vec<f64> = eps.iter().map(|&e| level(e)).collect::<Result<_>>()?;
    // the error expands in odd powers of eps
    let r1: Vec<f64> = vals.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    let r2: Vec<f64> = r1.windows(2).map(|w| (8.0 * w[1] - w[0]) / 7.0).collect();
    let r3 = (32.0 * r2[1] - r2[0]) / 31.0;
    let gamma = spectrum.gamma[k];
    Ok(StieltjesReport {
        k,
        gamma,
        levels: eps.into_iter().zip(vals).collect(),
        extrapolated: r3,
        residual: (r3 - gamma).abs() / gamma,
    })
}

/// Largest `|M(z*) - M(z)*| / |M(z)|` over the samples.
pub fn conjugation_defect(wf: &WeylFunction<'_>, samples: &[C64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &z in samples {
        let a = wf.eval(z)?;
        let b = wf.eval(z.conj())?;
        worst = worst.max((b - a.conj()).norm() / a.norm().max(1e-300));
    }
    Ok(worst)
}

/// Samples `M` along the segment from `z0` to `z1` (inclusive).
pub fn sample_line(wf: &WeylFunction<'_>, z0: C64, z1: C64, n: usize) -> Vec<(C64, Result<C64>)> {
    let zs: Vec<C64> = (0..n).map(|i| z0 + (z1 - z0) * (i as f64 / (n.max(2) - 1) as f64)).collect();
    crate::par_map(&zs, |&z| (z, wf.eval(z)))
}

/// Grid on which `psi` and `chi` are compared, exposed for diagnostics.
pub fn convention_grid(engine: &Engine<'_>, z: C64) -> Result<Arc<Grid>> {
    engine.grid_for(&[(z, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::SturmLiouvilleProblem;
    use crate::spectral::compute_spectrum;

    #[test]
    fn free_case_matches_closed_form() {
        let p = SturmLiouvilleProblem::bessel(0.0, PI).unwrap();
        let e = Engine::with_defaults(&p);
        let wf = WeylFunction::new(&e).unwrap();
        assert_eq!(wf.sigma, 1.0);
        assert!(wf.convention_defect < 1e-8);
        // theta = cos(kx), chi ~ sin(k(pi - x)) => M = -k cot(k pi)
        let z = C64::new(2.3, 0.4);
        let k = z.sqrt();
        let exact = -k * (k * PI).cos() / (k * PI).sin();
        assert!((wf.eval(z).unwrap() - exact).norm() < 1e-8 * exact.norm());
    }

    #[test]
    fn gauge_shift_by_one() {
        let p = SturmLiouvilleProblem::bessel(1.0, 1.0).unwrap();
        let e = Engine::with_defaults(&p);
        let wf = WeylFunction::new(&e).unwrap();
        let z = C64::new(-4.0, 3.0);
        let g = WeylGauge { g: Polynomial(vec![0.0]), f: Polynomial(vec![1.0]) };
        let d = wf.eval_gauged(z, &g).unwrap() - wf.eval(z).unwrap() - 1.0;
        assert!(d.norm() < 1e-10);
    }

    #[test]
    fn residue_and_near_pole_error() {
        let p = SturmLiouvilleProblem::bessel(0.0, PI).unwrap();
        let e = Engine::with_defaults(&p);
        let s = compute_spectrum(&e, None, 4).unwrap();
        let wf = WeylFunction::new(&e).unwrap().with_spectrum(&s);
        let r = residue_check(&wf, &s, 0).unwrap();
        assert!(r.residual < 1e-7, "{r:?}");
        assert!(matches!(wf.eval(C64::new(1.0 + 1e-6, 0.0)), Err(Error::NearPole { .. })));
    }

    #[test]
    fn contour_derivatives_of_exp() {
        let r = contour_residue(|z| Ok(3.0 / (z - 1.0) + z), 1.0, 0.5, 32).unwrap();
        assert!((r - 3.0).norm() < 1e-13);
        for j in 0..4 {
            let d = contour_derivative(|z| Ok(z.exp()), C64::new(0.5, 0.2), 0.5, 48, j).unwrap();
            assert!((d - C64::new(0.5, 0.2).exp()).norm() < 1e-12, "j={j}");
        }
    }

    #[test]
    fn polynomial_jet_matches_derivatives() {
        let p = Polynomial(vec![1.0, -2.0, 0.5, 3.0]);
        let z = C64::new(0.3, -1.0);
        let j = p.jet(z, 3);
        assert!((j.value() - p.eval(z)).norm() < 1e-14);
        assert!((j.derivative(1) - (-2.0 + z + 9.0 * z * z)).norm() < 1e-13);
        assert!((j.derivative(3) - 18.0).norm() < 1e-13);
    }

    #[test]
    fn stieltjes_herglotz_and_representation_free() {
        let p = SturmLiouvilleProblem::bessel(0.0, PI).unwrap();
        let e = Engine::with_defaults(&p);
        let s = compute_spectrum(&e, None, 24).unwrap();
        let wf = WeylFunction::new(&e).unwrap().with_spectrum(&s);
        let st = stieltjes_recovery(&wf, &s, 0).unwrap();
        assert!(st.residual < 1e-4, "{st:?}");
        let h = herglotz_gauge(&s, 0.25).unwrap();
        assert_eq!(h.degree, 1);
        assert!(h.last_term_ratio < 1e-6);
        let zs = [C64::new(0.5, 1.0), C64::new(-3.0, 0.5)];
        let rep = integral_representation_check(&wf, &s, &h.gauge, &zs, 10).unwrap();
        assert!(rep.max_residue_ratio < 1e-5, "{rep:?}");
        assert!(rep.conjugation_defect < 1e-10);
    }
}
