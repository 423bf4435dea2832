//! Eigenvalues as zeros of `W(z)`, norming constants, tail models, the
//! trace identity and moment tests on the atomic spectral measure.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, C64};
use crate::ode::{Engine, PassSpec};
use crate::quadrature;

/// Integrals of `phi(w, .)` against the jets of `theta(z, .)` and `phi(z, .)`,
/// with the endpoint data needed to form `chi(z, .)` and `psi(z, .)`.
#[derive(Clone, Debug)]
pub struct CrossIntegrals {
    pub w: C64,
    pub z: C64,
    pub order: usize,
    /// `int phi(w) theta_j(z)` (Taylor coefficients in `z`).
    pub phi_theta: Vec<C64>,
    /// `int phi(w) phi_j(z)`.
    pub phi_phi: Vec<C64>,
    /// `W(z) = W(chi(z), phi(z))` as a jet.
    pub w_chi_phi: Jet,
    /// `W(theta(z), chi(z))` as a jet.
    pub w_theta_chi: Jet,
    /// `W(z)` at `w`.
    pub w_at_w: C64,
    /// Jets of `phi(z)`, `phi'(z)`, `theta(z)`, `theta'(z)` at `b`.
    pub end_phi: (Jet, Jet),
    pub end_theta: (Jet, Jet),
    /// `phi(w, b)` and `phi'(w, b)`.
    pub end_phi_w: (C64, C64),
    pub converged: bool,
}

impl CrossIntegrals {
    /// `int phi(w) chi(z)`, using `chi = W(chi,phi) theta + W(theta,chi) phi`.
    pub fn phi_chi(&self) -> C64 {
        self.w_chi_phi.value() * self.phi_theta[0] + self.w_theta_chi.value() * self.phi_phi[0]
    }

    /// `M(z) = W(theta, chi) / W(chi, phi)` as a jet.
    pub fn weyl_jet(&self) -> Jet {
        &self.w_theta_chi * &self.w_chi_phi.recip()
    }

    /// `int phi(w) psi^{(j)}(z)` for `j = 0..=order` (derivatives, not Taylor coefficients).
    pub fn phi_psi(&self) -> Vec<C64> {
        let m = self.weyl_jet();
        (0..=self.order)
            .map(|j| {
                let taylor: C64 = self.phi_theta[j] + (0..=j).map(|i| m.coeff(i) * self.phi_phi[j - i]).sum::<C64>();
                taylor * crate::jet::factorial(j)
            })
            .collect()
    }

    /// `psi^{(k)}(z, b)` and its x-derivative for `k = 0..=order` (derivative form).
    pub fn psi_at_b(&self) -> Vec<(C64, C64)> {
        let m = self.weyl_jet();
        let (p, dp) = &self.end_phi;
        let (t, dt) = &self.end_theta;
        let u = t + &(&m * p);
        let du = dt + &(&m * dp);
        (0..=self.order).map(|k| (u.derivative(k), du.derivative(k))).collect()
    }
}

/// Computes [`CrossIntegrals`] over `(lower, b)`.
pub fn cross_integrals(engine: &Engine<'_>, w: C64, z: C64, order: usize, lower: f64) -> Result<CrossIntegrals> {
    let specs = [PassSpec { z: w, order: 0, theta: false }, PassSpec { z, order, theta: true }];
    let n = order + 1;
    let integrand = move |_x: f64, b: crate::ode::Blocks<'_>, out: &mut [C64]| {
        let (pw, pz) = (b.get(0), b.get(1));
        let f = pw.phi(0);
        for j in 0..n {
            out[j] = f * pz.theta(j);
            out[n + j] = f * pz.phi(j);
        }
    };
    let r = engine.pass(&specs, lower, &[], 2 * n, &integrand)?;
    let end = r.end_blocks();
    let (pw, pz) = (end.get(0), end.get(1));
    let jet = |f: &dyn Fn(usize) -> C64| Jet((0..n).map(f).collect());
    let (phi, dphi) = (jet(&|j| pz.phi(j)), jet(&|j| pz.dphi(j)));
    let (theta, dtheta) = (jet(&|j| pz.theta(j)), jet(&|j| pz.dtheta(j)));
    let w_at_w = engine
        .endpoint_wronskian(&Jet(vec![pw.phi(0)]), &Jet(vec![pw.dphi(0)]))
        .value();
    Ok(CrossIntegrals {
        w,
        z,
        order,
        phi_theta: r.total[..n].to_vec(),
        phi_phi: r.total[n..].to_vec(),
        w_chi_phi: engine.endpoint_wronskian(&phi, &dphi),
        w_theta_chi: -&engine.endpoint_wronskian(&theta, &dtheta),
        w_at_w,
        end_phi: (phi, dphi),
        end_theta: (theta, dtheta),
        end_phi_w: (pw.phi(0), pw.dphi(0)),
        converged: r.converged,
    })
}

/// Asymptotic models fitted over the last half of the computed atoms
/// (`k` is 1-based).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TailFit {
    /// `lambda_k ~ a (k + delta)^2`.
    pub a: f64,
    pub delta: f64,
    /// Log-log slope of `lambda_k` against `k`.
    pub p: f64,
    /// `gamma_k ~ g_coeff lambda_k^s`.
    pub g_coeff: f64,
    pub s: f64,
    /// Log-log slope of `gamma_k` against `k`.
    pub r: f64,
    pub from: usize,
    pub to: usize,
}

impl TailFit {
    pub fn lambda(&self, k: f64) -> f64 {
        self.a * (k + self.delta).powi(2)
    }

    pub fn gamma(&self, k: f64) -> f64 {
        self.g_coeff * self.lambda(k).powf(self.s)
    }
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Eigenvalues with norming data; `k`-th entry belongs to the `k+1`-th eigenvalue.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `gamma_k = ||phi(lambda_k)||^{-2}`; empty until normed.
    pub gamma: Vec<f64>,
    /// `chi(lambda_k) = c_k phi(lambda_k)`.
    pub c: Vec<f64>,
    /// `W'(lambda_k)`.
    pub wprime: Vec<f64>,
    pub tail: Option<TailFit>,
}

impl Spectrum {
    /// Spectrum from known atoms, e.g. closed forms.
    pub fn from_atoms(eigenvalues: Vec<f64>, gamma: Vec<f64>) -> Self {
        let mut s = Self { eigenvalues, gamma, ..Self::default() };
        s.tail = s.fit_tail().ok();
        s
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn is_normed(&self) -> bool {
        self.gamma.len() == self.eigenvalues.len()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.eigenvalues.iter().copied().zip(self.gamma.iter().copied())
    }

    /// Atoms of the measure after rescaling `phi` by `exp(g(lambda))`.
    pub fn regauged(&self, g: impl Fn(f64) -> f64) -> Self {
        let mut s = self.clone();
        for (gam, &l) in s.gamma.iter_mut().zip(&self.eigenvalues) {
            *gam *= (-2.0 * g(l)).exp();
        }
        s.tail = s.fit_tail().ok();
        s
    }

    pub fn fit_tail(&self) -> Result<TailFit> {
        let n = self.len();
        if n < 8 {
            return Err(Error::TailFit(format!("{n} atoms are too few for a tail fit")));
        }
        let from = n / 2;
        let idx: Vec<usize> = (from..n).collect();
        if idx.iter().any(|&i| self.eigenvalues[i] <= 0.0) {
            return Err(Error::TailFit("nonpositive eigenvalue in the fit window".into()));
        }
        let k: Vec<f64> = idx.iter().map(|&i| (i + 1) as f64).collect();
        let root: Vec<f64> = idx.iter().map(|&i| self.eigenvalues[i].sqrt()).collect();
        let (alpha, beta) = linear_fit(&k, &root);
        let logk: Vec<f64> = k.iter().map(|k| k.ln()).collect();
        let logl: Vec<f64> = idx.iter().map(|&i| self.eigenvalues[i].ln()).collect();
        let (p, _) = linear_fit(&logk, &logl);
        let (s, g_coeff, r) = if self.is_normed() {
            let logg: Vec<f64> = idx.iter().map(|&i| self.gamma[i].ln()).collect();
            let (s, c) = linear_fit(&logl, &logg);
            let (r, _) = linear_fit(&logk, &logg);
            (s, c.exp(), r)
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        Ok(TailFit { a: alpha * alpha, delta: beta / alpha, p, g_coeff, s, r, from: from + 1, to: n })
    }
}

fn count_and_angle(engine: &Engine<'_>, lambda: f64) -> Result<(usize, f64)> {
    let (n, angle) = engine.prufer(lambda)?;
    Ok((n, angle + engine.problem.bc_right.beta))
}

/// Eigenvalues below `lambda_max` (if given), at most `n_max` of them.
///
/// Each one is bracketed by the oscillation count, located on the monotone
/// Prüfer angle and polished by Newton steps on `W`.
pub fn eigenvalues(engine: &Engine<'_>, lambda_max: Option<f64>, n_max: usize) -> Result<Spectrum> {
    let b = engine.problem.b;
    let mut ground = -engine.problem.negative_envelope().max(0.0) - 10.0;
    let mut tries = 0;
    while count_and_angle(engine, ground)?.0 > 0 {
        ground *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::Budget("no lower bound for the ground state".into()));
        }
    }
    let n = match lambda_max {
        Some(lm) if lm <= ground => 0,
        Some(lm) => count_and_angle(engine, lm)?.0.min(n_max),
        None => n_max,
    };
    let tol = engine.tol.root_tol;
    let mut eig: Vec<f64> = Vec::with_capacity(n);
    // the angle is close to linear in u = sqrt(lambda - ground)
    let lam = |u: f64| ground + u * u;
    let angle = |u: f64| -> Result<f64> { Ok(count_and_angle(engine, lam(u))?.1) };
    for k in 0..n {
        let target = (k + 1) as f64 * PI;
        let mut lo = eig.last().map(|&e| (e - ground).sqrt()).unwrap_or(0.0);
        let mut glo = angle(lo)? - target;
        let mut step = match k {
            0 => PI / b,
            1 => lo,
            _ => lo - (eig[k - 2] - ground).sqrt(),
        };
        let mut hi = lo + step;
        let mut ghi = angle(hi)? - target;
        let mut guard = 0;
        while ghi < 0.0 {
            lo = hi;
            glo = ghi;
            step *= 2.0;
            hi = lo + step;
            ghi = angle(hi)? - target;
            guard += 1;
            if guard > 80 {
                return Err(Error::Bracketing { lo: lam(lo), hi: lam(hi) });
            }
        }
        if glo >= 0.0 {
            return Err(Error::Bracketing { lo: lam(lo), hi: lam(hi) });
        }
        // Illinois iteration on the angle
        let mut side = 0i8;
        let mut u = lo;
        for _ in 0..200 {
            u = (lo * ghi - hi * glo) / (ghi - glo);
            let g = angle(u)? - target;
            if g < 0.0 {
                lo = u;
                glo = g;
                if side == -1 {
                    ghi *= 0.5;
                }
                side = -1;
            } else {
                hi = u;
                ghi = g;
                if side == 1 {
                    glo *= 0.5;
                }
                side = 1;
            }
            if hi - lo <= 1e-9 * (1.0 + u.abs()) || g.abs() < 1e-6 {
                break;
            }
        }
        let (mut x, lo, hi) = (lam(u), lam(lo), lam(hi));
        // Newton on W, kept near the bracket; the loose angle can misplace it slightly
        let slack = 1e-6 * (1.0 + x.abs());
        for _ in 0..8 {
            let w = engine.characteristic(C64::new(x, 0.0), 1)?;
            let d = (w.value() / w.coeff(1)).re;
            let next = x - d;
            if !(lo - slack <= next && next <= hi + slack) {
                break;
            }
            x = next;
            if d.abs() <= tol * (1.0 + x.abs()) {
                break;
            }
        }
        if let Some(&prev) = eig.last() {
            if x <= prev {
                return Err(Error::Bracketing { lo: prev, hi: x });
            }
        }
        eig.push(x);
    }
    Ok(Spectrum { eigenvalues: eig, ..Spectrum::default() })
}

/// Fills `gamma`, `c`, `W'` and the tail fit.
pub fn norming_constants(engine: &Engine<'_>, spectrum: &mut Spectrum) -> Result<()> {
    let (chi_b, dchi_b) = engine.problem.bc_right.endpoint_data();
    let data = crate::par_map(&spectrum.eigenvalues, |&lambda| -> Result<(f64, f64, f64)> {
        let spec = [PassSpec { z: C64::new(lambda, 0.0), order: 1, theta: false }];
        let f = |_x: f64, b: crate::ode::Blocks<'_>, out: &mut [C64]| {
            let p = b.get(0).phi(0);
            out[0] = p * p;
        };
        let r = engine.pass(&spec, 0.0, &[], 1, &f)?;
        if !r.converged {
            return Err(Error::Quadrature(format!("norm of phi({lambda}) did not converge at the origin")));
        }
        let end = r.end_blocks().get(0);
        let phi = Jet(vec![end.phi(0), end.phi(1)]);
        let dphi = Jet(vec![end.dphi(0), end.dphi(1)]);
        let wprime = engine.endpoint_wronskian(&phi, &dphi).derivative(1).re;
        let (u, du) = (end.phi(0).re, end.dphi(0).re);
        let c = if du.abs() >= u.abs() { dchi_b / du } else { chi_b / u };
        Ok((1.0 / r.total[0].re, c, wprime))
    });
    let mut gamma = Vec::with_capacity(data.len());
    let mut c = Vec::with_capacity(data.len());
    let mut wp = Vec::with_capacity(data.len());
    for d in data {
        let (g, ck, w) = d?;
        if g.is_nan() || g <= 0.0 {
            return Err(Error::Quadrature(format!("nonpositive norming constant {g}")));
        }
        gamma.push(g);
        c.push(ck);
        wp.push(w);
    }
    spectrum.gamma = gamma;
    spectrum.c = c;
    spectrum.wprime = wp;
    spectrum.tail = spectrum.fit_tail().ok();
    Ok(())
}

/// Eigenvalues and norming constants in one call.
pub fn compute_spectrum(engine: &Engine<'_>, lambda_max: Option<f64>, n_max: usize) -> Result<Spectrum> {
    let mut s = eigenvalues(engine, lambda_max, n_max)?;
    norming_constants(engine, &mut s)?;
    Ok(s)
}

/// `|-W'(lambda_k) - c_k / gamma_k| / |W'(lambda_k)|` for 0-based `k`.
pub fn wprime_crosscheck(spectrum: &Spectrum, k: usize) -> Result<f64> {
    if k >= spectrum.len() || !spectrum.is_normed() || spectrum.wprime.len() <= k {
        return Err(Error::NotApplicable(format!("no norming data for atom {k}")));
    }
    let w = spectrum.wprime[k];
    Ok((-w - spectrum.c[k] / spectrum.gamma[k]).abs() / w.abs())
}

/// Oscillation-count probe used to certify completeness.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Probe {
    pub lambda: f64,
    pub count: usize,
    pub expected: usize,
}

/// Five probes: below the ground state and between selected neighbours.
pub fn completeness_probes(engine: &Engine<'_>, spectrum: &Spectrum) -> Result<Vec<Probe>> {
    let e = &spectrum.eigenvalues;
    let mut points = Vec::new();
    if let Some(&first) = e.first() {
        points.push((first - 1.0, 0));
    }
    if e.len() >= 2 {
        let picks = [0, (e.len() - 1) / 4, (e.len() - 1) / 2, e.len() - 2];
        for &i in &picks {
            points.push((0.5 * (e[i] + e[i + 1]), i + 1));
        }
    }
    points
        .into_iter()
        .map(|(lambda, expected)| Ok(Probe { lambda, count: engine.prufer(lambda)?.0, expected }))
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceReport {
    pub z: C64,
    pub atoms: usize,
    pub partial_sum: C64,
    pub tail: C64,
    pub spectral_side: C64,
    /// `(1/W(z)) int phi(z) chi(z)`.
    pub integral_side: C64,
    pub residual: f64,
    pub tail_fit: Option<TailFit>,
}

/// Compares `sum 1/(lambda_k - z)` (plus the Weyl-model tail) with the
/// resolvent trace `(1/W) int phi chi`.
pub fn trace_identity(engine: &Engine<'_>, spectrum: &Spectrum, z: C64) -> Result<TraceReport> {
    let x = cross_integrals(engine, z, z, 0, 0.0)?;
    if !x.converged {
        return Err(Error::Quadrature("int phi chi did not converge at the origin".into()));
    }
    let integral_side = x.phi_chi() / x.w_chi_phi.value();
    let partial_sum: C64 = spectrum.eigenvalues.iter().map(|&l| 1.0 / (l - z)).sum();
    let fit = spectrum.tail.clone().or_else(|| spectrum.fit_tail().ok());
    let tail = match &fit {
        Some(t) => quadrature::tail_sum(|k| 1.0 / (t.lambda(k) - z), spectrum.len()),
        None => C64::new(0.0, 0.0),
    };
    let spectral_side = partial_sum + tail;
    Ok(TraceReport {
        z,
        atoms: spectrum.len(),
        partial_sum,
        tail,
        spectral_side,
        integral_side,
        residual: (spectral_side - integral_side).norm() / integral_side.norm(),
        tail_fit: fit,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Summable,
    Divergent,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentReport {
    pub n: usize,
    /// Decay exponent of `gamma_k (1 + lambda_k^2)^{-n}` in `k`.
    pub exponent: f64,
    pub verdict: Verdict,
    /// Cumulative sums over the computed atoms.
    pub partial_sums: Vec<f64>,
}

/// Classifies `sum gamma_k (1 + lambda_k^2)^{-n}` from the tail fit.
///
/// With `lambda_k ~ k^2` and `gamma_k ~ lambda_k^s` the terms decay like
/// `k^{2(s - 2n)}`; exponents within `margin` of `-1` are inconclusive.
pub fn moment_test(spectrum: &Spectrum, n: usize, margin: f64) -> MomentReport {
    let mut acc = 0.0;
    let partial_sums = spectrum
        .atoms()
        .map(|(l, g)| {
            acc += g * (1.0 + l * l).powi(-(n as i32));
            acc
        })
        .collect();
    let fit = spectrum.tail.clone().or_else(|| spectrum.fit_tail().ok());
    let (exponent, verdict) = match fit {
        Some(t) if t.s.is_finite() => {
            let e = 2.0 * (t.s - 2.0 * n as f64);
            let v = if e < -1.0 - margin {
                Verdict::Summable
            } else if e > -1.0 + margin {
                Verdict::Divergent
            } else {
                Verdict::Inconclusive
            };
            (e, v)
        }
        _ => (f64::NAN, Verdict::Inconclusive),
    };
    MomentReport { n, exponent, verdict, partial_sums }
}

/// Smallest `n` whose moment test reports summable.
pub fn minimal_moment_order(spectrum: &Spectrum, margin: f64, n_cap: usize) -> Option<usize> {
    (0..=n_cap).find(|&n| moment_test(spectrum, n, margin).verdict == Verdict::Summable)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mf1Report {
    pub w: C64,
    pub z: C64,
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
}

/// `int phi(w) chi(z) = -(W(z) - W(w)) / (z - w)`.
pub fn mf1_check(engine: &Engine<'_>, w: C64, z: C64) -> Result<Mf1Report> {
    let x = cross_integrals(engine, w, z, 0, 0.0)?;
    let lhs = x.phi_chi();
    let rhs = -(x.w_chi_phi.value() - x.w_at_w) / (z - w);
    Ok(Mf1Report { w, z, lhs, rhs, residual: (lhs - rhs).norm() / rhs.norm().max(1e-300) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::SturmLiouvilleProblem;

    #[test]
    fn free_dirichlet_eigenvalues_and_norms() {
        let p = SturmLiouvilleProblem::bessel(0.0, PI).unwrap();
        let e = Engine::with_defaults(&p);
        let s = compute_spectrum(&e, None, 8).unwrap();
        for (k, (l, g)) in s.atoms().enumerate() {
            let k = (k + 1) as f64;
            assert!((l - k * k).abs() < 1e-9 * k * k, "lambda_{k} = {l}");
            assert!((g - 2.0 * k * k / PI).abs() < 1e-7 * g, "gamma_{k} = {g}");
        }
        for k in 0..8 {
            assert!(wprime_crosscheck(&s, k).unwrap() < 1e-6);
        }
        assert!((s.wprime[0] - PI / 2.0).abs() < 1e-7);
        assert!((s.c[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_range_gives_empty_spectrum() {
        let p = SturmLiouvilleProblem::bessel(0.0, PI).unwrap();
        let e = Engine::with_defaults(&p);
        assert!(eigenvalues(&e, Some(0.5), 10).unwrap().is_empty());
        assert_eq!(eigenvalues(&e, Some(10.0), 10).unwrap().len(), 3);
    }

    #[test]
    fn neumann_type_condition() {
        // beta = pi/2: phi'(pi) = 0, lambda_k = (k - 1/2)^2
        let p = SturmLiouvilleProblem::bessel(0.0, PI).unwrap().with_beta(PI / 2.0).unwrap();
        let e = Engine::with_defaults(&p);
        let s = eigenvalues(&e, None, 5).unwrap();
        for (k, l) in s.eigenvalues.iter().enumerate() {
            let exact = (k as f64 + 0.5).powi(2);
            assert!((l - exact).abs() < 1e-9, "{l} vs {exact}");
        }
    }

    #[test]
    fn probes_agree_with_index() {
        let p = SturmLiouvilleProblem::bessel(1.0, 1.0).unwrap();
        let e = Engine::with_defaults(&p);
        let s = eigenvalues(&e, None, 9).unwrap();
        for pr in completeness_probes(&e, &s).unwrap() {
            assert_eq!(pr.count, pr.expected);
        }
    }

    #[test]
    fn tail_fit_recovers_model() {
        let eig: Vec<f64> = (1..=40).map(|k| 3.0 * (k as f64 + 0.25).powi(2)).collect();
        let gam: Vec<f64> = eig.iter().map(|l| 0.5 * l.powf(1.5)).collect();
        let s = Spectrum::from_atoms(eig, gam);
        let t = s.tail.unwrap();
        assert!((t.a - 3.0).abs() < 1e-10 && (t.delta - 0.25).abs() < 1e-10);
        assert!((t.s - 1.5).abs() < 1e-10 && (t.g_coeff - 0.5).abs() < 1e-9);
    }

    #[test]
    fn moment_classification_free_closed_form() {
        let eig: Vec<f64> = (1..=60).map(|k| (k * k) as f64).collect();
        let gam: Vec<f64> = eig.iter().map(|l| 2.0 * l / PI).collect();
        let s = Spectrum::from_atoms(eig, gam);
        assert_eq!(moment_test(&s, 0, 0.25).verdict, Verdict::Divergent);
        assert_eq!(moment_test(&s, 1, 0.25).verdict, Verdict::Summable);
        assert_eq!(minimal_moment_order(&s, 0.25, 5), Some(1));
    }

    #[test]
    fn mf1_identity_free_and_bessel() {
        for l in [0.0, 1.0] {
            let p = SturmLiouvilleProblem::bessel(l, 2.0).unwrap();
            let e = Engine::with_defaults(&p);
            let r = mf1_check(&e, C64::new(1.5, 0.7), C64::new(-3.0, 2.0)).unwrap();
            assert!(r.residual < 1e-7, "l={l} residual {}", r.residual);
        }
    }
}
