//! The Hermite–Biehler function `E(z) = W_b(c, phi(z)) + i W_b(s, phi(z))`
//! and the reproducing kernel `K(w, z) = int phi(w)* phi(z)` of the
//! associated de Branges space.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, C64};
use crate::ode::{Engine, PassSpec, SolutionJet};
use crate::spectral::{moment_test, Spectrum, Verdict};

/// `E` together with the reference solutions `c`, `s` (data `(1,0)` and
/// `(0,1)` at `b`) computed at a real reference parameter.
pub struct HermiteBiehler<'a> {
    engine: &'a Engine<'a>,
    pub z_ref: f64,
    pub c: SolutionJet,
    pub s: SolutionJet,
}

/// `A`, `B` and their z-derivatives at one point.
#[derive(Clone, Copy, Debug)]
pub struct EData {
    pub z: C64,
    pub a: C64,
    pub b: C64,
    pub da: C64,
    pub db: C64,
}

impl EData {
    pub fn e(&self) -> C64 {
        self.a + C64::i() * self.b
    }
}

impl<'a> HermiteBiehler<'a> {
    pub fn new(engine: &'a Engine<'a>, z_ref: f64) -> Result<Self> {
        let z = C64::new(z_ref, 0.0);
        let grid = engine.grid_for(&[(z, 0)])?;
        let c = backward(engine, z, 1.0, 0.0, &grid)?;
        let s = backward(engine, z, 0.0, 1.0, &grid)?;
        Ok(Self { engine, z_ref, c, s })
    }

    /// Largest `|W_x(c, s) - 1|` over the grid.
    pub fn wronskian_defect(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &x in &self.c.grid.points {
            let w = crate::ode::engine::wronskian_at(&self.c, &self.s, x)?;
            worst = worst.max((w - 1.0).norm());
        }
        Ok(worst)
    }

    /// `A(z) = W_b(c, phi) = phi'(z, b)`, `B(z) = W_b(s, phi) = -phi(z, b)` and derivatives.
    pub fn data(&self, z: C64) -> Result<EData> {
        let (phi, dphi, _) = self.engine.at_endpoint(z, 1, false)?;
        let last = self.c.grid.points.len() - 1;
        let (c, dc) = (self.c.u(last, 0), self.c.du(last, 0));
        let (s, ds) = (self.s.u(last, 0), self.s.du(last, 0));
        let w = |u: C64, du: C64, j: usize| u * dphi.derivative(j) - du * phi.derivative(j);
        Ok(EData { z, a: w(c, dc, 0), b: w(s, ds, 0), da: w(c, dc, 1), db: w(s, ds, 1) })
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        Ok(self.data(z)?.e())
    }

    /// `E^#(z) = E(z*)*`.
    pub fn sharp(&self, z: C64) -> Result<C64> {
        Ok(self.eval(z.conj())?.conj())
    }
}

fn backward(engine: &Engine<'_>, z: C64, u: f64, du: f64, grid: &std::sync::Arc<crate::ode::Grid>) -> Result<SolutionJet> {
    let beta = (-u).atan2(du);
    let beta = if beta < 0.0 { beta + std::f64::consts::PI } else { beta };
    let scale = if ((-beta.sin()) - u).abs() + (beta.cos() - du).abs() < 1e-12 { 1.0 } else { -1.0 };
    let p = engine.problem.with_beta(beta % std::f64::consts::PI)?;
    let e = Engine::new(&p, engine.tol.clone());
    let mut sol = e.endpoint_solution(z, 0, grid)?;
    for v in sol.values.iter_mut().chain(sol.slopes.iter_mut()) {
        *v = v.scale(C64::new(scale, 0.0));
    }
    Ok(sol)
}

/// `min |E(z)| - |E(z*)|` over upper half-plane samples.
pub fn hb_check(e: &HermiteBiehler<'_>, samples: &[C64]) -> Result<f64> {
    let mut margin = f64::INFINITY;
    for &z in samples {
        if z.im <= 0.0 {
            return Err(Error::Domain(format!("sample {z} is not in the upper half-plane")));
        }
        margin = margin.min(e.eval(z)?.norm() - e.eval(z.conj())?.norm());
    }
    Ok(margin)
}

/// Smallest `|E(lambda)|` on a real grid and the largest imaginary part of `A`, `B` there.
pub fn real_axis_check(e: &HermiteBiehler<'_>, lo: f64, hi: f64, n: usize) -> Result<(f64, f64)> {
    let mut min_e = f64::INFINITY;
    let mut max_im: f64 = 0.0;
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64;
        let d = e.data(C64::new(x, 0.0))?;
        min_e = min_e.min(d.e().norm());
        max_im = max_im.max(d.a.im.abs()).max(d.b.im.abs());
    }
    Ok((min_e, max_im))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum KernelRoute {
    Integral,
    Formula,
}

/// `K(w, z) = int phi(w)* phi(z)` by quadrature.
pub fn kernel_integral(engine: &Engine<'_>, w: C64, z: C64) -> Result<C64> {
    let v = w.conj();
    let specs = [PassSpec { z: v, order: 0, theta: false }, PassSpec { z, order: 0, theta: false }];
    let f = |_x: f64, b: crate::ode::Blocks<'_>, out: &mut [C64]| {
        out[0] = b.get(0).phi(0) * b.get(1).phi(0);
    };
    let r = engine.pass(&specs, 0.0, &[], 1, &f)?;
    if !r.converged {
        return Err(Error::Quadrature("kernel integral did not converge".into()));
    }
    Ok(r.total[0])
}

/// `(E(z) E^#(w*) - E(w*) E^#(z)) / (2i (w* - z))`, confluent branch `A'B - B'A`.
pub fn kernel_formula(e: &HermiteBiehler<'_>, w: C64, z: C64) -> Result<C64> {
    let v = w.conj();
    let dz = e.data(z)?;
    kernel_from_data(&e.data(v)?, &dz)
}

/// Kernel from precomputed data at `v = w*` and `z`.
pub fn kernel_from_data(dv: &EData, dz: &EData) -> Result<C64> {
    let gap = dv.z - dz.z;
    if gap.norm() <= 1e-9 * (1.0 + dz.z.norm()) {
        return Ok(dz.da * dz.b - dz.db * dz.a);
    }
    Ok((dz.b * dv.a - dz.a * dv.b) / gap)
}

pub fn kernel(engine: &Engine<'_>, e: &HermiteBiehler<'_>, w: C64, z: C64, route: KernelRoute) -> Result<C64> {
    match route {
        KernelRoute::Integral => kernel_integral(engine, w, z),
        KernelRoute::Formula => kernel_formula(e, w, z),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelComparison {
    pub w: C64,
    pub z: C64,
    pub integral: C64,
    pub formula: C64,
    pub rel_diff: f64,
}

pub fn compare_routes(engine: &Engine<'_>, e: &HermiteBiehler<'_>, pairs: &[(C64, C64)]) -> Vec<Result<KernelComparison>> {
    crate::par_map(pairs, |&(w, z)| {
        let integral = kernel_integral(engine, w, z)?;
        let formula = kernel_formula(e, w, z)?;
        Ok(KernelComparison { w, z, integral, formula, rel_diff: (integral - formula).norm() / integral.norm().max(1e-300) })
    })
}

/// Smallest eigenvalue and trace of the Hermitian Gram matrix `[K(w_i, w_j)]`.
pub fn gram_check(e: &HermiteBiehler<'_>, points: &[C64]) -> Result<(f64, f64)> {
    let n = points.len();
    let conj: Vec<EData> = points.iter().map(|w| e.data(w.conj())).collect::<Result<_>>()?;
    let plain: Vec<EData> = points.iter().map(|w| e.data(*w)).collect::<Result<_>>()?;
    let mut g = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = kernel_from_data(&conj[i], &plain[j])?;
        }
    }
    // symmetrize away rounding before the Hermitian solver
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let trace: f64 = (0..n).map(|i| h[(i, i)].re).sum();
    let min = h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    Ok((min, trace))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReproducingReport {
    pub w: C64,
    pub value: C64,
    pub spectral_sum: C64,
    pub residual: f64,
}

/// For `F = sum a_k K(lambda_k, .)`, compares `F(w)` with the spectral sum
/// `sum_j gamma_j K(w, lambda_j)* F(lambda_j)` over all computed atoms.
pub fn reproducing_check(e: &HermiteBiehler<'_>, spectrum: &Spectrum, coeffs: &[(usize, C64)], w: C64) -> Result<ReproducingReport> {
    if !spectrum.is_normed() {
        return Err(Error::NotApplicable("reproducing check needs norming constants".into()));
    }
    let atoms: Vec<EData> = spectrum.eigenvalues.iter().map(|&l| e.data(C64::new(l, 0.0))).collect::<Result<_>>()?;
    let dw = e.data(w)?;
    let dwc = e.data(w.conj())?;
    let f_at = |d: &EData| -> Result<C64> {
        coeffs.iter().map(|&(k, a)| Ok(a * kernel_from_data(&atoms[k], d)?)).sum()
    };
    let value = f_at(&dw)?;
    let mut spectral_sum = C64::new(0.0, 0.0);
    for (j, d) in atoms.iter().enumerate() {
        spectral_sum += spectrum.gamma[j] * kernel_from_data(&dwc, d)?.conj() * f_at(d)?;
    }
    // F(w) may vanish (w at another atom); fall back to the Cauchy-Schwarz scale ||F|| ||K_w||
    let norm_f: f64 = atoms.iter().enumerate().map(|(j, d)| Ok(spectrum.gamma[j] * f_at(d)?.norm_sqr())).sum::<Result<f64>>()?.sqrt();
    let norm_k = kernel_from_data(&dwc, &dw)?.re.max(0.0).sqrt();
    let scale = value.norm().max(1e-6 * norm_f * norm_k);
    let residual = if scale == 0.0 { spectral_sum.norm() } else { (value - spectral_sum).norm() / scale };
    Ok(ReproducingReport { w, value, spectral_sum, residual })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Member,
    NonMember,
    Inconclusive,
}

/// Whether the constant `1` lies in `assoc_n`, through `sum gamma_k (1+lambda_k^2)^{-n}`.
pub fn assoc_membership(spectrum: &Spectrum, n: usize, margin: f64) -> Membership {
    match moment_test(spectrum, n, margin).verdict {
        Verdict::Summable => Membership::Member,
        Verdict::Divergent => Membership::NonMember,
        Verdict::Inconclusive => Membership::Inconclusive,
    }
}

/// `A + iB` jet helpers for callers that already hold `phi` jets at `b`.
pub fn e_from_phi(phi: &Jet, dphi: &Jet) -> Jet {
    dphi - &phi.scale(C64::i())
}
