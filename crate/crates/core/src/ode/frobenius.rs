//! Frobenius expansions at the Bessel-type origin.
//!
//! With `q(x) = sum_m p_m x^m` (`m >= -1`) the regular solution is
//! `phi = x^(l+1) sum_k a_k x^k`, `a_0 = 1`, and the second solution is
//! `theta = C phi log x + x^(-l) sum_k b_k x^k`. The log coefficient `C` is
//! non-zero only when `d = 2l + 1` is an integer and the recursion resonates
//! at `k = d`; for `d = 0` (`l = -1/2`) it is fixed to `-1` and `b_0 = 0`,
//! otherwise `b_0 = 1/d`. Both choices give `W(theta, phi) = 1`.
//!
//! Every coefficient is a [`Jet`] in the spectral parameter, so the
//! z-derivatives are exact.

use crate::error::{Error, Result};
use crate::jet::{Jet, C64};
use crate::problem::LocalPolynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Power,
    Logarithmic,
}

#[derive(Clone, Debug)]
pub struct FrobeniusSeries {
    pub l: f64,
    pub z0: C64,
    pub order: usize,
    pub a: Vec<Jet>,
    pub b: Vec<Jet>,
    pub log_coeff: Jet,
    pub branch: Branch,
}

/// Values and x-derivatives of both solutions at one abscissa.
#[derive(Clone, Debug)]
pub struct SeriesPoint {
    pub phi: Jet,
    pub dphi: Jet,
    pub theta: Jet,
    pub dtheta: Jet,
    /// Size of the last two retained terms relative to the sums.
    pub tail: f64,
}

fn integer_index(d: f64) -> Option<usize> {
    let r = d.round();
    ((d - r).abs() < 1e-12 && r >= 0.0).then_some(r as usize)
}

impl FrobeniusSeries {
    pub fn new(l: f64, q: &LocalPolynomial, z0: C64, order: usize, terms: usize) -> Result<Self> {
        if q.lowest < -1 && !q.coeffs.iter().all(|c| *c == 0.0) {
            return Err(Error::Domain(format!(
                "potential term x^{} is too singular for the Frobenius start",
                q.lowest
            )));
        }
        let zero = Jet::zero(order);
        let d = 2.0 * l + 1.0;
        let resonance = integer_index(d);
        let forcing = |coeffs: &[Jet], k: usize| -> Jet {
            let mut s = zero.clone();
            for m in q.lowest.max(-1)..=q.highest() {
                let p = q.coeff(m);
                if p == 0.0 {
                    continue;
                }
                let idx = k as i64 - 2 - m as i64;
                if idx >= 0 && (idx as usize) < k {
                    s = &s + &coeffs[idx as usize].scale(C64::new(p, 0.0));
                }
            }
            if k >= 2 {
                s = &s - &coeffs[k - 2].mul_var(z0);
            }
            s
        };

        let mut a = vec![Jet::constant(C64::new(1.0, 0.0), order)];
        for k in 1..terms {
            let denom = k as f64 * (k as f64 + d);
            let s = forcing(&a, k);
            a.push(s.scale(C64::new(1.0 / denom, 0.0)));
        }

        let mut log_coeff = zero.clone();
        let mut b = Vec::with_capacity(terms);
        if resonance == Some(0) {
            log_coeff = Jet::constant(C64::new(-1.0, 0.0), order);
            b.push(zero.clone());
        } else {
            b.push(Jet::constant(C64::new(1.0 / d, 0.0), order));
        }
        for k in 1..terms {
            let mut s = forcing(&b, k);
            match resonance {
                Some(r) if k == r => {
                    log_coeff = s.scale(C64::new(1.0 / r as f64, 0.0));
                    b.push(zero.clone());
                    continue;
                }
                Some(r) if k > r || r == 0 => {
                    let src = &a[k - r];
                    let w = 2.0 * k as f64 - r as f64;
                    s = &s - &(&log_coeff * src).scale(C64::new(w, 0.0));
                }
                _ => {}
            }
            let denom = k as f64 * (k as f64 - d);
            b.push(s.scale(C64::new(1.0 / denom, 0.0)));
        }
        let branch = if log_coeff.norm_inf() > 0.0 { Branch::Logarithmic } else { Branch::Power };
        Ok(Self { l, z0, order, a, b, log_coeff, branch })
    }

    pub fn eval(&self, x: f64) -> SeriesPoint {
        let order = self.order;
        let nu = self.l + 1.0;
        let mut phi = Jet::zero(order);
        let mut dphi = Jet::zero(order);
        let mut theta = Jet::zero(order);
        let mut dtheta = Jet::zero(order);
        let n = self.a.len();
        let mut tail_phi = 0.0;
        let mut tail_theta = 0.0;
        let mut xk = 1.0;
        for k in 0..n {
            let kf = k as f64;
            for j in 0..=order {
                let a = self.a[k].0[j] * xk;
                phi.0[j] += a;
                dphi.0[j] += a * (kf + nu);
                let b = self.b[k].0[j] * xk;
                theta.0[j] += b;
                dtheta.0[j] += b * (kf - self.l);
            }
            if k + 2 >= n {
                tail_phi += self.a[k].norm_inf() * xk;
                tail_theta += self.b[k].norm_inf() * xk;
            }
            xk *= x;
        }
        let pnu = x.powf(nu);
        let pml = x.powf(-self.l);
        phi = phi.scale(C64::new(pnu, 0.0));
        dphi = dphi.scale(C64::new(pnu / x, 0.0));
        let tail = tail_phi * pnu / phi.norm_inf().max(1e-300)
            + tail_theta * pml / theta.scale(C64::new(pml, 0.0)).norm_inf().max(1e-300);
        theta = theta.scale(C64::new(pml, 0.0));
        dtheta = dtheta.scale(C64::new(pml / x, 0.0));
        if self.branch == Branch::Logarithmic {
            let lx = C64::new(x.ln(), 0.0);
            let cphi = &self.log_coeff * &phi;
            let cdphi = &self.log_coeff * &dphi;
            theta = &theta + &cphi.scale(lx);
            dtheta = &dtheta + &(&cdphi.scale(lx) + &cphi.scale(C64::new(1.0 / x, 0.0)));
        }
        SeriesPoint { phi, dphi, theta, dtheta, tail }
    }

    /// Largest `x <= x_max` (by geometric shrinking) where the tail estimate
    /// is below `tol`.
    pub fn start_abscissa(&self, x_max: f64, tol: f64) -> Result<f64> {
        let mut x = x_max;
        for _ in 0..200 {
            let p = self.eval(x);
            if p.tail <= tol {
                return Ok(x);
            }
            x *= 0.8;
        }
        let tail = self.eval(x).tail;
        Err(Error::SeriesNonConvergence { x0: x, tail })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn free_l0_reproduces_sine_and_cosine() {
        let z = c(2.0);
        let s = FrobeniusSeries::new(0.0, &LocalPolynomial::zero(), z, 1, 40).unwrap();
        let x = 0.7;
        let p = s.eval(x);
        let k = z.sqrt();
        assert_relative_eq!((p.phi.value() - (k * x).sin() / k).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!((p.theta.value() - (k * x).cos()).norm(), 0.0, epsilon = 1e-15);
        // d/dz cos(sqrt z x) = -x sin(sqrt z x)/(2 sqrt z)
        let dtheta = -x * (k * x).sin() / (2.0 * k);
        assert_relative_eq!((p.theta.derivative(1) - dtheta).norm(), 0.0, epsilon = 1e-14);
        assert_eq!(s.branch, Branch::Power);
    }

    #[test]
    fn wronskian_is_one_for_all_branches() {
        let q = LocalPolynomial { lowest: -1, coeffs: vec![0.3, 1.0, -0.5] };
        for &l in &[-0.5, -0.2, 0.0, 0.5, 1.0, 1.5, 2.0, 2.7, 3.0] {
            let s = FrobeniusSeries::new(l, &q, C64::new(1.5, 0.7), 3, 40).unwrap();
            let p = s.eval(0.3);
            let w = &(&p.theta * &p.dphi) - &(&p.dtheta * &p.phi);
            assert_relative_eq!((w.value() - 1.0).norm(), 0.0, epsilon = 1e-12);
            for j in 1..=3 {
                assert!(w.coeff(j).norm() < 1e-11, "l={l} j={j} {}", w.coeff(j));
            }
        }
    }

    #[test]
    fn logarithmic_branch_detection() {
        let free = LocalPolynomial::zero();
        assert_eq!(FrobeniusSeries::new(-0.5, &free, c(1.0), 0, 20).unwrap().branch, Branch::Logarithmic);
        assert_eq!(FrobeniusSeries::new(0.5, &free, c(1.0), 0, 20).unwrap().branch, Branch::Logarithmic);
        assert_eq!(FrobeniusSeries::new(1.0, &free, c(1.0), 0, 20).unwrap().branch, Branch::Power);
        let linear = LocalPolynomial { lowest: 1, coeffs: vec![1.0] };
        assert_eq!(FrobeniusSeries::new(1.0, &linear, c(1.0), 0, 20).unwrap().branch, Branch::Logarithmic);
    }

    #[test]
    fn series_residual_is_small() {
        // -u'' + (l(l+1)/x^2 + q - z) u = 0 checked by differencing the series
        let q = LocalPolynomial { lowest: 0, coeffs: vec![0.0, 1.0] };
        let l = 1.0;
        let z = C64::new(3.0, 1.0);
        let s = FrobeniusSeries::new(l, &q, z, 0, 40).unwrap();
        let x = 0.4;
        let h = 1e-4;
        for pick in [0usize, 1] {
            let val = |x: f64| {
                let p = s.eval(x);
                if pick == 0 { p.phi.value() } else { p.theta.value() }
            };
            let d2 = (val(x + h) - 2.0 * val(x) + val(x - h)) / (h * h);
            let r = -d2 + (l * (l + 1.0) / (x * x) + x - z) * val(x);
            assert!(r.norm() < 1e-5 * (1.0 + val(x).norm()), "residual {r}");
        }
    }
}
