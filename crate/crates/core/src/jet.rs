//! Truncated Taylor series in the spectral parameter.
//!
//! A [`Jet`] of order `J` stores the normalized Taylor coefficients
//! `f(z0 + h) = sum_j c_j h^j`, `j = 0..=J`, so that `f^(j)(z0) = j! c_j`.
//! All products are truncated at order `J`.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet(pub Vec<C64>);

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl Jet {
    pub fn zero(order: usize) -> Self {
        Jet(vec![C64::new(0.0, 0.0); order + 1])
    }

    pub fn constant(value: C64, order: usize) -> Self {
        let mut j = Self::zero(order);
        j.0[0] = value;
        j
    }

    /// The identity `z0 + h`.
    pub fn variable(z0: C64, order: usize) -> Self {
        let mut j = Self::constant(z0, order);
        if order >= 1 {
            j.0[1] = C64::new(1.0, 0.0);
        }
        j
    }

    /// Builds a jet from derivatives `f^(j)(z0)`.
    pub fn from_derivatives(derivs: &[C64]) -> Self {
        Jet(derivs.iter().enumerate().map(|(j, d)| d / factorial(j)).collect())
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn value(&self) -> C64 {
        self.0[0]
    }

    pub fn coeff(&self, j: usize) -> C64 {
        self.0.get(j).copied().unwrap_or_default()
    }

    /// `f^(j)(z0)`.
    pub fn derivative(&self, j: usize) -> C64 {
        self.coeff(j) * factorial(j)
    }

    pub fn derivatives(&self) -> Vec<C64> {
        (0..=self.order()).map(|j| self.derivative(j)).collect()
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut v = self.0.clone();
        v.resize(order + 1, C64::new(0.0, 0.0));
        Jet(v)
    }

    pub fn scale(&self, s: C64) -> Self {
        Jet(self.0.iter().map(|c| c * s).collect())
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Multiplication by the spectral variable `z0 + h`.
    pub fn mul_var(&self, z0: C64) -> Self {
        let mut out: Vec<C64> = self.0.iter().map(|c| c * z0).collect();
        for j in 1..out.len() {
            out[j] += self.0[j - 1];
        }
        Jet(out)
    }

    /// Reciprocal via `sum_i c_i d_{m-i} = delta_{m0}`.
    pub fn recip(&self) -> Self {
        let n = self.0.len();
        let c0 = self.0[0];
        let mut d = vec![C64::new(0.0, 0.0); n];
        d[0] = 1.0 / c0;
        for m in 1..n {
            let mut s = C64::new(0.0, 0.0);
            for i in 1..=m {
                s += self.0[i] * d[m - i];
            }
            d[m] = -s / c0;
        }
        Jet(d)
    }

    /// Evaluates the truncated series at offset `h`.
    pub fn eval(&self, h: C64) -> C64 {
        self.0.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * h + c)
    }

    /// `exp` of a jet.
    pub fn exp(&self) -> Self {
        // f' = a' f  =>  m f_m = sum_{k=1}^m k a_k f_{m-k}
        let n = self.0.len();
        let mut f = vec![C64::new(0.0, 0.0); n];
        f[0] = self.0[0].exp();
        for m in 1..n {
            let mut s = C64::new(0.0, 0.0);
            for k in 1..=m {
                s += self.0[k] * f[m - k] * k as f64;
            }
            f[m] = s / m as f64;
        }
        Jet(f)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let n = self.0.len().max(rhs.0.len());
        Jet((0..n).map(|j| self.coeff(j) + rhs.coeff(j)).collect())
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let n = self.0.len().max(rhs.0.len());
        Jet((0..n).map(|j| self.coeff(j) - rhs.coeff(j)).collect())
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet(self.0.iter().map(|c| -c).collect())
    }
}

/// Truncated Cauchy product; the result has the smaller of the two orders.
impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.0.len().min(rhs.0.len());
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, a) in self.0.iter().take(n).enumerate() {
            for (k, b) in rhs.0.iter().take(n - i).enumerate() {
                out[i + k] += a * b;
            }
        }
        Jet(out)
    }
}

/// Wronskian of two jet-valued solutions given values and x-derivatives.
pub fn jet_wronskian(u: &Jet, du: &Jet, v: &Jet, dv: &Jet) -> Jet {
    &(u * dv) - &(du * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reciprocal_matches_series() {
        // 1/(1 - h) = sum h^j
        let j = Jet(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        let r = j.recip();
        for c in r.0 {
            assert_relative_eq!(c.re, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn exp_of_variable() {
        let j = Jet::variable(C64::new(0.0, 0.0), 5).exp();
        for (k, c) in j.0.iter().enumerate() {
            assert_relative_eq!(c.re, 1.0 / factorial(k), epsilon = 1e-15);
        }
    }

    #[test]
    fn product_derivatives_follow_leibniz() {
        let z0 = C64::new(0.3, -0.2);
        let a = Jet::variable(z0, 3).exp();
        let b = Jet::variable(z0, 3).mul_var(z0);
        let p = &a * &b;
        // d/dz (e^z z^2) = e^z (z^2 + 2z)
        let expected = z0.exp() * (z0 * z0 + 2.0 * z0);
        assert_relative_eq!((p.derivative(1) - expected).norm(), 0.0, epsilon = 1e-14);
    }
}
