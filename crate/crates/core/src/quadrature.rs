//! Gauss–Legendre rules, adaptive bisection quadrature, the logarithmic
//! substitution used near the singular endpoint, and Euler–Maclaurin tails.

use crate::error::{Error, Result};
use crate::jet::C64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl10() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(10))
}

pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Fixed rule on `[a, b]`.
pub fn fixed<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> C64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| f(c + h * x) * *w)
        .sum::<C64>()
        * h
}

/// Adaptive bisection: a panel is accepted once the 10-point rule on it agrees
/// with the sum over its two halves.
pub fn adaptive<F: FnMut(f64) -> C64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<C64> {
    let rule = gl10();
    let whole = fixed(&mut f, a, b, rule);
    let mut stack = vec![(a, b, whole, 0usize)];
    let mut total = C64::new(0.0, 0.0);
    let mut evals = 0usize;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = fixed(&mut f, lo, mid, rule);
        let right = fixed(&mut f, mid, hi, rule);
        evals += 20;
        let refined = left + right;
        if !refined.re.is_finite() || !refined.im.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{lo:e}, {hi:e}]")));
        }
        let scale = (hi - lo) / (b - a);
        let err = (refined - est).norm();
        if err <= (abs_tol * scale).max(rel_tol * refined.norm()) || depth >= 50 || hi - lo < 1e-14 * (b - a).abs() {
            total += refined;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
        if evals > 2_000_000 {
            return Err(Error::Quadrature("evaluation budget exhausted".into()));
        }
    }
    Ok(total)
}

pub fn adaptive_real<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    adaptive(|x| C64::new(f(x), 0.0), a, b, abs_tol, rel_tol).map(|c| c.re)
}

/// Outcome of an integral towards the singular endpoint `x = 0`.
#[derive(Clone, Copy, Debug)]
pub struct ToZero {
    pub value: C64,
    /// False when the panel contributions failed to decay.
    pub converged: bool,
}

/// `int_0^{x0} f(x) dx` through `x = x0 e^{-t}`; panels of unit width in `t`
/// until the contribution is negligible or `t_max` is reached.
pub fn integrate_to_zero<F: FnMut(f64) -> C64>(mut f: F, x0: f64, t_max: f64) -> ToZero {
    let rule = gl16();
    let mut total = C64::new(0.0, 0.0);
    let mut t = 0.0;
    let mut last = f64::INFINITY;
    let mut growing = 0;
    while t < t_max {
        let mut g = |t: f64| {
            let x = x0 * (-t).exp();
            f(x) * x
        };
        let panel = fixed(&mut g, t, t + 1.0, rule);
        total += panel;
        t += 1.0;
        let p = panel.norm();
        if p <= 1e-17 * total.norm() || p == 0.0 {
            return ToZero { value: total, converged: true };
        }
        if p > 0.98 * last {
            growing += 1;
        } else {
            growing = 0;
        }
        if growing >= 8 {
            return ToZero { value: total, converged: false };
        }
        last = p;
    }
    ToZero { value: total, converged: last <= 1e-13 * total.norm() }
}

/// `int_lo^hi` through the logarithmic substitution; each panel covers one
/// unit of `ln x`, suitable for `0 < lo < hi` with power-like integrands.
pub fn integrate_log<F: FnMut(f64) -> C64>(mut f: F, lo: f64, hi: f64) -> C64 {
    let rule = gl16();
    let span = (hi / lo).ln();
    let panels = span.ceil().max(1.0) as usize;
    let width = span / panels as f64;
    let mut g = |t: f64| {
        let x = hi * (-t).exp();
        f(x) * x
    };
    (0..panels)
        .map(|p| fixed(&mut g, p as f64 * width, (p + 1) as f64 * width, rule))
        .sum()
}

/// Vector-valued version of [`integrate_to_zero`]: `f(x, out)` fills `n` values.
pub fn integrate_to_zero_vec<F: FnMut(f64, &mut [C64])>(mut f: F, n: usize, x0: f64, t_max: f64) -> (Vec<C64>, bool) {
    let rule = gl16();
    let mut total = vec![C64::new(0.0, 0.0); n];
    let mut buf = vec![C64::new(0.0, 0.0); n];
    let mut t = 0.0;
    let mut last = f64::INFINITY;
    let mut growing = 0;
    let norm = |v: &[C64]| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while t < t_max {
        let mut panel = vec![C64::new(0.0, 0.0); n];
        for (u, w) in rule.0.iter().zip(&rule.1) {
            let tt = t + 0.5 * (u + 1.0);
            let x = x0 * (-tt).exp();
            f(x, &mut buf);
            for i in 0..n {
                panel[i] += buf[i] * (0.5 * w * x);
            }
        }
        for i in 0..n {
            total[i] += panel[i];
        }
        t += 1.0;
        let p = norm(&panel);
        let tot = norm(&total);
        if p <= 1e-17 * tot || p == 0.0 {
            return (total, true);
        }
        growing = if p > 0.98 * last { growing + 1 } else { 0 };
        if growing >= 8 {
            return (total, false);
        }
        last = p;
    }
    let ok = last <= 1e-13 * norm(&total);
    (total, ok)
}

/// Vector-valued version of [`integrate_log`].
pub fn integrate_log_vec<F: FnMut(f64, &mut [C64])>(mut f: F, n: usize, lo: f64, hi: f64) -> Vec<C64> {
    let rule = gl16();
    let mut total = vec![C64::new(0.0, 0.0); n];
    let mut buf = vec![C64::new(0.0, 0.0); n];
    let span = (hi / lo).ln();
    if span <= 0.0 {
        return total;
    }
    let panels = span.ceil().max(1.0) as usize;
    let width = span / panels as f64;
    for p in 0..panels {
        for (u, w) in rule.0.iter().zip(&rule.1) {
            let tt = (p as f64 + 0.5 * (u + 1.0)) * width;
            let x = hi * (-tt).exp();
            f(x, &mut buf);
            for i in 0..n {
                total[i] += buf[i] * (0.5 * w * width * x);
            }
        }
    }
    total
}

/// `sum_{k > n} f(k)` via the midpoint Euler–Maclaurin formula
/// `int_{n+1/2}^inf f + f'(n+1/2)/24 - 7 f'''(n+1/2)/5760`, for integrands decaying faster than `1/k`.
pub fn tail_sum<F: Fn(f64) -> C64>(f: F, n: usize) -> C64 {
    let t0 = n as f64 + 0.5;
    // t = t0/u maps (0, 1] onto [t0, inf); power-law tails become algebraic at u = 0
    let g = |u: f64| f(t0 / u) * (t0 / (u * u));
    let integral = integrate_to_zero(g, 1.0, 400.0).value;
    let h = 1e-3 * t0;
    let d1 = (f(t0 + h) - f(t0 - h)) / (2.0 * h);
    let h = 0.05 * t0;
    let d3 = (f(t0 + 2.0 * h) - 2.0 * f(t0 + h) + 2.0 * f(t0 - h) - f(t0 - 2.0 * h)) / (2.0 * h * h * h);
    integral + d1 / 24.0 - d3 * (7.0 / 5760.0)
}
