//! Dormand–Prince 5(4) with step-size control on complex state vectors.

use crate::error::{Error, Result};
use crate::jet::C64;

pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, x: f64, y: &[C64], dy: &mut [C64]);
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 35.0 / 384.0 - 5179.0 / 57600.0;
const E3: f64 = 500.0 / 1113.0 - 7571.0 / 16695.0;
const E4: f64 = 125.0 / 192.0 - 393.0 / 640.0;
const E5: f64 = -2187.0 / 6784.0 + 92097.0 / 339200.0;
const E6: f64 = 11.0 / 84.0 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Clone, Debug)]
pub struct Dopri5 {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
    h: Option<f64>,
    pub steps: usize,
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    ynew: Vec<C64>,
}

impl Dopri5 {
    pub fn new(atol: f64, rtol: f64) -> Self {
        Self {
            atol,
            rtol,
            max_steps: 5_000_000,
            h: None,
            steps: 0,
            k: Default::default(),
            tmp: Vec::new(),
            ynew: Vec::new(),
        }
    }

    fn ensure(&mut self, n: usize) {
        if self.tmp.len() != n {
            for k in self.k.iter_mut() {
                *k = vec![C64::default(); n];
            }
            self.tmp = vec![C64::default(); n];
            self.ynew = vec![C64::default(); n];
        }
    }

    /// Integrates `y` from `x_from` to `x_to` (either direction). The step size
    /// carries over between calls so consecutive segments stay cheap.
    /// `observer` sees every accepted step.
    pub fn integrate<S: OdeSystem + ?Sized>(
        &mut self,
        sys: &S,
        x_from: f64,
        x_to: f64,
        y: &mut [C64],
        observer: &mut dyn FnMut(f64, &[C64]),
    ) -> Result<()> {
        let n = sys.dim();
        self.ensure(n);
        let span = x_to - x_from;
        if span == 0.0 {
            return Ok(());
        }
        let dir = span.signum();
        let mut x = x_from;
        let mut h = self.h.map(|h| h.abs()).unwrap_or(span.abs() * 1e-3).min(span.abs());
        sys.rhs(x, y, &mut self.k[0]);
        let mut step_count = 0usize;
        loop {
            let remaining = (x_to - x).abs();
            if remaining <= 1e-15 * x_to.abs().max(1.0) {
                break;
            }
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let hs = dir * h;
            let err = self.attempt(sys, x, hs, y);
            if !err.is_finite() {
                h *= 0.1;
                if h < 1e-300 {
                    return Err(Error::StepFailure { x, reason: "non-finite state".into() });
                }
                continue;
            }
            if err <= 1.0 {
                x = if last { x_to } else { x + hs };
                y.copy_from_slice(&self.ynew);
                self.k.swap(0, 6);
                observer(x, y);
                self.steps += 1;
                step_count += 1;
                if !last {
                    let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    h *= fac;
                    self.h = Some(h);
                } else if self.h.is_none() {
                    self.h = Some(h);
                }
                if last {
                    break;
                }
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                self.h = Some(h);
            }
            if step_count > self.max_steps || h < 1e-14 * x.abs().max(1e-300) {
                return Err(Error::StepFailure { x, reason: format!("step size underflow (h = {h:e})") });
            }
        }
        Ok(())
    }

    /// One trial step; leaves the candidate in `ynew`, the end-point slope in
    /// `k[6]`, and returns the scaled error norm.
    fn attempt<S: OdeSystem + ?Sized>(&mut self, sys: &S, x: f64, h: f64, y: &[C64]) -> f64 {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (h * A21);
        }
        sys.rhs(x + C2 * h, tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        sys.rhs(x + C3 * h, tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        sys.rhs(x + C4 * h, tmp, k4);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        sys.rhs(x + C5 * h, tmp, k5);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        sys.rhs(x + h, tmp, k6);
        let ynew = &mut self.ynew;
        for i in 0..n {
            ynew[i] = y[i] + (k1[i] * B1 + k3[i] * B3 + k4[i] * B4 + k5[i] * B5 + k6[i] * B6) * h;
        }
        sys.rhs(x + h, ynew, k7);
        let mut acc = 0.0;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = self.atol + self.rtol * y[i].norm().max(ynew[i].norm());
            let r = e.norm() / sc;
            acc += r * r;
        }
        (acc / n as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Harmonic(f64);
    impl OdeSystem for Harmonic {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _x: f64, y: &[C64], dy: &mut [C64]) {
            dy[0] = y[1];
            dy[1] = -y[0] * (self.0 * self.0);
        }
    }

    #[test]
    fn harmonic_oscillator_forward_and_backward() {
        let sys = Harmonic(3.0);
        let mut y = vec![C64::new(0.0, 0.0), C64::new(3.0, 0.0)];
        let mut rk = Dopri5::new(1e-13, 1e-11);
        rk.integrate(&sys, 0.0, 10.0, &mut y, &mut |_, _| {}).unwrap();
        assert_relative_eq!(y[0].re, (30.0f64).sin(), epsilon = 1e-8);
        rk.integrate(&sys, 10.0, 0.0, &mut y, &mut |_, _| {}).unwrap();
        assert_relative_eq!(y[0].re, 0.0, epsilon = 1e-8);
        assert_relative_eq!(y[1].re, 3.0, epsilon = 1e-8);
    }

    #[test]
    fn observed_order_is_five() {
        // fixed steps through tolerances that never reject: compare two step sizes
        let sys = Harmonic(1.0);
        let run = |h: f64| {
            let mut rk = Dopri5::new(1.0, 1.0);
            let mut y = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
            let mut x = 0.0;
            while x < 1.0 - 1e-12 {
                rk.h = Some(h);
                rk.integrate(&sys, x, x + h, &mut y, &mut |_, _| {}).unwrap();
                x += h;
            }
            (y[0].re - 1.0f64.sin()).abs()
        };
        let ratio = run(0.1) / run(0.05);
        assert!(ratio > 2f64.powf(4.5), "ratio {ratio}");
    }
}
