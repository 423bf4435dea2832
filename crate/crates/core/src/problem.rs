//! Problem definition: the perturbed Bessel expression
//! `-u'' + (l(l+1)/x^2 + q(x)) u` on `(0, b]` with a separated real boundary
//! condition at `b`.

use crate::error::{Error, Result};
use crate::quadrature;
use serde::{Deserialize, Serialize};

/// Right-endpoint condition `cos(beta) f(b) + sin(beta) f'(b) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub beta: f64,
}

impl BoundaryCondition {
    pub fn new(beta: f64) -> Result<Self> {
        if !(0.0..std::f64::consts::PI).contains(&beta) {
            return Err(Error::Domain(format!("boundary angle {beta} outside [0, pi)")));
        }
        Ok(Self { beta })
    }

    pub fn dirichlet() -> Self {
        Self { beta: 0.0 }
    }

    /// Initial data `(f(b), f'(b))` satisfying the condition.
    pub fn endpoint_data(&self) -> (f64, f64) {
        (-self.beta.sin(), self.beta.cos())
    }
}

/// Perturbation `q` of the Bessel potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialSpec {
    Free,
    /// `q(x) = sum_i coefficients[i] x^(lowest_power + i)`.
    Polynomial {
        coefficients: Vec<f64>,
        #[serde(default)]
        lowest_power: i32,
    },
    /// Samples `(x, q)` joined by monotone piecewise-cubic interpolation.
    Tabulated { samples: Vec<(f64, f64)> },
}

/// Laurent polynomial `sum_i coeffs[i] x^(lowest + i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalPolynomial {
    pub lowest: i32,
    pub coeffs: Vec<f64>,
}

impl LocalPolynomial {
    pub fn zero() -> Self {
        Self { lowest: 0, coeffs: Vec::new() }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |s, c| s * x + c) * x.powi(self.lowest)
    }

    /// Coefficient of `x^m`.
    pub fn coeff(&self, m: i32) -> f64 {
        let i = m - self.lowest;
        if i < 0 {
            return 0.0;
        }
        self.coeffs.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn highest(&self) -> i32 {
        self.lowest + self.coeffs.len() as i32 - 1
    }
}

#[derive(Clone, Debug)]
struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Pchip {
    fn new(samples: &[(f64, f64)]) -> Self {
        let x: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let y: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut m = vec![0.0; n];
        if n == 2 {
            m[0] = d[0];
            m[1] = d[0];
        } else {
            for i in 1..n - 1 {
                if d[i - 1] * d[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
                }
            }
            m[0] = Self::end_slope(h[0], h[1], d[0], d[1]);
            m[n - 1] = Self::end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
        }
        Self { x, y, m }
    }

    fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() {
            0.0
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    }

    /// Cubic coefficients of segment `i` in powers of `s = x - x_i`.
    fn segment(&self, i: usize) -> [f64; 4] {
        let h = self.x[i + 1] - self.x[i];
        let d = (self.y[i + 1] - self.y[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        [self.y[i], m0, (3.0 * d - 2.0 * m0 - m1) / h, (m0 + m1 - 2.0 * d) / (h * h)]
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&xi| xi <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let c = self.segment(i);
        let s = x - self.x[i];
        ((c[3] * s + c[2]) * s + c[1]) * s + c[0]
    }

    /// First segment expanded in powers of `x`; valid on `(0, x_1]`.
    fn first_segment_polynomial(&self) -> (LocalPolynomial, f64) {
        let c = self.segment(0);
        let x0 = self.x[0];
        let mut p = [0.0; 4];
        // (x - x0)^k expanded binomially
        for (k, ck) in c.iter().enumerate() {
            for j in 0..=k {
                let binom = crate::jet::binomial(k, j);
                p[j] += ck * binom * (-x0).powi((k - j) as i32);
            }
        }
        (LocalPolynomial { lowest: 0, coeffs: p.to_vec() }, self.x[1])
    }
}

/// Evaluator built from a [`PotentialSpec`].
#[derive(Clone, Debug)]
pub struct Potential {
    kind: PotentialKind,
}

#[derive(Clone, Debug)]
enum PotentialKind {
    Zero,
    Poly(LocalPolynomial),
    Table(Pchip),
}

impl Potential {
    fn new(spec: &PotentialSpec) -> Self {
        let kind = match spec {
            PotentialSpec::Free => PotentialKind::Zero,
            PotentialSpec::Polynomial { coefficients, lowest_power } => PotentialKind::Poly(LocalPolynomial {
                lowest: *lowest_power,
                coeffs: coefficients.clone(),
            }),
            PotentialSpec::Tabulated { samples } => PotentialKind::Table(Pchip::new(samples)),
        };
        Self { kind }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Poly(p) => p.eval(x),
            PotentialKind::Table(t) => t.eval(x),
        }
    }

    /// Points in `(lo, hi)` where `q` has a kink or changes sign.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out: Vec<f64> = match &self.kind {
            PotentialKind::Table(t) => t.x.iter().copied().filter(|&x| x > lo && x < hi).collect(),
            _ => Vec::new(),
        };
        let n = 4096;
        let at = |i: usize| lo + (hi - lo) * i as f64 / n as f64;
        for i in 0..n {
            let (mut a, mut b) = (at(i), at(i + 1));
            let (mut fa, fb) = (self.eval(a), self.eval(b));
            if fa * fb >= 0.0 {
                continue;
            }
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                let fm = self.eval(m);
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            out.push(0.5 * (a + b));
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Expansion of `q` valid on `(0, radius]`, used by the Frobenius start.
    pub fn local_expansion(&self) -> (LocalPolynomial, f64) {
        match &self.kind {
            PotentialKind::Zero => (LocalPolynomial::zero(), f64::INFINITY),
            PotentialKind::Poly(p) => (p.clone(), f64::INFINITY),
            PotentialKind::Table(t) => t.first_segment_polynomial(),
        }
    }
}

/// Singular Sturm–Liouville problem of perturbed Bessel type.
#[derive(Clone, Debug)]
pub struct SturmLiouvilleProblem {
    pub a: f64,
    pub b: f64,
    pub l: f64,
    pub perturbation: PotentialSpec,
    pub bc_right: BoundaryCondition,
    /// Set when `l` lies in `[-1/2, 1/2)`, where the origin is limit circle
    /// and the Friedrichs condition selects the principal solution.
    pub friedrichs: bool,
    potential: Potential,
}

/// On-disk problem schema.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub l: f64,
    pub b: serde_json::Value,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "free_spec")]
    pub potential: PotentialSpec,
}

fn free_spec() -> PotentialSpec {
    PotentialSpec::Free
}

impl SturmLiouvilleProblem {
    pub fn new(l: f64, b: f64, perturbation: PotentialSpec, bc_right: BoundaryCondition) -> Result<Self> {
        if !b.is_finite() {
            return Err(Error::Domain("infinite right endpoint is not supported (b must be a finite limit-circle endpoint)".into()));
        }
        if b <= 0.0 {
            return Err(Error::Domain(format!("right endpoint b = {b} must be positive")));
        }
        if !(l >= -0.5) {
            return Err(Error::Domain(format!("angular momentum l = {l} below -1/2")));
        }
        BoundaryCondition::new(bc_right.beta)?;
        match &perturbation {
            PotentialSpec::Free => {}
            PotentialSpec::Polynomial { coefficients, .. } => {
                if coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Domain("non-finite polynomial coefficient".into()));
                }
            }
            PotentialSpec::Tabulated { samples } => {
                if samples.len() < 2 {
                    return Err(Error::Domain("tabulated potential needs at least two samples".into()));
                }
                for (x, q) in samples {
                    if !(*x > 0.0 && *x <= b) {
                        return Err(Error::Domain(format!("sample abscissa {x} outside (0, b]")));
                    }
                    if !q.is_finite() {
                        return Err(Error::Domain(format!("non-finite sample value at x = {x}")));
                    }
                }
                if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::Domain("sample abscissae must be strictly increasing".into()));
                }
            }
        }
        let potential = Potential::new(&perturbation);
        Ok(Self {
            a: 0.0,
            b,
            l,
            perturbation,
            bc_right,
            friedrichs: l < 0.5,
            potential,
        })
    }

    /// Unperturbed Bessel problem with Dirichlet condition at `b`.
    pub fn bessel(l: f64, b: f64) -> Result<Self> {
        Self::new(l, b, PotentialSpec::Free, BoundaryCondition::dirichlet())
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.l, self.b, self.perturbation.clone(), BoundaryCondition::new(beta)?)
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// `q(x)` without the centrifugal term.
    pub fn q(&self, x: f64) -> f64 {
        self.potential.eval(x)
    }

    /// `l(l+1)/x^2 + q(x)`.
    pub fn q_total(&self, x: f64) -> f64 {
        self.l * (self.l + 1.0) / (x * x) + self.potential.eval(x)
    }

    /// The second Frobenius solution carries `sqrt(x) log x` at the origin.
    pub fn logarithmic_branch(&self) -> bool {
        self.l == -0.5
    }

    pub fn to_config(&self) -> ProblemConfig {
        ProblemConfig {
            l: self.l,
            b: serde_json::json!(self.b),
            beta: self.bc_right.beta,
            potential: self.perturbation.clone(),
        }
    }

    /// Crude lower envelope of `-q`, used to seed the ground-state search.
    pub fn negative_envelope(&self) -> f64 {
        (1..=256)
            .map(|i| -self.q(self.b * i as f64 / 256.0))
            .fold(0.0, f64::max)
    }
}

/// Parses and validates a JSON problem description.
pub fn load_problem(config_text: &str) -> Result<SturmLiouvilleProblem> {
    let cfg: ProblemConfig = serde_json::from_str(config_text).map_err(|e| Error::Parse(e.to_string()))?;
    let b = match &cfg.b {
        serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse("b is not a number".into()))?,
        serde_json::Value::String(s) if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "+inf") => f64::INFINITY,
        other => return Err(Error::Parse(format!("b must be a number, got {other}"))),
    };
    SturmLiouvilleProblem::new(cfg.l, b, cfg.potential, BoundaryCondition { beta: cfg.beta })
}

/// Named reference problems, addressable from the command line as `builtin:<name>`.
pub fn builtin_problems() -> Vec<(&'static str, SturmLiouvilleProblem)> {
    use std::f64::consts::{FRAC_PI_2, PI};
    let poly = |c: Vec<f64>, lowest_power| PotentialSpec::Polynomial { coefficients: c, lowest_power };
    let table: Vec<(f64, f64)> = (1..=16).map(|i| (i as f64 / 16.0, (3.0 * i as f64 / 16.0).sin())).collect();
    let d = BoundaryCondition::dirichlet();
    let build = |l, b, q, bc| SturmLiouvilleProblem::new(l, b, q, bc).expect("built-in problem is valid");
    vec![
        ("free", build(0.0, PI, PotentialSpec::Free, d)),
        ("free-neumann", build(0.0, PI, PotentialSpec::Free, BoundaryCondition { beta: FRAC_PI_2 })),
        ("bessel-l1", build(1.0, 1.0, PotentialSpec::Free, d)),
        ("bessel-l2", build(2.0, 1.0, PotentialSpec::Free, d)),
        ("log-branch", build(-0.5, 1.0, PotentialSpec::Free, d)),
        ("linear", build(0.0, 1.0, poly(vec![1.0], 1), d)),
        ("tabulated", build(1.0, 1.0, PotentialSpec::Tabulated { samples: table }, BoundaryCondition { beta: 0.3 })),
    ]
}

/// Resolves `builtin:<name>` or reads a problem file.
pub fn resolve_problem(spec: &str) -> Result<SturmLiouvilleProblem> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return builtin_problems()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, p)| p)
            .ok_or_else(|| Error::Parse(format!("unknown built-in problem '{name}'")));
    }
    let text = std::fs::read_to_string(spec).map_err(|e| Error::Parse(format!("{spec}: {e}")))?;
    load_problem(&text)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `int_0^b w(x) |q(x)| dx` with `w = x` (or `x (1 - log(x/b))` when `l = -1/2`).
    pub weighted_norm: f64,
    pub weight: String,
    pub ceiling: f64,
    pub divergent: bool,
    pub pass: bool,
}

pub const DEFAULT_WEIGHTED_CEILING: f64 = 1e8;

/// Numerical check of the admissibility condition on the perturbation.
pub fn validate_potential(problem: &SturmLiouvilleProblem, ceiling: f64) -> Result<ValidationReport> {
    let b = problem.b;
    let log_weight = problem.logarithmic_branch();
    let weight = move |x: f64| if log_weight { x * (1.0 - (x / b).ln()) } else { x };
    let integrand = |x: f64| {
        let q = problem.q(x);
        weight(x) * q.abs()
    };
    let split = 1e-3 * b;
    let mut nonfinite = false;
    let head = quadrature::integrate_to_zero(
        |x| {
            let v = integrand(x);
            if !v.is_finite() {
                nonfinite = true;
            }
            crate::jet::C64::new(if v.is_finite() { v } else { 0.0 }, 0.0)
        },
        split,
        200.0,
    );
    if nonfinite {
        return Err(Error::Quadrature("non-finite potential value near the origin".into()));
    }
    let mut edges = vec![split];
    edges.extend(problem.potential().breakpoints(split, b));
    edges.push(b);
    let mut body = 0.0;
    for w in edges.windows(2) {
        body += quadrature::adaptive_real(integrand, w[0], w[1], 1e-15, 1e-12)?;
    }
    let divergent = !head.converged;
    let weighted_norm = if divergent { f64::INFINITY } else { head.value.re + body };
    Ok(ValidationReport {
        weighted_norm,
        weight: if log_weight { "x(1-log(x/b))".into() } else { "x".into() },
        ceiling,
        divergent,
        pass: !divergent && weighted_norm <= ceiling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn loads_identity_configuration() {
        let p = load_problem(r#"{"l":0,"b":3.141592653589793,"potential":{"family":"free"},"beta":0}"#).unwrap();
        assert_eq!(p.l, 0.0);
        assert_eq!(p.perturbation, PotentialSpec::Free);
        assert!(p.friedrichs);
    }

    #[test]
    fn loads_bessel_l2() {
        let p = load_problem(r#"{"l":2,"b":1}"#).unwrap();
        assert_eq!(p.l, 2.0);
        assert!(!p.friedrichs);
        assert_relative_eq!(p.q_total(0.5), 24.0);
    }

    #[test]
    fn rejects_out_of_interval_sample() {
        let err = load_problem(r#"{"l":0,"b":1,"potential":{"family":"tabulated","samples":[[-0.1,1.0],[0.5,1.0]]}}"#).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn rejects_bad_ranges_and_text() {
        assert!(matches!(load_problem(r#"{"l":-1,"b":1}"#), Err(Error::Domain(_))));
        assert!(matches!(load_problem(r#"{"l":0,"b":0}"#), Err(Error::Domain(_))));
        assert!(matches!(load_problem(r#"{"l":0,"b":"inf"}"#), Err(Error::Domain(_))));
        assert!(matches!(load_problem(r#"{"l":0,"b":1,"potential":{"family":"tabulated","samples":[[0.5,1],[0.2,1]]}}"#), Err(Error::Domain(_))));
        assert!(matches!(load_problem("{l:0"), Err(Error::Parse(_))));
    }

    #[test]
    fn free_potential_has_zero_weighted_norm() {
        let p = SturmLiouvilleProblem::bessel(0.0, 1.0).unwrap();
        let r = validate_potential(&p, DEFAULT_WEIGHTED_CEILING).unwrap();
        assert_eq!(r.weighted_norm, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn constant_potential_weighted_norm_is_half() {
        let p = SturmLiouvilleProblem::new(0.0, 1.0, PotentialSpec::Polynomial { coefficients: vec![1.0], lowest_power: 0 }, BoundaryCondition::dirichlet()).unwrap();
        let r = validate_potential(&p, DEFAULT_WEIGHTED_CEILING).unwrap();
        assert_relative_eq!(r.weighted_norm, 0.5, epsilon = 1e-8);
        assert!(r.pass);
    }

    #[test]
    fn inverse_square_potential_fails() {
        let p = SturmLiouvilleProblem::new(0.0, 1.0, PotentialSpec::Polynomial { coefficients: vec![1.0], lowest_power: -2 }, BoundaryCondition::dirichlet()).unwrap();
        let r = validate_potential(&p, DEFAULT_WEIGHTED_CEILING).unwrap();
        assert!(r.divergent);
        assert!(!r.pass);
    }

    #[test]
    fn polynomial_with_sign_change_matches_antiderivative() {
        // q = x - 1/2 on (0,1): int x|x - 1/2| = 1/8
        let p = SturmLiouvilleProblem::new(0.0, 1.0, PotentialSpec::Polynomial { coefficients: vec![-0.5, 1.0], lowest_power: 0 }, BoundaryCondition::dirichlet()).unwrap();
        let r = validate_potential(&p, DEFAULT_WEIGHTED_CEILING).unwrap();
        assert_relative_eq!(r.weighted_norm, 0.125, epsilon = 1e-8);
    }

    #[test]
    fn log_weight_for_critical_l() {
        // l = -1/2, q = 1, b = 1: int x (1 - ln x) dx = 1/2 + 1/4
        let p = SturmLiouvilleProblem::new(-0.5, 1.0, PotentialSpec::Polynomial { coefficients: vec![1.0], lowest_power: 0 }, BoundaryCondition::dirichlet()).unwrap();
        let r = validate_potential(&p, DEFAULT_WEIGHTED_CEILING).unwrap();
        assert_relative_eq!(r.weighted_norm, 0.75, epsilon = 1e-8);
    }

    #[test]
    fn pchip_is_monotone_and_interpolates() {
        let samples = vec![(0.1, 0.0), (0.3, 0.1), (0.5, 2.0), (0.9, 2.1)];
        let p = SturmLiouvilleProblem::new(0.0, 1.0, PotentialSpec::Tabulated { samples: samples.clone() }, BoundaryCondition::dirichlet()).unwrap();
        for (x, q) in &samples {
            assert_relative_eq!(p.q(*x), *q, epsilon = 1e-14);
        }
        let mut prev = p.q(0.1);
        for i in 1..=800 {
            let x = 0.1 + 0.8 * i as f64 / 800.0;
            let v = p.q(x);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        let (poly, radius) = p.potential().local_expansion();
        assert_eq!(radius, 0.3);
        assert_relative_eq!(poly.eval(0.2), p.q(0.2), epsilon = 1e-13);
    }

    #[test]
    fn builtins_validate_and_resolve() {
        for (name, p) in builtin_problems() {
            assert!(validate_potential(&p, DEFAULT_WEIGHTED_CEILING).unwrap().pass, "{name}");
            assert_eq!(resolve_problem(&format!("builtin:{name}")).unwrap().to_config().l, p.l);
        }
        assert!(resolve_problem("builtin:nope").is_err());
        assert!(resolve_problem("/nonexistent/problem.json").is_err());
    }
}
