//! Inverse pairs `(F, F*)` with closed-form derivatives.
//!
//! Three families are supported:
//!
//! * `Power { m }`: `F = z^{2m}`, `F* = z^{1/2m}`;
//! * `Exp { a }`: `F = exp(-1/z^a)`, `F* = 1/(-log z)^{1/a}`;
//! * `DoubleExp { a }`: `F = exp(-exp(1/z^a))`, `F* = 1/(log(-log z))^{1/a}`.
//!
//! All fractional powers and logarithms use the principal branch. Every
//! evaluation checks the argument against the validity domain of the pair and
//! reports the offending point instead of silently crossing a branch cut.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

/// Above this value of `|z|^{-a}` the double exponential `exp(-exp(1/z^a))`
/// underflows; the flat zero extension is returned instead.
pub const DOUBLE_EXP_GUARD: f64 = 700.0;

pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PairKind {
    Power { m: u32 },
    Exp { a: f64 },
    DoubleExp { a: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    F,
    FStar,
}

/// Derivative order: value, first or second complex derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Value,
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionPair {
    pub kind: PairKind,
    pub epsilon: f64,
}

/// A value together with the underflow flag raised by the double-exponential guard.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flagged {
    pub value: Complex64,
    pub underflow: bool,
}

fn on_negative_axis(w: Complex64) -> bool {
    w.im == 0.0 && w.re <= 0.0
}

/// Brings an imaginary part into `(-pi, pi]` so that a logarithm computed by
/// summing pieces matches the principal logarithm of the product.
pub(crate) fn principal_log(mut l: Complex64) -> Complex64 {
    if l.im > PI || l.im <= -PI {
        let turns = ((l.im + PI) / (2.0 * PI)).floor();
        l.im -= 2.0 * PI * turns;
        if l.im <= -PI {
            l.im += 2.0 * PI;
        }
    }
    l
}

impl FunctionPair {
    pub fn power(m: u32) -> Result<Self> {
        Self::new(PairKind::Power { m }, DEFAULT_EPSILON)
    }

    pub fn exp(a: f64) -> Result<Self> {
        Self::new(PairKind::Exp { a }, DEFAULT_EPSILON)
    }

    pub fn double_exp(a: f64) -> Result<Self> {
        Self::new(PairKind::DoubleExp { a }, DEFAULT_EPSILON)
    }

    pub fn new(kind: PairKind, epsilon: f64) -> Result<Self> {
        match kind {
            PairKind::Power { m: 0 } => {
                return Err(Error::Parameter("power pair needs m >= 1".into()))
            }
            PairKind::Exp { a } | PairKind::DoubleExp { a } if !(a > 0.0 && a.is_finite()) => {
                return Err(Error::Parameter(format!(
                    "exponent a must be positive, got {a}"
                )))
            }
            PairKind::DoubleExp { a } if a > 2.0 => {
                return Err(Error::Parameter(format!(
                    "double-exponential pairs are restricted to a <= 2, got {a}"
                )))
            }
            _ => {}
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Parameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(FunctionPair { kind, epsilon })
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(self.kind, epsilon)
    }

    /// The exponent governing the flat vanishing order (`2m` for the power pair).
    pub fn exponent(&self) -> f64 {
        match self.kind {
            PairKind::Power { m } => 2.0 * m as f64,
            PairKind::Exp { a } | PairKind::DoubleExp { a } => a,
        }
    }

    pub fn eval(&self, which: Which, order: Order, z: Complex64) -> Result<Complex64> {
        self.eval_flagged(which, order, z).map(|f| f.value)
    }

    pub fn eval_flagged(&self, which: Which, order: Order, z: Complex64) -> Result<Flagged> {
        match which {
            Which::F => self.f(order, z),
            Which::FStar => self.fstar(order, z).map(|value| Flagged {
                value,
                underflow: false,
            }),
        }
    }

    fn f(&self, order: Order, z: Complex64) -> Result<Flagged> {
        let plain = |value| {
            Ok(Flagged {
                value,
                underflow: false,
            })
        };
        match self.kind {
            PairKind::Power { m } => {
                let n = 2 * m as i32;
                match order {
                    Order::Value => plain(z.powi(n)),
                    Order::First => plain(z.powi(n - 1) * n as f64),
                    Order::Second => plain(z.powi(n - 2) * (n * (n - 1)) as f64),
                }
            }
            PairKind::Exp { a } => {
                if !(z.re > 0.0) {
                    return Err(domain("F = exp(-1/z^a) needs Re z > 0", z));
                }
                let q = (-a * z.ln()).exp();
                let f = (-q).exp();
                let g1 = a * q / z;
                match order {
                    Order::Value => plain(f),
                    Order::First => plain(f * g1),
                    Order::Second => plain(f * (g1 * g1 - a * (a + 1.0) * q / (z * z))),
                }
            }
            PairKind::DoubleExp { a } => {
                if !(z.re > 0.0) {
                    return Err(domain("F = exp(-exp(1/z^a)) needs Re z > 0", z));
                }
                if z.norm().powf(-a) > DOUBLE_EXP_GUARD {
                    return Ok(Flagged {
                        value: Complex64::new(0.0, 0.0),
                        underflow: true,
                    });
                }
                let q = (-a * z.ln()).exp();
                let e = q.exp();
                let f = (-e).exp();
                if f == Complex64::new(0.0, 0.0) {
                    return Ok(Flagged {
                        value: f,
                        underflow: true,
                    });
                }
                let e1 = -e * a * q / z;
                let e2 = e * ((a * q / z).powi(2) + a * (a + 1.0) * q / (z * z));
                match order {
                    Order::Value => plain(f),
                    Order::First => plain(-f * e1),
                    Order::Second => plain(f * (e1 * e1 - e2)),
                }
            }
        }
    }

    fn fstar(&self, order: Order, w: Complex64) -> Result<Complex64> {
        if w == Complex64::new(0.0, 0.0) {
            return match order {
                Order::Value => Ok(w),
                _ => Err(domain("derivatives of F* are singular at 0", w)),
            };
        }
        if on_negative_axis(w) {
            return Err(domain("F* branch cut (-inf, 0]", w));
        }
        let log_w = w.ln();
        let value = self.fstar_from_log(log_w)?;
        if order == Order::Value {
            return Ok(value);
        }
        match self.kind {
            PairKind::Power { m } => {
                let inv = 1.0 / (2.0 * m as f64);
                match order {
                    Order::First => Ok(value * inv / w),
                    _ => Ok(value * inv * (inv - 1.0) / (w * w)),
                }
            }
            PairKind::Exp { a } => {
                let l = -log_w;
                let lw = l * w;
                match order {
                    Order::First => Ok(value / (a * lw)),
                    _ => Ok(value / (a * lw * lw) * (1.0 / a + 1.0 - l)),
                }
            }
            PairKind::DoubleExp { a } => {
                let l = -log_w;
                let mm = l.ln();
                let p = 1.0 / (mm * l * w);
                match order {
                    Order::First => Ok(value * p / a),
                    _ => Ok(value * p * p / a * (1.0 / a + 1.0 + mm - mm * l)),
                }
            }
        }
    }

    /// `F*(w)` evaluated from `log w`; this reaches arguments far below the
    /// smallest representable double, which the cusp of a sector needs.
    pub fn fstar_from_log(&self, log_w: Complex64) -> Result<Complex64> {
        if log_w.re == f64::NEG_INFINITY {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let log_w = principal_log(log_w);
        match self.kind {
            PairKind::Power { m } => {
                if log_w.im == PI {
                    return Err(domain("F* branch cut (-inf, 0]", log_w.exp()));
                }
                Ok((log_w / (2.0 * m as f64)).exp())
            }
            PairKind::Exp { a } => {
                let l = -log_w;
                if on_negative_axis(l) || log_w.im == PI {
                    return Err(domain(
                        "F* = (-log w)^(-1/a) needs w off [1, inf) and (-inf, 0]",
                        log_w.exp(),
                    ));
                }
                Ok((-l.ln() / a).exp())
            }
            PairKind::DoubleExp { a } => {
                let l = -log_w;
                if on_negative_axis(l) || log_w.im == PI {
                    return Err(domain(
                        "F* = log(-log w)^(-1/a) needs w off [1, inf) and (-inf, 0]",
                        log_w.exp(),
                    ));
                }
                let mm = l.ln();
                if on_negative_axis(mm) {
                    return Err(domain(
                        "F* = log(-log w)^(-1/a) needs w off [1/e, inf)",
                        log_w.exp(),
                    ));
                }
                Ok((-mm.ln() / a).exp())
            }
        }
    }

    /// `F` restricted to the positive real axis, as used in growth bounds `O(F(|z|))`.
    pub fn f_real(&self, x: f64) -> Result<f64> {
        Ok(self
            .eval(Which::F, Order::Value, Complex64::new(x, 0.0))?
            .re)
    }
}

/// `max |F(F*(z)) - z| / |z|` over the samples.
pub fn check_inverse(pair: &FunctionPair, samples: &[Complex64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &z in samples {
        let back = pair.eval(
            Which::F,
            Order::Value,
            pair.eval(Which::FStar, Order::Value, z)?,
        )?;
        worst = worst.max((back - z).norm() / z.norm());
    }
    Ok(worst)
}

/// `sup |z G''(z)| / |G'(z)|` for `G` in `{F, F*}`; finiteness is the check.
pub fn check_derivative_ratio(
    pair: &FunctionPair,
    which: Which,
    samples: &[Complex64],
) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for &z in samples {
        let d1 = pair.eval(which, Order::First, z)?;
        let d2 = pair.eval(which, Order::Second, z)?;
        sup = sup.max((d2 * z).norm() / d1.norm());
    }
    Ok(sup)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    Re,
    Im,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum IncrementViolation {
    SignChange {
        theta: f64,
        component: Component,
    },
    NotDecreasing {
        theta: f64,
        component: Component,
        sigma: f64,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IncrementReport {
    pub thetas_checked: usize,
    pub violations: Vec<IncrementViolation>,
}

impl IncrementReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `1 - e^{i theta}` without cancellation for small `theta`.
pub fn one_minus_unit(theta: f64) -> Complex64 {
    let s = (0.5 * theta).sin();
    Complex64::new(2.0 * s * s, -theta.sin())
}

/// `d/d sigma F*(eps (sigma w)^alpha)` for `w = 1 - e^{i theta}`, by the chain rule.
pub fn sigma_derivative(
    pair: &FunctionPair,
    alpha: f64,
    theta: f64,
    sigma: f64,
) -> Result<Complex64> {
    let w = one_minus_unit(theta);
    let log_sw = Complex64::new(sigma.ln(), 0.0) + w.ln();
    let arg = pair.epsilon * (alpha * log_sw).exp();
    let d = pair.eval(Which::FStar, Order::First, arg)?;
    Ok(d * pair.epsilon * alpha * ((alpha - 1.0) * log_sw).exp() * w)
}

/// For each `theta`, checks that `sigma -> d_sigma Re F*_alpha(sigma(1 - e^{i theta}))`
/// and the imaginary counterpart keep one sign and decrease in absolute value.
pub fn check_increment_condition(
    pair: &FunctionPair,
    alpha: f64,
    thetas: &[f64],
    sigmas: &[f64],
) -> Result<IncrementReport> {
    if !(alpha > 0.0) {
        return Err(Error::Parameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let mut sigmas = sigmas.to_vec();
    sigmas.sort_by(f64::total_cmp);
    let mut report = IncrementReport::default();
    for &theta in thetas {
        if theta == 0.0 {
            return Err(Error::Parameter("theta = 0 is the vertex".into()));
        }
        let ds = sigmas
            .iter()
            .map(|&s| sigma_derivative(pair, alpha, theta, s))
            .collect::<Result<Vec<_>>>()?;
        for component in [Component::Re, Component::Im] {
            let vals: Vec<f64> = ds
                .iter()
                .map(|d| {
                    if component == Component::Re {
                        d.re
                    } else {
                        d.im
                    }
                })
                .collect();
            let pos = vals.iter().any(|&v| v > 0.0);
            let neg = vals.iter().any(|&v| v < 0.0);
            if pos && neg {
                report
                    .violations
                    .push(IncrementViolation::SignChange { theta, component });
            }
            for (i, pair_vals) in vals.windows(2).enumerate() {
                let (prev, next) = (pair_vals[0].abs(), pair_vals[1].abs());
                if next > prev * (1.0 + 1e-12) {
                    report.violations.push(IncrementViolation::NotDecreasing {
                        theta,
                        component,
                        sigma: sigmas[i + 1],
                    });
                }
            }
        }
        report.thetas_checked += 1;
    }
    Ok(report)
}

/// Default grids: `theta` in `+-[0.05, 1.5]` (40 points), `sigma` in `(0, 1]` (20 points).
pub fn default_increment_grids() -> (Vec<f64>, Vec<f64>) {
    let half: Vec<f64> = (0..20)
        .map(|i| 0.05 + (1.5 - 0.05) * i as f64 / 19.0)
        .collect();
    let thetas = half
        .iter()
        .map(|t| -t)
        .chain(half.iter().copied())
        .collect();
    let sigmas = (1..=20).map(|i| i as f64 / 20.0).collect();
    (thetas, sigmas)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub f_increasing: bool,
    pub fstar_increasing: bool,
    pub fstar_derivative_decreasing: bool,
}

/// Monotonicity of `F`, `F*` and `d/dx F*` on increasing real samples.
pub fn check_monotonicity(pair: &FunctionPair, xs: &[f64]) -> Result<MonotonicityReport> {
    let mut xs = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    let mut f = Vec::with_capacity(xs.len());
    let mut g = Vec::with_capacity(xs.len());
    let mut dg = Vec::with_capacity(xs.len());
    for &x in &xs {
        let z = Complex64::new(x, 0.0);
        f.push(pair.eval(Which::F, Order::Value, z)?.re);
        g.push(pair.eval(Which::FStar, Order::Value, z)?.re);
        dg.push(pair.eval(Which::FStar, Order::First, z)?.re);
    }
    let strictly = |v: &[f64], up: bool| {
        v.windows(2)
            .all(|p| if up { p[1] > p[0] } else { p[1] < p[0] })
    };
    // F underflows to an exact zero near the origin; flat zeros are not a violation.
    let f_increasing = f
        .windows(2)
        .all(|p| p[1] > p[0] || (p[0] == 0.0 && p[1] == 0.0));
    Ok(MonotonicityReport {
        f_increasing,
        fstar_increasing: strictly(&g, true),
        fstar_derivative_decreasing: strictly(&dg, false),
    })
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
