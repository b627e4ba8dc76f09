//! Defining functions `h(z, r)` of rigid hypersurfaces `s = h(z, r)` in the
//! `n = 2` slice, with exact first and mixed second derivatives.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::funcpair::{FunctionPair, Order, PairKind, Which};
use crate::sector::SectorSpec;

/// Quintic smoothstep cut-off: `1` on `[-1, 1]`, `0` outside `(-2, 2)`, `C^2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutoffProfile;

impl CutoffProfile {
    pub const MAX_FIRST: f64 = 1.875;
    pub const MAX_SECOND: f64 = 5.773_502_691_896_258;

    /// `(chi, chi', chi'')` at `s`.
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        let r = s.abs();
        if r <= 1.0 {
            return (1.0, 0.0, 0.0);
        }
        if r >= 2.0 {
            return (0.0, 0.0, 0.0);
        }
        let t = r - 1.0;
        let v = 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
        let d1 = -30.0 * t * t * (1.0 - t) * (1.0 - t) * s.signum();
        let d2 = -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
        (v, d1, d2)
    }

    pub fn value(&self, s: f64) -> f64 {
        self.eval(s).0
    }
}

/// Value, `d/dz` and `d^2/dz dzbar` of a real function of `z`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub dz: Complex64,
    pub dzdzbar: f64,
}

impl Jet {
    fn zero() -> Self {
        Jet::default()
    }

    pub fn laplacian(&self) -> f64 {
        4.0 * self.dzdzbar
    }

    /// Euclidean gradient `(h_x, h_y)`.
    pub fn gradient(&self) -> (f64, f64) {
        (2.0 * self.dz.re, -2.0 * self.dz.im)
    }
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            value: self.value + o.value,
            dz: self.dz + o.dz,
            dzdzbar: self.dzdzbar + o.dzdzbar,
        }
    }
}

impl std::ops::Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, k: f64) -> Jet {
        Jet {
            value: self.value * k,
            dz: self.dz * k,
            dzdzbar: self.dzdzbar * k,
        }
    }
}

/// Holomorphic `g` for the `Re g` models.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "g", rename_all = "kebab-case")]
pub enum HoloFn {
    PairF { pair: FunctionPair },
    PairFSquared { pair: FunctionPair },
    Monomial { coef: f64, power: u32 },
}

impl HoloFn {
    /// `(g, g')` at `z`; the flat pairs are extended by `0` at the origin.
    pub fn eval(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let zero = Complex64::new(0.0, 0.0);
        match *self {
            HoloFn::PairF { pair } | HoloFn::PairFSquared { pair } => {
                let (f, df) = if z == zero {
                    (zero, zero)
                } else {
                    (
                        pair.eval(Which::F, Order::Value, z)?,
                        pair.eval(Which::F, Order::First, z)?,
                    )
                };
                if matches!(self, HoloFn::PairF { .. }) {
                    Ok((f, df))
                } else {
                    Ok((f * f, 2.0 * f * df))
                }
            }
            HoloFn::Monomial { coef, power } => {
                let d = if power == 0 {
                    zero
                } else {
                    coef * power as f64 * z.powu(power - 1)
                };
                Ok((coef * z.powu(power), d))
            }
        }
    }
}

/// Pull-back under `F` of an angular cut-off: `1` where `|arg F| <= alpha pi/2`,
/// `0` where `|arg F| >= alpha1 pi/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeCutoff {
    pub pair: FunctionPair,
    pub alpha: f64,
    pub alpha1: f64,
}

impl ConeCutoff {
    pub fn new(pair: FunctionPair, alpha: f64, alpha1: f64) -> Result<Self> {
        if !(0.0 < alpha && alpha < alpha1 && alpha1 < 1.0) {
            return Err(Error::Parameter(format!(
                "conical cut-off needs 0 < alpha < alpha1 < 1, got alpha={alpha}, alpha1={alpha1}"
            )));
        }
        Ok(ConeCutoff {
            pair,
            alpha,
            alpha1,
        })
    }

    /// Jet of the cut-off itself. Outside the domain of `F` the cut-off is `0`.
    pub fn jet(&self, z: Complex64) -> Result<Jet> {
        if z.re <= 0.0 {
            return Ok(Jet::zero());
        }
        let f = self.pair.eval(Which::F, Order::Value, z)?;
        if f == Complex64::new(0.0, 0.0) {
            return Ok(Jet::zero());
        }
        let df = self.pair.eval(Which::F, Order::First, z)?;
        let width = (self.alpha1 - self.alpha) * PI / 2.0;
        let arg = f.arg();
        let t = (arg.abs() - self.alpha * PI / 2.0) / width;
        if t <= 0.0 {
            return Ok(Jet {
                value: 1.0,
                ..Jet::zero()
            });
        }
        let (v, d1, d2) = CutoffProfile.eval(1.0 + t);
        // arg F is harmonic with d_z arg F = F'/(2iF).
        let dt = arg.signum() * df / (f * Complex64::new(0.0, 2.0)) / width;
        Ok(Jet {
            value: v,
            dz: d1 * dt,
            dzdzbar: d2 * dt.norm_sqr(),
        })
    }

    /// Jet of `chi * Re F`.
    pub fn bump_jet(&self, z: Complex64) -> Result<Jet> {
        let chi = self.jet(z)?;
        if chi.value == 0.0 && chi.dz == Complex64::new(0.0, 0.0) {
            return Ok(Jet::zero());
        }
        let f = self.pair.eval(Which::F, Order::Value, z)?;
        let df = self.pair.eval(Which::F, Order::First, z)?;
        Ok(harmonic_product(chi, f.re, df))
    }
}

/// Jet of `chi * Re G` for holomorphic `G` with derivative `dg`.
fn harmonic_product(chi: Jet, re_g: f64, dg: Complex64) -> Jet {
    Jet {
        value: chi.value * re_g,
        dz: chi.dz * re_g + chi.value * dg / 2.0,
        dzdzbar: chi.dzdzbar * re_g + (chi.dz * dg.conj()).re,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HypersurfaceModel {
    Zero,
    /// `|z|^{2m} + c |z|^{2m-2p} x^{2p}`.
    FiniteType {
        m: u32,
        p: u32,
        c: f64,
    },
    /// `e^{-1/|y|^a} - chi(y / (alpha_cut x^{a+1})) Re e^{-1/z^b}`.
    InfSingleExp {
        a: f64,
        b: f64,
        alpha_cut: f64,
    },
    /// `e^{-e^{1/|y|^a}} - chi(y / (c_{alpha,x} x^{a+1} e^{-1/x^a} e^{-e^{1/x^a}})) Re e^{-e^{1/z^b}}`.
    InfDoubleExp {
        a: f64,
        b: f64,
        alpha_cut: f64,
    },
    /// `e^{-1/|y|^a} - chi(y / x^{b+1}) Re e^{-1/z^b}`.
    TubeFailure {
        a: f64,
        b: f64,
    },
    /// `Re g(z) + r_coupling * r |z|^2`.
    RePart {
        g: HoloFn,
        r_coupling: f64,
    },
    /// `base - eta * chi_cone * Re F`.
    Bumped {
        base: Box<HypersurfaceModel>,
        cone: ConeCutoff,
        eta: f64,
    },
}

/// Derivative order for [`HypersurfaceModel::eval_h`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HOrder {
    Value,
    Dz,
    Dzbar,
    DzDzbar,
}

fn check_calibration(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a < b && b < a * (a + 1.0)) {
        return Err(Error::Parameter(format!(
            "exponents must satisfy a<b<a(a+1), got a={a}, b={b}"
        )));
    }
    Ok(())
}

impl HypersurfaceModel {
    pub fn finite_type(m: u32, p: u32, c: f64) -> Result<Self> {
        let model = HypersurfaceModel::FiniteType { m, p, c };
        model.validate()?;
        Ok(model)
    }

    pub fn inf_single_exp(a: f64, b: f64, alpha_cut: f64) -> Result<Self> {
        let model = HypersurfaceModel::InfSingleExp { a, b, alpha_cut };
        model.validate()?;
        Ok(model)
    }

    pub fn inf_double_exp(a: f64, b: f64, alpha_cut: f64) -> Result<Self> {
        let model = HypersurfaceModel::InfDoubleExp { a, b, alpha_cut };
        model.validate()?;
        Ok(model)
    }

    pub fn tube_failure(a: f64, b: f64) -> Result<Self> {
        let model = HypersurfaceModel::TubeFailure { a, b };
        model.validate()?;
        Ok(model)
    }

    pub fn re_part(g: HoloFn) -> Self {
        HypersurfaceModel::RePart { g, r_coupling: 0.0 }
    }

    /// `h - eta chi_cone Re F`; `eta = 0` returns the model unchanged.
    pub fn bumped(self, cone: ConeCutoff, eta: f64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::Parameter(format!(
                "bump amplitude eta must be >= 0, got {eta}"
            )));
        }
        if eta == 0.0 {
            return Ok(self);
        }
        Ok(HypersurfaceModel::Bumped {
            base: Box::new(self),
            cone,
            eta,
        })
    }

    /// Parameter guards; deserialized models go through this as well.
    pub fn validate(&self) -> Result<()> {
        match self {
            HypersurfaceModel::Zero | HypersurfaceModel::RePart { .. } => Ok(()),
            HypersurfaceModel::FiniteType { m, p, c } => {
                if !(1 <= *p && p <= m) || !c.is_finite() {
                    return Err(Error::Parameter(format!(
                        "finite type model needs 1 <= p <= m, got m={m}, p={p}"
                    )));
                }
                Ok(())
            }
            HypersurfaceModel::InfSingleExp { a, b, alpha_cut } => {
                check_calibration(*a, *b)?;
                if !(*alpha_cut > 0.0) {
                    return Err(Error::Parameter("alpha_cut must be positive".into()));
                }
                Ok(())
            }
            HypersurfaceModel::InfDoubleExp { a, b, alpha_cut } => {
                check_calibration(*a, *b)?;
                if !(*alpha_cut > 0.0) {
                    return Err(Error::Parameter("alpha_cut must be positive".into()));
                }
                FunctionPair::double_exp(*b).map(|_| ())
            }
            HypersurfaceModel::TubeFailure { a, b } => {
                if !(*a > 0.0 && *b > 0.0 && (b + 1.0) * a < *b) {
                    return Err(Error::Parameter(format!(
                        "exponents must satisfy (b+1)a<b, got a={a}, b={b}"
                    )));
                }
                Ok(())
            }
            HypersurfaceModel::Bumped { base, cone, eta } => {
                ConeCutoff::new(cone.pair, cone.alpha, cone.alpha1)?;
                if !(*eta >= 0.0) {
                    return Err(Error::Parameter("bump amplitude eta must be >= 0".into()));
                }
                base.validate()
            }
        }
    }

    /// True when `h` does not depend on `r`.
    pub fn is_rigid(&self) -> bool {
        match self {
            HypersurfaceModel::RePart { r_coupling, .. } => *r_coupling == 0.0,
            HypersurfaceModel::Bumped { base, .. } => base.is_rigid(),
            _ => true,
        }
    }

    pub fn jet(&self, z: Complex64, r: f64) -> Result<Jet> {
        match self {
            HypersurfaceModel::Zero => Ok(Jet::zero()),
            HypersurfaceModel::FiniteType { m, p, c } => Ok(finite_type_jet(*m, *p, *c, z)),
            HypersurfaceModel::InfSingleExp { a, b, alpha_cut } => {
                let g = FunctionPair::exp(*b)?;
                let cut = cut_product(z, &g, |x| {
                    let ln_d = alpha_cut.ln() + (a + 1.0) * x.ln();
                    Ok((ln_d, (a + 1.0) / x, -(a + 1.0) / (x * x)))
                })?;
                Ok(flat_single(*a, z.im) + cut * -1.0)
            }
            HypersurfaceModel::TubeFailure { a, b } => {
                let g = FunctionPair::exp(*b)?;
                let cut = cut_product(z, &g, |x| {
                    Ok(((b + 1.0) * x.ln(), (b + 1.0) / x, -(b + 1.0) / (x * x)))
                })?;
                Ok(flat_single(*a, z.im) + cut * -1.0)
            }
            HypersurfaceModel::InfDoubleExp { a, b, alpha_cut } => {
                let g = FunctionPair::double_exp(*b)?;
                let cut = cut_product(z, &g, |x| double_exp_log_profile(*a, *alpha_cut, x, z))?;
                Ok(flat_double(*a, z.im) + cut * -1.0)
            }
            HypersurfaceModel::RePart { g, r_coupling } => {
                let (v, d) = g.eval(z)?;
                let k = r_coupling * r;
                Ok(Jet {
                    value: v.re + k * z.norm_sqr(),
                    dz: d / 2.0 + k * z.conj(),
                    dzdzbar: k,
                })
            }
            HypersurfaceModel::Bumped { base, cone, eta } => {
                Ok(base.jet(z, r)? + cone.bump_jet(z)? * -eta)
            }
        }
    }

    pub fn value(&self, z: Complex64, r: f64) -> Result<f64> {
        Ok(self.jet(z, r)?.value)
    }

    pub fn eval_h(&self, z: Complex64, r: f64, order: HOrder) -> Result<Complex64> {
        let j = self.jet(z, r)?;
        Ok(match order {
            HOrder::Value => Complex64::new(j.value, 0.0),
            HOrder::Dz => j.dz,
            HOrder::Dzbar => j.dz.conj(),
            HOrder::DzDzbar => Complex64::new(j.dzdzbar, 0.0),
        })
    }

    /// Real Hessian in `(x, y)` from central differences of the exact gradient.
    pub fn hessian(&self, z: Complex64, r: f64, step: f64) -> Result<[[f64; 2]; 2]> {
        let g = |w: Complex64| self.jet(w, r).map(|j| j.gradient());
        let (xp, xm) = (g(z + step)?, g(z - step)?);
        let (yp, ym) = (
            g(z + Complex64::new(0.0, step))?,
            g(z - Complex64::new(0.0, step))?,
        );
        let hxx = (xp.0 - xm.0) / (2.0 * step);
        let hyy = (yp.1 - ym.1) / (2.0 * step);
        let hxy = 0.25 * (xp.1 - xm.1 + yp.0 - ym.0) / step;
        Ok([[hxx, hxy], [hxy, hyy]])
    }
}

fn finite_type_jet(m: u32, p: u32, c: f64, z: Complex64) -> Jet {
    let rr = z.norm_sqr();
    let x = z.re;
    // |z|^{2k} = R^k with d_z R^k = k R^{k-1} zbar and d dbar R^k = k^2 R^{k-1}.
    let pow_r = |k: u32| if k == 0 { 1.0 } else { rr.powi(k as i32) };
    let pow_r1 = |k: u32| if k == 0 { 0.0 } else { rr.powi(k as i32 - 1) };
    let lead = Jet {
        value: pow_r(m),
        dz: m as f64 * pow_r1(m) * z.conj(),
        dzdzbar: (m * m) as f64 * pow_r1(m),
    };
    let q = m - p;
    let xp = x.powi(2 * p as i32);
    let dx = p as f64 * x.powi(2 * p as i32 - 1);
    let ddx = if p == 0 {
        0.0
    } else {
        (2 * p * (2 * p - 1)) as f64 / 4.0 * x.powi(2 * p as i32 - 2)
    };
    let dr = q as f64 * pow_r1(q) * z.conj();
    let mixed = Jet {
        value: pow_r(q) * xp,
        dz: dr * xp + pow_r(q) * dx,
        dzdzbar: (q * q) as f64 * pow_r1(q) * xp + 2.0 * (dr * dx).re + pow_r(q) * ddx,
    };
    lead + mixed * c
}

/// `e^{-1/|y|^a}` extended by `0` at `y = 0`.
fn flat_single(a: f64, y: f64) -> Jet {
    let ay = y.abs();
    if ay == 0.0 || ay.powf(-a) > 700.0 {
        return Jet::zero();
    }
    let u = ay.powf(-a);
    let f = (-u).exp();
    let d1 = f * a * u / ay * y.signum();
    let d2 = f * (a * a * u * u / (ay * ay) - a * (a + 1.0) * u / (ay * ay));
    Jet {
        value: f,
        dz: Complex64::new(0.0, -0.5 * d1),
        dzdzbar: d2 / 4.0,
    }
}

/// `e^{-e^{1/|y|^a}}` extended by `0` at `y = 0`.
fn flat_double(a: f64, y: f64) -> Jet {
    let ay = y.abs();
    if ay == 0.0 || ay.powf(-a) > 700.0 {
        return Jet::zero();
    }
    let u = ay.powf(-a);
    let eu = u.exp();
    let f = (-eu).exp();
    let du = -a * u / ay * y.signum();
    let ddu = a * (a + 1.0) * u / (ay * ay);
    let d1 = -f * eu * du;
    let d2 = f * ((eu * du).powi(2) - eu * (du * du + ddu));
    Jet {
        value: f,
        dz: Complex64::new(0.0, -0.5 * d1),
        dzdzbar: d2 / 4.0,
    }
}

/// `(ln D, (ln D)', (ln D)'')` for `D = c_{alpha,x} x^{a+1} e^{-1/x^a} e^{-e^{1/x^a}}`.
fn double_exp_log_profile(a: f64, alpha: f64, x: f64, z: Complex64) -> Result<(f64, f64, f64)> {
    if x >= (-1.0f64).exp() {
        return Err(domain(
            "double-exponential cut-off profile needs 0 < x < 1/e",
            z,
        ));
    }
    let k = alpha.ln();
    let lx = x.ln();
    let g = (-lx).ln();
    let g1 = 1.0 / (x * lx);
    let g2 = -(lx + 1.0) / (x * lx).powi(2);
    let c = 1.0 + k / g;
    if c <= 0.0 {
        return Err(domain(
            "double-exponential cut-off profile needs c_{alpha,x} > 0",
            z,
        ));
    }
    let c1 = -k * g1 / (g * g);
    let c2 = -k * (g2 / (g * g) - 2.0 * g1 * g1 / (g * g * g));
    let u = x.powf(-a);
    let u1 = -a * u / x;
    let u2 = a * (a + 1.0) * u / (x * x);
    let eu = u.exp();
    let ln_d = c.ln() + (a + 1.0) * lx - u - eu;
    let l1 = c1 / c + (a + 1.0) / x - u1 - u1 * eu;
    let l2 = c2 / c - (c1 / c).powi(2) - (a + 1.0) / (x * x) - u2 - (u2 + u1 * u1) * eu;
    Ok((ln_d, l1, l2))
}

/// Jet of `chi(y / D(x)) Re G(z)`, zero for `x <= 0`.
fn cut_product(
    z: Complex64,
    g: &FunctionPair,
    log_profile: impl Fn(f64) -> Result<(f64, f64, f64)>,
) -> Result<Jet> {
    let (x, y) = (z.re, z.im);
    if x <= 0.0 {
        return Ok(Jet::zero());
    }
    let (ln_d, l1, l2) = log_profile(x)?;
    let ln_s = if y == 0.0 {
        f64::NEG_INFINITY
    } else {
        y.abs().ln() - ln_d
    };
    if ln_s >= 2f64.ln() {
        return Ok(Jet::zero());
    }
    let gv = g.eval(Which::F, Order::Value, z)?;
    let dg = g.eval(Which::F, Order::First, z)?;
    let chi = if ln_s <= 0.0 {
        Jet {
            value: 1.0,
            ..Jet::zero()
        }
    } else {
        let s = y.signum() * ln_s.exp();
        let (v, d1, d2) = CutoffProfile.eval(s);
        let (sx, sy, sxx) = (-s * l1, s / y, s * (l1 * l1 - l2));
        let ds = Complex64::new(sx, -sy) / 2.0;
        Jet {
            value: v,
            dz: d1 * ds,
            dzdzbar: d2 * ds.norm_sqr() + d1 * sxx / 4.0,
        }
    };
    Ok(harmonic_product(chi, gv.re, dg))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GrowthRatio {
    pub sup: f64,
    /// Ratio at the smallest sampled angle; a sup attained there signals growth toward the vertex.
    pub at_smallest_theta: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    /// `|h(z, r)| / F(|z|)`.
    pub value_vs_f: GrowthRatio,
    /// `|h(z, r)| / |theta|^alpha`.
    pub value_vs_theta: GrowthRatio,
    /// `|grad h| / |F'(z)|`.
    pub first_vs_f: GrowthRatio,
    /// `|Hess h| / |F''(z)|`.
    pub second_vs_f: GrowthRatio,
    pub samples: usize,
}

impl GrowthReport {
    /// Sup attained at the smallest angle and exceeding `factor` times the value elsewhere.
    pub fn diverging(ratio: &GrowthRatio) -> bool {
        ratio.sup > 0.0 && ratio.at_smallest_theta >= ratio.sup
    }
}

fn update(r: &mut GrowthRatio, v: f64, smallest: bool) {
    let v = if v.is_finite() { v } else { f64::INFINITY };
    r.sup = r.sup.max(v);
    if smallest {
        r.at_smallest_theta = r.at_smallest_theta.max(v);
    }
}

/// Growth bounds of `h` on the sector boundary relative to `F`, uniformly over `r`.
pub fn check_growth_hypotheses(
    model: &HypersurfaceModel,
    pair: &FunctionPair,
    alpha: f64,
    thetas: &[f64],
    r_grid: &[f64],
) -> Result<GrowthReport> {
    let spec = SectorSpec::new(*pair, alpha)?;
    let mut rep = GrowthReport::default();
    let t_min = thetas.iter().map(|t| t.abs()).fold(f64::INFINITY, f64::min);
    for &t in thetas {
        if t == 0.0 {
            continue;
        }
        let z = spec.boundary_point(t)?;
        let smallest = t.abs() == t_min;
        let fz = pair.f_real(z.norm())?;
        let d1 = pair.eval(Which::F, Order::First, z)?.norm();
        let d2 = pair.eval(Which::F, Order::Second, z)?.norm();
        for &r in r_grid {
            let j = model.jet(z, r)?;
            let h = j.value.abs();
            let grad = j.gradient();
            let hess = model.hessian(z, r, 1e-4 * z.norm())?;
            let hn = (hess[0][0].powi(2) + 2.0 * hess[0][1].powi(2) + hess[1][1].powi(2)).sqrt();
            let ratio = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num / den };
            update(&mut rep.value_vs_f, ratio(h, fz), smallest);
            update(
                &mut rep.value_vs_theta,
                ratio(h, t.abs().powf(alpha)),
                smallest,
            );
            update(
                &mut rep.first_vs_f,
                ratio(grad.0.hypot(grad.1), d1),
                smallest,
            );
            update(&mut rep.second_vs_f, ratio(hn, d2), smallest);
            rep.samples += 1;
        }
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorSample {
    pub theta: f64,
    /// Radius of `tau = t e^{i theta}`; `1` on the boundary.
    pub t: f64,
    pub r: f64,
    pub z: Complex64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorPropertyReport {
    pub max_h: f64,
    pub argmax: Option<SectorSample>,
    pub strict_at: Vec<SectorSample>,
    pub samples: usize,
}

impl SectorPropertyReport {
    pub fn holds(&self) -> bool {
        self.max_h <= 0.0
    }
}

pub const INTERIOR_RADII: [f64; 5] = [0.25, 0.5, 0.75, 0.9, 0.99];

/// `max h` over the sector boundary `tau = e^{i theta}` and interior rays `tau = t e^{i theta}`.
pub fn sector_property(
    model: &HypersurfaceModel,
    spec: &SectorSpec,
    thetas: &[f64],
    r_grid: &[f64],
) -> Result<SectorPropertyReport> {
    if spec.nu.is_some() {
        return Err(Error::Parameter(
            "sector property is checked on unsmoothed sectors".into(),
        ));
    }
    let mut rep = SectorPropertyReport {
        max_h: f64::NEG_INFINITY,
        argmax: None,
        strict_at: Vec::new(),
        samples: 0,
    };
    for &theta in thetas {
        for t in std::iter::once(1.0).chain(INTERIOR_RADII) {
            let z = if t == 1.0 {
                spec.boundary_point(theta)?
            } else {
                spec.sector_map(Complex64::from_polar(t, theta))?
            };
            for &r in r_grid {
                let h = model.value(z, r)?;
                let s = SectorSample { theta, t, r, z, h };
                if h > rep.max_h {
                    rep.max_h = h;
                    rep.argmax = Some(s);
                }
                if h < 0.0 {
                    rep.strict_at.push(s);
                }
                rep.samples += 1;
            }
        }
    }
    Ok(rep)
}

/// Angles `+-theta` for `theta` log-spaced in `[lo, hi]`.
pub fn symmetric_thetas(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let pos = crate::funcpair::log_spaced(lo, hi, n);
    pos.iter().map(|t| -t).chain(pos.iter().copied()).collect()
}

/// Exponent of the pair used for calibration, as a convenience for reports.
pub fn pair_exponent(pair: &FunctionPair) -> f64 {
    match pair.kind {
        PairKind::Power { m } => 2.0 * m as f64,
        PairKind::Exp { a } | PairKind::DoubleExp { a } => a,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Central differences of value (for d_z) and of the exact gradient (for the Laplacian).
    fn fd_check(model: &HypersurfaceModel, z: Complex64, step: f64, tol: f64) {
        let j = model.jet(z, 0.0).unwrap();
        let v = |w: Complex64| model.value(w, 0.0).unwrap();
        let hx = (v(z + step) - v(z - step)) / (2.0 * step);
        let hy = (v(z + c(0.0, step)) - v(z - c(0.0, step))) / (2.0 * step);
        let fd_dz = c(hx, -hy) / 2.0;
        let scale = j.dz.norm().max(1e-300);
        assert!(
            (fd_dz - j.dz).norm() <= tol * scale,
            "{model:?} at {z}: dz {} vs fd {}",
            j.dz,
            fd_dz
        );
        let hs = model.hessian(z, 0.0, step).unwrap();
        let lap = hs[0][0] + hs[1][1];
        let scale = j
            .laplacian()
            .abs()
            .max(hs[0][0].abs())
            .max(hs[1][1].abs())
            .max(1e-300);
        assert!(
            (lap - j.laplacian()).abs() <= tol * scale,
            "{model:?} at {z}: lap {} vs fd {lap}",
            j.laplacian()
        );
    }

    #[test]
    fn profile_bounds() {
        let p = CutoffProfile;
        let (mut m1, mut m2) = (0.0f64, 0.0f64);
        for i in 0..=40000 {
            let s = -2.5 + 5.0 * i as f64 / 40000.0;
            let (v, d1, d2) = p.eval(s);
            assert!((0.0..=1.0).contains(&v));
            m1 = m1.max(d1.abs());
            m2 = m2.max(d2.abs());
            let h = 1e-6;
            if (s.abs() - 1.0).abs() > 1e-3 && (s.abs() - 2.0).abs() > 1e-3 {
                assert!(((p.value(s + h) - p.value(s - h)) / (2.0 * h) - d1).abs() < 1e-6);
            }
        }
        assert!(m1 <= CutoffProfile::MAX_FIRST + 1e-12 && m1 > 1.87);
        assert!(m2 <= CutoffProfile::MAX_SECOND + 1e-9 && m2 > 5.7);
        assert_eq!(p.value(1.0), 1.0);
        assert_eq!(p.value(-2.0), 0.0);
    }

    #[test]
    fn catalogue_examples() {
        assert_eq!(
            HypersurfaceModel::Zero.value(c(0.3, 0.2), 1.0).unwrap(),
            0.0
        );
        let ft = HypersurfaceModel::finite_type(2, 1, 0.0).unwrap();
        assert!((ft.value(c(0.1, 0.0), 0.0).unwrap() - 1e-4).abs() < 1e-18);
        let ise = HypersurfaceModel::inf_single_exp(1.0, 1.5, 1.5).unwrap();
        let h = ise.value(c(0.1, 0.0), 0.0).unwrap();
        let expect = -(-(0.1f64.powf(-1.5))).exp();
        assert!((h / expect - 1.0).abs() < 1e-12, "{h} vs {expect}");
        assert!(((-expect).ln() + 31.6228).abs() < 1e-3);
    }

    #[test]
    fn constructor_guards() {
        let e = HypersurfaceModel::inf_single_exp(1.0, 2.5, 1.5).unwrap_err();
        assert!(e.to_string().contains("a<b<a(a+1)"));
        assert!(HypersurfaceModel::inf_single_exp(1.0, 2.0, 1.5).is_err());
        assert!(HypersurfaceModel::inf_single_exp(1.0, 1.0, 1.5).is_err());
        let e = HypersurfaceModel::tube_failure(0.5, 0.8).unwrap_err();
        assert!(e.to_string().contains("(b+1)a<b"));
        assert!(HypersurfaceModel::tube_failure(0.4, 0.8).is_ok());
        assert!(HypersurfaceModel::finite_type(1, 2, 0.0).is_err());
    }

    #[test]
    fn vanishing_at_origin() {
        let models = [
            HypersurfaceModel::finite_type(2, 1, -1.0).unwrap(),
            HypersurfaceModel::inf_single_exp(1.0, 1.5, 1.5).unwrap(),
            HypersurfaceModel::inf_double_exp(0.5, 0.6, 1.2).unwrap(),
            HypersurfaceModel::tube_failure(0.4, 0.8).unwrap(),
            HypersurfaceModel::re_part(HoloFn::PairF {
                pair: FunctionPair::exp(1.0).unwrap(),
            }),
        ];
        for m in &models {
            let j = m.jet(c(0.0, 0.0), 0.0).unwrap();
            assert_eq!(j.value, 0.0);
            assert!(j.dz.norm() < 1e-10);
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let pts = [c(0.3, 0.2), c(0.5, -0.4), c(0.12, 0.07)];
        for (m, p, cc) in [(2, 1, -1.3), (3, 2, 0.7), (1, 1, 2.0)] {
            let model = HypersurfaceModel::finite_type(m, p, cc).unwrap();
            for z in pts {
                fd_check(&model, z, 1e-5, 1e-5);
            }
        }
        let re = HypersurfaceModel::RePart {
            g: HoloFn::PairFSquared {
                pair: FunctionPair::power(2).unwrap(),
            },
            r_coupling: 0.0,
        };
        fd_check(&re, c(0.3, 0.2), 1e-5, 1e-5);
        // Points in the cut-off transition layer exercise the product rule.
        let tube = HypersurfaceModel::tube_failure(0.4, 0.8).unwrap();
        for z in [
            c(0.2, 0.2f64.powf(1.8) * 1.5),
            c(0.2, -0.2f64.powf(1.8) * 1.3),
            c(0.3, 0.1),
            c(0.3, 0.3f64.powf(1.8) * 0.5),
        ] {
            fd_check(&tube, z, 1e-7, 1e-5);
        }
        let ise = HypersurfaceModel::inf_single_exp(1.0, 1.5, 1.5).unwrap();
        for z in [
            c(0.3, 1.5 * 0.09 * 1.4),
            c(0.3, -1.5 * 0.09 * 1.7),
            c(0.4, 0.05),
        ] {
            fd_check(&ise, z, 1e-7, 1e-5);
        }
        let ide = HypersurfaceModel::inf_double_exp(0.5, 0.6, 1.2).unwrap();
        let x: f64 = 0.3;
        let d = double_exp_log_profile(0.5, 1.2, x, c(x, 0.0))
            .unwrap()
            .0
            .exp();
        for z in [c(x, 1.5 * d), c(x, 0.2)] {
            fd_check(&ide, z, 1e-3 * d, 1e-4);
        }
    }

    #[test]
    fn double_exp_profile_derivatives() {
        for x in [0.05, 0.1, 0.3] {
            let f = |x: f64| double_exp_log_profile(0.5, 1.3, x, c(x, 0.0)).unwrap();
            let h = 1e-6 * x;
            let (_, l1, l2) = f(x);
            let fd1 = (f(x + h).0 - f(x - h).0) / (2.0 * h);
            let fd2 = (f(x + h).1 - f(x - h).1) / (2.0 * h);
            assert!((fd1 / l1 - 1.0).abs() < 1e-6);
            assert!((fd2 / l2 - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn flat_extension_across_axis() {
        let tube = HypersurfaceModel::tube_failure(0.4, 0.8).unwrap();
        let z = c(0.1, 0.0);
        let g = FunctionPair::exp(0.8)
            .unwrap()
            .eval(Which::F, Order::Value, z)
            .unwrap()
            .re;
        assert_eq!(tube.value(z, 0.0).unwrap(), -g);
        let j = tube.jet(z, 0.0).unwrap();
        assert!(j.dzdzbar.is_finite());
        // Stencil Laplacians converge as the step shrinks.
        let lap = |s: f64| {
            let v = |w: Complex64| tube.value(w, 0.0).unwrap();
            (v(z + s) + v(z - s) + v(z + c(0.0, s)) + v(z - c(0.0, s)) - 4.0 * v(z)) / (s * s)
        };
        let err = |s: f64| (lap(s) - j.laplacian()).abs();
        assert!(err(5e-5) < err(1e-4) && err(1e-4) < err(1e-3) && err(1e-4) < 1e-5);
    }

    #[test]
    fn cone_cutoff_regions() {
        let cone = ConeCutoff::new(FunctionPair::power(2).unwrap(), 0.5, 0.8).unwrap();
        // arg F = 4 arg z for the power pair.
        let at = |deg: f64| {
            cone.jet(Complex64::from_polar(0.3, deg.to_radians() / 4.0))
                .unwrap()
                .value
        };
        assert_eq!(at(0.0), 1.0);
        assert_eq!(at(44.9), 1.0);
        assert_eq!(at(-72.1), 0.0);
        assert!(at(60.0) > 0.0 && at(60.0) < 1.0);
        assert!(ConeCutoff::new(FunctionPair::power(2).unwrap(), 0.8, 0.5).is_err());
        let bumped = HypersurfaceModel::Zero.bumped(cone, 0.1).unwrap();
        for deg in [50.0, -55.0, 65.0] {
            fd_check(
                &bumped,
                Complex64::from_polar(0.3, f64::to_radians(deg) / 4.0),
                1e-6,
                1e-5,
            );
        }
        assert_eq!(
            HypersurfaceModel::Zero.bumped(cone, 0.0).unwrap(),
            HypersurfaceModel::Zero
        );
    }

    #[test]
    fn growth_examples() {
        let pair = FunctionPair::power(2).unwrap();
        let thetas = symmetric_thetas(1e-4, 1.0, 20);
        let ft = HypersurfaceModel::finite_type(2, 1, 1.0).unwrap();
        let g = check_growth_hypotheses(&ft, &pair, 1.5, &thetas, &[0.0, 0.5]).unwrap();
        assert!(g.value_vs_f.sup <= 2.0 + 1e-12, "{g:?}");
        assert!(g.first_vs_f.sup.is_finite() && g.second_vs_f.sup.is_finite());
        let z =
            check_growth_hypotheses(&HypersurfaceModel::Zero, &pair, 1.5, &thetas, &[0.0]).unwrap();
        assert_eq!(z.value_vs_f.sup, 0.0);
        assert_eq!(z.second_vs_f.sup, 0.0);
    }

    #[test]
    fn sector_property_examples() {
        let spec = SectorSpec::new(FunctionPair::power(2).unwrap(), 1.1).unwrap();
        let thetas = symmetric_thetas(1e-3, 3.0, 20);
        let r = sector_property(&HypersurfaceModel::Zero, &spec, &thetas, &[0.0]).unwrap();
        assert_eq!(r.max_h, 0.0);
        assert!(r.strict_at.is_empty());
        let ft = HypersurfaceModel::finite_type(2, 1, 3.0).unwrap();
        let r = sector_property(&ft, &spec, &thetas, &[0.0]).unwrap();
        assert!(r.max_h > 0.0 && !r.holds());
    }
}
