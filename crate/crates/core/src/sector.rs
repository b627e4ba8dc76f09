//! Cusped sectors `S_alpha = F*(eps (1 - Delta)^alpha)` and their smoothed
//! approximants `F*_alpha(1 - tau + 1/nu) - F*_alpha(1/nu)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::funcpair::{log_spaced, one_minus_unit, FunctionPair, Order, PairKind, Which};
use crate::stats::linear_fit;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub pair: FunctionPair,
    pub alpha: f64,
    pub nu: Option<u32>,
    pub translate: Complex64,
}

impl SectorSpec {
    pub fn new(pair: FunctionPair, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Parameter(format!(
                "sector opening alpha must be positive, got {alpha}"
            )));
        }
        Ok(SectorSpec {
            pair,
            alpha,
            nu: None,
            translate: Complex64::new(0.0, 0.0),
        })
    }

    pub fn smoothed(mut self, nu: u32) -> Result<Self> {
        if nu == 0 {
            return Err(Error::Parameter(
                "smoothing parameter nu must be positive".into(),
            ));
        }
        self.nu = Some(nu);
        Ok(self)
    }

    pub fn unsmoothed(mut self) -> Self {
        self.nu = None;
        self
    }

    pub fn translated(mut self, offset: Complex64) -> Self {
        self.translate = offset;
        self
    }

    /// `F*_alpha(zeta) = F*(eps zeta^alpha)`, with `zeta = 0` sent to the vertex.
    pub fn fstar_alpha(&self, zeta: Complex64) -> Result<Complex64> {
        if zeta == Complex64::new(0.0, 0.0) {
            return Ok(zeta);
        }
        let log_w = Complex64::new(self.pair.epsilon.ln(), 0.0) + self.alpha * zeta.ln();
        self.pair.fstar_from_log(log_w)
    }

    /// The sector map in terms of `zeta = 1 - tau`.
    pub fn map_zeta(&self, zeta: Complex64) -> Result<Complex64> {
        let core = match self.nu {
            None => self.fstar_alpha(zeta)?,
            Some(nu) => {
                let shift = Complex64::new(1.0 / nu as f64, 0.0);
                if zeta == Complex64::new(0.0, 0.0) {
                    Complex64::new(0.0, 0.0)
                } else {
                    self.fstar_alpha(zeta + shift)? - self.fstar_alpha(shift)?
                }
            }
        };
        Ok(core + self.translate)
    }

    pub fn sector_map(&self, tau: Complex64) -> Result<Complex64> {
        if tau.norm() > 1.0 + 1e-12 {
            return Err(Error::Parameter(format!(
                "sector map needs |tau| <= 1, got {tau}"
            )));
        }
        self.map_zeta(Complex64::new(1.0, 0.0) - tau)
    }

    /// Image of `e^{i theta}`, computed without cancellation near the vertex.
    pub fn boundary_point(&self, theta: f64) -> Result<Complex64> {
        if theta == 0.0 {
            return Ok(self.translate);
        }
        self.map_zeta(one_minus_unit(theta))
    }

    /// Membership for unsmoothed sectors: `|1 - (F(z)/eps)^{1/alpha}| < 1`
    /// together with a round trip through the sector map, which rules out
    /// the other preimages of a non-injective `F`.
    pub fn contains(&self, z: Complex64) -> Result<bool> {
        if self.nu.is_some() {
            return Err(Error::Unsupported(
                "membership test is only defined for unsmoothed sectors",
            ));
        }
        let z = z - self.translate;
        let w = match self.pair.eval(Which::F, Order::Value, z) {
            Ok(w) => w,
            Err(Error::Domain { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        if w == Complex64::new(0.0, 0.0) {
            return Ok(false);
        }
        let zeta = ((w / self.pair.epsilon).ln() / self.alpha).exp();
        let tau = Complex64::new(1.0, 0.0) - zeta;
        if tau.norm() >= 1.0 {
            return Ok(false);
        }
        let back = self.fstar_alpha(zeta)?;
        Ok((back - z).norm() <= 1e-8 * z.norm().max(1e-300))
    }

    pub fn boundary_trace(
        &self,
        theta_min: f64,
        theta_max: f64,
        n: usize,
    ) -> Result<BoundaryTrace> {
        if !(theta_min > 0.0 && theta_min < theta_max && theta_max <= std::f64::consts::PI) {
            return Err(Error::Parameter(format!(
                "boundary trace needs 0 < theta_min < theta_max <= pi, got [{theta_min}, {theta_max}]"
            )));
        }
        if n < 2 {
            return Err(Error::Parameter(
                "boundary trace needs at least 2 points".into(),
            ));
        }
        let thetas = log_spaced(theta_min, theta_max, n);
        let mut points = Vec::with_capacity(n);
        let mut underflow = Vec::with_capacity(n);
        for &t in &thetas {
            let z = self.boundary_point(t)?;
            let flagged = self
                .pair
                .eval_flagged(Which::F, Order::Value, z - self.translate)
                .map(|f| f.underflow)
                .unwrap_or(false);
            underflow.push(flagged || !z.re.is_finite() || !z.im.is_finite());
            points.push(z);
        }
        Ok(BoundaryTrace {
            thetas,
            points,
            underflow,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub thetas: Vec<f64>,
    pub points: Vec<Complex64>,
    pub underflow: Vec<bool>,
}

impl BoundaryTrace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keeps the points whose real part lies in `[lo, hi]`.
    pub fn restrict_x(&self, lo: f64, hi: f64) -> BoundaryTrace {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| (lo..=hi).contains(&self.points[i].re))
            .collect();
        BoundaryTrace {
            thetas: keep.iter().map(|&i| self.thetas[i]).collect(),
            points: keep.iter().map(|&i| self.points[i]).collect(),
            underflow: keep.iter().map(|&i| self.underflow[i]).collect(),
        }
    }

    /// CSV with columns `theta, x, y, underflow_flag`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Parameter(format!("csv: {e}"));
        w.write_record(["theta", "x", "y", "underflow_flag"])
            .map_err(io)?;
        for i in 0..self.len() {
            w.write_record([
                format!("{:e}", self.thetas[i]),
                format!("{:e}", self.points[i].re),
                format!("{:e}", self.points[i].im),
                (self.underflow[i] as u8).to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Parameter(format!("csv: {e}")))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)
            .map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))?;
        self.write_csv(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub r_squared: f64,
}

/// Least squares of `log|y|` against `log x`: `|y| ~ coefficient * x^exponent`.
pub fn asymptotic_fit(trace: &BoundaryTrace) -> Result<AsymptoticFit> {
    let pts: Vec<(f64, f64)> = trace
        .points
        .iter()
        .filter(|z| z.re > 0.0 && z.im != 0.0)
        .map(|z| (z.re.ln(), z.im.abs().ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::Degenerate(format!(
            "asymptotic fit needs at least 5 points with x > 0 and y != 0, got {}",
            pts.len()
        )));
    }
    let f = linear_fit(&pts);
    Ok(AsymptoticFit {
        exponent: f.slope,
        coefficient: f.intercept.exp(),
        r_squared: f.r_squared,
    })
}

/// `exp(mean(log|y| - exponent * log x))`: the coefficient with the exponent held fixed,
/// so that coefficients of traces with different openings are comparable.
pub fn coefficient_at_exponent(trace: &BoundaryTrace, exponent: f64) -> Result<f64> {
    let logs: Vec<f64> = trace
        .points
        .iter()
        .filter(|z| z.re > 0.0 && z.im != 0.0)
        .map(|z| z.im.abs().ln() - exponent * z.re.ln())
        .collect();
    if logs.is_empty() {
        return Err(Error::Degenerate(
            "no trace point with x > 0 and y != 0".into(),
        ));
    }
    Ok((logs.iter().sum::<f64>() / logs.len() as f64).exp())
}

/// `c_{alpha,x} = 1 + log(alpha) / log(-log x)`.
pub fn c_alpha_x(alpha: f64, x: f64) -> f64 {
    1.0 + alpha.ln() / (-x.ln()).ln()
}

/// Which double-exponential boundary profile the trace is compared with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DoubleExpProfile {
    /// `c_{alpha,x} x^{a+1} e^{-1/x^a} e^{-e^{1/x^a}}`.
    Stated,
    /// `x^{a+1} e^{-1/x^a}`, the leading order of `Im F*_alpha` on the boundary.
    LeadingOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileCheck {
    /// Best constant in the sup norm, the midpoint of the ratio range.
    pub k: f64,
    pub max_deviation: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub points_used: usize,
}

impl ProfileCheck {
    pub fn spread(&self) -> f64 {
        self.max_ratio / self.min_ratio
    }
}

/// Compares `|y|` on a double-exponential sector trace with a boundary profile.
pub fn doubleexp_profile_check(
    spec: &SectorSpec,
    trace: &BoundaryTrace,
    profile: DoubleExpProfile,
) -> Result<ProfileCheck> {
    let a = match spec.pair.kind {
        PairKind::DoubleExp { a } => a,
        _ => {
            return Err(Error::Parameter(
                "profile check needs a double-exponential pair".into(),
            ))
        }
    };
    let mut ratios = Vec::new();
    for (z, &flag) in trace.points.iter().zip(&trace.underflow) {
        let z = z - spec.translate;
        if flag || !(z.re > 0.0 && z.re < 1.0) || z.im == 0.0 {
            continue;
        }
        let x = z.re;
        let inv = x.powf(-a);
        let mut log_profile = (a + 1.0) * x.ln() - inv;
        if profile == DoubleExpProfile::Stated {
            log_profile += c_alpha_x(spec.alpha, x).ln() - inv.exp();
        }
        ratios.push((z.im.abs().ln() - log_profile).exp());
    }
    if ratios.is_empty() {
        return Err(Error::Degenerate("every trace point underflowed".into()));
    }
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let k = 0.5 * (min_ratio + max_ratio);
    Ok(ProfileCheck {
        k,
        max_deviation: max_ratio - k,
        min_ratio,
        max_ratio,
        points_used: ratios.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    /// `min_theta |F*_alpha(1 - e^{i theta})| - |F*_{alpha nu}(1 - e^{i theta})|`.
    pub min_slack: f64,
    pub max_slack: f64,
    /// `max |F*_alpha|` over the grid.
    pub scale: f64,
}

/// The smoothed sector stays inside the modulus envelope of the cusped one.
pub fn increment_domination(spec: &SectorSpec, thetas: &[f64]) -> Result<DominationReport> {
    let nu = spec
        .nu
        .ok_or_else(|| Error::Parameter("increment domination needs a smoothed sector".into()))?;
    let base = SectorSpec {
        nu: None,
        translate: Complex64::new(0.0, 0.0),
        ..*spec
    };
    let smooth = SectorSpec {
        nu: Some(nu),
        translate: Complex64::new(0.0, 0.0),
        ..*spec
    };
    let mut rep = DominationReport {
        min_slack: f64::INFINITY,
        max_slack: f64::NEG_INFINITY,
        scale: 0.0,
    };
    for &t in thetas {
        let outer = base.boundary_point(t)?.norm();
        let inner = smooth.boundary_point(t)?.norm();
        rep.scale = rep.scale.max(outer);
        rep.min_slack = rep.min_slack.min(outer - inner);
        rep.max_slack = rep.max_slack.max(outer - inner);
    }
    Ok(rep)
}

/// Default domination grid: 50 log-spaced angles in `[1e-4, pi]` and `nu` in `{4, ..., 64}`.
pub fn default_domination_grid() -> (Vec<f64>, Vec<u32>) {
    (
        log_spaced(1e-4, std::f64::consts::PI, 50),
        vec![4, 8, 16, 32, 64],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn power(alpha: f64) -> SectorSpec {
        SectorSpec::new(FunctionPair::power(2).unwrap(), alpha).unwrap()
    }

    fn exp1(alpha: f64) -> SectorSpec {
        SectorSpec::new(FunctionPair::exp(1.0).unwrap(), alpha).unwrap()
    }

    #[test]
    fn map_examples() {
        let z = power(1.0).sector_map(c(0.0, 0.0)).unwrap();
        assert!((z.re - 0.1f64.powf(0.25)).abs() < 1e-15 && z.im == 0.0);
        assert!((z.re - 0.5623).abs() < 1e-4);
        for s in [
            power(1.5),
            exp1(1.5),
            SectorSpec::new(FunctionPair::double_exp(0.5).unwrap(), 1.2).unwrap(),
        ] {
            assert_eq!(s.sector_map(c(1.0, 0.0)).unwrap(), c(0.0, 0.0));
            assert_eq!(
                s.smoothed(8).unwrap().sector_map(c(1.0, 0.0)).unwrap(),
                c(0.0, 0.0)
            );
        }
        assert!(power(1.0).sector_map(c(1.0, 0.5)).is_err());
    }

    #[test]
    fn contains_examples() {
        let s = power(1.0);
        assert!(s.contains(s.sector_map(c(0.5, 0.0)).unwrap()).unwrap());
        assert!(!s.contains(c(-0.01, 0.0)).unwrap());
        let e = exp1(1.5);
        assert!(e.contains(e.sector_map(c(-0.9, 0.0)).unwrap()).unwrap());
        assert!(matches!(
            e.smoothed(4).unwrap().contains(c(0.1, 0.0)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn power_trace_is_an_exact_cone() {
        let s = power(1.0);
        let tr = s.boundary_trace(0.01, 0.1, 10).unwrap();
        assert_eq!(tr.len(), 10);
        for (t, z) in tr.thetas.iter().zip(&tr.points) {
            // arg(1 - e^{i t}) = -(pi - t)/2 exactly, so the cone half-angle is alpha (pi - t) / 4m.
            let expect = ((PI - t) / 8.0).tan();
            assert!((z.im.abs() / z.re - expect).abs() < 1e-12);
            assert!((z.im.abs() / z.re - (PI / 8.0).tan()).abs() < 0.02);
        }
        let fit = asymptotic_fit(&s.boundary_trace(1e-8, 1e-4, 20).unwrap()).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-3);
        assert!((fit.coefficient / (PI / 8.0).tan() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn exp_trace_location() {
        let tr = exp1(1.0)
            .boundary_trace((-20.0f64).exp(), (-10.0f64).exp(), 20)
            .unwrap();
        for z in &tr.points {
            assert!(z.re > 0.04 && z.re < 0.1, "{z}");
        }
        assert_eq!(exp1(1.0).boundary_trace(0.1, 0.2, 2).unwrap().len(), 2);
        assert!(exp1(1.0).boundary_trace(0.2, 0.1, 5).is_err());
    }

    #[test]
    fn exp_asymptotics() {
        let fit1 = asymptotic_fit(
            &exp1(1.0)
                .boundary_trace((-30.0f64).exp(), (-10.0f64).exp(), 40)
                .unwrap(),
        )
        .unwrap();
        assert!((fit1.exponent - 2.0).abs() < 0.2, "{fit1:?}");
        let window = |alpha: f64| {
            exp1(alpha)
                .boundary_trace(1e-12, 1.0, 2000)
                .unwrap()
                .restrict_x(0.05, 0.2)
        };
        let (t1, t2) = (window(1.0), window(2.0));
        assert!(t1.len() > 100 && t2.len() > 100);
        let fit = asymptotic_fit(&t1).unwrap();
        assert!(
            (fit.exponent - 2.0).abs() < 0.2 && fit.r_squared > 0.999,
            "{fit:?}"
        );
        let ratio =
            coefficient_at_exponent(&t2, 2.0).unwrap() / coefficient_at_exponent(&t1, 2.0).unwrap();
        assert!((ratio - 2.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn doubleexp_profiles() {
        let s = SectorSpec::new(FunctionPair::double_exp(0.5).unwrap(), 1.0).unwrap();
        let tr = s
            .boundary_trace(1e-300, 3.0, 300)
            .unwrap()
            .restrict_x(0.02, 0.2);
        let lead = doubleexp_profile_check(&s, &tr, DoubleExpProfile::LeadingOrder).unwrap();
        assert!(lead.spread() < 3.0, "{lead:?}");
        assert!((lead.min_ratio / PI - 1.0).abs() < 1e-3);
        // The extra factor e^{-e^{1/x^a}} makes the stated profile incomparable with the trace.
        let stated = doubleexp_profile_check(&s, &tr, DoubleExpProfile::Stated).unwrap();
        assert!(stated.spread() > 1e30, "{stated:?}");
    }

    #[test]
    fn profile_check_trivia() {
        assert_eq!(c_alpha_x(1.0, 0.05), 1.0);
        let s = SectorSpec::new(FunctionPair::double_exp(0.5).unwrap(), 1.0).unwrap();
        let tr = s.boundary_trace(1e-3, 1e-3 * 1.0001, 2).unwrap();
        let one = BoundaryTrace {
            thetas: vec![tr.thetas[0]],
            points: vec![tr.points[0]],
            underflow: vec![false],
        };
        let r = doubleexp_profile_check(&s, &one, DoubleExpProfile::Stated).unwrap();
        assert_eq!(r.max_deviation, 0.0);
        let none = BoundaryTrace {
            underflow: vec![true, true],
            ..tr
        };
        assert!(doubleexp_profile_check(&s, &none, DoubleExpProfile::Stated).is_err());
    }

    #[test]
    fn domination_examples() {
        let thetas = log_spaced(1e-4, PI, 50);
        let r = increment_domination(&power(1.5).smoothed(8).unwrap(), &thetas).unwrap();
        assert!(r.min_slack >= -1e-12 * r.scale, "{r:?}");
        let r = increment_domination(&exp1(1.5).smoothed(4).unwrap(), &thetas).unwrap();
        assert!(r.min_slack >= -1e-12 * r.scale, "{r:?}");
        assert!(increment_domination(&power(1.5), &thetas).is_err());
    }

    #[test]
    fn trace_csv_columns() {
        let tr = power(1.0).boundary_trace(0.1, 0.2, 3).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theta,x,y,underflow_flag\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
