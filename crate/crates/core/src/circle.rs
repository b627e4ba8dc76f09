//! Spectral analysis on the unit circle.
//!
//! Samples live on a staggered grid `theta_j = 2 pi (j + 1/2) / n`, so no node
//! sits on the vertex `theta = 0`. Values at the vertex are recovered by
//! summing the Fourier series there. The Nyquist mode is kept for exact
//! round trips but ignored by every operator.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const DEFAULT_GRID: usize = 4096;

/// Fraction of spectral energy allowed beyond `|k| = n/4` before the radial
/// derivative is considered unreliable.
pub const TAIL_ENERGY_LIMIT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleGrid {
    n: usize,
}

impl CircleGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Parameter(format!(
                "circle grid size must be a power of two >= 8, got {n}"
            )));
        }
        Ok(CircleGrid { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * (j as f64 + 0.5) / self.n as f64
    }

    /// Node angles mapped into `(-pi, pi)`.
    pub fn signed_theta(&self, j: usize) -> f64 {
        let t = self.theta(j);
        if t > PI {
            t - 2.0 * PI
        } else {
            t
        }
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.theta(j)).collect()
    }

    pub fn step(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> BoundarySamples {
        BoundarySamples::from_values(
            *self,
            (0..self.n).map(|j| f(self.signed_theta(j))).collect(),
        )
    }

    /// Signed frequency stored at FFT index `i`.
    fn freq(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    fn nyquist(&self) -> usize {
        self.n / 2
    }
}

/// Real samples on the staggered grid together with their Fourier coefficients
/// `c_k`, defined by `v(theta) = sum_k c_k e^{i k theta}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySamples {
    grid: CircleGrid,
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl BoundarySamples {
    pub fn from_values(grid: CircleGrid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.n, "sample count must match the grid");
        let n = grid.n;
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let coeffs = buf
            .into_iter()
            .enumerate()
            .map(|(i, x)| {
                let k = grid.freq(i) as f64;
                x * Complex64::from_polar(1.0 / n as f64, -k * PI / n as f64)
            })
            .collect();
        BoundarySamples {
            grid,
            values,
            coeffs,
        }
    }

    /// Builds samples from coefficients in FFT order; the result is the real part.
    fn from_coeffs(grid: CircleGrid, coeffs: Vec<Complex64>) -> Self {
        let n = grid.n;
        let mut buf: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * Complex64::from_polar(1.0, grid.freq(i) as f64 * PI / n as f64))
            .collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        let values = buf.into_iter().map(|x| x.re).collect();
        BoundarySamples {
            grid,
            values,
            coeffs,
        }
    }

    pub fn zeros(grid: CircleGrid) -> Self {
        BoundarySamples {
            grid,
            values: vec![0.0; grid.n],
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    pub fn grid(&self) -> CircleGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Coefficient of `e^{i k theta}`; zero outside `|k| <= n/2`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.grid.n as i64;
        if k.abs() > n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[k.rem_euclid(n) as usize]
    }

    fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let nyq = self.grid.nyquist();
        self.coeffs
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != nyq)
            .map(move |(i, &c)| (self.grid.freq(i), c))
    }

    /// Exact series value at an arbitrary angle (Nyquist mode excluded).
    pub fn eval(&self, theta: f64) -> f64 {
        self.modes()
            .map(|(k, c)| (c * Complex64::from_polar(1.0, k as f64 * theta)).re)
            .sum()
    }

    pub fn value_at_vertex(&self) -> f64 {
        self.modes().map(|(_, c)| c.re).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &BoundarySamples) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest `|c_{-k} - conj(c_k)|`; zero up to rounding for real data.
    pub fn hermitian_defect(&self) -> f64 {
        (1..self.grid.n as i64 / 2)
            .map(|k| (self.coeff(-k) - self.coeff(k).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> BoundarySamples {
        BoundarySamples::from_values(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Harmonic conjugation normalized at the vertex.
///
/// For boundary values `v` of a holomorphic `w = u + i v` on the disc this
/// returns `u - u(1)`: the multiplier `i sgn(k)` followed by subtraction of the
/// conjugate's series value at `theta = 0`.
pub fn hilbert_t1(samples: &BoundarySamples) -> BoundarySamples {
    let grid = samples.grid;
    let nyq = grid.nyquist();
    let mut coeffs: Vec<Complex64> = samples
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let k = grid.freq(i);
            if i == nyq || k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k.signum() as f64) * c
            }
        })
        .collect();
    let at_vertex: f64 = coeffs.iter().map(|c| c.re).sum();
    coeffs[0] -= at_vertex;
    BoundarySamples::from_coeffs(grid, coeffs)
}

/// Harmonic extension `sum_k c_k t^{|k|} e^{i k theta}` at `t e^{i theta}`, `0 <= t < 1`.
pub fn poisson_eval(samples: &BoundarySamples, t: f64, theta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Parameter(format!(
            "Poisson extension needs 0 <= t < 1, got {t}"
        )));
    }
    Ok(samples
        .modes()
        .map(|(k, c)| (c * Complex64::from_polar(t.powi(k.abs() as i32), k as f64 * theta)).re)
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialDerivative {
    /// `d/dt` of the harmonic extension at `t = 1, theta = 0`.
    pub value: f64,
    /// Contribution of the modes `n/4 < |k| < n/2`; an estimate of the truncation error.
    pub tail: f64,
    /// Spectral energy beyond `|k| = n/4` relative to the total.
    pub tail_energy_ratio: f64,
}

/// `sum_k |k| c_k`, the radial derivative at the vertex, gated by coefficient decay.
pub fn radial_derivative_at_1(samples: &BoundarySamples) -> Result<RadialDerivative> {
    let quarter = samples.grid.n as i64 / 4;
    let (mut total, mut tail_energy, mut value, mut tail) = (0.0, 0.0, 0.0, 0.0);
    for (k, c) in samples.modes() {
        let e = c.norm_sqr();
        total += e;
        let term = k.abs() as f64 * c.re;
        value += term;
        if k.abs() > quarter {
            tail_energy += e;
            tail += term;
        }
    }
    let ratio = if total > 0.0 {
        tail_energy / total
    } else {
        0.0
    };
    if ratio > TAIL_ENERGY_LIMIT {
        return Err(Error::Regularity {
            tail_ratio: ratio,
            limit: TAIL_ENERGY_LIMIT,
        });
    }
    Ok(RadialDerivative {
        value,
        tail: tail.abs(),
        tail_energy_ratio: ratio,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderSlopes {
    pub slope1: f64,
    pub slope2: f64,
}

/// Log-log slopes of the first and second finite differences against `theta`
/// over the nodes with `theta` in `[lo, hi]` (positive side of the vertex).
/// Identically vanishing differences give `+inf`.
pub fn holder_slope(samples: &BoundarySamples, lo: f64, hi: f64) -> Result<HolderSlopes> {
    let grid = samples.grid;
    let h = grid.step();
    let idx: Vec<usize> = (0..grid.n / 2)
        .filter(|&j| (lo..=hi).contains(&grid.theta(j)))
        .collect();
    if idx.len() < 5 {
        return Err(Error::Degenerate(format!(
            "holder window [{lo}, {hi}] holds {} grid points, need at least 5",
            idx.len()
        )));
    }
    let v = &samples.values;
    let mut first = Vec::new();
    for w in idx.windows(2) {
        let d = (v[w[1]] - v[w[0]]).abs() / h;
        first.push((0.5 * (grid.theta(w[0]) + grid.theta(w[1])), d));
    }
    let mut second = Vec::new();
    for w in idx.windows(3) {
        let d = (v[w[2]] - 2.0 * v[w[1]] + v[w[0]]).abs() / (h * h);
        second.push((grid.theta(w[1]), d));
    }
    Ok(HolderSlopes {
        slope1: loglog_slope(&first),
        slope2: loglog_slope(&second),
    })
}

fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let scale = points.iter().fold(0.0f64, |m, p| m.max(p.1));
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 1e-13 * scale && p.1 > 0.0)
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    crate::stats::linear_fit(&pts).slope
}

/// Energy of the negative-frequency modes of `u + i v` relative to the total.
pub fn analyticity_defect(u: &BoundarySamples, v: &BoundarySamples) -> Result<f64> {
    if u.grid != v.grid {
        return Err(Error::Parameter(
            "analyticity defect needs samples on the same grid".into(),
        ));
    }
    let (mut neg, mut total) = (0.0, 0.0);
    for k in -(u.grid.n as i64 / 2 - 1)..=(u.grid.n as i64 / 2 - 1) {
        let c = u.coeff(k) + Complex64::new(0.0, 1.0) * v.coeff(k);
        let e = c.norm_sqr();
        total += e;
        if k < 0 {
            neg += e;
        }
    }
    Ok(if total > 0.0 { neg / total } else { 0.0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexQuadrature {
    /// `-(1/2 pi) int (v(theta) - v(0)) / (1 - cos theta) d theta`.
    pub value: f64,
    /// Dyadic levels `[pi 2^{-k-1}, pi 2^{-k}]` integrated before stopping.
    pub levels: usize,
    /// Geometric estimate of the part below the last level.
    pub tail: f64,
}

const MAX_DYADIC_LEVELS: usize = 900;

/// Radial derivative at the vertex of the harmonic extension of a boundary
/// function, by graded quadrature of the kernel identity
/// `d_t v(1) = -(1/2 pi) int (v(theta) - v(0)) / (1 - cos theta) d theta`.
///
/// `dv(theta)` must return `v(theta) - v(0)`; it is sampled at arbitrarily
/// small `|theta|`, which is what makes this usable when `v` is only
/// `C^{1,beta}` at the vertex and the Fourier series converges slowly.
/// `breaks` are angles in `(0, pi)` where the integrand has kinks.
pub fn vertex_quadrature(
    mut dv: impl FnMut(f64) -> Result<f64>,
    breaks: &[f64],
) -> Result<VertexQuadrature> {
    let mut integrand =
        |t: f64| -> Result<f64> { Ok((dv(t)? + dv(-t)?) / (2.0 * (t / 2.0).sin().powi(2))) };
    let mut total = 0.0;
    let (mut prev, mut last) = (f64::NAN, f64::NAN);
    let mut quiet = 0;
    let mut levels = 0;
    let mut hi = PI;
    while levels < MAX_DYADIC_LEVELS && hi > 1e-290 {
        let lo = hi / 2.0;
        let coarse = levels < 10;
        let mut knots = vec![lo];
        knots.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
        knots.push(hi);
        let mut piece = 0.0;
        for w in knots.windows(2) {
            piece += crate::stats::try_gauss_legendre(
                &mut integrand,
                w[0],
                w[1],
                if coarse { 16 } else { 2 },
            )?;
        }
        total += piece;
        prev = last;
        last = piece;
        levels += 1;
        hi = lo;
        if piece.abs() <= 1e-17 * total.abs() {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    let ratio = last / prev;
    let tail = if ratio.is_finite() && ratio.abs() < 1.0 {
        last * ratio / (1.0 - ratio)
    } else {
        0.0
    };
    Ok(VertexQuadrature {
        value: -(total + tail) / (2.0 * PI),
        levels,
        tail: (tail / (2.0 * PI)).abs(),
    })
}
