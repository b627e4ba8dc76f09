//! Discs attached to `s = h(z, r)` over (smoothed, translated) cusped sectors:
//! `z(tau) = F*_alpha(1 - tau)`, `w = u + i v` holomorphic with
//! `u = r_0 + T_1(h(z, u) - eta chi)` and `v = h(z, u) - eta chi` on the circle.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::circle::{
    analyticity_defect, hilbert_t1, poisson_eval, radial_derivative_at_1, vertex_quadrature,
    BoundarySamples, CircleGrid, RadialDerivative, VertexQuadrature,
};
use crate::error::{Error, Result};
use crate::hypersurface::{sector_property, CutoffProfile, HoloFn, HypersurfaceModel};
use crate::sector::SectorSpec;
use crate::stats::gauss_legendre;

/// Bump `chi(1 - tau)` near `tau = e^{i center}`, equal to 1 within `width/2`
/// of the center and supported within `width`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub eta: f64,
    pub center: f64,
    pub width: f64,
}

impl Default for BumpSpec {
    fn default() -> Self {
        BumpSpec {
            eta: 0.0,
            center: PI,
            width: 0.5,
        }
    }
}

/// Angular distance on the circle.
fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

impl BumpSpec {
    pub fn new(eta: f64, center: f64, width: f64) -> Result<Self> {
        let b = BumpSpec { eta, center, width };
        b.validate()?;
        Ok(b)
    }

    pub fn with_eta(self, eta: f64) -> Self {
        BumpSpec { eta, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::Parameter(format!(
                "bump amplitude must be >= 0, got {}",
                self.eta
            )));
        }
        if !(self.width > 0.0) {
            return Err(Error::Parameter(format!(
                "bump width must be positive, got {}",
                self.width
            )));
        }
        if circle_distance(self.center, 0.0) - self.width < PI / 4.0 {
            return Err(Error::Parameter(format!(
                "bump support [{} +- {}] must stay outside |theta| < pi/4",
                self.center, self.width
            )));
        }
        Ok(())
    }

    pub fn profile(&self, theta: f64) -> f64 {
        CutoffProfile.value(2.0 * circle_distance(theta, self.center) / self.width)
    }

    /// `(1/2 pi) int chi / (1 - cos theta)`, the response of `d_t v(1)` per unit `eta`.
    pub fn predicted_response(&self) -> f64 {
        let f = |t: f64| self.profile(t) / (2.0 * (t / 2.0).sin().powi(2));
        let (a, b) = (self.center - self.width, self.center + self.width);
        // Panels split at the kinks of the profile so every piece is polynomial-smooth.
        let knots = [
            a,
            self.center - self.width / 2.0,
            self.center + self.width / 2.0,
            b,
        ];
        knots
            .windows(2)
            .map(|w| gauss_legendre(f, w[0], w[1], 64))
            .sum::<f64>()
            / (2.0 * PI)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    /// Real constant added to `u`, which moves the disc vertex along `r`.
    pub r_shift: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-11,
            max_iter: 200,
            damping: 1.0,
            r_shift: 0.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AttachedDisc {
    pub spec: SectorSpec,
    pub model: HypersurfaceModel,
    pub bump: BumpSpec,
    pub r_shift: f64,
    /// Sector points `z(e^{i theta_j})`.
    pub points: Vec<Complex64>,
    pub u: BoundarySamples,
    pub v: BoundarySamples,
    pub picard_iters: usize,
    /// Sup-norm change of `u` per iteration.
    pub changes: Vec<f64>,
    pub residual: f64,
    pub defect: f64,
    /// `d_t v` at the vertex from the Fourier series, or the regularity gate error.
    pub dv_dt_at_1: std::result::Result<RadialDerivative, Error>,
    /// `d_t v` at the vertex from graded quadrature of the boundary data.
    pub dv_dt_vertex: std::result::Result<VertexQuadrature, Error>,
}

impl AttachedDisc {
    pub fn grid(&self) -> CircleGrid {
        self.u.grid()
    }

    pub fn dv_dt(&self) -> Result<RadialDerivative> {
        self.dv_dt_at_1.clone()
    }

    /// Transversality number `d_t v(1)` from the vertex quadrature, which stays
    /// accurate when the boundary data are only `C^{1,beta}` at the vertex.
    pub fn transversality(&self) -> Result<f64> {
        self.dv_dt_vertex.clone().map(|q| q.value)
    }

    /// `w(1) = u(1) + i v(1)` by exact series summation.
    pub fn vertex_value(&self) -> Complex64 {
        Complex64::new(self.u.value_at_vertex(), self.v.value_at_vertex())
    }

    /// `max_j |v_j - (h(z_j, u_j) - eta chi_j)|`; zero by construction up to rounding.
    pub fn attachment_error(&self) -> Result<f64> {
        let grid = self.grid();
        let mut err = 0.0f64;
        for j in 0..grid.n() {
            let target = self.model.value(self.points[j], self.u.values()[j])?
                - self.bump.eta * self.bump.profile(grid.signed_theta(j));
            err = err.max((self.v.values()[j] - target).abs());
        }
        Ok(err)
    }

    /// `max_j |w_j - i (g(z_j) - g(z(1)))|`, the distance to the disc attached to
    /// `s = Re g(z)` in closed form.
    pub fn closed_form_error(&self, g: &HoloFn) -> Result<f64> {
        let g1 = g.eval(self.spec.sector_map(Complex64::new(1.0, 0.0))?)?.0;
        let mut err = 0.0f64;
        for (j, &z) in self.points.iter().enumerate() {
            let w = Complex64::new(0.0, 1.0) * (g.eval(z)?.0 - g1);
            err = err.max((Complex64::new(self.u.values()[j], self.v.values()[j]) - w).norm());
        }
        Ok(err)
    }

    /// Largest ratio of successive changes after the third iteration.
    pub fn contraction_factor(&self) -> f64 {
        contraction(&self.changes)
    }

    /// Harmonic extension of `w` at `t e^{i theta}`.
    pub fn interior(&self, t: f64, theta: f64) -> Result<Complex64> {
        Ok(Complex64::new(
            poisson_eval(&self.u, t, theta)?,
            poisson_eval(&self.v, t, theta)?,
        ))
    }

    /// CSV with columns `theta, x, y, u, v`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Parameter(format!("csv: {e}"));
        w.write_record(["theta", "x", "y", "u", "v"]).map_err(io)?;
        let grid = self.grid();
        for j in 0..grid.n() {
            w.write_record([
                format!("{:e}", grid.signed_theta(j)),
                format!("{:e}", self.points[j].re),
                format!("{:e}", self.points[j].im),
                format!("{:e}", self.u.values()[j]),
                format!("{:e}", self.v.values()[j]),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Parameter(format!("csv: {e}")))
    }
}

fn contraction(changes: &[f64]) -> f64 {
    changes
        .windows(2)
        .skip(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max)
}

/// Sector points over the grid nodes.
pub fn sector_points(spec: &SectorSpec, grid: CircleGrid) -> Result<Vec<Complex64>> {
    (0..grid.n())
        .map(|j| spec.boundary_point(grid.signed_theta(j)))
        .collect()
}

/// Picard iteration for the Bishop equation.
pub fn solve(
    model: &HypersurfaceModel,
    spec: &SectorSpec,
    bump: &BumpSpec,
    grid: CircleGrid,
    opts: &SolveOptions,
) -> Result<AttachedDisc> {
    bump.validate()?;
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::Parameter(format!(
            "damping must lie in (0, 1], got {}",
            opts.damping
        )));
    }
    let points = sector_points(spec, grid)?;
    let chi: Vec<f64> = (0..grid.n())
        .map(|j| bump.eta * bump.profile(grid.signed_theta(j)))
        .collect();
    let data_for = |u: &[f64]| -> Result<Vec<f64>> {
        points
            .iter()
            .zip(u)
            .zip(&chi)
            .map(|((&z, &r), &c)| Ok(model.value(z, r)? - c))
            .collect()
    };
    let mut u = vec![opts.r_shift; grid.n()];
    let mut changes = Vec::new();
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let t1 = hilbert_t1(&BoundarySamples::from_values(grid, data_for(&u)?));
        let next: Vec<f64> = t1
            .values()
            .iter()
            .zip(&u)
            .map(|(&t, &old)| opts.damping * (t + opts.r_shift) + (1.0 - opts.damping) * old)
            .collect();
        let change = next
            .iter()
            .zip(&u)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        u = next;
        changes.push(change);
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations: opts.max_iter,
            last_change: *changes.last().unwrap_or(&f64::NAN),
            factor: contraction(&changes),
        });
    }
    let data = BoundarySamples::from_values(grid, data_for(&u)?);
    let t1 = hilbert_t1(&data);
    let residual = t1
        .values()
        .iter()
        .zip(&u)
        .fold(0.0f64, |m, (t, x)| m.max((t + opts.r_shift - x).abs()));
    let u = BoundarySamples::from_values(grid, u);
    let defect = analyticity_defect(&t1, &data)?;
    let dv_dt_at_1 = radial_derivative_at_1(&data);
    let dv_dt_vertex = boundary_vertex_derivative(model, spec, bump, &u, opts.r_shift);
    Ok(AttachedDisc {
        spec: *spec,
        model: model.clone(),
        bump: *bump,
        r_shift: opts.r_shift,
        points,
        u,
        v: data,
        picard_iters: changes.len(),
        changes,
        residual,
        defect,
        dv_dt_at_1,
        dv_dt_vertex,
    })
}

/// Vertex quadrature of `v(theta) = h(z(theta), u(theta)) - eta chi(theta)`, with `u`
/// continued off the grid by its Fourier series when `h` depends on `r`.
fn boundary_vertex_derivative(
    model: &HypersurfaceModel,
    spec: &SectorSpec,
    bump: &BumpSpec,
    u: &BoundarySamples,
    r_shift: f64,
) -> Result<VertexQuadrature> {
    let rigid = model.is_rigid();
    let data = |theta: f64| -> Result<f64> {
        let r = if rigid { r_shift } else { u.eval(theta) };
        Ok(model.value(spec.boundary_point(theta)?, r)? - bump.eta * bump.profile(theta))
    };
    let v0 = data(0.0)?;
    let c = circle_distance(bump.center, 0.0);
    let breaks: Vec<f64> = [
        c - bump.width,
        c - bump.width / 2.0,
        c + bump.width / 2.0,
        c + bump.width,
    ]
    .into_iter()
    .filter(|b| *b > 0.0 && *b < PI)
    .collect();
    vertex_quadrature(|t| Ok(data(t)? - v0), &breaks)
}

/// `max |h|` over the sector boundary nodes at `r = 0`; `1` when `h` vanishes there.
pub fn model_scale(model: &HypersurfaceModel, spec: &SectorSpec, grid: CircleGrid) -> Result<f64> {
    let mut s = 0.0f64;
    for z in sector_points(spec, grid)? {
        s = s.max(model.value(z, 0.0)?.abs());
    }
    Ok(if s > 0.0 { s } else { 1.0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpResponse {
    /// `d_eta d_t v(1)` from `eta in {0, delta, 2 delta}`.
    pub d2v_deta_dt: f64,
    /// Quadrature of `(1/2 pi) int chi / (1 - cos theta)`.
    pub predicted: f64,
    pub delta: f64,
    pub dv_dt_unbumped: f64,
}

impl BumpResponse {
    pub fn relative_error(&self) -> f64 {
        (self.d2v_deta_dt - self.predicted).abs() / self.predicted.abs()
    }
}

/// Second-order one-sided difference in `eta` of the transversality number.
/// `delta = None` uses `1e-4` times the model scale on the sector.
pub fn bump_response(
    model: &HypersurfaceModel,
    spec: &SectorSpec,
    bump: &BumpSpec,
    delta: Option<f64>,
    grid: CircleGrid,
    opts: &SolveOptions,
) -> Result<BumpResponse> {
    let delta = match delta {
        Some(d) => d,
        None => 1e-4 * model_scale(model, spec, grid)?,
    };
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Degenerate(format!(
            "bump family needs a positive amplitude step, got {delta}"
        )));
    }
    let f: Vec<f64> = [0.0, delta, 2.0 * delta]
        .par_iter()
        .map(|&eta| solve(model, spec, &bump.with_eta(eta), grid, opts)?.transversality())
        .collect::<Result<_>>()?;
    Ok(BumpResponse {
        d2v_deta_dt: (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * delta),
        predicted: bump.predicted_response(),
        delta,
        dv_dt_unbumped: f[0],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingEntry {
    pub nu: u32,
    /// Vertex quadrature value.
    pub dv_dt: Option<f64>,
    /// Fourier-series value, absent when the regularity gate fails.
    pub spectral: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingSweep {
    pub entries: Vec<SmoothingEntry>,
    /// The unsmoothed sector.
    pub limit: SmoothingEntry,
    /// `|dv_dt(nu) - limit|` in the order of `entries`.
    pub distances: Vec<f64>,
    pub monotone: bool,
}

fn transversality_entry(
    model: &HypersurfaceModel,
    spec: &SectorSpec,
    grid: CircleGrid,
    opts: &SolveOptions,
    nu: u32,
) -> SmoothingEntry {
    let disc = match solve(model, spec, &BumpSpec::default(), grid, opts) {
        Ok(d) => d,
        Err(e) => {
            return SmoothingEntry {
                nu,
                dv_dt: None,
                spectral: None,
                error: Some(e.to_string()),
            }
        }
    };
    let spectral = disc.dv_dt().ok().map(|d| d.value);
    match disc.transversality() {
        Ok(v) => SmoothingEntry {
            nu,
            dv_dt: Some(v),
            spectral,
            error: None,
        },
        Err(e) => SmoothingEntry {
            nu,
            dv_dt: None,
            spectral,
            error: Some(e.to_string()),
        },
    }
}

/// Transversality over smoothed sectors `nu in nus` and the unsmoothed limit (`nu = 0` in the report).
pub fn smoothing_sweep(
    model: &HypersurfaceModel,
    spec: &SectorSpec,
    nus: &[u32],
    grid: CircleGrid,
    opts: &SolveOptions,
) -> Result<SmoothingSweep> {
    let specs: Vec<SectorSpec> = nus
        .iter()
        .map(|&nu| spec.smoothed(nu))
        .collect::<Result<_>>()?;
    let entries: Vec<SmoothingEntry> = specs
        .par_iter()
        .zip(nus)
        .map(|(s, &nu)| transversality_entry(model, s, grid, opts, nu))
        .collect();
    let limit = transversality_entry(model, &spec.unsmoothed(), grid, opts, 0);
    let distances: Vec<f64> = entries
        .iter()
        .map(|e| match (e.dv_dt, limit.dv_dt) {
            (Some(a), Some(b)) => (a - b).abs(),
            _ => f64::NAN,
        })
        .collect();
    let monotone =
        distances.iter().all(|d| d.is_finite()) && distances.windows(2).all(|w| w[1] <= w[0]);
    Ok(SmoothingSweep {
        entries,
        limit,
        distances,
        monotone,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransversalityCertificate {
    pub dv_dt: f64,
    /// Fourier-series value of the same number, when the regularity gate passes.
    pub dv_dt_spectral: Option<f64>,
    pub h_max_on_sector: f64,
    /// The sector property holds and `h < 0` somewhere on the sector.
    pub strict: bool,
    /// `None` when the sector property fails and nothing is claimed.
    pub implication_holds: Option<bool>,
}

/// Links the sector property of `h` with the sign of `d_t v(1)` for the unbumped disc.
pub fn transversality_certificate(
    model: &HypersurfaceModel,
    spec: &SectorSpec,
    grid: CircleGrid,
    thetas: &[f64],
    opts: &SolveOptions,
) -> Result<TransversalityCertificate> {
    let prop = sector_property(model, &spec.unsmoothed(), thetas, &[opts.r_shift])?;
    let disc = solve(model, spec, &BumpSpec::default(), grid, opts)?;
    let dv = disc.transversality()?;
    let holds = prop.holds();
    let strict = holds && !prop.strict_at.is_empty();
    let implication_holds = match (holds, strict) {
        (false, _) => None,
        (true, true) => Some(dv > 0.0),
        (true, false) => Some(dv >= 0.0),
    };
    Ok(TransversalityCertificate {
        dv_dt: dv,
        dv_dt_spectral: disc.dv_dt().ok().map(|d| d.value),
        h_max_on_sector: prop.max_h,
        strict,
        implication_holds,
    })
}

pub const SWEEP_RADII: [f64; 3] = [0.5, 0.75, 0.9];
pub const SWEEP_ANGLES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub offset: Complex64,
    pub r_shift: f64,
    /// `min (s - h(z, r))` over the interior circles; negative means the disc dips below the hypersurface.
    pub min_gap: Option<f64>,
    pub dv_dt: Option<f64>,
    pub dipped: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationSweep {
    pub cells: Vec<SweepCell>,
    pub dipped_count: usize,
    pub failed_count: usize,
    /// The dipped cells form one cluster under nearest-neighbour adjacency of the offsets.
    pub dipped_connected: bool,
}

fn sweep_cell(
    model: &HypersurfaceModel,
    spec: &SectorSpec,
    grid: CircleGrid,
    opts: &SolveOptions,
    offset: Complex64,
    r_shift: f64,
) -> SweepCell {
    let run = || -> Result<(f64, Option<f64>)> {
        let s = spec.translated(offset);
        let o = SolveOptions { r_shift, ..*opts };
        let disc = solve(model, &s, &BumpSpec::default(), grid, &o)?;
        let mut gap = f64::INFINITY;
        for &t in &SWEEP_RADII {
            for k in 0..SWEEP_ANGLES {
                let theta = -PI + 2.0 * PI * (k as f64 + 0.5) / SWEEP_ANGLES as f64;
                let w = disc.interior(t, theta)?;
                let z = s.sector_map(Complex64::from_polar(t, theta))?;
                gap = gap.min(w.im - model.value(z, w.re)?);
            }
        }
        Ok((gap, disc.transversality().ok()))
    };
    match run() {
        Ok((gap, dv)) => SweepCell {
            offset,
            r_shift,
            min_gap: Some(gap),
            dv_dt: dv,
            dipped: gap < 0.0,
            error: None,
        },
        Err(e) => SweepCell {
            offset,
            r_shift,
            min_gap: None,
            dv_dt: None,
            dipped: false,
            error: Some(e.to_string()),
        },
    }
}

/// Solves over every `(offset, r_shift)` cell; failures are recorded per cell.
pub fn translation_sweep(
    model: &HypersurfaceModel,
    spec: &SectorSpec,
    offsets: &[Complex64],
    r_shifts: &[f64],
    grid: CircleGrid,
    opts: &SolveOptions,
) -> Result<TranslationSweep> {
    if spec.nu.is_none() {
        return Err(Error::Parameter(
            "translation sweep needs a smoothed sector (nu)".into(),
        ));
    }
    let jobs: Vec<(Complex64, f64)> = offsets
        .iter()
        .flat_map(|&o| r_shifts.iter().map(move |&r| (o, r)))
        .collect();
    let cells: Vec<SweepCell> = jobs
        .par_iter()
        .map(|&(o, r)| sweep_cell(model, spec, grid, opts, o, r))
        .collect();
    let dipped: Vec<&SweepCell> = cells.iter().filter(|c| c.dipped).collect();
    Ok(TranslationSweep {
        dipped_count: dipped.len(),
        failed_count: cells.iter().filter(|c| c.error.is_some()).count(),
        dipped_connected: connected(&dipped),
        cells,
    })
}

/// Single-linkage connectivity with the smallest nonzero pairwise distance as the link length.
fn connected(cells: &[&SweepCell]) -> bool {
    if cells.len() <= 1 {
        return true;
    }
    let pos = |c: &SweepCell| (c.offset.re, c.offset.im, c.r_shift);
    let dist = |a: &SweepCell, b: &SweepCell| {
        let (p, q) = (pos(a), pos(b));
        ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2) + (p.2 - q.2).powi(2)).sqrt()
    };
    let mut link = f64::INFINITY;
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            let d = dist(cells[i], cells[j]);
            if d > 0.0 {
                link = link.min(d);
            }
        }
    }
    let mut seen = vec![false; cells.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..cells.len() {
            if !seen[j] && dist(cells[i], cells[j]) <= link * (1.0 + 1e-9) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialShape {
    pub ts: Vec<f64>,
    pub v: Vec<f64>,
    /// `F(|z(t)|)` along the same radius.
    pub f: Vec<f64>,
    pub nonpositive: bool,
    /// `min |v(t)| / F(|z(t)|)`, the best constant in `v <= -c F`.
    pub c_fit: f64,
}

/// `v` along the radius `tau = t` compared with `F(|z(t)|)`.
pub fn radial_shape(disc: &AttachedDisc, ts: &[f64]) -> Result<RadialShape> {
    let mut rep = RadialShape {
        ts: ts.to_vec(),
        v: Vec::new(),
        f: Vec::new(),
        nonpositive: true,
        c_fit: f64::INFINITY,
    };
    for &t in ts {
        let v = poisson_eval(&disc.v, t, 0.0)?;
        let z = disc.spec.sector_map(Complex64::new(t, 0.0))? - disc.spec.translate;
        let f = disc.spec.pair.f_real(z.norm())?;
        rep.nonpositive &= v <= 0.0;
        rep.c_fit = rep.c_fit.min(if f > 0.0 { v.abs() / f } else { 0.0 });
        rep.v.push(v);
        rep.f.push(f);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcpair::FunctionPair;
    use crate::hypersurface::HoloFn;

    fn grid(n: usize) -> CircleGrid {
        CircleGrid::new(n).unwrap()
    }

    fn power_spec(alpha: f64) -> SectorSpec {
        SectorSpec::new(FunctionPair::power(2).unwrap(), alpha).unwrap()
    }

    #[test]
    fn bump_validation() {
        assert!(BumpSpec::new(0.1, PI, 0.5).is_ok());
        assert!(BumpSpec::new(-0.1, PI, 0.5).is_err());
        assert!(BumpSpec::new(0.1, 0.9, 0.5).is_err());
        let b = BumpSpec::default();
        assert_eq!(b.profile(PI), 1.0);
        assert_eq!(b.profile(-PI + 0.2), 1.0);
        assert_eq!(b.profile(PI - 0.6), 0.0);
    }

    #[test]
    fn predicted_response_quadrature() {
        // Crude midpoint rule as an independent check.
        let b = BumpSpec::default();
        let n = 200_000;
        let h = 2.0 * b.width / n as f64;
        let mid: f64 = (0..n)
            .map(|i| {
                let t = b.center - b.width + (i as f64 + 0.5) * h;
                b.profile(t) / (1.0 - t.cos())
            })
            .sum::<f64>()
            * h
            / (2.0 * PI);
        assert!((b.predicted_response() / mid - 1.0).abs() < 1e-8);
    }

    #[test]
    fn zero_model_disc() {
        let d = solve(
            &HypersurfaceModel::Zero,
            &power_spec(1.5),
            &BumpSpec::default(),
            grid(256),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(d.u.max_abs(), 0.0);
        assert_eq!(d.v.max_abs(), 0.0);
        assert_eq!(d.dv_dt().unwrap().value, 0.0);
        assert_eq!(d.transversality().unwrap(), 0.0);
    }

    #[test]
    fn closed_form_re_f_disc() {
        let pair = FunctionPair::power(2).unwrap();
        let spec = power_spec(1.5);
        let g = grid(4096);
        let model = HypersurfaceModel::re_part(HoloFn::PairF { pair });
        let d = solve(
            &model,
            &spec,
            &BumpSpec::default(),
            g,
            &SolveOptions::default(),
        )
        .unwrap();
        let mut err = 0.0f64;
        for j in 0..g.n() {
            let w = Complex64::new(0.0, 1.0)
                * 0.1
                * crate::funcpair::one_minus_unit(g.signed_theta(j)).powf(1.5);
            err = err.max((Complex64::new(d.u.values()[j], d.v.values()[j]) - w).norm());
        }
        assert!(err < 1e-6, "{err}");
        assert!((d.closed_form_error(&HoloFn::PairF { pair }).unwrap() - err).abs() < 1e-12);
        assert!(d.defect < 1e-10);
        assert!(d.picard_iters <= 2);
        assert!(d.vertex_value().norm() < 1e-3);
        // Tangent at the vertex since alpha > 1; the series converges like n^{1 - alpha}.
        assert!(d.transversality().unwrap().abs() < 1e-12);
        assert!(d.dv_dt().unwrap().value.abs() < 5e-3);
    }

    #[test]
    fn vertex_quadrature_matches_series_on_smoothed_sectors() {
        let model = HypersurfaceModel::finite_type(2, 1, -2.0).unwrap();
        for nu in [4, 16, 64] {
            let d = solve(
                &model,
                &power_spec(1.2).smoothed(nu).unwrap(),
                &BumpSpec::default(),
                grid(4096),
                &SolveOptions::default(),
            )
            .unwrap();
            let (q, s) = (d.transversality().unwrap(), d.dv_dt().unwrap().value);
            assert!((q - s).abs() < 1e-9 * q.abs(), "nu={nu}: {q} vs {s}");
        }
    }

    #[test]
    fn negative_sector_points_down() {
        // h = |z|^4 - 2|z|^2 x^2 is negative on the power sector of opening 1.2.
        let model = HypersurfaceModel::finite_type(2, 1, -2.0).unwrap();
        let thetas = crate::hypersurface::symmetric_thetas(1e-6, 3.1, 30);
        let c = transversality_certificate(
            &model,
            &power_spec(1.2),
            grid(1024),
            &thetas,
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(c.h_max_on_sector < 0.0 && c.strict);
        assert!(c.dv_dt > 0.1, "{c:?}");
        assert_eq!(c.implication_holds, Some(true));
        let r = bump_response(
            &model,
            &power_spec(1.2),
            &BumpSpec::default(),
            None,
            grid(1024),
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(r.d2v_deta_dt > 0.0);
    }

    #[test]
    fn r_dependent_model_contracts() {
        let pair = FunctionPair::power(2).unwrap();
        let model = HypersurfaceModel::RePart {
            g: HoloFn::PairF { pair },
            r_coupling: 0.5,
        };
        let d = solve(
            &model,
            &power_spec(1.5),
            &BumpSpec::default(),
            grid(1024),
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(d.picard_iters > 2 && d.picard_iters < 50);
        assert!(d.contraction_factor() <= 0.5, "{:?}", d.changes);
        assert!(d.residual < 1e-10);
        assert!(d.attachment_error().unwrap() < 1e-14);
    }

    #[test]
    fn non_convergence_is_reported() {
        let pair = FunctionPair::power(2).unwrap();
        let model = HypersurfaceModel::RePart {
            g: HoloFn::PairF { pair },
            r_coupling: 1.0,
        };
        let opts = SolveOptions {
            max_iter: 2,
            ..SolveOptions::default()
        };
        let e = solve(
            &model,
            &power_spec(1.5),
            &BumpSpec::default(),
            grid(256),
            &opts,
        )
        .unwrap_err();
        assert!(matches!(e, Error::NonConvergence { iterations: 2, .. }));
        assert!(e.to_string().contains("reduce epsilon"));
    }

    #[test]
    fn bump_response_zero_model() {
        let r = bump_response(
            &HypersurfaceModel::Zero,
            &power_spec(1.5),
            &BumpSpec::default(),
            Some(1e-4),
            grid(4096),
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(r.relative_error() < 0.02, "{r:?}");
        let e = bump_response(
            &HypersurfaceModel::Zero,
            &power_spec(1.5),
            &BumpSpec::default(),
            Some(0.0),
            grid(256),
            &SolveOptions::default(),
        );
        assert!(matches!(e, Err(Error::Degenerate(_))));
    }

    #[test]
    fn sweeps_on_zero_model() {
        let spec = power_spec(1.5).smoothed(8).unwrap();
        let s = smoothing_sweep(
            &HypersurfaceModel::Zero,
            &spec,
            &[4, 8],
            grid(256),
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(s.entries.iter().all(|e| e.dv_dt == Some(0.0)));
        let offsets = [Complex64::new(0.0, 0.0), Complex64::new(0.01, 0.0)];
        let t = translation_sweep(
            &HypersurfaceModel::Zero,
            &spec,
            &offsets,
            &[0.0],
            grid(256),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(t.dipped_count, 0);
        assert!(t.cells.iter().all(|c| c.min_gap == Some(0.0)));
        assert!(translation_sweep(
            &HypersurfaceModel::Zero,
            &power_spec(1.5),
            &offsets,
            &[0.0],
            grid(256),
            &SolveOptions::default()
        )
        .is_err());
    }

    #[test]
    fn sweep_records_cell_failures() {
        let pair = FunctionPair::exp(1.0).unwrap();
        let model = HypersurfaceModel::re_part(HoloFn::PairF { pair });
        let spec = SectorSpec::new(pair, 1.5).unwrap().smoothed(8).unwrap();
        let offsets = [Complex64::new(0.0, 0.0), Complex64::new(-10.0, 0.0)];
        let t = translation_sweep(
            &model,
            &spec,
            &offsets,
            &[0.0],
            grid(256),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(t.failed_count, 1);
        assert!(t.cells[1].error.as_deref().unwrap().contains("domain"));
        assert!(t.cells[0].error.is_none());
    }

    #[test]
    fn certificate_zero_model() {
        let thetas = crate::hypersurface::symmetric_thetas(1e-4, 3.0, 10);
        let c = transversality_certificate(
            &HypersurfaceModel::Zero,
            &power_spec(1.5),
            grid(256),
            &thetas,
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(c.dv_dt, 0.0);
        assert_eq!(c.h_max_on_sector, 0.0);
        assert!(!c.strict);
        assert_eq!(c.implication_holds, Some(true));
    }

    #[test]
    fn disc_csv() {
        let d = solve(
            &HypersurfaceModel::Zero,
            &power_spec(1.5),
            &BumpSpec::default(),
            grid(8),
            &SolveOptions::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theta,x,y,u,v\n"));
        assert_eq!(text.lines().count(), 9);
    }
}
