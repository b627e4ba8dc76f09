//! Subharmonicity of rigid defining functions, the conical bump
//! `h~ = h - eta chi Re F` and the finite-type threshold oracles.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::funcpair::{log_spaced, FunctionPair, Order, Which};
use crate::hypersurface::{sector_property, symmetric_thetas, ConeCutoff, HypersurfaceModel};
use crate::sector::SectorSpec;

/// Relative tolerance for a stencil Laplacian to count as nonnegative.
pub const LAPLACIAN_TOL: f64 = 1e-8;
/// Tolerance used by the admissible-amplitude search.
pub const ETA_SEARCH_TOL: f64 = 1e-10;
/// Violations kept in a report; the count is always complete.
const MAX_LISTED: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Region {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::Parameter(format!(
                "empty region [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Region { x0, x1, y0, y1 })
    }

    fn distance_to_origin(&self) -> f64 {
        let dx = if self.x0 > 0.0 {
            self.x0
        } else if self.x1 < 0.0 {
            -self.x1
        } else {
            0.0
        };
        let dy = if self.y0 > 0.0 {
            self.y0
        } else if self.y1 < 0.0 {
            -self.y1
        } else {
            0.0
        };
        dx.hypot(dy)
    }

    /// Node `(i, j)` of an `n x n` grid.
    pub fn node(&self, n: usize, i: usize, j: usize) -> Complex64 {
        let (hx, hy) = self.steps(n);
        Complex64::new(self.x0 + i as f64 * hx, self.y0 + j as f64 * hy)
    }

    pub fn steps(&self, n: usize) -> (f64, f64) {
        (
            (self.x1 - self.x0) / (n - 1) as f64,
            (self.y1 - self.y0) / (n - 1) as f64,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplacianPoint {
    pub z: Complex64,
    pub laplacian: f64,
}

/// Sampled constants of the cut-off derivative bounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BumpBounds {
    /// `sup |d_z chi| |F| / |F'|`.
    pub first: f64,
    /// `sup |d_z d_zbar chi| |F|^2 / |F'|^2`.
    pub second: f64,
    /// `min d_z d_zbar h |F| / |F'|^2` on the annular cone.
    pub levi_margin: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeviReport {
    pub region: Region,
    pub n: usize,
    pub step: (f64, f64),
    pub r: f64,
    /// Minimum over interior nodes of the 5-point Laplacian `4 d_z d_zbar h`.
    pub min_laplacian: f64,
    pub argmin: Complex64,
    /// `max |Laplacian|` over interior nodes.
    pub scale: f64,
    pub violation_count: usize,
    pub violation_points: Vec<LaplacianPoint>,
    /// `max |stencil - closed form| / scale`.
    pub stencil_mismatch: f64,
    pub bound_constants: Option<BumpBounds>,
}

impl LeviReport {
    pub fn subharmonic(&self) -> bool {
        self.min_laplacian >= -LAPLACIAN_TOL * self.scale
    }
}

fn values_grid(
    model: &HypersurfaceModel,
    region: &Region,
    n: usize,
    r: f64,
) -> Result<Vec<Vec<f64>>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| model.value(region.node(n, i, j), r))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

/// 5-point Laplacian on an `n x n` grid over the region.
pub fn laplacian_grid(
    model: &HypersurfaceModel,
    region: &Region,
    n: usize,
    r: f64,
) -> Result<LeviReport> {
    if n < 3 {
        return Err(Error::Parameter(
            "Laplacian grid needs at least 3 nodes per side".into(),
        ));
    }
    let (hx, hy) = region.steps(n);
    if region.distance_to_origin() < 2.0 * hx.max(hy) {
        return Err(Error::Parameter(format!(
            "region must stay at least 2 grid steps away from z = 0 (distance {:e}, step {:e})",
            region.distance_to_origin(),
            hx.max(hy)
        )));
    }
    let v = values_grid(model, region, n, r)?;
    let rows: Vec<Vec<(Complex64, f64, f64)>> = (1..n - 1)
        .into_par_iter()
        .map(|i| {
            (1..n - 1)
                .map(|j| {
                    let z = region.node(n, i, j);
                    let lap = (v[i + 1][j] - 2.0 * v[i][j] + v[i - 1][j]) / (hx * hx)
                        + (v[i][j + 1] - 2.0 * v[i][j] + v[i][j - 1]) / (hy * hy);
                    Ok((z, lap, model.jet(z, r)?.laplacian()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let nodes: Vec<(Complex64, f64, f64)> = rows.into_iter().flatten().collect();
    let scale = nodes.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    let mut rep = LeviReport {
        region: *region,
        n,
        step: (hx, hy),
        r,
        min_laplacian: f64::INFINITY,
        argmin: Complex64::new(0.0, 0.0),
        scale,
        violation_count: 0,
        violation_points: Vec::new(),
        stencil_mismatch: 0.0,
        bound_constants: None,
    };
    let mut mismatch = 0.0f64;
    for &(z, lap, exact) in &nodes {
        if lap < rep.min_laplacian {
            rep.min_laplacian = lap;
            rep.argmin = z;
        }
        if lap < -LAPLACIAN_TOL * scale {
            rep.violation_count += 1;
            if rep.violation_points.len() < MAX_LISTED {
                rep.violation_points
                    .push(LaplacianPoint { z, laplacian: lap });
            }
        }
        mismatch = mismatch.max((lap - exact).abs());
    }
    rep.stencil_mismatch = if scale > 0.0 {
        mismatch / scale
    } else {
        mismatch
    };
    Ok(rep)
}

/// Radii `rho = |F|` of the vertex neighborhood sampled by the cone checks.
pub const CONE_RHO: (f64, f64) = (1e-30, 1e-6);

/// `z = F*(rho e^{i phi})` for `rho` log-spaced in `[rho_min, rho_max]` and `|phi|` in `(phi_lo, phi_hi)`.
pub fn cone_samples(
    pair: &FunctionPair,
    phi_lo: f64,
    phi_hi: f64,
    rho: (f64, f64),
    n_rho: usize,
    n_phi: usize,
) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(2 * n_rho * n_phi);
    for &rr in &log_spaced(rho.0, rho.1, n_rho) {
        for k in 0..n_phi {
            let phi = phi_lo + (phi_hi - phi_lo) * (k as f64 + 0.5) / n_phi as f64;
            for s in [-1.0, 1.0] {
                let log_w = Complex64::new(rr.ln(), s * phi);
                out.push(pair.fstar_from_log(log_w)?);
            }
        }
    }
    Ok(out)
}

/// Samples strictly inside the annular cone `alpha pi/2 < |arg F| < alpha1 pi/2` near the vertex.
pub fn annular_cone_samples(
    pair: &FunctionPair,
    alpha: f64,
    alpha1: f64,
) -> Result<Vec<Complex64>> {
    cone_samples(pair, alpha * PI / 2.0, alpha1 * PI / 2.0, CONE_RHO, 40, 12)
}

/// Samples of `S_alpha`, `|arg F| < alpha pi/2`, near the vertex.
pub fn inner_cone_samples(pair: &FunctionPair, alpha: f64) -> Result<Vec<Complex64>> {
    cone_samples(pair, 0.0, alpha * PI / 2.0, CONE_RHO, 40, 12)
}

/// `min Re F / |F|` over the samples.
pub fn check_cone_comparability(pair: &FunctionPair, samples: &[Complex64]) -> Result<f64> {
    let mut m = f64::INFINITY;
    for &z in samples {
        let f = pair.eval(Which::F, Order::Value, z)?;
        if f.norm() > 0.0 {
            m = m.min(f.re / f.norm());
        }
    }
    Ok(m)
}

/// `min d_z d_zbar h |F| / |F'|^2` over the samples.
pub fn check_levi_margin(
    model: &HypersurfaceModel,
    pair: &FunctionPair,
    samples: &[Complex64],
    r: f64,
) -> Result<f64> {
    let mut m = f64::INFINITY;
    for &z in samples {
        let f = pair.eval(Which::F, Order::Value, z)?;
        let df = pair.eval(Which::F, Order::First, z)?;
        if df.norm() == 0.0 {
            continue;
        }
        m = m.min(model.jet(z, r)?.dzdzbar * f.norm() / df.norm_sqr());
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeBumpSpec {
    pub cone: ConeCutoff,
    pub eta: f64,
}

impl ConeBumpSpec {
    pub fn new(pair: FunctionPair, alpha: f64, alpha1: f64, eta: f64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::Parameter(format!(
                "bump amplitude must be >= 0, got {eta}"
            )));
        }
        Ok(ConeBumpSpec {
            cone: ConeCutoff::new(pair, alpha, alpha1)?,
            eta,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuiltBump {
    pub model: HypersurfaceModel,
    pub bounds: BumpBounds,
}

/// Sampled `(first, second)` cut-off bound constants on the samples.
pub fn cutoff_bounds(cone: &ConeCutoff, samples: &[Complex64]) -> Result<(f64, f64)> {
    let (mut b1, mut b2) = (0.0f64, 0.0f64);
    for &z in samples {
        let f = cone.pair.eval(Which::F, Order::Value, z)?;
        let df = cone.pair.eval(Which::F, Order::First, z)?;
        if df.norm() == 0.0 || f.norm() == 0.0 {
            continue;
        }
        let chi = cone.jet(z)?;
        let q = f.norm() / df.norm();
        b1 = b1.max(chi.dz.norm() * q);
        b2 = b2.max(chi.dzdzbar.abs() * q * q);
    }
    Ok((b1, b2))
}

/// `h - eta chi Re F`, after checking the Levi condition on the annular cone.
pub fn build_bump(model: &HypersurfaceModel, spec: &ConeBumpSpec, r: f64) -> Result<BuiltBump> {
    if spec.eta == 0.0 {
        return Ok(BuiltBump {
            model: model.clone(),
            bounds: BumpBounds::default(),
        });
    }
    let cone = &spec.cone;
    let samples = annular_cone_samples(&cone.pair, cone.alpha, cone.alpha1)?;
    let c22 = check_levi_margin(model, &cone.pair, &samples, r)?;
    if !(c22 > 0.0) {
        return Err(Error::Parameter(format!(
            "Levi margin fails on the annular cone: min d_z d_zbar h |F|/|F'|^2 = {c22:e}"
        )));
    }
    let (first, second) = cutoff_bounds(cone, &samples)?;
    Ok(BuiltBump {
        model: model.clone().bumped(*cone, spec.eta)?,
        bounds: BumpBounds {
            first,
            second,
            levi_margin: c22,
            samples: samples.len(),
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// `max (h~ - h)` over all samples; the bump predicts `<= 0`.
    pub max_excess: f64,
    /// `min (h - h~)` over the `S_alpha` samples; the bump predicts `> 0`.
    pub min_gap_on_sector: f64,
    pub value_at_origin: f64,
    pub samples: usize,
}

/// `h~ <= h` everywhere sampled, `h~ < h` on `S_alpha`, `h~(0) = 0`.
pub fn compare_bump(
    base: &HypersurfaceModel,
    bumped: &HypersurfaceModel,
    everywhere: &[Complex64],
    on_sector: &[Complex64],
    r: f64,
) -> Result<Comparison> {
    let mut c = Comparison {
        max_excess: f64::NEG_INFINITY,
        min_gap_on_sector: f64::INFINITY,
        value_at_origin: bumped.value(Complex64::new(0.0, 0.0), r)?,
        samples: 0,
    };
    for &z in everywhere.iter().chain(on_sector) {
        c.max_excess = c.max_excess.max(bumped.value(z, r)? - base.value(z, r)?);
        c.samples += 1;
    }
    for &z in on_sector {
        c.min_gap_on_sector = c
            .min_gap_on_sector
            .min(base.value(z, r)? - bumped.value(z, r)?);
    }
    Ok(c)
}

/// `n x n` samples of the region.
pub fn region_samples(region: &Region, n: usize) -> Vec<Complex64> {
    (0..n)
        .flat_map(|i| (0..n).map(move |j| region.node(n, i, j)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaSearch {
    pub eta_star: f64,
    /// `max |Laplacian h|` over the grid, the reference scale of the criterion.
    pub scale: f64,
    pub evaluations: usize,
    /// The search stopped at the upper cap without finding a failing amplitude.
    pub capped: bool,
}

const ETA_MIN: f64 = 1e-12;
const ETA_CAP: f64 = 1e12;

/// Largest `eta` with `min Laplacian(h - eta chi Re F) >= -1e-10 scale` on the grid,
/// to relative precision `1e-3`; `0` when even `eta = 1e-12` fails.
///
/// The Laplacians come from the closed-form jets at the grid nodes. The 5-point
/// stencil error of the harmonic term `Re F` would otherwise cap `eta` at a
/// grid-dependent level.
pub fn max_admissible_eta(
    model: &HypersurfaceModel,
    cone: &ConeCutoff,
    region: &Region,
    n: usize,
    r: f64,
) -> Result<EtaSearch> {
    let (hx, hy) = region.steps(n);
    if region.distance_to_origin() < 2.0 * hx.max(hy) {
        return Err(Error::Parameter(
            "region must stay at least 2 grid steps away from z = 0".into(),
        ));
    }
    let unit = model.clone().bumped(*cone, 1.0)?;
    // Laplacian of h and of chi Re F at interior nodes; h~ is affine in eta.
    let nodes: Vec<(f64, f64)> = (1..n - 1)
        .into_par_iter()
        .map(|i| {
            (1..n - 1)
                .map(|j| {
                    let z = region.node(n, i, j);
                    let base = model.jet(z, r)?.laplacian();
                    Ok((base, base - unit.jet(z, r)?.laplacian()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let scale = nodes.iter().fold(0.0f64, |m, p| m.max(p.0.abs()));
    let mut evaluations = 0;
    let mut ok = |eta: f64| -> Result<bool> {
        evaluations += 1;
        let min = nodes
            .iter()
            .fold(f64::INFINITY, |m, &(h, b)| m.min(h - eta * b));
        Ok(min >= -ETA_SEARCH_TOL * scale)
    };
    if !ok(ETA_MIN)? {
        return Ok(EtaSearch {
            eta_star: 0.0,
            scale,
            evaluations: 1,
            capped: false,
        });
    }
    let (mut lo, mut hi);
    if ok(1.0)? {
        lo = 1.0;
        hi = 2.0;
        while ok(hi)? {
            lo = hi;
            hi *= 2.0;
            if hi > ETA_CAP {
                return Ok(EtaSearch {
                    eta_star: lo,
                    scale,
                    evaluations,
                    capped: true,
                });
            }
        }
    } else {
        hi = 1.0;
        lo = 0.5;
        while !ok(lo)? {
            hi = lo;
            lo /= 2.0;
            if lo < ETA_MIN {
                lo = ETA_MIN;
                break;
            }
        }
    }
    while hi - lo > 1e-3 * lo {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EtaSearch {
        eta_star: lo,
        scale,
        evaluations,
        capped: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub m: u32,
    pub p: u32,
    pub alpha: f64,
    /// Sector property `sup_{S_alpha} h < 0` holds exactly for `c < c_sector`.
    pub c_sector: f64,
    /// `h` is subharmonic exactly for `c >= c_subharmonic`.
    pub c_subharmonic: f64,
    pub reference_c_sector: Option<f64>,
    pub reference_c_subharmonic: Option<f64>,
}

impl Thresholds {
    /// Neither the signed value nor its modulus agrees with the quoted one to `1e-3`.
    pub fn mismatch(derived: f64, quoted: Option<f64>) -> bool {
        match quoted {
            None => false,
            Some(p) => (derived - p).abs() > 1e-3 && (derived.abs() - p).abs() > 1e-3,
        }
    }

    pub fn sector_mismatch(&self) -> bool {
        Self::mismatch(self.c_sector, self.reference_c_sector)
    }

    pub fn subharmonic_mismatch(&self) -> bool {
        Self::mismatch(self.c_subharmonic, self.reference_c_subharmonic)
    }
}

const BISECTION_TOL: f64 = 1e-9;

fn bisect(mut yes: f64, mut no: f64, mut pred: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    while (yes - no).abs() > BISECTION_TOL {
        let mid = 0.5 * (yes + no);
        if pred(mid)? {
            yes = mid;
        } else {
            no = mid;
        }
    }
    Ok(0.5 * (yes + no))
}

/// `min Laplacian h` over a punctured-disc polar grid, from the closed form.
pub fn finite_type_min_laplacian(m: u32, p: u32, c: f64) -> Result<f64> {
    let model = HypersurfaceModel::finite_type(m, p, c)?;
    let mut min = f64::INFINITY;
    for &rho in &[0.25, 0.5, 1.0] {
        for k in 0..1440 {
            let z = Complex64::from_polar(rho, 2.0 * PI * k as f64 / 1440.0);
            // Homogeneity: normalize by rho^{2m-2} so every circle weighs the same.
            min = min.min(model.jet(z, 0.0)?.laplacian() / rho.powi(2 * m as i32 - 2));
        }
    }
    Ok(min)
}

/// Whether `sup h < 0` on samples of the power sector `S_alpha` with exponent `2m`.
pub fn finite_type_sector_negative(m: u32, p: u32, c: f64, alpha: f64) -> Result<bool> {
    let model = HypersurfaceModel::finite_type(m, p, c)?;
    let spec = SectorSpec::new(FunctionPair::power(m)?, alpha)?;
    let thetas = symmetric_thetas(1e-7, PI, 60);
    Ok(sector_property(&model, &spec, &thetas, &[0.0])?.max_h < 0.0)
}

/// Critical values of `c` for the sector property and for subharmonicity of
/// `|z|^{2m} + c |z|^{2m-2p} x^{2p}`, by bisection on both predicates.
pub fn finite_type_thresholds(m: u32, p: u32, alpha: f64) -> Result<Thresholds> {
    HypersurfaceModel::finite_type(m, p, 0.0)?;
    const FAR: f64 = -1e3;
    if !(finite_type_min_laplacian(m, p, 0.0)? >= 0.0)
        || finite_type_min_laplacian(m, p, FAR)? >= 0.0
    {
        return Err(Error::Degenerate(
            "subharmonicity does not change sign on [-1e3, 0]".into(),
        ));
    }
    let c_subharmonic = bisect(0.0, FAR, |c| Ok(finite_type_min_laplacian(m, p, c)? >= 0.0))?;
    if finite_type_sector_negative(m, p, 0.0, alpha)?
        || !finite_type_sector_negative(m, p, FAR, alpha)?
    {
        return Err(Error::Degenerate(
            "sector property does not change on [-1e3, 0]".into(),
        ));
    }
    let c_sector = bisect(FAR, 0.0, |c| finite_type_sector_negative(m, p, c, alpha))?;
    let (reference_c_sector, reference_c_subharmonic) = if (m, p) == (2, 1) {
        (Some(2f64.sqrt()), Some(4.0 / 3.0))
    } else {
        (
            Some(1.0 / (2.0 * p as f64 * PI / (4.0 * m as f64)).cos()),
            None,
        )
    };
    Ok(Thresholds {
        m,
        p,
        alpha,
        c_sector,
        c_subharmonic,
        reference_c_sector,
        reference_c_subharmonic,
    })
}

/// CSV with columns `m, p, alpha, c_sector, c_subharmonic, reference_c_sector, reference_c_subharmonic`.
pub fn write_thresholds_csv(rows: &[Thresholds], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Parameter(format!("csv: {e}"));
    w.write_record([
        "m",
        "p",
        "alpha",
        "c_sector",
        "c_subharmonic",
        "reference_c_sector",
        "reference_c_subharmonic",
    ])
    .map_err(io)?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.10}")).unwrap_or_default();
    for t in rows {
        w.write_record([
            t.m.to_string(),
            t.p.to_string(),
            format!("{}", t.alpha),
            format!("{:.10}", t.c_sector),
            format!("{:.10}", t.c_subharmonic),
            opt(t.reference_c_sector),
            opt(t.reference_c_subharmonic),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parameter(format!("csv: {e}")))
}
