use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use cuspdisc::bishop::{
    bump_response, smoothing_sweep, solve, translation_sweep, BumpSpec, SolveOptions,
};
use cuspdisc::circle::{hilbert_t1, BoundarySamples, CircleGrid};
use cuspdisc::funcpair::{
    check_increment_condition, check_monotonicity, default_increment_grids, log_spaced,
    FunctionPair, PairKind,
};
use cuspdisc::hypersurface::{
    check_growth_hypotheses, sector_property, symmetric_thetas, ConeCutoff, GrowthReport, HoloFn,
    HypersurfaceModel, INTERIOR_RADII,
};
use cuspdisc::levi::{
    annular_cone_samples, build_bump, check_levi_margin, compare_bump, finite_type_thresholds,
    inner_cone_samples, laplacian_grid, max_admissible_eta, region_samples, write_thresholds_csv,
    ConeBumpSpec, Region,
};
use cuspdisc::sector::{asymptotic_fit, doubleexp_profile_check, DoubleExpProfile, SectorSpec};

use crate::config::{Experiment, ExperimentConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Compute(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Compute(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Compute(m) => write!(f, "computation failed: {m}"),
        }
    }
}

fn cfg_err(e: impl std::fmt::Display) -> RunError {
    RunError::Config(e.to_string())
}

fn compute_err(e: impl std::fmt::Display) -> RunError {
    RunError::Compute(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Invariant {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> Invariant {
    Invariant {
        name: name.to_string(),
        pass,
        detail,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub version: String,
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub results: Value,
    pub invariants: Vec<Invariant>,
    /// Tabular outputs written next to the report.
    pub files: Vec<String>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.invariants.iter().all(|i| i.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Table to be written as CSV.
struct Table {
    default_name: &'static str,
    bytes: Vec<u8>,
}

/// Runs the experiment, writes the JSON report and any CSV table, and returns the report.
pub fn run(config: &ExperimentConfig) -> Result<Report, RunError> {
    let (report, table) = execute(config)?;
    let output = PathBuf::from(report.config.output.clone().unwrap_or_default());
    let mut report = report;
    if let Some(t) = table {
        let csv_path = match &report.config.csv {
            Some(p) => PathBuf::from(p),
            None => output.with_file_name(t.default_name),
        };
        write_atomic(&csv_path, &t.bytes)
            .map_err(|e| compute_err(format!("{}: {e}", csv_path.display())))?;
        report.files.push(csv_path.display().to_string());
    }
    write_atomic(&output, report.to_json().as_bytes())
        .map_err(|e| compute_err(format!("{}: {e}", output.display())))?;
    Ok(report)
}

/// Runs the experiment without touching the file system.
pub fn evaluate(config: &ExperimentConfig) -> Result<Report, RunError> {
    execute(config).map(|(r, _)| r)
}

fn execute(config: &ExperimentConfig) -> Result<(Report, Option<Table>), RunError> {
    let mut c = config.clone();
    c.output
        .get_or_insert_with(|| format!("{}.json", c.experiment.name()));
    let (results, invariants, table) = match c.experiment {
        Experiment::HilbertSelftest => hilbert_selftest(&mut c)?,
        Experiment::SectorProfile => sector_profile(&mut c)?,
        Experiment::SolveDisc => solve_disc(&mut c)?,
        Experiment::BumpResponse => bump_response_exp(&mut c)?,
        Experiment::SmoothingSweep => smoothing(&mut c)?,
        Experiment::TranslationSweep => translation(&mut c)?,
        Experiment::LeviCheck => levi_check(&mut c)?,
        Experiment::ConeBump => cone_bump(&mut c)?,
        Experiment::Thresholds => thresholds(&mut c)?,
        Experiment::HypothesisCheck => hypothesis_check(&mut c)?,
    };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: c.experiment,
        config: c,
        results,
        invariants,
        files: Vec::new(),
    };
    Ok((report, table))
}

type Outcome = (Value, Vec<Invariant>, Option<Table>);

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable result")
}

fn grid(c: &mut ExperimentConfig, default: usize) -> Result<CircleGrid, RunError> {
    CircleGrid::new(*c.n.get_or_insert(default)).map_err(cfg_err)
}

/// Model from the config, with per-model parameter defaults.
fn model(c: &mut ExperimentConfig, default: &str) -> Result<HypersurfaceModel, RunError> {
    let name = c.model.get_or_insert_with(|| default.to_string()).clone();
    let m = match name.as_str() {
        "zero" => HypersurfaceModel::Zero,
        "finite-type" => {
            HypersurfaceModel::finite_type(*c.m.get_or_insert(2), *c.p.get_or_insert(1), *c.c.get_or_insert(-2.0))
        }
        .map_err(cfg_err)?,
        "inf-single-exp" => HypersurfaceModel::inf_single_exp(
            *c.a.get_or_insert(1.0),
            *c.b.get_or_insert(1.5),
            *c.alpha_cut.get_or_insert(1.2),
        )
        .map_err(cfg_err)?,
        "inf-double-exp" => HypersurfaceModel::inf_double_exp(
            *c.a.get_or_insert(1.0),
            *c.b.get_or_insert(1.5),
            *c.alpha_cut.get_or_insert(1.2),
        )
        .map_err(cfg_err)?,
        "tube-failure" => {
            HypersurfaceModel::tube_failure(*c.a.get_or_insert(0.4), *c.b.get_or_insert(0.8)).map_err(cfg_err)?
        }
        "re-part" => {
            let pair = pair(c, "power")?;
            let g = match c.g.get_or_insert_with(|| "f".into()).as_str() {
                "f" => HoloFn::PairF { pair },
                "f2" => HoloFn::PairFSquared { pair },
                "z" => HoloFn::Monomial { coef: pair.epsilon, power: 1 },
                other => return Err(cfg_err(format!("unknown g {other:?}; expected f, f2 or z"))),
            };
            HypersurfaceModel::RePart { g, r_coupling: *c.r_coupling.get_or_insert(0.0) }
        }
        other => {
            return Err(cfg_err(format!(
                "unknown model {other:?}; expected zero, finite-type, inf-single-exp, inf-double-exp, tube-failure or re-part"
            )))
        }
    };
    Ok(m)
}

/// Pair from the config; the default kind and parameter follow the model.
fn pair(c: &mut ExperimentConfig, default: &str) -> Result<FunctionPair, RunError> {
    let (kind_default, param_default) = match c.model.as_deref() {
        Some("finite-type") => ("power", c.m.unwrap_or(2) as f64),
        Some("inf-single-exp") | Some("tube-failure") => ("exp", c.b.unwrap_or(1.5)),
        Some("inf-double-exp") => ("double-exp", c.b.unwrap_or(1.5)),
        _ => (default, if default == "power" { 2.0 } else { 1.0 }),
    };
    let kind = c.pair.get_or_insert_with(|| kind_default.into()).clone();
    let param = *c.pair_param.get_or_insert(param_default);
    let eps = *c.epsilon.get_or_insert(cuspdisc::funcpair::DEFAULT_EPSILON);
    let kind = match kind.as_str() {
        "power" => {
            if param.fract() != 0.0 || param < 1.0 {
                return Err(cfg_err(format!(
                    "power pair needs an integer m >= 1, got {param}"
                )));
            }
            PairKind::Power { m: param as u32 }
        }
        "exp" => PairKind::Exp { a: param },
        "double-exp" => PairKind::DoubleExp { a: param },
        other => {
            return Err(cfg_err(format!(
                "unknown pair {other:?}; expected power, exp or double-exp"
            )))
        }
    };
    FunctionPair::new(kind, eps).map_err(cfg_err)
}

fn sector(
    c: &mut ExperimentConfig,
    pair: FunctionPair,
    alpha: f64,
) -> Result<SectorSpec, RunError> {
    let spec = SectorSpec::new(pair, *c.alpha.get_or_insert(alpha)).map_err(cfg_err)?;
    match c.nu {
        Some(nu) => spec.smoothed(nu).map_err(cfg_err),
        None => Ok(spec),
    }
}

fn solve_options(c: &mut ExperimentConfig) -> SolveOptions {
    let d = SolveOptions::default();
    SolveOptions {
        tol: *c.tol.get_or_insert(d.tol),
        max_iter: *c.max_iter.get_or_insert(d.max_iter),
        damping: *c.damping.get_or_insert(d.damping),
        r_shift: *c.r_shift.get_or_insert(d.r_shift),
    }
}

fn bump(c: &mut ExperimentConfig, eta: f64) -> Result<BumpSpec, RunError> {
    let d = BumpSpec::default();
    BumpSpec::new(
        eta,
        *c.bump_center.get_or_insert(d.center),
        *c.bump_width.get_or_insert(d.width),
    )
    .map_err(cfg_err)
}

fn region(c: &mut ExperimentConfig, d: [f64; 4]) -> Result<Region, RunError> {
    Region::new(
        *c.x0.get_or_insert(d[0]),
        *c.x1.get_or_insert(d[1]),
        *c.y0.get_or_insert(d[2]),
        *c.y1.get_or_insert(d[3]),
    )
    .map_err(cfg_err)
}

fn hilbert_selftest(c: &mut ExperimentConfig) -> Result<Outcome, RunError> {
    let g = grid(c, 4096)?;
    let degree = g.n() / 4;
    let n = g.n();
    // k theta_j reduced exactly: theta_j = pi (2j + 1) / n.
    let mode = |k: usize, f: fn(f64) -> f64, shift: f64| {
        let v = (0..n)
            .map(|j| f(PI * ((k * (2 * j + 1)) % (2 * n)) as f64 / n as f64) + shift)
            .collect();
        BoundarySamples::from_values(g, v)
    };
    let neg_sin = |x: f64| -x.sin();
    let mut max_error = 0.0f64;
    for k in 1..=degree {
        let t = hilbert_t1(&mode(k, f64::cos, 0.0));
        max_error = max_error.max(t.sup_distance(&mode(k, neg_sin, 0.0)));
        let t = hilbert_t1(&mode(k, f64::sin, 0.0));
        max_error = max_error.max(t.sup_distance(&mode(k, f64::cos, -1.0)));
    }
    // T1 T1 f = f(0) - f for a trigonometric polynomial without the Nyquist mode.
    let poly = |th: f64| -> f64 {
        (1..=degree)
            .map(|k| ((k as f64) * th).cos() / k as f64 + ((k as f64) * th).sin() / (k * k) as f64)
            .sum::<f64>()
            + 0.25
    };
    let f = g.sample(poly);
    let twice = hilbert_t1(&hilbert_t1(&f));
    let f0 = poly(0.0);
    let involution_error = twice.sup_distance(&f.map(|v| f0 - v));
    let inv = vec![
        check(
            "trig closed forms within 1e-12",
            max_error < 1e-12,
            format!("{max_error:e}"),
        ),
        check(
            "T1 applied twice within 1e-10",
            involution_error < 1e-10,
            format!("{involution_error:e}"),
        ),
    ];
    Ok((
        json!({ "n": g.n(), "degree": degree, "max_error": max_error, "involution_error": involution_error }),
        inv,
        None,
    ))
}

fn sector_profile(c: &mut ExperimentConfig) -> Result<Outcome, RunError> {
    let pair = pair(c, "power")?;
    let spec = sector(c, pair, 1.5)?;
    let theta_min = *c.theta_min.get_or_insert(1e-12);
    let theta_max = *c.theta_max.get_or_insert(PI);
    let samples = *c.samples.get_or_insert(400);
    let trace = spec
        .boundary_trace(theta_min, theta_max, samples)
        .map_err(cfg_err)?;
    let x_lo = *c.x_lo.get_or_insert(0.0);
    let x_hi = *c.x_hi.get_or_insert(f64::MAX);
    let window = trace.restrict_x(x_lo, x_hi);
    let mut inv = Vec::new();
    let mut results = json!({
        "points": trace.len(),
        "underflow_points": trace.underflow.iter().filter(|u| **u).count(),
        "window_points": window.len(),
    });
    match asymptotic_fit(&window) {
        Ok(fit) => results["fit"] = to_value(&fit),
        Err(e) => results["fit_error"] = json!(e.to_string()),
    }
    match pair.kind {
        PairKind::Power { m } if spec.nu.is_none() => {
            let exact = (spec.alpha * PI / (4.0 * m as f64)).tan();
            let p = trace.points[0];
            let slope = (p.im / p.re).abs();
            let rel = (slope - exact).abs() / exact;
            results["cone_slope"] =
                json!({ "exact": exact, "at_smallest_theta": slope, "relative_error": rel });
            inv.push(check(
                "cone slope tan(alpha pi/4m) within 1%",
                rel < 0.01,
                format!("{rel:e}"),
            ));
        }
        PairKind::Exp { .. } => {
            let ok = results["fit"]["r_squared"]
                .as_f64()
                .is_some_and(|r| r > 0.99);
            inv.push(check(
                "power-law fit r^2 > 0.99",
                ok,
                results["fit"].to_string(),
            ));
        }
        PairKind::DoubleExp { .. } => {
            let lead = doubleexp_profile_check(&spec, &window, DoubleExpProfile::LeadingOrder)
                .map_err(compute_err)?;
            let stated = doubleexp_profile_check(&spec, &window, DoubleExpProfile::Stated)
                .map_err(compute_err)?;
            inv.push(check(
                "leading-order profile within a factor 3",
                lead.spread() < 3.0,
                format!("{}", lead.spread()),
            ));
            results["profile_leading_order"] = to_value(&lead);
            results["profile_stated"] = to_value(&stated);
        }
        _ => {}
    }
    let mut bytes = Vec::new();
    trace.write_csv(&mut bytes).map_err(compute_err)?;
    Ok((
        results,
        inv,
        Some(Table {
            default_name: "sector-profile.csv",
            bytes,
        }),
    ))
}

fn solve_disc(c: &mut ExperimentConfig) -> Result<Outcome, RunError> {
    let m = model(c, "re-part")?;
    let pair = pair(c, "power")?;
    let spec = sector(c, pair, 1.5)?;
    let g = grid(c, 4096)?;
    let opts = solve_options(c);
    let eta = *c.eta.get_or_insert(0.0);
    let bump = bump(c, eta)?;
    let disc = solve(&m, &spec, &bump, g, &opts).map_err(compute_err)?;
    let dv = disc.transversality().ok();
    let spectral = disc.dv_dt().ok().map(|d| d.value);
    let attachment = match &m {
        HypersurfaceModel::RePart { g, r_coupling } if *r_coupling == 0.0 && eta == 0.0 => {
            disc.closed_form_error(g).ok()
        }
        _ => None,
    };
    let mut inv = vec![
        check(
            "analyticity defect < 1e-10",
            disc.defect < 1e-10,
            format!("{:e}", disc.defect),
        ),
        check(
            "Picard iterations <= 50",
            disc.picard_iters <= 50,
            format!("{}", disc.picard_iters),
        ),
    ];
    if let Some(e) = attachment {
        inv.push(check(
            "closed-form disc within 1e-8",
            e < 1e-8,
            format!("{e:e}"),
        ));
    }
    let results = json!({
        "picard_iters": disc.picard_iters,
        "residual": disc.residual,
        "defect": disc.defect,
        "contraction_factor": disc.contraction_factor(),
        "dv_dt": dv,
        "dv_dt_spectral": spectral,
        "dv_dt_spectral_error": disc.dv_dt_at_1.as_ref().err().map(|e| e.to_string()),
        "closed_form_error": attachment,
        "attachment_error": disc.attachment_error().ok(),
        "vertex": [disc.vertex_value().re, disc.vertex_value().im],
    });
    let mut bytes = Vec::new();
    disc.write_csv(&mut bytes).map_err(compute_err)?;
    Ok((
        results,
        inv,
        Some(Table {
            default_name: "solve-disc.csv",
            bytes,
        }),
    ))
}

fn bump_response_exp(c: &mut ExperimentConfig) -> Result<Outcome, RunError> {
    let m = model(c, "zero")?;
    let pair = pair(c, "power")?;
    let spec = sector(c, pair, 1.5)?;
    let g = grid(c, 1024)?;
    let opts = solve_options(c);
    let bump = bump(c, 0.0)?;
    let r = bump_response(&m, &spec, &bump, c.delta, g, &opts).map_err(compute_err)?;
    let inv = vec![if m == HypersurfaceModel::Zero {
        check(
            "response within 2% of the quadrature",
            r.relative_error() < 0.02,
            format!("{:e}", r.relative_error()),
        )
    } else {
        check(
            "response positive",
            r.d2v_deta_dt > 0.0,
            format!("{:e}", r.d2v_deta_dt),
        )
    }];
    let mut v = to_value(&r);
    v["relative_error"] = json!(r.relative_error());
    Ok((v, inv, None))
}

fn smoothing(c: &mut ExperimentConfig) -> Result<Outcome, RunError> {
    let m = model(c, "inf-single-exp")?;
    let pair = pair(c, "exp")?;
    c.nu = None;
    let spec = sector(c, pair, 1.2)?;
    let g = grid(c, 4096)?;
    let opts = solve_options(c);
    let nus = c.nus.get_or_insert_with(|| vec![4, 8, 16, 32, 64]).clone();
    let s = smoothing_sweep(&m, &spec, &nus, g, &opts).map_err(compute_err)?;
    let inv = vec![
        check(
            "monotone approach to the unsmoothed limit",
            s.monotone,
            format!("{:?}", s.distances),
        ),
        check(
            "unsmoothed d_t v(1) > 0",
            s.limit.dv_dt.is_some_and(|v| v > 0.0),
            format!("{:?}", s.limit.dv_dt),
        ),
    ];
    Ok((to_value(&s), inv, None))
}

fn translation(c: &mut ExperimentConfig) -> Result<Outcome, RunError> {
    let m = model(c, "inf-single-exp")?;
    let pair = pair(c, "exp")?;
    c.nu.get_or_insert(32);
    let spec = sector(c, pair, 1.2)?;
    let g = grid(c, 1024)?;
    let opts = solve_options(c);
    let step = *c.offset_step.get_or_insert(0.005);
    let count = *c.offset_count.get_or_insert(5);
    let r_shifts = c.r_shifts.get_or_insert_with(|| vec![0.0]).clone();
    if count.is_multiple_of(2) {
        return Err(cfg_err(format!("offset_count must be odd, got {count}")));
    }
    let half = (count / 2) as i64;
    let offsets: Vec<Complex64> = (-half..=half)
        .flat_map(|i| (-half..=half).map(move |j| Complex64::new(i as f64 * step, j as f64 * step)))
        .collect();
    let s = translation_sweep(&m, &spec, &offsets, &r_shifts, g, &opts).map_err(compute_err)?;
    let unshifted = s
        .cells
        .iter()
        .find(|cell| cell.offset == Complex64::new(0.0, 0.0));
    let inv = vec![
        check(
            "unshifted disc dips",
            unshifted.is_some_and(|c| c.dipped),
            format!("{:?}", unshifted.and_then(|c| c.min_gap)),
        ),
        check(
            "dipped cells connected",
            s.dipped_connected,
            format!("{} of {}", s.dipped_count, s.cells.len()),
        ),
    ];
    Ok((to_value(&s), inv, None))
}

const VERTEX_REGION: [f64; 4] = [0.005, 0.015, -0.002, 0.002];

fn levi_check(c: &mut ExperimentConfig) -> Result<Outcome, RunError> {
    let m = model(c, "tube-failure")?;
    let reg = region(c, VERTEX_REGION)?;
    let n = *c.n.get_or_insert(400);
    let r = *c.r.get_or_insert(0.0);
    let rep = laplacian_grid(&m, &reg, n, r).map_err(cfg_err)?;
    let inv = vec![
        check(
            "min Laplacian >= -1e-8 scale",
            rep.subharmonic(),
            format!("{:e} (scale {:e})", rep.min_laplacian, rep.scale),
        ),
        check(
            "stencil matches closed form to 1%",
            rep.stencil_mismatch < 0.01,
            format!("{:e}", rep.stencil_mismatch),
        ),
    ];
    Ok((to_value(&rep), inv, None))
}

fn cone_bump(c: &mut ExperimentConfig) -> Result<Outcome, RunError> {
    let m = model(c, "tube-failure")?;
    let pair = pair(c, "exp")?;
    let alpha = *c.alpha.get_or_insert(0.5);
    let alpha1 = *c.alpha1.get_or_insert(0.8);
    let eta = *c.eta.get_or_insert(1.0);
    let reg = region(c, VERTEX_REGION)?;
    let n = *c.n.get_or_insert(400);
    let r = *c.r.get_or_insert(0.0);
    let spec = ConeBumpSpec::new(pair, alpha, alpha1, eta).map_err(cfg_err)?;
    let margin = check_levi_margin(
        &m,
        &pair,
        &annular_cone_samples(&pair, alpha, alpha1).map_err(compute_err)?,
        r,
    )
    .map_err(compute_err)?;
    let search = max_admissible_eta(
        &m,
        &ConeCutoff::new(pair, alpha, alpha1).map_err(cfg_err)?,
        &reg,
        n,
        r,
    )
    .map_err(compute_err)?;
    let mut inv = vec![
        check(
            "Levi margin > 0 on the annular cone",
            margin > 0.0,
            format!("{margin:e}"),
        ),
        check(
            "admissible amplitude > 0",
            search.eta_star > 0.0,
            format!("{:e}", search.eta_star),
        ),
    ];
    let mut results = json!({ "levi_margin": margin, "eta_search": to_value(&search) });
    match build_bump(&m, &spec, r) {
        Ok(built) => {
            let lap = laplacian_grid(&built.model, &reg, n, r).map_err(compute_err)?;
            let everywhere = region_samples(&reg, 100);
            let inner = inner_cone_samples(&pair, alpha).map_err(compute_err)?;
            let cmp =
                compare_bump(&m, &built.model, &everywhere, &inner, r).map_err(compute_err)?;
            let scale = everywhere
                .iter()
                .chain(&inner)
                .map(|&z| m.value(z, r).map(f64::abs))
                .collect::<cuspdisc::Result<Vec<f64>>>()
                .map_err(compute_err)?
                .into_iter()
                .fold(0.0, f64::max);
            inv.push(check(
                "cut-off bounds < 20",
                built.bounds.first < 20.0 && built.bounds.second < 20.0,
                format!("{:e}, {:e}", built.bounds.first, built.bounds.second),
            ));
            inv.push(check(
                "bumped min Laplacian >= -1e-8 scale",
                lap.subharmonic(),
                format!("{:e}", lap.min_laplacian),
            ));
            inv.push(check(
                "bumped <= original everywhere sampled",
                cmp.max_excess <= 1e-14 * scale,
                format!("{:e} over {} samples", cmp.max_excess, cmp.samples),
            ));
            inv.push(check(
                "bumped < original on S_alpha",
                cmp.min_gap_on_sector > 0.0,
                format!("{:e}", cmp.min_gap_on_sector),
            ));
            inv.push(check(
                "bumped vanishes at 0",
                cmp.value_at_origin == 0.0,
                format!("{:e}", cmp.value_at_origin),
            ));
            results["bounds"] = to_value(&built.bounds);
            results["laplacian"] = json!({ "min": lap.min_laplacian, "argmin": lap.argmin, "scale": lap.scale, "violations": lap.violation_count });
            results["comparison"] = to_value(&cmp);
            results["value_scale"] = json!(scale);
        }
        Err(e) => {
            inv.push(check("bump built", false, e.to_string()));
            results["build_error"] = json!(e.to_string());
        }
    }
    Ok((results, inv, None))
}

fn thresholds(c: &mut ExperimentConfig) -> Result<Outcome, RunError> {
    let m = *c.m.get_or_insert(2);
    let p = *c.p.get_or_insert(1);
    let alpha = *c.alpha.get_or_insert(1.01);
    if !(1 <= p && p <= m) {
        return Err(cfg_err(format!(
            "thresholds need 1 <= p <= m, got m={m}, p={p}"
        )));
    }
    let t = finite_type_thresholds(m, p, alpha).map_err(compute_err)?;
    let inv = vec![
        check(
            "c_sector agrees with the reference value",
            !t.sector_mismatch(),
            format!("{} vs {:?}", t.c_sector, t.reference_c_sector),
        ),
        check(
            "c_subharmonic agrees with the reference value",
            !t.subharmonic_mismatch(),
            format!("{} vs {:?}", t.c_subharmonic, t.reference_c_subharmonic),
        ),
    ];
    let mut v = to_value(&t);
    v["sector_mismatch"] = json!(t.sector_mismatch());
    v["subharmonic_mismatch"] = json!(t.subharmonic_mismatch());
    let mut bytes = Vec::new();
    write_thresholds_csv(&[t], &mut bytes).map_err(compute_err)?;
    Ok((
        v,
        inv,
        Some(Table {
            default_name: "thresholds.csv",
            bytes,
        }),
    ))
}

fn hypothesis_check(c: &mut ExperimentConfig) -> Result<Outcome, RunError> {
    let m = model(c, "inf-single-exp")?;
    let pair = pair(c, "exp")?;
    c.nu = None;
    let spec = sector(c, pair, 1.2)?;
    let theta_min = *c.theta_min.get_or_insert(1e-8);
    let samples = *c.samples.get_or_insert(60);
    let r = *c.r.get_or_insert(0.0);
    let thetas = symmetric_thetas(theta_min, PI, samples);
    let growth =
        check_growth_hypotheses(&m, &pair, spec.alpha, &thetas, &[r]).map_err(compute_err)?;
    let prop = sector_property(&m, &spec, &thetas, &[r]).map_err(compute_err)?;
    let (it, sigmas) = default_increment_grids();
    let increment =
        check_increment_condition(&pair, spec.alpha, &it, &sigmas).map_err(compute_err)?;
    let mono = check_monotonicity(&pair, &log_spaced(1e-6, 0.1, 50)).map_err(compute_err)?;
    let inv = vec![
        check(
            "|h| / F bounded toward the vertex",
            !GrowthReport::diverging(&growth.value_vs_f),
            format!("{:e}", growth.value_vs_f.sup),
        ),
        check(
            "sector property",
            prop.holds(),
            format!("max h {:e}", prop.max_h),
        ),
        check(
            "increment condition",
            increment.holds(),
            format!("{} violations", increment.violations.len()),
        ),
        check(
            "monotonicity of F, F*, (F*)'",
            mono.f_increasing && mono.fstar_increasing && mono.fstar_derivative_decreasing,
            format!("{mono:?}"),
        ),
    ];
    let results = json!({
        "growth": to_value(&growth),
        "sector_property": { "max_h": prop.max_h, "argmax": to_value(&prop.argmax), "samples": prop.samples, "interior_radii": INTERIOR_RADII },
        "increment": to_value(&increment),
        "monotonicity": to_value(&mono),
    });
    Ok((results, inv, None))
}
