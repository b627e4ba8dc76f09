use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    HilbertSelftest,
    SectorProfile,
    SolveDisc,
    BumpResponse,
    SmoothingSweep,
    TranslationSweep,
    LeviCheck,
    ConeBump,
    Thresholds,
    HypothesisCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::HilbertSelftest,
        Experiment::SectorProfile,
        Experiment::SolveDisc,
        Experiment::BumpResponse,
        Experiment::SmoothingSweep,
        Experiment::TranslationSweep,
        Experiment::LeviCheck,
        Experiment::ConeBump,
        Experiment::Thresholds,
        Experiment::HypothesisCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::HilbertSelftest => "hilbert-selftest",
            Experiment::SectorProfile => "sector-profile",
            Experiment::SolveDisc => "solve-disc",
            Experiment::BumpResponse => "bump-response",
            Experiment::SmoothingSweep => "smoothing-sweep",
            Experiment::TranslationSweep => "translation-sweep",
            Experiment::LeviCheck => "levi-check",
            Experiment::ConeBump => "cone-bump",
            Experiment::Thresholds => "thresholds",
            Experiment::HypothesisCheck => "hypothesis-check",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Experiment::HilbertSelftest => "harmonic conjugation on trigonometric polynomials",
            Experiment::SectorProfile => {
                "boundary trace of the cusped sector and its asymptotic fit"
            }
            Experiment::SolveDisc => "attach an analytic disc to the hypersurface over the sector",
            Experiment::BumpResponse => "d_eta d_t v(1) against the quadrature prediction",
            Experiment::SmoothingSweep => "transversality over smoothed sectors",
            Experiment::TranslationSweep => {
                "translated smoothed discs and where they dip below the hypersurface"
            }
            Experiment::LeviCheck => "grid Laplacian of the defining function",
            Experiment::ConeBump => "conical pseudoconvex bump and its admissible amplitude",
            Experiment::Thresholds => "critical c for the finite type model",
            Experiment::HypothesisCheck => "growth, sector property and increment hypotheses",
        }
    }

    /// Keys read by the experiment, besides `experiment` and `output`.
    pub fn keys(self) -> Vec<&'static str> {
        const MODEL: &[&str] = &[
            "model",
            "m",
            "p",
            "c",
            "a",
            "b",
            "alpha_cut",
            "g",
            "r_coupling",
        ];
        const PAIR: &[&str] = &["pair", "pair_param", "epsilon", "alpha"];
        const SOLVE: &[&str] = &["n", "nu", "tol", "max_iter", "damping", "r_shift"];
        const REGION: &[&str] = &["x0", "x1", "y0", "y1", "n", "r"];
        fn join(parts: &[&[&'static str]]) -> Vec<&'static str> {
            let mut v: Vec<&'static str> = Vec::new();
            for k in parts.iter().flat_map(|p| p.iter()) {
                if !v.contains(k) {
                    v.push(k);
                }
            }
            v
        }
        match self {
            Experiment::HilbertSelftest => vec!["n"],
            Experiment::SectorProfile => join(&[
                PAIR,
                &[
                    "nu",
                    "theta_min",
                    "theta_max",
                    "samples",
                    "x_lo",
                    "x_hi",
                    "csv",
                ],
            ]),
            Experiment::SolveDisc => join(&[
                MODEL,
                PAIR,
                SOLVE,
                &["eta", "bump_center", "bump_width", "csv"],
            ]),
            Experiment::BumpResponse => {
                join(&[MODEL, PAIR, SOLVE, &["bump_center", "bump_width", "delta"]])
            }
            Experiment::SmoothingSweep => join(&[MODEL, PAIR, SOLVE, &["nus"]]),
            Experiment::TranslationSweep => join(&[
                MODEL,
                PAIR,
                SOLVE,
                &["offset_step", "offset_count", "r_shifts"],
            ]),
            Experiment::LeviCheck => join(&[MODEL, REGION]),
            Experiment::ConeBump => join(&[MODEL, PAIR, REGION, &["alpha1", "eta"]]),
            Experiment::Thresholds => vec!["m", "p", "alpha", "csv"],
            Experiment::HypothesisCheck => join(&[MODEL, PAIR, &["theta_min", "samples", "r"]]),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One experiment run. Unset keys take per-experiment defaults; the resolved
/// values are echoed into the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_cut: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_coupling: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_param: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nus: Option<Vec<u32>>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_shift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_shifts: Option<Vec<f64>>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bump_center: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bump_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset_count: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_hi: Option<f64>,
}

impl ExperimentConfig {
    /// Config with only the experiment set.
    pub fn new(experiment: Experiment) -> Self {
        let mut table = toml::Table::new();
        table.insert(
            "experiment".into(),
            toml::Value::String(experiment.name().into()),
        );
        toml::Value::Table(table).try_into().expect("bare config")
    }

    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, String> {
        let mut table: toml::Table = text.parse().map_err(|e| format!("config: {e}"))?;
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| format!("--set expects key=value, got {o:?}"))?;
            table.insert(key.trim().to_string(), parse_value(value.trim()));
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| format!("config: {}", e.message()))
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::from_toml(&text, overrides)
    }
}

/// A TOML literal when it parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_win_and_unknown_keys_fail() {
        let c = ExperimentConfig::from_toml(
            "experiment = \"solve-disc\"\nalpha = 1.5\nn = 512\n",
            &["alpha=1.2".into(), "model=zero".into(), "nus=[4, 8]".into()],
        )
        .unwrap();
        assert_eq!(c.alpha, Some(1.2));
        assert_eq!(c.n, Some(512));
        assert_eq!(c.model.as_deref(), Some("zero"));
        assert_eq!(c.nus, Some(vec![4, 8]));
        let e = ExperimentConfig::from_toml("experiment = \"solve-disc\"\nalhpa = 1\n", &[])
            .unwrap_err();
        assert!(e.contains("alhpa"), "{e}");
        assert!(ExperimentConfig::from_toml("experiment = \"nope\"\n", &[]).is_err());
        assert!(
            ExperimentConfig::from_toml("experiment = \"thresholds\"\n", &["m".into()]).is_err()
        );
    }
}
