use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use cuspdisc_cli::{run, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "cuspdisc",
    version,
    about = "Analytic discs over cusped sectors: experiment runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. `--set alpha=1.2`. May be repeated.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Print the experiment catalogue and the keys each experiment reads.
    List,
}

fn main() -> ExitCode {
    let code = dispatch(
        Cli::parse(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code)
}

fn dispatch(cli: Cli, out: &mut impl Write, err: &mut impl Write) -> u8 {
    match cli.command {
        Command::List => {
            for e in Experiment::ALL {
                let _ = writeln!(out, "{:<18} {}", e.name(), e.summary());
                let _ = writeln!(
                    out,
                    "{:<18} keys: experiment, output, {}",
                    "",
                    e.keys().join(", ")
                );
            }
            0
        }
        Command::Run { config, set } => {
            let cfg = match ExperimentConfig::load(&config, &set) {
                Ok(c) => c,
                Err(e) => {
                    let _ = writeln!(err, "config error: {e}");
                    return 2;
                }
            };
            match run(&cfg) {
                Ok(report) => {
                    for inv in &report.invariants {
                        let _ = writeln!(
                            err,
                            "{} {}: {}",
                            if inv.pass { "ok  " } else { "FAIL" },
                            inv.name,
                            inv.detail
                        );
                    }
                    for f in &report.files {
                        let _ = writeln!(err, "wrote {f}");
                    }
                    let _ = writeln!(
                        err,
                        "wrote {}",
                        report.config.output.as_deref().unwrap_or_default()
                    );
                    0
                }
                Err(e) => {
                    let _ = writeln!(err, "{e}");
                    e.exit_code() as u8
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn call(args: &[&str]) -> (u8, String, String) {
        let cli = Cli::try_parse_from(std::iter::once("cuspdisc").chain(args.iter().copied()))
            .expect("arguments parse");
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = dispatch(cli, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    fn config(dir: &Path, name: &str, body: &str) -> String {
        let path = dir.join(name);
        std::fs::write(&path, body).unwrap();
        path.display().to_string()
    }

    #[test]
    fn list_covers_every_experiment() {
        let (code, out, _) = call(&["list"]);
        assert_eq!(code, 0);
        for e in Experiment::ALL {
            assert!(out.contains(e.name()), "{e}");
        }
    }

    #[test]
    fn run_writes_report_and_prints_invariants() {
        let dir = tempfile::tempdir().unwrap();
        let json = dir.path().join("h.json").display().to_string();
        let cfg = config(
            dir.path(),
            "h.toml",
            "experiment = \"hilbert-selftest\"\nn = 256\n",
        );
        let (code, _, err) = call(&[
            "run",
            "--config",
            &cfg,
            "--set",
            &format!("output={json:?}"),
        ]);
        assert_eq!(code, 0, "{err}");
        assert!(err.starts_with("ok  "), "{err}");
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
        assert_eq!(report["config"]["n"], 256);
    }

    #[test]
    fn exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let bad_key = config(
            dir.path(),
            "u.toml",
            "experiment = \"levi-check\"\nresolution = 10\n",
        );
        let (code, _, err) = call(&["run", "--config", &bad_key]);
        assert_eq!(code, 2);
        assert!(err.contains("resolution"), "{err}");

        let missing = dir.path().join("missing.toml").display().to_string();
        assert_eq!(call(&["run", "--config", &missing]).0, 2);

        let calib = config(
            dir.path(),
            "s.toml",
            "experiment = \"solve-disc\"\nmodel = \"inf-single-exp\"\na = 1.0\nb = 3.0\nn = 256\n",
        );
        let (code, _, err) = call(&["run", "--config", &calib]);
        assert_eq!(code, 2);
        assert!(err.contains("a<b<a(a+1)"), "{err}");

        let out = dir.path().join("f.json").display().to_string();
        let diverge = config(
            dir.path(),
            "f.toml",
            "experiment = \"solve-disc\"\nmodel = \"re-part\"\nr_coupling = 1.0\nmax_iter = 1\nn = 256\n",
        );
        let (code, _, err) = call(&[
            "run",
            "--config",
            &diverge,
            "--set",
            &format!("output={out:?}"),
        ]);
        assert_eq!(code, 1, "{err}");
        assert!(!Path::new(&out).exists());
    }
}
