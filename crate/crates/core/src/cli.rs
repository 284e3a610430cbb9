//! Command-line front end. Exit codes: 0 success, 1 bad input or usage,
//! 2 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::metrics::{blp_measure, default_t_max, PairFamily, DEFAULT_BLP_DT};
use crate::qmat::purity;
use crate::states::{classify_region, min_partial_transpose_eigenvalue, negativity, StateFamily};
use crate::sweep::{load_config, render_svg, run_sweep, write_csv};
use crate::vchannel::ChannelParams;

#[derive(Debug, Parser)]
#[command(name = "vtype-qsl", version, about = "Speed limits and non-Markovianity for V-type qutrits in Lorentzian reservoirs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a QSL sweep described by a TOML config and write CSV (and SVG).
    Sweep {
        config: PathBuf,
        /// Override `output_path` from the config.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Also write an SVG plot next to the CSV.
        #[arg(long)]
        svg: bool,
    },
    /// Estimate the BLP non-Markovianity of the single-qutrit channel.
    Nonmarkov {
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_BLP_DT)]
        dt: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        phase_points: Option<usize>,
        #[arg(long)]
        random_pairs: Option<usize>,
    },
    /// Print entanglement diagnostics of one initial state.
    StateInfo {
        #[arg(long)]
        family: StateFamily,
        #[arg(long, allow_negative_numbers = true)]
        param: f64,
    },
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                1
            } else {
                let _ = write!(out, "{rendered}");
                0
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    let emit = |out: &mut dyn Write, line: String| -> Result<()> {
        writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
    };
    match command {
        Command::Sweep { config, output, svg } => {
            let mut cfg = load_config(&config)?;
            if let Some(path) = output {
                cfg.output_path = path;
            }
            cfg.emit_svg |= svg;
            let rows = run_sweep(&cfg)?;
            write_csv(&rows, &cfg.output_path)?;
            emit(out, format!("wrote {} rows to {}", rows.len(), cfg.output_path.display()))?;
            if cfg.emit_svg {
                let svg_path = cfg.svg_path();
                render_svg(&rows, &svg_path)?;
                emit(out, format!("wrote plot to {}", svg_path.display()))?;
            }
        }
        Command::Nonmarkov {
            gamma,
            lambda,
            theta,
            t_max,
            dt,
            seed,
            phase_points,
            random_pairs,
        } => {
            let p = ChannelParams::symmetric(gamma, theta, lambda)?;
            let defaults = PairFamily::default();
            let family = PairFamily {
                phase_points: phase_points.unwrap_or(defaults.phase_points),
                random_pairs: random_pairs.unwrap_or(defaults.random_pairs),
                seed: seed.unwrap_or(defaults.seed),
            };
            let t_max = t_max.unwrap_or_else(|| default_t_max(&p));
            if !(dt > 0.0 && dt <= 1e-2) {
                return Err(Error::Validation {
                    field: "dt".into(),
                    message: format!("{dt} must lie in (0, 0.01]"),
                });
            }
            if !(t_max.is_finite() && t_max >= dt) {
                return Err(Error::Validation {
                    field: "t-max".into(),
                    message: format!("{t_max} must be at least dt"),
                });
            }
            let r = blp_measure(&p, t_max, dt, &family)?;
            emit(out, format!("n_measure = {:.12}", r.n_measure))?;
            emit(out, format!("pair = {}", r.pair_description))?;
            emit(out, format!("grid_step = {}", r.grid_step))?;
            emit(out, format!("t_max = {}", r.t_max))?;
        }
        Command::StateInfo { family, param } => {
            let rho = family.state(param)?;
            let region = classify_region(family, param)?;
            emit(out, format!("family = {family}"))?;
            emit(out, format!("{} = {param}", family.param_name()))?;
            emit(out, format!("region = {}", region.label))?;
            emit(out, format!("negativity = {:.12}", negativity(&rho)?))?;
            emit(out, format!("purity = {:.12}", purity(&rho)))?;
            emit(out, format!("min_pt_eigenvalue = {:.12}", min_partial_transpose_eigenvalue(&rho)?))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("vtype-qsl").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn sweep_writes_ordered_csv_and_svg() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        let csv = dir.path().join("out.csv");
        fs::write(
            &cfg,
            format!(
                "state_family = \"werner-psi0\"\nstate_params = [0.3, 0.7]\ngamma_grid = [0.5, 1.0, 2.0]\n\
                 lambda = 0.1\ntheta = 1\noutput_path = \"{}\"\nemit_svg = true\n",
                csv.display()
            ),
        )
        .unwrap();
        let (code, out, err) = call(&["sweep", cfg.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("wrote 6 rows"));

        let text = fs::read_to_string(&csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], crate::sweep::CSV_HEADER);
        let mut coords = Vec::new();
        for line in &lines[1..] {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 12, "{line}");
            assert_eq!(fields[0], "werner-psi0");
            assert_eq!(fields[11], "");
            let tau_qsl: f64 = fields[8].parse().unwrap();
            assert!((0.0..=1.0).contains(&tau_qsl));
            coords.push((fields[1].parse::<f64>().unwrap(), fields[2].parse::<f64>().unwrap()));
        }
        assert_eq!(
            coords,
            vec![(0.3, 0.5), (0.3, 1.0), (0.3, 2.0), (0.7, 0.5), (0.7, 1.0), (0.7, 2.0)]
        );

        let svg = fs::read_to_string(dir.path().join("out.svg")).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let root = doc.root_element();
        assert_eq!(root.tag_name().name(), "svg");
        assert_eq!(root.attribute("viewBox"), Some("0 0 800 600"));
        let polylines: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("polyline")).collect();
        assert_eq!(polylines.len(), 2);
        for line in polylines {
            let xs: Vec<f64> = line
                .attribute("points")
                .unwrap()
                .split(' ')
                .map(|pt| pt.split(',').next().unwrap().parse().unwrap())
                .collect();
            assert_eq!(xs.len(), 3);
            assert!(xs.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn csv_round_trips_rows() {
        let cfg = crate::sweep::parse_config(
            "state_family = \"horodecki\"\nstate_params = [0.5, 3.0]\ngamma_grid = [0.1, 4.0]\nlambda = 1\ntheta = 0.6\nblp_t_max = 2\n",
        )
        .unwrap();
        let rows = run_sweep(&cfg).unwrap();
        let text = crate::sweep::csv_string(&rows).unwrap();
        for (row, line) in rows.iter().zip(text.lines().skip(1)) {
            let f: Vec<&str> = line.split(',').collect();
            let num = |i: usize| f[i].parse::<f64>().unwrap();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-11 * b.abs().max(1e-300) || a == b;
            assert!(close(num(6), row.fidelity));
            assert!(close(num(8), row.tau_qsl));
            assert!(close(num(9), row.negativity));
            assert!(close(num(11), row.n_measure.unwrap()));
            assert_eq!(f[10], row.region.as_str());
        }
    }

    #[test]
    fn bad_inputs_exit_with_one() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.toml");
        let (code, _, err) = call(&["sweep", missing.to_str().unwrap()]);
        assert_eq!(code, 1);
        assert!(err.contains("nope.toml"), "{err}");

        let cfg = dir.path().join("bad.toml");
        fs::write(&cfg, "state_family = \"werner-psi1\"\nstate_params = [1.2]\nlambda = 1\ntheta = 1\n").unwrap();
        let (code, _, err) = call(&["sweep", cfg.to_str().unwrap()]);
        assert_eq!(code, 1);
        assert!(err.contains("state_params") && err.contains("p out of [0,1]"), "{err}");

        assert_eq!(call(&["frobnicate"]).0, 1);
        assert_eq!(call(&["nonmarkov", "--gamma", "1", "--lambda", "0.1", "--theta", "1.5"]).0, 1);
        assert_eq!(call(&["nonmarkov", "--gamma", "1", "--lambda", "0.1", "--dt", "0.1"]).0, 1);
        assert_eq!(call(&["state-info", "--family", "horodecki", "--param", "6"]).0, 1);
        assert_eq!(call(&["state-info", "--family", "ghz", "--param", "0.5"]).0, 1);
    }

    #[test]
    fn help_exits_cleanly() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("nonmarkov") && out.contains("state-info"));
    }

    #[test]
    fn state_info_reports_diagnostics() {
        let (code, out, _) = call(&["state-info", "--family", "horodecki", "--param", "1.5"]);
        assert_eq!(code, 0);
        assert!(out.contains("region = BoundEntangled"), "{out}");
        assert!(out.contains("negativity = 0.000000000000\n"), "{out}");
        let (_, out, _) = call(&["state-info", "--family", "horodecki", "--param", "2.5"]);
        assert!(out.contains("region = Separable"), "{out}");
        let (_, out, _) = call(&["state-info", "--family", "werner-psi0", "--param", "1"]);
        assert!(out.contains("negativity = 1.000000000000"), "{out}");
        assert!(out.contains("purity = 1.000000000000"), "{out}");
    }

    #[test]
    fn nonmarkov_reports_measure() {
        let args = ["nonmarkov", "--gamma", "1", "--lambda", "0.1", "--t-max", "20", "--random-pairs", "4"];
        let (code, out, err) = call(&args);
        assert_eq!(code, 0, "{err}");
        let n: f64 = out
            .lines()
            .find_map(|l| l.strip_prefix("n_measure = "))
            .unwrap()
            .parse()
            .unwrap();
        assert!(n > 0.1);
        assert!(out.contains("grid_step = 0.005"));
        assert_eq!(call(&args).1, out);
    }

    #[test]
    fn nonmarkov_markovian_regime_is_near_zero() {
        let (code, out, _) = call(&["nonmarkov", "--gamma", "0.5", "--lambda", "10", "--theta", "1"]);
        assert_eq!(code, 0);
        let n: f64 = out
            .lines()
            .find_map(|l| l.strip_prefix("n_measure = "))
            .unwrap()
            .parse()
            .unwrap();
        assert!(n <= 1e-4, "{out}");
    }

    #[test]
    fn numerical_errors_are_not_validation_errors() {
        let e = Error::AtGridPoint {
            context: "x".into(),
            source: Box::new(Error::QuadratureNotConverged {
                intervals: 16384,
                rel_change: 1e-3,
            }),
        };
        assert!(!e.is_validation());
        assert!(Error::EmptyInput("rows").is_validation());
    }
}
