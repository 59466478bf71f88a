mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crparam::charts::{MultiIndex, Resolution};
use crparam::engine::{
    epsilon_resolution_fn, epsilon_resolution_set, resolve_interval_cr, Limits, NashInput,
};
use crparam::error::Error;
use crparam::kernel::{parse_poly, parse_rational};
use crparam::semialg::{decompose, slices_of, Presentation};
use crparam::verifier::{
    degree_robustness_experiment, verify_resolution, CoverageTarget, ExperimentConfig, VerifyConfig,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Invalid(Error),
    #[error("{0}")]
    Engine(Error),
    #[error("{0}")]
    Output(String),
    #[error("{0}")]
    ChecksFailed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Invalid(_) => 1,
            CliError::Engine(_) | CliError::Output(_) => 2,
            CliError::ChecksFailed(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::Invalid(_)
            | Error::InvalidInterval(_)
            | Error::InvalidVariable { .. }
            | Error::LengthMismatch(..)
            | Error::DimensionMismatch(_)
            | Error::ZeroPolynomial(_)
            | Error::BothZero(_)
            | Error::Unsupported(_) => CliError::Invalid(e),
            _ => CliError::Engine(e),
        }
    }
}

/// Bounded-derivative chart resolutions of semi-algebraic sets.
#[derive(Parser)]
#[command(name = "crparam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cylindrical decomposition of a set, with its slices.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Resolve a one-variable polynomial on an interval.
    Resolve1d {
        /// Polynomial in x1, e.g. "x1^2 - (1/3)*x1".
        #[arg(long)]
        poly: String,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value = "0")]
        a: String,
        #[arg(long, default_value = "1")]
        b: String,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Resolve a planar set, or a polynomial on the shrunken square.
    Resolve2d {
        #[arg(long = "in", conflicts_with = "poly", required_unless_present = "poly")]
        input: Option<PathBuf>,
        /// Polynomial in x1, x2 with values in [-1, 1].
        #[arg(long)]
        poly: Option<String>,
        /// Comma-separated exponents, e.g. "0,2".
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the coverage, norm, inverse and estimate gates on a resolution.
    Verify {
        #[arg(long)]
        res: PathBuf,
        /// Set to cover; defaults to the resolution's own domain.
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value_t = 1e-6)]
        norm_tol: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Chart counts across coefficient magnitude buckets.
    Experiment {
        #[arg(long)]
        degree: u32,
        #[arg(long)]
        r: u32,
        /// Comma-separated magnitudes, e.g. "1e0,1e3,1e6".
        #[arg(long, default_value = "1e0,1e3,1e6")]
        buckets: String,
        #[arg(long, default_value_t = 30)]
        runs: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Summary JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Sample chart images for plotting.
    Report {
        #[arg(long)]
        res: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        /// Grid points per chart axis.
        #[arg(long, default_value_t = 11)]
        per_axis: usize,
    },
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, default_value_t = 50_000)]
    max_charts: usize,
    #[arg(long, default_value_t = 6)]
    max_rounds: u32,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits {
            max_charts: self.max_charts,
            max_rounds: self.max_rounds,
            ..Limits::default()
        }
    }
}

fn read_presentation(path: &Path) -> Result<Presentation, CliError> {
    Ok(Presentation::from_json(&io::read_text(path)?)?)
}

fn read_resolution(path: &Path) -> Result<Resolution, CliError> {
    Ok(Resolution::from_json(&io::read_json(path)?)?)
}

fn parse_buckets(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("bad bucket {t:?}")))
        })
        .collect()
}

/// Engine failures leave a diagnostics file next to the intended output.
fn with_diagnostics<T>(
    command: &str,
    out: Option<&Path>,
    r: Result<T, CliError>,
) -> Result<T, CliError> {
    if let (Err(CliError::Engine(e)), Some(p)) = (&r, out) {
        let v = json!({"command": command, "status": "failed", "error": e.to_string(), "kind": format!("{e:?}")});
        io::write_atomic(&io::diagnostics_path(p), &io::render_json(&v))?;
    }
    r
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Decompose { input, out } => {
            let pres = read_presentation(&input)?;
            let v = with_diagnostics(
                "decompose",
                out.as_deref(),
                (|| {
                    let d = decompose(&pres)?;
                    let slices = slices_of(&pres, &d)?;
                    let mut v = d.to_json(Some(&slices));
                    v["presentation"] = pres.to_json();
                    Ok(v)
                })(),
            )?;
            io::emit_json(out.as_deref(), &v)
        }
        Command::Resolve1d {
            poly,
            r,
            a,
            b,
            limits,
            out,
        } => {
            let f = NashInput::Poly(parse_poly(&poly, 1)?);
            let (a, b) = (parse_rational(&a)?, parse_rational(&b)?);
            if r == 0 {
                return Err(CliError::Input("--r must be at least 1".into()));
            }
            let res = with_diagnostics(
                "resolve1d",
                out.as_deref(),
                resolve_interval_cr(&f, &a, &b, r, &limits.limits()).map_err(CliError::from),
            )?;
            io::emit_json(out.as_deref(), &res.to_json())
        }
        Command::Resolve2d {
            input,
            poly,
            alpha,
            n,
            limits,
            out,
        } => {
            let alpha = MultiIndex::parse(&alpha)?;
            if alpha.dim() != 2 {
                return Err(CliError::Input(format!(
                    "--alpha needs two exponents, got {alpha}"
                )));
            }
            let res = match (input, poly) {
                (Some(path), _) => {
                    let pres = read_presentation(&path)?;
                    with_diagnostics(
                        "resolve2d",
                        out.as_deref(),
                        epsilon_resolution_set(&pres, &alpha, n, &limits.limits())
                            .map_err(CliError::from),
                    )?
                }
                (None, Some(p)) => {
                    let f = NashInput::Poly(parse_poly(&p, 2)?);
                    with_diagnostics(
                        "resolve2d",
                        out.as_deref(),
                        epsilon_resolution_fn(&f, &alpha, n, &limits.limits())
                            .map_err(CliError::from),
                    )?
                }
                (None, None) => {
                    return Err(CliError::Input("either --in or --poly is required".into()))
                }
            };
            io::emit_json(out.as_deref(), &res.to_json())
        }
        Command::Verify {
            res,
            target,
            report,
            samples,
            tol,
            norm_tol,
            seed,
        } => {
            let res = read_resolution(&res)?;
            let target = match target {
                Some(p) => CoverageTarget::Set(read_presentation(&p)?),
                None => CoverageTarget::of(&res),
            };
            let cfg = VerifyConfig {
                samples,
                coverage_tol: tol,
                norm_tol,
                seed,
            };
            let rep = with_diagnostics(
                "verify",
                report.as_deref(),
                verify_resolution(&res, Some(&target), &cfg).map_err(CliError::from),
            )?;
            io::emit_json(report.as_deref(), &rep.to_json())?;
            for g in &rep.gates {
                eprintln!(
                    "{} {}: measured {:e}, tolerance {:e}, {} checked",
                    if g.passed { "pass" } else { "FAIL" },
                    g.name,
                    g.measured,
                    g.tolerance,
                    g.checked
                );
            }
            if rep.passed() {
                Ok(())
            } else {
                Err(CliError::ChecksFailed("some gates failed".into()))
            }
        }
        Command::Experiment {
            degree,
            r,
            buckets,
            runs,
            seed,
            csv,
            json,
            limits,
        } => {
            let cfg = ExperimentConfig {
                degree,
                order: r,
                runs,
                buckets: parse_buckets(&buckets)?,
                seed,
            };
            cfg.validate()?;
            let out = csv.as_deref().or(json.as_deref());
            let rep = with_diagnostics(
                "experiment",
                out,
                degree_robustness_experiment(&cfg, &limits.limits()).map_err(CliError::from),
            )?;
            match &csv {
                Some(p) => io::write_atomic(p, &rep.to_csv())?,
                None => print!("{}", rep.to_csv()),
            }
            if let Some(p) = &json {
                let mut v = serde_json::to_value(&rep).expect("report serializes");
                // per-row timings stay in the CSV so the summary is reproducible
                if let Some(Value::Array(rows)) = v.get_mut("rows") {
                    for row in rows {
                        if let Some(o) = row.as_object_mut() {
                            o.remove("wall_ms");
                        }
                    }
                }
                io::emit_json(Some(p), &v)?;
            }
            let maxes: Vec<String> = rep
                .max_n
                .iter()
                .map(|(b, n)| format!("{b:e}: {n}"))
                .collect();
            eprintln!(
                "max N per bucket: {}; failures: {}",
                maxes.join(", "),
                rep.failures
            );
            if rep.passed {
                Ok(())
            } else {
                Err(CliError::ChecksFailed(
                    "chart counts differ across buckets or runs failed".into(),
                ))
            }
        }
        Command::Report {
            res,
            samples,
            per_axis,
        } => {
            if per_axis == 0 {
                return Err(CliError::Input("--per-axis must be positive".into()));
            }
            let res = read_resolution(&res)?;
            let csv = chart_samples_csv(&res, per_axis)?;
            io::write_atomic(&samples, &csv)
        }
    }
}

/// Rows `chart_id, t1..tl, x1..xd` on a midpoint grid of each chart's cube.
fn chart_samples_csv(res: &Resolution, k: usize) -> Result<String, CliError> {
    use std::fmt::Write as _;
    let max_l = res.charts.iter().map(|c| c.chart.l()).max().unwrap_or(0);
    let d = res.ambient;
    let mut cols = vec!["chart_id".to_string()];
    cols.extend((1..=max_l).map(|i| format!("t{i}")));
    cols.extend((1..=d).map(|i| format!("x{i}")));
    let mut s = cols.join(",");
    s.push('\n');
    for (id, c) in res.charts.iter().enumerate() {
        let l = c.chart.l();
        let total = k.pow(l as u32);
        for idx in 0..total {
            let t: Vec<f64> = (0..l)
                .map(|a| ((idx / k.pow(a as u32)) % k) as f64 / k as f64 + 0.5 / k as f64)
                .collect();
            let x = c.chart.eval_f64(&t)?;
            let mut row = vec![id.to_string()];
            row.extend(t.iter().map(|v| v.to_string()));
            row.extend(std::iter::repeat_n(String::new(), max_l - l));
            row.extend(x.iter().map(|v| v.to_string()));
            let _ = writeln!(s, "{}", row.join(","));
        }
    }
    Ok(s)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
