//! Command-line front end: argument grammar, dispatch and output formatting.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use termshape::consistent_dynamics::{horizons, sample_shapes_threads, shape_probabilities, DynamicsInitial, Horizons, ShapeDistribution};
use termshape::data_ingest::{frequency_report, parse_series_path, FormatConfig};
use termshape::envelope_geometry::{Horizon, LineFamily};
use termshape::segmentation::{attainable_shapes, records_to_csv, segment_grid_threads, Grid};
use termshape::shape::Shape;
use termshape::shape_oracle::classify_direct;
use termshape::term_structure::{CurveKind, CurveParams, Family, Sign};
use termshape::Error;

/// Exit status for a usage error.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for a domain error.
pub const EXIT_DOMAIN: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "termshape", version, about = "Shape analysis of Nelson-Siegel and Svensson term structures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the document here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for stochastic subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Upper bound on worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Curve {
    Forward,
    Yield,
}

impl From<Curve> for CurveKind {
    fn from(c: Curve) -> Self {
        match c {
            Curve::Forward => CurveKind::Forward,
            Curve::Yield => CurveKind::Yield,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beta(pub [f64; 4]);

fn parse_list<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {}", parts.len()));
    }
    let mut v = [0.0; N];
    for (slot, p) in v.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("not a number: {p:?}"))?;
    }
    Ok(v)
}

fn parse_beta(s: &str) -> Result<Beta, String> {
    parse_list::<4>(s).map(Beta)
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let v = parse_list::<6>(s)?;
    let count = |x: f64| {
        if x >= 0.0 && x.fract() == 0.0 && x <= 1e7 {
            Ok(x as usize)
        } else {
            Err(format!("grid resolution must be a non-negative integer, got {x}"))
        }
    };
    Ok(Grid { x0: v[0], x1: v[1], y0: v[2], y1: v[3], nx: count(v[4])?, ny: count(v[5])? })
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, value_enum, default_value_t = Curve::Forward)]
    pub curve: Curve,
    /// Coefficients b0,b1,b2,b3.
    #[arg(long, value_parser = parse_beta, allow_hyphen_values = true)]
    pub beta: Beta,
    #[arg(long, allow_negative_numbers = true)]
    pub tau1: f64,
    /// Second time scale; may be omitted when b3 = 0.
    #[arg(long, allow_negative_numbers = true)]
    pub tau2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    #[arg(long, value_enum, default_value_t = Curve::Forward)]
    pub curve: Curve,
    /// Initial coefficients b0,b1,b2,b3.
    #[arg(long, value_parser = parse_beta, allow_hyphen_values = true)]
    pub beta: Beta,
    #[arg(long, allow_negative_numbers = true)]
    pub tau1: f64,
    /// Must equal tau1/2 when given.
    #[arg(long, allow_negative_numbers = true)]
    pub tau2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shape and extrema of one curve.
    Classify(CurveArgs),
    /// Shapes on a grid of reduced coordinates.
    Segment {
        #[command(flatten)]
        curve: CurveArgs,
        /// x0,x1,y0,y1,nx,ny.
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        grid: Grid,
    },
    /// Sampled envelope with its closing lines.
    Envelope {
        #[arg(long, value_enum, default_value_t = Curve::Forward)]
        curve: Curve,
        #[arg(long, allow_negative_numbers = true)]
        tau1: f64,
        #[arg(long, allow_negative_numbers = true)]
        tau2: f64,
        /// Truncation point; required in the scale-inverted regimes.
        #[arg(long, allow_negative_numbers = true)]
        t: Option<f64>,
        /// Number of samples.
        #[arg(long, default_value_t = 512)]
        n: usize,
    },
    /// Attainable shapes for the family, scale ratio and sign of b3 given by the parameters.
    Attainable {
        #[arg(long, value_parser = parse_beta, allow_hyphen_values = true)]
        beta: Beta,
        #[arg(long, allow_negative_numbers = true)]
        tau1: f64,
        #[arg(long, allow_negative_numbers = true)]
        tau2: Option<f64>,
    },
    /// Shape-loss horizons under consistent dynamics.
    Horizons {
        #[arg(long, value_parser = parse_beta, allow_hyphen_values = true, conflicts_with_all = ["beta2", "beta3"])]
        beta: Option<Beta>,
        #[arg(long, allow_hyphen_values = true)]
        beta2: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        beta3: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        tau1: f64,
    },
    /// Analytic shape probabilities at time t.
    Probabilities(DynamicsArgs),
    /// Monte Carlo shape frequencies at time t.
    Simulate {
        #[command(flatten)]
        dynamics: DynamicsArgs,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
    /// Regime and shape frequencies of a parameter series.
    Ingest {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Curve::Yield)]
        curve: Curve,
        /// JSON file overriding the column layout.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn json<T: Serialize>(v: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Domain(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn curve_params(beta: Beta, tau1: f64, tau2: Option<f64>) -> Result<CurveParams, Failure> {
    let tau2 = match tau2 {
        Some(t) => t,
        None if beta.0[3] == 0.0 => tau1,
        None => return Err(Failure::Usage("--tau2 is required when b3 != 0".into())),
    };
    Ok(CurveParams::new(beta.0, tau1, tau2)?)
}

fn dynamics_initial(beta: Beta, tau1: f64, tau2: Option<f64>) -> Result<DynamicsInitial, Failure> {
    if let Some(t2) = tau2 {
        if (t2 - tau1 / 2.0).abs() > 1e-12 * tau1.abs() {
            return Err(Failure::Domain(format!("consistent dynamics need tau2 = tau1/2, got tau2 = {t2}")));
        }
    }
    let b = beta.0;
    Ok(DynamicsInitial::new(b[0], b[1], b[2], b[3], tau1)?)
}

fn shape_csv(s: &Shape) -> String {
    let mut out = String::from("shape,x,kind\n");
    if s.extrema.is_empty() {
        out += &format!("{},,\n", s.tag);
    }
    for e in &s.extrema {
        let kind = serde_json::to_value(e.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        out += &format!("{},{},{}\n", s.tag, e.x, kind);
    }
    out
}

fn distribution_csv(d: &ShapeDistribution) -> String {
    let mut out = String::from("shape,probability\n");
    for (s, p) in &d.probs {
        out += &format!("{s},{p}\n");
    }
    out
}

fn horizons_csv(h: &Horizons) -> String {
    let branch = match h.branch {
        Some(Sign::Positive) => "+",
        Some(Sign::Negative) => "-",
        None => "0",
    };
    format!(
        "name,value\nt_dagger_f,{}\nt_star_f,{}\nt_dagger_y,{}\nt_star_star_y,{}\nt_star_y,{}\nbranch,{branch}\ndegenerate,{}\n",
        h.t_dagger_f, h.t_star_f, h.t_dagger_y, h.t_star_star_y, h.t_star_y, h.degenerate
    )
}

#[derive(Serialize)]
struct AttainableDoc {
    family: Family,
    r: f64,
    beta3_sign: Option<Sign>,
    shapes: Vec<termshape::shape::ShapeTag>,
}

fn execute(cli: &Cli) -> Result<String, Failure> {
    let csv = cli.format == Format::Csv;
    match &cli.command {
        Command::Classify(a) => {
            let p = curve_params(a.beta, a.tau1, a.tau2)?;
            let s = classify_direct(a.curve.into(), &p)?;
            if csv {
                Ok(shape_csv(&s))
            } else {
                json(&s)
            }
        }
        Command::Segment { curve, grid } => {
            let p = curve_params(curve.beta, curve.tau1, curve.tau2)?;
            if grid.nx < 2 || grid.ny < 2 {
                return Err(Failure::Usage("grid resolution must be at least 2 per axis".into()));
            }
            let recs = segment_grid_threads(curve.curve.into(), &p, grid, cli.threads)?;
            if csv {
                Ok(records_to_csv(&recs))
            } else {
                json(&recs)
            }
        }
        Command::Envelope { curve, tau1, tau2, t, n } => {
            let fam = LineFamily::new((*curve).into(), *tau1, *tau2)?;
            let horizon = t.map_or(Horizon::Infinite, Horizon::Finite);
            let env = fam.envelope_curve(horizon, *n)?;
            if csv {
                Ok(env.to_csv())
            } else {
                json(&env)
            }
        }
        Command::Attainable { beta, tau1, tau2 } => {
            let p = curve_params(*beta, *tau1, *tau2)?;
            let family = p.family();
            let sign = Sign::of(p.beta3());
            let r = p.tau1() / p.tau2();
            let shapes: Vec<_> = attainable_shapes(family, r, sign.unwrap_or(Sign::Positive))?.into_iter().collect();
            if csv {
                Ok(std::iter::once("shape".to_string()).chain(shapes.iter().map(|s| s.to_string())).collect::<Vec<_>>().join("\n") + "\n")
            } else {
                json(&AttainableDoc { family, r, beta3_sign: sign, shapes })
            }
        }
        Command::Horizons { beta, beta2, beta3, tau1 } => {
            let (b1, b2, b3) = match (beta, beta2, beta3) {
                (Some(b), _, _) => (b.0[1], b.0[2], b.0[3]),
                (None, Some(b2), Some(b3)) => (0.0, *b2, *b3),
                _ => return Err(Failure::Usage("horizons needs --beta or both --beta2 and --beta3".into())),
            };
            let init = DynamicsInitial::new(0.0, b1, b2, b3, *tau1)?;
            let h = horizons(&init)?;
            if csv {
                Ok(horizons_csv(&h))
            } else {
                json(&h)
            }
        }
        Command::Probabilities(a) => {
            let init = dynamics_initial(a.beta, a.tau1, a.tau2)?;
            let d = shape_probabilities(a.curve.into(), &init, a.t)?;
            if csv {
                Ok(distribution_csv(&d))
            } else {
                json(&d)
            }
        }
        Command::Simulate { dynamics: a, n } => {
            let init = dynamics_initial(a.beta, a.tau1, a.tau2)?;
            let d = sample_shapes_threads(a.curve.into(), &init, a.t, *n, cli.seed, cli.threads)?;
            if csv {
                Ok(distribution_csv(&d))
            } else {
                json(&d)
            }
        }
        Command::Ingest { path, curve, config } => {
            let cfg = match config {
                Some(c) => {
                    let text = std::fs::read_to_string(c).map_err(|e| Failure::Domain(format!("{}: {e}", c.display())))?;
                    serde_json::from_str::<FormatConfig>(&text).map_err(|e| Failure::Domain(format!("bad config: {e}")))?
                }
                None => FormatConfig::default(),
            };
            let parsed = parse_series_path(path, &cfg)?;
            let report = frequency_report(&parsed.series, (*curve).into())?;
            if csv {
                Ok(report.rows_csv())
            } else {
                #[derive(Serialize)]
                struct Doc<'a> {
                    report: &'a termshape::data_ingest::FrequencyReport,
                    quarantine: &'a [termshape::data_ingest::QuarantinedRow],
                }
                json(&Doc { report: &report, quarantine: &parsed.quarantine })
            }
        }
    }
}

/// Parses `argv`, runs the subcommand and writes its document to `out`.
/// Diagnostics go to `err`. Returns the process exit status.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    if cli.threads == 0 {
        let _ = writeln!(err, "error: --threads must be at least 1");
        return EXIT_USAGE;
    }
    match execute(&cli) {
        Ok(doc) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, doc.as_bytes()).map_err(|e| format!("{}: {e}", path.display())),
                None => out.write_all(doc.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => 0,
                Err(m) => {
                    let _ = writeln!(err, "error: {m}");
                    EXIT_DOMAIN
                }
            }
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Domain(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_DOMAIN
        }
    }
}
