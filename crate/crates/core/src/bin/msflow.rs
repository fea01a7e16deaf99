use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use multiset_flow::campaign::{self, Suite, Tolerances, DEFAULT_SEED};
use multiset_flow::enumeration::{enumerate_path, validate_tracks};
use multiset_flow::flow::{flow_over_grid, parse_theta_grid, FlowEngine};
use multiset_flow::io::{self, fmt_sig, json_error, PathInput};
use multiset_flow::multiset::{optimal_matching, Slot};
use multiset_flow::spectra::{self, generate_path, OperatorModel, Recipe};
use multiset_flow::{Error, Multiset, NormSpec};

const DEFAULT_THETA: &str = "0.1:6.2:64";

#[derive(Parser)]
#[command(name = "msflow", version, about = "Multiset distances, eigenvalue tracks and spectral flow")]
struct Cli {
    /// Significant digits in numeric output.
    #[arg(long, global = true, default_value_t = io::DEFAULT_DIGITS)]
    digits: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Φ-distance between two multisets and an optimal matching.
    Dist {
        s: PathBuf,
        t: PathBuf,
        #[arg(long, default_value = "p2")]
        norm: NormSpec,
    },
    /// Continuous enumeration of a sampled path.
    Tracks {
        path: PathBuf,
        #[arg(long, default_value = "p2")]
        norm: NormSpec,
        /// Write tracks.csv and tracks.json here instead of printing CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral flow over a grid of angles, by winding sum and by crossing count.
    Flow {
        path: PathBuf,
        #[arg(long, default_value = DEFAULT_THETA)]
        theta: String,
        #[arg(long, default_value = "p2")]
        norm: NormSpec,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Seeded verification campaign.
    Verify {
        /// metric, sum-diff, bhatia-sinha, hoffman-wielandt, kato, flow-agreement or all
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Instances per suite; defaults to the suite's standard size.
        #[arg(long)]
        count: Option<usize>,
        /// Allowed violation of each inequality.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Generate a sampled unitary path as JSON.
    Gen {
        /// golden, constant, half-turn, random-loop, or a recipe JSON file
        recipe: String,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 128)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SVG plot of a track set or of the tracks of a path.
    Plot {
        input: PathBuf,
        #[arg(long)]
        theta: Option<String>,
        #[arg(long, default_value = "p2")]
        norm: NormSpec,
        #[arg(long, default_value = "tracks.svg")]
        out: PathBuf,
    },
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parameter(_)
            | Error::UnsupportedNorm(..)
            | Error::SizeLimit(_)
            | Error::ThetaCollision { .. } => 2,
            Error::SpaceMismatch => 3,
            Error::Resolution { .. } => 4,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

type Outcome = std::result::Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| fail(1, format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| fail(1, format!("{}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn read_multiset(path: &Path) -> Result<Multiset, Failure> {
    Ok(serde_json::from_str(&read(path)?).map_err(json_error)?)
}

fn slot(s: Slot) -> String {
    match s {
        Slot::Point(i) => i.to_string(),
        Slot::Base => "-".into(),
    }
}

fn report_warnings(warnings: &[String]) {
    const SHOWN: usize = 3;
    for w in warnings.iter().take(SHOWN) {
        log::warn!("{w}");
    }
    if warnings.len() > SHOWN {
        log::warn!("{} more inadequately sampled steps", warnings.len() - SHOWN);
    }
}

fn cmd_dist(s: &Path, t: &Path, norm: NormSpec, digits: usize) -> Outcome {
    let (s, t) = (read_multiset(s)?, read_multiset(t)?);
    let m = optimal_matching(&s, &t, norm)?;
    println!("distance {}", fmt_sig(m.value, digits));
    for (a, b) in &m.pairs {
        println!("{} {}", slot(*a), slot(*b));
    }
    Ok(())
}

fn cmd_tracks(path: &Path, norm: NormSpec, out: Option<&Path>, digits: usize) -> Outcome {
    let input = PathInput::from_json(&read(path)?)?.multisets()?;
    let e = enumerate_path(&input.samples, &input.params, norm)?;
    report_warnings(&e.warnings);
    let report = validate_tracks(&e.tracks, &input.samples, norm);
    for f in &report.failures {
        log::error!("{f}");
    }
    let csv = io::tracks_csv(&e.tracks, digits);
    match out {
        Some(dir) => {
            write(&dir.join("tracks.csv"), &csv)?;
            write(&dir.join("tracks.json"), &io::tracks_json(&e.tracks)?)?;
        }
        None => print!("{csv}"),
    }
    if report.ok() {
        Ok(())
    } else {
        Err(fail(1, "tracks do not reconstruct the samples"))
    }
}

fn cmd_flow(path: &Path, theta: &str, norm: NormSpec, out: &Path, digits: usize) -> Outcome {
    let thetas = parse_theta_grid(theta)?;
    let input = PathInput::from_json(&read(path)?)?.multisets()?;
    let engine = FlowEngine::new(&input.samples, &input.params, norm)?;
    if engine.is_experimental() {
        log::warn!("flow relative to an essential arc is experimental");
    }
    let result = flow_over_grid(&engine, &thetas)?;
    report_warnings(&result.diagnostics.sampling_warnings);
    if !result.methods_agree() {
        log::error!("winding sum and crossing count disagree");
    }
    let csv = io::flow_csv(&result, digits);
    write(&out.join("flow.csv"), &csv)?;
    write(&out.join("tracks.svg"), &io::tracks_svg(&engine.open().tracks, &thetas))?;
    write(&out.join("flow_diagnostics.json"), &io::to_json(&result.diagnostics)?)?;
    print!("{csv}");
    Ok(())
}

fn cmd_verify(suite: &str, seed: u64, count: Option<usize>, tol: Option<f64>, digits: usize) -> Outcome {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite.parse().map_err(|e: Error| fail(2, e.to_string()))?]
    };
    let mut tolerances = Tolerances::default();
    if let Some(t) = tol {
        if !(t >= f64::EPSILON) {
            return Err(fail(2, format!("tolerance {t} is below machine epsilon")));
        }
        tolerances.inequality = t;
    }
    let mut failed = false;
    for s in suites {
        let n = count.unwrap_or(s.default_count());
        let r = campaign::run_suite(s, seed, n, tolerances);
        let status = if r.passed() { "PASS" } else { "FAIL" };
        println!(
            "{status} {s}: instances {} checks {} failures {} min_slack {}",
            r.instances,
            r.checks,
            r.failures.len(),
            fmt_sig(r.min_slack, digits)
        );
        for f in r.failures.iter().take(20) {
            eprintln!("  {f}");
        }
        failed |= !r.passed();
    }
    if failed {
        Err(fail(1, "verification failures"))
    } else {
        Ok(())
    }
}

fn cmd_gen(recipe: &str, dim: usize, steps: usize, seed: u64, out: Option<&Path>) -> Outcome {
    if dim == 0 {
        return Err(fail(2, "dimension must be positive"));
    }
    let model = OperatorModel::unitary_identity(dim);
    let first_only = |x: f64| {
        let mut g = spectra::CMatrix::zeros(dim, dim);
        g[(0, 0)] = Complex64::new(x, 0.0);
        g
    };
    let path = match recipe {
        "golden" => generate_path(&Recipe::ExpLoop { generator: first_only(1.0) }, &model, steps)?,
        "constant" => generate_path(&Recipe::ExpLoop { generator: first_only(0.0) }, &model, steps)?,
        "half-turn" => {
            let end = spectra::diag(
                &(0..dim).map(|j| spectra::phase(if j == 0 { TAU / 2.0 - 1e-3 } else { 0.0 })).collect::<Vec<_>>(),
            );
            let start = spectra::CMatrix::identity(dim, dim);
            generate_path(&Recipe::Segment { start, end }, &model, steps)?
        }
        "random-loop" => {
            generate_path(&Recipe::RandomLoop { seed, amplitude: 0.5, max_winding: 2 }, &model, steps)?
        }
        file => {
            let recipe: Recipe = serde_json::from_str(&read(Path::new(file))?).map_err(json_error)?;
            generate_path(&recipe, &model, steps)?
        }
    };
    let json = io::to_json(&path)?;
    match out {
        Some(p) => write(p, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn cmd_plot(input: &Path, theta: Option<&str>, norm: NormSpec, out: &Path) -> Outcome {
    let text = read(input)?;
    let tracks = match io::tracks_from_json(&text) {
        Ok(ts) => ts,
        Err(_) => {
            let path = PathInput::from_json(&text)?.multisets()?;
            enumerate_path(&path.samples, &path.params, norm)?.tracks
        }
    };
    let rays = match theta {
        Some(t) => parse_theta_grid(t)?,
        None => Vec::new(),
    };
    write(out, &io::tracks_svg(&tracks, &rays))
}

fn run(cli: Cli) -> Outcome {
    let digits = cli.digits;
    if digits == 0 || digits > 17 {
        return Err(fail(2, "digits must be between 1 and 17"));
    }
    match cli.command {
        Command::Dist { s, t, norm } => cmd_dist(&s, &t, norm, digits),
        Command::Tracks { path, norm, out } => cmd_tracks(&path, norm, out.as_deref(), digits),
        Command::Flow { path, theta, norm, out } => cmd_flow(&path, &theta, norm, &out, digits),
        Command::Verify { suite, seed, count, tol } => cmd_verify(&suite, seed, count, tol, digits),
        Command::Gen { recipe, dim, steps, seed, out } => cmd_gen(&recipe, dim, steps, seed, out.as_deref()),
        Command::Plot { input, theta, norm, out } => cmd_plot(&input, theta.as_deref(), norm, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
