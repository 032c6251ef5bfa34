use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use brownsphere::battery::{stats_battery, BatteryConfig, StatReport};
use brownsphere::cvs::enumerate::count_row;
use brownsphere::cvs::{cvs_forward, cvs_inverse, scaling_profile, LabeledPlaneTree, Quadrangulation};
use brownsphere::inverse::{phi, InverseParams, RecoveryQuality};
use brownsphere::mating::{build_sphere, DistanceMatrix, MarkedSphereSample, Marks, SphereOptions};
use brownsphere::quadvar::{duration_of_values, dyadic_schedule, std_dev};
use brownsphere::rng::split_seed;
use brownsphere::roundtrip::roundtrip;
use brownsphere::rtree::tree_dist;
use brownsphere::snake::{sample_snake, ContourPair};
use brownsphere::Error;

#[derive(Parser)]
#[command(name = "brownsphere", version, about = "Brownian snakes, the sphere they code, and back")]
struct Cli {
    /// JSON file with `sphere` and `inverse` sections; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixFormat {
    Bin,
    Csv,
}

#[derive(Args)]
struct SnakeSource {
    /// Read the snake from this file instead of sampling one.
    #[arg(long)]
    snake_in: Option<PathBuf>,
    #[arg(long, default_value_t = 4096)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SnakeSource {
    fn load(&self) -> Result<ContourPair, Failure> {
        Ok(match &self.snake_in {
            Some(p) => ContourPair::load(p)?,
            None => sample_snake(self.n, self.seed)?,
        })
    }
}

#[derive(Args)]
struct SphereFlags {
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a discretized snake `(f, g)`.
    SampleSnake {
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to standard output.
        #[arg(long)]
        snake_out: Option<PathBuf>,
    },
    /// Sample points of a snake's sphere and write their distance matrix and marks.
    BuildSphere {
        #[command(flatten)]
        src: SnakeSource,
        #[arg(long, short = 'm', default_value_t = 2000)]
        sample_size: usize,
        #[command(flatten)]
        sphere: SphereFlags,
        #[arg(long)]
        out: PathBuf,
        /// Marked points and orientation; defaults to `<out>.marks.json`.
        #[arg(long)]
        marks_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MatrixFormat::Bin)]
        format: MatrixFormat,
    },
    /// Recover a snake from a distance matrix and its marks.
    Invert {
        #[arg(long)]
        sphere_in: PathBuf,
        #[arg(long)]
        marks_in: PathBuf,
        /// Overrides the orientation stored with the marks.
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Option<i8>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sphere, inverse and every residual for one snake; fails unless the
    /// recovered snake matches `h` or its reversal.
    Roundtrip {
        #[command(flatten)]
        src: SnakeSource,
        #[arg(long, short = 'm', default_value_t = 2000)]
        sample_size: usize,
        #[command(flatten)]
        sphere: SphereFlags,
        /// Defaults to standard output.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Distance in the tree coded by `f` between grid times `s` and `t`.
    TreeDist {
        #[arg(long)]
        snake_in: PathBuf,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        t: usize,
    },
    /// Labeled tree to rooted pointed quadrangulation.
    CvsForward {
        #[arg(long)]
        tree_in: PathBuf,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        sign: i8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rooted pointed quadrangulation to labeled tree and sign.
    CvsInverse {
        #[arg(long)]
        map_in: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive counts of trees and quadrangulations up to `n` edges.
    CvsEnumerate {
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Rescaled root-to-pointed distances of uniform quadrangulations, as CSV.
    ScalingProfile {
        #[arg(long, default_value_t = 10_000)]
        n_edges: usize,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Duration of a time-changed Brownian path from its values.
    Quadvar {
        /// One value per line, or comma-separated.
        #[arg(long)]
        path_in: PathBuf,
        /// Decreasing spacings; defaults to `std · 2^-k` for `k = 3..=6`.
        #[arg(long, value_delimiter = ',')]
        eps_schedule: Vec<f64>,
    },
    /// Monte Carlo battery: `s*` uniform, `ε` fair and independent, ball growth.
    Stats {
        #[arg(long, default_value_t = 10_000)]
        runs: usize,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 1 << 14)]
        volume_n: usize,
        #[arg(long, default_value_t = 50)]
        volume_runs: usize,
        #[arg(long, default_value_t = 0.01)]
        level: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Default, Deserialize)]
#[serde(default)]
struct ConfigFile {
    sphere: SphereOptions,
    inverse: InverseParams,
}

enum Failure {
    Usage(String),
    Io(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Param(_) | Error::Index { .. } => Failure::Usage(e.to_string()),
            Error::Io(_) | Error::Format(_) | Error::Structure(_) => Failure::Io(e.to_string()),
            Error::Density(_) => Failure::Check(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn sphere_options(cfg: &ConfigFile, flags: &SphereFlags) -> SphereOptions {
    let mut o = cfg.sphere;
    if let Some(k) = flags.k_max {
        o.k_max = k;
    }
    if let Some(d) = flags.delta {
        o.delta = d;
    }
    o
}

/// A recovered snake in the snake file format, plus what the inverse knows
/// about it.
#[derive(Serialize)]
struct RecoveredFile {
    n: usize,
    seed: u64,
    f: Vec<f64>,
    g: Vec<f64>,
    s_star_hat: f64,
    time_of: Vec<f64>,
    quality: RecoveryQuality,
}

fn read_values(path: &Path) -> Result<Vec<f64>, Failure> {
    fs::read_to_string(path)?
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| Failure::Io(format!("{}: bad value {t:?}: {e}", path.display()))))
        .collect()
}

fn stats_csv(r: &StatReport) -> String {
    let mut s = String::from("name,statistic,p_value,criterion,pass\n");
    for t in &r.tests {
        let p = t.p_value.map(|p| p.to_string()).unwrap_or_default();
        s.push_str(&format!("{},{},{},\"{}\",{}\n", t.name, t.statistic, p, t.criterion, t.pass));
    }
    s
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg: ConfigFile = match &cli.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => ConfigFile::default(),
    };
    match cli.cmd {
        Cmd::SampleSnake { n, seed, snake_out } => {
            let h = sample_snake(n, seed)?;
            write_out(snake_out.as_deref(), &serde_json::to_string(&h)?)
        }
        Cmd::BuildSphere { src, sample_size, sphere, out, marks_out, format } => {
            let h = src.load()?;
            let (sample, sm) = build_sphere(&h, sample_size, &sphere_options(&cfg, &sphere))?;
            match format {
                MatrixFormat::Bin => sample.dist.save(&out)?,
                MatrixFormat::Csv => sample.dist.write_csv(&out)?,
            }
            let marks_path = marks_out.unwrap_or_else(|| PathBuf::from(format!("{}.marks.json", out.display())));
            fs::write(&marks_path, serde_json::to_string_pretty(&sample.marks())?)?;
            if !sm.converged {
                eprintln!("warning: relaxation stopped at k_max = {} before converging", sm.rounds);
            }
            Ok(())
        }
        Cmd::Invert { sphere_in, marks_in, epsilon, out } => {
            let dist = DistanceMatrix::load(&sphere_in)?;
            let mut marks: Marks = serde_json::from_str(&fs::read_to_string(&marks_in)?)?;
            if epsilon.is_some() {
                marks.epsilon = epsilon;
            }
            let sample = MarkedSphereSample::with_marks(dist, &marks)?;
            let rec = phi(&sample, &cfg.inverse)?;
            let m = rec.f_hat.len() - 1;
            let file = RecoveredFile {
                n: m,
                seed: 0,
                f: rec.f_hat,
                g: rec.g_hat,
                s_star_hat: rec.s_star_hat,
                time_of: rec.time_of,
                quality: rec.quality,
            };
            fs::write(&out, serde_json::to_string(&file)?)?;
            Ok(())
        }
        Cmd::Roundtrip { src, sample_size, sphere, report } => {
            let h = src.load()?;
            let r = roundtrip(&h, sample_size, &sphere_options(&cfg, &sphere), &cfg.inverse)?;
            write_out(report.as_deref(), &to_json(&r)?)?;
            if r.end_to_end_pass() {
                Ok(())
            } else {
                Err(Failure::Check("the recovered snake matches neither h nor its reversal".into()))
            }
        }
        Cmd::TreeDist { snake_in, s, t } => {
            let h = ContourPair::load(&snake_in)?;
            println!("{}", tree_dist(&h.f, s, t)?);
            Ok(())
        }
        Cmd::CvsForward { tree_in, sign, out } => {
            let tree = LabeledPlaneTree::from_json(&serde_json::from_str(&fs::read_to_string(&tree_in)?)?)?;
            let q = cvs_forward(&tree, sign)?;
            write_out(out.as_deref(), &serde_json::to_string(&q.to_json())?)
        }
        Cmd::CvsInverse { map_in, out } => {
            let q = Quadrangulation::from_json(&serde_json::from_str(&fs::read_to_string(&map_in)?)?)?;
            let (tree, sign) = cvs_inverse(&q)?;
            let v = serde_json::json!({ "tree": tree.to_json(), "sign": sign });
            write_out(out.as_deref(), &serde_json::to_string(&v)?)
        }
        Cmd::CvsEnumerate { n } => {
            if n > 6 {
                return Err(Failure::Usage(format!("exhaustive enumeration is limited to n <= 6, got {n}")));
            }
            println!("n,labeled_trees,expected_trees,rooted_quadrangulations,pointed_quadrangulations,expected_pointed,match");
            let mut ok = true;
            for k in 1..=n {
                let r = count_row(k);
                ok &= r.matches();
                println!(
                    "{},{},{},{},{},{},{}",
                    r.n,
                    r.labeled_trees,
                    r.expected_trees,
                    r.rooted_quadrangulations,
                    r.pointed_quadrangulations,
                    r.expected_pointed,
                    r.matches()
                );
            }
            if ok {
                Ok(())
            } else {
                Err(Failure::Check("enumeration counts differ from the closed forms".into()))
            }
        }
        Cmd::ScalingProfile { n_edges, runs, seed, out } => {
            let seeds: Vec<u64> = (0..runs as u64).map(|k| split_seed(seed, k)).collect();
            let profile = scaling_profile(n_edges, &seeds)?;
            let mut csv = String::from("run,seed,rescaled_distance\n");
            for (k, (s, d)) in seeds.iter().zip(&profile).enumerate() {
                csv.push_str(&format!("{k},{s},{d}\n"));
            }
            write_out(out.as_deref(), csv.trim_end())
        }
        Cmd::Quadvar { path_in, eps_schedule } => {
            let values = read_values(&path_in)?;
            let schedule = if eps_schedule.is_empty() { dyadic_schedule(std_dev(&values), 3, 6) } else { eps_schedule };
            let est = duration_of_values(&values, &schedule)?;
            println!("duration {}", est.duration);
            println!("eps,crossings,raw,estimate");
            for r in &est.table {
                println!("{},{},{},{}", r.eps, r.crossings, r.raw, r.estimate);
            }
            if !est.stable {
                eprintln!("warning: estimates did not stabilize over the schedule tail");
            }
            Ok(())
        }
        Cmd::Stats { runs, n, volume_n, volume_runs, level, seed, report, format } => {
            let bc = BatteryConfig { num_runs: runs, n, volume_n, volume_runs, level, seed, ..BatteryConfig::default() };
            let r = stats_battery(&bc)?;
            let text = match format {
                Format::Json => to_json(&r)?,
                Format::Csv => stats_csv(&r),
            };
            write_out(report.as_deref(), text.trim_end())?;
            if r.all_pass() {
                Ok(())
            } else {
                Err(Failure::Check("some battery tests failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Ok(t) = std::env::var("CVS_THREADS") {
        match t.parse::<usize>() {
            Ok(k) if k > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
            _ => {
                eprintln!("error: CVS_THREADS must be a positive integer, got {t:?}");
                return ExitCode::from(1);
            }
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(3)
        }
    }
}
