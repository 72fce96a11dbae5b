//! Command-line surface. Every command prints one JSON document on standard
//! output and exits with 0 on success, 1 on usage errors, 2 on data or parse
//! errors and 3 when an analysis fails on valid data.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hausdorff::{hausdorff_distance, hausdorff_distance_oracle, DistanceBreakdown};
use crate::hyperspace::{SetSequence, Truncation};
use crate::ifs::{attractor, Ifs};
use crate::io::{candidate_grid, format_cloud, load_cloud, load_cloud_with_dim, load_ifs, load_manifest};
use crate::metric::{Metric, Point, PointSet};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_ANALYSIS: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "hyperspace", version, about = "Hausdorff distances, set-sequence limits and IFS attractors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Directed and Hausdorff distances between two clouds
    Dist {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
        metric: MetricArg,
        /// Use the full pairwise scan instead of the accelerated path
        #[arg(long)]
        oracle: bool,
    },
    /// Cauchy verdict and modulus for a sequence manifest
    Cauchy(SeqArgs),
    /// Limit set approximation and its convergence trace
    Limit(LimitArgs),
    /// Lower limit of the sequence
    Liminf(LimitArgs),
    /// Upper limit of the sequence
    Limsup(LimitArgs),
    /// Check the neighborhood lemma for a point, optionally with its witness chain
    Lemma(LemmaArgs),
    /// Compare the limit, lower limit and upper limit
    Agree(LimitArgs),
    /// Iterate an IFS from a seed cloud
    Ifs(IfsArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::Manhattan => Metric::Manhattan,
            MetricArg::Chebyshev => Metric::Chebyshev,
        }
    }
}

#[derive(Args, Debug)]
struct SeqArgs {
    manifest: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    metric: MetricArg,
    #[arg(long, default_value_t = 0.5)]
    tail_fraction: f64,
    #[arg(long, default_value_t = 0.2)]
    subseq_fraction: f64,
}

#[derive(Args, Debug)]
struct CandidateArgs {
    /// Add lattice points with this spacing over the sets' bounding box
    #[arg(long)]
    grid: Option<f64>,
    /// Add the points of this cloud as candidates
    #[arg(long)]
    candidates: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LimitArgs {
    #[command(flatten)]
    seq: SeqArgs,
    #[command(flatten)]
    cand: CandidateArgs,
}

#[derive(Args, Debug)]
struct LemmaArgs {
    #[command(flatten)]
    seq: SeqArgs,
    #[command(flatten)]
    cand: CandidateArgs,
    /// Comma-separated coordinates of the point
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[arg(long)]
    m: usize,
    /// Ratio for the witness chain; implies --chain
    #[arg(long)]
    b: Option<f64>,
    /// Also build the witness chain
    #[arg(long)]
    chain: bool,
    /// Scale of the limit approximation [default: --epsilon]
    #[arg(long)]
    limit_epsilon: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args, Debug)]
struct IfsArgs {
    /// IFS JSON file, or builtin:cantor | builtin:sierpinski | builtin:fern
    system: String,
    #[arg(long)]
    seed: PathBuf,
    #[arg(long)]
    iters: usize,
    #[arg(long)]
    budget: usize,
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    metric: MetricArg,
    /// Write the final iterate as CSV
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the per-step table as CSV
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    command: &'a str,
    #[serde(flatten)]
    body: T,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            if shown {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let first = e.to_string();
            let _ = writeln!(err, "{}", first.lines().next().unwrap_or("usage error"));
            return EXIT_USAGE;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        _ if e.is_analysis() => EXIT_ANALYSIS,
        Error::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, command: &str, body: T) -> Result<()> {
    let env = Envelope {
        schema: SCHEMA_VERSION,
        command,
        body,
    };
    let text = serde_json::to_string_pretty(&env).expect("output serializes");
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Dist { a, b, metric, oracle } => {
            let a = load_cloud(&a)?;
            let b = load_cloud(&b)?;
            let metric = Metric::from(metric);
            let breakdown = if oracle {
                hausdorff_distance_oracle(&a, &b, &metric)?
            } else {
                hausdorff_distance(&a, &b, &metric)?
            };
            #[derive(Serialize)]
            struct Body<'a> {
                metric: &'a str,
                oracle: bool,
                #[serde(flatten)]
                breakdown: DistanceBreakdown,
            }
            emit(out, "dist", Body { metric: metric.name(), oracle, breakdown })
        }
        Command::Cauchy(args) => {
            let seq = load_seq(&args)?;
            let report = seq.is_cauchy(args.epsilon)?;
            #[derive(Serialize)]
            struct Body<T> {
                n_sets: usize,
                #[serde(flatten)]
                report: T,
            }
            emit(out, "cauchy", Body { n_sets: seq.len(), report })
        }
        Command::Limit(args) => {
            let seq = load_seq(&args.seq)?;
            let extra = candidates(&seq, &args.cand)?;
            let limit = seq.limit_set(args.seq.epsilon, extra.as_ref())?;
            let trace = seq.convergence_trace(&limit)?;
            #[derive(Serialize)]
            struct Body<L, T> {
                limit: L,
                trace: T,
            }
            emit(out, "limit", Body { limit, trace })
        }
        Command::Liminf(args) => run_bound(args, true, out),
        Command::Limsup(args) => run_bound(args, false, out),
        Command::Lemma(args) => run_lemma(args, out),
        Command::Agree(args) => {
            let seq = load_seq(&args.seq)?;
            let extra = candidates(&seq, &args.cand)?;
            let agreement = seq.limit_characterization_agreement(args.seq.epsilon, extra.as_ref())?;
            emit(out, "agree", agreement)
        }
        Command::Ifs(args) => run_ifs(args, out),
    }
}

fn run_bound(args: LimitArgs, lower: bool, out: &mut dyn Write) -> Result<()> {
    let seq = load_seq(&args.seq)?;
    let extra = candidates(&seq, &args.cand)?;
    let pool = seq.pool(extra.as_ref())?;
    let epsilon = args.seq.epsilon;
    let (command, points) = if lower {
        ("liminf", seq.liminf_set(epsilon, &pool)?)
    } else {
        ("limsup", seq.limsup_set(epsilon, &pool)?)
    };
    #[derive(Serialize)]
    struct Body {
        epsilon: f64,
        n_check: usize,
        candidates_examined: usize,
        size: usize,
        points: Vec<Point>,
    }
    emit(
        out,
        command,
        Body {
            epsilon,
            n_check: seq.n_check(),
            candidates_examined: pool.len(),
            size: points.len(),
            points,
        },
    )
}

fn load_seq(args: &SeqArgs) -> Result<SetSequence> {
    let (_, sets) = load_manifest(&args.manifest)?;
    SetSequence::new(sets, args.metric.into())?.with_truncation(Truncation {
        tail_fraction: args.tail_fraction,
        subseq_fraction: args.subseq_fraction,
        ..Truncation::default()
    })
}

fn candidates(seq: &SetSequence, args: &CandidateArgs) -> Result<Option<PointSet>> {
    let mut extra: Option<PointSet> = None;
    if let Some(path) = &args.candidates {
        extra = Some(load_cloud_with_dim(path, Some(seq.dim()))?);
    }
    if let Some(step) = args.grid {
        let grid = candidate_grid(seq.sets(), step)?;
        extra = Some(match extra {
            Some(c) => c.union(&grid)?,
            None => grid,
        });
    }
    Ok(extra)
}

fn parse_point(text: &str, dim: usize) -> Result<Point> {
    let coords = text
        .split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("invalid coordinate {f:?} in --x")))
        })
        .collect::<Result<Vec<_>>>()?;
    if coords.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "--x has {} coordinates, the sequence has dimension {dim}",
            coords.len()
        )));
    }
    Point::new(coords).map_err(|e| Error::InvalidArgument(format!("--x: {e}")))
}

fn run_lemma(args: LemmaArgs, out: &mut dyn Write) -> Result<()> {
    let seq = load_seq(&args.seq)?;
    let x = parse_point(&args.x, seq.dim())?;
    let extra = candidates(&seq, &args.cand)?;
    let epsilon = args.seq.epsilon;
    let limit = seq.limit_set(args.limit_epsilon.unwrap_or(epsilon), extra.as_ref())?;
    let verdict = seq.main_lemma_check(&x, epsilon, args.m, &limit, args.tol)?;
    let chain = if args.chain || args.b.is_some() {
        Some(seq.witness_chain(&x, epsilon, args.m, args.b.unwrap_or(2.0))?)
    } else {
        None
    };
    #[derive(Serialize)]
    struct Body<V, L, C> {
        verdict: V,
        limit: L,
        chain: Option<C>,
    }
    emit(out, "lemma", Body { verdict, limit, chain })
}

fn load_system(system: &str) -> Result<Ifs> {
    match system.strip_prefix("builtin:") {
        Some(name) => Ifs::builtin(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown builtin system {name:?}"))),
        None => load_ifs(Path::new(system)),
    }
}

fn run_ifs(args: IfsArgs, out: &mut dyn Write) -> Result<()> {
    let sys = load_system(&args.system)?;
    let seed = load_cloud_with_dim(&args.seed, Some(sys.dim()))?;
    let metric = Metric::from(args.metric);
    let trace = attractor(&sys, &seed, args.iters, args.budget, &metric)?;
    if let Some(path) = &args.out {
        fs::write(path, format_cloud(trace.final_set())).map_err(|e| Error::io(path, e))?;
    }
    if let Some(path) = &args.trace {
        let mut table = String::from("step,size,gap,delta\n");
        for s in &trace.steps {
            table.push_str(&format!("{},{},{:?},{:?}\n", s.step, s.size, s.gap, s.delta));
        }
        fs::write(path, table).map_err(|e| Error::io(path, e))?;
    }
    #[derive(Serialize)]
    struct Body<'a, S> {
        contraction: f64,
        iterations: usize,
        final_size: usize,
        total_decimation: f64,
        steps: &'a S,
    }
    emit(
        out,
        "ifs",
        Body {
            contraction: trace.contraction,
            iterations: trace.steps.len(),
            final_size: trace.final_set().len(),
            total_decimation: trace.total_decimation(),
            steps: &trace.steps,
        },
    )
}
