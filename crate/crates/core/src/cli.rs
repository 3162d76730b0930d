//! Command-line front end: fit, score, stream, grid, compare, generate.
//!
//! All primary output is comma-separated rows with a header line on the
//! standard output (or `--out`); diagnostics go to the error stream. Every
//! randomized code path takes `--seed` and is reproducible byte for byte.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::thread;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{ExposeError, Result};
use crate::evalstats::{
    cd_diagram_data, friedman, holdout_eval, nemenyi_cd, prequential_eval, Alpha, EvalRecord,
};
use crate::features::{dot, FeatureMap, NystroemMap, RksProjection};
use crate::io::{parse_metric_matrix, read_csv, stream_to_csv, Dataset};
use crate::kernels::median_heuristic;
use crate::model::{ExposeModel, Label, Mode, PartialSum};
use crate::persist::{load_model, save_model};
use crate::streamgen::StreamSpec;

const DEFAULT_RKS_FEATURES: usize = 2000;
const DEFAULT_NYSTROEM_FEATURES: usize = 500;
const MEDIAN_HEURISTIC_POINTS: usize = 1000;
/// A stream's parameters can only be configured from its beginning; this
/// many leading instances feed the bandwidth heuristic and landmark choice.
const STREAM_CONFIG_HEAD: usize = 1000;

#[derive(Parser)]
#[command(
    name = "expose",
    version,
    about = "Expected-similarity anomaly scoring over approximate kernel feature maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Fit a batch model from a CSV dataset and store it
    Fit(FitArgs),
    /// Score a CSV dataset against a stored model
    Score(ScoreArgs),
    /// Run a streaming model over a CSV file or a generated stream
    Stream(StreamArgs),
    /// Emit a normalized score grid for a 2-dimensional model
    Grid(GridArgs),
    /// Compare algorithms across datasets: Friedman, Iman-Davenport, Nemenyi
    Compare(CompareArgs),
    /// Expand a stream spec (JSON) into a labeled CSV stream
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapKind {
    Rks,
    Nystroem,
}

#[derive(Clone, Copy)]
pub enum SigmaSpec {
    Auto,
    Fixed(f64),
}

fn parse_sigma(s: &str) -> std::result::Result<SigmaSpec, String> {
    if s == "auto" {
        return Ok(SigmaSpec::Auto);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| format!("expected a positive number or \"auto\", got {s:?}"))?;
    if !(v.is_finite() && v > 0.0) {
        return Err(format!("sigma must be positive and finite, got {v}"));
    }
    Ok(SigmaSpec::Fixed(v))
}

#[derive(Clone, Copy)]
pub enum ModeSpec {
    Online,
    Window(usize),
    Decay(f64),
}

fn parse_mode(s: &str) -> std::result::Result<ModeSpec, String> {
    match s.split_once(':') {
        None if s == "online" => Ok(ModeSpec::Online),
        Some(("window", l)) => {
            let l: usize = l.parse().map_err(|_| format!("bad window length {l:?}"))?;
            if l == 0 {
                return Err("window length must be at least 1".into());
            }
            Ok(ModeSpec::Window(l))
        }
        Some(("decay", g)) => {
            let g: f64 = g.parse().map_err(|_| format!("bad decay rate {g:?}"))?;
            Ok(ModeSpec::Decay(g))
        }
        _ => Err(format!(
            "expected online, window:L or decay:G, got {s:?}"
        )),
    }
}

#[derive(Clone, Copy)]
pub enum EvalSpec {
    Prequential,
    Holdout(usize),
}

fn parse_eval(s: &str) -> std::result::Result<EvalSpec, String> {
    match s.split_once(':') {
        None if s == "prequential" => Ok(EvalSpec::Prequential),
        Some(("holdout", every)) => {
            let every: usize = every
                .parse()
                .map_err(|_| format!("bad holdout interval {every:?}"))?;
            if every == 0 {
                return Err("holdout interval must be at least 1".into());
            }
            Ok(EvalSpec::Holdout(every))
        }
        _ => Err(format!(
            "expected prequential or holdout:EVERY, got {s:?}"
        )),
    }
}

/// Feature-map construction flags shared by `fit` and `stream`.
#[derive(Args)]
pub struct MapArgs {
    /// Feature map family
    #[arg(long, value_enum, default_value = "rks")]
    pub map: MapKind,
    /// Kernel expansions (rks; feature dimension is twice this) or
    /// landmark count (nystroem). Defaults: 2000 rks, 500 nystroem.
    #[arg(long)]
    pub features: Option<usize>,
    /// Kernel bandwidth, or "auto" for the median pairwise distance of a
    /// seeded subsample
    #[arg(long, default_value = "auto", value_parser = parse_sigma)]
    pub sigma: SigmaSpec,
    /// Seed for every random choice (sampling, subsampling)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl MapArgs {
    fn feature_count(&self) -> usize {
        self.features.unwrap_or(match self.map {
            MapKind::Rks => DEFAULT_RKS_FEATURES,
            MapKind::Nystroem => DEFAULT_NYSTROEM_FEATURES,
        })
    }

    fn resolve_sigma(&self, rows: &[Vec<f64>]) -> Result<f64> {
        match self.sigma {
            SigmaSpec::Fixed(v) => Ok(v),
            SigmaSpec::Auto => median_heuristic(rows, MEDIAN_HEURISTIC_POINTS, self.seed),
        }
    }

    fn build(&self, rows: &[Vec<f64>]) -> Result<FeatureMap> {
        let sigma = self.resolve_sigma(rows)?;
        let d = rows
            .first()
            .map(|r| r.len())
            .ok_or(ExposeError::Empty("dataset"))?;
        match self.map {
            MapKind::Rks => Ok(FeatureMap::Rks(RksProjection::fit(
                d,
                self.feature_count(),
                sigma,
                self.seed,
            )?)),
            MapKind::Nystroem => {
                use rand::SeedableRng;
                let count = self.feature_count().min(rows.len());
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed);
                let landmarks: Vec<Vec<f64>> = if count == rows.len() {
                    rows.to_vec()
                } else {
                    rand::seq::index::sample(&mut rng, rows.len(), count)
                        .into_iter()
                        .map(|i| rows[i].clone())
                        .collect()
                };
                Ok(FeatureMap::Nystroem(NystroemMap::fit_auto(
                    landmarks, sigma,
                )?))
            }
        }
    }
}

#[derive(Args)]
pub struct FitArgs {
    /// Training data (CSV; a label column, if present, is ignored)
    pub input: PathBuf,
    #[command(flatten)]
    pub map_args: MapArgs,
    /// Number of concurrent partial-sum workers
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Where to write the model file
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ScoreArgs {
    /// Stored model file
    pub model: PathBuf,
    /// Data to score (CSV)
    pub input: PathBuf,
    /// Decision threshold; adds a class column
    #[arg(long)]
    pub theta: Option<f64>,
    /// Threshold on the normalized score even for batch models
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Args)]
pub struct StreamArgs {
    /// CSV stream, or a stream spec (JSON) when --gen is set
    pub input: PathBuf,
    /// Treat the input as a stream spec and generate the stream
    #[arg(long)]
    pub gen: bool,
    /// Update discipline: online, window:L or decay:G
    #[arg(long, value_parser = parse_mode)]
    pub mode: ModeSpec,
    #[command(flatten)]
    pub map_args: MapArgs,
    /// Decision threshold (required for prequential evaluation)
    #[arg(long)]
    pub theta: Option<f64>,
    /// Evaluation protocol: prequential or holdout:EVERY
    #[arg(long, value_parser = parse_eval)]
    pub eval: Option<EvalSpec>,
    /// Normal instances per generated holdout set
    #[arg(long, default_value_t = 500)]
    pub holdout_normal: usize,
    /// Anomalies per generated holdout set
    #[arg(long, default_value_t = 500)]
    pub holdout_anomaly: usize,
    /// Write output rows here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the final model here
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GridArgs {
    /// Stored model file (input dimension must be 2)
    pub model: PathBuf,
    /// Grid bounds, one comma-separated token: x1lo,x1hi,x2lo,x2hi
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    pub bounds: Vec<f64>,
    /// Points per axis
    #[arg(long, default_value_t = 50)]
    pub resolution: usize,
    /// Write rows here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CompareArgs {
    /// Metric matrix CSV: one row per dataset, one column per algorithm,
    /// optional header row of algorithm names
    pub input: PathBuf,
    /// Significance level (0.05 or 0.10)
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Write rows here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Stream spec (JSON)
    pub spec: PathBuf,
    /// Write the CSV stream here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command; errors map to a nonzero process exit in `main`.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Score(args) => with_output(None, |out| cmd_score(&args, out)),
        Command::Stream(args) => {
            with_output(args.out.clone(), |out| cmd_stream(&args, out))
        }
        Command::Grid(args) => with_output(args.out.clone(), |out| cmd_grid(&args, out)),
        Command::Compare(args) => {
            with_output(args.out.clone(), |out| cmd_compare(&args, out))
        }
        Command::Generate(args) => {
            with_output(args.out.clone(), |out| cmd_generate(&args, out))
        }
    }
}

fn with_output(path: Option<PathBuf>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(path) => {
            let file = fs::File::create(&path)?;
            let mut out = BufWriter::new(file);
            f(&mut out)?;
            out.flush()?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            f(&mut out)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Chunked concurrent batch fit: partial sums per worker, merged in chunk
/// order, then finalized.
pub fn fit_batch_parallel(
    map: &FeatureMap,
    rows: &[Vec<f64>],
    threads: usize,
) -> Result<ExposeModel> {
    if threads == 0 {
        return Err(ExposeError::InvalidParameter {
            name: "threads",
            reason: "must be at least 1".into(),
        });
    }
    if rows.is_empty() {
        return Err(ExposeError::Empty("dataset"));
    }
    let workers = threads.min(rows.len());
    let chunk_size = rows.len().div_ceil(workers);
    let parts: Vec<PartialSum> = thread::scope(|scope| {
        let handles: Vec<_> = rows
            .chunks(chunk_size)
            .map(|chunk| scope.spawn(move || PartialSum::fit(map, chunk)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("partial-sum worker panicked"))
            .collect::<Result<Vec<_>>>()
    })?;
    ExposeModel::from_partial_sums(map.clone(), &parts)
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let dataset = read_csv(&args.input)?;
    let map = args.map_args.build(&dataset.rows)?;
    let model = fit_batch_parallel(&map, &dataset.rows, args.threads)?;
    save_model(&model, &args.out)?;
    eprintln!(
        "fitted batch model: {} rows, input dim {}, feature dim {}, sigma {}",
        dataset.len(),
        map.input_dim(),
        map.feature_dim(),
        map.sigma()
    );
    Ok(())
}

fn check_dims(model: &ExposeModel, dataset: &Dataset) -> Result<()> {
    if dataset.dimension() != model.map().input_dim() {
        return Err(ExposeError::DimensionMismatch {
            expected: model.map().input_dim(),
            actual: dataset.dimension(),
        });
    }
    Ok(())
}

fn write_score_row(
    out: &mut dyn Write,
    index: usize,
    model: &ExposeModel,
    x: &[f64],
    theta: Option<f64>,
    normalize: bool,
) -> Result<()> {
    let weights_norm_sq = dot(model.weights(), model.weights());
    let scored = model.score(x, weights_norm_sq > 0.0)?;
    let normalized = scored.normalized.unwrap_or(f64::NAN);
    if normalize && scored.normalized.is_none() {
        return Err(ExposeError::ZeroNormWeights);
    }
    match theta {
        Some(theta) => {
            let decision = if normalize { normalized } else { scored.raw };
            let class = if decision > theta {
                Label::Normal
            } else {
                Label::Anomaly
            };
            writeln!(out, "{index},{},{normalized},{class}", scored.raw)?;
        }
        None => writeln!(out, "{index},{},{normalized}", scored.raw)?,
    }
    Ok(())
}

fn cmd_score(args: &ScoreArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    let dataset = read_csv(&args.input)?;
    check_dims(&model, &dataset)?;
    let normalize = model.normalize_default() || args.normalize;
    if args.theta.is_some() {
        writeln!(out, "index,raw,normalized,class")?;
    } else {
        writeln!(out, "index,raw,normalized")?;
    }
    for (index, row) in dataset.rows.iter().enumerate() {
        write_score_row(out, index, &model, row, args.theta, normalize)?;
    }
    Ok(())
}

fn write_records(out: &mut dyn Write, records: &[EvalRecord]) -> Result<()> {
    writeln!(out, "index,protocol,metric,value")?;
    for r in records {
        writeln!(out, "{},{},{},{}", r.index, r.protocol, r.metric, r.value)?;
    }
    Ok(())
}

fn cmd_stream(args: &StreamArgs, out: &mut dyn Write) -> Result<()> {
    let (rows, labels, spec): (Vec<Vec<f64>>, Option<Vec<Label>>, Option<StreamSpec>) =
        if args.gen {
            let spec: StreamSpec = serde_json::from_str(&fs::read_to_string(&args.input)?)
                .map_err(|e| ExposeError::InvalidSpec(e.to_string()))?;
            let stream = spec.generate()?;
            let rows = stream.iter().map(|i| i.values.clone()).collect();
            let labels = stream.iter().map(|i| i.label).collect();
            (rows, Some(labels), Some(spec))
        } else {
            let dataset = read_csv(&args.input)?;
            (dataset.rows, dataset.labels, None)
        };

    let head = &rows[..rows.len().min(STREAM_CONFIG_HEAD)];
    let map = args.map_args.build(head)?;
    let mode = match args.mode {
        ModeSpec::Online => Mode::Online,
        ModeSpec::Window(l) => Mode::Window { len: l },
        ModeSpec::Decay(g) => Mode::Decay { gamma: g },
    };
    let mut model = ExposeModel::streaming(map, mode)?;

    match args.eval {
        None => {
            // Score-then-update pass; the first instance only trains.
            if args.theta.is_some() {
                writeln!(out, "index,raw,normalized,class")?;
            } else {
                writeln!(out, "index,raw,normalized")?;
            }
            for (index, row) in rows.iter().enumerate() {
                if model.count() > 0 {
                    write_score_row(out, index, &model, row, args.theta, true)?;
                }
                model.update(row)?;
            }
        }
        Some(EvalSpec::Prequential) => {
            let labels = labels.ok_or_else(|| {
                ExposeError::Parse("prequential evaluation needs a label column".into())
            })?;
            let theta = args.theta.ok_or(ExposeError::InvalidParameter {
                name: "theta",
                reason: "prequential evaluation needs --theta".into(),
            })?;
            let stream: Vec<(Vec<f64>, Label)> =
                rows.into_iter().zip(labels).collect();
            let records = prequential_eval(&stream, &mut model, theta)?;
            write_records(out, &records)?;
        }
        Some(EvalSpec::Holdout(every)) => {
            let spec = spec.as_ref().ok_or(ExposeError::InvalidParameter {
                name: "eval",
                reason: "holdout evaluation needs a generated stream (--gen)".into(),
            })?;
            let mut holdouts = HashMap::new();
            for concept in 0..spec.concepts.len() {
                holdouts.insert(
                    concept,
                    spec.holdout_for_concept(
                        concept,
                        args.holdout_normal,
                        args.holdout_anomaly,
                        spec.seed.wrapping_add(1 + concept as u64),
                    )?,
                );
            }
            let stream: Vec<(Vec<f64>, usize)> = rows
                .into_iter()
                .enumerate()
                .map(|(t, row)| (row, spec.concept_at(t)))
                .collect();
            let records = holdout_eval(&stream, &mut model, &holdouts, every, args.theta)?;
            write_records(out, &records)?;
        }
    }

    if let Some(path) = &args.model_out {
        save_model(&model, path)?;
    }
    eprintln!(
        "streamed {} instances in {} mode",
        model.count(),
        model.mode().name()
    );
    Ok(())
}

fn cmd_grid(args: &GridArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    if model.map().input_dim() != 2 {
        return Err(ExposeError::InvalidParameter {
            name: "model",
            reason: format!(
                "score grid needs a 2-dimensional model, got dimension {}",
                model.map().input_dim()
            ),
        });
    }
    let [x1_lo, x1_hi, x2_lo, x2_hi] = args.bounds[..] else {
        return Err(ExposeError::InvalidParameter {
            name: "bounds",
            reason: "expected x1lo,x1hi,x2lo,x2hi".into(),
        });
    };
    if !(x1_lo < x1_hi && x2_lo < x2_hi) {
        return Err(ExposeError::InvalidParameter {
            name: "bounds",
            reason: "lower bounds must be below upper bounds".into(),
        });
    }
    if args.resolution < 2 {
        return Err(ExposeError::InvalidParameter {
            name: "resolution",
            reason: "must be at least 2".into(),
        });
    }
    let steps = (args.resolution - 1) as f64;
    writeln!(out, "x1,x2,score")?;
    for i in 0..args.resolution {
        let x1 = x1_lo + (x1_hi - x1_lo) * i as f64 / steps;
        for j in 0..args.resolution {
            let x2 = x2_lo + (x2_hi - x2_lo) * j as f64 / steps;
            let scored = model.score(&[x1, x2], true)?;
            writeln!(out, "{x1},{x2},{}", scored.normalized.expect("normalized"))?;
        }
    }
    Ok(())
}

fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> Result<()> {
    let (matrix, names) = parse_metric_matrix(&fs::read_to_string(&args.input)?)?;
    let alpha = Alpha::from_value(args.alpha)?;
    let outcome = friedman(&matrix)?;
    let k = outcome.ranks.algorithms();
    let m = outcome.ranks.datasets();
    let cd = nemenyi_cd(k, m, alpha)?;
    let diagram = cd_diagram_data(&outcome.ranks, alpha)?;

    let names: Vec<String> =
        names.unwrap_or_else(|| (1..=k).map(|i| format!("alg{i}")).collect());

    writeln!(out, "statistic,value")?;
    writeln!(out, "chi2_f,{}", outcome.chi2_f)?;
    writeln!(out, "f_f,{}", outcome.f_f)?;
    writeln!(out, "df1,{}", outcome.df1)?;
    writeln!(out, "df2,{}", outcome.df2)?;
    writeln!(out, "cd,{cd}")?;
    writeln!(out)?;
    writeln!(out, "algorithm,average_rank,group_id")?;
    for (group_id, group) in diagram.groups.iter().enumerate() {
        for &algorithm in group {
            writeln!(
                out,
                "{},{},{group_id}",
                names[algorithm], diagram.average_ranks[algorithm]
            )?;
        }
    }
    Ok(())
}

fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let spec: StreamSpec = serde_json::from_str(&fs::read_to_string(&args.spec)?)
        .map_err(|e| ExposeError::InvalidSpec(e.to_string()))?;
    let stream = spec.generate()?;
    out.write_all(stream_to_csv(&stream).as_bytes())?;
    Ok(())
}

/// Entry point shared by the binary; kept in the library so integration
/// tests can drive commands in-process.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version by "erroring" with exit code 0.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
