//! Batch front-end for the kronsub library.
//!
//! Subcommands synthesize labeled datasets, sweep Monte Carlo error rates,
//! print closed-form geometry, evaluate analytic bounds, and drive the
//! dictionary learner. Outputs are machine readable: JSON documents shaped
//! `{manifest, result}` and comma-separated tables; text artifacts (datasets,
//! models, tables) carry their manifest in a `# manifest:` comment line, so
//! any output can be reproduced from itself. Setting `SOURCE_DATE_EPOCH`
//! pins the manifest timestamps, making replays byte-identical.
//!
//! Exit codes: 0 success, 2 usage error, 1 runtime error.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use kronsub::bounds::{bound_report, capacity_bounds, CapacityParams, TruncationVariant};
use kronsub::classifier::{monte_carlo_pe, DecisionRule};
use kronsub::dataio::{format_tensor_file, load_tensor_file, synth_dataset};
use kronsub::geometry::{diversity_order, expected_pair_rank, Region};
use kronsub::ksld2::{classify_by_reconstruction, fit, format_model, load_model, KSLD2Config};
use kronsub::model::{sample_ensemble, Dims, KSEnsemble, RngStream};
use kronsub::tensorlin::RankTolerance;

#[derive(Parser)]
#[command(
    name = "kronsub",
    version,
    about = "Kronecker-structured subspace classification toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw a class ensemble from the prior and synthesize a labeled dataset.
    Synth(SynthArgs),
    /// Monte Carlo misclassification sweep over an SNR grid.
    Simulate(SimulateArgs),
    /// Closed-form diversity orders and the gap region for given dimensions.
    Geometry(GeometryArgs),
    /// Analytic pairwise and union misclassification bounds over an SNR grid.
    Bounds(BoundsArgs),
    /// Classification capacity bounds for given scaling ratios.
    Capacity(CapacityArgs),
    /// Fit discriminative Kronecker dictionaries to a labeled dataset.
    Learn(LearnArgs),
    /// Classify a dataset with a learned model and report per-signal errors.
    Classify(ClassifyArgs),
}

/// An inclusive numeric grid given as `start:step:stop`, or a single value.
#[derive(Clone, Debug)]
struct Grid {
    raw: String,
    values: Vec<f64>,
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = |what: &str| format!("{what} in range `{s}` (expected start:step:stop or a single number)");
    let values = match parts.as_slice() {
        [one] => vec![one.trim().parse::<f64>().map_err(|_| bad("bad value"))?],
        [start, step, stop] => {
            let start: f64 = start.trim().parse().map_err(|_| bad("bad start"))?;
            let step: f64 = step.trim().parse().map_err(|_| bad("bad step"))?;
            let stop: f64 = stop.trim().parse().map_err(|_| bad("bad stop"))?;
            if !(step > 0.0) {
                return Err(bad("step must be positive"));
            }
            if stop < start {
                return Err(bad("stop must not precede start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|k| start + step * k as f64).collect()
        }
        _ => return Err(bad("wrong number of fields")),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("non-finite value"));
    }
    Ok(Grid { raw: s.to_string(), values })
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RuleArg {
    /// Full Gaussian log-likelihood (quadratic form plus log-determinant).
    Ml,
    /// Quadratic form only, as in distance-based classification.
    Mahalanobis,
}

impl From<RuleArg> for DecisionRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Ml => DecisionRule::FullLikelihood,
            RuleArg::Mahalanobis => DecisionRule::MahalanobisOnly,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TruncArg {
    /// Default branch of the coefficient-count truncation.
    MinusRoot,
    /// Alternate branch of the coefficient-count truncation.
    PlusRoot,
}

impl From<TruncArg> for TruncationVariant {
    fn from(t: TruncArg) -> Self {
        match t {
            TruncArg::MinusRoot => TruncationVariant::MinusRoot,
            TruncArg::PlusRoot => TruncationVariant::PlusRoot,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    m1: usize,
    #[arg(long)]
    m2: usize,
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long)]
    classes: usize,
    /// Ensemble seed; the dataset stream is derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Separate seed for the signal draw, for held-out splits that share
    /// the ensemble. Defaults to --seed.
    #[arg(long)]
    data_seed: Option<u64>,
    #[arg(long, default_value_t = 10)]
    per_class: usize,
    #[arg(long)]
    sigma2: f64,
    /// Dataset file to write (kst v1).
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct EnsembleSource {
    /// Model file whose dictionaries form the ensemble (alternative to dims).
    #[arg(long)]
    ensemble: Option<PathBuf>,
    #[arg(long)]
    m1: Option<usize>,
    #[arg(long)]
    m2: Option<usize>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long)]
    classes: Option<usize>,
    /// Prior draw seed when dims are given.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: EnsembleSource,
    /// SNR grid in dB, `start:step:stop`.
    #[arg(long, value_parser = parse_grid)]
    snr_db: Grid,
    /// Monte Carlo trials per class per grid point.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    mc_seed: u64,
    #[arg(long, value_enum, default_value_t = RuleArg::Ml)]
    rule: RuleArg,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct GeometryArgs {
    #[arg(long)]
    m1: usize,
    #[arg(long)]
    m2: usize,
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    source: EnsembleSource,
    /// SNR grid in dB, `start:step:stop`.
    #[arg(long, value_parser = parse_grid)]
    snr_db: Grid,
    #[arg(long, value_enum, default_value_t = TruncArg::MinusRoot)]
    truncation: TruncArg,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct CapacityArgs {
    #[arg(long)]
    kappa1: f64,
    #[arg(long)]
    kappa2: f64,
    #[arg(long)]
    nu1: f64,
    #[arg(long)]
    nu2: f64,
    #[arg(long)]
    sigma2: f64,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct LearnArgs {
    /// Training dataset (kst v1).
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long, default_value_t = 0.9)]
    mu: f64,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    ridge: f64,
    #[arg(long, default_value_t = 0)]
    init_seed: u64,
    /// Model file to write.
    #[arg(long)]
    out_model: PathBuf,
    /// Objective-per-sweep table to write.
    #[arg(long)]
    out_history: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Per-signal table to write.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

/// Errors split by exit code: usage problems exit 2, runtime failures 1.
enum CliError {
    Usage(String),
    Runtime(String),
}

type CliResult<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn runtime(e: impl Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Provenance block embedded verbatim in every output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunManifest {
    command: String,
    parameters: BTreeMap<String, String>,
    seed: u64,
    tool_version: String,
    started: String,
    finished: String,
}

/// UTC timestamp, RFC 3339. `SOURCE_DATE_EPOCH` overrides the clock so
/// reruns can be byte-identical.
fn now_utc() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse::<i64>().ok())
        .and_then(|s| chrono::DateTime::from_timestamp(s, 0));
    pinned
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

struct ManifestBuilder {
    command: String,
    parameters: BTreeMap<String, String>,
    seed: u64,
    started: String,
}

impl ManifestBuilder {
    fn begin(command: &str) -> Self {
        Self {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            seed: 0,
            started: now_utc(),
        }
    }

    fn param(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    fn seed(&mut self, seed: u64) -> &mut Self {
        self.seed = seed;
        self
    }

    fn finish(self) -> RunManifest {
        RunManifest {
            command: self.command,
            parameters: self.parameters,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started: self.started,
            finished: now_utc(),
        }
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    manifest: &'a RunManifest,
    result: &'a T,
}

/// Writes the `{manifest, result}` document to `path`, or to standard
/// output when no path is given.
fn emit_json<T: Serialize>(doc: &Document<'_, T>, path: Option<&Path>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(doc).map_err(runtime)?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(runtime),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn manifest_comment(manifest: &RunManifest) -> CliResult<String> {
    Ok(format!(
        "# manifest: {}\n",
        serde_json::to_string(manifest).map_err(runtime)?
    ))
}

/// Writes a comma-separated table with the manifest as a leading comment.
fn write_table(
    path: &Path,
    manifest: &RunManifest,
    header: &str,
    rows: &[String],
) -> CliResult<()> {
    let mut text = manifest_comment(manifest)?;
    text.push_str(header);
    text.push('\n');
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    fs::write(path, text).map_err(runtime)
}

/// Resolves an ensemble either from a model file or from a prior draw at
/// the given dimensions. Returns the ensemble and the seed used (0 for
/// file sources).
fn resolve_ensemble(src: &EnsembleSource, mb: &mut ManifestBuilder) -> CliResult<KSEnsemble> {
    if let Some(path) = &src.ensemble {
        if [src.m1, src.m2, src.n1, src.n2, src.classes].iter().any(Option::is_some) {
            return usage("--ensemble conflicts with --m1/--m2/--n1/--n2/--classes");
        }
        let model =
            load_model(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        if model.dicts.is_empty() {
            return Err(CliError::Runtime(format!(
                "{}: model declares no classes",
                path.display()
            )));
        }
        let (m1, m2, n1, n2) = model.dicts[0].factor_dims();
        let dims = Dims::new(m1, m2, n1, n2, model.dicts.len()).map_err(runtime)?;
        mb.param("ensemble", path.display());
        return KSEnsemble::new(dims, model.dicts).map_err(runtime);
    }
    match (src.m1, src.m2, src.n1, src.n2, src.classes) {
        (Some(m1), Some(m2), Some(n1), Some(n2), Some(classes)) => {
            let dims = Dims::new(m1, m2, n1, n2, classes)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            mb.param("m1", m1)
                .param("m2", m2)
                .param("n1", n1)
                .param("n2", n2)
                .param("classes", classes)
                .param("seed", src.seed)
                .seed(src.seed);
            Ok(sample_ensemble(dims, RngStream::new(src.seed, 0)))
        }
        _ => usage("provide either --ensemble or all of --m1 --m2 --n1 --n2 --classes"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Cmd::Synth(a) => run_synth(a),
        Cmd::Simulate(a) => run_simulate(a),
        Cmd::Geometry(a) => run_geometry(a),
        Cmd::Bounds(a) => run_bounds(a),
        Cmd::Capacity(a) => run_capacity(a),
        Cmd::Learn(a) => run_learn(a),
        Cmd::Classify(a) => run_classify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

#[derive(Serialize)]
struct SynthResult {
    signals: usize,
    classes: usize,
    shape: [usize; 2],
    per_class: usize,
    sigma2: f64,
}

fn run_synth(a: SynthArgs) -> CliResult<()> {
    if a.per_class < 1 {
        return usage("--per-class must be at least 1");
    }
    if !(a.sigma2 >= 0.0) {
        return usage("--sigma2 must be nonnegative");
    }
    let dims = Dims::new(a.m1, a.m2, a.n1, a.n2, a.classes)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let data_seed = a.data_seed.unwrap_or(a.seed);
    let mut mb = ManifestBuilder::begin("synth");
    mb.param("m1", a.m1)
        .param("m2", a.m2)
        .param("n1", a.n1)
        .param("n2", a.n2)
        .param("classes", a.classes)
        .param("seed", a.seed)
        .param("data-seed", data_seed)
        .param("per-class", a.per_class)
        .param("sigma2", a.sigma2)
        .seed(a.seed);
    let ens = sample_ensemble(dims, RngStream::new(a.seed, 0));
    let data = synth_dataset(&ens, a.per_class, a.sigma2, RngStream::new(data_seed, 1));
    let manifest = mb.finish();
    let mut text = format_tensor_file(&data);
    text.push_str(&manifest_comment(&manifest)?);
    fs::write(&a.out, text).map_err(runtime)?;
    let result = SynthResult {
        signals: data.len(),
        classes: data.classes(),
        shape: [a.m1, a.m2],
        per_class: a.per_class,
        sigma2: a.sigma2,
    };
    if a.out_json.is_some() {
        emit_json(&Document { manifest: &manifest, result: &result }, a.out_json.as_deref())?;
    }
    println!(
        "wrote {} signals ({} classes, {}x{}) to {}",
        data.len(),
        data.classes(),
        a.m1,
        a.m2,
        a.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct SimulateResult {
    snr_db: Vec<f64>,
    pe: Vec<f64>,
    stderr: Vec<f64>,
    trials_per_class: usize,
    classes: usize,
    rule: String,
}

fn run_simulate(a: SimulateArgs) -> CliResult<()> {
    if a.trials < 1 {
        return usage("--trials must be at least 1");
    }
    let mut mb = ManifestBuilder::begin("simulate");
    let ens = resolve_ensemble(&a.source, &mut mb)?;
    let rule_name = match a.rule {
        RuleArg::Ml => "ml",
        RuleArg::Mahalanobis => "mahalanobis",
    };
    mb.param("snr-db", &a.snr_db.raw)
        .param("trials", a.trials)
        .param("mc-seed", a.mc_seed)
        .param("rule", rule_name);
    let curve = monte_carlo_pe(&ens, &a.snr_db.values, a.trials, a.mc_seed, a.rule.into());
    let manifest = mb.finish();
    let stderr: Vec<f64> = (0..curve.pe.len()).map(|i| curve.stderr(i)).collect();
    let rows: Vec<String> = (0..curve.pe.len())
        .map(|i| {
            format!(
                "{},{},{},{},{}",
                curve.snr_db[i], curve.pe[i], stderr[i], curve.trials, curve.classes
            )
        })
        .collect();
    if let Some(path) = &a.out_csv {
        write_table(path, &manifest, "snr_db,pe,stderr,trials_per_class,classes", &rows)?;
    }
    let result = SimulateResult {
        snr_db: curve.snr_db.clone(),
        pe: curve.pe.clone(),
        stderr,
        trials_per_class: curve.trials,
        classes: curve.classes,
        rule: rule_name.to_string(),
    };
    if a.out_json.is_some() {
        emit_json(&Document { manifest: &manifest, result: &result }, a.out_json.as_deref())?;
    }
    for i in 0..curve.pe.len() {
        println!("snr {:>6.2} dB  pe {:.6e}", curve.snr_db[i], curve.pe[i]);
    }
    Ok(())
}

#[derive(Serialize)]
struct GeometryResult {
    m1: usize,
    m2: usize,
    n1: usize,
    n2: usize,
    d_ks: usize,
    d_std: usize,
    gap: usize,
    region: Region,
    pair_rank: usize,
}

fn run_geometry(a: GeometryArgs) -> CliResult<()> {
    let dims =
        Dims::new(a.m1, a.m2, a.n1, a.n2, 2).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut mb = ManifestBuilder::begin("geometry");
    mb.param("m1", a.m1).param("m2", a.m2).param("n1", a.n1).param("n2", a.n2);
    let rep = diversity_order(dims);
    let result = GeometryResult {
        m1: a.m1,
        m2: a.m2,
        n1: a.n1,
        n2: a.n2,
        d_ks: rep.d_ks,
        d_std: rep.d_std,
        gap: rep.gap,
        region: rep.region,
        pair_rank: expected_pair_rank(dims),
    };
    emit_json(&Document { manifest: &mb.finish(), result: &result }, a.out_json.as_deref())
}

fn run_bounds(a: BoundsArgs) -> CliResult<()> {
    let mut mb = ManifestBuilder::begin("bounds");
    let ens = resolve_ensemble(&a.source, &mut mb)?;
    let trunc_name = match a.truncation {
        TruncArg::MinusRoot => "minus-root",
        TruncArg::PlusRoot => "plus-root",
    };
    mb.param("snr-db", &a.snr_db.raw).param("truncation", trunc_name);
    let report = bound_report(
        &ens,
        &a.snr_db.values,
        &RankTolerance::default(),
        a.truncation.into(),
    )
    .map_err(runtime)?;
    emit_json(&Document { manifest: &mb.finish(), result: &report }, a.out_json.as_deref())
}

#[derive(Serialize)]
struct CapacityResult {
    kappa1: f64,
    kappa2: f64,
    nu1: f64,
    nu2: f64,
    sigma2: f64,
    upper: f64,
    lower: f64,
    prelog_upper: f64,
    prelog_lower: f64,
}

fn run_capacity(a: CapacityArgs) -> CliResult<()> {
    let params = CapacityParams {
        kappa1: a.kappa1,
        kappa2: a.kappa2,
        nu1: a.nu1,
        nu2: a.nu2,
        sigma2: a.sigma2,
    };
    let b = capacity_bounds(&params).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut mb = ManifestBuilder::begin("capacity");
    mb.param("kappa1", a.kappa1)
        .param("kappa2", a.kappa2)
        .param("nu1", a.nu1)
        .param("nu2", a.nu2)
        .param("sigma2", a.sigma2);
    let result = CapacityResult {
        kappa1: a.kappa1,
        kappa2: a.kappa2,
        nu1: a.nu1,
        nu2: a.nu2,
        sigma2: a.sigma2,
        upper: b.upper,
        lower: b.lower,
        prelog_upper: b.prelog_upper,
        prelog_lower: b.prelog_lower,
    };
    emit_json(&Document { manifest: &mb.finish(), result: &result }, a.out_json.as_deref())
}

#[derive(Serialize)]
struct LearnResult {
    classes: usize,
    signals: usize,
    sweeps: usize,
    initial_objective: f64,
    final_objective: f64,
}

fn run_learn(a: LearnArgs) -> CliResult<()> {
    let data = load_tensor_file(&a.data)
        .map_err(|e| runtime(format!("{}: {e}", a.data.display())))?;
    let config = KSLD2Config {
        n1: a.n1,
        n2: a.n2,
        mu: a.mu,
        max_iters: a.max_iters,
        rel_tol: a.rel_tol,
        ridge: a.ridge,
        init_seed: a.init_seed,
    };
    let mut mb = ManifestBuilder::begin("learn");
    mb.param("data", a.data.display())
        .param("n1", a.n1)
        .param("n2", a.n2)
        .param("mu", a.mu)
        .param("max-iters", a.max_iters)
        .param("rel-tol", a.rel_tol)
        .param("ridge", a.ridge)
        .param("init-seed", a.init_seed)
        .seed(a.init_seed);
    let model = fit(&data, &config).map_err(runtime)?;
    let manifest = mb.finish();
    let mut text = format_model(&model);
    text.push_str(&manifest_comment(&manifest)?);
    fs::write(&a.out_model, text).map_err(runtime)?;
    if let Some(path) = &a.out_history {
        let rows: Vec<String> = model
            .history
            .iter()
            .enumerate()
            .map(|(i, f)| format!("{i},{f}"))
            .collect();
        write_table(path, &manifest, "sweep,objective", &rows)?;
    }
    let result = LearnResult {
        classes: model.dicts.len(),
        signals: data.len(),
        sweeps: model.history.len() - 1,
        initial_objective: model.history[0],
        final_objective: *model.history.last().expect("history is never empty"),
    };
    if a.out_json.is_some() {
        emit_json(&Document { manifest: &manifest, result: &result }, a.out_json.as_deref())?;
    }
    println!(
        "fit {} classes in {} sweeps, objective {:.6e} -> {:.6e}; model at {}",
        result.classes,
        result.sweeps,
        result.initial_objective,
        result.final_objective,
        a.out_model.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct ClassifyResult {
    count: usize,
    correct: usize,
    accuracy: f64,
    /// Mean over signals with defined error; None only if every signal is 0.
    mean_nre: Option<f64>,
    note: Option<String>,
    predicted: Vec<usize>,
}

fn run_classify(a: ClassifyArgs) -> CliResult<()> {
    let model = load_model(&a.model)
        .map_err(|e| runtime(format!("{}: {e}", a.model.display())))?;
    let data = load_tensor_file(&a.data)
        .map_err(|e| runtime(format!("{}: {e}", a.data.display())))?;
    let mut mb = ManifestBuilder::begin("classify");
    mb.param("model", a.model.display()).param("data", a.data.display());
    let mut rows = Vec::with_capacity(data.len());
    let mut predicted = Vec::with_capacity(data.len());
    let mut correct = 0;
    let mut nre_sum = 0.0;
    let mut nre_count = 0usize;
    for (j, y) in data.signals().iter().enumerate() {
        let (label, errors) = classify_by_reconstruction(y, &model).map_err(runtime)?;
        let truth = data.labels()[j];
        if label == truth {
            correct += 1;
        }
        let denom = y.norm_squared();
        let nre_cell = if denom > 0.0 {
            let v = errors[label] / denom;
            nre_sum += v;
            nre_count += 1;
            format!("{v}")
        } else {
            String::new()
        };
        rows.push(format!(
            "{j},{truth},{label},{},{nre_cell}",
            u8::from(label == truth)
        ));
        predicted.push(label);
    }
    let manifest = mb.finish();
    if let Some(path) = &a.out_csv {
        write_table(path, &manifest, "index,label,predicted,correct,nre", &rows)?;
    }
    let result = ClassifyResult {
        count: data.len(),
        correct,
        accuracy: correct as f64 / data.len() as f64,
        mean_nre: (nre_count > 0).then(|| nre_sum / nre_count as f64),
        note: (nre_count < data.len())
            .then(|| "zero signals excluded from mean_nre".to_string()),
        predicted,
    };
    if a.out_json.is_some() {
        emit_json(&Document { manifest: &manifest, result: &result }, a.out_json.as_deref())?;
    }
    println!(
        "classified {} signals: accuracy {:.4}, mean nre {}",
        result.count,
        result.accuracy,
        result
            .mean_nre
            .map_or("n/a".to_string(), |v| format!("{v:.6e}")),
    );
    Ok(())
}
