use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use sdcor::cluster::DbscanParams;
use sdcor::data::{random_sample, read_scores, write_scores, ChunkedDataset, ScoreTable};
use sdcor::eval::{auprc, auroc, extract_outlier_partition, partition_from_ids, pr_points, roc_points, validity};
use sdcor::kv::{read_kv, write_kv};
use sdcor::params::{detect_knee, kdist_graph, tuner_registry, TuneContext};
use sdcor::pipeline::{run, score_dataset, stage_seed, FinalModel, RunConfig, RunLog};
use sdcor::synth::{
    generate, generate_noise_ramp, generate_scaling_family, read_classes, write_generated, FamilyMember,
    GenSpec, OutlierBudget,
};
use sdcor::SdcorError;

mod config;

use config::{default_seed, FileConfig};

#[derive(Debug, Parser)]
#[command(name = "sdcor", version, about = "Out-of-core local outlier detection")]
struct Cli {
    /// Log verbosity (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic Gaussian clusters with shell outliers
    Gen(GenArgs),
    /// Tune DBSCAN parameters on a random sample
    Tune(TuneArgs),
    /// Run the full pipeline and score every row
    Run(RunArgs),
    /// Evaluate a score file against its labels
    Eval(EvalArgs),
    /// Write the sorted k-distance graph of a random sample
    Kdist(KdistArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Numeric CSV, one row per object
    data: PathBuf,

    /// The last column is a 0/1 outlier label, not a feature
    #[arg(long)]
    labeled: bool,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 6)]
    clusters: usize,
    #[arg(long, default_value_t = 30)]
    dims: usize,
    /// Total inliers, split evenly over the clusters
    #[arg(long, default_value_t = 49_500)]
    n: usize,
    /// Outlier share of all rows if below 1, otherwise an absolute count
    #[arg(long, default_value_t = 0.01)]
    outliers: f64,
    #[arg(long, default_value_t = 4.0)]
    inner: f64,
    #[arg(long, default_value_t = 6.0)]
    outer: f64,
    /// Inliers beyond prune·√p from their mean are redrawn
    #[arg(long, default_value_t = 1.0)]
    prune: f64,
    /// Outlier sampler: shell or hypercube
    #[arg(long, default_value = "shell")]
    sampler: String,
    #[arg(long)]
    seed: Option<u64>,
    /// The 11-member noise ramp (2-D, 50%..150% outliers); --out is a directory
    #[arg(long, conflicts_with = "scaling")]
    noise_ramp: bool,
    /// The 10-member scalability family (10-D); --out is a directory
    #[arg(long)]
    scaling: bool,
    /// Output CSV, or directory for a family
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[command(flatten)]
    data: DataArgs,
    /// kdist (knee of the sorted k-distance graph) or pso
    #[arg(long, default_value = "kdist")]
    mode: String,
    /// k of the k-distance graph; the kdist mode uses MinPts = k + 1
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 0.01)]
    eta: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Upper MinPts bound of the swarm search
    #[arg(long)]
    minpts_upper: Option<usize>,
    /// Replace the tuned sample Eps
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 30)]
    swarm: usize,
    #[arg(long, default_value_t = 50)]
    iters: usize,
    /// key=value report (default: <data>.tuning)
    #[arg(long)]
    report: Option<PathBuf>,
    /// Sorted k-distance graph (default: <data>.kdist.csv)
    #[arg(long)]
    kdist_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Numeric CSV, one row per object
    data: PathBuf,
    /// The last column is a 0/1 outlier label
    #[arg(long)]
    labeled: bool,
    /// key=value file with defaults for the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    eta: Option<f64>,
    /// Share of variance kept by a minicluster's principal components
    #[arg(long)]
    lambda: Option<f64>,
    /// Membership radius multiplier
    #[arg(long)]
    alpha: Option<f64>,
    /// Pruning radius multiplier of the final model
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of chunks per pass
    #[arg(long, conflicts_with = "chunk_rows")]
    chunks: Option<usize>,
    #[arg(long)]
    chunk_rows: Option<usize>,
    /// Sample-level Eps (the full-data Eps is half of it)
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    min_pts: Option<usize>,
    /// Read eps_sample and min_pts from a tuning report
    #[arg(long)]
    params: Option<PathBuf>,
    /// Tune on the sample instead of taking --eps/--min-pts
    #[arg(long)]
    auto_tune: bool,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    minpts_upper: Option<usize>,
    /// Final model JSON: written by a full run, read with --score-only
    #[arg(long)]
    model: Option<PathBuf>,
    /// Only score the data with an existing --model
    #[arg(long, requires = "model")]
    score_only: bool,
    /// Score table (default: <data>.scores.csv)
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Per-chunk counters
    #[arg(long)]
    log: Option<PathBuf>,
    /// key=value run summary
    #[arg(long)]
    report: Option<PathBuf>,
    /// Rows still retained after the last chunk
    #[arg(long)]
    retained: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Score table written by `run`
    scores: PathBuf,
    /// Size of the extracted outlier cluster (default: number of labelled outliers)
    #[arg(long)]
    top_o: Option<usize>,
    /// Per-row true classes (0 = outlier); labels are used when absent
    #[arg(long)]
    classes: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// ROC points as fpr,tpr
    #[arg(long)]
    roc: Option<PathBuf>,
    /// Precision-recall points as recall,precision
    #[arg(long)]
    pr: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KdistArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 0.01)]
    eta: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV (default: <data>.kdist.csv)
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Run(a) => cmd_run(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Kdist(a) => cmd_kdist(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 input error, 3 infeasible tuning or sampling, 4 internal invariant.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<SdcorError>() {
        Some(SdcorError::Infeasible(_)) | Some(SdcorError::Numerical(_)) => 3,
        Some(SdcorError::Invariant(_)) => 4,
        _ => 2,
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn seed_or_default(seed: Option<u64>) -> Result<u64> {
    seed.map_or_else(default_seed, Ok)
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let seed = seed_or_default(a.seed)?;
    let shape = |mut spec: GenSpec| {
        spec.inner_radius_mult = a.inner;
        spec.outer_radius_mult = a.outer;
        spec.prune_radius_mult = a.prune;
        spec.sampler = a.sampler.clone();
        spec
    };
    if a.noise_ramp || a.scaling {
        let family = if a.noise_ramp {
            generate_noise_ramp(seed)?
        } else {
            generate_scaling_family(seed)?
        };
        std::fs::create_dir_all(&a.out).map_err(|e| SdcorError::io(&a.out, e))?;
        for FamilyMember { name, spec, data } in family {
            let path = a.out.join(format!("{name}.csv"));
            write_generated(&data, &path, &spec.manifest())?;
            println!("{}: {} rows, {} outliers", path.display(), data.rows.len(), data.outliers());
        }
        return Ok(());
    }
    let budget = if a.outliers < 1.0 {
        OutlierBudget::Fraction(a.outliers)
    } else {
        OutlierBudget::Count(a.outliers.round() as usize)
    };
    let spec = shape(GenSpec::balanced(a.clusters, a.n, a.dims, budget, seed));
    let data = generate(&spec)?;
    write_generated(&data, &a.out, &spec.manifest())?;
    println!("{}: {} rows, {} outliers", a.out.display(), data.rows.len(), data.outliers());
    Ok(())
}

fn cmd_tune(a: TuneArgs) -> Result<()> {
    let seed = seed_or_default(a.seed)?;
    let ds = ChunkedDataset::open(&a.data.data, 1 << 16, a.data.labeled)?;
    let sample = random_sample(&ds, a.eta, stage_seed(seed, 1))?;
    let mut ctx = TuneContext {
        k: a.k,
        eps_override: a.eps,
        minpts_upper: a.minpts_upper,
        ..Default::default()
    };
    ctx.pso.seed = seed;
    ctx.pso.swarm = a.swarm;
    ctx.pso.iters = a.iters;
    let outcome = tuner_registry().get(&a.mode)?.tune(&sample.rows, &ctx)?;

    let kdist_path = a.kdist_csv.unwrap_or_else(|| with_suffix(&a.data.data, ".kdist.csv"));
    outcome.graph.write_csv(&kdist_path)?;
    let report_path = a.report.unwrap_or_else(|| with_suffix(&a.data.data, ".tuning"));
    let p = outcome.params;
    let mut pairs = vec![
        ("eps_sample", p.sample_params.eps.to_string()),
        ("eps_original", p.original_params.eps.to_string()),
        ("min_pts", p.sample_params.min_pts.to_string()),
        ("fitness", p.fitness.to_string()),
        ("seed", seed.to_string()),
        ("mode", outcome.method.to_string()),
        ("k", a.k.to_string()),
        ("eta", a.eta.to_string()),
        ("sample_size", sample.len().to_string()),
    ];
    if let Some(knee) = outcome.knee {
        pairs.push(("knee_rank", knee.index.to_string()));
        pairs.push(("knee_low_confidence", knee.low_confidence.to_string()));
    }
    write_kv(&report_path, &pairs)?;
    println!(
        "eps_sample={} eps_original={} min_pts={} fitness={}",
        p.sample_params.eps, p.original_params.eps, p.sample_params.min_pts, p.fitness
    );
    println!("report: {}; k-distance graph: {}", report_path.display(), kdist_path.display());
    Ok(())
}

/// Sample-level parameters from a tuning report.
fn params_from_report(path: &Path) -> Result<DbscanParams> {
    let kv = read_kv(path)?;
    let field = |key: &str| {
        kv.get(key)
            .ok_or_else(|| SdcorError::invalid(format!("{}: missing key '{key}'", path.display())))
    };
    let eps: f64 = field("eps_sample")?
        .parse()
        .map_err(|_| SdcorError::invalid(format!("{}: eps_sample is not a number", path.display())))?;
    let min_pts: usize = field("min_pts")?
        .parse()
        .map_err(|_| SdcorError::invalid(format!("{}: min_pts is not an integer", path.display())))?;
    Ok(DbscanParams::new(eps, min_pts)?)
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let labeled = a.labeled || file.get::<bool>("labeled")?.unwrap_or(false);
    let ds = ChunkedDataset::open(&a.data, 1 << 16, labeled)?;
    let ds = match (
        file.pick_opt(a.chunks, "chunks")?,
        file.pick_opt(a.chunk_rows, "chunk_rows")?,
    ) {
        (_, Some(rows)) if a.chunks.is_none() => ds.with_chunk_rows(rows)?,
        (Some(c), _) => ds.with_chunk_count(c)?,
        _ => ds.with_chunk_count(10)?,
    };
    let scores_path = a.scores.clone().unwrap_or_else(|| with_suffix(&a.data, ".scores.csv"));

    if a.score_only {
        let model_path = a.model.as_ref().expect("clap requires --model");
        let fm = FinalModel::load(model_path)?;
        let st = score_dataset(&ds, &fm)?;
        write_scores(&st, &scores_path)?;
        println!("scored {} rows with {} clusters -> {}", st.len(), fm.clusters.len(), scores_path.display());
        print_accuracy(&st);
        return Ok(());
    }

    let defaults = RunConfig::default();
    let seed = match file.pick_opt(a.seed, "seed")? {
        Some(s) => s,
        None => default_seed()?,
    };
    let mut cfg = RunConfig {
        eta: file.pick(a.eta, "eta", defaults.eta)?,
        lambda: file.pick(a.lambda, "lambda", defaults.lambda)?,
        alpha: file.pick(a.alpha, "alpha", defaults.alpha)?,
        beta: file.pick(a.beta, "beta", defaults.beta)?,
        seed,
        tuner: file.pick(a.mode.clone(), "mode", defaults.tuner.clone())?,
        retained_path: a.retained.clone(),
        ..defaults
    };
    cfg.tune.k = file.pick(a.k, "k", cfg.tune.k)?;
    cfg.tune.minpts_upper = file.pick_opt(a.minpts_upper, "minpts_upper")?;
    cfg.tune.pso.seed = seed;

    let eps = file.pick_opt(a.eps, "eps")?;
    let min_pts = file.pick_opt(a.min_pts, "min_pts")?;
    cfg.params = if a.auto_tune {
        cfg.tune.eps_override = eps;
        None
    } else if let Some(path) = &a.params {
        Some(params_from_report(path)?)
    } else {
        match (eps, min_pts) {
            (Some(eps), Some(min_pts)) => Some(DbscanParams::new(eps, min_pts)?),
            _ => {
                return Err(SdcorError::invalid(
                    "DBSCAN parameters missing: pass --eps and --min-pts, --params <tuning report>, or --auto-tune",
                )
                .into())
            }
        }
    };

    let out = run(&ds, &cfg).with_context(|| format!("running on {}", a.data.display()))?;
    write_scores(&out.scores, &scores_path)?;
    if let Some(path) = &a.model {
        out.model.save(path)?;
    }
    if let Some(path) = &a.log {
        out.log.write_csv(path)?;
    }
    if let Some(path) = &a.report {
        write_kv(path, &run_report(&cfg, &out.tuned.sample_params, &out.log, &out.scores))?;
    }
    let log = &out.log;
    println!(
        "n={} p={} sample={} eps_sample={} min_pts={} initial_clusters={} miniclusters={} retained={} final_clusters={}",
        log.n,
        log.p,
        log.sample_size,
        out.tuned.sample_params.eps,
        out.tuned.sample_params.min_pts,
        log.t_initial,
        log.miniclusters,
        log.final_retained,
        out.model.clusters.len()
    );
    println!("scores: {}", scores_path.display());
    print_accuracy(&out.scores);
    Ok(())
}

fn run_report(cfg: &RunConfig, params: &DbscanParams, log: &RunLog, st: &ScoreTable) -> Vec<(&'static str, String)> {
    let mut pairs = vec![
        ("n", log.n.to_string()),
        ("p", log.p.to_string()),
        ("eta", cfg.eta.to_string()),
        ("lambda", cfg.lambda.to_string()),
        ("alpha", cfg.alpha.to_string()),
        ("beta", cfg.beta.to_string()),
        ("seed", cfg.seed.to_string()),
        ("eps_sample", params.eps.to_string()),
        ("min_pts", params.min_pts.to_string()),
        ("chunk_rows", log.chunk_rows.to_string()),
        ("chunks", log.chunks.len().to_string()),
        ("sample_size", log.sample_size.to_string()),
        ("initial_clusters", log.t_initial.to_string()),
        ("miniclusters", log.miniclusters.to_string()),
        ("final_retained", log.final_retained.to_string()),
        ("max_retained", log.max_retained.to_string()),
        ("high_water_cells", log.high_water_cells.to_string()),
        ("cell_budget", log.cell_budget().to_string()),
        ("absorptions", log.guard.absorptions.to_string()),
        ("absorption_violations", log.guard.absorption_violations.to_string()),
        ("creations", log.guard.creations.to_string()),
        ("creation_violations", log.guard.creation_violations.to_string()),
        ("seconds_sampling", log.seconds_sampling.to_string()),
        ("seconds_clustering", log.seconds_clustering.to_string()),
        ("seconds_scoring", log.seconds_scoring.to_string()),
    ];
    if let Some(labels) = st.labels() {
        let scores = st.scores();
        if let (Ok(roc), Ok(pr)) = (auroc(&scores, &labels), auprc(&scores, &labels)) {
            pairs.push(("auroc", roc.to_string()));
            pairs.push(("auprc", pr.to_string()));
        }
    }
    pairs
}

fn print_accuracy(st: &ScoreTable) {
    if let Some(labels) = st.labels() {
        let scores = st.scores();
        if let (Ok(roc), Ok(pr)) = (auroc(&scores, &labels), auprc(&scores, &labels)) {
            println!("auroc={roc:.6} auprc={pr:.6}");
        }
    }
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let st = read_scores(&a.scores)?;
    let labels = st.labels().ok_or_else(|| {
        SdcorError::invalid(format!("{}: score table has no label column", a.scores.display()))
    })?;
    let scores = st.scores();
    let roc = auroc(&scores, &labels)?;
    let pr = auprc(&scores, &labels)?;
    let o = a.top_o.unwrap_or_else(|| labels.iter().filter(|&&l| l == 1).count());

    // Truth by row index: the class sidecar if given, otherwise inlier/outlier.
    let mut by_row = vec![0usize; st.len()];
    if !st.is_permutation() {
        return Err(SdcorError::invalid("score table row indices are not 0..n").into());
    }
    match &a.classes {
        Some(path) => {
            let classes = read_classes(path)?;
            if classes.len() != st.len() {
                return Err(SdcorError::DimensionMismatch {
                    expected: st.len(),
                    found: classes.len(),
                }
                .into());
            }
            by_row = classes;
        }
        None => {
            for e in &st.entries {
                by_row[e.index] = usize::from(e.label == Some(0));
            }
        }
    }
    let truth = partition_from_ids(&by_row);
    let predicted = extract_outlier_partition(&st, o)?;
    let v = validity(&predicted, &truth)?;

    let pairs = vec![
        ("auroc", roc.to_string()),
        ("auprc", pr.to_string()),
        ("purity", v.purity.to_string()),
        ("mirkin", v.mirkin.to_string()),
        ("f_measure", v.f_measure.to_string()),
        ("entropy", v.entropy.to_string()),
        ("vi", v.vi.to_string()),
        ("o", o.to_string()),
        ("n", st.len().to_string()),
        ("auprc_rule", "step".to_string()),
    ];
    if let Some(path) = &a.report {
        write_kv(path, &pairs)?;
    }
    if let Some(path) = &a.roc {
        write_points(path, "fpr,tpr", &roc_points(&scores, &labels)?)?;
    }
    if let Some(path) = &a.pr {
        write_points(path, "recall,precision", &pr_points(&scores, &labels)?)?;
    }
    print!("{}", sdcor::kv::format_kv(&pairs));
    Ok(())
}

fn write_points(path: &Path, header: &str, points: &[(f64, f64)]) -> Result<()> {
    let mut body = format!("{header}\n");
    for (x, y) in points {
        body.push_str(&format!("{x},{y}\n"));
    }
    std::fs::write(path, body).map_err(|e| SdcorError::io(path, e))?;
    Ok(())
}

fn cmd_kdist(a: KdistArgs) -> Result<()> {
    let seed = seed_or_default(a.seed)?;
    let ds = ChunkedDataset::open(&a.data.data, 1 << 16, a.data.labeled)?;
    let sample = random_sample(&ds, a.eta, stage_seed(seed, 1))?;
    let graph = kdist_graph(&sample.rows, a.k)?;
    let out = a.out.unwrap_or_else(|| with_suffix(&a.data.data, ".kdist.csv"));
    graph.write_csv(&out)?;
    let knee = detect_knee(&graph)?;
    println!(
        "k={} sample={} knee at rank {}: eps={}{}",
        a.k,
        sample.len(),
        knee.index,
        knee.value,
        if knee.low_confidence { " (low confidence)" } else { "" }
    );
    let s = sample.len() as f64;
    println!(
        "MinPts suggestions: 4, ln(s)={}, 2p={}; MinPts = k + 1 = {}",
        s.ln().floor() as usize,
        2 * ds.p(),
        a.k + 1
    );
    println!("graph: {}", out.display());
    Ok(())
}
