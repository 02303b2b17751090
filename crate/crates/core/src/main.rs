use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::json;

use mvzsl::annotation::{class_description, instance_annotation, prototype_to_name, AnnotationOutput, Vocabulary};
use mvzsl::data::{load_labels, load_manifest, load_matrix, save_matrix, save_named_rows, ViewId};
use mvzsl::graphs::{build_graph_suite, GraphKind, NodeSet};
use mvzsl::harness::experiment::{
    ablate, mean_accuracy, write_records, DataSource, ExperimentConfig, Pipeline, Recognizer, Settings, Variant,
};
use mvzsl::harness::metrics::{compute_metrics, RankingContext};
use mvzsl::harness::synth::{generate_synthetic, SynthConfig};
use mvzsl::mvcca::{CovarianceRidge, Weighting, DEFAULT_LAMBDA};
use mvzsl::propagation::embed_prototypes;
use mvzsl::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "mvzsl", version, about = "Transductive multi-view zero-shot learning")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for data generation and N-shot sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// JSON config: a synthetic config for `synth`, an experiment for
    /// `ablate`, numeric settings otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Power of the eigenvalue weighting.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    eta: Option<f64>,
    /// Neighbours kept per node.
    #[arg(long, global = true)]
    knn: Option<usize>,
    /// Hyperedge cardinality.
    #[arg(long, global = true)]
    khyper: Option<usize>,
    /// Ridge of the semantic projections.
    #[arg(long, global = true)]
    ridge: Option<f64>,
    /// Covariance ridge relative to each view's mean variance.
    #[arg(long, global = true)]
    eps: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct Input {
    /// Dataset manifest.
    #[arg(long)]
    manifest: PathBuf,
    /// Views to embed, e.g. `X,A,V`.
    #[arg(long, value_delimiter = ',', default_values = ["X", "A", "V"])]
    views: Vec<ViewId>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    TwoGraph,
    HeteroHyper,
    HomoHyper,
}

impl From<Kind> for GraphKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::TwoGraph => GraphKind::TwoGraph,
            Kind::HeteroHyper => GraphKind::HeteroHyper,
            Kind::HomoHyper => GraphKind::HomoHyper,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    TmvHlp,
    Nn,
    Dap,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Task {
    /// Attributes of each target instance.
    Instance,
    /// Attributes of each target class from its word vector.
    Class,
    /// Vocabulary words for each class attribute prototype.
    Name,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset with a manifest.
    Synth,
    /// Fit the semantic projections and project the target features.
    Project {
        #[command(flatten)]
        input: Input,
    },
    /// Fit the multi-view CCA and write the embedded target views.
    Embed {
        #[command(flatten)]
        input: Input,
    },
    /// Build the graph suite over the embedded instances and prototypes.
    Graphs {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["two-graph", "hetero-hyper"])]
        kinds: Vec<Kind>,
    },
    /// Zero-shot or N-shot recognition of the target instances.
    Recognize {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["two-graph", "hetero-hyper"])]
        kinds: Vec<Kind>,
        #[arg(long, value_enum, default_value = "tmv-hlp")]
        method: Method,
        /// Labelled instances per class.
        #[arg(long, default_value_t = 0)]
        n_shot: usize,
        /// Leave the prototypes out of the graphs.
        #[arg(long)]
        no_prototypes: bool,
        /// Nearest neighbour in the raw semantic spaces instead of the embedding.
        #[arg(long)]
        raw: bool,
    },
    /// Cross-view annotation.
    Annotate {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        task: Task,
        /// Vocabulary CSV for `name`; defaults to `vocabulary.csv` beside the manifest.
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Length of the top and bottom lists.
        #[arg(long, default_value_t = 5)]
        top: usize,
    },
    /// Score predictions against ground truth.
    Eval {
        /// One predicted class name per line.
        #[arg(long)]
        predictions: PathBuf,
        /// One true class name per line.
        #[arg(long)]
        truth: PathBuf,
        /// Class list; defaults to the sorted names in the truth file.
        #[arg(long)]
        classes: Option<PathBuf>,
        /// Annotation scores (CSV) to score against `--annotation-truth`.
        #[arg(long, requires = "annotation_truth")]
        scores: Option<PathBuf>,
        #[arg(long, requires = "scores")]
        annotation_truth: Option<PathBuf>,
    },
    /// Run a grid of variants over several seeds.
    Ablate,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::ParseFailure {
        context: path.display().to_string(),
        message: e.to_string(),
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

impl Global {
    fn apply(&self, mut s: Settings) -> Settings {
        if let Some(v) = self.eta {
            s.eta = v;
        }
        if let Some(v) = self.knn {
            s.params.knn = v;
        }
        if let Some(v) = self.khyper {
            s.params.k_hyper = v;
        }
        if self.ridge.is_some() {
            s.ridge = self.ridge;
        }
        if let Some(v) = self.eps {
            s.eps = CovarianceRidge::Relative(v);
        }
        s
    }

    fn settings(&self) -> Result<Settings> {
        let base = match &self.config {
            Some(p) => read_json(p)?,
            None => Settings::default(),
        };
        Ok(self.apply(base))
    }

    fn weighting(&self) -> Weighting {
        Weighting::Soft {
            lambda: self.lambda.unwrap_or(DEFAULT_LAMBDA),
        }
    }
}

fn pipeline(g: &Global, input: &Input) -> Result<Pipeline> {
    let (dataset, prototypes) = load_manifest(&input.manifest)?;
    let prototypes = prototypes.ok_or_else(|| Error::InvalidArgument("manifest lists no prototypes".into()))?;
    Pipeline::fit(dataset, prototypes, g.settings()?)
}

fn synth(g: &Global) -> Result<serde_json::Value> {
    let base: SynthConfig = match &g.config {
        Some(p) => read_json(p)?,
        None => SynthConfig::default(),
    };
    let cfg = SynthConfig { seed: g.seed, ..base };
    let data = generate_synthetic(&cfg)?;
    data.write(&g.out)?;
    write_json(&g.out.join("synth_config.json"), &cfg)?;
    Ok(json!({
        "manifest": g.out.join("manifest.json"),
        "auxiliary_instances": data.dataset.n_auxiliary(),
        "target_instances": data.dataset.n_target(),
        "target_classes": data.dataset.target_classes().len(),
    }))
}

fn project(g: &Global, input: &Input) -> Result<serde_json::Value> {
    let p = pipeline(g, input)?;
    create_dir(&g.out)?;
    let mut written = Vec::new();
    for model in p.projections() {
        let view = model.view();
        model.save(&g.out, &format!("projection_{view}"))?;
        let path = g.out.join(format!("target_{view}.csv"));
        save_matrix(p.target_view(view)?.data(), &path)?;
        written.push(json!({"view": view, "ridge": model.ridge(), "dim": model.output_dim(), "path": path}));
    }
    Ok(json!({ "projections": written }))
}

fn embed(g: &Global, input: &Input) -> Result<serde_json::Value> {
    let p = pipeline(g, input)?;
    let model = (*p.embedding(&input.views)?).clone().with_weighting(g.weighting());
    create_dir(&g.out)?;
    model.save(&g.out, "mvcca")?;
    for &v in &input.views {
        let psi = model.embed(p.target_view(v)?)?;
        save_matrix(psi.psi(), g.out.join(format!("embedded_{v}.csv")))?;
    }
    let protos = embed_prototypes(&model, p.prototypes(), &input.views)?;
    for (v, e) in input.views.iter().zip(&protos) {
        save_named_rows(p.prototypes().classes(), e.psi(), g.out.join(format!("embedded_prototypes_{v}.csv")))?;
    }
    Ok(json!({
        "views": input.views,
        "embedding_dim": model.embedding_dim(),
        "eigenvalues": model.eigenvalues(),
    }))
}

fn graphs(g: &Global, input: &Input, kinds: &[Kind]) -> Result<serde_json::Value> {
    let p = pipeline(g, input)?;
    let model = (*p.embedding(&input.views)?).clone().with_weighting(g.weighting());
    let protos = embed_prototypes(&model, p.prototypes(), &input.views)?;
    let mut nodes = Vec::new();
    for (&v, proto) in input.views.iter().zip(&protos) {
        nodes.push(model.embed(p.target_view(v)?)?.stacked(proto)?);
    }
    let set = NodeSet::new(nodes, p.dataset().n_target())?;
    let kinds: Vec<GraphKind> = kinds.iter().map(|&k| k.into()).collect();
    let suite = build_graph_suite(&set, &kinds, p.settings().params)?;
    create_dir(&g.out)?;
    let mut listed = Vec::new();
    for (i, graph) in suite.iter().enumerate() {
        let stem = format!("graph_{i:02}");
        graph.save(&g.out, &stem)?;
        listed.push(json!({"stem": stem, "label": graph.label(), "edges": graph.nnz()}));
    }
    Ok(json!({ "nodes": set.n_nodes(), "graphs": listed }))
}

#[allow(clippy::too_many_arguments)]
fn recognize(
    g: &Global,
    input: &Input,
    kinds: &[Kind],
    method: Method,
    n_shot: usize,
    no_prototypes: bool,
    raw: bool,
) -> Result<serde_json::Value> {
    let p = pipeline(g, input)?;
    let variant = Variant {
        name: "recognize".into(),
        views: input.views.clone(),
        embed: !raw,
        graphs: kinds.iter().map(|&k| k.into()).collect(),
        recognizer: match method {
            Method::TmvHlp => Recognizer::TmvHlp,
            Method::Nn => Recognizer::Nn,
            Method::Dap => Recognizer::Dap,
        },
        n_shot,
        use_prototypes: !no_prototypes,
        weighting: g.weighting(),
    };
    let record = p.run_variant(&variant, g.seed)?;
    write_records(&g.out, std::slice::from_ref(&record), Some(p.dataset().target_classes()))?;
    Ok(json!({
        "predictions": g.out.join(format!("recognize_seed{}_predictions.txt", g.seed)),
        "labelled": record.labelled.len(),
        "metrics": record.metrics,
        "diagnostics": record.diagnostics,
    }))
}

fn annotate(g: &Global, input: &Input, task: Task, vocab: Option<&Path>, top: usize) -> Result<serde_json::Value> {
    let p = pipeline(g, input)?;
    let model = (*p.embedding(&input.views)?).clone().with_weighting(g.weighting());
    let classes = p.prototypes().classes();
    let out: Vec<serde_json::Value> = match task {
        Task::Instance => {
            let scores = instance_annotation(p.dataset().target_features().data(), &model)?;
            rows(&scores, top)
                .into_iter()
                .enumerate()
                .map(|(k, o)| json!({"instance": k, "annotation": o}))
                .collect()
        }
        Task::Class => {
            let wv = p.prototypes().get(ViewId::WordVectors).ok_or(Error::MissingView(ViewId::WordVectors))?;
            let scores = class_description(wv, &model)?;
            rows(&scores, top)
                .into_iter()
                .zip(classes)
                .map(|(o, c)| json!({"class": c, "annotation": o}))
                .collect()
        }
        Task::Name => {
            let path = match vocab {
                Some(v) => v.to_path_buf(),
                None => input.manifest.parent().unwrap_or(Path::new(".")).join("vocabulary.csv"),
            };
            let vocab = Vocabulary::load(&path)?;
            let attrs = p.prototypes().get(ViewId::Attributes).ok_or(Error::MissingView(ViewId::Attributes))?;
            let mut out = Vec::new();
            for (c, class) in classes.iter().enumerate() {
                let row: Vec<f64> = attrs.row(c).iter().copied().collect();
                let truth = vocab.vector(class).map(|_| class.as_str());
                let mut r = prototype_to_name(&row, &model, &vocab, truth)?;
                r.ranked.truncate(top);
                r.similarities.truncate(top);
                out.push(json!({"class": class, "ranking": r}));
            }
            out
        }
    };
    create_dir(&g.out)?;
    let path = g.out.join("annotation.json");
    write_json(&path, &out)?;
    Ok(json!({"task": format!("{task:?}").to_lowercase(), "queries": out.len(), "path": path}))
}

fn rows(scores: &DMatrix<f64>, top: usize) -> Vec<AnnotationOutput> {
    scores
        .row_iter()
        .map(|r| {
            let s: Vec<f64> = r.iter().copied().collect();
            AnnotationOutput::from_scores(&s, top)
        })
        .collect()
}

fn eval(
    predictions: &Path,
    truth: &Path,
    classes: Option<&Path>,
    scores: Option<&Path>,
    annotation_truth: Option<&Path>,
) -> Result<serde_json::Value> {
    let pred = load_labels(predictions)?;
    let truth = load_labels(truth)?;
    let classes = match classes {
        Some(p) => load_labels(p)?,
        None => {
            let mut c = truth.clone();
            c.sort();
            c.dedup();
            c
        }
    };
    let index = |name: &String| {
        classes
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown class {name}")))
    };
    let p = pred.iter().map(index).collect::<Result<Vec<_>>>()?;
    let t = truth.iter().map(index).collect::<Result<Vec<_>>>()?;
    let ranking = match (scores, annotation_truth) {
        (Some(s), Some(a)) => Some(RankingContext {
            annotation: Some((load_matrix(s)?, load_matrix(a)?)),
            ranks: Vec::new(),
        }),
        _ => None,
    };
    let report = compute_metrics(&p, &t, classes.len(), ranking.as_ref())?;
    Ok(serde_json::to_value(report)?)
}

fn run_ablate(g: &Global) -> Result<serde_json::Value> {
    let mut config: ExperimentConfig = match &g.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig {
            data: DataSource::Synthetic(SynthConfig::default()),
            ..ExperimentConfig::default()
        },
    };
    config.settings = g.apply(config.settings);
    if let Some(l) = g.lambda {
        for v in &mut config.variants {
            if let Weighting::Soft { .. } = v.weighting {
                v.weighting = Weighting::Soft { lambda: l };
            }
        }
    }
    let records = ablate(&config)?;
    let classes = match &config.data {
        DataSource::Manifest(path) => Some(load_manifest(path)?.0.target_classes().to_vec()),
        DataSource::Synthetic(_) => None,
    };
    write_records(&g.out, &records, classes.as_deref())?;
    let summary: Vec<_> = mean_accuracy(&records)
        .into_iter()
        .map(|(name, acc)| json!({"variant": name, "mean_class_accuracy": acc}))
        .collect();
    write_json(&g.out.join("summary.json"), &summary)?;
    Ok(json!({ "runs": records.len(), "summary": summary }))
}

fn run(cli: &Cli) -> Result<serde_json::Value> {
    let g = &cli.global;
    match &cli.command {
        Command::Synth => synth(g),
        Command::Project { input } => project(g, input),
        Command::Embed { input } => embed(g, input),
        Command::Graphs { input, kinds } => graphs(g, input, kinds),
        Command::Recognize {
            input,
            kinds,
            method,
            n_shot,
            no_prototypes,
            raw,
        } => recognize(g, input, kinds, *method, *n_shot, *no_prototypes, *raw),
        Command::Annotate { input, task, vocab, top } => annotate(g, input, *task, vocab.as_deref(), *top),
        Command::Eval {
            predictions,
            truth,
            classes,
            scores,
            annotation_truth,
        } => eval(predictions, truth, classes.as_deref(), scores.as_deref(), annotation_truth.as_deref()),
        Command::Ablate => run_ablate(g),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", json!({"error": "Usage", "message": message.trim()}));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(v) => {
            let text = serde_json::to_string_pretty(&v).unwrap_or_else(|_| v.to_string());
            // A closed pipe downstream is not a failure of the command.
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::FAILURE
        }
    }
}
