use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use lexguard::eval::{
    generate_corpus, inject_noise, interleave, run_experiment, write_series, CorpusConfig,
    EvalError, LearnerSpec, ObfuscationMix, RunConfig,
};
use lexguard::external::{load_sidecar, ExternalRecord};
use lexguard::features::{Blacklist, OR_FEATURE_NAMES};
use lexguard::learners::{Label, SvmVariant};
use lexguard::lexer::RawUrl;
use lexguard::persist::{format_dataset, parse_label, write_atomic, ModelFile};
use lexguard::pipeline::{FeatureMode, Featurizer};
use lexguard::similarity::{ccdf, cdf, compute_distances, BinaryFeatures};

#[derive(Parser)]
#[command(
    name = "lexguard",
    version,
    about = "Lexical phishing URL classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the features of every URL in a file.
    Extract {
        /// Lines of `<label>\t<url>` or bare URLs.
        file: PathBuf,
        /// Omit the obfuscation-resistant features.
        #[arg(long)]
        no_or: bool,
        /// Sidecar of registration/network records; adds external features.
        #[arg(long, value_name = "FILE")]
        external: Option<PathBuf>,
    },
    /// Run a learner over a labelled stream and save the final model.
    Train(RunArgs),
    /// Run a learner over a labelled stream and report its errors.
    Evaluate(RunArgs),
    /// Classify URLs with a saved model.
    Classify {
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        #[arg(long, value_name = "FILE")]
        external: Option<PathBuf>,
        #[arg(required = true)]
        urls: Vec<String>,
    },
    /// Distances of similarity between URLs of a list.
    AnalyzeSimilarity {
        file: PathBuf,
        /// URLs are similar when they share more than this many binary features.
        #[arg(long, default_value_t = 3)]
        tau: usize,
        /// Use every URL, not only the malicious ones.
        #[arg(long)]
        all: bool,
        /// Per-URL `index\tdelta_min\tdelta_max\turl`; stdout when absent.
        #[arg(long, value_name = "FILE")]
        distances: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        ccdf: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        cdf: Option<PathBuf>,
    },
    /// Write the synthetic drifting corpus as a dataset file.
    GenCorpus {
        #[arg(long, default_value_t = 2010)]
        seed: u64,
        #[arg(long, default_value_t = 8225)]
        size: usize,
        #[arg(long, default_value_t = 4082.0 / 8225.0)]
        phish_ratio: f64,
        /// Weights of obfuscation types I-IV, e.g. `1,1,1,1`.
        #[arg(long, default_value = "1,1,1,1")]
        obfuscation_mix: ObfuscationMix,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Dataset files; benign and malicious records are interleaved in file order.
    #[arg(long = "data", required = true, value_name = "FILE")]
    data: Vec<PathBuf>,
    #[arg(long, default_value = "arow", value_parser = ["perceptron", "cw", "arow", "svm"])]
    learner: String,
    #[arg(long, default_value_t = 0.9)]
    eta: f64,
    /// Sets both AROW regularizers.
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long, default_value_t = 32.0)]
    c: f64,
    #[arg(long, default_value = "multi")]
    variant: SvmVariant,
    #[arg(long, default_value_t = 400)]
    batch: usize,
    /// Initialization batches for the SVM.
    #[arg(long, default_value_t = 10)]
    init_batches: usize,
    /// Initialization URLs for online learners.
    #[arg(long, default_value_t = 4000)]
    init: usize,
    #[arg(long, default_value = "lexical")]
    features: FeatureMode,
    #[arg(long, value_name = "FILE")]
    external: Option<PathBuf>,
    /// Fraction of labels to flip.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Choose hyperparameters by cross-validation on the initialization set.
    #[arg(long)]
    cv: bool,
    /// Write the cumulative error series here.
    #[arg(long, value_name = "FILE")]
    series: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
}

enum Failure {
    /// Bad flags or configuration.
    Usage(String),
    /// Unreadable or malformed input, or failed output.
    Data(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn data_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(m) | Failure::Data(m)) = &f;
            eprintln!("lexguard: {m}");
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Extract {
            file,
            no_or,
            external,
        } => cmd_extract(&file, no_or, external.as_deref()),
        Command::Train(args) => {
            if args.model.is_none() {
                return Err(Failure::Usage("train needs --model".into()));
            }
            cmd_run(&args)
        }
        Command::Evaluate(args) => cmd_run(&args),
        Command::Classify {
            model,
            external,
            urls,
        } => cmd_classify(&model, external.as_deref(), &urls),
        Command::AnalyzeSimilarity {
            file,
            tau,
            all,
            distances,
            ccdf,
            cdf,
        } => cmd_similarity(
            &file,
            tau,
            all,
            distances.as_deref(),
            ccdf.as_deref(),
            cdf.as_deref(),
        ),
        Command::GenCorpus {
            seed,
            size,
            phish_ratio,
            obfuscation_mix,
            output,
        } => {
            if !(0.0..=1.0).contains(&phish_ratio) {
                return Err(Failure::Usage(format!(
                    "--phish-ratio must be in [0, 1], got {phish_ratio}"
                )));
            }
            let corpus = generate_corpus(&CorpusConfig {
                seed,
                size,
                phish_ratio,
                mix: obfuscation_mix,
                ..CorpusConfig::default()
            });
            let stream = corpus.stream();
            let text = format_dataset(stream.items.iter().map(|it| (it.label, &it.url)));
            emit(output.as_deref(), &text)
        }
    }
}

/// Reads `<label>\t<url>` records or bare URLs (label `None`).
fn read_urls(path: &Path) -> Result<Vec<(Option<Label>, RawUrl)>> {
    let text = fs::read_to_string(path).map_err(|e| data_err(path, e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: String| data_err(path, format!("line {}: {m}", n + 1));
        let (label, url) = match line.split_once('\t') {
            Some((l, u)) => {
                let label = parse_label(l.trim())
                    .ok_or_else(|| err(format!("unknown label `{}`", l.trim())))?;
                (Some(label), u.trim())
            }
            None => (None, line.trim()),
        };
        out.push((label, RawUrl::new(url).map_err(|e| err(e.to_string()))?));
    }
    Ok(out)
}

fn read_sidecar(path: Option<&Path>) -> Result<Option<Arc<HashMap<String, ExternalRecord>>>> {
    path.map(|p| load_sidecar(p).map(Arc::new).map_err(|e| data_err(p, e)))
        .transpose()
}

/// Writes to `path` atomically, or to stdout.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()).map_err(|e| data_err(p, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Data(format!("stdout: {e}"))),
    }
}

fn cmd_extract(file: &Path, no_or: bool, external: Option<&Path>) -> Result<()> {
    let records = read_urls(file)?;
    let mode = match (no_or, external.is_some()) {
        (true, true) => {
            return Err(Failure::Usage(
                "--no-or and --external cannot be combined".into(),
            ))
        }
        (true, false) => FeatureMode::LexicalNoOr,
        (false, false) => FeatureMode::Lexical,
        (false, true) => FeatureMode::Full,
    };
    let mut featurizer = Featurizer::new(mode);
    if let Some(records) = read_sidecar(external)? {
        featurizer = featurizer.with_external(records);
    }
    let mut out = String::new();
    for (i, (_, url)) in records.iter().enumerate() {
        let f = featurizer.extract(url).map_err(|e| data_err(file, e))?;
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "url\t{}", url.as_str());
        for t in &f.bag_of_words {
            let _ = writeln!(out, "token\t{t}");
        }
        if let Some(or) = &f.or_features {
            let scaled = or.scaled_values(&featurizer.caps);
            for ((name, raw), s) in OR_FEATURE_NAMES.iter().zip(or.raw_values()).zip(scaled) {
                let _ = writeln!(out, "or\t{name}\t{raw}\t{s}");
            }
        }
        for (k, v) in f.external.iter().flatten() {
            let _ = writeln!(out, "ext\t{k}\t{v}");
        }
    }
    emit(None, &out)
}

fn learner_spec(args: &RunArgs) -> LearnerSpec {
    match args.learner.as_str() {
        "perceptron" => LearnerSpec::Perceptron,
        "cw" => LearnerSpec::Cw { eta: args.eta },
        "svm" => LearnerSpec::Svm {
            c: args.c,
            variant: args.variant,
        },
        _ => LearnerSpec::Arow {
            lambda1: args.lambda1.unwrap_or(args.lambda),
            lambda2: args.lambda2.unwrap_or(args.lambda),
        },
    }
}

fn eval_failure(e: EvalError) -> Failure {
    match e {
        EvalError::Lex { .. } => Failure::Data(e.to_string()),
        _ => Failure::Usage(e.to_string()),
    }
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&args.noise) {
        return Err(Failure::Usage(format!(
            "--noise must be in [0, 1], got {}",
            args.noise
        )));
    }
    if args.batch == 0 {
        return Err(Failure::Usage("--batch must be positive".into()));
    }
    if args.features == FeatureMode::Full && args.external.is_none() {
        return Err(Failure::Usage("--features full needs --external".into()));
    }
    let (mut benign, mut malicious) = (Vec::new(), Vec::new());
    for path in &args.data {
        for (label, url) in read_urls(path)? {
            match label {
                Some(Label::Benign) => benign.push(url),
                Some(Label::Malicious) => malicious.push(url),
                None => return Err(data_err(path, format!("unlabelled URL `{}`", url.as_str()))),
            }
        }
    }
    let (n_benign, n_malicious) = (benign.len(), malicious.len());
    let mut stream = interleave(benign, malicious);
    if args.noise > 0.0 {
        stream = inject_noise(&stream, args.noise, args.seed);
    }

    let learner = learner_spec(args);
    let init_size = if learner.is_online() {
        args.init
    } else {
        args.init_batches * args.batch
    };
    let config = RunConfig {
        init_size,
        batch_size: args.batch,
        feature_mode: args.features,
        learner,
        tune: args.cv,
        seed: args.seed,
        external: read_sidecar(args.external.as_deref())?,
        ..RunConfig::default()
    };
    let outcome = run_experiment(&stream, &config).map_err(eval_failure)?;
    let r = &outcome.result;

    let mut summary = String::new();
    let _ = writeln!(summary, "learner\t{}", outcome.learner.describe());
    let _ = writeln!(summary, "features\t{}", args.features.name());
    let _ = writeln!(
        summary,
        "urls\t{}\t(benign {n_benign}, malicious {n_malicious})",
        stream.len()
    );
    let _ = writeln!(summary, "scored\t{}", r.scored);
    let _ = writeln!(summary, "final_error\t{}", r.final_error);
    let _ = writeln!(summary, "false_positives\t{}", r.false_positives);
    let _ = writeln!(summary, "false_negatives\t{}", r.false_negatives);
    if let Some(c) = &r.clean {
        let _ = writeln!(summary, "clean_error\t{}", c.error);
        let _ = writeln!(summary, "clean_false_positives\t{}", c.false_positives);
        let _ = writeln!(summary, "clean_false_negatives\t{}", c.false_negatives);
    }

    if let Some(path) = &args.series {
        let mut buf = Vec::new();
        write_series(r, &mut buf).map_err(|e| data_err(path, e))?;
        write_atomic(path, &buf).map_err(|e| data_err(path, e))?;
    }
    if let Some(path) = &args.model {
        let mut file = ModelFile::new(outcome.learner, &outcome.featurizer, outcome.model.clone());
        for (k, v) in [
            ("benign", n_benign.to_string()),
            ("malicious", n_malicious.to_string()),
            ("init", init_size.to_string()),
            ("noise", args.noise.to_string()),
            ("seed", args.seed.to_string()),
        ] {
            file.metadata.insert(k.into(), v);
        }
        file.save(path).map_err(|e| data_err(path, e))?;
    }
    emit(None, &summary)
}

fn cmd_classify(model: &Path, external: Option<&Path>, urls: &[String]) -> Result<()> {
    let file = ModelFile::load(model).map_err(|e| data_err(model, e))?;
    let mut featurizer = file.featurizer();
    if let Some(records) = read_sidecar(external)? {
        featurizer = featurizer.with_external(records);
    }
    let mut out = String::new();
    for u in urls {
        let url = RawUrl::new(u).map_err(|e| Failure::Data(format!("`{u}`: {e}")))?;
        let p = file
            .classify(&mut featurizer, &url)
            .map_err(|e| Failure::Data(format!("`{u}`: {e}")))?;
        let label = match p.label {
            Label::Malicious => "phishing",
            Label::Benign => "benign",
        };
        let _ = writeln!(out, "{label}\t{}\t{u}", p.margin);
    }
    emit(None, &out)
}

fn cmd_similarity(
    file: &Path,
    tau: usize,
    all: bool,
    distances: Option<&Path>,
    ccdf_out: Option<&Path>,
    cdf_out: Option<&Path>,
) -> Result<()> {
    let urls: Vec<RawUrl> = read_urls(file)?
        .into_iter()
        .filter(|(label, _)| all || *label != Some(Label::Benign))
        .map(|(_, u)| u)
        .collect();
    let blacklist = Blacklist::default();
    let features = urls
        .iter()
        .map(|u| BinaryFeatures::from_url(u, &blacklist))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| data_err(file, e))?;
    let stats = compute_distances(&features, tau);

    let mut text = String::new();
    for (i, u) in urls.iter().enumerate() {
        let _ = writeln!(
            text,
            "{}\t{}\t{}\t{}",
            i + 1,
            stats.delta_min[i],
            stats.delta_max[i],
            u.as_str()
        );
    }
    emit(distances, &text)?;
    if urls.is_empty() {
        return Ok(());
    }
    let series = |s: Vec<(usize, f64)>| {
        s.iter().fold(String::new(), |mut acc, (t, f)| {
            let _ = writeln!(acc, "{t}\t{f}");
            acc
        })
    };
    if let Some(p) = ccdf_out {
        emit(Some(p), &series(ccdf(&stats.delta_min).expect("non-empty")))?;
    }
    if let Some(p) = cdf_out {
        emit(Some(p), &series(cdf(&stats.delta_max).expect("non-empty")))?;
    }
    Ok(())
}
