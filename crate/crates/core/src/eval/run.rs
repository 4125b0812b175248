use std::collections::HashMap;
use std::io::{self, Write};
use std::sync::Arc;

use super::cv::{cross_validate, default_grid, CV_FOLDS};
use super::{EvalError, LabeledStream};
use crate::external::ExternalRecord;
use crate::features::FeatureVector;
use crate::learners::{
    Arow, BatchSvm, Cw, Example, GaussianModel, Label, LinearModel, OnlineLearner, Perceptron,
    Prediction, SvmOptions, SvmVariant,
};
use crate::pipeline::{FeatureMode, Featurizer};

/// A learner family together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearnerSpec {
    Perceptron,
    Cw { eta: f64 },
    Arow { lambda1: f64, lambda2: f64 },
    Svm { c: f64, variant: SvmVariant },
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::Perceptron => "perceptron",
            LearnerSpec::Cw { .. } => "cw",
            LearnerSpec::Arow { .. } => "arow",
            LearnerSpec::Svm { .. } => "svm",
        }
    }

    pub fn is_online(&self) -> bool {
        !matches!(self, LearnerSpec::Svm { .. })
    }

    /// Hyperparameters as `(name, value)` pairs, in a fixed order.
    pub fn hyperparameters(&self) -> Vec<(&'static str, String)> {
        match *self {
            LearnerSpec::Perceptron => Vec::new(),
            LearnerSpec::Cw { eta } => vec![("eta", eta.to_string())],
            LearnerSpec::Arow { lambda1, lambda2 } => {
                vec![
                    ("lambda1", lambda1.to_string()),
                    ("lambda2", lambda2.to_string()),
                ]
            }
            LearnerSpec::Svm { c, variant } => vec![
                ("c", c.to_string()),
                ("variant", variant.name().to_string()),
            ],
        }
    }

    /// Inverse of [`name`](Self::name) plus
    /// [`hyperparameters`](Self::hyperparameters).
    pub fn from_parts(name: &str, params: &[(String, String)]) -> Result<Self, String> {
        let get = |key: &str| -> Result<&str, String> {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| format!("learner `{name}` needs parameter `{key}`"))
        };
        let num = |key: &str| -> Result<f64, String> {
            let v = get(key)?;
            v.parse::<f64>()
                .map_err(|e| format!("parameter `{key}`: bad number `{v}`: {e}"))
        };
        let spec = match name {
            "perceptron" => LearnerSpec::Perceptron,
            "cw" => LearnerSpec::Cw { eta: num("eta")? },
            "arow" => LearnerSpec::Arow {
                lambda1: num("lambda1")?,
                lambda2: num("lambda2")?,
            },
            "svm" => LearnerSpec::Svm {
                c: num("c")?,
                variant: get("variant")?.parse()?,
            },
            other => return Err(format!("unknown learner `{other}`")),
        };
        let expected = spec.hyperparameters();
        if let Some((k, _)) = params
            .iter()
            .find(|(k, _)| !expected.iter().any(|(e, _)| e == k))
        {
            return Err(format!("learner `{name}` has no parameter `{k}`"));
        }
        Ok(spec)
    }

    pub fn describe(&self) -> String {
        let mut out = self.name().to_string();
        for (k, v) in self.hyperparameters() {
            out.push_str(&format!(" {k}={v}"));
        }
        out
    }
}

/// An online learner chosen at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum OnlineModel {
    Perceptron(Perceptron),
    Cw(Cw),
    Arow(Arow),
}

impl OnlineModel {
    pub fn from_spec(spec: &LearnerSpec) -> Result<Self, EvalError> {
        Ok(match *spec {
            LearnerSpec::Perceptron => OnlineModel::Perceptron(Perceptron::new()),
            LearnerSpec::Cw { eta } => OnlineModel::Cw(Cw::new(eta)?),
            LearnerSpec::Arow { lambda1, lambda2 } => {
                OnlineModel::Arow(Arow::new(lambda1, lambda2)?)
            }
            LearnerSpec::Svm { .. } => {
                return Err(EvalError::InvalidConfig(
                    "the SVM is not an online learner".into(),
                ));
            }
        })
    }

    pub fn into_trained(self) -> TrainedModel {
        match self {
            OnlineModel::Perceptron(p) => TrainedModel::Linear(p.model),
            OnlineModel::Cw(c) => TrainedModel::Gaussian(c.model),
            OnlineModel::Arow(a) => TrainedModel::Gaussian(a.model),
        }
    }

    fn inner(&self) -> &dyn OnlineLearner {
        match self {
            OnlineModel::Perceptron(p) => p,
            OnlineModel::Cw(c) => c,
            OnlineModel::Arow(a) => a,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn OnlineLearner {
        match self {
            OnlineModel::Perceptron(p) => p,
            OnlineModel::Cw(c) => c,
            OnlineModel::Arow(a) => a,
        }
    }
}

impl OnlineLearner for OnlineModel {
    fn predict(&self, x: &FeatureVector) -> Prediction {
        self.inner().predict(x)
    }

    fn update(&mut self, example: &Example) -> bool {
        self.inner_mut().update(example)
    }

    fn weights(&self) -> &[f64] {
        self.inner().weights()
    }
}

/// Parameters of a finished model, independent of how it was trained.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Linear(LinearModel),
    Gaussian(GaussianModel),
}

impl TrainedModel {
    pub fn weights(&self) -> &[f64] {
        match self {
            TrainedModel::Linear(m) => &m.w,
            TrainedModel::Gaussian(m) => &m.mu,
        }
    }

    pub fn margin(&self, x: &FeatureVector) -> f64 {
        x.dot(self.weights())
    }

    pub fn predict(&self, x: &FeatureVector) -> Prediction {
        Prediction::from_margin(self.margin(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Leading stream items used only for training.
    pub init_size: usize,
    /// Batch size for SVM runs.
    pub batch_size: usize,
    /// Window, in batches, of the multi-batch SVM variants.
    pub multi_window: usize,
    pub feature_mode: FeatureMode,
    pub learner: LearnerSpec,
    /// Replace the learner's hyperparameters by cross-validation on the
    /// initialization segment before running.
    pub tune: bool,
    pub seed: u64,
    /// Sidecar records for [`FeatureMode::Full`].
    pub external: Option<Arc<HashMap<String, ExternalRecord>>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            init_size: 4000,
            batch_size: 400,
            multi_window: 10,
            feature_mode: FeatureMode::Lexical,
            learner: LearnerSpec::Arow {
                lambda1: 0.5,
                lambda2: 0.5,
            },
            tune: false,
            seed: 0,
            external: None,
        }
    }
}

impl RunConfig {
    pub fn featurizer(&self) -> Featurizer {
        let f = Featurizer::new(self.feature_mode);
        match &self.external {
            Some(records) => f.with_external(records.clone()),
            None => f,
        }
    }
}

/// Confusion counts against the labels before noise injection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CleanConfusion {
    pub false_positives: usize,
    pub false_negatives: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// `(t, mistakes / t)` after each scored item, `t` starting at 1.
    pub cumulative_error: Vec<(usize, f64)>,
    /// Benign URLs flagged malicious.
    pub false_positives: usize,
    /// Malicious URLs passed as benign.
    pub false_negatives: usize,
    pub final_error: f64,
    pub scored: usize,
    /// Diagnostic, present only when some scored labels were flipped.
    pub clean: Option<CleanConfusion>,
}

impl RunResult {
    pub fn mistakes(&self) -> usize {
        self.false_positives + self.false_negatives
    }
}

#[derive(Default)]
struct Tally {
    series: Vec<(usize, f64)>,
    fp: usize,
    fn_: usize,
    clean_fp: usize,
    clean_fn: usize,
    noisy: bool,
}

impl Tally {
    fn record(&mut self, predicted: Label, label: Label, clean: Label) {
        match (predicted, label) {
            (Label::Malicious, Label::Benign) => self.fp += 1,
            (Label::Benign, Label::Malicious) => self.fn_ += 1,
            _ => {}
        }
        match (predicted, clean) {
            (Label::Malicious, Label::Benign) => self.clean_fp += 1,
            (Label::Benign, Label::Malicious) => self.clean_fn += 1,
            _ => {}
        }
        self.noisy |= label != clean;
        let t = self.series.len() + 1;
        self.series
            .push((t, (self.fp + self.fn_) as f64 / t as f64));
    }

    fn finish(self) -> RunResult {
        let scored = self.series.len();
        let rate = |m: usize| {
            if scored == 0 {
                0.0
            } else {
                m as f64 / scored as f64
            }
        };
        RunResult {
            final_error: rate(self.fp + self.fn_),
            clean: self.noisy.then(|| CleanConfusion {
                false_positives: self.clean_fp,
                false_negatives: self.clean_fn,
                error: rate(self.clean_fp + self.clean_fn),
            }),
            cumulative_error: self.series,
            false_positives: self.fp,
            false_negatives: self.fn_,
            scored,
        }
    }
}

/// Vectorizes the stream in order, growing `featurizer`'s dictionary. The
/// examples carry the (possibly noisy) stream labels.
pub fn featurize_stream(
    featurizer: &mut Featurizer,
    stream: &LabeledStream,
) -> Result<Vec<Example>, EvalError> {
    stream
        .items
        .iter()
        .enumerate()
        .map(|(position, item)| {
            let x = featurizer
                .vectorize(&item.url)
                .map_err(|source| EvalError::Lex { position, source })?;
            Ok(Example::new(x, item.label))
        })
        .collect()
}

fn clean_labels(stream: &LabeledStream) -> Vec<Label> {
    stream.items.iter().map(|it| it.clean_label()).collect()
}

/// Predict-then-update over pre-built examples. The first `init_size`
/// examples only train.
pub fn run_online_examples<L: OnlineLearner + ?Sized>(
    learner: &mut L,
    examples: &[Example],
    clean: &[Label],
    init_size: usize,
) -> Result<RunResult, EvalError> {
    assert_eq!(examples.len(), clean.len(), "one clean label per example");
    if init_size >= examples.len() {
        return Err(EvalError::InitTooLarge {
            init: init_size,
            len: examples.len(),
        });
    }
    let mut tally = Tally::default();
    for (i, ex) in examples.iter().enumerate() {
        if i >= init_size {
            tally.record(learner.predict(&ex.x).label, ex.y, clean[i]);
        }
        learner.update(ex);
    }
    Ok(tally.finish())
}

/// Result of a run, with the final model and the featurizer that produced
/// its inputs.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub result: RunResult,
    pub learner: LearnerSpec,
    pub model: TrainedModel,
    pub featurizer: Featurizer,
}

fn prepare(
    stream: &LabeledStream,
    config: &RunConfig,
) -> Result<(Featurizer, Vec<Example>), EvalError> {
    if config.init_size >= stream.len() {
        return Err(EvalError::InitTooLarge {
            init: config.init_size,
            len: stream.len(),
        });
    }
    let mut featurizer = config.featurizer();
    let examples = featurize_stream(&mut featurizer, stream)?;
    Ok((featurizer, examples))
}

fn svm_options(config: &RunConfig) -> SvmOptions {
    SvmOptions {
        seed: config.seed,
        ..SvmOptions::default()
    }
}

fn select(config: &RunConfig, examples: &[Example]) -> Result<LearnerSpec, EvalError> {
    if !config.tune {
        return Ok(config.learner);
    }
    let grid = default_grid(&config.learner);
    cross_validate(
        &grid,
        &examples[..config.init_size],
        CV_FOLDS,
        &svm_options(config),
    )
}

fn online(
    spec: LearnerSpec,
    examples: &[Example],
    clean: &[Label],
    init_size: usize,
) -> Result<(RunResult, TrainedModel), EvalError> {
    let mut learner = OnlineModel::from_spec(&spec)?;
    let result = run_online_examples(&mut learner, examples, clean, init_size)?;
    Ok((result, learner.into_trained()))
}

/// Runs the configured online learner (perceptron, CW or AROW) over the
/// stream.
pub fn run_online(stream: &LabeledStream, config: &RunConfig) -> Result<RunOutcome, EvalError> {
    if !config.learner.is_online() {
        return Err(EvalError::InvalidConfig(format!(
            "{} is not an online learner",
            config.learner.name()
        )));
    }
    let (featurizer, examples) = prepare(stream, config)?;
    let learner = select(config, &examples)?;
    let (result, model) = online(learner, &examples, &clean_labels(stream), config.init_size)?;
    Ok(RunOutcome {
        result,
        learner,
        model,
        featurizer,
    })
}

/// Replays the stream in batches for a batch SVM.
///
/// The first `init_size / batch_size` batches initialize the model (the
/// single-batch variants use only the last of them); every later batch is
/// scored with the current model and then revealed to it.
pub fn run_batch_svm(stream: &LabeledStream, config: &RunConfig) -> Result<RunOutcome, EvalError> {
    let LearnerSpec::Svm { variant, .. } = config.learner else {
        return Err(EvalError::InvalidConfig(format!(
            "{} is not a batch SVM",
            config.learner.name()
        )));
    };
    let b = config.batch_size;
    if b == 0 || config.multi_window == 0 {
        return Err(EvalError::InvalidConfig(
            "batch size and window must be positive".into(),
        ));
    }
    if config.init_size == 0 || !config.init_size.is_multiple_of(b) {
        return Err(EvalError::InvalidConfig(format!(
            "initialization size {} is not a positive multiple of the batch size {b}",
            config.init_size
        )));
    }
    let batches = config.init_size / b;
    if stream.len() <= config.init_size {
        return Err(EvalError::StreamTooShort {
            len: stream.len(),
            batches,
            batch_size: b,
        });
    }
    let (featurizer, examples) = prepare(stream, config)?;
    let learner = select(config, &examples)?;
    let LearnerSpec::Svm { c, .. } = learner else {
        unreachable!("tuning keeps the family")
    };
    let clean = clean_labels(stream);

    let init: Vec<Vec<Example>> = examples[..config.init_size]
        .chunks(b)
        .map(<[Example]>::to_vec)
        .collect();
    let mut svm = BatchSvm::initialize(variant, c, svm_options(config), config.multi_window, init)?;
    let mut tally = Tally::default();
    for (k, batch) in examples[config.init_size..].chunks(b).enumerate() {
        let offset = config.init_size + k * b;
        for (j, ex) in batch.iter().enumerate() {
            tally.record(svm.model().predict(&ex.x).label, ex.y, clean[offset + j]);
        }
        svm.push_batch(batch.to_vec())?;
    }
    Ok(RunOutcome {
        result: tally.finish(),
        learner,
        model: TrainedModel::Linear(svm.model().clone()),
        featurizer,
    })
}

/// Dispatches on the configured learner.
pub fn run_experiment(stream: &LabeledStream, config: &RunConfig) -> Result<RunOutcome, EvalError> {
    if config.learner.is_online() {
        run_online(stream, config)
    } else {
        run_batch_svm(stream, config)
    }
}

/// Writes `step<TAB>cumulative_error` lines.
pub fn write_series<W: Write>(result: &RunResult, mut out: W) -> io::Result<()> {
    for (t, e) in &result.cumulative_error {
        writeln!(out, "{t}\t{e}")?;
    }
    Ok(())
}
