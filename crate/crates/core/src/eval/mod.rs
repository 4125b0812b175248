//! Streaming evaluation: stream construction, predict-then-update runs,
//! batch SVM replay, label noise and hyperparameter selection.

mod corpus;
mod cv;
mod run;
mod stream;

pub use corpus::{generate_corpus, Corpus, CorpusConfig, Obfuscation, ObfuscationMix};
pub use cv::{cross_validate, default_grid, CV_FOLDS, C_GRID, ETA_GRID, LAMBDA_GRID};
pub use run::{
    featurize_stream, run_batch_svm, run_experiment, run_online, run_online_examples, write_series,
    CleanConfusion, LearnerSpec, OnlineModel, RunConfig, RunOutcome, RunResult, TrainedModel,
};
pub use stream::{inject_noise, interleave, noise_count, LabeledStream, StreamItem};

use thiserror::Error;

use crate::learners::LearnerError;
use crate::lexer::LexError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("initialization size {init} must be smaller than the stream length {len}")]
    InitTooLarge { init: usize, len: usize },
    #[error(
        "stream of {len} URLs is too short for {batches} initialization batches of {batch_size}"
    )]
    StreamTooShort {
        len: usize,
        batches: usize,
        batch_size: usize,
    },
    #[error("need at least {k} examples for {k}-fold cross-validation, got {n}")]
    TooFewExamples { n: usize, k: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("URL at stream position {position}: {source}")]
    Lex { position: usize, source: LexError },
    #[error(transparent)]
    Learner(#[from] LearnerError),
}
