//! Labelled dataset files and the text model format.
//!
//! Dataset files hold one `<label>\t<url>` record per line, with labels
//! `+1`/`phish` for malicious and `-1`/`benign` for benign. Blank lines and
//! lines starting with `#` are skipped.
//!
//! A model file is line oriented; fields are separated by single tabs
//! (shown as spaces here):
//!
//! ```text
//! PHISHDEF-MODEL v1
//! format_version 1
//! learner arow
//! param lambda1 0.5
//! param lambda2 0.5
//! feature_mode lexical
//! caps 256 32 ...
//! blacklist paypal
//! meta examples 8225
//! kind gaussian
//! dimension 1834
//! dict 21 dom=com
//! weight 0 0.125
//! sigma 0 0.75
//! end
//! ```
//!
//! `dict` lines carry feature-vector indices, which start after the 21 OR
//! features. Only weights different from 0 and variances different from 1
//! are written. Floats use the shortest representation that parses back to
//! the same value, so loading and saving reproduces the file byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;

use thiserror::Error;

use crate::eval::{LearnerSpec, TrainedModel};
use crate::features::{feature_index, Blacklist, FeatureDictionary, FeatureVector, ScalingCaps};
use crate::learners::{GaussianModel, Label, LinearModel, Prediction};
use crate::lexer::{LexError, RawUrl};
use crate::pipeline::{FeatureMode, Featurizer};

pub const MODEL_HEADER: &str = "PHISHDEF-MODEL v1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("reading dataset: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model file I/O: {0}")]
    Io(#[from] io::Error),
    #[error("model file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot save model: {0}")]
    Invalid(String),
}

/// Parses `+1`, `phish`, `-1` or `benign`.
pub fn parse_label(text: &str) -> Option<Label> {
    match text {
        "+1" | "1" | "phish" => Some(Label::Malicious),
        "-1" | "benign" => Some(Label::Benign),
        _ => None,
    }
}

pub fn parse_dataset(text: &str) -> Result<Vec<(Label, RawUrl)>, DatasetError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| DatasetError::Parse {
            line: n + 1,
            message,
        };
        let (label, url) = line
            .split_once('\t')
            .ok_or_else(|| err("expected `<label>\\t<url>`".into()))?;
        let label = parse_label(label.trim())
            .ok_or_else(|| err(format!("unknown label `{}`", label.trim())))?;
        let url = RawUrl::new(url.trim()).map_err(|e| err(e.to_string()))?;
        out.push((label, url));
    }
    Ok(out)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<(Label, RawUrl)>, DatasetError> {
    parse_dataset(&fs::read_to_string(path)?)
}

pub fn format_dataset<'a>(records: impl IntoIterator<Item = (Label, &'a RawUrl)>) -> String {
    let mut out = String::new();
    for (label, url) in records {
        let tag = match label {
            Label::Malicious => "+1",
            Label::Benign => "-1",
        };
        let _ = writeln!(out, "{tag}\t{}", url.as_str());
    }
    out
}

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> io::Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// A trained classifier with everything needed to featurize new URLs.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub learner: LearnerSpec,
    pub feature_mode: FeatureMode,
    pub caps: ScalingCaps,
    pub blacklist: Blacklist,
    /// Free-form training metadata, e.g. example counts and the seed.
    pub metadata: BTreeMap<String, String>,
    /// Dictionary keys in dictionary order.
    pub dictionary: Vec<String>,
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn new(learner: LearnerSpec, featurizer: &Featurizer, model: TrainedModel) -> Self {
        ModelFile {
            learner,
            feature_mode: featurizer.mode,
            caps: featurizer.caps,
            blacklist: featurizer.blacklist.clone(),
            metadata: BTreeMap::new(),
            dictionary: featurizer.dictionary.keys().to_vec(),
            model,
        }
    }

    /// Featurizer with a frozen dictionary. External features see no
    /// sidecar records unless one is attached.
    pub fn featurizer(&self) -> Featurizer {
        let mut f = Featurizer::new(self.feature_mode);
        f.caps = self.caps;
        f.blacklist = self.blacklist.clone();
        f.dictionary = FeatureDictionary::from_keys(self.dictionary.iter().cloned());
        f.dictionary.freeze();
        f
    }

    pub fn predict(&self, x: &FeatureVector) -> Prediction {
        self.model.predict(x)
    }

    pub fn classify(
        &self,
        featurizer: &mut Featurizer,
        url: &RawUrl,
    ) -> Result<Prediction, LexError> {
        Ok(self.predict(&featurizer.vectorize(url)?))
    }

    pub fn to_text(&self) -> Result<String, ModelError> {
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_HEADER}");
        let _ = writeln!(out, "format_version\t{FORMAT_VERSION}");
        let _ = writeln!(out, "learner\t{}", self.learner.name());
        for (k, v) in self.learner.hyperparameters() {
            let _ = writeln!(out, "param\t{k}\t{v}");
        }
        let _ = writeln!(out, "feature_mode\t{}", self.feature_mode.name());
        let caps: Vec<String> = self.caps.0.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "caps\t{}", caps.join("\t"));
        for w in self.blacklist.words() {
            if !is_field(w) {
                return Err(ModelError::Invalid(format!("blacklist word {w:?}")));
            }
            let _ = writeln!(out, "blacklist\t{w}");
        }
        for (k, v) in &self.metadata {
            if !is_field(k) || v.contains(['\t', '\n', '\r']) {
                return Err(ModelError::Invalid(format!("metadata entry {k:?}")));
            }
            let _ = writeln!(out, "meta\t{k}\t{v}");
        }
        let (kind, mu, sigma) = match &self.model {
            TrainedModel::Linear(m) => ("linear", &m.w, None),
            TrainedModel::Gaussian(m) => ("gaussian", &m.mu, Some(&m.sigma)),
        };
        if let Some(s) = sigma {
            if s.len() != mu.len() {
                return Err(ModelError::Invalid(
                    "mean and variance lengths differ".into(),
                ));
            }
        }
        let _ = writeln!(out, "kind\t{kind}");
        let _ = writeln!(out, "dimension\t{}", mu.len());
        for (i, key) in self.dictionary.iter().enumerate() {
            if !is_field(key) {
                return Err(ModelError::Invalid(format!("dictionary key {key:?}")));
            }
            let _ = writeln!(out, "dict\t{}\t{key}", feature_index(i));
        }
        for (i, &w) in mu.iter().enumerate() {
            if !w.is_finite() {
                return Err(ModelError::Invalid(format!("weight {i} is {w}")));
            }
            if w != 0.0 {
                let _ = writeln!(out, "weight\t{i}\t{w}");
            }
        }
        if let Some(sigma) = sigma {
            for (i, &s) in sigma.iter().enumerate() {
                if !s.is_finite() {
                    return Err(ModelError::Invalid(format!("variance {i} is {s}")));
                }
                if s != 1.0 {
                    let _ = writeln!(out, "sigma\t{i}\t{s}");
                }
            }
        }
        out.push_str("end\n");
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        Parser::default().run(text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        write_atomic(path, self.to_text()?.as_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

#[derive(Default)]
struct Parser {
    learner: Option<String>,
    params: Vec<(String, String)>,
    feature_mode: Option<FeatureMode>,
    caps: Option<ScalingCaps>,
    blacklist: Vec<String>,
    metadata: BTreeMap<String, String>,
    kind: Option<String>,
    dimension: Option<usize>,
    dictionary: Vec<String>,
    weights: Vec<(usize, f64)>,
    sigmas: Vec<(usize, f64)>,
}

impl Parser {
    fn run(mut self, text: &str) -> Result<ModelFile, ModelError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, MODEL_HEADER)) => {}
            _ => return Err(perr(1, format!("expected header `{MODEL_HEADER}`"))),
        }
        let mut ended = false;
        for (n, line) in lines {
            let line_no = n + 1;
            if ended {
                return Err(perr(line_no, "content after `end`"));
            }
            let fields: Vec<&str> = line.split('\t').collect();
            self.line(line_no, &fields)?;
            ended = fields[0] == "end";
        }
        if !ended {
            return Err(perr(
                text.lines().count(),
                "missing `end` line (truncated file?)",
            ));
        }
        let last = text.lines().count();
        self.finish(last)
    }

    fn line(&mut self, n: usize, f: &[&str]) -> Result<(), ModelError> {
        let arity = |k: usize| {
            if f.len() == k {
                Ok(())
            } else {
                Err(perr(
                    n,
                    format!("`{}` takes {} field(s), found {}", f[0], k - 1, f.len() - 1),
                ))
            }
        };
        match f[0] {
            "format_version" => {
                arity(2)?;
                if f[1] != FORMAT_VERSION.to_string() {
                    return Err(perr(n, format!("unsupported format version `{}`", f[1])));
                }
            }
            "learner" => {
                arity(2)?;
                self.learner = Some(f[1].to_string());
            }
            "param" => {
                arity(3)?;
                self.params.push((f[1].to_string(), f[2].to_string()));
            }
            "feature_mode" => {
                arity(2)?;
                self.feature_mode = Some(f[1].parse().map_err(|e| perr(n, e))?);
            }
            "caps" => {
                arity(19)?;
                let mut caps = [0u32; 18];
                for (slot, v) in caps.iter_mut().zip(&f[1..]) {
                    *slot = v.parse().map_err(|_| perr(n, format!("bad cap `{v}`")))?;
                    if *slot == 0 {
                        return Err(perr(n, "scaling caps must be positive"));
                    }
                }
                self.caps = Some(ScalingCaps(caps));
            }
            "blacklist" => {
                arity(2)?;
                self.blacklist.push(f[1].to_string());
            }
            "meta" => {
                arity(3)?;
                self.metadata.insert(f[1].to_string(), f[2].to_string());
            }
            "kind" => {
                arity(2)?;
                self.kind = Some(f[1].to_string());
            }
            "dimension" => {
                arity(2)?;
                self.dimension = Some(
                    f[1].parse()
                        .map_err(|_| perr(n, format!("bad dimension `{}`", f[1])))?,
                );
            }
            "dict" => {
                arity(3)?;
                let index: usize = f[1]
                    .parse()
                    .map_err(|_| perr(n, format!("bad index `{}`", f[1])))?;
                let expected = feature_index(self.dictionary.len());
                if index != expected {
                    return Err(perr(
                        n,
                        format!("dictionary index {index}, expected {expected}"),
                    ));
                }
                if f[2].is_empty() {
                    return Err(perr(n, "empty dictionary key"));
                }
                self.dictionary.push(f[2].to_string());
            }
            "weight" | "sigma" => {
                arity(3)?;
                let index: usize = f[1]
                    .parse()
                    .map_err(|_| perr(n, format!("bad index `{}`", f[1])))?;
                let value: f64 = f[2]
                    .parse()
                    .map_err(|_| perr(n, format!("bad value `{}`", f[2])))?;
                if !value.is_finite() {
                    return Err(perr(n, format!("non-finite value `{}`", f[2])));
                }
                let dim = self
                    .dimension
                    .ok_or_else(|| perr(n, "`dimension` must precede weights"))?;
                if index >= dim {
                    return Err(perr(
                        n,
                        format!("index {index} out of range for dimension {dim}"),
                    ));
                }
                let list = if f[0] == "weight" {
                    &mut self.weights
                } else {
                    &mut self.sigmas
                };
                if list.last().is_some_and(|&(prev, _)| prev >= index) {
                    return Err(perr(n, format!("{} indices must increase", f[0])));
                }
                list.push((index, value));
            }
            "end" => arity(1)?,
            other => return Err(perr(n, format!("unknown record `{other}`"))),
        }
        Ok(())
    }

    fn finish(self, n: usize) -> Result<ModelFile, ModelError> {
        let need = |what: &str| perr(n, format!("missing `{what}` line"));
        let name = self.learner.ok_or_else(|| need("learner"))?;
        let learner = LearnerSpec::from_parts(&name, &self.params).map_err(|e| perr(n, e))?;
        let dim = self.dimension.ok_or_else(|| need("dimension"))?;
        let mut mu = vec![0.0; dim];
        for (i, w) in self.weights {
            mu[i] = w;
        }
        let model = match self.kind.as_deref() {
            Some("linear") => {
                if !self.sigmas.is_empty() {
                    return Err(perr(n, "linear models have no variances"));
                }
                TrainedModel::Linear(LinearModel::from_weights(mu))
            }
            Some("gaussian") => {
                let mut sigma = vec![1.0; dim];
                for (i, s) in self.sigmas {
                    sigma[i] = s;
                }
                TrainedModel::Gaussian(GaussianModel { mu, sigma })
            }
            Some(other) => return Err(perr(n, format!("unknown model kind `{other}`"))),
            None => return Err(need("kind")),
        };
        let blacklist = Blacklist::new(&self.blacklist);
        if blacklist.words() != self.blacklist.as_slice() {
            return Err(perr(
                n,
                "blacklist words must be lowercase, sorted and unique",
            ));
        }
        Ok(ModelFile {
            learner,
            feature_mode: self.feature_mode.ok_or_else(|| need("feature_mode"))?,
            caps: self.caps.ok_or_else(|| need("caps"))?,
            blacklist,
            metadata: self.metadata,
            dictionary: self.dictionary,
            model,
        })
    }
}

/// Non-empty and free of field and line separators.
fn is_field(s: &str) -> bool {
    !s.is_empty() && !s.contains(['\t', '\n', '\r'])
}

fn perr(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        message: message.into(),
    }
}
