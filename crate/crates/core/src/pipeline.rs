use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Arc;

use crate::external::{extract_external, ExternalRecord};
use crate::features::{
    extract_bag_of_words, extract_or_features, vectorize, Blacklist, FeatureDictionary,
    FeatureVector, OrFeatureSet, ScalingCaps,
};
use crate::lexer::{parse_url, LexError, RawUrl};

/// Which feature families are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureMode {
    /// Bag-of-words plus OR features.
    Lexical,
    /// Bag-of-words only.
    LexicalNoOr,
    /// Lexical plus external (registration/network) features.
    Full,
}

impl FeatureMode {
    pub fn uses_or(self) -> bool {
        !matches!(self, FeatureMode::LexicalNoOr)
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::Lexical => "lexical",
            FeatureMode::LexicalNoOr => "lexical-no-or",
            FeatureMode::Full => "full",
        }
    }
}

impl FromStr for FeatureMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lexical" => Ok(FeatureMode::Lexical),
            "lexical-no-or" | "lexical_no_or" => Ok(FeatureMode::LexicalNoOr),
            "full" => Ok(FeatureMode::Full),
            other => Err(format!("unknown feature mode `{other}`")),
        }
    }
}

/// Everything extracted from one URL, before indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedFeatures {
    pub bag_of_words: Vec<String>,
    pub or_features: Option<OrFeatureSet>,
    pub external: Option<Vec<(String, f64)>>,
}

/// URL → feature vector, holding the dictionary and any sidecar records.
#[derive(Debug, Clone)]
pub struct Featurizer {
    pub mode: FeatureMode,
    pub blacklist: Blacklist,
    pub caps: ScalingCaps,
    pub dictionary: FeatureDictionary,
    external: Arc<HashMap<String, ExternalRecord>>,
}

impl Featurizer {
    pub fn new(mode: FeatureMode) -> Self {
        Featurizer {
            mode,
            blacklist: Blacklist::default(),
            caps: ScalingCaps::default(),
            dictionary: FeatureDictionary::new(),
            external: Arc::new(HashMap::new()),
        }
    }

    pub fn with_external(
        mut self,
        records: impl Into<Arc<HashMap<String, ExternalRecord>>>,
    ) -> Self {
        self.external = records.into();
        self
    }

    pub fn extract(&self, url: &RawUrl) -> Result<ExtractedFeatures, LexError> {
        let parts = parse_url(url)?;
        Ok(ExtractedFeatures {
            bag_of_words: extract_bag_of_words(&parts),
            or_features: self
                .mode
                .uses_or()
                .then(|| extract_or_features(&parts, &self.blacklist)),
            external: (self.mode == FeatureMode::Full)
                .then(|| extract_external(self.external.get(url.as_str()))),
        })
    }

    /// Vectorizes `url`, growing the dictionary unless it is frozen.
    pub fn vectorize(&mut self, url: &RawUrl) -> Result<FeatureVector, LexError> {
        let f = self.extract(url)?;
        Ok(vectorize(
            &f.bag_of_words,
            f.or_features.as_ref(),
            f.external.as_deref(),
            &mut self.dictionary,
            &self.caps,
        ))
    }
}
