//! Lexical feature extraction.
//!
//! Two families of features are produced for every URL:
//!
//! * bag-of-words: one binary feature per token, tagged with the URL part it
//!   came from (`name=`, `tld=`, `dir=`, `file=`, `ext=`, `arg=`);
//! * obfuscation-resistant (OR) features: 21 counts, lengths and flags that
//!   describe the shape of each URL part.
//!
//! OR features live at the fixed indices `0..OR_FEATURE_COUNT` of every
//! [`FeatureVector`]; dictionary-grown features follow them.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::lexer::{tokenize, UrlParts};

pub const OR_FEATURE_COUNT: usize = 21;

/// Names of the OR features in index order.
pub const OR_FEATURE_NAMES: [&str; OR_FEATURE_COUNT] = [
    "url.len",
    "url.n_dot",
    "url.blacklist",
    "domain.len",
    "domain.is_ip",
    "domain.has_port",
    "domain.n_token",
    "domain.n_hyphen",
    "domain.max_token_len",
    "directory.len",
    "directory.n_subdir",
    "directory.max_subdir_len",
    "directory.max_dot_in_subdir",
    "directory.max_delim_in_subdir",
    "file.len",
    "file.n_dot",
    "file.n_delim",
    "argument.len",
    "argument.n_var",
    "argument.max_value_len",
    "argument.max_delim_in_value",
];

/// OR features that are flags rather than counts; they are never scaled.
pub const OR_BINARY_INDICES: [usize; 3] = [2, 4, 5];

pub const DEFAULT_BLACKLIST: [&str; 12] = [
    "confirm",
    "account",
    "banking",
    "secure",
    "ebayisapi",
    "webscr",
    "login",
    "signin",
    "paypal",
    "free",
    "lucky",
    "bonus",
];

/// Saturating division into `[0, 1]`.
pub fn scale(value: u32, cap: u32) -> f64 {
    assert!(cap > 0, "scaling cap must be positive");
    f64::from(value.min(cap)) / f64::from(cap)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blacklist {
    words: Vec<String>,
}

impl Default for Blacklist {
    fn default() -> Self {
        Blacklist::new(DEFAULT_BLACKLIST)
    }
}

impl Blacklist {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut bl = Blacklist { words: Vec::new() };
        bl.extend(words);
        bl
    }

    pub fn extend<I, S>(&mut self, words: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        for w in words {
            let w = w.as_ref().trim().to_lowercase();
            if !w.is_empty() && !self.words.contains(&w) {
                self.words.push(w);
            }
        }
        self.words.sort();
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Substring match against the lowercased text.
    pub fn matches(&self, text: &str) -> bool {
        let lower = text.to_lowercase();
        self.words.iter().any(|w| lower.contains(w.as_str()))
    }
}

/// Caps used to scale each non-binary OR feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalingCaps(pub [u32; 18]);

impl Default for ScalingCaps {
    fn default() -> Self {
        ScalingCaps([
            256, 32, // url: len, n_dot
            128, 16, 16, 64, // domain: len, n_token, n_hyphen, max_token_len
            256, 16, 64, 16, 16, // directory
            64, 8, 16, // file
            256, 16, 128, 16, // argument
        ])
    }
}

impl ScalingCaps {
    /// Cap for the OR feature at `index`, `None` for the binary ones.
    pub fn cap_for(&self, index: usize) -> Option<u32> {
        if OR_BINARY_INDICES.contains(&index) {
            return None;
        }
        let skipped = OR_BINARY_INDICES.iter().filter(|&&b| b < index).count();
        Some(self.0[index - skipped])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UrlShape {
    pub len: u32,
    pub n_dot: u32,
    pub blacklist: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DomainShape {
    pub len: u32,
    pub is_ip: bool,
    pub has_port: bool,
    pub n_token: u32,
    pub n_hyphen: u32,
    pub max_token_len: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DirectoryShape {
    pub len: u32,
    pub n_subdir: u32,
    pub max_subdir_len: u32,
    pub max_dot_in_subdir: u32,
    pub max_delim_in_subdir: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FileShape {
    pub len: u32,
    pub n_dot: u32,
    pub n_delim: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ArgumentShape {
    pub len: u32,
    pub n_var: u32,
    pub max_value_len: u32,
    pub max_delim_in_value: u32,
}

/// The 21 obfuscation-resistant features, unscaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OrFeatureSet {
    pub url: UrlShape,
    pub domain: DomainShape,
    pub directory: DirectoryShape,
    pub file: FileShape,
    pub argument: ArgumentShape,
}

impl OrFeatureSet {
    /// Raw values in index order; flags are 0/1.
    pub fn raw_values(&self) -> [u32; OR_FEATURE_COUNT] {
        let b = u32::from;
        [
            self.url.len,
            self.url.n_dot,
            b(self.url.blacklist),
            self.domain.len,
            b(self.domain.is_ip),
            b(self.domain.has_port),
            self.domain.n_token,
            self.domain.n_hyphen,
            self.domain.max_token_len,
            self.directory.len,
            self.directory.n_subdir,
            self.directory.max_subdir_len,
            self.directory.max_dot_in_subdir,
            self.directory.max_delim_in_subdir,
            self.file.len,
            self.file.n_dot,
            self.file.n_delim,
            self.argument.len,
            self.argument.n_var,
            self.argument.max_value_len,
            self.argument.max_delim_in_value,
        ]
    }

    pub fn scaled_values(&self, caps: &ScalingCaps) -> [f64; OR_FEATURE_COUNT] {
        let raw = self.raw_values();
        std::array::from_fn(|i| match caps.cap_for(i) {
            Some(cap) => scale(raw[i], cap),
            None => f64::from(raw[i]),
        })
    }
}

fn count_chars(text: &str, set: &[char]) -> u32 {
    text.chars().filter(|c| set.contains(c)).count() as u32
}

fn char_len(text: &str) -> u32 {
    text.chars().count() as u32
}

pub fn extract_or_features(parts: &UrlParts, blacklist: &Blacklist) -> OrFeatureSet {
    let url = parts.reassemble();
    let host = parts.host.to_lowercase();
    let host_tokens = tokenize(&host);

    let mut set = OrFeatureSet {
        url: UrlShape {
            len: char_len(&url),
            n_dot: count_chars(&url, &['.']),
            blacklist: blacklist.matches(&url),
        },
        domain: DomainShape {
            len: char_len(&host),
            is_ip: parts.host_is_ip,
            has_port: parts.port.is_some(),
            n_token: host_tokens.len() as u32,
            n_hyphen: count_chars(&host, &['-']),
            max_token_len: host_tokens.iter().map(|t| char_len(t)).max().unwrap_or(0),
        },
        ..OrFeatureSet::default()
    };

    if !parts.directories.is_empty() {
        let dirs = &parts.directories;
        set.directory = DirectoryShape {
            len: char_len(&parts.directory_text()),
            n_subdir: dirs.len() as u32,
            max_subdir_len: dirs.iter().map(|d| char_len(d)).max().unwrap_or(0),
            max_dot_in_subdir: dirs
                .iter()
                .map(|d| count_chars(d, &['.']))
                .max()
                .unwrap_or(0),
            max_delim_in_subdir: dirs
                .iter()
                .map(|d| count_chars(d, &['_', '-']))
                .max()
                .unwrap_or(0),
        };
    }

    if let Some(file) = parts.file_text() {
        set.file = FileShape {
            len: char_len(&file),
            n_dot: count_chars(&file, &['.']),
            n_delim: count_chars(&file, &['_', '-']),
        };
    }

    if let Some(query) = &parts.query {
        let assignments: Vec<&str> = query.split('&').filter(|a| !a.is_empty()).collect();
        let values: Vec<&str> = assignments
            .iter()
            .map(|a| a.split_once('=').map_or("", |(_, v)| v))
            .collect();
        set.argument = ArgumentShape {
            len: char_len(query) + 1,
            n_var: assignments.len() as u32,
            max_value_len: values.iter().map(|v| char_len(v)).max().unwrap_or(0),
            max_delim_in_value: values
                .iter()
                .map(|v| count_chars(v, &['.', '_', '-']))
                .max()
                .unwrap_or(0),
        };
    }
    set
}

/// Part-tagged tokens, deduplicated, in order of first appearance.
pub fn extract_bag_of_words(parts: &UrlParts) -> Vec<String> {
    let mut keys = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |key: String| {
        if seen.insert(key.clone()) {
            keys.push(key);
        }
    };

    let host_tokens = tokenize(&parts.host);
    if let Some((tld, names)) = host_tokens.split_last() {
        for t in names {
            push(format!("name={t}"));
        }
        push(format!("tld={tld}"));
    }
    for dir in &parts.directories {
        for t in tokenize(dir) {
            push(format!("dir={t}"));
        }
    }
    if let Some(file) = &parts.file_name {
        for t in tokenize(file) {
            push(format!("file={t}"));
        }
    }
    if let Some(ext) = &parts.file_extension {
        for t in tokenize(ext) {
            push(format!("ext={t}"));
        }
    }
    if let Some(query) = &parts.query {
        for t in tokenize(query) {
            push(format!("arg={t}"));
        }
    }
    keys
}

/// Grow-only map from feature key to a dense index.
///
/// Dictionary index `i` corresponds to feature-vector index
/// `OR_FEATURE_COUNT + i`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureDictionary {
    index: HashMap<String, usize>,
    keys: Vec<String>,
    frozen: bool,
}

impl FeatureDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a dictionary from keys listed in index order.
    pub fn from_keys<I: IntoIterator<Item = String>>(keys: I) -> Self {
        let mut dict = Self::new();
        for k in keys {
            dict.lookup_or_insert(&k);
        }
        dict
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn next_index(&self) -> usize {
        self.keys.len()
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn get(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn key(&self, index: usize) -> Option<&str> {
        self.keys.get(index).map(String::as_str)
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    /// Returns the index for `key`, growing the dictionary unless frozen.
    pub fn lookup_or_insert(&mut self, key: &str) -> Option<usize> {
        if let Some(&i) = self.index.get(key) {
            return Some(i);
        }
        if self.frozen {
            return None;
        }
        let i = self.keys.len();
        self.keys.push(key.to_string());
        self.index.insert(key.to_string(), i);
        Some(i)
    }
}

/// Feature-vector index of a dictionary entry.
pub fn feature_index(dict_index: usize) -> usize {
    OR_FEATURE_COUNT + dict_index
}

/// Sparse vector of `(index, value)` pairs sorted by index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from arbitrary pairs; later duplicates win and
    /// explicit zeros are dropped.
    pub fn from_pairs<I: IntoIterator<Item = (usize, f64)>>(pairs: I) -> Self {
        let map: BTreeMap<usize, f64> = pairs.into_iter().collect();
        FeatureVector {
            entries: map.into_iter().filter(|&(_, v)| v != 0.0).collect(),
        }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        Self::from_pairs(values.iter().copied().enumerate())
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |pos| self.entries[pos].1)
    }

    /// One past the largest index present.
    pub fn dimension(&self) -> usize {
        self.entries.last().map_or(0, |&(i, _)| i + 1)
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(i, v)| dense.get(i).map_or(0.0, |w| w * v))
            .sum()
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    /// Keeps only entries whose index satisfies `keep`.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> FeatureVector {
        FeatureVector {
            entries: self
                .entries
                .iter()
                .copied()
                .filter(|&(i, _)| keep(i))
                .collect(),
        }
    }
}

/// Assembles a feature vector.
///
/// `or_set` of `None` disables the OR block entirely. Unknown keys grow the
/// dictionary, or are dropped when it is frozen.
pub fn vectorize(
    bow: &[String],
    or_set: Option<&OrFeatureSet>,
    external: Option<&[(String, f64)]>,
    dict: &mut FeatureDictionary,
    caps: &ScalingCaps,
) -> FeatureVector {
    let mut pairs = Vec::with_capacity(OR_FEATURE_COUNT + bow.len());
    if let Some(or_set) = or_set {
        pairs.extend(or_set.scaled_values(caps).into_iter().enumerate());
    }
    for key in bow {
        if let Some(i) = dict.lookup_or_insert(key) {
            pairs.push((feature_index(i), 1.0));
        }
    }
    for (key, value) in external.unwrap_or_default() {
        if let Some(i) = dict.lookup_or_insert(key) {
            pairs.push((feature_index(i), value.clamp(0.0, 1.0)));
        }
    }
    FeatureVector::from_pairs(pairs)
}
