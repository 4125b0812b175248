//! Similarity structure of a URL sequence.
//!
//! Two URLs are similar when they share more than `tau` binary lexical
//! features. For the i-th URL (1-based), `delta_min` is the distance back to
//! the most recent similar URL and `delta_max` the distance back to the
//! earliest one; URLs without a similar predecessor get `(0, n + 1)`.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::features::{extract_bag_of_words, extract_or_features, Blacklist};
use crate::lexer::{parse_url, LexError, RawUrl};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimilarityError {
    #[error("no values to summarise")]
    EmptyInput,
}

/// Binary lexical features of one URL: tagged bag-of-words keys plus the
/// IP, port and blacklist flags when set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BinaryFeatures(BTreeSet<String>);

impl BinaryFeatures {
    pub fn from_url(url: &RawUrl, blacklist: &Blacklist) -> Result<Self, LexError> {
        let parts = parse_url(url)?;
        let mut set: BTreeSet<String> = extract_bag_of_words(&parts).into_iter().collect();
        let or = extract_or_features(&parts, blacklist);
        for (flag, key) in [
            (or.domain.is_ip, "or:domain.is_ip"),
            (or.domain.has_port, "or:domain.has_port"),
            (or.url.blacklist, "or:url.blacklist"),
        ] {
            if flag {
                set.insert(key.to_string());
            }
        }
        Ok(BinaryFeatures(set))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn shared(&self, other: &BinaryFeatures) -> usize {
        self.0.intersection(&other.0).count()
    }

    /// Strictly more than `tau` shared features.
    pub fn similar(&self, other: &BinaryFeatures, tau: usize) -> bool {
        self.shared(other) > tau
    }
}

pub fn shared_feature_count(
    u: &RawUrl,
    v: &RawUrl,
    blacklist: &Blacklist,
) -> Result<usize, LexError> {
    Ok(BinaryFeatures::from_url(u, blacklist)?.shared(&BinaryFeatures::from_url(v, blacklist)?))
}

pub fn similar(
    u: &RawUrl,
    v: &RawUrl,
    tau: usize,
    blacklist: &Blacklist,
) -> Result<bool, LexError> {
    Ok(shared_feature_count(u, v, blacklist)? > tau)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceStats {
    pub delta_min: Vec<usize>,
    pub delta_max: Vec<usize>,
    pub n: usize,
}

impl DistanceStats {
    /// Whether URL `i` (0-based) has a similar predecessor.
    pub fn has_similar_predecessor(&self, i: usize) -> bool {
        self.delta_min[i] != 0
    }
}

/// Distances of similarity for every URL, using an inverted index over
/// feature keys to find candidates.
pub fn compute_distances(urls: &[BinaryFeatures], tau: usize) -> DistanceStats {
    let n = urls.len();
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut postings: Vec<Vec<usize>> = Vec::new();
    let mut delta_min = vec![0; n];
    let mut delta_max = vec![n + 1; n];
    let mut counts: HashMap<usize, usize> = HashMap::new();

    for (i, url) in urls.iter().enumerate() {
        counts.clear();
        let feature_ids: Vec<usize> = url
            .keys()
            .map(|k| {
                let next = ids.len();
                let id = *ids.entry(k).or_insert(next);
                if id == postings.len() {
                    postings.push(Vec::new());
                }
                id
            })
            .collect();
        for &f in &feature_ids {
            for &j in &postings[f] {
                *counts.entry(j).or_insert(0) += 1;
            }
        }
        let similar = counts.iter().filter(|&(_, &c)| c > tau).map(|(&j, _)| j);
        let (mut latest, mut earliest) = (None::<usize>, None::<usize>);
        for j in similar {
            latest = Some(latest.map_or(j, |l| l.max(j)));
            earliest = Some(earliest.map_or(j, |e| e.min(j)));
        }
        if let (Some(l), Some(e)) = (latest, earliest) {
            delta_min[i] = i - l;
            delta_max[i] = i - e;
        }
        for &f in &feature_ids {
            postings[f].push(i);
        }
    }
    DistanceStats {
        delta_min,
        delta_max,
        n,
    }
}

fn distinct_sorted(values: &[usize]) -> Result<Vec<usize>, SimilarityError> {
    if values.is_empty() {
        return Err(SimilarityError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    Ok(sorted)
}

/// `(t, P[X > t])` at every distinct value `t`.
pub fn ccdf(values: &[usize]) -> Result<Vec<(usize, f64)>, SimilarityError> {
    let sorted = distinct_sorted(values)?;
    let n = sorted.len() as f64;
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (pos, &v) in sorted.iter().enumerate() {
        let above = (sorted.len() - pos - 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = above,
            _ => out.push((v, above)),
        }
    }
    Ok(out)
}

/// `(t, P[X <= t])` at every distinct value `t`.
pub fn cdf(values: &[usize]) -> Result<Vec<(usize, f64)>, SimilarityError> {
    let sorted = distinct_sorted(values)?;
    let n = sorted.len() as f64;
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (pos, &v) in sorted.iter().enumerate() {
        let below = (pos + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = below,
            _ => out.push((v, below)),
        }
    }
    Ok(out)
}
