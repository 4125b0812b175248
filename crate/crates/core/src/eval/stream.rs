use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::learners::Label;
use crate::lexer::RawUrl;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamItem {
    pub url: RawUrl,
    /// Label used for training and scoring (flipped when `noisy`).
    pub label: Label,
    pub source: String,
    pub noisy: bool,
}

impl StreamItem {
    pub fn new(url: RawUrl, label: Label, source: impl Into<String>) -> Self {
        StreamItem {
            url,
            label,
            source: source.into(),
            noisy: false,
        }
    }

    /// The label before any noise injection.
    pub fn clean_label(&self) -> Label {
        if self.noisy {
            self.label.flipped()
        } else {
            self.label
        }
    }
}

/// URLs in evaluation order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledStream {
    pub items: Vec<StreamItem>,
}

impl LabeledStream {
    pub fn new(items: Vec<StreamItem>) -> Self {
        LabeledStream { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn noisy_positions(&self) -> Vec<usize> {
        self.items
            .iter()
            .enumerate()
            .filter(|(_, it)| it.noisy)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn urls_with_label(&self, label: Label) -> Vec<RawUrl> {
        self.items
            .iter()
            .filter(|it| it.clean_label() == label)
            .map(|it| it.url.clone())
            .collect()
    }
}

/// Alternates benign, malicious, benign, ... keeping each list's order and
/// appending the remainder of the longer list.
pub fn interleave(benign: Vec<RawUrl>, malicious: Vec<RawUrl>) -> LabeledStream {
    let mut items = Vec::with_capacity(benign.len() + malicious.len());
    let mut b = benign.into_iter();
    let mut m = malicious.into_iter();
    loop {
        let nb = b.next();
        let nm = m.next();
        if nb.is_none() && nm.is_none() {
            break;
        }
        if let Some(u) = nb {
            items.push(StreamItem::new(u, Label::Benign, "benign"));
        }
        if let Some(u) = nm {
            items.push(StreamItem::new(u, Label::Malicious, "malicious"));
        }
    }
    LabeledStream { items }
}

/// Number of labels flipped at `rate` over `len` items.
pub fn noise_count(rate: f64, len: usize) -> usize {
    (rate * len as f64).round() as usize
}

/// Flips the labels of `round(rate * len)` distinct items chosen uniformly
/// with `seed`.
pub fn inject_noise(stream: &LabeledStream, rate: f64, seed: u64) -> LabeledStream {
    assert!((0.0..=1.0).contains(&rate), "noise rate must be in [0, 1]");
    let mut out = stream.clone();
    let k = noise_count(rate, out.len()).min(out.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in sample(&mut rng, out.len(), k) {
        let item = &mut out.items[i];
        item.label = item.label.flipped();
        item.noisy = !item.noisy;
    }
    out
}
