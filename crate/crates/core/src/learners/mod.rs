//! Linear classifiers: the online perceptron, confidence-weighted (CW),
//! AROW, and a batch linear SVM.
//!
//! Every learner predicts with `sign(w · x)`, where `sign(0)` is +1.
//! Gaussian learners (CW, AROW) predict with their mean vector.

mod arow;
mod cw;
mod perceptron;
mod svm;

pub use arow::{arow_coefficients, arow_full_update, Arow};
pub use cw::{cw_coefficients, cw_full_update, probit, Cw};
pub use perceptron::Perceptron;
pub use svm::{svm_train, BatchSvm, SvmOptions, SvmSolution, SvmVariant};

use thiserror::Error;

use crate::features::FeatureVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnerError {
    #[error("eta must lie strictly between 0.5 and 1, got {0}")]
    InvalidEta(f64),
    #[error("lambda must be positive, got {0}")]
    InvalidLambda(f64),
    #[error("box constraint C must be positive, got {0}")]
    InvalidC(f64),
    #[error("cannot train on an empty batch")]
    EmptyBatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Malicious,
    Benign,
}

impl Label {
    pub fn from_sign(value: f64) -> Label {
        if value >= 0.0 {
            Label::Malicious
        } else {
            Label::Benign
        }
    }

    /// +1 for malicious, -1 for benign.
    pub fn sign(self) -> f64 {
        match self {
            Label::Malicious => 1.0,
            Label::Benign => -1.0,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Malicious => Label::Benign,
            Label::Benign => Label::Malicious,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub x: FeatureVector,
    pub y: Label,
}

impl Example {
    pub fn new(x: FeatureVector, y: Label) -> Self {
        Example { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub margin: f64,
}

impl Prediction {
    pub fn from_margin(margin: f64) -> Self {
        Prediction {
            label: Label::from_sign(margin),
            margin,
        }
    }
}

/// Dense weight vector; indices past the end read as zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearModel {
    pub w: Vec<f64>,
}

impl LinearModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_weights(w: Vec<f64>) -> Self {
        LinearModel { w }
    }

    pub fn dimension(&self) -> usize {
        self.w.len()
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.w.get(index).copied().unwrap_or(0.0)
    }

    pub fn grow(&mut self, dimension: usize) {
        if dimension > self.w.len() {
            self.w.resize(dimension, 0.0);
        }
    }

    pub fn margin(&self, x: &FeatureVector) -> f64 {
        x.dot(&self.w)
    }

    pub fn predict(&self, x: &FeatureVector) -> Prediction {
        Prediction::from_margin(self.margin(x))
    }
}

/// Gaussian over weights with diagonal covariance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GaussianModel {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl GaussianModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dimension(&self) -> usize {
        self.mu.len()
    }

    /// Pads new coordinates with mean 0 and variance 1.
    pub fn grow(&mut self, dimension: usize) {
        if dimension > self.mu.len() {
            self.mu.resize(dimension, 0.0);
            self.sigma.resize(dimension, 1.0);
        }
    }

    pub fn mean(&self, index: usize) -> f64 {
        self.mu.get(index).copied().unwrap_or(0.0)
    }

    pub fn variance(&self, index: usize) -> f64 {
        self.sigma.get(index).copied().unwrap_or(1.0)
    }

    pub fn margin(&self, x: &FeatureVector) -> f64 {
        x.dot(&self.mu)
    }

    /// `xᵀ Σ x` for the diagonal Σ.
    pub fn confidence(&self, x: &FeatureVector) -> f64 {
        x.iter().map(|(i, v)| self.variance(i) * v * v).sum()
    }

    pub fn predict(&self, x: &FeatureVector) -> Prediction {
        Prediction::from_margin(self.margin(x))
    }

    /// `mu += a · y · Σx`, `sigma_i -= b · (sigma_i x_i)²`, both computed
    /// from the pre-update variances.
    pub(crate) fn apply(&mut self, x: &FeatureVector, signed_alpha: f64, beta: f64) {
        self.grow(x.dimension());
        for (i, v) in x.iter() {
            let s = self.sigma[i];
            self.mu[i] += signed_alpha * s * v;
            self.sigma[i] = s * (1.0 - beta * s * v * v);
        }
    }
}

/// Predict-then-update learners.
pub trait OnlineLearner {
    fn predict(&self, x: &FeatureVector) -> Prediction;

    /// Updates on one labelled example. Returns whether the model changed.
    fn update(&mut self, example: &Example) -> bool;

    /// Weight vector used for prediction (the mean for Gaussian models).
    fn weights(&self) -> &[f64];
}
