use super::{Example, LinearModel, OnlineLearner, Prediction};
use crate::features::FeatureVector;

/// Mistake-driven perceptron: `w += y·x` whenever `sign(w·x) != y`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Perceptron {
    pub model: LinearModel,
}

impl Perceptron {
    pub fn new() -> Self {
        Self::default()
    }
}

impl OnlineLearner for Perceptron {
    fn predict(&self, x: &FeatureVector) -> Prediction {
        self.model.predict(x)
    }

    fn update(&mut self, example: &Example) -> bool {
        if self.model.predict(&example.x).label == example.y {
            return false;
        }
        self.model.grow(example.x.dimension());
        let y = example.y.sign();
        for (i, v) in example.x.iter() {
            self.model.w[i] += y * v;
        }
        true
    }

    fn weights(&self) -> &[f64] {
        &self.model.w
    }
}
