use super::cw::{dot, mat_vec, rank_one_update};
use super::{Example, GaussianModel, LearnerError, OnlineLearner, Prediction};
use crate::features::FeatureVector;

/// Step sizes `(alpha, beta)` of the AROW update.
///
/// Minimises `KL(new || old) + lambda1 · hinge²(y, mu·x) + lambda2 · xᵀΣx`.
/// With `r_k = 1 / (2 lambda_k)`: `beta = 1 / (v + r2)`,
/// `alpha = max(0, 1 - m) / (v + r1)`. Returns zeros when the hinge loss
/// is zero.
pub fn arow_coefficients(margin: f64, variance: f64, lambda1: f64, lambda2: f64) -> (f64, f64) {
    let loss = 1.0 - margin;
    if loss <= 0.0 {
        return (0.0, 0.0);
    }
    let r1 = 1.0 / (2.0 * lambda1);
    let r2 = 1.0 / (2.0 * lambda2);
    (loss / (variance + r1), 1.0 / (variance + r2))
}

/// Full-covariance AROW update on a small dense problem. `sigma` is row-major
/// `d × d`.
pub fn arow_full_update(
    mu: &[f64],
    sigma: &[f64],
    x: &[f64],
    y: f64,
    lambda1: f64,
    lambda2: f64,
) -> (Vec<f64>, Vec<f64>) {
    let sx = mat_vec(sigma, x);
    let (alpha, beta) = arow_coefficients(y * dot(mu, x), dot(x, &sx), lambda1, lambda2);
    rank_one_update(mu, sigma, &sx, alpha * y, beta)
}

/// AROW learner with diagonal covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Arow {
    pub model: GaussianModel,
    lambda1: f64,
    lambda2: f64,
}

impl Arow {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self, LearnerError> {
        for l in [lambda1, lambda2] {
            if !(l > 0.0 && l.is_finite()) {
                return Err(LearnerError::InvalidLambda(l));
            }
        }
        Ok(Arow {
            model: GaussianModel::new(),
            lambda1,
            lambda2,
        })
    }

    /// Both regularisers set to `lambda`.
    pub fn symmetric(lambda: f64) -> Result<Self, LearnerError> {
        Arow::new(lambda, lambda)
    }

    pub fn with_model(
        lambda1: f64,
        lambda2: f64,
        model: GaussianModel,
    ) -> Result<Self, LearnerError> {
        let mut arow = Arow::new(lambda1, lambda2)?;
        arow.model = model;
        Ok(arow)
    }

    pub fn lambdas(&self) -> (f64, f64) {
        (self.lambda1, self.lambda2)
    }
}

impl OnlineLearner for Arow {
    fn predict(&self, x: &FeatureVector) -> Prediction {
        self.model.predict(x)
    }

    fn update(&mut self, example: &Example) -> bool {
        let y = example.y.sign();
        let margin = y * self.model.margin(&example.x);
        let variance = self.model.confidence(&example.x);
        let (alpha, beta) = arow_coefficients(margin, variance, self.lambda1, self.lambda2);
        if beta == 0.0 {
            return false;
        }
        self.model.apply(&example.x, alpha * y, beta);
        true
    }

    fn weights(&self) -> &[f64] {
        &self.model.mu
    }
}
