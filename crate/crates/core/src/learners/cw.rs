use statrs::distribution::{ContinuousCDF, Normal};

use super::{Example, GaussianModel, LearnerError, OnlineLearner, Prediction};
use crate::features::FeatureVector;

/// Standard-normal quantile.
pub fn probit(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Step sizes `(alpha, beta)` of the exact CW projection.
///
/// `margin` is `y (mu · x)` and `variance` is `xᵀ Σ x` under the current
/// model. The update `mu += alpha y Σx`, `Σ -= beta Σx xᵀΣ` is the closest
/// Gaussian in KL divergence satisfying `y (mu · x) >= phi sqrt(xᵀ Σ x)`.
/// Returns zeros when the constraint already holds.
pub fn cw_coefficients(margin: f64, variance: f64, phi: f64) -> (f64, f64) {
    if variance <= 0.0 {
        return (0.0, 0.0);
    }
    let psi = 1.0 + phi * phi / 2.0;
    let zeta = 1.0 + phi * phi;
    let disc = margin * margin * phi.powi(4) / 4.0 + variance * phi * phi * zeta;
    let alpha = ((-margin * psi + disc.sqrt()) / (variance * zeta)).max(0.0);
    if alpha == 0.0 {
        return (0.0, 0.0);
    }
    let avp = alpha * variance * phi;
    let sqrt_u = (-avp + (avp * avp + 4.0 * variance).sqrt()) / 2.0;
    let beta = alpha * phi / (sqrt_u + avp);
    (alpha, beta)
}

/// Full-covariance CW update on a small dense problem. `sigma` is row-major
/// `d × d`. Returns the new `(mu, sigma)`.
pub fn cw_full_update(
    mu: &[f64],
    sigma: &[f64],
    x: &[f64],
    y: f64,
    phi: f64,
) -> (Vec<f64>, Vec<f64>) {
    let sx = mat_vec(sigma, x);
    let margin = y * dot(mu, x);
    let variance = dot(x, &sx);
    let (alpha, beta) = cw_coefficients(margin, variance, phi);
    rank_one_update(mu, sigma, &sx, alpha * y, beta)
}

pub(super) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub(super) fn mat_vec(m: &[f64], x: &[f64]) -> Vec<f64> {
    let d = x.len();
    (0..d).map(|r| dot(&m[r * d..(r + 1) * d], x)).collect()
}

pub(super) fn rank_one_update(
    mu: &[f64],
    sigma: &[f64],
    sx: &[f64],
    signed_alpha: f64,
    beta: f64,
) -> (Vec<f64>, Vec<f64>) {
    let d = mu.len();
    let new_mu = mu
        .iter()
        .zip(sx)
        .map(|(m, s)| m + signed_alpha * s)
        .collect();
    let mut new_sigma = sigma.to_vec();
    for r in 0..d {
        for c in 0..d {
            new_sigma[r * d + c] -= beta * sx[r] * sx[c];
        }
    }
    (new_mu, new_sigma)
}

/// Confidence-weighted learner with diagonal covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Cw {
    pub model: GaussianModel,
    eta: f64,
    phi: f64,
}

impl Cw {
    pub fn new(eta: f64) -> Result<Self, LearnerError> {
        if !(eta > 0.5 && eta < 1.0) {
            return Err(LearnerError::InvalidEta(eta));
        }
        Ok(Cw {
            model: GaussianModel::new(),
            eta,
            phi: probit(eta),
        })
    }

    pub fn with_model(eta: f64, model: GaussianModel) -> Result<Self, LearnerError> {
        let mut cw = Cw::new(eta)?;
        cw.model = model;
        Ok(cw)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

impl OnlineLearner for Cw {
    fn predict(&self, x: &FeatureVector) -> Prediction {
        self.model.predict(x)
    }

    fn update(&mut self, example: &Example) -> bool {
        let y = example.y.sign();
        let margin = y * self.model.margin(&example.x);
        let variance = self.model.confidence(&example.x);
        let (alpha, beta) = cw_coefficients(margin, variance, self.phi);
        if alpha == 0.0 {
            return false;
        }
        self.model.apply(&example.x, alpha * y, beta);
        true
    }

    fn weights(&self) -> &[f64] {
        &self.model.mu
    }
}
