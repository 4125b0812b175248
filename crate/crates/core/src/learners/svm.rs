//! L2-regularised, L1-loss linear SVM without bias, trained by dual
//! coordinate descent:
//!
//! ```text
//! max_a  sum_i a_i - 1/2 |sum_i a_i y_i x_i|^2    s.t. 0 <= a_i <= C
//! ```

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Example, LearnerError, LinearModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmOptions {
    /// Stop once the largest projected-gradient violation in an epoch is
    /// below this value.
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for SvmOptions {
    fn default() -> Self {
        SvmOptions {
            tolerance: 1e-4,
            max_epochs: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmSolution {
    pub model: LinearModel,
    pub alpha: Vec<f64>,
    pub dual_objective: f64,
    pub epochs: usize,
    pub converged: bool,
}

pub fn svm_train(
    batch: &[Example],
    c: f64,
    options: &SvmOptions,
) -> Result<SvmSolution, LearnerError> {
    if batch.is_empty() {
        return Err(LearnerError::EmptyBatch);
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(LearnerError::InvalidC(c));
    }
    let dim = batch.iter().map(|e| e.x.dimension()).max().unwrap_or(0);
    let mut w = vec![0.0; dim];
    let mut alpha = vec![0.0; batch.len()];
    let diag: Vec<f64> = batch.iter().map(|e| e.x.squared_norm()).collect();
    let mut order: Vec<usize> = (0..batch.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    let mut epochs = 0;
    let mut converged = false;
    while epochs < options.max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        let mut max_violation: f64 = 0.0;
        for &i in &order {
            let ex = &batch[i];
            let y = ex.y.sign();
            let grad = y * ex.x.dot(&w) - 1.0;
            let a = alpha[i];
            let projected = if a <= 0.0 {
                grad.min(0.0)
            } else if a >= c {
                grad.max(0.0)
            } else {
                grad
            };
            max_violation = max_violation.max(projected.abs());
            if projected == 0.0 {
                continue;
            }
            let new_a = if diag[i] > 0.0 {
                (a - grad / diag[i]).clamp(0.0, c)
            } else {
                c
            };
            let delta = (new_a - a) * y;
            if delta != 0.0 {
                for (j, v) in ex.x.iter() {
                    w[j] += delta * v;
                }
            }
            alpha[i] = new_a;
        }
        if max_violation < options.tolerance {
            converged = true;
            break;
        }
    }

    let dual_objective = alpha.iter().sum::<f64>() - 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    Ok(SvmSolution {
        model: LinearModel::from_weights(w),
        alpha,
        dual_objective,
        epochs,
        converged,
    })
}

/// Retraining schedules for batch SVMs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SvmVariant {
    /// Trained once on one batch.
    Once,
    /// Retrained after every batch on that batch alone.
    Single,
    /// Trained once on a window of batches.
    MultiOnce,
    /// Retrained after every batch on the most recent window of batches.
    Multi,
}

impl SvmVariant {
    pub const ALL: [SvmVariant; 4] = [
        SvmVariant::Once,
        SvmVariant::Single,
        SvmVariant::MultiOnce,
        SvmVariant::Multi,
    ];

    pub fn retrains(self) -> bool {
        matches!(self, SvmVariant::Single | SvmVariant::Multi)
    }

    /// Number of batches the variant trains on.
    pub fn window(self, multi_window: usize) -> usize {
        match self {
            SvmVariant::Once | SvmVariant::Single => 1,
            SvmVariant::MultiOnce | SvmVariant::Multi => multi_window,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SvmVariant::Once => "once",
            SvmVariant::Single => "single",
            SvmVariant::MultiOnce => "multi-once",
            SvmVariant::Multi => "multi",
        }
    }
}

impl std::str::FromStr for SvmVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "once" => Ok(SvmVariant::Once),
            "single" | "daily" => Ok(SvmVariant::Single),
            "multi-once" | "multionce" => Ok(SvmVariant::MultiOnce),
            "multi" => Ok(SvmVariant::Multi),
            other => Err(format!("unknown svm variant `{other}`")),
        }
    }
}

/// A batch SVM together with its sliding training window.
#[derive(Debug, Clone)]
pub struct BatchSvm {
    variant: SvmVariant,
    c: f64,
    options: SvmOptions,
    capacity: usize,
    window: VecDeque<(usize, Vec<Example>)>,
    batches_seen: usize,
    model: LinearModel,
}

impl BatchSvm {
    /// Trains the initial model. Batches are numbered from 1 in the order
    /// given; only the last `variant.window(multi_window)` are used.
    pub fn initialize(
        variant: SvmVariant,
        c: f64,
        options: SvmOptions,
        multi_window: usize,
        init_batches: Vec<Vec<Example>>,
    ) -> Result<Self, LearnerError> {
        let mut svm = BatchSvm {
            variant,
            c,
            options,
            capacity: variant.window(multi_window).max(1),
            window: VecDeque::new(),
            batches_seen: 0,
            model: LinearModel::new(),
        };
        for batch in init_batches {
            svm.enqueue(batch);
        }
        svm.retrain()?;
        Ok(svm)
    }

    fn enqueue(&mut self, batch: Vec<Example>) {
        self.batches_seen += 1;
        self.window.push_back((self.batches_seen, batch));
        while self.window.len() > self.capacity {
            self.window.pop_front();
        }
    }

    fn retrain(&mut self) -> Result<(), LearnerError> {
        let data: Vec<Example> = self
            .window
            .iter()
            .flat_map(|(_, b)| b.iter().cloned())
            .collect();
        let options = SvmOptions {
            seed: self.options.seed.wrapping_add(self.batches_seen as u64),
            ..self.options
        };
        self.model = svm_train(&data, self.c, &options)?.model;
        Ok(())
    }

    /// Reveals the labels of a finished batch. Returns whether the model
    /// was retrained.
    pub fn push_batch(&mut self, batch: Vec<Example>) -> Result<bool, LearnerError> {
        if !self.variant.retrains() {
            self.batches_seen += 1;
            return Ok(false);
        }
        if batch.is_empty() {
            return Ok(false);
        }
        self.enqueue(batch);
        self.retrain()?;
        Ok(true)
    }

    pub fn model(&self) -> &LinearModel {
        &self.model
    }

    pub fn variant(&self) -> SvmVariant {
        self.variant
    }

    /// Ids of the batches in the current training window.
    pub fn window_batches(&self) -> Vec<usize> {
        self.window.iter().map(|(id, _)| *id).collect()
    }
}
