use super::run::{LearnerSpec, OnlineModel};
use super::EvalError;
use crate::learners::{svm_train, Example, OnlineLearner, SvmOptions};

pub const CV_FOLDS: usize = 5;

/// `2^0 ..= 2^10`.
pub const C_GRID: [f64; 11] = [
    1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0,
];
pub const LAMBDA_GRID: [f64; 4] = [0.05, 0.5, 5.0, 50.0];
pub const ETA_GRID: [f64; 10] = [0.55, 0.58, 0.62, 0.66, 0.70, 0.73, 0.79, 0.84, 0.86, 0.90];

/// The default search grid for `spec`'s family. The SVM variant is kept;
/// AROW is searched with `lambda1 = lambda2`.
pub fn default_grid(spec: &LearnerSpec) -> Vec<LearnerSpec> {
    match *spec {
        LearnerSpec::Perceptron => vec![LearnerSpec::Perceptron],
        LearnerSpec::Cw { .. } => ETA_GRID
            .iter()
            .map(|&eta| LearnerSpec::Cw { eta })
            .collect(),
        LearnerSpec::Arow { .. } => LAMBDA_GRID
            .iter()
            .map(|&l| LearnerSpec::Arow {
                lambda1: l,
                lambda2: l,
            })
            .collect(),
        LearnerSpec::Svm { variant, .. } => C_GRID
            .iter()
            .map(|&c| LearnerSpec::Svm { c, variant })
            .collect(),
    }
}

fn fold_errors(
    spec: &LearnerSpec,
    train: &[&Example],
    test: &[Example],
    options: &SvmOptions,
) -> Result<usize, EvalError> {
    let wrong = |predict: &dyn Fn(&Example) -> bool| test.iter().filter(|e| !predict(e)).count();
    match spec {
        LearnerSpec::Svm { c, .. } => {
            let data: Vec<Example> = train.iter().map(|e| (*e).clone()).collect();
            let model = svm_train(&data, *c, options)?.model;
            Ok(wrong(&|e| model.predict(&e.x).label == e.y))
        }
        _ => {
            let mut learner = OnlineModel::from_spec(spec)?;
            for e in train {
                learner.update(e);
            }
            Ok(wrong(&|e| learner.predict(&e.x).label == e.y))
        }
    }
}

/// k-fold cross-validation over contiguous folds of `data`, kept in stream
/// order. Online learners make one pass over the training folds. Returns
/// the grid point with the lowest mean validation error; ties go to the
/// earlier point.
pub fn cross_validate(
    grid: &[LearnerSpec],
    data: &[Example],
    k: usize,
    options: &SvmOptions,
) -> Result<LearnerSpec, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::InvalidConfig("empty hyperparameter grid".into()));
    }
    if k < 2 {
        return Err(EvalError::InvalidConfig(format!(
            "cross-validation needs k >= 2, got {k}"
        )));
    }
    if data.len() < k {
        return Err(EvalError::TooFewExamples { n: data.len(), k });
    }
    let n = data.len();
    let bounds: Vec<usize> = (0..=k).map(|f| f * n / k).collect();
    let mut best: Option<(f64, LearnerSpec)> = None;
    for spec in grid {
        let mut total = 0.0;
        for f in 0..k {
            let (lo, hi) = (bounds[f], bounds[f + 1]);
            let train: Vec<&Example> = data[..lo].iter().chain(&data[hi..]).collect();
            total += fold_errors(spec, &train, &data[lo..hi], options)? as f64 / (hi - lo) as f64;
        }
        let mean = total / k as f64;
        if best.as_ref().is_none_or(|(b, _)| mean < *b) {
            best = Some((mean, *spec));
        }
    }
    Ok(best.expect("grid is non-empty").1)
}
