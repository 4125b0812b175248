//! Prints final errors of every learner on the bundled synthetic corpus.
//!
//! ```text
//! cargo run --release -p lexguard --example corpus_report -- [seed]
//! ```

use lexguard::eval::{
    generate_corpus, inject_noise, run_experiment, CorpusConfig, LearnerSpec, RunConfig,
};
use lexguard::learners::SvmVariant;
use lexguard::pipeline::FeatureMode;

fn main() {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(CorpusConfig::default().seed);
    let corpus = generate_corpus(&CorpusConfig {
        seed,
        ..CorpusConfig::default()
    });
    let stream = corpus.stream();
    let base = RunConfig {
        tune: true,
        ..RunConfig::default()
    };

    let report = |label: &str, config: &RunConfig, stream: &lexguard::eval::LabeledStream| {
        let out = run_experiment(stream, config).expect("run");
        let r = &out.result;
        println!(
            "{label:<28} {:<32} error {:.4}  fp {:>4}  fn {:>4}{}",
            out.learner.describe(),
            r.final_error,
            r.false_positives,
            r.false_negatives,
            r.clean
                .map(|c| format!("  clean {:.4}", c.error))
                .unwrap_or_default()
        );
        r.final_error
    };

    for variant in SvmVariant::ALL {
        let learner = LearnerSpec::Svm { c: 1.0, variant };
        report(
            &format!("svm {}", variant.name()),
            &RunConfig {
                learner,
                ..base.clone()
            },
            &stream,
        );
    }
    let arow = LearnerSpec::Arow {
        lambda1: 0.5,
        lambda2: 0.5,
    };
    let cw = LearnerSpec::Cw { eta: 0.7 };
    for (name, learner) in [
        ("perceptron", LearnerSpec::Perceptron),
        ("cw", cw),
        ("arow", arow),
    ] {
        report(
            name,
            &RunConfig {
                learner,
                ..base.clone()
            },
            &stream,
        );
    }
    report(
        "arow no-or",
        &RunConfig {
            learner: arow,
            feature_mode: FeatureMode::LexicalNoOr,
            ..base.clone()
        },
        &stream,
    );
    for rate in [0.1, 0.2, 0.3, 0.4] {
        let noisy = inject_noise(&stream, rate, seed);
        for (name, learner) in [("cw", cw), ("arow", arow)] {
            report(
                &format!("{name} noise {rate}"),
                &RunConfig {
                    learner,
                    ..base.clone()
                },
                &noisy,
            );
        }
    }
}
