//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lexguard::eval::{
    generate_corpus, inject_noise, run_experiment, CorpusConfig, LabeledStream, LearnerSpec,
    RunConfig, RunResult,
};
use lexguard::features::{extract_bag_of_words, extract_or_features, Blacklist, FeatureVector};
use lexguard::learners::{
    arow_full_update, cw_full_update, probit, svm_train, Arow, Example, Label, OnlineLearner,
    Perceptron, SvmOptions, SvmVariant,
};
use lexguard::lexer::{parse_url, RawUrl};
use lexguard::persist::ModelFile;
use lexguard::pipeline::FeatureMode;
use lexguard::similarity::{ccdf, cdf, compute_distances, similar, BinaryFeatures};

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rand_vec(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(lo..hi)).collect()
}

/// Random symmetric positive definite `B B' + 0.2 I`, row-major.
fn rand_spd(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let b = rand_vec(rng, d * d, -1.0, 1.0);
    let mut s = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            s[i * d + j] = (0..d).map(|k| b[i * d + k] * b[j * d + k]).sum::<f64>();
        }
        s[i * d + i] += 0.2;
    }
    s
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

fn criterion_1() -> Check {
    let url = RawUrl::new("www.naturenilai.com/form2/paypal/webscr.php?cmd=_login").unwrap();
    let blacklist = Blacklist::default();
    let start = Instant::now();
    let parts = parse_url(&url).map_err(|e| e.to_string())?;
    let tokens = extract_bag_of_words(&parts);
    let or = extract_or_features(&parts, &blacklist).raw_values();
    let elapsed = start.elapsed();
    let expected_tokens = [
        "name=www",
        "name=naturenilai",
        "tld=com",
        "dir=form2",
        "dir=paypal",
        "file=webscr",
        "ext=php",
        "arg=cmd",
        "arg=login",
    ];
    ensure(tokens == expected_tokens, || format!("tokens {tokens:?}"))?;
    let expected_or = [
        54, 3, 1, 19, 0, 0, 3, 0, 11, 14, 2, 6, 0, 0, 10, 1, 0, 11, 1, 6, 1,
    ];
    ensure(or == expected_or, || format!("OR values {or:?}"))?;
    ensure(elapsed < Duration::from_millis(1), || {
        format!("extraction took {elapsed:?}")
    })?;
    Ok(format!(
        "9 tokens and 21 OR values exact, extracted in {elapsed:?}"
    ))
}

fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut updates) = (0.0f64, 0);
    for case in 0..100 {
        let d = rng.random_range(1..=3);
        let mu = rand_vec(&mut rng, d, -1.0, 1.0);
        let sigma = rand_spd(&mut rng, d);
        let x = rand_vec(&mut rng, d, -1.0, 1.0);
        let y = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let phi = probit(rng.random_range(0.55..0.95));
        let (m1, s1) = cw_full_update(&mu, &sigma, &x, y, phi);
        let (m2, s2) = common::cw_oracle(&mu, &sigma, &x, y, phi);
        let err = max_abs_diff(&m1, &m2).max(max_abs_diff(&s1, &s2));
        ensure(err <= 1e-6, || {
            format!("case {case} (d={d}) differs by {err:e}")
        })?;
        worst = worst.max(err);
        updates += usize::from(m1 != mu);
    }
    Ok(format!(
        "100 instances ({updates} with an update), max deviation {worst:.1e}"
    ))
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut case = 0;
    while case < 100 {
        let d = rng.random_range(1..=3);
        let mu = rand_vec(&mut rng, d, -1.0, 1.0);
        let sigma = rand_spd(&mut rng, d);
        let x = rand_vec(&mut rng, d, -1.0, 1.0);
        let y = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let margin: f64 = y * mu.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        // the closed form leaves the model alone at zero hinge loss, where
        // the objective would still shrink the covariance
        if margin >= 1.0 {
            continue;
        }
        let (l1, l2) = (rng.random_range(0.05..5.0), rng.random_range(0.05..5.0));
        let (m1, s1) = arow_full_update(&mu, &sigma, &x, y, l1, l2);
        let (m2, s2) = common::arow_oracle(&mu, &sigma, &x, y, l1, l2);
        let err = max_abs_diff(&m1, &m2).max(max_abs_diff(&s1, &s2));
        ensure(err <= 1e-6, || {
            format!("case {case} (d={d}) differs by {err:e}")
        })?;
        worst = worst.max(err);
        case += 1;
    }

    let mut arow = Arow::symmetric(0.5).map_err(|e| e.to_string())?;
    arow.update(&Example::new(
        FeatureVector::from_pairs([(0, 1.0)]),
        Label::Malicious,
    ));
    ensure(arow.model.mu == [0.5] && arow.model.sigma == [0.5], || {
        format!(
            "1-D case gave mu {:?} sigma {:?}",
            arow.model.mu, arow.model.sigma
        )
    })?;
    Ok(format!(
        "100 instances, max deviation {worst:.1e}; 1-D case exact"
    ))
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst, mut cert) = (0.0f64, 0.0f64);
    for case in 0..20 {
        let d = rng.random_range(2..=8);
        let truth = rand_vec(&mut rng, d, -1.0, 1.0);
        let c = [0.1, 0.5, 1.0, 2.0, 4.0][case % 5];
        let xs: Vec<Vec<f64>> = (0..50).map(|_| rand_vec(&mut rng, d, -1.0, 1.0)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| {
                let s: f64 = x.iter().zip(&truth).map(|(a, b)| a * b).sum::<f64>()
                    + rng.random_range(-0.3..0.3);
                if s >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        let batch: Vec<Example> = xs
            .iter()
            .zip(&ys)
            .map(|(x, &y)| Example::new(FeatureVector::from_dense(x), Label::from_sign(y)))
            .collect();
        let sol = svm_train(&batch, c, &SvmOptions::default()).map_err(|e| e.to_string())?;
        let oracle = common::svm_dual_oracle(&xs, &ys, c);
        let certified = (oracle.primal - oracle.dual) / oracle.dual.abs();
        ensure(certified <= 1e-6, || {
            format!("case {case}: oracle only certified to {certified:e}")
        })?;
        cert = cert.max(certified);
        let rel = (sol.dual_objective - oracle.dual).abs() / oracle.dual.abs();
        ensure(rel <= 1e-4, || {
            format!(
                "case {case}: dual {} vs oracle {} (gap bound {})",
                sol.dual_objective, oracle.dual, oracle.primal
            )
        })?;
        worst = worst.max(rel);
    }

    let batch = [
        Example::new(FeatureVector::from_pairs([(0, 1.0)]), Label::Malicious),
        Example::new(FeatureVector::from_pairs([(0, -1.0)]), Label::Benign),
    ];
    let w = svm_train(&batch, 32.0, &SvmOptions::default())
        .map_err(|e| e.to_string())?
        .model
        .w;
    ensure(w.len() == 1 && (w[0] - 1.0).abs() <= 1e-3, || {
        format!("2-point case gave w = {w:?}")
    })?;
    Ok(format!(
        "20 instances, max relative dual gap {worst:.1e} (oracle certified to {cert:.1e}); 2-point case w = {:.6}",
        w[0]
    ))
}

fn criterion_5() -> Check {
    let mut details = Vec::new();
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let u = [angle.cos(), angle.sin()];
        let (radius, gamma) = (rng.random_range(0.5..3.0), 0.02 + 0.02 * seed as f64);
        let mut data = Vec::new();
        while data.len() < 400 {
            let (r, t) = (
                radius * rng.random_range(0.0f64..1.0).sqrt(),
                rng.random_range(0.0..std::f64::consts::TAU),
            );
            let x = [r * t.cos(), r * t.sin()];
            let s = u[0] * x[0] + u[1] * x[1];
            if s.abs() >= gamma {
                data.push(Example::new(
                    FeatureVector::from_dense(&x),
                    Label::from_sign(s),
                ));
            }
        }
        let mut p = Perceptron::new();
        let mut mistakes = 0usize;
        loop {
            let before = mistakes;
            for ex in &data {
                mistakes += usize::from(p.update(ex));
            }
            if mistakes == before {
                break;
            }
        }
        let bound = (radius / gamma).powi(2);
        ensure(mistakes as f64 <= bound, || {
            format!("seed {seed}: {mistakes} mistakes > bound {bound:.1}")
        })?;
        details.push(format!("{mistakes}/{bound:.0}"));
    }
    Ok(format!("mistakes/bound: {}", details.join(" ")))
}

fn arow_tuned() -> RunConfig {
    RunConfig {
        learner: LearnerSpec::Arow {
            lambda1: 0.5,
            lambda2: 0.5,
        },
        tune: true,
        ..RunConfig::default()
    }
}

fn corpus_stream() -> (LabeledStream, u64) {
    let config = CorpusConfig::default();
    let corpus = generate_corpus(&config);
    assert!(corpus.benign.len() + corpus.malicious.len() >= 8000);
    (corpus.stream(), config.seed)
}

fn run(stream: &LabeledStream, config: &RunConfig) -> Result<(RunResult, LearnerSpec), String> {
    let out = run_experiment(stream, config).map_err(|e| e.to_string())?;
    Ok((out.result, out.learner))
}

fn criterion_6() -> Check {
    let (stream, _) = corpus_stream();
    let mut svm = Vec::new();
    for variant in SvmVariant::ALL {
        let config = RunConfig {
            learner: LearnerSpec::Svm { c: 1.0, variant },
            tune: true,
            ..RunConfig::default()
        };
        svm.push(run(&stream, &config)?.0.final_error);
    }
    let arow = run(&stream, &arow_tuned())?.0.final_error;
    let [once, single, multi_once, multi] = svm[..] else {
        unreachable!()
    };
    let detail = format!(
        "once {:.2}% single {:.2}% multi-once {:.2}% multi {:.2}% arow {:.2}%",
        100.0 * once,
        100.0 * single,
        100.0 * multi_once,
        100.0 * multi,
        100.0 * arow
    );
    ensure(once > single && multi_once > multi && arow < multi, || {
        detail.clone()
    })?;
    Ok(detail)
}

fn criterion_7() -> Check {
    let (stream, _) = corpus_stream();
    let (with_or, spec) = run(&stream, &arow_tuned())?;
    let config = RunConfig {
        learner: spec,
        feature_mode: FeatureMode::LexicalNoOr,
        ..RunConfig::default()
    };
    let (without, _) = run(&stream, &config)?;
    let reduction = (without.final_error - with_or.final_error) / without.final_error;
    let detail = format!(
        "{}: FN {} vs {} without OR, error {:.2}% vs {:.2}% (reduction {:.1}%)",
        spec.describe(),
        with_or.false_negatives,
        without.false_negatives,
        100.0 * with_or.final_error,
        100.0 * without.final_error,
        100.0 * reduction
    );
    ensure(
        with_or.false_negatives < without.false_negatives && reduction >= 0.05,
        || detail.clone(),
    )?;
    Ok(detail)
}

fn criterion_8() -> Check {
    let (stream, seed) = corpus_stream();
    let cw = RunConfig {
        learner: LearnerSpec::Cw { eta: 0.7 },
        tune: true,
        ..RunConfig::default()
    };
    let clean = run(&stream, &arow_tuned())?.0.final_error;
    let mut parts = vec![format!("clean {:.2}%", 100.0 * clean)];
    let mut ok = true;
    for rate in [0.1, 0.2, 0.3, 0.4] {
        let noisy = inject_noise(&stream, rate, seed);
        let a = run(&noisy, &arow_tuned())?.0.final_error;
        let c = run(&noisy, &cw)?.0.final_error;
        ok &= a <= c;
        if rate == 0.1 {
            ok &= a - clean < rate;
        }
        parts.push(format!(
            "{rate}: arow {:.2}% cw {:.2}%",
            100.0 * a,
            100.0 * c
        ));
    }
    let detail = parts.join(", ");
    ensure(ok, || detail.clone())?;
    Ok(detail)
}

fn criterion_9() -> Check {
    let blacklist = Blacklist::default();
    let a = RawUrl::new("67.23.226.61/~sarsefil/Absa/index.html").unwrap();
    let b = RawUrl::new("67.23.226.61/~sarsefil/index.html").unwrap();
    ensure(
        similar(&a, &b, 3, &blacklist).map_err(|e| e.to_string())?,
        || "worked pair not similar at tau 3".into(),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut total = 0;
    for list in 0..50 {
        let size = rng.random_range(200..=500);
        let corpus = generate_corpus(&CorpusConfig {
            seed: 900 + list,
            size,
            ..CorpusConfig::default()
        });
        let urls: Vec<RawUrl> = corpus.stream().items.into_iter().map(|it| it.url).collect();
        let tau = rng.random_range(0..=5);
        let feats: Vec<BinaryFeatures> = urls
            .iter()
            .map(|u| BinaryFeatures::from_url(u, &blacklist).unwrap())
            .collect();
        let sets: Vec<HashSet<String>> = feats
            .iter()
            .map(|f| f.keys().map(str::to_string).collect())
            .collect();
        let stats = compute_distances(&feats, tau);
        let (dmin, dmax) = common::naive_distances(&sets, tau);
        ensure(stats.delta_min == dmin && stats.delta_max == dmax, || {
            format!("list {list} (tau {tau}) differs")
        })?;
        let c = ccdf(&stats.delta_min).map_err(|e| e.to_string())?;
        let d = cdf(&stats.delta_max).map_err(|e| e.to_string())?;
        ensure(c.windows(2).all(|w| w[1].1 <= w[0].1), || {
            format!("list {list}: CCDF increases")
        })?;
        ensure(d.windows(2).all(|w| w[1].1 >= w[0].1), || {
            format!("list {list}: CDF decreases")
        })?;
        total += urls.len();
    }
    Ok(format!(
        "50 lists ({total} URLs) match the pairwise scan; worked pair similar at tau 3"
    ))
}

fn random_url(rng: &mut ChaCha8Rng) -> String {
    const CHARS: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789./?=_&-~:";
    let len = rng.random_range(1..60);
    let s: String = (0..len)
        .map(|_| CHARS[rng.random_range(0..CHARS.len())] as char)
        .collect();
    format!("x{s}")
}

fn criterion_10() -> Check {
    let (stream, _) = corpus_stream();
    let config = RunConfig {
        init_size: 1000,
        ..RunConfig::default()
    };
    let out = run_experiment(&stream, &config).map_err(|e| e.to_string())?;
    let mut file = ModelFile::new(out.learner, &out.featurizer, out.model.clone());
    file.metadata.insert("seed".into(), config.seed.to_string());

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.txt");
    file.save(&path).map_err(|e| e.to_string())?;
    let first = std::fs::read(&path).map_err(|e| e.to_string())?;
    let loaded = ModelFile::load(&path).map_err(|e| e.to_string())?;
    loaded.save(&path).map_err(|e| e.to_string())?;
    let second = std::fs::read(&path).map_err(|e| e.to_string())?;
    ensure(first == second, || {
        "save -> load -> save changed the file".into()
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut urls: Vec<RawUrl> = generate_corpus(&CorpusConfig {
        seed: 77,
        size: 900,
        ..CorpusConfig::default()
    })
    .stream()
    .items
    .into_iter()
    .map(|it| it.url)
    .collect();
    while urls.len() < 1000 {
        // keep strings the lexer accepts as URLs
        if let Ok(u) = RawUrl::new(&random_url(&mut rng)) {
            if parse_url(&u).is_ok() {
                urls.push(u);
            }
        }
    }
    let mut live = out.featurizer.clone();
    live.dictionary.freeze();
    let mut from_disk = loaded.featurizer();
    let mut agree = 0;
    for u in &urls {
        let expected = out
            .model
            .predict(&live.vectorize(u).map_err(|e| e.to_string())?);
        let got = loaded
            .classify(&mut from_disk, u)
            .map_err(|e| e.to_string())?;
        ensure(
            expected.label == got.label && expected.margin.to_bits() == got.margin.to_bits(),
            || format!("{}: {expected:?} vs {got:?}", u.as_str()),
        )?;
        agree += 1;
    }
    Ok(format!(
        "{} bytes byte-identical after reload; {agree}/1000 predictions identical",
        first.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "golden features of a known phishing URL",
            Duration::from_secs(1),
            criterion_1,
        ),
        (
            "CW closed form vs numerical oracle",
            Duration::from_secs(30),
            criterion_2,
        ),
        (
            "AROW closed form vs numerical oracle",
            Duration::from_secs(30),
            criterion_3,
        ),
        (
            "SVM dual vs QP oracle",
            Duration::from_secs(60),
            criterion_4,
        ),
        (
            "perceptron mistake bound",
            Duration::from_secs(10),
            criterion_5,
        ),
        (
            "batch vs online ordering",
            Duration::from_secs(300),
            criterion_6,
        ),
        ("OR-feature ablation", Duration::from_secs(120), criterion_7),
        ("noise resilience", Duration::from_secs(300), criterion_8),
        (
            "similarity vs pairwise scan",
            Duration::from_secs(60),
            criterion_9,
        ),
        (
            "model persistence round trip",
            Duration::from_secs(10),
            criterion_10,
        ),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > budget => Err(format!("took {elapsed:.1?}, budget {budget:?}")),
            other => other,
        };
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!(
            "criterion {:>2} {status} {name} [{elapsed:.2?}]: {detail}",
            i + 1
        );
        failed += usize::from(outcome.is_err());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
