use filingtopics::config::Config;
use filingtopics::synth::{generate, SynthSpec};

fn spec(k: usize, docs: usize, seed: u64) -> SynthSpec {
    let config = Config {
        seed,
        ..Config::default()
    };
    let mut spec = SynthSpec::from_config(&config).unwrap();
    spec.k = k;
    spec.docs = docs;
    spec.vocab = 200;
    spec.doc_len = 100;
    spec
}

#[test]
fn token_marginals_follow_the_generative_formula() {
    let s = spec(5, 5000, 31);
    let data = generate(&s).unwrap();
    let (k, v, d) = (s.k, s.vocab, s.docs);
    let mean_theta: Vec<f64> = (0..k)
        .map(|t| (0..d).map(|i| data.theta[i * k + t]).sum::<f64>() / d as f64)
        .collect();
    let expected: Vec<f64> = (0..v)
        .map(|n| (0..k).map(|t| mean_theta[t] * data.phi[t * v + n]).sum())
        .collect();
    let mut counts = vec![0usize; v];
    for doc in &data.documents {
        for &w in doc {
            counts[w] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    assert_eq!(total, d * s.doc_len);
    let tv: f64 = counts
        .iter()
        .zip(&expected)
        .map(|(&c, &e)| (c as f64 / total as f64 - e).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv <= 0.01, "total variation {tv}");
}

#[test]
fn one_topic_draws_every_document_from_one_row() {
    let data = generate(&spec(1, 50, 2)).unwrap();
    assert!(data.theta.iter().all(|&t| t == 1.0));
    assert!(data.filings.iter().all(|f| f.dominant_topic == 0));
    let total: f64 = data.phi.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn fixed_seed_gives_identical_data() {
    let a = generate(&spec(3, 40, 9)).unwrap();
    let b = generate(&spec(3, 40, 9)).unwrap();
    assert_eq!(a.filings, b.filings);
    assert_eq!(a.phi, b.phi);
    assert_eq!(a.market, b.market);
    let c = generate(&spec(3, 40, 10)).unwrap();
    assert_ne!(a.phi, c.phi);
}

#[test]
fn invalid_dimensions_are_rejected() {
    assert!(generate(&spec(0, 10, 1)).is_err());
    assert!(generate(&spec(3, 0, 1)).is_err());
    let mut s = spec(3, 10, 1);
    s.vocab = 2;
    assert!(generate(&s).is_err());
}
