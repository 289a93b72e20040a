use filingtopics_core::lda::{LdaConfig, LdaModel};
use filingtopics_core::relevance::{relevance, top_relevant_terms};
use filingtopics_core::{RelevanceContext, Vocabulary};
use proptest::prelude::*;

fn probability() -> impl Strategy<Value = f64> {
    1e-6..=1.0f64
}

fn normalized(weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// K × V topic-word weights plus a marginal over V terms.
fn toy_model() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>)> {
    (1..5usize, 2..25usize).prop_flat_map(|(k, v)| {
        (
            Just(k),
            Just(v),
            prop::collection::vec(0.001..1.0f64, k * v),
            prop::collection::vec(0.001..1.0f64, v),
        )
    })
}

proptest! {
    #[test]
    fn linear_in_lambda(phi in probability(), p in probability()) {
        let at = |l| relevance(phi, p, l).unwrap();
        prop_assert!((at(0.5) - (at(0.0) + at(1.0)) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn increasing_in_phi(phi in 1e-6..0.5f64, step in 1e-6..1.0f64, p in probability(), lambda in 0.01..=1.0f64) {
        let higher = (phi * (1.0 + step)).min(1.0);
        prop_assert!(relevance(phi, p, lambda).unwrap() < relevance(higher, p, lambda).unwrap());
    }

    #[test]
    fn lambda_one_ranks_by_phi((k, v, weights, marginal) in toy_model()) {
        let phi: Vec<f64> = weights.chunks(v).flat_map(|row| normalized(row.to_vec())).collect();
        let theta = vec![1.0 / k as f64; k];
        let model = LdaModel::from_parts(LdaConfig::new(k), v, 1, phi, theta, vec![]).unwrap();
        let vocab = Vocabulary::from_terms((0..v).map(|i| format!("t{i:02}")));
        let ctx = RelevanceContext::from_probabilities(normalized(marginal));
        for topic in 0..k {
            let ranked = top_relevant_terms(&model, &vocab, &ctx, topic, 1.0, v).unwrap();
            let got: Vec<&str> = ranked.terms.iter().map(|t| t.term.as_str()).collect();
            let row = model.phi_row(topic);
            let mut by_phi: Vec<usize> = (0..v).collect();
            by_phi.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
            let expected: Vec<&str> = by_phi.iter().map(|&i| vocab.term(i).unwrap()).collect();
            prop_assert_eq!(got, expected);
        }
    }
}
