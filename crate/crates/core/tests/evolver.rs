use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use innometer::corpus::{Corpus, RankedSource};
use innometer::evolver::{
    evolve, parse_reference, seeded_population, CrossoverKind, EvolverConfig, QueryGenotype,
    Termination,
};
use innometer::SearchPattern;
use proptest::prelude::*;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/evolve")
}

fn fixture() -> (SearchPattern, Corpus, EvolverConfig) {
    let dir = fixture_dir();
    let reference =
        parse_reference(&std::fs::read_to_string(dir.join("reference.json")).unwrap()).unwrap();
    let corpus = Corpus::load(&dir.join("corpus.jsonl")).unwrap();
    let config = serde_json::from_str(&std::fs::read_to_string(dir.join("config.json")).unwrap())
        .unwrap();
    (reference, corpus, config)
}

fn tf(text: &str) -> HashMap<String, f64> {
    let mut v = HashMap::new();
    for w in text.split_whitespace() {
        *v.entry(w.to_lowercase()).or_insert(0.0) += 1.0;
    }
    v
}

fn cos(a: &HashMap<String, f64>, b: &HashMap<String, f64>) -> f64 {
    let dot: f64 = a.iter().map(|(k, x)| x * b.get(k).copied().unwrap_or(0.0)).sum();
    let na = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Scores every pair of reference terms on its own, without the GA.
fn oracle_pair_scores(
    reference: &SearchPattern,
    corpus: &Corpus,
    config: &EvolverConfig,
) -> Vec<(f64, String, String)> {
    assert_eq!(config.weights.genericity, 0.0, "oracle scores queries in isolation");
    let k = tf(&reference.terms().join(" "));
    let d = config.results_per_query;
    let terms = reference.terms();
    let mut scores = Vec::new();
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            let hits = corpus.search(&[terms[i].clone(), terms[j].clone()], d).unwrap();
            let total: f64 = hits
                .iter()
                .enumerate()
                .map(|(r, h)| {
                    let g = 1.0 - r as f64 / (d.max(2) - 1) as f64;
                    config.weights.rank * g + config.weights.similarity * cos(&tf(&h.text), &k)
                })
                .sum();
            let mean = if hits.is_empty() { 0.0 } else { total / hits.len() as f64 };
            scores.push((mean, terms[i].clone(), terms[j].clone()));
        }
    }
    scores.sort_by(|a, b| b.0.total_cmp(&a.0));
    scores
}

#[test]
fn dominant_pair_matches_exhaustive_oracle() {
    let (reference, corpus, config) = fixture();
    let scores = oracle_pair_scores(&reference, &corpus, &config);
    let (best, a, b) = &scores[0];
    assert!(best - scores[1].0 > 1e-6, "oracle optimum must be unique");
    let model = evolve(&reference, &corpus, &config).unwrap();
    let top: BTreeSet<&str> = model.terms.iter().take(2).map(|t| t.term.as_str()).collect();
    assert_eq!(top, BTreeSet::from([a.as_str(), b.as_str()]));
    assert!(model.terms[1].weight > model.terms.get(2).map_or(0, |t| t.weight));
    let derived = model.derive_pattern(&reference, config.pattern_terms).unwrap();
    let lead: BTreeSet<&str> = derived.terms()[..2].iter().map(String::as_str).collect();
    assert_eq!(lead, top);
}

#[test]
fn evolve_is_deterministic() {
    let (reference, corpus, config) = fixture();
    let first = evolve(&reference, &corpus, &config).unwrap();
    let second = evolve(&reference, &corpus, &config).unwrap();
    assert_eq!(
        serde_json::to_string(&first).unwrap(),
        serde_json::to_string(&second).unwrap()
    );
    let mut parallel = config.clone();
    parallel.parallelism = 4;
    assert_eq!(first, evolve(&reference, &corpus, &parallel).unwrap());
}

#[test]
fn best_fitness_never_drops() {
    let (reference, corpus, mut config) = fixture();
    config.max_generations = 60;
    for seed in 0..100 {
        config.seed = seed;
        let model = evolve(&reference, &corpus, &config).unwrap();
        for pair in model.history.windows(2) {
            assert!(pair[1].best >= pair[0].best, "seed {seed}: {:?}", pair);
        }
    }
}

#[test]
fn degenerate_config_is_a_fixed_point() {
    let (reference, corpus, mut config) = fixture();
    config.crossover = CrossoverKind::None;
    config.mutation_probability = 0.0;
    config.stability_generations = 4;
    // a single elite makes Q_N the best individual
    config.elite_fraction = 0.05;
    let model = evolve(&reference, &corpus, &config).unwrap();
    assert_eq!(model.termination, Termination::Stability);
    assert_eq!(model.generations, 4);
    assert_eq!(model.history.len(), 5);

    let canon = |terms: &[String]| terms.iter().cloned().collect::<BTreeSet<_>>();
    let mut initial: Vec<_> = seeded_population(&reference, &config)
        .unwrap()
        .iter()
        .map(|g| canon(&g.terms()))
        .collect();
    let mut last: Vec<_> = model.population.iter().map(|q| canon(&q.terms)).collect();
    initial.sort();
    last.sort();
    assert_eq!(initial, last);
    assert!(model.history.iter().all(|h| h.best == model.history[0].best));

    let derived = model.derive_pattern(&reference, 12).unwrap();
    assert_eq!(derived.terms().to_vec(), {
        let mut t = model.queries[0].terms.clone();
        t.sort();
        t
    });
}

#[test]
fn max_generations_caps_the_run() {
    let (reference, corpus, mut config) = fixture();
    config.max_generations = 3;
    config.stability_generations = 50;
    let model = evolve(&reference, &corpus, &config).unwrap();
    assert_eq!(model.termination, Termination::MaxGenerations);
    assert_eq!(model.history.len(), 3);
}

#[test]
fn weights_sum_to_term_slots() {
    let (reference, corpus, config) = fixture();
    let model = evolve(&reference, &corpus, &config).unwrap();
    let slots: usize = model.queries.iter().map(|q| q.terms.len()).sum();
    assert_eq!(model.terms.iter().map(|t| t.weight).sum::<usize>(), slots);
    assert!(model.terms.iter().all(|t| t.weight > 0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn model_terms_trace_to_reference(seed in any::<u64>(), p_mut in 0.0f64..=1.0) {
        let (reference, corpus, mut config) = fixture();
        config.seed = seed;
        config.mutation_probability = p_mut;
        config.max_generations = 15;
        let mut vocabulary: BTreeSet<String> = reference.terms().iter().cloned().collect();
        for list in reference.synonyms().values() {
            vocabulary.extend(list.iter().cloned());
        }
        let model = evolve(&reference, &corpus, &config).unwrap();
        for t in &model.terms {
            prop_assert!(vocabulary.contains(&t.term), "{} not traceable", t.term);
        }
        for q in &model.population {
            let g = QueryGenotype::from_terms(&q.terms);
            prop_assert!(!g.is_empty());
        }
    }
}
