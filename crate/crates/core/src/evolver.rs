//! Genetic algorithm that evolves coded search queries against a ranked
//! document source and distills the surviving queries into a weighted
//! linguistic model.
//!
//! A query is a genotype of components `(term, synonyms)`. Each generation
//! keeps an elite unchanged and replaces every other individual with the
//! offspring of itself and its most distant mate from the fitter half of the
//! population (outbreeding), followed by synonym mutation. Fitness of a
//! query is the mean over its top-`D` results of
//! `w_g * g + w_p * p + w_s * s`, where `g` rewards rank, `p` rewards
//! results shared with other queries, and `s` is cosine similarity between
//! the result text and the reference term set.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{RankedHit, RankedSource, SourceError};
use crate::pattern::{self, PatternError, SearchPattern, MAX_TERMS};
use crate::text;

/// Sparse term-frequency vector.
pub type TermVector = BTreeMap<String, f64>;

const MIN_GENOTYPE_LEN: usize = 2;
const MAX_GENOTYPE_LEN: usize = 6;

#[derive(Debug, Error)]
pub enum EvolverError {
    #[error("evolver config: {0}")]
    Config(String),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub term: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub synonyms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryGenotype {
    pub components: Vec<Component>,
}

impl QueryGenotype {
    pub fn from_terms<S: AsRef<str>>(terms: &[S]) -> Self {
        QueryGenotype {
            components: terms
                .iter()
                .map(|t| Component {
                    term: t.as_ref().to_string(),
                    synonyms: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn terms(&self) -> Vec<String> {
        self.components.iter().map(|c| c.term.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    fn folded_terms(&self) -> BTreeSet<String> {
        self.components.iter().map(|c| text::fold(&c.term)).collect()
    }

    /// Drops components whose term already occurred earlier.
    fn dedup(mut self) -> Self {
        let mut seen = BTreeSet::new();
        self.components.retain(|c| seen.insert(text::fold(&c.term)));
        self
    }
}

impl fmt::Display for QueryGenotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pattern::render_phrases(&self.terms(), pattern::Dialect::Plain))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossoverKind {
    OnePoint,
    TwoPoint,
    /// Offspring are copies of their first parent.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessWeights {
    pub rank: f64,
    pub genericity: f64,
    pub similarity: f64,
}

impl Default for FitnessWeights {
    fn default() -> Self {
        FitnessWeights {
            rank: 0.2,
            genericity: 0.2,
            similarity: 0.6,
        }
    }
}

fn default_elite_fraction() -> f64 {
    0.25
}
fn default_epsilon() -> f64 {
    1e-6
}
fn default_stability_generations() -> usize {
    5
}
fn default_max_generations() -> usize {
    100
}
fn default_results() -> usize {
    10
}
fn default_parallelism() -> usize {
    1
}
fn default_pattern_terms() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolverConfig {
    pub population_size: usize,
    #[serde(default)]
    pub weights: FitnessWeights,
    pub crossover: CrossoverKind,
    pub mutation_probability: f64,
    #[serde(default = "default_elite_fraction")]
    pub elite_fraction: f64,
    #[serde(default = "default_epsilon")]
    pub stability_epsilon: f64,
    #[serde(default = "default_stability_generations")]
    pub stability_generations: usize,
    #[serde(default = "default_max_generations")]
    pub max_generations: usize,
    #[serde(default)]
    pub seed: u64,
    /// Results considered per query (D).
    #[serde(default = "default_results")]
    pub results_per_query: usize,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Key terms in the pattern derived from the evolved model.
    #[serde(default = "default_pattern_terms")]
    pub pattern_terms: usize,
}

impl EvolverConfig {
    pub fn validate(&self, reference_terms: usize) -> Result<(), EvolverError> {
        let fail = |msg: String| Err(EvolverError::Config(msg));
        if reference_terms < 3 {
            return fail(format!("need at least 3 reference terms, got {reference_terms}"));
        }
        if self.population_size == 0 || 2 * self.population_size >= reference_terms {
            return fail(format!(
                "population size {} must satisfy 0 < N < |K|/2 = {}",
                self.population_size,
                reference_terms as f64 / 2.0
            ));
        }
        let w = &self.weights;
        if [w.rank, w.genericity, w.similarity]
            .iter()
            .any(|x| !x.is_finite() || *x < 0.0)
        {
            return fail("fitness weights must be finite and non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return fail("mutation_probability must lie in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.elite_fraction) {
            return fail("elite_fraction must lie in [0, 1]".into());
        }
        if self.stability_epsilon.is_nan() || self.stability_epsilon <= 0.0 {
            return fail("stability_epsilon must be positive".into());
        }
        if self.stability_generations == 0 {
            return fail("stability_generations must be at least 1".into());
        }
        if self.max_generations == 0 {
            return fail("max_generations must be at least 1".into());
        }
        if self.results_per_query == 0 {
            return fail("results_per_query must be at least 1".into());
        }
        if !(1..=MAX_TERMS).contains(&self.pattern_terms) {
            return fail(format!("pattern_terms must lie in 1..={MAX_TERMS}"));
        }
        Ok(())
    }

    fn elite_count(&self) -> usize {
        ((self.elite_fraction * self.population_size as f64).ceil() as usize)
            .clamp(1, self.population_size)
    }

    fn pool_size(&self) -> usize {
        self.population_size.div_ceil(2).max(2).min(self.population_size)
    }
}

/// Per-individual random stream: runs agree whatever the evaluation order.
fn stream(seed: u64, generation: usize, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) ^ slot);
    rng
}

/// Reference term file: same format as a pattern file without the term cap.
pub fn parse_reference(document: &str) -> Result<SearchPattern, PatternError> {
    pattern::parse_uncapped(document)
}

fn component(reference: &SearchPattern, term: &str) -> Component {
    Component {
        term: term.to_string(),
        synonyms: reference.synonyms_of(term).to_vec(),
    }
}

/// Random genotypes of 2 to 6 distinct reference terms. Terms are dealt
/// from a shuffled deck that is reshuffled when exhausted, so the initial
/// population covers as much of the reference set as its size allows.
pub fn init_population(
    reference: &SearchPattern,
    config: &EvolverConfig,
    rng: &mut impl Rng,
) -> Result<Vec<QueryGenotype>, EvolverError> {
    let k = reference.term_count();
    config.validate(k)?;
    let longest = MAX_GENOTYPE_LEN.min(k);
    let mut deck: Vec<usize> = Vec::new();
    let mut population = Vec::with_capacity(config.population_size);
    for _ in 0..config.population_size {
        let len = rng.random_range(MIN_GENOTYPE_LEN..=longest);
        let mut picked: Vec<usize> = Vec::with_capacity(len);
        let mut held = Vec::new();
        while picked.len() < len {
            if deck.is_empty() {
                deck = (0..k).collect();
                deck.shuffle(rng);
            }
            let card = deck.pop().expect("deck refilled");
            if picked.contains(&card) {
                held.push(card);
            } else {
                picked.push(card);
            }
        }
        // cards already in this genotype go back on top for the next one
        deck.extend(held);
        population.push(QueryGenotype {
            components: picked
                .iter()
                .map(|&i| component(reference, &reference.terms()[i]))
                .collect(),
        });
    }
    Ok(population)
}

/// Swaps the suffixes starting at `cut`. A cut of 0 (or past the shorter
/// parent) leaves both parents unchanged.
pub fn one_point(a: &QueryGenotype, b: &QueryGenotype, cut: usize) -> (QueryGenotype, QueryGenotype) {
    two_point(a, b, cut, a.len().max(b.len()))
}

/// Swaps positions `from..to` (clamped to each parent's length).
pub fn two_point(
    a: &QueryGenotype,
    b: &QueryGenotype,
    from: usize,
    to: usize,
) -> (QueryGenotype, QueryGenotype) {
    if from == 0 || from >= a.len().min(b.len()) || to <= from {
        return (a.clone(), b.clone());
    }
    let splice = |head: &QueryGenotype, donor: &QueryGenotype| {
        let mut components = head.components[..from].to_vec();
        components.extend_from_slice(&donor.components[from..to.min(donor.len())]);
        components.extend_from_slice(&head.components[to.min(head.len())..]);
        QueryGenotype { components }.dedup()
    };
    (splice(a, b), splice(b, a))
}

pub fn crossover(
    a: &QueryGenotype,
    b: &QueryGenotype,
    kind: CrossoverKind,
    rng: &mut impl Rng,
) -> (QueryGenotype, QueryGenotype) {
    let shorter = a.len().min(b.len());
    if shorter < 2 {
        return (a.clone(), b.clone());
    }
    match kind {
        CrossoverKind::None => (a.clone(), b.clone()),
        CrossoverKind::OnePoint => one_point(a, b, rng.random_range(1..shorter)),
        CrossoverKind::TwoPoint => {
            let from = rng.random_range(1..shorter);
            let to = rng.random_range(from + 1..=shorter);
            two_point(a, b, from, to)
        }
    }
}

/// With probability `p_mut` per component, swaps the term for a uniformly
/// chosen synonym. The replaced term becomes a synonym of the new one.
pub fn mutate(genotype: &QueryGenotype, p_mut: f64, rng: &mut impl Rng) -> QueryGenotype {
    let mut out = genotype.clone();
    for c in &mut out.components {
        if c.synonyms.is_empty() || !rng.random_bool(p_mut) {
            continue;
        }
        let pick = rng.random_range(0..c.synonyms.len());
        std::mem::swap(&mut c.term, &mut c.synonyms[pick]);
    }
    out.dedup()
}

/// `dot(a, b) / (|a| |b|)`; 0 when either vector is zero.
pub fn cosine_similarity(a: &TermVector, b: &TermVector) -> f64 {
    let dot: f64 = a
        .iter()
        .filter_map(|(t, x)| b.get(t).map(|y| x * y))
        .sum();
    let norm = |v: &TermVector| v.values().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// Term-frequency vector of the joined reference terms.
pub fn reference_vector(reference: &SearchPattern) -> TermVector {
    text::term_frequencies(&reference.terms().join(" "))
}

/// The three standardized fitness components of one result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessComponents {
    pub rank: f64,
    pub genericity: f64,
    pub similarity: f64,
}

impl FitnessComponents {
    pub fn weighted(&self, w: &FitnessWeights) -> f64 {
        w.rank * self.rank + w.genericity * self.genericity + w.similarity * self.similarity
    }
}

pub fn fitness_components(
    rank: usize,
    depth: usize,
    result_id: &str,
    other_results: &[Vec<String>],
    result_text: &str,
    reference: &TermVector,
) -> FitnessComponents {
    let rank_score = 1.0 - (rank.saturating_sub(1)) as f64 / depth.saturating_sub(1).max(1) as f64;
    let shared = other_results
        .iter()
        .filter(|ids| ids.iter().any(|id| id == result_id))
        .count();
    FitnessComponents {
        rank: rank_score.clamp(0.0, 1.0),
        genericity: shared as f64 / other_results.len().max(1) as f64,
        similarity: cosine_similarity(&text::term_frequencies(result_text), reference),
    }
}

/// `w_g * g + w_p * p + w_s * s` for the result at 1-based `rank`.
pub fn result_fitness(
    rank: usize,
    depth: usize,
    result_id: &str,
    other_results: &[Vec<String>],
    result_text: &str,
    reference: &TermVector,
    weights: &FitnessWeights,
) -> f64 {
    fitness_components(rank, depth, result_id, other_results, result_text, reference)
        .weighted(weights)
}

/// Mean result fitness over a query's results; 0 with no results.
pub fn query_fitness(
    results: &[RankedHit],
    other_results: &[Vec<String>],
    reference: &TermVector,
    config: &EvolverConfig,
) -> f64 {
    let depth = config.results_per_query;
    let scored: Vec<f64> = results
        .iter()
        .take(depth)
        .enumerate()
        .map(|(i, hit)| {
            result_fitness(
                i + 1,
                depth,
                &hit.id,
                other_results,
                &hit.text,
                reference,
                &config.weights,
            )
        })
        .collect();
    if scored.is_empty() {
        return 0.0;
    }
    scored.iter().sum::<f64>() / scored.len() as f64
}

/// Term → number of queries containing it, by descending weight then term.
pub fn model_weights(queries: &[QueryGenotype]) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for q in queries {
        let distinct: BTreeSet<String> = q.terms().into_iter().collect();
        for term in distinct {
            *counts.entry(term).or_insert(0) += 1;
        }
    }
    let mut weights: Vec<(String, usize)> = counts.into_iter().collect();
    weights.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    weights
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Stability,
    MaxGenerations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredQuery {
    pub terms: Vec<String>,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedTerm {
    pub term: String,
    pub weight: usize,
}

/// Outcome of a run: the effective queries (the final elite), the weighted
/// term multiset they induce, and per-generation fitness history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolvedModel {
    pub terms: Vec<WeightedTerm>,
    pub queries: Vec<ScoredQuery>,
    pub population: Vec<ScoredQuery>,
    pub history: Vec<GenerationStats>,
    pub generations: usize,
    pub termination: Termination,
}

impl EvolvedModel {
    /// Pattern built from the `n` heaviest terms, keeping the reference
    /// marker and any synonyms registered for the chosen terms.
    pub fn derive_pattern(
        &self,
        reference: &SearchPattern,
        n: usize,
    ) -> Result<SearchPattern, PatternError> {
        let terms: Vec<String> = self.terms.iter().take(n).map(|t| t.term.clone()).collect();
        let synonyms = terms
            .iter()
            .filter(|t| !reference.synonyms_of(t).is_empty())
            .map(|t| (t.clone(), reference.synonyms_of(t).to_vec()))
            .collect();
        SearchPattern::new(reference.marker(), terms, synonyms)
    }
}

struct Evaluator<'a> {
    engine: &'a dyn RankedSource,
    reference: TermVector,
    config: &'a EvolverConfig,
    results: HashMap<Vec<String>, Vec<RankedHit>>,
}

impl Evaluator<'_> {
    fn fetch(&mut self, population: &[QueryGenotype]) -> Result<(), SourceError> {
        let mut missing: Vec<Vec<String>> = population
            .iter()
            .map(QueryGenotype::terms)
            .filter(|t| !self.results.contains_key(t))
            .collect();
        missing.sort();
        missing.dedup();
        let engine = self.engine;
        let depth = self.config.results_per_query;
        let search = |terms: &Vec<String>| engine.search(terms, depth);
        let fetched: Vec<Result<Vec<RankedHit>, SourceError>> = if self.config.parallelism > 1 {
            match rayon::ThreadPoolBuilder::new()
                .num_threads(self.config.parallelism)
                .build()
            {
                Ok(pool) => pool.install(|| missing.par_iter().map(search).collect()),
                Err(_) => missing.iter().map(search).collect(),
            }
        } else {
            missing.iter().map(search).collect()
        };
        for (terms, hits) in missing.into_iter().zip(fetched) {
            self.results.insert(terms, hits?);
        }
        Ok(())
    }

    /// Fitness of the individuals flagged in `evaluate`; the rest keep the
    /// value passed in `previous`.
    fn score(
        &mut self,
        population: &[QueryGenotype],
        previous: &[Option<f64>],
    ) -> Result<Vec<f64>, SourceError> {
        self.fetch(population)?;
        let ids: Vec<Vec<String>> = population
            .iter()
            .map(|g| self.results[&g.terms()].iter().map(|h| h.id.clone()).collect())
            .collect();
        Ok(population
            .iter()
            .enumerate()
            .map(|(i, g)| {
                previous[i].unwrap_or_else(|| {
                    let others: Vec<Vec<String>> = ids
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, v)| v.clone())
                        .collect();
                    query_fitness(&self.results[&g.terms()], &others, &self.reference, self.config)
                })
            })
            .collect())
    }
}

fn symmetric_distance(a: &QueryGenotype, b: &QueryGenotype) -> usize {
    a.folded_terms()
        .symmetric_difference(&b.folded_terms())
        .count()
}

fn stats(generation: usize, fitness: &[f64]) -> GenerationStats {
    GenerationStats {
        generation,
        best: fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: fitness.iter().sum::<f64>() / fitness.len() as f64,
    }
}

/// Indices ordered by descending fitness, ties by position. Repeats of an
/// earlier term set rank behind every distinct individual, so clones never
/// crowd the elite or the mating pool.
fn ranking(population: &[QueryGenotype], fitness: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
    let mut seen = BTreeSet::new();
    let (distinct, clones): (Vec<usize>, Vec<usize>) = order
        .into_iter()
        .partition(|&i| seen.insert(population[i].folded_terms()));
    distinct.into_iter().chain(clones).collect()
}

/// The initial population `evolve` starts from for `config.seed`.
pub fn seeded_population(
    reference: &SearchPattern,
    config: &EvolverConfig,
) -> Result<Vec<QueryGenotype>, EvolverError> {
    init_population(reference, config, &mut stream(config.seed, 0, u64::from(u32::MAX)))
}

pub fn evolve(
    reference: &SearchPattern,
    engine: &dyn RankedSource,
    config: &EvolverConfig,
) -> Result<EvolvedModel, EvolverError> {
    let mut population = seeded_population(reference, config)?;
    let mut evaluator = Evaluator {
        engine,
        reference: reference_vector(reference),
        config,
        results: HashMap::new(),
    };
    let mut fitness = evaluator.score(&population, &vec![None; population.len()])?;
    let mut history = vec![stats(0, &fitness)];
    let elites = config.elite_count();
    let pool_size = config.pool_size();
    let mut stable = 0;
    let mut generation = 0;

    let termination = loop {
        if stable >= config.stability_generations {
            break Termination::Stability;
        }
        if generation + 1 >= config.max_generations {
            break Termination::MaxGenerations;
        }
        generation += 1;

        let order = ranking(&population, &fitness);
        let pool = &order[..pool_size];
        let mut next = Vec::with_capacity(population.len());
        let mut carried = Vec::with_capacity(population.len());
        for &i in &order[..elites] {
            next.push(population[i].clone());
            carried.push(Some(fitness[i]));
        }
        for (slot, &i) in order[elites..].iter().enumerate() {
            let mut rng = stream(config.seed, generation, slot as u64);
            let parent = &population[i];
            let mate = pool
                .iter()
                .filter(|&&j| j != i)
                .max_by(|&&x, &&y| {
                    symmetric_distance(parent, &population[x])
                        .cmp(&symmetric_distance(parent, &population[y]))
                        // prefer the earlier (fitter) pool member on ties
                        .then(y.cmp(&x).then(std::cmp::Ordering::Equal))
                })
                .map(|&j| &population[j]);
            let child = match mate {
                Some(mate) if config.crossover != CrossoverKind::None => {
                    let (first, second) = crossover(parent, mate, config.crossover, &mut rng);
                    if rng.random_bool(0.5) {
                        first
                    } else {
                        second
                    }
                }
                _ => parent.clone(),
            };
            next.push(mutate(&child, config.mutation_probability, &mut rng));
            carried.push(None);
        }

        let previous_best = history.last().map(|s| s.best).unwrap_or(f64::NEG_INFINITY);
        population = next;
        fitness = evaluator.score(&population, &carried)?;
        let current = stats(generation, &fitness);
        if (current.best - previous_best).abs() < config.stability_epsilon {
            stable += 1;
        } else {
            stable = 0;
        }
        history.push(current);
    };

    let order = ranking(&population, &fitness);
    let scored = |i: usize| ScoredQuery {
        terms: population[i].terms(),
        fitness: fitness[i],
    };
    let effective: Vec<QueryGenotype> = order[..elites].iter().map(|&i| population[i].clone()).collect();
    Ok(EvolvedModel {
        terms: model_weights(&effective)
            .into_iter()
            .map(|(term, weight)| WeightedTerm { term, weight })
            .collect(),
        queries: order[..elites].iter().map(|&i| scored(i)).collect(),
        population: order.iter().map(|&i| scored(i)).collect(),
        history,
        generations: generation,
        termination,
    })
}
