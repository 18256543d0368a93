//! Real-coded genetic algorithm with elitism and tournament selection, in a
//! fixed-length and a variable-length (collision count) flavour.

use log::{debug, warn};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::GenomeLayout;
use crate::objective::Evaluator;

/// Maximum redraws of the split point before the parents are copied.
const MAX_SPLIT_ATTEMPTS: usize = 100;

/// Genome -> fitness (larger is better). Must not draw randomness.
pub trait Fitness: Sync {
    fn fitness(&self, genes: &[f64]) -> Result<f64>;
}

impl<F> Fitness for F
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    fn fitness(&self, genes: &[f64]) -> Result<f64> {
        self(genes)
    }
}

impl Fitness for Evaluator {
    fn fitness(&self, genes: &[f64]) -> Result<f64> {
        Evaluator::fitness(self, genes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    /// Population size N.
    pub population: usize,
    /// Elite count M.
    pub elites: usize,
    /// Tournament size K.
    pub tournament: usize,
    /// Mutation factor mu; the per-gene rate is mu / L.
    pub mutation: f64,
    /// Probability of inserting, and separately of deleting, a collision.
    pub p_bar: f64,
    /// Largest collision count in variable mode.
    pub n_max: usize,
    /// Number of generations.
    pub generations: usize,
    pub seed: u64,
    /// Stop as soon as the best fitness reaches this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitness_threshold: Option<f64>,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 200,
            elites: 100,
            tournament: 4,
            mutation: 1.0,
            p_bar: 0.05,
            n_max: 100,
            generations: 1000,
            seed: 0,
            fitness_threshold: None,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.elites < 1 || self.elites >= self.population {
            return fail(format!(
                "need 1 <= elites < population, got elites = {}, population = {}",
                self.elites, self.population
            ));
        }
        if !(self.population - self.elites).is_multiple_of(2) {
            return fail(format!("population - elites must be even, got {}", self.population - self.elites));
        }
        if self.tournament < 1 {
            return fail("tournament size must be at least 1".into());
        }
        if !(self.mutation > 0.0) || !self.mutation.is_finite() {
            return fail(format!("mutation factor must be positive, got {}", self.mutation));
        }
        if !(0.0..=1.0).contains(&self.p_bar) {
            return fail(format!("p_bar must lie in [0, 1], got {}", self.p_bar));
        }
        if self.n_max < 1 {
            return fail("n_max must be at least 1".into());
        }
        if matches!(self.fitness_threshold, Some(t) if t.is_nan()) {
            return fail("fitness threshold is NaN".into());
        }
        Ok(())
    }

    pub fn couples(&self) -> usize {
        (self.population - self.elites) / 2
    }
}

/// Whether the collision count is fixed or evolves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaMode {
    Fixed { n: usize },
    Variable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    /// Mean over members with finite fitness.
    pub mean_fitness: f64,
    pub best_collisions: usize,
    pub best_genome: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaRun {
    pub config: GaConfig,
    pub mode: GaMode,
    /// Generation 0 is the initial population.
    pub records: Vec<GenerationRecord>,
    pub best_genome: Vec<f64>,
    pub best_fitness: f64,
    pub threshold_reached: bool,
}

/// Index of the fittest of `k` uniform draws with replacement; ties go to the
/// lowest index.
pub fn tournament_select<R: Rng + ?Sized>(fitness: &[f64], k: usize, rng: &mut R) -> usize {
    assert!(!fitness.is_empty(), "tournament on an empty population");
    let mut best = rng.gen_range(0..fitness.len());
    for _ in 1..k {
        let c = rng.gen_range(0..fitness.len());
        if fitness[c] > fitness[best] || (fitness[c] == fitness[best] && c < best) {
            best = c;
        }
    }
    best
}

/// `(g a + (1-g) b, g b + (1-g) a)` over the first `len` genes; the rest is
/// copied.
pub fn blend_prefix(a: &[f64], b: &[f64], gamma: f64, len: usize) -> (Vec<f64>, Vec<f64>) {
    let mut ca = a.to_vec();
    let mut cb = b.to_vec();
    for k in 0..len {
        ca[k] = (gamma * a[k] + (1.0 - gamma) * b[k]).clamp(0.0, 1.0);
        cb[k] = (gamma * b[k] + (1.0 - gamma) * a[k]).clamp(0.0, 1.0);
    }
    (ca, cb)
}

/// Fixed-length crossover with one gamma ~ U[0,1] per couple.
pub fn blend_crossover<R: Rng + ?Sized>(a: &[f64], b: &[f64], rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != b.len() {
        return Err(Error::Layout(format!("parents of length {} and {}", a.len(), b.len())));
    }
    let gamma: f64 = rng.gen();
    Ok(blend_prefix(a, b, gamma, a.len()))
}

/// Replaces each gene with a fresh uniform draw with probability
/// `min(mu / L, 1)`.
pub fn mutate_fixed<R: Rng + ?Sized>(genes: &mut [f64], mu: f64, rng: &mut R) {
    if genes.is_empty() {
        return;
    }
    let p = (mu / genes.len() as f64).min(1.0);
    for g in genes.iter_mut() {
        if rng.gen::<f64>() < p {
            *g = rng.gen();
        }
    }
}

/// Splits each parent after `min(n_r, n_parent)` collisions and swaps the
/// tails.
pub fn split_swap(a: &[f64], b: &[f64], n_r: usize, layout: &GenomeLayout) -> Result<(Vec<f64>, Vec<f64>)> {
    let (na, nb) = (layout.collisions(a.len())?, layout.collisions(b.len())?);
    let sa = layout.length(n_r.min(na));
    let sb = layout.length(n_r.min(nb));
    let ta = [&a[..sa], &b[sb..]].concat();
    let tb = [&b[..sb], &a[sa..]].concat();
    Ok((ta, tb))
}

/// Two-step variable-length crossover: tail swap at a random shared
/// collision, then blending of the shared prefix.
pub fn crossover_variable<R: Rng + ?Sized>(
    a: &[f64],
    b: &[f64],
    layout: &GenomeLayout,
    n_max: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n_l = layout.collisions(a.len())?.max(layout.collisions(b.len())?);
    let mut swapped = None;
    for _ in 0..MAX_SPLIT_ATTEMPTS {
        let n_r = rng.gen_range(1..=n_l);
        let (ta, tb) = split_swap(a, b, n_r, layout)?;
        let ok = |t: &[f64]| layout.collisions(t.len()).is_ok_and(|n| n <= n_max);
        if ok(&ta) && ok(&tb) {
            swapped = Some((ta, tb));
            break;
        }
    }
    let Some((ta, tb)) = swapped else {
        return Ok((a.to_vec(), b.to_vec()));
    };
    let gamma: f64 = rng.gen();
    let shared = ta.len().min(tb.len());
    Ok(blend_prefix(&ta, &tb, gamma, shared))
}

/// Structural mutation (insert, then delete, a collision block, each with
/// probability `p_bar`) followed by per-gene mutation.
pub fn mutate_variable<R: Rng + ?Sized>(
    genes: &mut Vec<f64>,
    mu: f64,
    p_bar: f64,
    layout: &GenomeLayout,
    n_max: usize,
    rng: &mut R,
) -> Result<()> {
    let mut n = layout.collisions(genes.len())?;
    let (l0, ld) = (layout.lambda0(), layout.lambda_d());
    if rng.gen::<f64>() < p_bar && n < n_max {
        let pos = l0 + ld * rng.gen_range(0..=n);
        let block: Vec<f64> = (0..ld).map(|_| rng.gen()).collect();
        genes.splice(pos..pos, block);
        n += 1;
    }
    if rng.gen::<f64>() < p_bar && n > 1 {
        let pos = l0 + ld * rng.gen_range(0..n);
        genes.drain(pos..pos + ld);
    }
    mutate_fixed(genes, mu, rng);
    Ok(())
}

fn random_genome<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| rng.gen()).collect()
}

fn evaluate_all<F: Fitness + ?Sized>(fitness: &F, genomes: &[Vec<f64>]) -> Vec<f64> {
    genomes
        .par_iter()
        .map(|g| match fitness.fitness(g) {
            Ok(f) if !f.is_nan() => f,
            Ok(_) => {
                warn!("fitness is NaN; scored as -inf");
                f64::NEG_INFINITY
            }
            Err(e) => {
                warn!("fitness evaluation failed ({e}); scored as -inf");
                f64::NEG_INFINITY
            }
        })
        .collect()
}

/// Population indices from best to worst; equal fitness keeps index order.
fn ranking(fitness: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&i, &j| fitness[j].total_cmp(&fitness[i]).then(i.cmp(&j)));
    order
}

fn record(generation: usize, genomes: &[Vec<f64>], fitness: &[f64], layout: &GenomeLayout) -> GenerationRecord {
    let best = ranking(fitness)[0];
    let finite: Vec<f64> = fitness.iter().copied().filter(|f| f.is_finite()).collect();
    let mean_fitness =
        if finite.is_empty() { f64::NEG_INFINITY } else { finite.iter().sum::<f64>() / finite.len() as f64 };
    GenerationRecord {
        generation,
        best_fitness: fitness[best],
        mean_fitness,
        best_collisions: layout.collisions(genomes[best].len()).unwrap_or(0),
        best_genome: genomes[best].clone(),
    }
}

pub fn evolve<F: Fitness + ?Sized>(
    fitness: &F,
    layout: &GenomeLayout,
    mode: GaMode,
    config: &GaConfig,
) -> Result<GaRun> {
    evolve_with(fitness, layout, mode, config, |_| Ok(()))
}

/// Runs the GA, passing every generation record to `sink` as it is produced.
pub fn evolve_with<F, S>(
    fitness: &F,
    layout: &GenomeLayout,
    mode: GaMode,
    config: &GaConfig,
    mut sink: S,
) -> Result<GaRun>
where
    F: Fitness + ?Sized,
    S: FnMut(&GenerationRecord) -> Result<()>,
{
    config.validate()?;
    layout.validate()?;
    if let GaMode::Fixed { n } = mode {
        if n < 1 {
            return Err(Error::Config("fixed mode needs at least one collision".into()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut genomes: Vec<Vec<f64>> = (0..config.population)
        .map(|_| {
            let n = match mode {
                GaMode::Fixed { n } => n,
                GaMode::Variable => rng.gen_range(1..=config.n_max),
            };
            random_genome(layout.length(n), &mut rng)
        })
        .collect();
    let mut scores = evaluate_all(fitness, &genomes);

    let mut records = vec![record(0, &genomes, &scores, layout)];
    sink(&records[0])?;
    let reached = |r: &GenerationRecord| config.fitness_threshold.is_some_and(|t| r.best_fitness >= t);

    for generation in 1..=config.generations {
        if reached(records.last().expect("nonempty")) {
            break;
        }
        debug_assert_eq!(genomes.len(), config.population);
        let order = ranking(&scores);
        let mut next: Vec<Vec<f64>> = order[..config.elites].iter().map(|&i| genomes[i].clone()).collect();
        let mut next_scores: Vec<f64> = order[..config.elites].iter().map(|&i| scores[i]).collect();

        let mut offspring = Vec::with_capacity(2 * config.couples());
        for _ in 0..config.couples() {
            let pa = tournament_select(&scores, config.tournament, &mut rng);
            let pb = tournament_select(&scores, config.tournament, &mut rng);
            let (mut ca, mut cb) = match mode {
                GaMode::Fixed { .. } => blend_crossover(&genomes[pa], &genomes[pb], &mut rng)?,
                GaMode::Variable => crossover_variable(&genomes[pa], &genomes[pb], layout, config.n_max, &mut rng)?,
            };
            for child in [&mut ca, &mut cb] {
                match mode {
                    GaMode::Fixed { .. } => mutate_fixed(child, config.mutation, &mut rng),
                    GaMode::Variable => {
                        mutate_variable(child, config.mutation, config.p_bar, layout, config.n_max, &mut rng)?
                    }
                }
            }
            offspring.push(ca);
            offspring.push(cb);
        }
        next_scores.extend(evaluate_all(fitness, &offspring));
        next.extend(offspring);
        genomes = next;
        scores = next_scores;

        let r = record(generation, &genomes, &scores, layout);
        debug!(
            "generation {generation}: best {:.6e}, mean {:.6e}, n = {}",
            r.best_fitness, r.mean_fitness, r.best_collisions
        );
        sink(&r)?;
        records.push(r);
    }

    let last = records.last().expect("nonempty");
    Ok(GaRun {
        config: config.clone(),
        mode,
        best_genome: last.best_genome.clone(),
        best_fitness: last.best_fitness,
        threshold_reached: reached(last),
        records,
    })
}
