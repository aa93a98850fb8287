//! Seedable genetic algorithm for maximizing (concentrated) log marginal
//! likelihoods over hyperparameter boxes.
//!
//! Objective failures (factorization breakdowns, non-finite values) score
//! `-inf` so the search can traverse near-singular regions without aborting.
//! For a fixed seed the result is bitwise deterministic: random draws happen
//! in a fixed order on the driving thread and candidate evaluations, which
//! may run in parallel, are reduced by candidate index.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// How a raw search coordinate maps to the value the objective sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamScale {
    /// Coordinate is `log10(value)`; decoded as `10^coordinate`.
    Log10,
    /// Coordinate is the value itself.
    Linear,
}

/// Bounds and scale for one search dimension.
#[derive(Debug, Clone)]
pub struct ParamSpec {
    pub lo: f64,
    pub hi: f64,
    pub scale: ParamScale,
}

impl ParamSpec {
    pub fn log10(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            scale: ParamScale::Log10,
        }
    }

    pub fn linear(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            scale: ParamScale::Linear,
        }
    }
}

/// A hyperparameter box: per-parameter bounds plus scale tags.
#[derive(Debug, Clone)]
pub struct SearchBox {
    params: Vec<ParamSpec>,
}

impl SearchBox {
    pub fn new(params: Vec<ParamSpec>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidSearchBox("no parameters".into()));
        }
        for (i, p) in params.iter().enumerate() {
            if !p.lo.is_finite() || !p.hi.is_finite() || p.lo >= p.hi {
                return Err(Error::InvalidSearchBox(format!(
                    "parameter {i}: bounds [{}, {}] invalid",
                    p.lo, p.hi
                )));
            }
        }
        Ok(Self { params })
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    /// Maps raw search coordinates to the natural scale the objective sees.
    pub fn decode(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(&self.params)
            .map(|(&v, p)| match p.scale {
                ParamScale::Log10 => 10f64.powf(v),
                ParamScale::Linear => v,
            })
            .collect()
    }

    fn clamp(&self, raw: &mut [f64]) {
        for (v, p) in raw.iter_mut().zip(&self.params) {
            *v = v.clamp(p.lo, p.hi);
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.params
            .iter()
            .map(|p| rng.gen_range(p.lo..=p.hi))
            .collect()
    }
}

/// Genetic-algorithm settings.
#[derive(Debug, Clone)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elitism_count: usize,
    pub seed: u64,
    /// Refine the GA winner with a derivative-free coordinate descent.
    pub local_polish: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 100,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            elitism_count: 2,
            seed: 0,
            local_polish: true,
        }
    }
}

impl GaConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidGaConfig("population_size must be >= 2".into()));
        }
        if self.generations == 0 {
            return Err(Error::InvalidGaConfig("generations must be >= 1".into()));
        }
        if self.elitism_count >= self.population_size {
            return Err(Error::InvalidGaConfig(
                "elitism_count must be < population_size".into(),
            ));
        }
        for (name, r) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidGaConfig(format!("{name} must be in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Outcome of a [`maximize`] run.
#[derive(Debug, Clone)]
pub struct GaResult {
    /// Best parameters found, on the natural (decoded) scale.
    pub best_params: Vec<f64>,
    pub best_value: f64,
    /// Best-so-far objective value per generation (entry 0 is the initial
    /// population).
    pub trace: Vec<f64>,
}

const TOURNAMENT_SIZE: usize = 3;
const BLX_ALPHA: f64 = 0.5;
const MUTATION_SIGMA_FRAC: f64 = 0.1;
const POLISH_SWEEPS: usize = 20;
const POLISH_STEP_FRAC: f64 = 0.1;

/// Maximizes `objective` over `space`. The objective receives decoded
/// parameters and returns `None` (or a non-finite value) on failure, which
/// scores `-inf`.
pub fn maximize<F>(objective: F, space: &SearchBox, cfg: &GaConfig) -> Result<GaResult>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dim = space.dim();

    let evaluate = |population: &[Vec<f64>]| -> Vec<f64> {
        population
            .par_iter()
            .map(|raw| {
                let decoded = space.decode(raw);
                match objective(&decoded) {
                    Some(v) if v.is_finite() => v,
                    _ => f64::NEG_INFINITY,
                }
            })
            .collect()
    };

    let mut population: Vec<Vec<f64>> = (0..cfg.population_size)
        .map(|_| space.sample(&mut rng))
        .collect();
    let mut fitness = evaluate(&population);

    if fitness.iter().all(|f| *f == f64::NEG_INFINITY) {
        return Err(Error::AllCandidatesFailed);
    }

    let best_index = |fit: &[f64]| -> usize {
        let mut best = 0;
        for i in 1..fit.len() {
            if fit[i] > fit[best] {
                best = i;
            }
        }
        best
    };

    let mut best_raw = population[best_index(&fitness)].clone();
    let mut best_value = fitness[best_index(&fitness)];
    let mut trace = vec![best_value];

    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    for _ in 0..cfg.generations {
        // indices sorted by fitness, descending; ties broken by index so the
        // ordering is deterministic
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| {
            fitness[b]
                .partial_cmp(&fitness[a])
                .expect("no NaN fitness")
                .then(a.cmp(&b))
        });

        let mut next: Vec<Vec<f64>> = order
            .iter()
            .take(cfg.elitism_count)
            .map(|&i| population[i].clone())
            .collect();

        let tournament = |rng: &mut ChaCha8Rng| -> usize {
            let mut winner = rng.gen_range(0..population.len());
            for _ in 1..TOURNAMENT_SIZE {
                let challenger = rng.gen_range(0..population.len());
                if fitness[challenger] > fitness[winner]
                    || (fitness[challenger] == fitness[winner] && challenger < winner)
                {
                    winner = challenger;
                }
            }
            winner
        };

        while next.len() < cfg.population_size {
            let p1 = population[tournament(&mut rng)].clone();
            let p2 = population[tournament(&mut rng)].clone();
            let (mut c1, mut c2) = if rng.gen::<f64>() < cfg.crossover_rate {
                blx_crossover(&p1, &p2, &mut rng)
            } else {
                (p1, p2)
            };
            for child in [&mut c1, &mut c2] {
                for (i, gene) in child.iter_mut().enumerate() {
                    if rng.gen::<f64>() < cfg.mutation_rate {
                        let width = space.params[i].hi - space.params[i].lo;
                        *gene += MUTATION_SIGMA_FRAC * width * normal.sample(&mut rng);
                    }
                }
                space.clamp(child);
            }
            next.push(c1);
            if next.len() < cfg.population_size {
                next.push(c2);
            }
        }

        population = next;
        fitness = evaluate(&population);
        let gen_best = best_index(&fitness);
        if fitness[gen_best] > best_value {
            best_value = fitness[gen_best];
            best_raw = population[gen_best].clone();
        }
        trace.push(best_value);
    }

    if cfg.local_polish && best_value > f64::NEG_INFINITY {
        let eval_one = |raw: &[f64]| -> f64 {
            match objective(&space.decode(raw)) {
                Some(v) if v.is_finite() => v,
                _ => f64::NEG_INFINITY,
            }
        };
        let mut steps: Vec<f64> = space
            .params
            .iter()
            .map(|p| POLISH_STEP_FRAC * (p.hi - p.lo))
            .collect();
        for _ in 0..POLISH_SWEEPS {
            for i in 0..dim {
                for dir in [1.0, -1.0] {
                    let mut cand = best_raw.clone();
                    cand[i] += dir * steps[i];
                    space.clamp(&mut cand);
                    let v = eval_one(&cand);
                    if v > best_value {
                        best_value = v;
                        best_raw = cand;
                    }
                }
            }
            for s in &mut steps {
                *s *= 0.5;
            }
        }
    }

    Ok(GaResult {
        best_params: space.decode(&best_raw),
        best_value,
        trace,
    })
}

fn blx_crossover(p1: &[f64], p2: &[f64], rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let gene = |rng: &mut ChaCha8Rng, a: f64, b: f64| -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let span = hi - lo;
        rng.gen_range((lo - BLX_ALPHA * span)..=(hi + BLX_ALPHA * span))
    };
    let c1: Vec<f64> = p1
        .iter()
        .zip(p2)
        .map(|(&a, &b)| gene(rng, a, b))
        .collect();
    let c2: Vec<f64> = p1
        .iter()
        .zip(p2)
        .map(|(&a, &b)| gene(rng, a, b))
        .collect();
    (c1, c2)
}

/// Derives an independent 64-bit seed from a base seed and a stream index
/// (splitmix64 over the combined word). Used to give each benchmark run and
/// each training stage its own deterministic RNG stream.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
