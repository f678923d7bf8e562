//! Experiment drivers: edge-removal robustness sweeps and per-iteration timing
//! on growing graphs.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::evaluation::{match_score, SimilarityKind};
use crate::model::{AttributedGraph, CommunityCover, FitConfig};
use crate::solver::{fit, threshold_memberships, FitResult, Solver};
use crate::synthetic::{
    bernoulli_attributes, forest_fire, planted_instance, remove_edges, ForestFireParams,
    PlantedInstance, PlantedSpec,
};

/// Seed for the edge-removal draw, decorrelated from the instance seed.
fn removal_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03
}

/// One fit of a (possibly edge-thinned) planted instance.
#[derive(Debug, Clone)]
pub struct Trial {
    pub graph: AttributedGraph,
    pub fit: FitResult<f64>,
    pub cover: CommunityCover,
    /// F1 match score against the planted truth; 0 when nothing is detected.
    pub score: f64,
}

/// Removes `gamma` of the edges of `inst`, fits its true community count at
/// `config.alpha` and scores the thresholded cover.
pub fn run_trial(
    inst: &PlantedInstance<f64>,
    gamma: f64,
    seed: u64,
    config: &FitConfig,
) -> Result<Trial> {
    let graph = remove_edges(&inst.graph, gamma, removal_seed(seed))?;
    let fit = fit::<f64>(&graph, inst.true_f.num_communities(), config)?;
    let cover = threshold_memberships(&fit.f, config.delta)?;
    let score = if cover.is_empty() {
        0.0
    } else {
        match_score(&inst.truth, &cover, SimilarityKind::F1)?
    };
    Ok(Trial {
        graph,
        fit,
        cover,
        score,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessCell {
    pub gamma: f64,
    pub alpha: f64,
    /// One score per seed, in seed order.
    pub scores: Vec<f64>,
}

impl RobustnessCell {
    pub fn mean(&self) -> f64 {
        self.scores.iter().sum::<f64>() / self.scores.len() as f64
    }

    /// Sample standard deviation (0 for a single seed).
    pub fn std_dev(&self) -> f64 {
        let n = self.scores.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        (self.scores.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (n - 1) as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessTable {
    /// Gamma-major, alpha-minor.
    pub cells: Vec<RobustnessCell>,
}

impl RobustnessTable {
    pub fn cell(&self, gamma: f64, alpha: f64) -> Option<&RobustnessCell> {
        self.cells
            .iter()
            .find(|c| c.gamma == gamma && c.alpha == alpha)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("gamma\talpha\tmean_f1\tstd_f1\tseeds\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{}\t{}\t{:.6}\t{:.6}\t{}\n",
                c.gamma,
                c.alpha,
                c.mean(),
                c.std_dev(),
                c.scores.len()
            ));
        }
        out
    }
}

/// Sweep over `gammas x alphas`; each seed generates one planted instance
/// (`planted.seed` is replaced by the seed) shared by all its cells.
///
/// Seeds are spread over `workers` threads; every fit itself runs with
/// `config.num_workers`, so the table does not depend on `workers`.
pub fn robustness(
    planted: &PlantedSpec,
    gammas: &[f64],
    alphas: &[f64],
    seeds: &[u64],
    config: &FitConfig,
    workers: usize,
) -> Result<RobustnessTable> {
    if gammas.is_empty() || alphas.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidArgument(
            "gamma, alpha and seed lists must be nonempty".into(),
        ));
    }
    let per_seed = |seed: u64| -> Result<Vec<f64>> {
        let inst = planted_instance::<f64>(&PlantedSpec {
            seed,
            ..planted.clone()
        })?;
        let mut scores = Vec::with_capacity(gammas.len() * alphas.len());
        for &gamma in gammas {
            for &alpha in alphas {
                let cfg = FitConfig {
                    alpha,
                    ..config.clone()
                };
                scores.push(run_trial(&inst, gamma, seed, &cfg)?.score);
            }
        }
        Ok(scores)
    };
    let workers = workers.clamp(1, seeds.len());
    let mut results: Vec<Option<Result<Vec<f64>>>> = vec![None; seeds.len()];
    std::thread::scope(|s| {
        let chunk = seeds.len().div_ceil(workers);
        for (seed_chunk, out_chunk) in seeds.chunks(chunk).zip(results.chunks_mut(chunk)) {
            let per_seed = &per_seed;
            s.spawn(move || {
                for (&seed, out) in seed_chunk.iter().zip(out_chunk) {
                    *out = Some(per_seed(seed));
                }
            });
        }
    });
    let per_seed_scores = results
        .into_iter()
        .map(|r| r.expect("every seed is processed"))
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    for (gi, &gamma) in gammas.iter().enumerate() {
        for (ai, &alpha) in alphas.iter().enumerate() {
            let idx = gi * alphas.len() + ai;
            let scores = per_seed_scores.iter().map(|s| s[idx]).collect();
            cells.push(RobustnessCell {
                gamma,
                alpha,
                scores,
            });
        }
    }
    Ok(RobustnessTable { cells })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub nodes: usize,
    pub edges: usize,
    pub attr_ones: usize,
    /// `|E| + N K`.
    pub work: usize,
    /// Median wall time of one outer iteration.
    pub secs_per_iter: f64,
}

/// Times `iters` outer iterations on a Forest Fire graph with `k` Bernoulli(0.5)
/// attributes for each size.
pub fn scaling(
    sizes: &[usize],
    k: usize,
    num_communities: usize,
    iters: usize,
    config: &FitConfig,
    seed: u64,
) -> Result<Vec<ScalingPoint>> {
    if iters == 0 {
        return Err(Error::InvalidArgument(
            "need at least one timed iteration".into(),
        ));
    }
    let mut points = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let g = forest_fire(&ForestFireParams::new(n, seed))?;
        let g = bernoulli_attributes(&g, k, 0.5, seed.wrapping_add(1))?;
        let mut solver = Solver::<f64>::new(&g, num_communities, config, None)?;
        let mut times: Vec<f64> = (0..iters)
            .map(|_| {
                let t = Instant::now();
                solver.outer_iteration();
                t.elapsed().as_secs_f64()
            })
            .collect();
        times.sort_by(f64::total_cmp);
        let point = ScalingPoint {
            nodes: n,
            edges: g.num_edges(),
            attr_ones: g.num_attr_ones(),
            work: g.num_edges() + n * k,
            secs_per_iter: times[times.len() / 2],
        };
        log::info!("scaling: {point:?}");
        points.push(point);
    }
    Ok(points)
}
