//! Sub-frame search: greedy bounds, genetic search with local refinement,
//! verification with relocation, and the tiling fallback.

pub mod blank;
pub mod greedy;
pub(crate) mod search;
pub mod verify;

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{CompositionPlan, FrameSize, Patch, SubFrame, EPS};
use crate::objective::ObjectiveConfig;
use crate::scaling::ScalingProfile;

pub use blank::{largest_blank_rects, maximal_empty_rects};
pub use greedy::{div_tile_count, div_tiles, greedy_bounds, tiling_fallback, Bounds};
pub use search::population_size;
pub use verify::{verify_and_relocate, VerificationFailure};

use search::{evolve_step, init_population, local_search, rank, Genome, Operators, SearchSpace};

const LOCAL_SEARCH_SWEEPS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub alpha3: f64,
    pub grid_stride: u32,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elite_count: usize,
    pub patience: usize,
    pub local_search_radius: f64,
    pub local_search_top_fraction: f64,
    pub n_r: usize,
    pub max_verification_retries: usize,
    pub max_generations: usize,
    /// Distinct candidates per sub-frame count remembered for verification.
    pub archive_per_count: usize,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            alpha3: 1.0,
            grid_stride: 16,
            tournament_size: 2,
            crossover_rate: 0.8,
            mutation_rate: 0.2,
            elite_count: 1,
            patience: 4,
            local_search_radius: 8.0,
            local_search_top_fraction: 0.1,
            n_r: 16,
            max_verification_retries: 5,
            max_generations: 200,
            archive_per_count: 4,
            rng_seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} = {v} is not a probability")))
            }
        };
        prob("crossover_rate", self.crossover_rate)?;
        prob("mutation_rate", self.mutation_rate)?;
        prob("local_search_top_fraction", self.local_search_top_fraction)?;
        if !(self.alpha3 > 0.0) {
            return Err(Error::InvalidInput(format!("alpha3 = {} must be positive", self.alpha3)));
        }
        if self.patience == 0
            || self.elite_count == 0
            || self.grid_stride == 0
            || self.tournament_size == 0
            || self.max_generations == 0
        {
            return Err(Error::InvalidInput(
                "patience, elite_count, grid_stride, tournament_size and max_generations must be at least 1".into(),
            ));
        }
        if !(self.local_search_radius > 0.0) {
            return Err(Error::InvalidInput("local_search_radius must be positive".into()));
        }
        Ok(())
    }
}

/// Public view of a candidate sub-frame set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub sub_frames: Vec<SubFrame>,
    pub score: f64,
}

/// Record of one search run between bound increments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attempt {
    pub bounds: Bounds,
    pub population: usize,
    /// Best score after each generation (index 0 is the initial population).
    pub best_scores: Vec<f64>,
    pub best: Candidate,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionStats {
    pub attempts: Vec<Attempt>,
    pub used_fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    pub plan: CompositionPlan,
    pub stats: CompositionStats,
}

/// Reject patches no sub-frame could ever hold.
pub fn check_capacity(patches: &[Patch], detector_size: f64, frame_size: FrameSize) -> Result<()> {
    let bounds = frame_size.rect();
    let mut ids = HashSet::new();
    for p in patches {
        if !ids.insert(p.id) {
            return Err(Error::InvalidInput(format!("duplicate patch id {}", p.id)));
        }
        if !(p.beta > 0.0) || !p.rect.is_valid() || !bounds.contains(&p.rect) {
            return Err(Error::InvalidInput(format!(
                "patch {} ({:?}, beta {}) is empty, outside the frame or unscaled",
                p.id, p.rect, p.beta
            )));
        }
        let (w, h) = p.footprint();
        if w > detector_size + EPS || h > detector_size + EPS {
            return Err(Error::PatchExceedsCapacity {
                patch_id: p.id,
                w,
                h,
                detector_size,
            });
        }
    }
    Ok(())
}

pub fn compose(
    patches: &[Patch],
    profile: &ScalingProfile,
    objective: &ObjectiveConfig,
    ga: &GaConfig,
    detector_size: f64,
    frame_size: FrameSize,
) -> Result<CompositionPlan> {
    compose_detailed(patches, profile, objective, ga, detector_size, frame_size).map(|c| c.plan)
}

/// Full search with per-attempt statistics.
///
/// Each attempt runs the genetic search inside its bounds and then tries
/// the remembered candidates in ascending sub-frame count (best score first
/// within a count); the first one that verifies is the plan. When none
/// does, the bounds move up by one and the search restarts. After the retry
/// budget, or once the search would need more sub-frames than the tiling,
/// the tiling fallback is used.
pub fn compose_detailed(
    patches: &[Patch],
    profile: &ScalingProfile,
    objective: &ObjectiveConfig,
    ga: &GaConfig,
    detector_size: f64,
    frame_size: FrameSize,
) -> Result<Composition> {
    ga.validate()?;
    check_capacity(patches, detector_size, frame_size)?;
    let mut stats = CompositionStats {
        attempts: Vec::new(),
        used_fallback: false,
    };
    if patches.is_empty() {
        return Ok(Composition {
            plan: CompositionPlan::empty(frame_size, detector_size),
            stats,
        });
    }

    let (base, seeds) = greedy_bounds(patches, profile, detector_size, frame_size)?;
    let space = SearchSpace::new(
        patches,
        profile,
        *objective,
        detector_size,
        frame_size,
        ga.grid_stride,
    );
    let seed_genes = snap_seeds(&space, &seeds, patches);
    let tiles = div_tile_count(frame_size, detector_size);
    let mut rng = ChaCha8Rng::seed_from_u64(ga.rng_seed);

    for retry in 0..=ga.max_verification_retries {
        let bounds = base.shifted(retry);
        if bounds.l_min > tiles {
            break;
        }
        let (attempt, archive) = run_search(&space, bounds, &seed_genes, ga, &mut rng);
        let verified = verify_archive(&space, &archive, detector_size, ga.n_r);
        stats.attempts.push(Attempt {
            verified: verified.is_some(),
            ..attempt
        });
        if let Some(plan) = verified {
            let plan = drop_idle(plan);
            if plan.sub_frames.len() > tiles {
                let fb = drop_idle(tiling_fallback(patches, profile, detector_size, frame_size, ga.n_r));
                if fb.sub_frames.len() < plan.sub_frames.len() {
                    stats.used_fallback = true;
                    return Ok(Composition { plan: fb, stats });
                }
            }
            return Ok(Composition { plan, stats });
        }
        log::debug!("verification failed for bounds {bounds:?}; raising bounds");
    }

    stats.used_fallback = true;
    let plan = drop_idle(tiling_fallback(patches, profile, detector_size, frame_size, ga.n_r));
    Ok(Composition { plan, stats })
}

/// Remove sub-frames that host no placement. Obstacles and blank space
/// are per sub-frame, so the remaining placements stay valid.
pub fn drop_idle(mut plan: CompositionPlan) -> CompositionPlan {
    let mut remap = vec![usize::MAX; plan.sub_frames.len()];
    let mut kept = Vec::with_capacity(plan.sub_frames.len());
    for (j, f) in plan.sub_frames.iter().enumerate() {
        if plan.placements.iter().any(|p| p.host == j) {
            remap[j] = kept.len();
            kept.push(*f);
        }
    }
    plan.sub_frames = kept;
    for p in &mut plan.placements {
        p.host = remap[p.host];
    }
    plan
}

/// Greedy sub-frames moved onto the grid, each kept on a position that
/// still contains the largest patch it was centered on.
fn snap_seeds(space: &SearchSpace, seeds: &[SubFrame], patches: &[Patch]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..patches.len()).collect();
    order.sort_by(|&a, &b| Patch::size_order(&patches[a], &patches[b]));
    seeds
        .iter()
        .map(|f| {
            let anchor = order
                .iter()
                .copied()
                .find(|&i| patches[i].rect.center() == (f.cx, f.cy));
            match anchor {
                Some(i) => space.snap_covering(f.cx, f.cy, i),
                None => space.nearest(f.cx, f.cy),
            }
        })
        .collect()
}

/// Best distinct genomes seen, grouped by sub-frame count.
struct Archive {
    per_count: usize,
    /// Indexed by `count - l_min`; each list sorted by descending score.
    slots: Vec<Vec<Genome>>,
    l_min: usize,
    /// Best-scoring genome per count that contains every patch in situ.
    covering: Vec<Option<Genome>>,
}

impl Archive {
    fn new(bounds: Bounds, per_count: usize) -> Self {
        let n = bounds.l_max - bounds.l_min + 1;
        Self {
            per_count: per_count.max(1),
            slots: vec![Vec::new(); n],
            l_min: bounds.l_min,
            covering: vec![None; n],
        }
    }

    fn offer(&mut self, space: &SearchSpace, g: &Genome) {
        let Some(k) = g.len().checked_sub(self.l_min).filter(|&k| k < self.slots.len()) else {
            return;
        };
        if space.covers_all(&g.genes) && self.covering[k].as_ref().is_none_or(|c| g.score > c.score) {
            self.covering[k] = Some(g.clone());
        }
        let slot = &mut self.slots[k];
        if slot.len() == self.per_count && slot.last().is_some_and(|w| w.score >= g.score) {
            return;
        }
        let key = g.key();
        if slot.iter().any(|s| s.key() == key) {
            return;
        }
        let at = slot.partition_point(|s| s.score >= g.score);
        slot.insert(at, g.clone());
        slot.truncate(self.per_count);
    }

    /// Verification order: ascending count, best first within a count, the
    /// best full-coverage genome last.
    fn candidates(&self) -> impl Iterator<Item = &Genome> {
        self.slots
            .iter()
            .zip(&self.covering)
            .flat_map(|(s, c)| s.iter().chain(c.iter()))
    }
}

fn run_search(
    space: &SearchSpace,
    bounds: Bounds,
    seed: &[u32],
    ga: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> (Attempt, Archive) {
    let size = population_size(ga.alpha3, bounds);
    let ops = Operators::new(ga, bounds);
    let ls_steps = (ga.local_search_radius / ga.grid_stride as f64).ceil().max(1.0) as i64;
    let top = ((ga.local_search_top_fraction * size as f64).ceil() as usize).clamp(1, size);
    let mut archive = Archive::new(bounds, ga.archive_per_count);

    let mut pop = init_population(space, bounds, seed, size, rng);
    pop.iter().for_each(|g| archive.offer(space, g));
    rank(&mut pop);
    let mut best_scores = vec![pop[0].score];
    let mut stall = 0;
    while best_scores.len() <= ga.max_generations && stall < ga.patience {
        pop = evolve_step(space, &pop, &ops, rng);
        rank(&mut pop);
        for g in pop.iter_mut().take(top) {
            local_search(space, g, ls_steps, LOCAL_SEARCH_SWEEPS);
        }
        rank(&mut pop);
        pop.iter().for_each(|g| archive.offer(space, g));
        let best = pop[0].score;
        if best == *best_scores.last().unwrap() {
            stall += 1;
        } else {
            stall = 0;
        }
        best_scores.push(best);
    }

    let attempt = Attempt {
        bounds,
        population: size,
        best_scores,
        best: Candidate {
            sub_frames: space.sub_frames(&pop[0].genes),
            score: pop[0].score,
        },
        verified: false,
    };
    (attempt, archive)
}

fn verify_archive(
    space: &SearchSpace,
    archive: &Archive,
    detector_size: f64,
    n_r: usize,
) -> Option<CompositionPlan> {
    archive.candidates().find_map(|g| {
        verify_and_relocate(
            &space.sub_frames(&g.genes),
            space.patches,
            space.frame_size,
            detector_size,
            n_r,
        )
        .ok()
    })
}
