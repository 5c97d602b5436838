//! Genetic search over sub-frame sets whose centers sit on a coarse grid.
//!
//! Every grid position is scored once up front (its clamped window, its
//! β, which patches it contains and its distribution term), so evaluating
//! a candidate only touches the positions it uses.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{contains, FrameSize, Patch, SubFrame};
use crate::objective::{h_count, phi_contribution, psi_from_areas, ObjectiveConfig};
use crate::scaling::ScalingProfile;

use super::greedy::Bounds;
use super::GaConfig;

/// One precomputed grid position.
#[derive(Debug, Clone)]
pub(crate) struct Cell {
    pub sub_frame: SubFrame,
    pub scaled_area: f64,
    /// Bitset over patch indices.
    pub covers: Vec<u64>,
    pub phi: f64,
}

impl Cell {
    fn covers_any(&self) -> bool {
        self.covers.iter().any(|&w| w != 0)
    }

    fn covers(&self, i: usize) -> bool {
        self.covers[i / 64] >> (i % 64) & 1 == 1
    }
}

/// Candidate sub-frame set: indices into [`SearchSpace::cells`] plus its score.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Genome {
    pub genes: Vec<u32>,
    pub score: f64,
    /// Set once local search has found no improving move.
    pub polished: bool,
}

impl Genome {
    pub fn len(&self) -> usize {
        self.genes.len()
    }

    /// Gene list in canonical order, for duplicate detection.
    pub fn key(&self) -> Vec<u32> {
        let mut k = self.genes.clone();
        k.sort_unstable();
        k
    }
}

pub(crate) struct SearchSpace<'a> {
    pub patches: &'a [Patch],
    pub frame_size: FrameSize,
    pub nx: u32,
    pub ny: u32,
    pub stride: f64,
    pub cells: Vec<Cell>,
    pub objective: ObjectiveConfig,
    total_area: f64,
    patch_areas: Vec<f64>,
    words: usize,
}

impl<'a> SearchSpace<'a> {
    pub fn new(
        patches: &'a [Patch],
        profile: &ScalingProfile,
        objective: ObjectiveConfig,
        detector_size: f64,
        frame_size: FrameSize,
        grid_stride: u32,
    ) -> Self {
        let stride = grid_stride.max(1);
        let nx = frame_size.width / stride + 1;
        let ny = frame_size.height / stride + 1;
        let words = patches.len().div_ceil(64).max(1);
        let mut cells = Vec::with_capacity((nx * ny) as usize);
        for iy in 0..ny {
            let cy = (iy * stride) as f64;
            let beta = profile.beta_for(cy);
            for ix in 0..nx {
                let f = SubFrame::new((ix * stride) as f64, cy, beta, detector_size);
                let rect = f.rect(frame_size);
                let (fx, fy) = rect.center();
                let mut covers = vec![0u64; words];
                let (mut sum, mut n) = (0.0, 0usize);
                for (i, p) in patches.iter().enumerate() {
                    if contains(&rect, &p.rect) {
                        covers[i / 64] |= 1 << (i % 64);
                        sum += phi_contribution(&p.rect, fx, fy);
                        n += 1;
                    }
                }
                cells.push(Cell {
                    sub_frame: f,
                    scaled_area: rect.area() * beta,
                    covers,
                    phi: if n == 0 { 0.0 } else { sum / n as f64 },
                });
            }
        }
        let patch_areas: Vec<f64> = patches.iter().map(Patch::scaled_area).collect();
        Self {
            patches,
            frame_size,
            nx,
            ny,
            stride: stride as f64,
            cells,
            objective,
            total_area: patch_areas.iter().sum(),
            patch_areas,
            words,
        }
    }

    fn index(&self, ix: u32, iy: u32) -> u32 {
        iy * self.nx + ix
    }

    fn pos(&self, g: u32) -> (u32, u32) {
        (g % self.nx, g / self.nx)
    }

    /// Grid position nearest to `(x, y)`.
    pub fn nearest(&self, x: f64, y: f64) -> u32 {
        let ix = (x / self.stride).round().clamp(0.0, (self.nx - 1) as f64) as u32;
        let iy = (y / self.stride).round().clamp(0.0, (self.ny - 1) as f64) as u32;
        self.index(ix, iy)
    }

    /// Grid position for a sub-frame wanted at `(x, y)` that should contain
    /// patch `i`: the nearest one that does within two steps, else the nearest.
    pub fn snap_covering(&self, x: f64, y: f64, i: usize) -> u32 {
        let base = self.nearest(x, y);
        let (bx, by) = self.pos(base);
        let mut best: Option<(f64, u32)> = None;
        for dy in -2i64..=2 {
            for dx in -2i64..=2 {
                let Some(g) = self.offset(bx, by, dx, dy) else {
                    continue;
                };
                if !self.cells[g as usize].covers(i) {
                    continue;
                }
                let (gx, gy) = self.pos(g);
                let d = (gx as f64 * self.stride - x).powi(2) + (gy as f64 * self.stride - y).powi(2);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, g));
                }
            }
        }
        best.map_or(base, |(_, g)| g)
    }

    fn offset(&self, ix: u32, iy: u32, dx: i64, dy: i64) -> Option<u32> {
        let x = ix as i64 + dx;
        let y = iy as i64 + dy;
        if x < 0 || y < 0 || x >= self.nx as i64 || y >= self.ny as i64 {
            None
        } else {
            Some(self.index(x as u32, y as u32))
        }
    }

    /// Same value as [`crate::objective::score`] on the candidate's sub-frames.
    pub fn score(&self, genes: &[u32]) -> f64 {
        let cfg = &self.objective;
        if genes.is_empty() {
            return -cfg.delta;
        }
        let mut union = vec![0u64; self.words];
        let (mut dist, mut frames_area) = (0.0, 0.0);
        for &g in genes {
            let c = &self.cells[g as usize];
            for (u, w) in union.iter_mut().zip(&c.covers) {
                *u |= w;
            }
            dist += c.phi;
            frames_area += c.scaled_area;
        }
        let mut covered = 0.0;
        for (i, a) in self.patch_areas.iter().enumerate() {
            if union[i / 64] >> (i % 64) & 1 == 1 {
                covered += a;
            }
        }
        let loc = psi_from_areas(self.total_area, covered, cfg.psi_epsilon);
        let penalty = if frames_area < self.total_area { 1.0 } else { 0.0 };
        (cfg.alpha * loc + dist) / h_count(cfg, genes.len()) - cfg.delta * penalty
    }

    /// Every patch lies inside at least one of the candidate's windows.
    pub fn covers_all(&self, genes: &[u32]) -> bool {
        let mut union = vec![0u64; self.words];
        for &g in genes {
            for (u, w) in union.iter_mut().zip(&self.cells[g as usize].covers) {
                *u |= w;
            }
        }
        (0..self.patches.len()).all(|i| union[i / 64] >> (i % 64) & 1 == 1)
    }

    pub fn genome(&self, genes: Vec<u32>) -> Genome {
        let score = self.score(&genes);
        Genome {
            genes,
            score,
            polished: false,
        }
    }

    pub fn sub_frames(&self, genes: &[u32]) -> Vec<SubFrame> {
        genes.iter().map(|&g| self.cells[g as usize].sub_frame).collect()
    }

    fn random_cell(&self, rng: &mut ChaCha8Rng) -> u32 {
        rng.gen_range(0..self.cells.len() as u32)
    }

    /// A position near a randomly chosen patch that contains at least one patch.
    fn random_useful_cell(&self, rng: &mut ChaCha8Rng, steps: i64) -> Option<u32> {
        let i = rng.gen_range(0..self.patches.len());
        let (x, y) = self.patches[i].rect.center();
        let (bx, by) = self.pos(self.nearest(x, y));
        let g = self.offset(
            bx,
            by,
            rng.gen_range(-steps..=steps),
            rng.gen_range(-steps..=steps),
        )?;
        self.cells[g as usize].covers_any().then_some(g)
    }
}

/// Population size `ceil(alpha3·(l_max² − (l_min − 1)²))`.
pub fn population_size(alpha3: f64, bounds: Bounds) -> usize {
    let hi = (bounds.l_max * bounds.l_max) as f64;
    let lo = ((bounds.l_min - 1) * (bounds.l_min - 1)) as f64;
    ((alpha3 * (hi - lo)).ceil() as usize).max(1)
}

/// Random candidates with counts uniform in the bounds, plus the greedy
/// seed (truncated to `l_max`) as the first member.
pub(crate) fn init_population(
    space: &SearchSpace,
    bounds: Bounds,
    seed: &[u32],
    size: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Genome> {
    let mut pop = Vec::with_capacity(size);
    if !seed.is_empty() {
        let mut genes: Vec<u32> = seed.iter().copied().take(bounds.l_max).collect();
        while genes.len() < bounds.l_min {
            genes.push(space.random_cell(rng));
        }
        pop.push(space.genome(genes));
    }
    while pop.len() < size {
        let n = rng.gen_range(bounds.l_min..=bounds.l_max);
        let genes = (0..n).map(|_| space.random_cell(rng)).collect();
        pop.push(space.genome(genes));
    }
    pop
}

/// Descending score; ties keep their current order.
pub(crate) fn rank(pop: &mut [Genome]) {
    pop.sort_by(|a, b| b.score.total_cmp(&a.score));
}

pub(crate) struct Operators {
    pub bounds: Bounds,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elite_count: usize,
    pub mutation_steps: i64,
}

impl Operators {
    pub fn new(cfg: &GaConfig, bounds: Bounds) -> Self {
        let mutation_steps =
            ((4.0 * cfg.local_search_radius) / cfg.grid_stride.max(1) as f64).ceil().max(1.0) as i64;
        Self {
            bounds,
            tournament_size: cfg.tournament_size.max(1),
            crossover_rate: cfg.crossover_rate,
            mutation_rate: cfg.mutation_rate,
            elite_count: cfg.elite_count.max(1),
            mutation_steps,
        }
    }
}

fn tournament<'p>(pop: &'p [Genome], k: usize, rng: &mut ChaCha8Rng) -> &'p Genome {
    let mut best = &pop[rng.gen_range(0..pop.len())];
    for _ in 1..k {
        let c = &pop[rng.gen_range(0..pop.len())];
        if c.score > best.score {
            best = c;
        }
    }
    best
}

/// One generation. `pop` must be ranked. The elites, and the best member
/// of every sub-frame count present, pass through unchanged; the rest is
/// bred by tournament selection, one-point crossover and mutation.
pub(crate) fn evolve_step(
    space: &SearchSpace,
    pop: &[Genome],
    ops: &Operators,
    rng: &mut ChaCha8Rng,
) -> Vec<Genome> {
    let size = pop.len();
    let mut next: Vec<Genome> = pop.iter().take(ops.elite_count.min(size)).cloned().collect();
    let mut seen_counts: Vec<usize> = next.iter().map(Genome::len).collect();
    for g in pop {
        if next.len() >= size {
            break;
        }
        if !seen_counts.contains(&g.len()) {
            seen_counts.push(g.len());
            next.push(g.clone());
        }
    }

    while next.len() < size {
        let a = tournament(pop, ops.tournament_size, rng);
        let b = tournament(pop, ops.tournament_size, rng);
        let mut genes = if rng.gen_bool(ops.crossover_rate) {
            let i = rng.gen_range(0..=a.len());
            let j = rng.gen_range(0..=b.len());
            let mut child: Vec<u32> = a.genes[..i].iter().chain(&b.genes[j..]).copied().collect();
            child.truncate(ops.bounds.l_max);
            let mut donors = a.genes[i..].iter().chain(&b.genes[..j]);
            while child.len() < ops.bounds.l_min {
                match donors.next() {
                    Some(&g) => child.push(g),
                    None => child.push(space.random_cell(rng)),
                }
            }
            child
        } else {
            a.genes.clone()
        };
        mutate(space, &mut genes, ops, rng);
        next.push(space.genome(genes));
    }
    next
}

fn mutate(space: &SearchSpace, genes: &mut Vec<u32>, ops: &Operators, rng: &mut ChaCha8Rng) {
    let s = ops.mutation_steps;
    for g in genes.iter_mut() {
        if !rng.gen_bool(ops.mutation_rate) {
            continue;
        }
        let (x, y) = space.pos(*g);
        let proposal = space.offset(x, y, rng.gen_range(-s..=s), rng.gen_range(-s..=s));
        if let Some(p) = proposal.filter(|&p| space.cells[p as usize].covers_any()) {
            *g = p;
        }
    }
    if rng.gen_bool(ops.mutation_rate) {
        if rng.gen_bool(0.5) {
            if genes.len() < ops.bounds.l_max {
                if let Some(p) = space.random_useful_cell(rng, s) {
                    genes.push(p);
                }
            }
        } else if genes.len() > ops.bounds.l_min {
            let k = rng.gen_range(0..genes.len());
            genes.remove(k);
        }
    }
}

const DIRECTIONS: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Hill climbing: probe each sub-frame moved by one or two neighborhood
/// radii in the eight grid directions, take the single best move if it
/// strictly improves the score, and repeat for at most `max_sweeps`.
pub(crate) fn local_search(space: &SearchSpace, g: &mut Genome, steps: i64, max_sweeps: usize) {
    if g.polished {
        return;
    }
    for _ in 0..max_sweeps {
        let mut best: Option<(usize, u32, f64)> = None;
        let mut trial = g.genes.clone();
        for k in 0..g.genes.len() {
            let (x, y) = space.pos(g.genes[k]);
            for ring in [steps, 2 * steps] {
                for (dx, dy) in DIRECTIONS {
                    let Some(p) = space.offset(x, y, dx * ring, dy * ring) else {
                        continue;
                    };
                    trial[k] = p;
                    let s = space.score(&trial);
                    if s > best.map_or(g.score, |b| b.2) {
                        best = Some((k, p, s));
                    }
                }
            }
            trial[k] = g.genes[k];
        }
        match best {
            Some((k, p, s)) => {
                g.genes[k] = p;
                g.score = s;
            }
            None => {
                g.polished = true;
                return;
            }
        }
    }
}
