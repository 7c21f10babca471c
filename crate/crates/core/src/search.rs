//! Simulated annealing over resolvable designs.
//!
//! A move swaps two varieties between two blocks of one replicate, so every
//! state is resolvable. The minimized objective is `trace(M⁺)`, the sum of
//! reciprocal nonzero eigenvalues of `M = I - Λ/(rk)`, which equals
//! `(v-1)/A`. It is evaluated as `trace((M + J/v)⁻¹) - 1`; the inverse is
//! kept up to date with a rank-2 Woodbury update per accepted move and
//! recomputed from scratch every `refresh_interval` accepts.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::design::{Block, Replicate, ResolvableDesign};
use crate::efficiency::a_value;
use crate::error::SearchError;
use crate::exact::to_f64;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub v: usize,
    pub k: usize,
    pub r: usize,
    pub initial_temperature: f64,
    pub final_temperature: f64,
    pub cooling_rate: f64,
    pub moves_per_temperature: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Wall-clock limit for the whole run; restarts stop early when it passes.
    pub time_budget: Option<Duration>,
    pub refresh_interval: usize,
}

impl SearchConfig {
    pub fn new(v: usize, k: usize, r: usize) -> Self {
        SearchConfig {
            v,
            k,
            r,
            initial_temperature: 0.1,
            final_temperature: 1e-4,
            cooling_rate: 0.95,
            moves_per_temperature: 200,
            restarts: 8,
            seed: 42,
            time_budget: Some(Duration::from_secs(60)),
            refresh_interval: 256,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let err = |m: &str| Err(SearchError::Config(m.to_string()));
        if self.k == 0 || self.v == 0 || self.v % self.k != 0 {
            return err("v must be a positive multiple of k");
        }
        if self.r < 2 || self.k == self.v {
            return err("need r >= 2 and k < v for a connected design");
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return err("cooling rate must lie in (0, 1)");
        }
        if self.restarts == 0 {
            return err("restarts must be at least 1");
        }
        if !(self.initial_temperature >= 0.0 && self.final_temperature > 0.0) {
            return err("temperatures must be non-negative, the final one positive");
        }
        if self.moves_per_temperature == 0 || self.refresh_interval == 0 {
            return err("moves per temperature and refresh interval must be positive");
        }
        Ok(())
    }
}

/// Each replicate an independent uniform random partition into blocks of `k`.
pub fn random_resolvable<R: Rng + ?Sized>(v: usize, k: usize, r: usize, rng: &mut R) -> ResolvableDesign {
    let replicates = (0..r)
        .map(|_| {
            let mut varieties: Vec<usize> = (0..v).collect();
            varieties.shuffle(rng);
            Replicate::new(varieties.chunks(k).map(|c| Block::new(c.to_vec())).collect())
        })
        .collect();
    ResolvableDesign::from_parts(v, k, replicates, "random")
}

/// `trace(M⁺)` in floating point; infinite for a disconnected design.
pub fn objective(design: &ResolvableDesign) -> f64 {
    match design.concurrence_matrix() {
        Ok(c) => match regularized_inverse(&concurrence_f64(c.entries(), c.v()), c.v(), c.r() * c.k()) {
            Some(q) => q.trace() - 1.0,
            None => f64::INFINITY,
        },
        Err(_) => f64::INFINITY,
    }
}

fn concurrence_f64(entries: &[u32], v: usize) -> DMatrix<f64> {
    DMatrix::from_row_iterator(v, v, entries.iter().map(|&x| x as f64))
}

/// `(I - Λ/s + J/v)⁻¹`, or `None` when the matrix is singular.
fn regularized_inverse(lambda: &DMatrix<f64>, v: usize, s: usize) -> Option<DMatrix<f64>> {
    let m = DMatrix::from_fn(v, v, |i, j| {
        (i == j) as u8 as f64 - lambda[(i, j)] / s as f64 + 1.0 / v as f64
    });
    let chol = m.cholesky()?;
    let q = chol.inverse();
    q.iter().all(|x| x.is_finite()).then_some(q)
}

/// A proposed swap and its effect on the objective.
#[derive(Clone, Debug, PartialEq)]
pub struct Proposal {
    pub replicate: usize,
    pub block_a: usize,
    pub block_b: usize,
    /// Variety leaving `block_a` for `block_b`.
    pub x: usize,
    /// Variety leaving `block_b` for `block_a`.
    pub y: usize,
    /// Change in the objective; infinite if the result is disconnected.
    pub delta: f64,
    update: Option<(DVector<f64>, DVector<f64>, [f64; 4])>,
}

/// Annealing state: the design as block lists, its concurrences and the
/// regularized inverse.
#[derive(Clone, Debug)]
pub struct SearchState {
    v: usize,
    k: usize,
    blocks: Vec<Vec<Vec<usize>>>,
    /// `location[rep][x] = (block, slot)`.
    location: Vec<Vec<(usize, usize)>>,
    lambda: DMatrix<f64>,
    q: DMatrix<f64>,
    objective: f64,
    accepts_since_refresh: usize,
}

impl SearchState {
    pub fn new(design: &ResolvableDesign) -> Result<Self, SearchError> {
        design.ensure_valid().map_err(|e| SearchError::Config(e.to_string()))?;
        let (v, k) = (design.v(), design.k());
        let blocks: Vec<Vec<Vec<usize>>> = design
            .replicates()
            .iter()
            .map(|rep| rep.blocks().iter().map(|b| b.members().to_vec()).collect())
            .collect();
        let mut location = vec![vec![(0, 0); v]; blocks.len()];
        for (ri, rep) in blocks.iter().enumerate() {
            for (bi, b) in rep.iter().enumerate() {
                for (slot, &x) in b.iter().enumerate() {
                    location[ri][x] = (bi, slot);
                }
            }
        }
        let c = design.concurrence_matrix().map_err(|e| SearchError::Config(e.to_string()))?;
        let lambda = concurrence_f64(c.entries(), v);
        let q = regularized_inverse(&lambda, v, design.r() * k).ok_or(SearchError::NoConnectedDesign)?;
        let objective = q.trace() - 1.0;
        Ok(SearchState { v, k, blocks, location, lambda, q, objective, accepts_since_refresh: 0 })
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    fn r(&self) -> usize {
        self.blocks.len()
    }

    fn scale(&self) -> f64 {
        (self.r() * self.k) as f64
    }

    pub fn design(&self) -> ResolvableDesign {
        let replicates = self
            .blocks
            .iter()
            .map(|rep| Replicate::new(rep.iter().map(|b| Block::new(b.clone())).collect()))
            .collect();
        ResolvableDesign::from_parts(self.v, self.k, replicates, "search")
    }

    /// Evaluate swapping `x` and `y`, which must lie in different blocks of `replicate`.
    pub fn propose(&self, replicate: usize, x: usize, y: usize) -> Proposal {
        let (block_a, _) = self.location[replicate][x];
        let (block_b, _) = self.location[replicate][y];
        assert_ne!(block_a, block_b, "swap needs two different blocks");
        let v = self.v;
        // ΔΛ = u wᵀ + w uᵀ with u = e_x - e_y, w = n_b - n_a
        let mut w = DVector::<f64>::zeros(v);
        for &z in &self.blocks[replicate][block_a] {
            if z != x {
                w[z] -= 1.0;
            }
        }
        for &z in &self.blocks[replicate][block_b] {
            if z != y {
                w[z] += 1.0;
            }
        }
        let a = self.q.column(x) - self.q.column(y);
        let b = &self.q * &w;
        let ua = a[x] - a[y];
        let ub = b[x] - b[y];
        let wb = w.dot(&b);
        // M changes by U C Uᵀ with U = [u w], C = -(1/s)[[0,1],[1,0]]
        let s = self.scale();
        let k = [ua, ub - s, ub - s, wb];
        let det = k[0] * k[3] - k[1] * k[2];
        let invalid = Proposal {
            replicate,
            block_a,
            block_b,
            x,
            y,
            delta: f64::INFINITY,
            update: None,
        };
        if det.abs() < 1e-9 * (1.0 + k.iter().map(|t| t.abs()).fold(0.0, f64::max)).powi(2) {
            return invalid;
        }
        let kinv = [k[3] / det, -k[1] / det, -k[2] / det, k[0] / det];
        let (aa, ab, bb) = (a.dot(&a), a.dot(&b), b.dot(&b));
        let delta = -(kinv[0] * aa + kinv[1] * ab + kinv[2] * ab + kinv[3] * bb);
        if !delta.is_finite() || self.objective + delta <= 0.0 {
            return invalid;
        }
        Proposal { delta, update: Some((a, b, kinv)), ..invalid }
    }

    /// Uniform replicate, then two varieties in different blocks of it.
    pub fn random_proposal<R: Rng + ?Sized>(&self, rng: &mut R) -> Proposal {
        let replicate = rng.gen_range(0..self.r());
        let x = rng.gen_range(0..self.v);
        let bx = self.location[replicate][x].0;
        let nb = self.v / self.k;
        let by = (bx + rng.gen_range(1..nb)) % nb;
        let y = self.blocks[replicate][by][rng.gen_range(0..self.k)];
        self.propose(replicate, x, y)
    }

    pub fn apply(&mut self, p: &Proposal, refresh_interval: usize) {
        let Some((a, b, kinv)) = &p.update else {
            panic!("cannot apply a swap that disconnects the design");
        };
        let (sa, sx) = self.location[p.replicate][p.x];
        let (sb, sy) = self.location[p.replicate][p.y];
        self.blocks[p.replicate][sa][sx] = p.y;
        self.blocks[p.replicate][sb][sy] = p.x;
        self.location[p.replicate][p.x] = (sb, sy);
        self.location[p.replicate][p.y] = (sa, sx);
        for &z in &self.blocks[p.replicate][sa] {
            if z != p.y {
                self.lambda[(p.x, z)] -= 1.0;
                self.lambda[(z, p.x)] -= 1.0;
                self.lambda[(p.y, z)] += 1.0;
                self.lambda[(z, p.y)] += 1.0;
            }
        }
        for &z in &self.blocks[p.replicate][sb] {
            if z != p.x {
                self.lambda[(p.y, z)] -= 1.0;
                self.lambda[(z, p.y)] -= 1.0;
                self.lambda[(p.x, z)] += 1.0;
                self.lambda[(z, p.x)] += 1.0;
            }
        }
        self.accepts_since_refresh += 1;
        if self.accepts_since_refresh >= refresh_interval {
            self.refresh();
        } else {
            // Q ← Q - [a b] K⁻¹ [a b]ᵀ
            let p1 = a * kinv[0] + b * kinv[2];
            let p2 = a * kinv[1] + b * kinv[3];
            self.q.ger(-1.0, &p1, a, 1.0);
            self.q.ger(-1.0, &p2, b, 1.0);
            self.objective += p.delta;
        }
    }

    /// Recompute the inverse and objective from the concurrences.
    pub fn refresh(&mut self) {
        let q = regularized_inverse(&self.lambda, self.v, self.r() * self.k)
            .expect("accepted states are connected");
        self.objective = q.trace() - 1.0;
        self.q = q;
        self.accepts_since_refresh = 0;
    }

    /// Best single swap, if it lowers the objective by more than `tol`.
    pub fn best_improving_swap(&self, tol: f64) -> Option<Proposal> {
        let mut best: Option<Proposal> = None;
        for rep in 0..self.r() {
            for x in 0..self.v {
                for y in x + 1..self.v {
                    if self.location[rep][x].0 == self.location[rep][y].0 {
                        continue;
                    }
                    let p = self.propose(rep, x, y);
                    if p.delta < -tol && best.as_ref().is_none_or(|b| p.delta < b.delta) {
                        best = Some(p);
                    }
                }
            }
        }
        best
    }

    /// Steepest descent until no swap improves.
    pub fn polish(&mut self, refresh_interval: usize) {
        while let Some(p) = self.best_improving_swap(1e-10) {
            self.apply(&p, refresh_interval);
        }
        self.refresh();
    }
}

/// One row of the annealing trace, written once per temperature level.
#[derive(Clone, Debug, PartialEq)]
pub struct TracePoint {
    pub restart: usize,
    pub level: usize,
    pub temperature: f64,
    pub accepted: usize,
    pub current: f64,
    pub best: f64,
}

pub fn trace_csv(trace: &[TracePoint]) -> String {
    let mut out = String::from("restart,level,temperature,accepted,objective,best_objective\n");
    for t in trace {
        out.push_str(&format!(
            "{},{},{:.6e},{},{:.12},{:.12}\n",
            t.restart, t.level, t.temperature, t.accepted, t.current, t.best
        ));
    }
    out
}

#[derive(Clone, Debug)]
pub struct RestartResult {
    pub restart: usize,
    pub design: ResolvableDesign,
    pub objective: f64,
    pub a: BigRational,
    pub trace: Vec<TracePoint>,
    pub timed_out: bool,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub design: ResolvableDesign,
    pub a: BigRational,
    pub a_float: f64,
    pub objective: f64,
    /// Restart that produced the winner.
    pub restart: usize,
    pub restarts: Vec<RestartResult>,
    pub timed_out: bool,
}

impl SearchOutcome {
    pub fn trace(&self) -> Vec<TracePoint> {
        self.restarts.iter().flat_map(|r| r.trace.iter().cloned()).collect()
    }
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn run_restart(
    config: &SearchConfig,
    restart: usize,
    deadline: Option<Instant>,
) -> Result<RestartResult, SearchError> {
    let mut rng = restart_rng(config.seed, restart);
    let mut state = None;
    for _ in 0..100 {
        let design = random_resolvable(config.v, config.k, config.r, &mut rng);
        if let Ok(s) = SearchState::new(&design) {
            state = Some(s);
            break;
        }
    }
    let mut state = state.ok_or(SearchError::NoConnectedDesign)?;
    let mut best = state.clone();
    let mut trace = Vec::new();
    let mut temperature = config.initial_temperature;
    let mut level = 0;
    let mut timed_out = false;
    while temperature >= config.final_temperature {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            timed_out = true;
            break;
        }
        let mut accepted = 0;
        for _ in 0..config.moves_per_temperature {
            let p = state.random_proposal(&mut rng);
            if !p.delta.is_finite() {
                continue;
            }
            let take = p.delta <= 0.0
                || (temperature > 0.0 && rng.gen::<f64>() < (-p.delta / temperature).exp());
            if take {
                state.apply(&p, config.refresh_interval);
                accepted += 1;
                if state.objective() < best.objective() - 1e-12 {
                    best = state.clone();
                }
            }
        }
        trace.push(TracePoint {
            restart,
            level,
            temperature,
            accepted,
            current: state.objective(),
            best: best.objective(),
        });
        if temperature == 0.0 {
            break;
        }
        temperature *= config.cooling_rate;
        level += 1;
    }
    best.refresh();
    if !timed_out {
        best.polish(config.refresh_interval);
    }
    let design = best.design().with_label(format!("search-v{}-k{}-r{}-seed{}", config.v, config.k, config.r, config.seed));
    let a = a_value(&design)?;
    Ok(RestartResult { restart, design, objective: best.objective(), a, trace, timed_out })
}

/// Independent restarts in parallel; the winner has the largest exact A,
/// ties going to the lowest restart index.
pub fn anneal(config: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    config.validate()?;
    let deadline = config.time_budget.map(|b| Instant::now() + b);
    let restarts: Vec<RestartResult> = (0..config.restarts)
        .into_par_iter()
        .map(|i| run_restart(config, i, deadline))
        .collect::<Result<_, _>>()?;
    let winner = restarts
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.a.cmp(&b.a).then(j.cmp(i)))
        .map(|(i, _)| i)
        .expect("at least one restart");
    let w = &restarts[winner];
    Ok(SearchOutcome {
        design: w.design.clone(),
        a: w.a.clone(),
        a_float: to_f64(&w.a),
        objective: w.objective,
        restart: w.restart,
        timed_out: restarts.iter().any(|r| r.timed_out),
        restarts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{embedded_gamma_rc_8, gamma, Variant};

    #[test]
    fn random_designs_are_valid_and_reproducible() {
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        let d1 = random_resolvable(36, 6, 4, &mut r1);
        assert!(d1.is_valid());
        assert_eq!(d1, random_resolvable(36, 6, 4, &mut r2));
        let forced = random_resolvable(6, 6, 2, &mut r1);
        assert!(forced.replicates().iter().all(|rep| rep.blocks()[0].len() == 6));
    }

    #[test]
    fn objective_values() {
        let g = objective(&embedded_gamma_rc_8());
        assert!((g - 35.0 * 8196.0 / 7007.0).abs() < 1e-9);
        assert_eq!(objective(&gamma(1, Variant::Plain).unwrap()), f64::INFINITY);
    }

    #[test]
    fn incremental_matches_full_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let design = random_resolvable(36, 6, 4, &mut rng);
        let mut state = SearchState::new(&design).unwrap();
        for _ in 0..100 {
            let p = state.random_proposal(&mut rng);
            let before = objective(&state.design());
            let mut trial = state.clone();
            trial.apply(&p, usize::MAX);
            let after = objective(&trial.design());
            assert!((after - before - p.delta).abs() < 1e-8, "{} vs {}", after - before, p.delta);
            assert!((trial.objective() - after).abs() < 1e-8);
            state = trial;
        }
    }

    #[test]
    fn move_and_inverse_restore_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let design = random_resolvable(36, 6, 3, &mut rng);
        let mut state = SearchState::new(&design).unwrap();
        let start = state.objective();
        let p = state.random_proposal(&mut rng);
        state.apply(&p, usize::MAX);
        let back = state.propose(p.replicate, p.x, p.y);
        state.apply(&back, usize::MAX);
        assert!((state.objective() - start).abs() < 1e-10);
        assert_eq!(state.design().replicates(), design.replicates());
    }

    #[test]
    fn disconnecting_swaps_are_infinite() {
        // r = 2, v = 4, k = 2: {01,23} and {02,13}; swapping 1 and 2 in the
        // second replicate repeats the first
        let d = crate::format::read_design("1 2\n3 4\n\n1 3\n2 4\n").unwrap();
        let state = SearchState::new(&d).unwrap();
        assert!(state.propose(1, 2, 1).delta.is_infinite());
    }

    #[test]
    fn polish_reaches_a_local_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = random_resolvable(12, 3, 3, &mut rng);
        let mut state = SearchState::new(&d).unwrap();
        state.polish(256);
        assert!(state.best_improving_swap(1e-10).is_none());
    }

    #[test]
    fn small_anneal_is_deterministic() {
        let mut config = SearchConfig::new(12, 3, 3);
        config.restarts = 3;
        config.time_budget = None;
        config.moves_per_temperature = 50;
        let a = anneal(&config).unwrap();
        let b = anneal(&config).unwrap();
        assert_eq!(a.design, b.design);
        assert_eq!(a.trace(), b.trace());
        assert!(a.design.is_valid());
    }

    #[test]
    fn config_validation() {
        let mut c = SearchConfig::new(36, 6, 4);
        assert!(c.validate().is_ok());
        c.cooling_rate = 1.0;
        assert!(c.validate().is_err());
        assert!(SearchConfig::new(35, 6, 4).validate().is_err());
        let mut c = SearchConfig::new(36, 6, 4);
        c.restarts = 0;
        assert!(c.validate().is_err());
    }
}
