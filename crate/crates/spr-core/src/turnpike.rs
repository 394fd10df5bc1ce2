//! Greedy support recovery from a noisy pairwise-difference multiset (the
//! turnpike / beltway problem with measurement noise).
//!
//! Given the N = K²−K+1 differences d̃ₙ = xₖ − xₗ + νₖ,ₗ of an unknown K-point
//! support, the solver rebuilds the points up to translation and reflection:
//!
//!  1. **Init**: x̂₁ = 0 and x̂₂ = d̃_N, the difference of largest norm. Both
//!     are genuine (noisy) solution points for *some* anchoring of the truth;
//!     the candidate pool is every other difference except d̃₁, the element
//!     nearest the origin.
//!  2. **Greedy rounds**: the next point is the pool element p minimizing
//!
//!        Σ_{x̂ ∈ X̂ₖ}  min_{d̃} ‖p − x̂ − d̃‖²,
//!
//!     i.e. the candidate whose differences to the partial solution are best
//!     explained by the measured multiset.
//!
//! Three optional refinements trade accuracy against bookkeeping:
//!
//!  * **Pruning** — once a point is accepted, the differences it "used up"
//!    (the nearest matches of ±(x̂ᵢ − x̂ₖ₊₁)) cannot be solution points and are
//!    deleted from the working set; later rounds cannot be fooled by them.
//!  * **Symmetric cost** — scores ‖p − x̂ − d̃‖² + ‖x̂ − p − d̃′‖², exploiting
//!    the central symmetry of the difference multiset.
//!  * **Denoising** — after every acceptance, each pair (i, j) of the partial
//!    solution is labeled with its nearest difference d̂ᵢ,ⱼ and the points are
//!    re-estimated as x̂ᵢ ← (1/m) Σⱼ d̂ᵢ,ⱼ, the least-squares minimizer of
//!    J = Σᵢ,ⱼ ‖d̂ᵢ,ⱼ − (x̂ᵢ − x̂ⱼ)‖² up to translation.
//!
//! A per-(point, candidate) cache of the inner minima turns the evaluation
//! from O(K⁶) into O(K⁵) total work without changing a single bit of the
//! output: cached entries are invalidated lazily when pruning deletes their
//! minimizer, and per-candidate sums are re-folded fresh in the same order
//! the uncached path uses. Caching is incompatible with denoising (moving
//! the points invalidates every cached minimum), and the configuration
//! rejects that combination.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dist2_sq, sub, DifferenceSet, Support};

// ───────────────────────── configuration ─────────────────────────

/// Feature switches for [`recover_support`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RecoveryConfig {
    /// Reuse inner minima across rounds (pure optimization, identical output).
    pub use_caching: bool,
    /// Delete used-up differences from the working set after each acceptance.
    pub prune_differences: bool,
    /// Score candidates with the mirrored two-sided cost.
    pub symmetric_cost: bool,
    /// Re-estimate all points from pair labels after each acceptance.
    pub denoise_partials: bool,
}

impl RecoveryConfig {
    /// Caching memoizes per-point minima, so it cannot survive denoising,
    /// which moves every point after each round.
    pub fn validate(&self) -> Result<()> {
        if self.use_caching && self.denoise_partials {
            return Err(Error::InvalidArgument(
                "caching is incompatible with partial-solution denoising".into(),
            ));
        }
        Ok(())
    }
}

// ───────────────────────── partial solutions ─────────────────────────

/// A solution under construction: the accepted points x̂₁…x̂ₘ (x̂₁ = 0 by
/// convention), the candidate pool 𝒫, and optional per-pair labels d̂ᵢ,ⱼ.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSolution {
    dim: usize,
    points: Vec<Vec<f64>>,
    candidates: Vec<Vec<f64>>,
    /// Flattened m×m matrix; `labels[i·m + j]` is d̂ᵢ,ⱼ. Empty until
    /// [`PartialSolution::relabel`] runs. d̂ᵢ,ᵢ = 0 and d̂ⱼ,ᵢ = −d̂ᵢ,ⱼ.
    labels: Vec<Vec<f64>>,
}

impl PartialSolution {
    /// Builds a partial solution, checking the anchoring convention
    /// (first point at the origin) and pool/solution disjointness.
    pub fn new(dim: usize, points: Vec<Vec<f64>>, candidates: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be ≥ 1".into()));
        }
        if points.is_empty() {
            return Err(Error::InvalidArgument("a partial solution needs ≥ 1 point".into()));
        }
        for p in points.iter().chain(candidates.iter()) {
            if p.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "entry has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite coordinate".into()));
            }
        }
        if points[0].iter().any(|v| *v != 0.0) {
            return Err(Error::InvalidArgument("the first point must be the origin".into()));
        }
        if candidates.iter().any(|c| points.contains(c)) {
            return Err(Error::InvalidArgument(
                "candidate pool and solution points must be disjoint".into(),
            ));
        }
        Ok(Self { dim, points, candidates, labels: Vec::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn candidates(&self) -> &[Vec<f64>] {
        &self.candidates
    }

    pub fn has_labels(&self) -> bool {
        !self.labels.is_empty()
    }

    /// The pair label d̂ᵢ,ⱼ, if [`PartialSolution::relabel`] has run.
    pub fn label(&self, i: usize, j: usize) -> Option<&[f64]> {
        let m = self.points.len();
        if i >= m || j >= m || self.labels.len() != m * m {
            return None;
        }
        Some(&self.labels[i * m + j])
    }

    /// Labels every pair with its nearest measured difference: for i < j the
    /// fresh search runs on x̂ⱼ − x̂ᵢ (newer minus older, the direction the
    /// cost evaluation probes on acceptance) and d̂ᵢ,ⱼ = −d̂ⱼ,ᵢ fills the
    /// mirror. The search always scans the full multiset: labels must stay
    /// meaningful even for pairs whose matches were pruned from the pool.
    pub fn relabel(&mut self, diffs: &DifferenceSet) {
        assert_eq!(diffs.dim, self.dim, "difference set dimension mismatch");
        self.labels = relabel_points(&self.points, &diffs.diffs);
    }
}

fn relabel_points(points: &[Vec<f64>], elems: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = points.len();
    let dim = points[0].len();
    let mut labels = vec![vec![0.0; dim]; m * m];
    for j in 0..m {
        for i in 0..j {
            let target = sub(&points[j], &points[i]);
            let (idx, _) = nearest(&target, elems);
            labels[j * m + i] = elems[idx].clone();
            labels[i * m + j] = neg(&elems[idx]);
        }
    }
    labels
}

// ───────────────────────── free operations ─────────────────────────

/// Greedy score of candidate `p` against a partial solution: for every
/// accepted point x̂ the squared distance from p − x̂ to its nearest measured
/// difference, plus the mirrored term ‖x̂ − p − d̃′‖² when `symmetric` is set.
///
/// Panics on dimension mismatch; the score itself is total.
pub fn candidate_cost(
    p: &[f64],
    partial: &PartialSolution,
    diffs: &DifferenceSet,
    symmetric: bool,
) -> f64 {
    assert_eq!(p.len(), partial.dim, "candidate dimension mismatch");
    assert_eq!(diffs.dim, partial.dim, "difference set dimension mismatch");
    let mut cost = 0.0;
    for x in &partial.points {
        let (_, fwd) = nearest(&sub(p, x), &diffs.diffs);
        let mut term = fwd;
        if symmetric {
            let (_, rev) = nearest(&sub(x, p), &diffs.diffs);
            term += rev;
        }
        cost += term;
    }
    cost
}

/// Deletes from `working` the differences used up by accepting `new_point`:
/// the nearest element to each of the 2k targets ±(x̂ᵢ − new).
///
/// All nearest-element searches run against the working set as passed in
/// (one snapshot), and an element is removed at most once even when it is
/// the nearest match of several targets.
pub fn prune_used_differences(
    partial: &PartialSolution,
    new_point: &[f64],
    working: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    assert_eq!(new_point.len(), partial.dim, "new point dimension mismatch");
    assert!(!working.is_empty(), "cannot prune an empty working set");
    let mut keep = vec![true; working.len()];
    for x in &partial.points {
        for target in [sub(x, new_point), sub(new_point, x)] {
            let (idx, _) = nearest(&target, working);
            keep[idx] = false;
        }
    }
    working
        .iter()
        .zip(&keep)
        .filter(|(_, keep)| **keep)
        .map(|(w, _)| w.clone())
        .collect()
}

/// Re-estimates every point of a labeled partial solution as the row mean of
/// its pair labels, x̂ᵢ ← (1/m) Σⱼ d̂ᵢ,ⱼ — the least-squares minimizer of
/// J = Σᵢ,ⱼ ‖d̂ᵢ,ⱼ − (x̂ᵢ − x̂ⱼ)‖² up to translation — then re-anchors the
/// first point to the origin.
///
/// Panics if the labels have not been populated (see
/// [`PartialSolution::relabel`]).
pub fn denoise_partial(partial: &PartialSolution) -> PartialSolution {
    let m = partial.points.len();
    assert_eq!(
        partial.labels.len(),
        m * m,
        "denoising requires pair labels; populate them first"
    );
    let points = denoise_points(&partial.points, &partial.labels, partial.dim);
    PartialSolution {
        dim: partial.dim,
        points,
        candidates: partial.candidates.clone(),
        labels: partial.labels.clone(),
    }
}

fn denoise_points(points: &[Vec<f64>], labels: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let m = points.len();
    let mut fresh = vec![vec![0.0; dim]; m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                for (acc, v) in fresh[i].iter_mut().zip(&labels[i * m + j]) {
                    *acc += v;
                }
            }
        }
        for v in &mut fresh[i] {
            *v /= m as f64;
        }
    }
    let anchor = fresh[0].clone();
    for p in &mut fresh {
        for (v, a) in p.iter_mut().zip(&anchor) {
            *v -= a;
        }
    }
    fresh
}

/// Total squared matching distance of a point set to a difference multiset:
/// Σ over ordered pairs (i ≠ j) of the squared distance from xᵢ − xⱼ to its
/// nearest measured difference. This is the objective the exhaustive solver
/// minimizes and the scale on which greedy and exhaustive runs compare.
pub fn pairwise_matching_cost(support: &Support, diffs: &DifferenceSet) -> f64 {
    assert_eq!(support.dim, diffs.dim, "dimension mismatch");
    let mut cost = 0.0;
    for (i, xi) in support.points.iter().enumerate() {
        for (j, xj) in support.points.iter().enumerate() {
            if i != j {
                let (_, d2) = nearest(&sub(xi, xj), &diffs.diffs);
                cost += d2;
            }
        }
    }
    cost
}

// ───────────────────────── greedy solver ─────────────────────────

/// Everything a full greedy run produces: the recovered support plus the
/// final state of the difference bookkeeping, which the working-set and
/// pool-accounting tests inspect.
#[derive(Debug, Clone)]
pub struct RecoveryOutcome {
    pub support: Support,
    /// Differences still in the working set (never pruned).
    pub working_set: Vec<Vec<f64>>,
    /// Working-set elements still eligible as candidates.
    pub pool: Vec<Vec<f64>>,
    /// Pool size after initialization and after every acceptance round.
    pub pool_sizes: Vec<usize>,
    /// Indices (into the norm-sorted element list) of the multiset elements
    /// accepted into the solution, in acceptance order: d̃_N from the init
    /// step first, then one per greedy round. The anchor x̂₁ = 0 is not a
    /// selection. Lets callers judge *which* elements were picked — e.g.
    /// whether every acceptance chose a correct candidate — independently of
    /// any post-acceptance re-estimation of the point coordinates.
    pub selections: Vec<usize>,
}

/// Recovers a K-point support from its noisy difference multiset. The output
/// is anchored (x̂₁ = 0) and matches the truth up to translation and
/// reflection when the greedy search succeeds.
pub fn recover_support(
    diffs: &DifferenceSet,
    k: usize,
    config: RecoveryConfig,
    dimension: usize,
) -> Result<Support> {
    recover_support_detailed(diffs, k, config, dimension).map(|o| o.support)
}

/// [`recover_support`] with the final working set, pool, and pool-size trace
/// exposed.
pub fn recover_support_detailed(
    diffs: &DifferenceSet,
    k: usize,
    config: RecoveryConfig,
    dimension: usize,
) -> Result<RecoveryOutcome> {
    config.validate()?;
    if k < 2 {
        return Err(Error::InvalidArgument(format!("K must be ≥ 2, got {k}")));
    }
    if diffs.implied_k() != k {
        return Err(Error::InvalidArgument(format!(
            "{} differences imply K = {}, not K = {k}",
            diffs.len(),
            diffs.implied_k()
        )));
    }
    if diffs.dim != dimension {
        return Err(Error::InvalidArgument(format!(
            "difference set is {}-dimensional, expected {dimension}",
            diffs.dim
        )));
    }

    let mut eng = Engine::new(&diffs.diffs, dimension, config);
    eng.init();
    while eng.points.len() < k {
        eng.round()?;
    }
    eng.finish(dimension)
}

/// One greedy run's worth of mutable state. Element indices refer to the
/// norm-sorted difference list throughout; `active` tracks working-set
/// membership (pruning clears it) and `consumed` marks elements that entered
/// the solution — they stay in the working set for nearest-difference
/// searches but are neither candidates nor prunable.
struct Engine<'a> {
    dim: usize,
    elems: &'a [Vec<f64>],
    cfg: RecoveryConfig,
    active: Vec<bool>,
    consumed: Vec<bool>,
    points: Vec<Vec<f64>>,
    /// Flattened pair labels, maintained only when denoising.
    labels: Vec<Vec<f64>>,
    /// cache[i][j]: inner minima of point i against candidate j.
    cache: Vec<Vec<Option<CachedTerm>>>,
    pool_sizes: Vec<usize>,
    selections: Vec<usize>,
}

/// Inner minima for one (point, candidate) pair: nearest difference to
/// p − x̂ (forward) and, under the symmetric cost, to x̂ − p (reverse).
/// The reverse slots alias the forward ones when the cost is one-sided.
#[derive(Clone, Copy)]
struct CachedTerm {
    fwd_idx: usize,
    fwd: f64,
    rev_idx: usize,
    rev: f64,
}

impl CachedTerm {
    fn value(&self) -> f64 {
        self.fwd + self.rev
    }
}

impl<'a> Engine<'a> {
    fn new(elems: &'a [Vec<f64>], dim: usize, cfg: RecoveryConfig) -> Self {
        Self {
            dim,
            elems,
            cfg,
            active: vec![true; elems.len()],
            consumed: vec![false; elems.len()],
            points: Vec::new(),
            labels: Vec::new(),
            cache: Vec::new(),
            pool_sizes: Vec::new(),
            selections: Vec::new(),
        }
    }

    /// X̂₂ = {0, d̃_N}; d̃₁ (the near-origin element) and d̃_N leave the pool
    /// as consumed. Both stay in the working set: they are genuine measured
    /// differences and remain valid match targets.
    fn init(&mut self) {
        let n = self.elems.len();
        self.consume(0);
        self.push_point(vec![0.0; self.dim]);
        self.consume(n - 1);
        self.selections.push(n - 1);
        self.push_point(self.elems[n - 1].clone());
        if self.cfg.prune_differences {
            self.prune(1);
        }
        if self.cfg.denoise_partials {
            self.labels = relabel_points(&self.points, self.elems);
        }
        self.pool_sizes.push(self.pool_count());
    }

    /// One greedy acceptance: pick the cheapest candidate, then run the
    /// enabled refinements (prune the used differences, re-estimate the
    /// points from refreshed labels).
    fn round(&mut self) -> Result<()> {
        let old_count = self.points.len();
        let j = self.select_candidate().ok_or_else(|| {
            Error::DegenerateInput(
                "candidate pool exhausted before the requested point count".into(),
            )
        })?;
        self.consume(j);
        self.selections.push(j);
        self.push_point(self.elems[j].clone());
        if self.cfg.denoise_partials {
            // Labels always scan the full multiset, so pruning order cannot
            // disturb them; refresh before anything else moves.
            self.labels = relabel_points(&self.points, self.elems);
        }
        if self.cfg.prune_differences {
            self.prune(old_count);
        }
        if self.cfg.denoise_partials {
            self.points = denoise_points(&self.points, &self.labels, self.dim);
        }
        self.pool_sizes.push(self.pool_count());
        Ok(())
    }

    fn finish(self, dimension: usize) -> Result<RecoveryOutcome> {
        let support = Support::from_recovered(dimension, self.points)?;
        let working_set = collect_flagged(self.elems, |i| self.active[i]);
        let pool = collect_flagged(self.elems, |i| self.active[i] && !self.consumed[i]);
        Ok(RecoveryOutcome {
            support,
            working_set,
            pool,
            pool_sizes: self.pool_sizes,
            selections: self.selections,
        })
    }

    fn consume(&mut self, idx: usize) {
        self.consumed[idx] = true;
    }

    fn push_point(&mut self, p: Vec<f64>) {
        self.points.push(p);
        if self.cfg.use_caching {
            self.cache.push(vec![None; self.elems.len()]);
        }
    }

    fn pool_count(&self) -> usize {
        (0..self.elems.len()).filter(|&i| self.active[i] && !self.consumed[i]).count()
    }

    /// Lowest-cost candidate, earliest index on ties. `None` when the pool
    /// is empty (over-pruned degenerate inputs).
    fn select_candidate(&mut self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.elems.len() {
            if !self.active[j] || self.consumed[j] {
                continue;
            }
            let cost = self.candidate_total(j);
            match best {
                Some((_, c)) if cost >= c => {}
                _ => best = Some((j, cost)),
            }
        }
        best.map(|(j, _)| j)
    }

    /// Fold of the per-point terms for candidate j, always rebuilt left to
    /// right so cached and uncached runs sum in the identical order (and hence
    /// produce bit-identical costs).
    fn candidate_total(&mut self, j: usize) -> f64 {
        let mut total = 0.0;
        for i in 0..self.points.len() {
            let term = if self.cfg.use_caching {
                self.cached_term(i, j)
            } else {
                self.fresh_term(i, j)
            };
            total += term.value();
        }
        total
    }

    /// Cache lookup with lazy invalidation: an entry survives exactly while
    /// its minimizers are still in the working set. A minimum over a set that
    /// only ever shrinks stays correct as long as its argmin survives, so
    /// revalidated entries are bit-identical to a fresh scan.
    fn cached_term(&mut self, i: usize, j: usize) -> CachedTerm {
        if let Some(t) = self.cache[i][j] {
            if self.active[t.fwd_idx] && self.active[t.rev_idx] {
                return t;
            }
        }
        let t = self.fresh_term(i, j);
        self.cache[i][j] = Some(t);
        t
    }

    fn fresh_term(&self, i: usize, j: usize) -> CachedTerm {
        let fwd_target = sub(&self.elems[j], &self.points[i]);
        let (fwd_idx, fwd) = nearest_masked(&fwd_target, self.elems, &self.active);
        if self.cfg.symmetric_cost {
            let rev_target = neg(&fwd_target);
            let (rev_idx, rev) = nearest_masked(&rev_target, self.elems, &self.active);
            CachedTerm { fwd_idx, fwd, rev_idx, rev }
        } else {
            CachedTerm { fwd_idx, fwd, rev_idx: fwd_idx, rev: 0.0 }
        }
    }

    /// Working-set deletion of the differences used up by the newest point
    /// (`points[old_count]`): nearest elements to ±(x̂ᵢ − x̂ₙₑᵥ) over a
    /// snapshot of the current working set. Elements already consumed by the
    /// solution are skipped — the (x̂₁ = 0)-target's match *is* the accepted
    /// element itself — and no element is removed twice, so each round
    /// disposes of the 2k used differences as: one acceptance plus at most
    /// 2k−1 working-set deletions.
    fn prune(&mut self, old_count: usize) {
        let snapshot = self.active.clone();
        let new_pt = self.points[old_count].clone();
        for i in 0..old_count {
            for target in [sub(&self.points[i], &new_pt), sub(&new_pt, &self.points[i])] {
                let (idx, _) = nearest_masked(&target, self.elems, &snapshot);
                if self.consumed[idx] {
                    continue;
                }
                self.active[idx] = false;
            }
        }
    }
}

// ───────────────────────── exhaustive solver ─────────────────────────

/// Upper K for [`brute_force_turnpike`]; beyond this the candidate subsets
/// (N−2 choose K−2, N = K²−K+1) stop being enumerable at test timescales.
pub const BRUTE_FORCE_MAX_K: usize = 6;

/// Exhaustive reference solver: scores every anchored candidate set
/// {0, d̃_N} ∪ (K−2 other differences) by its total squared matching distance
/// to the multiset and returns the global minimizer (first in subset
/// enumeration order on exact ties). The greedy solver draws from exactly
/// this family, so the returned cost is a certified lower bound for it.
pub fn brute_force_turnpike(diffs: &DifferenceSet, k: usize) -> Result<Support> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("K must be ≥ 2, got {k}")));
    }
    if k > BRUTE_FORCE_MAX_K {
        return Err(Error::InvalidArgument(format!(
            "exhaustive search is limited to K ≤ {BRUTE_FORCE_MAX_K}, got {k}"
        )));
    }
    if diffs.implied_k() != k {
        return Err(Error::InvalidArgument(format!(
            "{} differences imply K = {}, not K = {k}",
            diffs.len(),
            diffs.implied_k()
        )));
    }
    let n = diffs.len();
    let elems = &diffs.diffs;
    let origin = vec![0.0; diffs.dim];
    let top = elems[n - 1].clone();
    if k == 2 {
        return Support::from_recovered(diffs.dim, vec![origin, top]);
    }

    let mut best_cost = f64::INFINITY;
    let mut best: Option<Vec<Vec<f64>>> = None;
    // Lexicographic (K−2)-combinations over indices 1..n−1 (d̃₁ and d̃_N are
    // pinned as the origin's stand-in and the second point).
    let mut combo: Vec<usize> = (1..k - 1).collect();
    loop {
        let mut pts = Vec::with_capacity(k);
        pts.push(origin.clone());
        pts.extend(combo.iter().map(|&i| elems[i].clone()));
        pts.push(top.clone());
        let cost = matching_cost_points(&pts, elems);
        if cost < best_cost {
            best_cost = cost;
            best = Some(pts);
        }
        if !advance_combination(&mut combo, n - 1) {
            break;
        }
    }
    Support::from_recovered(diffs.dim, best.expect("at least one candidate subset"))
}

fn matching_cost_points(points: &[Vec<f64>], elems: &[Vec<f64>]) -> f64 {
    let mut cost = 0.0;
    for (i, xi) in points.iter().enumerate() {
        for (j, xj) in points.iter().enumerate() {
            if i != j {
                let (_, d2) = nearest(&sub(xi, xj), elems);
                cost += d2;
            }
        }
    }
    cost
}

/// Next lexicographic combination with entries in 1..limit; false when done.
fn advance_combination(combo: &mut [usize], limit: usize) -> bool {
    let r = combo.len();
    let mut i = r;
    while i > 0 {
        i -= 1;
        if combo[i] < limit - (r - i) {
            combo[i] += 1;
            for j in i + 1..r {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

// ───────────────────────── small vector helpers ─────────────────────────

/// Index and squared distance of the element nearest to `target`; ties go to
/// the lowest index.
fn nearest(target: &[f64], elems: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, e) in elems.iter().enumerate() {
        let d2 = dist2_sq(target, e);
        if d2 < best.1 {
            best = (i, d2);
        }
    }
    best
}

fn nearest_masked(target: &[f64], elems: &[Vec<f64>], mask: &[bool]) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, e) in elems.iter().enumerate() {
        if !mask[i] {
            continue;
        }
        let d2 = dist2_sq(target, e);
        if d2 < best.1 {
            best = (i, d2);
        }
    }
    best
}

fn neg(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| -x).collect()
}

fn collect_flagged(elems: &[Vec<f64>], flag: impl Fn(usize) -> bool) -> Vec<Vec<f64>> {
    elems
        .iter()
        .enumerate()
        .filter(|(i, _)| flag(*i))
        .map(|(_, e)| e.clone())
        .collect()
}
