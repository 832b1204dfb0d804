//! Budgeted subset selection over a Gram matrix.
//!
//! Objectives are the trace-normalized entropy of a principal block and the
//! regularized log-determinant `ln det(K_X + mu I)`. Algorithms: greedy with
//! optional 1-swap local search, stochastic greedy, and exact m-DPP sampling.
//! [`faktual_curate`] combines an entropy block with a log-det block.
//!
//! All ties are broken towards the lowest index.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::GramMatrix;
use crate::rng::{substream, Purpose};
use crate::spectra::{logdet_shifted, unit_diagonal_entropy, DEFAULT_MU};

/// Gains or values closer than this count as equal.
pub const TIE_TOLERANCE: f64 = 1e-12;
const BRUTE_FORCE_LIMIT: u128 = 1_000_000;
const DPP_RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Entropy,
    Logdet,
}

impl ObjectiveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::Entropy => "entropy",
            ObjectiveKind::Logdet => "logdet",
        }
    }

    fn stream(self) -> u64 {
        match self {
            ObjectiveKind::Entropy => 0,
            ObjectiveKind::Logdet => 1,
        }
    }
}

/// Set function to maximize. `mu` is only used by the log-det objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub mu: f64,
}

impl Objective {
    pub fn entropy() -> Self {
        Self {
            kind: ObjectiveKind::Entropy,
            mu: DEFAULT_MU,
        }
    }

    pub fn logdet(mu: f64) -> Self {
        Self {
            kind: ObjectiveKind::Logdet,
            mu,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == ObjectiveKind::Logdet && !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Algorithm {
    GreedyLocal,
    StochasticGreedy,
    Kdpp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    /// Budget.
    pub m: usize,
    /// Share of the budget given to the entropy block in [`faktual_curate`].
    pub p: f64,
    pub algorithm: Algorithm,
    /// Stochastic greedy accuracy parameter.
    pub epsilon: f64,
    pub seed: u64,
    /// Run 1-swap local search after the greedy phase.
    pub local_search: bool,
    /// Maximum number of improving swaps; `None` means `10 m`.
    pub swap_cap: Option<usize>,
    /// Keep adding the best element after gains turn nonpositive, so that
    /// exactly `m` elements are returned.
    pub pad: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            m: 10,
            p: 0.0,
            algorithm: Algorithm::GreedyLocal,
            epsilon: 0.1,
            seed: 0,
            local_search: true,
            swap_cap: None,
            pad: true,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidConfig("m must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidConfig(format!(
                "p must lie in [0, 1], got {}",
                self.p
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.swap_cap == Some(0) {
            return Err(Error::InvalidConfig("swap_cap must be >= 1".into()));
        }
        Ok(())
    }

    fn swap_budget(&self, m: usize) -> usize {
        self.swap_cap.unwrap_or(10 * m)
    }

    fn with_m(&self, m: usize) -> Self {
        Self { m, ..self.clone() }
    }
}

/// Configuration echo stored alongside a selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionEcho {
    #[serde(flatten)]
    pub selection: SelectionConfig,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub indices: Vec<usize>,
    pub ids: Vec<String>,
    /// `entropy`, `logdet` or `faktual`.
    pub objective: String,
    /// Objective value after every accepted step (additions, then swaps).
    pub trace: Vec<f64>,
    pub config: SelectionEcho,
}

impl Selection {
    fn new(
        gram: &GramMatrix,
        indices: Vec<usize>,
        objective: &str,
        trace: Vec<f64>,
        cfg: &SelectionConfig,
        mu: f64,
    ) -> Self {
        Self {
            ids: indices.iter().map(|&i| gram.ids()[i].clone()).collect(),
            indices,
            objective: objective.to_string(),
            trace,
            config: SelectionEcho {
                selection: cfg.clone(),
                mu,
            },
        }
    }

    /// Final objective value, if any step was taken.
    pub fn value(&self) -> Option<f64> {
        self.trace.last().copied()
    }
}

fn check_budget(gram: &GramMatrix, m: usize) -> Result<()> {
    if m > gram.n() {
        return Err(Error::BudgetTooLarge { m, n: gram.n() });
    }
    Ok(())
}

fn check_subset(gram: &GramMatrix, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::InvalidSubset("empty subset".into()));
    }
    let mut seen = vec![false; gram.n()];
    for &i in subset {
        if i >= gram.n() {
            return Err(Error::InvalidSubset(format!(
                "index {i} out of range for n = {}",
                gram.n()
            )));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidSubset(format!("index {i} repeated")));
        }
    }
    Ok(())
}

/// Value of `obj` on the principal block `K[subset, subset]`.
pub fn objective_value(gram: &GramMatrix, subset: &[usize], obj: Objective) -> Result<f64> {
    check_subset(gram, subset)?;
    obj.validate()?;
    value_unchecked(gram, subset, obj)
}

fn value_unchecked(gram: &GramMatrix, subset: &[usize], obj: Objective) -> Result<f64> {
    if subset.is_empty() {
        return Ok(0.0);
    }
    let block = gram.submatrix(subset);
    match obj.kind {
        ObjectiveKind::Entropy => {
            if !gram.is_normalized() {
                return Err(Error::NotNormalized);
            }
            unit_diagonal_entropy(&block)
        }
        ObjectiveKind::Logdet => logdet_shifted(&block, obj.mu),
    }
}

/// Incremental Cholesky state of `K_X + mu I`. For every item `e` it keeps
/// `c_e = L^{-1} k_{X,e}` and the Schur residual `d_e^2 = K_ee + mu - |c_e|^2`,
/// so the log-det gain of adding `e` is `ln d_e^2`.
struct LogdetState<'a> {
    k: &'a DMatrix<f64>,
    c: Vec<Vec<f64>>,
    d2: Vec<f64>,
    value: f64,
}

impl<'a> LogdetState<'a> {
    fn new(k: &'a DMatrix<f64>, mu: f64) -> Self {
        let n = k.nrows();
        Self {
            k,
            c: vec![Vec::new(); n],
            d2: (0..n).map(|i| k[(i, i)] + mu).collect(),
            value: 0.0,
        }
    }

    fn gain(&self, e: usize) -> f64 {
        self.d2[e].max(f64::MIN_POSITIVE).ln()
    }

    fn add(&mut self, j: usize) {
        self.value += self.gain(j);
        let dj = self.d2[j].max(f64::MIN_POSITIVE).sqrt();
        let cj = self.c[j].clone();
        for e in 0..self.k.nrows() {
            let dot: f64 = self.c[e].iter().zip(&cj).map(|(a, b)| a * b).sum();
            let comp = (self.k[(e, j)] - dot) / dj;
            self.c[e].push(comp);
            self.d2[e] -= comp * comp;
        }
    }
}

/// Lowest index among the maximal gains, with ties inside [`TIE_TOLERANCE`].
fn argmax_lowest(candidates: &[usize], gains: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (&e, &g) in candidates.iter().zip(gains) {
        // Candidates arrive in ascending order, so only a strict improvement
        // may displace the incumbent.
        if best.is_none_or(|(_, bg)| g > bg + TIE_TOLERANCE) {
            best = Some((e, g));
        }
    }
    best
}

/// Greedy additions on top of `fixed`. `pool` yields the candidates for each
/// step from the sorted list of unselected items. Returns the added items and
/// the union value after each addition.
fn greedy_phase(
    gram: &GramMatrix,
    obj: Objective,
    fixed: &[usize],
    count: usize,
    pad: bool,
    mut pool: impl FnMut(&[usize]) -> Vec<usize>,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let n = gram.n();
    let mut in_set = vec![false; n];
    for &i in fixed {
        in_set[i] = true;
    }
    let mut selected = fixed.to_vec();
    let mut added = Vec::with_capacity(count);
    let mut trace = Vec::with_capacity(count);

    let mut logdet = (obj.kind == ObjectiveKind::Logdet).then(|| {
        let mut s = LogdetState::new(gram.entries(), obj.mu);
        for &i in fixed {
            s.add(i);
        }
        s
    });
    let mut current = match &logdet {
        Some(s) => s.value,
        None => value_unchecked(gram, &selected, obj)?,
    };

    while added.len() < count {
        let remaining: Vec<usize> = (0..n).filter(|&i| !in_set[i]).collect();
        let candidates = pool(&remaining);
        let gains: Vec<f64> = match &logdet {
            Some(s) => candidates.iter().map(|&e| s.gain(e)).collect(),
            None => candidates
                .par_iter()
                .map(|&e| {
                    let mut with = selected.clone();
                    with.push(e);
                    value_unchecked(gram, &with, obj).map(|v| v - current)
                })
                .collect::<Result<_>>()?,
        };
        let Some((best, gain)) = argmax_lowest(&candidates, &gains) else {
            break;
        };
        if gain <= 0.0 && !pad {
            break;
        }
        in_set[best] = true;
        selected.push(best);
        added.push(best);
        current = match &mut logdet {
            Some(s) => {
                s.add(best);
                s.value
            }
            None => current + gain,
        };
        trace.push(current);
    }
    Ok((added, trace))
}

/// Best-improvement 1-swaps of `free` items against items outside
/// `fixed ∪ free`, scored on the union. Stops when no swap improves by more
/// than [`TIE_TOLERANCE`] or after `cap` swaps. Appends each new value to `trace`.
fn local_search(
    gram: &GramMatrix,
    obj: Objective,
    fixed: &[usize],
    free: &mut [usize],
    cap: usize,
    trace: &mut Vec<f64>,
) -> Result<()> {
    let n = gram.n();
    let union = |free: &[usize]| -> Vec<usize> { fixed.iter().chain(free).copied().collect() };
    let mut current = value_unchecked(gram, &union(free), obj)?;
    for _ in 0..cap {
        let mut in_set = vec![false; n];
        for &i in fixed.iter().chain(free.iter()) {
            in_set[i] = true;
        }
        let outside: Vec<usize> = (0..n).filter(|&i| !in_set[i]).collect();
        let moves: Vec<(usize, usize)> = (0..free.len())
            .flat_map(|slot| outside.iter().map(move |&e| (slot, e)))
            .collect();
        let values: Vec<f64> = moves
            .par_iter()
            .map(|&(slot, e)| {
                let mut trial = free.to_vec();
                trial[slot] = e;
                value_unchecked(gram, &union(&trial), obj)
            })
            .collect::<Result<_>>()?;
        let mut best: Option<(usize, f64)> = None;
        for (k, &v) in values.iter().enumerate() {
            if best.is_none_or(|(_, bv)| v > bv + TIE_TOLERANCE) {
                best = Some((k, v));
            }
        }
        match best {
            Some((k, v)) if v > current + TIE_TOLERANCE => {
                let (slot, e) = moves[k];
                free[slot] = e;
                current = v;
                trace.push(v);
            }
            _ => break,
        }
    }
    Ok(())
}

/// Greedy phase followed by optional 1-swap local search, on top of `fixed`.
fn greedy_block(
    gram: &GramMatrix,
    obj: Objective,
    fixed: &[usize],
    count: usize,
    cfg: &SelectionConfig,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let (mut added, mut trace) = greedy_phase(gram, obj, fixed, count, cfg.pad, |r| r.to_vec())?;
    if cfg.local_search && !added.is_empty() {
        local_search(
            gram,
            obj,
            fixed,
            &mut added,
            cfg.swap_budget(fixed.len() + count),
            &mut trace,
        )?;
    }
    Ok((added, trace))
}

/// Greedy maximization of `obj` under cardinality `m`, followed by 1-swap
/// local search when `cfg.local_search` is set. With `cfg.pad` unset the
/// greedy phase stops at the first nonpositive gain and may return fewer
/// than `m` items.
pub fn greedy_local_search(
    gram: &GramMatrix,
    m: usize,
    obj: Objective,
    cfg: &SelectionConfig,
) -> Result<Selection> {
    check_budget(gram, m)?;
    obj.validate()?;
    let (indices, trace) = greedy_block(gram, obj, &[], m, cfg)?;
    Ok(Selection::new(
        gram,
        indices,
        obj.kind.as_str(),
        trace,
        &cfg.with_m(m),
        obj.mu,
    ))
}

/// Number of candidates sampled per stochastic greedy step.
pub fn stochastic_sample_size(n: usize, m: usize, epsilon: f64) -> usize {
    ((n as f64 / m as f64) * (1.0 / epsilon).ln())
        .ceil()
        .max(1.0) as usize
}

fn stochastic_block(
    gram: &GramMatrix,
    obj: Objective,
    fixed: &[usize],
    count: usize,
    epsilon: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let r = stochastic_sample_size(gram.n(), fixed.len() + count, epsilon);
    let mut rng = substream(seed, obj.kind.stream(), Purpose::StochasticGreedy);
    greedy_phase(gram, obj, fixed, count, true, |remaining| {
        let take = r.min(remaining.len());
        let mut picked: Vec<usize> = sample_indices(&mut rng, remaining.len(), take)
            .into_iter()
            .map(|k| remaining[k])
            .collect();
        picked.sort_unstable();
        picked
    })
}

/// Stochastic greedy: each step scores `ceil((n / m) ln(1 / epsilon))` uniformly
/// sampled candidates and adds the best one.
pub fn stochastic_greedy(
    gram: &GramMatrix,
    m: usize,
    obj: Objective,
    epsilon: f64,
    seed: u64,
) -> Result<Selection> {
    check_budget(gram, m)?;
    obj.validate()?;
    let cfg = SelectionConfig {
        m,
        algorithm: Algorithm::StochasticGreedy,
        epsilon,
        seed,
        local_search: false,
        ..SelectionConfig::default()
    };
    cfg.validate()?;
    let (indices, trace) = stochastic_block(gram, obj, &[], m, epsilon, seed)?;
    Ok(Selection::new(
        gram,
        indices,
        obj.kind.as_str(),
        trace,
        &cfg,
        obj.mu,
    ))
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let hi = a.max(b);
    hi + (-(a - b).abs()).exp().ln_1p()
}

/// Exact sampler for the `m`-DPP with kernel `L`: `P(X) ∝ det(L_X)` over
/// subsets of size `m`. The eigendecomposition and the elementary symmetric
/// polynomial table (kept in log space) are computed once.
#[derive(Debug, Clone)]
pub struct KDppSampler {
    m: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    /// `log_e[l][k]`: log of the degree-`l` elementary symmetric polynomial of
    /// the first `k` eigenvalues.
    log_e: Vec<Vec<f64>>,
}

impl KDppSampler {
    pub fn new(l: &DMatrix<f64>, m: usize) -> Result<Self> {
        let n = l.nrows();
        if m > n {
            return Err(Error::BudgetTooLarge { m, n });
        }
        if m == 0 {
            return Err(Error::InvalidConfig("m must be >= 1".into()));
        }
        let eig = SymmetricEigen::new(l.clone());
        let eigenvalues: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
        let mut log_e = vec![vec![f64::NEG_INFINITY; n + 1]; m + 1];
        log_e[0].fill(0.0);
        for l_deg in 1..=m {
            for k in 1..=n {
                log_e[l_deg][k] = log_add_exp(
                    log_e[l_deg][k - 1],
                    eigenvalues[k - 1].ln() + log_e[l_deg - 1][k - 1],
                );
            }
        }
        if log_e[m][n] == f64::NEG_INFINITY {
            return Err(Error::InvalidGram(format!("kernel has rank below m = {m}")));
        }
        Ok(Self {
            m,
            eigenvalues,
            eigenvectors: eig.eigenvectors,
            log_e,
        })
    }

    /// Sampler for `L = K + mu I`.
    pub fn from_gram(gram: &GramMatrix, m: usize, mu: f64) -> Result<Self> {
        Objective::logdet(mu).validate()?;
        let n = gram.n();
        Self::new(&(gram.entries() + DMatrix::<f64>::identity(n, n) * mu), m)
    }

    /// One draw of `m` distinct indices, in the order they were sampled.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<Vec<usize>> {
        let n = self.eigenvalues.len();

        // Phase 1: choose m eigenvectors.
        let mut chosen = Vec::with_capacity(self.m);
        let mut remaining = self.m;
        for k in (1..=n).rev() {
            if remaining == 0 {
                break;
            }
            let accept = if remaining == k {
                1.0
            } else {
                (self.eigenvalues[k - 1].ln() + self.log_e[remaining - 1][k - 1]
                    - self.log_e[remaining][k])
                    .exp()
            };
            if rng.random::<f64>() < accept {
                chosen.push(k - 1);
                remaining -= 1;
            }
        }

        // Phase 2: project out one sampled coordinate at a time.
        let mut basis: Vec<DVector<f64>> = chosen
            .iter()
            .map(|&k| self.eigenvectors.column(k).into_owned())
            .collect();
        let mut picked = Vec::with_capacity(self.m);
        let mut taken = vec![false; n];
        while !basis.is_empty() {
            let weights: Vec<f64> = (0..n)
                .map(|i| {
                    if taken[i] {
                        0.0
                    } else {
                        basis.iter().map(|v| v[i] * v[i]).sum()
                    }
                })
                .collect();
            let total: f64 = weights.iter().sum();
            if total.is_nan() || total <= DPP_RESIDUAL_FLOOR {
                return Err(Error::DegenerateBasis(total));
            }
            let mut u = rng.random::<f64>() * total;
            let mut item = n - 1;
            for (i, &w) in weights.iter().enumerate() {
                if w > 0.0 {
                    item = i;
                    if u < w {
                        break;
                    }
                    u -= w;
                }
            }
            taken[item] = true;
            picked.push(item);

            // Eliminate the column with the largest weight on `item`, make the
            // rest vanish there, then re-orthonormalize.
            let pivot = (0..basis.len())
                .max_by(|&a, &b| basis[a][item].abs().total_cmp(&basis[b][item].abs()))
                .expect("nonempty basis");
            let pv = basis.swap_remove(pivot);
            let pv_item = pv[item];
            for v in basis.iter_mut() {
                let factor = v[item] / pv_item;
                v.axpy(-factor, &pv, 1.0);
            }
            for a in 0..basis.len() {
                for b in 0..a {
                    let proj = basis[a].dot(&basis[b]);
                    let vb = basis[b].clone();
                    basis[a].axpy(-proj, &vb, 1.0);
                }
                let norm = basis[a].norm();
                if norm < DPP_RESIDUAL_FLOOR {
                    return Err(Error::DegenerateBasis(norm));
                }
                basis[a] /= norm;
            }
        }
        Ok(picked)
    }
}

fn kdpp_draw(sampler: &KDppSampler, seed: u64, stream: u64) -> Result<Vec<usize>> {
    let mut rng: ChaCha8Rng = substream(seed, 2 * stream, Purpose::Dpp);
    match sampler.sample(&mut rng) {
        Err(Error::DegenerateBasis(_)) => {
            let mut retry: ChaCha8Rng = substream(seed, 2 * stream + 1, Purpose::Dpp);
            sampler.sample(&mut retry)
        }
        other => other,
    }
}

/// One draw from the `m`-DPP with `L = K + mu I`.
pub fn sample_kdpp(gram: &GramMatrix, m: usize, mu: f64, seed: u64) -> Result<Selection> {
    check_budget(gram, m)?;
    let sampler = KDppSampler::from_gram(gram, m, mu)?;
    let indices = kdpp_draw(&sampler, seed, ObjectiveKind::Logdet.stream())?;
    let trace = vec![value_unchecked(gram, &indices, Objective::logdet(mu))?];
    let cfg = SelectionConfig {
        m,
        algorithm: Algorithm::Kdpp,
        seed,
        local_search: false,
        ..SelectionConfig::default()
    };
    Ok(Selection::new(gram, indices, "logdet", trace, &cfg, mu))
}

/// `m`-DPP draw of `count` items conditioned on containing `fixed`. The
/// conditional law on the rest is the `count`-DPP of the Schur complement of
/// `L_fixed` in `L = K + mu I`.
fn kdpp_block(
    gram: &GramMatrix,
    mu: f64,
    fixed: &[usize],
    count: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<f64>)> {
    if count == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let n = gram.n();
    let l = gram.entries() + DMatrix::<f64>::identity(n, n) * mu;
    let mut in_fixed = vec![false; n];
    for &i in fixed {
        in_fixed[i] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| !in_fixed[i]).collect();
    let block = |rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |a, b| l[(rows[a], cols[b])])
    };
    let mut conditional = block(&rest, &rest);
    if !fixed.is_empty() {
        let chol = Cholesky::new(block(fixed, fixed))
            .ok_or_else(|| Error::InvalidGram("K + mu I is not positive definite".into()))?;
        let cross = block(fixed, &rest);
        let solved = chol
            .l()
            .solve_lower_triangular(&cross)
            .expect("triangular solve");
        conditional -= solved.transpose() * solved;
        conditional = (&conditional + conditional.transpose()) * 0.5;
    }
    let sampler = KDppSampler::new(&conditional, count)?;
    let added: Vec<usize> = kdpp_draw(&sampler, seed, ObjectiveKind::Logdet.stream())?
        .into_iter()
        .map(|k| rest[k])
        .collect();
    let union: Vec<usize> = fixed.iter().chain(&added).copied().collect();
    Ok((
        added,
        vec![value_unchecked(gram, &union, Objective::logdet(mu))?],
    ))
}

/// Entropy block of `round(p m)` items followed by a log-det block filling the
/// budget, scored on the union. The entropy block is chosen greedily for the
/// `kdpp` algorithm, whose sampling law targets the determinant only.
pub fn faktual_curate(gram: &GramMatrix, cfg: &SelectionConfig, mu: f64) -> Result<Selection> {
    cfg.validate()?;
    check_budget(gram, cfg.m)?;
    let det = Objective::logdet(mu);
    det.validate()?;
    let m_e = entropy_block_size(cfg.m, cfg.p);
    let entropy = Objective::entropy();

    let (head, mut trace) = match cfg.algorithm {
        Algorithm::StochasticGreedy => {
            stochastic_block(gram, entropy, &[], m_e, cfg.epsilon, cfg.seed)?
        }
        Algorithm::GreedyLocal | Algorithm::Kdpp => greedy_block(gram, entropy, &[], m_e, cfg)?,
    };
    let (tail, tail_trace) = match cfg.algorithm {
        Algorithm::GreedyLocal => greedy_block(gram, det, &head, cfg.m - head.len(), cfg)?,
        Algorithm::StochasticGreedy => {
            stochastic_block(gram, det, &head, cfg.m - head.len(), cfg.epsilon, cfg.seed)?
        }
        Algorithm::Kdpp => kdpp_block(gram, mu, &head, cfg.m - head.len(), cfg.seed)?,
    };
    trace.extend(tail_trace);
    let indices = head.into_iter().chain(tail).collect();
    Ok(Selection::new(gram, indices, "faktual", trace, cfg, mu))
}

/// `round(p m)`, halves rounded up.
pub fn entropy_block_size(m: usize, p: f64) -> usize {
    ((p * m as f64 + 0.5).floor() as usize).min(m)
}

/// Single-objective selection with the configured algorithm.
pub fn select(gram: &GramMatrix, obj: Objective, cfg: &SelectionConfig) -> Result<Selection> {
    cfg.validate()?;
    match cfg.algorithm {
        Algorithm::GreedyLocal => greedy_local_search(gram, cfg.m, obj, cfg),
        Algorithm::StochasticGreedy => stochastic_greedy(gram, cfg.m, obj, cfg.epsilon, cfg.seed),
        Algorithm::Kdpp => sample_kdpp(gram, cfg.m, obj.mu, cfg.seed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveStrategy {
    Faktual,
    Random,
}

/// Uniform `m`-subset of `0..n`, sorted, for draw number `draw`.
pub fn random_subset(n: usize, m: usize, seed: u64, draw: u64) -> Vec<usize> {
    let mut rng = substream(seed, draw, Purpose::RandomSubset);
    let mut s = sample_indices(&mut rng, n, m).into_vec();
    s.sort_unstable();
    s
}

/// Entropy of the subset chosen at each budget. The random strategy uses
/// draw 0 of `cfg.seed`.
pub fn entropy_curve(
    gram: &GramMatrix,
    budgets: &[usize],
    strategy: CurveStrategy,
    cfg: &SelectionConfig,
    mu: f64,
) -> Result<Vec<(usize, f64)>> {
    check_budgets(gram, budgets)?;
    budgets
        .iter()
        .map(|&b| {
            let subset = match strategy {
                CurveStrategy::Faktual => faktual_curate(gram, &cfg.with_m(b), mu)?.indices,
                CurveStrategy::Random => random_subset(gram.n(), b, cfg.seed, 0),
            };
            Ok((b, objective_value(gram, &subset, Objective::entropy())?))
        })
        .collect()
}

fn check_budgets(gram: &GramMatrix, budgets: &[usize]) -> Result<()> {
    if budgets.is_empty() {
        return Err(Error::InvalidConfig("no budgets given".into()));
    }
    if let Some(&b) = budgets.iter().find(|&&b| b == 0 || b > gram.n()) {
        return Err(Error::InvalidConfig(format!(
            "budget {b} outside [1, {}]",
            gram.n()
        )));
    }
    if budgets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "budgets must be strictly increasing".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Entropy statistics over `draws` uniform subsets of size `budget`.
pub fn random_entropy_stats(
    gram: &GramMatrix,
    budget: usize,
    draws: usize,
    seed: u64,
) -> Result<RandomStats> {
    check_budgets(gram, &[budget])?;
    if draws == 0 {
        return Err(Error::InvalidConfig("random_draws must be >= 1".into()));
    }
    let values = (0..draws as u64)
        .map(|d| {
            objective_value(
                gram,
                &random_subset(gram.n(), budget, seed, d),
                Objective::entropy(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RandomStats {
        mean: values.iter().sum::<f64>() / draws as f64,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    c
}

/// Exact maximizer of `obj` over all `m`-subsets; ties go to the
/// lexicographically smallest subset.
pub fn brute_force_best_subset(
    gram: &GramMatrix,
    m: usize,
    obj: Objective,
) -> Result<(Vec<usize>, f64)> {
    let n = gram.n();
    check_budget(gram, m)?;
    if m == 0 {
        return Err(Error::InvalidSubset("empty subset".into()));
    }
    obj.validate()?;
    let count = binomial(n, m);
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::CombinatorialBudget {
            n,
            m,
            count,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut subset: Vec<usize> = (0..m).collect();
    let mut best = (subset.clone(), value_unchecked(gram, &subset, obj)?);
    // Successive combinations in lexicographic order.
    while let Some(pos) = (0..m).rev().find(|&i| subset[i] < n - m + i) {
        subset[pos] += 1;
        for i in pos + 1..m {
            subset[i] = subset[i - 1] + 1;
        }
        let v = value_unchecked(gram, &subset, obj)?;
        if v > best.1 + TIE_TOLERANCE {
            best = (subset.clone(), v);
        }
    }
    Ok(best)
}
