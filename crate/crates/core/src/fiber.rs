//! Fibers: exact enumeration for small cases and Metropolis-Hastings walks.

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basis::MarkovBasis;
use crate::error::{Error, Result};
use crate::intlin::{ones_in_row_span, Matrix};
use crate::model::{
    dyad_count, dyad_index, Family, LogFactorial, ModelSpec, Reciprocity, Table, DYAD_BACKWARD, DYAD_FORWARD,
    DYAD_MUTUAL,
};

/// All nonnegative integer `v` with `A v = A u`, in lexicographic order.
pub fn enumerate_fiber(a: &Matrix<i64>, u: &Table, cap: usize) -> Result<Vec<Table>> {
    enumerate_fiber_cells(a, u.cells(), cap)?
        .into_iter()
        .map(|cells| Table::new(u.shape().clone(), cells))
        .collect()
}

/// [`enumerate_fiber`] on raw cell vectors.
pub fn enumerate_fiber_cells(a: &Matrix<i64>, u: &[i64], cap: usize) -> Result<Vec<Vec<i64>>> {
    if cap == 0 {
        return Err(Error::Config("enumeration cap must be at least 1".into()));
    }
    if u.iter().any(|&x| x < 0) {
        return Err(Error::InvalidTable("fiber base point has a negative cell".into()));
    }
    let mut rows = a.row_vecs();
    let mut targets = a.mul_vec(u)?;
    if ones_in_row_span(a) {
        // Implied by A v = A u; makes every cell bounded.
        rows.push(vec![1; a.cols()]);
        targets.push(u.iter().sum());
    }
    Enumerator::new(rows, targets, a.cols(), cap)?.run()
}

struct Enumerator {
    n: usize,
    cap: usize,
    /// Per cell: (row, coefficient) for nonzero coefficients.
    column: Vec<Vec<(usize, i64)>>,
    /// Per cell: nonnegative rows that bound it.
    bounding: Vec<Vec<(usize, i64)>>,
    /// Per cell: rows whose last nonzero coefficient sits at this cell.
    closing: Vec<Vec<usize>>,
    remaining: Vec<i64>,
    current: Vec<i64>,
    out: Vec<Vec<i64>>,
}

impl Enumerator {
    fn new(rows: Vec<Vec<i64>>, targets: Vec<i64>, n: usize, cap: usize) -> Result<Self> {
        let mut column = vec![Vec::new(); n];
        let mut bounding = vec![Vec::new(); n];
        let mut closing = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            let nonnegative = row.iter().all(|&x| x >= 0);
            for (c, &x) in row.iter().enumerate() {
                if x != 0 {
                    column[c].push((r, x));
                    if nonnegative {
                        bounding[c].push((r, x));
                    }
                }
            }
            if let Some(last) = row.iter().rposition(|&x| x != 0) {
                closing[last].push(r);
            }
        }
        if let Some(cell) = bounding.iter().position(Vec::is_empty) {
            return Err(Error::UnboundedFiber { cell });
        }
        Ok(Self {
            n,
            cap,
            column,
            bounding,
            closing,
            remaining: targets,
            current: vec![0; n],
            out: Vec::new(),
        })
    }

    fn run(mut self) -> Result<Vec<Vec<i64>>> {
        self.descend(0)?;
        Ok(self.out)
    }

    fn descend(&mut self, c: usize) -> Result<()> {
        if c == self.n {
            if self.out.len() == self.cap {
                return Err(Error::EnumerationCap { cap: self.cap });
            }
            self.out.push(self.current.clone());
            return Ok(());
        }
        let upper = self.bounding[c]
            .iter()
            .map(|&(r, x)| self.remaining[r].div_euclid(x))
            .min()
            .expect("every cell has a bounding row");
        if upper < 0 {
            return Ok(());
        }
        // A row closing at this cell fixes the value.
        let mut forced = None;
        for &r in &self.closing[c] {
            let x = self.column[c]
                .iter()
                .find(|&&(row, _)| row == r)
                .map(|&(_, x)| x)
                .unwrap();
            if self.remaining[r] % x != 0 {
                return Ok(());
            }
            let v = self.remaining[r] / x;
            match forced {
                Some(f) if f != v => return Ok(()),
                _ => forced = Some(v),
            }
        }
        let (lo, hi) = match forced {
            Some(v) if v < 0 || v > upper => return Ok(()),
            Some(v) => (v, v),
            None => (0, upper),
        };
        for v in lo..=hi {
            for &(r, x) in &self.column[c] {
                self.remaining[r] -= x * v;
            }
            self.current[c] = v;
            if self.closing[c].iter().all(|&r| self.remaining[r] == 0) {
                self.descend(c + 1)?;
            }
            for &(r, x) in &self.column[c] {
                self.remaining[r] += x * v;
            }
        }
        self.current[c] = 0;
        Ok(())
    }
}

/// Stationary distribution targeted by the walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Uniform,
    /// Weights proportional to `1 / ∏ v_c!`.
    Hypergeometric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProposalKind {
    Basis,
    DynamicP1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkConfig {
    pub steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub target: Target,
    pub proposal: ProposalKind,
}

impl WalkConfig {
    /// `steps` total steps with the default 10% burn-in and no thinning.
    pub fn new(steps: usize, seed: u64) -> Self {
        Self {
            steps,
            burn_in: steps / 10,
            thin: 1,
            seed,
            target: Target::Hypergeometric,
            proposal: ProposalKind::Basis,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if self.burn_in > self.steps {
            return Err(Error::Config(format!(
                "burn-in ({}) exceeds the number of steps ({})",
                self.burn_in, self.steps
            )));
        }
        Ok(())
    }

    /// Number of states a chain records.
    pub fn recorded(&self) -> usize {
        (self.steps - self.burn_in).div_ceil(self.thin)
    }
}

/// The generator for chain `chain` of a run seeded with `seed`: ChaCha8
/// seeded through `seed_from_u64(seed)`, on stream number `chain`.
pub fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

/// Sparse move: `(cell, delta)` pairs.
pub type SparseMove = Vec<(usize, i64)>;

/// Source of symmetric proposals for the walk.
pub trait Proposer {
    /// Draws a move to add to `current`, or `None` when the draw has nothing
    /// applicable to offer.
    fn propose(&mut self, current: &[i64], rng: &mut ChaCha8Rng) -> Option<SparseMove>;
}

/// Uniform move from a fixed basis with a uniform random sign.
#[derive(Clone, Debug)]
pub struct BasisProposer {
    moves: Vec<SparseMove>,
}

impl BasisProposer {
    pub fn new(basis: &MarkovBasis) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::Config("the walk needs a nonempty basis".into()));
        }
        let moves = basis
            .moves()
            .iter()
            .map(|m| {
                m.vector()
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0)
                    .map(|(i, &x)| (i, x))
                    .collect()
            })
            .collect();
        Ok(Self { moves })
    }
}

impl Proposer for BasisProposer {
    fn propose(&mut self, _current: &[i64], rng: &mut ChaCha8Rng) -> Option<SparseMove> {
        let m = &self.moves[rng.gen_range(0..self.moves.len())];
        if rng.gen::<bool>() {
            Some(m.clone())
        } else {
            Some(m.iter().map(|&(i, x)| (i, -x)).collect())
        }
    }
}

/// Data-dependent moves for the p1 model.
///
/// Each draw picks a node set `W` uniformly among sets of size three or four
/// (each size with probability one half when there are at least four nodes)
/// and proposes, uniformly, one of the other states of the dyads inside `W`
/// that keep every sufficient statistic fixed. Edge swaps across two dyads
/// (four nodes), exchanges of a mutual dyad against two one-way edges, and
/// three-cycle reversals are all of this form. Since the candidate set only
/// depends on the state outside `W`, the proposal is symmetric.
#[derive(Clone, Debug)]
pub struct DynamicP1 {
    n: usize,
    reciprocity: Reciprocity,
    /// Sparse design columns, for the per-move kernel check.
    columns: Vec<Vec<(usize, i64)>>,
    rows: usize,
}

impl DynamicP1 {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let Family::P1 { nodes, reciprocity } = *spec.family() else {
            return Err(Error::Config("dynamic proposals need a p1 model".into()));
        };
        let a = spec.design();
        let columns = (0..a.cols())
            .map(|c| {
                (0..a.rows())
                    .filter(|&r| *a.get(r, c) != 0)
                    .map(|r| (r, *a.get(r, c)))
                    .collect()
            })
            .collect();
        Ok(Self {
            n: nodes,
            reciprocity,
            columns,
            rows: a.rows(),
        })
    }

    /// Per-node (out, in, mutual) contributions of dyad `(i, j)` in `state`,
    /// as deltas for `i` and `j`.
    fn contributions(state: usize) -> [[i64; 3]; 2] {
        match state {
            DYAD_FORWARD => [[1, 0, 0], [0, 1, 0]],
            DYAD_BACKWARD => [[0, 1, 0], [1, 0, 0]],
            DYAD_MUTUAL => [[1, 1, 1], [1, 1, 1]],
            _ => [[0, 0, 0], [0, 0, 0]],
        }
    }

    fn in_kernel(&self, m: &SparseMove) -> bool {
        let mut acc = vec![0i64; self.rows];
        for &(c, x) in m {
            for &(r, a) in &self.columns[c] {
                acc[r] += a * x;
            }
        }
        acc.iter().all(|&x| x == 0)
    }
}

struct LocalSearch<'a> {
    dyads: &'a [(usize, usize, usize)],
    /// Target (out, in, mutual) per local node.
    target: &'a [[i64; 3]],
    mutual_total: i64,
    reciprocity: Reciprocity,
    tally: Vec<[i64; 3]>,
    mutual: i64,
    states: Vec<usize>,
    found: Vec<Vec<usize>>,
}

impl LocalSearch<'_> {
    fn descend(&mut self, k: usize, last_use: &[usize]) {
        if k == self.dyads.len() {
            let ok = match self.reciprocity {
                Reciprocity::Zero => true,
                Reciprocity::Constant => self.mutual == self.mutual_total,
                Reciprocity::Differential => true,
            };
            if ok {
                self.found.push(self.states.clone());
            }
            return;
        }
        let (_, a, b) = self.dyads[k];
        for state in 0..4 {
            let [ca, cb] = DynamicP1::contributions(state);
            for q in 0..3 {
                self.tally[a][q] += ca[q];
                self.tally[b][q] += cb[q];
            }
            self.mutual += i64::from(state == DYAD_MUTUAL);
            let checks = if self.reciprocity == Reciprocity::Differential {
                3
            } else {
                2
            };
            let feasible = [a, b].iter().all(|&x| {
                (0..checks).all(|q| {
                    if last_use[x] == k {
                        self.tally[x][q] == self.target[x][q]
                    } else {
                        self.tally[x][q] <= self.target[x][q]
                    }
                })
            });
            if feasible {
                self.states[k] = state;
                self.descend(k + 1, last_use);
            }
            self.mutual -= i64::from(state == DYAD_MUTUAL);
            for q in 0..3 {
                self.tally[a][q] -= ca[q];
                self.tally[b][q] -= cb[q];
            }
        }
    }
}

impl Proposer for DynamicP1 {
    fn propose(&mut self, current: &[i64], rng: &mut ChaCha8Rng) -> Option<SparseMove> {
        let n = self.n;
        let size = if n >= 4 && rng.gen::<bool>() { 4 } else { 3 };
        let mut nodes = sample(rng, n, size).into_vec();
        nodes.sort_unstable();

        // Local indices: position in `nodes`.
        let mut dyads = Vec::new();
        for a in 0..size {
            for b in (a + 1)..size {
                dyads.push((dyad_index(n, nodes[a], nodes[b]), a, b));
            }
        }
        let state_of = |d: usize| (0..4).find(|&s| current[4 * d + s] == 1).expect("valid dyadic table");
        let old: Vec<usize> = dyads.iter().map(|&(d, _, _)| state_of(d)).collect();

        let mut target = vec![[0i64; 3]; size];
        let mut mutual_total = 0;
        for (&(_, a, b), &s) in dyads.iter().zip(&old) {
            let [ca, cb] = Self::contributions(s);
            for q in 0..3 {
                target[a][q] += ca[q];
                target[b][q] += cb[q];
            }
            mutual_total += i64::from(s == DYAD_MUTUAL);
        }
        let mut last_use = vec![0usize; size];
        for (k, &(_, a, b)) in dyads.iter().enumerate() {
            last_use[a] = k;
            last_use[b] = k;
        }
        let mut search = LocalSearch {
            dyads: &dyads,
            target: &target,
            mutual_total,
            reciprocity: self.reciprocity,
            tally: vec![[0; 3]; size],
            mutual: 0,
            states: vec![0; dyads.len()],
            found: Vec::new(),
        };
        search.descend(0, &last_use);
        let alternatives: Vec<Vec<usize>> = search.found.into_iter().filter(|s| *s != old).collect();
        if alternatives.is_empty() {
            return None;
        }
        let pick = &alternatives[rng.gen_range(0..alternatives.len())];
        let mut m = SparseMove::new();
        for ((&(d, _, _), &from), &to) in dyads.iter().zip(&old).zip(pick) {
            if from != to {
                m.push((4 * d + from, -1));
                m.push((4 * d + to, 1));
            }
        }
        assert!(self.in_kernel(&m), "dynamic p1 move left the fiber");
        debug_assert!(m.iter().all(|&(c, x)| current[c] + x >= 0));
        Some(m)
    }
}

/// One step of dynamic proposal from `current`, exposed for inspection.
pub fn dynamic_p1_proposer(current: &Table, spec: &ModelSpec, rng: &mut ChaCha8Rng) -> Result<Option<SparseMove>> {
    let mut p = DynamicP1::new(spec)?;
    if current.cells().len() != 4 * dyad_count(p.n) {
        return Err(Error::DimensionMismatch {
            expected: 4 * dyad_count(p.n),
            found: current.cells().len(),
        });
    }
    Ok(p.propose(current.cells(), rng))
}

/// Counters of a finished chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChainStats {
    pub proposals: u64,
    pub accepted: u64,
}

/// Runs a Metropolis-Hastings chain from `u0`, calling `record` on every
/// post burn-in, thinned state.
///
/// Each step draws a proposal; a missing proposal or one leaving the
/// nonnegative orthant leaves the chain where it is, and the step still
/// counts.
pub fn run_chain<P: Proposer>(
    proposer: &mut P,
    u0: &[i64],
    cfg: &WalkConfig,
    rng: &mut ChaCha8Rng,
    mut record: impl FnMut(&[i64]),
) -> Result<ChainStats> {
    cfg.validate()?;
    let mut state = u0.to_vec();
    let mut log_fact = LogFactorial::new();
    let mut stats = ChainStats::default();
    for step in 0..cfg.steps {
        stats.proposals += 1;
        if let Some(m) = proposer.propose(&state, rng) {
            if m.iter().all(|&(c, x)| state[c] + x >= 0) {
                let accept = match cfg.target {
                    Target::Uniform => true,
                    Target::Hypergeometric => {
                        let log_ratio: f64 = m
                            .iter()
                            .map(|&(c, x)| log_fact.get(state[c]) - log_fact.get(state[c] + x))
                            .sum();
                        log_ratio >= 0.0 || rng.gen::<f64>() < log_ratio.exp()
                    }
                };
                if accept {
                    for &(c, x) in &m {
                        state[c] += x;
                    }
                    stats.accepted += 1;
                }
            }
        }
        if step >= cfg.burn_in && (step - cfg.burn_in).is_multiple_of(cfg.thin) {
            record(&state);
        }
    }
    Ok(stats)
}

/// Recorded states of a walk with its counters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkSample {
    pub states: Vec<Vec<i64>>,
    pub acceptance_count: u64,
    pub proposal_count: u64,
}

/// Builds the proposer named by `cfg.proposal`.
pub fn make_proposer(spec: &ModelSpec, basis: Option<&MarkovBasis>, cfg: &WalkConfig) -> Result<Box<dyn ProposerBox>> {
    match cfg.proposal {
        ProposalKind::Basis => {
            let basis = basis.ok_or_else(|| Error::Config("basis proposals need a basis".into()))?;
            if basis.design() != spec.design() {
                return Err(Error::Config("basis belongs to a different design matrix".into()));
            }
            Ok(Box::new(BasisProposer::new(basis)?))
        }
        ProposalKind::DynamicP1 => Ok(Box::new(DynamicP1::new(spec)?)),
    }
}

/// Object-safe proposer, so callers can pick one at run time.
pub trait ProposerBox: Send {
    fn propose_boxed(&mut self, current: &[i64], rng: &mut ChaCha8Rng) -> Option<SparseMove>;
}

impl<P: Proposer + Send> ProposerBox for P {
    fn propose_boxed(&mut self, current: &[i64], rng: &mut ChaCha8Rng) -> Option<SparseMove> {
        self.propose(current, rng)
    }
}

impl Proposer for Box<dyn ProposerBox> {
    fn propose(&mut self, current: &[i64], rng: &mut ChaCha8Rng) -> Option<SparseMove> {
        self.as_mut().propose_boxed(current, rng)
    }
}

/// Walks the fiber of `u0` and returns every recorded state.
pub fn walk(spec: &ModelSpec, basis: Option<&MarkovBasis>, u0: &Table, cfg: &WalkConfig) -> Result<WalkSample> {
    if u0.cells().len() != spec.cell_count() {
        return Err(Error::DimensionMismatch {
            expected: spec.cell_count(),
            found: u0.cells().len(),
        });
    }
    let mut proposer = make_proposer(spec, basis, cfg)?;
    let mut rng = chain_rng(cfg.seed, 0);
    let mut states = Vec::with_capacity(cfg.recorded());
    let stats = run_chain(&mut proposer, u0.cells(), cfg, &mut rng, |s| states.push(s.to_vec()))?;
    Ok(WalkSample {
        states,
        acceptance_count: stats.accepted,
        proposal_count: stats.proposals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{independence_basis, MarkovBasis};
    use crate::model::{graph_to_table, independence_design, p1_design, sufficient_statistics, Graph};

    #[test]
    fn enumerate_unit_margins() {
        let spec = independence_design(2, 2).unwrap();
        let f = enumerate_fiber_cells(spec.design(), &[1, 0, 0, 1], 10).unwrap();
        assert_eq!(f, vec![vec![0, 1, 1, 0], vec![1, 0, 0, 1]]);
    }

    #[test]
    fn enumerate_diagonal_two() {
        let spec = independence_design(2, 2).unwrap();
        let f = enumerate_fiber_cells(spec.design(), &[2, 0, 0, 2], 10).unwrap();
        assert_eq!(f, vec![vec![0, 2, 2, 0], vec![1, 1, 1, 1], vec![2, 0, 0, 2]]);
    }

    #[test]
    fn enumerate_three_cycle_fiber() {
        let spec = p1_design(3, Reciprocity::Constant).unwrap();
        let cycle = graph_to_table(&Graph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap());
        let reversed = graph_to_table(&Graph::new(3, vec![(1, 0), (2, 1), (0, 2)]).unwrap());
        let f = enumerate_fiber(spec.design(), &cycle, 100).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f.contains(&cycle) && f.contains(&reversed));
    }

    #[test]
    fn enumerate_cap_and_unbounded() {
        let spec = independence_design(2, 2).unwrap();
        assert_eq!(
            enumerate_fiber_cells(spec.design(), &[1, 0, 0, 1], 1),
            Err(Error::EnumerationCap { cap: 1 })
        );
        let a = Matrix::from_rows(vec![vec![1, -1]]).unwrap();
        assert_eq!(
            enumerate_fiber_cells(&a, &[1, 1], 10),
            Err(Error::UnboundedFiber { cell: 0 })
        );
    }

    #[test]
    fn enumerate_matches_brute_force() {
        // 2x3 independence with margins (3,2)/(2,2,1).
        let spec = independence_design(2, 3).unwrap();
        let u = [1, 1, 1, 1, 1, 0];
        let t = spec.design().mul_vec(&u).unwrap();
        let mut brute = Vec::new();
        for code in 0..4usize.pow(6) {
            let v: Vec<i64> = (0..6).map(|k| ((code / 4usize.pow(5 - k)) % 4) as i64).collect();
            if spec.design().mul_vec(&v).unwrap() == t {
                brute.push(v);
            }
        }
        assert_eq!(enumerate_fiber_cells(spec.design(), &u, 1000).unwrap(), brute);
    }

    #[test]
    fn two_state_chain_is_balanced() {
        let spec = independence_design(2, 2).unwrap();
        let basis = independence_basis(2, 2).unwrap();
        let u = spec.table(vec![1, 0, 0, 1]).unwrap();
        for seed in [1, 2, 3] {
            let cfg = WalkConfig {
                steps: 10_000,
                burn_in: 0,
                thin: 1,
                seed,
                target: Target::Uniform,
                proposal: ProposalKind::Basis,
            };
            let s = walk(&spec, Some(&basis), &u, &cfg).unwrap();
            let freq = s.states.iter().filter(|v| v[0] == 1).count() as f64 / s.states.len() as f64;
            assert!((0.46..=0.54).contains(&freq), "seed {seed}: {freq}");
        }
    }

    #[test]
    fn degenerate_walk_records_nothing() {
        let spec = independence_design(2, 2).unwrap();
        let basis = independence_basis(2, 2).unwrap();
        let u = spec.table(vec![1, 0, 0, 1]).unwrap();
        let cfg = WalkConfig {
            steps: 50,
            burn_in: 50,
            ..WalkConfig::new(50, 9)
        };
        let s = walk(&spec, Some(&basis), &u, &cfg).unwrap();
        assert!(s.states.is_empty());
        assert_eq!(s.proposal_count, 50);
        assert!(s.acceptance_count > 0);
    }

    #[test]
    fn corner_move_is_rejected_at_sparse_corner_table() {
        let spec = independence_design(3, 3).unwrap();
        let basis = MarkovBasis::from_vectors(spec.design().clone(), vec![vec![1, 0, -1, 0, 0, 0, -1, 0, 1]]).unwrap();
        let u = spec.table(vec![2, 3, 4, 0, 3, 4, 0, 0, 1]).unwrap();
        let cfg = WalkConfig {
            burn_in: 0,
            target: Target::Uniform,
            ..WalkConfig::new(200, 5)
        };
        let s = walk(&spec, Some(&basis), &u, &cfg).unwrap();
        // +move is never applicable at u; -move is, so the chain alternates
        // between u and u - move only.
        let minus: Vec<i64> = vec![1, 3, 5, 0, 3, 4, 1, 0, 0];
        assert!(s.states.iter().all(|v| v == u.cells() || *v == minus));
    }

    #[test]
    fn empty_basis_is_a_config_error() {
        let spec = independence_design(2, 2).unwrap();
        let empty = MarkovBasis::new(spec.design().clone(), vec![]).unwrap();
        let u = spec.table(vec![1, 0, 0, 1]).unwrap();
        assert!(matches!(
            walk(&spec, Some(&empty), &u, &WalkConfig::new(10, 1)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn walk_is_deterministic_and_stays_on_fiber() {
        let spec = independence_design(3, 3).unwrap();
        let basis = independence_basis(3, 3).unwrap();
        let u = spec.table(vec![2, 3, 4, 0, 3, 4, 0, 0, 1]).unwrap();
        let cfg = WalkConfig::new(5_000, 42);
        let a = walk(&spec, Some(&basis), &u, &cfg).unwrap();
        let b = walk(&spec, Some(&basis), &u, &cfg).unwrap();
        assert_eq!(a, b);
        let t = sufficient_statistics(&spec, &u).unwrap();
        for v in &a.states {
            assert!(v.iter().all(|&x| x >= 0));
            assert_eq!(spec.design().mul_vec(v).unwrap(), t);
        }
        assert_eq!(a.states.len(), cfg.recorded());
    }

    #[test]
    fn dynamic_three_cycle_reverses() {
        let spec = p1_design(3, Reciprocity::Constant).unwrap();
        let cycle = graph_to_table(&Graph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap());
        let reversed = graph_to_table(&Graph::new(3, vec![(1, 0), (2, 1), (0, 2)]).unwrap());
        let mut rng = chain_rng(3, 0);
        let m = dynamic_p1_proposer(&cycle, &spec, &mut rng).unwrap().expect("a move");
        let mut next = cycle.cells().to_vec();
        for (c, x) in m {
            next[c] += x;
        }
        assert_eq!(next, reversed.cells());
    }

    #[test]
    fn dynamic_empty_graph_has_no_moves() {
        let spec = p1_design(5, Reciprocity::Zero).unwrap();
        let empty = graph_to_table(&Graph::new(5, vec![]).unwrap());
        let mut rng = chain_rng(1, 0);
        for _ in 0..200 {
            assert!(dynamic_p1_proposer(&empty, &spec, &mut rng).unwrap().is_none());
        }
    }

    #[test]
    fn dynamic_swap_on_disjoint_edges() {
        let spec = p1_design(4, Reciprocity::Zero).unwrap();
        let g = graph_to_table(&Graph::new(4, vec![(0, 1), (2, 3)]).unwrap());
        let swapped = graph_to_table(&Graph::new(4, vec![(0, 3), (2, 1)]).unwrap());
        let mut rng = chain_rng(8, 0);
        let mut seen = false;
        for _ in 0..200 {
            if let Some(m) = dynamic_p1_proposer(&g, &spec, &mut rng).unwrap() {
                let mut next = g.cells().to_vec();
                for &(c, x) in &m {
                    next[c] += x;
                }
                assert_eq!(
                    spec.design().mul_vec(&next).unwrap(),
                    spec.design().mul_vec(g.cells()).unwrap()
                );
                seen |= next == swapped.cells();
            }
        }
        assert!(seen);
    }

    #[test]
    fn dynamic_requires_p1() {
        let spec = independence_design(2, 2).unwrap();
        assert!(DynamicP1::new(&spec).is_err());
    }
}
