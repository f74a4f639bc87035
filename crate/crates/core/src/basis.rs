//! Markov bases: closed forms, computation from the toric ideal, and checks.
//!
//! A Markov basis of `A` is computed from a lattice basis of `ker_Z(A)` by
//! saturating the lattice basis ideal one variable at a time. Each saturation
//! step is a Buchberger completion of binomials `x^{b+} - x^{b-}` under
//! graded reverse lexicographic order with the saturated variable last. The
//! generating set that comes out is then thinned by dropping every move whose
//! endpoints are already connected by the moves kept so far.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fiber::enumerate_fiber_cells;
use crate::intlin::{in_kernel, lattice_kernel_basis, lll_reduce, Matrix};

/// A nonzero integer kernel vector `b = b⁺ - b⁻`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move(Vec<i64>);

impl Move {
    pub fn new(vector: Vec<i64>) -> Result<Self> {
        if vector.iter().all(|&x| x == 0) {
            return Err(Error::InvalidTable("a move must be nonzero".into()));
        }
        Ok(Self(vector))
    }

    pub fn vector(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `b⁺ = max(b, 0)` componentwise.
    pub fn positive_part(&self) -> Vec<i64> {
        self.0.iter().map(|&x| x.max(0)).collect()
    }

    /// `b⁻ = max(-b, 0)` componentwise.
    pub fn negative_part(&self) -> Vec<i64> {
        self.0.iter().map(|&x| (-x).max(0)).collect()
    }

    /// Total degree of the binomial `x^{b+} - x^{b-}`.
    pub fn degree(&self) -> i64 {
        let pos: i64 = self.0.iter().filter(|&&x| x > 0).sum();
        let neg: i64 = -self.0.iter().filter(|&&x| x < 0).sum::<i64>();
        pos.max(neg)
    }

    /// The representative of `±b` whose first nonzero entry is positive.
    pub fn canonical(&self) -> Self {
        if self.0.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
            self.negated()
        } else {
            self.clone()
        }
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|&x| -x).collect())
    }

    /// Whether `table + self` stays nonnegative.
    pub fn applicable(&self, table: &[i64]) -> bool {
        table.iter().zip(&self.0).all(|(t, b)| t + b >= 0)
    }
}

/// A set of moves for a design matrix, stored in canonical form: one
/// representative per `±` class, first nonzero entry positive, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovBasis {
    design: Matrix<i64>,
    moves: Vec<Move>,
}

impl MarkovBasis {
    pub fn new(design: Matrix<i64>, moves: Vec<Move>) -> Result<Self> {
        let mut canon = Vec::with_capacity(moves.len());
        for m in moves {
            if m.len() != design.cols() {
                return Err(Error::DimensionMismatch {
                    expected: design.cols(),
                    found: m.len(),
                });
            }
            if !in_kernel(&design, m.vector())? {
                return Err(Error::ModelInvalid(format!(
                    "move {:?} is not in the kernel of the design matrix",
                    m.vector()
                )));
            }
            canon.push(m.canonical());
        }
        canon.sort();
        canon.dedup();
        Ok(Self { design, moves: canon })
    }

    pub fn from_vectors(design: Matrix<i64>, vectors: Vec<Vec<i64>>) -> Result<Self> {
        let moves = vectors.into_iter().map(Move::new).collect::<Result<Vec<_>>>()?;
        Self::new(design, moves)
    }

    pub fn design(&self) -> &Matrix<i64> {
        &self.design
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn max_degree(&self) -> i64 {
        self.moves.iter().map(Move::degree).max().unwrap_or(0)
    }
}

/// The `C(d1,2)·C(d2,2)` basic moves of the independence model: for
/// `i < k`, `j < l`, `+1` at `(i,j)` and `(k,l)`, `-1` at `(i,l)` and `(k,j)`.
pub fn independence_basis(d1: usize, d2: usize) -> Result<MarkovBasis> {
    let spec = crate::model::independence_design(d1, d2)?;
    let mut moves = Vec::new();
    for i in 0..d1 {
        for k in (i + 1)..d1 {
            for j in 0..d2 {
                for l in (j + 1)..d2 {
                    let mut v = vec![0i64; d1 * d2];
                    v[i * d2 + j] = 1;
                    v[k * d2 + l] = 1;
                    v[i * d2 + l] = -1;
                    v[k * d2 + j] = -1;
                    moves.push(Move::new(v)?);
                }
            }
        }
    }
    MarkovBasis::new(spec.design().clone(), moves)
}

/// Resource limits for binomial completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompletionCaps {
    /// Maximum number of binomials added to the working set, over the whole
    /// computation.
    pub max_binomials: usize,
    /// Maximum total degree of any binomial in the working set.
    pub max_degree: i64,
    /// Maximum number of S-pairs waiting to be processed.
    pub max_pending_pairs: usize,
}

impl Default for CompletionCaps {
    fn default() -> Self {
        Self {
            max_binomials: 100_000,
            max_degree: 40,
            max_pending_pairs: 20_000_000,
        }
    }
}

/// Graded reverse lexicographic order with a given variable significance.
#[derive(Clone, Debug)]
pub struct TermOrder {
    /// Variables from least to most significant.
    least_first: Vec<usize>,
}

impl TermOrder {
    /// Natural variable order, the last variable least significant.
    pub fn grevlex(n: usize) -> Self {
        Self {
            least_first: (0..n).rev().collect(),
        }
    }

    /// Natural order with `var` moved to the least significant position.
    pub fn grevlex_last(n: usize, var: usize) -> Self {
        let mut least_first = vec![var];
        least_first.extend((0..n).rev().filter(|&v| v != var));
        Self { least_first }
    }

    /// Orients `v` in place so that `x^{v+}` is the leading monomial.
    fn orient(&self, v: &mut [i64]) {
        let s: i64 = v.iter().sum();
        let flip = match s.signum() {
            -1 => true,
            1 => false,
            _ => self
                .least_first
                .iter()
                .map(|&k| v[k])
                .find(|&x| x != 0)
                .is_some_and(|x| x > 0),
        };
        if flip {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

#[derive(Clone, Debug)]
struct Binomial {
    v: Vec<i64>,
    lead_mask: Vec<u64>,
    lead_degree: i64,
    degree: i64,
}

impl Binomial {
    fn new(v: Vec<i64>) -> Self {
        let mut lead_mask = vec![0u64; v.len().div_ceil(64)];
        let mut pos = 0;
        let mut neg = 0;
        for (i, &x) in v.iter().enumerate() {
            if x > 0 {
                lead_mask[i / 64] |= 1 << (i % 64);
                pos += x;
            } else {
                neg -= x;
            }
        }
        Self {
            v,
            lead_mask,
            lead_degree: pos,
            degree: pos.max(neg),
        }
    }

    /// Whether this lead monomial divides `x^{w+}`.
    fn lead_divides(&self, w: &[i64], w_mask: &[u64]) -> bool {
        self.lead_mask.iter().zip(w_mask).all(|(a, b)| a & !b == 0)
            && self.v.iter().zip(w).all(|(&g, &x)| g <= 0 || g <= x)
    }

    fn leads_coprime(&self, other: &Binomial) -> bool {
        self.lead_mask.iter().zip(&other.lead_mask).all(|(a, b)| a & b == 0)
    }

    fn lcm_degree(&self, other: &Binomial) -> i64 {
        self.v.iter().zip(&other.v).map(|(&a, &b)| a.max(b).max(0)).sum()
    }
}

fn positive_mask(v: &[i64]) -> Vec<u64> {
    let mut mask = vec![0u64; v.len().div_ceil(64)];
    for (i, &x) in v.iter().enumerate() {
        if x > 0 {
            mask[i / 64] |= 1 << (i % 64);
        }
    }
    mask
}

struct Completion<'a> {
    order: &'a TermOrder,
    caps: CompletionCaps,
    elems: Vec<Binomial>,
    pairs: BinaryHeap<Reverse<(u32, u32, u32)>>,
    pending: HashSet<(u32, u32)>,
    generated: &'a mut usize,
}

impl<'a> Completion<'a> {
    fn new(order: &'a TermOrder, caps: CompletionCaps, generated: &'a mut usize) -> Self {
        Self {
            order,
            caps,
            elems: Vec::new(),
            pairs: BinaryHeap::new(),
            pending: HashSet::new(),
            generated,
        }
    }

    /// Reduces the leading term of `v` until no element divides it.
    fn reduce(&self, mut v: Vec<i64>) -> Option<Vec<i64>> {
        self.order.orient(&mut v);
        loop {
            if v.iter().all(|&x| x == 0) {
                return None;
            }
            let mask = positive_mask(&v);
            let Some(g) = self.elems.iter().find(|g| g.lead_divides(&v, &mask)) else {
                return Some(v);
            };
            v.iter_mut().zip(&g.v).for_each(|(x, y)| *x -= y);
            self.order.orient(&mut v);
        }
    }

    fn insert(&mut self, v: Vec<i64>) -> Result<()> {
        let b = Binomial::new(v);
        if b.degree > self.caps.max_degree {
            return Err(Error::CompletionOverflow {
                what: "degree",
                cap: self.caps.max_degree as usize,
            });
        }
        *self.generated += 1;
        if *self.generated > self.caps.max_binomials {
            return Err(Error::CompletionOverflow {
                what: "binomial count",
                cap: self.caps.max_binomials,
            });
        }
        let j = self.elems.len() as u32;
        for (i, g) in self.elems.iter().enumerate() {
            if !g.leads_coprime(&b) {
                self.pairs.push(Reverse((g.lcm_degree(&b) as u32, i as u32, j)));
                self.pending.insert((i as u32, j));
            }
        }
        if self.pairs.len() > self.caps.max_pending_pairs {
            return Err(Error::CompletionOverflow {
                what: "pending pair count",
                cap: self.caps.max_pending_pairs,
            });
        }
        self.elems.push(b);
        Ok(())
    }

    fn run(mut self, generators: impl IntoIterator<Item = Vec<i64>>) -> Result<Vec<Vec<i64>>> {
        for g in generators {
            if let Some(r) = self.reduce(g) {
                self.insert(r)?;
            }
        }
        while let Some(Reverse((_, i, j))) = self.pairs.pop() {
            self.pending.remove(&(i, j));
            let (i, j) = (i as usize, j as usize);
            if self.chain_criterion(i, j) {
                continue;
            }
            let s: Vec<i64> = self.elems[i]
                .v
                .iter()
                .zip(&self.elems[j].v)
                .map(|(a, b)| a - b)
                .collect();
            if let Some(r) = self.reduce(s) {
                self.insert(r)?;
            }
        }
        Ok(self.minimal())
    }

    /// Buchberger's chain criterion: the pair is redundant when some other
    /// leading monomial divides the lcm of theirs and both of its pairs with
    /// `i` and `j` are already treated.
    fn chain_criterion(&self, i: usize, j: usize) -> bool {
        let (gi, gj) = (&self.elems[i], &self.elems[j]);
        let treated = |a: usize, b: usize| !self.pending.contains(&(a.min(b) as u32, a.max(b) as u32));
        self.elems.iter().enumerate().any(|(k, gk)| {
            k != i
                && k != j
                && gk
                    .lead_mask
                    .iter()
                    .zip(gi.lead_mask.iter().zip(&gj.lead_mask))
                    .all(|(m, (a, b))| m & !(a | b) == 0)
                && gk
                    .v
                    .iter()
                    .zip(gi.v.iter().zip(&gj.v))
                    .all(|(&c, (&a, &b))| c <= 0 || c <= a.max(b))
                && treated(i, k)
                && treated(j, k)
        })
    }

    /// Drops elements whose leading monomial is divisible by another's.
    fn minimal(self) -> Vec<Vec<i64>> {
        let elems = &self.elems;
        let keep: Vec<bool> = elems
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let mask = &g.lead_mask;
                !elems
                    .iter()
                    .enumerate()
                    .any(|(j, h)| j != i && h.lead_divides(&g.v, mask) && (h.lead_degree < g.lead_degree || j < i))
            })
            .collect();
        elems
            .iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(g, _)| g.v.clone())
            .collect()
    }
}

/// Buchberger completion of binomials given as kernel vectors of `a`.
///
/// The result is a minimal Gröbner basis (in binomial-vector form) under
/// graded reverse lexicographic order on the natural variable order: every
/// S-vector of two output elements reduces to zero, and no leading monomial
/// divides another.
pub fn binomial_completion(generators: &[Move], a: &Matrix<i64>, caps: CompletionCaps) -> Result<Vec<Move>> {
    complete_with_order(generators, a, &TermOrder::grevlex(a.cols()), caps)
}

/// [`binomial_completion`] under an explicit term order.
pub fn complete_with_order(
    generators: &[Move],
    a: &Matrix<i64>,
    order: &TermOrder,
    caps: CompletionCaps,
) -> Result<Vec<Move>> {
    for g in generators {
        if g.len() != a.cols() {
            return Err(Error::DimensionMismatch {
                expected: a.cols(),
                found: g.len(),
            });
        }
        if !in_kernel(a, g.vector())? {
            return Err(Error::ModelInvalid(format!(
                "generator {:?} is not in ker(A)",
                g.vector()
            )));
        }
    }
    let mut generated = 0;
    let out = Completion::new(order, caps, &mut generated).run(generators.iter().map(|g| g.vector().to_vec()))?;
    out.into_iter().map(Move::new).collect()
}

/// Options for [`toric_markov_basis_with`].
#[derive(Clone, Copy, Debug)]
pub struct ToricOptions {
    pub caps: CompletionCaps,
    /// Drop moves whose endpoints are connected by the moves kept so far.
    pub prune: bool,
    /// Node budget for each connectivity search during pruning; a move whose
    /// search exhausts the budget is kept.
    pub prune_budget: usize,
}

impl Default for ToricOptions {
    fn default() -> Self {
        Self {
            caps: CompletionCaps::default(),
            prune: true,
            prune_budget: 20_000,
        }
    }
}

/// A Markov basis of `a`, i.e. a generating set of its toric ideal.
pub fn toric_markov_basis(a: &Matrix<i64>) -> Result<MarkovBasis> {
    toric_markov_basis_with(a, ToricOptions::default())
}

pub fn toric_markov_basis_with(a: &Matrix<i64>, opts: ToricOptions) -> Result<MarkovBasis> {
    let n = a.cols();
    let mut current = lll_reduce(&lattice_basis_i64(a)?)?;
    let mut generated = 0;
    if !current.is_empty() {
        for var in 0..n {
            // Variables outside every support need no saturation.
            if current.iter().all(|v| v[var] == 0) {
                continue;
            }
            let order = TermOrder::grevlex_last(n, var);
            current = Completion::new(&order, opts.caps, &mut generated).run(current)?;
        }
    }
    let moves = current
        .into_iter()
        .map(|v| Move::new(v).map(|m| m.canonical()))
        .collect::<Result<Vec<_>>>()?;
    let moves = if opts.prune {
        prune_connected(moves, opts.prune_budget)
    } else {
        moves
    };
    MarkovBasis::new(a.clone(), moves)
}

/// The lattice kernel basis as machine-integer moves.
pub fn lattice_basis_i64(a: &Matrix<i64>) -> Result<Vec<Vec<i64>>> {
    let big = a.map(|&x| BigInt::from(x));
    lattice_kernel_basis(&big)?
        .into_iter()
        .map(|v| {
            v.iter()
                .map(|x| x.to_i64().ok_or(Error::Overflow("kernel basis conversion")))
                .collect()
        })
        .collect()
}

/// The raw lattice kernel basis wrapped as a (generally incomplete) move set.
pub fn lattice_basis_moves(a: &Matrix<i64>) -> Result<MarkovBasis> {
    MarkovBasis::from_vectors(a.clone(), lattice_basis_i64(a)?)
}

/// Keeps a move only if its endpoints `b⁺` and `b⁻` are not already joined
/// through nonnegative tables by the moves kept before it. Moves are visited
/// by increasing degree, so the ideal generated is unchanged.
fn prune_connected(mut moves: Vec<Move>, budget: usize) -> Vec<Move> {
    moves.sort_by_key(|m| (m.degree(), m.clone()));
    moves.dedup();
    let mut kept: Vec<Move> = Vec::new();
    for m in moves {
        if !connected_by(&kept, &m.positive_part(), &m.negative_part(), budget) {
            kept.push(m);
        }
    }
    kept
}

/// Breadth-first search from `from` to `to` over nonnegative tables using
/// `±` moves. Returns `false` when the budget runs out.
fn connected_by(moves: &[Move], from: &[i64], to: &[i64], budget: usize) -> bool {
    if moves.is_empty() {
        return from == to;
    }
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(from.to_vec());
    queue.push_back(from.to_vec());
    while let Some(cur) = queue.pop_front() {
        if cur == to {
            return true;
        }
        for m in moves {
            for sign in [1i64, -1] {
                let next: Vec<i64> = cur.iter().zip(m.vector()).map(|(x, b)| x + sign * b).collect();
                if next.iter().all(|&x| x >= 0) && !seen.contains(&next) {
                    if seen.len() >= budget {
                        return false;
                    }
                    seen.insert(next.clone());
                    queue.push_back(next);
                }
            }
        }
    }
    false
}

/// Whether `basis` connects the whole fiber of `u`.
///
/// Errors with [`Error::EnumerationCap`] when the fiber has more than `cap`
/// points; that is not evidence of disconnection.
pub fn verify_connects(a: &Matrix<i64>, basis: &MarkovBasis, u: &[i64], cap: usize) -> Result<bool> {
    for m in basis.moves() {
        if !in_kernel(a, m.vector())? {
            return Err(Error::ModelInvalid("basis move outside ker(A)".into()));
        }
    }
    let fiber = enumerate_fiber_cells(a, u, cap)?;
    Ok(fiber_components(&fiber, basis.moves()) == 1)
}

/// Number of connected components of the fiber graph.
pub fn fiber_components(fiber: &[Vec<i64>], moves: &[Move]) -> usize {
    let index: HashMap<&[i64], usize> = fiber.iter().enumerate().map(|(i, v)| (v.as_slice(), i)).collect();
    let mut parent: Vec<usize> = (0..fiber.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = fiber.len();
    let mut next = vec![0i64; fiber.first().map_or(0, Vec::len)];
    for (i, v) in fiber.iter().enumerate() {
        for m in moves {
            for (slot, (x, b)) in next.iter_mut().zip(v.iter().zip(m.vector())) {
                *slot = x + b;
            }
            if let Some(&j) = index.get(next.as_slice()) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                    components -= 1;
                }
            }
        }
    }
    components
}

/// Outcome of [`distance_reducing_check`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DistanceReport {
    pub fiber_size: usize,
    pub pairs_checked: usize,
    /// Pairs `(u, v)` where no applicable signed move at `u` or at `v`
    /// reduces `|u - v|₁`.
    pub violations: Vec<(Vec<i64>, Vec<i64>)>,
}

/// Distance-reduction test over pairs of points in the fiber of `start`.
///
/// Every unordered pair is checked when there are at most `trials` of them;
/// otherwise `trials` distinct-point pairs are drawn with a seeded generator.
pub fn distance_reducing_check(
    a: &Matrix<i64>,
    basis: &MarkovBasis,
    start: &[i64],
    trials: usize,
    seed: u64,
    cap: usize,
) -> Result<DistanceReport> {
    let fiber = enumerate_fiber_cells(a, start, cap)?;
    let f = fiber.len();
    let mut report = DistanceReport {
        fiber_size: f,
        ..Default::default()
    };
    if f < 2 {
        return Ok(report);
    }
    let total_pairs = f * (f - 1) / 2;
    let pairs: Vec<(usize, usize)> = if total_pairs <= trials {
        (0..f).flat_map(|i| ((i + 1)..f).map(move |j| (i, j))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..trials)
            .map(|_| {
                let i = rng.gen_range(0..f);
                let mut j = rng.gen_range(0..f - 1);
                if j >= i {
                    j += 1;
                }
                (i, j)
            })
            .collect()
    };
    for (i, j) in pairs {
        report.pairs_checked += 1;
        let (u, v) = (&fiber[i], &fiber[j]);
        if !reduces_distance(basis.moves(), u, v) && !reduces_distance(basis.moves(), v, u) {
            report.violations.push((u.clone(), v.clone()));
        }
    }
    Ok(report)
}

fn l1(u: &[i64], v: &[i64]) -> i64 {
    u.iter().zip(v).map(|(a, b)| (a - b).abs()).sum()
}

/// Whether some `±b` applicable at `u` brings it strictly closer to `v`.
fn reduces_distance(moves: &[Move], u: &[i64], v: &[i64]) -> bool {
    let d = l1(u, v);
    moves.iter().any(|m| {
        [m.clone(), m.negated()].iter().any(|s| {
            s.applicable(u) && {
                let w: Vec<i64> = u.iter().zip(s.vector()).map(|(x, b)| x + b).collect();
                l1(&w, v) < d
            }
        })
    })
}
