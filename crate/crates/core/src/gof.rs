//! Maximum likelihood fits, the chi-square statistic and exact conditional
//! p-values.

use crate::basis::MarkovBasis;
use crate::error::{Error, Result};
use crate::fiber::{chain_rng, enumerate_fiber_cells, make_proposer, run_chain, WalkConfig};
use crate::intlin::Matrix;
use crate::model::{Family, ModelSpec, Table};
use crate::scalar::{real, Real};

/// Slack on the "at least as extreme" comparison; ties count as extreme.
pub const TIE_SLACK: f64 = 1e-12;

/// Fitted expected counts.
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult<F> {
    pub fitted: Vec<F>,
    pub converged: bool,
    pub iterations: usize,
    /// `‖A ê - A u‖∞`.
    pub max_moment_gap: F,
}

#[derive(Clone, Copy, Debug)]
pub struct FitOptions<F> {
    /// Bound on the moment gap relative to `max(1, ‖A u‖∞)`.
    pub tolerance: F,
    pub max_sweeps: usize,
}

impl<F: Real> Default for FitOptions<F> {
    fn default() -> Self {
        Self {
            tolerance: F::default_tolerance(),
            max_sweeps: 10_000,
        }
    }
}

/// MLE of the expected cell counts of `u` under `spec`.
///
/// Independence models use the closed form `r_i c_j / N`; every other model
/// goes through [`fit_ips`].
pub fn fit_mle<F: Real>(spec: &ModelSpec, u: &Table) -> Result<FitResult<F>> {
    match *spec.family() {
        Family::Independence { rows, cols } => fit_independence(spec.design(), u.cells(), rows, cols),
        _ => fit_ips(spec.design(), u.cells(), FitOptions::default()),
    }
}

fn check_table(a: &Matrix<i64>, u: &[i64]) -> Result<()> {
    if u.len() != a.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.cols(),
            found: u.len(),
        });
    }
    if u.iter().any(|&x| x < 0) {
        return Err(Error::InvalidTable("negative cell count".into()));
    }
    if u.iter().sum::<i64>() <= 0 {
        return Err(Error::InvalidTable("cannot fit a table with zero total".into()));
    }
    Ok(())
}

/// Closed-form independence fit.
pub fn fit_independence<F: Real>(a: &Matrix<i64>, u: &[i64], d1: usize, d2: usize) -> Result<FitResult<F>> {
    check_table(a, u)?;
    if u.len() != d1 * d2 {
        return Err(Error::DimensionMismatch {
            expected: d1 * d2,
            found: u.len(),
        });
    }
    let row: Vec<i64> = (0..d1).map(|i| u[i * d2..(i + 1) * d2].iter().sum()).collect();
    let col: Vec<i64> = (0..d2).map(|j| (0..d1).map(|i| u[i * d2 + j]).sum()).collect();
    let total = F::from_i64(row.iter().sum()).unwrap();
    let fitted: Vec<F> = (0..d1 * d2)
        .map(|c| F::from_i64(row[c / d2] * col[c % d2]).unwrap() / total)
        .collect();
    let gap = moment_gap(a, u, &fitted);
    Ok(FitResult {
        fitted,
        converged: true,
        iterations: 0,
        max_moment_gap: gap,
    })
}

fn to_real<F: Real>(x: i64) -> F {
    F::from_i64(x).expect("integer representable as float")
}

/// `‖A ê - A u‖∞`.
pub fn moment_gap<F: Real>(a: &Matrix<i64>, u: &[i64], fitted: &[F]) -> F {
    (0..a.rows())
        .map(|r| {
            let row = a.row(r);
            let target: i64 = row.iter().zip(u).map(|(x, y)| x * y).sum();
            let got = row
                .iter()
                .zip(fitted)
                .filter(|(&x, _)| x != 0)
                .fold(F::zero(), |acc, (&x, &e)| acc + to_real::<F>(x) * e);
            (got - to_real(target)).abs()
        })
        .fold(F::zero(), F::max)
}

/// Cells that are positive for some real point of `{v ≥ 0 : A v = A u}`:
/// the support of the extended MLE.
pub fn facial_support<F: Real>(a: &Matrix<i64>, u: &[i64]) -> Vec<bool> {
    let mut support: Vec<bool> = u.iter().map(|&x| x > 0).collect();
    let lhs: Vec<Vec<F>> = (0..a.rows())
        .map(|r| a.row(r).iter().map(|&x| to_real(x)).collect())
        .collect();
    let rhs: Vec<F> = a
        .mul_vec(u)
        .expect("dimensions checked")
        .into_iter()
        .map(to_real)
        .collect();
    let eps = F::epsilon().sqrt();
    loop {
        let unknown: Vec<usize> = (0..u.len()).filter(|&c| !support[c]).collect();
        if unknown.is_empty() {
            break;
        }
        let mut cost = vec![F::zero(); u.len()];
        for &c in &unknown {
            cost[c] = F::one();
        }
        let v = match simplex_maximize(&lhs, &rhs, &cost) {
            Lp::Optimal(v) => v,
            // Unbounded means some unknown cell can grow; only possible for
            // designs without a positive grading, which ModelSpec excludes.
            Lp::Unbounded => {
                unknown.iter().for_each(|&c| support[c] = true);
                break;
            }
            Lp::Infeasible => break,
        };
        let grown: Vec<usize> = unknown.into_iter().filter(|&c| v[c] > eps).collect();
        if grown.is_empty() {
            break;
        }
        grown.into_iter().for_each(|c| support[c] = true);
    }
    support
}

enum Lp<F> {
    Optimal(Vec<F>),
    Unbounded,
    Infeasible,
}

/// Dense two-phase simplex with Bland's rule: maximise `cᵀx` subject to
/// `A x = b`, `x ≥ 0`.
fn simplex_maximize<F: Real>(a: &[Vec<F>], b: &[F], c: &[F]) -> Lp<F> {
    let m = a.len();
    let n = c.len();
    let eps = F::epsilon().sqrt();
    let width = n + m + 1;
    let rhs = n + m;
    let mut t: Vec<Vec<F>> = (0..m)
        .map(|i| {
            let sign = if b[i] < F::zero() { -F::one() } else { F::one() };
            let mut row: Vec<F> = a[i].iter().map(|&x| x * sign).collect();
            row.extend((0..m).map(|k| if k == i { F::one() } else { F::zero() }));
            row.push(b[i] * sign);
            debug_assert_eq!(row.len(), width);
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    let pivot = |t: &mut Vec<Vec<F>>, basis: &mut Vec<usize>, r: usize, col: usize| {
        let p = t[r][col];
        t[r].iter_mut().for_each(|x| *x = *x / p);
        let src = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && row[col] != F::zero() {
                let f = row[col];
                for (x, &y) in row.iter_mut().zip(&src) {
                    *x = *x - f * y;
                }
            }
        }
        basis[r] = col;
    };

    // Returns false when unbounded.
    let optimise = |t: &mut Vec<Vec<F>>, basis: &mut Vec<usize>, cost: &[F], allowed: usize| -> bool {
        loop {
            let entering = (0..allowed).find(|&j| {
                if basis.contains(&j) {
                    return false;
                }
                let reduced = cost[j] - (0..t.len()).fold(F::zero(), |acc, i| acc + cost[basis[i]] * t[i][j]);
                reduced > eps
            });
            let Some(col) = entering else { return true };
            let mut best: Option<(F, usize)> = None;
            for i in 0..t.len() {
                if t[i][col] > eps {
                    let ratio = t[i][rhs] / t[i][col];
                    best = match best {
                        Some((r, k)) if r < ratio - eps || (ratio - r).abs() <= eps && basis[k] < basis[i] => {
                            Some((r, k))
                        }
                        _ => Some((ratio, i)),
                    };
                }
            }
            let Some((_, row)) = best else { return false };
            pivot(t, basis, row, col);
        }
    };

    let mut phase1 = vec![F::zero(); n + m];
    phase1[n..].iter_mut().for_each(|x| *x = -F::one());
    optimise(&mut t, &mut basis, &phase1, n + m);
    let infeasibility = (0..m)
        .filter(|&i| basis[i] >= n)
        .fold(F::zero(), |acc, i| acc + t[i][rhs]);
    if infeasibility > eps * F::from_usize(m.max(1)).unwrap() {
        return Lp::Infeasible;
    }
    // Drive artificials out of the basis; rows where that fails are redundant.
    let mut redundant = Vec::new();
    for i in 0..m {
        if basis[i] >= n {
            match (0..n).find(|&j| t[i][j].abs() > eps && !basis.contains(&j)) {
                Some(j) => pivot(&mut t, &mut basis, i, j),
                None => redundant.push(i),
            }
        }
    }
    for &i in redundant.iter().rev() {
        t.remove(i);
        basis.remove(i);
    }
    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat_n(F::zero(), m));
    if !optimise(&mut t, &mut basis, &phase2, n) {
        return Lp::Unbounded;
    }
    let mut x = vec![F::zero(); n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[i][rhs];
        }
    }
    Lp::Optimal(x)
}

/// Iterative proportional scaling on the rows of `A`.
///
/// Cells outside [`facial_support`] are fixed at zero; every other cell
/// starts at one, and each sweep matches the statistics one row at a time.
/// For 0/1 rows that is the usual proportional update; other rows solve the
/// one-dimensional moment equation in the row's parameter by safeguarded
/// Newton iteration.
pub fn fit_ips<F: Real>(a: &Matrix<i64>, u: &[i64], opts: FitOptions<F>) -> Result<FitResult<F>> {
    check_table(a, u)?;
    let support = facial_support::<F>(a, u);
    let mut fitted: Vec<F> = support.iter().map(|&s| if s { F::one() } else { F::zero() }).collect();
    let targets: Vec<F> = a.mul_vec(u)?.into_iter().map(to_real).collect();
    let scale = targets.iter().fold(F::one(), |m, t| m.max(t.abs()));
    let rows: Vec<Vec<(usize, i64)>> = (0..a.rows())
        .map(|r| {
            a.row(r)
                .iter()
                .enumerate()
                .filter(|&(c, &x)| x != 0 && support[c])
                .map(|(c, &x)| (c, x))
                .collect()
        })
        .collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_sweeps {
        iterations += 1;
        for (row, &target) in rows.iter().zip(&targets) {
            if row.is_empty() {
                continue;
            }
            if row.iter().all(|&(_, x)| x == 1) {
                let current = row.iter().fold(F::zero(), |acc, &(c, _)| acc + fitted[c]);
                if current > F::zero() {
                    let factor = target / current;
                    row.iter().for_each(|&(c, _)| fitted[c] = fitted[c] * factor);
                }
            } else {
                let theta = solve_row_parameter(row, &fitted, target);
                for &(c, x) in row {
                    fitted[c] = fitted[c] * (theta * to_real(x)).exp();
                }
            }
        }
        if moment_gap(a, u, &fitted) <= opts.tolerance * scale {
            converged = true;
            break;
        }
    }
    let gap = moment_gap(a, u, &fitted);
    Ok(FitResult {
        fitted,
        converged,
        iterations,
        max_moment_gap: gap,
    })
}

/// Root `θ` of `Σ a_c e_c exp(θ a_c) = target`; the left side increases in θ.
fn solve_row_parameter<F: Real>(row: &[(usize, i64)], fitted: &[F], target: F) -> F {
    let g = |theta: F| -> (F, F) {
        row.iter().fold((-target, F::zero()), |(v, d), &(c, x)| {
            let a = to_real::<F>(x);
            let term = a * fitted[c] * (theta * a).exp();
            (v + term, d + a * term)
        })
    };
    let two = real::<F>(2.0);
    let (mut lo, mut hi) = (-F::one(), F::one());
    for _ in 0..200 {
        if g(lo).0 <= F::zero() {
            break;
        }
        lo = lo * two;
    }
    for _ in 0..200 {
        if g(hi).0 >= F::zero() {
            break;
        }
        hi = hi * two;
    }
    let tol = F::epsilon() * real(16.0) * F::one().max(target.abs());
    let mut theta = F::zero().max(lo).min(hi);
    for _ in 0..200 {
        let (v, d) = g(theta);
        if v.abs() <= tol {
            break;
        }
        if v > F::zero() {
            hi = theta;
        } else {
            lo = theta;
        }
        let newton = theta - v / d;
        theta = if d > F::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / two
        };
        if hi - lo <= F::epsilon() {
            break;
        }
    }
    theta
}

/// Pearson's chi-square `Σ (u_c - ê_c)² / ê_c` over cells with `ê_c > 0`.
pub fn chi_square<F: Real>(u: &[i64], fit: &FitResult<F>) -> Result<F> {
    if !fit.converged {
        return Err(Error::NotConverged {
            iterations: fit.iterations,
            gap: fit.max_moment_gap.to_f64().unwrap_or(f64::NAN),
        });
    }
    if u.len() != fit.fitted.len() {
        return Err(Error::DimensionMismatch {
            expected: fit.fitted.len(),
            found: u.len(),
        });
    }
    let mut total = F::zero();
    for (cell, (&obs, &exp)) in u.iter().zip(&fit.fitted).enumerate() {
        if exp > F::zero() {
            let d = to_real::<F>(obs) - exp;
            total = total + d * d / exp;
        } else if obs != 0 {
            return Err(Error::InconsistentFit { cell, observed: obs });
        }
    }
    Ok(total)
}

/// Equal-width histogram bin `[lo, hi)`; the last bin is closed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bin<F> {
    pub lo: F,
    pub hi: F,
    pub count: usize,
}

/// Equal-width bins over `[min, max]` of `values`.
pub fn histogram<F: Real>(values: &[F], bin_count: usize) -> Result<Vec<Bin<F>>> {
    if bin_count == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    let Some(&first) = values.first() else {
        return Ok(Vec::new());
    };
    let (min, max) = values
        .iter()
        .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if max == min {
        return Ok(vec![Bin {
            lo: min,
            hi: max,
            count: values.len(),
        }]);
    }
    let width = (max - min) / F::from_usize(bin_count).unwrap();
    let mut bins: Vec<Bin<F>> = (0..bin_count)
        .map(|k| Bin {
            lo: min + width * F::from_usize(k).unwrap(),
            hi: if k + 1 == bin_count {
                max
            } else {
                min + width * F::from_usize(k + 1).unwrap()
            },
            count: 0,
        })
        .collect();
    for &v in values {
        let k = ((v - min) / width).floor().to_usize().unwrap_or(0).min(bin_count - 1);
        bins[k].count += 1;
    }
    Ok(bins)
}

/// Outcome of an exact conditional test.
#[derive(Clone, Debug, PartialEq)]
pub struct TestResult<F> {
    pub observed_stat: F,
    pub sample_size: usize,
    pub exceed_count: usize,
    pub p_value: F,
    pub mc_std_error: F,
    pub histogram: Vec<Bin<F>>,
}

/// Monte Carlo run settings for [`exact_pvalue_mc`].
#[derive(Clone, Copy, Debug)]
pub struct McOptions {
    pub chains: usize,
    pub bins: usize,
}

impl Default for McOptions {
    fn default() -> Self {
        Self { chains: 1, bins: 50 }
    }
}

fn is_extreme<F: Real>(stat: F, observed: F) -> bool {
    stat >= observed - real(TIE_SLACK)
}

/// Sampled statistics of every chain, pooled in chain order.
pub fn sampled_statistics<F: Real>(
    spec: &ModelSpec,
    u: &Table,
    basis: Option<&MarkovBasis>,
    cfg: &WalkConfig,
    fit: &FitResult<F>,
    chains: usize,
) -> Result<Vec<F>> {
    if chains == 0 {
        return Err(Error::Config("at least one chain is required".into()));
    }
    let run = |chain: usize| -> Result<Vec<F>> {
        let mut proposer = make_proposer(spec, basis, cfg)?;
        let mut rng = chain_rng(cfg.seed, chain as u64);
        let mut stats = Vec::with_capacity(cfg.recorded());
        let mut failure = None;
        run_chain(&mut proposer, u.cells(), cfg, &mut rng, |state| {
            match chi_square(state, fit) {
                Ok(s) => stats.push(s),
                Err(e) => failure = Some(e),
            }
        })?;
        match failure {
            Some(e) => Err(e),
            None => Ok(stats),
        }
    };
    let per_chain: Vec<Result<Vec<F>>> = if chains == 1 {
        vec![run(0)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..chains).map(|k| scope.spawn(move || run(k))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("chain thread panicked"))
                .collect()
        })
    };
    let mut pooled = Vec::with_capacity(chains * cfg.recorded());
    for r in per_chain {
        pooled.extend(r?);
    }
    Ok(pooled)
}

/// Monte Carlo estimate of the exact conditional p-value of `u`.
///
/// The fit is computed once from `u`; every recorded state of the walk is
/// scored against it, and the p-value is the fraction of recorded states
/// whose statistic is at least the observed one.
pub fn exact_pvalue_mc<F: Real>(
    spec: &ModelSpec,
    u: &Table,
    basis: Option<&MarkovBasis>,
    cfg: &WalkConfig,
    opts: McOptions,
) -> Result<TestResult<F>> {
    let fit = fit_mle::<F>(spec, u)?;
    let observed = chi_square(u.cells(), &fit)?;
    let stats = sampled_statistics(spec, u, basis, cfg, &fit, opts.chains)?;
    if stats.is_empty() {
        return Err(Error::Config("the walk recorded no states".into()));
    }
    summarize(observed, &stats, opts.bins)
}

/// Builds a [`TestResult`] from sampled statistics.
pub fn summarize<F: Real>(observed: F, stats: &[F], bins: usize) -> Result<TestResult<F>> {
    let n = stats.len();
    let exceed = stats.iter().filter(|&&s| is_extreme(s, observed)).count();
    let p = F::from_usize(exceed).unwrap() / F::from_usize(n.max(1)).unwrap();
    Ok(TestResult {
        observed_stat: observed,
        sample_size: n,
        exceed_count: exceed,
        p_value: p,
        mc_std_error: (p * (F::one() - p) / F::from_usize(n.max(1)).unwrap()).sqrt(),
        histogram: histogram(stats, bins)?,
    })
}

/// Exact conditional p-value by enumerating the fiber of `u`.
///
/// Fiber points are weighted by `1 / ∏ v_c!`. `sample_size` is the fiber
/// size, `exceed_count` the number of points at least as extreme as `u`, and
/// the histogram counts fiber points (unweighted).
pub fn exact_pvalue_enumerated<F: Real>(spec: &ModelSpec, u: &Table, cap: usize, bins: usize) -> Result<TestResult<F>> {
    let fit = fit_mle::<F>(spec, u)?;
    let observed = chi_square(u.cells(), &fit)?;
    let fiber = enumerate_fiber_cells(spec.design(), u.cells(), cap)?;
    let mut log_fact = crate::model::LogFactorial::new();
    let mut log_w = Vec::with_capacity(fiber.len());
    let mut stats = Vec::with_capacity(fiber.len());
    for v in &fiber {
        log_w.push(-v.iter().map(|&x| log_fact.get(x)).sum::<f64>());
        stats.push(chi_square(v, &fit)?);
    }
    let peak = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_w.iter().map(|w| (w - peak).exp()).collect();
    let total: f64 = weights.iter().sum();
    let extreme: f64 = weights
        .iter()
        .zip(&stats)
        .filter(|(_, &s)| is_extreme(s, observed))
        .map(|(w, _)| w)
        .sum();
    Ok(TestResult {
        observed_stat: observed,
        sample_size: fiber.len(),
        exceed_count: stats.iter().filter(|&&s| is_extreme(s, observed)).count(),
        p_value: real((extreme / total).min(1.0)),
        mc_std_error: F::zero(),
        histogram: histogram(&stats, bins)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::independence_basis;
    use crate::fiber::{ProposalKind, Target};
    use crate::model::{graph_to_table, independence_design, p1_design, Graph, Reciprocity};
    use approx::assert_abs_diff_eq;

    fn sparse_corner_table() -> Vec<i64> {
        vec![2, 3, 4, 0, 3, 4, 0, 0, 1]
    }

    #[test]
    fn independence_closed_form_examples() {
        let spec = independence_design(2, 2).unwrap();
        let fit = fit_mle::<f64>(&spec, &spec.table(vec![1, 0, 0, 1]).unwrap()).unwrap();
        assert_eq!(fit.fitted, vec![0.5; 4]);

        let spec = independence_design(3, 3).unwrap();
        let fit = fit_mle::<f64>(&spec, &spec.table(sparse_corner_table()).unwrap()).unwrap();
        assert_abs_diff_eq!(fit.fitted[0], 18.0 / 17.0, epsilon = 1e-12);
        assert!(fit.max_moment_gap < 1e-12);
    }

    #[test]
    fn ips_agrees_with_closed_form() {
        let spec = independence_design(3, 3).unwrap();
        let u = sparse_corner_table();
        let closed = fit_mle::<f64>(&spec, &spec.table(u.clone()).unwrap()).unwrap();
        let ips = fit_ips::<f64>(spec.design(), &u, FitOptions::default()).unwrap();
        assert!(ips.converged);
        for (a, b) in closed.fitted.iter().zip(&ips.fitted) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn p1_three_cycle_moment_matching() {
        let spec = p1_design(3, Reciprocity::Constant).unwrap();
        let u = graph_to_table(&Graph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap());
        let fit = fit_mle::<f64>(&spec, &u).unwrap();
        assert!(fit.converged);
        assert!(fit.max_moment_gap < 1e-8);
        // No mutual dyads are possible on this fiber.
        for d in 0..3 {
            assert_eq!(fit.fitted[4 * d + 3], 0.0);
        }
    }

    #[test]
    fn facial_support_of_three_cycle() {
        let spec = p1_design(3, Reciprocity::Constant).unwrap();
        let u = graph_to_table(&Graph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap());
        let support = facial_support::<f64>(spec.design(), u.cells());
        // Each dyad can only be one-way in either direction.
        let expected: Vec<bool> = (0..12).map(|c| c % 4 == 1 || c % 4 == 2).collect();
        assert_eq!(support, expected);
    }

    #[test]
    fn generic_rows_use_newton_updates() {
        // A row with a coefficient of 2 exercises the non-0/1 path.
        let a = Matrix::from_rows(vec![vec![1, 1, 1, 1], vec![0, 1, 2, 3]]).unwrap();
        let u = [1, 2, 0, 3];
        let fit = fit_ips::<f64>(&a, &u, FitOptions::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.max_moment_gap < 1e-8);
        // Log-linear in the cell index: ratios of successive cells agree.
        let r1 = fit.fitted[1] / fit.fitted[0];
        let r2 = fit.fitted[2] / fit.fitted[1];
        assert_abs_diff_eq!(r1, r2, epsilon = 1e-8);
    }

    #[test]
    fn fit_is_a_function_of_the_statistics() {
        let spec = p1_design(4, Reciprocity::Zero).unwrap();
        let g = graph_to_table(&Graph::new(4, vec![(0, 1), (2, 3), (1, 2), (3, 0), (0, 2)]).unwrap());
        let fiber = enumerate_fiber_cells(spec.design(), g.cells(), 1000).unwrap();
        let base = fit_mle::<f64>(&spec, &g).unwrap();
        for v in fiber {
            let other = fit_mle::<f64>(&spec, &spec.table(v).unwrap()).unwrap();
            for (a, b) in base.fitted.iter().zip(&other.fitted) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn zero_total_is_rejected() {
        let spec = independence_design(2, 2).unwrap();
        assert!(fit_mle::<f64>(&spec, &spec.table(vec![0; 4]).unwrap()).is_err());
    }

    #[test]
    fn chi_square_examples() {
        let fit = FitResult {
            fitted: vec![0.5; 4],
            converged: true,
            iterations: 0,
            max_moment_gap: 0.0,
        };
        assert_abs_diff_eq!(chi_square(&[1, 0, 0, 1], &fit).unwrap(), 2.0, epsilon = 1e-15);

        let exact = FitResult {
            fitted: vec![1.0, 2.0, 3.0],
            ..fit.clone()
        };
        assert_eq!(chi_square(&[1, 2, 3], &exact).unwrap(), 0.0);

        let zero = FitResult {
            fitted: vec![0.0, 1.0],
            ..fit.clone()
        };
        assert_eq!(
            chi_square(&[1, 0], &zero),
            Err(Error::InconsistentFit { cell: 0, observed: 1 })
        );
        let stale = FitResult {
            converged: false,
            ..fit
        };
        assert!(matches!(
            chi_square(&[1, 0, 0, 1], &stale),
            Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn chi_square_two_routes_on_sparse_corner_table() {
        let spec = independence_design(3, 3).unwrap();
        let u = sparse_corner_table();
        let fit = fit_mle::<f64>(&spec, &spec.table(u.clone()).unwrap()).unwrap();
        let direct = chi_square(&u, &fit).unwrap();
        // Σ u²/ê - N, valid because Σ ê = N.
        let n: i64 = u.iter().sum();
        let alternative: f64 = u
            .iter()
            .zip(&fit.fitted)
            .filter(|(_, &e)| e > 0.0)
            .map(|(&o, &e)| (o * o) as f64 / e)
            .sum::<f64>()
            - n as f64;
        assert_abs_diff_eq!(direct, alternative, epsilon = 1e-12);
    }

    #[test]
    fn histogram_examples() {
        let h = histogram(&[1.0, 2.0, 3.0], 1).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].count, 3);
        let h = histogram(&[0.0, 1.0], 2).unwrap();
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![1, 1]);
        assert!(histogram::<f64>(&[], 5).unwrap().is_empty());
        assert!(histogram(&[1.0], 0).is_err());
    }

    #[test]
    fn enumerated_pvalues() {
        let spec = independence_design(2, 2).unwrap();
        let r = exact_pvalue_enumerated::<f64>(&spec, &spec.table(vec![1, 0, 0, 1]).unwrap(), 100, 10).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.sample_size, 2);

        let r = exact_pvalue_enumerated::<f64>(&spec, &spec.table(vec![3, 1, 1, 3]).unwrap(), 100, 10).unwrap();
        // Weights ∝ C(4,m)² = 1,16,36,16,1; every m except 2 is as extreme.
        assert_abs_diff_eq!(r.p_value, 34.0 / 70.0, epsilon = 1e-12);
        assert_eq!(r.sample_size, 5);
        assert_eq!(r.exceed_count, 4);

        let single = exact_pvalue_enumerated::<f64>(&spec, &spec.table(vec![2, 0, 0, 0]).unwrap(), 100, 10).unwrap();
        assert_eq!(single.sample_size, 1);
        assert_eq!(single.p_value, 1.0);
    }

    #[test]
    fn single_point_fiber_mc() {
        let spec = independence_design(2, 2).unwrap();
        let basis = independence_basis(2, 2).unwrap();
        let cfg = WalkConfig::new(1_000, 3);
        let r = exact_pvalue_mc::<f64>(
            &spec,
            &spec.table(vec![2, 0, 0, 0]).unwrap(),
            Some(&basis),
            &cfg,
            McOptions::default(),
        )
        .unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.exceed_count, r.sample_size);
        assert_eq!(r.mc_std_error, 0.0);
    }

    #[test]
    fn mc_invariants_and_chain_pooling() {
        let spec = independence_design(2, 2).unwrap();
        let basis = independence_basis(2, 2).unwrap();
        let u = spec.table(vec![3, 1, 1, 3]).unwrap();
        let cfg = WalkConfig::new(20_000, 11);
        let opts = McOptions { chains: 3, bins: 20 };
        let a = exact_pvalue_mc::<f64>(&spec, &u, Some(&basis), &cfg, opts).unwrap();
        let b = exact_pvalue_mc::<f64>(&spec, &u, Some(&basis), &cfg, opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sample_size, 3 * cfg.recorded());
        assert_eq!(a.p_value, a.exceed_count as f64 / a.sample_size as f64);
        assert_eq!(a.histogram.iter().map(|b| b.count).sum::<usize>(), a.sample_size);
        assert!((a.p_value - 34.0 / 70.0).abs() < 0.05);
    }

    #[test]
    fn single_precision_fit() {
        let spec = p1_design(4, Reciprocity::Constant).unwrap();
        let g = graph_to_table(&Graph::new(4, vec![(0, 1), (1, 0), (2, 3), (1, 2), (3, 1)]).unwrap());
        let fit = fit_mle::<f32>(&spec, &g).unwrap();
        assert!(fit.converged);
        let fit64 = fit_mle::<f64>(&spec, &g).unwrap();
        for (a, b) in fit.fitted.iter().zip(&fit64.fitted) {
            assert!((f64::from(*a) - b).abs() < 1e-3);
        }
    }

    #[test]
    fn uniform_target_is_accepted_by_mc() {
        let spec = independence_design(2, 3).unwrap();
        let basis = independence_basis(2, 3).unwrap();
        let cfg = WalkConfig {
            target: Target::Uniform,
            proposal: ProposalKind::Basis,
            ..WalkConfig::new(2_000, 1)
        };
        let r = exact_pvalue_mc::<f64>(
            &spec,
            &spec.table(vec![1, 2, 0, 0, 1, 2]).unwrap(),
            Some(&basis),
            &cfg,
            McOptions::default(),
        )
        .unwrap();
        assert!((0.0..=1.0).contains(&r.p_value));
    }
}
