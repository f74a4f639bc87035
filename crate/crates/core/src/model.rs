//! Design matrices for the supported log-linear model families and the data
//! types they act on.

use std::fmt;
use std::str::FromStr;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::intlin::{ones_in_row_span, Matrix};

/// Dyad state offsets inside a dyad block, for a dyad `{i, j}` with `i < j`.
pub const DYAD_NONE: usize = 0;
/// `i -> j` only.
pub const DYAD_FORWARD: usize = 1;
/// `j -> i` only.
pub const DYAD_BACKWARD: usize = 2;
pub const DYAD_MUTUAL: usize = 3;
pub const DYAD_STATES: [&str; 4] = ["00", "10", "01", "11"];

/// Number of unordered pairs on `n` nodes.
pub fn dyad_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of dyad `{i, j}` (in either order) in lexicographic dyad order.
pub fn dyad_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(j < n && i != j);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// All dyads `(i, j)`, `i < j`, in lexicographic order.
pub fn dyads(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    /// A k-way table with the given dimensions, flattened row-major.
    Grid(Vec<usize>),
    /// Dyadic table for a directed graph on `n` nodes: four cells per dyad.
    Dyadic(usize),
}

impl Shape {
    pub fn cell_count(&self) -> usize {
        match self {
            Shape::Grid(dims) => dims.iter().product(),
            Shape::Dyadic(n) => 4 * dyad_count(*n),
        }
    }
}

/// A nonnegative integer table together with its shape.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Table {
    shape: Shape,
    cells: Vec<i64>,
}

impl Table {
    pub fn new(shape: Shape, cells: Vec<i64>) -> Result<Self> {
        if cells.len() != shape.cell_count() {
            return Err(Error::DimensionMismatch {
                expected: shape.cell_count(),
                found: cells.len(),
            });
        }
        if let Some(pos) = cells.iter().position(|&c| c < 0) {
            return Err(Error::InvalidTable(format!("cell {pos} is negative ({})", cells[pos])));
        }
        if let Shape::Dyadic(_) = shape {
            for (d, block) in cells.chunks(4).enumerate() {
                if block.iter().sum::<i64>() != 1 || block.iter().any(|&c| c > 1) {
                    return Err(Error::InvalidTable(format!(
                        "dyad block {d} must hold exactly one 1, found {block:?}"
                    )));
                }
            }
        }
        Ok(Self { shape, cells })
    }

    /// A 2-way table from its rows.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let d1 = rows.len();
        let d2 = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d2) {
            return Err(Error::InvalidTable("rows have unequal lengths".into()));
        }
        Self::new(Shape::Grid(vec![d1, d2]), rows.concat())
    }

    /// A one-way view of an arbitrary flattened table.
    pub fn flat(cells: Vec<i64>) -> Result<Self> {
        Self::new(Shape::Grid(vec![cells.len()]), cells)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn cells(&self) -> &[i64] {
        &self.cells
    }

    pub fn total(&self) -> i64 {
        self.cells.iter().sum()
    }

    pub fn into_cells(self) -> Vec<i64> {
        self.cells
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reciprocity {
    Zero,
    Constant,
    Differential,
}

impl fmt::Display for Reciprocity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reciprocity::Zero => "zero",
            Reciprocity::Constant => "constant",
            Reciprocity::Differential => "differential",
        })
    }
}

impl FromStr for Reciprocity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Reciprocity::Zero),
            "constant" => Ok(Reciprocity::Constant),
            "differential" => Ok(Reciprocity::Differential),
            other => Err(Error::Config(format!("unknown reciprocity mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Generic,
    Independence { rows: usize, cols: usize },
    P1 { nodes: usize, reciprocity: Reciprocity },
}

/// A model family together with its design matrix and labels.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    family: Family,
    design: Matrix<i64>,
    cell_labels: Vec<String>,
    statistic_labels: Vec<String>,
}

impl ModelSpec {
    fn build(
        family: Family,
        design: Matrix<i64>,
        cell_labels: Vec<String>,
        statistic_labels: Vec<String>,
    ) -> Result<Self> {
        if cell_labels.len() != design.cols() {
            return Err(Error::DimensionMismatch {
                expected: design.cols(),
                found: cell_labels.len(),
            });
        }
        if statistic_labels.len() != design.rows() {
            return Err(Error::DimensionMismatch {
                expected: design.rows(),
                found: statistic_labels.len(),
            });
        }
        if !ones_in_row_span(&design) {
            return Err(Error::ModelInvalid(
                "the all-ones vector is not in the rational row span of the design matrix".into(),
            ));
        }
        Ok(Self {
            family,
            design,
            cell_labels,
            statistic_labels,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn design(&self) -> &Matrix<i64> {
        &self.design
    }

    pub fn cell_labels(&self) -> &[String] {
        &self.cell_labels
    }

    pub fn statistic_labels(&self) -> &[String] {
        &self.statistic_labels
    }

    pub fn cell_count(&self) -> usize {
        self.design.cols()
    }

    /// The table shape this model expects.
    pub fn shape(&self) -> Shape {
        match self.family {
            Family::Generic => Shape::Grid(vec![self.design.cols()]),
            Family::Independence { rows, cols } => Shape::Grid(vec![rows, cols]),
            Family::P1 { nodes, .. } => Shape::Dyadic(nodes),
        }
    }

    /// Wraps raw cells in a table of this model's shape.
    pub fn table(&self, cells: Vec<i64>) -> Result<Table> {
        Table::new(self.shape(), cells)
    }
}

/// Independence of two discrete variables: row sums then column sums.
pub fn independence_design(d1: usize, d2: usize) -> Result<ModelSpec> {
    if d1 < 2 || d2 < 2 {
        return Err(Error::InvalidDimension(format!(
            "independence model needs both dimensions >= 2, got {d1}x{d2}"
        )));
    }
    let cols = d1 * d2;
    let mut data = vec![0i64; (d1 + d2) * cols];
    for i in 0..d1 {
        for j in 0..d2 {
            data[i * cols + i * d2 + j] = 1;
            data[(d1 + j) * cols + i * d2 + j] = 1;
        }
    }
    let design = Matrix::new(d1 + d2, cols, data)?;
    let cell_labels = (0..d1)
        .flat_map(|i| (0..d2).map(move |j| format!("cell({},{})", i + 1, j + 1)))
        .collect();
    let statistic_labels = (0..d1)
        .map(|i| format!("row{}", i + 1))
        .chain((0..d2).map(|j| format!("col{}", j + 1)))
        .collect();
    ModelSpec::build(
        Family::Independence { rows: d1, cols: d2 },
        design,
        cell_labels,
        statistic_labels,
    )
}

/// The p1 model for directed graphs on `n` nodes.
///
/// Rows are, in order: one constraint per dyad (its four cells sum to one),
/// out-degree per node, in-degree per node, then the reciprocity rows of the
/// chosen mode.
pub fn p1_design(n: usize, mode: Reciprocity) -> Result<ModelSpec> {
    if n < 3 {
        return Err(Error::InvalidDimension(format!(
            "p1 model needs at least 3 nodes, got {n}"
        )));
    }
    let nd = dyad_count(n);
    let cols = 4 * nd;
    let mut rows: Vec<Vec<i64>> = Vec::new();
    let mut statistic_labels = Vec::new();

    for (d, (i, j)) in dyads(n).enumerate() {
        let mut row = vec![0; cols];
        row[4 * d..4 * d + 4].fill(1);
        rows.push(row);
        statistic_labels.push(format!("dyad({i},{j})"));
    }
    for k in 0..n {
        let mut row = vec![0; cols];
        for (d, (i, j)) in dyads(n).enumerate() {
            if k == i {
                row[4 * d + DYAD_FORWARD] = 1;
                row[4 * d + DYAD_MUTUAL] = 1;
            } else if k == j {
                row[4 * d + DYAD_BACKWARD] = 1;
                row[4 * d + DYAD_MUTUAL] = 1;
            }
        }
        rows.push(row);
        statistic_labels.push(format!("out({k})"));
    }
    for k in 0..n {
        let mut row = vec![0; cols];
        for (d, (i, j)) in dyads(n).enumerate() {
            if k == i {
                row[4 * d + DYAD_BACKWARD] = 1;
                row[4 * d + DYAD_MUTUAL] = 1;
            } else if k == j {
                row[4 * d + DYAD_FORWARD] = 1;
                row[4 * d + DYAD_MUTUAL] = 1;
            }
        }
        rows.push(row);
        statistic_labels.push(format!("in({k})"));
    }
    match mode {
        Reciprocity::Zero => {}
        Reciprocity::Constant => {
            let mut row = vec![0; cols];
            for d in 0..nd {
                row[4 * d + DYAD_MUTUAL] = 1;
            }
            rows.push(row);
            statistic_labels.push("mutual".into());
        }
        Reciprocity::Differential => {
            for k in 0..n {
                let mut row = vec![0; cols];
                for (d, (i, j)) in dyads(n).enumerate() {
                    if k == i || k == j {
                        row[4 * d + DYAD_MUTUAL] = 1;
                    }
                }
                rows.push(row);
                statistic_labels.push(format!("mutual({k})"));
            }
        }
    }

    let cell_labels = dyads(n)
        .flat_map(|(i, j)| DYAD_STATES.iter().map(move |s| format!("dyad({i},{j}):{s}")))
        .collect();
    ModelSpec::build(
        Family::P1 {
            nodes: n,
            reciprocity: mode,
        },
        Matrix::from_rows(rows)?,
        cell_labels,
        statistic_labels,
    )
}

/// Wraps a user-supplied design matrix.
///
/// Labels default to `x1..xr` for cells and `t1..tm` for statistics when
/// `labels` is `None`.
pub fn generic_design(a: Matrix<i64>, labels: Option<Vec<String>>) -> Result<ModelSpec> {
    let cell_labels = labels.unwrap_or_else(|| (1..=a.cols()).map(|c| format!("x{c}")).collect());
    let statistic_labels = (1..=a.rows()).map(|r| format!("t{r}")).collect();
    ModelSpec::build(Family::Generic, a, cell_labels, statistic_labels)
}

/// A simple directed graph without self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(i, j) in &edges {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!("edge {i}->{j} out of range for {n} nodes")));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at node {i}")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidGraph(format!("duplicate edge {i}->{j}")));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Inverse of [`graph_to_table`]; edges come out sorted.
    pub fn from_table(table: &Table) -> Result<Self> {
        let Shape::Dyadic(n) = *table.shape() else {
            return Err(Error::InvalidTable("expected a dyadic table".into()));
        };
        let mut edges = Vec::new();
        for (d, (i, j)) in dyads(n).enumerate() {
            let block = &table.cells()[4 * d..4 * d + 4];
            if block[DYAD_FORWARD] == 1 || block[DYAD_MUTUAL] == 1 {
                edges.push((i, j));
            }
            if block[DYAD_BACKWARD] == 1 || block[DYAD_MUTUAL] == 1 {
                edges.push((j, i));
            }
        }
        edges.sort_unstable();
        Self::new(n, edges)
    }
}

/// Encodes a graph as a dyadic table: one 1 per dyad block at its state.
pub fn graph_to_table(g: &Graph) -> Table {
    let n = g.nodes();
    let mut forward = vec![false; dyad_count(n)];
    let mut backward = vec![false; dyad_count(n)];
    for &(i, j) in g.edges() {
        let d = dyad_index(n, i, j);
        if i < j {
            forward[d] = true;
        } else {
            backward[d] = true;
        }
    }
    let mut cells = vec![0i64; 4 * dyad_count(n)];
    for d in 0..dyad_count(n) {
        let state = match (forward[d], backward[d]) {
            (false, false) => DYAD_NONE,
            (true, false) => DYAD_FORWARD,
            (false, true) => DYAD_BACKWARD,
            (true, true) => DYAD_MUTUAL,
        };
        cells[4 * d + state] = 1;
    }
    Table::new(Shape::Dyadic(n), cells).expect("graph encodes to a valid dyadic table")
}

/// `A u`, exactly.
pub fn sufficient_statistics(spec: &ModelSpec, u: &Table) -> Result<Vec<i64>> {
    spec.design().mul_vec(u.cells())
}

/// `-Σ log(u_c!)`: the log of the unnormalised conditional weight of a
/// table on its fiber under multinomial sampling.
pub fn conditional_log_weight(cells: &[i64]) -> f64 {
    -cells
        .iter()
        .filter(|&&c| c > 1)
        .map(|&c| ln_gamma(c as f64 + 1.0))
        .sum::<f64>()
}

/// Memoised `log(k!)` for the hot loops.
#[derive(Clone, Debug, Default)]
pub struct LogFactorial {
    table: Vec<f64>,
}

impl LogFactorial {
    pub fn new() -> Self {
        Self { table: vec![0.0, 0.0] }
    }

    pub fn get(&mut self, k: i64) -> f64 {
        let k = usize::try_from(k).expect("factorial of a negative count");
        if k >= self.table.len() {
            for i in self.table.len()..=k {
                self.table.push(ln_gamma(i as f64 + 1.0));
            }
        }
        self.table[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sparse_corner_table() -> Table {
        Table::from_rows(&[vec![2, 3, 4], vec![0, 3, 4], vec![0, 0, 1]]).unwrap()
    }

    #[test]
    fn independence_2x2_statistics() {
        let spec = independence_design(2, 2).unwrap();
        assert_eq!((spec.design().rows(), spec.design().cols()), (4, 4));
        let u = Table::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(sufficient_statistics(&spec, &u).unwrap(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn independence_row_block_partitions_cells() {
        let spec = independence_design(3, 3).unwrap();
        assert_eq!((spec.design().rows(), spec.design().cols()), (6, 9));
        let sum: Vec<i64> = (0..9).map(|c| (0..3).map(|r| *spec.design().get(r, c)).sum()).collect();
        assert_eq!(sum, vec![1; 9]);
    }

    #[test]
    fn independence_sparse_corner_table_margins() {
        let spec = independence_design(3, 3).unwrap();
        let t = sufficient_statistics(&spec, &sparse_corner_table()).unwrap();
        assert_eq!(t, vec![9, 7, 1, 2, 6, 9]);
    }

    #[test]
    fn independence_rejects_small_dimensions() {
        assert!(matches!(independence_design(1, 3), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn p1_shapes() {
        let zero = p1_design(3, Reciprocity::Zero).unwrap();
        assert_eq!((zero.design().rows(), zero.design().cols()), (9, 12));
        let constant = p1_design(3, Reciprocity::Constant).unwrap();
        assert_eq!((constant.design().rows(), constant.design().cols()), (10, 12));
        let mutual_row = constant.design().row(9);
        let ones: Vec<usize> = (0..12).filter(|&c| mutual_row[c] == 1).collect();
        assert_eq!(ones, vec![3, 7, 11]);
        assert_eq!(mutual_row.iter().sum::<i64>(), 3);
        let diff = p1_design(4, Reciprocity::Differential).unwrap();
        assert_eq!(diff.design().rows(), 6 + 4 + 4 + 4);
        assert!(matches!(
            p1_design(2, Reciprocity::Zero),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn p1_statistics_of_three_cycle() {
        let spec = p1_design(3, Reciprocity::Constant).unwrap();
        let g = Graph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let t = sufficient_statistics(&spec, &graph_to_table(&g)).unwrap();
        // dyads, out, in, mutual
        assert_eq!(t, vec![1, 1, 1, 1, 1, 1, 1, 1, 1, 0]);
    }

    #[test]
    fn p1_statistics_of_mutual_pair() {
        let spec = p1_design(3, Reciprocity::Constant).unwrap();
        let g = Graph::new(3, vec![(0, 1), (1, 0)]).unwrap();
        let t = sufficient_statistics(&spec, &graph_to_table(&g)).unwrap();
        assert_eq!(t, vec![1, 1, 1, 1, 1, 0, 1, 1, 0, 1]);
    }

    #[test]
    fn generic_design_row_span() {
        let ind = independence_design(2, 2).unwrap();
        assert!(generic_design(ind.design().clone(), None).is_ok());
        let bad = Matrix::from_rows(vec![vec![1, -1]]).unwrap();
        assert!(matches!(generic_design(bad, None), Err(Error::ModelInvalid(_))));
        let scaled = Matrix::from_rows(vec![vec![2, 2]]).unwrap();
        assert!(generic_design(scaled, None).is_ok());
    }

    #[test]
    fn graph_encoding() {
        let t = graph_to_table(&Graph::new(3, vec![(0, 1), (1, 0)]).unwrap());
        assert_eq!(t.cells(), &[0, 0, 0, 1, 1, 0, 0, 0, 1, 0, 0, 0]);

        let cycle = graph_to_table(&Graph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap());
        // {0,1}: 0->1 is "10"; {0,2}: 2->0 is "01"; {1,2}: 1->2 is "10".
        assert_eq!(cycle.cells(), &[0, 1, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0]);

        let empty = graph_to_table(&Graph::new(4, vec![]).unwrap());
        assert_eq!(empty.cells().chunks(4).filter(|b| b[DYAD_NONE] == 1).count(), 6);
    }

    #[test]
    fn graph_validation() {
        assert!(Graph::new(3, vec![(0, 0)]).is_err());
        assert!(Graph::new(3, vec![(0, 3)]).is_err());
        assert!(Graph::new(3, vec![(0, 1), (0, 1)]).is_err());
    }

    #[test]
    fn zero_table_has_zero_statistics() {
        let spec = independence_design(3, 4).unwrap();
        let z = spec.table(vec![0; 12]).unwrap();
        assert!(sufficient_statistics(&spec, &z).unwrap().iter().all(|&x| x == 0));
    }

    #[test]
    fn table_validation() {
        assert!(Table::flat(vec![1, -1]).is_err());
        assert!(Table::new(Shape::Dyadic(3), vec![1; 12]).is_err());
        assert!(Table::new(Shape::Grid(vec![2, 2]), vec![1, 2, 3]).is_err());
    }

    #[test]
    fn log_weights() {
        assert_eq!(conditional_log_weight(&[1, 1, 1]), 0.0);
        assert_relative_eq!(conditional_log_weight(&[2, 0]), -(2f64.ln()), epsilon = 1e-14);
        assert_relative_eq!(
            conditional_log_weight(&[3, 1, 2]),
            -(6f64.ln() + 2f64.ln()),
            epsilon = 1e-13
        );
        let mut lf = LogFactorial::new();
        assert_relative_eq!(lf.get(5), 120f64.ln(), epsilon = 1e-12);
        assert_eq!(lf.get(0), 0.0);
    }

    #[test]
    fn dyad_indexing_is_lexicographic() {
        for n in 3..8 {
            for (d, (i, j)) in dyads(n).enumerate() {
                assert_eq!(dyad_index(n, i, j), d);
                assert_eq!(dyad_index(n, j, i), d);
            }
        }
    }

    fn random_graph() -> impl Strategy<Value = Graph> {
        (3usize..7).prop_flat_map(|n| {
            prop::collection::vec(prop::bool::ANY, n * (n - 1)).prop_map(move |bits| {
                let edges = (0..n)
                    .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                    .zip(bits)
                    .filter_map(|(e, keep)| keep.then_some(e))
                    .collect();
                Graph::new(n, edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn graph_round_trip(g in random_graph()) {
            let t = graph_to_table(&g);
            let back = Graph::from_table(&t).unwrap();
            let mut edges = g.edges().to_vec();
            edges.sort_unstable();
            prop_assert_eq!(back.edges(), &edges[..]);
            prop_assert_eq!(graph_to_table(&back), t);
        }

        #[test]
        fn p1_degree_sums(g in random_graph()) {
            let n = g.nodes();
            let spec = p1_design(n, Reciprocity::Constant).unwrap();
            let t = sufficient_statistics(&spec, &graph_to_table(&g)).unwrap();
            let nd = dyad_count(n);
            let out: i64 = t[nd..nd + n].iter().sum();
            let inn: i64 = t[nd + n..nd + 2 * n].iter().sum();
            let e = g.edges().len() as i64;
            prop_assert_eq!(out, e);
            prop_assert_eq!(inn, e);
            prop_assert!(2 * t[nd + 2 * n] <= e);
        }

        #[test]
        fn statistics_are_linear(
            cells in prop::collection::vec(0i64..5, 12),
            b in prop::collection::vec(-3i64..3, 12),
        ) {
            let spec = independence_design(3, 4).unwrap();
            let u = spec.table(cells.clone()).unwrap();
            let su = sufficient_statistics(&spec, &u).unwrap();
            let sum: Vec<i64> = cells.iter().zip(&b).map(|(x, y)| x + y).collect();
            let lhs = spec.design().mul_vec(&sum).unwrap();
            let ab = spec.design().mul_vec(&b).unwrap();
            let rhs: Vec<i64> = su.iter().zip(&ab).map(|(x, y)| x + y).collect();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
