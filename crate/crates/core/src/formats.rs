//! Text formats: table CSV, edge lists, matrix files and basis files.
//!
//! Blank lines are ignored everywhere. Parse errors carry 1-based line
//! numbers.

use crate::basis::MarkovBasis;
use crate::error::{Error, Result};
use crate::intlin::Matrix;
use crate::model::Graph;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_int(token: &str, line: usize) -> Result<i64> {
    token
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("expected an integer, found {token:?}")))
}

fn parse_count(token: &str, line: usize) -> Result<usize> {
    token
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("expected a nonnegative count, found {token:?}")))
}

fn whitespace_row(line: &str, number: usize) -> Result<Vec<i64>> {
    line.split_whitespace().map(|t| parse_int(t, number)).collect()
}

/// Rectangular CSV of nonnegative integers, no header.
pub fn parse_table_csv(text: &str) -> Result<Vec<Vec<i64>>> {
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for (number, line) in content_lines(text) {
        let row: Vec<i64> = line.split(',').map(|t| parse_int(t, number)).collect::<Result<_>>()?;
        if row.iter().any(|&x| x < 0) {
            return Err(parse_err(number, "negative cell count"));
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(
                    number,
                    format!("row has {} entries, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(1, "empty table"));
    }
    Ok(rows)
}

pub fn write_table_csv(rows: &[Vec<i64>]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&join(row, ","));
        out.push('\n');
    }
    out
}

/// One `i j` pair per line, 0-based node ids below `nodes`.
pub fn parse_edge_list(text: &str, nodes: usize) -> Result<Graph> {
    let mut edges = Vec::new();
    for (number, line) in content_lines(text) {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(parse_err(number, "expected two node ids"));
        }
        let i = parse_count(parts[0], number)?;
        let j = parse_count(parts[1], number)?;
        if i >= nodes || j >= nodes {
            return Err(parse_err(number, format!("node id out of range for {nodes} nodes")));
        }
        if i == j {
            return Err(parse_err(number, "self loop"));
        }
        if edges.contains(&(i, j)) {
            return Err(parse_err(number, "duplicate edge"));
        }
        edges.push((i, j));
    }
    Graph::new(nodes, edges)
}

pub fn write_edge_list(graph: &Graph) -> String {
    graph.edges().iter().map(|(i, j)| format!("{i} {j}\n")).collect()
}

/// Header line `m r`, then `m` rows of `r` integers.
pub fn parse_matrix(text: &str) -> Result<Matrix<i64>> {
    let (rows, cols, body) = parse_block(text)?;
    Matrix::from_rows(check_block(body, rows, cols)?).map_err(|e| parse_err(1, e.to_string()))
}

pub fn write_matrix(a: &Matrix<i64>) -> String {
    let mut out = format!("{} {}\n", a.rows(), a.cols());
    for r in 0..a.rows() {
        out.push_str(&join(a.row(r), " "));
        out.push('\n');
    }
    out
}

/// Header line `r n` (vector length, move count), then `n` moves.
pub fn parse_basis(text: &str) -> Result<Vec<Vec<i64>>> {
    let (len, count, body) = parse_block(text)?;
    check_block(body, count, len)
}

/// Basis file with moves in canonical sign and order.
pub fn write_basis(basis: &MarkovBasis) -> String {
    let mut out = format!("{} {}\n", basis.design().cols(), basis.len());
    for m in basis.moves() {
        out.push_str(&join(m.vector(), " "));
        out.push('\n');
    }
    out
}

type Block = Vec<(usize, Vec<i64>)>;

fn parse_block(text: &str) -> Result<(usize, usize, Block)> {
    let mut lines = content_lines(text);
    let (number, header) = lines.next().ok_or_else(|| parse_err(1, "missing header line"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(number, "header must hold two counts"));
    }
    let first = parse_count(dims[0], number)?;
    let second = parse_count(dims[1], number)?;
    let body = lines
        .map(|(n, l)| whitespace_row(l, n).map(|row| (n, row)))
        .collect::<Result<Vec<_>>>()?;
    Ok((first, second, body))
}

fn check_block(body: Block, rows: usize, cols: usize) -> Result<Vec<Vec<i64>>> {
    if body.len() != rows {
        let line = body.last().map_or(1, |(n, _)| *n);
        return Err(parse_err(line, format!("expected {rows} rows, found {}", body.len())));
    }
    body.into_iter()
        .map(|(n, row)| {
            if row.len() == cols {
                Ok(row)
            } else {
                Err(parse_err(n, format!("expected {cols} entries, found {}", row.len())))
            }
        })
        .collect()
}

fn join(values: &[i64], sep: &str) -> String {
    values.iter().map(i64::to_string).collect::<Vec<_>>().join(sep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::independence_basis;

    #[test]
    fn table_round_trip() {
        let rows = vec![vec![3, 1], vec![1, 3]];
        let text = write_table_csv(&rows);
        assert_eq!(text, "3,1\n1,3\n");
        assert_eq!(parse_table_csv(&text).unwrap(), rows);
        assert_eq!(
            parse_table_csv(" 1, 2 \n\n3,4\n").unwrap(),
            vec![vec![1, 2], vec![3, 4]]
        );
    }

    #[test]
    fn table_errors_name_the_line() {
        assert_eq!(
            parse_table_csv("1,2\n3\n"),
            Err(Error::Parse {
                line: 2,
                message: "row has 1 entries, expected 2".into()
            })
        );
        assert!(matches!(parse_table_csv("1,x\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_table_csv("1,2\n\n-1,0"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(parse_table_csv("\n").is_err());
    }

    #[test]
    fn edge_lists() {
        let g = parse_edge_list("0 1\n1 2\n2 0\n", 4).unwrap();
        assert_eq!(g.nodes(), 4);
        assert_eq!(g.edges().len(), 3);
        assert_eq!(parse_edge_list(&write_edge_list(&g), 4).unwrap(), g);
        assert!(matches!(
            parse_edge_list("0 1\n0 4\n", 4),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_edge_list("1 1\n", 4), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_edge_list("0 1\n0 1\n", 4),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_edge_list("0\n", 4), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn matrix_files() {
        let a = parse_matrix("1 2\n1 1\n").unwrap();
        assert_eq!(a.rows(), 1);
        assert_eq!(a.row(0), &[1, 1]);
        assert_eq!(parse_matrix(&write_matrix(&a)).unwrap(), a);
        assert!(matches!(
            parse_matrix("2 2\n1 1\n1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(parse_matrix("2 2\n1 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_matrix("x 2\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn basis_files() {
        let b = independence_basis(2, 2).unwrap();
        let text = write_basis(&b);
        assert_eq!(text, "4 1\n1 -1 -1 1\n");
        assert_eq!(parse_basis(&text).unwrap(), vec![vec![1, -1, -1, 1]]);
    }
}
