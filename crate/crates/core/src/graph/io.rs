use std::io::{BufRead, Write};

use super::{Graph, NodeId};
use crate::{Error, Result};

/// How node ids in an edge-list file are numbered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Indexing {
    #[default]
    ZeroBased,
    OneBased,
}

/// Reads a whitespace-separated `u v` edge list. Blank lines and lines whose
/// first non-blank character is `#` are skipped. The node count is one more
/// than the largest id seen.
pub fn load_edge_list<R: BufRead>(reader: R, indexing: Indexing) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut max_id: Option<NodeId> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected two node ids, got {trimmed:?}"),
            });
        };
        let u = parse_id(a, lineno, indexing)?;
        let v = parse_id(b, lineno, indexing)?;
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push((u, v));
    }
    let n = max_id.map_or(0, |m| m + 1);
    Graph::from_edges(n, edges)
}

pub fn parse_edge_list(text: &str, indexing: Indexing) -> Result<Graph> {
    load_edge_list(text.as_bytes(), indexing)
}

fn parse_id(token: &str, line: usize, indexing: Indexing) -> Result<NodeId> {
    let raw: i64 = token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("not an integer node id: {token:?}"),
    })?;
    let id = match indexing {
        Indexing::ZeroBased => raw,
        Indexing::OneBased => raw - 1,
    };
    if id < 0 {
        return Err(Error::input(format!(
            "line {line}: negative node id {id} after index normalization"
        )));
    }
    usize::try_from(id).map_err(|_| Error::input(format!("line {line}: node id {id} too large")))
}

/// Writes zero-based `u v` lines (`u < v`) after a comment header.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "# nodes {} edges {}", g.node_count(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_of_three() {
        let g = parse_edge_list("0 1\n1 2", Indexing::ZeroBased).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        let degrees: Vec<u64> = (0..3).map(|v| g.degree(v)).collect();
        assert_eq!(degrees, vec![1, 2, 1]);
    }

    #[test]
    fn duplicates_and_self_loops_dropped() {
        let g = parse_edge_list("0 1\n1 0\n1 1", Indexing::ZeroBased).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn comments_and_one_based() {
        let g = parse_edge_list("# header\n  # indented\n\n1 2\n2\t3\n", Indexing::OneBased).unwrap();
        assert_eq!(g.node_count(), 3);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2));
    }

    #[test]
    fn malformed_token_reports_line() {
        match parse_edge_list("0 1\n1 x\n", Indexing::ZeroBased) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_edge_list("0 1 2\n", Indexing::ZeroBased),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn negative_after_normalization() {
        assert!(matches!(
            parse_edge_list("0 1\n", Indexing::OneBased),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            parse_edge_list("-1 1\n", Indexing::ZeroBased),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn write_then_read() {
        let g = parse_edge_list("0 1\n1 2\n2 0\n2 3\n", Indexing::ZeroBased).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let back = load_edge_list(buf.as_slice(), Indexing::ZeroBased).unwrap();
        assert_eq!(g, back);
    }
}
