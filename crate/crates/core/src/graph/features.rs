use std::collections::BTreeMap;
use std::io::BufRead;

use super::{Graph, Indexing, NodeId};
use crate::{Error, Result};

/// Integer-coded node attributes, one column per feature.
///
/// The value `0` means "missing" and never forms a cluster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureTable {
    node_ids: Vec<NodeId>,
    names: Vec<String>,
    columns: Vec<Vec<i64>>,
}

impl FeatureTable {
    pub const MISSING: i64 = 0;

    pub fn new(node_ids: Vec<NodeId>, names: Vec<String>, columns: Vec<Vec<i64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::input("feature names and columns differ in count"));
        }
        if columns.iter().any(|c| c.len() != node_ids.len()) {
            return Err(Error::input("feature column length differs from node count"));
        }
        Ok(FeatureTable {
            node_ids,
            names,
            columns,
        })
    }

    /// Parses a TSV with header `node_id<TAB>feat1<TAB>...`.
    pub fn load_tsv<R: BufRead>(reader: R, indexing: Indexing) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((_, line)) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
                None => return Err(Error::input("feature table is empty")),
            }
        };
        let mut head = header.trim_end_matches(['\r', '\n']).split('\t');
        head.next();
        let names: Vec<String> = head.map(|s| s.trim().to_string()).collect();
        let mut node_ids = Vec::new();
        let mut columns = vec![Vec::new(); names.len()];
        for (idx, line) in lines {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
            if fields.len() != names.len() + 1 {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected {} fields, got {}", names.len() + 1, fields.len()),
                });
            }
            let parse = |tok: &str| -> Result<i64> {
                tok.trim().parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("not an integer: {tok:?}"),
                })
            };
            let raw = parse(fields[0])?;
            let id = match indexing {
                Indexing::ZeroBased => raw,
                Indexing::OneBased => raw - 1,
            };
            if id < 0 {
                return Err(Error::input(format!("line {lineno}: negative node id")));
            }
            node_ids.push(id as NodeId);
            for (col, tok) in columns.iter_mut().zip(&fields[1..]) {
                col.push(parse(tok)?);
            }
        }
        FeatureTable::new(node_ids, names, columns)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.node_ids
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        match self.node_ids.iter().find(|&&v| v >= g.node_count()) {
            Some(v) => Err(Error::input(format!(
                "feature table names node {v}, graph has {} nodes",
                g.node_count()
            ))),
            None => Ok(()),
        }
    }

    /// Members of each non-missing value of feature `feature`, values ascending.
    pub fn groups(&self, feature: usize) -> BTreeMap<i64, Vec<NodeId>> {
        let mut out: BTreeMap<i64, Vec<NodeId>> = BTreeMap::new();
        for (&v, &value) in self.node_ids.iter().zip(&self.columns[feature]) {
            if value != Self::MISSING {
                out.entry(value).or_default().push(v);
            }
        }
        for members in out.values_mut() {
            members.sort_unstable();
            members.dedup();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_groups() {
        let text = "node_id\tdorm\tyear\n0\t217\t2009\n1\t217\t0\n2\t0\t2009\n3\t5\t2008\n";
        let t = FeatureTable::load_tsv(text.as_bytes(), Indexing::ZeroBased).unwrap();
        assert_eq!(t.names(), &["dorm".to_string(), "year".to_string()]);
        let dorms = t.groups(0);
        assert_eq!(dorms[&217], vec![0, 1]);
        assert_eq!(dorms[&5], vec![3]);
        assert!(!dorms.contains_key(&0));
        assert_eq!(t.groups(1)[&2009], vec![0, 2]);
    }

    #[test]
    fn ragged_row_is_a_parse_error() {
        let text = "node_id\ta\n0\t1\t2\n";
        assert!(matches!(
            FeatureTable::load_tsv(text.as_bytes(), Indexing::ZeroBased),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn validate_against_graph() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let t = FeatureTable::new(vec![0, 5], vec!["a".into()], vec![vec![1, 1]]).unwrap();
        assert!(t.validate(&g).is_err());
    }
}
