use super::{GraphError, GraphSpec};

/// Reads an undirected edge list: one `u v` pair per line, vertices as
/// nonnegative integers, `#` starts a comment. Duplicate edges collapse.
pub fn parse_edge_list(text: &str) -> Result<GraphSpec, GraphError> {
    let mut edges = Vec::new();
    let mut n = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| GraphError::Parse {
            line: i + 1,
            msg: msg.to_string(),
        };
        let mut fields = line.split_whitespace();
        let mut vertex = || -> Result<usize, GraphError> {
            fields
                .next()
                .ok_or_else(|| err("expected two vertices"))?
                .parse()
                .map_err(|_| err("vertex is not a nonnegative integer"))
        };
        let (u, v) = (vertex()?, vertex()?);
        if fields.next().is_some() {
            return Err(err("trailing fields"));
        }
        if u == v {
            return Err(err("self-loop"));
        }
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v));
    }
    let mut adjacency = vec![Vec::new(); n];
    for (u, v) in edges {
        if !adjacency[u].contains(&v) {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
    }
    for nbrs in &mut adjacency {
        nbrs.sort_unstable();
    }
    GraphSpec::explicit(adjacency)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_duplicates() {
        let g = parse_edge_list("# square\n0 1\n1 2 # inline\n\n2 3\n3 0\n1 0\n").unwrap();
        assert_eq!(
            g,
            GraphSpec::Explicit {
                adjacency: vec![vec![1, 3], vec![0, 2], vec![1, 3], vec![0, 2]]
            }
        );
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(
            parse_edge_list("0 0\n"),
            Err(GraphError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1\n1 x\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(parse_edge_list("0 1 2\n").is_err());
        assert!(parse_edge_list("0\n").is_err());
    }
}
