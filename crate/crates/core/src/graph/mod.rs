//! Vertex addressing and occupied-set statistics for the supported graph
//! families.
//!
//! Trees are infinite and addressed by label paths from the root `x`:
//!
//! * root edges carry labels `0..=d` on the homogeneous tree (`d+1` of them),
//!   `1..=d` on the rooted tree;
//! * every non-root vertex has `d` children reached by labels `0..d`.
//!
//! The parent of a nonempty address is its prefix. The all-zero ray
//! `[0], [0,0], ...` is the distinguished end for the level function, so
//! `level(v) = |v| - 2 * (length of the all-zero prefix of v)`.
//!
//! Functions here work on [`SiteAddress`] values and are pure. The simulation
//! engines use the lazily materialized [`SiteArena`] instead, which hands out
//! dense integer ids.

mod arena;
mod edgelist;

pub use arena::{Neighbors, SiteArena, SiteId};
pub use edgelist::parse_edge_list;

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("invalid address {addr} for {graph}")]
    InvalidAddress { addr: String, graph: String },
    #[error("operation `{op}` is not supported on {graph}")]
    Unsupported { op: &'static str, graph: String },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("edge list line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// The graph a process lives on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphSpec {
    /// Homogeneous tree: every vertex has `d + 1` neighbors.
    HomTree {
        d: u32,
    },
    /// Rooted d-ary tree: root has `d` neighbors, every other vertex `d + 1`.
    RootedTree {
        d: u32,
    },
    /// Integer lattice; with `half_width = Some(w)` only `|coord| <= w` exists.
    Lattice {
        dim: u32,
        half_width: Option<i64>,
    },
    Explicit {
        adjacency: Vec<Vec<usize>>,
    },
    TwoSite,
    Path {
        n: usize,
    },
}

impl GraphSpec {
    pub fn hom_tree(d: u32) -> Result<Self, GraphError> {
        let g = GraphSpec::HomTree { d };
        g.validate()?;
        Ok(g)
    }

    pub fn rooted_tree(d: u32) -> Result<Self, GraphError> {
        let g = GraphSpec::RootedTree { d };
        g.validate()?;
        Ok(g)
    }

    pub fn path(n: usize) -> Result<Self, GraphError> {
        let g = GraphSpec::Path { n };
        g.validate()?;
        Ok(g)
    }

    pub fn lattice(dim: u32, half_width: Option<i64>) -> Result<Self, GraphError> {
        let g = GraphSpec::Lattice { dim, half_width };
        g.validate()?;
        Ok(g)
    }

    pub fn explicit(adjacency: Vec<Vec<usize>>) -> Result<Self, GraphError> {
        let g = GraphSpec::Explicit { adjacency };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        match self {
            GraphSpec::HomTree { d } | GraphSpec::RootedTree { d } if *d < 2 => Err(
                GraphError::InvalidGraph(format!("tree branching d = {d} must be >= 2")),
            ),
            GraphSpec::Lattice { dim, half_width } => {
                if *dim == 0 {
                    return Err(GraphError::InvalidGraph(
                        "lattice dimension must be >= 1".into(),
                    ));
                }
                if matches!(half_width, Some(w) if *w < 0) {
                    return Err(GraphError::InvalidGraph(
                        "lattice half-width must be >= 0".into(),
                    ));
                }
                Ok(())
            }
            GraphSpec::Path { n } if *n < 2 => Err(GraphError::InvalidGraph(format!(
                "path length n = {n} must be >= 2"
            ))),
            GraphSpec::Explicit { adjacency } => {
                let n = adjacency.len();
                for (u, nbrs) in adjacency.iter().enumerate() {
                    for &v in nbrs {
                        if v >= n {
                            return Err(GraphError::InvalidGraph(format!(
                                "vertex {u} lists neighbor {v} out of range"
                            )));
                        }
                        if v == u {
                            return Err(GraphError::InvalidGraph(format!("self-loop at {u}")));
                        }
                        if !adjacency[v].contains(&u) {
                            return Err(GraphError::InvalidGraph(format!(
                                "adjacency not symmetric: {u} -> {v}"
                            )));
                        }
                    }
                    let distinct: HashSet<_> = nbrs.iter().collect();
                    if distinct.len() != nbrs.len() {
                        return Err(GraphError::InvalidGraph(format!(
                            "duplicate neighbor at vertex {u}"
                        )));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Number of vertices for finite families.
    pub fn vertex_count(&self) -> Option<usize> {
        match self {
            GraphSpec::Explicit { adjacency } => Some(adjacency.len()),
            GraphSpec::TwoSite => Some(2),
            GraphSpec::Path { n } => Some(*n),
            GraphSpec::Lattice {
                dim,
                half_width: Some(w),
            } => {
                let side = usize::try_from(2 * w + 1).ok()?;
                side.checked_pow(*dim)
            }
            _ => None,
        }
    }

    pub fn is_tree(&self) -> bool {
        matches!(
            self,
            GraphSpec::HomTree { .. } | GraphSpec::RootedTree { .. }
        )
    }

    /// Branching number for tree families.
    pub fn branching(&self) -> Option<u32> {
        match self {
            GraphSpec::HomTree { d } | GraphSpec::RootedTree { d } => Some(*d),
            _ => None,
        }
    }

    /// The default initial site: tree root, lattice origin, or vertex 0.
    pub fn root(&self) -> SiteAddress {
        match self {
            GraphSpec::HomTree { .. } | GraphSpec::RootedTree { .. } => SiteAddress::root(),
            GraphSpec::Lattice { dim, .. } => SiteAddress::Lattice(vec![0; *dim as usize]),
            _ => SiteAddress::Index(0),
        }
    }

    /// Adjacency lists for finite families (index-addressed).
    pub(crate) fn finite_adjacency(&self) -> Option<Vec<Vec<usize>>> {
        match self {
            GraphSpec::Explicit { adjacency } => Some(adjacency.clone()),
            GraphSpec::TwoSite => Some(vec![vec![1], vec![0]]),
            GraphSpec::Path { n } => Some(
                (0..*n)
                    .map(|i| {
                        let mut v = Vec::with_capacity(2);
                        if i > 0 {
                            v.push(i - 1);
                        }
                        if i + 1 < *n {
                            v.push(i + 1);
                        }
                        v
                    })
                    .collect(),
            ),
            _ => None,
        }
    }

    fn name(&self) -> String {
        match self {
            GraphSpec::HomTree { d } => format!("HomTree({d})"),
            GraphSpec::RootedTree { d } => format!("RootedTree({d})"),
            GraphSpec::Lattice {
                dim,
                half_width: None,
            } => format!("Lattice({dim})"),
            GraphSpec::Lattice {
                dim,
                half_width: Some(w),
            } => format!("Lattice({dim}, box {w})"),
            GraphSpec::Explicit { adjacency } => format!("Explicit({} vertices)", adjacency.len()),
            GraphSpec::TwoSite => "TwoSite".into(),
            GraphSpec::Path { n } => format!("Path({n})"),
        }
    }

    fn invalid(&self, v: &SiteAddress) -> GraphError {
        GraphError::InvalidAddress {
            addr: v.to_string(),
            graph: self.name(),
        }
    }

    pub fn check_address(&self, v: &SiteAddress) -> Result<(), GraphError> {
        let ok = match (self, v) {
            (GraphSpec::HomTree { d }, SiteAddress::Tree(labels)) => match labels.split_first() {
                None => true,
                Some((&first, rest)) => first <= *d && rest.iter().all(|&l| l < *d),
            },
            (GraphSpec::RootedTree { d }, SiteAddress::Tree(labels)) => {
                match labels.split_first() {
                    None => true,
                    Some((&first, rest)) => {
                        (1..=*d).contains(&first) && rest.iter().all(|&l| l < *d)
                    }
                }
            }
            (GraphSpec::Lattice { dim, half_width }, SiteAddress::Lattice(c)) => {
                c.len() == *dim as usize
                    && half_width.is_none_or(|w| c.iter().all(|x| x.abs() <= w))
            }
            (g, SiteAddress::Index(i)) => {
                g.vertex_count().is_some_and(|n| *i < n) && !matches!(g, GraphSpec::Lattice { .. })
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(self.invalid(v))
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Canonical identity of a vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SiteAddress {
    /// Label path from the root; empty for the root itself.
    Tree(Vec<u32>),
    Lattice(Vec<i64>),
    Index(usize),
}

impl SiteAddress {
    pub fn root() -> Self {
        SiteAddress::Tree(Vec::new())
    }

    pub fn tree(labels: &[u32]) -> Self {
        SiteAddress::Tree(labels.to_vec())
    }

    /// Parses the textual form produced by `Display` for the given graph.
    pub fn parse(g: &GraphSpec, s: &str) -> Result<Self, GraphError> {
        let s = s.trim();
        let bad = || GraphError::InvalidAddress {
            addr: s.to_string(),
            graph: g.name(),
        };
        let addr = match g {
            GraphSpec::HomTree { .. } | GraphSpec::RootedTree { .. } => {
                let body = s.strip_prefix('/').ok_or_else(bad)?;
                if body.is_empty() {
                    SiteAddress::root()
                } else {
                    let labels = body
                        .split('/')
                        .map(|p| p.parse::<u32>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| bad())?;
                    SiteAddress::Tree(labels)
                }
            }
            GraphSpec::Lattice { .. } => SiteAddress::Lattice(
                s.split(',')
                    .map(|p| p.trim().parse::<i64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| bad())?,
            ),
            _ => SiteAddress::Index(s.parse().map_err(|_| bad())?),
        };
        g.check_address(&addr)?;
        Ok(addr)
    }
}

impl fmt::Display for SiteAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteAddress::Tree(labels) if labels.is_empty() => f.write_str("/"),
            SiteAddress::Tree(labels) => {
                for l in labels {
                    write!(f, "/{l}")?;
                }
                Ok(())
            }
            SiteAddress::Lattice(c) => {
                for (i, x) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            SiteAddress::Index(i) => write!(f, "{i}"),
        }
    }
}

/// All vertices adjacent to `v`: parent first, then children by label on
/// trees; `-e_i, +e_i` for each axis on lattices; adjacency order otherwise.
pub fn neighbors(g: &GraphSpec, v: &SiteAddress) -> Result<Vec<SiteAddress>, GraphError> {
    g.check_address(v)?;
    let out = match (g, v) {
        (GraphSpec::HomTree { d }, SiteAddress::Tree(labels))
        | (GraphSpec::RootedTree { d }, SiteAddress::Tree(labels)) => {
            let mut out = Vec::with_capacity(*d as usize + 1);
            let child_labels = if labels.is_empty() {
                if matches!(g, GraphSpec::HomTree { .. }) {
                    0..=*d
                } else {
                    1..=*d
                }
            } else {
                out.push(SiteAddress::Tree(labels[..labels.len() - 1].to_vec()));
                0..=(*d - 1)
            };
            for c in child_labels {
                let mut child = labels.clone();
                child.push(c);
                out.push(SiteAddress::Tree(child));
            }
            out
        }
        (GraphSpec::Lattice { half_width, .. }, SiteAddress::Lattice(c)) => {
            let mut out = Vec::with_capacity(2 * c.len());
            for i in 0..c.len() {
                for step in [-1, 1] {
                    let mut n = c.clone();
                    n[i] += step;
                    if half_width.is_none_or(|w| n[i].abs() <= w) {
                        out.push(SiteAddress::Lattice(n));
                    }
                }
            }
            out
        }
        (g, SiteAddress::Index(i)) => {
            let adj = g.finite_adjacency().ok_or_else(|| g.invalid(v))?;
            adj[*i].iter().map(|&j| SiteAddress::Index(j)).collect()
        }
        _ => return Err(g.invalid(v)),
    };
    Ok(out)
}

/// Horofunction toward the all-zero end: the root is at level 0, and every
/// vertex has exactly one neighbor one level down and `d` one level up.
pub fn level(g: &GraphSpec, v: &SiteAddress) -> Result<i64, GraphError> {
    if !g.is_tree() {
        return Err(GraphError::Unsupported {
            op: "level",
            graph: g.name(),
        });
    }
    g.check_address(v)?;
    let SiteAddress::Tree(labels) = v else {
        return Err(g.invalid(v));
    };
    let zeros = labels.iter().take_while(|&&l| l == 0).count();
    Ok(labels.len() as i64 - 2 * zeros as i64)
}

fn occupied_set<'a>(
    g: &GraphSpec,
    a: impl IntoIterator<Item = &'a SiteAddress>,
) -> Result<HashSet<&'a SiteAddress>, GraphError> {
    let mut set = HashSet::new();
    for v in a {
        g.check_address(v)?;
        set.insert(v);
    }
    Ok(set)
}

/// `#{(x, y) : x in A, y not in A, x ~ y}` by direct enumeration.
pub fn boundary_pairs<'a>(
    g: &GraphSpec,
    a: impl IntoIterator<Item = &'a SiteAddress>,
) -> Result<u64, GraphError> {
    let set = occupied_set(g, a)?;
    let mut count = 0;
    for x in &set {
        count += neighbors(g, x)?.iter().filter(|y| !set.contains(y)).count() as u64;
    }
    Ok(count)
}

/// Connected components of the subgraph induced by `A`.
///
/// Components are numbered `0..count` in order of their smallest address.
pub fn components<'a>(
    g: &GraphSpec,
    a: impl IntoIterator<Item = &'a SiteAddress>,
) -> Result<(usize, BTreeMap<SiteAddress, usize>), GraphError> {
    let set = occupied_set(g, a)?;
    let mut sorted: Vec<&SiteAddress> = set.iter().copied().collect();
    sorted.sort();
    let mut label: BTreeMap<SiteAddress, usize> = BTreeMap::new();
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in sorted {
        if label.contains_key(start) {
            continue;
        }
        label.insert(start.clone(), count);
        queue.push_back(start.clone());
        while let Some(x) = queue.pop_front() {
            for y in neighbors(g, &x)? {
                if set.contains(&y) && !label.contains_key(&y) {
                    label.insert(y.clone(), count);
                    queue.push_back(y);
                }
            }
        }
        count += 1;
    }
    Ok((count, label))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(labels: &[u32]) -> SiteAddress {
        SiteAddress::tree(labels)
    }

    #[test]
    fn homtree_root_has_d_plus_one_neighbors() {
        let g = GraphSpec::hom_tree(2).unwrap();
        assert_eq!(
            neighbors(&g, &t(&[])).unwrap(),
            vec![t(&[0]), t(&[1]), t(&[2])]
        );
        let nb = neighbors(&g, &t(&[1, 0])).unwrap();
        assert_eq!(nb, vec![t(&[1]), t(&[1, 0, 0]), t(&[1, 0, 1])]);
    }

    #[test]
    fn rooted_tree_root_has_d_neighbors() {
        let g = GraphSpec::rooted_tree(2).unwrap();
        assert_eq!(neighbors(&g, &t(&[])).unwrap(), vec![t(&[1]), t(&[2])]);
        assert_eq!(neighbors(&g, &t(&[2])).unwrap().len(), 3);
        assert!(g.check_address(&t(&[0])).is_err());
    }

    #[test]
    fn path_middle_vertex() {
        let g = GraphSpec::path(3).unwrap();
        let nb = neighbors(&g, &SiteAddress::Index(1)).unwrap();
        assert_eq!(nb, vec![SiteAddress::Index(0), SiteAddress::Index(2)]);
    }

    #[test]
    fn invalid_addresses_rejected() {
        let g = GraphSpec::hom_tree(2).unwrap();
        assert!(neighbors(&g, &t(&[3])).is_err());
        assert!(neighbors(&g, &t(&[1, 2])).is_err());
        assert!(neighbors(&g, &SiteAddress::Index(0)).is_err());
        assert!(neighbors(&GraphSpec::TwoSite, &SiteAddress::Index(2)).is_err());
        let lat = GraphSpec::lattice(2, Some(1)).unwrap();
        assert!(neighbors(&lat, &SiteAddress::Lattice(vec![2, 0])).is_err());
        assert!(GraphSpec::hom_tree(1).is_err());
        assert!(GraphSpec::explicit(vec![vec![1], vec![]]).is_err());
        assert!(GraphSpec::explicit(vec![vec![0]]).is_err());
    }

    #[test]
    fn lattice_neighbors_respect_box() {
        let g = GraphSpec::lattice(2, Some(1)).unwrap();
        let nb = neighbors(&g, &SiteAddress::Lattice(vec![1, 0])).unwrap();
        assert_eq!(nb.len(), 3);
        let free = GraphSpec::lattice(3, None).unwrap();
        assert_eq!(neighbors(&free, &free.root()).unwrap().len(), 6);
    }

    #[test]
    fn level_examples() {
        let g = GraphSpec::hom_tree(2).unwrap();
        assert_eq!(level(&g, &t(&[])).unwrap(), 0);
        assert_eq!(level(&g, &t(&[0])).unwrap(), -1);
        assert_eq!(level(&g, &t(&[0, 0])).unwrap(), -2);
        assert_eq!(level(&g, &t(&[1, 1])).unwrap(), 2);
        assert_eq!(level(&g, &t(&[0, 1])).unwrap(), 0);
        assert!(matches!(
            level(&GraphSpec::TwoSite, &SiteAddress::Index(0)),
            Err(GraphError::Unsupported { .. })
        ));
    }

    #[test]
    fn level_defining_property_by_enumeration() {
        let g = GraphSpec::hom_tree(3).unwrap();
        for v in [
            t(&[]),
            t(&[0]),
            t(&[0, 0]),
            t(&[0, 0, 2]),
            t(&[3, 1]),
            t(&[0, 1, 0]),
        ] {
            let lv = level(&g, &v).unwrap();
            let nb = neighbors(&g, &v).unwrap();
            let down = nb
                .iter()
                .filter(|u| level(&g, u).unwrap() == lv - 1)
                .count();
            let up = nb
                .iter()
                .filter(|u| level(&g, u).unwrap() == lv + 1)
                .count();
            assert_eq!((down, up), (1, 3), "at {v}");
        }
    }

    #[test]
    fn boundary_pair_examples() {
        let g = GraphSpec::hom_tree(2).unwrap();
        assert_eq!(boundary_pairs(&g, &[t(&[])]).unwrap(), 3);
        assert_eq!(boundary_pairs(&g, &[t(&[]), t(&[1])]).unwrap(), 4);
        assert_eq!(boundary_pairs(&g, &[t(&[0]), t(&[1])]).unwrap(), 6);
    }

    #[test]
    fn component_examples() {
        let g = GraphSpec::hom_tree(2).unwrap();
        assert_eq!(components(&g, &[]).unwrap().0, 0);
        assert_eq!(components(&g, &[t(&[]), t(&[2])]).unwrap().0, 1);
        let (c, lab) = components(&g, &[t(&[0]), t(&[1])]).unwrap();
        assert_eq!(c, 2);
        assert_ne!(lab[&t(&[0])], lab[&t(&[1])]);
    }

    #[test]
    fn address_text_round_trip() {
        let g = GraphSpec::hom_tree(3).unwrap();
        for v in [t(&[]), t(&[3, 0, 2])] {
            assert_eq!(SiteAddress::parse(&g, &v.to_string()).unwrap(), v);
        }
        let lat = GraphSpec::lattice(2, None).unwrap();
        let v = SiteAddress::Lattice(vec![-3, 4]);
        assert_eq!(v.to_string(), "-3,4");
        assert_eq!(SiteAddress::parse(&lat, "-3,4").unwrap(), v);
        assert!(SiteAddress::parse(&g, "1/2").is_err());
    }
}
