use super::{GraphError, GraphSpec, SiteAddress};
use std::collections::HashMap;

const NONE: u32 = u32::MAX;

/// Dense per-run identifier of a materialized vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteId(pub u32);

impl SiteId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
struct TreeNode {
    parent: u32,
    label: u32,
    level: i32,
    /// Address is all zeros (the root included).
    on_ray: bool,
    /// First id of the contiguous child block, or `NONE` until materialized.
    children: u32,
}

#[derive(Debug, Clone)]
struct TreeArena {
    d: u32,
    rooted: bool,
    nodes: Vec<TreeNode>,
}

impl TreeArena {
    fn child_count(&self, id: u32) -> u32 {
        match (id, self.rooted) {
            (0, false) => self.d + 1,
            _ => self.d,
        }
    }

    /// Child-block index of an edge label below `id`.
    fn label_to_slot(&self, id: u32, label: u32) -> u32 {
        if id == 0 && self.rooted {
            label - 1
        } else {
            label
        }
    }

    fn ensure_children(&mut self, id: u32) -> u32 {
        let node = &self.nodes[id as usize];
        if node.children != NONE {
            return node.children;
        }
        let first = self.nodes.len() as u32;
        let (level, on_ray) = (node.level, node.on_ray);
        let count = self.child_count(id);
        for slot in 0..count {
            let label = if id == 0 && self.rooted {
                slot + 1
            } else {
                slot
            };
            let child_on_ray = on_ray && label == 0;
            let child_level = if child_on_ray { level - 1 } else { level + 1 };
            self.nodes.push(TreeNode {
                parent: id,
                label,
                level: child_level,
                on_ray: child_on_ray,
                children: NONE,
            });
        }
        self.nodes[id as usize].children = first;
        first
    }
}

#[derive(Debug, Clone)]
struct LatticeArena {
    dim: usize,
    half_width: Option<i64>,
    coords: Vec<i64>,
    index: HashMap<Vec<i64>, u32>,
    nbrs: Vec<Option<Vec<u32>>>,
}

impl LatticeArena {
    fn intern(&mut self, c: &[i64]) -> u32 {
        if let Some(&id) = self.index.get(c) {
            return id;
        }
        let id = self.nbrs.len() as u32;
        self.coords.extend_from_slice(c);
        self.index.insert(c.to_vec(), id);
        self.nbrs.push(None);
        id
    }

    fn ensure(&mut self, id: u32) {
        if self.nbrs[id as usize].is_some() {
            return;
        }
        let base = id as usize * self.dim;
        let here: Vec<i64> = self.coords[base..base + self.dim].to_vec();
        let mut out = Vec::with_capacity(2 * self.dim);
        let mut c = here.clone();
        for i in 0..self.dim {
            for step in [-1, 1] {
                c[i] = here[i] + step;
                if self.half_width.is_none_or(|w| c[i].abs() <= w) {
                    out.push(self.intern(&c));
                }
            }
            c[i] = here[i];
        }
        self.nbrs[id as usize] = Some(out);
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Tree(TreeArena),
    Lattice(LatticeArena),
    Finite(Vec<Vec<u32>>),
}

/// Lazily materialized vertex set of a graph.
///
/// Ids are handed out in first-touch order, so on infinite graphs only the
/// neighborhood of visited sites exists in memory. Tree children are
/// allocated as one contiguous block the first time a vertex's neighbors are
/// requested.
#[derive(Debug, Clone)]
pub struct SiteArena {
    backend: Backend,
    max_degree: u32,
}

/// Neighbors of one site in deterministic order.
#[derive(Debug, Clone)]
pub enum Neighbors<'a> {
    Tree {
        parent: Option<u32>,
        next: u32,
        end: u32,
    },
    Slice(std::slice::Iter<'a, u32>),
}

impl Iterator for Neighbors<'_> {
    type Item = SiteId;

    #[inline]
    fn next(&mut self) -> Option<SiteId> {
        match self {
            Neighbors::Tree { parent, next, end } => {
                if let Some(p) = parent.take() {
                    return Some(SiteId(p));
                }
                if next < end {
                    *next += 1;
                    Some(SiteId(*next - 1))
                } else {
                    None
                }
            }
            Neighbors::Slice(it) => it.next().map(|&i| SiteId(i)),
        }
    }
}

impl SiteArena {
    /// Creates an arena whose id 0 is the graph's root site.
    pub fn new(g: &GraphSpec) -> Result<Self, GraphError> {
        g.validate()?;
        let (backend, max_degree) = match g {
            GraphSpec::HomTree { d } | GraphSpec::RootedTree { d } => (
                Backend::Tree(TreeArena {
                    d: *d,
                    rooted: matches!(g, GraphSpec::RootedTree { .. }),
                    nodes: vec![TreeNode {
                        parent: NONE,
                        label: 0,
                        level: 0,
                        on_ray: true,
                        children: NONE,
                    }],
                }),
                d + 1,
            ),
            GraphSpec::Lattice { dim, half_width } => {
                let mut lat = LatticeArena {
                    dim: *dim as usize,
                    half_width: *half_width,
                    coords: Vec::new(),
                    index: HashMap::new(),
                    nbrs: Vec::new(),
                };
                lat.intern(&vec![0; *dim as usize]);
                (Backend::Lattice(lat), 2 * dim)
            }
            _ => {
                let adj = g.finite_adjacency().expect("finite family");
                let adj: Vec<Vec<u32>> = adj
                    .into_iter()
                    .map(|v| v.into_iter().map(|i| i as u32).collect())
                    .collect();
                let max = adj.iter().map(Vec::len).max().unwrap_or(0) as u32;
                (Backend::Finite(adj), max)
            }
        };
        Ok(SiteArena {
            backend,
            max_degree,
        })
    }

    /// Number of materialized sites; valid ids are `0..len()`.
    pub fn len(&self) -> usize {
        match &self.backend {
            Backend::Tree(t) => t.nodes.len(),
            Backend::Lattice(l) => l.nbrs.len(),
            Backend::Finite(a) => a.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn root(&self) -> SiteId {
        SiteId(0)
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Materializes (if needed) and returns the neighbors of `id`.
    #[inline]
    pub fn neighbors(&mut self, id: SiteId) -> Neighbors<'_> {
        match &mut self.backend {
            Backend::Tree(t) => {
                let first = t.ensure_children(id.0);
                let parent = t.nodes[id.idx()].parent;
                Neighbors::Tree {
                    parent: (parent != NONE).then_some(parent),
                    next: first,
                    end: first + t.child_count(id.0),
                }
            }
            Backend::Lattice(l) => {
                l.ensure(id.0);
                Neighbors::Slice(l.nbrs[id.idx()].as_ref().expect("materialized").iter())
            }
            Backend::Finite(a) => Neighbors::Slice(a[id.idx()].iter()),
        }
    }

    #[inline]
    pub fn degree(&mut self, id: SiteId) -> u32 {
        match &mut self.backend {
            Backend::Tree(t) => t.child_count(id.0) + u32::from(id.0 != 0),
            Backend::Lattice(l) => {
                l.ensure(id.0);
                l.nbrs[id.idx()].as_ref().expect("materialized").len() as u32
            }
            Backend::Finite(a) => a[id.idx()].len() as u32,
        }
    }

    /// The `j`-th neighbor in [`Self::neighbors`] order, if `j < degree`.
    #[inline]
    pub fn neighbor(&mut self, id: SiteId, j: u32) -> Option<SiteId> {
        match &mut self.backend {
            Backend::Tree(t) => {
                let first = t.ensure_children(id.0);
                let has_parent = id.0 != 0;
                if has_parent && j == 0 {
                    return Some(SiteId(t.nodes[id.idx()].parent));
                }
                let slot = j - u32::from(has_parent);
                (slot < t.child_count(id.0)).then_some(SiteId(first + slot))
            }
            Backend::Lattice(l) => {
                l.ensure(id.0);
                l.nbrs[id.idx()]
                    .as_ref()
                    .expect("materialized")
                    .get(j as usize)
                    .map(|&i| SiteId(i))
            }
            Backend::Finite(a) => a[id.idx()].get(j as usize).map(|&i| SiteId(i)),
        }
    }

    /// Tree level of a site; `None` on non-tree graphs.
    #[inline]
    pub fn level(&self, id: SiteId) -> Option<i32> {
        match &self.backend {
            Backend::Tree(t) => Some(t.nodes[id.idx()].level),
            _ => None,
        }
    }

    pub fn address(&self, id: SiteId) -> SiteAddress {
        match &self.backend {
            Backend::Tree(t) => {
                let mut labels = Vec::new();
                let mut cur = id.0;
                while cur != 0 {
                    let n = &t.nodes[cur as usize];
                    labels.push(n.label);
                    cur = n.parent;
                }
                labels.reverse();
                SiteAddress::Tree(labels)
            }
            Backend::Lattice(l) => {
                let base = id.idx() * l.dim;
                SiteAddress::Lattice(l.coords[base..base + l.dim].to_vec())
            }
            Backend::Finite(_) => SiteAddress::Index(id.idx()),
        }
    }

    /// Looks up or materializes the site with the given address.
    pub fn intern(&mut self, g: &GraphSpec, v: &SiteAddress) -> Result<SiteId, GraphError> {
        g.check_address(v)?;
        match (&mut self.backend, v) {
            (Backend::Tree(t), SiteAddress::Tree(labels)) => {
                let mut cur = 0u32;
                for &l in labels {
                    let first = t.ensure_children(cur);
                    cur = first + t.label_to_slot(cur, l);
                }
                Ok(SiteId(cur))
            }
            (Backend::Lattice(l), SiteAddress::Lattice(c)) => Ok(SiteId(l.intern(c))),
            (Backend::Finite(_), SiteAddress::Index(i)) => Ok(SiteId(*i as u32)),
            _ => Err(GraphError::InvalidAddress {
                addr: v.to_string(),
                graph: g.to_string(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{level, neighbors};

    #[test]
    fn arena_agrees_with_address_functions() {
        for g in [
            GraphSpec::hom_tree(2).unwrap(),
            GraphSpec::hom_tree(3).unwrap(),
            GraphSpec::rooted_tree(2).unwrap(),
        ] {
            let mut arena = SiteArena::new(&g).unwrap();
            let mut frontier = vec![arena.root()];
            for _ in 0..4 {
                let mut next = Vec::new();
                for id in frontier {
                    let addr = arena.address(id);
                    let nb: Vec<SiteId> = arena.neighbors(id).collect();
                    let expect = neighbors(&g, &addr).unwrap();
                    let got: Vec<SiteAddress> = nb.iter().map(|&n| arena.address(n)).collect();
                    assert_eq!(got, expect);
                    assert_eq!(arena.degree(id) as usize, expect.len());
                    for (j, &n) in nb.iter().enumerate() {
                        assert_eq!(arena.neighbor(id, j as u32), Some(n));
                    }
                    assert_eq!(arena.neighbor(id, nb.len() as u32), None);
                    assert_eq!(arena.level(id).unwrap() as i64, level(&g, &addr).unwrap());
                    assert_eq!(arena.intern(&g, &addr).unwrap(), id);
                    next.extend(nb);
                }
                next.sort();
                next.dedup();
                frontier = next;
            }
        }
    }

    #[test]
    fn intern_deep_zero_ray() {
        let g = GraphSpec::hom_tree(2).unwrap();
        let mut arena = SiteArena::new(&g).unwrap();
        let id = arena.intern(&g, &SiteAddress::tree(&[0, 0, 0, 1])).unwrap();
        assert_eq!(arena.level(id), Some(-2));
        assert_eq!(arena.address(id), SiteAddress::tree(&[0, 0, 0, 1]));
    }

    #[test]
    fn lattice_arena() {
        let g = GraphSpec::lattice(2, Some(1)).unwrap();
        let mut arena = SiteArena::new(&g).unwrap();
        let root = arena.root();
        assert_eq!(arena.degree(root), 4);
        let corner = arena.intern(&g, &SiteAddress::Lattice(vec![1, 1])).unwrap();
        assert_eq!(arena.degree(corner), 2);
        let nb: Vec<_> = arena.neighbors(corner).collect();
        let addrs: Vec<_> = nb.iter().map(|&n| arena.address(n)).collect();
        assert_eq!(
            addrs,
            neighbors(&g, &SiteAddress::Lattice(vec![1, 1])).unwrap()
        );
    }
}
