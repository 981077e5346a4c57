use super::ExactError;
use crate::graph::GraphSpec;
use std::collections::HashMap;
use std::fmt;

/// Hard cap on the vertex count accepted by the enumerator.
pub const MAX_VERTICES: usize = 12;

/// An occupied vertex set with its partition into type blocks. Type labels
/// are forgotten: blocks are bit masks sorted by their lowest vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LumpedState {
    occupied: u32,
    blocks: Vec<u32>,
}

impl LumpedState {
    pub fn empty() -> Self {
        LumpedState {
            occupied: 0,
            blocks: Vec::new(),
        }
    }

    /// Builds a state from blocks given as vertex lists.
    pub fn new<B: AsRef<[usize]>>(blocks: &[B]) -> Result<Self, ExactError> {
        let mut masks = Vec::with_capacity(blocks.len());
        for b in blocks {
            let mut m = 0u32;
            for &v in b.as_ref() {
                if v >= 32 {
                    return Err(ExactError::InvalidState(format!("vertex {v} out of range")));
                }
                m |= 1 << v;
            }
            if m == 0 {
                return Err(ExactError::InvalidState("empty block".into()));
            }
            masks.push(m);
        }
        Self::from_masks(masks)
    }

    pub fn from_masks(mut blocks: Vec<u32>) -> Result<Self, ExactError> {
        let mut occupied = 0u32;
        for &b in &blocks {
            if b == 0 || occupied & b != 0 {
                return Err(ExactError::InvalidState(
                    "blocks must be nonempty and disjoint".into(),
                ));
            }
            occupied |= b;
        }
        blocks.sort_unstable_by_key(|b| b.trailing_zeros());
        Ok(LumpedState { occupied, blocks })
    }

    /// Every vertex of `mask` in its own block.
    pub fn singletons(mask: u32) -> Self {
        let blocks = (0..32)
            .filter(|v| mask >> v & 1 == 1)
            .map(|v| 1u32 << v)
            .collect();
        LumpedState {
            occupied: mask,
            blocks,
        }
    }

    /// All vertices of `mask` in one block.
    pub fn single_block(mask: u32) -> Self {
        let blocks = if mask == 0 { Vec::new() } else { vec![mask] };
        LumpedState {
            occupied: mask,
            blocks,
        }
    }

    pub fn occupied(&self) -> u32 {
        self.occupied
    }

    pub fn blocks(&self) -> &[u32] {
        &self.blocks
    }

    pub fn is_empty(&self) -> bool {
        self.occupied == 0
    }

    fn canonical(mut blocks: Vec<u32>) -> Self {
        let occupied = blocks.iter().fold(0, |a, b| a | b);
        blocks.sort_unstable_by_key(|b| b.trailing_zeros());
        LumpedState { occupied, blocks }
    }

    /// State after removing block `i`.
    pub(crate) fn without_block(&self, i: usize) -> Self {
        let mut blocks = self.blocks.clone();
        blocks.remove(i);
        LumpedState {
            occupied: self.occupied & !self.blocks[i],
            blocks,
        }
    }

    /// State after removing vertex `v`.
    pub(crate) fn without_vertex(&self, v: usize) -> Self {
        let bit = 1u32 << v;
        let blocks = self
            .blocks
            .iter()
            .map(|b| b & !bit)
            .filter(|&b| b != 0)
            .collect();
        LumpedState::canonical(blocks)
    }

    /// State after `y` joins block `i`.
    pub(crate) fn join(&self, i: usize, y: usize) -> Self {
        let mut blocks = self.blocks.clone();
        blocks[i] |= 1 << y;
        LumpedState::canonical(blocks)
    }

    /// State after `y` appears as a new block.
    pub(crate) fn with_singleton(&self, y: usize) -> Self {
        let mut blocks = self.blocks.clone();
        blocks.push(1 << y);
        LumpedState::canonical(blocks)
    }
}

impl fmt::Display for LumpedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return f.write_str("{}");
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            let vs: Vec<String> = (0..32)
                .filter(|v| b >> v & 1 == 1)
                .map(|v| v.to_string())
                .collect();
            write!(f, "{{{}}}", vs.join(","))?;
        }
        Ok(())
    }
}

/// All lumped states of a finite graph, in enumeration order.
#[derive(Debug, Clone)]
pub struct StateSpace {
    n: usize,
    adjacency: Vec<u32>,
    states: Vec<LumpedState>,
    index: HashMap<LumpedState, usize>,
}

impl StateSpace {
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[LumpedState] {
        &self.states
    }

    pub fn index_of(&self, s: &LumpedState) -> Result<usize, ExactError> {
        self.index
            .get(s)
            .copied()
            .ok_or_else(|| ExactError::InvalidState(format!("{s} is not a state of this graph")))
    }

    /// Neighbor mask of vertex `v`.
    pub fn adjacency(&self, v: usize) -> u32 {
        self.adjacency[v]
    }

    pub fn full_mask(&self) -> u32 {
        if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }
}

/// Restricted growth strings over `k` elements in lexicographic order.
fn set_partitions(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, k: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for b in 0..=max + 1 {
            prefix.push(b);
            rec(prefix, k, max.max(b), out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 {
        out.push(Vec::new());
    } else {
        let mut prefix = vec![0];
        rec(&mut prefix, k, 0, &mut out);
    }
    out
}

/// Every `(subset, partition)` pair, ordered by subset mask and then by the
/// partition's restricted growth string.
pub fn enumerate_states(g: &GraphSpec) -> Result<StateSpace, ExactError> {
    let adj = g
        .finite_adjacency()
        .ok_or_else(|| ExactError::NotFinite(g.to_string()))?;
    let n = adj.len();
    if n > MAX_VERTICES {
        return Err(ExactError::TooLarge {
            vertices: n,
            cap: MAX_VERTICES,
        });
    }
    let adjacency: Vec<u32> = adj
        .iter()
        .map(|nb| nb.iter().fold(0u32, |m, &u| m | 1 << u))
        .collect();
    let mut by_size: HashMap<usize, Vec<Vec<usize>>> = HashMap::new();
    let mut states = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let elems: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
        let parts = by_size
            .entry(elems.len())
            .or_insert_with(|| set_partitions(elems.len()));
        for rgs in parts.iter() {
            let nblocks = rgs.iter().max().map_or(0, |m| m + 1);
            let mut blocks = vec![0u32; nblocks];
            for (&v, &b) in elems.iter().zip(rgs) {
                blocks[b] |= 1 << v;
            }
            states.push(LumpedState {
                occupied: mask,
                blocks,
            });
        }
    }
    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(StateSpace {
        n,
        adjacency,
        states,
        index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts_are_bell_numbers() {
        let bell: Vec<usize> = (0..7).map(|k| set_partitions(k).len()).collect();
        assert_eq!(bell, [1, 1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn canonical_form_ignores_block_order() {
        let a = LumpedState::new(&[vec![2], vec![0, 1]]).unwrap();
        let b = LumpedState::new(&[vec![1, 0], vec![2]]).unwrap();
        assert_eq!(a, b);
        assert!(LumpedState::new(&[vec![0], vec![0]]).is_err());
        assert_eq!(a.to_string(), "{0,1} {2}");
    }
}
