//! Dense occupancy store used by the engines.
//!
//! Units are site ids (spatial) or individual ids (non-spatial). Every
//! structure supports O(1) uniform sampling and O(1) removal of a unit, and
//! a whole block is removed in time proportional to its size.

use rand::Rng;
use std::collections::HashMap;

pub(crate) const VACANT: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Block {
    members: Vec<u32>,
    live_idx: u32,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Occupancy {
    occ: Vec<u32>,
    pos: Vec<u32>,
    ty: Vec<i64>,
    block_pos: Vec<u32>,
    blocks: HashMap<i64, Block>,
    live: Vec<i64>,
}

impl Occupancy {
    #[inline]
    pub fn population(&self) -> usize {
        self.occ.len()
    }

    #[inline]
    pub fn type_count(&self) -> usize {
        self.live.len()
    }

    #[inline]
    pub fn is_occupied(&self, u: u32) -> bool {
        self.pos.get(u as usize).is_some_and(|&p| p != VACANT)
    }

    #[inline]
    pub fn type_of(&self, u: u32) -> Option<i64> {
        self.is_occupied(u).then(|| self.ty[u as usize])
    }

    pub fn units(&self) -> &[u32] {
        &self.occ
    }

    pub fn live_types(&self) -> &[i64] {
        &self.live
    }

    pub fn has_type(&self, ty: i64) -> bool {
        self.blocks.contains_key(&ty)
    }

    pub fn block(&self, ty: i64) -> &[u32] {
        self.blocks.get(&ty).map_or(&[], |b| &b.members)
    }

    fn grow(&mut self, u: u32) {
        let need = u as usize + 1;
        if self.pos.len() < need {
            let n = need.max(self.pos.len() * 2);
            self.pos.resize(n, VACANT);
            self.ty.resize(n, 0);
            self.block_pos.resize(n, VACANT);
        }
    }

    pub fn insert(&mut self, u: u32, ty: i64) {
        self.grow(u);
        debug_assert!(!self.is_occupied(u), "unit {u} already occupied");
        let i = u as usize;
        self.pos[i] = self.occ.len() as u32;
        self.occ.push(u);
        self.ty[i] = ty;
        let live = &mut self.live;
        let block = self.blocks.entry(ty).or_insert_with(|| {
            live.push(ty);
            Block {
                members: Vec::new(),
                live_idx: live.len() as u32 - 1,
            }
        });
        self.block_pos[i] = block.members.len() as u32;
        block.members.push(u);
    }

    fn unlink(&mut self, u: u32) {
        let i = u as usize;
        let p = self.pos[i] as usize;
        let last = *self.occ.last().expect("nonempty");
        self.occ.swap_remove(p);
        if last != u {
            self.pos[last as usize] = p as u32;
        }
        self.pos[i] = VACANT;
    }

    fn drop_live(&mut self, live_idx: u32) {
        let li = live_idx as usize;
        self.live.swap_remove(li);
        if li < self.live.len() {
            let moved = self.live[li];
            self.blocks
                .get_mut(&moved)
                .expect("live type has block")
                .live_idx = li as u32;
        }
    }

    /// Removes one unit; returns its type and whether its block vanished.
    pub fn remove(&mut self, u: u32) -> (i64, bool) {
        debug_assert!(self.is_occupied(u));
        let i = u as usize;
        let ty = self.ty[i];
        self.unlink(u);
        let block = self.blocks.get_mut(&ty).expect("occupied unit has block");
        let bp = self.block_pos[i] as usize;
        block.members.swap_remove(bp);
        if let Some(&moved) = block.members.get(bp) {
            self.block_pos[moved as usize] = bp as u32;
        }
        self.block_pos[i] = VACANT;
        if block.members.is_empty() {
            let live_idx = block.live_idx;
            self.blocks.remove(&ty);
            self.drop_live(live_idx);
            (ty, true)
        } else {
            (ty, false)
        }
    }

    /// Removes a whole block and returns its members.
    pub fn remove_block(&mut self, ty: i64) -> Vec<u32> {
        let Some(block) = self.blocks.remove(&ty) else {
            return Vec::new();
        };
        for &u in &block.members {
            self.unlink(u);
            self.block_pos[u as usize] = VACANT;
        }
        self.drop_live(block.live_idx);
        block.members
    }

    #[inline]
    pub fn random_unit<R: Rng>(&self, rng: &mut R) -> u32 {
        self.occ[rng.random_range(0..self.occ.len())]
    }

    #[inline]
    pub fn random_type<R: Rng>(&self, rng: &mut R) -> i64 {
        self.live[rng.random_range(0..self.live.len())]
    }

    /// Full consistency check of all index structures.
    pub fn validate(&self) -> Result<(), String> {
        for (p, &u) in self.occ.iter().enumerate() {
            if self.pos[u as usize] as usize != p {
                return Err(format!("position of unit {u} is stale"));
            }
        }
        let mut members = 0;
        for (li, ty) in self.live.iter().enumerate() {
            let b = self
                .blocks
                .get(ty)
                .ok_or_else(|| format!("live type {ty} has no block"))?;
            if b.live_idx as usize != li || b.members.is_empty() {
                return Err(format!("block {ty} bookkeeping is stale"));
            }
            for (bp, &u) in b.members.iter().enumerate() {
                if !self.is_occupied(u) || self.ty[u as usize] != *ty {
                    return Err(format!("unit {u} in block {ty} has the wrong type"));
                }
                if self.block_pos[u as usize] as usize != bp {
                    return Err(format!("block position of unit {u} is stale"));
                }
            }
            members += b.members.len();
        }
        if self.blocks.len() != self.live.len() || members != self.occ.len() {
            return Err("blocks do not partition the occupied units".into());
        }
        Ok(())
    }
}
