use crate::graph::SiteAddress;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Pathogen type label. Labels are never reused within a run; negative
/// labels only appear in the coupled construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeId(pub i64);

impl fmt::Display for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("site {0} is already occupied")]
    Occupied(SiteAddress),
    #[error("site {0} is not occupied")]
    Vacant(SiteAddress),
    #[error("type labels must be positive, got {0}")]
    BadType(TypeId),
    #[error("empty block in partition")]
    EmptyBlock,
}

/// Occupied set together with its partition into type blocks.
///
/// `occupied` and `blocks` are kept mutually inverse; `next_type` is larger
/// than every label ever handed out.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Configuration {
    occupied: BTreeMap<SiteAddress, TypeId>,
    blocks: BTreeMap<TypeId, BTreeSet<SiteAddress>>,
    next_type: i64,
}

impl Configuration {
    pub fn empty() -> Self {
        Configuration {
            next_type: 1,
            ..Default::default()
        }
    }

    /// A single type-1 pathogen at `site`.
    pub fn singleton(site: SiteAddress) -> Self {
        let mut c = Configuration::empty();
        c.insert(site, TypeId(1)).expect("fresh configuration");
        c
    }

    /// Blocks become types `1..=blocks.len()` in the given order.
    pub fn from_blocks<I, B>(blocks: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = B>,
        B: IntoIterator<Item = SiteAddress>,
    {
        let mut c = Configuration::empty();
        for (i, block) in blocks.into_iter().enumerate() {
            let ty = TypeId(i as i64 + 1);
            let mut any = false;
            for site in block {
                c.insert(site, ty)?;
                any = true;
            }
            if !any {
                return Err(ConfigError::EmptyBlock);
            }
            c.next_type = c.next_type.max(ty.0 + 1);
        }
        Ok(c)
    }

    /// Every site its own type.
    pub fn all_singletons(sites: impl IntoIterator<Item = SiteAddress>) -> Self {
        Configuration::from_blocks(sites.into_iter().map(|s| [s]))
            .expect("distinct sites give a valid partition")
    }

    pub fn insert(&mut self, site: SiteAddress, ty: TypeId) -> Result<(), ConfigError> {
        if ty.0 <= 0 {
            return Err(ConfigError::BadType(ty));
        }
        self.insert_any(site, ty)
    }

    /// Insert without the positivity check on the label.
    pub(crate) fn insert_any(&mut self, site: SiteAddress, ty: TypeId) -> Result<(), ConfigError> {
        if self.occupied.contains_key(&site) {
            return Err(ConfigError::Occupied(site));
        }
        self.blocks.entry(ty).or_default().insert(site.clone());
        self.occupied.insert(site, ty);
        self.next_type = self.next_type.max(ty.0 + 1);
        Ok(())
    }

    pub fn remove_site(&mut self, site: &SiteAddress) -> Result<TypeId, ConfigError> {
        let ty = self
            .occupied
            .remove(site)
            .ok_or_else(|| ConfigError::Vacant(site.clone()))?;
        let block = self.blocks.get_mut(&ty).expect("inverse maps");
        block.remove(site);
        if block.is_empty() {
            self.blocks.remove(&ty);
        }
        Ok(ty)
    }

    /// Removes a whole type block, returning its sites.
    pub fn remove_block(&mut self, ty: TypeId) -> BTreeSet<SiteAddress> {
        let block = self.blocks.remove(&ty).unwrap_or_default();
        for s in &block {
            self.occupied.remove(s);
        }
        block
    }

    pub fn type_of(&self, site: &SiteAddress) -> Option<TypeId> {
        self.occupied.get(site).copied()
    }

    pub fn occupied(&self) -> &BTreeMap<SiteAddress, TypeId> {
        &self.occupied
    }

    pub fn blocks(&self) -> &BTreeMap<TypeId, BTreeSet<SiteAddress>> {
        &self.blocks
    }

    pub fn sites(&self) -> impl Iterator<Item = &SiteAddress> {
        self.occupied.keys()
    }

    /// `|A|`
    pub fn population(&self) -> usize {
        self.occupied.len()
    }

    /// `N(A)`
    pub fn type_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn next_type(&self) -> i64 {
        self.next_type
    }

    pub(crate) fn set_next_type(&mut self, next: i64) {
        self.next_type = self.next_type.max(next);
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = 0;
        for (ty, block) in &self.blocks {
            if block.is_empty() {
                return Err(format!("type {ty} has an empty block"));
            }
            if ty.0 >= self.next_type {
                return Err(format!("type {ty} not below next_type {}", self.next_type));
            }
            for s in block {
                if self.occupied.get(s) != Some(ty) {
                    return Err(format!("site {s} in block {ty} maps elsewhere"));
                }
            }
            seen += block.len();
        }
        if seen != self.occupied.len() {
            return Err("occupied map and blocks disagree in size".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ix(i: usize) -> SiteAddress {
        SiteAddress::Index(i)
    }

    #[test]
    fn blocks_and_sites_stay_inverse() {
        let mut c = Configuration::from_blocks([vec![ix(0), ix(1)], vec![ix(2)]]).unwrap();
        assert_eq!((c.population(), c.type_count(), c.next_type()), (3, 2, 3));
        c.check_invariants().unwrap();
        assert_eq!(c.remove_site(&ix(1)).unwrap(), TypeId(1));
        assert_eq!(c.remove_block(TypeId(2)).len(), 1);
        c.check_invariants().unwrap();
        assert_eq!((c.population(), c.type_count()), (1, 1));
        assert!(c.insert(ix(0), TypeId(4)).is_err());
        assert!(c.remove_site(&ix(2)).is_err());
        assert!(Configuration::from_blocks([Vec::<SiteAddress>::new()]).is_err());
        assert!(c.insert(ix(5), TypeId(0)).is_err());
    }
}
