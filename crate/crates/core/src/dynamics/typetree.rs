use super::config::TypeId;
use super::trajectory::{EventKind, Trajectory};
use crate::graph::SiteAddress;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct TypeNode {
    /// `None` for types present at time 0.
    pub parent: Option<TypeId>,
    pub birth_time: f64,
    pub birth_site: Option<SiteAddress>,
    pub children: Vec<TypeId>,
}

/// Genealogy of types: a new type is a child of the type that produced its
/// first individual.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TypeTree {
    nodes: BTreeMap<TypeId, TypeNode>,
    roots: Vec<TypeId>,
}

impl TypeTree {
    pub fn roots(&self) -> &[TypeId] {
        &self.roots
    }

    pub fn get(&self, ty: TypeId) -> Option<&TypeNode> {
        self.nodes.get(&ty)
    }

    pub fn parent(&self, ty: TypeId) -> Option<TypeId> {
        self.nodes.get(&ty).and_then(|n| n.parent)
    }

    pub fn children(&self, ty: TypeId) -> &[TypeId] {
        self.nodes.get(&ty).map_or(&[], |n| &n.children)
    }

    /// Offspring count of a type.
    pub fn out_degree(&self, ty: TypeId) -> usize {
        self.children(ty).len()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (TypeId, &TypeNode)> {
        self.nodes.iter().map(|(k, v)| (*k, v))
    }
}

pub fn extract_type_tree(traj: &Trajectory) -> TypeTree {
    let mut tree = TypeTree::default();
    for &ty in &traj.initial_types {
        tree.roots.push(ty);
        tree.nodes.insert(
            ty,
            TypeNode {
                parent: None,
                birth_time: 0.0,
                birth_site: None,
                children: Vec::new(),
            },
        );
    }
    for e in &traj.events {
        if let EventKind::Birth {
            to,
            parent_type,
            child_type,
            mutated: true,
            ..
        } = e.kind
        {
            tree.nodes.insert(
                child_type,
                TypeNode {
                    parent: Some(parent_type),
                    birth_time: e.time,
                    birth_site: to.and_then(|id| traj.address(id)),
                    children: Vec::new(),
                },
            );
            if let Some(p) = tree.nodes.get_mut(&parent_type) {
                p.children.push(child_type);
            }
        }
    }
    tree
}
