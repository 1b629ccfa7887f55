// SPDX-License-Identifier: Apache-2.0

//! Boundaried graphs and gluing.
//!
//! A k-graph carries a primary and a secondary port tuple of length k.
//! `G ⊕ H` is the disjoint union of `G` and `H` in which the i-th primary port
//! of `H` is identified with the i-th secondary port of `G`. The labels of `G`
//! are kept; the remaining vertices of `H` get fresh labels `|V(G)|, …` in
//! ascending order of their label in `H`.

mod dot;
pub mod fixtures;
mod gamma;
mod oracle;
mod treedec;

pub use dot::{parse_dot, write_dot};
pub use gamma::{GadgetKind, GammaConstants, GammaSpec};
pub use oracle::{delta, delta_mapped, explicit_dynamics, instance_word, parse_word, ExplicitDynamics, Placement, ORACLE_MAX_VERTICES};
pub use treedec::{validate_tree_decomposition, TreeDecomposition, TreeDecompositionViolation};

use std::collections::BTreeSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundariedGraph {
    size: usize,
    arcs: BTreeSet<(usize, usize)>,
    primary: Vec<usize>,
    secondary: Vec<usize>,
}

fn check_tuple(name: &str, size: usize, tuple: &[usize]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &v in tuple {
        if v >= size {
            return Err(Error::Graph(format!("{name} port {v} is not a vertex of a {size}-vertex graph")));
        }
        if !seen.insert(v) {
            return Err(Error::Graph(format!("{name} port tuple repeats vertex {v}")));
        }
    }
    Ok(())
}

impl BoundariedGraph {
    pub fn new(
        size: usize,
        arcs: impl IntoIterator<Item = (usize, usize)>,
        primary: Vec<usize>,
        secondary: Vec<usize>,
    ) -> Result<Self> {
        let arcs: BTreeSet<_> = arcs.into_iter().collect();
        if let Some(&(u, v)) = arcs.iter().find(|&&(u, v)| u >= size || v >= size) {
            return Err(Error::Graph(format!("arc {u}->{v} leaves the {size}-vertex graph")));
        }
        if primary.len() != secondary.len() {
            return Err(Error::Graph(format!(
                "port tuples differ in length: {} primary, {} secondary",
                primary.len(),
                secondary.len()
            )));
        }
        check_tuple("primary", size, &primary)?;
        check_tuple("secondary", size, &secondary)?;
        Ok(BoundariedGraph {
            size,
            arcs,
            primary,
            secondary,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Port tuple length.
    pub fn k(&self) -> usize {
        self.primary.len()
    }

    pub fn arcs(&self) -> &BTreeSet<(usize, usize)> {
        &self.arcs
    }

    pub fn primary(&self) -> &[usize] {
        &self.primary
    }

    pub fn secondary(&self) -> &[usize] {
        &self.secondary
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.arcs.contains(&(u, v))
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.arcs.range((v, 0)..=(v, usize::MAX)).count()
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.arcs.range((v, 0)..=(v, usize::MAX)).map(|&(_, w)| w)
    }

    /// The unique successor, if `v` has exactly one.
    pub fn successor(&self, v: usize) -> Option<usize> {
        let mut it = self.successors(v);
        match (it.next(), it.next()) {
            (Some(w), None) => Some(w),
            _ => None,
        }
    }

    /// `self ⊕ other`.
    pub fn glue(&self, other: &BoundariedGraph) -> Result<BoundariedGraph> {
        self.glue_mapped(other).map(|(g, _)| g)
    }

    /// `self ⊕ other`, plus where each vertex of `other` ended up.
    pub fn glue_mapped(&self, other: &BoundariedGraph) -> Result<(BoundariedGraph, Vec<usize>)> {
        if other.k() != self.k() {
            return Err(Error::Graph(format!(
                "cannot glue a {}-graph onto a {}-graph",
                other.k(),
                self.k()
            )));
        }
        let mut map = vec![usize::MAX; other.size];
        for (&p, &s) in other.primary.iter().zip(&self.secondary) {
            map[p] = s;
        }
        let mut next = self.size;
        for slot in map.iter_mut().filter(|m| **m == usize::MAX) {
            *slot = next;
            next += 1;
        }
        let mut arcs = self.arcs.clone();
        arcs.extend(other.arcs.iter().map(|&(u, v)| (map[u], map[v])));
        let secondary = other.secondary.iter().map(|&v| map[v]).collect();
        let glued = BoundariedGraph {
            size: next,
            arcs,
            primary: self.primary.clone(),
            secondary,
        };
        Ok((glued, map))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn edge() -> BoundariedGraph {
        BoundariedGraph::new(2, [(0, 1)], vec![0], vec![1]).unwrap()
    }

    #[test]
    fn path_from_self_gluing() {
        let g = edge().glue(&edge()).unwrap();
        assert_eq!(g.size(), 3);
        assert_eq!(g.arcs().iter().copied().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert_eq!(g.primary(), &[0]);
        assert_eq!(g.secondary(), &[2]);
    }

    #[test]
    fn shared_port_graph() {
        let h = BoundariedGraph::new(3, [(0, 2)], vec![0], vec![0]).unwrap();
        let g = edge().glue(&h).unwrap();
        assert_eq!(g.size(), 2 + 3 - 1);
        assert_eq!(g.secondary(), &[1]);
    }

    #[test]
    fn arity_mismatch() {
        let two = BoundariedGraph::new(2, [], vec![0, 1], vec![1, 0]).unwrap();
        assert!(edge().glue(&two).is_err());
    }

    #[test]
    fn invalid_ports_rejected() {
        assert!(BoundariedGraph::new(2, [], vec![0, 0], vec![0, 1]).is_err());
        assert!(BoundariedGraph::new(2, [], vec![2], vec![0]).is_err());
        assert!(BoundariedGraph::new(2, [(0, 2)], vec![0], vec![1]).is_err());
    }

    prop_compose! {
        fn kgraph(k: usize)(size in (2 * k).max(1)..7)
            (arcs in proptest::collection::vec((0..size, 0..size), 0..10),
             perm in Just((0..size).collect::<Vec<_>>()).prop_shuffle(),
             perm2 in Just((0..size).collect::<Vec<_>>()).prop_shuffle(),
             size in Just(size)) -> BoundariedGraph {
            BoundariedGraph::new(size, arcs, perm[..k].to_vec(), perm2[..k].to_vec()).unwrap()
        }
    }

    /// Relabels `g` through `map` and compares with `h`.
    fn same_under(g: &BoundariedGraph, h: &BoundariedGraph, map: &[usize]) -> bool {
        g.size() == h.size()
            && g.arcs().iter().map(|&(u, v)| (map[u], map[v])).collect::<BTreeSet<_>>() == *h.arcs()
            && g.primary().iter().map(|&v| map[v]).collect::<Vec<_>>() == h.primary()
            && g.secondary().iter().map(|&v| map[v]).collect::<Vec<_>>() == h.secondary()
    }

    proptest! {
        #[test]
        fn size_identity(g in kgraph(2), h in kgraph(2)) {
            let glued = g.glue(&h).unwrap();
            prop_assert_eq!(glued.size(), g.size() + h.size() - 2);
        }

        /// (A⊕B)⊕C and A⊕(B⊕C) agree under the label correspondence obtained
        /// by tracking every original vertex through both gluings.
        #[test]
        fn associativity(a in kgraph(2), b in kgraph(2), c in kgraph(2)) {
            let (ab, b_in_ab) = a.glue_mapped(&b).unwrap();
            let (left, c_in_left) = ab.glue_mapped(&c).unwrap();
            let (bc, c_in_bc) = b.glue_mapped(&c).unwrap();
            let (right, bc_in_right) = a.glue_mapped(&bc).unwrap();
            prop_assert_eq!(left.size(), right.size());
            let mut corr = vec![usize::MAX; left.size()];
            let assign = |l: usize, r: usize, corr: &mut Vec<usize>| {
                if corr[l] == usize::MAX { corr[l] = r; true } else { corr[l] == r }
            };
            for v in 0..a.size() {
                prop_assert!(assign(v, v, &mut corr));
            }
            // b keeps its labels inside b⊕c
            for v in 0..b.size() {
                prop_assert!(assign(b_in_ab[v], bc_in_right[v], &mut corr));
            }
            for v in 0..c.size() {
                prop_assert!(assign(c_in_left[v], bc_in_right[c_in_bc[v]], &mut corr));
            }
            prop_assert!(corr.iter().all(|&x| x != usize::MAX));
            let mut seen = corr.clone();
            seen.sort_unstable();
            seen.dedup();
            prop_assert_eq!(seen.len(), corr.len());
            prop_assert!(same_under(&left, &right, &corr));
        }
    }
}
