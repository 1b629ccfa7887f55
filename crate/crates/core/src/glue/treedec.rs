// SPDX-License-Identifier: Apache-2.0

//! Tree-decomposition validation.

use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TreeDecomposition {
    /// Bag of each tree node.
    pub bags: Vec<BTreeSet<usize>>,
    /// Undirected tree edges between node indices.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeDecompositionViolation {
    /// A bag holds a label that is not a vertex, or an edge names a missing node.
    OutOfRange { what: &'static str, value: usize },
    ArcUncovered { from: usize, to: usize },
    VertexUncovered { vertex: usize },
    /// The nodes whose bags contain `vertex` do not form a connected subtree.
    Disconnected { vertex: usize },
    NotATree { reason: String },
}

impl fmt::Display for TreeDecompositionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OutOfRange { what, value } => write!(f, "{what} {value} out of range"),
            Self::ArcUncovered { from, to } => write!(f, "arc {from} -> {to} is in no bag"),
            Self::VertexUncovered { vertex } => write!(f, "vertex {vertex} is in no bag"),
            Self::Disconnected { vertex } => write!(f, "bags containing vertex {vertex} are not connected"),
            Self::NotATree { reason } => write!(f, "not a tree: {reason}"),
        }
    }
}

impl std::error::Error for TreeDecompositionViolation {}

fn connected(nodes: &BTreeSet<usize>, adjacency: &[Vec<usize>]) -> bool {
    let Some(&start) = nodes.iter().next() else {
        return true;
    };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(t) = stack.pop() {
        for &u in &adjacency[t] {
            if nodes.contains(&u) && seen.insert(u) {
                stack.push(u);
            }
        }
    }
    seen.len() == nodes.len()
}

/// Returns the width (largest bag minus one) or the first violated property.
/// Properties are checked in the order: labels in range, arc coverage, vertex
/// coverage, connected occurrence subtrees, tree shape.
pub fn validate_tree_decomposition(
    vertices: usize,
    arcs: impl IntoIterator<Item = (usize, usize)>,
    td: &TreeDecomposition,
) -> Result<usize, TreeDecompositionViolation> {
    use TreeDecompositionViolation::*;
    let nodes = td.bags.len();
    for bag in &td.bags {
        if let Some(&v) = bag.iter().find(|&&v| v >= vertices) {
            return Err(OutOfRange { what: "bag vertex", value: v });
        }
    }
    for &(a, b) in &td.edges {
        if let Some(bad) = [a, b].into_iter().find(|&t| t >= nodes) {
            return Err(OutOfRange { what: "tree node", value: bad });
        }
    }
    for (from, to) in arcs {
        if !td.bags.iter().any(|bag| bag.contains(&from) && bag.contains(&to)) {
            return Err(ArcUncovered { from, to });
        }
    }
    let mut occurrences = vec![BTreeSet::new(); vertices];
    for (t, bag) in td.bags.iter().enumerate() {
        for &v in bag {
            occurrences[v].insert(t);
        }
    }
    if let Some(vertex) = occurrences.iter().position(BTreeSet::is_empty) {
        return Err(VertexUncovered { vertex });
    }
    let mut adjacency = vec![Vec::new(); nodes];
    for &(a, b) in &td.edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    if let Some(vertex) = occurrences.iter().position(|occ| !connected(occ, &adjacency)) {
        return Err(Disconnected { vertex });
    }
    if nodes == 0 {
        return Err(NotATree { reason: "no nodes".into() });
    }
    let distinct: BTreeSet<(usize, usize)> = td.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    if distinct.len() != td.edges.len() || td.edges.iter().any(|&(a, b)| a == b) {
        return Err(NotATree { reason: "repeated edge or loop".into() });
    }
    if td.edges.len() != nodes - 1 {
        return Err(NotATree {
            reason: format!("{} nodes need {} edges, found {}", nodes, nodes - 1, td.edges.len()),
        });
    }
    if !connected(&(0..nodes).collect(), &adjacency) {
        return Err(NotATree { reason: "tree is disconnected".into() });
    }
    Ok(td.bags.iter().map(BTreeSet::len).max().unwrap_or(0).saturating_sub(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use TreeDecompositionViolation::*;

    fn td(bags: &[&[usize]], edges: &[(usize, usize)]) -> TreeDecomposition {
        TreeDecomposition {
            bags: bags.iter().map(|b| b.iter().copied().collect()).collect(),
            edges: edges.to_vec(),
        }
    }

    #[test]
    fn path_has_width_one() {
        let d = td(&[&[0, 1], &[1, 2]], &[(0, 1)]);
        assert_eq!(validate_tree_decomposition(3, [(0, 1), (1, 2)], &d), Ok(1));
    }

    #[test]
    fn missing_middle_vertex() {
        let d = td(&[&[0], &[2]], &[(0, 1)]);
        assert_eq!(
            validate_tree_decomposition(3, [(0, 1), (1, 2)], &d),
            Err(ArcUncovered { from: 0, to: 1 })
        );
        assert_eq!(validate_tree_decomposition(3, [], &d), Err(VertexUncovered { vertex: 1 }));
    }

    #[test]
    fn single_bag() {
        let d = td(&[&[0, 1, 2, 3, 4]], &[]);
        let arcs = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)];
        assert_eq!(validate_tree_decomposition(5, arcs, &d), Ok(4));
    }

    #[test]
    fn broken_subtree_and_shape() {
        let d = td(&[&[0], &[1], &[0]], &[(0, 1), (1, 2)]);
        assert_eq!(validate_tree_decomposition(2, [], &d), Err(Disconnected { vertex: 0 }));
        let cyclic = td(&[&[0], &[0], &[0]], &[(0, 1), (1, 2), (2, 0)]);
        assert!(matches!(validate_tree_decomposition(1, [], &cyclic), Err(NotATree { .. })));
        let forest = td(&[&[0], &[1]], &[]);
        assert!(matches!(validate_tree_decomposition(2, [], &forest), Err(NotATree { .. })));
        let bad = td(&[&[7]], &[]);
        assert_eq!(
            validate_tree_decomposition(2, [], &bad),
            Err(OutOfRange { what: "bag vertex", value: 7 })
        );
    }
}
