// SPDX-License-Identifier: Apache-2.0

//! Explicit dynamics on the canonical configuration allocation.
//!
//! Labels are handed out copy by copy: the first copy contributes every
//! vertex outside its `P'3`, each later copy contributes the vertices outside
//! `P'1` (merged into the previous copy's `P'2`) and `P'3`, in ascending local
//! order. The `k3` shared `P'3` vertices take the last labels.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{BoundariedGraph, GadgetKind, GammaSpec};
use crate::error::{Error, Result};
use crate::instance::{Mode, ReductionInstance};
use crate::sizing::to_usize;

/// Largest glued graph the oracle will materialize.
pub const ORACLE_MAX_VERTICES: usize = 1 << 22;

/// Where a global label lives: the first copy containing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub copy: usize,
    pub kind: GadgetKind,
    pub local: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitDynamics {
    succ: Vec<Vec<usize>>,
    placement: Vec<Placement>,
    word: Vec<GadgetKind>,
    copy_maps: Vec<Vec<usize>>,
}

impl ExplicitDynamics {
    /// Glues `word` on the canonical allocation. `mode` only controls the
    /// out-degree assertion.
    pub fn build(gamma: &GammaSpec, word: &[GadgetKind], mode: Mode) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::Graph("empty gadget word".into()));
        }
        let k2 = gamma.k2();
        let k3 = gamma.k3();
        let mut total = k3;
        for (i, &kind) in word.iter().enumerate() {
            let g = gamma.graph(kind).size();
            total += if i == 0 { g - k3 } else { g - k3 - k2 };
            if total > ORACLE_MAX_VERTICES {
                return Err(Error::Bound {
                    what: "oracle vertex count",
                    actual: format!("more than {total}"),
                    bound: ORACLE_MAX_VERTICES.to_string(),
                });
            }
        }

        let shared_base = total - k3;
        let mut placement = vec![None; total];
        let mut copy_maps: Vec<Vec<usize>> = Vec::with_capacity(word.len());
        let mut next = 0;
        for (copy, &kind) in word.iter().enumerate() {
            let g = gamma.graph(kind);
            let p3 = gamma.p3_start(kind);
            let mut map = vec![usize::MAX; g.size()];
            for (local, slot) in map.iter_mut().enumerate() {
                *slot = if local >= p3 {
                    shared_base + (local - p3)
                } else if copy > 0 && local < k2 {
                    let prev = word[copy - 1];
                    copy_maps[copy - 1][gamma.p2_start(prev) + local]
                } else {
                    next += 1;
                    next - 1
                };
                placement[*slot].get_or_insert(Placement { copy, kind, local });
            }
            copy_maps.push(map);
        }
        debug_assert_eq!(next, shared_base);

        let mut succ = vec![BTreeSet::new(); total];
        for (copy, &kind) in word.iter().enumerate() {
            let map = &copy_maps[copy];
            for &(u, v) in gamma.graph(kind).arcs() {
                succ[map[u]].insert(map[v]);
            }
        }
        let dynamics = ExplicitDynamics {
            succ: succ.into_iter().map(|s| s.into_iter().collect()).collect(),
            placement: placement
                .into_iter()
                .map(|p| p.expect("every label is placed"))
                .collect(),
            word: word.to_vec(),
            copy_maps,
        };
        if mode == Mode::Deterministic {
            dynamics.check_out_degree(gamma)?;
        }
        Ok(dynamics)
    }

    fn check_out_degree(&self, gamma: &GammaSpec) -> Result<()> {
        let Some(vertex) = (0..self.total()).find(|&c| self.succ[c].len() != 1) else {
            return Ok(());
        };
        let mut contributors = String::new();
        for (copy, map) in self.copy_maps.iter().enumerate() {
            if let Some(local) = map.iter().position(|&c| c == vertex) {
                let kind = self.word[copy];
                let d = gamma.graph(kind).out_degree(local);
                if d > 0 {
                    if !contributors.is_empty() {
                        contributors.push_str(", ");
                    }
                    let _ = write!(contributors, "copy {copy} ({kind}) local {local} with {d} arc(s)");
                }
            }
        }
        if contributors.is_empty() {
            contributors.push_str("none");
        }
        Err(Error::OutDegree {
            vertex,
            degree: self.succ[vertex].len(),
            contributors,
        })
    }

    pub fn total(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, c: usize) -> &[usize] {
        &self.succ[c]
    }

    /// The unique successor, if `c` has exactly one.
    pub fn successor(&self, c: usize) -> Option<usize> {
        match self.succ[c].as_slice() {
            [d] => Some(*d),
            _ => None,
        }
    }

    pub fn has_arc(&self, c: usize, d: usize) -> bool {
        self.succ[c].binary_search(&d).is_ok()
    }

    pub fn arc_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(c, s)| s.iter().map(move |&d| (c, d)))
    }

    pub fn placement(&self, c: usize) -> Placement {
        self.placement[c]
    }

    pub fn word(&self) -> &[GadgetKind] {
        &self.word
    }

    /// Global label of each local vertex of copy `copy`.
    pub fn copy_map(&self, copy: usize) -> &[usize] {
        &self.copy_maps[copy]
    }

    pub fn is_deterministic(&self) -> bool {
        self.succ.iter().all(|s| s.len() == 1)
    }

    /// Replaces the successor list of `c`.
    pub fn set_successors(&mut self, c: usize, mut targets: Vec<usize>) {
        targets.sort_unstable();
        targets.dedup();
        self.succ[c] = targets;
    }

    /// Checks that the generic left fold of `⊕` over the word is the same
    /// graph, using the per-copy label maps of both constructions.
    pub fn matches_generic_gluing(&self, gamma: &GammaSpec) -> Result<bool> {
        let (glued, maps) = delta_mapped(gamma, &self.word)?;
        if glued.size() != self.total() {
            return Ok(false);
        }
        let mut to_oracle = vec![usize::MAX; glued.size()];
        for (copy, generic) in maps.iter().enumerate() {
            for (local, &g) in generic.iter().enumerate() {
                let o = self.copy_maps[copy][local];
                if to_oracle[g] == usize::MAX {
                    to_oracle[g] = o;
                } else if to_oracle[g] != o {
                    return Ok(false);
                }
            }
        }
        let image: BTreeSet<usize> = to_oracle.iter().copied().collect();
        if image.len() != self.total() || image.contains(&usize::MAX) {
            return Ok(false);
        }
        let relabeled: BTreeSet<(usize, usize)> =
            glued.arcs().iter().map(|&(u, v)| (to_oracle[u], to_oracle[v])).collect();
        Ok(relabeled.into_iter().eq(self.arcs()))
    }
}

/// The word `2 · S̄ · 4^L · 3`, with `G0` where the formula holds.
pub fn instance_word(inst: &ReductionInstance) -> Result<Vec<GadgetKind>> {
    let sizes = inst.sizes();
    let l = to_usize(&sizes.l, "padding count L", ORACLE_MAX_VERTICES)?;
    let sbar = inst.formula().sbar()?;
    let mut word = Vec::with_capacity(sbar.len() + l + 2);
    word.push(GadgetKind::G2);
    word.extend(
        sbar.bits()
            .iter()
            .map(|&false_here| if false_here { GadgetKind::G1 } else { GadgetKind::G0 }),
    );
    word.extend(std::iter::repeat_n(GadgetKind::G4, l));
    word.push(GadgetKind::G3);
    Ok(word)
}

pub fn explicit_dynamics(inst: &ReductionInstance) -> Result<ExplicitDynamics> {
    let word = instance_word(inst)?;
    ExplicitDynamics::build(inst.gamma(), &word, inst.mode())
}

/// Parses a word over the digits `0..=4`; whitespace and `·` are ignored.
pub fn parse_word(text: &str) -> Result<Vec<GadgetKind>> {
    text.chars()
        .filter(|c| !c.is_whitespace() && *c != '·')
        .map(|c| {
            c.to_digit(10)
                .and_then(|d| GadgetKind::from_letter(d as u8))
                .ok_or_else(|| Error::Graph(format!("letter {c:?} is not a gadget index 0..4")))
        })
        .collect()
}

/// Left fold of `⊕` over the gadgets named by `word`.
pub fn delta(gamma: &GammaSpec, word: &[GadgetKind]) -> Result<BoundariedGraph> {
    delta_mapped(gamma, word).map(|(g, _)| g)
}

/// [`delta`] plus, for each letter, the labels its gadget received.
pub fn delta_mapped(gamma: &GammaSpec, word: &[GadgetKind]) -> Result<(BoundariedGraph, Vec<Vec<usize>>)> {
    let (&first, rest) = word
        .split_first()
        .ok_or_else(|| Error::Graph("empty gadget word".into()))?;
    let mut acc = gamma.graph(first).clone();
    let mut maps = vec![(0..acc.size()).collect::<Vec<_>>()];
    for &kind in rest {
        let (next, map) = acc.glue_mapped(gamma.graph(kind))?;
        acc = next;
        maps.push(map);
    }
    Ok((acc, maps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glue::fixtures;
    use GadgetKind::*;

    fn toy_word(sbar: &[bool], l: usize) -> Vec<GadgetKind> {
        let mut w = vec![G2];
        w.extend(sbar.iter().map(|&b| if b { G1 } else { G0 }));
        w.extend(std::iter::repeat_n(G4, l));
        w.push(G3);
        w
    }

    #[test]
    fn toy_transition_table() {
        // S = x1: S̄ = "10", so H1 = G1 and H2 = G0.
        let d = ExplicitDynamics::build(&fixtures::toy(), &toy_word(&[true, false], 2), Mode::Deterministic)
            .unwrap();
        assert_eq!(d.total(), 16);
        let table: Vec<usize> = (0..16).map(|c| d.successor(c).unwrap()).collect();
        assert_eq!(table, [1, 2, 3, 4, 4, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 9]);
        assert!(d.matches_generic_gluing(&fixtures::toy()).unwrap());
    }

    #[test]
    fn toy_placements() {
        let d = ExplicitDynamics::build(&fixtures::toy(), &toy_word(&[true, false], 2), Mode::Deterministic)
            .unwrap();
        let p = |c| {
            let p = d.placement(c);
            (p.copy, p.kind, p.local)
        };
        assert_eq!(p(0), (0, G2, 0));
        assert_eq!(p(1), (0, G2, 1));
        assert_eq!(p(2), (1, G1, 1));
        assert_eq!(p(9), (4, G4, 2));
        assert_eq!(p(10), (5, G3, 1));
        assert_eq!(p(15), (0, G2, 2));
        assert_eq!(d.copy_map(5), &[9, 10, 11, 12, 13, 14, 15]);
    }

    #[test]
    fn unsatisfiable_has_no_fixed_point() {
        let d = ExplicitDynamics::build(&fixtures::toy(), &toy_word(&[true, true], 2), Mode::Deterministic)
            .unwrap();
        assert!((0..d.total()).all(|c| d.successor(c) != Some(c)));
    }

    #[test]
    fn out_degree_diagnostic() {
        let err = ExplicitDynamics::build(&fixtures::ntoy(), &toy_word(&[false, true], 1), Mode::Deterministic)
            .unwrap_err();
        match err {
            Error::OutDegree { vertex, degree, contributors } => {
                assert_eq!((vertex, degree), (2, 2));
                assert!(contributors.contains("copy 1 (G0)"), "{contributors}");
            }
            other => panic!("unexpected {other}"),
        }
        let d = ExplicitDynamics::build(&fixtures::ntoy(), &toy_word(&[false, true], 1), Mode::NonDeterministic)
            .unwrap();
        assert!(d.has_arc(2, 2) && d.has_arc(2, 3));
    }

    #[test]
    fn delta_examples() {
        let g = fixtures::toy();
        assert_eq!(delta(&g, &parse_word("2").unwrap()).unwrap(), *g.graph(G2));
        assert_eq!(delta(&g, &parse_word("23").unwrap()).unwrap().size(), 8);
        assert_eq!(delta(&g, &parse_word("2 10 44 3").unwrap()).unwrap().size(), 16);
        assert!(parse_word("25").is_err());
        assert!(delta(&g, &[]).is_err());
    }

    #[test]
    fn generic_gluing_agrees_on_many_words() {
        for g in [fixtures::toy(), fixtures::ntoy()] {
            for bits in 0..16u32 {
                let sbar: Vec<bool> = (0..4).map(|b| bits >> b & 1 == 1).collect();
                for l in 0..4 {
                    let d = ExplicitDynamics::build(&g, &toy_word(&sbar, l), Mode::NonDeterministic).unwrap();
                    assert!(d.matches_generic_gluing(&g).unwrap());
                    assert_eq!(d.total(), 3 + 4 * 4 + 4 * l + 7 - 2 * (4 + l + 1));
                }
            }
        }
    }
}
