// SPDX-License-Identifier: Apache-2.0

//! The gadget family `Γ = {G0, …, G4}` and its constants.
//!
//! Every gadget uses the canonical labeling: with `g = |G|`,
//!
//! * `P'1 = {0 … k2−1}` (primary-only ports),
//! * `P'2 = {g−k2−k3 … g−k3−1}` (secondary-only ports),
//! * `P'3 = {g−k3 … g−1}` (ports that are both, merged across all copies).
//!
//! The primary tuple is `P'1 ++ P'3` and the secondary tuple `P'2 ++ P'3`.
//! `P'1(G2)` and `P'2(G3)` play no role; they are fixed to the same formula.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::BoundariedGraph;
use crate::error::{Error, Result};
use crate::instance::Mode;
use crate::sat::SBarWord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GadgetKind {
    G0,
    G1,
    G2,
    G3,
    G4,
}

impl GadgetKind {
    pub const ALL: [GadgetKind; 5] = [
        GadgetKind::G0,
        GadgetKind::G1,
        GadgetKind::G2,
        GadgetKind::G3,
        GadgetKind::G4,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_letter(letter: u8) -> Option<GadgetKind> {
        GadgetKind::ALL.get(letter as usize).copied()
    }

    pub fn name(self) -> &'static str {
        ["G0", "G1", "G2", "G3", "G4"][self.index()]
    }
}

impl fmt::Display for GadgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Constants of the padding formula `L(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaConstants {
    pub a: u64,
    pub b: u64,
    pub mu: u64,
    pub alpha: u64,
    pub log_q_alpha: u64,
}

/// Role of a local label once the gadget is glued between two neighbours.
enum Position {
    Shared(usize),
    Left(usize),
    Right(usize),
    Own(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaSpec {
    q: u32,
    k2: usize,
    k3: usize,
    constants: GammaConstants,
    graphs: [BoundariedGraph; 5],
}

#[derive(Serialize, Deserialize)]
struct RawGadget {
    size: usize,
    arcs: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    primary: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    secondary: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGamma {
    q: u32,
    k2: usize,
    k3: usize,
    constants: GammaConstants,
    graphs: BTreeMap<String, RawGadget>,
}

fn canonical_ports(size: usize, k2: usize, k3: usize) -> (Vec<usize>, Vec<usize>) {
    let p3 = size - k3..size;
    let primary = (0..k2).chain(p3.clone()).collect();
    let secondary = (size - k2 - k3..size - k3).chain(p3).collect();
    (primary, secondary)
}

impl GammaSpec {
    /// Builds a family from gadget sizes and arc lists, in the order
    /// `G0, G1, G2, G3, G4`, with canonical ports.
    pub fn new(
        q: u32,
        k2: usize,
        k3: usize,
        constants: GammaConstants,
        gadgets: [(usize, Vec<(usize, usize)>); 5],
    ) -> Result<Self> {
        let mut graphs = Vec::with_capacity(5);
        for (kind, (size, arcs)) in GadgetKind::ALL.into_iter().zip(gadgets) {
            let min = match kind {
                GadgetKind::G2 | GadgetKind::G3 => k2 + k3,
                _ => 2 * k2 + k3,
            };
            if size < min {
                return Err(Error::Gamma(format!(
                    "{kind} has {size} vertices, its ports need at least {min}"
                )));
            }
            let (p, s) = canonical_ports(size, k2, k3);
            graphs.push(
                BoundariedGraph::new(size, arcs, p, s)
                    .map_err(|e| Error::Gamma(format!("{kind}: {e}")))?,
            );
        }
        let graphs: [BoundariedGraph; 5] = graphs.try_into().expect("five gadgets");
        let spec = GammaSpec {
            q,
            k2,
            k3,
            constants,
            graphs,
        };
        spec.validate_shape()?;
        Ok(spec)
    }

    fn validate_shape(&self) -> Result<()> {
        if self.q < 2 {
            return Err(Error::Gamma(format!("q = {} must be at least 2", self.q)));
        }
        if self.constants.a == 0 {
            return Err(Error::Gamma("constant a must be non-zero".into()));
        }
        let g0 = self.graph(GadgetKind::G0).size();
        let g1 = self.graph(GadgetKind::G1).size();
        if g0 != g1 {
            return Err(Error::Gamma(format!("|G0| = {g0} differs from |G1| = {g1}")));
        }
        if self.copy_width(GadgetKind::G1) == 0 || self.copy_width(GadgetKind::G4) == 0 {
            return Err(Error::Gamma(
                "G0/G1 and G4 need at least one vertex outside P'1 and P'3".into(),
            ));
        }
        Ok(())
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn k2(&self) -> usize {
        self.k2
    }

    pub fn k3(&self) -> usize {
        self.k3
    }

    pub fn k(&self) -> usize {
        self.k2 + self.k3
    }

    pub fn constants(&self) -> &GammaConstants {
        &self.constants
    }

    pub fn graph(&self, kind: GadgetKind) -> &BoundariedGraph {
        &self.graphs[kind.index()]
    }

    /// Vertices of one copy that are not merged into the previous copy or
    /// into `P'3`: `g − k2 − k3` (equals `g'_j + k2` for the chained gadgets).
    pub fn copy_width(&self, kind: GadgetKind) -> usize {
        self.graph(kind).size() - self.k2 - self.k3
    }

    /// First label of `P'2` in `kind`.
    pub fn p2_start(&self, kind: GadgetKind) -> usize {
        self.graph(kind).size() - self.k2 - self.k3
    }

    /// First label of `P'3` in `kind`.
    pub fn p3_start(&self, kind: GadgetKind) -> usize {
        self.graph(kind).size() - self.k3
    }

    /// Mode-specific checks. Deterministic: out-degree at most one in every
    /// gadget, and the shared ports of `G0`, `G1` and `G4` carry the same
    /// arcs, all staying among the shared ports. Non-deterministic: `G0` and
    /// `G1` agree on port-to-port arcs.
    pub fn validate_for(&self, mode: Mode) -> Result<()> {
        match mode {
            Mode::Deterministic => {
                for kind in GadgetKind::ALL {
                    let g = self.graph(kind);
                    if let Some(v) = (0..g.size()).find(|&v| g.out_degree(v) > 1) {
                        return Err(Error::Gamma(format!(
                            "{kind} vertex {v} has out-degree {} in deterministic mode",
                            g.out_degree(v)
                        )));
                    }
                }
                let shared_arcs = |kind| -> Result<Vec<(usize, usize)>> {
                    let p3 = self.p3_start(kind);
                    let mut arcs = Vec::new();
                    for &(u, w) in self.graph(kind).arcs().iter().filter(|&&(u, _)| u >= p3) {
                        if w < p3 {
                            return Err(Error::Gamma(format!(
                                "{kind} shared port {u} points outside the shared ports"
                            )));
                        }
                        arcs.push((u - p3, w - p3));
                    }
                    Ok(arcs)
                };
                let reference = shared_arcs(GadgetKind::G4)?;
                for kind in [GadgetKind::G0, GadgetKind::G1] {
                    if shared_arcs(kind)? != reference {
                        return Err(Error::Gamma(format!(
                            "{kind} and G4 disagree on arcs between shared ports"
                        )));
                    }
                }
            }
            Mode::NonDeterministic => {
                let size = self.graph(GadgetKind::G0).size();
                let is_port = |v: usize| v < self.k2 || v >= self.p2_start(GadgetKind::G0);
                let ports = |kind| -> Vec<(usize, usize)> {
                    self.graph(kind)
                        .arcs()
                        .iter()
                        .copied()
                        .filter(|&(u, v)| is_port(u) && is_port(v))
                        .collect()
                };
                debug_assert_eq!(size, self.graph(GadgetKind::G1).size());
                let (a0, a1) = (ports(GadgetKind::G0), ports(GadgetKind::G1));
                if a0 != a1 {
                    return Err(Error::Gamma(format!(
                        "G0 and G1 disagree on port-to-port arcs: {a0:?} vs {a1:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checks, without materializing the glued graph, that every vertex of
    /// `Δ(2 · S̄ · 4^L · 3)` has exactly one out-neighbour. Arcs that land on
    /// the same merged vertex count once. With `sbar` the check is exact;
    /// without it every G0/G1 arrangement must pass.
    pub fn check_deterministic_gluing(&self, s: usize, l: &BigUint, sbar: Option<&SBarWord>) -> Result<()> {
        use GadgetKind::*;
        let fail = |what: String| Err(Error::Gamma(format!("glued dynamics is not deterministic: {what}")));
        let after01 = if l.is_zero() { G3 } else { G4 };

        let (mut present, mut pairs) = match sbar {
            Some(word) => {
                let kinds: Vec<GadgetKind> = word.bits().iter().map(|&b| if b { G1 } else { G0 }).collect();
                let mut pairs: Vec<_> = kinds.windows(2).map(|w| (w[0], w[1])).collect();
                pairs.push((G2, kinds[0]));
                pairs.push((*kinds.last().expect("at least one formula copy"), after01));
                (kinds, pairs)
            }
            None => {
                let mut pairs = vec![(G2, G0), (G2, G1), (G0, after01), (G1, after01)];
                if s > 0 {
                    pairs.extend([(G0, G0), (G0, G1), (G1, G0), (G1, G1)]);
                }
                (vec![G0, G1], pairs)
            }
        };
        present.extend([G2, G3]);
        if !l.is_zero() {
            present.push(G4);
            pairs.push((G4, G3));
            if *l > BigUint::one() {
                pairs.push((G4, G4));
            }
        }
        present.sort();
        present.dedup();
        pairs.sort();
        pairs.dedup();

        for &kind in &present {
            let g = self.graph(kind);
            let first = if kind == G2 { 0 } else { self.k2 };
            let last = if kind == G3 { self.p3_start(kind) } else { self.p2_start(kind) };
            if let Some(v) = (first..last).find(|&v| g.out_degree(v) != 1) {
                return fail(format!("{kind} vertex {v} has out-degree {}", g.out_degree(v)));
            }
        }

        // A vertex shared by a left copy (as its P'2 block) and a right copy
        // (as its P'1 block). Targets are named relative to that boundary.
        #[derive(PartialEq, Eq, PartialOrd, Ord)]
        enum Target {
            Shared(usize),
            LeftOfLeft(usize),
            Boundary(usize),
            RightOfRight(usize),
            InLeft(usize),
            InRight(usize),
        }
        for &(a, b) in &pairs {
            for t in 0..self.k2 {
                let mut targets = BTreeSet::new();
                for w in self.graph(a).successors(self.p2_start(a) + t) {
                    targets.insert(match self.position(a, w) {
                        Position::Shared(x) => Target::Shared(x),
                        Position::Left(x) => Target::LeftOfLeft(x),
                        Position::Right(x) => Target::Boundary(x),
                        Position::Own(x) => Target::InLeft(x),
                    });
                }
                for w in self.graph(b).successors(t) {
                    targets.insert(match self.position(b, w) {
                        Position::Shared(x) => Target::Shared(x),
                        Position::Left(x) => Target::Boundary(x),
                        Position::Right(x) => Target::RightOfRight(x),
                        Position::Own(x) => Target::InRight(x),
                    });
                }
                if targets.len() != 1 {
                    return fail(format!(
                        "port {t} between {a} and {b} has {} out-neighbours",
                        targets.len()
                    ));
                }
            }
        }

        // Shared ports: G0, G1 and G4 agree on them and only point inside
        // P'3 (see `validate_for`), so only G2 and G3 add private targets.
        for t in 0..self.k3 {
            let mut shared = BTreeSet::new();
            let mut private = 0;
            for &kind in &present {
                for w in self.graph(kind).successors(self.p3_start(kind) + t) {
                    match self.position(kind, w) {
                        Position::Shared(x) => {
                            shared.insert(x);
                        }
                        _ => private += 1,
                    }
                }
            }
            let count = shared.len() + private;
            if count != 1 {
                return fail(format!("shared port {t} has {count} out-neighbours"));
            }
        }
        Ok(())
    }

    fn position(&self, kind: GadgetKind, w: usize) -> Position {
        if w >= self.p3_start(kind) {
            Position::Shared(w - self.p3_start(kind))
        } else if kind != GadgetKind::G2 && w < self.k2 {
            Position::Left(w)
        } else if kind != GadgetKind::G3 && w >= self.p2_start(kind) {
            Position::Right(w - self.p2_start(kind))
        } else {
            Position::Own(w)
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawGamma =
            serde_json::from_str(text).map_err(|e| Error::Gamma(format!("malformed Γ file: {e}")))?;
        let mut gadgets = Vec::with_capacity(5);
        for kind in GadgetKind::ALL {
            let g = raw
                .graphs
                .get(kind.name())
                .ok_or_else(|| Error::Gamma(format!("missing gadget {kind}")))?;
            gadgets.push((g.size, g.arcs.iter().map(|&[u, v]| (u, v)).collect()));
        }
        if let Some(extra) = raw
            .graphs
            .keys()
            .find(|k| GadgetKind::ALL.iter().all(|g| g.name() != k.as_str()))
        {
            return Err(Error::Gamma(format!("unknown gadget {extra:?}")));
        }
        let gadgets: [(usize, Vec<(usize, usize)>); 5] = gadgets.try_into().expect("five gadgets");
        let spec = GammaSpec::new(raw.q, raw.k2, raw.k3, raw.constants, gadgets)?;
        for kind in GadgetKind::ALL {
            let g = &raw.graphs[kind.name()];
            let canon = spec.graph(kind);
            let check = |name: &str, given: &Option<Vec<usize>>, expected: &[usize], constrained: bool| {
                match given {
                    Some(t) if constrained && t.as_slice() != expected => Err(Error::Gamma(format!(
                        "{kind} {name} ports {t:?} do not follow the canonical labeling {expected:?}"
                    ))),
                    Some(t) if t.len() != spec.k() => Err(Error::Gamma(format!(
                        "{kind} {name} ports {t:?} must have length {}",
                        spec.k()
                    ))),
                    _ => Ok(()),
                }
            };
            check("primary", &g.primary, canon.primary(), kind != GadgetKind::G2)?;
            check("secondary", &g.secondary, canon.secondary(), kind != GadgetKind::G3)?;
        }
        Ok(spec)
    }

    /// Canonical serialization (sorted arcs, implicit ports).
    pub fn to_json(&self) -> String {
        let graphs = GadgetKind::ALL
            .iter()
            .map(|&kind| {
                let g = self.graph(kind);
                (
                    kind.name().to_string(),
                    RawGadget {
                        size: g.size(),
                        arcs: g.arcs().iter().map(|&(u, v)| [u, v]).collect(),
                        primary: None,
                        secondary: None,
                    },
                )
            })
            .collect();
        let raw = RawGamma {
            q: self.q,
            k2: self.k2,
            k3: self.k3,
            constants: self.constants,
            graphs,
        };
        serde_json::to_string(&raw).expect("serializable")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn digest(&self) -> String {
        Sha256::digest(self.to_json().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glue::fixtures;

    #[test]
    fn toy_ports_are_canonical() {
        let g = fixtures::toy();
        assert_eq!(g.graph(GadgetKind::G1).primary(), &[0, 3]);
        assert_eq!(g.graph(GadgetKind::G1).secondary(), &[2, 3]);
        assert_eq!(g.graph(GadgetKind::G2).secondary(), &[1, 2]);
        assert_eq!(g.graph(GadgetKind::G3).primary(), &[0, 6]);
        assert_eq!(g.copy_width(GadgetKind::G1), 2);
    }

    #[test]
    fn json_round_trip_and_digest() {
        let g = fixtures::toy();
        let back = GammaSpec::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.digest(), g.digest());
        assert_ne!(fixtures::ntoy().digest(), g.digest());
        let parsed = GammaSpec::from_json(fixtures::TOY_JSON).unwrap();
        assert_eq!(parsed, g);
    }

    #[test]
    fn non_canonical_ports_rejected() {
        let text = fixtures::TOY_JSON.replace(
            r#""G1":{"size":4,"arcs":[[0,1],[1,2]]}"#,
            r#""G1":{"size":4,"arcs":[[0,1],[1,2]],"primary":[1,3]}"#,
        );
        assert_ne!(text, fixtures::TOY_JSON);
        assert!(matches!(GammaSpec::from_json(&text), Err(Error::Gamma(_))));
        let ok = fixtures::TOY_JSON.replace(
            r#""G1":{"size":4,"arcs":[[0,1],[1,2]]}"#,
            r#""G1":{"size":4,"arcs":[[0,1],[1,2]],"primary":[0,3],"secondary":[2,3]}"#,
        );
        assert!(GammaSpec::from_json(&ok).is_ok());
    }

    #[test]
    fn shape_errors() {
        let c = *fixtures::toy().constants();
        let mut gadgets = fixtures::toy_gadgets();
        gadgets[1].0 = 5;
        assert!(GammaSpec::new(2, 1, 1, c, gadgets).is_err());
        let mut gadgets = fixtures::toy_gadgets();
        gadgets[0].1.push((0, 9));
        assert!(GammaSpec::new(2, 1, 1, c, gadgets).is_err());
        assert!(GammaSpec::new(1, 1, 1, c, fixtures::toy_gadgets()).is_err());
        assert!(GammaSpec::from_json("{}").is_err());
    }

    #[test]
    fn mode_validation() {
        assert!(fixtures::toy().validate_for(Mode::Deterministic).is_ok());
        assert!(fixtures::ntoy().validate_for(Mode::Deterministic).is_err());
        assert!(fixtures::ntoy().validate_for(Mode::NonDeterministic).is_ok());
        let c = *fixtures::toy().constants();
        let mut gadgets = fixtures::toy_gadgets();
        gadgets[0].1.push((3, 3));
        let g = GammaSpec::new(2, 1, 1, c, gadgets).unwrap();
        assert!(g.validate_for(Mode::NonDeterministic).is_err());
    }

    #[test]
    fn structural_determinism() {
        let g = fixtures::toy();
        let word = crate::sat::parse_expr("x1").unwrap().sbar().unwrap();
        for l in 0..4u32 {
            g.check_deterministic_gluing(1, &l.into(), Some(&word)).unwrap();
            g.check_deterministic_gluing(1, &l.into(), None).unwrap();
        }
        let c = *g.constants();
        // the same shared self-loop in every copy merges into one arc
        let mut gadgets = fixtures::toy_gadgets();
        gadgets[3].1.retain(|&(u, _)| u != 6);
        for k in [0, 1, 4] {
            gadgets[k].1.push((3, 3));
        }
        let merged = GammaSpec::new(2, 1, 1, c, gadgets).unwrap();
        merged.validate_for(Mode::Deterministic).unwrap();
        merged.check_deterministic_gluing(1, &2u32.into(), Some(&word)).unwrap();
        // a G2 port arc plus the G1 port arc it is merged with
        let mut gadgets = fixtures::toy_gadgets();
        gadgets[2].1.push((1, 0));
        let bad = GammaSpec::new(2, 1, 1, c, gadgets).unwrap();
        let all_false = crate::sat::parse_expr("x1 & !x1").unwrap().sbar().unwrap();
        assert!(bad.check_deterministic_gluing(1, &2u32.into(), Some(&all_false)).is_err());
        assert!(bad.check_deterministic_gluing(1, &2u32.into(), None).is_err());
        // G4 shared port leaving the shared block
        let mut gadgets = fixtures::toy_gadgets();
        gadgets[4].1.push((3, 2));
        assert!(GammaSpec::new(2, 1, 1, c, gadgets).unwrap().validate_for(Mode::Deterministic).is_err());
    }
}
