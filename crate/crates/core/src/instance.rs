// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use crate::circuit::CircuitMeta;
use crate::error::{Error, Result};
use crate::glue::GammaSpec;
use crate::sat::{PropFormula, MAX_SBAR_VARS};
use crate::sizing::InstanceSizes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// A function on configurations; circuit maps `c` to `F(c)`.
    Deterministic,
    /// A relation; circuit maps `(c, c')` to one adjacency bit.
    NonDeterministic,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Deterministic => "det",
            Mode::NonDeterministic => "nondet",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "det" => Ok(Mode::Deterministic),
            "nondet" => Ok(Mode::NonDeterministic),
            other => Err(Error::Construction(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SizingMode {
    /// Padding from the closed form; the total must be a power of `q`.
    Uniform,
    /// Any padding count.
    Free { l: BigUint },
}

/// A gadget family, a formula and the chosen sizing: the compiler input.
#[derive(Debug, Clone)]
pub struct ReductionInstance {
    gamma: GammaSpec,
    formula: PropFormula,
    sizes: InstanceSizes,
    mode: Mode,
}

impl ReductionInstance {
    pub fn new(gamma: GammaSpec, formula: PropFormula, sizing: SizingMode, mode: Mode) -> Result<Self> {
        gamma.validate_for(mode)?;
        let s = formula.vars();
        let sizes = match sizing {
            SizingMode::Uniform => InstanceSizes::uniform(&gamma, s)?,
            SizingMode::Free { l } => InstanceSizes::free(&gamma, s, l)?,
        };
        if mode == Mode::Deterministic {
            let sbar = if s <= MAX_SBAR_VARS { Some(formula.sbar()?) } else { None };
            gamma.check_deterministic_gluing(s, &sizes.l, sbar.as_ref())?;
        }
        Ok(ReductionInstance {
            gamma,
            formula,
            sizes,
            mode,
        })
    }

    pub fn gamma(&self) -> &GammaSpec {
        &self.gamma
    }

    pub fn formula(&self) -> &PropFormula {
        &self.formula
    }

    pub fn sizes(&self) -> &InstanceSizes {
        &self.sizes
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Same formula and family in the other mode.
    pub fn with_mode(&self, mode: Mode) -> Result<Self> {
        let sizing = SizingMode::Free {
            l: self.sizes.l.clone(),
        };
        let mut inst = ReductionInstance::new(self.gamma.clone(), self.formula.clone(), sizing, mode)?;
        inst.sizes.kind = self.sizes.kind;
        inst.sizes.n = self.sizes.n;
        Ok(inst)
    }

    pub fn meta(&self) -> CircuitMeta {
        CircuitMeta {
            total: self.sizes.total.to_string(),
            n: self.sizes.n,
            s: self.sizes.s,
            l: self.sizes.l.to_string(),
            mode: self.mode.as_str().to_string(),
            arity: match self.mode {
                Mode::Deterministic => "det".into(),
                Mode::NonDeterministic => "nondet".into(),
            },
            gamma_digest: self.gamma.digest(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glue::fixtures;
    use crate::sat::parse_expr;

    #[test]
    fn toy_free_instance() {
        let inst = ReductionInstance::new(
            fixtures::toy(),
            parse_expr("x1").unwrap(),
            SizingMode::Free { l: 2u32.into() },
            Mode::Deterministic,
        )
        .unwrap();
        assert_eq!(inst.sizes().total, 16u32.into());
        assert_eq!(inst.sizes().n, Some(4));
        assert_eq!(inst.meta().total, "16");
    }

    #[test]
    fn uniform_guard() {
        let err = ReductionInstance::new(
            fixtures::toy(),
            parse_expr("x1").unwrap(),
            SizingMode::Uniform,
            Mode::Deterministic,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotUniform { .. }));
    }

    #[test]
    fn nondeterministic_family_rejected_in_det_mode() {
        let r = ReductionInstance::new(
            fixtures::ntoy(),
            parse_expr("!x1").unwrap(),
            SizingMode::Free { l: 2u32.into() },
            Mode::Deterministic,
        );
        assert!(matches!(r, Err(Error::Gamma(_))));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("det".parse::<Mode>().unwrap(), Mode::Deterministic);
        assert_eq!("nondet".parse::<Mode>().unwrap(), Mode::NonDeterministic);
        assert!("both".parse::<Mode>().is_err());
    }
}
