//! Combinatorial handle calculus.
//!
//! Kirby diagrams are tracked at the level of linking data (algebraic and
//! geometric linking matrices plus framings), Casson handles as signed
//! rooted trees with finite back-edge presentations, and the middle level
//! of an h-cobordism as sphere pairs, fingers, Whitney loops and accessory
//! loops. On top of these sit the positivity decision for ribbon
//! descriptors and a planner that turns non-positive descriptors into
//! replayable product certificates.

pub mod corpus;
pub mod diagram;
pub mod homology;
pub mod middle;
pub mod render;
pub mod script;
pub mod signature;
pub mod simplifier;
pub mod textio;
pub mod tree;

pub use diagram::{Component, ComponentKind, KirbyDiagram, MoveError, PairKind, Side, Violation};
pub use homology::{AbelianGroup, BoundaryHomology};
pub use middle::{
    AccessoryLoop, Cap, Finger, FingerGraph, MiddleLevelData, RibbonDecision, RibbonDescriptor,
};
pub use simplifier::{stabilization_plan, verify_plan, Outcome, StabilizationPlan, Step};
pub use tree::{PositiveBranch, PruneDepth, SignedTree};

use std::fmt;
use std::str::FromStr;

/// An orientation sign: slide direction, blow-up sign, or kink sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Sign::Plus
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+" | "+1" | "1" => Ok(Sign::Plus),
            "-" | "-1" => Ok(Sign::Minus),
            other => Err(format!("expected a sign (+ or -), found `{other}`")),
        }
    }
}
