//! Macro translations between the three extensions, the coercion handler,
//! administrative normalisation and the simulation checker.

mod admin;
mod coerce;
mod sim;
mod translate;
mod types;

pub use admin::{admin_normalize, admin_normalize_counted};
pub use coerce::coercion_handler;
pub use sim::{simulate_check, SimError, SimFailure, SimMode, SimReport, SimStep, SEARCH_DEPTH};
pub use translate::{translate, translate_derivation};
pub use types::{cont_monad, translate_ctype_del_to_mon, translate_effect_del_to_mon, translate_vtype_del_to_mon};

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::ast::Calculus;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Default,
    /// Two nested shifts and resets in place of an abstracted bind or dispatcher.
    Nested,
    /// Operations as a free-monad layer, interpreted by a recursive function.
    FreeMonad,
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Variant, String> {
        match s {
            "default" => Ok(Variant::Default),
            "nested" => Ok(Variant::Nested),
            "free-monad" | "free" => Ok(Variant::FreeMonad),
            _ => Err(format!("unknown variant `{s}` (expected default, nested or free-monad)")),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Default => "default",
            Variant::Nested => "nested",
            Variant::FreeMonad => "free-monad",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TranslationId {
    pub source: Calculus,
    pub target: Calculus,
    pub variant: Variant,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum XlateError {
    #[error("no {2} translation from {0} to {1}")]
    InvalidId(Calculus, Calculus, Variant),
    #[error("operation name `{0}` is reserved by the translation")]
    ReservedLabel(String),
    #[error("source term: {0}")]
    Source(String),
    #[error("coercion: {0}")]
    NotIncluded(String),
}

impl TranslationId {
    pub fn new(source: Calculus, target: Calculus, variant: Variant) -> Result<TranslationId, XlateError> {
        use Calculus::*;
        let ok = match (source, target) {
            (Del, Mon) | (Del, Eff) | (Mon, Eff) => variant == Variant::Default,
            (Mon, Del) | (Eff, Del) => matches!(variant, Variant::Default | Variant::Nested),
            (Eff, Mon) => matches!(variant, Variant::Default | Variant::FreeMonad),
            _ => false,
        };
        if ok {
            Ok(TranslationId { source, target, variant })
        } else {
            Err(XlateError::InvalidId(source, target, variant))
        }
    }

    /// Every valid translation.
    pub fn all() -> Vec<TranslationId> {
        use Calculus::*;
        use Variant::*;
        [
            (Del, Mon, Default),
            (Mon, Del, Default),
            (Mon, Del, Nested),
            (Del, Eff, Default),
            (Eff, Del, Default),
            (Eff, Del, Nested),
            (Mon, Eff, Default),
            (Eff, Mon, Default),
            (Eff, Mon, FreeMonad),
        ]
        .into_iter()
        .map(|(s, t, v)| TranslationId { source: s, target: t, variant: v })
        .collect()
    }

    /// Whether the target is expected to reach the image of each source step
    /// with plain steps alone.
    pub fn on_the_nose(&self) -> bool {
        self.target == Calculus::Eff && matches!(self.source, Calculus::Mon | Calculus::Del)
    }
}

impl fmt::Display for TranslationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.source, self.target)?;
        if self.variant != Variant::Default {
            write!(f, " ({})", self.variant)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
