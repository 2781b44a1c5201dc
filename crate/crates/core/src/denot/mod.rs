//! Set-theoretic semantics over finite sets: enumeration of type
//! denotations, an interpreter for typing derivations, monad-law checks and
//! the tick-counting demonstration.

mod elem;
mod eval;
mod laws;
mod pigeon;
mod sets;

pub use elem::{Closure, Elem};
pub use eval::{extend, Ctx, Interp, LayerDerivation};
pub use laws::{check_monad_laws, LawCheck, LawReport, LawWitness, DEFAULT_BUDGET};
pub use pigeon::{counting_handler, pigeonhole_demo, run_counted, ticks, DistinguishingPair, PigeonholeReport};
pub use sets::{
    cardinality_ctype, cardinality_monad, cardinality_vtype, den_ctype, den_vtype, functions, monad_set, Assignment, Card,
    FinSet, Sizes, ENUM_LIMIT,
};

use serde::Serialize;

use crate::ast::{Calculus, Comp};
use crate::typesys::types::VType;
use crate::typesys::{check_program, Derivation, TypeError};

#[derive(Clone, Debug, thiserror::Error)]
pub enum DenotError {
    #[error("infinite: {0}")]
    Infinite(String),
    #[error("set of {0} elements exceeds the enumeration limit")]
    TooLarge(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("ill-formed: {0}")]
    Ill(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// Denotation of a derivation under `theta`, in an environment of elements
/// for its free variables (outermost first).
pub fn den_term(d: &Derivation, theta: Assignment, env: &[Elem]) -> Result<Elem, DenotError> {
    Ctx::new(&Interp::new(), &std::rc::Rc::new(d.clone()), theta).eval(env)
}

/// Denotation of a closed program at the empty effect.
pub fn den_program(m: &Comp, calc: Calculus) -> Result<Elem, DenotError> {
    den_term(&check_program(m, calc)?, Assignment::new(), &[])
}

/// Summary of a type's denotation.
#[derive(Clone, Debug, Serialize)]
pub struct TypeDenotation {
    #[serde(rename = "type")]
    pub ty: String,
    pub cardinality: Card,
    pub sample: Vec<String>,
}

/// Cardinality and the first few elements of `ty`'s denotation. Type
/// variables get `sizes[v]` atoms.
pub fn describe_type(ty: &VType, sizes: &[(String, usize)], sample: usize) -> Result<TypeDenotation, DenotError> {
    let mut theta = Assignment::new();
    let mut card_sizes = Sizes::new();
    for (v, n) in sizes {
        theta = theta.with(v, Assignment::atoms(v, *n));
        card_sizes.insert(v.clone(), Card::n(*n as u64));
    }
    let cardinality = cardinality_vtype(ty, &card_sizes)?;
    let sample = match den_vtype(ty, &theta) {
        Ok(s) => s.iter().take(sample).map(|e| e.to_string()).collect(),
        Err(DenotError::Infinite(_) | DenotError::TooLarge(_)) => Vec::new(),
        Err(e) => return Err(e),
    };
    Ok(TypeDenotation { ty: crate::surface::print_vtype(ty), cardinality, sample })
}

#[cfg(test)]
mod tests;
