//! Well-formedness of types and effects.

use super::types::{CType, Effect, HandlerType, VType};
use super::{check_monad, ErrorKind, TypeError};
use crate::ast::Calculus;

type R = Result<(), TypeError>;

pub fn kind_check_vtype(t: &VType, tyvars: &[String], calc: Calculus) -> R {
    match t {
        VType::Var(n) if tyvars.contains(n) => Ok(()),
        VType::Var(n) => Err(TypeError::new(ErrorKind::Unbound, format!("unbound type variable `{n}`"))),
        VType::Unit => Ok(()),
        VType::Prod(a, b) => {
            kind_check_vtype(a, tyvars, calc)?;
            kind_check_vtype(b, tyvars, calc)
        }
        VType::Variant(m) => m.values().try_for_each(|t| kind_check_vtype(t, tyvars, calc)),
        VType::Thunk(e, c) => {
            kind_check_effect(e, tyvars, calc)?;
            kind_check_ctype(c, tyvars, calc)
        }
        VType::Hole | VType::Meta(_) => Err(TypeError::new(ErrorKind::MissingAnnotation, "type is not fully known")),
    }
}

pub fn kind_check_ctype(c: &CType, tyvars: &[String], calc: Calculus) -> R {
    match c {
        CType::Returner(a) => kind_check_vtype(a, tyvars, calc),
        CType::Fun(a, r) => {
            kind_check_vtype(a, tyvars, calc)?;
            kind_check_ctype(r, tyvars, calc)
        }
        CType::Prod(a, b) => {
            kind_check_ctype(a, tyvars, calc)?;
            kind_check_ctype(b, tyvars, calc)
        }
        CType::Hole | CType::Meta(_) => Err(TypeError::new(ErrorKind::MissingAnnotation, "type is not fully known")),
    }
}

pub fn kind_check_effect(e: &Effect, tyvars: &[String], calc: Calculus) -> R {
    let wrong = |what: &str| Err(TypeError::new(ErrorKind::NotAvailable, format!("{what} not available in {calc}")));
    match e {
        Effect::Pure => Ok(()),
        Effect::Meta(_) => Err(TypeError::new(ErrorKind::MissingAnnotation, "effect is not fully known")),
        Effect::Ops(m) => {
            if calc != Calculus::Eff {
                return wrong("operation effects");
            }
            m.values().try_for_each(|s| {
                kind_check_vtype(&s.param, tyvars, calc)?;
                kind_check_vtype(&s.result, tyvars, calc)
            })
        }
        Effect::Mon { base, layer } => {
            if calc != Calculus::Mon {
                return wrong("monad layers");
            }
            kind_check_effect(base, tyvars, calc)?;
            check_monad(layer, base)
                .map(|_| ())
                .map_err(|e| TypeError::new(ErrorKind::IllKindedLayer, format!("ill-kinded monad layer: {}", e.message)))
        }
        Effect::Del { base, top } => {
            if calc != Calculus::Del {
                return wrong("answer-type stacks");
            }
            kind_check_effect(base, tyvars, calc)?;
            kind_check_ctype(top, tyvars, calc)
        }
    }
}

pub fn kind_check_handler_type(h: &HandlerType, tyvars: &[String], calc: Calculus) -> R {
    kind_check_vtype(&h.input, tyvars, calc)?;
    kind_check_effect(&h.in_effect, tyvars, calc)?;
    kind_check_ctype(&h.output, tyvars, calc)?;
    kind_check_effect(&h.out_effect, tyvars, calc)
}
