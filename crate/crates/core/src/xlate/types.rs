//! Types of delimited control as continuation-monad layers.

use std::rc::Rc;

use crate::ast::{app, force, lam, thunk, var, MonadDef, Name};
use crate::typesys::types::{CType, Effect, OpSig, VType};

/// The continuation monad over `base` with answer type `answer`:
/// `where a. U_base (a -> C) -> C`. Without an answer type the carrier is left open.
pub fn cont_monad(base: &Effect, answer: Option<&CType>) -> Rc<MonadDef> {
    let carrier = match answer {
        Some(c) => CType::fun(VType::thunk(base.clone(), CType::fun(VType::Var("a".into()), c.clone())), c.clone()),
        None => CType::Hole,
    };
    // return x -> fun c -> force c x
    let unit = lam("c", app(force(var(0)), var(1)));
    // m >>= f -> fun c -> force m (thunk fun y -> force f y c)
    let bind = lam("c", app(force(var(2)), thunk(lam("y", app(app(force(var(2)), var(0)), var(1))))));
    Rc::new(MonadDef {
        tyvar: "a".into(),
        carrier,
        unit_name: Name::new("x"),
        unit,
        bind_names: (Name::new("m"), Name::new("f")),
        bind,
    })
}

pub fn translate_effect_del_to_mon(e: &Effect) -> Effect {
    match e {
        Effect::Pure | Effect::Meta(_) => e.clone(),
        Effect::Del { base, top } => {
            let base = translate_effect_del_to_mon(base);
            let top = translate_ctype_del_to_mon(top);
            let layer = cont_monad(&base, Some(&top));
            Effect::Mon { base: Box::new(base), layer }
        }
        Effect::Ops(m) => Effect::Ops(
            m.iter()
                .map(|(o, s)| {
                    let sig = OpSig { param: translate_vtype_del_to_mon(&s.param), result: translate_vtype_del_to_mon(&s.result) };
                    (o.clone(), sig)
                })
                .collect(),
        ),
        Effect::Mon { base, layer } => Effect::Mon { base: Box::new(translate_effect_del_to_mon(base)), layer: layer.clone() },
    }
}

pub fn translate_vtype_del_to_mon(t: &VType) -> VType {
    match t {
        VType::Var(_) | VType::Unit | VType::Hole | VType::Meta(_) => t.clone(),
        VType::Prod(a, b) => VType::prod(translate_vtype_del_to_mon(a), translate_vtype_del_to_mon(b)),
        VType::Variant(m) => VType::Variant(m.iter().map(|(l, t)| (l.clone(), translate_vtype_del_to_mon(t))).collect()),
        VType::Thunk(e, c) => VType::thunk(translate_effect_del_to_mon(e), translate_ctype_del_to_mon(c)),
    }
}

pub fn translate_ctype_del_to_mon(c: &CType) -> CType {
    match c {
        CType::Returner(a) => CType::f(translate_vtype_del_to_mon(a)),
        CType::Fun(a, c) => CType::fun(translate_vtype_del_to_mon(a), translate_ctype_del_to_mon(c)),
        CType::Prod(a, b) => CType::prod(translate_ctype_del_to_mon(a), translate_ctype_del_to_mon(b)),
        CType::Hole | CType::Meta(_) => c.clone(),
    }
}
