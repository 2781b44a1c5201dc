//! Value, computation, effect and handler types.

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use crate::ast::{Calculus, Construct, Label, MonadDef, OpName};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VType {
    Var(String),
    Unit,
    Prod(Box<VType>, Box<VType>),
    Variant(BTreeMap<Label, VType>),
    Thunk(Box<Effect>, Box<CType>),
    /// Unknown type in an untyped program; the checker treats it as a fresh unknown.
    Hole,
    /// Unification variable; only appears inside the checker.
    Meta(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CType {
    Returner(Box<VType>),
    Fun(Box<VType>, Box<CType>),
    Prod(Box<CType>, Box<CType>),
    Hole,
    Meta(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpSig {
    pub param: VType,
    pub result: VType,
}

/// Effects. Stacks are linked through `base`, bottom layer last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Effect {
    Pure,
    /// Nonempty operation signature.
    Ops(BTreeMap<OpName, OpSig>),
    Mon { base: Box<Effect>, layer: Rc<MonadDef> },
    Del { base: Box<Effect>, top: Box<CType> },
    Meta(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HandlerType {
    pub input: VType,
    pub in_effect: Effect,
    pub output: CType,
    pub out_effect: Effect,
}

impl VType {
    pub fn prod(a: VType, b: VType) -> VType {
        VType::Prod(Box::new(a), Box::new(b))
    }

    pub fn thunk(e: Effect, c: CType) -> VType {
        VType::Thunk(Box::new(e), Box::new(c))
    }

    pub fn variant<'a>(it: impl IntoIterator<Item = (&'a str, VType)>) -> VType {
        VType::Variant(it.into_iter().map(|(l, t)| (l.to_string(), t)).collect())
    }

    pub fn bit() -> VType {
        VType::variant([("False", VType::Unit), ("True", VType::Unit)])
    }

    pub fn empty() -> VType {
        VType::Variant(BTreeMap::new())
    }

    /// No thunks, type variables or unknowns.
    pub fn is_ground(&self) -> bool {
        match self {
            VType::Unit => true,
            VType::Prod(a, b) => a.is_ground() && b.is_ground(),
            VType::Variant(m) => m.values().all(VType::is_ground),
            VType::Var(_) | VType::Thunk(..) | VType::Hole | VType::Meta(_) => false,
        }
    }

    pub fn has_unknowns(&self) -> bool {
        match self {
            VType::Hole | VType::Meta(_) => true,
            VType::Var(_) | VType::Unit => false,
            VType::Prod(a, b) => a.has_unknowns() || b.has_unknowns(),
            VType::Variant(m) => m.values().any(VType::has_unknowns),
            VType::Thunk(e, c) => e.has_unknowns() || c.has_unknowns(),
        }
    }

    pub fn subst_tyvar(&self, name: &str, by: &VType) -> VType {
        match self {
            VType::Var(n) if n == name => by.clone(),
            VType::Var(_) | VType::Unit | VType::Hole | VType::Meta(_) => self.clone(),
            VType::Prod(a, b) => VType::prod(a.subst_tyvar(name, by), b.subst_tyvar(name, by)),
            VType::Variant(m) => VType::Variant(m.iter().map(|(l, t)| (l.clone(), t.subst_tyvar(name, by))).collect()),
            VType::Thunk(e, c) => VType::thunk(e.subst_tyvar(name, by), c.subst_tyvar(name, by)),
        }
    }

    pub fn rename_tyvar(&self, from: &str, to: &str) -> VType {
        self.subst_tyvar(from, &VType::Var(to.to_string()))
    }

    pub fn collect_tyvars(&self, out: &mut BTreeSet<String>) {
        match self {
            VType::Var(n) => {
                out.insert(n.clone());
            }
            VType::Unit | VType::Hole | VType::Meta(_) => {}
            VType::Prod(a, b) => {
                a.collect_tyvars(out);
                b.collect_tyvars(out);
            }
            VType::Variant(m) => m.values().for_each(|t| t.collect_tyvars(out)),
            VType::Thunk(e, c) => {
                e.collect_tyvars(out);
                c.collect_tyvars(out);
            }
        }
    }

    pub fn tyvars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.collect_tyvars(&mut s);
        s
    }

    /// An extension construct whose effect grammar appears in this type
    /// but does not belong to `calc`.
    pub fn foreign_construct(&self, calc: Calculus) -> Option<Construct> {
        match self {
            VType::Var(_) | VType::Unit | VType::Hole | VType::Meta(_) => None,
            VType::Prod(a, b) => a.foreign_construct(calc).or_else(|| b.foreign_construct(calc)),
            VType::Variant(m) => m.values().find_map(|t| t.foreign_construct(calc)),
            VType::Thunk(e, c) => e.foreign_construct(calc).or_else(|| c.foreign_construct(calc)),
        }
    }
}

impl CType {
    pub fn f(a: VType) -> CType {
        CType::Returner(Box::new(a))
    }

    pub fn fun(a: VType, c: CType) -> CType {
        CType::Fun(Box::new(a), Box::new(c))
    }

    pub fn prod(a: CType, b: CType) -> CType {
        CType::Prod(Box::new(a), Box::new(b))
    }

    pub fn has_unknowns(&self) -> bool {
        match self {
            CType::Hole | CType::Meta(_) => true,
            CType::Returner(a) => a.has_unknowns(),
            CType::Fun(a, c) => a.has_unknowns() || c.has_unknowns(),
            CType::Prod(a, b) => a.has_unknowns() || b.has_unknowns(),
        }
    }

    pub fn subst_tyvar(&self, name: &str, by: &VType) -> CType {
        self.map_vtypes(&|t| t.subst_tyvar(name, by))
    }

    pub fn rename_tyvar(&self, from: &str, to: &str) -> CType {
        self.subst_tyvar(from, &VType::Var(to.to_string()))
    }

    /// Apply `f` to each maximal value type inside this computation type.
    pub fn map_vtypes(&self, f: &dyn Fn(&VType) -> VType) -> CType {
        match self {
            CType::Returner(a) => CType::f(f(a)),
            CType::Fun(a, c) => CType::fun(f(a), c.map_vtypes(f)),
            CType::Prod(a, b) => CType::prod(a.map_vtypes(f), b.map_vtypes(f)),
            CType::Hole | CType::Meta(_) => self.clone(),
        }
    }

    pub fn collect_tyvars(&self, out: &mut BTreeSet<String>) {
        match self {
            CType::Returner(a) => a.collect_tyvars(out),
            CType::Fun(a, c) => {
                a.collect_tyvars(out);
                c.collect_tyvars(out);
            }
            CType::Prod(a, b) => {
                a.collect_tyvars(out);
                b.collect_tyvars(out);
            }
            CType::Hole | CType::Meta(_) => {}
        }
    }

    pub fn tyvars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.collect_tyvars(&mut s);
        s
    }

    pub fn foreign_construct(&self, calc: Calculus) -> Option<Construct> {
        match self {
            CType::Returner(a) => a.foreign_construct(calc),
            CType::Fun(a, c) => a.foreign_construct(calc).or_else(|| c.foreign_construct(calc)),
            CType::Prod(a, b) => a.foreign_construct(calc).or_else(|| b.foreign_construct(calc)),
            CType::Hole | CType::Meta(_) => None,
        }
    }

    /// Visit every effect occurring in this type.
    pub fn walk_effects<E>(&self, f: &mut dyn FnMut(&Effect) -> Result<(), E>) -> Result<(), E> {
        fn v<E>(t: &VType, f: &mut dyn FnMut(&Effect) -> Result<(), E>) -> Result<(), E> {
            match t {
                VType::Prod(a, b) => {
                    v(a, f)?;
                    v(b, f)
                }
                VType::Variant(m) => m.values().try_for_each(|t| v(t, f)),
                VType::Thunk(e, c) => {
                    f(e)?;
                    c.walk_effects(f)
                }
                _ => Ok(()),
            }
        }
        match self {
            CType::Returner(a) => v(a, f),
            CType::Fun(a, c) => {
                v(a, f)?;
                c.walk_effects(f)
            }
            CType::Prod(a, b) => {
                a.walk_effects(f)?;
                b.walk_effects(f)
            }
            CType::Hole | CType::Meta(_) => Ok(()),
        }
    }

    /// The value type returned once all arguments are supplied and a side chosen, if a returner.
    pub fn as_returner(&self) -> Option<&VType> {
        match self {
            CType::Returner(a) => Some(a),
            _ => None,
        }
    }
}

impl Effect {
    /// Build an operation effect; the empty signature is `Pure`.
    pub fn ops(m: BTreeMap<OpName, OpSig>) -> Effect {
        if m.is_empty() {
            Effect::Pure
        } else {
            Effect::Ops(m)
        }
    }

    pub fn ops_from<'a>(it: impl IntoIterator<Item = (&'a str, VType, VType)>) -> Effect {
        Effect::ops(it.into_iter().map(|(o, p, r)| (o.to_string(), OpSig { param: p, result: r })).collect())
    }

    /// Build a monad stack from layers listed bottom to top.
    pub fn mon_stack(layers: impl IntoIterator<Item = Rc<MonadDef>>) -> Effect {
        layers
            .into_iter()
            .fold(Effect::Pure, |base, layer| Effect::Mon { base: Box::new(base), layer })
    }

    /// Build an answer-type stack from layers listed bottom to top.
    pub fn del_stack(layers: impl IntoIterator<Item = CType>) -> Effect {
        layers
            .into_iter()
            .fold(Effect::Pure, |base, top| Effect::Del { base: Box::new(base), top: Box::new(top) })
    }

    /// Monad layers bottom to top, if this is a monad stack.
    pub fn mon_layers(&self) -> Option<Vec<Rc<MonadDef>>> {
        let mut out = Vec::new();
        let mut e = self;
        loop {
            match e {
                Effect::Pure => break,
                Effect::Mon { base, layer } => {
                    out.push(layer.clone());
                    e = base;
                }
                _ => return None,
            }
        }
        out.reverse();
        Some(out)
    }

    /// Answer types bottom to top, if this is an answer-type stack.
    pub fn del_layers(&self) -> Option<Vec<CType>> {
        let mut out = Vec::new();
        let mut e = self;
        loop {
            match e {
                Effect::Pure => break,
                Effect::Del { base, top } => {
                    out.push((**top).clone());
                    e = base;
                }
                _ => return None,
            }
        }
        out.reverse();
        Some(out)
    }

    pub fn has_unknowns(&self) -> bool {
        match self {
            Effect::Pure => false,
            Effect::Meta(_) => true,
            Effect::Ops(m) => m.values().any(|s| s.param.has_unknowns() || s.result.has_unknowns()),
            Effect::Mon { base, layer } => base.has_unknowns() || layer.carrier.has_unknowns(),
            Effect::Del { base, top } => base.has_unknowns() || top.has_unknowns(),
        }
    }

    pub fn subst_tyvar(&self, name: &str, by: &VType) -> Effect {
        self.map_vtypes(&|t| t.subst_tyvar(name, by))
    }

    /// Apply `f` to each maximal value type. Monad layers are closed and kept.
    pub fn map_vtypes(&self, f: &dyn Fn(&VType) -> VType) -> Effect {
        match self {
            Effect::Pure | Effect::Meta(_) => self.clone(),
            Effect::Ops(m) => Effect::Ops(
                m.iter()
                    .map(|(o, s)| (o.clone(), OpSig { param: f(&s.param), result: f(&s.result) }))
                    .collect(),
            ),
            Effect::Mon { base, layer } => Effect::Mon { base: Box::new(base.map_vtypes(f)), layer: layer.clone() },
            Effect::Del { base, top } => {
                Effect::Del { base: Box::new(base.map_vtypes(f)), top: Box::new(top.map_vtypes(f)) }
            }
        }
    }

    pub fn collect_tyvars(&self, out: &mut BTreeSet<String>) {
        match self {
            Effect::Pure | Effect::Meta(_) => {}
            Effect::Mon { base, .. } => base.collect_tyvars(out),
            Effect::Ops(m) => m.values().for_each(|s| {
                s.param.collect_tyvars(out);
                s.result.collect_tyvars(out);
            }),
            Effect::Del { base, top } => {
                base.collect_tyvars(out);
                top.collect_tyvars(out);
            }
        }
    }

    pub fn foreign_construct(&self, calc: Calculus) -> Option<Construct> {
        match self {
            Effect::Pure | Effect::Meta(_) => None,
            Effect::Ops(m) => {
                if calc != Calculus::Eff {
                    return Some(Construct::Op);
                }
                m.values()
                    .find_map(|s| s.param.foreign_construct(calc).or_else(|| s.result.foreign_construct(calc)))
            }
            Effect::Mon { base, layer } => {
                if calc != Calculus::Mon {
                    return Some(Construct::Reify);
                }
                base.foreign_construct(calc).or_else(|| layer.carrier.foreign_construct(calc))
            }
            Effect::Del { base, top } => {
                if calc != Calculus::Del {
                    return Some(Construct::Shift0);
                }
                base.foreign_construct(calc).or_else(|| top.foreign_construct(calc))
            }
        }
    }
}

/// Structural equality; monad layers compare up to α-equivalence.
pub fn effect_eq(a: &Effect, b: &Effect) -> bool {
    a == b
}

impl HandlerType {
    pub fn has_unknowns(&self) -> bool {
        self.input.has_unknowns()
            || self.in_effect.has_unknowns()
            || self.output.has_unknowns()
            || self.out_effect.has_unknowns()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground() {
        assert!(VType::bit().is_ground());
        assert!(VType::prod(VType::bit(), VType::Unit).is_ground());
        assert!(!VType::thunk(Effect::Pure, CType::f(VType::Unit)).is_ground());
        assert!(!VType::Var("a".into()).is_ground());
    }

    #[test]
    fn empty_stacks_are_pure() {
        assert_eq!(Effect::ops(BTreeMap::new()), Effect::Pure);
        assert_eq!(Effect::mon_stack(vec![]), Effect::Pure);
        assert_eq!(Effect::del_stack(vec![]), Effect::Pure);
    }

    #[test]
    fn del_layers_order() {
        let e = Effect::del_stack(vec![CType::f(VType::Unit), CType::f(VType::bit())]);
        assert_eq!(e.del_layers().unwrap(), vec![CType::f(VType::Unit), CType::f(VType::bit())]);
        match e {
            Effect::Del { top, .. } => assert_eq!(*top, CType::f(VType::bit())),
            _ => unreachable!(),
        }
    }
}
