//! The translation clauses. Core constructs are mapped homomorphically; new
//! binders introduced by a clause are accounted for by shifting the already
//! translated subterms placed under them.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use super::types::{cont_monad, translate_ctype_del_to_mon, translate_effect_del_to_mon, translate_vtype_del_to_mon};
use super::{TranslationId, Variant, XlateError};
use crate::ast::{
    app, check_tag, dollar, force, inj, lam, let_, pair, reflect, reify, reindex, ret, shift, shift0, shift_value,
    split, thunk, var, Arm, Calculus, Comp, Handler, MonadDef, Name, OpClause, Value,
};
use crate::typesys::types::{CType, Effect, VType};
use crate::typesys::{CompInfo, Derivation};

type R<T> = Result<T, XlateError>;

/// Label of the return case in the free-monad encoding.
const RET: &str = "ret";

/// Translate a source term. Annotations are translated when the target can
/// express them and dropped otherwise; reset layers in DEL->MON get an open
/// carrier. Use [`translate_derivation`] for a typed result.
pub fn translate(t: &Comp, id: TranslationId) -> R<Comp> {
    TranslationId::new(id.source, id.target, id.variant)?;
    check_tag(t, id.source).map_err(|e| XlateError::Source(e.to_string()))?;
    Tr { id, info: None, path: Vec::new() }.comp(t)
}

/// Translate the elaborated term of a derivation. For DEL->MON every reset's
/// continuation monad gets its carrier from the reset's judgement.
pub fn translate_derivation(d: &Derivation, id: TranslationId) -> R<Comp> {
    TranslationId::new(id.source, id.target, id.variant)?;
    check_tag(&d.term, id.source).map_err(|e| XlateError::Source(e.to_string()))?;
    Tr { id, info: Some(&d.info), path: Vec::new() }.comp(&d.term)
}

struct Tr<'a> {
    id: TranslationId,
    info: Option<&'a HashMap<Vec<usize>, CompInfo>>,
    path: Vec<usize>,
}

impl Tr<'_> {
    fn child(&mut self, c: &Comp, k: &mut usize) -> R<Comp> {
        self.path.push(*k);
        *k += 1;
        let out = self.comp(c);
        self.path.pop();
        out
    }

    fn del_to_mon(&self) -> bool {
        self.id.source == Calculus::Del && self.id.target == Calculus::Mon
    }

    fn vtype(&self, t: &VType) -> Option<VType> {
        if self.del_to_mon() {
            Some(translate_vtype_del_to_mon(t))
        } else if t.foreign_construct(self.id.target).is_none() {
            Some(t.clone())
        } else {
            None
        }
    }

    fn ctype(&self, c: &CType) -> Option<CType> {
        if self.del_to_mon() {
            Some(translate_ctype_del_to_mon(c))
        } else if c.foreign_construct(self.id.target).is_none() {
            Some(c.clone())
        } else {
            None
        }
    }

    fn effect(&self, e: &Effect) -> Option<Effect> {
        if self.del_to_mon() {
            Some(translate_effect_del_to_mon(e))
        } else if e.foreign_construct(self.id.target).is_none() {
            Some(e.clone())
        } else {
            None
        }
    }

    fn value(&mut self, v: &Value, k: &mut usize) -> R<Value> {
        Ok(match v {
            Value::Var(i) => Value::Var(*i),
            Value::Unit => Value::Unit,
            Value::Pair(a, b) => {
                let a = self.value(a, k)?;
                Value::Pair(Box::new(a), Box::new(self.value(b, k)?))
            }
            Value::Inj { label, ty, payload } => Value::Inj {
                label: label.clone(),
                ty: ty.as_ref().and_then(|t| self.vtype(t)),
                payload: Box::new(self.value(payload, k)?),
            },
            Value::Thunk { effect, body } => Value::Thunk {
                effect: effect.as_ref().and_then(|e| self.effect(e)),
                body: Box::new(self.child(body, k)?),
            },
        })
    }

    fn comp(&mut self, c: &Comp) -> R<Comp> {
        use Comp::*;
        let mut k = 0;
        let k = &mut k;
        Ok(match c {
            Return(v) => Return(self.value(v, k)?),
            Force(v) => Force(self.value(v, k)?),
            Let { bound, name, body } => {
                let bound = self.child(bound, k)?;
                Let { bound: Box::new(bound), name: name.clone(), body: Box::new(self.child(body, k)?) }
            }
            Lam { name, body } => Lam { name: name.clone(), body: Box::new(self.child(body, k)?) },
            App(m, v) => {
                let m = self.child(m, k)?;
                App(Box::new(m), self.value(v, k)?)
            }
            CPair(a, b) => {
                let a = self.child(a, k)?;
                CPair(Box::new(a), Box::new(self.child(b, k)?))
            }
            Prj(s, m) => Prj(*s, Box::new(self.child(m, k)?)),
            Split { scrutinee, names, body } => {
                let scrutinee = self.value(scrutinee, k)?;
                Split { scrutinee, names: names.clone(), body: Box::new(self.child(body, k)?) }
            }
            Case { scrutinee, arms, ty } => {
                let scrutinee = self.value(scrutinee, k)?;
                let mut out = BTreeMap::new();
                for (l, a) in arms {
                    out.insert(l.clone(), Arm { name: a.name.clone(), body: self.child(&a.body, k)? });
                }
                Case { scrutinee, arms: out, ty: ty.as_ref().and_then(|t| self.ctype(t)) }
            }
            Op { op, arg } => {
                let arg = self.value(arg, k)?;
                self.op(op, arg)?
            }
            Handle { body, handler } => {
                let body = self.child(body, k)?;
                let ret = self.child(&handler.ret, k)?;
                let mut ops = BTreeMap::new();
                for (o, cl) in &handler.ops {
                    let body = self.child(&cl.body, k)?;
                    ops.insert(o.clone(), OpClause { param: cl.param.clone(), cont: cl.cont.clone(), body });
                }
                self.handle(body, Handler { ret_name: handler.ret_name.clone(), ret, ops })?
            }
            Reflect(m) => {
                let m = self.child(m, k)?;
                self.reflect(m)
            }
            Reify { monad, body } => {
                let body = self.child(body, k)?;
                // Monad bodies are closed and carry no judgements of their own.
                let mut sub = Tr { id: self.id, info: None, path: Vec::new() };
                let unit = sub.comp(&monad.unit)?;
                let bind = sub.comp(&monad.bind)?;
                self.reify(monad, unit, bind, body)
            }
            Shift0 { name, body } => {
                let body = self.child(body, k)?;
                self.shift0(name, body)
            }
            Dollar { body, name, cont } => {
                let judgement = self.info.and_then(|i| i.get(&self.path)).cloned();
                let body = self.child(body, k)?;
                let cont = self.child(cont, k)?;
                self.reset(body, name, cont, judgement)
            }
        })
    }

    // ------------------------------------------------------------ λeff sources

    fn op(&self, o: &str, v: Value) -> R<Comp> {
        let (t, var_) = (self.id.target, self.id.variant);
        if var_ == Variant::FreeMonad && o == RET {
            return Err(XlateError::ReservedLabel(o.into()));
        }
        Ok(match (t, var_) {
            (Calculus::Del, Variant::Default) => shift0("k", lam("h", dispatch_call(o, v))),
            (Calculus::Del, Variant::Nested) => shift0("k", shift0("h", nested_call(o, v))),
            (Calculus::Mon, Variant::Default) => reflect(lam("k", lam("h", dispatch_call(o, v)))),
            // reflect (return inj op <V, thunk fun x -> return inj ret x>): the
            // continuation is the layer's unit, a leaf.
            (Calculus::Mon, Variant::FreeMonad) => reflect(ret(inj(o, pair(v, thunk(lam("x", ret(inj(RET, var(0))))))))),
            _ => unreachable!("validated translation id"),
        })
    }

    fn handle(&self, body: Comp, h: Handler) -> R<Comp> {
        let (t, var_) = (self.id.target, self.id.variant);
        if var_ == Variant::FreeMonad && h.ops.contains_key(RET) {
            return Err(XlateError::ReservedLabel(RET.into()));
        }
        // The return clause under one extra binder (`h`) after its own.
        let ret_h = shift(&h.ret, 1, 0);
        Ok(match (t, var_) {
            // (reset M as x in fun h -> Nret) (thunk fun y -> case y of {...})
            (Calculus::Del, Variant::Default) => {
                app(dollar(body, h.ret_name.as_str(), lam("h", ret_h)), thunk(lam("y", dispatcher(&h))))
            }
            // reset (reset M as x in shift0 h. Nret) as y in case y of {...}
            (Calculus::Del, Variant::Nested) => {
                dollar(dollar(body, h.ret_name.as_str(), shift0("h", ret_h)), "y", dispatcher(&h))
            }
            // reify[Cont] M (thunk fun x -> fun h -> Nret) (thunk fun y -> case y of {...})
            (Calculus::Mon, Variant::Default) => app(
                app(reify(cont_monad(&Effect::Pure, None), body), thunk(lam(h.ret_name.as_str(), lam("h", ret_h)))),
                thunk(lam("y", dispatcher(&h))),
            ),
            // let r <- reify[free] M in H* r
            (Calculus::Mon, Variant::FreeMonad) => {
                let ops: Vec<String> = h.ops.keys().cloned().collect();
                let interp = shift(&fix(free_interpreter(&h)), 1, 0);
                let_("r", reify(free_monad(&ops), body), app(interp, var(0)))
            }
            _ => unreachable!("validated translation id"),
        })
    }

    // ------------------------------------------------------------ λmon sources

    fn reflect(&self, m: Comp) -> Comp {
        let m2 = thunk(shift(&m, 2, 0));
        match (self.id.target, self.id.variant) {
            // shift0 k. fun b -> force b <thunk M, thunk fun x -> force k x b>
            (Calculus::Del, Variant::Default) => shift0(
                "k",
                lam("b", app(force(var(0)), pair(m2, thunk(lam("x", app(app(force(var(2)), var(0)), var(1))))))),
            ),
            // shift0 k. shift0 b. force b <thunk M, thunk fun x -> reset force k x as z in force b z>
            (Calculus::Del, Variant::Nested) => shift0("k", shift0("b", app(force(var(0)), pair(m2, nested_resume("z"))))),
            (Calculus::Eff, _) => crate::ast::op("reflect", thunk(m)),
            _ => unreachable!("validated translation id"),
        }
    }

    fn reify(&self, monad: &MonadDef, unit: Comp, bind: Comp, body: Comp) -> Comp {
        let x = monad.unit_name.as_str();
        let (y, f) = (monad.bind_names.0.as_str(), monad.bind_names.1.as_str());
        // fun <y, f> -> Nb, with the pair binder below y and f.
        let bind_fn = |bind: &Comp| split(var(0), y, f, shift(bind, 1, 2));
        match (self.id.target, self.id.variant) {
            // (reset M as x in fun b -> Nu) (thunk fun <y, f> -> Nb)
            (Calculus::Del, Variant::Default) => {
                app(dollar(body, x, lam("b", shift(&unit, 1, 0))), thunk(lam("p", bind_fn(&bind))))
            }
            // reset (reset M as x in shift0 b. Nu) as <y, f> in Nb
            (Calculus::Del, Variant::Nested) => {
                dollar(dollar(body, x, shift0("b", shift(&unit, 1, 0))), "p", bind_fn(&bind))
            }
            // handle M with { return x -> Nu | reflect(y; f) -> Nb }
            (Calculus::Eff, _) => {
                let mut ops = BTreeMap::new();
                ops.insert("reflect".to_string(), OpClause { param: Name::new(y), cont: Name::new(f), body: bind });
                crate::ast::handle(body, Handler { ret_name: Name::new(x), ret: unit, ops })
            }
            _ => unreachable!("validated translation id"),
        }
    }

    // ------------------------------------------------------------ λdel sources

    fn shift0(&self, name: &Name, body: Comp) -> Comp {
        let f = Comp::Lam { name: name.clone(), body: Box::new(body) };
        match self.id.target {
            Calculus::Mon => reflect(f),
            Calculus::Eff => crate::ast::op("shift0", thunk(f)),
            _ => unreachable!("validated translation id"),
        }
    }

    fn reset(&self, body: Comp, name: &Name, cont: Comp, judgement: Option<CompInfo>) -> Comp {
        let k = Comp::Lam { name: name.clone(), body: Box::new(cont.clone()) };
        match self.id.target {
            // reify[Cont] M (thunk fun x -> N)
            Calculus::Mon => {
                let layer = match judgement {
                    Some(j) => {
                        cont_monad(&translate_effect_del_to_mon(&j.effect), Some(&translate_ctype_del_to_mon(&j.ctype)))
                    }
                    None => cont_monad(&Effect::Pure, None),
                };
                app(reify(layer, body), thunk(k))
            }
            // handle M with { return x -> N | shift0(y; f) -> force y f }
            Calculus::Eff => {
                let mut ops = BTreeMap::new();
                let clause = app(force(var(1)), var(0));
                ops.insert("shift0".to_string(), OpClause { param: Name::new("y"), cont: Name::new("f"), body: clause });
                crate::ast::handle(body, Handler { ret_name: name.clone(), ret: cont, ops })
            }
            _ => unreachable!("validated translation id"),
        }
    }
}

/// `force h (inj op <V, thunk fun y -> force k y h>)` under binders `k`, `h`.
fn dispatch_call(o: &str, v: Value) -> Comp {
    let resume = thunk(lam("y", app(app(force(var(2)), var(0)), var(1))));
    app(force(var(0)), inj(o, pair(shift_value(&v, 2, 0), resume)))
}

/// `force h (inj op <V, thunk fun x -> reset force k x as y in force h y>)` under `k`, `h`.
fn nested_call(o: &str, v: Value) -> Comp {
    app(force(var(0)), inj(o, pair(shift_value(&v, 2, 0), nested_resume("y"))))
}

/// `thunk fun x -> reset force k x as z in force b z` under `k`, `b`.
fn nested_resume(z: &str) -> Value {
    thunk(lam("x", dollar(app(force(var(2)), var(0)), z, app(force(var(2)), var(0)))))
}

/// `case y of { op <p, k> -> N | ... }` under a binder `y`; each clause body
/// gets the arm binder and `y` inserted below its own two binders.
fn dispatcher(h: &Handler) -> Comp {
    let arms = h
        .ops
        .iter()
        .map(|(o, cl)| {
            let body = split(var(0), cl.param.as_str(), cl.cont.as_str(), shift(&cl.body, 2, 2));
            (o.clone(), Arm { name: Name::new("q"), body })
        })
        .collect();
    Comp::Case { scrutinee: var(0), arms, ty: None }
}

/// A recursive computation: `body` refers to itself as the thunk at index 0.
/// Built from self-application, `(fun x -> F (thunk force x x)) (thunk ...)`.
pub(super) fn fix(body: Comp) -> Comp {
    let f = thunk(lam("self", shift(&body, 1, 1)));
    let w = thunk(lam("w", app(force(f), thunk(app(force(var(0)), var(0))))));
    app(force(w.clone()), w)
}

/// The free-monad layer over the given operations: trees with `ret` leaves.
fn free_monad(ops: &[String]) -> Rc<MonadDef> {
    let unit = ret(inj(RET, var(0)));
    // fun m -> fun f -> let v <- force m in case v of { ret x -> force f x | op <p, k> -> ... }
    let mut arms = BTreeMap::new();
    arms.insert(RET.to_string(), Arm { name: Name::new("x"), body: app(force(var(2)), var(0)) });
    for o in ops {
        // return inj op <p, thunk fun x -> self (thunk force k x) f>
        let again = lam("x", app(app(force(var(7)), thunk(app(force(var(1)), var(0)))), var(5)));
        let body = split(var(0), "p", "k", ret(inj(o, pair(var(1), thunk(again)))));
        arms.insert(o.clone(), Arm { name: Name::new("q"), body });
    }
    let case = Comp::Case { scrutinee: var(0), arms, ty: None };
    let bind_rec = lam("m", lam("f", let_("v", force(var(1)), case)));
    let bind = app(app(fix(bind_rec), var(1)), var(0));
    Rc::new(MonadDef {
        tyvar: "a".into(),
        carrier: CType::Hole,
        unit_name: Name::new("x"),
        unit,
        bind_names: (Name::new("m"), Name::new("f")),
        bind,
    })
}

/// The recursive interpreter of a tree by a handler, in the handler's
/// scope extended with itself at index 0.
fn free_interpreter(h: &Handler) -> Comp {
    let mut arms = BTreeMap::new();
    arms.insert(RET.to_string(), Arm { name: h.ret_name.clone(), body: shift(&h.ret, 2, 1) });
    for (o, cl) in &h.ops {
        // let k' <- return thunk fun x -> (let t <- force k x in self t) in N
        let resume = thunk(lam("x", let_("t", app(force(var(1)), var(0)), app(force(var(6)), var(0)))));
        let n = reindex(&cl.body, &|i| match i {
            0 => 0,
            1 => 2,
            j => j + 4,
        });
        let body = split(var(0), cl.param.as_str(), "k", let_(cl.cont.as_str(), ret(resume), n));
        arms.insert(o.clone(), Arm { name: Name::new("q"), body });
    }
    lam("y", Comp::Case { scrutinee: var(0), arms, ty: None })
}
