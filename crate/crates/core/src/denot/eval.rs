//! The interpreter: a typing derivation and an environment of elements give
//! an element of the carrier of the derivation's conclusion.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use super::sets::{den_vtype, Assignment, FinSet};
use super::{Closure, DenotError, Elem};
use crate::ast::{at_path, Comp, MonadDef, Side, Value};
use crate::typesys::types::{CType, Effect, VType};
use crate::typesys::{check_monad, CompInfo, Derivation, MonadDerivation};

type R<T> = Result<T, DenotError>;
type Cont = Rc<dyn Fn(&Elem) -> R<Elem>>;

/// Unit and bind derivations of a layer over a base.
pub struct LayerDerivation {
    pub beta: String,
    pub unit: Rc<Derivation>,
    pub bind: Rc<Derivation>,
}

/// Caches layer derivations between evaluations.
#[derive(Default)]
pub struct Interp {
    monads: RefCell<Vec<(Rc<MonadDef>, Effect, Rc<LayerDerivation>)>>,
}

impl Interp {
    pub fn new() -> Rc<Interp> {
        Rc::new(Interp::default())
    }

    pub fn monad(&self, m: &Rc<MonadDef>, base: &Effect) -> R<Rc<LayerDerivation>> {
        if let Some((_, _, d)) = self.monads.borrow().iter().find(|(n, b, _)| n == m && b == base) {
            return Ok(d.clone());
        }
        let MonadDerivation { beta, unit, bind } = check_monad(m, base)?;
        let d = Rc::new(LayerDerivation { beta, unit: Rc::new(unit), bind: Rc::new(bind) });
        self.monads.borrow_mut().push((m.clone(), base.clone(), d.clone()));
        Ok(d)
    }
}

/// The set denoted by `t`, or an unenumerable marker.
fn set_or_unknown(theta: Assignment, var: &str, t: &VType, outer: &Assignment) -> R<Assignment> {
    match den_vtype(t, outer) {
        Ok(s) => Ok(theta.with(var, s)),
        Err(DenotError::Infinite(_) | DenotError::TooLarge(_)) => Ok(theta.with_unenumerable(var)),
        Err(e) => Err(e),
    }
}

/// `unit` of the monad for `e` at the value type `a`.
pub fn unit(ip: &Rc<Interp>, e: &Effect, a: &VType, theta: &Assignment, x: Elem) -> R<Elem> {
    match e {
        Effect::Pure => Ok(x),
        Effect::Ops(_) => Ok(Elem::leaf(x)),
        Effect::Mon { base, layer } => {
            let md = ip.monad(layer, base)?;
            let th = set_or_unknown(Assignment::new(), &layer.tyvar, a, theta)?;
            Ctx::new(ip, &md.unit, th).eval(&[x])
        }
        Effect::Del { .. } => Err(unsupported()),
        Effect::Meta(_) => Err(DenotError::Ill("effect is not fully known".into())),
    }
}

/// `bind` of the monad for `e`, from `a` to `b`.
pub fn bind(ip: &Rc<Interp>, e: &Effect, a: &VType, b: &VType, theta: &Assignment, t: Elem, f: Cont) -> R<Elem> {
    match e {
        Effect::Pure => f(&t),
        Effect::Ops(_) => graft(&t, &*f),
        Effect::Mon { base, layer } => {
            let md = ip.monad(layer, base)?;
            let th = set_or_unknown(Assignment::new(), &layer.tyvar, a, theta)?;
            let th = set_or_unknown(th, &md.beta, b, theta)?;
            let table = tabulate(&th.get(&layer.tyvar), f)?;
            Ctx::new(ip, &md.bind, th).eval(&[t, table])
        }
        Effect::Del { .. } => Err(unsupported()),
        Effect::Meta(_) => Err(DenotError::Ill("effect is not fully known".into())),
    }
}

fn unsupported() -> DenotError {
    DenotError::Unsupported("delimited-control effects have no direct denotation".into())
}

/// Replace every leaf `x` of a tree by `f(x)`.
fn graft(t: &Elem, f: &dyn Fn(&Elem) -> R<Elem>) -> R<Elem> {
    match t {
        Elem::Leaf(x) => f(x),
        Elem::Node { op, param, children } => Ok(Elem::Node {
            op: op.clone(),
            param: param.clone(),
            children: children.iter().map(|(k, c)| Ok((k.clone(), graft(c, f)?))).collect::<R<Vec<_>>>()?.into(),
        }),
        e => Err(DenotError::Ill(format!("{e} is not an operation tree"))),
    }
}

/// A function element: a table when the domain is enumerable.
fn tabulate(dom: &R<FinSet>, f: Cont) -> R<Elem> {
    match dom {
        Ok(d) => Ok(Elem::table(d.iter().map(|x| Ok((x.clone(), f(x)?))).collect::<R<_>>()?)),
        Err(_) => Ok(Elem::Closure(Closure(Rc::new(move |x: &Elem| f(x))))),
    }
}

/// Lift `f : ⟦a⟧ → ⟦c⟧` along the computation `t : T_E ⟦a⟧`, following the
/// algebra structure of `c`.
#[allow(clippy::too_many_arguments)]
pub fn extend(ip: &Rc<Interp>, c: &CType, e: &Effect, a: &VType, theta: &Rc<Assignment>, t: Elem, f: Cont) -> R<Elem> {
    match c {
        CType::Returner(b) => bind(ip, e, a, b, theta, t, f),
        CType::Fun(dom, r) => {
            let (ip2, r, e, a, theta2) = (ip.clone(), (**r).clone(), e.clone(), a.clone(), theta.clone());
            let g: Cont = Rc::new(move |x: &Elem| {
                let (f, x) = (f.clone(), x.clone());
                extend(&ip2, &r, &e, &a, &theta2, t.clone(), Rc::new(move |y: &Elem| f(y)?.apply(&x)))
            });
            tabulate(&den_vtype(dom, theta), g)
        }
        CType::Prod(c1, c2) => {
            let f1 = f.clone();
            let l = extend(ip, c1, e, a, theta, t.clone(), Rc::new(move |y: &Elem| Ok(f1(y)?.split()?.0.clone())))?;
            let r = extend(ip, c2, e, a, theta, t, Rc::new(move |y: &Elem| Ok(f(y)?.split()?.1.clone())))?;
            Ok(Elem::pair(l, r))
        }
        CType::Hole | CType::Meta(_) => Err(DenotError::Ill("type is not fully known".into())),
    }
}

/// Evaluation of one derivation under one type assignment.
#[derive(Clone)]
pub struct Ctx {
    ip: Rc<Interp>,
    d: Rc<Derivation>,
    theta: Rc<Assignment>,
    /// Function domains already enumerated, by path.
    domains: Rc<RefCell<HashMap<Vec<usize>, R<FinSet>>>>,
}

impl Ctx {
    pub fn new(ip: &Rc<Interp>, d: &Rc<Derivation>, theta: Assignment) -> Ctx {
        Ctx { ip: ip.clone(), d: d.clone(), theta: Rc::new(theta), domains: Rc::default() }
    }

    /// The subterm a closure resumes at.
    fn resume(&self, path: &[usize], env: &[Elem]) -> R<Elem> {
        let c = at_path(&self.d.term, path).ok_or_else(|| DenotError::Ill(format!("no subterm at {path:?}")))?;
        self.comp(c, &mut path.to_vec(), env)
    }

    pub fn eval(&self, env: &[Elem]) -> R<Elem> {
        self.comp(&self.d.term, &mut Vec::new(), env)
    }

    fn info(&self, path: &[usize]) -> R<&CompInfo> {
        self.d.info.get(path).ok_or_else(|| DenotError::Ill(format!("no typing information at {path:?}")))
    }

    fn under<T>(path: &mut Vec<usize>, i: usize, f: impl FnOnce(&mut Vec<usize>) -> T) -> T {
        path.push(i);
        let r = f(path);
        path.pop();
        r
    }

    fn lookup(env: &[Elem], i: usize) -> R<Elem> {
        env.len()
            .checked_sub(i + 1)
            .map(|j| env[j].clone())
            .ok_or_else(|| DenotError::Ill(format!("unbound variable #{i}")))
    }

    fn value(&self, v: &Value, path: &mut Vec<usize>, env: &[Elem], k: &mut usize) -> R<Elem> {
        Ok(match v {
            Value::Var(i) => Self::lookup(env, *i)?,
            Value::Unit => Elem::Unit,
            Value::Pair(a, b) => {
                let a = self.value(a, path, env, k)?;
                Elem::pair(a, self.value(b, path, env, k)?)
            }
            Value::Inj { label, payload, .. } => Elem::tag(label, self.value(payload, path, env, k)?),
            Value::Thunk { body, .. } => {
                let i = *k;
                *k += 1;
                Self::under(path, i, |p| self.comp(body, p, env))?
            }
        })
    }

    fn with(env: &[Elem], extra: impl IntoIterator<Item = Elem>) -> Vec<Elem> {
        let mut e = env.to_vec();
        e.extend(extra);
        e
    }

    fn comp(&self, c: &Comp, path: &mut Vec<usize>, env: &[Elem]) -> R<Elem> {
        match c {
            Comp::Return(v) => {
                let x = self.value(v, path, env, &mut 0)?;
                let info = self.info(path)?;
                let a = info.ctype.as_returner().ok_or_else(|| DenotError::Ill("return without a returner type".into()))?;
                unit(&self.ip, &info.effect, a, &self.theta, x)
            }
            Comp::Force(v) => self.value(v, path, env, &mut 0),
            Comp::Let { bound, .. } => {
                let t = Self::under(path, 0, |p| self.comp(bound, p, env))?;
                let a = Self::under(path, 0, |p| -> R<VType> {
                    let i = self.info(p)?;
                    i.ctype.as_returner().cloned().ok_or_else(|| DenotError::Ill("let of a non-returner".into()))
                })?;
                let info = self.info(path)?.clone();
                let (me, env2, mut p2) = (self.clone(), env.to_vec(), path.clone());
                p2.push(1);
                let f: Cont = Rc::new(move |x: &Elem| me.resume(&p2, &Self::with(&env2, [x.clone()])));
                extend(&self.ip, &info.ctype, &info.effect, &a, &self.theta, t, f)
            }
            Comp::Lam { .. } => {
                let cached = self.domains.borrow().get(path.as_slice()).cloned();
                let dom = match cached {
                    Some(d) => d,
                    None => {
                        let d = match &self.info(path)?.ctype {
                            CType::Fun(a, _) => den_vtype(a, &self.theta),
                            _ => return Err(DenotError::Ill("function without a function type".into())),
                        };
                        self.domains.borrow_mut().insert(path.clone(), d.clone());
                        d
                    }
                };
                let (me, env2, mut p2) = (self.clone(), env.to_vec(), path.clone());
                p2.push(0);
                tabulate(&dom, Rc::new(move |x: &Elem| me.resume(&p2, &Self::with(&env2, [x.clone()]))))
            }
            Comp::App(m, v) => {
                let x = self.value(v, path, env, &mut 1)?;
                Self::under(path, 0, |p| self.comp(m, p, env))?.apply(&x)
            }
            Comp::CPair(a, b) => {
                let a = Self::under(path, 0, |p| self.comp(a, p, env))?;
                Ok(Elem::pair(a, Self::under(path, 1, |p| self.comp(b, p, env))?))
            }
            Comp::Prj(side, m) => {
                let pr = Self::under(path, 0, |p| self.comp(m, p, env))?;
                let (l, r) = pr.split()?;
                Ok(if *side == Side::Left { l.clone() } else { r.clone() })
            }
            Comp::Split { scrutinee, body, .. } => {
                let mut k = 0;
                let v = self.value(scrutinee, path, env, &mut k)?;
                let (a, b) = v.split()?;
                let env2 = Self::with(env, [a.clone(), b.clone()]);
                Self::under(path, k, |p| self.comp(body, p, &env2))
            }
            Comp::Case { scrutinee, arms, .. } => {
                let mut k = 0;
                match self.value(scrutinee, path, env, &mut k)? {
                    Elem::Tag(l, payload) => {
                        let i = arms.keys().position(|a| *a == l).ok_or_else(|| DenotError::Ill(format!("no arm for {l}")))?;
                        let env2 = Self::with(env, [(*payload).clone()]);
                        Self::under(path, k + i, |p| self.comp(&arms[&l].body, p, &env2))
                    }
                    e => Err(DenotError::Ill(format!("case on {e}"))),
                }
            }
            Comp::Op { op, arg } => {
                let param = self.value(arg, path, env, &mut 0)?;
                let info = self.info(path)?;
                let sig = match &info.effect {
                    Effect::Ops(m) => m.get(op).ok_or_else(|| DenotError::Ill(format!("`{op}` not in the effect")))?,
                    _ => return Err(DenotError::Ill(format!("`{op}` outside an operation effect"))),
                };
                let arity = den_vtype(&sig.result, &self.theta)?;
                let children = arity.iter().map(|r| (r.clone(), Elem::leaf(r.clone()))).collect::<Vec<_>>().into();
                Ok(Elem::Node { op: op.clone(), param: Rc::new(param), children })
            }
            Comp::Handle { body, handler } => {
                let tree = Self::under(path, 0, |p| self.comp(body, p, env))?;
                self.fold(&tree, handler, path, env)
            }
            Comp::Reflect(m) | Comp::Reify { body: m, .. } => Self::under(path, 0, |p| self.comp(m, p, env)),
            Comp::Shift0 { .. } | Comp::Dollar { .. } => Err(unsupported()),
        }
    }

    fn fold(&self, t: &Elem, h: &crate::ast::Handler, path: &mut Vec<usize>, env: &[Elem]) -> R<Elem> {
        match t {
            Elem::Leaf(x) => Self::under(path, 1, |p| self.comp(&h.ret, p, &Self::with(env, [(**x).clone()]))),
            Elem::Node { op, param, children } => {
                let i = h.ops.keys().position(|o| o == op).ok_or_else(|| DenotError::Ill(format!("unhandled `{op}`")))?;
                let k = Elem::table(children.iter().map(|(r, c)| Ok((r.clone(), self.fold(c, h, path, env)?))).collect::<R<_>>()?);
                let env2 = Self::with(env, [(**param).clone(), k]);
                Self::under(path, 2 + i, |p| self.comp(&h.ops[op].body, p, &env2))
            }
            e => Err(DenotError::Ill(format!("{e} is not an operation tree"))),
        }
    }
}
