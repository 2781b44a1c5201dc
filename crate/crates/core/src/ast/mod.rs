//! Terms of the core calculus and its three extensions.
//!
//! Variables are de Bruijn indices. Binder names are kept only as hints for
//! printing; they never take part in equality, so `==` on terms is
//! α-equivalence.

mod scope;
mod subst;

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use crate::typesys::types::{CType, Effect, VType};

pub use scope::{scope_check, scope_check_monad, scope_check_value, ScopeError};
pub use subst::{
    instantiate, instantiate_value, reindex, reindex_value, shift, shift_value, subst_many, subst_many_value,
    subst_value_in, subst_value_in_value,
};

pub type Label = String;
pub type OpName = String;

/// A binder name hint. All hints compare equal.
#[derive(Clone, Default)]
pub struct Name(pub String);

impl Name {
    pub fn new(s: impl Into<String>) -> Name {
        Name(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl PartialEq for Name {
    fn eq(&self, _: &Name) -> bool {
        true
    }
}
impl Eq for Name {}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name(s.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Calculus {
    Mam,
    Eff,
    Mon,
    Del,
}

impl Calculus {
    pub const ALL: [Calculus; 4] = [Calculus::Mam, Calculus::Eff, Calculus::Mon, Calculus::Del];

    pub fn extension(self) -> &'static str {
        match self {
            Calculus::Mam => "mam",
            Calculus::Eff => "eff",
            Calculus::Mon => "mon",
            Calculus::Del => "del",
        }
    }

    pub fn from_extension(ext: &str) -> Option<Calculus> {
        match ext.to_ascii_lowercase().as_str() {
            "mam" => Some(Calculus::Mam),
            "eff" => Some(Calculus::Eff),
            "mon" => Some(Calculus::Mon),
            "del" => Some(Calculus::Del),
            _ => None,
        }
    }
}

impl fmt::Display for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Calculus::Mam => "MAM",
            Calculus::Eff => "EFF",
            Calculus::Mon => "MON",
            Calculus::Del => "DEL",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Calculus {
    type Err = String;
    fn from_str(s: &str) -> Result<Calculus, String> {
        Calculus::from_extension(s).ok_or_else(|| format!("unknown calculus `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Var(usize),
    Unit,
    Pair(Box<Value>, Box<Value>),
    /// `ty` is the full variant type when annotated.
    Inj { label: Label, ty: Option<VType>, payload: Box<Value> },
    /// `effect` is the thunk's effect when annotated.
    Thunk { effect: Option<Effect>, body: Box<Comp> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn index(self) -> u8 {
        match self {
            Side::Left => 1,
            Side::Right => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arm {
    pub name: Name,
    pub body: Comp,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Comp {
    Return(Value),
    Let { bound: Box<Comp>, name: Name, body: Box<Comp> },
    Force(Value),
    Lam { name: Name, body: Box<Comp> },
    App(Box<Comp>, Value),
    CPair(Box<Comp>, Box<Comp>),
    Prj(Side, Box<Comp>),
    /// Binds `names.0` (outer, index 1) and `names.1` (inner, index 0).
    Split { scrutinee: Value, names: (Name, Name), body: Box<Comp> },
    /// `ty` annotates the result type; required when `arms` is empty.
    Case { scrutinee: Value, arms: BTreeMap<Label, Arm>, ty: Option<CType> },
    Op { op: OpName, arg: Value },
    Handle { body: Box<Comp>, handler: Box<Handler> },
    Reflect(Box<Comp>),
    Reify { monad: Rc<MonadDef>, body: Box<Comp> },
    Shift0 { name: Name, body: Box<Comp> },
    /// `reset body as name in cont`
    Dollar { body: Box<Comp>, name: Name, cont: Box<Comp> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpClause {
    /// Parameter binder (outer, index 1).
    pub param: Name,
    /// Continuation binder (inner, index 0).
    pub cont: Name,
    pub body: Comp,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Handler {
    pub ret_name: Name,
    pub ret: Comp,
    pub ops: BTreeMap<OpName, OpClause>,
}

/// `where tyvar. carrier { return x -> unit | y >>= f -> bind }`
#[derive(Clone, Debug)]
pub struct MonadDef {
    pub tyvar: String,
    pub carrier: CType,
    pub unit_name: Name,
    pub unit: Comp,
    /// `y` (outer, index 1) and `f` (inner, index 0).
    pub bind_names: (Name, Name),
    pub bind: Comp,
}

impl PartialEq for MonadDef {
    fn eq(&self, other: &MonadDef) -> bool {
        if std::ptr::eq(self, other) {
            return true;
        }
        if self.tyvar == other.tyvar {
            return self.carrier == other.carrier && self.unit == other.unit && self.bind == other.bind;
        }
        let fresh = fresh_tyvar(&[self, other]);
        let a = self.rename_tyvar(&fresh);
        let b = other.rename_tyvar(&fresh);
        a.carrier == b.carrier && a.unit == b.unit && a.bind == b.bind
    }
}
impl Eq for MonadDef {}

fn fresh_tyvar(defs: &[&MonadDef]) -> String {
    let mut used = std::collections::BTreeSet::new();
    for d in defs {
        used.insert(d.tyvar.clone());
        d.carrier.collect_tyvars(&mut used);
    }
    (0..).map(|i| format!("'t{i}")).find(|n| !used.contains(n)).unwrap()
}

impl MonadDef {
    /// Rename the bound type variable everywhere it occurs.
    pub fn rename_tyvar(&self, to: &str) -> MonadDef {
        let from = self.tyvar.as_str();
        let sub = |t: &VType| t.rename_tyvar(from, to);
        MonadDef {
            tyvar: to.to_string(),
            carrier: self.carrier.rename_tyvar(from, to),
            unit_name: self.unit_name.clone(),
            unit: map_types_comp(&self.unit, &sub),
            bind_names: self.bind_names.clone(),
            bind: map_types_comp(&self.bind, &sub),
        }
    }

    /// Carrier instantiated at `a`.
    pub fn carrier_at(&self, a: &VType) -> CType {
        self.carrier.subst_tyvar(&self.tyvar, a)
    }
}

/// Apply a value-type transformation to every type annotation in a term.
/// Embedded monad definitions are closed and left untouched.
pub fn map_types_comp(c: &Comp, f: &dyn Fn(&VType) -> VType) -> Comp {
    use Comp::*;
    let mc = |c: &Comp| Box::new(map_types_comp(c, f));
    match c {
        Return(v) => Return(map_types_value(v, f)),
        Let { bound, name, body } => Let { bound: mc(bound), name: name.clone(), body: mc(body) },
        Force(v) => Force(map_types_value(v, f)),
        Lam { name, body } => Lam { name: name.clone(), body: mc(body) },
        App(m, v) => App(mc(m), map_types_value(v, f)),
        CPair(a, b) => CPair(mc(a), mc(b)),
        Prj(s, m) => Prj(*s, mc(m)),
        Split { scrutinee, names, body } => {
            Split { scrutinee: map_types_value(scrutinee, f), names: names.clone(), body: mc(body) }
        }
        Case { scrutinee, arms, ty } => Case {
            scrutinee: map_types_value(scrutinee, f),
            arms: arms
                .iter()
                .map(|(l, a)| (l.clone(), Arm { name: a.name.clone(), body: map_types_comp(&a.body, f) }))
                .collect(),
            ty: ty.as_ref().map(|t| t.map_vtypes(f)),
        },
        Op { op, arg } => Op { op: op.clone(), arg: map_types_value(arg, f) },
        Handle { body, handler } => Handle {
            body: mc(body),
            handler: Box::new(Handler {
                ret_name: handler.ret_name.clone(),
                ret: map_types_comp(&handler.ret, f),
                ops: handler
                    .ops
                    .iter()
                    .map(|(o, cl)| {
                        (
                            o.clone(),
                            OpClause { param: cl.param.clone(), cont: cl.cont.clone(), body: map_types_comp(&cl.body, f) },
                        )
                    })
                    .collect(),
            }),
        },
        Reflect(m) => Reflect(mc(m)),
        Reify { monad, body } => Reify { monad: monad.clone(), body: mc(body) },
        Shift0 { name, body } => Shift0 { name: name.clone(), body: mc(body) },
        Dollar { body, name, cont } => Dollar { body: mc(body), name: name.clone(), cont: mc(cont) },
    }
}

pub fn map_types_value(v: &Value, f: &dyn Fn(&VType) -> VType) -> Value {
    match v {
        Value::Var(i) => Value::Var(*i),
        Value::Unit => Value::Unit,
        Value::Pair(a, b) => Value::Pair(Box::new(map_types_value(a, f)), Box::new(map_types_value(b, f))),
        Value::Inj { label, ty, payload } => Value::Inj {
            label: label.clone(),
            ty: ty.as_ref().map(f),
            payload: Box::new(map_types_value(payload, f)),
        },
        Value::Thunk { effect, body } => Value::Thunk {
            effect: effect.as_ref().map(|e| e.map_vtypes(f)),
            body: Box::new(map_types_comp(body, f)),
        },
    }
}

/// The calculus-specific construct a term uses, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construct {
    Op,
    Handle,
    Reflect,
    Reify,
    Shift0,
    Dollar,
}

impl Construct {
    pub fn calculus(self) -> Calculus {
        match self {
            Construct::Op | Construct::Handle => Calculus::Eff,
            Construct::Reflect | Construct::Reify => Calculus::Mon,
            Construct::Shift0 | Construct::Dollar => Calculus::Del,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Construct::Op => "operation call",
            Construct::Handle => "handle",
            Construct::Reflect => "reflect",
            Construct::Reify => "reify",
            Construct::Shift0 => "shift0",
            Construct::Dollar => "reset",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{} not available in {calculus}", construct.keyword())]
pub struct TagError {
    pub construct: Construct,
    pub calculus: Calculus,
}

/// Check that every construct and every effect annotation in `c` belongs to `calc`.
pub fn check_tag(c: &Comp, calc: Calculus) -> Result<(), TagError> {
    let bad = |k: Construct| -> Result<(), TagError> {
        if k.calculus() == calc {
            Ok(())
        } else {
            Err(TagError { construct: k, calculus: calc })
        }
    };
    let eff = |e: &Effect| -> Result<(), TagError> {
        match e.foreign_construct(calc) {
            Some(k) => Err(TagError { construct: k, calculus: calc }),
            None => Ok(()),
        }
    };
    use Comp::*;
    match c {
        Return(v) | Force(v) => check_tag_value(v, calc),
        Let { bound, body, .. } => {
            check_tag(bound, calc)?;
            check_tag(body, calc)
        }
        Lam { body, .. } | Prj(_, body) => check_tag(body, calc),
        App(m, v) => {
            check_tag(m, calc)?;
            check_tag_value(v, calc)
        }
        CPair(a, b) => {
            check_tag(a, calc)?;
            check_tag(b, calc)
        }
        Split { scrutinee, body, .. } => {
            check_tag_value(scrutinee, calc)?;
            check_tag(body, calc)
        }
        Case { scrutinee, arms, ty } => {
            check_tag_value(scrutinee, calc)?;
            if let Some(t) = ty {
                t.walk_effects(&mut |e| eff(e))?;
            }
            arms.values().try_for_each(|a| check_tag(&a.body, calc))
        }
        Op { arg, .. } => {
            bad(Construct::Op)?;
            check_tag_value(arg, calc)
        }
        Handle { body, handler } => {
            bad(Construct::Handle)?;
            check_tag(body, calc)?;
            check_tag(&handler.ret, calc)?;
            handler.ops.values().try_for_each(|cl| check_tag(&cl.body, calc))
        }
        Reflect(m) => {
            bad(Construct::Reflect)?;
            check_tag(m, calc)
        }
        Reify { monad, body } => {
            bad(Construct::Reify)?;
            monad.carrier.walk_effects(&mut |e| eff(e))?;
            check_tag(&monad.unit, calc)?;
            check_tag(&monad.bind, calc)?;
            check_tag(body, calc)
        }
        Shift0 { body, .. } => {
            bad(Construct::Shift0)?;
            check_tag(body, calc)
        }
        Dollar { body, cont, .. } => {
            bad(Construct::Dollar)?;
            check_tag(body, calc)?;
            check_tag(cont, calc)
        }
    }
}

pub fn check_tag_value(v: &Value, calc: Calculus) -> Result<(), TagError> {
    match v {
        Value::Var(_) | Value::Unit => Ok(()),
        Value::Pair(a, b) => {
            check_tag_value(a, calc)?;
            check_tag_value(b, calc)
        }
        Value::Inj { ty, payload, .. } => {
            if let Some(t) = ty {
                if let Some(k) = t.foreign_construct(calc) {
                    return Err(TagError { construct: k, calculus: calc });
                }
            }
            check_tag_value(payload, calc)
        }
        Value::Thunk { effect, body } => {
            if let Some(e) = effect {
                if let Some(k) = e.foreign_construct(calc) {
                    return Err(TagError { construct: k, calculus: calc });
                }
            }
            check_tag(body, calc)
        }
    }
}

/// A computation tagged with the calculus it belongs to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    calculus: Calculus,
    comp: Comp,
}

impl Term {
    pub fn new(calculus: Calculus, comp: Comp) -> Result<Term, TagError> {
        check_tag(&comp, calculus)?;
        Ok(Term { calculus, comp })
    }
    pub fn calculus(&self) -> Calculus {
        self.calculus
    }
    pub fn comp(&self) -> &Comp {
        &self.comp
    }
    pub fn into_comp(self) -> Comp {
        self.comp
    }
}

/// Structural equality, which is α-equivalence under de Bruijn indices.
pub fn alpha_eq(a: &Comp, b: &Comp) -> bool {
    a == b
}

pub fn alpha_eq_value(a: &Value, b: &Value) -> bool {
    a == b
}

// Small constructors used throughout the crate and its tests.

pub fn var(i: usize) -> Value {
    Value::Var(i)
}

pub fn pair(a: Value, b: Value) -> Value {
    Value::Pair(Box::new(a), Box::new(b))
}

pub fn inj(label: &str, payload: Value) -> Value {
    Value::Inj { label: label.to_string(), ty: None, payload: Box::new(payload) }
}

pub fn thunk(body: Comp) -> Value {
    Value::Thunk { effect: None, body: Box::new(body) }
}

pub fn tru() -> Value {
    Value::Inj { label: "True".into(), ty: Some(VType::bit()), payload: Box::new(Value::Unit) }
}

pub fn fls() -> Value {
    Value::Inj { label: "False".into(), ty: Some(VType::bit()), payload: Box::new(Value::Unit) }
}

pub fn ret(v: Value) -> Comp {
    Comp::Return(v)
}

pub fn force(v: Value) -> Comp {
    Comp::Force(v)
}

pub fn lam(name: &str, body: Comp) -> Comp {
    Comp::Lam { name: Name::new(name), body: Box::new(body) }
}

pub fn app(m: Comp, v: Value) -> Comp {
    Comp::App(Box::new(m), v)
}

pub fn let_(name: &str, bound: Comp, body: Comp) -> Comp {
    Comp::Let { bound: Box::new(bound), name: Name::new(name), body: Box::new(body) }
}

pub fn split(v: Value, x: &str, y: &str, body: Comp) -> Comp {
    Comp::Split { scrutinee: v, names: (Name::new(x), Name::new(y)), body: Box::new(body) }
}

pub fn op(name: &str, arg: Value) -> Comp {
    Comp::Op { op: name.to_string(), arg }
}

pub fn shift0(k: &str, body: Comp) -> Comp {
    Comp::Shift0 { name: Name::new(k), body: Box::new(body) }
}

pub fn dollar(body: Comp, x: &str, cont: Comp) -> Comp {
    Comp::Dollar { body: Box::new(body), name: Name::new(x), cont: Box::new(cont) }
}

pub fn reflect(m: Comp) -> Comp {
    Comp::Reflect(Box::new(m))
}

pub fn reify(monad: Rc<MonadDef>, body: Comp) -> Comp {
    Comp::Reify { monad, body: Box::new(body) }
}

pub fn handle(body: Comp, handler: Handler) -> Comp {
    Comp::Handle { body: Box::new(body), handler: Box::new(handler) }
}

pub fn case(v: Value, arms: Vec<(&str, &str, Comp)>) -> Comp {
    Comp::Case {
        scrutinee: v,
        arms: arms
            .into_iter()
            .map(|(l, x, m)| (l.to_string(), Arm { name: Name::new(x), body: m }))
            .collect(),
        ty: None,
    }
}

/// Values held directly by a computation node, not counting those inside
/// sub-computations.
pub fn node_values(c: &Comp) -> Vec<&Value> {
    use Comp::*;
    match c {
        Return(v) | Force(v) | Op { arg: v, .. } | App(_, v) => vec![v],
        Split { scrutinee, .. } | Case { scrutinee, .. } => vec![scrutinee],
        _ => vec![],
    }
}

fn thunks_in<'a>(v: &'a Value, out: &mut Vec<(&'a Comp, usize)>) {
    match v {
        Value::Var(_) | Value::Unit => {}
        Value::Pair(a, b) => {
            thunks_in(a, out);
            thunks_in(b, out);
        }
        Value::Inj { payload, .. } => thunks_in(payload, out),
        Value::Thunk { body, .. } => out.push((body, 0)),
    }
}

/// Immediate sub-computations in canonical order, each with the number of
/// binders it sits under relative to `c`. Thunk bodies inside the node's
/// values count as children. A node path is a list of positions in this order.
pub fn children(c: &Comp) -> Vec<(&Comp, usize)> {
    use Comp::*;
    let mut out = Vec::new();
    match c {
        Return(v) | Force(v) | Op { arg: v, .. } => thunks_in(v, &mut out),
        Let { bound, body, .. } => {
            out.push((&**bound, 0));
            out.push((&**body, 1));
        }
        Lam { body, .. } | Shift0 { body, .. } => out.push((&**body, 1)),
        Prj(_, m) | Reflect(m) | Reify { body: m, .. } => out.push((&**m, 0)),
        App(m, v) => {
            out.push((&**m, 0));
            thunks_in(v, &mut out);
        }
        CPair(a, b) => {
            out.push((&**a, 0));
            out.push((&**b, 0));
        }
        Split { scrutinee, body, .. } => {
            thunks_in(scrutinee, &mut out);
            out.push((&**body, 2));
        }
        Case { scrutinee, arms, .. } => {
            thunks_in(scrutinee, &mut out);
            out.extend(arms.values().map(|a| (&a.body, 1)));
        }
        Handle { body, handler } => {
            out.push((&**body, 0));
            out.push((&handler.ret, 1));
            out.extend(handler.ops.values().map(|cl| (&cl.body, 2)));
        }
        Dollar { body, cont, .. } => {
            out.push((&**body, 0));
            out.push((&**cont, 1));
        }
    }
    out
}

/// Rebuild `c` with each immediate sub-computation replaced by `f` of it,
/// visiting them in canonical order.
pub fn map_children(c: &Comp, f: &mut dyn FnMut(&Comp) -> Comp) -> Comp {
    use Comp::*;
    let mut b = |c: &Comp| Box::new(f(c));
    match c {
        Return(v) => Return(map_thunks(v, &mut b)),
        Force(v) => Force(map_thunks(v, &mut b)),
        Op { op, arg } => Op { op: op.clone(), arg: map_thunks(arg, &mut b) },
        Let { bound, name, body } => {
            let bound = b(bound);
            Let { bound, name: name.clone(), body: b(body) }
        }
        Lam { name, body } => Lam { name: name.clone(), body: b(body) },
        Shift0 { name, body } => Shift0 { name: name.clone(), body: b(body) },
        Prj(s, m) => Prj(*s, b(m)),
        Reflect(m) => Reflect(b(m)),
        Reify { monad, body } => Reify { monad: monad.clone(), body: b(body) },
        App(m, v) => {
            let m = b(m);
            App(m, map_thunks(v, &mut b))
        }
        CPair(x, y) => {
            let x = b(x);
            CPair(x, b(y))
        }
        Split { scrutinee, names, body } => {
            let scrutinee = map_thunks(scrutinee, &mut b);
            Split { scrutinee, names: names.clone(), body: b(body) }
        }
        Case { scrutinee, arms, ty } => {
            let scrutinee = map_thunks(scrutinee, &mut b);
            let arms = arms.iter().map(|(l, a)| (l.clone(), Arm { name: a.name.clone(), body: *b(&a.body) })).collect();
            Case { scrutinee, arms, ty: ty.clone() }
        }
        Handle { body, handler } => {
            let body = b(body);
            let ret = *b(&handler.ret);
            let ops = handler
                .ops
                .iter()
                .map(|(o, cl)| (o.clone(), OpClause { param: cl.param.clone(), cont: cl.cont.clone(), body: *b(&cl.body) }))
                .collect();
            Handle { body, handler: Box::new(Handler { ret_name: handler.ret_name.clone(), ret, ops }) }
        }
        Dollar { body, name, cont } => {
            let body = b(body);
            Dollar { body, name: name.clone(), cont: b(cont) }
        }
    }
}

fn map_thunks(v: &Value, f: &mut dyn FnMut(&Comp) -> Box<Comp>) -> Value {
    match v {
        Value::Var(_) | Value::Unit => v.clone(),
        Value::Pair(a, b) => {
            let a = map_thunks(a, f);
            Value::Pair(Box::new(a), Box::new(map_thunks(b, f)))
        }
        Value::Inj { label, ty, payload } => Value::Inj { label: label.clone(), ty: ty.clone(), payload: Box::new(map_thunks(payload, f)) },
        Value::Thunk { effect, body } => Value::Thunk { effect: effect.clone(), body: f(body) },
    }
}

/// Does free variable `i` occur in `c`?
pub fn occurs_free(c: &Comp, i: usize) -> bool {
    node_values(c).into_iter().any(|v| occurs_in_value(v, i))
        || children(c).into_iter().any(|(ch, extra)| occurs_free(ch, i + extra))
}

// Stops at thunks; their bodies are children of the enclosing node.
fn occurs_in_value(v: &Value, i: usize) -> bool {
    match v {
        Value::Var(j) => *j == i,
        Value::Unit | Value::Thunk { .. } => false,
        Value::Pair(a, b) => occurs_in_value(a, i) || occurs_in_value(b, i),
        Value::Inj { payload, .. } => occurs_in_value(payload, i),
    }
}

/// Does free variable `i` occur in value `v`, including inside thunks?
pub fn occurs_free_value(v: &Value, i: usize) -> bool {
    match v {
        Value::Var(j) => *j == i,
        Value::Unit => false,
        Value::Pair(a, b) => occurs_free_value(a, i) || occurs_free_value(b, i),
        Value::Inj { payload, .. } => occurs_free_value(payload, i),
        Value::Thunk { body, .. } => occurs_free(body, i),
    }
}

/// Follow a path from `c`.
pub fn at_path<'a>(c: &'a Comp, path: &[usize]) -> Option<&'a Comp> {
    let mut cur = c;
    for &i in path {
        cur = children(cur).get(i)?.0;
    }
    Some(cur)
}

/// Size in nodes; used to bound generated terms and searches.
pub fn size(c: &Comp) -> usize {
    use Comp::*;
    1 + match c {
        Return(v) | Force(v) => size_value(v),
        Let { bound, body, .. } => size(bound) + size(body),
        Lam { body, .. } | Prj(_, body) | Reflect(body) | Shift0 { body, .. } | Reify { body, .. } => size(body),
        App(m, v) => size(m) + size_value(v),
        CPair(a, b) => size(a) + size(b),
        Split { scrutinee, body, .. } => size_value(scrutinee) + size(body),
        Case { scrutinee, arms, .. } => size_value(scrutinee) + arms.values().map(|a| size(&a.body)).sum::<usize>(),
        Op { arg, .. } => size_value(arg),
        Handle { body, handler } => {
            size(body) + size(&handler.ret) + handler.ops.values().map(|c| size(&c.body)).sum::<usize>()
        }
        Dollar { body, cont, .. } => size(body) + size(cont),
    }
}

pub fn size_value(v: &Value) -> usize {
    1 + match v {
        Value::Var(_) | Value::Unit => 0,
        Value::Pair(a, b) => size_value(a) + size_value(b),
        Value::Inj { payload, .. } => size_value(payload),
        Value::Thunk { body, .. } => size(body),
    }
}
