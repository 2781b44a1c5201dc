//! Enumerating denotations of types, and counting them.

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;
use serde::Serialize;

use super::{DenotError, Elem};
use crate::typesys::types::{CType, Effect, VType};

/// An explicitly enumerated finite set, in canonical order.
pub type FinSet = Rc<Vec<Elem>>;

/// Largest set the enumerator will build.
pub const ENUM_LIMIT: usize = 1 << 20;

/// Finite sets assigned to type variables.
#[derive(Clone, Debug, Default)]
pub struct Assignment {
    sets: BTreeMap<String, Option<FinSet>>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn with(mut self, var: &str, set: FinSet) -> Assignment {
        self.sets.insert(var.to_string(), Some(set));
        self
    }

    /// Assign a set too large to enumerate.
    pub fn with_unenumerable(mut self, var: &str) -> Assignment {
        self.sets.insert(var.to_string(), None);
        self
    }

    /// `n` distinct atoms named after `var`.
    pub fn atoms(var: &str, n: usize) -> FinSet {
        Rc::new((0..n).map(|i| Elem::Atom(var.to_string(), i)).collect())
    }

    pub fn get(&self, var: &str) -> Result<FinSet, DenotError> {
        match self.sets.get(var) {
            Some(Some(s)) => Ok(s.clone()),
            Some(None) => Err(DenotError::Infinite(format!("the set assigned to `{var}`"))),
            None => Err(DenotError::Ill(format!("no set assigned to `{var}`"))),
        }
    }
}

fn finish(mut v: Vec<Elem>) -> FinSet {
    v.sort();
    v.dedup();
    Rc::new(v)
}

fn guard(n: usize) -> Result<(), DenotError> {
    if n > ENUM_LIMIT {
        Err(DenotError::TooLarge(n))
    } else {
        Ok(())
    }
}

pub fn den_vtype(t: &VType, theta: &Assignment) -> Result<FinSet, DenotError> {
    Ok(match t {
        VType::Unit => Rc::new(vec![Elem::Unit]),
        VType::Var(v) => theta.get(v)?,
        VType::Prod(a, b) => product(&den_vtype(a, theta)?, &den_vtype(b, theta)?)?,
        VType::Variant(m) => {
            let mut out = Vec::new();
            for (l, t) in m {
                out.extend(den_vtype(t, theta)?.iter().map(|e| Elem::tag(l, e.clone())));
            }
            guard(out.len())?;
            finish(out)
        }
        VType::Thunk(e, c) => den_ctype(c, e, theta)?,
        VType::Hole | VType::Meta(_) => return Err(DenotError::Ill("type is not fully known".into())),
    })
}

fn product(a: &FinSet, b: &FinSet) -> Result<FinSet, DenotError> {
    guard(a.len().saturating_mul(b.len()))?;
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a.iter() {
        for y in b.iter() {
            out.push(Elem::pair(x.clone(), y.clone()));
        }
    }
    Ok(finish(out))
}

/// All tables from `dom` to `cod`.
pub fn functions(dom: &FinSet, cod: &FinSet) -> Result<FinSet, DenotError> {
    let n = (cod.len() as f64).powi(dom.len() as i32);
    if n > ENUM_LIMIT as f64 {
        return Err(DenotError::TooLarge(ENUM_LIMIT.saturating_add(1)));
    }
    let mut out = vec![Vec::new()];
    for d in dom.iter() {
        let mut next = Vec::with_capacity(out.len() * cod.len());
        for rows in &out {
            for c in cod.iter() {
                let mut r: Vec<(Elem, Elem)> = rows.clone();
                r.push((d.clone(), c.clone()));
                next.push(r);
            }
        }
        out = next;
    }
    Ok(finish(out.into_iter().map(Elem::table).collect()))
}

/// Carrier of the computation type `c` at effect `e`.
pub fn den_ctype(c: &CType, e: &Effect, theta: &Assignment) -> Result<FinSet, DenotError> {
    match c {
        CType::Returner(a) => monad_set(e, &den_vtype(a, theta)?),
        CType::Fun(a, r) => functions(&den_vtype(a, theta)?, &den_ctype(r, e, theta)?),
        CType::Prod(a, b) => product(&den_ctype(a, e, theta)?, &den_ctype(b, e, theta)?),
        CType::Hole | CType::Meta(_) => Err(DenotError::Ill("type is not fully known".into())),
    }
}

/// `T_E(X)`: identity for the empty effect, finite trees for operations,
/// the layer's carrier for a monad stack.
pub fn monad_set(e: &Effect, x: &FinSet) -> Result<FinSet, DenotError> {
    match e {
        Effect::Pure => Ok(x.clone()),
        Effect::Ops(m) => {
            let empty = Assignment::new();
            let mut nullary = Vec::new();
            let mut growing = false;
            for (op, sig) in m {
                let params = den_vtype(&sig.param, &empty).map_err(|_| DenotError::Infinite(format!("parameters of `{op}`")))?;
                let arity = den_vtype(&sig.result, &empty).map_err(|_| DenotError::Infinite(format!("arity of `{op}`")))?;
                if arity.is_empty() {
                    nullary.extend(params.iter().map(|p| Elem::Node { op: op.clone(), param: Rc::new(p.clone()), children: Vec::new().into() }));
                } else if !params.is_empty() {
                    growing = true;
                }
            }
            if x.is_empty() && nullary.is_empty() {
                return Ok(Rc::new(Vec::new()));
            }
            if growing {
                return Err(DenotError::Infinite(format!("operation trees over {}", crate::surface::print_effect(e))));
            }
            let mut out: Vec<Elem> = x.iter().map(|v| Elem::leaf(v.clone())).collect();
            out.extend(nullary);
            Ok(finish(out))
        }
        Effect::Mon { base, layer } => den_ctype(&layer.carrier, base, &Assignment::new().with(&layer.tyvar, x.clone())),
        Effect::Del { .. } => Err(DenotError::Unsupported("delimited-control effects have no direct denotation".into())),
        Effect::Meta(_) => Err(DenotError::Ill("effect is not fully known".into())),
    }
}

/// A cardinal: a natural number or infinite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Card {
    Finite(BigUint),
    Infinite,
}

impl Card {
    pub fn n(n: u64) -> Card {
        Card::Finite(BigUint::from(n))
    }

    fn is_zero(&self) -> bool {
        matches!(self, Card::Finite(n) if *n == BigUint::from(0u8))
    }

    fn is_one(&self) -> bool {
        matches!(self, Card::Finite(n) if *n == BigUint::from(1u8))
    }

    fn add(&self, o: &Card) -> Card {
        match (self, o) {
            (Card::Finite(a), Card::Finite(b)) => Card::Finite(a + b),
            _ => Card::Infinite,
        }
    }

    fn mul(&self, o: &Card) -> Card {
        if self.is_zero() || o.is_zero() {
            return Card::n(0);
        }
        match (self, o) {
            (Card::Finite(a), Card::Finite(b)) => Card::Finite(a * b),
            _ => Card::Infinite,
        }
    }

    /// `self ^ exp`, the number of functions from a set of size `exp`.
    fn pow(&self, exp: &Card) -> Result<Card, DenotError> {
        if exp.is_zero() {
            return Ok(Card::n(1));
        }
        if self.is_zero() || self.is_one() {
            return Ok(self.clone());
        }
        match (self, exp) {
            (Card::Finite(a), Card::Finite(b)) => {
                let e: u32 = b.try_into().map_err(|_| DenotError::TooLarge(usize::MAX))?;
                Ok(Card::Finite(a.pow(e)))
            }
            _ => Ok(Card::Infinite),
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        match self {
            Card::Finite(n) => n.try_into().ok(),
            Card::Infinite => None,
        }
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Card::Finite(n) => write!(f, "{n}"),
            Card::Infinite => write!(f, "infinite"),
        }
    }
}

impl Serialize for Card {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Sizes assigned to type variables.
pub type Sizes = BTreeMap<String, Card>;

pub fn cardinality_vtype(t: &VType, sizes: &Sizes) -> Result<Card, DenotError> {
    Ok(match t {
        VType::Unit => Card::n(1),
        VType::Var(v) => sizes.get(v).cloned().ok_or_else(|| DenotError::Ill(format!("no size assigned to `{v}`")))?,
        VType::Prod(a, b) => cardinality_vtype(a, sizes)?.mul(&cardinality_vtype(b, sizes)?),
        VType::Variant(m) => {
            let mut c = Card::n(0);
            for t in m.values() {
                c = c.add(&cardinality_vtype(t, sizes)?);
            }
            c
        }
        VType::Thunk(e, c) => cardinality_ctype(c, e, sizes)?,
        VType::Hole | VType::Meta(_) => return Err(DenotError::Ill("type is not fully known".into())),
    })
}

pub fn cardinality_ctype(c: &CType, e: &Effect, sizes: &Sizes) -> Result<Card, DenotError> {
    match c {
        CType::Returner(a) => cardinality_monad(e, &cardinality_vtype(a, sizes)?),
        CType::Fun(a, r) => cardinality_ctype(r, e, sizes)?.pow(&cardinality_vtype(a, sizes)?),
        CType::Prod(a, b) => Ok(cardinality_ctype(a, e, sizes)?.mul(&cardinality_ctype(b, e, sizes)?)),
        CType::Hole | CType::Meta(_) => Err(DenotError::Ill("type is not fully known".into())),
    }
}

/// `|T_E(X)|` given `|X|`.
pub fn cardinality_monad(e: &Effect, x: &Card) -> Result<Card, DenotError> {
    match e {
        Effect::Pure => Ok(x.clone()),
        Effect::Ops(m) => {
            let none = Sizes::new();
            let mut nullary = Card::n(0);
            let mut growing = false;
            for sig in m.values() {
                let p = cardinality_vtype(&sig.param, &none)?;
                let a = cardinality_vtype(&sig.result, &none)?;
                if a.is_zero() {
                    nullary = nullary.add(&p);
                } else if !p.is_zero() {
                    growing = true;
                }
            }
            let base = x.add(&nullary);
            Ok(if base.is_zero() {
                Card::n(0)
            } else if growing {
                Card::Infinite
            } else {
                base
            })
        }
        Effect::Mon { base, layer } => {
            let mut sizes = Sizes::new();
            sizes.insert(layer.tyvar.clone(), x.clone());
            cardinality_ctype(&layer.carrier, base, &sizes)
        }
        Effect::Del { .. } => Err(DenotError::Unsupported("delimited-control effects have no direct denotation".into())),
        Effect::Meta(_) => Err(DenotError::Ill("effect is not fully known".into())),
    }
}
