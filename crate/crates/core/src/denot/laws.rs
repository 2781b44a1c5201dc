//! Checking the monad laws of a layer on small finite sets.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::eval::{Ctx, Interp, LayerDerivation};
use super::sets::{den_ctype, den_vtype, monad_set, Assignment, FinSet};
use super::{DenotError, Elem};
use crate::ast::MonadDef;
use crate::typesys::types::{CType, Effect, VType};

type R<T> = Result<T, DenotError>;

/// Combinations tried per law and size before switching to sampling.
pub const DEFAULT_BUDGET: u64 = 20_000;

#[derive(Clone, Debug, Serialize)]
pub struct LawCheck {
    pub law: &'static str,
    pub size: usize,
    pub cases: u64,
    pub exhaustive: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LawWitness {
    pub law: &'static str,
    pub size: usize,
    pub bindings: Vec<(String, String)>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LawReport {
    pub checks: Vec<LawCheck>,
    pub witness: Option<LawWitness>,
    /// `proper-at-tested-sizes` or `improper`.
    pub verdict: &'static str,
}

impl LawReport {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

/// A quantified variable's range: a set, all tables between two ranges, or
/// pairs. Ranges too large to enumerate are only ever sampled.
#[derive(Clone)]
enum Quant {
    Set(FinSet),
    Fun(FinSet, Rc<Quant>),
    Pair(Rc<Quant>, Rc<Quant>),
}

impl Quant {
    fn count(&self) -> f64 {
        match self {
            Quant::Set(s) => s.len() as f64,
            Quant::Fun(d, c) => c.count().powi(d.len() as i32),
            Quant::Pair(a, b) => a.count() * b.count(),
        }
    }

    /// The `i`th element in a mixed-radix order; only called when `count` is small.
    fn nth(&self, i: u64) -> Elem {
        match self {
            Quant::Set(s) => s[i as usize].clone(),
            Quant::Fun(d, c) => {
                let n = c.count() as u64;
                let mut i = i;
                Elem::table(
                    d.iter()
                        .map(|x| {
                            let j = i % n;
                            i /= n;
                            (x.clone(), c.nth(j))
                        })
                        .collect(),
                )
            }
            Quant::Pair(a, b) => {
                let n = a.count() as u64;
                Elem::pair(a.nth(i % n), b.nth(i / n))
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Elem {
        match self {
            Quant::Set(s) => s[rng.gen_range(0..s.len())].clone(),
            Quant::Fun(d, c) => Elem::table(d.iter().map(|x| (x.clone(), c.sample(rng))).collect()),
            Quant::Pair(a, b) => Elem::pair(a.sample(rng), b.sample(rng)),
        }
    }
}

/// The range of a value type, falling back to a sampled structure when the
/// set itself is too large to enumerate.
fn range_vtype(t: &VType, theta: &Assignment) -> R<Quant> {
    match den_vtype(t, theta) {
        Ok(s) => Ok(Quant::Set(s)),
        Err(DenotError::TooLarge(n)) => match t {
            VType::Prod(a, b) => Ok(Quant::Pair(Rc::new(range_vtype(a, theta)?), Rc::new(range_vtype(b, theta)?))),
            VType::Thunk(e, c) => range_ctype(c, e, theta),
            _ => Err(DenotError::TooLarge(n)),
        },
        Err(e) => Err(e),
    }
}

fn range_ctype(c: &CType, e: &Effect, theta: &Assignment) -> R<Quant> {
    match den_ctype(c, e, theta) {
        Ok(s) => Ok(Quant::Set(s)),
        Err(DenotError::TooLarge(n)) => match c {
            CType::Fun(a, r) => Ok(Quant::Fun(den_vtype(a, theta)?, Rc::new(range_ctype(r, e, theta)?))),
            CType::Prod(a, b) => Ok(Quant::Pair(Rc::new(range_ctype(a, e, theta)?), Rc::new(range_ctype(b, e, theta)?))),
            CType::Returner(a) => match e {
                Effect::Pure => range_vtype(a, theta),
                Effect::Mon { base, layer } => {
                    let th = Assignment::new().with(&layer.tyvar, den_vtype(a, theta)?);
                    range_ctype(&layer.carrier, base, &th)
                }
                _ => Err(DenotError::TooLarge(n)),
            },
            _ => Err(DenotError::TooLarge(n)),
        },
        Err(e) => Err(e),
    }
}

type CtxKey = (bool, (usize, Option<Elem>), Option<(usize, Option<Elem>)>);

struct Layer {
    ip: Rc<Interp>,
    m: Rc<MonadDef>,
    base: Effect,
    md: Rc<LayerDerivation>,
    /// Evaluators by the sets they are instantiated at, so enumerated domains are reused.
    ctxs: RefCell<BTreeMap<CtxKey, Ctx>>,
}

impl Layer {
    fn t(&self, x: &FinSet) -> R<Quant> {
        match monad_set(&Effect::Mon { base: Box::new(self.base.clone()), layer: self.m.clone() }, x) {
            Ok(s) => Ok(Quant::Set(s)),
            Err(DenotError::TooLarge(_)) => {
                range_ctype(&self.m.carrier, &self.base, &Assignment::new().with(&self.m.tyvar, x.clone()))
            }
            Err(e) => Err(e),
        }
    }

    fn ctx(&self, is_bind: bool, a: &FinSet, b: Option<&FinSet>) -> Ctx {
        let id = |s: &FinSet| (s.len(), s.first().cloned());
        let key = (is_bind, id(a), b.map(id));
        self.ctxs
            .borrow_mut()
            .entry(key)
            .or_insert_with(|| {
                let th = Assignment::new().with(&self.m.tyvar, a.clone());
                match b {
                    Some(b) => Ctx::new(&self.ip, &self.md.bind, th.with(&self.md.beta, b.clone())),
                    None => Ctx::new(&self.ip, &self.md.unit, th),
                }
            })
            .clone()
    }

    fn unit(&self, s: &FinSet, x: &Elem) -> R<Elem> {
        self.ctx(false, s, None).eval(&[x.clone()])
    }

    fn bind(&self, a: &FinSet, b: &FinSet, t: &Elem, f: &Elem) -> R<Elem> {
        self.ctx(true, a, Some(b)).eval(&[t.clone(), f.clone()])
    }

    fn unit_table(&self, s: &FinSet) -> R<Elem> {
        Ok(Elem::table(s.iter().map(|x| Ok((x.clone(), self.unit(s, x)?))).collect::<R<_>>()?))
    }
}

/// Run `law` on every combination of `quants`, or on `budget` seeded samples
/// when there are more combinations than that. Stops at the first failure.
fn forall(
    law: &'static str,
    size: usize,
    names: &[&str],
    quants: &[Quant],
    budget: u64,
    rng: &mut ChaCha8Rng,
    law_fn: &dyn Fn(&[Elem]) -> R<(Elem, Elem)>,
) -> R<(LawCheck, Option<LawWitness>)> {
    let total: f64 = quants.iter().map(Quant::count).product();
    let exhaustive = total <= budget as f64;
    let cases = if exhaustive { total as u64 } else { budget };
    for i in 0..cases {
        let args: Vec<Elem> = if exhaustive {
            let mut rest = i;
            quants
                .iter()
                .map(|q| {
                    let n = q.count() as u64;
                    let e = q.nth(rest % n);
                    rest /= n;
                    e
                })
                .collect()
        } else {
            quants.iter().map(|q| q.sample(rng)).collect()
        };
        let (lhs, rhs) = law_fn(&args)?;
        if lhs.is_opaque() || rhs.is_opaque() {
            return Err(DenotError::Unsupported("the carrier has functions on infinite domains".into()));
        }
        if lhs != rhs {
            let witness = LawWitness {
                law,
                size,
                bindings: names.iter().zip(&args).map(|(n, a)| (n.to_string(), a.to_string())).collect(),
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
            };
            return Ok((LawCheck { law, size, cases: i + 1, exhaustive, holds: false }, Some(witness)));
        }
    }
    Ok((LawCheck { law, size, cases, exhaustive, holds: true }, None))
}

/// Check left unit, right unit and associativity for `m` over `base`, with
/// the quantified sets of each size in `sizes`.
pub fn check_monad_laws(m: &Rc<MonadDef>, base: &Effect, sizes: &[usize], budget: u64, seed: u64) -> R<LawReport> {
    let ip = Interp::new();
    let md = ip.monad(m, base)?;
    let layer = Layer { ip, m: m.clone(), base: base.clone(), md, ctxs: RefCell::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for &n in sizes {
        let x = Assignment::atoms("x", n);
        let y = Assignment::atoms("y", n);
        let z = Assignment::atoms("z", n);
        let (tx, ty, tz) = (layer.t(&x)?, layer.t(&y)?, layer.t(&z)?);
        let l = &layer;

        let left = forall("left-unit", n, &["x", "f"], &[Quant::Set(x.clone()), Quant::Fun(x.clone(), Rc::new(ty.clone()))], budget, &mut rng, &|a| {
            Ok((l.bind(&x, &y, &l.unit(&x, &a[0])?, &a[1])?, a[1].apply(&a[0])?))
        })?;
        let right_unit = layer.unit_table(&x)?;
        let right = forall("right-unit", n, &["t"], &[tx.clone()], budget, &mut rng, &|a| {
            Ok((l.bind(&x, &x, &a[0], &right_unit)?, a[0].clone()))
        })?;
        let assoc = forall(
            "associativity",
            n,
            &["t", "f", "g"],
            &[tx.clone(), Quant::Fun(x.clone(), Rc::new(ty.clone())), Quant::Fun(y.clone(), Rc::new(tz.clone()))],
            budget,
            &mut rng,
            &|a| {
                let (t, f, g) = (&a[0], &a[1], &a[2]);
                let lhs = l.bind(&y, &z, &l.bind(&x, &y, t, f)?, g)?;
                let fg = Elem::table(x.iter().map(|v| Ok((v.clone(), l.bind(&y, &z, &f.apply(v)?, g)?))).collect::<R<_>>()?);
                Ok((lhs, l.bind(&x, &z, t, &fg)?))
            },
        )?;
        for (check, witness) in [left, right, assoc] {
            checks.push(check);
            if witness.is_some() {
                return Ok(LawReport { checks, witness, verdict: "improper" });
            }
        }
    }
    Ok(LawReport { checks, witness: None, verdict: "proper-at-tested-sizes" })
}
