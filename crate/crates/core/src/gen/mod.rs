//! Seeded random terms: well-typed closed ground returners for the safety
//! and termination suites, and merely scope-correct terms for exercising
//! the printer and parser.

use std::collections::BTreeMap;
use std::rc::Rc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{self, Arm, Calculus, Comp, Handler, MonadDef, Name, OpClause, Side, Value};
use crate::typesys::types::{CType, Effect, OpSig, VType};

/// Monads available to generated λmon terms.
const MONADS: &str = "
monad State = where a. bit -> F (a * bit) {
    return x -> fun s -> return <x, s>
  | m >>= k -> fun s -> let p <- force m s in split p as <x, s'> in force k x s'
}
monad Maybe = where a. F {None: 1 | Some: a} {
    return x -> return inj Some x
  | m >>= k -> let o <- force m in case o of { None u -> return inj None u | Some x -> force k x }
}
";

pub fn monads() -> Vec<(String, Rc<MonadDef>)> {
    crate::surface::parse(MONADS, Calculus::Mon).expect("built-in monads parse").monads
}

fn ops() -> Vec<(&'static str, OpSig)> {
    vec![
        ("flip", OpSig { param: VType::Unit, result: VType::bit() }),
        ("emit", OpSig { param: VType::bit(), result: VType::Unit }),
        ("ask", OpSig { param: VType::Unit, result: VType::prod(VType::bit(), VType::bit()) }),
    ]
}

fn choice() -> VType {
    VType::variant([("A", VType::Unit), ("B", VType::bit())])
}

fn ground_types() -> Vec<VType> {
    vec![VType::Unit, VType::bit(), VType::prod(VType::bit(), VType::Unit), choice()]
}

/// A closed term and the value type it returns.
#[derive(Clone, Debug)]
pub struct Sample {
    pub term: Comp,
    pub ty: VType,
}

/// `n` well-typed closed ground returners of `calc`, reproducible from `seed`.
pub fn corpus(calc: Calculus, seed: u64, n: usize) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| well_typed(calc, &mut rng, 4)).collect()
}

/// A closed returner of ground type, typeable at the empty effect. Every
/// extension construct of `calc` may occur.
pub fn well_typed<R: Rng>(calc: Calculus, rng: &mut R, depth: usize) -> Sample {
    let grounds = ground_types();
    let ty = grounds.choose(rng).unwrap().clone();
    let mut g = Typed { rng, calc, budget: 60, monads: monads() };
    let term = g.comp(&mut Vec::new(), &Effect::Pure, &CType::f(ty.clone()), depth);
    Sample { term, ty }
}

/// A closed term that uses every construct of `calc` but need not typecheck.
pub fn scoped<R: Rng>(calc: Calculus, rng: &mut R, depth: usize) -> Comp {
    let mut g = Scoped { rng, calc, monads: monads() };
    g.comp(0, depth)
}

/// Self-application under a handler: runs forever, one `tick` per round.
pub fn divergent() -> Comp {
    let body = ast::lam("x", ast::let_("_", ast::op("tick", Value::Unit), ast::app(ast::force(ast::var(1)), ast::var(1))));
    let w = ast::thunk(body);
    let handler = Handler {
        ret_name: Name::new("x"),
        ret: ast::ret(ast::var(0)),
        ops: BTreeMap::from([(
            "tick".to_string(),
            OpClause { param: Name::new("p"), cont: Name::new("k"), body: ast::app(ast::force(ast::var(0)), Value::Unit) },
        )]),
    };
    ast::handle(ast::app(ast::force(w.clone()), w), handler)
}

const NAMES: &[&str] = &["x", "y", "z", "k", "s", "f", "x"];

struct Typed<'r, R> {
    rng: &'r mut R,
    calc: Calculus,
    /// Nodes left before only leaves are produced.
    budget: usize,
    monads: Vec<(String, Rc<MonadDef>)>,
}

impl<R: Rng> Typed<'_, R> {
    fn name(&mut self) -> &'static str {
        NAMES.choose(self.rng).unwrap()
    }

    fn small(&mut self, depth: usize) -> bool {
        if self.budget == 0 || depth == 0 {
            return true;
        }
        self.budget -= 1;
        false
    }

    /// A type for an intermediate result: ground, or occasionally a thunk
    /// at the current effect.
    fn mid_type(&mut self, eff: &Effect) -> VType {
        let g = ground_types().choose(self.rng).unwrap().clone();
        match self.rng.gen_range(0..10) {
            0 => VType::thunk(eff.clone(), CType::f(g)),
            1 => VType::thunk(eff.clone(), CType::fun(VType::bit(), CType::f(g))),
            _ => g,
        }
    }

    fn value(&mut self, ctx: &mut Vec<VType>, ty: &VType, depth: usize) -> Value {
        let vars: Vec<usize> = (0..ctx.len()).filter(|&i| ctx[ctx.len() - 1 - i] == *ty).collect();
        if !vars.is_empty() && self.rng.gen_bool(0.5) {
            return Value::Var(*vars.choose(self.rng).unwrap());
        }
        match ty {
            VType::Unit => Value::Unit,
            VType::Prod(a, b) => ast::pair(self.value(ctx, a, depth), self.value(ctx, b, depth)),
            VType::Variant(m) => {
                let (l, t) = m.iter().collect::<Vec<_>>().choose(self.rng).map(|(l, t)| ((*l).clone(), (*t).clone())).unwrap();
                let payload = self.value(ctx, &t, depth);
                Value::Inj { label: l, ty: Some(ty.clone()), payload: Box::new(payload) }
            }
            VType::Thunk(e, c) => {
                let body = self.comp(ctx, e, c, depth.saturating_sub(1));
                Value::Thunk { effect: Some((**e).clone()), body: Box::new(body) }
            }
            other => unreachable!("no generator for {other:?}"),
        }
    }

    fn comp(&mut self, ctx: &mut Vec<VType>, eff: &Effect, goal: &CType, depth: usize) -> Comp {
        match goal {
            CType::Fun(a, c) => {
                if let Some(m) = self.use_var(ctx, eff, goal) {
                    return m;
                }
                ctx.push((**a).clone());
                let body = self.comp(ctx, eff, c, depth);
                ctx.pop();
                ast::lam(self.name(), body)
            }
            CType::Prod(a, b) => Comp::CPair(Box::new(self.comp(ctx, eff, a, depth)), Box::new(self.comp(ctx, eff, b, depth))),
            CType::Returner(a) => self.returner(ctx, eff, a, depth),
            CType::Hole | CType::Meta(_) => unreachable!(),
        }
    }

    /// `force x` or `force x V` for a variable whose thunk type fits.
    fn use_var(&mut self, ctx: &mut Vec<VType>, eff: &Effect, goal: &CType) -> Option<Comp> {
        let mut found = Vec::new();
        for i in 0..ctx.len() {
            if let VType::Thunk(e, c) = &ctx[ctx.len() - 1 - i] {
                if **e != *eff {
                    continue;
                }
                if **c == *goal {
                    found.push((i, None));
                } else if let CType::Fun(p, r) = &**c {
                    if **r == *goal {
                        found.push((i, Some((**p).clone())));
                    }
                }
            }
        }
        let (i, arg) = found.choose(self.rng)?.clone();
        if self.rng.gen_bool(0.3) {
            return None;
        }
        let m = ast::force(ast::var(i));
        Some(match arg {
            None => m,
            Some(p) => {
                let v = self.value(ctx, &p, 0);
                ast::app(m, v)
            }
        })
    }

    fn returner(&mut self, ctx: &mut Vec<VType>, eff: &Effect, a: &VType, depth: usize) -> Comp {
        let goal = CType::f(a.clone());
        if let Some(m) = self.use_var(ctx, eff, &goal) {
            return m;
        }
        if let Some(m) = self.perform(ctx, eff, a, depth) {
            return m;
        }
        if self.small(depth) {
            return ast::ret(self.value(ctx, a, 0));
        }
        let d = depth - 1;
        let extension = match self.calc {
            Calculus::Mam => 0,
            _ => 3,
        };
        match self.rng.gen_range(0..8 + extension) {
            0 => ast::ret(self.value(ctx, a, d)),
            1 | 2 => {
                let b = self.bound_type(eff);
                let m = self.comp(ctx, eff, &CType::f(b.clone()), d);
                ctx.push(b);
                let n = self.comp(ctx, eff, &goal, d);
                ctx.pop();
                ast::let_(self.name(), m, n)
            }
            3 => {
                let b = ground_types().choose(self.rng).unwrap().clone();
                let v = self.value(ctx, &b, d);
                let m = self.comp(ctx, eff, &CType::fun(b, goal), d);
                ast::app(m, v)
            }
            4 => {
                let body = self.comp(ctx, eff, &goal, d);
                ast::force(ast::thunk(body))
            }
            5 => {
                let other = CType::f(ground_types().choose(self.rng).unwrap().clone());
                let (l, r, side) = if self.rng.gen_bool(0.5) {
                    (goal.clone(), other, Side::Left)
                } else {
                    (other, goal.clone(), Side::Right)
                };
                Comp::Prj(side, Box::new(self.comp(ctx, eff, &CType::Prod(Box::new(l), Box::new(r)), d)))
            }
            6 => {
                let vt = if self.rng.gen_bool(0.5) { VType::bit() } else { choice() };
                let v = self.value(ctx, &vt, d);
                let VType::Variant(m) = &vt else { unreachable!() };
                let mut arms = BTreeMap::new();
                for (l, t) in m {
                    ctx.push(t.clone());
                    let body = self.comp(ctx, eff, &goal, d);
                    ctx.pop();
                    arms.insert(l.clone(), Arm { name: Name::new(self.name()), body });
                }
                Comp::Case { scrutinee: v, arms, ty: None }
            }
            7 => {
                let (x, y) = (self.mid_type(eff), ground_types().choose(self.rng).unwrap().clone());
                let v = self.value(ctx, &VType::prod(x.clone(), y.clone()), d);
                ctx.push(x);
                ctx.push(y);
                let body = self.comp(ctx, eff, &goal, d);
                ctx.truncate(ctx.len() - 2);
                ast::split(v, self.name(), self.name(), body)
            }
            _ => match self.calc {
                Calculus::Eff => self.handle(ctx, eff, a, d),
                Calculus::Mon => self.reify(ctx, eff, a, d),
                Calculus::Del => self.reset(ctx, eff, a, d),
                Calculus::Mam => unreachable!(),
            },
        }
    }

    fn bound_type(&mut self, eff: &Effect) -> VType {
        // Bias towards results that the current effect can produce directly.
        if let Effect::Ops(m) = eff {
            if self.rng.gen_bool(0.4) {
                return m.values().collect::<Vec<_>>().choose(self.rng).unwrap().result.clone();
            }
        }
        self.mid_type(eff)
    }

    /// An operation call, `reflect` or `shift0` at the current effect.
    fn perform(&mut self, ctx: &mut Vec<VType>, eff: &Effect, a: &VType, depth: usize) -> Option<Comp> {
        if !self.rng.gen_bool(0.35) {
            return None;
        }
        match eff {
            Effect::Ops(m) => {
                let fits: Vec<(String, OpSig)> = m.iter().filter(|(_, s)| s.result == *a).map(|(o, s)| (o.clone(), s.clone())).collect();
                let (o, s) = fits.choose(self.rng)?.clone();
                let v = self.value(ctx, &s.param, depth.saturating_sub(1));
                Some(ast::op(&o, v))
            }
            Effect::Mon { base, layer } => {
                let c = layer.carrier_at(a);
                Some(ast::reflect(self.comp(ctx, base, &c, depth.saturating_sub(1))))
            }
            Effect::Del { base, top } => {
                ctx.push(VType::thunk((**base).clone(), CType::fun(a.clone(), (**top).clone())));
                let body = self.comp(ctx, base, top, depth.saturating_sub(1));
                ctx.pop();
                Some(ast::shift0("k", body))
            }
            _ => None,
        }
    }

    /// Either `goal` itself or `bit -> goal`, applied afterwards.
    fn answer(&mut self, a: &VType) -> CType {
        if self.rng.gen_bool(0.5) {
            CType::f(a.clone())
        } else {
            CType::fun(VType::bit(), CType::f(a.clone()))
        }
    }

    fn saturate(&mut self, ctx: &mut Vec<VType>, m: Comp, c: &CType) -> Comp {
        match c {
            CType::Fun(p, _) => {
                let v = self.value(ctx, p, 0);
                ast::app(m, v)
            }
            _ => m,
        }
    }

    fn handle(&mut self, ctx: &mut Vec<VType>, eff: &Effect, a: &VType, d: usize) -> Comp {
        let mut sig = BTreeMap::new();
        for (o, s) in ops() {
            if self.rng.gen_bool(0.5) {
                sig.insert(o.to_string(), s);
            }
        }
        if sig.is_empty() {
            let (o, s) = ops().swap_remove(0);
            sig.insert(o.to_string(), s);
        }
        let inner = Effect::Ops(sig.clone());
        let b = ground_types().choose(self.rng).unwrap().clone();
        let out = self.answer(a);
        let body = self.comp(ctx, &inner, &CType::f(b.clone()), d);
        ctx.push(b);
        let ret = self.comp(ctx, eff, &out, d);
        ctx.pop();
        let mut clauses = BTreeMap::new();
        for (o, s) in sig {
            ctx.push(s.param.clone());
            ctx.push(VType::thunk(eff.clone(), CType::fun(s.result.clone(), out.clone())));
            let body = self.comp(ctx, eff, &out, d);
            ctx.truncate(ctx.len() - 2);
            clauses.insert(o, OpClause { param: Name::new("p"), cont: Name::new("k"), body });
        }
        let h = Handler { ret_name: Name::new(self.name()), ret, ops: clauses };
        let m = ast::handle(body, h);
        self.saturate(ctx, m, &out)
    }

    fn reify(&mut self, ctx: &mut Vec<VType>, eff: &Effect, a: &VType, d: usize) -> Comp {
        let layer = self.monads.choose(self.rng).unwrap().1.clone();
        let b = ground_types().choose(self.rng).unwrap().clone();
        let inner = Effect::Mon { base: Box::new(eff.clone()), layer: layer.clone() };
        let body = self.comp(ctx, &inner, &CType::f(b.clone()), d);
        let carrier = layer.carrier_at(&b);
        let mut m = ast::reify(layer, body);
        let mut c = carrier;
        while let CType::Fun(p, r) = c {
            let v = self.value(ctx, &p, 0);
            m = ast::app(m, v);
            c = *r;
        }
        let CType::Returner(t) = c else { unreachable!("carriers end in a returner") };
        ctx.push(*t);
        let n = self.comp(ctx, eff, &CType::f(a.clone()), d);
        ctx.pop();
        ast::let_(self.name(), m, n)
    }

    fn reset(&mut self, ctx: &mut Vec<VType>, eff: &Effect, a: &VType, d: usize) -> Comp {
        let top = self.answer(a);
        let b = ground_types().choose(self.rng).unwrap().clone();
        let inner = Effect::Del { base: Box::new(eff.clone()), top: Box::new(top.clone()) };
        let body = self.comp(ctx, &inner, &CType::f(b.clone()), d);
        ctx.push(b);
        let cont = self.comp(ctx, eff, &top, d);
        ctx.pop();
        let m = ast::dollar(body, self.name(), cont);
        self.saturate(ctx, m, &top)
    }
}

struct Scoped<'r, R> {
    rng: &'r mut R,
    calc: Calculus,
    monads: Vec<(String, Rc<MonadDef>)>,
}

const LABELS: &[&str] = &["A", "B", "True", "False"];
/// Keywords are legal operation names; translations into λeff produce them.
const OPS: &[&str] = &["flip", "emit", "reflect", "shift0"];

impl<R: Rng> Scoped<'_, R> {
    fn name(&mut self) -> &'static str {
        NAMES.choose(self.rng).unwrap()
    }

    fn value(&mut self, n: usize, depth: usize) -> Value {
        let k = if depth == 0 { 3 } else { 6 };
        match self.rng.gen_range(0..k) {
            0 if n > 0 => Value::Var(self.rng.gen_range(0..n)),
            0 | 1 => Value::Unit,
            2 => {
                let label = LABELS.choose(self.rng).unwrap().to_string();
                let ty = self.rng.gen_bool(0.3).then(|| VType::variant([(label.as_str(), VType::Unit), ("Z", VType::bit())]));
                Value::Inj { label, ty, payload: Box::new(Value::Unit) }
            }
            3 => ast::pair(self.value(n, depth - 1), self.value(n, depth - 1)),
            4 => {
                let label = LABELS.choose(self.rng).unwrap().to_string();
                Value::Inj { label, ty: None, payload: Box::new(self.value(n, depth - 1)) }
            }
            _ => ast::thunk(self.comp(n, depth - 1)),
        }
    }

    fn comp(&mut self, n: usize, depth: usize) -> Comp {
        if depth == 0 {
            return match self.rng.gen_range(0..3) {
                0 => ast::ret(self.value(n, 0)),
                1 => ast::force(self.value(n, 0)),
                _ => ast::app(ast::ret(self.value(n, 0)), self.value(n, 0)),
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..13) {
            0 => ast::ret(self.value(n, d)),
            1 => ast::let_(self.name(), self.comp(n, d), self.comp(n + 1, d)),
            2 => ast::force(self.value(n, d)),
            3 => ast::lam(self.name(), self.comp(n + 1, d)),
            4 => ast::app(self.comp(n, d), self.value(n, d)),
            5 => Comp::CPair(Box::new(self.comp(n, d)), Box::new(self.comp(n, d))),
            6 => {
                let side = if self.rng.gen_bool(0.5) { Side::Left } else { Side::Right };
                Comp::Prj(side, Box::new(self.comp(n, d)))
            }
            7 => {
                let v = self.value(n, d);
                ast::split(v, self.name(), self.name(), self.comp(n + 2, d))
            }
            8 => {
                let v = self.value(n, d);
                let mut arms = BTreeMap::new();
                for l in LABELS.choose_multiple(self.rng, 2) {
                    arms.insert(l.to_string(), Arm { name: Name::new(self.name()), body: self.comp(n + 1, d) });
                }
                Comp::Case { scrutinee: v, arms, ty: None }
            }
            _ => self.extension(n, d),
        }
    }

    fn extension(&mut self, n: usize, d: usize) -> Comp {
        match self.calc {
            Calculus::Mam => ast::ret(self.value(n, d)),
            Calculus::Eff => {
                if self.rng.gen_bool(0.5) {
                    let o = OPS.choose(self.rng).unwrap();
                    return ast::op(o, self.value(n, d));
                }
                let mut clauses = BTreeMap::new();
                for o in OPS.choose_multiple(self.rng, 2) {
                    clauses.insert(o.to_string(), OpClause { param: Name::new(self.name()), cont: Name::new(self.name()), body: self.comp(n + 2, d) });
                }
                let h = Handler { ret_name: Name::new(self.name()), ret: self.comp(n + 1, d), ops: clauses };
                ast::handle(self.comp(n, d), h)
            }
            Calculus::Mon => {
                if self.rng.gen_bool(0.5) {
                    return ast::reflect(self.comp(n, d));
                }
                let layer = self.monads.choose(self.rng).unwrap().1.clone();
                ast::reify(layer, self.comp(n, d))
            }
            Calculus::Del => {
                if self.rng.gen_bool(0.5) {
                    return ast::shift0(self.name(), self.comp(n + 1, d));
                }
                ast::dollar(self.comp(n, d), self.name(), self.comp(n + 1, d))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::scope_check;
    use crate::typesys::check_program;

    #[test]
    fn generated_terms_are_closed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for calc in [Calculus::Mam, Calculus::Eff, Calculus::Mon, Calculus::Del] {
            for _ in 0..50 {
                scope_check(&scoped(calc, &mut rng, 4), 0).unwrap();
                scope_check(&well_typed(calc, &mut rng, 4).term, 0).unwrap();
            }
        }
    }

    #[test]
    fn generated_terms_typecheck() {
        for calc in [Calculus::Mam, Calculus::Eff, Calculus::Mon, Calculus::Del] {
            for (i, s) in corpus(calc, 7, 100).iter().enumerate() {
                let d = check_program(&s.term, calc)
                    .unwrap_or_else(|e| panic!("{calc} #{i}: {e}\n{}", crate::surface::print_comp(&s.term)));
                assert_eq!(d.root().ctype, CType::f(s.ty.clone()), "{calc} #{i}");
            }
        }
    }

    #[test]
    fn corpus_is_reproducible() {
        let a = corpus(Calculus::Eff, 3, 5);
        let b = corpus(Calculus::Eff, 3, 5);
        assert!(a.iter().zip(&b).all(|(x, y)| x.term == y.term));
    }

    #[test]
    fn extensions_occur() {
        let has = |calc, kw: &str| corpus(calc, 11, 100).iter().any(|s| crate::surface::print_comp(&s.term).contains(kw));
        assert!(has(Calculus::Eff, "handle"));
        assert!(has(Calculus::Mon, "reflect"));
        assert!(has(Calculus::Del, "shift0"));
    }
}
