//! Shifting and substitution on de Bruijn terms.

use super::{Arm, Comp, Handler, OpClause, Value};

/// Rebuild a term, replacing each free variable. The callback receives the
/// variable's index relative to the term's root and the number of binders
/// crossed to reach it, and returns the value to put in its place.
fn map_free(c: &Comp, depth: usize, f: &mut dyn FnMut(usize, usize) -> Value) -> Comp {
    use Comp::*;
    macro_rules! rec {
        ($c:expr, $d:expr) => {
            Box::new(map_free($c, depth + $d, f))
        };
    }
    match c {
        Return(v) => Return(map_free_value(v, depth, f)),
        Let { bound, name, body } => Let { bound: rec!(bound, 0), name: name.clone(), body: rec!(body, 1) },
        Force(v) => Force(map_free_value(v, depth, f)),
        Lam { name, body } => Lam { name: name.clone(), body: rec!(body, 1) },
        App(m, v) => {
            let m = rec!(m, 0);
            App(m, map_free_value(v, depth, f))
        }
        CPair(a, b) => {
            let a = rec!(a, 0);
            CPair(a, rec!(b, 0))
        }
        Prj(s, m) => Prj(*s, rec!(m, 0)),
        Split { scrutinee, names, body } => {
            let scrutinee = map_free_value(scrutinee, depth, f);
            Split { scrutinee, names: names.clone(), body: rec!(body, 2) }
        }
        Case { scrutinee, arms, ty } => {
            let scrutinee = map_free_value(scrutinee, depth, f);
            let arms = arms
                .iter()
                .map(|(l, a)| (l.clone(), Arm { name: a.name.clone(), body: map_free(&a.body, depth + 1, f) }))
                .collect();
            Case { scrutinee, arms, ty: ty.clone() }
        }
        Op { op, arg } => Op { op: op.clone(), arg: map_free_value(arg, depth, f) },
        Handle { body, handler } => {
            let body = rec!(body, 0);
            let ret = map_free(&handler.ret, depth + 1, f);
            let ops = handler
                .ops
                .iter()
                .map(|(o, cl)| {
                    (
                        o.clone(),
                        OpClause { param: cl.param.clone(), cont: cl.cont.clone(), body: map_free(&cl.body, depth + 2, f) },
                    )
                })
                .collect();
            Handle { body, handler: Box::new(Handler { ret_name: handler.ret_name.clone(), ret, ops }) }
        }
        Reflect(m) => Reflect(rec!(m, 0)),
        Reify { monad, body } => Reify { monad: monad.clone(), body: rec!(body, 0) },
        Shift0 { name, body } => Shift0 { name: name.clone(), body: rec!(body, 1) },
        Dollar { body, name, cont } => {
            let body = rec!(body, 0);
            Dollar { body, name: name.clone(), cont: rec!(cont, 1) }
        }
    }
}

fn map_free_value(v: &Value, depth: usize, f: &mut dyn FnMut(usize, usize) -> Value) -> Value {
    match v {
        Value::Var(i) if *i < depth => Value::Var(*i),
        Value::Var(i) => f(*i - depth, depth),
        Value::Unit => Value::Unit,
        Value::Pair(a, b) => {
            let a = map_free_value(a, depth, f);
            Value::Pair(Box::new(a), Box::new(map_free_value(b, depth, f)))
        }
        Value::Inj { label, ty, payload } => Value::Inj {
            label: label.clone(),
            ty: ty.clone(),
            payload: Box::new(map_free_value(payload, depth, f)),
        },
        Value::Thunk { effect, body } => Value::Thunk { effect: effect.clone(), body: Box::new(map_free(body, depth, f)) },
    }
}

/// Add `by` to every free variable with index at least `cutoff`.
pub fn shift(c: &Comp, by: usize, cutoff: usize) -> Comp {
    if by == 0 {
        return c.clone();
    }
    map_free(c, 0, &mut |j, d| Value::Var(if j >= cutoff { j + by + d } else { j + d }))
}

pub fn shift_value(v: &Value, by: usize, cutoff: usize) -> Value {
    if by == 0 {
        return v.clone();
    }
    map_free_value(v, 0, &mut |j, d| Value::Var(if j >= cutoff { j + by + d } else { j + d }))
}

/// General renaming of free variables: free index `j` becomes `f(j)`.
pub fn reindex(c: &Comp, f: &dyn Fn(usize) -> usize) -> Comp {
    map_free(c, 0, &mut |j, d| Value::Var(f(j) + d))
}

pub fn reindex_value(v: &Value, f: &dyn Fn(usize) -> usize) -> Value {
    map_free_value(v, 0, &mut |j, d| Value::Var(f(j) + d))
}

/// Substitute `vals[j]` for free variable `j` (for `j < vals.len()`) and
/// lower the remaining free variables by `vals.len()`. The values live in
/// the scope outside the removed binders.
pub fn subst_many(c: &Comp, vals: &[Value]) -> Comp {
    let n = vals.len();
    map_free(c, 0, &mut |j, d| if j < n { shift_value(&vals[j], d, 0) } else { Value::Var(j - n + d) })
}

pub fn subst_many_value(v: &Value, vals: &[Value]) -> Value {
    let n = vals.len();
    map_free_value(v, 0, &mut |j, d| if j < n { shift_value(&vals[j], d, 0) } else { Value::Var(j - n + d) })
}

/// Instantiate the innermost binder of a body with `v`.
pub fn instantiate(body: &Comp, v: &Value) -> Comp {
    subst_many(body, std::slice::from_ref(v))
}

pub fn instantiate_value(body: &Value, v: &Value) -> Value {
    subst_many_value(body, std::slice::from_ref(v))
}

/// Replace free variable `which` with `replacement`, leaving the binder
/// structure (and all other indices) unchanged. `replacement` is interpreted
/// in the term's own ambient scope.
pub fn subst_value_in(target: &Comp, replacement: &Value, which: usize) -> Comp {
    map_free(target, 0, &mut |j, d| if j == which { shift_value(replacement, d, 0) } else { Value::Var(j + d) })
}

pub fn subst_value_in_value(target: &Value, replacement: &Value, which: usize) -> Value {
    map_free_value(target, 0, &mut |j, d| if j == which { shift_value(replacement, d, 0) } else { Value::Var(j + d) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::*;

    fn not() -> Value {
        thunk(lam("x", case(var(0), vec![("False", "_", ret(tru())), ("True", "_", ret(fls()))])))
    }

    #[test]
    fn let_beta() {
        assert_eq!(instantiate(&ret(var(0)), &Value::Unit), ret(Value::Unit));
    }

    #[test]
    fn under_shadowing_binder() {
        let t = lam("x", ret(var(0)));
        assert_eq!(subst_value_in(&t, &Value::Unit, 0), t);
        assert_eq!(instantiate(&t, &Value::Unit), t);
    }

    #[test]
    fn not_tru() {
        // x := tru into (force not) x
        let body = app(force(not()), var(0));
        assert_eq!(instantiate(&body, &tru()), app(force(not()), tru()));
    }

    #[test]
    fn shifting_avoids_capture() {
        // (λy. return x)[z/x] where z is free index 3 outside
        let t = lam("y", ret(pair(var(1), var(0))));
        let r = instantiate(&t, &var(3));
        assert_eq!(r, lam("y", ret(pair(var(4), var(0)))));
    }

    #[test]
    fn subst_many_order() {
        let t = ret(pair(var(0), pair(var(1), var(2))));
        let r = subst_many(&t, &[tru(), fls()]);
        assert_eq!(r, ret(pair(tru(), pair(fls(), var(0)))));
    }

    #[test]
    fn shift_respects_cutoff() {
        let t = ret(pair(var(0), var(1)));
        assert_eq!(shift(&t, 2, 1), ret(pair(var(0), var(3))));
    }
}
