//! Administrative normalisation: contracting the suspended redexes the
//! translations leave behind, anywhere in a term.
//!
//! The redexes are `force (thunk M)` and `(fun x -> M) y` with `y` a
//! variable, so together they cover `force (thunk fun x -> M) y`. Neither
//! duplicates or grows a term, so contraction terminates, and substituting
//! a variable never creates a new redex.

use std::collections::BTreeMap;

use crate::ast::{instantiate, Arm, Comp, Handler, OpClause, Value};

/// Contract every administrative redex.
pub fn admin_normalize(c: &Comp) -> Comp {
    admin_normalize_counted(c).0
}

/// The normal form and the number of contractions performed.
pub fn admin_normalize_counted(c: &Comp) -> (Comp, usize) {
    let mut n = 0;
    let out = norm(c, &mut n);
    (out, n)
}

fn norm(c: &Comp, n: &mut usize) -> Comp {
    use Comp::*;
    let b = |c: &Comp, n: &mut usize| Box::new(norm(c, n));
    let out = match c {
        Return(v) => Return(norm_value(v, n)),
        Force(v) => Force(norm_value(v, n)),
        Let { bound, name, body } => Let { bound: b(bound, n), name: name.clone(), body: b(body, n) },
        Lam { name, body } => Lam { name: name.clone(), body: b(body, n) },
        App(m, v) => {
            let m = b(m, n);
            App(m, norm_value(v, n))
        }
        CPair(x, y) => {
            let x = b(x, n);
            CPair(x, b(y, n))
        }
        Prj(s, m) => Prj(*s, b(m, n)),
        Split { scrutinee, names, body } => {
            Split { scrutinee: norm_value(scrutinee, n), names: names.clone(), body: b(body, n) }
        }
        Case { scrutinee, arms, ty } => Case {
            scrutinee: norm_value(scrutinee, n),
            arms: arms.iter().map(|(l, a)| (l.clone(), Arm { name: a.name.clone(), body: norm(&a.body, n) })).collect(),
            ty: ty.clone(),
        },
        Op { op, arg } => Op { op: op.clone(), arg: norm_value(arg, n) },
        Handle { body, handler } => {
            let body = b(body, n);
            let ret = norm(&handler.ret, n);
            let ops: BTreeMap<_, _> = handler
                .ops
                .iter()
                .map(|(o, cl)| (o.clone(), OpClause { param: cl.param.clone(), cont: cl.cont.clone(), body: norm(&cl.body, n) }))
                .collect();
            Handle { body, handler: Box::new(Handler { ret_name: handler.ret_name.clone(), ret, ops }) }
        }
        Reflect(m) => Reflect(b(m, n)),
        Reify { monad, body } => Reify { monad: monad.clone(), body: b(body, n) },
        Shift0 { name, body } => Shift0 { name: name.clone(), body: b(body, n) },
        Dollar { body, name, cont } => {
            let body = b(body, n);
            Dollar { body, name: name.clone(), cont: b(cont, n) }
        }
    };
    contract_root(out, n)
}

fn contract_root(mut c: Comp, n: &mut usize) -> Comp {
    loop {
        c = match c {
            Comp::Force(Value::Thunk { body, .. }) => *body,
            Comp::App(m, Value::Var(y)) if matches!(*m, Comp::Lam { .. }) => match *m {
                Comp::Lam { body, .. } => instantiate(&body, &Value::Var(y)),
                _ => unreachable!(),
            },
            other => return other,
        };
        *n += 1;
    }
}

fn norm_value(v: &Value, n: &mut usize) -> Value {
    match v {
        Value::Var(_) | Value::Unit => v.clone(),
        Value::Pair(a, b) => Value::Pair(Box::new(norm_value(a, n)), Box::new(norm_value(b, n))),
        Value::Inj { label, ty, payload } => {
            Value::Inj { label: label.clone(), ty: ty.clone(), payload: Box::new(norm_value(payload, n)) }
        }
        Value::Thunk { effect, body } => Value::Thunk { effect: effect.clone(), body: Box::new(norm(body, n)) },
    }
}

/// One leftmost-outermost contraction, if any. Used to check that the
/// normal form does not depend on the order of contraction.
#[cfg(test)]
pub(super) fn admin_step(c: &Comp) -> Option<Comp> {
    use Comp::*;
    match c {
        Force(Value::Thunk { body, .. }) => return Some((**body).clone()),
        App(m, Value::Var(y)) => {
            if let Lam { body, .. } = &**m {
                return Some(instantiate(body, &Value::Var(*y)));
            }
        }
        _ => {}
    }
    let mut done = false;
    let rebuilt = crate::ast::map_children(c, &mut |ch: &Comp| {
        if !done {
            if let Some(x) = admin_step(ch) {
                done = true;
                return x;
            }
        }
        ch.clone()
    });
    done.then_some(rebuilt)
}
