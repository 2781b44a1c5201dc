//! The handler that lets a computation with fewer operations run where more
//! are available: it re-raises everything it catches.

use std::collections::BTreeMap;

use super::XlateError;
use crate::ast::{app, force, let_, op, ret, var, Handler, Name, OpClause};
use crate::typesys::types::{Effect, HandlerType, VType};

/// `{ return x -> return x | op(p; k) -> let r <- op! p in force k r }` for
/// every operation of `from`, typed `A ! from => F A ! to`.
pub fn coercion_handler(from: &Effect, to: &Effect, a: &VType) -> Result<(Handler, HandlerType), XlateError> {
    let sigs = |e: &Effect| match e {
        Effect::Pure => Ok(BTreeMap::new()),
        Effect::Ops(m) => Ok(m.clone()),
        other => Err(XlateError::NotIncluded(format!("{} is not an operation effect", crate::surface::print_effect(other)))),
    };
    let (f, t) = (sigs(from)?, sigs(to)?);
    let mut ops = BTreeMap::new();
    for (o, s) in &f {
        match t.get(o) {
            Some(s2) if s2 == s => {}
            Some(_) => return Err(XlateError::NotIncluded(format!("`{o}` has a different signature in the target"))),
            None => return Err(XlateError::NotIncluded(format!("`{o}` is missing from the target"))),
        }
        let body = let_("r", op(o, var(1)), app(force(var(1)), var(0)));
        ops.insert(o.clone(), OpClause { param: Name::new("p"), cont: Name::new("k"), body });
    }
    let h = Handler { ret_name: Name::new("x"), ret: ret(var(0)), ops };
    let ty = HandlerType {
        input: a.clone(),
        in_effect: from.clone(),
        output: crate::typesys::types::CType::f(a.clone()),
        out_effect: to.clone(),
    };
    Ok((h, ty))
}
