//! Scope checking. Paths follow [`super::children`].

use super::{children, node_values, Comp, MonadDef, Value};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error, serde::Serialize)]
#[error("unbound variable #{index} at path {path:?}")]
pub struct ScopeError {
    /// Path to the innermost computation node containing the variable.
    pub path: Vec<usize>,
    pub index: usize,
}

/// Check that every variable refers to a binder, given `depth` enclosing binders.
pub fn scope_check(c: &Comp, depth: usize) -> Result<(), ScopeError> {
    let mut path = Vec::new();
    comp(c, depth, &mut path)
}

pub fn scope_check_value(v: &Value, depth: usize) -> Result<(), ScopeError> {
    let mut path = Vec::new();
    value(v, depth, &path)?;
    let mut i = 0;
    thunk_bodies(v, depth, &mut path, &mut i)
}

/// Monad bodies may mention only their own parameters.
pub fn scope_check_monad(m: &MonadDef) -> Result<(), ScopeError> {
    scope_check(&m.unit, 1)?;
    scope_check(&m.bind, 2)
}

// Variables held directly by a value, stopping at thunks.
fn value(v: &Value, depth: usize, path: &[usize]) -> Result<(), ScopeError> {
    match v {
        Value::Var(i) if *i >= depth => Err(ScopeError { path: path.to_vec(), index: *i }),
        Value::Var(_) | Value::Unit | Value::Thunk { .. } => Ok(()),
        Value::Pair(a, b) => {
            value(a, depth, path)?;
            value(b, depth, path)
        }
        Value::Inj { payload, .. } => value(payload, depth, path),
    }
}

fn thunk_bodies(v: &Value, depth: usize, path: &mut Vec<usize>, i: &mut usize) -> Result<(), ScopeError> {
    match v {
        Value::Var(_) | Value::Unit => Ok(()),
        Value::Pair(a, b) => {
            thunk_bodies(a, depth, path, i)?;
            thunk_bodies(b, depth, path, i)
        }
        Value::Inj { payload, .. } => thunk_bodies(payload, depth, path, i),
        Value::Thunk { body, .. } => {
            path.push(*i);
            *i += 1;
            let r = comp(body, depth, path);
            path.pop();
            r
        }
    }
}

fn comp(c: &Comp, depth: usize, path: &mut Vec<usize>) -> Result<(), ScopeError> {
    for v in node_values(c) {
        value(v, depth, path)?;
    }
    if let Comp::Reify { monad, .. } = c {
        scope_check_monad(monad).map_err(|e| ScopeError { path: path.clone(), index: e.index })?;
    }
    for (i, (child, extra)) in children(c).into_iter().enumerate() {
        path.push(i);
        let r = comp(child, depth + extra, path);
        path.pop();
        r?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::*;

    #[test]
    fn open_return() {
        let e = scope_check(&ret(var(0)), 0).unwrap_err();
        assert_eq!(e.path, Vec::<usize>::new());
    }

    #[test]
    fn closed_lambda() {
        assert!(scope_check(&lam("x", ret(var(0))), 0).is_ok());
    }

    #[test]
    fn path_points_inside() {
        let t = let_("x", ret(Value::Unit), lam("y", ret(var(2))));
        let e = scope_check(&t, 0).unwrap_err();
        assert_eq!(e.path, vec![1, 0]);
        assert!(scope_check(&t, 1).is_ok());
    }

    #[test]
    fn thunk_bodies_are_children() {
        let t = ret(pair(thunk(ret(Value::Unit)), thunk(ret(var(0)))));
        assert_eq!(scope_check(&t, 0).unwrap_err().path, vec![1]);
    }
}
