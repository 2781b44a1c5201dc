//! Types, kinding and type-and-effect checking for all four calculi.

mod check;
mod kind;
pub mod types;

use serde::Serialize;

pub use check::{CompInfo, Derivation};
pub(crate) use check::{beta_name, monad_judgement};
pub use kind::{kind_check_ctype, kind_check_effect, kind_check_handler_type, kind_check_vtype};

use crate::ast::{Calculus, Comp, Handler, MonadDef, Value};
use crate::surface::{Ascription, DefBody, SourceFile};
use check::Checker;
use types::{CType, Effect, HandlerType, VType};

/// Typing context: type variables in scope and the types of de Bruijn
/// variables, outermost first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Env {
    pub tyvars: Vec<String>,
    pub vars: Vec<VType>,
}

impl Env {
    pub fn empty() -> Env {
        Env::default()
    }

    pub fn with_vars(vars: Vec<VType>) -> Env {
        Env { tyvars: Vec::new(), vars }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    Mismatch,
    OpSetMismatch,
    LayerMismatch,
    EmptyStack,
    NotAvailable,
    Unbound,
    IllKindedLayer,
    MissingAnnotation,
    Undetermined,
}

/// A type error located at the computation node reached by `path`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{message}")]
pub struct TypeError {
    pub path: Vec<usize>,
    pub kind: ErrorKind,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actual: Option<String>,
}

impl TypeError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> TypeError {
        TypeError { path: Vec::new(), kind, message: message.into(), expected: None, actual: None }
    }
}

fn tag_check(m: &Comp, calc: Calculus) -> Result<(), TypeError> {
    crate::ast::check_tag(m, calc).map_err(|e| TypeError::new(ErrorKind::NotAvailable, e.to_string()))
}

fn derive(
    calc: Calculus,
    env: &Env,
    m: &Comp,
    f: impl FnOnce(&mut Checker, &[VType]) -> Result<(Effect, CType), TypeError>,
) -> Result<Derivation, TypeError> {
    tag_check(m, calc)?;
    let mut ck = Checker::new(calc);
    ck.set_rigid(env.tyvars.clone());
    let mut vars = Vec::new();
    for t in &env.vars {
        vars.push(ck.import_value_type(t)?);
    }
    let (eff, cty) = f(&mut ck, &vars)?;
    let mut path = Vec::new();
    let term = ck.check(m, &vars, &eff, &cty, &mut path)?;
    ck.finish()?;
    let term = ck.zonk_comp(&term);
    let info = ck.take_info();
    let vars = vars.iter().map(|t| ck.zonk_v(t)).collect();
    Ok(Derivation { calculus: calc, env: Env { tyvars: env.tyvars.clone(), vars }, term, info })
}

/// Check `m` against an effect and computation type. Holes in either are
/// inferred.
pub fn check_comp(m: &Comp, env: &Env, effect: &Effect, expected: &CType, calc: Calculus) -> Result<Derivation, TypeError> {
    derive(calc, env, m, |ck, _| Ok((ck.import_effect(effect)?, ck.import_comp_type(expected)?)))
}

/// Infer the effect and type of `m`.
pub fn infer_comp(m: &Comp, env: &Env, calc: Calculus) -> Result<Derivation, TypeError> {
    derive(calc, env, m, |ck, _| Ok((ck.fresh_effect(), ck.fresh_ctype())))
}

/// Type a whole program: closed, with no effects left over.
pub fn check_program(m: &Comp, calc: Calculus) -> Result<Derivation, TypeError> {
    derive(calc, &Env::empty(), m, |ck, _| Ok((Effect::Pure, ck.fresh_ctype())))
}

/// Infer the type of a value. The derivation is for `return v`.
pub fn infer_value(v: &Value, env: &Env, calc: Calculus) -> Result<(VType, Derivation), TypeError> {
    let d = infer_comp(&Comp::Return(v.clone()), env, calc)?;
    match &d.root().ctype {
        CType::Returner(a) => Ok(((**a).clone(), d)),
        _ => unreachable!("return always has a returner type"),
    }
}

/// Check a value against a (possibly partial) type.
pub fn check_value(v: &Value, env: &Env, ty: &VType, calc: Calculus) -> Result<(VType, Derivation), TypeError> {
    let d = derive(calc, env, &Comp::Return(v.clone()), |ck, _| {
        let t = ck.import_value_type(ty)?;
        Ok((ck.fresh_effect(), CType::f(t)))
    })?;
    match &d.root().ctype {
        CType::Returner(a) => Ok(((**a).clone(), d)),
        _ => unreachable!("return always has a returner type"),
    }
}

/// Type a standalone handler, optionally against an ascription.
pub fn check_handler(
    h: &Handler,
    env: &Env,
    expected: Option<&HandlerType>,
    calc: Calculus,
) -> Result<(Handler, HandlerType), TypeError> {
    if calc != Calculus::Eff {
        return Err(TypeError::new(ErrorKind::NotAvailable, format!("handle not available in {calc}")));
    }
    let probe = Comp::Handle { body: Box::new(Comp::Return(Value::Unit)), handler: Box::new(h.clone()) };
    tag_check(&probe, calc)?;
    let mut ck = Checker::new(calc);
    ck.set_rigid(env.tyvars.clone());
    let mut vars = Vec::new();
    for t in &env.vars {
        vars.push(ck.import_value_type(t)?);
    }
    let (h2, ht) = ck.handler(h, &vars, &mut Vec::new())?;
    if let Some(exp) = expected {
        ck.unify_handler_type(&[], exp, &ht)?;
    }
    ck.finish()?;
    let ht = HandlerType {
        input: ck.zonk_v(&ht.input),
        in_effect: ck.zonk_e(&ht.in_effect),
        output: ck.zonk_c(&ht.output),
        out_effect: ck.zonk_e(&ht.out_effect),
    };
    Ok((ck.zonk_handler(&h2), ht))
}

/// Derivations for a monad's unit and bind over `base`.
#[derive(Clone, Debug)]
pub struct MonadDerivation {
    pub beta: String,
    pub unit: Derivation,
    pub bind: Derivation,
}

pub fn check_monad(m: &MonadDef, base: &Effect) -> Result<MonadDerivation, TypeError> {
    let (unit_env, unit_ty, bind_env, bind_ty) = monad_judgement(m, base).map_err(|e| TypeError::new(ErrorKind::IllKindedLayer, e))?;
    let beta = beta_name(m);
    let tyvars = vec![m.tyvar.clone(), beta.clone()];
    let unit = check_comp(&m.unit, &Env { tyvars: tyvars.clone(), vars: unit_env }, base, &unit_ty, Calculus::Mon)?;
    let bind = check_comp(&m.bind, &Env { tyvars, vars: bind_env }, base, &bind_ty, Calculus::Mon)?;
    Ok(MonadDerivation { beta, unit, bind })
}

/// The type of a top-level definition.
#[derive(Clone, Debug, PartialEq)]
pub enum DefType {
    Value(VType),
    Handler(HandlerType),
}

/// Types of every definition in a file, and the derivation for `main`.
#[derive(Clone, Debug)]
pub struct FileTypes {
    pub defs: Vec<(String, DefType)>,
    pub main: Option<Derivation>,
}

impl FileTypes {
    pub fn def(&self, name: &str) -> Option<&DefType> {
        self.defs.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

/// A type error in a named part of a file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("in {item}: {error}")]
pub struct FileTypeError {
    pub item: String,
    pub error: TypeError,
}

pub fn check_file(file: &SourceFile) -> Result<FileTypes, FileTypeError> {
    let calc = file.calculus;
    let mut defs = Vec::new();
    for d in &file.definitions {
        let at = |error| FileTypeError { item: d.name.clone(), error };
        let ty = match (&d.body, &d.ascription) {
            (DefBody::Value(v), None) => DefType::Value(infer_value(v, &Env::empty(), calc).map_err(at)?.0),
            (DefBody::Value(v), Some(Ascription::Value(t))) => {
                DefType::Value(check_value(v, &Env::empty(), t, calc).map_err(at)?.0)
            }
            (DefBody::Handler(h), a) => {
                let exp = match a {
                    Some(Ascription::Handler(t)) => Some(t),
                    _ => None,
                };
                DefType::Handler(check_handler(h, &Env::empty(), exp, calc).map_err(at)?.1)
            }
            (DefBody::Value(_), Some(Ascription::Handler(_))) => {
                return Err(at(TypeError::new(ErrorKind::Mismatch, "a value cannot have a handler type")))
            }
        };
        defs.push((d.name.clone(), ty));
    }
    let main = match &file.main {
        Some(m) => Some(check_program(m, calc).map_err(|error| FileTypeError { item: "main".into(), error })?),
        None => None,
    };
    Ok(FileTypes { defs, main })
}
