//! Type-and-effect checking by unification. Annotations are optional; the
//! checker fills them in and records the type of every computation node,
//! producing a [`Derivation`].

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use super::types::{CType, Effect, HandlerType, OpSig, VType};
use super::{Env, ErrorKind, TypeError};
use crate::ast::{Arm, Calculus, Comp, Handler, MonadDef, OpClause, Value};
use crate::surface::{print_ctype, print_effect, print_vtype};

/// Effect and type of one computation node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompInfo {
    pub effect: Effect,
    pub ctype: CType,
}

/// A typing derivation in Church style: the term with every annotation
/// filled in, plus the judgement at every computation node, keyed by path.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub calculus: Calculus,
    pub env: Env,
    pub term: Comp,
    pub info: HashMap<Vec<usize>, CompInfo>,
}

impl Derivation {
    pub fn root(&self) -> &CompInfo {
        &self.info[&Vec::new()]
    }

    pub fn at(&self, path: &[usize]) -> &CompInfo {
        self.info.get(path).unwrap_or_else(|| panic!("no typing recorded at {path:?}"))
    }
}

enum Obligation {
    OpMember { path: Vec<usize>, effect: Effect, op: String, param: VType, result: VType },
    Inj { path: Vec<usize>, ty: VType, label: String, payload: VType },
    Reflect { path: Vec<usize>, effect: Effect, a: VType, base: Effect, body: CType },
}

type R<T> = Result<T, TypeError>;

pub(super) struct Checker {
    calc: Calculus,
    vmetas: Vec<Option<VType>>,
    cmetas: Vec<Option<CType>>,
    emetas: Vec<Option<Effect>>,
    pending: Vec<Obligation>,
    info: Vec<(Vec<usize>, Effect, CType)>,
    record: bool,
    rigid: Vec<String>,
    layers_ok: Vec<(Rc<MonadDef>, Effect)>,
}

fn err(path: &[usize], kind: ErrorKind, msg: impl Into<String>) -> TypeError {
    TypeError { path: path.to_vec(), kind, message: msg.into(), expected: None, actual: None }
}

impl Checker {
    pub fn new(calc: Calculus) -> Checker {
        Checker {
            calc,
            vmetas: Vec::new(),
            cmetas: Vec::new(),
            emetas: Vec::new(),
            pending: Vec::new(),
            info: Vec::new(),
            record: true,
            rigid: Vec::new(),
            layers_ok: Vec::new(),
        }
    }

    fn fresh_v(&mut self) -> VType {
        self.vmetas.push(None);
        VType::Meta(self.vmetas.len() as u32 - 1)
    }

    fn fresh_c(&mut self) -> CType {
        self.cmetas.push(None);
        CType::Meta(self.cmetas.len() as u32 - 1)
    }

    fn fresh_e(&mut self) -> Effect {
        self.emetas.push(None);
        Effect::Meta(self.emetas.len() as u32 - 1)
    }

    // ------------------------------------------------------------ resolving

    fn shallow_v(&self, t: &VType) -> VType {
        let mut t = t.clone();
        while let VType::Meta(i) = t {
            match &self.vmetas[i as usize] {
                Some(u) => t = u.clone(),
                None => break,
            }
        }
        t
    }

    fn shallow_c(&self, t: &CType) -> CType {
        let mut t = t.clone();
        while let CType::Meta(i) = t {
            match &self.cmetas[i as usize] {
                Some(u) => t = u.clone(),
                None => break,
            }
        }
        t
    }

    fn shallow_e(&self, e: &Effect) -> Effect {
        let mut e = e.clone();
        while let Effect::Meta(i) = e {
            match &self.emetas[i as usize] {
                Some(u) => e = u.clone(),
                None => break,
            }
        }
        e
    }

    /// Fully resolve, leaving unsolved metas in place.
    pub fn zonk_v(&self, t: &VType) -> VType {
        match self.shallow_v(t) {
            VType::Prod(a, b) => VType::prod(self.zonk_v(&a), self.zonk_v(&b)),
            VType::Variant(m) => VType::Variant(m.iter().map(|(l, t)| (l.clone(), self.zonk_v(t))).collect()),
            VType::Thunk(e, c) => VType::thunk(self.zonk_e(&e), self.zonk_c(&c)),
            t => t,
        }
    }

    pub fn zonk_c(&self, t: &CType) -> CType {
        match self.shallow_c(t) {
            CType::Returner(a) => CType::f(self.zonk_v(&a)),
            CType::Fun(a, c) => CType::fun(self.zonk_v(&a), self.zonk_c(&c)),
            CType::Prod(a, b) => CType::prod(self.zonk_c(&a), self.zonk_c(&b)),
            t => t,
        }
    }

    pub fn zonk_e(&self, e: &Effect) -> Effect {
        match self.shallow_e(e) {
            Effect::Ops(m) => Effect::Ops(
                m.iter()
                    .map(|(o, s)| (o.clone(), OpSig { param: self.zonk_v(&s.param), result: self.zonk_v(&s.result) }))
                    .collect(),
            ),
            Effect::Mon { base, layer } => Effect::Mon { base: Box::new(self.zonk_e(&base)), layer },
            Effect::Del { base, top } => Effect::Del { base: Box::new(self.zonk_e(&base)), top: Box::new(self.zonk_c(&top)) },
            e => e,
        }
    }

    fn bind_defaults(&mut self) {
        for i in 0..self.vmetas.len() {
            if self.vmetas[i].is_none() {
                self.vmetas[i] = Some(VType::Unit);
            }
        }
        for i in 0..self.cmetas.len() {
            if self.cmetas[i].is_none() {
                self.cmetas[i] = Some(CType::f(VType::Unit));
            }
        }
        for i in 0..self.emetas.len() {
            if self.emetas[i].is_none() {
                self.emetas[i] = Some(Effect::Pure);
            }
        }
    }

    // --------------------------------------------------------------- occurs

    fn occurs_v(&self, m: Meta, t: &VType) -> bool {
        match self.shallow_v(t) {
            VType::Meta(i) => m == Meta::V(i),
            VType::Prod(a, b) => self.occurs_v(m, &a) || self.occurs_v(m, &b),
            VType::Variant(x) => x.values().any(|t| self.occurs_v(m, t)),
            VType::Thunk(e, c) => self.occurs_e(m, &e) || self.occurs_c(m, &c),
            _ => false,
        }
    }

    fn occurs_c(&self, m: Meta, t: &CType) -> bool {
        match self.shallow_c(t) {
            CType::Meta(i) => m == Meta::C(i),
            CType::Returner(a) => self.occurs_v(m, &a),
            CType::Fun(a, c) => self.occurs_v(m, &a) || self.occurs_c(m, &c),
            CType::Prod(a, b) => self.occurs_c(m, &a) || self.occurs_c(m, &b),
            CType::Hole => false,
        }
    }

    fn occurs_e(&self, m: Meta, e: &Effect) -> bool {
        match self.shallow_e(e) {
            Effect::Meta(i) => m == Meta::E(i),
            Effect::Pure => false,
            Effect::Ops(x) => x.values().any(|s| self.occurs_v(m, &s.param) || self.occurs_v(m, &s.result)),
            Effect::Mon { base, .. } => self.occurs_e(m, &base),
            Effect::Del { base, top } => self.occurs_e(m, &base) || self.occurs_c(m, &top),
        }
    }

    // ---------------------------------------------------------- unification

    fn unify_v(&mut self, a: &VType, b: &VType) -> Result<(), ()> {
        let (a, b) = (self.shallow_v(a), self.shallow_v(b));
        match (a, b) {
            (VType::Meta(i), VType::Meta(j)) if i == j => Ok(()),
            (VType::Meta(i), t) | (t, VType::Meta(i)) => {
                if self.occurs_v(Meta::V(i), &t) {
                    return Err(());
                }
                self.vmetas[i as usize] = Some(t);
                Ok(())
            }
            (VType::Var(x), VType::Var(y)) if x == y => Ok(()),
            (VType::Unit, VType::Unit) => Ok(()),
            (VType::Prod(a1, b1), VType::Prod(a2, b2)) => {
                self.unify_v(&a1, &a2)?;
                self.unify_v(&b1, &b2)
            }
            (VType::Variant(m1), VType::Variant(m2)) => {
                if !m1.keys().eq(m2.keys()) {
                    return Err(());
                }
                for (t1, t2) in m1.values().zip(m2.values()) {
                    self.unify_v(t1, t2)?;
                }
                Ok(())
            }
            (VType::Thunk(e1, c1), VType::Thunk(e2, c2)) => {
                self.unify_e(&e1, &e2)?;
                self.unify_c(&c1, &c2)
            }
            _ => Err(()),
        }
    }

    fn unify_c(&mut self, a: &CType, b: &CType) -> Result<(), ()> {
        let (a, b) = (self.shallow_c(a), self.shallow_c(b));
        match (a, b) {
            (CType::Meta(i), CType::Meta(j)) if i == j => Ok(()),
            (CType::Meta(i), t) | (t, CType::Meta(i)) => {
                if self.occurs_c(Meta::C(i), &t) {
                    return Err(());
                }
                self.cmetas[i as usize] = Some(t);
                Ok(())
            }
            (CType::Returner(a1), CType::Returner(a2)) => self.unify_v(&a1, &a2),
            (CType::Fun(a1, c1), CType::Fun(a2, c2)) => {
                self.unify_v(&a1, &a2)?;
                self.unify_c(&c1, &c2)
            }
            (CType::Prod(a1, b1), CType::Prod(a2, b2)) => {
                self.unify_c(&a1, &a2)?;
                self.unify_c(&b1, &b2)
            }
            _ => Err(()),
        }
    }

    fn unify_e(&mut self, a: &Effect, b: &Effect) -> Result<(), ()> {
        let (a, b) = (self.shallow_e(a), self.shallow_e(b));
        match (a, b) {
            (Effect::Meta(i), Effect::Meta(j)) if i == j => Ok(()),
            (Effect::Meta(i), e) | (e, Effect::Meta(i)) => {
                if self.occurs_e(Meta::E(i), &e) {
                    return Err(());
                }
                self.emetas[i as usize] = Some(e);
                Ok(())
            }
            (Effect::Pure, Effect::Pure) => Ok(()),
            (Effect::Ops(m1), Effect::Ops(m2)) => {
                if !m1.keys().eq(m2.keys()) {
                    return Err(());
                }
                for (s1, s2) in m1.values().zip(m2.values()) {
                    self.unify_v(&s1.param, &s2.param)?;
                    self.unify_v(&s1.result, &s2.result)?;
                }
                Ok(())
            }
            (Effect::Mon { base: b1, layer: l1 }, Effect::Mon { base: b2, layer: l2 }) => {
                if l1 != l2 {
                    return Err(());
                }
                self.unify_e(&b1, &b2)
            }
            (Effect::Del { base: b1, top: t1 }, Effect::Del { base: b2, top: t2 }) => {
                self.unify_c(&t1, &t2)?;
                self.unify_e(&b1, &b2)
            }
            _ => Err(()),
        }
    }

    fn mismatch(&self, path: &[usize], what: &str, expected: String, actual: String) -> TypeError {
        TypeError {
            path: path.to_vec(),
            kind: ErrorKind::Mismatch,
            message: format!("{what} mismatch: expected {expected}, found {actual}"),
            expected: Some(expected),
            actual: Some(actual),
        }
    }

    fn eq_v(&mut self, path: &[usize], expected: &VType, actual: &VType) -> R<()> {
        self.unify_v(expected, actual).map_err(|_| {
            let (e, a) = (self.zonk_v(expected), self.zonk_v(actual));
            let mut te = self.mismatch(path, "type", print_vtype(&e), print_vtype(&a));
            te.kind = conflict_v(&e, &a).unwrap_or(ErrorKind::Mismatch);
            te
        })
    }

    fn eq_c(&mut self, path: &[usize], expected: &CType, actual: &CType) -> R<()> {
        self.unify_c(expected, actual).map_err(|_| {
            let (e, a) = (self.zonk_c(expected), self.zonk_c(actual));
            let mut te = self.mismatch(path, "type", print_ctype(&e), print_ctype(&a));
            te.kind = conflict_c(&e, &a).unwrap_or(ErrorKind::Mismatch);
            te
        })
    }

    fn eq_e(&mut self, path: &[usize], expected: &Effect, actual: &Effect) -> R<()> {
        self.unify_e(expected, actual).map_err(|_| {
            let (e, a) = (self.zonk_e(expected), self.zonk_e(actual));
            let mut te = self.mismatch(path, "effect", print_effect(&e), print_effect(&a));
            te.kind = conflict_e(&e, &a).unwrap_or(ErrorKind::Mismatch);
            te
        })
    }

    // ------------------------------------------------------------ importing

    /// Turn a type annotation into a checker type: holes become unknowns,
    /// and type variables not in scope (left behind when a monad body is
    /// instantiated during evaluation) are treated as unknowns too.
    fn import_v(&mut self, path: &[usize], t: &VType) -> R<VType> {
        Ok(match t {
            VType::Hole => self.fresh_v(),
            VType::Var(n) if !self.rigid.contains(n) => self.fresh_v(),
            VType::Prod(a, b) => VType::prod(self.import_v(path, a)?, self.import_v(path, b)?),
            VType::Variant(m) => {
                let mut out = BTreeMap::new();
                for (l, t) in m {
                    out.insert(l.clone(), self.import_v(path, t)?);
                }
                VType::Variant(out)
            }
            VType::Thunk(e, c) => VType::thunk(self.import_e(path, e)?, self.import_c(path, c)?),
            t => t.clone(),
        })
    }

    fn import_c(&mut self, path: &[usize], t: &CType) -> R<CType> {
        Ok(match t {
            CType::Hole => self.fresh_c(),
            CType::Returner(a) => CType::f(self.import_v(path, a)?),
            CType::Fun(a, c) => CType::fun(self.import_v(path, a)?, self.import_c(path, c)?),
            CType::Prod(a, b) => CType::prod(self.import_c(path, a)?, self.import_c(path, b)?),
            CType::Meta(_) => t.clone(),
        })
    }

    fn import_e(&mut self, path: &[usize], e: &Effect) -> R<Effect> {
        Ok(match e {
            Effect::Pure | Effect::Meta(_) => e.clone(),
            Effect::Ops(m) => {
                if self.calc != Calculus::Eff {
                    return Err(err(path, ErrorKind::NotAvailable, format!("operation effects not available in {}", self.calc)));
                }
                let mut out = BTreeMap::new();
                for (o, s) in m {
                    out.insert(o.clone(), OpSig { param: self.import_v(path, &s.param)?, result: self.import_v(path, &s.result)? });
                }
                Effect::Ops(out)
            }
            Effect::Mon { base, layer } => {
                if self.calc != Calculus::Mon {
                    return Err(err(path, ErrorKind::NotAvailable, format!("monad layers not available in {}", self.calc)));
                }
                let base = self.import_e(path, base)?;
                self.check_layer(path, layer, &base)?;
                Effect::Mon { base: Box::new(base), layer: layer.clone() }
            }
            Effect::Del { base, top } => {
                if self.calc != Calculus::Del {
                    return Err(err(path, ErrorKind::NotAvailable, format!("answer-type stacks not available in {}", self.calc)));
                }
                Effect::Del { base: Box::new(self.import_e(path, base)?), top: Box::new(self.import_c(path, top)?) }
            }
        })
    }

    // ------------------------------------------------------------ obligations

    fn obligation(&mut self, ob: Obligation) -> R<()> {
        if let Some(ob) = self.discharge(ob)? {
            self.pending.push(ob);
        }
        Ok(())
    }

    /// Try to discharge; `Ok(Some(_))` means not yet decidable.
    fn discharge(&mut self, ob: Obligation) -> R<Option<Obligation>> {
        match ob {
            Obligation::OpMember { path, effect, op, param, result } => match self.shallow_e(&effect) {
                Effect::Meta(_) => Ok(Some(Obligation::OpMember { path, effect, op, param, result })),
                Effect::Ops(m) => match m.get(&op) {
                    Some(sig) => {
                        let sig = sig.clone();
                        self.eq_v(&path, &sig.param, &param)?;
                        self.eq_v(&path, &sig.result, &result)?;
                        Ok(None)
                    }
                    None => Err(err(
                        &path,
                        ErrorKind::OpSetMismatch,
                        format!("operation `{op}` is not in the effect {}", print_effect(&self.zonk_e(&effect))),
                    )),
                },
                Effect::Pure => Err(err(&path, ErrorKind::OpSetMismatch, format!("operation `{op}` performed where no effects are allowed"))),
                e => Err(err(&path, ErrorKind::OpSetMismatch, format!("operation `{op}` performed at effect {}", print_effect(&self.zonk_e(&e))))),
            },
            Obligation::Inj { path, ty, label, payload } => match self.shallow_v(&ty) {
                VType::Meta(_) => Ok(Some(Obligation::Inj { path, ty, label, payload })),
                VType::Variant(m) => match m.get(&label) {
                    Some(t) => {
                        let t = t.clone();
                        self.eq_v(&path, &t, &payload)?;
                        Ok(None)
                    }
                    None => Err(err(
                        &path,
                        ErrorKind::Mismatch,
                        format!("label `{label}` is not in the variant {}", print_vtype(&self.zonk_v(&ty))),
                    )),
                },
                t => Err(err(&path, ErrorKind::Mismatch, format!("injection `{label}` at non-variant type {}", print_vtype(&self.zonk_v(&t))))),
            },
            Obligation::Reflect { path, effect, a, base, body } => match self.shallow_e(&effect) {
                Effect::Meta(_) => Ok(Some(Obligation::Reflect { path, effect, a, base, body })),
                Effect::Mon { base: b, layer } => {
                    self.eq_e(&path, &b, &base)?;
                    self.check_layer(&path, &layer, &b)?;
                    let carrier = layer.carrier_at(&a);
                    self.eq_c(&path, &carrier, &body)?;
                    Ok(None)
                }
                e => Err(err(&path, ErrorKind::LayerMismatch, format!("reflect at effect {} which has no monad layer", print_effect(&self.zonk_e(&e))))),
            },
        }
    }

    fn solve(&mut self) -> R<()> {
        loop {
            let before = self.pending.len();
            let mut progress = false;
            for ob in std::mem::take(&mut self.pending) {
                match self.discharge(ob)? {
                    Some(ob) => self.pending.push(ob),
                    None => progress = true,
                }
            }
            if !progress || self.pending.is_empty() {
                debug_assert!(self.pending.len() <= before);
                return Ok(());
            }
        }
    }

    /// Solve, default what can be defaulted, and report what cannot.
    pub fn finish(&mut self) -> R<()> {
        self.solve()?;
        // Unknown effects that must contain operations get exactly those operations.
        let mut wanted: BTreeMap<u32, BTreeMap<String, OpSig>> = BTreeMap::new();
        for ob in &self.pending {
            if let Obligation::OpMember { effect, op, param, result, .. } = ob {
                if let Effect::Meta(i) = self.shallow_e(effect) {
                    wanted.entry(i).or_default().entry(op.clone()).or_insert(OpSig { param: param.clone(), result: result.clone() });
                }
            }
        }
        for (i, m) in wanted {
            self.emetas[i as usize] = Some(Effect::Ops(m));
        }
        self.solve()?;
        // Unknown variants get exactly the labels injected into them.
        let mut variants: BTreeMap<u32, BTreeMap<String, VType>> = BTreeMap::new();
        for ob in &self.pending {
            if let Obligation::Inj { ty, label, payload, .. } = ob {
                if let VType::Meta(i) = self.shallow_v(ty) {
                    variants.entry(i).or_default().entry(label.clone()).or_insert(payload.clone());
                }
            }
        }
        for (i, m) in variants {
            self.vmetas[i as usize] = Some(VType::Variant(m));
        }
        self.solve()?;
        if let Some(ob) = self.pending.first() {
            return Err(match ob {
                Obligation::Reflect { path, .. } => err(path, ErrorKind::Undetermined, "cannot determine the monad layer for reflect"),
                Obligation::OpMember { path, op, .. } => err(path, ErrorKind::Undetermined, format!("cannot determine the effect of `{op}`")),
                Obligation::Inj { path, label, .. } => err(path, ErrorKind::Undetermined, format!("cannot determine the variant type of `{label}`")),
            });
        }
        self.bind_defaults();
        Ok(())
    }

    // ---------------------------------------------------------- monad layers

    /// A layer is valid over `base` when its carrier mentions only its own
    /// type variable and its unit and bind have the expected types.
    fn check_layer(&mut self, path: &[usize], m: &Rc<MonadDef>, base: &Effect) -> R<()> {
        let zb = self.zonk_e(base);
        if !zb.has_unknowns() && self.layers_ok.iter().any(|(l, b)| l == m && *b == zb) {
            return Ok(());
        }
        let saved_record = std::mem::replace(&mut self.record, false);
        let saved_rigid = std::mem::take(&mut self.rigid);
        let r = self.layer_body(path, m, base);
        self.record = saved_record;
        self.rigid = saved_rigid;
        r?;
        let zb = self.zonk_e(base);
        if !zb.has_unknowns() {
            self.layers_ok.push((m.clone(), zb));
        }
        Ok(())
    }

    fn layer_body(&mut self, path: &[usize], m: &MonadDef, base: &Effect) -> R<()> {
        let (unit_env, unit_ty, bind_env, bind_ty) = monad_judgement(m, base).map_err(|e| err(path, ErrorKind::IllKindedLayer, e))?;
        self.rigid = vec![m.tyvar.clone(), beta_name(m)];
        let here = path.to_vec();
        let wrap = |e: TypeError| err(&here, ErrorKind::IllKindedLayer, format!("ill-kinded monad layer: {}", e.message));
        self.check(&m.unit, &unit_env, base, &unit_ty, &mut Vec::new()).map_err(wrap)?;
        self.check(&m.bind, &bind_env, base, &bind_ty, &mut Vec::new()).map_err(wrap)?;
        Ok(())
    }

    // ---------------------------------------------------------------- terms

    fn note(&mut self, path: &[usize], e: &Effect, c: &CType) {
        if self.record {
            self.info.push((path.to_vec(), e.clone(), c.clone()));
        }
    }

    fn child<T>(&mut self, path: &mut Vec<usize>, i: usize, f: impl FnOnce(&mut Self, &mut Vec<usize>) -> R<T>) -> R<T> {
        path.push(i);
        let r = f(self, path);
        path.pop();
        r
    }

    pub fn check(&mut self, c: &Comp, env: &[VType], eff: &Effect, cty: &CType, path: &mut Vec<usize>) -> R<Comp> {
        self.note(path, eff, cty);
        let env_with = |extra: &[VType]| -> Vec<VType> {
            let mut e = env.to_vec();
            e.extend_from_slice(extra);
            e
        };
        Ok(match c {
            Comp::Return(v) => {
                let mut k = 0;
                let (v, a) = self.infer(v, env, path, &mut k)?;
                self.eq_c(path, cty, &CType::f(a))?;
                Comp::Return(v)
            }
            Comp::Let { bound, name, body } => {
                let a = self.fresh_v();
                let m = self.child(path, 0, |s, p| s.check(bound, env, eff, &CType::f(a.clone()), p))?;
                let env2 = env_with(&[a]);
                let n = self.child(path, 1, |s, p| s.check(body, &env2, eff, cty, p))?;
                Comp::Let { bound: Box::new(m), name: name.clone(), body: Box::new(n) }
            }
            Comp::Force(v) => {
                let mut k = 0;
                let (v, t) = self.infer(v, env, path, &mut k)?;
                self.eq_v(path, &VType::thunk(eff.clone(), cty.clone()), &t)?;
                Comp::Force(v)
            }
            Comp::Lam { name, body } => {
                let (a, r) = match self.shallow_c(cty) {
                    CType::Fun(a, r) => (*a, *r),
                    _ => {
                        let (a, r) = (self.fresh_v(), self.fresh_c());
                        self.eq_c(path, cty, &CType::fun(a.clone(), r.clone()))
                            .map_err(|e| TypeError { message: format!("function where a non-function is expected: {}", e.message), ..e })?;
                        (a, r)
                    }
                };
                let env2 = env_with(&[a]);
                let b = self.child(path, 0, |s, p| s.check(body, &env2, eff, &r, p))?;
                Comp::Lam { name: name.clone(), body: Box::new(b) }
            }
            Comp::App(m, v) => {
                let mut k = 1;
                let (v, a) = self.infer(v, env, path, &mut k)?;
                let m = self.child(path, 0, |s, p| s.check(m, env, eff, &CType::fun(a, cty.clone()), p))?;
                Comp::App(Box::new(m), v)
            }
            Comp::CPair(a, b) => {
                let (c1, c2) = (self.fresh_c(), self.fresh_c());
                self.eq_c(path, cty, &CType::prod(c1.clone(), c2.clone()))?;
                let a = self.child(path, 0, |s, p| s.check(a, env, eff, &c1, p))?;
                let b = self.child(path, 1, |s, p| s.check(b, env, eff, &c2, p))?;
                Comp::CPair(Box::new(a), Box::new(b))
            }
            Comp::Prj(side, m) => {
                let other = self.fresh_c();
                let pt = match side {
                    crate::ast::Side::Left => CType::prod(cty.clone(), other),
                    crate::ast::Side::Right => CType::prod(other, cty.clone()),
                };
                let m = self.child(path, 0, |s, p| s.check(m, env, eff, &pt, p))?;
                Comp::Prj(*side, Box::new(m))
            }
            Comp::Split { scrutinee, names, body } => {
                let mut k = 0;
                let (v, t) = self.infer(scrutinee, env, path, &mut k)?;
                let (a, b) = (self.fresh_v(), self.fresh_v());
                self.eq_v(path, &VType::prod(a.clone(), b.clone()), &t)?;
                let env2 = env_with(&[a, b]);
                let body = self.child(path, k, |s, p| s.check(body, &env2, eff, cty, p))?;
                Comp::Split { scrutinee: v, names: names.clone(), body: Box::new(body) }
            }
            Comp::Case { scrutinee, arms, ty } => {
                let mut k = 0;
                let (v, t) = self.infer(scrutinee, env, path, &mut k)?;
                if let Some(ty) = ty {
                    let ty = self.import_c(path, ty)?;
                    self.eq_c(path, &ty, cty)?;
                }
                let payloads: BTreeMap<String, VType> = arms.keys().map(|l| (l.clone(), self.fresh_v())).collect();
                self.unify_v(&VType::Variant(payloads.clone()), &t).map_err(|_| {
                    let labels: Vec<&str> = arms.keys().map(|s| s.as_str()).collect();
                    let actual = print_vtype(&self.zonk_v(&t));
                    TypeError {
                        path: path.clone(),
                        kind: ErrorKind::Mismatch,
                        message: format!("case arms {{{}}} do not match the scrutinee type {actual}", labels.join(", ")),
                        expected: Some(format!("a variant with labels {{{}}}", labels.join(", "))),
                        actual: Some(actual),
                    }
                })?;
                let mut out = BTreeMap::new();
                for (i, (l, arm)) in arms.iter().enumerate() {
                    let env2 = env_with(&[payloads[l].clone()]);
                    let b = self.child(path, k + i, |s, p| s.check(&arm.body, &env2, eff, cty, p))?;
                    out.insert(l.clone(), Arm { name: arm.name.clone(), body: b });
                }
                Comp::Case { scrutinee: v, arms: out, ty: Some(cty.clone()) }
            }
            Comp::Op { op, arg } => {
                let mut k = 0;
                let (v, p) = self.infer(arg, env, path, &mut k)?;
                let r = self.fresh_v();
                self.eq_c(path, cty, &CType::f(r.clone()))?;
                self.obligation(Obligation::OpMember { path: path.clone(), effect: eff.clone(), op: op.clone(), param: p, result: r })?;
                Comp::Op { op: op.clone(), arg: v }
            }
            Comp::Handle { body, handler } => {
                let sigs: BTreeMap<String, OpSig> = handler
                    .ops
                    .keys()
                    .map(|o| (o.clone(), OpSig { param: self.fresh_v(), result: self.fresh_v() }))
                    .collect();
                let in_eff = Effect::ops(sigs.clone());
                let a = self.fresh_v();
                let m = self.child(path, 0, |s, p| s.check(body, env, &in_eff, &CType::f(a.clone()), p))?;
                let (h, _) = self.handler_clauses(handler, env, &sigs, &a, eff, cty, path, 1)?;
                Comp::Handle { body: Box::new(m), handler: Box::new(h) }
            }
            Comp::Reflect(m) => {
                let a = self.fresh_v();
                self.eq_c(path, cty, &CType::f(a.clone()))?;
                let (base, body_ty) = (self.fresh_e(), self.fresh_c());
                let m = self.child(path, 0, |s, p| s.check(m, env, &base, &body_ty, p))?;
                self.obligation(Obligation::Reflect { path: path.clone(), effect: eff.clone(), a, base, body: body_ty })?;
                Comp::Reflect(Box::new(m))
            }
            Comp::Reify { monad, body } => {
                if monad.carrier.has_unknowns() {
                    return Err(err(path, ErrorKind::MissingAnnotation, "reify needs a monad with a fully annotated carrier"));
                }
                self.check_layer(path, monad, eff)?;
                let a = self.fresh_v();
                self.eq_c(path, cty, &monad.carrier_at(&a))?;
                let layered = Effect::Mon { base: Box::new(eff.clone()), layer: monad.clone() };
                let m = self.child(path, 0, |s, p| s.check(body, env, &layered, &CType::f(a.clone()), p))?;
                Comp::Reify { monad: monad.clone(), body: Box::new(m) }
            }
            Comp::Shift0 { name, body } => {
                let (base, top) = (self.fresh_e(), self.fresh_c());
                if self.shallow_e(eff) == Effect::Pure {
                    return Err(err(path, ErrorKind::EmptyStack, "shift0 with an empty answer-type stack"));
                }
                self.eq_e(path, &Effect::Del { base: Box::new(base.clone()), top: Box::new(top.clone()) }, eff)?;
                let a = self.fresh_v();
                self.eq_c(path, cty, &CType::f(a.clone()))?;
                let k = VType::thunk(base.clone(), CType::fun(a, top.clone()));
                let env2 = env_with(&[k]);
                let b = self.child(path, 0, |s, p| s.check(body, &env2, &base, &top, p))?;
                Comp::Shift0 { name: name.clone(), body: Box::new(b) }
            }
            Comp::Dollar { body, name, cont } => {
                let a = self.fresh_v();
                let pushed = Effect::Del { base: Box::new(eff.clone()), top: Box::new(cty.clone()) };
                let m = self.child(path, 0, |s, p| s.check(body, env, &pushed, &CType::f(a.clone()), p))?;
                let env2 = env_with(&[a]);
                let n = self.child(path, 1, |s, p| s.check(cont, &env2, eff, cty, p))?;
                Comp::Dollar { body: Box::new(m), name: name.clone(), cont: Box::new(n) }
            }
        })
    }

    /// Check the clauses of a handler whose operations have `sigs`, handling
    /// a computation returning `a`, into `cty` at `eff`. Clause paths start at `first`.
    #[allow(clippy::too_many_arguments)]
    fn handler_clauses(
        &mut self,
        h: &Handler,
        env: &[VType],
        sigs: &BTreeMap<String, OpSig>,
        a: &VType,
        eff: &Effect,
        cty: &CType,
        path: &mut Vec<usize>,
        first: usize,
    ) -> R<(Handler, ())> {
        let mut env2 = env.to_vec();
        env2.push(a.clone());
        let ret = self.child(path, first, |s, p| s.check(&h.ret, &env2, eff, cty, p))?;
        let mut ops = BTreeMap::new();
        for (i, (op, cl)) in h.ops.iter().enumerate() {
            let sig = &sigs[op];
            let mut env3 = env.to_vec();
            env3.push(sig.param.clone());
            env3.push(VType::thunk(eff.clone(), CType::fun(sig.result.clone(), cty.clone())));
            let body = self.child(path, first + 1 + i, |s, p| s.check(&cl.body, &env3, eff, cty, p))?;
            ops.insert(op.clone(), OpClause { param: cl.param.clone(), cont: cl.cont.clone(), body });
        }
        Ok((Handler { ret_name: h.ret_name.clone(), ret, ops }, ()))
    }

    /// Check a standalone handler, returning its type.
    pub fn handler(&mut self, h: &Handler, env: &[VType], path: &mut Vec<usize>) -> R<(Handler, HandlerType)> {
        let sigs: BTreeMap<String, OpSig> =
            h.ops.keys().map(|o| (o.clone(), OpSig { param: self.fresh_v(), result: self.fresh_v() })).collect();
        let a = self.fresh_v();
        let (eff, cty) = (self.fresh_e(), self.fresh_c());
        let (h, _) = self.handler_clauses(h, env, &sigs, &a, &eff, &cty, path, 0)?;
        Ok((h, HandlerType { input: a, in_effect: Effect::ops(sigs), output: cty, out_effect: eff }))
    }

    pub fn unify_handler_type(&mut self, path: &[usize], expected: &HandlerType, actual: &HandlerType) -> R<()> {
        let exp = HandlerType {
            input: self.import_v(path, &expected.input)?,
            in_effect: self.import_e(path, &expected.in_effect)?,
            output: self.import_c(path, &expected.output)?,
            out_effect: self.import_e(path, &expected.out_effect)?,
        };
        self.eq_v(path, &exp.input, &actual.input)?;
        self.eq_e(path, &exp.in_effect, &actual.in_effect)?;
        self.eq_c(path, &exp.output, &actual.output)?;
        self.eq_e(path, &exp.out_effect, &actual.out_effect)
    }

    pub fn infer(&mut self, v: &Value, env: &[VType], path: &mut Vec<usize>, k: &mut usize) -> R<(Value, VType)> {
        Ok(match v {
            Value::Var(i) => match env.len().checked_sub(i + 1) {
                Some(j) => (v.clone(), env[j].clone()),
                None => return Err(err(path, ErrorKind::Unbound, format!("unbound variable #{i}"))),
            },
            Value::Unit => (Value::Unit, VType::Unit),
            Value::Pair(a, b) => {
                let (a, ta) = self.infer(a, env, path, k)?;
                let (b, tb) = self.infer(b, env, path, k)?;
                (Value::Pair(Box::new(a), Box::new(b)), VType::prod(ta, tb))
            }
            Value::Inj { label, ty, payload } => {
                let (p, tp) = self.infer(payload, env, path, k)?;
                let t = match ty {
                    Some(t) => self.import_v(path, t)?,
                    None => self.fresh_v(),
                };
                self.obligation(Obligation::Inj { path: path.clone(), ty: t.clone(), label: label.clone(), payload: tp })?;
                (Value::Inj { label: label.clone(), ty: Some(t.clone()), payload: Box::new(p) }, t)
            }
            Value::Thunk { effect, body } => {
                let e = match effect {
                    Some(e) => self.import_e(path, e)?,
                    None => self.fresh_e(),
                };
                let c = self.fresh_c();
                let idx = *k;
                *k += 1;
                let b = self.child(path, idx, |s, p| s.check(body, env, &e, &c, p))?;
                (Value::Thunk { effect: Some(e.clone()), body: Box::new(b) }, VType::thunk(e, c))
            }
        })
    }

    pub fn import_value_type(&mut self, t: &VType) -> R<VType> {
        self.import_v(&[], t)
    }

    pub fn import_comp_type(&mut self, t: &CType) -> R<CType> {
        self.import_c(&[], t)
    }

    pub fn import_effect(&mut self, e: &Effect) -> R<Effect> {
        self.import_e(&[], e)
    }

    pub fn fresh_effect(&mut self) -> Effect {
        self.fresh_e()
    }

    pub fn fresh_ctype(&mut self) -> CType {
        self.fresh_c()
    }

    pub fn set_rigid(&mut self, tyvars: Vec<String>) {
        self.rigid = tyvars;
    }

    // ------------------------------------------------------------ elaboration

    pub fn zonk_comp(&self, c: &Comp) -> Comp {
        use Comp::*;
        let zc = |c: &Comp| Box::new(self.zonk_comp(c));
        match c {
            Return(v) => Return(self.zonk_value(v)),
            Let { bound, name, body } => Let { bound: zc(bound), name: name.clone(), body: zc(body) },
            Force(v) => Force(self.zonk_value(v)),
            Lam { name, body } => Lam { name: name.clone(), body: zc(body) },
            App(m, v) => App(zc(m), self.zonk_value(v)),
            CPair(a, b) => CPair(zc(a), zc(b)),
            Prj(s, m) => Prj(*s, zc(m)),
            Split { scrutinee, names, body } => {
                Split { scrutinee: self.zonk_value(scrutinee), names: names.clone(), body: zc(body) }
            }
            Case { scrutinee, arms, ty } => Case {
                scrutinee: self.zonk_value(scrutinee),
                arms: arms.iter().map(|(l, a)| (l.clone(), Arm { name: a.name.clone(), body: self.zonk_comp(&a.body) })).collect(),
                ty: ty.as_ref().map(|t| self.zonk_c(t)),
            },
            Op { op, arg } => Op { op: op.clone(), arg: self.zonk_value(arg) },
            Handle { body, handler } => Handle { body: zc(body), handler: Box::new(self.zonk_handler(handler)) },
            Reflect(m) => Reflect(zc(m)),
            Reify { monad, body } => Reify { monad: monad.clone(), body: zc(body) },
            Shift0 { name, body } => Shift0 { name: name.clone(), body: zc(body) },
            Dollar { body, name, cont } => Dollar { body: zc(body), name: name.clone(), cont: zc(cont) },
        }
    }

    pub fn zonk_handler(&self, h: &Handler) -> Handler {
        Handler {
            ret_name: h.ret_name.clone(),
            ret: self.zonk_comp(&h.ret),
            ops: h
                .ops
                .iter()
                .map(|(o, cl)| (o.clone(), OpClause { param: cl.param.clone(), cont: cl.cont.clone(), body: self.zonk_comp(&cl.body) }))
                .collect(),
        }
    }

    pub fn zonk_value(&self, v: &Value) -> Value {
        match v {
            Value::Var(_) | Value::Unit => v.clone(),
            Value::Pair(a, b) => Value::Pair(Box::new(self.zonk_value(a)), Box::new(self.zonk_value(b))),
            Value::Inj { label, ty, payload } => Value::Inj {
                label: label.clone(),
                ty: ty.as_ref().map(|t| self.zonk_v(t)),
                payload: Box::new(self.zonk_value(payload)),
            },
            Value::Thunk { effect, body } => {
                Value::Thunk { effect: effect.as_ref().map(|e| self.zonk_e(e)), body: Box::new(self.zonk_comp(body)) }
            }
        }
    }

    pub fn take_info(&mut self) -> HashMap<Vec<usize>, CompInfo> {
        let info = std::mem::take(&mut self.info);
        info.into_iter()
            .map(|(p, e, c)| (p, CompInfo { effect: self.zonk_e(&e), ctype: self.zonk_c(&c) }))
            .collect()
    }
}

/// The first effect-level disagreement between two resolved types, if any.
fn conflict_v(a: &VType, b: &VType) -> Option<ErrorKind> {
    match (a, b) {
        (VType::Prod(a1, b1), VType::Prod(a2, b2)) => conflict_v(a1, a2).or_else(|| conflict_v(b1, b2)),
        (VType::Variant(m1), VType::Variant(m2)) => m1.iter().find_map(|(l, t)| m2.get(l).and_then(|u| conflict_v(t, u))),
        (VType::Thunk(e1, c1), VType::Thunk(e2, c2)) => conflict_e(e1, e2).or_else(|| conflict_c(c1, c2)),
        _ => None,
    }
}

fn conflict_c(a: &CType, b: &CType) -> Option<ErrorKind> {
    match (a, b) {
        (CType::Returner(a), CType::Returner(b)) => conflict_v(a, b),
        (CType::Fun(a1, c1), CType::Fun(a2, c2)) => conflict_v(a1, a2).or_else(|| conflict_c(c1, c2)),
        (CType::Prod(a1, b1), CType::Prod(a2, b2)) => conflict_c(a1, a2).or_else(|| conflict_c(b1, b2)),
        _ => None,
    }
}

fn conflict_e(a: &Effect, b: &Effect) -> Option<ErrorKind> {
    match (a, b) {
        (Effect::Ops(x), Effect::Ops(y)) if !x.keys().eq(y.keys()) => Some(ErrorKind::OpSetMismatch),
        (Effect::Ops(_), Effect::Pure) | (Effect::Pure, Effect::Ops(_)) => Some(ErrorKind::OpSetMismatch),
        (Effect::Mon { layer: x, .. }, Effect::Mon { layer: y, .. }) if x != y => Some(ErrorKind::LayerMismatch),
        (Effect::Mon { base, .. }, Effect::Mon { base: b2, .. }) => conflict_e(base, b2),
        (Effect::Del { base, top }, Effect::Del { base: b2, top: t2 }) => conflict_c(top, t2).or_else(|| conflict_e(base, b2)),
        _ => None,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Meta {
    V(u32),
    C(u32),
    E(u32),
}

/// Name of the second type variable used to type bind.
pub(crate) fn beta_name(m: &MonadDef) -> String {
    let used = m.carrier.tyvars();
    (0..)
        .map(|i| if i == 0 { format!("{}'", m.tyvar) } else { format!("{}'{i}", m.tyvar) })
        .find(|n| !used.contains(n) && *n != m.tyvar)
        .unwrap()
}

/// Environments and expected types for a monad's unit and bind over `base`:
/// `x : α ⊢ unit : C` and `y : U C, f : U (α → C[β/α]) ⊢ bind : C[β/α]`.
#[allow(clippy::type_complexity)]
pub(crate) fn monad_judgement(m: &MonadDef, base: &Effect) -> Result<(Vec<VType>, CType, Vec<VType>, CType), String> {
    let mut tvs = m.carrier.tyvars();
    tvs.remove(&m.tyvar);
    if let Some(v) = tvs.into_iter().next() {
        return Err(format!("monad carrier mentions unbound type variable `{v}`"));
    }
    if m.carrier.has_unknowns() {
        return Err("monad carrier is not fully annotated".into());
    }
    let alpha = VType::Var(m.tyvar.clone());
    let beta = VType::Var(beta_name(m));
    let c = m.carrier.clone();
    let cb = m.carrier_at(&beta);
    let unit_env = vec![alpha.clone()];
    let bind_env = vec![VType::thunk(base.clone(), c.clone()), VType::thunk(base.clone(), CType::fun(alpha, cb.clone()))];
    Ok((unit_env, c, bind_env, cb))
}
