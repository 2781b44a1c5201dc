use std::rc::Rc;

use super::parser::{is_keyword, BUILTIN_VALUES};
use crate::ast::{occurs_free, Comp, Handler, MonadDef, Value};
use crate::typesys::types::{CType, Effect, HandlerType, VType};

#[derive(Default)]
pub struct Printer {
    env: Vec<String>,
    /// Named monads; layers equal to one of these print by name.
    pub monads: Vec<(String, Rc<MonadDef>)>,
}

fn valid_ident(s: &str) -> bool {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    s != "_"
        && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
        && !is_keyword(s)
        && !BUILTIN_VALUES.contains(&s)
}

impl Printer {
    pub fn new() -> Printer {
        Printer::default()
    }

    pub fn with_env(env: Vec<String>) -> Printer {
        Printer { env, monads: Vec::new() }
    }

    fn fresh(&self, hint: &str) -> String {
        let taken = |n: &str| self.env.iter().any(|m| m == n);
        if valid_ident(hint) && !taken(hint) {
            return hint.to_string();
        }
        let stripped = hint.trim_end_matches(|c: char| c.is_ascii_digit());
        let base = if valid_ident(stripped) { stripped } else { "x" };
        if !taken(base) {
            return base.to_string();
        }
        (1..).map(|i| format!("{base}{i}")).find(|n| !taken(n)).unwrap()
    }

    /// Choose names for `hints.len()` binders around `body`; unused ones print as `_`.
    fn binders(&mut self, hints: &[&str], body: &Comp) -> Vec<String> {
        let n = hints.len();
        let mut names = Vec::new();
        for (i, h) in hints.iter().enumerate() {
            let name = if occurs_free(body, n - 1 - i) { self.fresh(h) } else { "_".to_string() };
            self.env.push(name.clone());
            names.push(name);
        }
        names
    }

    fn pop(&mut self, n: usize) {
        let l = self.env.len();
        self.env.truncate(l - n);
    }

    // -------------------------------------------------------- computations

    pub fn comp(&mut self, c: &Comp) -> String {
        use Comp::*;
        match c {
            Let { bound, name, body } => {
                let m = self.comp(bound);
                let x = self.binders(&[name.as_str()], body);
                let n = self.comp(body);
                self.pop(1);
                format!("let {} <- {m} in {n}", x[0])
            }
            Lam { .. } => {
                let mut hints = Vec::new();
                let mut cur = c;
                while let Lam { name, body } = cur {
                    hints.push(name.as_str());
                    cur = body;
                }
                let names = self.binders(&hints, cur);
                let b = self.comp(cur);
                self.pop(names.len());
                format!("fun {} -> {b}", names.join(" "))
            }
            Case { scrutinee, arms, ty } => {
                let v = self.value(scrutinee);
                let ann = ty.as_ref().map(|t| format!("[{}]", ctype(t, &self.monads))).unwrap_or_default();
                let arms: Vec<String> = arms
                    .iter()
                    .map(|(l, a)| {
                        let x = self.binders(&[a.name.as_str()], &a.body);
                        let b = self.comp(&a.body);
                        self.pop(1);
                        format!("{l} {} -> {b}", x[0])
                    })
                    .collect();
                if arms.is_empty() {
                    format!("case{ann} {v} of {{}}")
                } else {
                    format!("case{ann} {v} of {{ {} }}", arms.join(" | "))
                }
            }
            Split { scrutinee, names, body } => {
                let v = self.value(scrutinee);
                let xs = self.binders(&[names.0.as_str(), names.1.as_str()], body);
                let b = self.comp(body);
                self.pop(2);
                format!("split {v} as <{}, {}> in {b}", xs[0], xs[1])
            }
            Handle { body, handler } => {
                let m = self.comp(body);
                let h = self.handler(handler);
                format!("handle {m} with {h}")
            }
            Reify { monad, body } => {
                let md = self.monad_ref(monad);
                format!("reify[{md}] {}", self.comp(body))
            }
            Reflect(m) => format!("reflect {}", self.comp(m)),
            Shift0 { name, body } => {
                let k = self.binders(&[name.as_str()], body);
                let b = self.comp(body);
                self.pop(1);
                format!("shift0 {} -> {b}", k[0])
            }
            Dollar { body, name, cont } => {
                let m = self.comp(body);
                let x = self.binders(&[name.as_str()], cont);
                let n = self.comp(cont);
                self.pop(1);
                format!("reset {m} as {} in {n}", x[0])
            }
            Return(v) => format!("return {}", self.value(v)),
            App(..) => self.app(c),
            _ => self.catom(c),
        }
    }

    fn app(&mut self, c: &Comp) -> String {
        match c {
            Comp::App(m, v) => {
                let head = self.app(m);
                format!("{head} {}", self.varg(v))
            }
            _ => self.catom(c),
        }
    }

    fn catom(&mut self, c: &Comp) -> String {
        use Comp::*;
        match c {
            Return(v) if !matches!(v, Value::Thunk { .. }) => format!("return {}", self.value(v)),
            Force(v) => format!("force {}", self.varg(v)),
            Op { op, arg } => format!("{op}! {}", self.varg(arg)),
            CPair(a, b) => format!("<| {}, {} |>", self.comp(a), self.comp(b)),
            Prj(side, m) => format!("prj{} {}", side.index(), self.catom(m)),
            _ => format!("({})", self.comp(c)),
        }
    }

    pub fn handler(&mut self, h: &Handler) -> String {
        let x = self.binders(&[h.ret_name.as_str()], &h.ret);
        let mut clauses = vec![format!("return {} -> {}", x[0], self.comp(&h.ret))];
        self.pop(1);
        for (op, cl) in &h.ops {
            let pk = self.binders(&[cl.param.as_str(), cl.cont.as_str()], &cl.body);
            clauses.push(format!("{op}({}; {}) -> {}", pk[0], pk[1], self.comp(&cl.body)));
            self.pop(2);
        }
        format!("{{ {} }}", clauses.join(" | "))
    }

    fn monad_ref(&mut self, m: &Rc<MonadDef>) -> String {
        if let Some((n, _)) = self.monads.iter().find(|(_, d)| **d == **m) {
            return n.clone();
        }
        self.monad_def(m)
    }

    /// `where a. C { return x -> M | y >>= f -> N }`
    pub fn monad_def(&mut self, m: &MonadDef) -> String {
        let renamed;
        let m = if valid_ident(&m.tyvar) {
            m
        } else {
            let mut tvs = m.carrier.tyvars();
            tvs.remove(&m.tyvar);
            let fresh = std::iter::once("a".to_string())
                .chain((1..).map(|i| format!("a{i}")))
                .find(|n| !tvs.contains(n))
                .unwrap();
            renamed = m.rename_tyvar(&fresh);
            &renamed
        };
        let saved = std::mem::take(&mut self.env);
        let carrier = ctype(&m.carrier, &self.monads);
        let x = self.binders(&[m.unit_name.as_str()], &m.unit);
        let unit = self.comp(&m.unit);
        self.pop(1);
        let yf = self.binders(&[m.bind_names.0.as_str(), m.bind_names.1.as_str()], &m.bind);
        let bind = self.comp(&m.bind);
        self.env = saved;
        format!("where {}. {carrier} {{ return {} -> {unit} | {} >>= {} -> {bind} }}", m.tyvar, x[0], yf[0], yf[1])
    }

    // --------------------------------------------------------------- values

    pub fn value(&mut self, v: &Value) -> String {
        match v {
            Value::Thunk { effect, body } => {
                let ann = effect.as_ref().map(|e| effect_brackets(e, &self.monads)).unwrap_or_default();
                format!("thunk{ann} {}", self.comp(body))
            }
            _ => self.varg(v),
        }
    }

    fn varg(&mut self, v: &Value) -> String {
        match v {
            Value::Var(i) => match self.env.len().checked_sub(i + 1) {
                Some(k) => self.env[k].clone(),
                None => format!("#{i}"),
            },
            Value::Unit => "()".into(),
            Value::Pair(a, b) => format!("<{}, {}>", self.value(a), self.value(b)),
            Value::Inj { label, ty, payload } => {
                if **payload == Value::Unit && ty.as_ref() == Some(&VType::bit()) {
                    if label == "True" {
                        return "tru".into();
                    }
                    if label == "False" {
                        return "fls".into();
                    }
                }
                let ann = ty.as_ref().map(|t| format!("[{}]", vtype(t, &self.monads))).unwrap_or_default();
                format!("inj{ann} {label} {}", self.varg(payload))
            }
            Value::Thunk { .. } => format!("({})", self.value(v)),
        }
    }
}

// ------------------------------------------------------------------- types

pub fn vtype(t: &VType, monads: &[(String, Rc<MonadDef>)]) -> String {
    match t {
        VType::Prod(a, b) => format!("{} * {}", vatom(a, monads), vtype(b, monads)),
        _ => vatom(t, monads),
    }
}

fn vatom(t: &VType, monads: &[(String, Rc<MonadDef>)]) -> String {
    match t {
        VType::Unit => "1".into(),
        VType::Var(n) => n.clone(),
        VType::Hole => "_".into(),
        VType::Meta(i) => format!("?{i}"),
        VType::Variant(m) => {
            if *t == VType::bit() {
                return "bit".into();
            }
            let items: Vec<String> = m.iter().map(|(l, a)| format!("{l}: {}", vtype(a, monads))).collect();
            format!("{{{}}}", items.join(" | "))
        }
        VType::Thunk(e, c) => format!("U{} {}", effect_brackets(e, monads), catom(c, monads)),
        VType::Prod(..) => format!("({})", vtype(t, monads)),
    }
}

pub fn ctype(c: &CType, monads: &[(String, Rc<MonadDef>)]) -> String {
    match c {
        CType::Prod(a, b) => format!("{} & {}", ctype(a, monads), carrow(b, monads)),
        _ => carrow(c, monads),
    }
}

fn carrow(c: &CType, monads: &[(String, Rc<MonadDef>)]) -> String {
    match c {
        CType::Fun(a, r) => format!("{} -> {}", vtype(a, monads), carrow(r, monads)),
        _ => catom(c, monads),
    }
}

fn catom(c: &CType, monads: &[(String, Rc<MonadDef>)]) -> String {
    match c {
        CType::Returner(a) => format!("F {}", vatom(a, monads)),
        CType::Hole => "_".into(),
        CType::Meta(i) => format!("?{i}"),
        _ => format!("({})", ctype(c, monads)),
    }
}

pub fn effect_brackets(e: &Effect, monads: &[(String, Rc<MonadDef>)]) -> String {
    format!("[{}]", effect_items(e, monads))
}

pub fn effect_items(e: &Effect, monads: &[(String, Rc<MonadDef>)]) -> String {
    match e {
        Effect::Pure => String::new(),
        Effect::Meta(i) => format!("?e{i}"),
        Effect::Ops(m) => m
            .iter()
            .map(|(o, s)| format!("{o}: {} -> {}", vtype(&s.param, monads), vtype(&s.result, monads)))
            .collect::<Vec<_>>()
            .join(", "),
        Effect::Mon { base, layer } => {
            let mut p = Printer { env: Vec::new(), monads: monads.to_vec() };
            let l = p.monad_ref(layer);
            join_layer(effect_items(base, monads), l)
        }
        Effect::Del { base, top } => join_layer(effect_items(base, monads), ctype(top, monads)),
    }
}

fn join_layer(base: String, top: String) -> String {
    if base.is_empty() {
        top
    } else {
        format!("{base}, {top}")
    }
}

pub fn handler_type(h: &HandlerType, monads: &[(String, Rc<MonadDef>)]) -> String {
    format!(
        "{} ! {} => {} ! {}",
        vtype(&h.input, monads),
        effect_brackets(&h.in_effect, monads),
        catom(&h.output, monads),
        effect_brackets(&h.out_effect, monads)
    )
}
