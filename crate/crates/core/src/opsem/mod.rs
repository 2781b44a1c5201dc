//! Small-step operational semantics: unique decomposition into frames and a
//! redex, then one β-rule. Control operators capture the basic frames up to
//! the nearest matching delimiter.

use std::fmt;
use std::rc::Rc;

use serde::Serialize;

use crate::ast::{self, Comp, Handler, MonadDef, Name, ScopeError, Side, Value};
use crate::surface::print_comp;

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Frame {
    Let { name: Name, body: Comp },
    App(Value),
    Prj(Side),
    Handle(Handler),
    Reify(Rc<MonadDef>),
    Dollar { name: Name, cont: Comp },
}

impl Frame {
    pub fn is_basic(&self) -> bool {
        matches!(self, Frame::Let { .. } | Frame::App(_) | Frame::Prj(_))
    }

    /// Plug a computation into the hole.
    pub fn plug(self, m: Comp) -> Comp {
        match self {
            Frame::Let { name, body } => Comp::Let { bound: Box::new(m), name, body: Box::new(body) },
            Frame::App(v) => Comp::App(Box::new(m), v),
            Frame::Prj(s) => Comp::Prj(s, Box::new(m)),
            Frame::Handle(h) => Comp::Handle { body: Box::new(m), handler: Box::new(h) },
            Frame::Reify(monad) => Comp::Reify { monad, body: Box::new(m) },
            Frame::Dollar { name, cont } => Comp::Dollar { body: Box::new(m), name, cont: Box::new(cont) },
        }
    }

    /// Shift the frame's free variables, for moving it under `by` new binders.
    pub fn shifted(&self, by: usize) -> Frame {
        match self {
            Frame::Let { name, body } => Frame::Let { name: name.clone(), body: ast::shift(body, by, 1) },
            Frame::App(v) => Frame::App(ast::shift_value(v, by, 0)),
            Frame::Prj(s) => Frame::Prj(*s),
            Frame::Handle(h) => match ast::shift(&ast::handle(Comp::Return(Value::Unit), h.clone()), by, 0) {
                Comp::Handle { handler, .. } => Frame::Handle(*handler),
                _ => unreachable!(),
            },
            Frame::Reify(m) => Frame::Reify(m.clone()),
            Frame::Dollar { name, cont } => Frame::Dollar { name: name.clone(), cont: ast::shift(cont, by, 1) },
        }
    }
}

/// Plug `m` into frames listed outermost first.
pub fn plug(frames: Vec<Frame>, m: Comp) -> Comp {
    frames.into_iter().rev().fold(m, |acc, f| f.plug(acc))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    ForceThunk,
    LetReturn,
    AppLam,
    PrjCpair,
    SplitPair,
    CaseInj,
    HandleReturn,
    HandleOp,
    ReifyReturn,
    ReifyReflect,
    ResetReturn,
    ResetShift0,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::ForceThunk => "force-thunk",
            Rule::LetReturn => "let-return",
            Rule::AppLam => "app-lam",
            Rule::PrjCpair => "prj-cpair",
            Rule::SplitPair => "split-pair",
            Rule::CaseInj => "case-inj",
            Rule::HandleReturn => "handle-return",
            Rule::HandleOp => "handle-op",
            Rule::ReifyReturn => "reify-return",
            Rule::ReifyReflect => "reify-reflect",
            Rule::ResetReturn => "reset-return",
            Rule::ResetShift0 => "reset-shift0",
        }
    }

    /// Rules that only rewire variables: the administrative ones.
    pub fn is_control(self) -> bool {
        matches!(self, Rule::HandleOp | Rule::ReifyReflect | Rule::ResetShift0)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", content = "detail", rename_all = "kebab-case")]
pub enum StuckReason {
    UnhandledOp(String),
    ShiftWithoutReset,
    ReflectWithoutReify,
    IllFormedCase,
    IllFormed(String),
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StuckReason::UnhandledOp(op) => write!(f, "unhandled operation `{op}`"),
            StuckReason::ShiftWithoutReset => f.write_str("shift0 without an enclosing reset"),
            StuckReason::ReflectWithoutReify => f.write_str("reflect without an enclosing reify"),
            StuckReason::IllFormedCase => f.write_str("ill-formed case"),
            StuckReason::IllFormed(s) => write!(f, "ill-formed: {s}"),
        }
    }
}

/// The result of decomposing a computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decomposition {
    /// `return V` with no surrounding frames.
    AlreadyValue(Value),
    /// Frames outermost first, and the redex in the hole. For control rules
    /// the redex is the delimiter applied to the captured frames.
    Redex { context: Vec<Frame>, redex: Comp, rule: Rule },
    Stuck(StuckReason),
}

enum Found {
    Value(Value),
    /// Frames (outermost first) and the innermost computation.
    Focus(Vec<Frame>, Comp),
}

fn descend(mut cur: Comp) -> Found {
    let mut frames = Vec::new();
    loop {
        cur = match cur {
            Comp::Let { bound, name, body } => {
                frames.push(Frame::Let { name, body: *body });
                *bound
            }
            Comp::App(m, v) => {
                frames.push(Frame::App(v));
                *m
            }
            Comp::Prj(s, m) => {
                frames.push(Frame::Prj(s));
                *m
            }
            Comp::Handle { body, handler } if !matches!(*body, Comp::Return(_)) => {
                frames.push(Frame::Handle(*handler));
                *body
            }
            Comp::Reify { monad, body } if !matches!(*body, Comp::Return(_)) => {
                frames.push(Frame::Reify(monad));
                *body
            }
            Comp::Dollar { body, name, cont } if !matches!(*body, Comp::Return(_)) => {
                frames.push(Frame::Dollar { name, cont: *cont });
                *body
            }
            Comp::Return(v) if frames.is_empty() => return Found::Value(v),
            other => return Found::Focus(frames, other),
        };
    }
}

/// Index of the nearest delimiter, which must satisfy `want`, with only basic frames in between.
fn nearest_delimiter(frames: &[Frame], want: impl Fn(&Frame) -> bool) -> Option<usize> {
    let i = frames.iter().rposition(|f| !f.is_basic())?;
    want(&frames[i]).then_some(i)
}

enum Outcome {
    Value(Value),
    Step(Comp, Rule, usize),
    Stuck(StuckReason),
}

fn step_owned(m: Comp) -> Outcome {
    let (mut frames, focus) = match descend(m) {
        Found::Value(v) => return Outcome::Value(v),
        Found::Focus(f, c) => (f, c),
    };
    let ill = |s: &str| Outcome::Stuck(StuckReason::IllFormed(s.to_string()));
    let (result, rule) = match focus {
        Comp::Force(Value::Thunk { body, .. }) => (*body, Rule::ForceThunk),
        Comp::Force(_) => return ill("force of a non-thunk"),
        Comp::Return(v) => match frames.pop() {
            Some(Frame::Let { body, .. }) => (ast::instantiate(&body, &v), Rule::LetReturn),
            _ => return ill("return in a non-sequencing position"),
        },
        Comp::Handle { body, handler } => match *body {
            Comp::Return(v) => (ast::instantiate(&handler.ret, &v), Rule::HandleReturn),
            _ => unreachable!(),
        },
        Comp::Reify { monad, body } => match *body {
            Comp::Return(v) => (ast::instantiate(&monad.unit, &v), Rule::ReifyReturn),
            _ => unreachable!(),
        },
        Comp::Dollar { body, cont, .. } => match *body {
            Comp::Return(v) => (ast::instantiate(&cont, &v), Rule::ResetReturn),
            _ => unreachable!(),
        },
        Comp::Lam { body, .. } => match frames.pop() {
            Some(Frame::App(v)) => (ast::instantiate(&body, &v), Rule::AppLam),
            _ => return ill("function in a non-application position"),
        },
        Comp::CPair(a, b) => match frames.pop() {
            Some(Frame::Prj(Side::Left)) => (*a, Rule::PrjCpair),
            Some(Frame::Prj(Side::Right)) => (*b, Rule::PrjCpair),
            _ => return ill("computation pair in a non-projection position"),
        },
        Comp::Split { scrutinee: Value::Pair(a, b), body, .. } => (ast::subst_many(&body, &[*b, *a]), Rule::SplitPair),
        Comp::Split { .. } => return ill("split of a non-pair"),
        Comp::Case { scrutinee: Value::Inj { label, payload, .. }, arms, .. } => match arms.get(&label) {
            Some(arm) => (ast::instantiate(&arm.body, &payload), Rule::CaseInj),
            None => return Outcome::Stuck(StuckReason::IllFormedCase),
        },
        Comp::Case { .. } => return Outcome::Stuck(StuckReason::IllFormedCase),
        Comp::Op { op, arg } => {
            let Some(i) = nearest_delimiter(&frames, |f| matches!(f, Frame::Handle(_))) else {
                return Outcome::Stuck(StuckReason::UnhandledOp(op));
            };
            let Frame::Handle(h) = &frames[i] else { unreachable!() };
            let Some(clause) = h.ops.get(&op) else {
                return Outcome::Stuck(StuckReason::UnhandledOp(op));
            };
            let cf: Vec<Frame> = frames[i + 1..].iter().map(|f| f.shifted(1)).collect();
            let h1 = match Frame::Handle(h.clone()).shifted(1) {
                Frame::Handle(h) => h,
                _ => unreachable!(),
            };
            let k = ast::thunk(ast::lam("y", ast::handle(plug(cf, Comp::Return(Value::Var(0))), h1)));
            let result = ast::subst_many(&clause.body, &[k, arg]);
            frames.truncate(i);
            return Outcome::Step(plug(frames, result), Rule::HandleOp, i);
        }
        Comp::Reflect(n) => {
            let Some(i) = nearest_delimiter(&frames, |f| matches!(f, Frame::Reify(_))) else {
                return Outcome::Stuck(StuckReason::ReflectWithoutReify);
            };
            let Frame::Reify(monad) = &frames[i] else { unreachable!() };
            let monad = monad.clone();
            let cf: Vec<Frame> = frames[i + 1..].iter().map(|f| f.shifted(1)).collect();
            let f = ast::thunk(ast::lam("x", ast::reify(monad.clone(), plug(cf, Comp::Return(Value::Var(0))))));
            let y = ast::thunk(*n);
            let result = ast::subst_many(&monad.bind, &[f, y]);
            frames.truncate(i);
            return Outcome::Step(plug(frames, result), Rule::ReifyReflect, i);
        }
        Comp::Shift0 { body, .. } => {
            let Some(i) = nearest_delimiter(&frames, |f| matches!(f, Frame::Dollar { .. })) else {
                return Outcome::Stuck(StuckReason::ShiftWithoutReset);
            };
            let cf: Vec<Frame> = frames[i + 1..].iter().map(|f| f.shifted(1)).collect();
            let Frame::Dollar { name, cont } = frames[i].shifted(1) else { unreachable!() };
            let k = ast::thunk(ast::lam(
                "y",
                Comp::Dollar { body: Box::new(plug(cf, Comp::Return(Value::Var(0)))), name, cont: Box::new(cont) },
            ));
            let result = ast::instantiate(&body, &k);
            frames.truncate(i);
            return Outcome::Step(plug(frames, result), Rule::ResetShift0, i);
        }
        Comp::Let { .. } | Comp::App(..) | Comp::Prj(..) => unreachable!(),
    };
    let d = frames.len();
    Outcome::Step(plug(frames, result), rule, d)
}

/// Decompose a computation into context and redex.
pub fn decompose(m: &Comp) -> Decomposition {
    let (frames, focus) = match descend(m.clone()) {
        Found::Value(v) => return Decomposition::AlreadyValue(v),
        Found::Focus(f, c) => (f, c),
    };
    let outcome = step_owned(m.clone());
    let rule = match outcome {
        Outcome::Step(_, r, _) => r,
        Outcome::Stuck(s) => return Decomposition::Stuck(s),
        Outcome::Value(v) => return Decomposition::AlreadyValue(v),
    };
    // Consumed frames belong to the redex, not the context.
    let keep = match rule {
        Rule::LetReturn | Rule::AppLam | Rule::PrjCpair => frames.len() - 1,
        Rule::HandleOp | Rule::ReifyReflect | Rule::ResetShift0 => {
            frames.iter().rposition(|f| !f.is_basic()).expect("control rule without delimiter")
        }
        _ => frames.len(),
    };
    let mut context = frames;
    let inner = context.split_off(keep);
    let redex = plug(inner, focus);
    Decomposition::Redex { context, redex, rule }
}

/// One step, if the computation can take one.
pub fn step(m: &Comp) -> Result<(Comp, Rule, usize), Option<StuckReason>> {
    match step_owned(m.clone()) {
        Outcome::Step(c, r, d) => Ok((c, r, d)),
        Outcome::Value(_) => Err(None),
        Outcome::Stuck(s) => Err(Some(s)),
    }
}

/// Contract a redex under its context.
pub fn beta_step(context: Vec<Frame>, redex: Comp) -> Result<Comp, StuckReason> {
    match step_owned(redex) {
        Outcome::Step(c, _, _) => Ok(plug(context, c)),
        Outcome::Stuck(s) => Err(s),
        Outcome::Value(_) => Err(StuckReason::IllFormed("not a redex".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    NormalForm(Value),
    OutOfFuel,
    Stuck(StuckReason),
}

impl Status {
    pub fn value(&self) -> Option<&Value> {
        match self {
            Status::NormalForm(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    /// Depth of the frame stack at which the rule fired.
    pub depth: usize,
    pub rule: Rule,
    pub term: Comp,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<Step>,
    pub step_count: u64,
    pub status: Status,
    /// The final term.
    pub last: Comp,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("cannot run an open term: {0}")]
    Open(#[from] ScopeError),
}

/// Run with every step recorded.
pub fn run(m: &Comp, fuel: u64) -> Result<Trace, RunError> {
    run_with(m, fuel, true)
}

/// Run without recording intermediate terms.
pub fn run_quiet(m: &Comp, fuel: u64) -> Result<Trace, RunError> {
    run_with(m, fuel, false)
}

pub fn run_with(m: &Comp, fuel: u64, record: bool) -> Result<Trace, RunError> {
    ast::scope_check(m, 0)?;
    let mut steps = Vec::new();
    let mut cur = m.clone();
    let mut n = 0;
    loop {
        if n >= fuel {
            return Ok(Trace { steps, step_count: n, status: Status::OutOfFuel, last: cur });
        }
        match step_owned(cur.clone()) {
            Outcome::Value(v) => return Ok(Trace { steps, step_count: n, status: Status::NormalForm(v), last: cur }),
            Outcome::Stuck(s) => return Ok(Trace { steps, step_count: n, status: Status::Stuck(s), last: cur }),
            Outcome::Step(next, rule, depth) => {
                if record {
                    steps.push(Step { depth, rule, term: next.clone() });
                }
                cur = next;
                n += 1;
            }
        }
    }
}

#[derive(Serialize)]
struct StepJson {
    depth: usize,
    rule: &'static str,
    term: String,
}

impl Trace {
    /// `{steps: [{depth, rule, term}], status}`
    pub fn to_json(&self) -> serde_json::Value {
        let steps: Vec<StepJson> = self
            .steps
            .iter()
            .map(|s| StepJson { depth: s.depth, rule: s.rule.name(), term: print_comp(&s.term) })
            .collect();
        let status = match &self.status {
            Status::NormalForm(v) => serde_json::json!({"kind": "normal-form", "value": crate::surface::print_value(v)}),
            Status::OutOfFuel => serde_json::json!({"kind": "out-of-fuel"}),
            Status::Stuck(r) => serde_json::json!({"kind": "stuck", "reason": r, "message": r.to_string()}),
        };
        serde_json::json!({"steps": steps, "step_count": self.step_count, "status": status})
    }
}

#[cfg(test)]
mod tests;
