//! Checking that a translation simulates the source reduction step by step.

use serde::Serialize;

use super::admin::admin_normalize_counted;
use super::{translate, TranslationId, XlateError};
use crate::ast::{at_path, children, map_children, Comp};
use crate::opsem::{run, step, RunError, Status};
use crate::surface::{print_comp, print_value};

/// Plain target steps tried per source step.
pub const SEARCH_DEPTH: usize = 32;
/// Reductions under binders tried from each state of the plain search.
const REPAIR_LIMIT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    Exact,
    UpToCongruence,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimStep {
    pub index: usize,
    pub rule: &'static str,
    /// Plain target steps taken.
    pub target_steps: usize,
    /// Reductions performed under binders, away from the evaluation position.
    pub congruence_steps: usize,
    /// Administrative redexes contracted to close the gap.
    pub suspended_redexes: usize,
    pub mode: SimMode,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    pub translation: String,
    pub mode: SimMode,
    pub steps: Vec<SimStep>,
    /// The source's final status, printed.
    pub result: String,
}

impl SimReport {
    pub fn suspended_total(&self) -> usize {
        self.steps.iter().map(|s| s.suspended_redexes).sum()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SimFailure {
    pub index: usize,
    pub rule: &'static str,
    pub source_before: String,
    pub source_after: String,
    pub target_before: String,
    pub target_after: String,
    /// The search bound ran out; the step is neither matched nor refuted.
    pub inconclusive: bool,
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Xlate(#[from] XlateError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("step {} ({}) not simulated{}", .0.index, .0.rule, if .0.inconclusive { " within the search bound" } else { "" })]
    Mismatch(Box<SimFailure>),
}

/// Run `src` in its own calculus and check that the translation of each
/// source term reaches the translation of the next.
pub fn simulate_check(src: &Comp, id: TranslationId, fuel: u64) -> Result<SimReport, SimError> {
    let trace = run(src, fuel)?;
    let mode = if id.on_the_nose() { SimMode::Exact } else { SimMode::UpToCongruence };
    let mut before = src.clone();
    let mut t_before = translate(src, id)?;
    let mut steps = Vec::new();
    for (index, s) in trace.steps.iter().enumerate() {
        let t_after = translate(&s.term, id)?;
        let found = match mode {
            SimMode::Exact => exact(&t_before, &t_after),
            SimMode::UpToCongruence => congruent(&t_before, &t_after),
        };
        match found {
            Ok(Found { plain, congruence, admin, mode }) => steps.push(SimStep {
                index,
                rule: s.rule.name(),
                target_steps: plain,
                congruence_steps: congruence,
                suspended_redexes: admin,
                mode,
            }),
            Err(inconclusive) => {
                return Err(SimError::Mismatch(Box::new(SimFailure {
                    index,
                    rule: s.rule.name(),
                    source_before: print_comp(&before),
                    source_after: print_comp(&s.term),
                    target_before: print_comp(&t_before),
                    target_after: print_comp(&t_after),
                    inconclusive,
                })))
            }
        }
        before = s.term.clone();
        t_before = t_after;
    }
    let result = match &trace.status {
        Status::NormalForm(v) => format!("return {}", print_value(v)),
        Status::OutOfFuel => "out of fuel".into(),
        Status::Stuck(r) => format!("stuck: {r}"),
    };
    Ok(SimReport { translation: id.to_string(), mode, steps, result })
}

struct Found {
    plain: usize,
    congruence: usize,
    admin: usize,
    mode: SimMode,
}

/// Plain steps until the goal is reached verbatim. `Err(true)` when the
/// bound runs out, `Err(false)` when the target stops first.
fn exact(from: &Comp, goal: &Comp) -> Result<Found, bool> {
    let mut cur = from.clone();
    for n in 1..=SEARCH_DEPTH {
        cur = match step(&cur) {
            Ok((next, _, _)) => next,
            Err(_) => return Err(false),
        };
        if cur == *goal {
            return Ok(Found { plain: n, congruence: 0, admin: 0, mode: SimMode::Exact });
        }
    }
    Err(true)
}

/// Breadth-first search over plain steps, each state also taken in
/// administrative normal form, until a state normalises to the goal's
/// normal form. If none does, each visited state is repaired towards the
/// goal by reducing where it first differs from it, possibly under binders.
fn congruent(from: &Comp, goal: &Comp) -> Result<Found, bool> {
    if let Ok(found) = exact(from, goal) {
        return Ok(found);
    }
    let found = |plain, congruence, admin| Found { plain, congruence, admin, mode: SimMode::UpToCongruence };
    let (goal_nf, _) = admin_normalize_counted(goal);
    let (from_nf, n0) = admin_normalize_counted(from);
    if from_nf == goal_nf && n0 > 0 {
        // The source step is itself administrative in the target.
        return Ok(found(0, 0, n0));
    }
    let mut visited: Vec<(usize, Comp)> = vec![(0, from_nf.clone())];
    let mut seen: Vec<Comp> = vec![from.clone(), from_nf.clone()];
    let mut frontier = vec![from.clone(), from_nf];
    let mut exhausted = true;
    for depth in 1..=SEARCH_DEPTH {
        let mut next = Vec::new();
        for t in &frontier {
            let Ok((s, _, _)) = step(t) else { continue };
            let (nf, k) = admin_normalize_counted(&s);
            if nf == goal_nf {
                return Ok(found(depth, 0, k));
            }
            visited.push((depth, nf.clone()));
            for c in [s, nf] {
                if !seen.contains(&c) {
                    seen.push(c.clone());
                    next.push(c);
                }
            }
        }
        if next.is_empty() {
            exhausted = false;
            break;
        }
        frontier = next;
    }
    for (depth, t) in visited {
        if let Some((congruence, admin)) = repair(&t, &goal_nf) {
            return Ok(found(depth, congruence, admin));
        }
    }
    Err(exhausted)
}

/// Reduce `t` where it first differs from `goal` until the two agree.
fn repair(t: &Comp, goal: &Comp) -> Option<(usize, usize)> {
    let mut cur = t.clone();
    let mut admin = 0;
    for n in 1..=REPAIR_LIMIT {
        let path = mismatch(&cur, goal, Vec::new())?;
        // The redex is the differing node or one of its ancestors.
        let next = (0..=path.len()).rev().find_map(|len| {
            let sub = at_path(&cur, &path[..len])?;
            let (reduced, _, _) = step(sub).ok()?;
            Some(replace_at(&cur, &path[..len], reduced))
        })?;
        let (nf, k) = admin_normalize_counted(&next);
        admin += k;
        if nf == *goal {
            return Some((n, admin));
        }
        cur = nf;
    }
    None
}

/// Path to the outermost node where `a` and `b` differ, if they do.
fn mismatch(a: &Comp, b: &Comp, mut path: Vec<usize>) -> Option<Vec<usize>> {
    if a == b {
        return None;
    }
    let shell = |c: &Comp| map_children(c, &mut |_| Comp::Return(crate::ast::Value::Unit));
    if shell(a) != shell(b) {
        return Some(path);
    }
    let (ca, cb) = (children(a), children(b));
    let i = ca.iter().zip(&cb).position(|((x, _), (y, _))| x != y)?;
    path.push(i);
    mismatch(ca[i].0, cb[i].0, path)
}

fn replace_at(c: &Comp, path: &[usize], by: Comp) -> Comp {
    let Some((&first, rest)) = path.split_first() else { return by };
    let mut i = 0;
    let mut by = Some(by);
    map_children(c, &mut |ch| {
        let out = if i == first { replace_at(ch, rest, by.take().unwrap()) } else { ch.clone() };
        i += 1;
        out
    })
}
