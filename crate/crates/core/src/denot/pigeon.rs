//! The counting argument against a macro translation of handlers into a
//! finite monad, at desk scale: the programs `tick^0 .. tick^K` are pairwise
//! distinguishable by handlers, but a type with fewer than `K+1` elements
//! cannot keep them apart.

use std::fmt::Write as _;

use serde::Serialize;

use super::sets::{cardinality_vtype, Card, Sizes};
use super::DenotError;
use crate::ast::Calculus;
use crate::opsem::{run_quiet, Status};
use crate::surface::{parse_comp, print_comp, print_vtype};
use crate::typesys::check_program;
use crate::typesys::types::VType;

const FUEL: u64 = 100_000;

#[derive(Clone, Debug, Serialize)]
pub struct DistinguishingPair {
    pub n: usize,
    pub m: usize,
    pub handler: String,
    pub result_n: String,
    pub result_m: String,
    pub distinct: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PigeonholeReport {
    pub k: usize,
    pub target: String,
    pub cardinality: Card,
    pub programs: usize,
    pub exceeds: bool,
    pub degenerate: bool,
    pub pairs: Vec<DistinguishingPair>,
}

impl PigeonholeReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "target type:   {}", self.target);
        let _ = writeln!(s, "cardinality N: {}", self.cardinality);
        let _ = writeln!(s, "programs K+1:  {} (tick^0 .. tick^{})", self.programs, self.k);
        if self.degenerate {
            let _ = writeln!(s, "no pairs to distinguish");
            return s;
        }
        let _ = writeln!(s, "K+1 > N:       {}", self.exceeds);
        for p in &self.pairs {
            let _ = writeln!(
                s,
                "  H_{{{},{}}}: tick^{} -> {}, tick^{} -> {}{}",
                p.n,
                p.m,
                p.n,
                p.result_n,
                p.m,
                p.result_m,
                if p.distinct { "" } else { "  (NOT distinct)" }
            );
        }
        if self.exceeds && self.pairs.iter().all(|p| p.distinct) {
            let _ = writeln!(s, "any map from the {} programs into {} elements identifies two distinguishable programs", self.programs, self.cardinality);
        }
        s
    }
}

/// `tick! (); ... ; return ()` with `n` ticks.
pub fn ticks(n: usize) -> String {
    let mut s = String::new();
    for _ in 0..n {
        s.push_str("tick! (); ");
    }
    s.push_str("return ()");
    s
}

/// A handler counting ticks in `C0 .. CK` (capped at `CK`) from an initial
/// counter passed as an argument, returning `tru` iff the count is `n`.
pub fn counting_handler(k: usize, n: usize) -> String {
    let arms = |f: &dyn Fn(usize) -> String| (0..=k).map(|i| format!("C{i} -> {}", f(i))).collect::<Vec<_>>().join(" | ");
    let ret = arms(&|i| if i == n { "return tru".into() } else { "return fls".into() });
    let tick = arms(&|i| format!("force k () (inj C{} ())", (i + 1).min(k)));
    format!("{{ return _ -> fun c -> case c of {{ {ret} }} | tick(_; k) -> fun c -> case c of {{ {tick} }} }}")
}

/// Run `tick^n` under the handler and return the printed normal form.
pub fn run_counted(handler: &str, n: usize) -> Result<String, DenotError> {
    let text = format!("(handle {} with {handler}) (inj C0 ())", ticks(n));
    let prog = parse_comp(&text, Calculus::Eff).map_err(|e| DenotError::Ill(format!("generated program: {e}")))?;
    check_program(&prog, Calculus::Eff)?;
    let trace = run_quiet(&prog, FUEL).map_err(|e| DenotError::Ill(e.to_string()))?;
    match &trace.status {
        Status::NormalForm(_) => Ok(print_comp(&trace.last)),
        s => Err(DenotError::Ill(format!("generated program did not finish: {s:?}"))),
    }
}

pub fn pigeonhole_demo(k: usize, target: &VType) -> Result<PigeonholeReport, DenotError> {
    let card = cardinality_vtype(target, &Sizes::new())?;
    let programs = k + 1;
    let exceeds = match &card {
        Card::Finite(n) => num_bigint::BigUint::from(programs) > *n,
        Card::Infinite => false,
    };
    let mut report = PigeonholeReport {
        k,
        target: print_vtype(target),
        cardinality: card.clone(),
        programs,
        exceeds,
        degenerate: k == 0,
        pairs: Vec::new(),
    };
    if k == 0 {
        return Ok(report);
    }
    if !exceeds {
        return Err(DenotError::Precondition(format!("{programs} programs do not exceed the {card} elements of {}", report.target)));
    }
    for n in 0..=k {
        for m in n + 1..=k {
            let handler = counting_handler(k, n);
            let result_n = run_counted(&handler, n)?;
            let result_m = run_counted(&handler, m)?;
            let distinct = result_n != result_m;
            report.pairs.push(DistinguishingPair { n, m, handler, result_n, result_m, distinct });
        }
    }
    Ok(report)
}
