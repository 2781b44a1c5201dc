use std::rc::Rc;

use super::*;
use crate::ast::MonadDef;
use crate::opsem::run_quiet;
use crate::surface::{parse, parse_comp, parse_ctype, parse_effect, parse_vtype, SourceFile};
use crate::typesys::check_comp;
use crate::typesys::types::{CType, Effect, VType};
use crate::typesys::Env;

fn file(name: &str, calc: Calculus) -> SourceFile {
    let path = format!("{}/../../programs/{name}", env!("CARGO_MANIFEST_DIR"));
    parse(&std::fs::read_to_string(path).unwrap(), calc).unwrap()
}

fn monad(text: &str) -> Rc<MonadDef> {
    match parse_effect(&format!("[{text}]"), Calculus::Mon).unwrap() {
        Effect::Mon { layer, .. } => layer,
        e => panic!("not a monad layer: {e:?}"),
    }
}

const STATE: &str = "where a. bit -> F (a * bit) { return x -> fun s -> return <x, s> | m >>= f -> fun s -> let <x, s'> <- force m s in force f x s' }";
const CONT: &str = "where a. U[] (a -> F bit) -> F bit { return x -> fun k -> force k x | m >>= f -> fun k -> force m (thunk fun x -> force f x k) }";
// Runs the continuation from the state the computation started in.
const LEAKY_STATE: &str = "where a. bit -> F (a * bit) { return x -> fun s -> return <x, s> | m >>= f -> fun s -> let <x, s'> <- force m s in force f x s }";

fn card(t: &str, calc: Calculus) -> Card {
    cardinality_vtype(&parse_vtype(t, calc).unwrap(), &Sizes::new()).unwrap()
}

#[test]
fn small_type_denotations() {
    let bit = den_vtype(&VType::bit(), &Assignment::new()).unwrap();
    assert_eq!(bit.len(), 2);
    assert_eq!(bit[0], Elem::bit(false));
    let fns = den_vtype(&parse_vtype("U[] (bit -> F bit)", Calculus::Mam).unwrap(), &Assignment::new()).unwrap();
    assert_eq!(fns.len(), 4);
    assert!(fns.iter().all(|f| matches!(f, Elem::Table(rows) if rows.len() == 2)));
    assert!(den_vtype(&VType::empty(), &Assignment::new()).unwrap().is_empty());
    assert_eq!(card("bit", Calculus::Mam), Card::n(2));
    assert_eq!(card("{}", Calculus::Mam), Card::n(0));
    assert_eq!(card("U[] (bit -> bit -> F (bit * bit))", Calculus::Mam), Card::n(256));
}

#[test]
fn cardinality_agrees_with_enumeration() {
    let types = [
        "1",
        "bit * bit",
        "{A: 1 | B: bit | C: bit * bit}",
        "U[] (bit -> F bit)",
        "U[] (F bit & (1 -> F bit))",
        "U[] ({} -> F bit)",
        "U[] (bit -> F {})",
        "U[] (U[] (bit -> F bit) -> F bit)",
    ];
    for t in types {
        let ty = parse_vtype(t, Calculus::Mam).unwrap();
        let n = den_vtype(&ty, &Assignment::new()).unwrap().len() as u64;
        assert_eq!(cardinality_vtype(&ty, &Sizes::new()).unwrap(), Card::n(n), "{t}");
    }
}

#[test]
fn state_layer_has_sixteen_computations() {
    let f = file("state.mon", Calculus::Mon);
    let t = f.parse_vtype("U[State] F bit").unwrap();
    assert_eq!(cardinality_vtype(&t, &Sizes::new()).unwrap(), Card::n(16));
    assert_eq!(den_vtype(&t, &Assignment::new()).unwrap().len(), 16);
}

#[test]
fn operation_trees() {
    let eff = parse_effect("[tick: 1 -> 1]", Calculus::Eff).unwrap();
    let mut seen = Vec::new();
    for n in 0..=8 {
        let m = parse_comp(&ticks(n), Calculus::Eff).unwrap();
        let d = check_comp(&m, &Env::empty(), &eff, &CType::f(VType::Unit), Calculus::Eff).unwrap();
        let t = den_term(&d, Assignment::new(), &[]).unwrap();
        assert_eq!(t.depth(), n);
        assert!(!seen.contains(&t));
        seen.push(t);
    }
    assert_eq!(seen[2].to_string(), "tick((); tick((); return ()))");
    assert_eq!(cardinality_monad(&eff, &Card::n(1)).unwrap(), Card::Infinite);
    assert!(matches!(monad_set(&eff, &Rc::new(vec![Elem::Unit])), Err(DenotError::Infinite(_))));
    // An operation with no possible results only ever ends a tree.
    let abort = parse_effect("[abort: bit -> {}]", Calculus::Eff).unwrap();
    assert_eq!(cardinality_monad(&abort, &Card::n(1)).unwrap(), Card::n(3));
    assert_eq!(cardinality_monad(&abort, &Card::n(0)).unwrap(), Card::n(2));
    let nothing = parse_effect("[never: {} -> 1]", Calculus::Eff).unwrap();
    assert_eq!(cardinality_monad(&nothing, &Card::n(0)).unwrap(), Card::n(0));
}

fn adequate(name: &str, calc: Calculus) {
    let f = file(name, calc);
    let main = f.main.clone().unwrap();
    let v = run_quiet(&main, 100_000).unwrap().status.value().cloned().unwrap();
    let lhs = den_program(&main, calc).unwrap();
    let rhs = den_program(&Comp::Return(v), calc).unwrap();
    assert_eq!(lhs, rhs, "{name}");
}

#[test]
fn golden_programs_are_adequate() {
    adequate("state.mam", Calculus::Mam);
    adequate("state.eff", Calculus::Eff);
    adequate("state.mon", Calculus::Mon);
    let v = den_program(&file("state.mam", Calculus::Mam).main.unwrap(), Calculus::Mam).unwrap();
    assert_eq!(v.to_string(), "<tru, fls>");
}

#[test]
fn delimited_control_has_no_direct_denotation() {
    let f = file("state.del", Calculus::Del);
    assert!(matches!(den_program(&f.main.unwrap(), Calculus::Del), Err(DenotError::Unsupported(_))));
}

#[test]
fn handler_denotation_folds_the_tree() {
    let prog = "handle (let x <- get! () in put! x; get! ()) with { return x -> fun s -> return <x, s> | get(_; k) -> fun s -> force k s s | put(s'; k) -> fun _ -> force k () s' }";
    let m = parse_comp(prog, Calculus::Eff).unwrap();
    let ty = parse_ctype("bit -> F (bit * bit)", Calculus::Eff).unwrap();
    let d = check_comp(&m, &Env::empty(), &Effect::Pure, &ty, Calculus::Eff).unwrap();
    let e = den_term(&d, Assignment::new(), &[]).unwrap();
    assert_eq!(e.to_string(), "{fls -> <fls, fls>; tru -> <tru, tru>}");
}

#[test]
fn functions_on_unenumerable_domains_are_closures() {
    let m = parse_comp("return thunk fun f -> force f ()", Calculus::Eff).unwrap();
    let ty = parse_vtype("U[tick: 1 -> 1] (U[tick: 1 -> 1] (1 -> F 1) -> F 1)", Calculus::Eff).unwrap();
    let d = check_comp(&m, &Env::empty(), &Effect::Pure, &CType::f(ty), Calculus::Eff).unwrap();
    let f = den_term(&d, Assignment::new(), &[]).unwrap();
    assert!(f.is_opaque());
    let tick = Elem::table(vec![(Elem::Unit, Elem::Node {
        op: "tick".into(),
        param: Rc::new(Elem::Unit),
        children: vec![(Elem::Unit, Elem::leaf(Elem::Unit))].into(),
    })]);
    assert_eq!(f.apply(&tick).unwrap().depth(), 1);
}

#[test]
fn state_and_cont_are_proper_at_small_sizes() {
    for m in [STATE, CONT] {
        let r = check_monad_laws(&monad(m), &Effect::Pure, &[0, 1, 2], DEFAULT_BUDGET, 1).unwrap();
        assert!(r.holds(), "{m}: {:?}", r.witness);
        assert_eq!(r.verdict, "proper-at-tested-sizes");
        assert_eq!(r.checks.len(), 9);
    }
    // At size 1 everything is small enough to enumerate.
    let r = check_monad_laws(&monad(STATE), &Effect::Pure, &[1], DEFAULT_BUDGET, 1).unwrap();
    assert!(r.checks.iter().all(|c| c.exhaustive));
    // T(2) has 16 elements and 2 -> T(2) has 256: 16 * 256 * 256 exceeds the budget.
    let r = check_monad_laws(&monad(STATE), &Effect::Pure, &[2], DEFAULT_BUDGET, 1).unwrap();
    let assoc = r.checks.iter().find(|c| c.law == "associativity").unwrap();
    assert!(!assoc.exhaustive);
    assert_eq!(assoc.cases, DEFAULT_BUDGET);
}

#[test]
fn leaky_state_fails_with_a_witness() {
    let r = check_monad_laws(&monad(LEAKY_STATE), &Effect::Pure, &[0, 1, 2], DEFAULT_BUDGET, 1).unwrap();
    assert_eq!(r.verdict, "improper");
    let w = r.witness.unwrap();
    assert_eq!(w.law, "right-unit");
    assert_eq!(w.size, 1);
    assert_ne!(w.lhs, w.rhs);
    assert_eq!(w.bindings[0].0, "t");
}

#[test]
fn law_checks_are_reproducible() {
    let a = check_monad_laws(&monad(CONT), &Effect::Pure, &[2], 500, 9).unwrap();
    let b = check_monad_laws(&monad(CONT), &Effect::Pure, &[2], 500, 9).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn pigeonhole_at_two() {
    let target = parse_vtype("U[] F bit", Calculus::Mam).unwrap();
    let r = pigeonhole_demo(2, &target).unwrap();
    assert_eq!(r.cardinality, Card::n(2));
    assert_eq!(r.programs, 3);
    assert!(r.exceeds);
    let pairs: Vec<(usize, usize)> = r.pairs.iter().map(|p| (p.n, p.m)).collect();
    assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2)]);
    assert!(r.pairs.iter().all(|p| p.distinct));
    assert!(r.to_text().contains("K+1 > N:       true"));
    let degenerate = pigeonhole_demo(0, &target).unwrap();
    assert!(degenerate.degenerate && degenerate.pairs.is_empty());
    assert!(matches!(pigeonhole_demo(1, &target), Err(DenotError::Precondition(_))));
}

#[test]
fn counting_handler_separates_one_and_two_ticks() {
    let h = counting_handler(2, 1);
    assert_eq!(run_counted(&h, 1).unwrap(), "return tru");
    assert_eq!(run_counted(&h, 2).unwrap(), "return fls");
}

#[test]
fn describe_with_atoms() {
    let t = parse_vtype("bit * bit", Calculus::Mam).unwrap();
    let d = describe_type(&t, &[], 2).unwrap();
    assert_eq!(d.cardinality, Card::n(4));
    assert_eq!(d.sample, vec!["<fls, fls>", "<fls, tru>"]);
    let j = serde_json::to_value(&d).unwrap();
    assert_eq!(j["cardinality"], "4");
    assert_eq!(j["type"], "bit * bit");
}
