use super::*;
use crate::ast::{self, Calculus};
use crate::surface::{parse, parse_comp, print_value};

fn program(file: &str, calc: Calculus) -> Comp {
    let path = format!("{}/../../programs/{file}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap();
    parse(&text, calc).unwrap().main.unwrap()
}

fn result(m: &Comp) -> String {
    let t = run_quiet(m, DEFAULT_FUEL).unwrap();
    match t.status {
        Status::NormalForm(v) => print_value(&v),
        s => panic!("did not finish: {s:?}"),
    }
}

#[test]
fn state_passing_toggle() {
    assert_eq!(result(&program("state.mam", Calculus::Mam)), "<tru, fls>");
}

#[test]
fn handler_toggle() {
    assert_eq!(result(&program("state.eff", Calculus::Eff)), "tru");
}

#[test]
fn monadic_toggle() {
    assert_eq!(result(&program("state.mon", Calculus::Mon)), "<tru, fls>");
}

#[test]
fn delimited_toggle() {
    assert_eq!(result(&program("state.del", Calculus::Del)), "tru");
}

#[test]
fn handler_toggle_passes_through_final_state() {
    // The handled computation finishes with tru and the final state fls is applied.
    let t = run(&program("state.eff", Calculus::Eff), DEFAULT_FUEL).unwrap();
    let want = parse_comp("(handle return tru with { return x -> fun s -> return x }) fls", Calculus::Eff).unwrap();
    let reached = t.steps.iter().any(|s| match (&s.term, &want) {
        (Comp::App(h, v), Comp::App(h2, v2)) => match (&**h, &**h2) {
            (Comp::Handle { body, .. }, Comp::Handle { body: b2, .. }) => body == b2 && v == v2,
            _ => false,
        },
        _ => false,
    });
    assert!(reached);
    assert_eq!(t.steps.iter().filter(|s| s.rule == Rule::HandleOp).count(), 2);
}

#[test]
fn reset_toggle_passes_through_final_state() {
    let t = run(&program("state.del", Calculus::Del), DEFAULT_FUEL).unwrap();
    let want = parse_comp("(reset return tru as x in fun s -> return x) fls", Calculus::Del).unwrap();
    assert!(t.steps.iter().any(|s| s.term == want));
    assert_eq!(t.steps.iter().filter(|s| s.rule == Rule::ResetShift0).count(), 2);
}

#[test]
fn decompose_value() {
    assert!(matches!(decompose(&ast::ret(Value::Unit)), Decomposition::AlreadyValue(Value::Unit)));
}

#[test]
fn decompose_let_frame() {
    let m = parse_comp("let x <- (fun y -> return y) () in return x", Calculus::Mam).unwrap();
    match decompose(&m) {
        Decomposition::Redex { context, redex, rule } => {
            assert_eq!(context.len(), 1);
            assert!(matches!(context[0], Frame::Let { .. }));
            assert_eq!(rule, Rule::AppLam);
            assert_eq!(redex, parse_comp("(fun y -> return y) ()", Calculus::Mam).unwrap());
        }
        d => panic!("{d:?}"),
    }
}

#[test]
fn decompose_hoists_to_handler() {
    let m = parse_comp(
        "handle (let x <- get! () in return x) with { get(_; k) -> force k tru }",
        Calculus::Eff,
    )
    .unwrap();
    match decompose(&m) {
        Decomposition::Redex { context, redex, rule } => {
            assert!(context.is_empty());
            assert_eq!(rule, Rule::HandleOp);
            assert_eq!(redex, m);
        }
        d => panic!("{d:?}"),
    }
    assert_eq!(result(&m), "tru");
}

#[test]
fn not_tru() {
    let m = parse_comp("force (thunk fun x -> case x of { False -> return tru | True -> return fls }) tru", Calculus::Mam)
        .unwrap();
    assert_eq!(result(&m), "fls");
}

#[test]
fn stuck_reasons() {
    let stuck = |src: &str, calc| run_quiet(&parse_comp(src, calc).unwrap(), 100).unwrap().status;
    assert_eq!(stuck("tick! ()", Calculus::Eff), Status::Stuck(StuckReason::UnhandledOp("tick".into())));
    assert_eq!(
        stuck("handle tick! () with { other(_; k) -> return () }", Calculus::Eff),
        Status::Stuck(StuckReason::UnhandledOp("tick".into()))
    );
    assert_eq!(stuck("shift0 k -> return ()", Calculus::Del), Status::Stuck(StuckReason::ShiftWithoutReset));
    assert_eq!(stuck("reflect (return ())", Calculus::Mon), Status::Stuck(StuckReason::ReflectWithoutReify));
}

#[test]
fn self_application_diverges() {
    let m = parse_comp("force (thunk fun f -> force f f) (thunk fun f -> force f f)", Calculus::Eff).unwrap();
    let t = run_quiet(&m, 10_000).unwrap();
    assert_eq!(t.status, Status::OutOfFuel);
    assert_eq!(t.step_count, 10_000);
}

#[test]
fn open_terms_are_rejected() {
    assert!(run(&ast::ret(Value::Var(0)), 10).is_err());
}

#[test]
fn deterministic() {
    let m = program("state.mon", Calculus::Mon);
    assert_eq!(run(&m, DEFAULT_FUEL).unwrap(), run(&m, DEFAULT_FUEL).unwrap());
}

#[test]
fn trace_json_shape() {
    let t = run(&program("state.mam", Calculus::Mam), DEFAULT_FUEL).unwrap();
    let j = t.to_json();
    assert_eq!(j["status"]["kind"], "normal-form");
    assert_eq!(j["steps"].as_array().unwrap().len() as u64, t.step_count);
    assert!(j["steps"][0]["rule"].is_string());
}
