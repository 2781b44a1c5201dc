use super::admin::admin_step;
use super::*;
use crate::ast::{alpha_eq, Calculus, Comp, Value};
use crate::denot::{check_monad_laws, DEFAULT_BUDGET};
use crate::opsem::run_quiet;
use crate::surface::{parse, parse_comp, parse_effect, parse_vtype, print_comp, print_ctype, SourceFile};
use crate::typesys::types::{CType, Effect, VType};
use crate::typesys::{check_handler, check_program, Env};

const FUEL: u64 = 1_000_000;

fn file(name: &str) -> SourceFile {
    let calc = Calculus::from_extension(name.rsplit('.').next().unwrap()).unwrap();
    let path = format!("{}/../../programs/{name}", env!("CARGO_MANIFEST_DIR"));
    parse(&std::fs::read_to_string(path).unwrap(), calc).unwrap()
}

fn main_of(name: &str) -> Comp {
    file(name).main.unwrap()
}

const GOLDEN: &[&str] = &["state.eff", "state.mon", "state.del", "tick.eff", "two_answers.eff", "reader_counterexample.mon"];

fn ids_from(calc: Calculus) -> Vec<TranslationId> {
    TranslationId::all().into_iter().filter(|id| id.source == calc).collect()
}

fn value_of(m: &Comp) -> Value {
    let t = run_quiet(m, FUEL).unwrap();
    t.status.value().cloned().unwrap_or_else(|| panic!("{:?}: {}", t.status, print_comp(&t.last)))
}

#[test]
fn translation_ids() {
    assert_eq!(TranslationId::all().len(), 9);
    assert!(TranslationId::new(Calculus::Del, Calculus::Mon, Variant::Nested).is_err());
    assert!(TranslationId::new(Calculus::Eff, Calculus::Mon, Variant::FreeMonad).is_ok());
    assert!(TranslationId::new(Calculus::Mam, Calculus::Eff, Variant::Default).is_err());
    let bad = TranslationId { source: Calculus::Eff, target: Calculus::Eff, variant: Variant::Default };
    assert!(matches!(translate(&main_of("state.mam"), bad), Err(XlateError::InvalidId(..))));
    assert_eq!("free-monad".parse::<Variant>().unwrap(), Variant::FreeMonad);
}

#[test]
fn core_terms_are_fixed_by_every_translation() {
    let terms = [
        main_of("state.mam"),
        parse_comp(
            "let p <- return <tru, inj[{A: 1 | B: bit}] B fls> in split p as <x, y> in \
             case y of { A u -> prj1 <| return x, return u |> | B b -> (fun z -> force (thunk return z)) b }",
            Calculus::Mam,
        )
        .unwrap(),
    ];
    for m in &terms {
        for id in TranslationId::all() {
            assert_eq!(&translate(m, id).unwrap(), m, "{id}");
        }
    }
}

#[test]
fn clause_shapes() {
    let del = Calculus::Del;
    let s = parse_comp("shift0 k -> return ()", del).unwrap();
    let id = TranslationId::new(del, Calculus::Eff, Variant::Default).unwrap();
    assert_eq!(print_comp(&translate(&s, id).unwrap()), "shift0! (thunk fun _ -> return ())");

    let r = parse_comp("reset return () as x in return x", del).unwrap();
    let id = TranslationId::new(del, Calculus::Mon, Variant::Default).unwrap();
    match translate(&r, id).unwrap() {
        Comp::App(m, Value::Thunk { body, .. }) => {
            assert!(matches!(*m, Comp::Reify { .. }));
            assert!(matches!(*body, Comp::Lam { .. }));
        }
        other => panic!("{}", print_comp(&other)),
    }

    // Handlers with an operation named like the free monad's return label are refused.
    let h = parse_comp("handle return () with { return x -> return x | ret(_; k) -> force k () }", Calculus::Eff).unwrap();
    let id = TranslationId::new(Calculus::Eff, Calculus::Mon, Variant::FreeMonad).unwrap();
    assert_eq!(translate(&h, id), Err(XlateError::ReservedLabel("ret".into())));

    // Constructs of another calculus are rejected.
    let id = TranslationId::new(Calculus::Mon, Calculus::Eff, Variant::Default).unwrap();
    assert!(matches!(translate(&s, id), Err(XlateError::Source(_))));
}

#[test]
fn translated_programs_reach_the_same_value() {
    for name in GOLDEN {
        let m = main_of(name);
        let v = value_of(&m);
        let calc = file(name).calculus;
        for id in ids_from(calc) {
            let t = translate(&m, id).unwrap();
            let w = value_of(&t);
            assert!(
                alpha_eq(&admin_normalize(&Comp::Return(w.clone())), &Comp::Return(v.clone())),
                "{name} under {id}: {} vs {}",
                crate::surface::print_value(&w),
                crate::surface::print_value(&v)
            );
        }
    }
}

#[test]
fn simulation_on_golden_programs() {
    for name in GOLDEN {
        let m = main_of(name);
        for id in ids_from(file(name).calculus) {
            let r = simulate_check(&m, id, FUEL).unwrap_or_else(|e| match e {
                SimError::Mismatch(ref f) => panic!("{name} under {id}: {e}\n{f:#?}"),
                e => panic!("{name} under {id}: {e}"),
            });
            assert!(!r.steps.is_empty());
            assert!(r.steps.iter().all(|s| s.target_steps + s.suspended_redexes >= 1), "{name} under {id}");
            if id.on_the_nose() {
                assert_eq!(r.mode, SimMode::Exact);
                assert!(r.steps.iter().all(|s| s.mode == SimMode::Exact && s.target_steps >= 1));
            }
        }
    }
    let id = TranslationId::new(Calculus::Eff, Calculus::Mon, Variant::Default).unwrap();
    let r = simulate_check(&main_of("state.eff"), id, FUEL).unwrap();
    assert_eq!(r.mode, SimMode::UpToCongruence);
    assert!(r.suspended_total() > 0);
}

#[test]
fn shift0_and_reflect_clauses_are_exact() {
    let id = TranslationId::new(Calculus::Del, Calculus::Eff, Variant::Default).unwrap();
    let r = simulate_check(&main_of("state.del"), id, FUEL).unwrap();
    let shift = r.steps.iter().find(|s| s.rule == "reset-shift0").unwrap();
    // handle-op, then forcing the captured body and applying it to the continuation.
    assert_eq!(shift.target_steps, 3);
    let id = TranslationId::new(Calculus::Mon, Calculus::Eff, Variant::Default).unwrap();
    let r = simulate_check(&main_of("state.mon"), id, FUEL).unwrap();
    let reflect = r.steps.iter().find(|s| s.rule == "reify-reflect").unwrap();
    assert_eq!(reflect.target_steps, 1);
}

#[test]
fn variants_agree() {
    for (name, a, b) in [
        ("state.eff", (Calculus::Del, Variant::Default), (Calculus::Del, Variant::Nested)),
        ("tick.eff", (Calculus::Del, Variant::Default), (Calculus::Del, Variant::Nested)),
        ("state.eff", (Calculus::Mon, Variant::Default), (Calculus::Mon, Variant::FreeMonad)),
        ("tick.eff", (Calculus::Mon, Variant::Default), (Calculus::Mon, Variant::FreeMonad)),
        ("state.mon", (Calculus::Del, Variant::Default), (Calculus::Del, Variant::Nested)),
    ] {
        let m = main_of(name);
        let src = file(name).calculus;
        let run = |(t, v)| {
            let id = TranslationId::new(src, t, v).unwrap();
            admin_normalize(&Comp::Return(value_of(&translate(&m, id).unwrap())))
        };
        assert!(alpha_eq(&run(a), &run(b)), "{name}");
    }
}

#[test]
fn delimited_control_translates_to_typed_monads() {
    let m = main_of("state.del");
    let d = check_program(&m, Calculus::Del).unwrap();
    let id = TranslationId::new(Calculus::Del, Calculus::Mon, Variant::Default).unwrap();
    let t = translate_derivation(&d, id).unwrap();
    let dt = check_program(&t, Calculus::Mon).unwrap();
    assert_eq!(dt.root().ctype, translate_ctype_del_to_mon(&d.root().ctype));
    assert_eq!(dt.root().ctype, CType::f(VType::bit()));
    assert!(alpha_eq(&Comp::Return(value_of(&t)), &Comp::Return(crate::ast::tru())));

    // The one layer is the continuation monad at answer type bit -> F bit.
    let mut layers = Vec::new();
    collect_reify(&t, &mut layers);
    assert_eq!(layers.len(), 1);
    assert_eq!(print_ctype(&layers[0].carrier), "U[] (a -> bit -> F bit) -> bit -> F bit");
    let r = check_monad_laws(&layers[0], &Effect::Pure, &[0, 1, 2], DEFAULT_BUDGET / 10, 3).unwrap();
    assert!(r.holds(), "{:?}", r.witness);
}

fn collect_reify(c: &Comp, out: &mut Vec<std::rc::Rc<crate::ast::MonadDef>>) {
    if let Comp::Reify { monad, .. } = c {
        out.push(monad.clone());
    }
    for (ch, _) in crate::ast::children(c) {
        collect_reify(ch, out);
    }
}

#[test]
fn type_translation() {
    assert_eq!(translate_effect_del_to_mon(&Effect::Pure), Effect::Pure);
    let state = parse_effect("[bit -> F bit]", Calculus::Del).unwrap();
    match translate_effect_del_to_mon(&state) {
        Effect::Mon { base, layer } => {
            assert_eq!(*base, Effect::Pure);
            assert_eq!(print_ctype(&layer.carrier), "U[] (a -> bit -> F bit) -> bit -> F bit");
            assert!(crate::typesys::check_monad(&layer, &Effect::Pure).is_ok());
        }
        e => panic!("{e:?}"),
    }
    let t = parse_vtype("U[bit -> F bit] F bit", Calculus::Del).unwrap();
    assert!(translate_vtype_del_to_mon(&t).foreign_construct(Calculus::Mon).is_none());
}

#[test]
fn reader_counterexample_is_not_typeable_after_translation() {
    let m = main_of("reader_counterexample.mon");
    if let Err(e) = check_program(&m, Calculus::Mon) {
        panic!("{e}");
    }
    assert_eq!(value_of(&m), crate::ast::tru());
    let id = TranslationId::new(Calculus::Mon, Calculus::Eff, Variant::Default).unwrap();
    let t = translate(&m, id).unwrap();
    assert!(check_program(&t, Calculus::Eff).is_err());
    // Untyped, it still runs to the same value.
    assert_eq!(value_of(&t), crate::ast::tru());
}

#[test]
fn answer_types_that_differ_are_not_typeable_after_translation() {
    // One thunk performing `flip`, handled at two output types.
    let m = main_of("two_answers.eff");
    assert!(check_program(&m, Calculus::Eff).is_ok());
    for variant in [Variant::Default, Variant::Nested] {
        let t = translate(&m, TranslationId::new(Calculus::Eff, Calculus::Del, variant).unwrap()).unwrap();
        assert!(check_program(&t, Calculus::Del).is_err(), "{variant}");
        assert_eq!(value_of(&t), crate::ast::tru());
    }
    // A reset whose shifts return at `bit` and at `1`.
    let m = main_of("state.del");
    assert!(check_program(&m, Calculus::Del).is_ok());
    let t = translate(&m, TranslationId::new(Calculus::Del, Calculus::Eff, Variant::Default).unwrap()).unwrap();
    assert!(check_program(&t, Calculus::Eff).is_err());
}

#[test]
fn coercion_handlers() {
    let tick = parse_effect("[tick: 1 -> 1]", Calculus::Eff).unwrap();
    let both = parse_effect("[tick: 1 -> 1, tock: 1 -> 1]", Calculus::Eff).unwrap();
    let (h, ty) = coercion_handler(&Effect::Pure, &tick, &VType::Unit).unwrap();
    assert!(h.ops.is_empty());
    assert!(check_handler(&h, &Env::empty(), Some(&ty), Calculus::Eff).is_ok());

    let (h, ty) = coercion_handler(&tick, &both, &VType::Unit).unwrap();
    assert_eq!(h.ops.keys().collect::<Vec<_>>(), vec!["tick"]);
    let (_, got) = check_handler(&h, &Env::empty(), Some(&ty), Calculus::Eff).unwrap();
    assert_eq!(got, ty);
    assert!(matches!(coercion_handler(&both, &tick, &VType::Unit), Err(XlateError::NotIncluded(_))));

    // Coercing inside a counting handler changes nothing.
    let counter = crate::denot::counting_handler(2, 1);
    let plain = format!("(handle tick! (); return () with {counter}) (inj C0 ())");
    let inner = crate::surface::print_handler(&h);
    let coerced = format!("(handle (handle tick! (); return () with {inner}) with {counter}) (inj C0 ())");
    let a = value_of(&parse_comp(&plain, Calculus::Eff).unwrap());
    let b = value_of(&parse_comp(&coerced, Calculus::Eff).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, crate::ast::tru());
}

#[test]
fn administrative_normalisation() {
    let m = parse_comp("fun c -> return thunk fun y -> force (thunk fun y' -> force c y') y", Calculus::Mam).unwrap();
    let (nf, n) = admin_normalize_counted(&m);
    assert_eq!(print_comp(&nf), "fun c -> return thunk fun y -> force c y");
    assert_eq!(n, 2);
    let plain = parse_comp("fun x -> force x ()", Calculus::Mam).unwrap();
    assert_eq!(admin_normalize(&plain), plain);
    // `(fun x -> M) V` with V not a variable is not administrative.
    let app = parse_comp("(fun x -> return x) ()", Calculus::Mam).unwrap();
    assert_eq!(admin_normalize(&app), app);
}

#[test]
fn administrative_normal_forms_do_not_depend_on_order() {
    for name in GOLDEN {
        let m = main_of(name);
        for id in ids_from(file(name).calculus) {
            let t = translate(&m, id).unwrap();
            let trace = crate::opsem::run(&t, 200).unwrap();
            for s in trace.steps.iter().take(40) {
                let mut cur = s.term.clone();
                while let Some(next) = admin_step(&cur) {
                    cur = next;
                }
                assert_eq!(cur, admin_normalize(&s.term), "{name} under {id}");
            }
        }
    }
}
