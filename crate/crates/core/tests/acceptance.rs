//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

use std::rc::Rc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fxcalc::ast::{alpha_eq, children, Calculus, Comp, MonadDef};
use fxcalc::denot::{
    cardinality_vtype, check_monad_laws, den_program, den_term, pigeonhole_demo, ticks, Assignment, Card, Sizes, DEFAULT_BUDGET,
};
use fxcalc::gen;
use fxcalc::opsem::{run, run_quiet, Status};
use fxcalc::surface::{parse, parse_comp, parse_effect, parse_vtype, print_comp, SourceFile};
use fxcalc::typesys::types::{CType, Effect, VType};
use fxcalc::typesys::{check_comp, check_file, check_program, check_value, kind_check_effect, DefType, Env};
use fxcalc::xlate::{simulate_check, translate, translate_ctype_del_to_mon, translate_derivation, SimMode, TranslationId, Variant, SEARCH_DEPTH};

// Pinned parameters.
const FUEL: u64 = 1_000_000;
const CORPUS: usize = 1000;
const CORPUS_SEED: u64 = 2024;
const ROUND_TRIP_SEED: u64 = 99;
const ROUND_TRIP_DEPTH: usize = 5;
const DIVERGENCE_FUEL: u64 = 100_000;
const LAW_SIZES: [usize; 3] = [0, 1, 2];
const LAW_SEED: u64 = 1;
const TICKS: usize = 8;
const PIGEON_K: usize = 2;

const CALCULI: [Calculus; 4] = [Calculus::Mam, Calculus::Eff, Calculus::Mon, Calculus::Del];
const GOLDEN: &[&str] =
    &["state.mam", "state.eff", "state.mon", "state.del", "tick.eff", "two_answers.eff", "reader_counterexample.mon"];

type Outcome = Result<String, String>;

fn file(name: &str) -> SourceFile {
    let calc = Calculus::from_extension(name.rsplit('.').next().unwrap()).unwrap();
    let path = format!("{}/../../programs/{name}", env!("CARGO_MANIFEST_DIR"));
    parse(&std::fs::read_to_string(&path).unwrap(), calc).unwrap()
}

fn main_of(name: &str) -> Comp {
    file(name).main.unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn final_term(m: &Comp) -> Result<Comp, String> {
    let t = run_quiet(m, FUEL).map_err(|e| e.to_string())?;
    match t.status {
        Status::NormalForm(v) => Ok(Comp::Return(v)),
        s => Err(format!("{s:?}")),
    }
}

fn golden_outputs() -> Outcome {
    let cases = [
        ("state.mam", Calculus::Mam, "return <tru, fls>"),
        ("state.eff", Calculus::Eff, "return tru"),
        ("state.mon", Calculus::Mon, "return <tru, fls>"),
        ("state.del", Calculus::Del, "return tru"),
    ];
    for (name, calc, want) in cases {
        let got = final_term(&main_of(name))?;
        let want = parse_comp(want, calc).unwrap();
        ensure(alpha_eq(&got, &want), || format!("{name}: {}", print_comp(&got)))?;
    }
    let not = file("state.mam").parse_comp("force not tru").unwrap();
    let got = final_term(&not)?;
    ensure(alpha_eq(&got, &parse_comp("return fls", Calculus::Mam).unwrap()), || format!("not tru: {}", print_comp(&got)))?;
    Ok("4 state programs and `not tru`".into())
}

fn golden_types() -> Outcome {
    // (file, definition, listed type)
    let listed: &[(&str, &str, &str)] = &[
        ("state.mam", "not", "U[] (bit -> F bit)"),
        ("state.mam", "get", "U[] (bit -> F (bit * bit))"),
        ("state.mam", "toggle", "U[] (bit -> F (bit * bit))"),
        ("state.mam", "runState", "U[] (U[] (bit -> F (bit * bit)) -> bit -> F (bit * bit))"),
        ("state.eff", "toggle", "U[State] F bit"),
        ("state.eff", "runState", "U[] (U[State] F bit -> bit -> F bit)"),
        ("state.mon", "toggle", "U[State] F bit"),
        ("state.mon", "runState", "U[] (U[State] F bit -> bit -> F (bit * bit))"),
        ("state.mon", "get", "U[State] F bit"),
        ("state.mon", "put", "U[State] (bit -> F 1)"),
        ("state.del", "toggle", "U[State] F bit"),
        ("state.del", "runState", "U[] (U[State] F bit -> bit -> F bit)"),
        ("state.del", "get", "U[State] F bit"),
        ("state.del", "put", "U[State] (bit -> F 1)"),
    ];
    let mut n = 0;
    for (name, def, ty) in listed {
        let f = file(name);
        let types = check_file(&f).map_err(|e| format!("{name}: {e}"))?;
        let want = f.parse_vtype(ty).unwrap();
        match types.def(def) {
            Some(DefType::Value(t)) => ensure(*t == want, || format!("{name} {def}: {t:?}"))?,
            other => return Err(format!("{name} {def}: {other:?}")),
        }
        n += 1;
    }
    let eff = file("state.eff");
    let types = check_file(&eff).unwrap();
    let state = eff.parse_effect("[State]").unwrap();
    let h = match types.def("H_ST") {
        Some(DefType::Handler(h)) => h.clone(),
        other => return Err(format!("H_ST: {other:?}")),
    };
    ensure(h.input == VType::bit() && h.in_effect == state, || "H_ST input".into())?;
    ensure(h.output == CType::fun(VType::bit(), CType::f(VType::bit())) && h.out_effect == Effect::Pure, || "H_ST output".into())?;
    for (name, calc, text) in [("state.eff", Calculus::Eff, "[State]"), ("state.mon", Calculus::Mon, "[State]"), ("state.del", Calculus::Del, "[State]")] {
        let e = file(name).parse_effect(text).unwrap();
        kind_check_effect(&e, &[], calc).map_err(|e| format!("{name} State: {e}"))?;
    }
    // The state-passing `put` returns <(), s'>, so it is listed with a type
    // the term does not have; check the derivable one and that the listed
    // one is rejected.
    let mam = file("state.mam");
    let types = check_file(&mam).unwrap();
    let put = mam.parse_vtype("U[] (bit -> bit -> F (1 * bit))").unwrap();
    ensure(types.def("put") == Some(&DefType::Value(put)), || "state.mam put".into())?;
    let listed_put = mam.parse_vtype("U[] (bit -> bit -> F (bit * bit))").unwrap();
    let body = match &mam.definition("put").unwrap().body {
        fxcalc::surface::DefBody::Value(v) => v.clone(),
        _ => unreachable!(),
    };
    ensure(check_value(&body, &Env::empty(), &listed_put, Calculus::Mam).is_err(), || "listed put type accepted".into())?;
    Ok(format!("{} listed types, H_ST, 3 State kindings; state-passing put typed F (1 * bit), its listed F (bit * bit) is not derivable", n + 1))
}

fn safety_and_termination() -> (Outcome, Outcome) {
    let mut stuck = 0;
    let mut unfinished = 0;
    let mut broken = Vec::new();
    let mut steps = 0;
    for calc in CALCULI {
        for (i, s) in gen::corpus(calc, CORPUS_SEED, CORPUS).iter().enumerate() {
            let ty = CType::f(s.ty.clone());
            if let Err(e) = check_program(&s.term, calc) {
                broken.push(format!("{calc} #{i} ill-typed: {e}"));
                continue;
            }
            let t = run(&s.term, FUEL).unwrap();
            match t.status {
                Status::Stuck(_) => stuck += 1,
                Status::OutOfFuel => unfinished += 1,
                Status::NormalForm(_) => {}
            }
            for st in &t.steps {
                if check_comp(&st.term, &Env::empty(), &Effect::Pure, &ty, calc).is_err() {
                    broken.push(format!("{calc} #{i} after {}", st.rule.name()));
                    break;
                }
            }
            steps += t.steps.len();
        }
    }
    let safety = if stuck == 0 && broken.is_empty() {
        Ok(format!("{} terms, {steps} steps, 0 stuck, every step retypes", 4 * CORPUS))
    } else {
        Err(format!("{stuck} stuck; {}", broken.join("; ")))
    };
    let div = run_quiet(&gen::divergent(), DIVERGENCE_FUEL).unwrap();
    let termination = if unfinished == 0 && div.status == Status::OutOfFuel {
        Ok(format!("all {} reach a value within {FUEL}; divergent control out of fuel at {DIVERGENCE_FUEL}", 4 * CORPUS))
    } else {
        Err(format!("{unfinished} out of fuel; divergent control: {:?}", div.status))
    };
    (safety, termination)
}

fn simulation() -> Outcome {
    let mut checked = 0;
    let mut source_steps = 0;
    for id in TranslationId::all() {
        for name in GOLDEN {
            let f = file(name);
            if f.calculus != id.source {
                continue;
            }
            let r = simulate_check(f.main.as_ref().unwrap(), id, FUEL).map_err(|e| format!("{name} under {id}: {e}"))?;
            let want = if id.on_the_nose() { SimMode::Exact } else { SimMode::UpToCongruence };
            ensure(r.mode == want, || format!("{name} under {id}: mode {:?}", r.mode))?;
            if id.on_the_nose() {
                ensure(r.steps.iter().all(|s| s.mode == SimMode::Exact), || format!("{name} under {id}: not exact"))?;
            }
            checked += 1;
            source_steps += r.steps.len();
        }
    }
    Ok(format!("9 translations, {checked} program runs, {source_steps} source steps matched, search depth {SEARCH_DEPTH}, 0 inconclusive"))
}

fn reified_layers(c: &Comp, out: &mut Vec<Rc<MonadDef>>) {
    if let Comp::Reify { monad, .. } = c {
        out.push(monad.clone());
    }
    for (ch, _) in children(c) {
        reified_layers(ch, out);
    }
}

fn typeability_preservation() -> Outcome {
    let id = TranslationId::new(Calculus::Del, Calculus::Mon, Variant::Default).unwrap();
    let mut layers = 0;
    let mut programs = 0;
    for name in GOLDEN.iter().filter(|n| n.ends_with(".del")) {
        let Ok(d) = check_program(&main_of(name), Calculus::Del) else { continue };
        let t = translate_derivation(&d, id).map_err(|e| e.to_string())?;
        let dt = check_program(&t, Calculus::Mon).map_err(|e| format!("{name}: {e}"))?;
        let want = translate_ctype_del_to_mon(&d.root().ctype);
        ensure(dt.root().ctype == want, || format!("{name}: translated type differs"))?;
        let mut found = Vec::new();
        reified_layers(&t, &mut found);
        for m in &found {
            let r = check_monad_laws(m, &Effect::Pure, &LAW_SIZES, DEFAULT_BUDGET, LAW_SEED).map_err(|e| e.to_string())?;
            ensure(r.holds(), || format!("{name}: Cont layer fails {:?}", r.witness.as_ref().map(|w| w.law)))?;
        }
        layers += found.len();
        programs += 1;
    }
    ensure(programs > 0 && layers > 0, || "no λdel program checked".into())?;
    // Generated λdel programs, typed and run after translation.
    let mut g = 0;
    for (i, s) in gen::corpus(Calculus::Del, CORPUS_SEED, 200).iter().enumerate() {
        let d = check_program(&s.term, Calculus::Del).map_err(|e| e.to_string())?;
        let t = translate_derivation(&d, id).map_err(|e| e.to_string())?;
        let dt = check_program(&t, Calculus::Mon).map_err(|e| format!("generated #{i}: {e}\n{}", print_comp(&s.term)))?;
        ensure(dt.root().ctype == CType::f(s.ty.clone()), || format!("generated #{i}: type differs"))?;
        ensure(final_term(&t)? == final_term(&s.term)?, || format!("generated #{i}: value differs"))?;
        g += 1;
    }
    Ok(format!(
        "{programs} golden and {g} generated λdel programs typecheck in λmon at the translated type; {layers} golden Cont layer(s) lawful at sizes {LAW_SIZES:?}"
    ))
}

fn negative_typeability() -> Outcome {
    let reader = main_of("reader_counterexample.mon");
    check_program(&reader, Calculus::Mon).map_err(|e| format!("reader source: {e}"))?;
    let t = translate(&reader, TranslationId::new(Calculus::Mon, Calculus::Eff, Variant::Default).unwrap()).unwrap();
    ensure(check_program(&t, Calculus::Eff).is_err(), || "reader translation accepted by λeff".into())?;
    let two = main_of("two_answers.eff");
    check_program(&two, Calculus::Eff).map_err(|e| format!("two_answers source: {e}"))?;
    for v in [Variant::Default, Variant::Nested] {
        let t = translate(&two, TranslationId::new(Calculus::Eff, Calculus::Del, v).unwrap()).unwrap();
        ensure(check_program(&t, Calculus::Del).is_err(), || format!("two_answers ({v}) accepted by λdel"))?;
    }
    Ok("reader MON->EFF rejected by λeff; two-answer-type handler EFF->DEL (both variants) rejected by λdel".into())
}

fn adequacy() -> Outcome {
    let mut n = 0;
    for name in GOLDEN {
        let f = file(name);
        if f.calculus == Calculus::Del {
            continue;
        }
        let m = f.main.unwrap();
        let d = check_program(&m, f.calculus).map_err(|e| e.to_string())?;
        let CType::Returner(a) = &d.root().ctype else { continue };
        if !a.is_ground() {
            continue;
        }
        let v = final_term(&m)?;
        let lhs = den_program(&m, f.calculus).map_err(|e| format!("{name}: {e}"))?;
        let rhs = den_program(&v, f.calculus).map_err(|e| format!("{name}: {e}"))?;
        ensure(lhs == rhs, || format!("{name}: {lhs} vs {rhs}"))?;
        n += 1;
    }
    // Generated pure programs in the three calculi with a semantics.
    let mut g = 0;
    for calc in [Calculus::Mam, Calculus::Eff, Calculus::Mon] {
        for s in gen::corpus(calc, CORPUS_SEED, 100) {
            let v = final_term(&s.term)?;
            let lhs = den_program(&s.term, calc).map_err(|e| format!("{calc}: {e}\n{}", print_comp(&s.term)))?;
            let rhs = den_program(&v, calc).map_err(|e| e.to_string())?;
            ensure(lhs == rhs, || format!("{calc}: {lhs} vs {rhs}\n{}", print_comp(&s.term)))?;
            g += 1;
        }
    }
    Ok(format!("{n} golden and {g} generated programs denote their values"))
}

fn finite_denotation() -> Outcome {
    let mon = file("state.mon");
    let t = mon.parse_vtype("U[State] F bit").unwrap();
    let card = cardinality_vtype(&t, &Sizes::new()).map_err(|e| e.to_string())?;
    let enumerated = fxcalc::denot::den_vtype(&t, &Assignment::new()).map_err(|e| e.to_string())?.len();
    ensure(card == Card::n(16) && enumerated == 16, || format!("U[State] F bit: {card}, {enumerated} enumerated"))?;

    let tick = parse_effect("[tick: 1 -> 1]", Calculus::Eff).unwrap();
    let mut trees = Vec::new();
    for n in 0..=TICKS {
        let m = parse_comp(&ticks(n), Calculus::Eff).unwrap();
        let d = check_comp(&m, &Env::empty(), &tick, &CType::f(VType::Unit), Calculus::Eff).map_err(|e| e.to_string())?;
        let e = den_term(&d, Assignment::new(), &[]).map_err(|e| e.to_string())?;
        ensure(!trees.contains(&e), || format!("tick^{n} collides"))?;
        trees.push(e);
    }

    let target = parse_vtype("U[] F bit", Calculus::Mon).unwrap();
    let r = pigeonhole_demo(PIGEON_K, &target).map_err(|e| e.to_string())?;
    ensure(r.programs == 3 && r.cardinality == Card::n(2) && r.exceeds, || format!("pigeonhole: {} vs {}", r.programs, r.cardinality))?;
    ensure(r.pairs.len() == 3 && r.pairs.iter().all(|p| p.distinct && p.result_n != p.result_m), || "pigeonhole pairs".into())?;
    Ok(format!("|U[State] F bit| = 16; tick^0..tick^{TICKS} distinct; K+1 = 3 > 2 with 3 separating handlers"))
}

fn monad_laws() -> Outcome {
    let layer = |text: &str| match parse_effect(&format!("[{text}]"), Calculus::Mon).unwrap() {
        Effect::Mon { layer, .. } => layer,
        e => panic!("{e:?}"),
    };
    let state = file("state.mon").monads[0].1.clone();
    let cont = fxcalc::xlate::cont_monad(&Effect::Pure, Some(&CType::f(VType::bit())));
    for (name, m) in [("State", state), ("Cont", cont)] {
        let r = check_monad_laws(&m, &Effect::Pure, &LAW_SIZES, DEFAULT_BUDGET, LAW_SEED).map_err(|e| e.to_string())?;
        ensure(r.holds(), || format!("{name}: {:?}", r.witness))?;
    }
    let broken = layer(
        "where a. bit -> F (a * bit) { return x -> fun s -> return <x, s> | m >>= f -> fun s -> let <x, s'> <- force m s in force f x s }",
    );
    let r = check_monad_laws(&broken, &Effect::Pure, &LAW_SIZES, DEFAULT_BUDGET, LAW_SEED).map_err(|e| e.to_string())?;
    let w = r.witness.ok_or("broken bind passes")?;
    ensure(w.lhs != w.rhs, || "witness sides agree".into())?;
    Ok(format!("State and Cont lawful at sizes {LAW_SIZES:?}; broken bind fails {} at size {}", w.law, w.size))
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(ROUND_TRIP_SEED);
    for calc in CALCULI {
        for i in 0..CORPUS {
            let t = gen::scoped(calc, &mut rng, ROUND_TRIP_DEPTH);
            let text = print_comp(&t);
            let back = parse_comp(&text, calc).map_err(|e| format!("{calc} #{i}: {e}\n{text}"))?;
            ensure(alpha_eq(&back, &t), || format!("{calc} #{i}: {text}"))?;
        }
    }
    Ok(format!("{} terms per calculus", CORPUS))
}

fn main() {
    let start = Instant::now();
    let (safety, termination) = safety_and_termination();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "golden outputs", golden_outputs()),
        (2, "golden types", golden_types()),
        (3, "safety", safety),
        (4, "termination", termination),
        (5, "simulation", simulation()),
        (6, "typeability preservation", typeability_preservation()),
        (7, "negative typeability", negative_typeability()),
        (8, "adequacy", adequacy()),
        (9, "finite denotation and pigeonhole", finite_denotation()),
        (10, "monad laws", monad_laws()),
        (11, "parser round trip", round_trip()),
    ];
    let mut failed = 0;
    for (n, what, r) in &results {
        match r {
            Ok(detail) => println!("criterion {n:>2} PASS  {what}: {detail}"),
            Err(e) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {what}: {e}");
            }
        }
    }
    println!("{} of {} criteria pass ({:.1}s)", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
