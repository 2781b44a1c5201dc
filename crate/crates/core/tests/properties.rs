//! Safety, termination and printing properties over seeded random terms.

use fxcalc::ast::{alpha_eq, scope_check, Calculus};
use fxcalc::gen;
use fxcalc::opsem::{run, run_quiet, Status};
use fxcalc::surface::{parse_comp, print_comp};
use fxcalc::typesys::check_comp;
use fxcalc::typesys::types::{CType, Effect};
use fxcalc::typesys::Env;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CALCULI: [Calculus; 4] = [Calculus::Mam, Calculus::Eff, Calculus::Mon, Calculus::Del];
const N: usize = 1000;
const FUEL: u64 = 1_000_000;

#[test]
fn well_typed_terms_step_safely_to_values() {
    for calc in CALCULI {
        let mut steps = 0;
        for (i, s) in gen::corpus(calc, 2024, N).iter().enumerate() {
            let ty = CType::f(s.ty.clone());
            let t = run(&s.term, FUEL).unwrap();
            assert!(matches!(t.status, Status::NormalForm(_)), "{calc} #{i}: {:?}\n{}", t.status, print_comp(&s.term));
            for st in &t.steps {
                if let Err(e) = check_comp(&st.term, &Env::empty(), &Effect::Pure, &ty, calc) {
                    panic!("{calc} #{i}: after {}: {e}\n{}", st.rule.name(), print_comp(&st.term));
                }
            }
            steps += t.steps.len();
        }
        // The corpus should not be dominated by values.
        assert!(steps > N, "{calc}: only {steps} steps in total");
    }
}

#[test]
fn untyped_self_application_runs_out_of_fuel() {
    let t = run_quiet(&gen::divergent(), 100_000).unwrap();
    assert_eq!(t.status, Status::OutOfFuel);
}

#[test]
fn printing_then_parsing_is_the_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for calc in CALCULI {
        for _ in 0..N {
            let t = gen::scoped(calc, &mut rng, 5);
            scope_check(&t, 0).unwrap();
            let text = print_comp(&t);
            let back = parse_comp(&text, calc).unwrap_or_else(|e| panic!("{calc}: {e}\n{text}"));
            assert!(alpha_eq(&back, &t), "{calc}:\n{text}\n{}", print_comp(&back));
        }
    }
}

#[test]
fn translations_simulate_generated_programs() {
    use fxcalc::xlate::{simulate_check, SimError, TranslationId};
    let mut inconclusive = Vec::new();
    for id in TranslationId::all() {
        for (i, s) in gen::corpus(id.source, 5, 150).iter().enumerate() {
            match simulate_check(&s.term, id, FUEL) {
                Ok(_) => {}
                Err(SimError::Mismatch(f)) if f.inconclusive => inconclusive.push(format!("{id} #{i} step {} {}", f.index, f.rule)),
                Err(e) => panic!("{id} #{i}: {e}\n{}", print_comp(&s.term)),
            }
        }
    }
    assert!(inconclusive.is_empty(), "{inconclusive:#?}");
}
