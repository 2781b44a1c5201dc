//! Python bindings: parse, check, run and translate programs given as text.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use fxcalc::ast::{Calculus, Comp};
use fxcalc::opsem::{run_quiet, Status};
use fxcalc::surface::{parse, print_comp, print_value, SourceFile, TypePrinter};
use fxcalc::typesys::check_file;
use fxcalc::xlate::{simulate_check, translate as xl, TranslationId, Variant};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn load(source: &str, calculus: &str) -> PyResult<(SourceFile, Comp)> {
    let calc: Calculus = calculus.parse().map_err(err)?;
    let file = parse(source, calc).map_err(err)?;
    let main = file.main.clone().ok_or_else(|| err("the program has no `main`"))?;
    Ok((file, main))
}

/// Run `main` and return its value, printed.
#[pyfunction]
#[pyo3(signature = (source, calculus, fuel = 1_000_000))]
fn run(source: &str, calculus: &str, fuel: u64) -> PyResult<String> {
    let (_, m) = load(source, calculus)?;
    let t = run_quiet(&m, fuel).map_err(err)?;
    match t.status {
        Status::NormalForm(v) => Ok(print_value(&v)),
        Status::OutOfFuel => Err(err(format!("out of fuel after {} steps", t.step_count))),
        Status::Stuck(r) => Err(err(format!("stuck: {r}"))),
    }
}

/// The type and effect of `main`, printed.
#[pyfunction]
fn check(source: &str, calculus: &str) -> PyResult<String> {
    let (file, _) = load(source, calculus)?;
    let types = check_file(&file).map_err(err)?;
    let d = types.main.expect("main was parsed");
    let tp = TypePrinter { monads: &file.monads };
    Ok(format!("{} ! {}", tp.ctype(&d.root().ctype), tp.effect(&d.root().effect)))
}

/// Translate `main` into calculus `to`.
#[pyfunction]
#[pyo3(signature = (source, calculus, to, variant = "default"))]
fn translate(source: &str, calculus: &str, to: &str, variant: &str) -> PyResult<String> {
    let (file, m) = load(source, calculus)?;
    let id = TranslationId::new(file.calculus, to.parse().map_err(err)?, variant.parse::<Variant>().map_err(err)?).map_err(err)?;
    Ok(print_comp(&xl(&m, id).map_err(err)?))
}

/// Simulation report for translating `main` into `to`, as JSON.
#[pyfunction]
#[pyo3(signature = (source, calculus, to, variant = "default"))]
fn simulate(source: &str, calculus: &str, to: &str, variant: &str) -> PyResult<String> {
    let (file, m) = load(source, calculus)?;
    let id = TranslationId::new(file.calculus, to.parse().map_err(err)?, variant.parse::<Variant>().map_err(err)?).map_err(err)?;
    let r = simulate_check(&m, id, 1_000_000).map_err(err)?;
    serde_json::to_string(&r).map_err(err)
}

#[pymodule]
fn fxcalc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(translate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
