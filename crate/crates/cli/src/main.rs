use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value as Json};

use fxcalc::ast::Calculus;
use fxcalc::denot::{check_monad_laws, den_program, describe_type, pigeonhole_demo, DEFAULT_BUDGET};
use fxcalc::opsem::{run, run_quiet, Status};
use fxcalc::surface::{parse, print_comp, print_value, SourceFile, TypePrinter};
use fxcalc::typesys::types::Effect;
use fxcalc::typesys::{check_file, check_program, DefType};
use fxcalc::xlate::{simulate_check, translate, translate_derivation, SimError, TranslationId, Variant};

#[derive(Parser)]
#[command(name = "fxcalc", version, about = "Effect handlers, monadic reflection and delimited control")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Calculus of FILE (mam, eff, mon, del); inferred from the extension otherwise.
    #[arg(long, global = true)]
    calculus: Option<Calculus>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck every definition and the main program.
    Check { file: PathBuf },
    /// Evaluate the main program.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
        /// Print every step.
        #[arg(long)]
        trace: bool,
    },
    /// Translate the main program into another calculus.
    Translate {
        file: PathBuf,
        #[arg(long)]
        to: Calculus,
        #[arg(long, default_value = "default")]
        variant: Variant,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check that the translation simulates every source step.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        to: Calculus,
        #[arg(long, default_value = "default")]
        variant: Variant,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
    },
    /// Cardinality and elements of a type, or the meaning of the main program.
    Denote {
        file: PathBuf,
        #[arg(long = "type")]
        ty: Option<String>,
        /// Sizes of type variables, e.g. `a=2,b=1`.
        #[arg(long, value_delimiter = ',')]
        assign: Vec<String>,
        #[arg(long, default_value_t = 8)]
        sample: usize,
    },
    /// Check the monad laws of every monad defined in the file.
    Laws {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Show that K+1 tick programs cannot fit in a small type.
    Pigeonhole {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        target: String,
    },
}

/// What went wrong, and with which exit code.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
    detail: Option<Json>,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, kind: "usage", message: message.into(), detail: None }
}

fn failed(kind: &'static str, message: impl Into<String>) -> Failure {
    Failure { code: 1, kind, message: message.into(), detail: None }
}

/// A command's result: text for humans, JSON for machines, and whether it
/// counts as success.
struct Output {
    text: String,
    json: Json,
    ok: bool,
}

fn main() -> ExitCode {
    let json = std::env::args().any(|a| a == "--json");
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if json {
                println!("{}", json!({"ok": false, "error": {"kind": "usage", "message": e.to_string().trim()}}));
            } else {
                let _ = e.print();
            }
            return ExitCode::from(2);
        }
    };
    match execute(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", out.json);
            } else {
                print!("{}", out.text);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            if cli.json {
                let mut err = json!({"kind": f.kind, "message": f.message});
                if let Some(d) = f.detail {
                    err["detail"] = d;
                }
                println!("{}", json!({"ok": false, "error": err}));
            } else {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn execute(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Check { file } => check(&load(file, cli.calculus)?),
        Command::Run { file, fuel, trace } => run_cmd(&load(file, cli.calculus)?, *fuel, *trace),
        Command::Translate { file, to, variant, output } => {
            translate_cmd(&load(file, cli.calculus)?, *to, *variant, output.as_ref())
        }
        Command::Simulate { file, to, variant, fuel } => simulate(&load(file, cli.calculus)?, *to, *variant, *fuel),
        Command::Denote { file, ty, assign, sample } => denote(&load(file, cli.calculus)?, ty.as_deref(), assign, *sample),
        Command::Laws { file, sizes, budget, seed } => laws(&load(file, cli.calculus)?, sizes, *budget, *seed),
        Command::Pigeonhole { k, target } => pigeonhole(*k, target, cli.calculus.unwrap_or(Calculus::Mon)),
    }
}

fn load(path: &PathBuf, calculus: Option<Calculus>) -> Result<SourceFile, Failure> {
    let stdin = path.as_os_str() == "-";
    let calc = match calculus {
        Some(c) => c,
        None if stdin => return Err(usage("reading from stdin needs --calculus")),
        None => {
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or_default();
            Calculus::from_extension(ext)
                .ok_or_else(|| usage(format!("cannot tell the calculus of {} (use --calculus)", path.display())))?
        }
    };
    let text = if stdin {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| failed("io", e.to_string()))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| failed("io", format!("{}: {e}", path.display())))?
    };
    parse(&text, calc).map_err(|e| Failure {
        code: 1,
        kind: "parse",
        message: format!("{}:{e}", path.display()),
        detail: Some(json!(e)),
    })
}

fn main_of(file: &SourceFile) -> Result<&fxcalc::ast::Comp, Failure> {
    file.main.as_ref().ok_or_else(|| failed("no-main", "the file has no `main`"))
}

fn check(file: &SourceFile) -> Result<Output, Failure> {
    let tp = TypePrinter { monads: &file.monads };
    let types = check_file(file).map_err(|e| Failure {
        code: 1,
        kind: "type",
        message: e.to_string(),
        detail: Some(json!(e)),
    })?;
    let mut text = String::new();
    let mut defs = Vec::new();
    for (name, t) in &types.defs {
        let shown = match t {
            DefType::Value(v) => tp.vtype(v),
            DefType::Handler(h) => tp.handler_type(h),
        };
        text.push_str(&format!("{name} : {shown}\n"));
        defs.push(json!({"name": name, "type": shown}));
    }
    let main = types.main.as_ref().map(|d| {
        let (ty, eff) = (tp.ctype(&d.root().ctype), tp.effect(&d.root().effect));
        text.push_str(&format!("main : {ty} ! {eff}\n"));
        json!({"type": ty, "effect": eff})
    });
    Ok(Output { text, json: json!({"ok": true, "calculus": file.calculus, "defs": defs, "main": main}), ok: true })
}

fn run_cmd(file: &SourceFile, fuel: u64, trace: bool) -> Result<Output, Failure> {
    let m = main_of(file)?;
    let t = if trace { run(m, fuel) } else { run_quiet(m, fuel) }.map_err(|e| failed("run", e.to_string()))?;
    let mut text = String::new();
    if trace {
        for (i, s) in t.steps.iter().enumerate() {
            text.push_str(&format!("{i:>4} {:<14} {}\n", s.rule.name(), print_comp(&s.term)));
        }
    }
    let ok = match &t.status {
        Status::NormalForm(v) => {
            text.push_str(&format!("{}\n", print_value(v)));
            true
        }
        Status::OutOfFuel => {
            text.push_str(&format!("out of fuel after {} steps\n", t.step_count));
            false
        }
        Status::Stuck(r) => {
            text.push_str(&format!("stuck: {r}\n  at {}\n", print_comp(&t.last)));
            false
        }
    };
    let mut j = t.to_json();
    if !trace {
        j.as_object_mut().unwrap().remove("steps");
    }
    j["ok"] = json!(ok);
    Ok(Output { text, json: j, ok })
}

fn translation(file: &SourceFile, to: Calculus, variant: Variant) -> Result<TranslationId, Failure> {
    TranslationId::new(file.calculus, to, variant).map_err(|e| usage(e.to_string()))
}

fn translate_cmd(file: &SourceFile, to: Calculus, variant: Variant, output: Option<&PathBuf>) -> Result<Output, Failure> {
    let id = translation(file, to, variant)?;
    let m = main_of(file)?;
    let xl = |e: fxcalc::xlate::XlateError| failed("translate", e.to_string());
    // Typed sources carry the answer types the continuation monad needs.
    let (term, typed) = match (id.source, check_program(m, file.calculus)) {
        (Calculus::Del, Ok(d)) if id.target == Calculus::Mon => (translate_derivation(&d, id).map_err(xl)?, true),
        _ => (translate(m, id).map_err(xl)?, false),
    };
    let program = format!("main = {}\n", print_comp(&term));
    if let Some(path) = output {
        std::fs::write(path, &program).map_err(|e| failed("io", format!("{}: {e}", path.display())))?;
    }
    let text = if output.is_some() { String::new() } else { program.clone() };
    Ok(Output { text, json: json!({"ok": true, "translation": id, "typed": typed, "program": program}), ok: true })
}

fn simulate(file: &SourceFile, to: Calculus, variant: Variant, fuel: u64) -> Result<Output, Failure> {
    let id = translation(file, to, variant)?;
    match simulate_check(main_of(file)?, id, fuel) {
        Ok(r) => {
            let mut text = format!("{} ({:?}): {} source steps\n", r.translation, r.mode, r.steps.len());
            for s in &r.steps {
                text.push_str(&format!(
                    "{:>4} {:<14} {} target steps, {} under binders, {} administrative\n",
                    s.index, s.rule, s.target_steps, s.congruence_steps, s.suspended_redexes
                ));
            }
            text.push_str(&format!("result: {}\n", r.result));
            let mut j = json!(r);
            j["ok"] = json!(true);
            Ok(Output { text, json: j, ok: true })
        }
        Err(SimError::Mismatch(f)) => Err(Failure {
            code: 1,
            kind: if f.inconclusive { "inconclusive" } else { "mismatch" },
            message: format!(
                "step {} ({}) not simulated\n  source: {}\n      ->  {}\n  target: {}\n  goal:   {}",
                f.index, f.rule, f.source_before, f.source_after, f.target_before, f.target_after
            ),
            detail: Some(json!(f)),
        }),
        Err(e) => Err(failed("simulate", e.to_string())),
    }
}

fn denote(file: &SourceFile, ty: Option<&str>, assign: &[String], sample: usize) -> Result<Output, Failure> {
    let Some(ty) = ty else {
        let m = main_of(file)?;
        let e = den_program(m, file.calculus).map_err(|e| failed("denote", e.to_string()))?;
        return Ok(Output { text: format!("{e}\n"), json: json!({"ok": true, "main": e.to_string()}), ok: true });
    };
    let mut sizes = Vec::new();
    for a in assign {
        let (v, n) = a.split_once('=').ok_or_else(|| usage(format!("expected VAR=N, found `{a}`")))?;
        let n = n.trim().parse().map_err(|_| usage(format!("`{n}` is not a size")))?;
        sizes.push((v.trim().to_string(), n));
    }
    let t = file.parse_vtype(ty).map_err(|e| usage(format!("--type: {e}")))?;
    let mut d = describe_type(&t, &sizes, sample).map_err(|e| failed("denote", e.to_string()))?;
    d.ty = TypePrinter { monads: &file.monads }.vtype(&t);
    let mut text = format!("{} has {} elements\n", d.ty, d.cardinality);
    for e in &d.sample {
        text.push_str(&format!("  {e}\n"));
    }
    let mut j = json!(d);
    j["ok"] = json!(true);
    Ok(Output { text, json: j, ok: true })
}

fn laws(file: &SourceFile, sizes: &[usize], budget: u64, seed: u64) -> Result<Output, Failure> {
    if file.monads.is_empty() {
        return Err(failed("laws", "the file defines no monads"));
    }
    let mut text = String::new();
    let mut reports = Vec::new();
    let mut ok = true;
    for (name, m) in &file.monads {
        let r = check_monad_laws(m, &Effect::Pure, sizes, budget, seed).map_err(|e| failed("laws", format!("{name}: {e}")))?;
        text.push_str(&format!("{name}: {}\n", r.verdict));
        for c in &r.checks {
            let how = if c.exhaustive { "all" } else { "sampled" };
            let mark = if c.holds { "ok" } else { "FAILS" };
            text.push_str(&format!("  {:<12} size {}  {how} {} cases  {mark}\n", c.law, c.size, c.cases));
        }
        if let Some(w) = &r.witness {
            text.push_str(&format!("  witness for {} at size {}:\n", w.law, w.size));
            for (v, e) in &w.bindings {
                text.push_str(&format!("    {v} = {e}\n"));
            }
            text.push_str(&format!("    lhs = {}\n    rhs = {}\n", w.lhs, w.rhs));
        }
        ok &= r.holds();
        reports.push(json!({"monad": name, "report": r}));
    }
    Ok(Output { text, json: json!({"ok": ok, "monads": reports}), ok })
}

fn pigeonhole(k: usize, target: &str, calc: Calculus) -> Result<Output, Failure> {
    let t = fxcalc::surface::parse_vtype(target, calc).map_err(|e| usage(format!("--target: {e}")))?;
    let r = pigeonhole_demo(k, &t).map_err(|e| match e {
        fxcalc::denot::DenotError::Precondition(m) => usage(m),
        e => failed("pigeonhole", e.to_string()),
    })?;
    let ok = r.degenerate || (r.exceeds && r.pairs.iter().all(|p| p.distinct));
    let mut j = json!(r);
    j["ok"] = json!(ok);
    Ok(Output { text: r.to_text(), json: j, ok })
}
