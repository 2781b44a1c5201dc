//! Concrete syntax for all four calculi. See `docs/grammar.md`.

mod lexer;
mod parser;
mod printer;

use std::fmt;
use std::rc::Rc;

use crate::ast::{Calculus, Comp, Handler, MonadDef, Value};
use crate::typesys::types::{CType, Effect, HandlerType, VType};

pub use parser::{is_keyword, KEYWORDS};
pub use printer::Printer;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error, serde::Serialize)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(pos: lexer::Pos, message: impl Into<String>) -> ParseError {
        ParseError { line: pos.line, col: pos.col, message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DefBody {
    Value(Value),
    Handler(Handler),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ascription {
    Value(VType),
    Handler(HandlerType),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub body: DefBody,
    pub ascription: Option<Ascription>,
}

/// A parsed program. Definitions are already inlined into later terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceFile {
    pub calculus: Calculus,
    pub definitions: Vec<Definition>,
    pub main: Option<Comp>,
    pub monads: Vec<(String, Rc<MonadDef>)>,
    pub types: Vec<(String, VType)>,
    pub effects: Vec<(String, Effect)>,
}

impl SourceFile {
    pub fn definition(&self, name: &str) -> Option<&Definition> {
        self.definitions.iter().find(|d| d.name == name)
    }

    fn parser(&self, text: &str) -> Result<parser::Parser, ParseError> {
        let mut p = parser::Parser::new(text, self.calculus)?;
        p.scope.types = self.types.iter().cloned().collect();
        p.scope.effects = self.effects.iter().cloned().collect();
        p.scope.monads = self.monads.iter().cloned().collect();
        p.scope.defs = self.definitions.iter().map(|d| (d.name.clone(), d.body.clone())).collect();
        Ok(p)
    }

    /// Parse a value type using this file's aliases.
    pub fn parse_vtype(&self, text: &str) -> Result<VType, ParseError> {
        let mut p = self.parser(text)?;
        let t = p.vtype()?;
        p.expect_eof()?;
        Ok(t)
    }

    pub fn parse_ctype(&self, text: &str) -> Result<CType, ParseError> {
        let mut p = self.parser(text)?;
        let t = p.ctype()?;
        p.expect_eof()?;
        Ok(t)
    }

    /// Parse an effect list, bracketed or not, using this file's aliases.
    pub fn parse_effect(&self, text: &str) -> Result<Effect, ParseError> {
        let mut p = self.parser(text)?;
        let e = if *p.peek() == lexer::Tok::LBrack { p.effect_brackets()? } else { p.effect_items(&lexer::Tok::Eof)? };
        p.expect_eof()?;
        Ok(e)
    }

    /// Parse a computation using this file's definitions.
    pub fn parse_comp(&self, text: &str) -> Result<Comp, ParseError> {
        let mut p = self.parser(text)?;
        let c = p.comp()?;
        p.expect_eof()?;
        Ok(c)
    }
}

pub fn parse(text: &str, calc: Calculus) -> Result<SourceFile, ParseError> {
    parser::Parser::new(text, calc)?.file()
}

fn empty_file(calc: Calculus) -> SourceFile {
    SourceFile {
        calculus: calc,
        definitions: Vec::new(),
        main: None,
        monads: Vec::new(),
        types: Vec::new(),
        effects: Vec::new(),
    }
}

/// Parse a closed computation.
pub fn parse_comp(text: &str, calc: Calculus) -> Result<Comp, ParseError> {
    empty_file(calc).parse_comp(text)
}

pub fn parse_value(text: &str, calc: Calculus) -> Result<Value, ParseError> {
    let mut p = parser::Parser::new(text, calc)?;
    let v = p.value()?;
    p.expect_eof()?;
    Ok(v)
}

pub fn parse_vtype(text: &str, calc: Calculus) -> Result<VType, ParseError> {
    empty_file(calc).parse_vtype(text)
}

pub fn parse_ctype(text: &str, calc: Calculus) -> Result<CType, ParseError> {
    empty_file(calc).parse_ctype(text)
}

pub fn parse_effect(text: &str, calc: Calculus) -> Result<Effect, ParseError> {
    empty_file(calc).parse_effect(text)
}

pub fn print_comp(c: &Comp) -> String {
    Printer::new().comp(c)
}

/// Print a computation whose free variables are named by `env` (innermost last).
pub fn print_comp_in(c: &Comp, env: &[String]) -> String {
    Printer::with_env(env.to_vec()).comp(c)
}

pub fn print_value(v: &Value) -> String {
    Printer::new().value(v)
}

pub fn print_handler(h: &Handler) -> String {
    Printer::new().handler(h)
}

pub fn print_monad(m: &MonadDef) -> String {
    Printer::new().monad_def(m)
}

pub fn print_vtype(t: &VType) -> String {
    printer::vtype(t, &[])
}

pub fn print_ctype(t: &CType) -> String {
    printer::ctype(t, &[])
}

/// Effect list with surrounding brackets.
pub fn print_effect(e: &Effect) -> String {
    printer::effect_brackets(e, &[])
}

pub fn print_handler_type(h: &HandlerType) -> String {
    printer::handler_type(h, &[])
}

/// Type printers that show named monads by name.
pub struct TypePrinter<'a> {
    pub monads: &'a [(String, Rc<MonadDef>)],
}

impl TypePrinter<'_> {
    pub fn vtype(&self, t: &VType) -> String {
        printer::vtype(t, self.monads)
    }
    pub fn ctype(&self, t: &CType) -> String {
        printer::ctype(t, self.monads)
    }
    pub fn effect(&self, e: &Effect) -> String {
        printer::effect_brackets(e, self.monads)
    }
    pub fn handler_type(&self, h: &HandlerType) -> String {
        printer::handler_type(h, self.monads)
    }
}

pub fn print_file(f: &SourceFile) -> String {
    let mut out = String::new();
    let mut p = Printer::new();
    for (name, m) in &f.monads {
        out.push_str(&format!("monad {name} = {}\n\n", p.monad_def(m)));
        p.monads.push((name.clone(), m.clone()));
    }
    for d in &f.definitions {
        let asc = match &d.ascription {
            None => String::new(),
            Some(Ascription::Value(t)) => format!(" : {}", printer::vtype(t, &p.monads)),
            Some(Ascription::Handler(h)) => format!(" : {}", printer::handler_type(h, &p.monads)),
        };
        let body = match &d.body {
            DefBody::Value(v) => p.value(v),
            DefBody::Handler(h) => p.handler(h),
        };
        out.push_str(&format!("def {}{asc} = {body}\n\n", d.name));
    }
    if let Some(m) = &f.main {
        out.push_str(&format!("main = {}\n", p.comp(m)));
    }
    out
}

impl fmt::Display for Comp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_comp(self))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_value(self))
    }
}

impl fmt::Display for VType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_vtype(self))
    }
}

impl fmt::Display for CType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_ctype(self))
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_effect(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::*;

    #[test]
    fn return_unit() {
        for c in Calculus::ALL {
            assert_eq!(parse_comp("return ()", c).unwrap(), ret(Value::Unit));
        }
        assert_eq!(print_comp(&ret(Value::Unit)), "return ()");
    }

    #[test]
    fn shift0_get() {
        let c = parse_comp("shift0 k -> fun s -> force k s s", Calculus::Del).unwrap();
        assert_eq!(c, shift0("k", lam("s", app(app(force(var(1)), var(0)), var(0)))));
    }

    #[test]
    fn handle_one_clause() {
        let c = parse_comp("handle tick! () with { return x -> return x | tick(p; k) -> force k p }", Calculus::Eff)
            .unwrap();
        match c {
            Comp::Handle { handler, .. } => {
                assert_eq!(handler.ops.len(), 1);
                assert_eq!(handler.ops["tick"].body, app(force(var(0)), var(1)));
            }
            _ => panic!("not a handle"),
        }
    }

    #[test]
    fn tag_violation_is_positioned() {
        let e = parse_comp("return ()\n; shift0 k -> return ()", Calculus::Eff).unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        assert!(e.message.contains("shift0 not available in EFF"));
    }

    #[test]
    fn sequencing_and_patterns() {
        let c = parse_comp("let <x, y> <- return <(), ()> in return <y, x>", Calculus::Mam).unwrap();
        let expect = let_(
            "p",
            ret(pair(Value::Unit, Value::Unit)),
            split(var(0), "x", "y", ret(pair(var(0), var(1)))),
        );
        assert_eq!(c, expect);
        let s = parse_comp("return (); return tru", Calculus::Mam).unwrap();
        assert_eq!(s, let_("_", ret(Value::Unit), ret(tru())));
    }

    #[test]
    fn nested_pattern_indices() {
        let c = parse_comp("fun <<a, b>, c> d -> return <a, <b, <c, d>>>", Calculus::Mam).unwrap();
        let printed = print_comp(&c);
        assert_eq!(parse_comp(&printed, Calculus::Mam).unwrap(), c);
        // Applying to concrete values must route each component correctly.
        let v = pair(pair(inj("A", Value::Unit), inj("B", Value::Unit)), inj("C", Value::Unit));
        let body = match &c {
            Comp::Lam { body, .. } => match &**body {
                Comp::Lam { body, .. } => body.as_ref().clone(),
                _ => unreachable!(),
            },
            _ => unreachable!(),
        };
        let after = subst_many(&body, &[inj("D", Value::Unit), v]);
        let norm = crate::opsem::run(&after, 100).unwrap();
        assert_eq!(
            norm.status.value().unwrap(),
            &pair(
                inj("A", Value::Unit),
                pair(inj("B", Value::Unit), pair(inj("C", Value::Unit), inj("D", Value::Unit)))
            )
        );
    }

    #[test]
    fn application_sugar_sequences_argument() {
        let c = parse_comp("force f (force g ())", Calculus::Mam);
        assert!(c.is_err());
        let c = parse_comp("fun f g -> force f (force g ())", Calculus::Mam).unwrap();
        let printed = print_comp(&c);
        assert_eq!(printed, "fun f g -> let a <- force g () in force f a");
    }

    #[test]
    fn printing_avoids_capture() {
        let t = lam("x", lam("x", ret(pair(var(1), var(0)))));
        let s = print_comp(&t);
        assert_eq!(s, "fun x x1 -> return <x, x1>");
        assert_eq!(parse_comp(&s, Calculus::Mam).unwrap(), t);
    }

    #[test]
    fn thunk_argument_is_parenthesized() {
        let t = app(force(thunk(lam("y", ret(var(0))))), thunk(ret(Value::Unit)));
        let s = print_comp(&t);
        assert_eq!(s, "force (thunk fun y -> return y) (thunk return ())");
        assert_eq!(parse_comp(&s, Calculus::Mam).unwrap(), t);
    }

    #[test]
    fn types_round_trip() {
        for s in [
            "U[] (bit -> F bit)",
            "U[] (U[] (bit -> F (bit * bit)) -> bit -> F (bit * bit))",
            "(bit * bit) * 1",
            "{A: 1 | B: bit * bit}",
            "{}",
        ] {
            let t = parse_vtype(s, Calculus::Mam).unwrap();
            assert_eq!(print_vtype(&t), s);
        }
        let c = parse_ctype("(F 1 & F bit) & (bit -> F 1)", Calculus::Mam).unwrap();
        assert_eq!(parse_ctype(&print_ctype(&c), Calculus::Mam).unwrap(), c);
    }

    #[test]
    fn effects_per_calculus() {
        let e = parse_effect("get: 1 -> bit, put: bit -> 1", Calculus::Eff).unwrap();
        assert_eq!(print_effect(&e), "[get: 1 -> bit, put: bit -> 1]");
        let d = parse_effect("bit -> F bit", Calculus::Del).unwrap();
        assert_eq!(d, Effect::del_stack(vec![CType::fun(VType::bit(), CType::f(VType::bit()))]));
        assert!(parse_effect("get: 1 -> bit", Calculus::Mam).is_err());
    }

    #[test]
    fn file_with_aliases() {
        let src = "
            effect State = get: 1 -> bit, put: bit -> 1
            def not = thunk fun x -> case x of { False -> return tru | True -> return fls }
            def toggle : U[State] F bit = thunk
              let x <- get! () in
              let y <- force not x in
              put! y; return x
            main = return ()
        ";
        let f = parse(src, Calculus::Eff).unwrap();
        assert_eq!(f.definitions.len(), 2);
        assert!(f.main.is_some());
        let again = parse(&print_file(&f), Calculus::Eff).unwrap();
        assert_eq!(again.definitions[1].body, f.definitions[1].body);
    }

    #[test]
    fn errors_have_positions() {
        let e = parse("def x = thunk return y", Calculus::Mam).unwrap_err();
        assert_eq!((e.line, e.col), (1, 22));
        assert!(e.message.contains("unbound variable `y`"));
    }
}
