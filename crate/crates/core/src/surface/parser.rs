use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use super::lexer::{lex, Pos, Tok};
use super::{Ascription, DefBody, Definition, ParseError, SourceFile};
use crate::ast::{self, Arm, Calculus, Comp, Construct, Handler, MonadDef, Name, OpClause, Side, Value};
use crate::typesys::types::{CType, Effect, HandlerType, OpSig, VType};

pub const KEYWORDS: &[&str] = &[
    "return", "let", "in", "thunk", "force", "fun", "handle", "with", "reflect", "reify", "where", "shift0", "reset",
    "as", "case", "of", "split", "inj", "prj1", "prj2", "type", "effect", "monad", "def", "main", "U", "F",
];

/// Names that parse as built-in values.
pub const BUILTIN_VALUES: &[&str] = &["tru", "fls"];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Clone, Debug)]
enum Pat {
    Var(String),
    Wild,
    Pair(Box<Pat>, Box<Pat>),
}

/// A pending `split` introduced by a nested pattern.
struct Wrap {
    scrut_level: usize,
    depth: usize,
    names: (Name, Name),
}

#[derive(Clone, Default)]
pub(super) struct Scope {
    pub types: HashMap<String, VType>,
    pub effects: HashMap<String, Effect>,
    pub monads: HashMap<String, Rc<MonadDef>>,
    pub defs: HashMap<String, DefBody>,
}

pub(super) struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    calc: Calculus,
    env: Vec<String>,
    tyvars: Vec<String>,
    pub scope: Scope,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub fn new(text: &str, calc: Calculus) -> PResult<Parser> {
        Ok(Parser { toks: lex(text)?, i: 0, calc, env: Vec::new(), tyvars: Vec::new(), scope: Scope::default() })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.i + n).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i < self.toks.len() - 1 {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError::at(self.pos(), msg.into()))
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.err(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.unexpected(&t.describe())
        }
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.unexpected(&format!("`{k}`"))
        }
    }

    /// A non-keyword identifier.
    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn require(&self, k: Construct) -> PResult<()> {
        if k.calculus() == self.calc {
            Ok(())
        } else {
            self.err(format!("{} not available in {}", k.keyword(), self.calc))
        }
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn expect_eof(&mut self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    // ---------------------------------------------------------------- files

    pub fn file(&mut self) -> PResult<SourceFile> {
        let mut file = SourceFile {
            calculus: self.calc,
            definitions: Vec::new(),
            main: None,
            monads: Vec::new(),
            types: Vec::new(),
            effects: Vec::new(),
        };
        while !self.at_eof() {
            let pos = self.pos();
            if self.eat_kw("type") {
                let name = self.decl_name()?;
                self.expect(&Tok::Eq)?;
                let t = self.vtype()?;
                self.scope.types.insert(name.clone(), t.clone());
                file.types.push((name, t));
            } else if self.eat_kw("effect") {
                let name = self.decl_name()?;
                self.expect(&Tok::Eq)?;
                let e = if self.eat(&Tok::LBrack) {
                    let e = self.effect_items(&Tok::RBrack)?;
                    self.expect(&Tok::RBrack)?;
                    e
                } else {
                    self.effect_items(&Tok::Eof)?
                };
                self.scope.effects.insert(name.clone(), e.clone());
                file.effects.push((name, e));
            } else if self.eat_kw("monad") {
                self.require(Construct::Reify)?;
                let name = self.decl_name()?;
                self.expect(&Tok::Eq)?;
                self.expect_kw("where")?;
                let m = Rc::new(self.monad_def()?);
                self.scope.monads.insert(name.clone(), m.clone());
                file.monads.push((name, m));
            } else if self.eat_kw("def") {
                let name = self.decl_name()?;
                if file.definitions.iter().any(|d: &Definition| d.name == name) {
                    return Err(ParseError::at(pos, format!("duplicate definition `{name}`")));
                }
                let ascription = if self.eat(&Tok::Colon) { Some(self.ascription()?) } else { None };
                self.expect(&Tok::Eq)?;
                let body = if *self.peek() == Tok::LBrace {
                    DefBody::Handler(self.handler()?)
                } else {
                    DefBody::Value(self.value()?)
                };
                match (&body, &ascription) {
                    (DefBody::Value(_), Some(Ascription::Handler(_))) => {
                        return Err(ParseError::at(pos, "value definition with a handler type"));
                    }
                    (DefBody::Handler(_), Some(Ascription::Value(_))) => {
                        return Err(ParseError::at(pos, "handler definition with a value type"));
                    }
                    _ => {}
                }
                self.scope.defs.insert(name.clone(), body.clone());
                file.definitions.push(Definition { name, body, ascription });
            } else if self.eat_kw("main") {
                if file.main.is_some() {
                    return Err(ParseError::at(pos, "duplicate `main`"));
                }
                self.expect(&Tok::Eq)?;
                file.main = Some(self.comp()?);
            } else {
                return self.unexpected("a declaration (`type`, `effect`, `monad`, `def` or `main`)");
            }
        }
        Ok(file)
    }

    fn decl_name(&mut self) -> PResult<String> {
        let pos = self.pos();
        let n = self.ident()?;
        if BUILTIN_VALUES.contains(&n.as_str()) || n == "bit" || n == "_" {
            return Err(ParseError::at(pos, format!("`{n}` is reserved")));
        }
        Ok(n)
    }

    fn ascription(&mut self) -> PResult<Ascription> {
        let a = self.vtype()?;
        if self.eat(&Tok::Bang) {
            let e = self.effect_brackets()?;
            self.expect(&Tok::FatArrow)?;
            let c = self.ctype()?;
            self.expect(&Tok::Bang)?;
            let e2 = self.effect_brackets()?;
            Ok(Ascription::Handler(HandlerType { input: a, in_effect: e, output: c, out_effect: e2 }))
        } else {
            Ok(Ascription::Value(a))
        }
    }

    // ---------------------------------------------------------------- types

    pub fn vtype(&mut self) -> PResult<VType> {
        let a = self.vatom_type()?;
        if self.eat(&Tok::Star) {
            let b = self.vtype()?;
            Ok(VType::prod(a, b))
        } else {
            Ok(a)
        }
    }

    fn vatom_type(&mut self) -> PResult<VType> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::One => {
                self.bump();
                Ok(VType::Unit)
            }
            Tok::LParen => {
                self.bump();
                let t = self.vtype()?;
                self.expect(&Tok::RParen)?;
                Ok(t)
            }
            Tok::LBrace => {
                self.bump();
                let mut m = BTreeMap::new();
                if !self.eat(&Tok::RBrace) {
                    loop {
                        let lpos = self.pos();
                        let l = self.ident()?;
                        self.expect(&Tok::Colon)?;
                        let t = self.vtype()?;
                        if m.insert(l.clone(), t).is_some() {
                            return Err(ParseError::at(lpos, format!("duplicate label `{l}`")));
                        }
                        if self.eat(&Tok::RBrace) {
                            break;
                        }
                        self.expect(&Tok::Bar)?;
                    }
                }
                Ok(VType::Variant(m))
            }
            Tok::Ident(s) if s == "U" => {
                self.bump();
                let e = if *self.peek() == Tok::LBrack { self.effect_brackets()? } else { Effect::Pure };
                let c = self.catom_type()?;
                Ok(VType::thunk(e, c))
            }
            Tok::Ident(s) if s == "_" => {
                self.bump();
                Ok(VType::Hole)
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                if self.tyvars.contains(&s) {
                    Ok(VType::Var(s))
                } else if let Some(t) = self.scope.types.get(&s) {
                    Ok(t.clone())
                } else if s == "bit" {
                    Ok(VType::bit())
                } else {
                    Err(ParseError::at(pos, format!("unknown type `{s}`")))
                }
            }
            _ => self.unexpected("a value type"),
        }
    }

    pub fn ctype(&mut self) -> PResult<CType> {
        let mut c = self.carrow_type()?;
        while self.eat(&Tok::Amp) {
            let d = self.carrow_type()?;
            c = CType::prod(c, d);
        }
        Ok(c)
    }

    fn carrow_type(&mut self) -> PResult<CType> {
        let save = self.i;
        if let Ok(a) = self.vtype() {
            if self.eat(&Tok::Arrow) {
                let c = self.carrow_type()?;
                return Ok(CType::fun(a, c));
            }
        }
        self.i = save;
        self.catom_type()
    }

    fn catom_type(&mut self) -> PResult<CType> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "F" => {
                self.bump();
                Ok(CType::f(self.vatom_type()?))
            }
            Tok::Ident(s) if s == "_" => {
                self.bump();
                Ok(CType::Hole)
            }
            Tok::LParen => {
                self.bump();
                let c = self.ctype()?;
                self.expect(&Tok::RParen)?;
                Ok(c)
            }
            _ => self.unexpected("a computation type"),
        }
    }

    pub fn effect_brackets(&mut self) -> PResult<Effect> {
        self.expect(&Tok::LBrack)?;
        let e = self.effect_items(&Tok::RBrack)?;
        self.expect(&Tok::RBrack)?;
        Ok(e)
    }

    /// Comma-separated effect items up to (not including) `end`.
    pub fn effect_items(&mut self, end: &Tok) -> PResult<Effect> {
        let mut e = Effect::Pure;
        if self.peek() == end {
            return Ok(e);
        }
        loop {
            e = self.effect_item(e)?;
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(e)
    }

    fn effect_item(&mut self, acc: Effect) -> PResult<Effect> {
        let pos = self.pos();
        // An effect alias spliced into the list.
        if let Tok::Ident(s) = self.peek().clone() {
            if matches!(self.peek_at(1), Tok::Comma | Tok::RBrack | Tok::Eof | Tok::Ident(_)) {
                if let Some(alias) = self.scope.effects.get(&s).cloned() {
                    self.bump();
                    return splice(acc, &alias).map_err(|m| ParseError::at(pos, m));
                }
            }
        }
        match self.calc {
            Calculus::Mam => self.err("MAM has no effects besides `[]`"),
            Calculus::Eff => {
                let op = self.ident()?;
                self.expect(&Tok::Colon)?;
                let p = self.vtype()?;
                self.expect(&Tok::Arrow)?;
                let r = self.vtype()?;
                let mut m = match acc {
                    Effect::Pure => BTreeMap::new(),
                    Effect::Ops(m) => m,
                    _ => unreachable!(),
                };
                if m.insert(op.clone(), OpSig { param: p, result: r }).is_some() {
                    return Err(ParseError::at(pos, format!("duplicate operation `{op}`")));
                }
                Ok(Effect::Ops(m))
            }
            Calculus::Mon => {
                let layer = self.monad_ref()?;
                Ok(Effect::Mon { base: Box::new(acc), layer })
            }
            Calculus::Del => {
                let c = self.ctype()?;
                Ok(Effect::Del { base: Box::new(acc), top: Box::new(c) })
            }
        }
    }

    fn monad_ref(&mut self) -> PResult<Rc<MonadDef>> {
        let pos = self.pos();
        if self.eat_kw("where") {
            return Ok(Rc::new(self.monad_def()?));
        }
        let n = self.ident()?;
        self.scope.monads.get(&n).cloned().ok_or_else(|| ParseError::at(pos, format!("unknown monad `{n}`")))
    }

    /// After `where`: `a. CTYPE { return x -> M | y >>= f -> N }`
    fn monad_def(&mut self) -> PResult<MonadDef> {
        let tyvar = self.ident()?;
        self.expect(&Tok::Dot)?;
        let saved_tv = std::mem::replace(&mut self.tyvars, vec![tyvar.clone()]);
        let saved_env = std::mem::take(&mut self.env);
        let r = (|| {
            let carrier = self.ctype()?;
            self.expect(&Tok::LBrace)?;
            self.expect_kw("return")?;
            let xp = self.pattern()?;
            self.expect(&Tok::Arrow)?;
            let (unit_name, unit) = self.bind_pats(&[xp], |p| p.comp())?;
            let unit_name = unit_name.into_iter().next().unwrap();
            self.expect(&Tok::Bar)?;
            let yp = self.pattern()?;
            self.expect(&Tok::Bind)?;
            let fp = self.pattern()?;
            self.expect(&Tok::Arrow)?;
            let (names, bind) = self.bind_pats(&[yp, fp], |p| p.comp())?;
            self.expect(&Tok::RBrace)?;
            Ok(MonadDef {
                tyvar: tyvar.clone(),
                carrier,
                unit_name,
                unit,
                bind_names: (names[0].clone(), names[1].clone()),
                bind,
            })
        })();
        self.tyvars = saved_tv;
        self.env = saved_env;
        r
    }

    // ------------------------------------------------------------- patterns

    fn pattern(&mut self) -> PResult<Pat> {
        match self.peek().clone() {
            Tok::Lt => {
                self.bump();
                let a = self.pattern()?;
                self.expect(&Tok::Comma)?;
                let b = self.pattern()?;
                self.expect(&Tok::Gt)?;
                Ok(Pat::Pair(Box::new(a), Box::new(b)))
            }
            Tok::LParen => {
                self.bump();
                let a = self.pattern()?;
                if self.eat(&Tok::Comma) {
                    let b = self.pattern()?;
                    self.expect(&Tok::RParen)?;
                    Ok(Pat::Pair(Box::new(a), Box::new(b)))
                } else {
                    self.expect(&Tok::RParen)?;
                    Ok(a)
                }
            }
            Tok::Ident(s) if s == "_" => {
                self.bump();
                Ok(Pat::Wild)
            }
            Tok::Ident(s) if BUILTIN_VALUES.contains(&s.as_str()) => self.err(format!("`{s}` cannot be bound")),
            _ => Ok(Pat::Var(self.ident()?)),
        }
    }

    fn pat_name(p: &Pat) -> String {
        match p {
            Pat::Var(x) => x.clone(),
            Pat::Wild => "_".into(),
            Pat::Pair(..) => "%p".into(),
        }
    }

    /// Bind a sequence of patterns as consecutive binders (first outermost),
    /// parse the body with `body`, and wrap it in the splits the patterns need.
    fn bind_pats(
        &mut self,
        pats: &[Pat],
        body: impl FnOnce(&mut Parser) -> PResult<Comp>,
    ) -> PResult<(Vec<Name>, Comp)> {
        let base = self.env.len();
        let mut names = Vec::new();
        for p in pats {
            let n = Self::pat_name(p);
            names.push(Name::new(n.clone()));
            self.env.push(n);
        }
        let mut wraps = Vec::new();
        let mut work: Vec<(usize, Pat)> = pats.iter().cloned().enumerate().map(|(i, p)| (base + i, p)).collect();
        while let Some((level, p)) = work.pop() {
            if let Pat::Pair(a, b) = p {
                let depth = self.env.len();
                let (na, nb) = (Self::pat_name(&a), Self::pat_name(&b));
                wraps.push(Wrap { scrut_level: level, depth, names: (Name::new(na.clone()), Name::new(nb.clone())) });
                self.env.push(na);
                self.env.push(nb);
                work.push((depth, *a));
                work.push((depth + 1, *b));
            }
        }
        let r = body(self);
        self.env.truncate(base);
        let mut m = r?;
        for w in wraps.into_iter().rev() {
            m = Comp::Split {
                scrutinee: Value::Var(w.depth - 1 - w.scrut_level),
                names: w.names,
                body: Box::new(m),
            };
        }
        Ok((names, m))
    }

    fn lookup(&self, x: &str) -> Option<usize> {
        self.env.iter().rev().position(|n| n == x)
    }

    // -------------------------------------------------------- computations

    pub fn comp(&mut self) -> PResult<Comp> {
        let m = self.comp_noseq()?;
        if self.eat(&Tok::Semi) {
            let (_, n) = self.bind_pats(&[Pat::Wild], |p| p.comp())?;
            return Ok(ast::let_("_", m, n));
        }
        Ok(m)
    }

    fn comp_noseq(&mut self) -> PResult<Comp> {
        let Tok::Ident(kw) = self.peek().clone() else {
            return self.app();
        };
        if *self.peek_at(1) == Tok::Bang {
            return self.app();
        }
        match kw.as_str() {
            "let" => {
                self.bump();
                let p = self.pattern()?;
                self.expect(&Tok::LArrow)?;
                let m = self.comp()?;
                self.expect_kw("in")?;
                let (names, n) = self.bind_pats(&[p], |p| p.comp())?;
                Ok(Comp::Let { bound: Box::new(m), name: names[0].clone(), body: Box::new(n) })
            }
            "fun" => {
                self.bump();
                let mut pats = vec![self.pattern()?];
                while *self.peek() != Tok::Arrow {
                    pats.push(self.pattern()?);
                }
                self.expect(&Tok::Arrow)?;
                let (names, body) = self.bind_pats(&pats, |p| p.comp())?;
                Ok(names.into_iter().rev().fold(body, |b, n| Comp::Lam { name: n, body: Box::new(b) }))
            }
            "case" => {
                self.bump();
                let ty = if self.eat(&Tok::LBrack) {
                    let t = self.ctype()?;
                    self.expect(&Tok::RBrack)?;
                    Some(t)
                } else {
                    None
                };
                let v = self.value()?;
                self.expect_kw("of")?;
                self.expect(&Tok::LBrace)?;
                let mut arms = BTreeMap::new();
                if !self.eat(&Tok::RBrace) {
                    self.eat(&Tok::Bar);
                    loop {
                        let lpos = self.pos();
                        let l = self.ident()?;
                        let p = if *self.peek() == Tok::Arrow { Pat::Wild } else { self.pattern()? };
                        self.expect(&Tok::Arrow)?;
                        let (names, body) = self.bind_pats(&[p], |p| p.comp())?;
                        if arms.insert(l.clone(), Arm { name: names[0].clone(), body }).is_some() {
                            return Err(ParseError::at(lpos, format!("duplicate case arm `{l}`")));
                        }
                        if self.eat(&Tok::RBrace) {
                            break;
                        }
                        self.expect(&Tok::Bar)?;
                    }
                }
                Ok(Comp::Case { scrutinee: v, arms, ty })
            }
            "split" => {
                self.bump();
                let v = self.value()?;
                self.expect_kw("as")?;
                let p = self.pattern()?;
                let Pat::Pair(a, b) = p else {
                    return self.err("`split` needs a pair pattern");
                };
                self.expect_kw("in")?;
                let (names, body) = self.bind_pats(&[*a, *b], |p| p.comp())?;
                Ok(Comp::Split { scrutinee: v, names: (names[0].clone(), names[1].clone()), body: Box::new(body) })
            }
            "handle" => {
                self.require(Construct::Handle)?;
                self.bump();
                let m = self.comp()?;
                self.expect_kw("with")?;
                let h = self.handler_ref()?;
                Ok(ast::handle(m, h))
            }
            "reify" => {
                self.require(Construct::Reify)?;
                self.bump();
                self.expect(&Tok::LBrack)?;
                let monad = self.monad_ref()?;
                self.expect(&Tok::RBrack)?;
                let m = self.comp()?;
                Ok(Comp::Reify { monad, body: Box::new(m) })
            }
            "reflect" => {
                self.require(Construct::Reflect)?;
                self.bump();
                Ok(ast::reflect(self.comp()?))
            }
            "shift0" => {
                self.require(Construct::Shift0)?;
                self.bump();
                let p = self.pattern()?;
                self.expect(&Tok::Arrow)?;
                let (names, body) = self.bind_pats(&[p], |p| p.comp())?;
                Ok(Comp::Shift0 { name: names[0].clone(), body: Box::new(body) })
            }
            "reset" => {
                self.require(Construct::Dollar)?;
                self.bump();
                let m = self.comp()?;
                self.expect_kw("as")?;
                let p = self.pattern()?;
                self.expect_kw("in")?;
                let (names, n) = self.bind_pats(&[p], |p| p.comp())?;
                Ok(Comp::Dollar { body: Box::new(m), name: names[0].clone(), cont: Box::new(n) })
            }
            _ => self.app(),
        }
    }

    fn handler_ref(&mut self) -> PResult<Handler> {
        let pos = self.pos();
        if *self.peek() == Tok::LBrace {
            return self.handler();
        }
        let n = self.ident()?;
        match self.scope.defs.get(&n) {
            Some(DefBody::Handler(h)) => Ok(h.clone()),
            Some(_) => Err(ParseError::at(pos, format!("`{n}` is not a handler"))),
            None => Err(ParseError::at(pos, format!("unknown handler `{n}`"))),
        }
    }

    pub fn handler(&mut self) -> PResult<Handler> {
        self.require(Construct::Handle)?;
        self.expect(&Tok::LBrace)?;
        let mut ret: Option<(Name, Comp)> = None;
        let mut ops = BTreeMap::new();
        if !self.eat(&Tok::RBrace) {
            self.eat(&Tok::Bar);
            loop {
                let pos = self.pos();
                if self.eat_kw("return") {
                    let p = self.pattern()?;
                    self.expect(&Tok::Arrow)?;
                    let (names, body) = self.bind_pats(&[p], |p| p.comp())?;
                    if ret.replace((names[0].clone(), body)).is_some() {
                        return Err(ParseError::at(pos, "duplicate return clause"));
                    }
                } else {
                    // Operation names may be keywords here too.
                    let op = match self.peek().clone() {
                        Tok::Ident(s) if *self.peek_at(1) == Tok::LParen => {
                            self.bump();
                            s
                        }
                        _ => self.ident()?,
                    };
                    self.expect(&Tok::LParen)?;
                    let p = self.pattern()?;
                    self.expect(&Tok::Semi)?;
                    let k = self.pattern()?;
                    self.expect(&Tok::RParen)?;
                    self.expect(&Tok::Arrow)?;
                    let (names, body) = self.bind_pats(&[p, k], |p| p.comp())?;
                    let cl = OpClause { param: names[0].clone(), cont: names[1].clone(), body };
                    if ops.insert(op.clone(), cl).is_some() {
                        return Err(ParseError::at(pos, format!("duplicate clause for `{op}`")));
                    }
                }
                if self.eat(&Tok::RBrace) {
                    break;
                }
                self.expect(&Tok::Bar)?;
            }
        }
        let (ret_name, ret) = ret.unwrap_or_else(|| (Name::new("x"), ast::ret(Value::Var(0))));
        Ok(Handler { ret_name, ret, ops })
    }

    fn app(&mut self) -> PResult<Comp> {
        let mut acc = self.catom()?;
        loop {
            if self.arg_start() {
                if *self.peek() == Tok::LParen {
                    let save = (self.i, self.env.len());
                    match self.vatom() {
                        Ok(v) => {
                            acc = ast::app(acc, v);
                            continue;
                        }
                        Err(_) => {
                            self.i = save.0;
                            self.env.truncate(save.1);
                        }
                    }
                    self.bump();
                    let n = self.comp()?;
                    self.expect(&Tok::RParen)?;
                    acc = ast::let_("a", n, ast::app(ast::shift(&acc, 1, 0), Value::Var(0)));
                } else {
                    let v = self.vatom()?;
                    acc = ast::app(acc, v);
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn arg_start(&self) -> bool {
        match self.peek() {
            Tok::LParen | Tok::Lt => true,
            Tok::Ident(s) => (s == "inj" || !is_keyword(s)) && *self.peek_at(1) != Tok::Bang,
            _ => false,
        }
    }

    fn catom(&mut self) -> PResult<Comp> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "return" => {
                self.bump();
                Ok(Comp::Return(self.value()?))
            }
            Tok::Ident(s) if s == "force" => {
                self.bump();
                Ok(Comp::Force(self.vatom()?))
            }
            Tok::Ident(s) if s == "prj1" || s == "prj2" => {
                self.bump();
                let side = if s == "prj1" { Side::Left } else { Side::Right };
                Ok(Comp::Prj(side, Box::new(self.catom()?)))
            }
            // Keywords are allowed as operation names (`reflect!`, `shift0!`).
            Tok::Ident(s) if *self.peek_at(1) == Tok::Bang => {
                self.require(Construct::Op)?;
                self.bump();
                self.bump();
                let v = self.vatom()?;
                Ok(Comp::Op { op: s, arg: v })
            }
            Tok::LParen => {
                self.bump();
                let m = self.comp()?;
                self.expect(&Tok::RParen)?;
                Ok(m)
            }
            Tok::LtBar => {
                self.bump();
                let a = self.comp()?;
                self.expect(&Tok::Comma)?;
                let b = self.comp()?;
                self.expect(&Tok::BarGt)?;
                Ok(Comp::CPair(Box::new(a), Box::new(b)))
            }
            _ => self.unexpected("a computation"),
        }
    }

    // --------------------------------------------------------------- values

    pub fn value(&mut self) -> PResult<Value> {
        if self.eat_kw("thunk") {
            let effect = if self.eat(&Tok::LBrack) {
                let e = self.effect_items(&Tok::RBrack)?;
                self.expect(&Tok::RBrack)?;
                Some(e)
            } else {
                None
            };
            let m = self.comp()?;
            return Ok(Value::Thunk { effect, body: Box::new(m) });
        }
        self.vatom()
    }

    fn vatom(&mut self) -> PResult<Value> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok(Value::Unit);
                }
                let a = self.value()?;
                if self.eat(&Tok::Comma) {
                    let b = self.value()?;
                    self.expect(&Tok::RParen)?;
                    return Ok(ast::pair(a, b));
                }
                self.expect(&Tok::RParen)?;
                Ok(a)
            }
            Tok::Lt => {
                self.bump();
                let a = self.value()?;
                self.expect(&Tok::Comma)?;
                let b = self.value()?;
                self.expect(&Tok::Gt)?;
                Ok(ast::pair(a, b))
            }
            Tok::Ident(s) if s == "inj" => {
                self.bump();
                let ty = if self.eat(&Tok::LBrack) {
                    let t = self.vtype()?;
                    self.expect(&Tok::RBrack)?;
                    Some(t)
                } else {
                    None
                };
                let lpos = self.pos();
                let label = self.ident()?;
                if let Some(VType::Variant(m)) = &ty {
                    if !m.contains_key(&label) {
                        return Err(ParseError::at(lpos, format!("label `{label}` not in the annotated type")));
                    }
                } else if ty.is_some() {
                    return Err(ParseError::at(lpos, "injection annotated with a non-variant type"));
                }
                let payload = self.vatom()?;
                Ok(Value::Inj { label, ty, payload: Box::new(payload) })
            }
            Tok::Ident(s) if s == "_" => self.err("`_` is not a value"),
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                if let Some(i) = self.lookup(&s) {
                    return Ok(Value::Var(i));
                }
                match self.scope.defs.get(&s) {
                    Some(DefBody::Value(v)) => return Ok(v.clone()),
                    Some(DefBody::Handler(_)) => {
                        return Err(ParseError::at(pos, format!("handler `{s}` used as a value")))
                    }
                    None => {}
                }
                match s.as_str() {
                    "tru" => Ok(ast::tru()),
                    "fls" => Ok(ast::fls()),
                    _ => Err(ParseError::at(pos, format!("unbound variable `{s}`"))),
                }
            }
            Tok::Ident(s) if s == "thunk" => self.err("parenthesize `thunk` here"),
            _ => self.unexpected("a value"),
        }
    }
}

/// Layer an alias's effect on top of `acc`.
fn splice(acc: Effect, alias: &Effect) -> Result<Effect, String> {
    match (acc, alias) {
        (acc, Effect::Pure) => Ok(acc),
        (Effect::Pure, a) => Ok(a.clone()),
        (Effect::Ops(mut m), Effect::Ops(n)) => {
            for (k, v) in n {
                if m.insert(k.clone(), v.clone()).is_some() {
                    return Err(format!("duplicate operation `{k}`"));
                }
            }
            Ok(Effect::Ops(m))
        }
        (acc @ Effect::Mon { .. }, a @ Effect::Mon { .. }) => {
            Ok(a.mon_layers().unwrap().into_iter().fold(acc, |b, l| Effect::Mon { base: Box::new(b), layer: l }))
        }
        (acc @ Effect::Del { .. }, a @ Effect::Del { .. }) => Ok(a
            .del_layers()
            .unwrap()
            .into_iter()
            .fold(acc, |b, c| Effect::Del { base: Box::new(b), top: Box::new(c) })),
        _ => Err("incompatible effect alias".into()),
    }
}
