use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// The digit `1`, the unit type. Other numerals are rejected.
    One,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    /// `<`
    Lt,
    /// `>`
    Gt,
    /// `<|`
    LtBar,
    /// `|>`
    BarGt,
    Comma,
    Semi,
    Colon,
    Dot,
    Arrow,
    LArrow,
    Eq,
    Bar,
    Bang,
    Star,
    Amp,
    /// `=>`
    FatArrow,
    /// `>>=`
    Bind,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::One => "`1`".into(),
            Tok::Eof => "end of input".into(),
            t => format!("`{}`", t.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::LtBar => "<|",
            Tok::BarGt => "|>",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::Arrow => "->",
            Tok::LArrow => "<-",
            Tok::Eq => "=",
            Tok::Bar => "|",
            Tok::Bang => "!",
            Tok::Star => "*",
            Tok::Amp => "&",
            Tok::FatArrow => "=>",
            Tok::Bind => ">>=",
            _ => "",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

pub fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let adv = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            adv(1, &mut i, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Ident(word), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if word != "1" {
                return Err(ParseError::at(pos, format!("unexpected numeral `{word}`")));
            }
            col += i - start;
            out.push((Tok::One, pos));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let next2 = chars.get(i + 2).copied();
        let (tok, n) = match (c, next, next2) {
            ('>', Some('>'), Some('=')) => (Tok::Bind, 3),
            ('<', Some('|'), _) => (Tok::LtBar, 2),
            ('|', Some('>'), _) => (Tok::BarGt, 2),
            ('-', Some('>'), _) => (Tok::Arrow, 2),
            ('<', Some('-'), _) => (Tok::LArrow, 2),
            ('=', Some('>'), _) => (Tok::FatArrow, 2),
            ('(', ..) => (Tok::LParen, 1),
            (')', ..) => (Tok::RParen, 1),
            ('[', ..) => (Tok::LBrack, 1),
            (']', ..) => (Tok::RBrack, 1),
            ('{', ..) => (Tok::LBrace, 1),
            ('}', ..) => (Tok::RBrace, 1),
            ('<', ..) => (Tok::Lt, 1),
            ('>', ..) => (Tok::Gt, 1),
            (',', ..) => (Tok::Comma, 1),
            (';', ..) => (Tok::Semi, 1),
            (':', ..) => (Tok::Colon, 1),
            ('.', ..) => (Tok::Dot, 1),
            ('=', ..) => (Tok::Eq, 1),
            ('|', ..) => (Tok::Bar, 1),
            ('!', ..) => (Tok::Bang, 1),
            ('*', ..) => (Tok::Star, 1),
            ('&', ..) => (Tok::Amp, 1),
            _ => return Err(ParseError::at(pos, format!("unexpected character `{c}`"))),
        };
        adv(n, &mut i, &mut col);
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}
