//! Surface syntax: lexer, parser, and the canonical `ID[arg, ...]` printer.
//!
//! The grammar documented here is the authority for this artifact. Operator
//! precedence, tightest first:
//!
//! 1. postfix `^*` (conjugate), `^D` (adjoint), `_R` (register lifting),
//!    `ID[args]` (raw application)
//! 2. juxtaposition (left-associative, generic composition)
//! 3. `@` infix tensor (Unicode `⊗` accepted)
//! 4. `*` scalar multiplication (also index product in type positions)
//! 5. `.` scaling (right-associative; binds only when the dot is immediately
//!    followed by the start of a term)
//! 6. `·` composition (Unicode middle dot, same meaning as juxtaposition)
//! 7. unary `-` and `+` addition
//! 8. `->` function arrow (right-associative)
//!
//! Identifiers are `[A-Za-z][A-Za-z0-9']*`; the underscore is always the
//! lifting operator. Commands are terminated by `.` followed by whitespace or
//! end of input. `//` starts a line comment.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::symbol::{Builtin, CNum, Head};
use crate::term::{SourceSpan, Term};

// ---------------------------------------------------------------------------
// printer
// ---------------------------------------------------------------------------

/// Prints a term in the canonical application syntax, e.g. `ADD[X1, X2, X3]`.
/// For named terms, `parse` inverts this exactly.
pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, &mut out);
    out
}

fn write_term(t: &Term, out: &mut String) {
    out.push_str(&t.head().display_name());
    if !t.args().is_empty() {
        out.push('[');
        for (i, a) in t.args().iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write_term(a, out);
        }
        out.push(']');
    }
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

/// A toplevel command of the prover.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Def { name: String, body: Term },
    Var { name: String, ty: Term },
    Check(Term),
    Normalize { term: Term, trace: bool },
    CheckEq(Term, Term),
}

// ---------------------------------------------------------------------------
// diagnostics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
}

impl core::fmt::Display for ParseError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "syntax error at line {}, column {}: {}",
            self.span.line, self.span.column, self.message
        )
    }
}

// ---------------------------------------------------------------------------
// lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(CNum),
    Db(u32),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Semi,
    Plus,
    Minus,
    Star,
    Tensor,
    ScaleDot,
    Terminator,
    ConjOp,
    AdjOp,
    Under,
    Pipe,
    Lt,
    Gt,
    Arrow,
    FatArrow,
    ColonEq,
    Colon,
    CDot,
    Eof,
}

const RESERVED: &[&str] = &["fun", "idx", "Sum", "in", "with", "trace"];

#[derive(Debug, Clone)]
struct SpannedTok {
    tok: Tok,
    span: SourceSpan,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek_byte(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.src[self.pos..].chars().next()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek_byte() {
                Some(b) if (b as char).is_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.bytes.get(self.pos + 1) == Some(&b'/') => {
                    while let Some(b) = self.peek_byte() {
                        if b == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn span_here(&self, start: usize, line: u32, col: u32) -> SourceSpan {
        SourceSpan {
            start,
            end: self.pos,
            line,
            column: col,
        }
    }

    fn error(&self, msg: &str) -> ParseError {
        ParseError {
            message: msg.to_string(),
            span: SourceSpan {
                start: self.pos,
                end: self.pos,
                line: self.line,
                column: self.col,
            },
        }
    }

    fn next_token(&mut self) -> Result<SpannedTok, ParseError> {
        self.skip_trivia();
        let (start, line, col) = (self.pos, self.line, self.col);
        let mk = |lexer: &Lexer<'a>, tok: Tok| SpannedTok {
            tok,
            span: lexer.span_here(start, line, col),
        };
        let c = match self.peek_byte() {
            None => return Ok(mk(self, Tok::Eof)),
            Some(c) => c,
        };
        match c {
            b'(' => {
                self.bump();
                Ok(mk(self, Tok::LParen))
            }
            b')' => {
                self.bump();
                Ok(mk(self, Tok::RParen))
            }
            b'[' => {
                self.bump();
                Ok(mk(self, Tok::LBrack))
            }
            b']' => {
                self.bump();
                Ok(mk(self, Tok::RBrack))
            }
            b',' => {
                self.bump();
                Ok(mk(self, Tok::Comma))
            }
            b';' => {
                self.bump();
                Ok(mk(self, Tok::Semi))
            }
            b'+' => {
                self.bump();
                Ok(mk(self, Tok::Plus))
            }
            b'*' => {
                self.bump();
                Ok(mk(self, Tok::Star))
            }
            b'@' => {
                self.bump();
                Ok(mk(self, Tok::Tensor))
            }
            b'|' => {
                self.bump();
                Ok(mk(self, Tok::Pipe))
            }
            b'<' => {
                self.bump();
                Ok(mk(self, Tok::Lt))
            }
            b'>' => {
                self.bump();
                Ok(mk(self, Tok::Gt))
            }
            b'_' => {
                self.bump();
                Ok(mk(self, Tok::Under))
            }
            b'-' => {
                self.bump();
                if self.peek_byte() == Some(b'>') {
                    self.bump();
                    Ok(mk(self, Tok::Arrow))
                } else {
                    Ok(mk(self, Tok::Minus))
                }
            }
            b'=' => {
                self.bump();
                if self.peek_byte() == Some(b'>') {
                    self.bump();
                    Ok(mk(self, Tok::FatArrow))
                } else {
                    Err(self.error("expected `=>`"))
                }
            }
            b':' => {
                self.bump();
                if self.peek_byte() == Some(b'=') {
                    self.bump();
                    Ok(mk(self, Tok::ColonEq))
                } else {
                    Ok(mk(self, Tok::Colon))
                }
            }
            b'^' => {
                self.bump();
                match self.peek_byte() {
                    Some(b'*') => {
                        self.bump();
                        Ok(mk(self, Tok::ConjOp))
                    }
                    Some(b'D') => {
                        self.bump();
                        Ok(mk(self, Tok::AdjOp))
                    }
                    _ => Err(self.error("expected `^*` or `^D`")),
                }
            }
            b'$' => {
                self.bump();
                let mut n: u32 = 0;
                let mut any = false;
                while let Some(b) = self.peek_byte() {
                    if b.is_ascii_digit() {
                        any = true;
                        n = n * 10 + (b - b'0') as u32;
                        self.bump();
                    } else {
                        break;
                    }
                }
                if !any {
                    return Err(self.error("expected digits after `$`"));
                }
                Ok(mk(self, Tok::Db(n)))
            }
            b'.' => {
                self.bump();
                // a scaling dot must touch the start of a term
                let scale = matches!(
                    self.peek_byte(),
                    Some(b) if b.is_ascii_alphanumeric()
                        || matches!(b, b'(' | b'<' | b'|' | b'$' | b'-')
                );
                if scale {
                    Ok(mk(self, Tok::ScaleDot))
                } else {
                    Ok(mk(self, Tok::Terminator))
                }
            }
            b'0'..=b'9' => {
                let mut n: i64 = 0;
                while let Some(b) = self.peek_byte() {
                    if b.is_ascii_digit() {
                        n = n * 10 + (b - b'0') as i64;
                        self.bump();
                    } else {
                        break;
                    }
                }
                match self.peek_byte() {
                    // zero/identity constant spellings 0K, 0B, 0O, 1O
                    Some(b'K') if n == 0 => {
                        self.bump();
                        Ok(mk(self, Tok::Ident("ZEROK".into())))
                    }
                    Some(b'B') if n == 0 => {
                        self.bump();
                        Ok(mk(self, Tok::Ident("ZEROB".into())))
                    }
                    Some(b'O') if n == 0 => {
                        self.bump();
                        Ok(mk(self, Tok::Ident("ZEROO".into())))
                    }
                    Some(b'O') if n == 1 => {
                        self.bump();
                        Ok(mk(self, Tok::Ident("ONEO".into())))
                    }
                    // imaginary literal 1i, 2i, ...
                    Some(b'i')
                        if !self
                            .bytes
                            .get(self.pos + 1)
                            .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'\'') =>
                    {
                        self.bump();
                        Ok(mk(self, Tok::Num(CNum::new(0, n))))
                    }
                    _ => Ok(mk(self, Tok::Num(CNum::real(n)))),
                }
            }
            _ => {
                let ch = self.src[self.pos..].chars().next().unwrap();
                if ch == '\u{2297}' {
                    // ⊗
                    self.bump();
                    return Ok(mk(self, Tok::Tensor));
                }
                if ch == '\u{00b7}' {
                    // ·
                    self.bump();
                    return Ok(mk(self, Tok::CDot));
                }
                if ch.is_ascii_alphabetic() {
                    let mut s = String::new();
                    while let Some(b) = self.peek_byte() {
                        let c = b as char;
                        if c.is_ascii_alphanumeric() || c == '\'' {
                            s.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Ok(mk(self, Tok::Ident(s)))
                } else {
                    Err(self.error(&format!("unexpected character `{ch}`")))
                }
            }
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<SpannedTok>, ParseError> {
    let mut lexer = Lexer::new(src);
    let mut out = Vec::new();
    loop {
        let t = lexer.next_token()?;
        let end = t.tok == Tok::Eof;
        out.push(t);
        if end {
            return Ok(out);
        }
    }
}

// ---------------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> SpannedTok {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<SourceSpan, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn error(&self, msg: &str) -> ParseError {
        ParseError {
            message: msg.to_string(),
            span: self.peek_span(),
        }
    }

    fn starts_primary(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::Num(_) | Tok::Db(_) | Tok::LParen | Tok::Pipe | Tok::Lt
        )
    }

    // expr := add ( '->' expr )?
    fn expr(&mut self) -> Result<Term, ParseError> {
        let lhs = self.add_level()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.expr()?;
            return Ok(Term::builtin(Builtin::Arrow, alloc::vec![lhs, rhs]));
        }
        Ok(lhs)
    }

    fn signed_operand(&mut self) -> Result<Term, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            // fold -N into a literal, otherwise scale by -1
            if let Tok::Num(n) = *self.peek() {
                self.bump();
                let neg = CNum::new(-n.re, -n.im);
                return self.postfix_tail(Term::num(neg));
            }
            let inner = self.cdot_level()?;
            return Ok(Term::builtin(
                Builtin::Compo,
                alloc::vec![Term::int(-1), inner],
            ));
        }
        self.cdot_level()
    }

    fn add_level(&mut self) -> Result<Term, ParseError> {
        let first = self.signed_operand()?;
        if *self.peek() != Tok::Plus {
            return Ok(first);
        }
        let mut args = alloc::vec![first];
        while *self.peek() == Tok::Plus {
            self.bump();
            args.push(self.signed_operand()?);
        }
        Ok(Term::builtin(Builtin::Add, args))
    }

    fn cdot_level(&mut self) -> Result<Term, ParseError> {
        let mut t = self.scale_level()?;
        while *self.peek() == Tok::CDot {
            self.bump();
            let rhs = self.scale_level()?;
            t = Term::builtin(Builtin::Compo, alloc::vec![t, rhs]);
        }
        Ok(t)
    }

    fn scale_level(&mut self) -> Result<Term, ParseError> {
        let lhs = self.muls_level()?;
        if *self.peek() == Tok::ScaleDot {
            self.bump();
            let rhs = self.scale_level()?;
            return Ok(Term::builtin(Builtin::Scr, alloc::vec![lhs, rhs]));
        }
        Ok(lhs)
    }

    fn muls_level(&mut self) -> Result<Term, ParseError> {
        let first = self.tensor_level()?;
        if *self.peek() != Tok::Star {
            return Ok(first);
        }
        let mut args = alloc::vec![first];
        while *self.peek() == Tok::Star {
            self.bump();
            args.push(self.tensor_level()?);
        }
        Ok(Term::builtin(Builtin::Muls, args))
    }

    fn tensor_level(&mut self) -> Result<Term, ParseError> {
        let mut t = self.juxt_level()?;
        while *self.peek() == Tok::Tensor {
            self.bump();
            let rhs = self.juxt_level()?;
            t = Term::builtin(Builtin::Tsr, alloc::vec![t, rhs]);
        }
        Ok(t)
    }

    fn juxt_level(&mut self) -> Result<Term, ParseError> {
        let mut t = self.postfix()?;
        while self.starts_primary() {
            // reserved words open binders, not juxtaposition operands,
            // except when they begin the operand itself
            if let Tok::Ident(s) = self.peek() {
                if s == "in" || s == "with" || s == "trace" {
                    break;
                }
            }
            let rhs = self.postfix()?;
            t = Term::builtin(Builtin::Compo, alloc::vec![t, rhs]);
        }
        Ok(t)
    }

    fn postfix(&mut self) -> Result<Term, ParseError> {
        let t = self.primary()?;
        self.postfix_tail(t)
    }

    fn postfix_tail(&mut self, mut t: Term) -> Result<Term, ParseError> {
        loop {
            match self.peek() {
                Tok::ConjOp => {
                    self.bump();
                    t = Term::builtin(Builtin::Conj, alloc::vec![t]);
                }
                Tok::AdjOp => {
                    self.bump();
                    t = Term::builtin(Builtin::Adj, alloc::vec![t]);
                }
                Tok::Under => {
                    self.bump();
                    t = self.lifting(t)?;
                }
                _ => return Ok(t),
            }
        }
    }

    // `e_r`, `e_(R1, R2)`, `e_(R1; R2)`
    fn lifting(&mut self, e: Term) -> Result<Term, ParseError> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let r1 = self.register_tree()?;
            match self.bump().tok {
                Tok::RParen => Ok(Term::builtin(Builtin::Label, alloc::vec![e, r1])),
                Tok::Comma => {
                    let r2 = self.register_tree()?;
                    self.expect(Tok::RParen, "`)` after register pair")?;
                    let pair = Term::builtin(Builtin::Pair, alloc::vec![r1, r2]);
                    Ok(Term::builtin(Builtin::Label, alloc::vec![e, pair]))
                }
                Tok::Semi => {
                    let r2 = self.register_tree()?;
                    self.expect(Tok::RParen, "`)` after register pair")?;
                    Ok(Term::builtin(Builtin::Label, alloc::vec![e, r1, r2]))
                }
                _ => Err(self.error("expected `)`, `,` or `;` in register subscript")),
            }
        } else if let Tok::Ident(name) = self.peek().clone() {
            if RESERVED.contains(&name.as_str()) {
                return Err(self.error("reserved word cannot be a register name"));
            }
            self.bump();
            Ok(Term::builtin(
                Builtin::Label,
                alloc::vec![e, Term::var(&name)],
            ))
        } else {
            Err(self.error("expected register after `_`"))
        }
    }

    fn register_tree(&mut self) -> Result<Term, ParseError> {
        match self.bump().tok {
            Tok::Ident(name) => Ok(Term::var(&name)),
            Tok::LParen => {
                let a = self.register_tree()?;
                self.expect(Tok::Comma, "`,` in register pair")?;
                let b = self.register_tree()?;
                self.expect(Tok::RParen, "`)` closing register pair")?;
                Ok(Term::builtin(Builtin::Pair, alloc::vec![a, b]))
            }
            _ => Err(self.error("expected register name or pair")),
        }
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        let span = self.peek_span();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Term::num(n).with_span(span))
            }
            Tok::Db(k) => {
                self.bump();
                Ok(Term::db(k).with_span(span))
            }
            Tok::Pipe => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::Gt, "`>` closing a ket")?;
                Ok(Term::builtin(Builtin::Ket, alloc::vec![e]).with_span(span))
            }
            Tok::Lt => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::Pipe, "`|` closing a bra")?;
                Ok(Term::builtin(Builtin::Bra, alloc::vec![e]).with_span(span))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                if *self.peek() == Tok::Comma {
                    self.bump();
                    let e2 = self.expr()?;
                    self.expect(Tok::RParen, "`)` closing a pair")?;
                    return Ok(Term::builtin(Builtin::Pair, alloc::vec![e, e2]).with_span(span));
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "fun" => {
                    self.bump();
                    let x = self.ident("bound variable after `fun`")?;
                    self.expect(Tok::Colon, "`:` after `fun` variable")?;
                    let ty = self.expr()?;
                    self.expect(Tok::FatArrow, "`=>` in `fun`")?;
                    let body = self.expr()?;
                    Ok(Term::builtin(
                        Builtin::Fun,
                        alloc::vec![Term::var(&x), ty, body],
                    )
                    .with_span(span))
                }
                "idx" => {
                    self.bump();
                    let x = self.ident("bound index after `idx`")?;
                    self.expect(Tok::FatArrow, "`=>` in `idx`")?;
                    let body = self.expr()?;
                    Ok(Term::builtin(Builtin::Idx, alloc::vec![Term::var(&x), body])
                        .with_span(span))
                }
                "Sum" => {
                    self.bump();
                    let x = self.ident("bound variable after `Sum`")?;
                    match self.peek() {
                        Tok::Ident(kw) if kw == "in" => {
                            self.bump();
                        }
                        _ => return Err(self.error("expected `in` after `Sum` variable")),
                    }
                    let set = self.expr()?;
                    self.expect(Tok::Comma, "`,` after a `Sum` set")?;
                    let body = self.expr()?;
                    let fun = Term::builtin(
                        Builtin::Fun,
                        alloc::vec![Term::var(&x), Term::atom(Builtin::Hole), body],
                    );
                    Ok(Term::builtin(Builtin::Sum, alloc::vec![set, fun]).with_span(span))
                }
                _ => {
                    if RESERVED.contains(&name.as_str()) {
                        return Err(self.error(&format!("reserved word `{name}`")));
                    }
                    self.bump();
                    if *self.peek() == Tok::LBrack {
                        self.bump();
                        let mut args = Vec::new();
                        if *self.peek() != Tok::RBrack {
                            loop {
                                args.push(self.expr()?);
                                if *self.peek() == Tok::Comma {
                                    self.bump();
                                } else {
                                    break;
                                }
                            }
                        }
                        self.expect(Tok::RBrack, "`]` closing arguments")?;
                        Ok(self.applied(&name, args)?.with_span(span))
                    } else {
                        match Builtin::from_name(&name) {
                            Some(b) => Ok(Term::atom(b).with_span(span)),
                            None => Ok(Term::var(&name).with_span(span)),
                        }
                    }
                }
            },
            Tok::Eof => Err(self.error("unexpected end of input")),
            _ => Err(self.error("expected a term")),
        }
    }

    fn applied(&self, name: &str, args: Vec<Term>) -> Result<Term, ParseError> {
        if name == "CPX" {
            let ints: Option<Vec<i64>> = args
                .iter()
                .map(|a| a.as_num().filter(|n| n.im == 0).map(|n| n.re))
                .collect();
            return match ints.as_deref() {
                Some([re, im]) => Ok(Term::num(CNum::new(*re, *im))),
                _ => Err(self.error("CPX takes two integer arguments")),
            };
        }
        match Builtin::from_name(name) {
            Some(b) => Ok(Term::builtin(b, args)),
            None => Ok(Term::app(Head::User(Arc::from(name)), args)),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&format!("expected {what}"))),
        }
    }

    fn command(&mut self) -> Result<Command, ParseError> {
        let kw = self.ident("a command")?;
        let cmd = match kw.as_str() {
            "Def" => {
                let name = self.ident("a name after `Def`")?;
                self.expect(Tok::ColonEq, "`:=` in `Def`")?;
                let body = self.expr()?;
                Command::Def { name, body }
            }
            "Var" => {
                let name = self.ident("a name after `Var`")?;
                match self.bump().tok {
                    Tok::Colon | Tok::ColonEq => {}
                    _ => return Err(self.error("expected `:` or `:=` in `Var`")),
                }
                let ty = self.expr()?;
                Command::Var { name, ty }
            }
            "Check" => Command::Check(self.expr()?),
            "Normalize" => {
                let term = self.expr()?;
                let mut trace = false;
                if let Tok::Ident(s) = self.peek() {
                    if s == "with" {
                        self.bump();
                        match self.peek() {
                            Tok::Ident(s) if s == "trace" => {
                                self.bump();
                                trace = true;
                            }
                            _ => return Err(self.error("expected `trace` after `with`")),
                        }
                    }
                }
                Command::Normalize { term, trace }
            }
            "CheckEq" => {
                let lhs = self.expr()?;
                match self.peek() {
                    Tok::Ident(s) if s == "with" => {
                        self.bump();
                    }
                    _ => return Err(self.error("expected `with` in `CheckEq`")),
                }
                let rhs = self.expr()?;
                Command::CheckEq(lhs, rhs)
            }
            other => return Err(self.error(&format!("unknown command `{other}`"))),
        };
        self.expect(Tok::Terminator, "`.` terminating the command")?;
        Ok(cmd)
    }
}

/// Parses a single term.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let t = p.expr()?;
    match p.peek() {
        Tok::Eof | Tok::Terminator => Ok(t),
        _ => Err(p.error("trailing input after term")),
    }
}

/// Parses a single command (must end with `.`).
pub fn parse_command(src: &str) -> Result<Command, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let c = p.command()?;
    match p.peek() {
        Tok::Eof => Ok(c),
        _ => Err(p.error("trailing input after command")),
    }
}

/// Parses a whole script: a sequence of `.`-terminated commands with `//`
/// comments. Returns each command with the span of its first token.
pub fn parse_script(src: &str) -> Result<Vec<(Command, SourceSpan)>, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let mut out = Vec::new();
    while *p.peek() != Tok::Eof {
        let span = p.peek_span();
        let cmd = p.command()?;
        out.push((cmd, span));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Builtin as B;

    fn ket(t: Term) -> Term {
        Term::builtin(B::Ket, alloc::vec![t])
    }

    #[test]
    fn parses_sum_over_pair_kets() {
        let t = parse_term("Sum i in USET[T], |(i, i)>").unwrap();
        let set = Term::builtin(B::USet, alloc::vec![Term::var("T")]);
        let body = ket(Term::builtin(
            B::Pair,
            alloc::vec![Term::var("i"), Term::var("i")],
        ));
        let fun = Term::builtin(
            B::Fun,
            alloc::vec![Term::var("i"), Term::atom(B::Hole), body],
        );
        assert_eq!(t, Term::builtin(B::Sum, alloc::vec![set, fun]));
    }

    #[test]
    fn parses_use_case_compo_and_lifting() {
        let t = parse_term("M_r1 (phi T)_(r1, r2)").unwrap();
        let m = Term::builtin(B::Label, alloc::vec![Term::var("M"), Term::var("r1")]);
        let phi_t = Term::builtin(B::Compo, alloc::vec![Term::var("phi"), Term::var("T")]);
        let pair = Term::builtin(B::Pair, alloc::vec![Term::var("r1"), Term::var("r2")]);
        let lifted = Term::builtin(B::Label, alloc::vec![phi_t, pair]);
        assert_eq!(t, Term::builtin(B::Compo, alloc::vec![m, lifted]));
    }

    #[test]
    fn parses_scalar_zero() {
        assert_eq!(parse_term("0").unwrap(), Term::int(0));
    }

    #[test]
    fn print_add_nary() {
        let t = Term::builtin(
            B::Add,
            alloc::vec![Term::var("X1"), Term::var("X2"), Term::var("X3")],
        );
        assert_eq!(print_term(&t), "ADD[X1, X2, X3]");
    }

    #[test]
    fn print_single_node() {
        assert_eq!(print_term(&ket(Term::var("t"))), "KET[t]");
    }

    #[test]
    fn parses_published_normal_form() {
        let s = "SUM[USET[T], FUN[BASIS[T], SUM[USET[T], FUN[BASIS[T], \
                 SCR[DOT[BRA[$1], MULK[M, KET[$0]]], LTSR[LKET[$1, r1], LKET[$0, r2]]]]]]]";
        let t = parse_term(s).unwrap();
        assert_eq!(print_term(&t), s);
    }

    #[test]
    fn scaling_dot_vs_terminator() {
        let c = parse_command("Check (x * y).K.").unwrap();
        let expect = Term::builtin(
            B::Scr,
            alloc::vec![
                Term::builtin(B::Muls, alloc::vec![Term::var("x"), Term::var("y")]),
                Term::var("K"),
            ],
        );
        assert_eq!(c, Command::Check(expect));
    }

    #[test]
    fn bra_operator_ket_sandwich() {
        let t = parse_term("<i| O |j>").unwrap();
        let bra = Term::builtin(B::Bra, alloc::vec![Term::var("i")]);
        let inner = Term::builtin(B::Compo, alloc::vec![bra, Term::var("O")]);
        let full = Term::builtin(B::Compo, alloc::vec![inner, ket(Term::var("j"))]);
        assert_eq!(t, full);
    }

    #[test]
    fn unary_minus_and_imaginary_literals() {
        assert_eq!(parse_term("-1").unwrap(), Term::int(-1));
        assert_eq!(parse_term("1i").unwrap(), Term::num(CNum::new(0, 1)));
        assert_eq!(parse_term("CPX[1, -1]").unwrap(), Term::num(CNum::new(1, -1)));
        let t = parse_term("-x").unwrap();
        assert_eq!(
            t,
            Term::builtin(B::Compo, alloc::vec![Term::int(-1), Term::var("x")])
        );
    }

    #[test]
    fn operator_lifting_with_two_registers() {
        // `;` splits codomain and domain registers
        let t = parse_term("(|i> <j|)_(a; b)").unwrap();
        assert!(t.is(B::Label));
        assert_eq!(t.args().len(), 3);
    }

    #[test]
    fn command_script_with_comments() {
        let src = "// setup\nVar T : INDEX.\nVar M : OTYPE[T, T].\n";
        let cmds = parse_script(src).unwrap();
        assert_eq!(cmds.len(), 2);
        assert_eq!(
            cmds[1].0,
            Command::Var {
                name: "M".into(),
                ty: Term::builtin(B::OType, alloc::vec![Term::var("T"), Term::var("T")]),
            }
        );
    }

    #[test]
    fn zero_one_constant_spellings() {
        let t = parse_term("0O[T1, T2]").unwrap();
        assert_eq!(
            t,
            Term::builtin(B::ZeroO, alloc::vec![Term::var("T1"), Term::var("T2")])
        );
        assert_eq!(
            parse_term("1O[T]").unwrap(),
            Term::builtin(B::OneO, alloc::vec![Term::var("T")])
        );
    }
}
