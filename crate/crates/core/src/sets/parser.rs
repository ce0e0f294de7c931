//! Recursive-descent parser for the set-expression DSL.
//!
//! Grammar (binding tightest to loosest: `~`, `&`, `\` and `^`, `|`, all
//! binary operators left-associative):
//!
//! ```text
//! expr     := union
//! union    := diffxor ( '|' diffxor )*
//! diffxor  := inter ( ('\' | '^') inter )*
//! inter    := unary ( '&' unary )*
//! unary    := '~' unary | atom
//! atom     := '(' expr ')' | '{' ints? '}' | call
//! call     := residue '(' INT mod INT ')'
//!           | blocks '(' runs ')'
//!           | greedy '(' number ')'
//!           | dilate '(' INT ',' expr ')'
//!           | interleave '(' expr ')'
//!           | powers '(' INT ')'
//!           | squares | cubes | primes | nat | empty | evens | odds
//! runs     := INT                          (constant run length)
//!           | [INT '*'] INT '^(n-1)'       (geometric run lengths)
//!           | n '^' INT                    (power run lengths)
//!           | '[' ints? ';' ints ']'       (explicit prefix; repeating tail)
//! number   := INT [ '/' INT ] | DECIMAL
//! ```

use crate::error::Error;
use crate::rational::parse_rat;
use crate::sets::{BlockRule, SetExpr};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(u64),
    Dec(String),
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Pipe,
    Amp,
    Backslash,
    Caret,
    Tilde,
    Star,
    Minus,
    Slash,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, Error> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let bytes = src.as_bytes();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let (tline, tcol) = (line, col);
        let mut push = |tok: Tok| out.push(Spanned { tok, line: tline, col: tcol });
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            ' ' | '\t' | '\r' => {}
            '(' => push(Tok::LParen),
            ')' => push(Tok::RParen),
            '{' => push(Tok::LBrace),
            '}' => push(Tok::RBrace),
            '[' => push(Tok::LBracket),
            ']' => push(Tok::RBracket),
            ',' => push(Tok::Comma),
            ';' => push(Tok::Semi),
            '|' => push(Tok::Pipe),
            '&' => push(Tok::Amp),
            '\\' => push(Tok::Backslash),
            '^' => push(Tok::Caret),
            '~' => push(Tok::Tilde),
            '*' => push(Tok::Star),
            '-' => push(Tok::Minus),
            '/' => push(Tok::Slash),
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' && i + 1 < bytes.len()
                    && bytes[i + 1].is_ascii_digit()
                {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    push(Tok::Dec(src[start..i].to_string()));
                } else {
                    let text = &src[start..i];
                    let v: u64 = text.parse().map_err(|_| Error::Parse {
                        line: tline,
                        col: tcol,
                        msg: format!("integer `{text}` out of range"),
                    })?;
                    push(Tok::Int(v));
                }
                col += i - start;
                continue;
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                push(Tok::Ident(src[start..i].to_string()));
                col += i - start;
                continue;
            }
            other => {
                return Err(Error::Parse {
                    line,
                    col,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
        i += 1;
        col += 1;
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        let t = self.peek();
        Error::Parse { line: t.line, col: t.col, msg: msg.into() }
    }

    fn semantic(&self, at: &Spanned, msg: impl Into<String>) -> Error {
        Error::Semantic { line: at.line, col: at.col, msg: msg.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Spanned, Error> {
        if self.peek().tok == tok {
            Ok(self.next())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn expect_int(&mut self, what: &str) -> Result<(u64, Spanned), Error> {
        match self.peek().tok.clone() {
            Tok::Int(v) => {
                let sp = self.next();
                Ok((v, sp))
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn union(&mut self) -> Result<SetExpr, Error> {
        let mut left = self.diffxor()?;
        while self.peek().tok == Tok::Pipe {
            self.next();
            let right = self.diffxor()?;
            left = SetExpr::union(left, right);
        }
        Ok(left)
    }

    fn diffxor(&mut self) -> Result<SetExpr, Error> {
        let mut left = self.inter()?;
        loop {
            match self.peek().tok {
                Tok::Backslash => {
                    self.next();
                    let right = self.inter()?;
                    left = SetExpr::difference(left, right);
                }
                Tok::Caret => {
                    self.next();
                    let right = self.inter()?;
                    left = SetExpr::symm_diff(left, right);
                }
                _ => return Ok(left),
            }
        }
    }

    fn inter(&mut self) -> Result<SetExpr, Error> {
        let mut left = self.unary()?;
        while self.peek().tok == Tok::Amp {
            self.next();
            let right = self.unary()?;
            left = SetExpr::intersection(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<SetExpr, Error> {
        if self.peek().tok == Tok::Tilde {
            self.next();
            return Ok(SetExpr::complement(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<SetExpr, Error> {
        match self.peek().tok.clone() {
            Tok::LParen => {
                self.next();
                let e = self.union()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::LBrace => {
                let open = self.next();
                let mut elems = Vec::new();
                if self.peek().tok != Tok::RBrace {
                    loop {
                        let (v, sp) = self.expect_int("a positive integer")?;
                        if v == 0 {
                            return Err(self.semantic(&sp, "finite sets hold positive integers"));
                        }
                        elems.push(v);
                        if self.peek().tok == Tok::Comma {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBrace, "`}`")?;
                SetExpr::finite(elems).map_err(|e| self.semantic(&open, e.to_string()))
            }
            Tok::Ident(name) => {
                let sp = self.next();
                self.call(&name, sp)
            }
            _ => Err(self.error("expected an expression")),
        }
    }

    fn call(&mut self, name: &str, at: Spanned) -> Result<SetExpr, Error> {
        match name {
            "squares" => Ok(SetExpr::squares()),
            "cubes" => Ok(SetExpr::cubes()),
            "primes" => Ok(SetExpr::primes()),
            "nat" => Ok(SetExpr::naturals()),
            "empty" => Ok(SetExpr::empty()),
            "evens" => Ok(SetExpr::evens()),
            "odds" => Ok(SetExpr::odds()),
            "powers" => {
                self.expect(Tok::LParen, "`(`")?;
                let (b, bsp) = self.expect_int("a base >= 2")?;
                self.expect(Tok::RParen, "`)`")?;
                SetExpr::powers(b).map_err(|e| self.semantic(&bsp, e.to_string()))
            }
            "residue" => {
                self.expect(Tok::LParen, "`(`")?;
                let (r, _) = self.expect_int("a residue")?;
                match self.next().tok {
                    Tok::Ident(kw) if kw == "mod" => {}
                    _ => return Err(self.error("expected `mod`")),
                }
                let (m, msp) = self.expect_int("a modulus")?;
                self.expect(Tok::RParen, "`)`")?;
                SetExpr::residue(r, m).map_err(|e| self.semantic(&msp, e.to_string()))
            }
            "dilate" => {
                self.expect(Tok::LParen, "`(`")?;
                let (k, ksp) = self.expect_int("a dilation factor")?;
                self.expect(Tok::Comma, "`,`")?;
                let inner = self.union()?;
                self.expect(Tok::RParen, "`)`")?;
                SetExpr::dilate(k, inner).map_err(|e| self.semantic(&ksp, e.to_string()))
            }
            "interleave" => {
                self.expect(Tok::LParen, "`(`")?;
                let inner = self.union()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(SetExpr::interleave(inner))
            }
            "greedy" => {
                self.expect(Tok::LParen, "`(`")?;
                let text = match self.peek().tok.clone() {
                    Tok::Dec(d) => {
                        self.next();
                        d
                    }
                    Tok::Int(p) => {
                        self.next();
                        if self.peek().tok == Tok::Slash {
                            self.next();
                            let (q, _) = self.expect_int("a denominator")?;
                            format!("{p}/{q}")
                        } else {
                            format!("{p}")
                        }
                    }
                    _ => return Err(self.error("expected a target in [0,1]")),
                };
                self.expect(Tok::RParen, "`)`")?;
                let rat = parse_rat(&text).map_err(|e| self.semantic(&at, e.to_string()))?;
                crate::constructions::greedy_target_rat(rat)
                    .map_err(|e| self.semantic(&at, e.to_string()))
            }
            "blocks" => {
                self.expect(Tok::LParen, "`(`")?;
                let rule = self.block_rule()?;
                self.expect(Tok::RParen, "`)`")?;
                SetExpr::blocks(rule).map_err(|e| self.semantic(&at, e.to_string()))
            }
            other => Err(Error::Parse {
                line: at.line,
                col: at.col,
                msg: format!("unknown name `{other}`"),
            }),
        }
    }

    fn block_rule(&mut self) -> Result<BlockRule, Error> {
        match self.peek().tok.clone() {
            Tok::LBracket => {
                self.next();
                let prefix = self.int_list(Tok::Semi)?;
                self.expect(Tok::Semi, "`;`")?;
                let tail = self.int_list(Tok::RBracket)?;
                self.expect(Tok::RBracket, "`]`")?;
                Ok(BlockRule::Explicit { prefix, tail })
            }
            Tok::Ident(id) if id == "n" => {
                self.next();
                self.expect(Tok::Caret, "`^`")?;
                let (q, _) = self.expect_int("an exponent")?;
                if q > u32::MAX as u64 {
                    return Err(self.error("exponent out of range"));
                }
                Ok(BlockRule::Power { exponent: q as u32 })
            }
            Tok::Int(first) => {
                self.next();
                match self.peek().tok {
                    Tok::Star => {
                        self.next();
                        let (base, _) = self.expect_int("a base")?;
                        self.geometric_suffix()?;
                        Ok(BlockRule::Geometric { scale: first, base })
                    }
                    Tok::Caret => {
                        self.geometric_suffix()?;
                        Ok(BlockRule::Geometric { scale: 1, base: first })
                    }
                    _ => Ok(BlockRule::Geometric { scale: first, base: 1 }),
                }
            }
            _ => Err(self.error("expected a run-length rule")),
        }
    }

    /// Consumes `^(n-1)` after a geometric base.
    fn geometric_suffix(&mut self) -> Result<(), Error> {
        self.expect(Tok::Caret, "`^`")?;
        self.expect(Tok::LParen, "`(`")?;
        match self.next().tok {
            Tok::Ident(id) if id == "n" => {}
            _ => return Err(self.error("expected `n`")),
        }
        self.expect(Tok::Minus, "`-`")?;
        let (one, sp) = self.expect_int("`1`")?;
        if one != 1 {
            return Err(self.semantic(&sp, "geometric run lengths use exponent n-1"));
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(())
    }

    fn int_list(&mut self, until: Tok) -> Result<Vec<u64>, Error> {
        let mut out = Vec::new();
        if self.peek().tok == until {
            return Ok(out);
        }
        loop {
            let (v, _) = self.expect_int("an integer")?;
            out.push(v);
            if self.peek().tok == Tok::Comma {
                self.next();
            } else {
                return Ok(out);
            }
        }
    }
}

/// Parses DSL text into a [`SetExpr`].
pub fn parse(src: &str) -> Result<SetExpr, Error> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.union()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

/// Renders a caret diagnostic pointing at `(line, col)` of `src`.
pub fn caret_diagnostic(src: &str, line: usize, col: usize) -> String {
    let text = src.lines().nth(line.saturating_sub(1)).unwrap_or("");
    format!("{}\n{}^", text, " ".repeat(col.saturating_sub(1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_residue() {
        let e = parse("residue(1 mod 2)").unwrap();
        assert_eq!(e, SetExpr::odds());
    }

    #[test]
    fn parses_paper_pair() {
        let e = parse("residue(0 mod 2) & interleave(blocks(2^(n-1)))").unwrap();
        match e {
            SetExpr::Intersection(a, b) => {
                assert_eq!(*a, SetExpr::evens());
                assert!(matches!(&*b, SetExpr::Interleave(_)));
            }
            other => panic!("unexpected parse: {other:?}"),
        }
    }

    #[test]
    fn parses_complement_of_powers() {
        let e = parse("~powers(2)").unwrap();
        assert_eq!(e, SetExpr::complement(SetExpr::powers(2).unwrap()));
    }

    #[test]
    fn precedence_tilde_amp_diff_pipe() {
        // ~a & b \ c | d == ((((~a) & b) \ c) | d)
        let e = parse("~odds & evens \\ squares | cubes").unwrap();
        let expect = SetExpr::union(
            SetExpr::difference(
                SetExpr::intersection(SetExpr::complement(SetExpr::odds()), SetExpr::evens()),
                SetExpr::squares(),
            ),
            SetExpr::cubes(),
        );
        assert_eq!(e, expect);
    }

    #[test]
    fn finite_literals() {
        assert_eq!(parse("{}").unwrap(), SetExpr::empty());
        assert_eq!(parse("{3,1,2,2}").unwrap(), SetExpr::finite(vec![1, 2, 3]).unwrap());
        assert!(parse("{0}").is_err());
    }

    #[test]
    fn block_forms() {
        assert!(matches!(
            parse("blocks(2^(n-1))").unwrap(),
            SetExpr::Blocks(s) if *s.rule() == BlockRule::Geometric { scale: 1, base: 2 }
        ));
        assert!(matches!(
            parse("blocks(3*2^(n-1))").unwrap(),
            SetExpr::Blocks(s) if *s.rule() == BlockRule::Geometric { scale: 3, base: 2 }
        ));
        assert!(matches!(
            parse("blocks(n^2)").unwrap(),
            SetExpr::Blocks(s) if *s.rule() == BlockRule::Power { exponent: 2 }
        ));
        assert!(matches!(
            parse("blocks(4)").unwrap(),
            SetExpr::Blocks(s) if *s.rule() == BlockRule::Geometric { scale: 4, base: 1 }
        ));
        assert!(matches!(
            parse("blocks([0,1;2,3])").unwrap(),
            SetExpr::Blocks(s) if *s.rule() == BlockRule::Explicit { prefix: vec![0,1], tail: vec![2,3] }
        ));
    }

    #[test]
    fn errors_carry_position() {
        match parse("residue(3 mod 2)") {
            Err(Error::Semantic { line: 1, col, .. }) => assert!(col > 1),
            other => panic!("expected semantic error, got {other:?}"),
        }
        match parse("(") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse("dilate(0, odds)").is_err());
        assert!(parse("odds oddss").is_err());
    }

    #[test]
    fn caret_points_at_column() {
        let d = caret_diagnostic("residue(3 mod 2)", 1, 9);
        assert!(d.ends_with("        ^"));
    }
}
