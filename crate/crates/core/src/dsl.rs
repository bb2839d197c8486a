//! Text syntax for constraints.
//!
//! ```text
//! or       := and ("||" and)*
//! and      := temporal ("&&" temporal)*
//! temporal := unary (("U" | "R") temporal)?
//! unary    := ("X" | "G" | "F" | "!") unary | "(" or ")" | operand cmp operand
//! operand  := "s[" int "]" | number
//! cmp      := "<" | "<=" | "==" | "!="
//! ```
//!
//! `U` is weak until and `R` strong release. `!` is eliminated while
//! parsing, so the resulting syntax tree never contains negation. Numeric
//! literals become extra state columns holding constants: each distinct
//! value gets one column, allocated left to right after the highest `s[i]`
//! index. `#` starts a comment running to the end of the line.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::logic::{not_constraint, Comp, Constraint, Path, StateIndex};

/// A constant stored in a reserved state column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstBinding {
    pub index: StateIndex,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConstraint {
    pub ast: Constraint,
    pub bindings: Vec<ConstBinding>,
    /// Minimum width of a path the constraint can be evaluated on,
    /// constant columns included.
    pub width: usize,
}

impl ParsedConstraint {
    /// Number of leading columns that hold measured values; the constant
    /// columns follow them.
    pub fn state_width(&self) -> usize {
        self.width - self.bindings.len()
    }

    /// Appends the constant columns to every state of `p`, whose width must
    /// equal [`state_width`](Self::state_width).
    pub fn bind(&self, p: &Path) -> Result<Path> {
        let state_width = self.state_width();
        if p.is_empty() {
            return Ok(Path::new(self.width));
        }
        if p.width() != state_width {
            return Err(Error::DimensionMismatch {
                expected_rows: p.len(),
                expected_cols: state_width,
                found_rows: p.len(),
                found_cols: p.width(),
            });
        }
        let mut values = Vec::with_capacity(p.len() * self.width);
        for state in p.states() {
            values.extend_from_slice(state);
            values.extend(self.bindings.iter().map(|b| b.value));
        }
        Path::from_flat(self.width, values)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    State(StateIndex),
    Number(f64),
    Op(Cmp),
    Bang,
    AndAnd,
    OrOr,
    Keyword(char),
    End,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Cmp {
    Lt,
    Le,
    Eq,
    Ne,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err<T>(&self, offset: usize, expected: &str) -> Result<T> {
        Err(Error::Syntax {
            offset,
            expected: expected.to_string(),
        })
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'#' {
                while self.src.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn peek_byte(&self, ahead: usize) -> Option<u8> {
        self.src.get(self.pos + ahead).copied()
    }

    fn number(&mut self) -> Result<Tok> {
        let start = self.pos;
        let digits = |lx: &mut Self| {
            let s = lx.pos;
            while lx.peek_byte(0).is_some_and(|c| c.is_ascii_digit()) {
                lx.pos += 1;
            }
            lx.pos - s
        };
        if self.peek_byte(0) == Some(b'-') {
            self.pos += 1;
        }
        let mut count = digits(self);
        if self.peek_byte(0) == Some(b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            return self.err(start, "a number");
        }
        if matches!(self.peek_byte(0), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek_byte(0), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                return self.err(mark, "exponent digits");
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Tok::Number(v)),
            _ => self.err(start, "a finite number"),
        }
    }

    /// Next token and its byte offset.
    fn next(&mut self) -> Result<(Tok, usize)> {
        self.skip_trivia();
        let at = self.pos;
        let Some(c) = self.peek_byte(0) else {
            return Ok((Tok::End, at));
        };
        let two = |lx: &mut Self, tok| {
            lx.pos += 2;
            Ok((tok, at))
        };
        let one = |lx: &mut Self, tok| {
            lx.pos += 1;
            Ok((tok, at))
        };
        match (c, self.peek_byte(1)) {
            (b'(', _) => one(self, Tok::LParen),
            (b')', _) => one(self, Tok::RParen),
            (b'<', Some(b'=')) => two(self, Tok::Op(Cmp::Le)),
            (b'<', _) => one(self, Tok::Op(Cmp::Lt)),
            (b'=', Some(b'=')) => two(self, Tok::Op(Cmp::Eq)),
            (b'!', Some(b'=')) => two(self, Tok::Op(Cmp::Ne)),
            (b'!', _) => one(self, Tok::Bang),
            (b'&', Some(b'&')) => two(self, Tok::AndAnd),
            (b'|', Some(b'|')) => two(self, Tok::OrOr),
            (b'0'..=b'9' | b'.', _) | (b'-', Some(b'0'..=b'9' | b'.')) => {
                Ok((self.number()?, at))
            }
            (c, _) if c.is_ascii_alphabetic() || c == b'_' => {
                while self
                    .peek_byte(0)
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
                {
                    self.pos += 1;
                }
                let word = &self.src[at..self.pos];
                match word {
                    b"X" | b"G" | b"F" | b"U" | b"R" => Ok((Tok::Keyword(word[0] as char), at)),
                    b"s" => self.state_index(at),
                    _ => self.err(at, "an operator, `s[i]` or a number"),
                }
            }
            _ => self.err(at, "a token"),
        }
    }

    fn state_index(&mut self, at: usize) -> Result<(Tok, usize)> {
        self.skip_trivia();
        if self.peek_byte(0) != Some(b'[') {
            return self.err(self.pos, "`[` after `s`");
        }
        self.pos += 1;
        self.skip_trivia();
        let start = self.pos;
        while self.peek_byte(0).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        let Ok(index) = text.parse::<StateIndex>() else {
            return self.err(start, "a state index");
        };
        self.skip_trivia();
        if self.peek_byte(0) != Some(b']') {
            return self.err(self.pos, "`]`");
        }
        self.pos += 1;
        Ok((Tok::State(index), at))
    }
}

/// Operand before column allocation: literals are encoded as `-(slot + 1)`.
fn literal_code(slot: usize) -> StateIndex {
    -(slot as StateIndex) - 1
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
    literals: Vec<f64>,
    slots: HashMap<u64, usize>,
    max_state: Option<StateIndex>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self> {
        let mut lexer = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        if let Some(at) = text.bytes().position(|b| !b.is_ascii()) {
            return lexer.err(at, "ASCII text");
        }
        let (tok, at) = lexer.next()?;
        Ok(Parser {
            lexer,
            tok,
            at,
            literals: Vec::new(),
            slots: HashMap::new(),
            max_state: None,
        })
    }

    fn bump(&mut self) -> Result<()> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn expected<T>(&self, what: &str) -> Result<T> {
        Err(Error::Syntax {
            offset: self.at,
            expected: what.to_string(),
        })
    }

    fn or(&mut self) -> Result<Constraint> {
        let mut lhs = self.and()?;
        while self.tok == Tok::OrOr {
            self.bump()?;
            lhs = Constraint::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Constraint> {
        let mut lhs = self.temporal()?;
        while self.tok == Tok::AndAnd {
            self.bump()?;
            lhs = Constraint::and(lhs, self.temporal()?);
        }
        Ok(lhs)
    }

    fn temporal(&mut self) -> Result<Constraint> {
        let lhs = self.unary()?;
        match self.tok {
            Tok::Keyword('U') => {
                self.bump()?;
                Ok(Constraint::until(lhs, self.temporal()?))
            }
            Tok::Keyword('R') => {
                self.bump()?;
                Ok(Constraint::release(lhs, self.temporal()?))
            }
            _ => Ok(lhs),
        }
    }

    fn unary(&mut self) -> Result<Constraint> {
        match self.tok {
            Tok::Keyword('X') => {
                self.bump()?;
                Ok(Constraint::next(self.unary()?))
            }
            Tok::Keyword('G') => {
                self.bump()?;
                Ok(Constraint::always(self.unary()?))
            }
            Tok::Keyword('F') => {
                self.bump()?;
                Ok(Constraint::eventually(self.unary()?))
            }
            Tok::Bang => {
                self.bump()?;
                not_constraint(&self.unary()?)
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.or()?;
                if self.tok != Tok::RParen {
                    return self.expected("`)`");
                }
                self.bump()?;
                Ok(inner)
            }
            _ => self.comparison(),
        }
    }

    fn operand(&mut self) -> Result<StateIndex> {
        let v = match self.tok {
            Tok::State(i) => {
                self.max_state = Some(self.max_state.map_or(i, |m| m.max(i)));
                i
            }
            Tok::Number(x) => {
                let next = self.literals.len();
                let slot = *self.slots.entry(x.to_bits()).or_insert(next);
                if slot == next {
                    self.literals.push(x);
                }
                literal_code(slot)
            }
            _ => return self.expected("a constraint, `s[i]` or a number"),
        };
        self.bump()?;
        Ok(v)
    }

    fn comparison(&mut self) -> Result<Constraint> {
        let lhs = self.operand()?;
        let Tok::Op(op) = self.tok else {
            return self.expected("a comparison `<`, `<=`, `==` or `!=`");
        };
        self.bump()?;
        let rhs = self.operand()?;
        Ok(Constraint::Comp(match op {
            Cmp::Lt => Comp::Less(lhs, rhs),
            Cmp::Le => Comp::Lequal(lhs, rhs),
            Cmp::Eq => Comp::Equal(lhs, rhs),
            Cmp::Ne => Comp::Nequal(lhs, rhs),
        }))
    }
}

/// Parses a constraint, placing constant columns right after the highest
/// state index it mentions.
pub fn parse(text: &str) -> Result<ParsedConstraint> {
    parse_with_base(text, 0)
}

/// Parses a constraint whose constant columns start no earlier than
/// `state_width`, so paths with that many measured columns can be bound.
pub fn parse_with_base(text: &str, state_width: usize) -> Result<ParsedConstraint> {
    let mut parser = Parser::new(text)?;
    let ast = parser.or()?;
    if parser.tok != Tok::End {
        return parser.expected("end of input");
    }
    let base = parser
        .max_state
        .map_or(0, |m| m as usize + 1)
        .max(state_width);
    let ast = ast.map_comps(&mut |c| {
        c.map_indices(|v| {
            if v < 0 {
                base as StateIndex + (-v - 1)
            } else {
                v
            }
        })
    });
    let bindings: Vec<ConstBinding> = parser
        .literals
        .iter()
        .enumerate()
        .map(|(slot, &value)| ConstBinding {
            index: (base + slot) as StateIndex,
            value,
        })
        .collect();
    Ok(ParsedConstraint {
        ast,
        width: base + bindings.len(),
        bindings,
    })
}

/// Canonical, fully parenthesized text. Constant columns are printed as
/// their values in shortest round-trip decimal form.
pub fn pretty(pc: &ParsedConstraint) -> String {
    let mut out = String::new();
    write_constraint(&mut out, &pc.ast, &pc.bindings);
    out
}

fn write_operand(out: &mut String, v: StateIndex, bindings: &[ConstBinding]) {
    match bindings.iter().find(|b| b.index == v) {
        Some(b) => {
            let _ = write!(out, "{}", b.value);
        }
        None => {
            let _ = write!(out, "s[{v}]");
        }
    }
}

fn write_constraint(out: &mut String, c: &Constraint, bindings: &[ConstBinding]) {
    let binary = |out: &mut String, a: &Constraint, op: &str, b: &Constraint| {
        out.push('(');
        write_constraint(out, a, bindings);
        let _ = write!(out, " {op} ");
        write_constraint(out, b, bindings);
        out.push(')');
    };
    match c {
        Constraint::Comp(comp) => {
            let ((a, b), op) = match *comp {
                Comp::Less(a, b) => ((a, b), "<"),
                Comp::Lequal(a, b) => ((a, b), "<="),
                Comp::Equal(a, b) => ((a, b), "=="),
                Comp::Nequal(a, b) => ((a, b), "!="),
            };
            out.push('(');
            write_operand(out, a, bindings);
            let _ = write!(out, " {op} ");
            write_operand(out, b, bindings);
            out.push(')');
        }
        Constraint::And(a, b) => binary(out, a, "&&", b),
        Constraint::Or(a, b) => binary(out, a, "||", b),
        Constraint::Until(a, b) => binary(out, a, "U", b),
        Constraint::Release(a, b) => binary(out, a, "R", b),
        Constraint::Next(inner) | Constraint::Always(inner) | Constraint::Eventually(inner) => {
            out.push_str(match c {
                Constraint::Next(_) => "X ",
                Constraint::Always(_) => "G ",
                _ => "F ",
            });
            write_constraint(out, inner, bindings);
        }
    }
}
