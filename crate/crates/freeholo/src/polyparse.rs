//! Text grammar and canonical printer for free polynomials.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr    := ['-'] term (('+' | '-') term)*
//! term    := factor ('*'? factor)*          juxtaposition multiplies
//! factor  := primary ('^' natural)*
//! primary := literal | var | '(' expr ')'
//! var     := 'x' natural                    1-based, bounded by nvars
//! literal := decimal ['i'] | 'i'            e.g. 2, 0.5i, i
//! ```
//!
//! `^` binds tighter than juxtaposition; unary minus is allowed at term head
//! only. Complex literals like `(1+2i)` need no special case: the
//! parenthesized expression evaluates to the same constant.
//!
//! Every diagnostic carries a 1-based line and column. Parsing enforces the
//! global term budget so adversarial input cannot blow up memory.

use num_complex::Complex;
use serde::Deserialize;

use crate::domain::PolyMatrix;
use crate::error::{Error, Result};
use crate::freepoly::FreePoly;
use crate::tol;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, imag: bool },
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err_at(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn lex_all(mut self) -> Result<(Vec<Spanned>, (usize, usize))> {
        let mut out = Vec::new();
        loop {
            while matches!(self.chars.peek(), Some(c) if c.is_whitespace()) {
                self.bump();
            }
            let (line, col) = (self.line, self.col);
            let Some(&c) = self.chars.peek() else {
                return Ok((out, (self.line, self.col)));
            };
            let tok = match c {
                '+' => {
                    self.bump();
                    Tok::Plus
                }
                '-' => {
                    self.bump();
                    Tok::Minus
                }
                '*' => {
                    self.bump();
                    Tok::Star
                }
                '^' => {
                    self.bump();
                    Tok::Caret
                }
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                'i' => {
                    self.bump();
                    Tok::Num {
                        value: 1.0,
                        imag: true,
                    }
                }
                'x' => {
                    self.bump();
                    let digits = self.take_digits();
                    if digits.is_empty() {
                        return Err(err_at(line, col, "variable needs an index, e.g. x1"));
                    }
                    let idx: usize = digits
                        .parse()
                        .map_err(|_| err_at(line, col, "variable index out of range"))?;
                    Tok::Var(idx)
                }
                c if c.is_ascii_digit() => {
                    let mut digits = self.take_digits();
                    if matches!(self.chars.peek(), Some('.')) {
                        self.bump();
                        let frac = self.take_digits();
                        if frac.is_empty() {
                            return Err(err_at(
                                line,
                                col,
                                "malformed literal: digits must follow '.'",
                            ));
                        }
                        digits.push('.');
                        digits.push_str(&frac);
                    }
                    let value: f64 = digits
                        .parse()
                        .map_err(|_| err_at(line, col, "malformed literal"))?;
                    if !value.is_finite() {
                        return Err(err_at(line, col, "literal overflows"));
                    }
                    let imag = if matches!(self.chars.peek(), Some('i')) {
                        self.bump();
                        true
                    } else {
                        false
                    };
                    Tok::Num { value, imag }
                }
                other => {
                    return Err(err_at(line, col, format!("unexpected character '{other}'")));
                }
            };
            out.push(Spanned { tok, line, col });
        }
    }

    fn take_digits(&mut self) -> String {
        let mut s = String::new();
        while matches!(self.chars.peek(), Some(c) if c.is_ascii_digit()) {
            s.push(self.bump().unwrap());
        }
        s
    }
}

/// Recursion guard for pathological nesting.
const MAX_NESTING: usize = 256;

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    nvars: usize,
    end: (usize, usize),
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|s| (s.line, s.col)).unwrap_or(self.end)
    }

    fn budget(&self, p: &FreePoly) -> Result<()> {
        if p.num_terms() > tol::TERM_BUDGET {
            let (line, col) = self.here();
            return Err(err_at(
                line,
                col,
                format!("term budget of {} exceeded", tol::TERM_BUDGET),
            ));
        }
        Ok(())
    }

    fn parse_expr(&mut self) -> Result<FreePoly> {
        let negate = if matches!(self.peek(), Some(s) if s.tok == Tok::Minus) {
            self.bump();
            true
        } else {
            false
        };
        let mut acc = self.parse_term()?;
        if negate {
            acc = acc.scale(-Scalar::ONE);
        }
        loop {
            match self.peek().map(|s| s.tok.clone()) {
                Some(Tok::Plus) => {
                    self.bump();
                    let t = self.parse_term()?;
                    acc = acc.add(&t);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let t = self.parse_term()?;
                    acc = acc.sub(&t);
                }
                _ => break,
            }
            self.budget(&acc)?;
        }
        Ok(acc)
    }

    fn starts_factor(tok: &Tok) -> bool {
        matches!(tok, Tok::Num { .. } | Tok::Var(_) | Tok::LParen)
    }

    fn parse_term(&mut self) -> Result<FreePoly> {
        let mut acc = self.parse_factor()?;
        loop {
            match self.peek() {
                Some(s) if s.tok == Tok::Star => {
                    self.bump();
                    let f = self.parse_factor()?;
                    acc = acc.mul(&f);
                }
                Some(s) if Self::starts_factor(&s.tok) => {
                    let f = self.parse_factor()?;
                    acc = acc.mul(&f);
                }
                _ => break,
            }
            self.budget(&acc)?;
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<FreePoly> {
        let mut base = self.parse_primary()?;
        while matches!(self.peek(), Some(s) if s.tok == Tok::Caret) {
            self.bump();
            let (line, col) = self.here();
            let Some(sp) = self.bump() else {
                return Err(err_at(line, col, "expected exponent after '^'"));
            };
            let Tok::Num { value, imag: false } = sp.tok else {
                return Err(err_at(sp.line, sp.col, "exponent must be a natural number"));
            };
            if value.fract() != 0.0 || value < 0.0 {
                return Err(err_at(sp.line, sp.col, "exponent must be a natural number"));
            }
            if value > tol::MAX_EXPONENT as f64 {
                return Err(err_at(
                    sp.line,
                    sp.col,
                    format!("exponent exceeds limit {}", tol::MAX_EXPONENT),
                ));
            }
            base = base.pow(value as usize);
            self.budget(&base)?;
        }
        Ok(base)
    }

    fn parse_primary(&mut self) -> Result<FreePoly> {
        let (line, col) = self.here();
        let Some(sp) = self.bump() else {
            return Err(err_at(line, col, "expected a value"));
        };
        match sp.tok {
            Tok::Num { value, imag } => {
                let c = if imag {
                    Complex::new(0.0, value)
                } else {
                    Complex::new(value, 0.0)
                };
                Ok(FreePoly::constant(self.nvars, c))
            }
            Tok::Var(idx) => {
                if idx == 0 {
                    return Err(err_at(sp.line, sp.col, "variable index must be at least 1"));
                }
                if idx > self.nvars {
                    return Err(err_at(
                        sp.line,
                        sp.col,
                        format!("unknown variable x{idx}: only {} variables", self.nvars),
                    ));
                }
                Ok(FreePoly::var(self.nvars, idx as u32))
            }
            Tok::LParen => {
                self.depth += 1;
                if self.depth > MAX_NESTING {
                    return Err(err_at(sp.line, sp.col, "parentheses nested too deeply"));
                }
                let inner = self.parse_expr()?;
                self.depth -= 1;
                match self.bump() {
                    Some(s) if s.tok == Tok::RParen => Ok(inner),
                    Some(s) => Err(err_at(s.line, s.col, "expected ')'")),
                    None => Err(err_at(self.end.0, self.end.1, "unbalanced parenthesis")),
                }
            }
            Tok::RParen => Err(err_at(sp.line, sp.col, "unbalanced parenthesis")),
            _ => Err(err_at(sp.line, sp.col, "expected a value")),
        }
    }
}

/// Parse an expression into a free polynomial over `nvars` variables.
pub fn parse_poly(text: &str, nvars: usize) -> Result<FreePoly> {
    if text.trim().is_empty() {
        return Err(err_at(1, 1, "empty input"));
    }
    let (toks, end) = Lexer::new(text).lex_all()?;
    let mut parser = Parser {
        toks,
        pos: 0,
        nvars,
        end,
        depth: 0,
    };
    let poly = parser.parse_expr()?;
    if let Some(sp) = parser.peek() {
        return Err(err_at(sp.line, sp.col, "unexpected trailing input"));
    }
    Ok(poly)
}

/// Parse with the variable count inferred from the largest index used.
/// Constant expressions infer zero variables.
pub fn parse_poly_infer(text: &str) -> Result<FreePoly> {
    let p = parse_poly(text, usize::MAX >> 1)?;
    let d = p
        .terms()
        .map(|(w, _)| w.max_index() as usize)
        .max()
        .unwrap_or(0);
    Ok(FreePoly::from_terms(
        d,
        p.terms().map(|(w, c)| (w.clone(), *c)),
    ))
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Coefficient body without sign: `2`, `0.5i`, `(1+2i)`.
fn fmt_coeff(c: Scalar) -> String {
    if c.im == 0.0 {
        fmt_f64(c.re)
    } else if c.re == 0.0 {
        format!("{}i", fmt_f64(c.im))
    } else if c.im < 0.0 {
        format!("({}-{}i)", fmt_f64(c.re), fmt_f64(-c.im))
    } else {
        format!("({}+{}i)", fmt_f64(c.re), fmt_f64(c.im))
    }
}

/// Canonical printer: graded-lex term order, explicit `*`, sign-separated
/// terms. `parse_poly(print_poly(p)) == p` exactly, and printing is
/// idempotent on its own output.
pub fn print_poly(p: &FreePoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (word, &coeff)) in p.terms().enumerate() {
        let negative = coeff.re < 0.0 || (coeff.re == 0.0 && coeff.im < 0.0);
        let mag = if negative { -coeff } else { coeff };
        let word_str = word
            .0
            .iter()
            .map(|r| format!("x{r}"))
            .collect::<Vec<_>>()
            .join("*");
        let body = if word.0.is_empty() {
            fmt_coeff(mag)
        } else if mag == Scalar::ONE {
            word_str
        } else {
            format!("{}*{}", fmt_coeff(mag), word_str)
        };
        if i == 0 {
            if negative {
                out.push('-');
            }
        } else if negative {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        out.push_str(&body);
    }
    out
}

/// Wire format for a polynomial matrix:
/// `{"I":…, "J":…, "entries":[[expr…]…], "d":optional}` row-major.
#[derive(Deserialize)]
struct DeltaJson {
    #[serde(rename = "I")]
    i: usize,
    #[serde(rename = "J")]
    j: usize,
    entries: Vec<Vec<String>>,
    d: Option<usize>,
}

/// Parse a polynomial-matrix fixture from JSON text. The variable count is
/// taken from the optional `"d"` field, or inferred as the largest index
/// used by any entry.
pub fn parse_delta(json: &str) -> Result<PolyMatrix> {
    let raw: DeltaJson =
        serde_json::from_str(json).map_err(|e| Error::Fixture(format!("delta json: {e}")))?;
    if raw.entries.len() != raw.i || raw.entries.iter().any(|row| row.len() != raw.j) {
        return Err(Error::Fixture(format!(
            "delta grid must be {}x{}, got rows {:?}",
            raw.i,
            raw.j,
            raw.entries.iter().map(|r| r.len()).collect::<Vec<_>>()
        )));
    }
    let mut polys = Vec::with_capacity(raw.i * raw.j);
    let mut max_var = 0usize;
    for row in &raw.entries {
        for entry in row {
            let p = parse_poly_infer(entry)?;
            max_var = max_var.max(p.nvars());
            polys.push(p);
        }
    }
    let d = match raw.d {
        Some(d) => {
            if d < max_var {
                return Err(Error::Fixture(format!(
                    "delta declares d = {d} but uses variable x{max_var}"
                )));
            }
            d
        }
        None => max_var.max(1),
    };
    let polys = polys.into_iter().map(|p| p.with_nvars(d)).collect();
    PolyMatrix::new(raw.i, raw.j, d, polys)
}

/// Serialize a polynomial matrix back to the fixture format.
pub fn print_delta(delta: &PolyMatrix) -> String {
    let entries: Vec<Vec<String>> = (0..delta.block_rows())
        .map(|i| {
            (0..delta.block_cols())
                .map(|j| print_poly(delta.entry(i, j)))
                .collect()
        })
        .collect();
    serde_json::json!({
        "I": delta.block_rows(),
        "J": delta.block_cols(),
        "d": delta.nvars(),
        "entries": entries,
    })
    .to_string()
}
