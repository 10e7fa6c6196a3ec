//! Element and form literals.
//!
//! Elements are written `R`, `R+Rs` or `R-Rs` with `R` an integer or a fraction `p/q`
//! and `s` standing for `sqrt(D)`; the leading rational may carry a minus sign. Forms
//! are sums of terms `[coeff*]mono` where a monomial is `a`, `a^2` or `a*b` for atoms
//! `zN` and `t(zN)`. Coefficients containing a sign go in parentheses. Whitespace
//! between tokens is ignored. Error positions are character offsets into the input.

use std::fmt;

use genquad::{Atom, FieldContext, FieldElement, GeneralizedForm, Rational};
use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

/// Largest accepted variable index.
pub const MAX_VARIABLE: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    MalformedRational,
    ZeroDenominator,
    TrailingGarbage,
    UnexpectedEnd,
    UnknownToken(char),
    Expected(&'static str),
    NonQuadraticMonomial,
    VariableIndexZero,
    VariableIndexTooLarge,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::MalformedRational => f.write_str("malformed rational"),
            ParseErrorKind::ZeroDenominator => f.write_str("zero denominator"),
            ParseErrorKind::TrailingGarbage => f.write_str("trailing garbage"),
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::UnknownToken(c) => write!(f, "unknown token {c:?}"),
            ParseErrorKind::Expected(what) => write!(f, "expected {what}"),
            ParseErrorKind::NonQuadraticMonomial => f.write_str("monomial is not quadratic"),
            ParseErrorKind::VariableIndexZero => f.write_str("variables are numbered from 1"),
            ParseErrorKind::VariableIndexTooLarge => {
                write!(f, "variable index above {MAX_VARIABLE}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {pos}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: usize,
}

struct Cursor {
    chars: Vec<char>,
    i: usize,
}

impl Cursor {
    fn new(text: &str) -> Cursor {
        Cursor {
            chars: text.chars().collect(),
            i: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.i).is_some_and(|c| c.is_whitespace()) {
            self.i += 1;
        }
    }

    /// Next non-whitespace character, without consuming it.
    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.i).copied()
    }

    fn pos(&mut self) -> usize {
        self.skip_ws();
        self.i
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&mut self, kind: ParseErrorKind) -> Result<T, ParseError> {
        let pos = self.pos();
        Err(ParseError { kind, pos })
    }

    /// Error for an unexpected character (or the end) where `what` was wanted.
    fn unexpected<T>(&mut self, what: &'static str) -> Result<T, ParseError> {
        match self.peek() {
            None => self.err(ParseErrorKind::UnexpectedEnd),
            Some(c) if is_known(c) => self.err(ParseErrorKind::Expected(what)),
            Some(c) => self.err(ParseErrorKind::UnknownToken(c)),
        }
    }

    fn expect(&mut self, c: char, what: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.unexpected(what)
        }
    }

    /// A run of decimal digits, not skipping whitespace inside it.
    fn digits(&mut self) -> Option<(usize, String)> {
        let start = self.pos();
        let mut end = start;
        while self.chars.get(end).is_some_and(|c| c.is_ascii_digit()) {
            end += 1;
        }
        if end == start {
            return None;
        }
        self.i = end;
        Some((start, self.chars[start..end].iter().collect()))
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }
}

fn is_known(c: char) -> bool {
    c.is_ascii_digit() || "+-*/^()zts".contains(c)
}

fn rational(cur: &mut Cursor) -> Result<Rational, ParseError> {
    let Some((_, num)) = cur.digits() else {
        return cur.err(ParseErrorKind::MalformedRational);
    };
    let num: BigInt = num.parse().expect("digit run");
    if !cur.eat('/') {
        return Ok(Rational::from_integer(num));
    }
    let Some((at, den)) = cur.digits() else {
        return cur.err(ParseErrorKind::MalformedRational);
    };
    let den: BigInt = den.parse().expect("digit run");
    if den.is_zero() {
        return Err(ParseError {
            kind: ParseErrorKind::ZeroDenominator,
            pos: at,
        });
    }
    Ok(Rational::new(num, den))
}

fn element(cur: &mut Cursor, d: i64) -> Result<FieldElement, ParseError> {
    let negative = cur.eat('-');
    let mut a = rational(cur)?;
    if negative {
        a = -a;
    }
    let sign = match cur.peek() {
        Some('+') => 1,
        Some('-') => -1,
        _ => return Ok(FieldElement::from_rational(d, a)),
    };
    cur.i += 1;
    let mut b = rational(cur)?;
    cur.expect('s', "'s' after the sqrt(D) coefficient")?;
    if sign < 0 {
        b = -b;
    }
    Ok(FieldElement::new(d, a, b))
}

/// Parses an element literal; the whole text must be consumed.
pub fn parse_element(text: &str, ctx: &FieldContext) -> Result<FieldElement, ParseError> {
    let mut cur = Cursor::new(text);
    let x = element(&mut cur, ctx.d())?;
    if !cur.at_end() {
        return cur.err(ParseErrorKind::TrailingGarbage);
    }
    Ok(x)
}

fn atom(cur: &mut Cursor) -> Result<Atom, ParseError> {
    let conj = match cur.peek() {
        Some('z') => false,
        Some('t') => {
            cur.i += 1;
            cur.expect('(', "'(' after t")?;
            true
        }
        _ => return cur.unexpected("a variable"),
    };
    cur.expect('z', "a variable")?;
    let Some((at, idx)) = cur.digits() else {
        return cur.unexpected("a variable index");
    };
    let idx = match idx.parse::<usize>() {
        Ok(0) => {
            return Err(ParseError {
                kind: ParseErrorKind::VariableIndexZero,
                pos: at,
            })
        }
        Ok(v) if v <= MAX_VARIABLE => v,
        _ => {
            return Err(ParseError {
                kind: ParseErrorKind::VariableIndexTooLarge,
                pos: at,
            })
        }
    };
    if conj {
        cur.expect(')', "')'")?;
        Ok(Atom::conj(idx - 1))
    } else {
        Ok(Atom::plain(idx - 1))
    }
}

/// `a`, `a^2` or `a*b`; anything of another degree is rejected.
fn monomial(cur: &mut Cursor) -> Result<(Atom, Atom), ParseError> {
    let start = cur.pos();
    let non_quadratic = Err(ParseError {
        kind: ParseErrorKind::NonQuadraticMonomial,
        pos: start,
    });
    let a = atom(cur)?;
    let pair = if cur.eat('^') {
        match cur.digits() {
            Some((_, e)) if e == "2" => (a, a),
            Some(_) => return non_quadratic,
            None => return cur.unexpected("an exponent"),
        }
    } else if cur.eat('*') {
        let b = atom(cur)?;
        (a, b)
    } else {
        return non_quadratic;
    };
    if matches!(cur.peek(), Some('^' | '*')) {
        return non_quadratic;
    }
    Ok(pair)
}

/// Parses a form over `ctx`; the number of variables is the largest index used.
pub fn parse_form(text: &str, ctx: &FieldContext) -> Result<GeneralizedForm, ParseError> {
    let d = ctx.d();
    if text.trim() == "0" {
        return Ok(GeneralizedForm::new(d, 0));
    }
    let mut cur = Cursor::new(text);
    let mut terms = Vec::new();
    let mut first = true;
    while first || !cur.at_end() {
        let negative = match cur.peek() {
            Some('-') => {
                cur.i += 1;
                true
            }
            Some('+') => {
                cur.i += 1;
                false
            }
            _ if first => false,
            _ => return cur.unexpected("'+' or '-'"),
        };
        first = false;
        let mut coeff = match cur.peek() {
            Some('(') => {
                cur.i += 1;
                let c = element(&mut cur, d)?;
                cur.expect(')', "')'")?;
                cur.expect('*', "'*' after the coefficient")?;
                c
            }
            Some(c) if c.is_ascii_digit() => {
                let c = rational(&mut cur)?;
                cur.expect('*', "'*' after the coefficient")?;
                FieldElement::from_rational(d, c)
            }
            _ => FieldElement::one(d),
        };
        if negative {
            coeff = -coeff;
        }
        let (a, b) = monomial(&mut cur)?;
        terms.push((a, b, coeff));
    }
    let r = terms.iter().map(|(a, b, _)| a.var.max(b.var) + 1).max().unwrap_or(0);
    let mut g = GeneralizedForm::new(d, r);
    for (a, b, c) in &terms {
        g.add_term(*a, *b, c);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(d: i64) -> FieldContext {
        FieldContext::new(d).unwrap()
    }

    fn err(text: &str) -> ParseError {
        parse_form(text, &ctx(2)).unwrap_err()
    }

    #[test]
    fn element_literals() {
        assert_eq!(parse_element("2+1s", &ctx(2)).unwrap(), FieldElement::from_ints(2, 2, 1));
        assert_eq!(parse_element("58-41s", &ctx(2)).unwrap(), FieldElement::from_ints(2, 58, -41));
        let x = parse_element(" 3/2 + 1/2 s", &ctx(5)).unwrap();
        assert_eq!(x, FieldElement::new(5, genquad::rat(3, 2), genquad::rat(1, 2)));
        assert_eq!(parse_element("-7+5s", &ctx(2)).unwrap(), FieldElement::from_ints(2, -7, 5));
        assert_eq!(parse_element("4/2", &ctx(2)).unwrap(), FieldElement::from_int(2, 2));
    }

    #[test]
    fn element_errors() {
        let e = |t: &str| parse_element(t, &ctx(2)).unwrap_err();
        assert_eq!(e("1/0"), ParseError { kind: ParseErrorKind::ZeroDenominator, pos: 2 });
        assert_eq!(e("2+1"), ParseError { kind: ParseErrorKind::UnexpectedEnd, pos: 3 });
        assert_eq!(e("2+1s x").kind, ParseErrorKind::TrailingGarbage);
        assert_eq!(e("2+1s x").pos, 5);
        assert_eq!(e("/3").kind, ParseErrorKind::MalformedRational);
        assert_eq!(e("1/").pos, 2);
        assert_eq!(e("").kind, ParseErrorKind::MalformedRational);
    }

    #[test]
    fn form_literals() {
        let g = parse_form("z1^2 + z2*t(z2)", &ctx(2)).unwrap();
        assert_eq!(g.proper_variables().into_iter().collect::<Vec<_>>(), vec![1]);
        let g = parse_form("4*z1^2 - 4*z1*t(z1) + t(z1)^2", &ctx(2)).unwrap();
        assert_eq!(g.coeffs().len(), 3);
        assert_eq!(g.to_string(), "4*z1^2 - 4*z1*t(z1) + t(z1)^2");
        let g = parse_form("(2+1s)*z1^2", &ctx(2)).unwrap();
        assert_eq!(g.coeffs()[&(Atom::plain(0), Atom::plain(0))], FieldElement::from_ints(2, 2, 1));
    }

    #[test]
    fn like_terms_combine() {
        let g = parse_form("z1*z2 + z2*z1 - 2*z1*z2 + t(z1)*z1", &ctx(3)).unwrap();
        assert_eq!(g.to_string(), "z1*t(z1)");
        assert_eq!(g.r(), 2);
    }

    #[test]
    fn form_errors() {
        assert_eq!(err("z1^3").kind, ParseErrorKind::NonQuadraticMonomial);
        assert_eq!(err("z1 + z2^2"), ParseError { kind: ParseErrorKind::NonQuadraticMonomial, pos: 0 });
        assert_eq!(err("z1*z2*z3").kind, ParseErrorKind::NonQuadraticMonomial);
        assert_eq!(err("z0^2"), ParseError { kind: ParseErrorKind::VariableIndexZero, pos: 1 });
        assert_eq!(err("z1^2 + x^2"), ParseError { kind: ParseErrorKind::UnknownToken('x'), pos: 7 });
        assert_eq!(err("z1^2 z2^2").kind, ParseErrorKind::Expected("'+' or '-'"));
        assert_eq!(err("2+1s*z1^2").kind, ParseErrorKind::Expected("'*' after the coefficient"));
        assert_eq!(err("t(z1^2").kind, ParseErrorKind::Expected("')'"));
        assert_eq!(err("z99999999999999999999999^2").kind, ParseErrorKind::VariableIndexTooLarge);
        assert_eq!(err("").kind, ParseErrorKind::UnexpectedEnd);
    }
}
