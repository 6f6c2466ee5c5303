//! Text form of ladder polynomials.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' integer)?
//! primary := number | number 'i' | 'i' | 'I' | 'a' | 'ad' | 'b' | 'bd' | '(' expr ')'
//! ```
//!
//! Products keep their written order and are normal ordered on the fly.

use num_complex::Complex64 as C64;

use super::polynomial::LadderPolynomial;
use super::AlgebraError;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Imag(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Token)>, AlgebraError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        let start = i;
        match ch {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((start, Token::Plus)),
            '-' => out.push((start, Token::Minus)),
            '*' => out.push((start, Token::Star)),
            '^' => out.push((start, Token::Caret)),
            '(' => out.push((start, Token::LParen)),
            ')' => out.push((start, Token::RParen)),
            c if c.is_ascii_digit() || c == '.' => {
                while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent part: 1e-3, 2.5E+4
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        while j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit.parse().map_err(|_| AlgebraError::Parse {
                    position: start,
                    message: format!("bad number '{lit}'"),
                })?;
                if i < bytes.len() && bytes[i] == b'i' && !bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphanumeric()) {
                    i += 1;
                    out.push((start, Token::Imag(value)));
                } else {
                    out.push((start, Token::Number(value)));
                }
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i] as char).is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((start, Token::Ident(text[start..i].to_string())));
                continue;
            }
            other => {
                return Err(AlgebraError::Parse {
                    position: start,
                    message: format!("unexpected character '{other}'"),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

fn mode_of(name: &str) -> Option<(usize, bool)> {
    match name {
        "a" => Some((0, false)),
        "ad" => Some((0, true)),
        "b" => Some((1, false)),
        "bd" => Some((1, true)),
        _ => None,
    }
}

struct Parser<'a> {
    tokens: &'a [(usize, Token)],
    pos: usize,
    modes: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, AlgebraError> {
        Err(AlgebraError::Parse { position: self.position(), message: message.into() })
    }

    fn expr(&mut self) -> Result<LadderPolynomial, AlgebraError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = acc.try_add(&self.term()?)?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = acc.try_sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<LadderPolynomial, AlgebraError> {
        let mut acc = self.unary()?;
        while let Some(Token::Star) = self.peek() {
            self.pos += 1;
            acc = acc.try_mul(&self.unary()?)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<LadderPolynomial, AlgebraError> {
        if let Some(Token::Minus) = self.peek() {
            self.pos += 1;
            return Ok(-&self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<LadderPolynomial, AlgebraError> {
        let base = self.primary()?;
        if let Some(Token::Caret) = self.peek() {
            self.pos += 1;
            match self.peek() {
                Some(Token::Number(n)) if n.fract() == 0.0 && *n >= 0.0 && *n <= 64.0 => {
                    let n = *n as u32;
                    self.pos += 1;
                    Ok(base.pow(n))
                }
                _ => self.err("expected a non-negative integer exponent"),
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<LadderPolynomial, AlgebraError> {
        let position = self.position();
        let tok = match self.tokens.get(self.pos) {
            Some((_, t)) => t.clone(),
            None => return self.err("unexpected end of input"),
        };
        self.pos += 1;
        match tok {
            Token::Number(x) => Ok(LadderPolynomial::constant(self.modes, C64::new(x, 0.0))),
            Token::Imag(x) => Ok(LadderPolynomial::constant(self.modes, C64::new(0.0, x))),
            Token::LParen => {
                let inner = self.expr()?;
                match self.peek() {
                    Some(Token::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => self.err("expected ')'"),
                }
            }
            Token::Ident(name) => match name.as_str() {
                "I" => Ok(LadderPolynomial::identity(self.modes)),
                "i" => Ok(LadderPolynomial::constant(self.modes, C64::new(0.0, 1.0))),
                _ => match mode_of(&name) {
                    Some((mode, _)) if mode >= self.modes => Err(AlgebraError::UnknownMode { name, position }),
                    Some((mode, true)) => Ok(LadderPolynomial::creation(self.modes, mode)),
                    Some((mode, false)) => Ok(LadderPolynomial::annihilation(self.modes, mode)),
                    None => Err(AlgebraError::UnknownMode { name, position }),
                },
            },
            _ => {
                self.pos -= 1;
                self.err("expected a number, operator token or '('")
            }
        }
    }
}

/// Parses with the mode count inferred from the tokens used (`b`/`bd` ⇒ two modes).
pub fn parse_polynomial(text: &str) -> Result<LadderPolynomial, AlgebraError> {
    let tokens = lex(text)?;
    let uses_b = tokens.iter().any(|(_, t)| matches!(t, Token::Ident(s) if s == "b" || s == "bd"));
    parse_tokens(&tokens, if uses_b { 2 } else { 1 }, text.len())
}

/// Parses into a fixed number of modes; tokens for modes beyond it are rejected.
pub fn parse_polynomial_in(text: &str, modes: usize) -> Result<LadderPolynomial, AlgebraError> {
    let tokens = lex(text)?;
    parse_tokens(&tokens, modes, text.len())
}

fn parse_tokens(tokens: &[(usize, Token)], modes: usize, end: usize) -> Result<LadderPolynomial, AlgebraError> {
    let mut p = Parser { tokens, pos: 0, modes, end };
    if tokens.is_empty() {
        return p.err("empty expression");
    }
    let poly = p.expr()?;
    if p.pos != tokens.len() {
        return p.err("unexpected trailing input");
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn number_operator() {
        assert_eq!(parse_polynomial("ad*a").unwrap(), LadderPolynomial::number(1, 0));
    }

    #[test]
    fn k_plus() {
        assert_eq!(parse_polynomial("0.5*ad^2").unwrap(), LadderPolynomial::monomial(1, 0, 2, 0, c(0.5)));
    }

    #[test]
    fn two_mode_coupling() {
        let p = parse_polynomial("ad*a*(bd+b)").unwrap();
        assert_eq!(p.modes(), 2);
        let n_a = LadderPolynomial::number(2, 0);
        let x = &LadderPolynomial::creation(2, 1) + &LadderPolynomial::annihilation(2, 1);
        assert_eq!(p, &n_a * &x);
    }

    #[test]
    fn reversed_order_is_normal_ordered() {
        let p = parse_polynomial("a*ad").unwrap();
        assert_eq!(p, &LadderPolynomial::number(1, 0) + &LadderPolynomial::identity(1));
    }

    #[test]
    fn complex_coefficients() {
        let p = parse_polynomial("(1-2i)*ad + 3i*a - I").unwrap();
        assert_eq!(p.coefficient(&super::super::Signature::new(vec![(1, 0)])), C64::new(1.0, -2.0));
        assert_eq!(p.coefficient(&super::super::Signature::new(vec![(0, 1)])), C64::new(0.0, 3.0));
        assert_eq!(p.coefficient(&super::super::Signature::identity(1)), c(-1.0));
    }

    #[test]
    fn scientific_literals() {
        let p = parse_polynomial("2.5e-1*ad*a").unwrap();
        assert_eq!(p, LadderPolynomial::monomial(1, 0, 1, 1, c(0.25)));
    }

    #[test]
    fn errors_carry_position() {
        match parse_polynomial("ad*+a") {
            Err(AlgebraError::Parse { position, .. }) => assert_eq!(position, 3),
            other => panic!("{other:?}"),
        }
        match parse_polynomial("ad*a)") {
            Err(AlgebraError::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_polynomial("ad^x"), Err(AlgebraError::Parse { .. })));
        assert!(matches!(parse_polynomial(""), Err(AlgebraError::Parse { .. })));
        assert!(matches!(parse_polynomial("a % b"), Err(AlgebraError::Parse { position: 2, .. })));
    }

    #[test]
    fn unknown_modes() {
        assert!(matches!(parse_polynomial("cd*c"), Err(AlgebraError::UnknownMode { position: 0, .. })));
        assert!(matches!(parse_polynomial_in("bd*b", 1), Err(AlgebraError::UnknownMode { .. })));
    }

    #[test]
    fn display_round_trips() {
        for text in ["ad*a", "0.5*ad^2 + 0.25*a^2 - I", "(1+2i)*ad*a*bd - 3i*b", "ad^2*a^2 + ad*a"] {
            let p = parse_polynomial(text).unwrap();
            let q = parse_polynomial_in(&p.to_string(), p.modes()).unwrap();
            assert!(p.approx_eq(&q, 1e-15), "{text} -> {p} -> {q}");
        }
    }
}
