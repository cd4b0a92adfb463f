//! Recursive-descent reader for polynomial text such as `x^2 + 1/2*y^3`.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

use super::poly::Poly;
use super::rat::Rat;
use super::ring::Ring;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    End,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' | '\u{2212}' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '/' => Some(Tok::Slash),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            out.push((pos, t));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().map(|&(_, c)| c).collect();
            out.push((pos, Tok::Num(text.parse().expect("digits"))));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].1.is_alphanumeric() || chars[i].1 == '_' || chars[i].1 == '\'')
            {
                i += 1;
            }
            let text: String = chars[start..i].iter().map(|&(_, c)| c).collect();
            out.push((pos, Tok::Ident(text)));
            continue;
        }
        return Err(Error::Parse {
            pos,
            msg: format!("unexpected character `{c}`"),
        });
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    ring: &'a Ring,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Slash => return self.err("division is only allowed inside a rational literal p/q"),
                Tok::Num(_) | Tok::Ident(_) | Tok::LParen => {
                    return self.err("implicit multiplication is not allowed; use `*`")
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Poly> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let pos = self.pos();
            match self.bump() {
                Tok::Num(n) => match n.to_u32() {
                    Some(e) => Ok(base.pow(e)),
                    None => Err(Error::Parse {
                        pos,
                        msg: "exponent too large".into(),
                    }),
                },
                _ => Err(Error::Parse {
                    pos,
                    msg: "expected a non-negative integer exponent".into(),
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Poly> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(n) => {
                if *self.peek() == Tok::Slash {
                    self.bump();
                    let qpos = self.pos();
                    match self.bump() {
                        Tok::Num(q) if !q.is_zero() => {
                            Ok(Poly::constant(self.ring, Rat::new(n, q)))
                        }
                        Tok::Num(_) => Err(Error::Parse {
                            pos: qpos,
                            msg: "malformed rational: zero denominator".into(),
                        }),
                        _ => Err(Error::Parse {
                            pos: qpos,
                            msg: "malformed rational: expected denominator".into(),
                        }),
                    }
                } else {
                    Ok(Poly::constant(self.ring, Rat::from_int(n)))
                }
            }
            Tok::Ident(name) => match self.ring.index_of(&name) {
                Some(i) => Ok(Poly::var(self.ring, i)),
                None => Err(Error::Parse {
                    pos,
                    msg: format!("unknown variable `{name}`"),
                }),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.err("expected `)`");
                }
                self.bump();
                Ok(inner)
            }
            Tok::End => Err(Error::Parse {
                pos,
                msg: "unexpected end of input".into(),
            }),
            t => Err(Error::Parse {
                pos,
                msg: format!("unexpected token {t:?}"),
            }),
        }
    }
}

/// Parse `src` as a polynomial in `ring`. Every identifier must be a ring
/// variable; positions in errors are byte offsets into `src`.
pub fn parse_poly(src: &str, ring: &Ring) -> Result<Poly> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, ring };
    let out = p.expr()?;
    match p.peek() {
        Tok::End => Ok(out),
        Tok::RParen => p.err("unbalanced `)`"),
        _ => p.err("trailing input"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> Ring {
        Ring::of(&["x", "y", "z", "t"])
    }

    #[test]
    fn parses_symmetric_quartic() {
        let f = parse_poly("x^2+y^2+(z*t)^2", &ring()).unwrap();
        assert_eq!(f.to_string(), "x^2 + y^2 + z^2*t^2");
    }

    #[test]
    fn rationals_and_unary_minus() {
        let f = parse_poly("-1/2*x + 3/6", &ring()).unwrap();
        assert_eq!(f.to_string(), "1/2 - 1/2*x");
        assert_eq!(parse_poly("-x^2", &ring()).unwrap().to_string(), "-x^2");
    }

    #[test]
    fn error_positions() {
        match parse_poly("x + w", &ring()) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        match parse_poly("2x", &ring()) {
            Err(Error::Parse { pos, msg }) => {
                assert_eq!(pos, 1);
                assert!(msg.contains("implicit"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_poly("1/0", &ring()).is_err());
        assert!(parse_poly("x/y", &ring()).is_err());
        assert!(parse_poly("(x", &ring()).is_err());
        assert!(parse_poly("x)", &ring()).is_err());
        assert!(parse_poly("", &ring()).is_err());
    }

    #[test]
    fn primed_names() {
        let r = Ring::of(&["u", "y'"]);
        let f = parse_poly("u^2*y'", &r).unwrap();
        assert_eq!(f.to_string(), "u^2*y'");
    }
}
