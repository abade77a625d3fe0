//! The textual grammar for lattice elements.
//!
//! `t1`..`tn` name the atoms, `^` is intersection, `v` is union, `empty` is
//! the empty set. `^` binds tighter than `v`, parentheses group, whitespace
//! is ignored: `t1 v t2 ^ t3` parses as `t1 v (t2^t3)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::PartMask;

/// Parsed expression tree. Meets and joins are kept n-ary so chained
/// operators flatten into a single node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Empty,
    Theta(u8),
    Meet(Vec<Expr>),
    Join(Vec<Expr>),
}

impl Expr {
    /// Evaluates the expression over the part space of a frame with `n`
    /// atoms. Atom indices beyond `n` are rejected.
    pub fn eval(&self, n: u8) -> Result<PartMask> {
        match self {
            Expr::Empty => Ok(PartMask::empty(n)),
            Expr::Theta(i) => {
                if *i == 0 || *i > n {
                    return Err(Error::ThetaOutOfRange { index: *i, n });
                }
                Ok(PartMask::theta(n, *i))
            }
            Expr::Meet(args) => {
                let mut acc = PartMask::full(n);
                for a in args {
                    acc = acc.and(a.eval(n)?);
                }
                Ok(acc)
            }
            Expr::Join(args) => {
                let mut acc = PartMask::empty(n);
                for a in args {
                    acc = acc.or(a.eval(n)?);
                }
                Ok(acc)
            }
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, parent_is_meet: bool) -> fmt::Result {
        match self {
            Expr::Empty => write!(f, "empty"),
            Expr::Theta(i) => write!(f, "t{i}"),
            Expr::Meet(args) => {
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, "^")?;
                    }
                    match a {
                        Expr::Join(_) | Expr::Meet(_) => {
                            write!(f, "(")?;
                            a.write(f, true)?;
                            write!(f, ")")?;
                        }
                        _ => a.write(f, true)?,
                    }
                }
                Ok(())
            }
            Expr::Join(args) => {
                if parent_is_meet {
                    write!(f, "(")?;
                }
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, "v")?;
                    }
                    match a {
                        // multi-factor meets are parenthesized inside a join
                        // even though precedence does not demand it
                        Expr::Meet(m) if m.len() > 1 => {
                            write!(f, "(")?;
                            a.write(f, false)?;
                            write!(f, ")")?;
                        }
                        _ => a.write(f, false)?,
                    }
                }
                if parent_is_meet {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, false)
    }
}

/// Parses the grammar described at module level.
pub fn parse(input: &str) -> Result<Expr> {
    let mut p = Parser {
        input,
        bytes: input.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("trailing input after a complete expression"));
    }
    Ok(e)
}

struct Parser<'a> {
    input: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, reason: &str) -> Error {
        Error::ExprParse {
            input: self.input.to_owned(),
            at: self.pos,
            reason: reason.to_owned(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    // expr := term ('v' term)*
    fn expr(&mut self) -> Result<Expr> {
        let first = self.term()?;
        let mut args = vec![first];
        loop {
            self.skip_ws();
            if self.peek() == Some(b'v') {
                self.pos += 1;
                self.skip_ws();
                args.push(self.term()?);
            } else {
                break;
            }
        }
        Ok(if args.len() == 1 {
            args.pop().unwrap()
        } else {
            Expr::Join(args)
        })
    }

    // term := atom ('^' atom)*
    fn term(&mut self) -> Result<Expr> {
        let first = self.atom()?;
        let mut args = vec![first];
        loop {
            self.skip_ws();
            if self.peek() == Some(b'^') {
                self.pos += 1;
                self.skip_ws();
                args.push(self.atom()?);
            } else {
                break;
            }
        }
        Ok(if args.len() == 1 {
            args.pop().unwrap()
        } else {
            Expr::Meet(args)
        })
    }

    // atom := 't' digits | 'empty' | '(' expr ')'
    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let e = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'e') => {
                if self.bytes[self.pos..].starts_with(b"empty") {
                    self.pos += 5;
                    Ok(Expr::Empty)
                } else {
                    Err(self.err("expected 'empty'"))
                }
            }
            Some(b't') => {
                self.pos += 1;
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err(self.err("'t' must be followed by an atom index"));
                }
                let digits = &self.input[start..self.pos];
                let index: u32 = digits
                    .parse()
                    .map_err(|_| self.err("atom index out of range"))?;
                if index == 0 || index > u8::MAX as u32 {
                    return Err(self.err("atom index out of range"));
                }
                Ok(Expr::Theta(index as u8))
            }
            Some(_) => Err(self.err("expected 't<k>', 'empty' or '('")),
            None => Err(self.err("unexpected end of expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(s: &str, n: u8) -> u64 {
        parse(s).unwrap().eval(n).unwrap().bits()
    }

    #[test]
    fn precedence_meet_binds_tighter_than_join() {
        // t1 v t2^t3 == t1 v (t2^t3), not (t1 v t2)^t3
        assert_eq!(mask("t1 v t2^t3", 3), mask("t1v(t2^t3)", 3));
        assert_ne!(mask("t1 v t2^t3", 3), mask("(t1vt2)^t3", 3));
    }

    #[test]
    fn whitespace_is_ignored() {
        assert_eq!(mask("  t1 ^  t2 ", 2), mask("t1^t2", 2));
        assert_eq!(mask("t1 v t2 v t3", 3), mask("t1vt2vt3", 3));
    }

    #[test]
    fn empty_keyword_annihilates_meets_and_drops_from_joins() {
        assert_eq!(mask("empty", 3), 0);
        assert_eq!(mask("t1 ^ empty", 3), 0);
        assert_eq!(mask("t1 v empty", 3), mask("t1", 3));
    }

    #[test]
    fn atom_index_must_fit_the_frame() {
        let e = parse("t4").unwrap().eval(3);
        assert!(matches!(e, Err(Error::ThetaOutOfRange { index: 4, n: 3 })));
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(parse("").is_err());
        assert!(parse("t").is_err());
        assert!(parse("t0").is_err());
        assert!(parse("t1 ^").is_err());
        assert!(parse("(t1 v t2").is_err());
        assert!(parse("t1 t2").is_err());
        assert!(parse("t1 & t2").is_err());
        assert!(parse("emp").is_err());
    }

    #[test]
    fn display_round_trips_through_the_parser() {
        for s in [
            "t1",
            "empty",
            "t1^t2^t3",
            "(t1^t2)vt3",
            "t1v(t2^t3)",
            "(t1vt2)^t3",
            "((t1^t2)vt3)^(t1vt2)",
        ] {
            let e = parse(s).unwrap();
            let printed = e.to_string();
            let again = parse(&printed).unwrap();
            assert_eq!(
                e.eval(3).unwrap(),
                again.eval(3).unwrap(),
                "{s} -> {printed}"
            );
        }
    }
}
