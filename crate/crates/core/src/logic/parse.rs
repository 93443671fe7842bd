//! Prefix-grammar parser for formulas and terms.

use std::sync::Arc;

use crate::fmac::Node;

use super::syntax::{Formula, Signature, Term, VarSym};
use super::LogicError;

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn lex(text: &str) -> Vec<(usize, Tok<'_>)> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            '(' => {
                out.push((i, Tok::Open));
                chars.next();
            }
            ')' => {
                out.push((i, Tok::Close));
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let start = i;
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if d == '(' || d == ')' || d.is_whitespace() {
                        break;
                    }
                    end = j + d.len_utf8();
                    chars.next();
                }
                out.push((start, Tok::Atom(&text[start..end])));
            }
        }
    }
    out
}

struct Parser<'a, 's> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    len: usize,
    sig: &'s Signature,
}

fn syntax(pos: usize, msg: impl Into<String>) -> LogicError {
    LogicError::Syntax { pos, msg: msg.into() }
}

impl<'a> Parser<'a, '_> {
    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.len)
    }

    fn next(&mut self) -> Result<Tok<'a>, LogicError> {
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| syntax(self.len, "unexpected end of input"))?;
        self.pos += 1;
        Ok(t.1)
    }

    fn expect_close(&mut self) -> Result<(), LogicError> {
        let at = self.here();
        match self.next()? {
            Tok::Close => Ok(()),
            _ => Err(syntax(at, "expected ')'")),
        }
    }

    fn var_name(&mut self) -> Result<Arc<str>, LogicError> {
        let at = self.here();
        match self.next()? {
            Tok::Atom(a) if a.starts_with('?') && a.len() > 1 => Ok(a[1..].into()),
            _ => Err(syntax(at, "expected a variable ?name")),
        }
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        let at = self.here();
        match self.next()? {
            Tok::Open => {}
            _ => return Err(syntax(at, "expected '('")),
        }
        let head_at = self.here();
        let head = match self.next()? {
            Tok::Atom(a) => a,
            _ => return Err(syntax(head_at, "expected an operator")),
        };
        let f = match head {
            "and" | "or" | "->" => {
                let a = self.formula()?;
                let b = self.formula()?;
                match head {
                    "and" => Formula::and(a, b),
                    "or" => Formula::or(a, b),
                    _ => Formula::imp(a, b),
                }
            }
            "not" => Formula::not(self.formula()?),
            "exists" | "forall" => {
                let x = self.var_name()?;
                let body = Box::new(self.formula()?);
                if head == "exists" {
                    Formula::Exists(x, body)
                } else {
                    Formula::Forall(x, body)
                }
            }
            "=" => {
                let a = self.term()?;
                let b = self.term()?;
                Formula::Eq(a, b)
            }
            r => {
                let arity = self.sig.rel_arity(r).ok_or_else(|| LogicError::UnknownSymbol(r.to_string()))?;
                let mut args = Vec::new();
                while !matches!(self.toks.get(self.pos), Some((_, Tok::Close)) | None) {
                    args.push(self.term()?);
                }
                if args.len() != arity {
                    return Err(LogicError::ArityMismatch { symbol: r.to_string(), expected: arity, found: args.len() });
                }
                Formula::Rel(r.into(), args)
            }
        };
        self.expect_close()?;
        Ok(f)
    }

    fn term(&mut self) -> Result<Term, LogicError> {
        let at = self.here();
        match self.next()? {
            Tok::Atom(a) => {
                if a.starts_with('?') || a.starts_with("x:") || a.starts_with("y:") {
                    return parse_symbol(a).map(Term::Var).map_err(|e| match e {
                        LogicError::Syntax { msg, .. } => syntax(at, msg),
                        e => e,
                    });
                }
                match self.sig.fun_arity(a) {
                    Some(0) => Ok(Term::App(a.into(), vec![])),
                    Some(n) => Err(LogicError::ArityMismatch { symbol: a.to_string(), expected: n, found: 0 }),
                    None => Err(LogicError::UnknownSymbol(a.to_string())),
                }
            }
            Tok::Open => {
                let g_at = self.here();
                let g = match self.next()? {
                    Tok::Atom(g) => g,
                    _ => return Err(syntax(g_at, "expected a function symbol")),
                };
                let arity = self.sig.fun_arity(g).ok_or_else(|| LogicError::UnknownSymbol(g.to_string()))?;
                let mut args = Vec::new();
                while !matches!(self.toks.get(self.pos), Some((_, Tok::Close)) | None) {
                    args.push(self.term()?);
                }
                self.expect_close()?;
                if args.len() != arity {
                    return Err(LogicError::ArityMismatch { symbol: g.to_string(), expected: arity, found: args.len() });
                }
                Ok(Term::App(g.into(), args))
            }
            Tok::Close => Err(syntax(at, "unexpected ')'")),
        }
    }
}

/// Parse a variable symbol: `?name`, `x:<bits>`, `x:<bits>:<i>`, `y:<bits+bits>:<i>`.
pub fn parse_symbol(s: &str) -> Result<VarSym, LogicError> {
    let bad = || syntax(0, format!("bad symbol {s:?}"));
    if let Some(n) = s.strip_prefix('?') {
        if n.is_empty() {
            return Err(bad());
        }
        return Ok(VarSym::Bound(n.into()));
    }
    let node = |t: &str| t.parse::<Node>().map_err(|_| bad());
    if let Some(rest) = s.strip_prefix("x:") {
        return match rest.split_once(':') {
            Some((a, i)) => Ok(VarSym::X(node(a)?, i.parse().map_err(|_| bad())?)),
            None => Ok(VarSym::X1(node(rest)?)),
        };
    }
    if let Some(rest) = s.strip_prefix("y:") {
        let (t, i) = rest.rsplit_once(':').ok_or_else(bad)?;
        let nodes = t.split('+').map(node).collect::<Result<Vec<_>, _>>()?;
        if nodes.is_empty() {
            return Err(bad());
        }
        return Ok(VarSym::y(nodes, i.parse().map_err(|_| bad())?));
    }
    Err(bad())
}

pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, LogicError> {
    let mut p = Parser { toks: lex(text), pos: 0, len: text.len(), sig };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return Err(syntax(p.here(), "trailing input"));
    }
    Ok(f)
}

pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, LogicError> {
    let mut p = Parser { toks: lex(text), pos: 0, len: text.len(), sig };
    let t = p.term()?;
    if p.pos != p.toks.len() {
        return Err(syntax(p.here(), "trailing input"));
    }
    Ok(t)
}

/// Length in bytes of the balanced s-expression or atom starting `text`.
pub fn sexpr_len(text: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
                if depth < 0 {
                    return None;
                }
            }
            c if c.is_whitespace() && depth == 0 => return Some(i),
            _ => {}
        }
    }
    (depth == 0).then_some(text.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph() -> Signature {
        Signature::new().with_rel("E", 2)
    }

    #[test]
    fn parse_examples() {
        let f = parse_formula("(= x:0:0 x:1:0)", &graph()).unwrap();
        assert!(matches!(f, Formula::Eq(..)));
        let g = parse_formula("(exists ?w (E ?w x:0:0))", &graph()).unwrap();
        assert!(matches!(g, Formula::Exists(..)));
        assert!(matches!(
            parse_formula("(E x:0:0)", &graph()),
            Err(LogicError::ArityMismatch { expected: 2, found: 1, .. })
        ));
        assert!(matches!(parse_formula("(F x:0:0)", &graph()), Err(LogicError::UnknownSymbol(_))));
        assert!(matches!(parse_formula("(and (= ?a ?b)", &graph()), Err(LogicError::Syntax { .. })));
    }

    #[test]
    fn symbols_round_trip() {
        for s in ["?w1", "x:ε:0", "x:0101:3", "x:10", "y:0+11:2", "y:ε:0"] {
            assert_eq!(parse_symbol(s).unwrap().to_string(), s);
        }
        assert_eq!(parse_symbol("y:11+0:2").unwrap().to_string(), "y:0+11:2");
    }

    #[test]
    fn print_canonicalises_whitespace() {
        let sig = Signature::new().with_fun("+", 2).with_fun("0", 0);
        let f = parse_formula("( =  ?w   (+ ?x1 ?x2) )", &sig).unwrap();
        assert_eq!(f.to_string(), "(= ?w (+ ?x1 ?x2))");
        let g = parse_formula("(not (= ?w 0))", &sig).unwrap();
        assert_eq!(parse_formula(&g.to_string(), &sig).unwrap(), g);
    }

    #[test]
    fn sexpr_lengths() {
        assert_eq!(sexpr_len("(a (b c)) rest"), Some(9));
        assert_eq!(sexpr_len("atom rest"), Some(4));
        assert_eq!(sexpr_len("(a"), None);
    }
}
