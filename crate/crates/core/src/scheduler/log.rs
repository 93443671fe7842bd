//! The construction log: a header plus one record per line.

use std::fmt::{self, Write};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fmac::{Fmac, Node};
use crate::logic::parse::sexpr_len;
use crate::logic::{parse_formula, parse_symbol, Formula, Signature, VarSym};
use crate::oracle::ElemId;
use crate::providers::{OmitSource, OmitType};

const MAGIC: &str = "henkin-log 1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("log line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("replay failed at step {step}: {msg}")]
    Replay { step: usize, msg: String },
    #[error("stage {0} is past the end of the log")]
    NoSuchStage(usize),
}

fn perr(line: usize, msg: impl Into<String>) -> LogError {
    LogError::Parse { line, msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogHeader {
    pub seed: u64,
    pub provider: String,
    /// The enumeration signature (without omit-type predicates).
    pub signature: Signature,
    pub arity: usize,
    pub lag: usize,
    pub rounds: usize,
    pub atomic: bool,
    pub omit: Vec<OmitType>,
}

impl LogHeader {
    /// Signature for reading formulas: the base signature plus every
    /// predicate an omit stream mentions.
    pub fn full_signature(&self) -> Signature {
        self.omit.iter().fold(self.signature.clone(), |s, o| o.extend_signature(&s))
    }

    pub fn sighash(&self) -> String {
        let d = Sha256::digest(self.signature.to_string().as_bytes());
        d.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Goal {
    Init,
    Split(Node),
    /// Completeness for one catalog template over every window tuple.
    Decide { tid: u32, signs: Vec<bool> },
    Henkin { tid: u32, args: Vec<VarSym>, witnesses: Vec<VarSym> },
    Omit { m: usize, args: Vec<VarSym>, delta: usize },
    Atomize { args: Vec<VarSym> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub n: usize,
    /// The antichain after the step.
    pub fmac: Fmac,
    pub goal: Goal,
    pub added: Vec<Formula>,
    pub binds: Vec<(VarSym, ElemId)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    Round(usize),
    Elem(ElemId, String),
    Window(usize, Vec<VarSym>),
    Step(Step),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionLog {
    pub header: LogHeader,
    pub records: Vec<Record>,
}

fn hex_signs(bits: &[bool]) -> String {
    if bits.is_empty() {
        return "-".into();
    }
    bits.chunks(4)
        .map(|c| {
            let v = c.iter().enumerate().fold(0u32, |v, (i, &b)| v | (b as u32) << i);
            char::from_digit(v, 16).expect("nibble")
        })
        .collect()
}

fn parse_signs(s: &str, len: Option<usize>) -> Option<Vec<bool>> {
    if s == "-" {
        return Some(Vec::new());
    }
    let mut out = Vec::with_capacity(s.len() * 4);
    for ch in s.chars() {
        let v = ch.to_digit(16)?;
        out.extend((0..4).map(|i| v >> i & 1 == 1));
    }
    if let Some(n) = len {
        if out.len() < n || out[n..].iter().any(|&b| b) {
            return None;
        }
        out.truncate(n);
    }
    Some(out)
}

fn join_syms(v: &[VarSym]) -> String {
    if v.is_empty() {
        return "-".into();
    }
    v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_syms(s: &str) -> Result<Vec<VarSym>, String> {
    if s == "-" || s == "none" {
        return Ok(Vec::new());
    }
    s.split(',').map(|t| parse_symbol(t).map_err(|e| e.to_string())).collect()
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Init => f.write_str("init"),
            Goal::Split(a) => write!(f, "split {a}"),
            Goal::Decide { tid, signs } => write!(f, "complete decide {tid} signs {}", hex_signs(signs)),
            Goal::Henkin { tid, args, witnesses } => {
                let w = if witnesses.is_empty() { "none".to_string() } else { join_syms(witnesses) };
                write!(f, "henkin theta {tid} on {} witness {w}", join_syms(args))
            }
            Goal::Omit { m, args, delta } => write!(f, "omit {m} on {} delta {delta}", join_syms(args)),
            Goal::Atomize { args } => write!(f, "atomize on {}", join_syms(args)),
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {} fmac {} goal {}", self.n, self.fmac, self.goal)?;
        for a in &self.added {
            write!(f, " add {a}")?;
        }
        for (v, e) in &self.binds {
            write!(f, " bind {v} {e}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Record::Round(l) => write!(f, "round {l}"),
            Record::Elem(e, rec) if rec.is_empty() => write!(f, "elem {e}"),
            Record::Elem(e, rec) => write!(f, "elem {e} {rec}"),
            Record::Window(l, syms) => write!(f, "window {l} {}", join_syms(syms)),
            Record::Step(s) => write!(f, "{s}"),
        }
    }
}

/// Cursor over the words of one line; formulas are read as s-expressions.
struct Words<'a> {
    rest: &'a str,
    line: usize,
}

impl<'a> Words<'a> {
    fn word(&mut self) -> Result<&'a str, LogError> {
        let r = self.rest.trim_start();
        if r.is_empty() {
            return Err(perr(self.line, "unexpected end of line"));
        }
        let end = r.find(char::is_whitespace).unwrap_or(r.len());
        self.rest = &r[end..];
        Ok(&r[..end])
    }

    fn expect(&mut self, w: &str) -> Result<(), LogError> {
        let got = self.word()?;
        if got != w {
            return Err(perr(self.line, format!("expected {w:?}, found {got:?}")));
        }
        Ok(())
    }

    fn num<T: std::str::FromStr>(&mut self) -> Result<T, LogError> {
        let w = self.word()?;
        w.parse().map_err(|_| perr(self.line, format!("bad number {w:?}")))
    }

    fn formula(&mut self, sig: &Signature) -> Result<Formula, LogError> {
        let r = self.rest.trim_start();
        let n = sexpr_len(r).filter(|&n| n > 0).ok_or_else(|| perr(self.line, "unbalanced formula"))?;
        self.rest = &r[n..];
        parse_formula(&r[..n], sig).map_err(|e| perr(self.line, e.to_string()))
    }

    fn done(&self) -> bool {
        self.rest.trim().is_empty()
    }
}

impl ConstructionLog {
    /// Steps in order.
    pub fn steps(&self) -> impl Iterator<Item = &Step> {
        self.records.iter().filter_map(|r| match r {
            Record::Step(s) => Some(s),
            _ => None,
        })
    }

    pub fn step_count(&self) -> usize {
        self.steps().count()
    }

    /// Window recorded at round ℓ.
    pub fn window(&self, l: usize) -> Option<&[VarSym]> {
        self.records.iter().find_map(|r| match r {
            Record::Window(m, w) if *m == l => Some(w.as_slice()),
            _ => None,
        })
    }

    /// The final antichain.
    pub fn final_fmac(&self) -> Option<&Fmac> {
        self.steps().last().map(|s| &s.fmac)
    }

    /// Henkin witness table: (θ, z̄) → chosen witnesses.
    pub fn witness_table(&self) -> Vec<(u32, &[VarSym], &[VarSym])> {
        self.steps()
            .filter_map(|s| match &s.goal {
                Goal::Henkin { tid, args, witnesses } => Some((*tid, args.as_slice(), witnesses.as_slice())),
                _ => None,
            })
            .collect()
    }

    /// Omit table: (m, z̄) → index of the refuted δ.
    pub fn omit_table(&self) -> Vec<(usize, &[VarSym], usize)> {
        self.steps()
            .filter_map(|s| match &s.goal {
                Goal::Omit { m, args, delta } => Some((*m, args.as_slice(), *delta)),
                _ => None,
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let h = &self.header;
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "seed {}", h.seed);
        let _ = writeln!(s, "provider {}", h.provider);
        let _ = writeln!(s, "sighash {}", h.sighash());
        let _ = writeln!(s, "arity {}", h.arity);
        let _ = writeln!(s, "lag {}", h.lag);
        let _ = writeln!(s, "rounds {}", h.rounds);
        let _ = writeln!(s, "atomic {}", h.atomic);
        s.push_str(&h.signature.to_string());
        for (m, o) in h.omit.iter().enumerate() {
            match &o.source {
                OmitSource::UnaryFamily(p) => {
                    let _ = writeln!(s, "omit {m} unary {p} bound {}", o.bound);
                }
                OmitSource::List(ds) => {
                    for d in ds {
                        let _ = writeln!(s, "omit {m} delta {d}");
                    }
                }
            }
        }
        for r in &self.records {
            let _ = writeln!(s, "{r}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<ConstructionLog, LogError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        match lines.next() {
            Some((_, MAGIC)) => {}
            _ => return Err(perr(1, format!("missing {MAGIC:?} header"))),
        }
        let mut seed = None;
        let mut provider = None;
        let mut sighash = None;
        let (mut arity, mut lag, mut rounds, mut atomic) = (2, 0, 0, false);
        let mut sig = Signature::new();
        let mut omit_unary: Vec<(usize, OmitType)> = Vec::new();
        let mut omit_lists: Vec<(usize, Vec<String>, usize)> = Vec::new();
        let mut body: Vec<(usize, &str)> = Vec::new();
        let mut in_body = false;
        for (ln, l) in lines {
            if l.trim().is_empty() {
                continue;
            }
            let (head, rest) = l.split_once(' ').unwrap_or((l, ""));
            if !in_body && matches!(head, "round" | "elem" | "step" | "window") {
                in_body = true;
            }
            if in_body {
                body.push((ln, l));
                continue;
            }
            let bad = |what: &str| perr(ln, format!("bad {what} {rest:?}"));
            match head {
                "seed" => seed = Some(rest.parse().map_err(|_| bad("seed"))?),
                "provider" => provider = Some(rest.to_string()),
                "sighash" => sighash = Some(rest.to_string()),
                "arity" => arity = rest.parse().map_err(|_| bad("arity"))?,
                "lag" => lag = rest.parse().map_err(|_| bad("lag"))?,
                "rounds" => rounds = rest.parse().map_err(|_| bad("rounds"))?,
                "atomic" => atomic = rest.parse().map_err(|_| bad("flag"))?,
                "rel" | "fun" => {
                    let (name, a) = rest.split_once(' ').ok_or_else(|| bad("declaration"))?;
                    let a = a.parse().map_err(|_| bad("arity"))?;
                    let r = if head == "rel" { sig.add_rel(name, a) } else { sig.add_fun(name, a) };
                    r.map_err(|e| perr(ln, e.to_string()))?;
                }
                "omit" => {
                    let mut w = Words { rest, line: ln };
                    let m: usize = w.num()?;
                    match w.word()? {
                        "unary" => {
                            let p = w.word()?.to_string();
                            w.expect("bound")?;
                            omit_unary.push((m, OmitType::unary_family(&p, w.num()?)));
                        }
                        "delta" => {
                            let f = w.rest.trim().to_string();
                            match omit_lists.iter_mut().find(|(k, _, _)| *k == m) {
                                Some((_, v, _)) => v.push(f),
                                None => omit_lists.push((m, vec![f], ln)),
                            }
                        }
                        other => return Err(perr(ln, format!("unknown omit source {other:?}"))),
                    }
                }
                other => return Err(perr(ln, format!("unknown header field {other:?}"))),
            }
        }
        let mut omit: Vec<(usize, OmitType)> = omit_unary;
        let base = omit.iter().fold(sig.clone(), |s, (_, o)| o.extend_signature(&s));
        for (m, texts, ln) in omit_lists {
            let ds = texts.iter().map(|t| parse_formula(t, &base).map_err(|e| perr(ln, e.to_string()))).collect::<Result<_, _>>()?;
            omit.push((m, OmitType::list(ds)));
        }
        omit.sort_by_key(|(m, _)| *m);
        if omit.iter().enumerate().any(|(i, (m, _))| i != *m) {
            return Err(perr(0, "omit types must be numbered 0, 1, ..."));
        }
        let header = LogHeader {
            seed: seed.ok_or_else(|| perr(0, "missing seed"))?,
            provider: provider.ok_or_else(|| perr(0, "missing provider"))?,
            signature: sig,
            arity,
            lag,
            rounds,
            atomic,
            omit: omit.into_iter().map(|(_, o)| o).collect(),
        };
        if let Some(h) = sighash {
            if h != header.sighash() {
                return Err(perr(0, format!("signature hash mismatch: header {h}, computed {}", header.sighash())));
            }
        }
        let full = header.full_signature();
        let mut records = Vec::with_capacity(body.len());
        let mut next_step = 0usize;
        for (ln, l) in body {
            let mut w = Words { rest: l, line: ln };
            let rec = match w.word()? {
                "round" => Record::Round(w.num()?),
                "elem" => {
                    let id: ElemId = w.word()?.parse().map_err(|_| perr(ln, "bad element id"))?;
                    Record::Elem(id, w.rest.trim().to_string())
                }
                "window" => {
                    let l: usize = w.num()?;
                    let syms = parse_syms(w.word()?).map_err(|e| perr(ln, e))?;
                    Record::Window(l, syms)
                }
                "step" => {
                    let n: usize = w.num()?;
                    if n != next_step {
                        return Err(perr(ln, format!("expected step {next_step}, found {n}")));
                    }
                    next_step += 1;
                    w.expect("fmac")?;
                    let fmac: Fmac = w.word()?.parse().map_err(|e| perr(ln, format!("{e}")))?;
                    w.expect("goal")?;
                    let goal = match w.word()? {
                        "init" => Goal::Init,
                        "split" => Goal::Split(w.word()?.parse().map_err(|e| perr(ln, format!("{e}")))?),
                        "complete" => {
                            w.expect("decide")?;
                            let tid: u32 = w.num()?;
                            w.expect("signs")?;
                            let hex = w.word()?;
                            // padded to whole digits; the tuple count is checked on replay
                            let signs = parse_signs(hex, None).ok_or_else(|| perr(ln, "bad sign string"))?;
                            Goal::Decide { tid, signs }
                        }
                        "henkin" => {
                            w.expect("theta")?;
                            let tid: u32 = w.num()?;
                            w.expect("on")?;
                            let args = parse_syms(w.word()?).map_err(|e| perr(ln, e))?;
                            w.expect("witness")?;
                            let witnesses = parse_syms(w.word()?).map_err(|e| perr(ln, e))?;
                            Goal::Henkin { tid, args, witnesses }
                        }
                        "omit" => {
                            let m: usize = w.num()?;
                            w.expect("on")?;
                            let args = parse_syms(w.word()?).map_err(|e| perr(ln, e))?;
                            w.expect("delta")?;
                            Goal::Omit { m, args, delta: w.num()? }
                        }
                        "atomize" => {
                            w.expect("on")?;
                            Goal::Atomize { args: parse_syms(w.word()?).map_err(|e| perr(ln, e))? }
                        }
                        other => return Err(perr(ln, format!("unknown goal {other:?}"))),
                    };
                    let mut added = Vec::new();
                    let mut binds = Vec::new();
                    while !w.done() {
                        match w.word()? {
                            "add" => added.push(w.formula(&full)?),
                            "bind" => {
                                let v = parse_symbol(w.word()?).map_err(|e| perr(ln, e.to_string()))?;
                                let e: ElemId = w.word()?.parse().map_err(|_| perr(ln, "bad element id"))?;
                                binds.push((v, e));
                            }
                            other => return Err(perr(ln, format!("unexpected {other:?}"))),
                        }
                    }
                    Record::Step(Step { n, fmac, goal, added, binds })
                }
                other => return Err(perr(ln, format!("unknown record {other:?}"))),
            };
            records.push(rec);
        }
        Ok(ConstructionLog { header, records })
    }

    /// Trim decide signs (possibly padded to whole hex digits) to `n`
    /// tuples, rejecting stray bits.
    pub(crate) fn fit_signs(signs: &[bool], n: usize) -> Option<Vec<bool>> {
        if signs.len() < n || signs.len() > n.div_ceil(4) * 4 || signs[n..].iter().any(|&b| b) {
            return None;
        }
        Some(signs[..n].to_vec())
    }
}
