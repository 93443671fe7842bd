//! Omit files.
//!
//! ```text
//! # comment
//! unary P 64          # δ_i = (P<i> ?w1), i < 64
//! type                # starts a listed type; each line below is one δ
//! (R ?w1 ?w2)
//! (not (= ?w1 ?w2))
//! ```

use anyhow::{anyhow, bail, Result};
use henkin_core::logic::{parse_formula, Formula, Signature};
use henkin_core::providers::OmitType;

pub fn parse(text: &str, sig: &Signature) -> Result<Vec<OmitType>> {
    let mut unary = Vec::new();
    // (line, formula text) per listed type
    let mut lists: Vec<Vec<(usize, String)>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words[0] {
            "unary" => {
                let [_, p, b] = words[..] else { bail!("line {ln}: expected `unary PREFIX BOUND`") };
                let b: usize = b.parse().map_err(|_| anyhow!("line {ln}: bad bound {b:?}"))?;
                if b == 0 {
                    bail!("line {ln}: bound must be positive");
                }
                unary.push(OmitType::unary_family(p, b));
            }
            "type" => lists.push(Vec::new()),
            _ => match lists.last_mut() {
                Some(l) => l.push((ln, line.to_string())),
                None => bail!("line {ln}: formula before any `type` line"),
            },
        }
    }
    let sig = unary.iter().fold(sig.clone(), |s, o| o.extend_signature(&s));
    let mut out = unary;
    for l in lists {
        if l.is_empty() {
            bail!("empty type");
        }
        let ds = l
            .iter()
            .map(|(ln, t)| parse_formula(t, &sig).map_err(|e| anyhow!("line {ln}: {e}")))
            .collect::<Result<Vec<Formula>>>()?;
        out.push(OmitType::list(ds));
    }
    Ok(out)
}
