#![allow(dead_code)]

use henkin_core::logic::{FiniteStructure, Signature};
use henkin_core::providers::{provider_by_name, OmitType};
use henkin_core::scheduler::{run, ConstructionLog, Record, RunConfig};

pub fn construct(provider: &str, rounds: usize, seed: u64, atomic: bool, omit: Option<OmitType>) -> ConstructionLog {
    let mut p = provider_by_name(provider, seed).unwrap();
    let mut cfg = RunConfig::new(rounds, seed);
    cfg.atomic = atomic;
    cfg.omit.extend(omit);
    run(p.as_mut(), &cfg).unwrap_or_else(|e| panic!("{provider}: {e}"))
}

/// Index of the last step of round `l`.
pub fn last_step_of_round(log: &ConstructionLog, l: usize) -> usize {
    let mut steps = 0;
    for r in &log.records {
        match r {
            Record::Round(m) if *m == l + 1 => break,
            Record::Step(_) => steps += 1,
            _ => {}
        }
    }
    steps - 1
}

/// M = {0..5}, U = {0,1}, f(x) = x mod 2.
pub fn parity() -> FiniteStructure {
    let mut m = FiniteStructure::new(Signature::new().with_fun("f", 1));
    for i in 0..6 {
        m.add_elem(&i.to_string());
    }
    for i in 0..6 {
        m.set_map("f", &[i], i % 2).unwrap();
    }
    m.set_usort([0, 1]).unwrap();
    m
}

/// Pure set of size n with an empty core.
pub fn pure_set(n: usize) -> FiniteStructure {
    let mut m = FiniteStructure::new(Signature::pure_equality());
    for i in 0..n {
        m.add_elem(&format!("a{i}"));
    }
    m
}

/// One binary relation R given by the bits of `edges` (row-major).
pub fn binary(n: usize, edges: u32, core: &[usize]) -> FiniteStructure {
    let mut m = FiniteStructure::new(Signature::new().with_rel("R", 2));
    for i in 0..n {
        m.add_elem(&format!("a{i}"));
    }
    for i in 0..n {
        for j in 0..n {
            if edges >> (i * n + j) & 1 == 1 {
                m.add_fact("R", &[i, j]).unwrap();
            }
        }
    }
    m.set_aclcore(core.iter().copied());
    m
}

/// Independent recursion: None when B meets the core.
pub fn naive_sprk(m: &FiniteStructure, b: &[usize]) -> Option<usize> {
    let mut set = b.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.iter().any(|e| m.aclcore().contains(e)) {
        return None;
    }
    let ty = m.qf_type(&set);
    let mut best = usize::MAX;
    for j in 0..set.len() {
        let mut top = None;
        for e in 0..m.len() {
            if set.contains(&e) || m.aclcore().contains(&e) {
                continue;
            }
            let mut t = set.clone();
            t[j] = e;
            if m.qf_type(&t) != ty {
                continue;
            }
            let mut bigger = set.clone();
            bigger.push(e);
            if let Some(r) = naive_sprk(m, &bigger) {
                top = Some(top.map_or(r + 1, |x: usize| x.max(r + 1)));
            }
        }
        best = best.min(top.unwrap_or(0));
    }
    Some(best)
}
