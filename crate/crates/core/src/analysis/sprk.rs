//! Splitting rank on a finite structure with a declared algebraic core.
//!
//! Ranks are computed on sets, enumerated in increasing order. A
//! replacement of coordinate j by b* must keep the quantifier-free type of
//! the whole tuple, which on a finite relational structure is the same as
//! agreeing on every quantifier-free formula.

use std::collections::HashSet;
use std::fmt;

use super::AnalysisError;
use crate::logic::FiniteStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankValue {
    /// B meets the declared core.
    BaseFail,
    Finite(usize),
    /// Never produced on a finite structure: each step needs a new element.
    Infinite,
}

impl fmt::Display for RankValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankValue::BaseFail => f.write_str("base-fail"),
            RankValue::Finite(n) => write!(f, "{n}"),
            RankValue::Infinite => f.write_str("inf"),
        }
    }
}

/// Best replacement for one coordinate of B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankStep {
    pub coord: usize,
    pub replaced: usize,
    /// `None` when no type-preserving replacement exists.
    pub witness: Option<usize>,
    /// Rank of B ∪ {witness}.
    pub rank_after: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankResult {
    pub set: Vec<usize>,
    pub value: RankValue,
    pub trace: Vec<RankStep>,
}

impl RankResult {
    pub fn to_text(&self, m: &FiniteStructure) -> String {
        let names = |v: &[usize]| v.iter().map(|&e| m.name(e).to_string()).collect::<Vec<_>>().join(",");
        let mut s = format!("set {}\nrank {}\n", names(&self.set), self.value);
        for st in &self.trace {
            match (st.witness, st.rank_after) {
                (Some(w), Some(r)) => {
                    s += &format!("coord {} replace {} by {} rank {}\n", st.coord, m.name(st.replaced), m.name(w), r)
                }
                _ => s += &format!("coord {} replace {} none\n", st.coord, m.name(st.replaced)),
            }
        }
        s
    }
}

fn members(x: u64) -> Vec<usize> {
    (0..64).filter(|&i| x >> i & 1 == 1).collect()
}

/// Elements b* ∉ X that may stand in for coordinate j of X.
fn replacements(m: &FiniteStructure, x: u64, j: usize, allowed: u64) -> Vec<usize> {
    let t = members(x);
    let ty = m.qf_type(&t);
    let mut out = Vec::new();
    for b in members(allowed & !x) {
        let mut t2 = t.clone();
        t2[j] = b;
        if m.qf_type(&t2) == ty {
            out.push(b);
        }
    }
    out
}

/// Greatest-fixpoint computation over the supersets of B of size at most
/// |B| + cap that avoid the core. Level α+1 keeps the sets all of whose
/// coordinates have a replacement landing in level α.
pub fn sprk(m: &FiniteStructure, b: &[usize], cap: usize) -> Result<RankResult, AnalysisError> {
    let n = m.len();
    if n > 64 {
        return Err(AnalysisError::BadInput(format!("{n} elements; at most 64 supported")));
    }
    if m.signature().funs().next().is_some() {
        return Err(AnalysisError::BadInput("splitting rank needs a relational signature".into()));
    }
    if b.is_empty() || b.iter().any(|&e| e >= n) {
        return Err(AnalysisError::BadInput("B must be a non-empty set of elements".into()));
    }
    let base: u64 = b.iter().fold(0, |acc, &e| acc | 1 << e);
    let set = members(base);
    let core: u64 = m.aclcore().iter().fold(0, |acc, &e| acc | 1 << e);
    if base & core != 0 {
        return Ok(RankResult { set, value: RankValue::BaseFail, trace: Vec::new() });
    }
    let allowed = (if n == 64 { u64::MAX } else { (1u64 << n) - 1 }) & !core;
    let horizon = set.len() + cap;
    // the family: supersets of B inside `allowed`, size ≤ horizon
    let mut family = vec![base];
    let mut frontier = vec![base];
    for _ in set.len()..horizon {
        let mut next = HashSet::new();
        for &x in &frontier {
            for e in members(allowed & !x) {
                next.insert(x | 1 << e);
            }
        }
        frontier = next.into_iter().collect();
        frontier.sort_unstable();
        family.extend(&frontier);
    }
    // per set and coordinate, the candidate extensions
    let moves: std::collections::HashMap<u64, Vec<Vec<u64>>> = family
        .iter()
        .map(|&x| {
            let t = members(x);
            let per = (0..t.len())
                .map(|j| {
                    if t.len() >= horizon {
                        Vec::new()
                    } else {
                        replacements(m, x, j, allowed).into_iter().map(|e| x | 1 << e).collect()
                    }
                })
                .collect();
            (x, per)
        })
        .collect();
    // rank[x] = largest α with x in level α
    let mut level: HashSet<u64> = family.iter().copied().collect();
    let mut rank: std::collections::HashMap<u64, usize> = family.iter().map(|&x| (x, 0)).collect();
    let mut alpha = 0;
    loop {
        let next: HashSet<u64> = level
            .iter()
            .copied()
            .filter(|x| moves[x].iter().all(|ext| ext.iter().any(|y| level.contains(y))))
            .collect();
        if next == level {
            // a self-supporting family; impossible once sets stop growing
            return Ok(RankResult { set, value: RankValue::Infinite, trace: Vec::new() });
        }
        alpha += 1;
        for x in &next {
            rank.insert(*x, alpha);
        }
        level = next;
        if !level.contains(&base) {
            break;
        }
        if alpha == cap && horizon < n - core.count_ones() as usize {
            return Err(AnalysisError::CapTooSmall(cap));
        }
    }
    let r = rank[&base];
    let trace = (0..set.len())
        .map(|j| {
            let best = moves[&base][j].iter().filter_map(|y| rank.get(y).map(|r| (*r, *y))).max_by_key(|(r, y)| (*r, std::cmp::Reverse(*y)));
            RankStep {
                coord: j,
                replaced: set[j],
                witness: best.map(|(_, y)| (y & !base).trailing_zeros() as usize),
                rank_after: best.map(|(r, _)| r),
            }
        })
        .collect();
    Ok(RankResult { set, value: RankValue::Finite(r), trace })
}
