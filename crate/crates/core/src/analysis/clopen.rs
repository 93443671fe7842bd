use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::AnalysisError;
use crate::commitment::Commitment;
use crate::fmac::{Fmac, Node, PointPrefix};
use crate::logic::diagram::for_each_tuple;
use crate::logic::normal::slot;
use crate::logic::{Conjunct, Formula, VarSym};
use crate::scheduler::{ConstructionLog, Replay};

/// One factor per coordinate: the cone above a node times one index.
pub type ClopenBox = Vec<(Node, u32)>;

/// A finite union of boxes over the cells of one antichain. Cells of a
/// single antichain are disjoint, so the boxes are too.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClopenSet {
    pub arity: usize,
    pub fmac: Fmac,
    /// Indices run below this bound.
    pub index_bound: u32,
    /// Cells (a, i) below the bound that no window symbol names.
    pub unnamed: usize,
    pub boxes: BTreeSet<ClopenBox>,
    /// Boxes naming one symbol twice; no single value is decided there.
    pub collapsed: usize,
}

fn pow2_inv(e: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << e)
}

/// μ of a box: the product of 2^−(|a|+i+1) over its factors.
pub fn box_measure(b: &[(Node, u32)]) -> BigRational {
    pow2_inv(b.iter().map(|(a, i)| a.len() + *i as usize + 1).sum())
}

pub fn measure(s: &ClopenSet) -> BigRational {
    s.boxes.iter().map(|b| box_measure(b)).fold(BigRational::zero(), |acc, m| acc + m)
}

/// Measure of the whole truncated space: (1 − 2^−I)^k.
pub fn truncation_total(arity: usize, index_bound: u32) -> BigRational {
    let one = BigRational::one();
    let per = &one - pow2_inv(index_bound as usize);
    (0..arity).fold(one, |acc, _| acc * &per)
}

impl ClopenSet {
    pub fn empty(arity: usize, fmac: Fmac, index_bound: u32) -> ClopenSet {
        ClopenSet { arity, fmac, index_bound, unnamed: 0, boxes: BTreeSet::new(), collapsed: 0 }
    }

    /// Every box over the antichain with indices below the bound.
    pub fn full(arity: usize, fmac: Fmac, index_bound: u32) -> ClopenSet {
        let cells: Vec<(Node, u32)> =
            fmac.nodes().iter().flat_map(|a| (0..index_bound).map(move |i| (*a, i))).collect();
        let mut boxes = BTreeSet::new();
        for_each_tuple(cells.len(), arity, |ix| {
            boxes.insert(ix.iter().map(|&j| cells[j]).collect());
        });
        ClopenSet { arity, fmac, index_bound, unnamed: 0, boxes, collapsed: 0 }
    }

    pub fn complement(&self) -> ClopenSet {
        let mut all = ClopenSet::full(self.arity, self.fmac.clone(), self.index_bound);
        all.boxes.retain(|b| !self.boxes.contains(b));
        all
    }

    /// Membership of a point tuple. `None` when the point falls in a
    /// collapsed box, outside the index bound, or its prefixes are too short.
    pub fn contains(&self, point: &[(PointPrefix, u32)]) -> Option<bool> {
        if point.len() != self.arity {
            return None;
        }
        let mut b = Vec::with_capacity(point.len());
        for (p, i) in point {
            if *i >= self.index_bound {
                return None;
            }
            b.push((self.fmac.project(p).ok()?, *i));
        }
        if (1..b.len()).any(|j| b[..j].contains(&b[j])) {
            return None;
        }
        Some(self.boxes.contains(&b))
    }
}

impl fmt::Display for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "arity {}", self.arity)?;
        writeln!(f, "fmac {}", self.fmac)?;
        writeln!(f, "index-bound {}", self.index_bound)?;
        writeln!(f, "unnamed {}", self.unnamed)?;
        writeln!(f, "collapsed {}", self.collapsed)?;
        writeln!(f, "boxes {}", self.boxes.len())?;
        for b in &self.boxes {
            let parts: Vec<String> = b.iter().map(|(a, i)| format!("{a}:{i}")).collect();
            writeln!(f, "box {}", parts.join(" "))?;
        }
        Ok(())
    }
}

/// The boxes at the end of round `stage` on which φ is decided true.
/// φ has free placeholders among ?w1..?wk; coordinates are the doubly
/// indexed x-symbols of the window. The index bound is one past the
/// largest index the window names; smaller unnamed cells are counted, and
/// boxes meeting them are left out.
pub fn clopen_decomposition(log: &ConstructionLog, phi: &Formula, stage: usize) -> Result<ClopenSet, AnalysisError> {
    let mut rp = Replay::new(log)?;
    super::replay_round(&mut rp, stage)?;
    clopen_at(rp.commitment(), rp.window(), phi)
}

/// [`clopen_decomposition`] on a commitment already in hand.
pub fn clopen_at(c: &Commitment, window: &[VarSym], phi: &Formula) -> Result<ClopenSet, AnalysisError> {
    let holes = phi.free_placeholders();
    let k = (0..).take_while(|&j| holes.contains(&slot(j))).count();
    if k != holes.len() || phi.free_vars().iter().any(|v| v.is_instantiated()) {
        return Err(AnalysisError::BadInput(format!("{phi} must use exactly the placeholders ?w1..?wk")));
    }
    let xs: Vec<VarSym> = window.iter().filter(|v| matches!(v, VarSym::X(..))).cloned().collect();
    let bound = xs.iter().filter_map(|v| v.index()).max().map_or(0, |i| i + 1);
    let mut out = ClopenSet::empty(k, c.fmac.clone(), bound);
    out.unnamed = c.fmac.len() * bound as usize - xs.len();
    let mut undecided = Vec::new();
    let mut count = 0;
    for_each_tuple(xs.len(), k, |ix| {
        if (1..ix.len()).any(|j| ix[..j].contains(&ix[j])) {
            out.collapsed += 1;
            return;
        }
        let args: Vec<VarSym> = ix.iter().map(|&j| xs[j].clone()).collect();
        let named: Vec<(String, VarSym)> = args.iter().enumerate().map(|(j, s)| (slot(j).to_string(), s.clone())).collect();
        let refs: Vec<(&str, VarSym)> = named.iter().map(|(n, s)| (n.as_str(), s.clone())).collect();
        let cj = Conjunct::of(&phi.instantiate(&refs));
        let (t, f) = (c.conjuncts.contains(&cj), c.conjuncts.contains(&cj.negated()));
        match (t, f) {
            (true, false) => {
                out.boxes.insert(args.iter().map(|v| (v.nodes()[0], v.index().unwrap_or(0))).collect());
            }
            (false, true) => {}
            _ => {
                count += 1;
                if undecided.len() < 8 {
                    undecided.push(args.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
                }
            }
        }
    });
    if count > 0 {
        return Err(AnalysisError::Undecided { count, examples: undecided });
    }
    Ok(out)
}
