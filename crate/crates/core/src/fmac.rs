//! Finite maximal antichains of the binary tree.
//!
//! A [`Node`] is a finite bit string, ordered by the prefix relation `⊴`.
//! An [`Fmac`] is a set of pairwise incomparable nodes whose cones cover
//! Cantor space, which for finite sets is the same as Kraft sum exactly 1.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

/// Deepest node the packed representation can hold.
pub const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FmacError {
    #[error("not an antichain: {0} is a prefix of {1}")]
    NotAntichain(Node, Node),
    #[error("not maximal: Kraft sum is {0}")]
    NotMaximal(BigRational),
    #[error("target does not cover source")]
    NotACover,
    #[error("node {0} is not in the fmac")]
    NodeNotInFmac(Node),
    #[error("point prefix too short: depth {0} required")]
    PrefixTooShort(usize),
    #[error("node deeper than {MAX_DEPTH} bits")]
    TooDeep,
    #[error("cannot parse {0:?}")]
    Parse(String),
}

/// A finite binary string. `bits` holds the string MSB-first in its low `len` bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Node {
    bits: u64,
    len: u8,
}

impl Node {
    pub const ROOT: Node = Node { bits: 0, len: 0 };

    pub fn from_bits(bits: &[bool]) -> Result<Node, FmacError> {
        if bits.len() > MAX_DEPTH {
            return Err(FmacError::TooDeep);
        }
        let mut n = Node::ROOT;
        for &b in bits {
            n = n.child(b as u8);
        }
        Ok(n)
    }

    /// Node of length `len` whose bits are the low `len` bits of `value`, MSB first.
    pub fn from_value(value: u64, len: usize) -> Node {
        assert!(len <= MAX_DEPTH);
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        Node { bits: value & mask, len: len as u8 }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self) -> u64 {
        self.bits
    }

    pub fn bit(&self, i: usize) -> u8 {
        assert!(i < self.len());
        ((self.bits >> (self.len() - 1 - i)) & 1) as u8
    }

    pub fn child(&self, b: u8) -> Node {
        assert!(self.len() < MAX_DEPTH, "node depth overflow");
        Node { bits: (self.bits << 1) | (b as u64 & 1), len: self.len + 1 }
    }

    /// The prefix of length `n` (n ≤ len).
    pub fn restrict(&self, n: usize) -> Node {
        assert!(n <= self.len());
        let shift = self.len() - n;
        Node { bits: self.bits.checked_shr(shift as u32).unwrap_or(0), len: n as u8 }
    }

    pub fn is_prefix_of(&self, other: &Node) -> bool {
        self.len <= other.len && other.restrict(self.len()) == *self
    }

    pub fn comparable(&self, other: &Node) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn concat(&self, tail: &Node) -> Node {
        assert!(self.len() + tail.len() <= MAX_DEPTH, "node depth overflow");
        let bits = if tail.len == 64 { tail.bits } else { (self.bits << tail.len) | tail.bits };
        Node { bits, len: self.len + tail.len }
    }

    /// All nodes of length exactly `n`, in lexicographic order.
    pub fn level(n: usize) -> Vec<Node> {
        assert!(n < 32, "level too large to list");
        (0..(1u64 << n)).map(|v| Node::from_value(v, n)).collect()
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        let m = self.len.min(other.len) as usize;
        self.restrict(m)
            .bits
            .cmp(&other.restrict(m).bits)
            .then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("ε");
        }
        for i in 0..self.len() {
            f.write_str(if self.bit(i) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Node {
    type Err = FmacError;

    fn from_str(s: &str) -> Result<Node, FmacError> {
        let s = s.trim();
        if s == "ε" || s == "e" || s.is_empty() {
            return Ok(Node::ROOT);
        }
        if s.len() > MAX_DEPTH {
            return Err(FmacError::TooDeep);
        }
        let mut n = Node::ROOT;
        for c in s.chars() {
            match c {
                '0' => n = n.child(0),
                '1' => n = n.child(1),
                _ => return Err(FmacError::Parse(s.to_string())),
            }
        }
        Ok(n)
    }
}

/// A finite prefix of a point of Cantor space, standing for the cone above it.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PointPrefix(pub Node);

impl PointPrefix {
    pub fn depth(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for PointPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for PointPrefix {
    type Err = FmacError;
    fn from_str(s: &str) -> Result<Self, FmacError> {
        Ok(PointPrefix(s.parse()?))
    }
}

/// Finite maximal antichain; nodes kept sorted lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fmac {
    nodes: Vec<Node>,
}

/// Kraft sum of a node set as an exact rational.
pub fn kraft_sum(nodes: &[Node]) -> BigRational {
    let mut num = BigInt::from(0);
    for n in nodes {
        num += BigInt::from(1) << (MAX_DEPTH - n.len());
    }
    BigRational::new(num, BigInt::from(1) << MAX_DEPTH)
}

impl Fmac {
    pub fn validate<I: IntoIterator<Item = Node>>(nodes: I) -> Result<Fmac, FmacError> {
        let mut nodes: Vec<Node> = nodes.into_iter().collect();
        nodes.sort();
        nodes.dedup();
        // in lexicographic order every extension of a sits right after a
        for w in nodes.windows(2) {
            if w[0].is_prefix_of(&w[1]) {
                return Err(FmacError::NotAntichain(w[0], w[1]));
            }
        }
        let mut total: u128 = 0;
        for n in &nodes {
            total += 1u128 << (MAX_DEPTH - n.len());
        }
        if total != 1u128 << MAX_DEPTH {
            return Err(FmacError::NotMaximal(kraft_sum(&nodes)));
        }
        Ok(Fmac { nodes })
    }

    pub fn root() -> Fmac {
        Fmac { nodes: vec![Node::ROOT] }
    }

    /// The standard fmac 2^n.
    pub fn standard(n: usize) -> Fmac {
        Fmac { nodes: Node::level(n) }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, a: &Node) -> bool {
        self.nodes.binary_search(a).is_ok()
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.len()).max().unwrap_or(0)
    }

    /// Is this the standard fmac 2^n for some n?
    pub fn standard_level(&self) -> Option<usize> {
        let d = self.nodes[0].len();
        (self.nodes.iter().all(|n| n.len() == d) && self.nodes.len() == 1usize << d).then_some(d)
    }

    /// Nodes of `self` lying above `a`, a contiguous run in sorted order.
    fn extensions_of(&self, a: &Node) -> &[Node] {
        let start = self.nodes.partition_point(|n| n < a);
        let end = start + self.nodes[start..].iter().take_while(|n| a.is_prefix_of(n)).count();
        &self.nodes[start..end]
    }

    /// Does `b` cover `self`?
    pub fn covered_by(&self, b: &Fmac) -> bool {
        covers(self, b)
    }

    pub fn project(&self, p: &PointPrefix) -> Result<Node, FmacError> {
        project(self, p)
    }
}

impl fmt::Display for Fmac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Fmac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromStr for Fmac {
    type Err = FmacError;
    fn from_str(s: &str) -> Result<Fmac, FmacError> {
        let s = s.trim().trim_start_matches('{').trim_end_matches('}');
        let nodes = s.split(',').map(|t| t.parse()).collect::<Result<Vec<Node>, _>>()?;
        Fmac::validate(nodes)
    }
}

/// True iff every a in `a` has an extension in `b`.
pub fn covers(a: &Fmac, b: &Fmac) -> bool {
    a.nodes.iter().all(|n| !b.extensions_of(n).is_empty())
}

/// A lifting from one fmac to a covering one: a ⊴ h(a), injective.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Lifting {
    source: Fmac,
    target: Fmac,
    map: Vec<Node>, // map[i] is the image of source.nodes[i]
}

impl Lifting {
    pub fn identity(a: &Fmac) -> Lifting {
        Lifting { source: a.clone(), target: a.clone(), map: a.nodes.clone() }
    }

    /// Build from explicit pairs; checks the lifting conditions.
    pub fn new(source: &Fmac, target: &Fmac, pairs: &[(Node, Node)]) -> Result<Lifting, FmacError> {
        let mut map = Vec::with_capacity(source.len());
        for a in &source.nodes {
            let b = pairs
                .iter()
                .find(|(s, _)| s == a)
                .map(|(_, t)| *t)
                .ok_or(FmacError::NodeNotInFmac(*a))?;
            if !a.is_prefix_of(&b) || !target.contains(&b) {
                return Err(FmacError::NotACover);
            }
            map.push(b);
        }
        Ok(Lifting { source: source.clone(), target: target.clone(), map })
    }

    pub fn source(&self) -> &Fmac {
        &self.source
    }

    pub fn target(&self) -> &Fmac {
        &self.target
    }

    pub fn apply(&self, a: &Node) -> Option<Node> {
        self.source.nodes.binary_search(a).ok().map(|i| self.map[i])
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Node, Node)> + '_ {
        self.source.nodes.iter().copied().zip(self.map.iter().copied())
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Lifting) -> Option<Lifting> {
        let map = self.map.iter().map(|b| next.apply(b)).collect::<Option<Vec<_>>>()?;
        Some(Lifting { source: self.source.clone(), target: next.target.clone(), map })
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.map == self.source.nodes
    }
}

impl fmt::Display for Lifting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, b)) in self.pairs().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}->{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Lifting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

/// Parse an `a->b,...` list against given source and target.
pub fn parse_lifting(s: &str, source: &Fmac, target: &Fmac) -> Result<Lifting, FmacError> {
    let mut pairs = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (a, b) = item.split_once("->").ok_or_else(|| FmacError::Parse(item.to_string()))?;
        pairs.push((a.parse()?, b.parse()?));
    }
    Lifting::new(source, target, &pairs)
}

/// Π_{a∈A} |{b∈B : a ⊴ b}|, saturating.
pub fn lifting_count(a: &Fmac, b: &Fmac) -> Result<u128, FmacError> {
    let mut n: u128 = 1;
    for x in &a.nodes {
        let k = b.extensions_of(x).len();
        if k == 0 {
            return Err(FmacError::NotACover);
        }
        n = n.saturating_mul(k as u128);
    }
    Ok(n)
}

pub fn enumerate_liftings(a: &Fmac, b: &Fmac) -> Result<Vec<Lifting>, FmacError> {
    let choices: Vec<&[Node]> = a.nodes.iter().map(|n| b.extensions_of(n)).collect();
    if choices.iter().any(|c| c.is_empty()) {
        return Err(FmacError::NotACover);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; choices.len()];
    loop {
        let map = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        out.push(Lifting { source: a.clone(), target: b.clone(), map });
        // odometer, last coordinate fastest
        let mut k = choices.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Split `a` into its two children; returns the new fmac and h₀, h₁.
pub fn split_at(f: &Fmac, a: &Node) -> Result<(Fmac, Lifting, Lifting), FmacError> {
    let pos = f.nodes.binary_search(a).map_err(|_| FmacError::NodeNotInFmac(*a))?;
    if a.len() >= MAX_DEPTH {
        return Err(FmacError::TooDeep);
    }
    let mut nodes = f.nodes.clone();
    nodes.splice(pos..=pos, [a.child(0), a.child(1)]);
    let g = Fmac { nodes };
    let mk = |i: u8| {
        let map = f.nodes.iter().map(|n| if n == a { a.child(i) } else { *n }).collect();
        Lifting { source: f.clone(), target: g.clone(), map }
    };
    Ok((g.clone(), mk(0), mk(1)))
}

pub fn project(f: &Fmac, p: &PointPrefix) -> Result<Node, FmacError> {
    let need = f.max_depth();
    if p.depth() < need {
        return Err(FmacError::PrefixTooShort(need));
    }
    f.nodes
        .iter()
        .find(|a| a.is_prefix_of(&p.0))
        .copied()
        .ok_or(FmacError::PrefixTooShort(need))
}

/// Chain of splittings from `a` to `b`, splitting the lexicographically least
/// node not yet in `b` at each step.
pub fn factor_cover(a: &Fmac, b: &Fmac) -> Result<Vec<(Fmac, Node)>, FmacError> {
    if !covers(a, b) {
        return Err(FmacError::NotACover);
    }
    let mut cur = a.clone();
    let mut chain = Vec::with_capacity(b.len() - a.len());
    while let Some(n) = cur.nodes.iter().find(|n| !b.contains(n)).copied() {
        let (next, _, _) = split_at(&cur, &n)?;
        chain.push((next.clone(), n));
        cur = next;
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fm(s: &str) -> Fmac {
        s.parse().unwrap()
    }

    fn nd(s: &str) -> Node {
        s.parse().unwrap()
    }

    #[test]
    fn validate_examples() {
        assert_eq!(Fmac::validate([Node::ROOT]).unwrap(), Fmac::root());
        assert!(Fmac::validate([nd("0"), nd("10"), nd("11")]).is_ok());
        assert_eq!(
            Fmac::validate([nd("0"), nd("01")]),
            Err(FmacError::NotAntichain(nd("0"), nd("01")))
        );
        match Fmac::validate([nd("0"), nd("10")]) {
            Err(FmacError::NotMaximal(q)) => {
                assert_eq!(q, BigRational::new(3.into(), 4.into()))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn node_order_and_display() {
        let mut v = vec![nd("1"), nd("01"), nd("0"), nd("00"), Node::ROOT];
        v.sort();
        let s: Vec<String> = v.iter().map(|n| n.to_string()).collect();
        assert_eq!(s, ["ε", "0", "00", "01", "1"]);
        assert_eq!(nd("0110").restrict(2), nd("01"));
    }

    #[test]
    fn cover_examples() {
        assert!(covers(&Fmac::standard(1), &Fmac::standard(2)));
        assert!(!covers(&Fmac::standard(2), &Fmac::standard(1)));
        assert!(covers(&fm("0,10,11"), &fm("00,01,10,11")));
    }

    #[test]
    fn lifting_examples() {
        assert_eq!(enumerate_liftings(&Fmac::standard(1), &Fmac::standard(2)).unwrap().len(), 4);
        let a = fm("0,10,11");
        let ids = enumerate_liftings(&a, &a).unwrap();
        assert_eq!(ids.len(), 1);
        assert!(ids[0].is_identity());
        assert_eq!(enumerate_liftings(&Fmac::root(), &Fmac::standard(2)).unwrap().len(), 4);
        assert_eq!(
            enumerate_liftings(&Fmac::standard(2), &Fmac::standard(1)),
            Err(FmacError::NotACover)
        );
    }

    #[test]
    fn split_examples() {
        let (g, h0, h1) = split_at(&Fmac::root(), &Node::ROOT).unwrap();
        assert_eq!(g, Fmac::standard(1));
        assert_eq!(h0.apply(&Node::ROOT), Some(nd("0")));
        assert_eq!(h1.apply(&Node::ROOT), Some(nd("1")));
        assert_eq!(split_at(&Fmac::standard(1), &nd("0")).unwrap().0, fm("00,01,1"));
        assert_eq!(split_at(&fm("0,10,11"), &nd("10")).unwrap().0, fm("0,100,101,11"));
        assert!(matches!(split_at(&Fmac::standard(1), &nd("00")), Err(FmacError::NodeNotInFmac(_))));
    }

    #[test]
    fn project_examples() {
        let a = fm("0,10,11");
        assert_eq!(project(&a, &"1010".parse().unwrap()).unwrap(), nd("10"));
        assert_eq!(project(&Fmac::standard(2), &"0100".parse().unwrap()).unwrap(), nd("01"));
        assert_eq!(project(&a, &"1".parse().unwrap()), Err(FmacError::PrefixTooShort(2)));
    }

    #[test]
    fn factor_examples() {
        assert_eq!(factor_cover(&Fmac::standard(1), &Fmac::standard(2)).unwrap().len(), 2);
        assert!(factor_cover(&Fmac::standard(2), &Fmac::standard(2)).unwrap().is_empty());
        let chain = factor_cover(&Fmac::root(), &Fmac::standard(2)).unwrap();
        assert_eq!(chain.len(), 3);
        assert_eq!(chain.last().unwrap().0, Fmac::standard(2));
        let order: Vec<String> = chain.iter().map(|(_, n)| n.to_string()).collect();
        assert_eq!(order, ["ε", "0", "1"]);
    }

    #[test]
    fn serialization_round_trip() {
        let a = fm("0,10,11");
        assert_eq!(a.to_string(), "0,10,11");
        assert_eq!(Fmac::root().to_string(), "ε");
        let b = fm("00,01,10,11");
        let h = parse_lifting("0->01,10->10,11->11", &a, &b).unwrap();
        assert_eq!(h.to_string(), "0->01,10->10,11->11");
        assert!(parse_lifting("0->11,10->10,11->11", &a, &b).is_err());
    }

    #[test]
    fn deep_nodes() {
        let deep = Node::from_value(u64::MAX, 64);
        assert_eq!(deep.len(), 64);
        assert!(Node::ROOT.is_prefix_of(&deep));
        assert!(deep.restrict(63).is_prefix_of(&deep));
        assert_eq!(nd("ε").concat(&deep), deep);
    }
}
