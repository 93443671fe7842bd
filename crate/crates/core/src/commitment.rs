//! Commitments: a finite maximal antichain, a conjunction over the symbols it
//! indexes, and an oracle certificate for that conjunction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::fmac::{covers, enumerate_liftings, Fmac, Lifting, Node};
use crate::logic::{lift_symbol, parse_formula, parse_symbol, Catalog, Conjunct, Formula, Term, VarSym};
use crate::oracle::{self, ElemId, OracleAssignment, OracleError, WitnessOracle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommitmentError {
    #[error("certificate fails conjunct {0}")]
    CertificateFails(String),
    #[error("x-symbols {0} and {1} share a witness")]
    DegenerateXAssignment(VarSym, VarSym),
    #[error("symbol {0} is not indexed by the antichain")]
    SymbolOutsideFmac(VarSym),
    #[error("symbol {0} has no certificate value")]
    Unbound(VarSym),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("commitment text line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Singly indexed x_a (one per node) or doubly indexed x_{a,i}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum XMode {
    Singly,
    Doubly,
}

impl XMode {
    /// The distinguished x-symbol at a node: x_a or x_{a,0}.
    pub fn base(self, a: Node) -> VarSym {
        match self {
            XMode::Singly => VarSym::X1(a),
            XMode::Doubly => VarSym::X(a, 0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            XMode::Singly => "singly",
            XMode::Doubly => "doubly",
        }
    }

    pub fn parse(s: &str) -> Option<XMode> {
        match s {
            "singly" => Some(XMode::Singly),
            "doubly" => Some(XMode::Doubly),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Entry {
    pos: FixedBitSet,
    neg: FixedBitSet,
    /// Templates outside the catalog.
    other: BTreeSet<(Arc<Formula>, bool)>,
}

fn set_bit(b: &mut FixedBitSet, i: usize) -> bool {
    if b.len() <= i {
        b.grow(i + 1);
    }
    !b.put(i)
}

fn get_bit(b: &FixedBitSet, i: usize) -> bool {
    i < b.len() && b.contains(i)
}

impl Entry {
    fn len(&self) -> usize {
        self.pos.count_ones(..) + self.neg.count_ones(..) + self.other.len()
    }

    fn is_subset(&self, o: &Entry) -> bool {
        self.pos.ones().all(|i| get_bit(&o.pos, i))
            && self.neg.ones().all(|i| get_bit(&o.neg, i))
            && self.other.is_subset(&o.other)
    }
}

/// A finite set of conjuncts. Catalog templates are stored as bitsets per
/// argument tuple; anything else is stored explicitly.
#[derive(Clone, Debug, Default)]
pub struct ConjunctSet {
    catalog: Option<Arc<Catalog>>,
    map: BTreeMap<Vec<VarSym>, Entry>,
}

impl PartialEq for ConjunctSet {
    fn eq(&self, other: &ConjunctSet) -> bool {
        self.len() == other.len() && self.iter().all(|c| other.contains(&c))
    }
}

impl ConjunctSet {
    pub fn new(catalog: Option<Arc<Catalog>>) -> ConjunctSet {
        ConjunctSet { catalog, map: BTreeMap::new() }
    }

    pub fn catalog(&self) -> Option<&Arc<Catalog>> {
        self.catalog.as_ref()
    }

    fn id(&self, t: &Formula) -> Option<u32> {
        self.catalog.as_ref().and_then(|c| c.id_of(t))
    }

    /// Insert; returns whether the conjunct is new.
    pub fn insert(&mut self, c: Conjunct) -> bool {
        let id = self.id(&c.template);
        let e = self.map.entry(c.args).or_default();
        match (id, c.positive) {
            (Some(i), true) => set_bit(&mut e.pos, i as usize),
            (Some(i), false) => set_bit(&mut e.neg, i as usize),
            (None, p) => e.other.insert((c.template, p)),
        }
    }

    /// Insert every top-level conjunct of φ.
    pub fn insert_formula(&mut self, phi: &Formula) -> usize {
        phi.conjuncts().into_iter().filter(|f| self.insert(Conjunct::of(f))).count()
    }

    /// Insert catalog template `id` on distinct `args`.
    pub fn set_template(&mut self, id: u32, args: &[VarSym], positive: bool) -> bool {
        let e = self.map.entry(args.to_vec()).or_default();
        set_bit(if positive { &mut e.pos } else { &mut e.neg }, id as usize)
    }

    pub fn contains(&self, c: &Conjunct) -> bool {
        let Some(e) = self.map.get(&c.args) else { return false };
        match self.id(&c.template) {
            Some(i) => get_bit(if c.positive { &e.pos } else { &e.neg }, i as usize),
            None => e.other.contains(&(c.template.clone(), c.positive)),
        }
    }

    pub fn contains_formula(&self, phi: &Formula) -> bool {
        self.contains(&Conjunct::of(phi))
    }

    /// (positive present, negative present) for catalog template `id`.
    pub fn polarity(&self, id: u32, args: &[VarSym]) -> (bool, bool) {
        match self.map.get(args) {
            Some(e) => (get_bit(&e.pos, id as usize), get_bit(&e.neg, id as usize)),
            None => (false, false),
        }
    }

    pub fn len(&self) -> usize {
        self.map.values().map(Entry::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.map.values().all(|e| e.len() == 0)
    }

    /// All conjuncts, grouped by argument tuple.
    pub fn iter(&self) -> impl Iterator<Item = Conjunct> + '_ {
        self.map.iter().flat_map(move |(args, e)| {
            let cat = self.catalog.as_deref();
            let tpl = move |i: usize| cat.expect("bitset entries need a catalog").get(i as u32).formula.clone();
            let pos = e.pos.ones().map(move |i| Conjunct::from_parts(tpl(i), args.clone(), true));
            let neg = e.neg.ones().map(move |i| Conjunct::from_parts(tpl(i), args.clone(), false));
            let other = e.other.iter().map(move |(t, p)| Conjunct::from_parts(t.clone(), args.clone(), *p));
            pos.chain(neg).chain(other)
        })
    }

    /// Conjuncts whose template passes `keep`; cheaper than filtering
    /// [`ConjunctSet::iter`] because rejected bits are never materialised.
    pub fn iter_where<'a>(&'a self, keep: impl Fn(&Formula) -> bool + Copy + 'a) -> impl Iterator<Item = Conjunct> + 'a {
        let cat = self.catalog.as_deref();
        self.map.iter().flat_map(move |(args, e)| {
            let tpl = move |i: usize| cat.expect("bitset entries need a catalog").get(i as u32).formula.clone();
            let pos = e.pos.ones().map(tpl).filter(move |t| keep(t)).map(move |t| Conjunct::from_parts(t, args.clone(), true));
            let neg = e.neg.ones().map(tpl).filter(move |t| keep(t)).map(move |t| Conjunct::from_parts(t, args.clone(), false));
            let other = e.other.iter().filter(move |(t, _)| keep(t)).map(move |(t, p)| Conjunct::from_parts(t.clone(), args.clone(), *p));
            pos.chain(neg).chain(other)
        })
    }

    /// Argument tuples that carry at least one conjunct.
    pub fn tuples(&self) -> impl Iterator<Item = &Vec<VarSym>> {
        self.map.iter().filter(|(_, e)| e.len() > 0).map(|(a, _)| a)
    }

    /// Conjuncts present with both polarities (reported positively).
    pub fn conflicts(&self) -> Vec<Conjunct> {
        self.iter().filter(|c| c.positive && self.contains(&c.negated())).collect()
    }

    pub fn symbols(&self) -> BTreeSet<VarSym> {
        let mut out = BTreeSet::new();
        for (args, e) in &self.map {
            if e.len() > 0 {
                out.extend(args.iter().filter(|v| v.is_instantiated()).cloned());
            }
            for (t, _) in &e.other {
                out.extend(t.symbols());
            }
        }
        out
    }

    /// Rename argument symbols by an injective map; `None` if some symbol
    /// is unmapped.
    pub fn map_args(&self, f: impl Fn(&VarSym) -> Option<VarSym>) -> Option<ConjunctSet> {
        let mut map = BTreeMap::new();
        for (args, e) in &self.map {
            let a = args.iter().map(&f).collect::<Option<Vec<_>>>()?;
            map.insert(a, e.clone());
        }
        Some(ConjunctSet { catalog: self.catalog.clone(), map })
    }

    /// Add everything in `other` (same catalog assumed).
    pub fn union_with(&mut self, other: &ConjunctSet) {
        for (args, e) in &other.map {
            let mine = self.map.entry(args.clone()).or_default();
            for i in e.pos.ones() {
                set_bit(&mut mine.pos, i);
            }
            for i in e.neg.ones() {
                set_bit(&mut mine.neg, i);
            }
            mine.other.extend(e.other.iter().cloned());
        }
    }

    /// First conjunct whose image under `f` is missing from `other`.
    pub fn first_missing(&self, other: &ConjunctSet, f: impl Fn(&VarSym) -> Option<VarSym>) -> Option<Conjunct> {
        for (args, e) in &self.map {
            if e.len() == 0 {
                continue;
            }
            let img = args.iter().map(&f).collect::<Option<Vec<_>>>();
            let found = img.as_ref().and_then(|a| other.map.get(a));
            if found.map_or(false, |o| e.is_subset(o)) {
                continue;
            }
            let single = ConjunctSet { catalog: self.catalog.clone(), map: [(args.clone(), e.clone())].into() };
            for c in single.iter() {
                let missing = match &img {
                    None => true,
                    Some(a) => !other.contains(&Conjunct::from_parts(c.template.clone(), a.clone(), c.positive)),
                };
                if missing {
                    return Some(c);
                }
            }
        }
        None
    }
}

/// A-commitment with its certificate.
#[derive(Clone, Debug)]
pub struct Commitment {
    pub fmac: Fmac,
    pub conjuncts: ConjunctSet,
    pub cert: OracleAssignment,
    pub x_mode: XMode,
}

/// Least t ⊆ A with every symbol of the tuple indexed by t.
pub fn support(z: &[VarSym], a: &Fmac) -> Result<BTreeSet<Node>, CommitmentError> {
    let mut out = BTreeSet::new();
    for v in z {
        for n in v.nodes() {
            if !a.contains(n) {
                return Err(CommitmentError::SymbolOutsideFmac(v.clone()));
            }
            out.insert(*n);
        }
    }
    Ok(out)
}

/// The full window W_ℓ for doubly indexed x:
/// {x_{a,i} : a ∈ 2^ℓ, i < ℓ} ∪ {y_{t,i} : ∅ ≠ t ⊆ 2^ℓ, i < ℓ}.
pub fn w_window(l: usize) -> Vec<VarSym> {
    let level = Node::level(l);
    let mut out = Vec::new();
    for a in &level {
        for i in 0..l as u32 {
            out.push(VarSym::X(*a, i));
        }
    }
    assert!(level.len() < 32, "window too large to enumerate");
    for s in 1u64..(1u64 << level.len()) {
        let t: Vec<Node> = (0..level.len()).filter(|j| s >> j & 1 == 1).map(|j| level[j]).collect();
        for i in 0..l as u32 {
            out.push(VarSym::y(t.iter().copied(), i));
        }
    }
    out
}

fn distinct_pairs(a: &Fmac) -> impl Iterator<Item = (Node, Node)> + '_ {
    let n = a.nodes();
    (0..n.len()).flat_map(move |i| (i + 1..n.len()).map(move |j| (n[i], n[j])))
}

/// The inequality x_a ≠ x_{a'} as a formula.
pub fn inequality(u: &VarSym, v: &VarSym) -> Formula {
    Formula::not(Formula::eq(Term::Var(u.clone()), Term::Var(v.clone())))
}

impl Commitment {
    /// Build and validate; missing inequalities between base x-symbols
    /// are added.
    pub fn make(
        fmac: Fmac,
        conjuncts: &[Formula],
        oracle: &dyn WitnessOracle,
        cert: OracleAssignment,
        x_mode: XMode,
        catalog: Option<Arc<Catalog>>,
    ) -> Result<Commitment, CommitmentError> {
        let mut set = ConjunctSet::new(catalog);
        for f in conjuncts {
            set.insert_formula(f);
        }
        for (a, b) in distinct_pairs(&fmac) {
            set.insert(Conjunct::of(&inequality(&x_mode.base(a), &x_mode.base(b))));
        }
        let c = Commitment { fmac, conjuncts: set, cert, x_mode };
        c.validate(oracle)?;
        Ok(c)
    }

    /// The root commitment ({ε}, ⊤) with x_ε bound to `e`.
    pub fn root(x_mode: XMode, e: ElemId, catalog: Option<Arc<Catalog>>) -> Commitment {
        let mut cert = OracleAssignment::new();
        cert.insert(x_mode.base(Node::ROOT), e);
        Commitment { fmac: Fmac::root(), conjuncts: ConjunctSet::new(catalog), cert, x_mode }
    }

    /// Structural checks only (no oracle calls).
    pub fn validate_shape(&self) -> Result<(), CommitmentError> {
        for v in self.conjuncts.symbols().iter().chain(self.cert.keys()) {
            support(std::slice::from_ref(v), &self.fmac)?;
        }
        for v in self.conjuncts.symbols() {
            if !self.cert.contains_key(&v) {
                return Err(CommitmentError::Unbound(v));
            }
        }
        for (a, b) in distinct_pairs(&self.fmac) {
            let (u, v) = (self.x_mode.base(a), self.x_mode.base(b));
            let eu = *self.cert.get(&u).ok_or_else(|| CommitmentError::Unbound(u.clone()))?;
            let ev = *self.cert.get(&v).ok_or_else(|| CommitmentError::Unbound(v.clone()))?;
            if eu == ev {
                return Err(CommitmentError::DegenerateXAssignment(u, v));
            }
            if !self.conjuncts.contains_formula(&inequality(&u, &v)) {
                return Err(CommitmentError::CertificateFails(format!("missing {}", inequality(&u, &v))));
            }
        }
        if self.fmac.len() == 1 {
            let u = self.x_mode.base(self.fmac.nodes()[0]);
            if !self.cert.contains_key(&u) {
                return Err(CommitmentError::Unbound(u));
            }
        }
        Ok(())
    }

    /// Shape checks plus oracle evaluation of every conjunct.
    pub fn validate(&self, oracle: &dyn WitnessOracle) -> Result<(), CommitmentError> {
        self.validate_shape()?;
        for c in self.conjuncts.iter() {
            if !oracle.eval(&c.to_formula(), &self.cert)? {
                return Err(CommitmentError::CertificateFails(c.to_string()));
            }
        }
        Ok(())
    }

    pub fn formula(&self) -> Option<Formula> {
        Formula::conj(self.conjuncts.iter().map(|c| c.to_formula()).collect())
    }

    /// Certificate entries in symbol order.
    pub fn sorted_cert(&self) -> Vec<(&VarSym, &ElemId)> {
        let mut v: Vec<_> = self.cert.iter().collect();
        v.sort();
        v
    }

    /// Serialize with the oracle's element journal so the certificate can
    /// be re-validated elsewhere.
    pub fn to_text(&self, oracle: &dyn WitnessOracle) -> String {
        use fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "oracle {} {}", oracle.name(), oracle.seed());
        let _ = writeln!(s, "xmode {}", self.x_mode.as_str());
        let _ = writeln!(s, "fmac {}", self.fmac);
        for i in 0..oracle.len() as u32 {
            let e = ElemId(i);
            let _ = writeln!(s, "elem {e} {}", oracle.element_record(e));
        }
        let mut lines: Vec<String> = self.conjuncts.iter().map(|c| c.to_string()).collect();
        lines.sort();
        for l in lines {
            let _ = writeln!(s, "conj {l}");
        }
        for (v, e) in self.sorted_cert() {
            let _ = writeln!(s, "bind {v} {e}");
        }
        s
    }

    /// Parse, rebuild the oracle from its journal, and re-validate.
    pub fn from_text(text: &str, catalog: Option<Arc<Catalog>>) -> Result<(Commitment, Box<dyn WitnessOracle>), CommitmentError> {
        let mut oracle: Option<Box<dyn WitnessOracle>> = None;
        let mut x_mode = XMode::Doubly;
        let mut fmac = Fmac::root();
        let mut conj_lines = Vec::new();
        let mut cert = OracleAssignment::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let perr = |msg: String| CommitmentError::Parse { line, msg };
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let (head, rest) = l.split_once(' ').unwrap_or((l, ""));
            match head {
                "oracle" => {
                    let (name, seed) = rest.split_once(' ').ok_or_else(|| perr("expected name and seed".into()))?;
                    let seed = seed.trim().parse().map_err(|_| perr(format!("bad seed {seed}")))?;
                    oracle = Some(oracle::by_name(name, seed)?);
                }
                "xmode" => x_mode = XMode::parse(rest.trim()).ok_or_else(|| perr(format!("bad x-mode {rest}")))?,
                "fmac" => fmac = rest.parse().map_err(|e| perr(format!("{e}")))?,
                "elem" => {
                    let o = oracle.as_mut().ok_or_else(|| perr("elem before oracle".into()))?;
                    let (id, rec) = rest.split_once(' ').unwrap_or((rest, ""));
                    o.apply_record(id.parse()?, rec)?;
                }
                "conj" => conj_lines.push((line, rest.to_string())),
                "bind" => {
                    let (v, e) = rest.split_once(' ').ok_or_else(|| perr("expected symbol and element".into()))?;
                    let v = parse_symbol(v).map_err(|e| perr(e.to_string()))?;
                    cert.insert(v, e.trim().parse()?);
                }
                other => return Err(perr(format!("unknown record {other:?}"))),
            }
        }
        let oracle = oracle.ok_or(CommitmentError::Parse { line: 0, msg: "missing oracle line".into() })?;
        let mut set = ConjunctSet::new(catalog);
        for (line, text) in conj_lines {
            let f = parse_formula(&text, oracle.signature()).map_err(|e| CommitmentError::Parse { line, msg: e.to_string() })?;
            set.insert(Conjunct::of(&f));
        }
        let c = Commitment { fmac, conjuncts: set, cert, x_mode };
        c.validate(oracle.as_ref())?;
        Ok((c, oracle))
    }
}

/// Rename a commitment along the split of `a`: conjuncts become
/// h₀(φ) ∪ h₁(φ), the certificate follows h₀. The caller binds the
/// h₁-copy of the a-block (see [`a_block`]).
pub fn split_commitment(c: &mut Commitment, a: Node) -> Result<(Lifting, Lifting), crate::fmac::FmacError> {
    let (g, h0, h1) = crate::fmac::split_at(&c.fmac, &a)?;
    let mut set = c.conjuncts.map_args(|v| lift_symbol(v, &h0).ok()).expect("symbols indexed by the antichain");
    let copy = c.conjuncts.map_args(|v| lift_symbol(v, &h1).ok()).expect("symbols indexed by the antichain");
    set.union_with(&copy);
    c.conjuncts = set;
    c.cert = c.cert.iter().map(|(v, e)| (lift_symbol(v, &h0).expect("symbols indexed by the antichain"), *e)).collect();
    c.fmac = g;
    Ok((h0, h1))
}

/// Certificate symbols indexed by node `a`, sorted.
pub fn a_block(c: &Commitment, a: &Node) -> Vec<VarSym> {
    let mut v: Vec<VarSym> = c.cert.keys().filter(|s| s.nodes().contains(a)).cloned().collect();
    v.sort();
    v
}

/// Why c₂ fails to extend c₁.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotExtending {
    NotACover,
    Missing { lifting: Lifting, conjunct: Conjunct },
}

impl fmt::Display for NotExtending {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotExtending::NotACover => f.write_str("antichain is not covered"),
            NotExtending::Missing { lifting, conjunct } => write!(f, "lifting {lifting} misses {conjunct}"),
        }
    }
}

/// c₁ ≤ c₂: c₂'s antichain covers c₁'s and every lifting carries every
/// conjunct of c₁ into c₂.
pub fn extends_report(c1: &Commitment, c2: &Commitment) -> Result<(), NotExtending> {
    if !covers(&c1.fmac, &c2.fmac) {
        return Err(NotExtending::NotACover);
    }
    let liftings = enumerate_liftings(&c1.fmac, &c2.fmac).map_err(|_| NotExtending::NotACover)?;
    for h in liftings {
        if let Some(c) = c1.conjuncts.first_missing(&c2.conjuncts, |v| lift_symbol(v, &h).ok()) {
            return Err(NotExtending::Missing { lifting: h, conjunct: c });
        }
    }
    Ok(())
}

pub fn extends(c1: &Commitment, c2: &Commitment) -> bool {
    extends_report(c1, c2).is_ok()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmac::split_at;
    use crate::oracle::{AgeSpec, FraisseOracle};

    fn x(a: &str) -> VarSym {
        VarSym::X(a.parse().unwrap(), 0)
    }

    #[test]
    fn root_commitment() {
        let mut o = FraisseOracle::new("pure-set", AgeSpec::pure_set(), 0);
        let e = o.witness(&parse_formula("(= ?w ?w)", o.signature()).unwrap(), "w", &Default::default(), &Default::default());
        let Ok(oracle::Witness::Found(e)) = e else { panic!() };
        let mut cert = OracleAssignment::new();
        cert.insert(x("ε"), e);
        let c = Commitment::make(Fmac::root(), &[], &o, cert, XMode::Doubly, None).unwrap();
        assert!(c.conjuncts.is_empty());
        assert!(extends(&c, &c));
    }

    #[test]
    fn degenerate_assignment_rejected() {
        let o = FraisseOracle::new("pure-set", AgeSpec::pure_set(), 0);
        let mut cert = OracleAssignment::new();
        cert.insert(x("0"), ElemId(0));
        cert.insert(x("1"), ElemId(0));
        let r = Commitment::make(Fmac::standard(1), &[], &o, cert, XMode::Doubly, None);
        assert!(matches!(r, Err(CommitmentError::DegenerateXAssignment(..))));
    }

    #[test]
    fn graph_edge_commitment() {
        let mut o = FraisseOracle::new("random-graph", AgeSpec::graph(), 3);
        let any = parse_formula("(= ?w ?w)", o.signature()).unwrap();
        let Ok(oracle::Witness::Found(a)) = o.witness(&any, "w", &Default::default(), &Default::default()) else { panic!() };
        let mut asg = OracleAssignment::new();
        asg.insert(VarSym::var("a"), a);
        let edge = parse_formula("(E ?w ?a)", o.signature()).unwrap();
        let Ok(oracle::Witness::Found(b)) = o.witness(&edge, "w", &asg, &Default::default()) else { panic!() };
        let mut cert = OracleAssignment::new();
        cert.insert(x("0"), a);
        cert.insert(x("1"), b);
        let phi = parse_formula("(E x:0:0 x:1:0)", o.signature()).unwrap();
        let c = Commitment::make(Fmac::standard(1), &[phi.clone()], &o, cert.clone(), XMode::Doubly, None).unwrap();
        assert_eq!(c.conjuncts.len(), 2);
        let text = c.to_text(&o);
        let (back, o2) = Commitment::from_text(&text, None).unwrap();
        assert_eq!(back.conjuncts, c.conjuncts);
        assert_eq!(back.to_text(o2.as_ref()), text);

        let non = parse_formula("(not (E x:0:0 x:1:0))", o.signature()).unwrap();
        let r = Commitment::make(Fmac::standard(1), &[non], &o, cert, XMode::Doubly, None);
        assert!(matches!(r, Err(CommitmentError::CertificateFails(_))));
    }

    #[test]
    fn support_examples() {
        let a: Node = "0".parse().unwrap();
        let b: Node = "10".parse().unwrap();
        let c: Node = "11".parse().unwrap();
        let f = Fmac::validate([a, b, c]).unwrap();
        let s = support(&[VarSym::X(a, 1), VarSym::y([a, b], 0)], &f).unwrap();
        assert_eq!(s, [a, b].into_iter().collect());
        assert_eq!(support(&[VarSym::X(a, 0)], &f).unwrap(), [a].into_iter().collect());
        let s = support(&[VarSym::y([a], 0), VarSym::y([b, c], 2)], &f).unwrap();
        assert_eq!(s.len(), 3);
        assert!(matches!(support(&[VarSym::X("1".parse().unwrap(), 0)], &f), Err(CommitmentError::SymbolOutsideFmac(_))));
    }

    #[test]
    fn windows() {
        assert!(w_window(0).is_empty());
        assert_eq!(w_window(1).len(), 5);
        assert_eq!(w_window(2).len(), 2 * 4 + 2 * 15);
        let w1: BTreeSet<VarSym> = w_window(1).into_iter().collect();
        let w2: BTreeSet<VarSym> = w_window(2).into_iter().collect();
        for h in enumerate_liftings(&Fmac::standard(1), &Fmac::standard(2)).unwrap() {
            assert!(w1.iter().all(|v| w2.contains(&lift_symbol(v, &h).unwrap())));
        }
    }

    #[test]
    fn split_extends_and_missing_reported() {
        let sig = crate::logic::Signature::new().with_rel("P0", 1);
        let p = parse_formula("(P0 x:ε:0)", &sig).unwrap();
        let mut c1 = Commitment::root(XMode::Doubly, ElemId(0), None);
        c1.conjuncts.insert_formula(&p);
        let (g, h0, h1) = split_at(&c1.fmac, &Node::ROOT).unwrap();
        let mut set = c1.conjuncts.map_args(|v| lift_symbol(v, &h0).ok()).unwrap();
        let set1 = c1.conjuncts.map_args(|v| lift_symbol(v, &h1).ok()).unwrap();
        let mut c2 = Commitment { fmac: g, conjuncts: set.clone(), cert: OracleAssignment::new(), x_mode: XMode::Doubly };
        match extends_report(&c1, &c2) {
            Err(NotExtending::Missing { lifting, conjunct }) => {
                assert_eq!(lifting, h1);
                assert_eq!(conjunct.to_string(), "(P0 x:ε:0)");
            }
            other => panic!("{other:?}"),
        }
        set.union_with(&set1);
        set.insert_formula(&inequality(&x("0"), &x("1")));
        c2.conjuncts = set;
        assert!(extends(&c1, &c2));
        assert!(!extends(&c2, &c1));
    }
}
