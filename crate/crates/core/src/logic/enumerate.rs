//! Bounded enumeration of formulas, the template catalog built from it, and
//! a seeded random formula generator for sampled checks.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use super::normal::{is_canonical_template, slot};
use super::syntax::{Formula, Signature, Term, VarSym};

struct Gen<'a> {
    sig: &'a Signature,
    k: usize,
    terms: HashMap<(usize, usize), Arc<Vec<Term>>>,
    forms: HashMap<(usize, usize), Arc<Vec<Formula>>>,
}

/// All ways to write `total` as an ordered sum of `parts` non-negative terms.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn product<T: Clone>(lists: &[Arc<Vec<T>>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for l in lists {
        let mut next = Vec::with_capacity(out.len() * l.len());
        for prefix in &out {
            for x in l.iter() {
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

impl Gen<'_> {
    fn vars(&self, depth: usize) -> Vec<Term> {
        let mut v: Vec<Term> = (0..self.k).map(|j| Term::Var(VarSym::Bound(slot(j)))).collect();
        v.extend((1..=depth).map(|d| Term::Var(VarSym::Bound(format!("u{d}").into()))));
        v
    }

    fn terms(&mut self, size: usize, depth: usize) -> Arc<Vec<Term>> {
        if let Some(t) = self.terms.get(&(size, depth)) {
            return t.clone();
        }
        let mut out = Vec::new();
        if size == 0 {
            out = self.vars(depth);
        } else {
            let funs: Vec<(Arc<str>, usize)> = self.sig.funs().map(|(g, a)| (g.clone(), a)).collect();
            for (g, a) in funs {
                for comp in compositions(size - 1, a) {
                    let lists: Vec<_> = comp.iter().map(|&s| self.terms(s, depth)).collect();
                    for args in product(&lists) {
                        out.push(Term::App(g.clone(), args));
                    }
                }
            }
        }
        let out = Arc::new(out);
        self.terms.insert((size, depth), out.clone());
        out
    }

    fn formulas(&mut self, size: usize, depth: usize) -> Arc<Vec<Formula>> {
        if let Some(f) = self.forms.get(&(size, depth)) {
            return f.clone();
        }
        let mut out = Vec::new();
        if size >= 1 {
            for comp in compositions(size - 1, 2) {
                let lists = [self.terms(comp[0], depth), self.terms(comp[1], depth)];
                for p in product(&lists) {
                    out.push(Formula::Eq(p[0].clone(), p[1].clone()));
                }
            }
            let rels: Vec<(Arc<str>, usize)> = self.sig.rels().map(|(r, a)| (r.clone(), a)).collect();
            for (r, a) in rels {
                for comp in compositions(size - 1, a) {
                    let lists: Vec<_> = comp.iter().map(|&s| self.terms(s, depth)).collect();
                    for args in product(&lists) {
                        out.push(Formula::Rel(r.clone(), args));
                    }
                }
            }
        }
        if size >= 2 {
            for f in self.formulas(size - 1, depth).iter() {
                out.push(Formula::not(f.clone()));
            }
            for a in 1..size - 1 {
                let left = self.formulas(a, depth);
                let right = self.formulas(size - 1 - a, depth);
                for l in left.iter() {
                    for r in right.iter() {
                        out.push(Formula::and(l.clone(), r.clone()));
                        out.push(Formula::or(l.clone(), r.clone()));
                        out.push(Formula::imp(l.clone(), r.clone()));
                    }
                }
            }
            let u: Arc<str> = format!("u{}", depth + 1).into();
            for f in self.formulas(size - 1, depth + 1).iter() {
                out.push(Formula::Exists(u.clone(), Box::new(f.clone())));
                out.push(Formula::Forall(u.clone(), Box::new(f.clone())));
            }
        }
        let out = Arc::new(out);
        self.forms.insert((size, depth), out.clone());
        out
    }
}

/// Every formula with free variables among ?w1..?wk and size ≤ s, ordered
/// by (size, canonical text). Binders are named ?u1, ?u2, ... by depth.
pub fn enumerate_formulas(sig: &Signature, k: usize, s: usize) -> Vec<Formula> {
    let mut g = Gen { sig, k, terms: HashMap::new(), forms: HashMap::new() };
    let mut out = Vec::new();
    for size in 1..=s {
        let mut level: Vec<(String, Formula)> =
            g.formulas(size, 0).iter().map(|f| (f.to_string(), f.clone())).collect();
        level.sort_by(|a, b| a.0.cmp(&b.0));
        out.extend(level.into_iter().map(|(_, f)| f));
    }
    out
}

/// Catalog entry: a canonical template with cached facts about it.
#[derive(Clone, Debug)]
pub struct Template {
    pub formula: Arc<Formula>,
    pub text: Arc<str>,
    pub arity: usize,
    pub size: usize,
}

impl Template {
    /// For `(exists ?u1 θ)` templates, the body θ.
    pub fn exists_body(&self) -> Option<&Formula> {
        match &*self.formula {
            Formula::Exists(_, b) => Some(b),
            _ => None,
        }
    }
}

/// The canonical templates among the enumerated formulas, in enumeration
/// order. Every enumerated formula is (up to a leading negation and a slot
/// renaming) an instance of exactly one catalog template.
#[derive(Debug)]
pub struct Catalog {
    sig: Signature,
    k: usize,
    max_size: usize,
    entries: Vec<Template>,
    index: HashMap<Arc<Formula>, u32>,
}

impl Catalog {
    pub fn build(sig: &Signature, k: usize, max_size: usize) -> Catalog {
        let mut entries = Vec::new();
        let mut index = HashMap::new();
        for f in enumerate_formulas(sig, k, max_size) {
            if !is_canonical_template(&f) {
                continue;
            }
            let arity = f.free_placeholders().len();
            let size = f.size();
            let text: Arc<str> = f.to_string().into();
            let formula = Arc::new(f);
            index.insert(formula.clone(), entries.len() as u32);
            entries.push(Template { formula, text, arity, size });
        }
        Catalog { sig: sig.clone(), k, max_size, entries, index }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn arity_bound(&self) -> usize {
        self.k
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: u32) -> &Template {
        &self.entries[id as usize]
    }

    pub fn id_of(&self, f: &Formula) -> Option<u32> {
        self.index.get(f).copied()
    }

    pub fn entries(&self) -> &[Template] {
        &self.entries
    }

    /// Ids of templates of size ≤ s (a prefix of the catalog).
    pub fn up_to_size(&self, s: usize) -> std::ops::Range<u32> {
        0..self.entries.partition_point(|t| t.size <= s) as u32
    }
}

/// A random formula of size at most `max_size` with free variables among
/// ?w1..?wk. Not uniform; meant for sampled checks.
pub fn random_formula<R: Rng>(sig: &Signature, k: usize, max_size: usize, rng: &mut R) -> Formula {
    let size = rng.gen_range(1..=max_size.max(1));
    random_of_size(sig, k, size, 0, rng)
}

fn random_var<R: Rng>(k: usize, depth: usize, rng: &mut R) -> Term {
    let n = k + depth;
    assert!(n > 0, "no variables available");
    let i = rng.gen_range(0..n);
    if i < k {
        Term::Var(VarSym::Bound(slot(i)))
    } else {
        Term::Var(VarSym::Bound(format!("u{}", i - k + 1).into()))
    }
}

fn random_term<R: Rng>(sig: &Signature, k: usize, size: usize, depth: usize, rng: &mut R) -> Term {
    let funs: Vec<(Arc<str>, usize)> = sig.funs().map(|(g, a)| (g.clone(), a)).collect();
    if size == 0 || funs.is_empty() {
        return random_var(k, depth, rng);
    }
    // pick a function whose arity can absorb the remaining size
    let fits: Vec<&(Arc<str>, usize)> = funs.iter().filter(|(_, a)| *a > 0 || size == 1).collect();
    let (g, a) = fits[rng.gen_range(0..fits.len())];
    if *a == 0 {
        return Term::App(g.clone(), vec![]);
    }
    let mut left = size - 1;
    let mut args = Vec::new();
    for i in 0..*a {
        let take = if i + 1 == *a { left } else { rng.gen_range(0..=left) };
        left -= take;
        args.push(random_term(sig, k, take, depth, rng));
    }
    Term::App(g.clone(), args)
}

fn random_atom<R: Rng>(sig: &Signature, k: usize, size: usize, depth: usize, rng: &mut R) -> Formula {
    let rels: Vec<(Arc<str>, usize)> = sig.rels().map(|(r, a)| (r.clone(), a)).collect();
    let use_rel = !rels.is_empty() && rng.gen_bool(0.5);
    if use_rel {
        let (r, a) = &rels[rng.gen_range(0..rels.len())];
        if *a > 0 || size == 1 {
            let mut left = size - 1;
            let mut args = Vec::new();
            for i in 0..*a {
                let take = if i + 1 == *a { left } else { rng.gen_range(0..=left) };
                left -= take;
                args.push(random_term(sig, k, take, depth, rng));
            }
            return Formula::Rel(r.clone(), args);
        }
    }
    let l = rng.gen_range(0..size);
    let a = random_term(sig, k, l, depth, rng);
    let b = random_term(sig, k, size - 1 - l, depth, rng);
    Formula::Eq(a, b)
}

fn random_of_size<R: Rng>(sig: &Signature, k: usize, size: usize, depth: usize, rng: &mut R) -> Formula {
    if size <= 1 || (k + depth == 0 && size == 1) {
        if k + depth == 0 {
            // a sentence needs a binder before any atom
            let u: Arc<str> = "u1".into();
            return Formula::Exists(u, Box::new(random_atom(sig, 0, 1, 1, rng)));
        }
        return random_atom(sig, k, 1, depth, rng);
    }
    if k + depth == 0 {
        let u: Arc<str> = format!("u{}", depth + 1).into();
        let body = Box::new(random_of_size(sig, k, size - 1, depth + 1, rng));
        return if rng.gen_bool(0.5) { Formula::Exists(u, body) } else { Formula::Forall(u, body) };
    }
    let has_funs = sig.funs().next().is_some();
    match rng.gen_range(0..if has_funs { 5 } else { 4 }) {
        0 => Formula::not(random_of_size(sig, k, size - 1, depth, rng)),
        1 if size >= 3 => {
            let a = rng.gen_range(1..size - 1);
            let l = random_of_size(sig, k, a, depth, rng);
            let r = random_of_size(sig, k, size - 1 - a, depth, rng);
            match rng.gen_range(0..3) {
                0 => Formula::and(l, r),
                1 => Formula::or(l, r),
                _ => Formula::imp(l, r),
            }
        }
        2 | 3 => {
            let u: Arc<str> = format!("u{}", depth + 1).into();
            let body = Box::new(random_of_size(sig, k, size - 1, depth + 1, rng));
            if rng.gen_bool(0.5) {
                Formula::Exists(u, body)
            } else {
                Formula::Forall(u, body)
            }
        }
        4 => random_atom(sig, k, size, depth, rng),
        _ => Formula::not(random_of_size(sig, k, size - 1, depth, rng)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pure_equality_contains_inequality() {
        let list = enumerate_formulas(&Signature::pure_equality(), 2, 3);
        let texts: Vec<String> = list.iter().map(|f| f.to_string()).collect();
        assert!(texts.contains(&"(= ?w1 ?w2)".to_string()));
        assert!(texts.contains(&"(not (= ?w1 ?w2))".to_string()));
    }

    #[test]
    fn prefix_monotone() {
        let sig = Signature::new().with_rel("E", 2);
        let s2 = enumerate_formulas(&sig, 2, 2);
        let s3 = enumerate_formulas(&sig, 2, 3);
        assert_eq!(&s3[..s2.len()], &s2[..]);
    }

    #[test]
    fn sizes_non_decreasing_and_unique() {
        let sig = Signature::new().with_fun("+", 2).with_fun("0", 0);
        let list = enumerate_formulas(&sig, 2, 3);
        assert!(list.windows(2).all(|w| w[0].size() <= w[1].size()));
        let mut texts: Vec<String> = list.iter().map(|f| f.to_string()).collect();
        let n = texts.len();
        texts.sort();
        texts.dedup();
        assert_eq!(texts.len(), n);
    }

    #[test]
    fn catalog_is_ordered_prefix() {
        let sig = Signature::new().with_rel("E", 2);
        let cat = Catalog::build(&sig, 2, 3);
        assert!(cat.entries().windows(2).all(|w| w[0].size <= w[1].size));
        let r = cat.up_to_size(1);
        assert!(cat.entries()[..r.end as usize].iter().all(|t| t.size == 1));
        assert_eq!(cat.get(0).text.as_ref(), "(= ?w1 ?w1)");
    }

    #[test]
    fn random_formulas_respect_bounds() {
        let sig = Signature::new().with_rel("E", 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let f = random_formula(&sig, 2, 6, &mut rng);
            assert!(f.size() <= 6, "{f}");
            assert!(f.free_placeholders().iter().all(|n| n.starts_with('w')));
        }
    }
}
