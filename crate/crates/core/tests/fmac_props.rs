use std::collections::BTreeSet;

use proptest::prelude::*;

use henkin_core::fmac::*;

fn bits(a: &Node) -> String {
    (0..a.len()).map(|i| if a.bit(i) == 1 { '1' } else { '0' }).collect()
}

fn arb_node() -> impl Strategy<Value = Node> {
    (0usize..=8).prop_flat_map(|len| (0..1u64 << len).prop_map(move |v| Node::from_value(v, len)))
}

/// A valid fmac grown by splitting at the chosen positions.
fn arb_fmac() -> impl Strategy<Value = Fmac> {
    proptest::collection::vec(any::<prop::sample::Index>(), 0..24).prop_map(|picks| {
        let mut f = Fmac::root();
        for p in picks {
            let open: Vec<Node> = f.nodes().iter().filter(|a| a.len() < 8).copied().collect();
            if open.is_empty() {
                break;
            }
            f = split_at(&f, &open[p.index(open.len())]).unwrap().0;
        }
        f
    })
}

fn refine(f: &Fmac, picks: &[prop::sample::Index]) -> Fmac {
    let mut g = f.clone();
    for p in picks {
        let open: Vec<Node> = g.nodes().iter().filter(|a| a.len() < 8).copied().collect();
        if open.is_empty() {
            break;
        }
        g = split_at(&g, &open[p.index(open.len())]).unwrap().0;
    }
    g
}

proptest! {
    #[test]
    fn validate_is_antichain_with_kraft_one(nodes in proptest::collection::vec(arb_node(), 1..10)) {
        let set: BTreeSet<String> = nodes.iter().map(bits).collect();
        let v: Vec<&String> = set.iter().collect();
        let anti = v.iter().enumerate().all(|(i, a)| v[i + 1..].iter().all(|b| !b.starts_with(a.as_str()) && !a.starts_with(b.as_str())));
        let kraft = v.iter().map(|a| 1u32 << (8 - a.len())).sum::<u32>() == 256;
        prop_assert_eq!(Fmac::validate(nodes).is_ok(), anti && kraft);
    }

    #[test]
    fn grown_fmacs_validate_and_round_trip(f in arb_fmac()) {
        prop_assert!(Fmac::validate(f.nodes().to_vec()).is_ok());
        prop_assert_eq!(f.to_string().parse::<Fmac>().unwrap(), f.clone());
        prop_assert_eq!(kraft_sum(f.nodes()), num_rational::BigRational::from_integer(1.into()));
    }

    #[test]
    fn split_adds_children(f in arb_fmac(), p in any::<prop::sample::Index>()) {
        let a = f.nodes()[p.index(f.len())];
        prop_assume!(a.len() < 8);
        let (g, h0, h1) = split_at(&f, &a).unwrap();
        prop_assert_eq!(g.len(), f.len() + 1);
        prop_assert!(g.contains(&a.child(0)) && g.contains(&a.child(1)) && !g.contains(&a));
        prop_assert!(covers(&f, &g));
        for b in f.nodes().iter().filter(|b| **b != a) {
            prop_assert_eq!(h0.apply(b), Some(*b));
            prop_assert_eq!(h1.apply(b), Some(*b));
        }
    }

    #[test]
    fn factor_cover_replays(f in arb_fmac(), picks in proptest::collection::vec(any::<prop::sample::Index>(), 0..10)) {
        let g = refine(&f, &picks);
        let chain = factor_cover(&f, &g).unwrap();
        prop_assert_eq!(chain.len(), g.len() - f.len());
        let mut cur = f.clone();
        for (next, n) in chain {
            cur = split_at(&cur, &n).unwrap().0;
            prop_assert_eq!(&cur, &next);
        }
        prop_assert_eq!(cur, g);
    }

    #[test]
    fn lifting_count_is_a_product(f in arb_fmac(), picks in proptest::collection::vec(any::<prop::sample::Index>(), 0..6)) {
        let g = refine(&f, &picks);
        let product: u128 = f.nodes().iter().map(|a| g.nodes().iter().filter(|b| a.is_prefix_of(b)).count() as u128).product();
        prop_assert_eq!(lifting_count(&f, &g).unwrap(), product);
        if product <= 2048 {
            let all = enumerate_liftings(&f, &g).unwrap();
            prop_assert_eq!(all.len() as u128, product);
            let distinct: BTreeSet<String> = all.iter().map(|h| h.to_string()).collect();
            prop_assert_eq!(distinct.len(), all.len());
        }
    }

    #[test]
    fn liftings_compose(f in arb_fmac(), p1 in proptest::collection::vec(any::<prop::sample::Index>(), 0..4), p2 in proptest::collection::vec(any::<prop::sample::Index>(), 0..4)) {
        let g = refine(&f, &p1);
        let h = refine(&g, &p2);
        let first = enumerate_liftings(&f, &g).unwrap().swap_remove(0);
        let second = enumerate_liftings(&g, &h).unwrap().pop().unwrap();
        let both = first.then(&second).unwrap();
        for a in f.nodes() {
            let b = both.apply(a).unwrap();
            prop_assert!(a.is_prefix_of(&b) && h.contains(&b));
        }
        prop_assert_eq!(parse_lifting(&both.to_string(), &f, &h).unwrap(), both);
    }

    #[test]
    fn projection_finds_the_unique_prefix(f in arb_fmac(), v in 0u64..256) {
        let p = PointPrefix(Node::from_value(v, 8));
        let a = project(&f, &p).unwrap();
        prop_assert!(a.is_prefix_of(&p.0));
        prop_assert_eq!(f.nodes().iter().filter(|b| b.is_prefix_of(&p.0)).count(), 1);
    }
}
