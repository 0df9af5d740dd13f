mod common;

use std::sync::OnceLock;

use arbocube::{Params, PolygonId, RigidMap};
use common::{all_gens, random_descent, random_surface, random_word, rng, Gens};
use proptest::prelude::*;
use rand::Rng;

fn gens() -> &'static [Gens] {
    static G: OnceLock<Vec<Gens>> = OnceLock::new();
    G.get_or_init(all_gens)
}

fn pick(seed: u64) -> (&'static Gens, rand_chacha::ChaCha8Rng) {
    let mut r = rng(seed);
    let g = &gens()[r.gen_range(0..gens().len())];
    (g, r)
}

/// A polygon well outside the given supports.
fn far_polygon(p: &Params, maps: &[&RigidMap], r: &mut impl Rng) -> PolygonId {
    let deepest = maps
        .iter()
        .flat_map(|g| g.source().iter().chain(g.target().iter()))
        .map(|q| q.depth())
        .max()
        .unwrap_or(0);
    random_descent(p, &PolygonId::center(), deepest + 3 + r.gen_range(0..3), r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_axioms(seed in any::<u64>()) {
        let (g, mut r) = pick(seed);
        let a = random_word(g, r.gen_range(0..4), &mut r);
        let b = random_word(g, r.gen_range(0..4), &mut r);
        let c = random_word(g, r.gen_range(0..4), &mut r);
        let id = RigidMap::identity(g.params);
        prop_assert!(a.compose(&b).compose(&c).equal(&a.compose(&b.compose(&c))));
        prop_assert!(a.compose(&id).equal(&a));
        prop_assert!(id.compose(&a).equal(&a));
        prop_assert!(a.compose(&a.invert()).equal(&id));
        prop_assert!(a.invert().compose(&a).equal(&id));
        prop_assert!(a.invert().invert().equal(&a));
        prop_assert!(a.compose(&b).invert().equal(&b.invert().compose(&a.invert())));
    }

    #[test]
    fn equality_ignores_presentation(seed in any::<u64>()) {
        let (g, mut r) = pick(seed);
        let a = random_word(g, r.gen_range(1..4), &mut r);
        let min = a.minimize();
        prop_assert!(min.equal(&a));
        prop_assert_eq!(min.minimize(), min.clone());
        let extra = random_descent(&g.params, a.source().top(), r.gen_range(1..3), &mut r);
        let big = g.params.hull(&a.source().union_polys(&g.params.single(extra))).unwrap();
        let e = a.enlarge(&big).unwrap();
        prop_assert!(e.is_valid());
        prop_assert!(e.equal(&a));
        prop_assert_eq!(e.minimize(), min.clone());
        prop_assert_eq!(e.minimize().key(), a.minimize().key());
    }

    #[test]
    fn peeling_is_confluent(seed in any::<u64>()) {
        let (g, mut r) = pick(seed);
        let a = random_word(g, r.gen_range(1..4), &mut r);
        let extra = random_descent(&g.params, &PolygonId::center(), r.gen_range(1..3), &mut r);
        let big = g.params.hull(&a.source().union_polys(&g.params.single(extra))).unwrap();
        let forms = a.enlarge(&big).unwrap().all_minimal_forms();
        prop_assert_eq!(forms.len(), 1);
        prop_assert_eq!(&forms[0], &a.minimize());
    }

    #[test]
    fn action_respects_composition_and_inverse(seed in any::<u64>()) {
        let (g, mut r) = pick(seed);
        let a = random_word(g, r.gen_range(1..4), &mut r);
        let b = random_word(g, r.gen_range(1..4), &mut r);
        let ab = a.compose(&b);
        let p = far_polygon(&g.params, &[&a, &b, &ab], &mut r);
        let bp = b.apply_polygon(&p).unwrap();
        if let Ok(abp) = a.apply_polygon(&bp) {
            prop_assert_eq!(ab.apply_polygon(&p).unwrap(), abp);
        }
        prop_assert_eq!(b.invert().apply_polygon(&bp).unwrap(), p.clone());
        // neighbours stay neighbours
        for q in g.params.neighbors(&p) {
            if let Ok(bq) = b.apply_polygon(&q) {
                prop_assert!(g.params.neighbors(&bp).contains(&bq));
            }
        }
    }

    #[test]
    fn rigidity_and_images(seed in any::<u64>()) {
        let (g, mut r) = pick(seed);
        let a = random_word(g, r.gen_range(1..4), &mut r);
        let min = a.minimize();
        let s = g.params.hull(&min.source().union_polys(&random_surface(&g.params, &PolygonId::center(), 2, &mut r))).unwrap();
        prop_assert!(a.is_rigid_outside(&s));
        let img = a.image_surface(&s).unwrap();
        prop_assert_eq!(img.len(), s.len());
        prop_assert_eq!(g.params.frontier(&img).len(), g.params.frontier(&s).len());
        prop_assert_eq!(a.invert().image_surface(&img).unwrap(), s.clone());
        let res = a.restrict_to(&s).unwrap();
        prop_assert_eq!(res.source(), &s);
        prop_assert!(res.equal(&a));
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let (g, mut r) = pick(seed);
        let a = random_word(g, r.gen_range(0..4), &mut r);
        let text = serde_json::to_string(&a.to_json()).unwrap();
        let back = RigidMap::from_json(g.params, &serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back, a);
    }
}

#[test]
fn every_generator_is_valid_and_minimal() {
    for g in gens() {
        for s in &g.gens {
            assert!(s.is_valid());
            assert_eq!(&s.minimize(), s);
            assert!(!s.equal(&RigidMap::identity(g.params)));
        }
    }
}
