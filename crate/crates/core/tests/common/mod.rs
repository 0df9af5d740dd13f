#![allow(dead_code)]

use arbocube::ball::generators;
use arbocube::{build_ball, Ball, BallLimits, Complex, Family, Flavor, Params, PolygonId, RigidMap, Surface, Vertex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Parameter pairs used by the randomized algebra tests.
pub fn algebra_params() -> Vec<Params> {
    let mut out = Vec::new();
    for (n, m) in [(1, 2), (1, 3), (2, 1), (2, 2), (2, 3), (2, 4), (3, 2), (3, 3)] {
        out.push(Params::sharp(n, m).unwrap());
        out.push(Params::star(n, m).unwrap());
    }
    out
}

pub struct Gens {
    pub params: Params,
    pub gens: Vec<RigidMap>,
}

pub fn all_gens() -> Vec<Gens> {
    algebra_params()
        .into_iter()
        .map(|p| Gens {
            params: p,
            gens: generators(p, 2),
        })
        .filter(|g| !g.gens.is_empty())
        .collect()
}

/// A product of `len` random generators.
pub fn random_word(g: &Gens, len: usize, r: &mut impl Rng) -> RigidMap {
    let mut w = RigidMap::identity(g.params);
    for _ in 0..len {
        let s = g.gens.choose(r).unwrap();
        w = s.compose(&w);
    }
    w
}

/// Walks `steps` times from `start` to a random deeper neighbour.
pub fn random_descent(p: &Params, start: &PolygonId, steps: usize, r: &mut impl Rng) -> PolygonId {
    let mut cur = start.clone();
    for _ in 0..steps {
        let deeper: Vec<PolygonId> = p.neighbors(&cur).into_iter().filter(|q| q.depth() > cur.depth()).collect();
        cur = deeper.choose(r).unwrap().clone();
    }
    cur
}

/// A random connected surface grown from `top` by adding children.
pub fn random_surface(p: &Params, top: &PolygonId, size: usize, r: &mut impl Rng) -> Surface {
    let mut polys = vec![top.clone()];
    while polys.len() < size {
        let base = polys.choose(r).unwrap().clone();
        let kids: Vec<PolygonId> = p
            .neighbors(&base)
            .into_iter()
            .filter(|q| q.depth() > base.depth() && !polys.contains(q))
            .collect();
        if let Some(k) = kids.choose(r) {
            polys.push(k.clone());
        }
    }
    p.surface(&polys).unwrap()
}

/// Frontier size from counting tree edges: every polygon contributes its
/// degree and each edge inside the surface removes two arc ends.
pub fn frontier_by_counting(p: &Params, s: &Surface) -> usize {
    let k = s.len();
    let centre = usize::from(s.contains_center());
    let degrees = centre * p.m as usize + (k - centre) * (p.n as usize + 1);
    degrees - 2 * (k - 1)
}

/// Hull as the union of pairwise tree paths, computed through common prefixes.
pub fn hull_by_paths(polys: &[PolygonId]) -> Vec<PolygonId> {
    let mut out: Vec<PolygonId> = polys.to_vec();
    for a in polys {
        for b in polys {
            let k = a.path().iter().zip(b.path()).take_while(|(x, y)| x == y).count();
            for d in k..=a.depth() {
                out.push(a.prefix(d));
            }
            for d in k..=b.depth() {
                out.push(b.prefix(d));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Small balls used across the analysis tests: (family, n, m, limits).
pub fn corpus() -> Vec<(Family, u32, u32, BallLimits)> {
    vec![
        (Family::C, 1, 2, BallLimits::new(4, 3, 1, 3)),
        (Family::C, 2, 2, BallLimits::new(4, 2, 1, 3)),
        (Family::C, 2, 3, BallLimits::new(3, 2, 1, 3)),
        (Family::C, 3, 3, BallLimits::new(3, 2, 1, 3)),
        (Family::C, 2, 4, BallLimits::new(4, 2, 1, 3)),
        (Family::D, 2, 2, BallLimits::new(3, 2, 1, 3)),
        (Family::D, 2, 4, BallLimits::new(3, 2, 1, 3)),
        (Family::D, 2, 1, BallLimits::new(4, 3, 1, 3)),
    ]
}

pub fn ball(family: Family, n: u32, m: u32, limits: BallLimits) -> Ball {
    let cx = Complex::new(family, n, m).unwrap();
    build_ball(&cx, limits, 1_000_000).unwrap()
}

pub fn flavor_name(f: Flavor) -> &'static str {
    match f {
        Flavor::Sharp => "sharp",
        Flavor::Star => "star",
    }
}

/// A complex with its generating set, for sampling vertices.
pub struct Setup {
    pub cx: Complex,
    pub gens: Vec<RigidMap>,
}

impl Setup {
    pub fn new(family: Family, n: u32, m: u32) -> Self {
        let cx = Complex::new(family, n, m).unwrap();
        Setup {
            cx,
            gens: generators(cx.params, 2),
        }
    }

    pub fn word(&self, len: usize, r: &mut impl Rng) -> RigidMap {
        let mut w = RigidMap::identity(self.cx.params);
        for _ in 0..len {
            w = self.gens.choose(r).unwrap().compose(&w);
        }
        w
    }
}

/// A vertex with a random surface of at most `max_size` polygons and a
/// marking of at most `max_word` generators.
pub fn random_vertex_with(s: &Setup, max_size: usize, max_word: usize, r: &mut impl Rng) -> Vertex {
    let p = &s.cx.params;
    let top = if s.cx.family == Family::D || r.gen_bool(0.5) {
        PolygonId::center()
    } else {
        random_descent(p, &PolygonId::center(), r.gen_range(1..3), r)
    };
    let surf = random_surface(p, &top, r.gen_range(1..=max_size), r);
    let g = s.word(r.gen_range(0..=max_word), r);
    s.cx.vertex(surf, g).unwrap()
}

pub fn random_vertex(s: &Setup, r: &mut impl Rng) -> Vertex {
    random_vertex_with(s, 4, 2, r)
}
