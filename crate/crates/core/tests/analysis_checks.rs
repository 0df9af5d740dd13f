mod common;

use std::sync::OnceLock;

use arbocube::analysis::{
    complete_corner, cube_completion_check, find_1corners, find_3corners, find_k32, find_spanned_3corners,
    interior_radii, pool_completers, square_pattern_violations, Resolution, RootKind,
};
use arbocube::{Ball, BallLimits, Complex, Cube, Family};
use common::ball;

fn d24() -> &'static Ball {
    static B: OnceLock<Ball> = OnceLock::new();
    B.get_or_init(|| ball(Family::D, 2, 4, BallLimits::new(3, 2, 1, 3)))
}

fn c23() -> &'static Ball {
    static B: OnceLock<Ball> = OnceLock::new();
    B.get_or_init(|| ball(Family::C, 2, 3, BallLimits::new(4, 2, 1, 3)))
}

fn c24() -> &'static Ball {
    static B: OnceLock<Ball> = OnceLock::new();
    B.get_or_init(|| ball(Family::C, 2, 4, BallLimits::new(4, 2, 1, 3)))
}

/// Five distinct vertices of a real ball joined by made-up edges.
fn fixture(edges: Vec<(usize, usize)>, cubes: Vec<Cube>) -> Ball {
    let src = d24();
    let vertices = src.vertices[..6].to_vec();
    Ball::from_parts(src.complex, src.limits, vertices, edges, cubes)
}

#[test]
fn planted_k32_is_found_once() {
    let b = fixture(vec![(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)], vec![]);
    let hits = find_k32(&b);
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].pair, (0, 1));
    assert_eq!(hits[0].common, [2, 3, 4]);
    // an extra edge between two of the three makes it non-induced
    let b = fixture(vec![(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3)], vec![]);
    assert!(find_k32(&b).is_empty());
}

#[test]
fn planted_degenerate_square_is_found_once() {
    let polys = vec!["1".parse().unwrap(), "2".parse().unwrap()];
    let ok = Cube { base: 0, polygons: polys.clone(), verts: vec![0, 1, 2, 3] };
    let bad = Cube { base: 0, polygons: polys, verts: vec![0, 1, 1, 3] };
    let b = fixture(vec![(0, 1), (0, 2), (1, 3), (2, 3)], vec![ok, bad]);
    assert_eq!(find_1corners(&b), vec![1]);
}

#[test]
fn real_balls_have_no_degenerate_squares_or_k32() {
    for b in [d24(), c23()] {
        assert!(find_1corners(b).is_empty());
        assert!(find_k32(b).is_empty());
        assert!(square_pattern_violations(b).is_empty());
        assert!(cube_completion_check(b).violations.is_empty());
    }
}

#[test]
fn edges_join_heights_one_apart_and_cubes_are_consistent() {
    for b in [d24(), c23()] {
        let edges = b.edge_set();
        for &(u, v) in &b.edges {
            assert_eq!(b.heights[u].abs_diff(b.heights[v]), 1);
        }
        for c in &b.cubes {
            assert_eq!(c.verts.len(), 1 << c.dim());
            assert_eq!(c.verts[0], c.base);
            for (i, &u) in c.verts.iter().enumerate() {
                assert_eq!(b.heights[u], b.heights[c.base] + i.count_ones() as usize);
                for bit in 0..c.dim() {
                    let j = i | (1 << bit);
                    if j != i {
                        let w = c.verts[j];
                        assert!(edges.contains(&(u.min(w), u.max(w))));
                    }
                }
            }
        }
    }
}

#[test]
fn spanned_corners_complete_to_the_declared_cube() {
    // Every 3-corner lying in a declared cube must be completed by the
    // resolver, and the completer must be that cube's eighth vertex.
    for b in [d24(), c23()] {
        let spanned = find_spanned_3corners(b);
        assert!(!spanned.is_empty());
        let mut attracting = 0;
        for (c, eighth) in spanned {
            if c.root_kind == RootKind::Attracting {
                attracting += 1;
            }
            let done = complete_corner(b, &c).unwrap();
            let Resolution::Completed { vertex, .. } = &done.resolution else {
                panic!("spanned corner at {} not completed: {:?}", c.root, done.resolution);
            };
            let w = b.complex.from_json(vertex).unwrap();
            assert!(b.complex.vertex_equal(&w, &b.vertices[eighth]).unwrap());
            assert_eq!(pool_completers(b, &c), vec![eighth]);
        }
        assert!(attracting > 0);
    }
}

#[test]
fn open_corners_of_cat0_balls_complete() {
    for b in [d24(), c23()] {
        let found = find_3corners(b);
        assert!(!found.is_empty());
        for c in &found {
            let done = complete_corner(b, c).unwrap();
            assert!(matches!(done.resolution, Resolution::Completed { .. }), "{:?}", done.resolution);
        }
    }
}

#[test]
fn c24_has_non_completable_attracting_corners() {
    let b = c24();
    let mut bad = 0;
    for c in find_3corners(b) {
        let done = complete_corner(b, &c).unwrap();
        if let Resolution::NotCompletable { .. } = done.resolution {
            assert_eq!(done.root_kind, RootKind::Attracting);
            bad += 1;
        }
    }
    assert!(bad > 0);
}

#[test]
fn deficient_vertices_have_radius_zero() {
    let b = d24();
    let cx: &Complex = &b.complex;
    let radii = interior_radii(b, 3);
    for (i, v) in b.vertices.iter().enumerate() {
        let complete = cx.neighbors(v).iter().all(|w| b.index_of(w).is_some());
        assert_eq!(radii[i] == 0, !complete, "vertex {i}");
    }
}
