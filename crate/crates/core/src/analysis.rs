//! Curvature checks on balls: degenerate squares, `K_{2,3}` subgraphs,
//! 3-corners and their completion, cube completion and flag links.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::ball::Ball;
use crate::complex::{leaves, Complex, Family, Vertex, VertexKey};
use crate::error::{Error, Result};
use crate::rigid::RigidMap;
use crate::structure::{PolygonId, Surface};

/// Indices of declared squares whose four corners are not distinct.
pub fn find_1corners(ball: &Ball) -> Vec<usize> {
    ball.cubes
        .iter()
        .enumerate()
        .filter(|(_, c)| c.dim() == 2)
        .filter(|(_, c)| {
            let s: HashSet<usize> = c.verts.iter().copied().collect();
            s.len() < 4
        })
        .map(|(i, _)| i)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct K32 {
    pub pair: (usize, usize),
    pub common: [usize; 3],
}

/// Every induced `K_{2,3}`: two non-adjacent vertices with three pairwise
/// non-adjacent common neighbours.
pub fn find_k32(ball: &Ball) -> Vec<K32> {
    let adj = ball.adjacency();
    let edges = ball.edge_set();
    let adjacent = |a: usize, b: usize| edges.contains(&(a.min(b), a.max(b)));
    let mut common: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (v, nb) in adj.iter().enumerate() {
        for i in 0..nb.len() {
            for j in i + 1..nb.len() {
                common.entry((nb[i], nb[j])).or_default().push(v);
            }
        }
    }
    let mut out = Vec::new();
    let mut pairs: Vec<_> = common.into_iter().filter(|(_, c)| c.len() >= 3).collect();
    pairs.sort();
    for ((a, b), cs) in pairs {
        if adjacent(a, b) {
            continue;
        }
        for i in 0..cs.len() {
            for j in i + 1..cs.len() {
                for k in j + 1..cs.len() {
                    let t = [cs[i], cs[j], cs[k]];
                    if !adjacent(t[0], t[1]) && !adjacent(t[1], t[2]) && !adjacent(t[0], t[2]) {
                        out.push(K32 { pair: (a, b), common: t });
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RootKind {
    Attracting,
    NonAttracting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Constructive,
    Search,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Resolution {
    Completed {
        vertex: crate::complex::VertexJson,
        method: Method,
    },
    NotCompletable {
        reason: String,
    },
    Unknown {
        reason: String,
    },
}

/// Three squares at `root` spanned by the edges to `side[0..3]`.
///
/// `opposite[0]` closes `side[0], side[1]`, `opposite[1]` closes
/// `side[1], side[2]` and `opposite[2]` closes `side[2], side[0]`.
#[derive(Clone, Debug, Serialize)]
pub struct Corner {
    pub root: usize,
    pub side: [usize; 3],
    pub opposite: [usize; 3],
    pub squares: [usize; 3],
    pub root_kind: RootKind,
    pub resolution: Resolution,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disk: Option<DiskFacts>,
}

/// Data of the disk `π(I_1)` for an attracting corner.
#[derive(Clone, Debug, Serialize)]
pub struct DiskFacts {
    pub min_height: usize,
    pub arcs_in_sigma: bool,
    pub arcs_avoid_h: bool,
    pub block_size: usize,
    pub expected_block_size: usize,
    pub frontier_inequality: bool,
}

impl Corner {
    /// Cube coordinates: root 000, sides 100/010/001, opposites 110/011/101.
    fn coords(&self) -> [(usize, u8); 7] {
        [
            (self.root, 0b000),
            (self.side[0], 0b001),
            (self.side[1], 0b010),
            (self.side[2], 0b100),
            (self.opposite[0], 0b011),
            (self.opposite[1], 0b110),
            (self.opposite[2], 0b101),
        ]
    }

    pub fn vertex_ids(&self) -> [usize; 7] {
        let c = self.coords();
        [c[0].0, c[1].0, c[2].0, c[3].0, c[4].0, c[5].0, c[6].0]
    }
}

/// Squares at each vertex, keyed by the unordered pair of square-neighbours.
fn squares_at(ball: &Ball) -> Vec<HashMap<(usize, usize), Vec<(usize, usize)>>> {
    let mut at = vec![HashMap::new(); ball.len()];
    for (ci, c) in ball.cubes.iter().enumerate() {
        if c.dim() != 2 {
            continue;
        }
        // verts: 0 base, 1 +H1, 2 +H2, 3 top; cyclic order 0-1-3-2
        let cyc = [c.verts[0], c.verts[1], c.verts[3], c.verts[2]];
        for i in 0..4 {
            let v = cyc[i];
            let a = cyc[(i + 1) % 4];
            let b = cyc[(i + 3) % 4];
            let opp = cyc[(i + 2) % 4];
            let key = (a.min(b), a.max(b));
            at[v].entry(key).or_insert_with(Vec::new).push((ci, opp));
        }
    }
    at
}

fn cube3_sets(ball: &Ball) -> HashMap<usize, Vec<BTreeSet<usize>>> {
    let mut by_vertex: HashMap<usize, Vec<BTreeSet<usize>>> = HashMap::new();
    for c in ball.cubes_of_dim(3) {
        let s: BTreeSet<usize> = c.verts.iter().copied().collect();
        for &v in &c.verts {
            by_vertex.entry(v).or_default().push(s.clone());
        }
    }
    by_vertex
}

/// All 3-corners of the ball not spanned by a declared 3-cube.
pub fn find_3corners(ball: &Ball) -> Vec<Corner> {
    corners(ball, false).into_iter().map(|(c, _)| c).collect()
}

/// 3-corners lying in a declared 3-cube, each with the cube's eighth vertex.
pub fn find_spanned_3corners(ball: &Ball) -> Vec<(Corner, usize)> {
    corners(ball, true)
        .into_iter()
        .filter_map(|(c, w)| w.map(|w| (c, w)))
        .collect()
}

fn corners(ball: &Ball, spanned: bool) -> Vec<(Corner, Option<usize>)> {
    let at = squares_at(ball);
    let cubes = cube3_sets(ball);
    let mut out = Vec::new();
    for r in 0..ball.len() {
        let sq = &at[r];
        if sq.len() < 3 {
            continue;
        }
        let mut nbrs: Vec<usize> = sq.keys().flat_map(|&(a, b)| [a, b]).collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        for i in 0..nbrs.len() {
            for j in i + 1..nbrs.len() {
                let Some(s01) = sq.get(&(nbrs[i], nbrs[j])) else { continue };
                for k in j + 1..nbrs.len() {
                    let (a, b, c) = (nbrs[i], nbrs[j], nbrs[k]);
                    let (Some(s12), Some(s02)) = (sq.get(&(b, c)), sq.get(&(a, c))) else {
                        continue;
                    };
                    for &(q01, o01) in s01 {
                        for &(q12, o12) in s12 {
                            for &(q20, o20) in s02 {
                                let seven: BTreeSet<usize> = [r, a, b, c, o01, o12, o20].into_iter().collect();
                                if seven.len() != 7 {
                                    continue;
                                }
                                let cube = cubes.get(&r).and_then(|l| l.iter().find(|s| seven.is_subset(s)));
                                if cube.is_some() != spanned {
                                    continue;
                                }
                                let eighth = cube.and_then(|s| s.difference(&seven).next().copied());
                                let h = ball.heights[r];
                                let kind = if [a, b, c].iter().all(|&x| ball.heights[x] < h) {
                                    RootKind::Attracting
                                } else {
                                    RootKind::NonAttracting
                                };
                                out.push((Corner {
                                    root: r,
                                    side: [a, b, c],
                                    opposite: [o01, o12, o20],
                                    squares: [q01, q12, q20],
                                    root_kind: kind,
                                    resolution: Resolution::Unknown {
                                        reason: "not yet resolved".into(),
                                    },
                                    disk: None,
                                }, eighth));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// A vertex in a fixed frame: surface plus marking.
fn at_frame(cx: &Complex, s: Surface, g: &RigidMap) -> Vertex {
    Vertex {
        surface: s,
        marking: g.clone(),
        family: cx.family,
    }
}

/// Checks that the corner plus `w` spans a 3-cube: all 12 edges exist.
pub fn validates_cube(cx: &Complex, seven: &[Vertex; 7], w: &Vertex) -> bool {
    // seven in cube coordinates order: 000,001,010,100,011,110,101
    let coords = [0b000u8, 0b001, 0b010, 0b100, 0b011, 0b110, 0b101];
    let mut verts: Vec<(u8, &Vertex)> = coords.iter().copied().zip(seven.iter()).collect();
    verts.push((0b111, w));
    if seven.iter().any(|v| cx.vertex_equal(v, w).unwrap_or(false)) {
        return false;
    }
    let mut edges = 0;
    for i in 0..8 {
        for j in i + 1..8 {
            if (verts[i].0 ^ verts[j].0).count_ones() == 1 {
                if !cx.edge_exists(verts[i].1, verts[j].1).unwrap_or(false) {
                    return false;
                }
                edges += 1;
            }
        }
    }
    edges == 12
}

fn corner_vertices(ball: &Ball, c: &Corner) -> [Vertex; 7] {
    let ids = c.vertex_ids();
    ids.map(|i| ball.vertices[i].clone())
}

/// Every vertex class completing the corner into a 3-cube, found among the
/// neighbours of one opposite vertex.
pub fn completer_candidates(cx: &Complex, seven: &[Vertex; 7]) -> Vec<Vertex> {
    let h = |v: &Vertex| cx.height(v) as i64;
    // opposite 011 reaches the missing vertex in direction 100
    let o = &seven[4];
    let s_dir = h(&seven[3]) - h(&seven[0]);
    let pool: Vec<Vertex> = if s_dir > 0 {
        cx.upward_neighbors(o).into_iter().map(|(_, v)| v).collect()
    } else {
        cx.downward_neighbors(o)
    };
    let mut out: Vec<Vertex> = Vec::new();
    let mut seen = HashSet::new();
    for w in pool {
        let k = cx.key(&w);
        if seen.contains(&k) {
            continue;
        }
        seen.insert(k);
        if validates_cube(cx, seven, &w) {
            out.push(cx.representative(&w));
        }
    }
    out
}

/// Ball vertices other than the root adjacent to all three opposite vertices,
/// that is, completers already present in the pool.
pub fn pool_completers(ball: &Ball, corner: &Corner) -> Vec<usize> {
    let adj = ball.adjacency();
    let common = |a: usize, b: usize| -> HashSet<usize> {
        let sb: HashSet<usize> = adj[b].iter().copied().collect();
        adj[a].iter().copied().filter(|x| sb.contains(x)).collect()
    };
    let [o0, o1, o2] = corner.opposite;
    let mut out: Vec<usize> = common(o0, o1)
        .intersection(&common(o1, o2))
        .copied()
        .filter(|&w| w != corner.root)
        .collect();
    out.sort_unstable();
    out
}

fn completed(cx: &Complex, w: &Vertex, method: Method) -> Resolution {
    Resolution::Completed {
        vertex: cx.to_json(&cx.representative(w)),
        method,
    }
}

/// Product-frame construction for a corner whose root is not attracting.
fn complete_non_attracting(cx: &Complex, seven: &[Vertex; 7]) -> Option<Vertex> {
    let coords = [0b000u8, 0b001, 0b010, 0b100, 0b011, 0b110, 0b101];
    let by_coord = |c: u8| -> Option<&Vertex> { coords.iter().position(|&x| x == c).map(|i| &seven[i]) };
    let h0 = cx.height(&seven[0]) as i64;
    let signs: Vec<i64> = [1usize, 2, 3].iter().map(|&i| cx.height(&seven[i]) as i64 - h0).collect();
    let x0: u8 = (0..3).filter(|&i| signs[i] < 0).fold(0, |acc, i| acc | (1 << i));
    if x0 == 0b111 {
        return None;
    }
    let base = by_coord(x0)?;
    let mut hs: Vec<Option<PolygonId>> = vec![None; 3];
    for i in 0..3 {
        let nb = x0 ^ (1 << i);
        if let Some(v) = by_coord(nb) {
            hs[i] = cx.upward_polygon_to(base, v);
        }
    }
    for i in 0..3 {
        if hs[i].is_some() {
            continue;
        }
        let j = (0..3).find(|&j| j != i && hs[j].is_some())?;
        let mid = at_frame(cx, base.surface.with(hs[j].clone()?), &base.marking);
        let far = by_coord(x0 ^ (1 << i) ^ (1 << j))?;
        let k = cx.upward_polygon_to(&mid, far)?;
        if !cx.params.adjacent_polygons(&base.surface).contains(&k) {
            return None;
        }
        hs[i] = Some(k);
    }
    let mut s = base.surface.clone();
    for i in 0..3 {
        if (0b111 ^ x0) & (1 << i) != 0 {
            s = s.with(hs[i].clone()?);
        }
    }
    Some(at_frame(cx, s, &base.marking))
}

/// Indices of a cyclic block of `true` entries, starting from its first one.
fn block_from_first(mask: &[bool]) -> Vec<usize> {
    let l = mask.len();
    let Some(first) = (0..l).find(|&i| mask[i] && !mask[(i + l - 1) % l]) else {
        return (0..l).filter(|&i| mask[i]).collect();
    };
    (0..l).map(|t| (first + t) % l).take_while(|&i| mask[i]).collect()
}

/// Removes from `Σ` the disk given by a block of consecutive frontier arcs
/// of `Σ` starting at `start`, sized for a polygon like `like`.
fn remove_disk(
    cx: &Complex,
    sigma: &Surface,
    start: usize,
    like: &PolygonId,
    puncture: Option<&PolygonId>,
) -> Option<(Surface, RigidMap)> {
    let p = &cx.params;
    let k = sigma.len();
    if k < 2 {
        return None;
    }
    let l = p.frontier(sigma).len();
    let deg = p.degree(like);
    let punct = p.is_punctured(like);
    let mut omegas: Vec<Surface> = vec![sigma.clone()];
    if sigma.contains_center() || p.is_homogeneous() {
        let chain: Vec<PolygonId> = (0..k).map(|d| PolygonId::from_path(&vec![1u8; d])).collect();
        omegas.push(p.surface(&chain).ok()?);
    } else {
        omegas.extend(p.subtrees_with_top(sigma.top(), k));
    }
    for omega in omegas {
        let fo = p.frontier(&omega);
        for leaf in leaves(p, &omega) {
            if p.degree(&leaf) != deg || p.is_punctured(&leaf) != punct {
                continue;
            }
            let rest = omega.without(&leaf);
            if cx.family == Family::D && !rest.contains_center() {
                continue;
            }
            // the leaf's outer arcs are consecutive; find the first one
            let mask: Vec<bool> = fo.iter().map(|a| p.arc_ends(&omega, a).0 == leaf).collect();
            let first = block_from_first(&mask)[0];
            let off = (start + l - first) % l;
            let Ok(chi) = RigidMap::new(*p, omega.clone(), sigma.clone(), off) else {
                continue;
            };
            let chi = match puncture {
                Some(q) => chi.with_punctures(&[(leaf.clone(), q.clone())]).ok()?,
                None => chi,
            };
            return Some((rest, chi));
        }
    }
    None
}

/// Attracting corner: take `Σ` minus the disk `π(I_1)`.
fn complete_attracting(cx: &Complex, seven: &[Vertex; 7]) -> (Option<Vertex>, Option<DiskFacts>) {
    let p = &cx.params;
    // z_Σ = 101 joins sides 001 and 100; z_Γ = 011 joins 001 and 010
    let (y1, y3) = (&seven[1], &seven[3]);
    let (z_sigma, z_gamma) = (&seven[6], &seven[4]);
    let (Some(h1), Some(h3)) = (cx.upward_polygon_to(z_sigma, y1), cx.upward_polygon_to(z_sigma, y3)) else {
        return (None, None);
    };
    let Some(i1) = cx.upward_polygon_to(z_gamma, y1) else {
        return (None, None);
    };
    let sigma = z_sigma.surface.clone();
    let psi = &z_sigma.marking;
    let pi = psi.invert().compose(&z_gamma.marking);
    let gi = z_gamma.surface.with(i1.clone());
    let Ok(pi1) = pi.restrict_to(&gi) else {
        return (None, None);
    };
    let sh1 = sigma.with(h1.clone());
    if *pi1.target() != sh1 {
        return (None, None);
    }
    let src = pi1.source_frontier();
    let outer: Vec<PolygonId> = block_from_first(&src.iter().map(|a| p.arc_ends(&gi, a).0 == i1).collect::<Vec<_>>())
        .into_iter()
        .map(|i| src[i].clone())
        .collect();
    let images: Vec<PolygonId> = outer.iter().map(|a| pi1.map_arc(a)).collect();
    let fs = p.frontier(&sigma);
    let arcs_in_sigma = images.iter().all(|b| sigma.contains(&p.arc_ends(&sh1, b).0));
    let h_arcs: Vec<PolygonId> = [&h1, &h3]
        .iter()
        .map(|h| if h.depth() > 0 && sigma.contains(&h.parent().unwrap()) { (*h).clone() } else { sigma.top().clone() })
        .collect();
    let arcs_avoid_h = images.iter().all(|b| !h_arcs.contains(b));
    let facts = DiskFacts {
        min_height: cx.height(z_sigma),
        arcs_in_sigma,
        arcs_avoid_h,
        block_size: images.iter().collect::<HashSet<_>>().len(),
        expected_block_size: p.degree(&i1) - 1,
        frontier_inequality: fs.len() >= 2 && fs.len() - 2 >= p.degree(&i1) - 1,
    };
    if !arcs_in_sigma {
        return (None, Some(facts));
    }
    // order the images as they appear along Fr(Σ), starting after H_1's arc
    let pos: Vec<usize> = images
        .iter()
        .filter_map(|b| fs.iter().position(|x| x == b))
        .collect();
    if pos.len() != images.len() {
        return (None, Some(facts));
    }
    let l = fs.len();
    let start = pos[0];
    let consecutive = pos.iter().enumerate().all(|(t, &q)| q == (start + t) % l);
    if !consecutive {
        return (None, Some(facts));
    }
    let disk_puncture = pi1.map_puncture(&i1);
    if disk_puncture.as_ref().is_some_and(|q| !sigma.contains(q)) {
        return (None, Some(facts));
    }
    let Some((rest, chi)) = remove_disk(cx, &sigma, start, &i1, disk_puncture.as_ref()) else {
        return (None, Some(facts));
    };
    (Some(at_frame(cx, rest, &psi.compose(&chi))), Some(facts))
}

/// Resolves a corner found in `ball`.
pub fn complete_corner(ball: &Ball, corner: &Corner) -> Result<Corner> {
    let ids = corner.vertex_ids();
    if ids.iter().any(|&i| i >= ball.len()) {
        return Err(Error::CornerNotInBall);
    }
    let cx = &ball.complex;
    let seven = corner_vertices(ball, corner);
    let mut out = corner.clone();
    match corner.root_kind {
        RootKind::NonAttracting => {
            out.resolution = match complete_non_attracting(cx, &seven) {
                Some(w) if validates_cube(cx, &seven, &w) => completed(cx, &w, Method::Constructive),
                _ => Resolution::Unknown {
                    reason: "constructive completion failed validation".into(),
                },
            };
        }
        RootKind::Attracting => {
            let h_root = ball.heights[corner.root];
            let floor = usize::from(cx.family == Family::C);
            if h_root < 3 + floor {
                out.resolution = Resolution::NotCompletable {
                    reason: format!(
                        "height obstruction: a completing vertex would have height {} but the minimum is {floor}",
                        h_root as i64 - 3
                    ),
                };
                return Ok(out);
            }
            let (cand, facts) = complete_attracting(cx, &seven);
            out.disk = facts;
            out.resolution = match cand {
                Some(w) if validates_cube(cx, &seven, &w) => completed(cx, &w, Method::Constructive),
                _ => {
                    let found = completer_candidates(cx, &seven);
                    match found.first() {
                        Some(w) => completed(cx, w, Method::Search),
                        None => Resolution::Unknown {
                            reason: "search exhausted".into(),
                        },
                    }
                }
            };
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CubeCompletionReport {
    pub squares_checked: usize,
    pub cubes_checked: usize,
    pub violations: Vec<String>,
}

/// Every 4-cycle and every 3-cube skeleton of the ball must be a declared
/// product cube with the bit-string height law.
pub fn cube_completion_check(ball: &Ball) -> CubeCompletionReport {
    let adj = ball.adjacency();
    let adjset: Vec<HashSet<usize>> = adj.iter().map(|l| l.iter().copied().collect()).collect();
    let squares = ball.cube_vertex_sets(2);
    let cubes3 = ball.cube_vertex_sets(3);
    let mut rep = CubeCompletionReport::default();
    let h = &ball.heights;
    for u in 0..ball.len() {
        let nb = &adj[u];
        for i in 0..nb.len() {
            for j in i + 1..nb.len() {
                let (a, b) = (nb[i], nb[j]);
                for &w in &adj[a] {
                    if w <= u || !adjset[b].contains(&w) || w == b {
                        continue;
                    }
                    if a.min(b) < u {
                        continue;
                    }
                    rep.squares_checked += 1;
                    let mut s = vec![u, a, w, b];
                    s.sort_unstable();
                    if !squares.contains(&s) {
                        rep.violations.push(format!("4-cycle {s:?} is not a declared square"));
                    }
                    let mut hs = [h[u], h[a], h[w], h[b]];
                    hs.sort_unstable();
                    if hs != [hs[0], hs[0] + 1, hs[0] + 1, hs[0] + 2] {
                        rep.violations.push(format!("4-cycle {s:?} has heights {hs:?}"));
                    }
                }
            }
        }
    }
    // 3-cube skeletons, enumerated from their lowest-index vertex
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for u in 0..ball.len() {
        let nb: Vec<usize> = adj[u].iter().copied().filter(|&x| x > u).collect();
        let opp = |a: usize, b: usize| -> Vec<usize> {
            adj[a]
                .iter()
                .copied()
                .filter(|&w| w != u && w > u && adjset[b].contains(&w))
                .collect()
        };
        for i in 0..nb.len() {
            for j in i + 1..nb.len() {
                let oab = opp(nb[i], nb[j]);
                if oab.is_empty() {
                    continue;
                }
                for k in j + 1..nb.len() {
                    let (a, b, c) = (nb[i], nb[j], nb[k]);
                    let obc = opp(b, c);
                    let oca = opp(c, a);
                    for &x in &oab {
                        for &y in &obc {
                            for &z in &oca {
                                for &t in &adj[x] {
                                    if t <= u || !adjset[y].contains(&t) || !adjset[z].contains(&t) {
                                        continue;
                                    }
                                    let mut s = vec![u, a, b, c, x, y, z, t];
                                    s.sort_unstable();
                                    s.dedup();
                                    if s.len() != 8 || !seen.insert(s.clone()) {
                                        continue;
                                    }
                                    let induced = s
                                        .iter()
                                        .map(|&p| s.iter().filter(|&&q| adjset[p].contains(&q)).count())
                                        .sum::<usize>()
                                        == 24;
                                    if !induced {
                                        continue;
                                    }
                                    rep.cubes_checked += 1;
                                    if !cubes3.contains(&s) {
                                        rep.violations.push(format!("3-cube skeleton {s:?} is not a declared cube"));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    for c in &ball.cubes {
        let hb = h[c.base];
        for (mask, &v) in c.verts.iter().enumerate() {
            if h[v] != hb + (mask as u32).count_ones() as usize {
                rep.violations.push(format!(
                    "cube at {} over {:?} breaks the height law at mask {mask:b}",
                    c.base, c.polygons
                ));
                break;
            }
        }
    }
    rep
}

/// Height pattern of every declared square and bit-string law of every cube.
pub fn square_pattern_violations(ball: &Ball) -> Vec<String> {
    let h = &ball.heights;
    let mut out = Vec::new();
    for c in &ball.cubes {
        let hb = h[c.base];
        let mut hs: Vec<usize> = c.verts.iter().map(|&v| h[v]).collect();
        if c.dim() == 2 {
            let mut s = hs.clone();
            s.sort_unstable();
            if s != [s[0], s[0] + 1, s[0] + 1, s[0] + 2] {
                out.push(format!("square at {} has heights {s:?}", c.base));
            }
        }
        for (mask, x) in hs.iter_mut().enumerate() {
            if *x != hb + (mask as u32).count_ones() as usize {
                out.push(format!("{}-cube at {} breaks the height law", c.dim(), c.base));
                break;
            }
        }
        let min = c.verts.iter().filter(|&&v| h[v] == hb).count();
        let top = hb + c.dim();
        let max = c.verts.iter().filter(|&&v| h[v] == top).count();
        if min != 1 || max != 1 {
            out.push(format!("{}-cube at {} lacks a unique min or max", c.dim(), c.base));
        }
    }
    for &(a, b) in &ball.edges {
        if h[a] + 1 != h[b] {
            out.push(format!("edge {a}->{b} joins heights {} and {}", h[a], h[b]));
        }
    }
    out
}

/// Largest `r ≤ max` such that every vertex of the complex within distance
/// `r` of `v` lies in the ball.
pub fn interior_radius(ball: &Ball, v: usize, max: usize) -> usize {
    let cx = &ball.complex;
    let mut seen: HashSet<VertexKey> = HashSet::new();
    seen.insert(ball.keys[v].clone());
    let mut layer = VecDeque::from([ball.vertices[v].clone()]);
    for r in 0..max {
        let mut next = VecDeque::new();
        for x in &layer {
            for y in cx.neighbors(x) {
                let k = cx.key(&y);
                if seen.contains(&k) {
                    continue;
                }
                if ball.index_of_key(&k).is_none() {
                    return r;
                }
                seen.insert(k);
                next.push_back(y);
            }
        }
        layer = next;
    }
    max
}

/// Link of `v` is flag up to cliques of size `k_max` (at most 4).
pub fn flag_link_check(ball: &Ball, v: usize) -> Result<bool> {
    let k = ball.limits.k_max.clamp(2, 4);
    if interior_radius(ball, v, k) < k {
        return Err(Error::BoundaryVertex(v));
    }
    Ok(link_is_flag(ball, v, k))
}

/// `interior_radius` for every vertex at once: the ball distance to the
/// nearest vertex with a neighbour outside the ball, capped at `max`.
pub fn interior_radii(ball: &Ball, max: usize) -> Vec<usize> {
    let cx = &ball.complex;
    let deficient: Vec<bool> = ball
        .vertices
        .par_iter()
        .map(|x| cx.neighbors(x).iter().any(|y| ball.index_of(y).is_none()))
        .collect();
    let adj = ball.adjacency();
    let mut dist = vec![max; ball.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (v, &d) in deficient.iter().enumerate() {
        if d {
            dist[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if dist[u] + 1 < dist[w] {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FlagLinkSurvey {
    pub checked: usize,
    pub boundary: usize,
    pub non_flag: Vec<usize>,
    /// Interior vertices where flagness disagrees with the corner search.
    pub mismatches: Vec<usize>,
}

/// Flag-link test at every interior vertex, cross-checked against the roots
/// of the 3-corners found in the ball.
pub fn flag_link_survey(ball: &Ball) -> FlagLinkSurvey {
    let k = ball.limits.k_max.clamp(2, 4);
    let radii = interior_radii(ball, k);
    let at = squares_at(ball);
    let adj = ball.adjacency();
    let roots: HashSet<usize> = find_3corners(ball).iter().map(|c| c.root).collect();
    let mut out = FlagLinkSurvey::default();
    for v in 0..ball.len() {
        if radii[v] < k {
            out.boundary += 1;
            continue;
        }
        out.checked += 1;
        let flag = link_flag_with(ball, &at[v], &adj[v], v, k);
        if !flag {
            out.non_flag.push(v);
        }
        if flag == roots.contains(&v) {
            out.mismatches.push(v);
        }
    }
    out
}

pub(crate) fn link_is_flag(ball: &Ball, v: usize, k: usize) -> bool {
    let at = squares_at(ball);
    link_flag_with(ball, &at[v], &ball.adjacency()[v], v, k)
}

fn link_flag_with(
    ball: &Ball,
    sq: &HashMap<(usize, usize), Vec<(usize, usize)>>,
    nbrs: &[usize],
    v: usize,
    k: usize,
) -> bool {
    let linked = |a: usize, b: usize| sq.contains_key(&(a.min(b), a.max(b)));
    let spans = |set: &[usize]| -> bool {
        ball.cubes_of_dim(set.len()).any(|c| c.verts.contains(&v) && set.iter().all(|x| c.verts.contains(x)))
    };
    for i in 0..nbrs.len() {
        for j in i + 1..nbrs.len() {
            if !linked(nbrs[i], nbrs[j]) {
                continue;
            }
            for t in j + 1..nbrs.len() {
                if !(linked(nbrs[i], nbrs[t]) && linked(nbrs[j], nbrs[t])) {
                    continue;
                }
                let tri = [nbrs[i], nbrs[j], nbrs[t]];
                if k >= 3 && !spans(&tri) {
                    return false;
                }
                if k >= 4 {
                    for u in t + 1..nbrs.len() {
                        let q = nbrs[u];
                        if tri.iter().all(|&x| linked(x, q)) && !spans(&[tri[0], tri[1], tri[2], q]) {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

/// Vertices with a representative containing the central polygon.
pub fn in_spine(cx: &Complex, v: &Vertex) -> bool {
    if v.surface.contains_center() {
        return true;
    }
    let cand = cx.canonical_surface(&v.surface);
    if !cand.contains_center() {
        return false;
    }
    let l = cx.params.frontier(&v.surface).len();
    (0..l).any(|s| {
        RigidMap::new(cx.params, v.surface.clone(), cand.clone(), s).is_ok_and(|tau| {
            let w = at_frame(cx, cand.clone(), &v.marking.compose(&tau.invert()));
            cx.vertex_equal(v, &w).unwrap_or(false)
        })
    })
}

pub fn spine_filter(ball: &Ball) -> Ball {
    let keep: Vec<bool> = ball.vertices.iter().map(|v| in_spine(&ball.complex, v)).collect();
    ball.induced(&keep)
}
