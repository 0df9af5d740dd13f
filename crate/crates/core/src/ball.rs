//! Finite portions of a complex: deduplicated vertex pools with their edges
//! and product-form cubes.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{Complex, Family, Vertex, VertexJson, VertexKey};
use crate::error::{Error, Result};
use crate::rigid::{punctures, ray_shift, rotation, RigidMap};
use crate::structure::{Params, PolygonId, Surface};

pub const DEFAULT_BUDGET: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallLimits {
    pub height_max: usize,
    pub depth: usize,
    pub word_len: usize,
    pub k_max: usize,
}

impl BallLimits {
    pub fn new(height_max: usize, depth: usize, word_len: usize, k_max: usize) -> Self {
        BallLimits {
            height_max,
            depth,
            word_len,
            k_max,
        }
    }
}

/// A product-form cube; `verts[mask]` is `[Σ ∪ ⋃_{i∈mask} H_i, φ]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cube {
    pub base: usize,
    pub polygons: Vec<PolygonId>,
    pub verts: Vec<usize>,
}

impl Cube {
    pub fn dim(&self) -> usize {
        self.polygons.len()
    }
}

#[derive(Clone, Debug)]
pub struct Ball {
    pub complex: Complex,
    pub limits: BallLimits,
    pub vertices: Vec<Vertex>,
    pub keys: Vec<VertexKey>,
    pub heights: Vec<usize>,
    /// Oriented from the lower to the higher endpoint.
    pub edges: Vec<(usize, usize)>,
    /// Cubes of dimension 2..=k_max.
    pub cubes: Vec<Cube>,
    index: HashMap<VertexKey, usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallJson {
    pub params: Params,
    pub family: Family,
    pub limits: BallLimits,
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<(usize, usize)>,
    pub cubes: Vec<Cube>,
}

/// Rotations of supports with at most two polygons, with either puncture
/// matching, plus all ray shifts and their inverses, minimized and
/// deduplicated.
pub fn generators(params: Params, depth: usize) -> Vec<RigidMap> {
    let mut out: BTreeMap<_, RigidMap> = BTreeMap::new();
    let id = RigidMap::identity(params);
    for gamma in params.surfaces_within(depth, 2) {
        let l = params.frontier(&gamma).len() as i64;
        let ps = punctures(&params, &gamma);
        for s in 0..l {
            let Ok(r) = rotation(params, &gamma, s) else { continue };
            let mut variants = vec![r.clone()];
            if ps.len() == 2 {
                let swap = [(ps[0].clone(), ps[1].clone()), (ps[1].clone(), ps[0].clone())];
                variants.extend(r.with_punctures(&swap));
            }
            for g in variants {
                let g = g.minimize();
                if g != id {
                    out.insert(g.key(), g);
                }
            }
        }
    }
    if params.m >= 2 {
        for i in 1..=params.m {
            for o in 1..=params.m {
                if i != o {
                    let g = ray_shift(params, i, o).expect("valid branches").minimize();
                    let gi = g.invert().minimize();
                    out.insert(g.key(), g);
                    out.insert(gi.key(), gi);
                }
            }
        }
    }
    out.into_values().collect()
}

/// All distinct products of at most `len` generators.
pub fn words(params: Params, gens: &[RigidMap], len: usize, cap: usize) -> Result<Vec<RigidMap>> {
    let id = RigidMap::identity(params);
    let mut all: BTreeMap<_, RigidMap> = BTreeMap::new();
    all.insert(id.key(), id.clone());
    let mut layer = vec![id];
    for _ in 0..len {
        let next: Vec<RigidMap> = layer
            .par_iter()
            .flat_map_iter(|w| gens.iter().map(move |g| g.compose(w).minimize()))
            .collect();
        let mut fresh = Vec::new();
        for g in next {
            if !all.contains_key(&g.key()) {
                all.insert(g.key(), g.clone());
                fresh.push(g);
            }
        }
        if all.len() > cap {
            return Err(Error::LimitTooLarge(format!(
                "more than {cap} distinct marking words"
            )));
        }
        fresh.sort_by_key(|g| g.key());
        layer = fresh;
    }
    Ok(all.into_values().collect())
}

/// Vertex budget from `ARBOCUBE_BUDGET`, falling back to the default.
pub fn budget_from_env() -> usize {
    std::env::var("ARBOCUBE_BUDGET")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

/// Surfaces allowed as seeds: within `depth`, height at most `height_max`.
pub fn seed_surfaces(cx: &Complex, height_max: usize, depth: usize) -> Vec<Surface> {
    let p = &cx.params;
    let max_size = match cx.family {
        Family::C => height_max,
        Family::D => height_max + 1,
    };
    p.surfaces_within(depth, max_size.max(1))
        .into_iter()
        .filter(|s| cx.family == Family::C || s.contains_center())
        .filter(|s| p.surface_height(s) <= height_max && p.surface_height(s) >= usize::from(cx.family == Family::C))
        .collect()
}

pub fn build_ball(cx: &Complex, limits: BallLimits, budget: usize) -> Result<Ball> {
    if limits.height_max < 1 || limits.depth < 1 || limits.k_max < 1 {
        return Err(Error::InvalidParams("limits must be ≥ 1".into()));
    }
    let gens = generators(cx.params, limits.depth);
    let ws = words(cx.params, &gens, limits.word_len, budget.saturating_mul(4))?;
    let surfaces = seed_surfaces(cx, limits.height_max, limits.depth);
    let total = surfaces.len().saturating_mul(ws.len());
    if total > budget.saturating_mul(50) {
        return Err(Error::LimitTooLarge(format!(
            "{total} seed pairs exceed the budget of {budget} vertices"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..surfaces.len())
        .flat_map(|i| (0..ws.len()).map(move |j| (i, j)))
        .collect();
    let keyed: Vec<(VertexKey, usize, usize)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let v = Vertex {
                surface: surfaces[i].clone(),
                marking: ws[j].clone(),
                family: cx.family,
            };
            (cx.key(&v), i, j)
        })
        .collect();
    let mut pool: BTreeMap<VertexKey, (usize, usize)> = BTreeMap::new();
    for (k, i, j) in keyed {
        pool.entry(k).or_insert((i, j));
        if pool.len() > budget {
            return Err(Error::LimitTooLarge(format!(
                "vertex pool exceeds the budget of {budget}"
            )));
        }
    }
    let vertices: Vec<Vertex> = pool
        .values()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&&(i, j)| {
            cx.representative(&Vertex {
                surface: surfaces[i].clone(),
                marking: ws[j].clone(),
                family: cx.family,
            })
        })
        .collect();
    let keys: Vec<VertexKey> = pool.into_keys().collect();
    Ok(Ball::assemble(*cx, limits, vertices, keys))
}

/// All vertices within graph distance `radius` of `center`.
pub fn neighborhood_ball(cx: &Complex, center: &Vertex, radius: usize, k_max: usize, budget: usize) -> Result<Ball> {
    let mut seen: HashMap<VertexKey, Vertex> = HashMap::new();
    let c = cx.representative(center);
    seen.insert(cx.key(&c), c.clone());
    let mut layer = vec![c];
    for _ in 0..radius {
        let found: Vec<Vec<Vertex>> = layer.par_iter().map(|v| cx.neighbors(v)).collect();
        let mut next = Vec::new();
        for v in found.into_iter().flatten() {
            let k = cx.key(&v);
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(k) {
                let r = cx.representative(&v);
                e.insert(r.clone());
                next.push(r);
            }
        }
        if seen.len() > budget {
            return Err(Error::LimitTooLarge(format!(
                "neighbourhood exceeds the budget of {budget}"
            )));
        }
        layer = next;
    }
    let mut entries: Vec<(VertexKey, Vertex)> = seen.into_iter().collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let (keys, vertices): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
    let height_max = vertices.iter().map(|v| cx.height(v)).max().unwrap_or(0);
    let limits = BallLimits::new(height_max, 0, radius, k_max);
    Ok(Ball::assemble(*cx, limits, vertices, keys))
}

impl Ball {
    /// Builds edges and product cubes for a pool sorted by key.
    pub fn assemble(cx: Complex, limits: BallLimits, vertices: Vec<Vertex>, keys: Vec<VertexKey>) -> Ball {
        let index: HashMap<VertexKey, usize> = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        let heights: Vec<usize> = vertices.iter().map(|v| cx.height(v)).collect();
        let up: Vec<Vec<(PolygonId, usize)>> = vertices
            .par_iter()
            .map(|v| {
                cx.upward_neighbors(v)
                    .into_iter()
                    .filter_map(|(h, w)| index.get(&cx.key(&w)).map(|&j| (h, j)))
                    .collect()
            })
            .collect();
        let mut edges: Vec<(usize, usize)> = up
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().map(move |&(_, j)| (i, j)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let cubes: Vec<Cube> = (0..vertices.len())
            .into_par_iter()
            .flat_map_iter(|i| cubes_at(&cx, &vertices, &up, i, limits.k_max))
            .collect();
        Ball {
            complex: cx,
            limits,
            vertices,
            keys,
            heights,
            edges,
            cubes,
            index,
        }
    }

    /// A ball from explicit graph data, used for fixtures and loaded files.
    pub fn from_parts(
        cx: Complex,
        limits: BallLimits,
        vertices: Vec<Vertex>,
        edges: Vec<(usize, usize)>,
        cubes: Vec<Cube>,
    ) -> Ball {
        let keys: Vec<VertexKey> = vertices.par_iter().map(|v| cx.key(v)).collect();
        let heights = vertices.iter().map(|v| cx.height(v)).collect();
        let mut index = HashMap::new();
        for (i, k) in keys.iter().enumerate() {
            index.entry(k.clone()).or_insert(i);
        }
        Ball {
            complex: cx,
            limits,
            vertices,
            keys,
            heights,
            edges,
            cubes,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        self.index.get(&self.complex.key(v)).copied()
    }

    pub fn index_of_key(&self, k: &VertexKey) -> Option<usize> {
        self.index.get(k).copied()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        adj
    }

    pub fn edge_set(&self) -> HashSet<(usize, usize)> {
        self.edges
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect()
    }

    pub fn cubes_of_dim(&self, k: usize) -> impl Iterator<Item = &Cube> {
        self.cubes.iter().filter(move |c| c.dim() == k)
    }

    /// Vertex sets of declared cubes of dimension `k`, sorted.
    pub fn cube_vertex_sets(&self, k: usize) -> HashSet<Vec<usize>> {
        self.cubes_of_dim(k)
            .map(|c| {
                let mut v = c.verts.clone();
                v.sort_unstable();
                v
            })
            .collect()
    }

    pub fn to_json(&self) -> BallJson {
        BallJson {
            params: self.complex.params,
            family: self.complex.family,
            limits: self.limits,
            vertices: self.vertices.iter().map(|v| self.complex.to_json(v)).collect(),
            edges: self.edges.clone(),
            cubes: self.cubes.clone(),
        }
    }

    pub fn from_json(j: &BallJson) -> Result<Ball> {
        if j.params.flavor != j.family.flavor() {
            return Err(Error::FamilyMismatch);
        }
        let cx = Complex::new(j.family, j.params.n, j.params.m)?;
        let vertices = j
            .vertices
            .iter()
            .map(|v| cx.from_json(v))
            .collect::<Result<Vec<_>>>()?;
        let n = vertices.len();
        let bad = j.edges.iter().any(|&(a, b)| a >= n || b >= n)
            || j.cubes.iter().any(|c| {
                c.base >= n || c.verts.iter().any(|&v| v >= n) || c.verts.len() != 1usize << c.polygons.len()
            });
        if bad {
            return Err(Error::Parse("vertex index out of range".into()));
        }
        Ok(Ball::from_parts(cx, j.limits, vertices, j.edges.clone(), j.cubes.clone()))
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph ball {\n");
        for (i, h) in self.heights.iter().enumerate() {
            let _ = writeln!(s, "  {i} [label=\"{i}:{h}\"];");
        }
        for &(a, b) in &self.edges {
            let (lo, hi) = if self.heights[a] <= self.heights[b] { (a, b) } else { (b, a) };
            let _ = writeln!(s, "  {lo} -> {hi};");
        }
        s.push_str("}\n");
        s
    }

    /// Induced sub-ball on the kept vertices.
    pub fn induced(&self, keep: &[bool]) -> Ball {
        let mut map = vec![usize::MAX; self.len()];
        let mut vertices = Vec::new();
        let mut keys = Vec::new();
        for i in 0..self.len() {
            if keep[i] {
                map[i] = vertices.len();
                vertices.push(self.vertices[i].clone());
                keys.push(self.keys[i].clone());
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| keep[a] && keep[b])
            .map(|&(a, b)| (map[a], map[b]))
            .collect();
        let cubes = self
            .cubes
            .iter()
            .filter(|c| c.verts.iter().all(|&v| keep[v]))
            .map(|c| Cube {
                base: map[c.base],
                polygons: c.polygons.clone(),
                verts: c.verts.iter().map(|&v| map[v]).collect(),
            })
            .collect();
        let heights = vertices.iter().map(|v| self.complex.height(v)).collect();
        let index = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        Ball {
            complex: self.complex,
            limits: self.limits,
            vertices,
            keys,
            heights,
            edges,
            cubes,
            index,
        }
    }
}

/// Image of `p` under a minimized element that is rigid on `p`.
pub(crate) fn image_of(g: &RigidMap, p: &PolygonId) -> PolygonId {
    if g.source().contains(p) {
        debug_assert_eq!(g.source().len(), 1);
        g.target().top().clone()
    } else {
        g.apply_outside(p)
    }
}

/// Product cubes based at vertex `i`, found by walking up through stored
/// representatives and transporting polygons between their frames.
fn cubes_at(cx: &Complex, vertices: &[Vertex], up: &[Vec<(PolygonId, usize)>], i: usize, k_max: usize) -> Vec<Cube> {
    let hs: Vec<PolygonId> = up[i].iter().map(|(h, _)| h.clone()).collect();
    let k = hs.len();
    if k < 2 || k_max < 2 || k > 24 {
        return Vec::new();
    }
    let base = &vertices[i];
    // vertex index for each subset mask, plus the frame change into it
    let mut found: HashMap<u32, usize> = HashMap::new();
    let mut frames: HashMap<u32, RigidMap> = HashMap::new();
    found.insert(0, i);
    for (b, (_, j)) in up[i].iter().enumerate() {
        found.insert(1 << b, *j);
    }
    let frame = |mask: u32, frames: &mut HashMap<u32, RigidMap>, found: &HashMap<u32, usize>| -> RigidMap {
        frames
            .entry(mask)
            .or_insert_with(|| {
                vertices[found[&mask]]
                    .marking
                    .invert()
                    .compose(&base.marking)
                    .minimize()
            })
            .clone()
    };
    let mut out = Vec::new();
    let mut layer: Vec<u32> = (0..k).map(|b| 1u32 << b).collect();
    for dim in 2..=k_max.min(k) {
        let mut next = Vec::new();
        for &mask in &layer {
            let hi = 32 - mask.leading_zeros() as usize;
            for c in hi..k {
                let full = mask | (1 << c);
                if (0..k).any(|b| full & (1 << b) != 0 && !found.contains_key(&(full & !(1 << b)))) {
                    continue;
                }
                let tau = frame(mask, &mut frames, &found);
                let img = image_of(&tau, &hs[c]);
                let j = found[&mask];
                let Some(&(_, top)) = up[j].iter().find(|(h, _)| *h == img) else {
                    continue;
                };
                found.insert(full, top);
                next.push(full);
                let bits: Vec<usize> = (0..k).filter(|b| full & (1 << b) != 0).collect();
                let verts = (0u32..(1 << dim))
                    .map(|sub| {
                        let m = bits
                            .iter()
                            .enumerate()
                            .filter(|(t, _)| sub & (1 << t) != 0)
                            .fold(0u32, |acc, (_, b)| acc | (1 << b));
                        found[&m]
                    })
                    .collect();
                out.push(Cube {
                    base: i,
                    polygons: bits.iter().map(|&b| hs[b].clone()).collect(),
                    verts,
                });
            }
        }
        layer = next;
    }
    let _ = cx;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_bound_zero_counts_surfaces() {
        let d = Complex::new(Family::D, 2, 4).unwrap();
        let b = build_ball(&d, BallLimits::new(2, 2, 0, 4), DEFAULT_BUDGET).unwrap();
        assert_eq!(b.len(), 19);
        assert!(b.edges.iter().all(|&(a, c)| b.heights[a] + 1 == b.heights[c]));
    }

    #[test]
    fn ray_complex_is_a_path() {
        let c = Complex::new(Family::C, 1, 1).unwrap();
        let b = build_ball(&c, BallLimits::new(3, 3, 0, 4), DEFAULT_BUDGET).unwrap();
        let mut up = vec![0; b.len()];
        for &(lo, _) in &b.edges {
            up[lo] += 1;
        }
        // every surface of a ray has at most two frontier arcs
        assert!(up.iter().all(|&d| d <= 2));
        assert_eq!(b.cubes_of_dim(3).count(), 0);
    }

    #[test]
    fn cube_examples() {
        let d = Complex::new(Family::D, 2, 4).unwrap();
        let b = build_ball(&d, BallLimits::new(4, 1, 0, 4), DEFAULT_BUDGET).unwrap();
        let m = b.index_of(&d.base(d.surface(&["M"]).unwrap()).unwrap()).unwrap();
        let sq = b
            .cubes
            .iter()
            .find(|c| c.base == m && c.polygons.len() == 2 && c.polygons[0].to_string() == "1" && c.polygons[1].to_string() == "2")
            .unwrap();
        let hs: Vec<usize> = sq.verts.iter().map(|&v| b.heights[v]).collect();
        assert_eq!(hs, vec![0, 1, 1, 2]);
        assert_eq!(b.cubes_of_dim(4).filter(|c| c.base == m).count(), 1);
        for c in b.cubes_of_dim(3) {
            let mut hs: Vec<usize> = c.verts.iter().map(|&v| b.heights[v]).collect();
            hs.sort();
            let h = hs[0];
            assert_eq!(hs, vec![h, h + 1, h + 1, h + 1, h + 2, h + 2, h + 2, h + 3]);
        }
    }

    #[test]
    fn deterministic_and_round_trips() {
        let d = Complex::new(Family::D, 2, 2).unwrap();
        let lim = BallLimits::new(2, 2, 1, 3);
        let a = build_ball(&d, lim, DEFAULT_BUDGET).unwrap();
        let b = build_ball(&d, lim, DEFAULT_BUDGET).unwrap();
        let ja = serde_json::to_string(&a.to_json()).unwrap();
        assert_eq!(ja, serde_json::to_string(&b.to_json()).unwrap());
        let back = Ball::from_json(&serde_json::from_str(&ja).unwrap()).unwrap();
        assert_eq!(back.keys, a.keys);
        assert!(a.to_dot().starts_with("digraph ball {"));
    }

    #[test]
    fn budget_guard() {
        let d = Complex::new(Family::D, 2, 4).unwrap();
        let e = build_ball(&d, BallLimits::new(2, 2, 0, 4), 5).unwrap_err();
        assert!(matches!(e, Error::LimitTooLarge(_)));
    }
}
