//! A vertex dominating a finite set, the height-increasing paths reaching
//! it, and the collapse of the subcomplex those paths span.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::complex::{Complex, Vertex, VertexJson, VertexKey};
use crate::rigid::ElementKey;
use crate::error::{Error, Result};
use crate::rigid::RigidMap;
use crate::structure::{PolygonId, Surface};

#[derive(Clone, Debug)]
pub struct Domination {
    pub sigma: Surface,
    pub target: Vertex,
    /// One path per input, starting at the input and ending at `target`.
    pub paths: Vec<Vec<Vertex>>,
}

/// Grows `from` to `to` one adjacent polygon at a time.
fn grow(cx: &Complex, from: &Surface, to: &Surface) -> Vec<Surface> {
    let p = &cx.params;
    let mut cur = from.clone();
    let mut out = Vec::new();
    while cur.len() < to.len() {
        let next = p
            .adjacent_polygons(&cur)
            .into_iter()
            .filter(|h| to.contains(h))
            .min()
            .expect("a connected superset has an adjacent polygon");
        cur = cur.with(next);
        out.push(cur.clone());
    }
    out
}

pub fn dominate(cx: &Complex, xs: &[Vertex]) -> Result<Domination> {
    if xs.is_empty() {
        return Err(Error::PreconditionViolated("no vertices to dominate".into()));
    }
    if xs.iter().any(|x| x.family != cx.family || x.marking.params() != cx.params) {
        return Err(Error::FamilyMismatch);
    }
    let p = &cx.params;
    let mut omegas = Vec::new();
    let mut images = Vec::new();
    for x in xs {
        let omega = if x.marking.is_rigid_outside(&x.surface) {
            x.surface.clone()
        } else {
            let supp = x.marking.minimize();
            p.hull(&supp.source().union_polys(&x.surface))?
        };
        images.push(x.marking.image_surface(&omega)?);
        omegas.push(omega);
    }
    let all: Vec<PolygonId> = images.iter().flat_map(|s| s.polygons().to_vec()).collect();
    let sigma = p.hull(&all)?;
    let id = RigidMap::identity(*p);
    let target = cx.vertex(sigma.clone(), id.clone())?;
    let mut paths = Vec::new();
    for ((x, omega), img) in xs.iter().zip(&omegas).zip(&images) {
        let mut path = vec![x.clone()];
        for s in grow(cx, &x.surface, omega) {
            path.push(cx.vertex(s, x.marking.clone())?);
        }
        for s in grow(cx, img, &sigma) {
            path.push(cx.vertex(s, id.clone())?);
        }
        paths.push(path);
    }
    Ok(Domination { sigma, target, paths })
}

/// Consecutive vertices are joined by edges, heights go up by one and the
/// path ends at `target`.
pub fn path_is_valid(cx: &Complex, path: &[Vertex], target: &Vertex) -> bool {
    let Some(last) = path.last() else { return false };
    path.windows(2).all(|w| {
        cx.height(&w[1]) == cx.height(&w[0]) + 1 && cx.edge_exists(&w[0], &w[1]).unwrap_or(false)
    }) && cx.vertex_equal(last, target).unwrap_or(false)
}

#[derive(Clone, Debug, Serialize)]
pub struct RetractionStep {
    pub removed: VertexJson,
    pub height: usize,
    pub replaced_by: Vec<VertexJson>,
    /// The removed vertex and its upward neighbours in X span a cube of X.
    pub spans_cube: bool,
    pub size_after: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Retraction {
    pub sigma: Surface,
    pub initial_size: usize,
    pub steps: Vec<RetractionStep>,
    pub final_vertex: VertexJson,
}

#[derive(Default)]
struct XState {
    parts: HashMap<VertexKey, Vec<VertexKey>>,
    gens: BTreeSet<VertexKey>,
    /// How many generators' intervals contain each vertex of X.
    count: BTreeMap<VertexKey, usize>,
    verts: HashMap<VertexKey, Vertex>,
    /// Every vertex of X carries one of the input markings, so keys repeat.
    keys: HashMap<(Surface, ElementKey), VertexKey>,
}

impl XState {
    fn key(&mut self, cx: &Complex, v: &Vertex) -> VertexKey {
        self.keys
            .entry((v.surface.clone(), v.marking.key()))
            .or_insert_with(|| cx.key(v))
            .clone()
    }

    /// Vertices `[Y, φ]` with `Δ ⊆ Y ⊆ φ^{-1}(Σ)`: the part of `X` generated by `x`.
    fn interval(&mut self, cx: &Complex, x: &Vertex, sigma: &Surface) -> Result<Vec<VertexKey>> {
        let inv = x.marking.invert();
        if !inv.is_rigid_outside(sigma) {
            return Err(Error::NotDominated);
        }
        let w = inv.image_surface(sigma)?;
        if !x.surface.is_subset(&w) {
            return Err(Error::NotDominated);
        }
        let mut seen: BTreeSet<Surface> = BTreeSet::new();
        let mut stack = vec![x.surface.clone()];
        let mut out = BTreeSet::new();
        while let Some(y) = stack.pop() {
            if !seen.insert(y.clone()) {
                continue;
            }
            for h in cx.params.adjacent_polygons(&y) {
                if w.contains(&h) {
                    stack.push(y.with(h));
                }
            }
            let v = Vertex {
                surface: y,
                marking: x.marking.clone(),
                family: cx.family,
            };
            let k = self.key(cx, &v);
            self.verts.entry(k.clone()).or_insert(v);
            out.insert(k);
        }
        Ok(out.into_iter().collect())
    }

    fn add_gen(&mut self, cx: &Complex, sigma: &Surface, v: &Vertex) -> Result<()> {
        let k = self.key(cx, v);
        if !self.parts.contains_key(&k) {
            let keys = self.interval(cx, v, sigma)?;
            self.parts.insert(k.clone(), keys);
        }
        if self.gens.insert(k.clone()) {
            for k2 in &self.parts[&k] {
                *self.count.entry(k2.clone()).or_default() += 1;
            }
        }
        Ok(())
    }
}

/// Collapses `X(S, Σ)` onto `[Σ, id]`, one minimal vertex at a time.
pub fn retract_x(cx: &Complex, xs: &[Vertex], sigma: &Surface) -> Result<Retraction> {
    let mut st = XState::default();
    for x in xs {
        st.add_gen(cx, sigma, x)?;
    }
    let initial_size = st.count.len();
    let mut steps = Vec::new();
    while st.count.len() > 1 {
        let (xk, xv) = st.count
            .keys()
            .map(|k| (k, &st.verts[k]))
            .min_by_key(|(k, v)| (cx.height(v), (*k).clone()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .expect("nonempty");
        if !st.gens.contains(&xk) {
            return Err(Error::PreconditionViolated(
                "a minimal vertex of X is not one of the generators".into(),
            ));
        }
        // x generates its own interval, so [Y ∪ H, φ] lies in X exactly
        // when H ⊆ φ^{-1}(Σ).
        let w = xv.marking.invert().image_surface(sigma)?;
        let ups: Vec<(PolygonId, Vertex)> = cx
            .upward_neighbors(&xv)
            .into_iter()
            .filter(|(h, _)| w.contains(h))
            .collect();
        let hs: Vec<PolygonId> = ups.iter().map(|(h, _)| h.clone()).collect();
        let spans_cube = (0u32..1 << hs.len()).all(|mask| {
            let mut s = xv.surface.clone();
            for (i, h) in hs.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    s = s.with(h.clone());
                }
            }
            let v = Vertex {
                surface: s,
                marking: xv.marking.clone(),
                family: cx.family,
            };
            let k = st.key(cx, &v);
            st.count.contains_key(&k)
        });
        let before: BTreeSet<VertexKey> = st.count.keys().cloned().collect();
        st.gens.remove(&xk);
        for k2 in &st.parts[&xk] {
            let c = st.count.get_mut(k2).expect("counted");
            *c -= 1;
            if *c == 0 {
                st.count.remove(k2);
            }
        }
        for (_, v) in &ups {
            st.add_gen(cx, sigma, v)?;
        }
        let removed: Vec<&VertexKey> = before.iter().filter(|k| !st.count.contains_key(*k)).collect();
        if removed != [&xk] || st.count.len() + 1 != before.len() {
            return Err(Error::PreconditionViolated(
                "a retraction step did not remove exactly the minimal vertex".into(),
            ));
        }
        steps.push(RetractionStep {
            removed: cx.to_json(&xv),
            height: cx.height(&xv),
            replaced_by: ups.iter().map(|(_, v)| cx.to_json(v)).collect(),
            spans_cube,
            size_after: st.count.len(),
        });
    }
    let (last_key, _) = st.count.into_iter().next().ok_or(Error::NotDominated)?;
    let last = st.verts[&last_key].clone();
    let target = cx.vertex(sigma.clone(), RigidMap::identity(cx.params))?;
    if !cx.vertex_equal(&last, &target)? {
        return Err(Error::NotDominated);
    }
    Ok(Retraction {
        sigma: sigma.clone(),
        initial_size,
        steps,
        final_vertex: cx.to_json(&target),
    })
}
