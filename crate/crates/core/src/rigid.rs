//! Braid-free asymptotically rigid maps.
//!
//! An element is a pair of supports of equal height together with a cyclic
//! rotation between their frontier orders and a bijection between their
//! punctures. Outside the source support it acts polygon by polygon: the
//! branch hanging off each source arc is carried rigidly onto the branch
//! hanging off the image arc. Braiding inside a support is forgotten, but
//! where each puncture goes is kept.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{Params, PolygonId, Surface};

#[derive(Clone, Debug)]
pub struct RigidMap {
    params: Params,
    source: Surface,
    target: Surface,
    offset: usize,
    /// `perm[i]` is the index among the target's punctured polygons of the
    /// image of the source's `i`-th punctured polygon.
    perm: Vec<u8>,
    fa: Vec<PolygonId>,
    fb: Vec<PolygonId>,
}

/// Punctured polygons of `s`, in surface order.
pub fn punctures(params: &Params, s: &Surface) -> Vec<PolygonId> {
    s.iter().filter(|p| params.is_punctured(p)).cloned().collect()
}

/// Hashable identity of an element in a fixed presentation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementKey {
    pub source: Surface,
    pub target: Surface,
    pub offset: usize,
    pub perm: Vec<u8>,
}

impl PartialEq for RigidMap {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.offset == other.offset
            && self.perm == other.perm
    }
}

impl Eq for RigidMap {}

/// Serialized form: supports plus the arc association list in source order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidMapJson {
    pub source: Vec<PolygonId>,
    pub target: Vec<PolygonId>,
    pub arcs: Vec<(PolygonId, PolygonId)>,
    /// Puncture bijection; when absent, punctures map in surface order.
    #[serde(default)]
    pub punctures: Vec<(PolygonId, PolygonId)>,
}

impl RigidMap {
    /// Builds an element and checks heights, frontier sizes and branch shapes.
    /// Punctures are matched in surface order; see [`RigidMap::with_punctures`].
    pub fn new(params: Params, source: Surface, target: Surface, offset: usize) -> Result<Self> {
        let g = Self::raw(params, source, target, offset)?;
        if !g.is_valid() {
            return Err(Error::InvalidElement(format!(
                "{} -> {} with offset {} does not match branch shapes",
                g.source, g.target, g.offset
            )));
        }
        Ok(g)
    }

    pub(crate) fn raw(params: Params, source: Surface, target: Surface, offset: usize) -> Result<Self> {
        let fa = params.frontier(&source);
        let fb = params.frontier(&target);
        if fa.len() != fb.len() {
            return Err(Error::InvalidElement(format!(
                "frontier sizes differ: {} vs {}",
                fa.len(),
                fb.len()
            )));
        }
        let offset = offset % fa.len();
        let k = punctures(&params, &source).len();
        Ok(RigidMap {
            params,
            source,
            target,
            offset,
            perm: (0..k as u8).collect(),
            fa,
            fb,
        })
    }

    /// The same arc data with the given puncture images; unlisted punctures
    /// take the remaining images in surface order.
    pub fn with_punctures(&self, pairs: &[(PolygonId, PolygonId)]) -> Result<RigidMap> {
        let ps = punctures(&self.params, &self.source);
        let pt = punctures(&self.params, &self.target);
        let mut perm: Vec<Option<u8>> = vec![None; ps.len()];
        let mut used = vec![false; pt.len()];
        for (a, b) in pairs {
            let bad = || Error::InvalidElement(format!("puncture pair {a} -> {b} does not fit the supports"));
            let i = ps.iter().position(|x| x == a).ok_or_else(bad)?;
            let j = pt.iter().position(|x| x == b).ok_or_else(bad)?;
            if perm[i].is_some() || used[j] {
                return Err(bad());
            }
            perm[i] = Some(j as u8);
            used[j] = true;
        }
        let mut free = (0..pt.len()).filter(|&j| !used[j]);
        let perm = perm
            .into_iter()
            .map(|x| x.unwrap_or_else(|| free.next().expect("equal puncture counts") as u8))
            .collect();
        Ok(RigidMap { perm, ..self.clone() })
    }

    /// Puncture bijection as (source polygon, target polygon) pairs.
    pub fn puncture_map(&self) -> Vec<(PolygonId, PolygonId)> {
        let ps = punctures(&self.params, &self.source);
        let pt = punctures(&self.params, &self.target);
        ps.into_iter().zip(&self.perm).map(|(a, &j)| (a, pt[j as usize].clone())).collect()
    }

    /// Image of a punctured source polygon's puncture.
    pub fn map_puncture(&self, p: &PolygonId) -> Option<PolygonId> {
        self.puncture_map().into_iter().find(|(a, _)| a == p).map(|(_, b)| b)
    }

    pub fn identity(params: Params) -> Self {
        let m = params.single(PolygonId::center());
        Self::raw(params, m.clone(), m, 0).expect("identity")
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn source(&self) -> &Surface {
        &self.source
    }

    pub fn target(&self) -> &Surface {
        &self.target
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn key(&self) -> ElementKey {
        ElementKey {
            source: self.source.clone(),
            target: self.target.clone(),
            offset: self.offset,
            perm: self.perm.clone(),
        }
    }

    pub fn is_valid(&self) -> bool {
        let p = &self.params;
        if p.surface_height(&self.source) != p.surface_height(&self.target) {
            return false;
        }
        let l = self.fa.len();
        self.fa.iter().enumerate().all(|(i, a)| {
            p.shape(&self.source, a) == p.shape(&self.target, &self.fb[(i + self.offset) % l])
        })
    }

    pub fn source_frontier(&self) -> &[PolygonId] {
        &self.fa
    }

    pub fn target_frontier(&self) -> &[PolygonId] {
        &self.fb
    }

    pub fn arc_map(&self) -> Vec<(PolygonId, PolygonId)> {
        let l = self.fa.len();
        (0..l)
            .map(|i| (self.fa[i].clone(), self.fb[(i + self.offset) % l].clone()))
            .collect()
    }

    pub fn map_arc(&self, a: &PolygonId) -> PolygonId {
        let i = self
            .fa
            .iter()
            .position(|x| x == a)
            .expect("arc on the source frontier");
        self.fb[(i + self.offset) % self.fa.len()].clone()
    }

    /// The source arc whose exterior branch contains `p` (`p` outside the source).
    fn branch_arc(&self, p: &PolygonId) -> PolygonId {
        for k in (0..p.depth()).rev() {
            if self.source.contains(&p.prefix(k)) {
                return p.prefix(k + 1);
            }
        }
        self.source.top().clone()
    }

    /// Image of a polygon outside the source support.
    pub fn apply_outside(&self, p: &PolygonId) -> PolygonId {
        debug_assert!(!self.source.contains(p));
        let params = &self.params;
        let a = self.branch_arc(p);
        let b = self.map_arc(&a);
        let (ia, oa) = params.arc_ends(&self.source, &a);
        let (ib, ob) = params.arc_ends(&self.target, &b);
        let path = params.tree_path(&oa, p);
        let (mut prev, mut cur) = (ia, oa);
        let (mut pv, mut cv) = (ib, ob);
        for next in &path[1..] {
            let d = params.degree(&cur);
            let i = (params.neighbor_index(&cur, next) + d - params.neighbor_index(&cur, &prev)) % d;
            let dv = params.degree(&cv);
            let nv = params.neighbor_at(&cv, (params.neighbor_index(&cv, &pv) + i) % dv);
            prev = cur;
            cur = next.clone();
            pv = cv;
            cv = nv;
        }
        cv
    }

    /// Image of `p` under the exterior action; `p` must lie outside the minimal support.
    pub fn apply_polygon(&self, p: &PolygonId) -> Result<PolygonId> {
        self.params.check(p)?;
        let g = self.minimize();
        if g.source.contains(p) {
            return Err(Error::InsideSupport(p.to_string()));
        }
        Ok(g.apply_outside(p))
    }

    fn map_edge_image(&self, images: &BTreeMap<PolygonId, PolygonId>, big: &Surface, a: &PolygonId) -> PolygonId {
        if self.fa.contains(a) {
            return self.map_arc(a);
        }
        let (u, v) = self.params.arc_ends(big, a);
        let fu = images.get(&u).expect("inside endpoint is a new polygon");
        let fv = self.apply_outside(&v);
        if fv.depth() > fu.depth() {
            fv
        } else {
            fu.clone()
        }
    }

    /// Same element presented with a larger source support.
    pub fn enlarge(&self, big: &Surface) -> Result<RigidMap> {
        if !self.source.is_subset(big) {
            return Err(Error::NotContaining);
        }
        if big.len() == self.source.len() {
            return Ok(self.clone());
        }
        let images: BTreeMap<PolygonId, PolygonId> = big
            .iter()
            .filter(|p| !self.source.contains(p))
            .map(|p| (p.clone(), self.apply_outside(p)))
            .collect();
        let mut tpolys: Vec<PolygonId> = self.target.polygons().to_vec();
        tpolys.extend(images.values().cloned());
        tpolys.sort();
        tpolys.dedup();
        let target = Surface::from_sorted_unchecked(tpolys);
        let fa = self.params.frontier(big);
        let fb = self.params.frontier(&target);
        let first = self.map_edge_image(&images, big, &fa[0]);
        let offset = fb.iter().position(|x| *x == first).expect("image arc on target frontier");
        let mut pairs = self.puncture_map();
        pairs.extend(
            images
                .iter()
                .filter(|(p, _)| self.params.is_punctured(p))
                .map(|(p, q)| (p.clone(), q.clone())),
        );
        let g = RigidMap {
            params: self.params,
            source: big.clone(),
            target,
            offset,
            perm: Vec::new(),
            fa,
            fb,
        };
        let g = g.with_punctures(&pairs).expect("rigid images keep punctures");
        #[cfg(debug_assertions)]
        for a in g.fa.iter().skip(1) {
            debug_assert_eq!(self.map_edge_image(&images, big, a), g.map_arc(a));
        }
        Ok(g)
    }

    pub fn invert(&self) -> RigidMap {
        let l = self.fa.len();
        let mut perm = vec![0u8; self.perm.len()];
        for (i, &j) in self.perm.iter().enumerate() {
            perm[j as usize] = i as u8;
        }
        RigidMap {
            params: self.params,
            source: self.target.clone(),
            target: self.source.clone(),
            offset: (l - self.offset) % l,
            perm,
            fa: self.fb.clone(),
            fb: self.fa.clone(),
        }
    }

    /// `self ∘ f`: apply `f` first, then `self`.
    pub fn compose(&self, f: &RigidMap) -> RigidMap {
        let p = &self.params;
        let u = p
            .hull(&f.target.union_polys(&self.source))
            .expect("nonempty");
        let f2 = f.invert().enlarge(&u).expect("hull contains").invert();
        let g2 = self.enlarge(&u).expect("hull contains");
        // f2: V -> U and g2: U -> W share the frontier order of U
        let l = f2.fa.len();
        let offset = (f2.offset + g2.offset) % l;
        let perm = f2.perm.iter().map(|&j| g2.perm[j as usize]).collect();
        RigidMap {
            params: self.params,
            source: f2.source,
            target: g2.target,
            offset,
            perm,
            fa: f2.fa,
            fb: g2.fb,
        }
    }

    pub fn equal(&self, other: &RigidMap) -> bool {
        let u = self
            .params
            .hull(&self.source.union_polys(&other.source))
            .expect("nonempty");
        self.enlarge(&u).unwrap() == other.enlarge(&u).unwrap()
    }

    /// Removes the leaf `h` of the source if the element is rigid on it.
    fn peel(&self, h: &PolygonId) -> Option<RigidMap> {
        let p = &self.params;
        if self.source.len() < 2 {
            return None;
        }
        let a2 = self.source.without(h);
        let inner: Vec<&PolygonId> = p
            .neighbors(h)
            .iter()
            .filter_map(|q| a2.polygons().iter().find(|x| *x == q))
            .collect();
        if inner.len() != 1 || !p.is_admissible(a2.polygons()).unwrap_or(false) {
            return None;
        }
        let h_arcs: Vec<&PolygonId> = self
            .fa
            .iter()
            .filter(|a| p.arc_ends(&self.source, a).0 == *h)
            .collect();
        let mut hp: Option<PolygonId> = None;
        for a in &h_arcs {
            let ins = p.arc_ends(&self.target, &self.map_arc(a)).0;
            match &hp {
                None => hp = Some(ins),
                Some(x) if *x == ins => {}
                _ => return None,
            }
        }
        let hp = hp?;
        if p.degree(&hp) != p.degree(h) || p.is_punctured(&hp) != p.is_punctured(h) {
            return None;
        }
        if p.is_punctured(h) && self.map_puncture(h).as_ref() != Some(&hp) {
            return None;
        }
        let hp_count = self
            .fb
            .iter()
            .filter(|b| p.arc_ends(&self.target, b).0 == hp)
            .count();
        if hp_count != h_arcs.len() {
            return None;
        }
        let b2 = self.target.without(&hp);
        if b2.is_empty() || !p.is_admissible(b2.polygons()).unwrap_or(false) {
            return None;
        }
        let q = inner[0];
        let e_h = if q.depth() < h.depth() { h.clone() } else { q.clone() };
        let qp = p
            .neighbors(&hp)
            .into_iter()
            .find(|x| b2.contains(x))?;
        let e_hp = if qp.depth() < hp.depth() { hp.clone() } else { qp };
        let fa2 = p.frontier(&a2);
        let fb2 = p.frontier(&b2);
        if fa2.len() != fb2.len() {
            return None;
        }
        let ia = fa2.iter().position(|x| *x == e_h)?;
        let ib = fb2.iter().position(|x| *x == e_hp)?;
        let l = fa2.len();
        let pairs: Vec<(PolygonId, PolygonId)> = self.puncture_map().into_iter().filter(|(a, _)| a != h).collect();
        let cand = RigidMap {
            params: self.params,
            source: a2,
            target: b2,
            offset: (ib + l - ia) % l,
            perm: Vec::new(),
            fa: fa2,
            fb: fb2,
        }
        .with_punctures(&pairs)
        .ok()?;
        if !cand.is_valid() {
            return None;
        }
        let back = cand.enlarge(&self.source).ok()?;
        (back == *self).then_some(cand)
    }

    /// Peels until no leaf can be removed; single-polygon results are
    /// re-expressed on the central polygon.
    pub fn minimize(&self) -> RigidMap {
        let mut g = self.clone();
        'outer: loop {
            for h in g.source.polygons().to_vec() {
                if let Some(next) = g.peel(&h) {
                    g = next;
                    continue 'outer;
                }
            }
            break;
        }
        if g.source.len() == 1 && !g.source.contains_center() {
            g = g.centered();
        }
        g
    }

    /// Representative of the coset `self ∘ Sym(punctures of s)`: the
    /// punctures of `s` are sent to their image set in surface order, then
    /// the result is minimized.
    pub fn settle_on(&self, s: &Surface) -> RigidMap {
        let u = self.params.hull(&self.source.union_polys(s)).expect("nonempty");
        let g = self.enlarge(&u).expect("hull contains the source");
        let pm = g.puncture_map();
        let mut imgs: Vec<PolygonId> = pm.iter().filter(|(a, _)| s.contains(a)).map(|(_, b)| b.clone()).collect();
        imgs.sort();
        let mut it = imgs.into_iter();
        let pairs: Vec<(PolygonId, PolygonId)> = pm
            .into_iter()
            .map(|(a, b)| if s.contains(&a) { (a, it.next().unwrap()) } else { (a, b) })
            .collect();
        g.with_punctures(&pairs).expect("a permutation of images").minimize()
    }

    /// Every maximal peeling order, normalized; used to test confluence.
    pub fn all_minimal_forms(&self) -> Vec<RigidMap> {
        let mut out: Vec<RigidMap> = Vec::new();
        let mut stack = vec![self.clone()];
        let mut seen = std::collections::HashSet::new();
        while let Some(g) = stack.pop() {
            if !seen.insert(g.key()) {
                continue;
            }
            let nexts: Vec<RigidMap> = g.source.polygons().iter().filter_map(|h| g.peel(h)).collect();
            if nexts.is_empty() {
                let n = if g.source.len() == 1 && !g.source.contains_center() {
                    g.centered()
                } else {
                    g
                };
                if !out.contains(&n) {
                    out.push(n);
                }
            } else {
                stack.extend(nexts);
            }
        }
        out
    }

    /// A single-polygon element is a global automorphism; present it on `{M}`.
    fn centered(&self) -> RigidMap {
        let p = &self.params;
        let u = p
            .hull(&[self.source.top().clone(), PolygonId::center()])
            .unwrap();
        let mut g = self.enlarge(&u).unwrap();
        while g.source.len() > 1 {
            let leaf = g
                .source
                .polygons()
                .iter()
                .find(|h| !h.is_center() && g.peel(h).is_some())
                .cloned()
                .expect("global automorphism peels down to the centre");
            g = g.peel(&leaf).unwrap();
        }
        g
    }

    /// A single-polygon minimal support is an automorphism of the whole
    /// structure, rigid outside every surface.
    pub fn is_rigid_outside(&self, s: &Surface) -> bool {
        let g = self.minimize();
        g.source.len() == 1 || g.source.is_subset(s)
    }

    pub fn image_surface(&self, s: &Surface) -> Result<Surface> {
        let g = self.minimize();
        if !g.source.is_subset(s) {
            if self.is_rigid_outside(s) {
                // global automorphism presented on {M}
                let imgs: Vec<PolygonId> = s
                    .iter()
                    .map(|p| {
                        if p.is_center() {
                            g.target.top().clone()
                        } else {
                            g.apply_outside(p)
                        }
                    })
                    .collect();
                return self.params.surface(&imgs);
            }
            return Err(Error::NotRigidOutside);
        }
        Ok(g.enlarge(s)?.target)
    }

    /// `g` presented with source exactly `s`, when `g` is rigid outside `s`.
    pub fn restrict_to(&self, s: &Surface) -> Result<RigidMap> {
        let g = self.minimize();
        if g.source.is_subset(s) {
            return g.enlarge(s);
        }
        if !self.is_rigid_outside(s) {
            return Err(Error::NotRigidOutside);
        }
        let target = self.image_surface(s)?;
        let u = self.params.hull(&s.union_polys(&g.source)).unwrap();
        let big = g.enlarge(&u)?;
        let l = self.params.frontier(s).len();
        let pairs: Vec<(PolygonId, PolygonId)> = big
            .puncture_map()
            .into_iter()
            .filter(|(a, _)| s.contains(a))
            .collect();
        for off in 0..l {
            if let Ok(c) = RigidMap::new(self.params, s.clone(), target.clone(), off) {
                let Ok(c) = c.with_punctures(&pairs) else { continue };
                if c.enlarge(&u)? == big {
                    return Ok(c);
                }
            }
        }
        Err(Error::NotRigidOutside)
    }

    pub fn to_json(&self) -> RigidMapJson {
        RigidMapJson {
            source: self.source.polygons().to_vec(),
            target: self.target.polygons().to_vec(),
            arcs: self.arc_map(),
            punctures: self.puncture_map(),
        }
    }

    pub fn from_json(params: Params, j: &RigidMapJson) -> Result<RigidMap> {
        let source = params.surface(&j.source)?;
        let target = params.surface(&j.target)?;
        let fa = params.frontier(&source);
        let fb = params.frontier(&target);
        if j.arcs.len() != fa.len() || fb.len() != fa.len() {
            return Err(Error::InvalidElement("arc list length mismatch".into()));
        }
        let l = fa.len();
        let first = fb
            .iter()
            .position(|b| *b == j.arcs[0].1)
            .ok_or_else(|| Error::InvalidElement("unknown target arc".into()))?;
        let start = fa
            .iter()
            .position(|a| *a == j.arcs[0].0)
            .ok_or_else(|| Error::InvalidElement("unknown source arc".into()))?;
        let offset = (first + l - start) % l;
        let g = RigidMap::new(params, source, target, offset)?.with_punctures(&j.punctures)?;
        if g.arc_map() != j.arcs {
            return Err(Error::InvalidElement(
                "arc list is not a cyclic-order-preserving rotation in source order".into(),
            ));
        }
        Ok(g)
    }
}

/// Cyclic rotation of the frontier arcs of `gamma`, fixing every puncture.
pub fn rotation(params: Params, gamma: &Surface, shift: i64) -> Result<RigidMap> {
    let l = params.frontier(gamma).len() as i64;
    let off = shift.rem_euclid(l) as usize;
    RigidMap::new(params, gamma.clone(), gamma.clone(), off)
}

/// Line shift from branch `in_branch` to branch `out_branch` through `M`.
///
/// Source `{M,[in]}`, target `{M,[out]}`; the arc `[in,1]` goes to `[in]`,
/// so the left-most ray of `in` moves one step towards the centre.
pub fn ray_shift(params: Params, in_branch: u32, out_branch: u32) -> Result<RigidMap> {
    if params.m < 2 {
        return Err(Error::InvalidBranch("ray shifts need m ≥ 2".into()));
    }
    for b in [in_branch, out_branch] {
        if b < 1 || b > params.m {
            return Err(Error::InvalidBranch(format!("branch {b} out of range 1..{}", params.m)));
        }
    }
    if in_branch == out_branch {
        return Err(Error::InvalidBranch("in and out branches must differ".into()));
    }
    let m = PolygonId::center();
    let a = m.child(in_branch as u8);
    let b = m.child(out_branch as u8);
    let source = params.surface(&[m.clone(), a.clone()])?;
    let target = params.surface(&[m.clone(), b.clone()])?;
    let fa = params.frontier(&source);
    let fb = params.frontier(&target);
    let l = fa.len();
    let ia = fa.iter().position(|x| *x == a.child(1)).unwrap();
    let ib = fb.iter().position(|x| *x == a).unwrap();
    // every polygon of the line moves one step towards `out`
    let g = RigidMap::new(params, source, target, (ib + l - ia) % l)?;
    let pairs = if params.is_punctured(&m) {
        vec![(a, m.clone()), (m, b)]
    } else {
        vec![(a, b)]
    };
    g.with_punctures(&pairs)
}
