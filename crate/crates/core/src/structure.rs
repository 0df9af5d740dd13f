//! Planar trees `A_{n,m}`, their polygons and admissible surfaces.
//!
//! A polygon is addressed by its root path in the tree. The empty path is
//! the central polygon `M`; its children are `[1]..[m]`, and every other
//! polygon has children `1..n` numbered from the left.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Every polygon carries a puncture.
    Sharp,
    /// Every polygon except the central one carries a puncture.
    Star,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flavor::Sharp => write!(f, "sharp"),
            Flavor::Star => write!(f, "star"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    pub n: u32,
    pub m: u32,
    pub flavor: Flavor,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PolygonId(SmallVec<[u8; 14]>);

impl PolygonId {
    pub fn center() -> Self {
        PolygonId(SmallVec::new())
    }

    pub fn from_path(path: &[u8]) -> Self {
        PolygonId(SmallVec::from_slice(path))
    }

    pub fn path(&self) -> &[u8] {
        &self.0
    }

    pub fn is_center(&self) -> bool {
        self.0.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn parent(&self) -> Option<PolygonId> {
        if self.0.is_empty() {
            None
        } else {
            Some(PolygonId(SmallVec::from_slice(&self.0[..self.0.len() - 1])))
        }
    }

    pub fn child(&self, c: u8) -> PolygonId {
        let mut v = self.0.clone();
        v.push(c);
        PolygonId(v)
    }

    pub fn prefix(&self, k: usize) -> PolygonId {
        PolygonId(SmallVec::from_slice(&self.0[..k]))
    }

    pub fn is_prefix_of(&self, other: &PolygonId) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    /// Branch-independent part of the address (everything after the branch index).
    pub fn tail(&self) -> &[u8] {
        if self.0.is_empty() {
            &[]
        } else {
            &self.0[1..]
        }
    }
}

impl fmt::Display for PolygonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "M");
        }
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PolygonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for PolygonId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "M" {
            return Ok(PolygonId::center());
        }
        let mut v = SmallVec::new();
        for part in s.split('.') {
            let c: u8 = part
                .parse()
                .map_err(|_| Error::InvalidAddress(s.to_string()))?;
            if c == 0 {
                return Err(Error::InvalidAddress(s.to_string()));
            }
            v.push(c);
        }
        Ok(PolygonId(v))
    }
}

impl Serialize for PolygonId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PolygonId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Nonempty connected finite set of polygons, stored sorted.
///
/// Lexicographic order puts a prefix before its extensions, so the first
/// element is always the top polygon (the one closest to `M`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
#[serde(transparent)]
pub struct Surface(Vec<PolygonId>);

impl Surface {
    pub fn polygons(&self) -> &[PolygonId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, p: &PolygonId) -> bool {
        self.0.binary_search(p).is_ok()
    }

    pub fn top(&self) -> &PolygonId {
        &self.0[0]
    }

    pub fn contains_center(&self) -> bool {
        self.0[0].is_center()
    }

    pub fn is_subset(&self, other: &Surface) -> bool {
        self.0.iter().all(|p| other.contains(p))
    }

    pub fn iter(&self) -> impl Iterator<Item = &PolygonId> {
        self.0.iter()
    }

    /// Caller guarantees the result is admissible.
    pub(crate) fn with(&self, p: PolygonId) -> Surface {
        let mut v = self.0.clone();
        if let Err(i) = v.binary_search(&p) {
            v.insert(i, p);
        }
        Surface(v)
    }

    /// Caller guarantees the result is admissible.
    pub(crate) fn without(&self, p: &PolygonId) -> Surface {
        Surface(self.0.iter().filter(|q| *q != p).cloned().collect())
    }

    pub(crate) fn from_sorted_unchecked(v: Vec<PolygonId>) -> Surface {
        Surface(v)
    }

    pub fn union_polys(&self, other: &Surface) -> Vec<PolygonId> {
        let mut v: Vec<PolygonId> = self.0.iter().chain(other.0.iter()).cloned().collect();
        v.sort();
        v.dedup();
        v
    }
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// Type of the exterior branch hanging off a frontier arc.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    /// A full rooted subtree in which every polygon has `n` children.
    Full,
    /// The branch containing the centre, seen from a polygon with the given tail.
    Up(Vec<u8>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolygonInfo {
    pub arcs: Vec<PolygonId>,
    pub punctured: bool,
}

impl Params {
    pub fn new(n: u32, m: u32, flavor: Flavor) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParams("n must be ≥ 1".into()));
        }
        if m < 1 {
            return Err(Error::InvalidParams("m must be ≥ 1".into()));
        }
        if n > 200 || m > 200 {
            return Err(Error::InvalidParams("n and m must be ≤ 200".into()));
        }
        Ok(Params { n, m, flavor })
    }

    pub fn sharp(n: u32, m: u32) -> Result<Self> {
        Params::new(n, m, Flavor::Sharp)
    }

    pub fn star(n: u32, m: u32) -> Result<Self> {
        Params::new(n, m, Flavor::Star)
    }

    pub fn check(&self, p: &PolygonId) -> Result<()> {
        let path = p.path();
        if let Some((&b, rest)) = path.split_first() {
            if b < 1 || b as u32 > self.m || rest.iter().any(|&c| c < 1 || c as u32 > self.n) {
                return Err(Error::InvalidAddress(p.to_string()));
            }
        }
        Ok(())
    }

    pub fn degree(&self, p: &PolygonId) -> usize {
        if p.is_center() {
            self.m as usize
        } else {
            self.n as usize + 1
        }
    }

    pub fn is_punctured(&self, p: &PolygonId) -> bool {
        self.flavor == Flavor::Sharp || !p.is_center()
    }

    /// All polygons look alike: the central polygon is just a fixed choice.
    pub fn is_homogeneous(&self) -> bool {
        self.flavor == Flavor::Sharp && self.m == self.n + 1
    }

    /// Neighbour of `p` at local index `i` in its cyclic order.
    pub fn neighbor_at(&self, p: &PolygonId, i: usize) -> PolygonId {
        if p.is_center() {
            p.child(i as u8 + 1)
        } else if i == 0 {
            p.parent().expect("non-central polygon has a parent")
        } else {
            p.child(i as u8)
        }
    }

    /// Local index of the neighbour `q` of `p`.
    pub fn neighbor_index(&self, p: &PolygonId, q: &PolygonId) -> usize {
        if q.depth() > p.depth() {
            let c = *q.path().last().unwrap() as usize;
            if p.is_center() {
                c - 1
            } else {
                c
            }
        } else {
            0
        }
    }

    pub fn neighbors(&self, p: &PolygonId) -> Vec<PolygonId> {
        (0..self.degree(p)).map(|i| self.neighbor_at(p, i)).collect()
    }

    pub fn polygon_info(&self, p: &PolygonId) -> Result<PolygonInfo> {
        self.check(p)?;
        let arcs = self
            .neighbors(p)
            .into_iter()
            .map(|q| if q.depth() > p.depth() { q } else { p.clone() })
            .collect();
        Ok(PolygonInfo {
            arcs,
            punctured: self.is_punctured(p),
        })
    }

    /// Frontier arcs of `s` in boundary-walk order, each named by its child end.
    pub fn frontier(&self, s: &Surface) -> Vec<PolygonId> {
        let mut out = Vec::new();
        let top = s.top();
        if !top.is_center() {
            out.push(top.clone());
        }
        self.walk(s, top, &mut out);
        out
    }

    fn walk(&self, s: &Surface, x: &PolygonId, out: &mut Vec<PolygonId>) {
        let count = if x.is_center() { self.m } else { self.n } as u8;
        for c in 1..=count {
            let y = x.child(c);
            if s.contains(&y) {
                self.walk(s, &y, out);
            } else {
                out.push(y);
            }
        }
    }

    /// (inside, outside) endpoints of the arc named `a` relative to `s`.
    pub fn arc_ends(&self, s: &Surface, a: &PolygonId) -> (PolygonId, PolygonId) {
        if s.contains(a) {
            (a.clone(), a.parent().expect("arc below the centre"))
        } else {
            (a.parent().expect("arc below the centre"), a.clone())
        }
    }

    pub fn shape(&self, s: &Surface, a: &PolygonId) -> Shape {
        if !s.contains(a) || self.is_homogeneous() {
            Shape::Full
        } else {
            Shape::Up(a.tail().to_vec())
        }
    }

    pub fn surface_height(&self, s: &Surface) -> usize {
        match self.flavor {
            Flavor::Sharp => s.len(),
            Flavor::Star => s.len() - usize::from(s.contains_center()),
        }
    }

    pub fn adjacent_polygons(&self, s: &Surface) -> Vec<PolygonId> {
        self.frontier(s)
            .iter()
            .map(|a| self.arc_ends(s, a).1)
            .collect()
    }

    pub fn is_admissible(&self, polys: &[PolygonId]) -> Result<bool> {
        for p in polys {
            self.check(p)?;
        }
        if polys.is_empty() {
            return Ok(false);
        }
        let set: BTreeSet<&PolygonId> = polys.iter().collect();
        let top = set.iter().min_by_key(|p| p.depth()).unwrap();
        // connected iff every member other than the top has its parent inside
        // and all members lie below the top
        Ok(set.iter().all(|p| {
            top.is_prefix_of(p) && (*p == *top || set.contains(&p.parent().unwrap()))
        }))
    }

    pub fn surface(&self, polys: &[PolygonId]) -> Result<Surface> {
        if !self.is_admissible(polys)? {
            return Err(Error::NotAdmissible);
        }
        let mut v = polys.to_vec();
        v.sort();
        v.dedup();
        Ok(Surface(v))
    }

    pub fn parse_surface(&self, addrs: &[&str]) -> Result<Surface> {
        let polys = addrs
            .iter()
            .map(|a| a.parse())
            .collect::<Result<Vec<PolygonId>>>()?;
        self.surface(&polys)
    }

    pub fn single(&self, p: PolygonId) -> Surface {
        Surface(vec![p])
    }

    pub fn hull(&self, polys: &[PolygonId]) -> Result<Surface> {
        if polys.is_empty() {
            return Err(Error::NotAdmissible);
        }
        for p in polys {
            self.check(p)?;
        }
        let lca_len = polys.iter().skip(1).fold(polys[0].depth(), |k, p| {
            let common = polys[0]
                .path()
                .iter()
                .zip(p.path())
                .take_while(|(a, b)| a == b)
                .count();
            k.min(common)
        });
        let mut set = BTreeSet::new();
        for p in polys {
            for k in lca_len..=p.depth() {
                set.insert(p.prefix(k));
            }
        }
        Ok(Surface(set.into_iter().collect()))
    }

    /// Tree path from `u` to `v`, both endpoints included.
    pub fn tree_path(&self, u: &PolygonId, v: &PolygonId) -> Vec<PolygonId> {
        let k = u
            .path()
            .iter()
            .zip(v.path())
            .take_while(|(a, b)| a == b)
            .count();
        let mut out: Vec<PolygonId> = (k..=u.depth()).rev().map(|i| u.prefix(i)).collect();
        out.extend((k + 1..=v.depth()).map(|i| v.prefix(i)));
        out
    }

    pub fn polygons_within(&self, depth: usize) -> Vec<PolygonId> {
        let mut out = vec![PolygonId::center()];
        let mut frontier = vec![PolygonId::center()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for p in &frontier {
                let count = if p.is_center() { self.m } else { self.n } as u8;
                for c in 1..=count {
                    next.push(p.child(c));
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    /// All admissible surfaces with at most `max_size` polygons, every polygon
    /// within `depth` of the centre, sorted.
    pub fn surfaces_within(&self, depth: usize, max_size: usize) -> Vec<Surface> {
        let mut seen: HashSet<Surface> = HashSet::new();
        let mut layer: Vec<Surface> = self
            .polygons_within(depth)
            .into_iter()
            .map(|p| Surface(vec![p]))
            .collect();
        seen.extend(layer.iter().cloned());
        for _ in 1..max_size {
            let mut next = Vec::new();
            for s in &layer {
                for q in self.adjacent_polygons(s) {
                    if q.depth() <= depth {
                        let t = s.with(q);
                        if seen.insert(t.clone()) {
                            next.push(t);
                        }
                    }
                }
            }
            layer = next;
        }
        let mut all: Vec<Surface> = seen.into_iter().collect();
        all.sort();
        all
    }

    /// Admissible surfaces of exactly `size` polygons whose top is `top`.
    pub fn subtrees_with_top(&self, top: &PolygonId, size: usize) -> Vec<Surface> {
        let mut layer = vec![Surface(vec![top.clone()])];
        for _ in 1..size {
            let mut next = BTreeSet::new();
            for s in &layer {
                for q in self.adjacent_polygons(s) {
                    if top.is_prefix_of(&q) && q != *top {
                        next.insert(s.with(q));
                    }
                }
            }
            layer = next.into_iter().collect();
        }
        layer
    }

    /// The first `size` polygons of the subtree at `root` in breadth-first order.
    pub fn bfs_block(&self, root: &PolygonId, size: usize) -> Surface {
        let mut out = Vec::with_capacity(size);
        let mut queue = VecDeque::from([root.clone()]);
        while out.len() < size {
            let p = queue.pop_front().expect("infinite tree");
            let count = if p.is_center() { self.m } else { self.n } as u8;
            for c in 1..=count {
                queue.push_back(p.child(c));
            }
            out.push(p);
        }
        out.sort();
        Surface(out)
    }

    /// Frontier size predicted by closed-form counting.
    pub fn frontier_formula(&self, s: &Surface) -> usize {
        let (n, m) = (self.n as usize, self.m as usize);
        let k = s.len();
        match (self.flavor, s.contains_center()) {
            (Flavor::Sharp, true) => m + (n - 1) * (k - 1),
            (Flavor::Sharp, false) | (Flavor::Star, false) => k * (n - 1) + 2,
            (Flavor::Star, true) => m + (n - 1) * self.surface_height(s),
        }
    }
}

pub fn poly(s: &str) -> PolygonId {
    s.parse().expect("valid address literal")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p24() -> Params {
        Params::sharp(2, 4).unwrap()
    }

    #[test]
    fn address_round_trip() {
        for s in ["M", "1", "1.2.1", "4.1"] {
            assert_eq!(poly(s).to_string(), s);
        }
        assert!("1..2".parse::<PolygonId>().is_err());
        assert!("0".parse::<PolygonId>().is_err());
        let j = serde_json::to_string(&poly("2.1")).unwrap();
        assert_eq!(j, "\"2.1\"");
    }

    #[test]
    fn polygon_info_examples() {
        let info = p24().polygon_info(&PolygonId::center()).unwrap();
        assert_eq!((info.arcs.len(), info.punctured), (4, true));
        let star = Params::star(2, 4).unwrap();
        assert!(!star.polygon_info(&PolygonId::center()).unwrap().punctured);
        let info = p24().polygon_info(&poly("1")).unwrap();
        assert_eq!(info.arcs, vec![poly("1"), poly("1.1"), poly("1.2")]);
        assert!(matches!(
            p24().polygon_info(&poly("5")),
            Err(Error::InvalidAddress(_))
        ));
        assert!(p24().polygon_info(&poly("1.3")).is_err());
    }

    #[test]
    fn admissibility() {
        let p = p24();
        assert!(p.is_admissible(&[poly("M"), poly("1")]).unwrap());
        assert!(!p.is_admissible(&[poly("1"), poly("2")]).unwrap());
        assert!(!p.is_admissible(&[]).unwrap());
        assert!(!p.is_admissible(&[poly("1"), poly("1.1.1")]).unwrap());
    }

    #[test]
    fn hull_examples() {
        let p = p24();
        assert_eq!(
            p.hull(&[poly("1"), poly("2")]).unwrap().to_string(),
            "{M,1,2}"
        );
        assert_eq!(p.hull(&[poly("M")]).unwrap().to_string(), "{M}");
        assert_eq!(
            p.hull(&[poly("1.1"), poly("1")]).unwrap().to_string(),
            "{1,1.1}"
        );
        assert_eq!(
            p.hull(&[poly("1.2.1"), poly("1.1")]).unwrap().to_string(),
            "{1,1.1,1.2,1.2.1}"
        );
    }

    #[test]
    fn frontier_examples() {
        let p = p24();
        assert_eq!(p.frontier(&p.parse_surface(&["M"]).unwrap()).len(), 4);
        assert_eq!(p.frontier(&p.parse_surface(&["1"]).unwrap()).len(), 3);
        let q = Params::sharp(3, 2).unwrap();
        assert_eq!(q.frontier(&q.parse_surface(&["M", "1"]).unwrap()).len(), 4);
        let s = p.parse_surface(&["M", "1"]).unwrap();
        assert_eq!(
            p.frontier(&s),
            vec![poly("1.1"), poly("1.2"), poly("2"), poly("3"), poly("4")]
        );
        let s = p.parse_surface(&["1", "1.2"]).unwrap();
        assert_eq!(
            p.frontier(&s),
            vec![poly("1"), poly("1.1"), poly("1.2.1"), poly("1.2.2")]
        );
    }

    #[test]
    fn heights() {
        let sharp = p24();
        let star = Params::star(2, 4).unwrap();
        assert_eq!(sharp.surface_height(&sharp.parse_surface(&["M"]).unwrap()), 1);
        assert_eq!(star.surface_height(&star.parse_surface(&["M"]).unwrap()), 0);
        let s = star.parse_surface(&["M", "1", "2"]).unwrap();
        assert_eq!(star.surface_height(&s), 2);
    }

    #[test]
    fn adjacent_examples() {
        let p = p24();
        let adj = p.adjacent_polygons(&p.parse_surface(&["M"]).unwrap());
        assert_eq!(adj, vec![poly("1"), poly("2"), poly("3"), poly("4")]);
        let adj = p.adjacent_polygons(&p.parse_surface(&["M", "1"]).unwrap());
        let mut got: Vec<String> = adj.iter().map(|x| x.to_string()).collect();
        got.sort();
        assert_eq!(got, vec!["1.1", "1.2", "2", "3", "4"]);
        let q = Params::sharp(1, 1).unwrap();
        assert_eq!(q.adjacent_polygons(&q.parse_surface(&["M"]).unwrap()), vec![poly("1")]);
    }

    #[test]
    fn enumeration_counts() {
        let star = Params::star(2, 4).unwrap();
        let with_center: Vec<_> = star
            .surfaces_within(2, 3)
            .into_iter()
            .filter(|s| s.contains_center())
            .collect();
        // 1 + 4 + (6 + 8)
        assert_eq!(with_center.len(), 19);
        assert_eq!(star.subtrees_with_top(&poly("1"), 3).len(), 5);
    }
}
