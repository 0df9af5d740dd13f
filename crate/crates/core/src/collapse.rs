//! The structure isomorphism from the STAR structure of `A_{n,m}` to the
//! SHARP structure of `A_{n,m+n-1}`: the central polygon is merged with its
//! first neighbour and everything else is relabelled.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::structure::{Params, PolygonId};

#[derive(Clone, Debug, Serialize)]
pub struct CollapseChecks {
    /// Every kept source polygon has an image within depth, every target
    /// polygon within depth is hit, and only `M` and `[1]` share an image.
    pub bijective: bool,
    /// Adjacent polygons map to adjacent polygons, and the contracted source
    /// graph has as many edges as the target graph.
    pub adjacency: bool,
    /// Cyclic neighbour orders are carried to cyclic neighbour orders.
    pub planar_order: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Collapse {
    pub source: Params,
    pub target: Params,
    pub depth: usize,
    /// Number of arcs of the merged central polygon.
    pub merged_arcs: usize,
    pub pairs: Vec<(PolygonId, PolygonId)>,
    pub checks: CollapseChecks,
}

impl Collapse {
    pub fn ok(&self) -> bool {
        self.checks.bijective && self.checks.adjacency && self.checks.planar_order
    }

    pub fn target_name(&self) -> String {
        format!("sharp({},{})", self.target.n, self.target.m)
    }

    pub fn image(&self, p: &PolygonId) -> PolygonId {
        image(self.source.n, p)
    }
}

/// Image of a STAR polygon in the SHARP target, defined on the whole tree.
fn image(n: u32, p: &PolygonId) -> PolygonId {
    match p.path() {
        [] | [1] => PolygonId::center(),
        [1, rest @ ..] => PolygonId::from_path(rest),
        [j, rest @ ..] => {
            let mut path = vec![(n as u8) + j - 1];
            path.extend_from_slice(rest);
            PolygonId::from_path(&path)
        }
    }
}

fn is_rotation<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len() && (a.is_empty() || (0..b.len()).any(|r| a.iter().enumerate().all(|(i, x)| *x == b[(i + r) % b.len()])))
}

fn edges(p: &Params, polys: &[PolygonId], f: impl Fn(&PolygonId) -> PolygonId) -> BTreeSet<(PolygonId, PolygonId)> {
    let keep: BTreeSet<&PolygonId> = polys.iter().collect();
    let mut out = BTreeSet::new();
    for u in polys {
        for v in p.neighbors(u) {
            if keep.contains(&v) {
                let (a, b) = (f(u), f(&v));
                if a != b {
                    out.insert(if a < b { (a, b) } else { (b, a) });
                }
            }
        }
    }
    out
}

pub fn collapse_map(n: u32, m: u32, depth: usize) -> Result<Collapse> {
    if depth < 1 {
        return Err(Error::InvalidParams("depth must be ≥ 1".into()));
    }
    let src = Params::star(n, m)?;
    let tgt = Params::sharp(n, m + n - 1)?;
    let target_polys = tgt.polygons_within(depth);
    // A source polygon at depth d has image depth d or d-1, so depth+1 suffices.
    let pairs: Vec<(PolygonId, PolygonId)> = src
        .polygons_within(depth + 1)
        .into_iter()
        .map(|p| {
            let q = image(n, &p);
            (p, q)
        })
        .filter(|(_, q)| q.depth() <= depth)
        .collect();

    let mut preimages: BTreeMap<&PolygonId, Vec<&PolygonId>> = BTreeMap::new();
    for (p, q) in &pairs {
        preimages.entry(q).or_default().push(p);
    }
    let bijective = preimages.len() == target_polys.len()
        && target_polys.iter().all(|q| preimages.contains_key(q))
        && preimages.iter().all(|(q, ps)| ps.len() == if q.is_center() { 2 } else { 1 });

    let kept: Vec<PolygonId> = pairs.iter().map(|(p, _)| p.clone()).collect();
    let src_edges = edges(&src, &kept, |p| image(n, p));
    let tgt_edges = edges(&tgt, &target_polys, |p| p.clone());
    let adjacency = src_edges == tgt_edges;

    let merged = src.surface(&[PolygonId::center(), PolygonId::center().child(1)])?;
    let merged_order: Vec<PolygonId> = src
        .adjacent_polygons(&merged)
        .iter()
        .map(|p| image(n, p))
        .collect();
    let mut planar_order = is_rotation(&merged_order, &tgt.neighbors(&PolygonId::center()));
    for (p, q) in &pairs {
        if q.is_center() {
            continue;
        }
        let around: Vec<PolygonId> = src.neighbors(p).iter().map(|x| image(n, x)).collect();
        planar_order &= is_rotation(&around, &tgt.neighbors(q));
    }

    Ok(Collapse {
        source: src,
        target: tgt,
        depth,
        merged_arcs: merged_order.len(),
        pairs,
        checks: CollapseChecks {
            bijective,
            adjacency,
            planar_order,
        },
    })
}
