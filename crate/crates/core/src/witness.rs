//! Non-completable 3-corners in `C(A_{n,m})` for `m > n+1`.
//!
//! Three height-1 vertices `[{M}, id]`, `[{M}, π]`, `[{M}, φ]` where `π` and
//! `φ` push a ray of branch 1 into two other branches. The three squares
//! meet at `[{M, H_1, H_3}, id]` and a cube would need a vertex of height 0.

use std::collections::HashMap;

use serde::Serialize;

use crate::analysis::{completer_candidates, complete_corner, find_3corners, link_is_flag, Resolution};
use crate::ball::{Ball, BallLimits};
use crate::complex::{Complex, Family, Vertex, VertexJson, VertexKey};
use crate::error::{Error, Result};
use crate::rigid::{punctures, ray_shift, RigidMap};
use crate::structure::PolygonId;

#[derive(Clone, Debug, Serialize)]
pub struct WitnessCheck {
    pub name: String,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub n: u32,
    pub m: u32,
    pub search_derived: bool,
    /// `z_sigma, z_gamma, z_delta, y1, y2, y3, root`.
    pub vertices: Vec<(String, VertexJson)>,
    pub polygons: Vec<(String, PolygonId)>,
    /// Each square as four indices into `vertices`, in cyclic order.
    pub squares: [[usize; 4]; 3],
    pub min_height: usize,
    pub obstruction_height: i64,
    pub checks: Vec<WitnessCheck>,
    pub verified: bool,
}

const NAMES: [&str; 7] = ["z_sigma", "z_gamma", "z_delta", "y1", "y2", "y3", "root"];
const SQUARES: [[usize; 4]; 3] = [[0, 3, 6, 5], [1, 3, 6, 4], [2, 4, 6, 5]];

struct Labels {
    pi: RigidMap,
    phi: RigidMap,
    h1: PolygonId,
    h3: PolygonId,
    i1: PolygonId,
    i2: PolygonId,
    j2: PolygonId,
    j3: PolygonId,
}

fn mk(cx: &Complex, polys: &[&PolygonId], g: &RigidMap) -> Result<Vertex> {
    let mut v: Vec<PolygonId> = vec![PolygonId::center()];
    v.extend(polys.iter().map(|p| (*p).clone()));
    let s = cx.params.surface(&v)?;
    cx.vertex(s, g.clone())
}

fn closed_form(cx: &Complex) -> Result<Labels> {
    let (n, p) = (cx.params.n, cx.params);
    let c = |j: u32| PolygonId::center().child(j as u8);
    Ok(Labels {
        pi: ray_shift(p, 1, n + 1)?,
        phi: ray_shift(p, 1, n + 2)?,
        h1: c(n + 1),
        h3: c(n + 2),
        i1: c(1),
        i2: c(n + 2),
        j2: c(2),
        j3: c(1),
    })
}

/// Bounded search over pairs of elements with supports `{M,[x]} -> {M,[y]}`,
/// with every puncture matching.
fn search(cx: &Complex) -> Option<Labels> {
    let p = cx.params;
    let mut cands: Vec<RigidMap> = Vec::new();
    for x in 1..=p.m {
        for y in 1..=p.m {
            let a = p.surface(&[PolygonId::center(), PolygonId::center().child(x as u8)]).ok()?;
            let b = p.surface(&[PolygonId::center(), PolygonId::center().child(y as u8)]).ok()?;
            for off in 0..p.frontier(&a).len() {
                let Ok(g) = RigidMap::new(p, a.clone(), b.clone(), off) else { continue };
                let (pa, pb) = (punctures(&p, &a), punctures(&p, &b));
                let mut variants = vec![g.clone()];
                if pa.len() == 2 {
                    let swap = [(pa[0].clone(), pb[1].clone()), (pa[1].clone(), pb[0].clone())];
                    variants.extend(g.with_punctures(&swap));
                }
                for g in variants {
                    let g = g.minimize();
                    if !g.is_rigid_outside(&p.single(PolygonId::center())) && !cands.contains(&g) {
                        cands.push(g);
                    }
                }
            }
        }
    }
    let id = RigidMap::identity(p);
    let base = p.single(PolygonId::center());
    let ups = |g: &RigidMap| -> HashMap<VertexKey, PolygonId> {
        let v = Vertex {
            surface: base.clone(),
            marking: g.clone(),
            family: cx.family,
        };
        cx.upward_neighbors(&v).into_iter().map(|(h, w)| (cx.key(&w), h)).collect()
    };
    let up_id = ups(&id);
    for pi in &cands {
        let up_pi = ups(pi);
        for phi in &cands {
            if phi == pi {
                continue;
            }
            let up_phi = ups(phi);
            for (k1, h1) in &up_id {
                let Some(i1) = up_pi.get(k1) else { continue };
                for (k3, h3) in &up_id {
                    if k3 == k1 {
                        continue;
                    }
                    let Some(j3) = up_phi.get(k3) else { continue };
                    for (k2, i2) in &up_pi {
                        if k2 == k1 || k2 == k3 {
                            continue;
                        }
                        let Some(j2) = up_phi.get(k2) else { continue };
                        let root_key = |polys: [&PolygonId; 2], g: &RigidMap| mk(cx, &polys, g).ok().map(|v| cx.key(&v));
                        let r = root_key([h1, h3], &id);
                        if r.is_none() || r != root_key([i1, i2], pi) || r != root_key([j2, j3], phi) {
                            continue;
                        }
                        let l = Labels {
                            pi: pi.clone(),
                            phi: phi.clone(),
                            h1: h1.clone(),
                            h3: h3.clone(),
                            i1: i1.clone(),
                            i2: i2.clone(),
                            j2: j2.clone(),
                            j3: j3.clone(),
                        };
                        if let Ok(w) = assemble(cx, &l, true) {
                            if w.verified {
                                return Some(l);
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

fn assemble(cx: &Complex, l: &Labels, search_derived: bool) -> Result<Witness> {
    let id = RigidMap::identity(cx.params);
    let verts = [
        mk(cx, &[], &id)?,
        mk(cx, &[], &l.pi)?,
        mk(cx, &[], &l.phi)?,
        mk(cx, &[&l.h1], &id)?,
        mk(cx, &[&l.i2], &l.pi)?,
        mk(cx, &[&l.h3], &id)?,
        mk(cx, &[&l.h1, &l.h3], &id)?,
    ];
    let mut checks = Vec::new();
    let mut check = |name: &str, ok: bool| checks.push(WitnessCheck { name: name.into(), ok });
    let eq = |a: &Vertex, b: &Vertex| cx.vertex_equal(a, b).unwrap_or(false);
    let alt = |polys: &[&PolygonId], g: &RigidMap| mk(cx, polys, g);
    check("y1 = [{M,I1}, pi]", eq(&verts[3], &alt(&[&l.i1], &l.pi)?));
    check("y3 = [{M,J3}, phi]", eq(&verts[5], &alt(&[&l.j3], &l.phi)?));
    check("y2 = [{M,J2}, phi]", eq(&verts[4], &alt(&[&l.j2], &l.phi)?));
    let root_pi = alt(&[&l.i1, &l.i2], &l.pi);
    let root_phi = alt(&[&l.j2, &l.j3], &l.phi);
    check("root = [{M,I1,I2}, pi]", root_pi.is_ok_and(|r| eq(&verts[6], &r)));
    check("root = [{M,J2,J3}, phi]", root_phi.is_ok_and(|r| eq(&verts[6], &r)));
    let distinct = (0..7).all(|i| (i + 1..7).all(|j| !eq(&verts[i], &verts[j])));
    check("seven vertices pairwise distinct", distinct);
    let edges_ok = SQUARES.iter().all(|sq| {
        (0..4).all(|t| cx.edge_exists(&verts[sq[t]], &verts[sq[(t + 1) % 4]]).unwrap_or(false))
    });
    check("twelve square edges exist", edges_ok);
    let hs: Vec<usize> = verts.iter().map(|v| cx.height(v)).collect();
    let h0 = hs[0];
    let attracting = hs[..3].iter().all(|&h| h == h0)
        && hs[3..6].iter().all(|&h| h == h0 + 1)
        && hs[6] == h0 + 2;
    check("root is attracting", attracting);
    // cube coordinates: 000 root, 001 y1, 010 y2, 100 y3, 011 z_gamma, 110 z_delta, 101 z_sigma
    let seven = [
        verts[6].clone(),
        verts[3].clone(),
        verts[4].clone(),
        verts[5].clone(),
        verts[1].clone(),
        verts[2].clone(),
        verts[0].clone(),
    ];
    check("no completing vertex exists", completer_candidates(cx, &seven).is_empty());
    let floor = usize::from(cx.family == Family::C);
    let obstruction = h0 as i64 - 1;
    check("completion needs a height below the minimum", obstruction < floor as i64);

    let ball = witness_ball(cx, &verts);
    let corners = find_3corners(&ball);
    let blocked = corners.len() == 1
        && complete_corner(&ball, &corners[0])
            .is_ok_and(|c| matches!(c.resolution, Resolution::NotCompletable { .. }));
    check("corner detected and reported not completable", blocked);
    let root = ball.index_of(&verts[6]);
    check("link of the root is not flag", root.is_some_and(|r| !link_is_flag(&ball, r, 3)));

    let verified = checks.iter().all(|c| c.ok);
    Ok(Witness {
        n: cx.params.n,
        m: cx.params.m,
        search_derived,
        vertices: NAMES.iter().zip(&verts).map(|(n, v)| (n.to_string(), cx.to_json(v))).collect(),
        polygons: vec![
            ("H1".into(), l.h1.clone()),
            ("H3".into(), l.h3.clone()),
            ("I1".into(), l.i1.clone()),
            ("I2".into(), l.i2.clone()),
            ("J2".into(), l.j2.clone()),
            ("J3".into(), l.j3.clone()),
        ],
        squares: SQUARES,
        min_height: h0,
        obstruction_height: obstruction,
        checks,
        verified,
    })
}

/// The seven corner vertices as a ball.
pub fn witness_ball(cx: &Complex, verts: &[Vertex]) -> Ball {
    let mut entries: Vec<(VertexKey, Vertex)> = verts.iter().map(|v| (cx.key(v), cx.representative(v))).collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    entries.dedup_by(|a, b| a.0 == b.0);
    let (keys, vertices): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
    let h = vertices.iter().map(|v| cx.height(v)).max().unwrap_or(0);
    Ball::assemble(*cx, BallLimits::new(h, 0, 0, 3), vertices, keys)
}

/// Builds and verifies a non-completable corner. For `n ≥ 2` the ray-shift
/// construction is used; for `n = 1` the corner comes from a bounded search.
pub fn counterexample_witness(n: u32, m: u32) -> Result<Witness> {
    let cx = Complex::new(Family::C, n, m)?;
    if m <= n + 1 {
        return Err(Error::PreconditionViolated(format!(
            "no non-completable corner exists for m ≤ n+1 (n={n}, m={m})"
        )));
    }
    if n >= 2 {
        assemble(&cx, &closed_form(&cx)?, false)
    } else {
        search_witness(&cx)
    }
}

/// Witness found by the bounded search alone, in either family.
pub fn search_witness(cx: &Complex) -> Result<Witness> {
    match search(cx) {
        Some(l) => assemble(cx, &l, true),
        None => Err(Error::PreconditionViolated(format!(
            "bounded search found no non-completable corner in {}({},{})",
            cx.family, cx.params.n, cx.params.m
        ))),
    }
}
