//! Vertex classes `[Σ, φ]` of the complexes `C(A_{n,m})` and `D(A_{n,m})`.
//!
//! `[Σ, φ] = [Σ', φ']` when `φ'^{-1} φ` is rigid outside `Σ` and carries `Σ`
//! onto `Σ'`. Besides the direct test, every class gets an exact canonical
//! key: transport `Σ` onto a fixed surface of the same shape by each valid
//! rigid map `τ`, minimize `φ τ^{-1}`, and keep the least result.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rigid::{punctures, ElementKey, RigidMap, RigidMapJson};
use crate::structure::{Flavor, Params, PolygonId, Surface};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    C,
    D,
}

impl Family {
    pub fn flavor(self) -> Flavor {
        match self {
            Family::C => Flavor::Sharp,
            Family::D => Flavor::Star,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::C => write!(f, "C"),
            Family::D => write!(f, "D"),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C" | "c" => Ok(Family::C),
            "D" | "d" => Ok(Family::D),
            _ => Err(Error::InvalidParams(format!("unknown family {s}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Vertex {
    pub surface: Surface,
    pub marking: RigidMap,
    pub family: Family,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexKey {
    pub surface: Surface,
    pub marking: ElementKey,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexJson {
    pub surface: Vec<PolygonId>,
    pub marking: RigidMapJson,
    pub height: usize,
}

/// A family together with its tree parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Complex {
    pub params: Params,
    pub family: Family,
}

impl Complex {
    pub fn new(family: Family, n: u32, m: u32) -> Result<Self> {
        Ok(Complex {
            params: Params::new(n, m, family.flavor())?,
            family,
        })
    }

    pub fn vertex(&self, surface: Surface, marking: RigidMap) -> Result<Vertex> {
        if marking.params() != self.params {
            return Err(Error::FamilyMismatch);
        }
        if self.family == Family::D && !surface.contains_center() {
            return Err(Error::InvalidParams(
                "vertices of D need a surface containing the central polygon".into(),
            ));
        }
        Ok(Vertex {
            surface,
            marking,
            family: self.family,
        })
    }

    /// `[Σ, id]`.
    pub fn base(&self, surface: Surface) -> Result<Vertex> {
        self.vertex(surface, RigidMap::identity(self.params))
    }

    pub fn surface(&self, addrs: &[&str]) -> Result<Surface> {
        self.params.parse_surface(addrs)
    }

    pub fn height(&self, v: &Vertex) -> usize {
        self.params.surface_height(&v.surface)
    }

    fn check(&self, v: &Vertex) -> Result<()> {
        if v.family != self.family || v.marking.params() != self.params {
            return Err(Error::FamilyMismatch);
        }
        Ok(())
    }

    /// Fixed surface with the same size, centre membership and upward tail as `s`.
    pub fn canonical_surface(&self, s: &Surface) -> Surface {
        let p = &self.params;
        if s.contains_center() || p.is_homogeneous() {
            p.bfs_block(&PolygonId::center(), s.len())
        } else {
            let mut path = s.top().path().to_vec();
            path[0] = 1;
            p.bfs_block(&PolygonId::from_path(&path), s.len())
        }
    }

    fn canonical(&self, v: &Vertex) -> (Surface, RigidMap) {
        let target = self.canonical_surface(&v.surface);
        let l = self.params.frontier(&v.surface).len();
        let mut best: Option<RigidMap> = None;
        for s in 0..l {
            let Ok(tau) = RigidMap::new(self.params, v.surface.clone(), target.clone(), s) else {
                continue;
            };
            let psi = v.marking.compose(&tau.invert()).settle_on(&target);
            if best.as_ref().map_or(true, |b| psi.key() < b.key()) {
                best = Some(psi);
            }
        }
        (target, best.expect("the canonical surface has the same shape"))
    }

    pub fn key(&self, v: &Vertex) -> VertexKey {
        let (surface, psi) = self.canonical(v);
        VertexKey {
            surface,
            marking: psi.key(),
        }
    }

    /// Deterministic representative: `[φ(Σ), id]` when the marking is rigid
    /// outside `Σ`, otherwise the canonical pair.
    pub fn representative(&self, v: &Vertex) -> Vertex {
        if v.marking.is_rigid_outside(&v.surface) {
            let img = v
                .marking
                .image_surface(&v.surface)
                .expect("rigid outside the surface");
            return Vertex {
                surface: img,
                marking: RigidMap::identity(self.params),
                family: self.family,
            };
        }
        let (surface, marking) = self.canonical(v);
        Vertex {
            surface,
            marking,
            family: self.family,
        }
    }

    /// The defining test: `τ = φ_y^{-1} φ_x` rigid outside `Σ_x` with `τ(Σ_x) = Σ_y`.
    pub fn vertex_equal(&self, x: &Vertex, y: &Vertex) -> Result<bool> {
        self.check(x)?;
        self.check(y)?;
        if self.height(x) != self.height(y) {
            return Ok(false);
        }
        let tau = y.marking.invert().compose(&x.marking);
        if !tau.is_rigid_outside(&x.surface) {
            return Ok(false);
        }
        Ok(tau.image_surface(&x.surface)? == y.surface)
    }

    pub fn upward_neighbors(&self, x: &Vertex) -> Vec<(PolygonId, Vertex)> {
        self.params
            .adjacent_polygons(&x.surface)
            .into_iter()
            .map(|h| {
                let v = Vertex {
                    surface: x.surface.with(h.clone()),
                    marking: x.marking.clone(),
                    family: self.family,
                };
                (h, v)
            })
            .collect()
    }

    /// Every vertex one level below `x`, each class once.
    ///
    /// A lower neighbour is `[Ω∖K, φχ]` where `χ: Ω → Σ` is rigid and `K` is
    /// a leaf of `Ω`; it only depends on the block of frontier arcs of `Σ`
    /// that `χ` assigns to `K`, on the type of `K` and on which puncture of
    /// `Σ` ends up in `χ(K)`, so a few choices of `Ω` with all offsets and
    /// puncture images exhaust them.
    pub fn downward_neighbors(&self, x: &Vertex) -> Vec<Vertex> {
        let p = &self.params;
        let s = &x.surface;
        let k = s.len();
        if k < 2 {
            return Vec::new();
        }
        let mut cands: Vec<(Surface, PolygonId)> = Vec::new();
        if s.contains_center() || p.is_homogeneous() {
            let leaf = leaves(p, s)
                .into_iter()
                .find(|h| !h.is_center())
                .expect("a tree with two nodes has a non-central leaf");
            cands.push((s.clone(), leaf));
            if self.family == Family::C && !p.is_homogeneous() {
                let chain: Vec<PolygonId> = (0..k).map(|d| PolygonId::from_path(&vec![1u8; d])).collect();
                cands.push((p.surface(&chain).unwrap(), PolygonId::center()));
            }
        } else {
            for omega in p.subtrees_with_top(s.top(), k) {
                for leaf in leaves(p, &omega) {
                    cands.push((omega.clone(), leaf));
                }
            }
        }
        let l = p.frontier(s).len();
        let mut out: Vec<(VertexKey, Vertex)> = Vec::new();
        for (omega, leaf) in cands {
            let rest = omega.without(&leaf);
            if self.family == Family::D && !rest.contains_center() {
                continue;
            }
            for off in 0..l {
                let Ok(chi) = RigidMap::new(*p, omega.clone(), s.clone(), off) else {
                    continue;
                };
                let chis: Vec<RigidMap> = if p.is_punctured(&leaf) {
                    punctures(p, s)
                        .into_iter()
                        .filter_map(|q| chi.with_punctures(&[(leaf.clone(), q)]).ok())
                        .collect()
                } else {
                    vec![chi]
                };
                for chi in chis {
                    let w = Vertex {
                        surface: rest.clone(),
                        marking: x.marking.compose(&chi),
                        family: self.family,
                    };
                    let key = self.key(&w);
                    if !out.iter().any(|(k2, _)| *k2 == key) {
                        out.push((key, w));
                    }
                }
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out.into_iter().map(|(_, v)| v).collect()
    }

    pub fn neighbors(&self, x: &Vertex) -> Vec<Vertex> {
        let mut v: Vec<Vertex> = self.upward_neighbors(x).into_iter().map(|(_, y)| y).collect();
        v.extend(self.downward_neighbors(x));
        v
    }

    pub fn edge_exists(&self, x: &Vertex, y: &Vertex) -> Result<bool> {
        self.check(x)?;
        self.check(y)?;
        let (hx, hy) = (self.height(x), self.height(y));
        let (lo, hi) = if hx + 1 == hy {
            (x, y)
        } else if hy + 1 == hx {
            (y, x)
        } else {
            return Ok(false);
        };
        Ok(self
            .upward_neighbors(lo)
            .iter()
            .any(|(_, v)| self.vertex_equal(v, hi).unwrap_or(false)))
    }

    /// The polygon `H` with `[Σ∪H, φ] = y` for the representative `(Σ, φ)` of `x`.
    pub fn upward_polygon_to(&self, x: &Vertex, y: &Vertex) -> Option<PolygonId> {
        self.upward_neighbors(x)
            .into_iter()
            .find(|(_, v)| self.vertex_equal(v, y).unwrap_or(false))
            .map(|(h, _)| h)
    }

    pub fn to_json(&self, v: &Vertex) -> VertexJson {
        VertexJson {
            surface: v.surface.polygons().to_vec(),
            marking: v.marking.to_json(),
            height: self.height(v),
        }
    }

    pub fn from_json(&self, j: &VertexJson) -> Result<Vertex> {
        let s = self.params.surface(&j.surface)?;
        let g = RigidMap::from_json(self.params, &j.marking)?;
        let v = self.vertex(s, g)?;
        if self.height(&v) != j.height {
            return Err(Error::Parse("stored height does not match the surface".into()));
        }
        Ok(v)
    }

    pub fn describe(&self, v: &Vertex) -> String {
        let g = v.marking.minimize();
        if g == RigidMap::identity(self.params) {
            format!("[{}, id]", v.surface)
        } else {
            format!("[{}, {}->{}+{}]", v.surface, g.source(), g.target(), g.offset())
        }
    }
}

pub(crate) fn leaves(p: &Params, s: &Surface) -> Vec<PolygonId> {
    if s.len() == 1 {
        return s.polygons().to_vec();
    }
    s.iter()
        .filter(|h| p.neighbors(h).iter().filter(|q| s.contains(q)).count() == 1)
        .cloned()
        .collect()
}
