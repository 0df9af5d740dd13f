use std::collections::HashMap;

use arbocube::collapse::collapse_map;
use arbocube::{Params, PolygonId};
use petgraph::algo::is_isomorphic_matching;
use petgraph::graph::{NodeIndex, UnGraph};

/// Polygon adjacency graph on `polys`, with `merge` glued into one node.
/// Node weights are degrees in the full structure.
fn graph(p: &Params, polys: &[PolygonId], merge: &[PolygonId]) -> UnGraph<usize, ()> {
    let mut g = UnGraph::new_undirected();
    let mut idx: HashMap<&PolygonId, NodeIndex> = HashMap::new();
    let merged_degree: usize = merge.iter().map(|q| p.degree(q)).sum::<usize>().saturating_sub(2 * merge.len().saturating_sub(1));
    let glued = (!merge.is_empty()).then(|| g.add_node(merged_degree));
    for q in polys {
        let n = if merge.contains(q) { glued.unwrap() } else { g.add_node(p.degree(q)) };
        idx.insert(q, n);
    }
    for q in polys {
        for r in p.neighbors(q) {
            if let (Some(&a), Some(&b)) = (idx.get(q), idx.get(&r)) {
                if a < b {
                    g.add_edge(a, b, ());
                }
            }
        }
    }
    g
}

#[test]
fn collapse_is_a_graph_isomorphism() {
    for (n, m) in [(2, 2), (2, 4), (3, 2), (1, 2)] {
        let depth = 5;
        let c = collapse_map(n, m, depth).unwrap();
        assert!(c.ok(), "{n},{m}");
        assert_eq!(c.target_name(), format!("sharp({},{})", n, m + n - 1));
        assert_eq!(c.merged_arcs as u32, m + n - 1);
        let kept: Vec<PolygonId> = c.pairs.iter().map(|(s, _)| s.clone()).collect();
        let merge = [PolygonId::center(), "1".parse().unwrap()];
        let src = graph(&c.source, &kept, &merge);
        let tgt = graph(&c.target, &c.target.polygons_within(depth), &[]);
        assert_eq!(src.node_count(), tgt.node_count());
        assert_eq!(src.edge_count(), tgt.edge_count());
        assert!(is_isomorphic_matching(&src, &tgt, |a, b| a == b, |_, _| true), "{n},{m}");
        // the explicit map carries edges to edges
        let img: HashMap<&PolygonId, &PolygonId> = c.pairs.iter().map(|(s, t)| (s, t)).collect();
        for (s, t) in &c.pairs {
            for r in c.source.neighbors(s) {
                if let Some(tr) = img.get(&r) {
                    if *tr != t {
                        assert!(c.target.neighbors(t).contains(tr), "{s} {r}");
                    }
                }
            }
        }
    }
}

#[test]
fn images_are_depth_bounded() {
    let c = collapse_map(2, 3, 4).unwrap();
    for (s, t) in &c.pairs {
        assert!(t.depth() <= 4);
        assert!(t.depth() + 1 >= s.depth());
        assert!(t.depth() <= s.depth());
    }
}
