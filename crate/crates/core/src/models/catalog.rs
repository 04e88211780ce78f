//! Named models with their documented minimal boundary conditions.
//!
//! | model | influence class of `x` | minimal `𝓜` |
//! |---|---|---|
//! | East on `0..n` | `{x+1}` | `{n}`: the rightmost site is unconstrained |
//! | FA-jf on a rectangle `R` | `j`-subsets of `N_x` | `∂₊R` |
//! | North-East on `R` | `{x+e₁, x+e₂}` | `∂₊R` (equal to `𝓑`) |
//! | Spiral on `R` | four pair unions | `𝓑` |
//! | binary tree | both children | leaves unconstrained |
//! | tree East | the parent | root unconstrained |
//! | FA-1f on a graph | one neighbor | optional unconstrained root |

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BoundaryMode, ModelSpec, Rule, Site, SiteMeasure};
use crate::error::{Error, Result};
use crate::topology::{boundary, BoundaryKind, Graph, NeighborhoodKind, Point, Rectangle, RootedTree};

/// Boundary choice for lattice models.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryChoice {
    #[default]
    Minimal,
    Maximal,
    None,
}

/// Parameters accepted by [`catalog`]; each model reads the fields it needs.
#[derive(Debug, Clone, Default)]
pub struct CatalogParams {
    pub q: f64,
    /// Number of sites (East) or 1-d length.
    pub n: Option<usize>,
    /// Rectangle side lengths for lattice models.
    pub sides: Option<Vec<usize>>,
    /// Threshold for FA-jf.
    pub j: Option<usize>,
    /// Number of levels for the binary tree.
    pub levels: Option<u32>,
    /// Host graph for graph models.
    pub graph: Option<Graph>,
    pub root: Option<usize>,
    pub boundary: BoundaryChoice,
}

/// Builds a named model. Names: `east`, `fa`, `fa-graph`, `north-east`,
/// `north-east-torus`, `spiral`, `binary-tree`, `tree-east`, `fa1f-graph`.
pub fn catalog(name: &str, params: &CatalogParams) -> Result<ModelSpec> {
    let q = params.q;
    let need = |what: &str| Error::InvalidParams(format!("`{name}` needs `{what}`"));
    let rect = || -> Result<Rectangle> {
        match (&params.sides, params.n) {
            (Some(s), _) => Rectangle::with_sides(s),
            (None, Some(n)) => Rectangle::with_sides(&[n]),
            _ => Err(need("sides")),
        }
    };
    let model = match name {
        "east" => {
            let n = params.n.or(params.sides.as_ref().and_then(|s| s.first().copied()));
            east(n.ok_or_else(|| need("n"))?, q)?
        }
        "fa" => fa(params.j.ok_or_else(|| need("j"))?, &rect()?, q)?,
        "north-east" => north_east(&rect()?, q)?,
        "north-east-torus" => {
            let side = params.n.or(params.sides.as_ref().and_then(|s| s.first().copied()));
            return north_east_torus(side.ok_or_else(|| need("n"))?, q);
        }
        "spiral" => spiral(&rect()?, q)?,
        "binary-tree" => return binary_tree(params.levels.ok_or_else(|| need("levels"))?, q),
        "tree-east" => {
            let g = params.graph.as_ref().ok_or_else(|| need("graph"))?;
            let tree = crate::topology::spanning_tree(g, params.root.unwrap_or(0))?;
            return tree_east(g, &tree, q);
        }
        "fa1f-graph" => {
            let g = params.graph.as_ref().ok_or_else(|| need("graph"))?;
            return fa1f_graph(g, params.root, q);
        }
        "fa-graph" => {
            let g = params.graph.as_ref().ok_or_else(|| need("graph"))?;
            let m = fa_graph(g, params.j.ok_or_else(|| need("j"))?, q)?;
            return match params.root {
                Some(r) => m.with_unconstrained(&[r]),
                None => Ok(m),
            };
        }
        other => return Err(Error::UnknownModel(other.to_string())),
    };
    Ok(match params.boundary {
        BoundaryChoice::Minimal => model,
        BoundaryChoice::Maximal => model.with_maximal_boundary(),
        BoundaryChoice::None => model.with_good_boundary(&[])?.with_mode_label(BoundaryMode::None),
    })
}

/// Resolves influence sets given as lattice points into [`Site`]s, collecting
/// out-of-rectangle points into the boundary set.
struct LatticeSites<'a> {
    rect: &'a Rectangle,
    boundary: BTreeMap<Point, usize>,
}

impl<'a> LatticeSites<'a> {
    fn new(rect: &'a Rectangle) -> Self {
        LatticeSites { rect, boundary: BTreeMap::new() }
    }

    fn site(&mut self, p: Point) -> Site {
        match self.rect.index_of(&p) {
            Some(y) => Site::Vertex(y),
            None => {
                let next = self.boundary.len();
                Site::Boundary(*self.boundary.entry(p).or_insert(next))
            }
        }
    }

    fn finish(self) -> Vec<Point> {
        let mut out = vec![Vec::new(); self.boundary.len()];
        for (p, i) in self.boundary {
            out[i] = p;
        }
        out
    }
}

fn shifted(p: &[i64], off: &[i64]) -> Point {
    p.iter().zip(off).map(|(a, b)| a + b).collect()
}

fn good_indices(sites: &[Point], keep: &[Point]) -> Vec<usize> {
    (0..sites.len()).filter(|&b| keep.contains(&sites[b])).collect()
}

/// East model on sites `0..n` with the rightmost site unconstrained.
pub fn east(n: usize, q: f64) -> Result<ModelSpec> {
    if n == 0 {
        return Err(Error::InvalidParams("East needs n ≥ 1".into()));
    }
    let rect = Rectangle::with_sides(&[n])?;
    let mut sites = LatticeSites::new(&rect);
    let rules = (0..n as i64).map(|x| Rule::AnyOf(vec![vec![sites.site(vec![x + 1])]])).collect();
    let bsites = sites.finish();
    let all: Vec<usize> = (0..bsites.len()).collect();
    ModelSpec::new("east", Graph::lattice(&rect), rules, bsites, SiteMeasure::bernoulli(q)?)?
        .with_good_boundary(&all)
        .map(|m| m.with_mode_label(BoundaryMode::Minimal))
}

/// FA-jf on a rectangle of `Z^d`; minimal boundary empties `∂₊R`.
pub fn fa(j: usize, rect: &Rectangle, q: f64) -> Result<ModelSpec> {
    let d = rect.dim();
    if j == 0 || j > 2 * d {
        return Err(Error::InvalidParams(format!("FA-jf needs 1 ≤ j ≤ {}", 2 * d)));
    }
    let mut sites = LatticeSites::new(rect);
    let offsets = NeighborhoodKind::N.offsets(d);
    let rules = rect
        .points()
        .iter()
        .map(|p| Rule::AtLeast {
            sites: offsets.iter().map(|o| sites.site(shifted(p, o))).collect(),
            j,
        })
        .collect();
    let bsites = sites.finish();
    let good = good_indices(&bsites, &boundary(rect, BoundaryKind::Forward));
    let name = format!("fa-{j}f");
    ModelSpec::new(name, Graph::lattice(rect), rules, bsites, SiteMeasure::bernoulli(q)?)?
        .with_good_boundary(&good)
        .map(|m| m.with_mode_label(BoundaryMode::Minimal))
}

fn require_planar(rect: &Rectangle, model: &str) -> Result<()> {
    if rect.dim() == 2 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{model} is defined on Z^2")))
    }
}

/// North-East model: `x` may flip when `x+e₁` and `x+e₂` are both vacant.
/// Every boundary site is needed for irreducibility, so minimal = maximal.
pub fn north_east(rect: &Rectangle, q: f64) -> Result<ModelSpec> {
    require_planar(rect, "North-East")?;
    let mut sites = LatticeSites::new(rect);
    let rules = rect
        .points()
        .iter()
        .map(|p| {
            Rule::AnyOf(vec![vec![sites.site(shifted(p, &[1, 0])), sites.site(shifted(p, &[0, 1]))]])
        })
        .collect();
    let bsites = sites.finish();
    ModelSpec::new("north-east", Graph::lattice(rect), rules, bsites, SiteMeasure::bernoulli(q)?)
        .map(|m| m.with_maximal_boundary().with_mode_label(BoundaryMode::Minimal))
}

/// North-East model on the periodic `side × side` lattice (no boundary).
pub fn north_east_torus(side: usize, q: f64) -> Result<ModelSpec> {
    let g = Graph::torus(side)?;
    let emb = g.embedding().expect("torus is embedded");
    let rules = (0..g.len())
        .map(|x| {
            let p = emb.coord(x);
            let east = emb.vertex_at(&shifted(p, &[1, 0])).expect("torus wraps");
            let north = emb.vertex_at(&shifted(p, &[0, 1])).expect("torus wraps");
            Rule::AnyOf(vec![vec![Site::Vertex(east), Site::Vertex(north)]])
        })
        .collect();
    ModelSpec::new("north-east-torus", g, rules, vec![], SiteMeasure::bernoulli(q)?)
}

/// Spiral model. `x` may flip when (NE or SW) and (NW or SE) pairs are
/// vacant. Default boundary is maximal.
pub fn spiral(rect: &Rectangle, q: f64) -> Result<ModelSpec> {
    require_planar(rect, "Spiral")?;
    let ne = [[0, 1], [1, 1]];
    let se = [[1, 0], [1, -1]];
    let sw = [[0, -1], [-1, -1]];
    let nw = [[-1, 0], [-1, 1]];
    let unions = [(ne, se), (se, sw), (sw, nw), (nw, ne)];
    let mut sites = LatticeSites::new(rect);
    let rules = rect
        .points()
        .iter()
        .map(|p| {
            Rule::AnyOf(
                unions
                    .iter()
                    .map(|(a, b)| a.iter().chain(b).map(|o| sites.site(shifted(p, o))).collect())
                    .collect(),
            )
        })
        .collect();
    let bsites = sites.finish();
    ModelSpec::new("spiral", Graph::lattice(rect), rules, bsites, SiteMeasure::bernoulli(q)?)
        .map(|m| m.with_maximal_boundary().with_mode_label(BoundaryMode::Minimal))
}

/// Full binary tree: internal vertices need both children vacant, leaves are
/// unconstrained.
pub fn binary_tree(levels: u32, q: f64) -> Result<ModelSpec> {
    let g = Graph::full_binary_tree(levels)?;
    let n = g.len();
    let rules = (0..n)
        .map(|x| {
            let (l, r) = (2 * x + 1, 2 * x + 2);
            if l < n {
                Rule::AnyOf(vec![vec![Site::Vertex(l), Site::Vertex(r)]])
            } else {
                Rule::Free
            }
        })
        .collect();
    ModelSpec::new("binary-tree", g, rules, vec![], SiteMeasure::bernoulli(q)?)
}

/// East model on a rooted tree: a vertex may flip when its parent is vacant;
/// the root is unconstrained. The model lives on `host`, which must contain
/// the tree's edges.
pub fn tree_east(host: &Graph, tree: &RootedTree, q: f64) -> Result<ModelSpec> {
    if host.len() != tree.len() {
        return Err(Error::InvalidParams("tree does not span the host graph".into()));
    }
    let rules = (0..tree.len())
        .map(|x| match tree.parent(x) {
            Some(p) if host.is_adjacent(x, p) => Ok(Rule::AnyOf(vec![vec![Site::Vertex(p)]])),
            Some(p) => Err(Error::InvalidParams(format!("tree edge {p}-{x} not in host"))),
            None => Ok(Rule::Free),
        })
        .collect::<Result<_>>()?;
    ModelSpec::new("tree-east", host.clone(), rules, vec![], SiteMeasure::bernoulli(q)?)
}

/// FA-jf on an arbitrary graph: at least `j` vacant neighbors.
pub fn fa_graph(graph: &Graph, j: usize, q: f64) -> Result<ModelSpec> {
    if j == 0 || j > graph.max_degree() {
        return Err(Error::InvalidParams(format!(
            "FA-jf needs 1 ≤ j ≤ max degree {}",
            graph.max_degree()
        )));
    }
    let rules = (0..graph.len())
        .map(|x| Rule::AtLeast {
            sites: graph.neighbors(x).iter().map(|&y| Site::Vertex(y)).collect(),
            j,
        })
        .collect();
    ModelSpec::new(format!("fa-{j}f-graph"), graph.clone(), rules, vec![], SiteMeasure::bernoulli(q)?)
}

/// FA-1f on a graph, optionally with an unconstrained vertex `root`.
pub fn fa1f_graph(graph: &Graph, root: Option<usize>, q: f64) -> Result<ModelSpec> {
    if graph.len() == 1 {
        let m = ModelSpec::new("fa1f-graph", graph.clone(), vec![Rule::AnyOf(vec![])], vec![], SiteMeasure::bernoulli(q)?)?;
        return match root {
            Some(r) => m.with_unconstrained(&[r]),
            None => Ok(m),
        };
    }
    let m = fa_graph(graph, 1, q)?.with_name("fa1f-graph");
    match root {
        Some(r) => m.with_unconstrained(&[r]),
        None => Ok(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::SpinConfig;

    #[test]
    fn east_catalog_entry() {
        let m = east(5, 0.5).unwrap();
        assert_eq!(m.family().range(), 1);
        assert_eq!(m.boundary_sites(), &[vec![5]]);
        assert!(m.is_free(4));
        assert!((0..4).all(|x| !m.is_free(x)));
        assert_eq!(m.family().rule(1), &Rule::AnyOf(vec![vec![Site::Vertex(2)]]));
    }

    #[test]
    fn fa2f_classes_are_thresholds_over_lattice_neighbors() {
        let rect = Rectangle::with_sides(&[3, 3]).unwrap();
        let m = fa(2, &rect, 0.5).unwrap();
        for x in 0..9 {
            match m.family().rule(x) {
                Rule::AtLeast { sites, j } => {
                    assert_eq!(*j, 2);
                    assert_eq!(sites.len(), 4);
                }
                r => panic!("unexpected rule {r:?}"),
            }
        }
        // corner (2,2) has its north and east neighbors in ∂₊R
        assert!(m.is_free(rect.index_of(&[2, 2]).unwrap()));
        assert!(fa(5, &rect, 0.5).is_err());
    }

    #[test]
    fn binary_tree_leaves_free() {
        let m = binary_tree(3, 0.5).unwrap();
        assert_eq!(m.len(), 7);
        assert!((3..7).all(|x| m.is_free(x)));
        let mut w = SpinConfig::ones(7);
        assert!(!m.constraint(&w, 1));
        w.set(3, false);
        w.set(4, false);
        assert!(m.constraint(&w, 1));
        assert!(!m.constraint(&w, 0));
    }

    #[test]
    fn catalog_dispatch() {
        let p = CatalogParams { q: 0.5, n: Some(4), ..Default::default() };
        assert_eq!(catalog("east", &p).unwrap(), east(4, 0.5).unwrap());
        assert!(matches!(catalog("west", &p), Err(Error::UnknownModel(_))));
        assert!(matches!(catalog("fa", &p), Err(Error::InvalidParams(_))));
        let p = CatalogParams {
            q: 0.5,
            sides: Some(vec![2, 2]),
            boundary: BoundaryChoice::None,
            ..Default::default()
        };
        let ne = catalog("north-east", &p).unwrap();
        assert!((0..4).all(|x| !ne.constraint_bits(0, x) || x != 3));
        assert!(!ne.constraint_bits(0, 3));
    }

    #[test]
    fn tree_east_parents() {
        let g = Graph::complete(4).unwrap();
        let t = crate::topology::spanning_tree(&g, 2).unwrap();
        let m = tree_east(&g, &t, 0.5).unwrap();
        assert!(m.is_free(2));
        assert!(m.constraint_bits(0b1011, 0));
        assert!(!m.constraint_bits(0b1111, 0));
    }
}
