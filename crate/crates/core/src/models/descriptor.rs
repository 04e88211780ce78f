//! Model description files.
//!
//! ```toml
//! schema = 1
//! name = "fa"
//! q = 0.5
//! sides = [3, 3]
//! j = 2
//! boundary = "maximal"   # minimal | maximal | none
//! unconstrained = [4]
//! ```
//!
//! Graph models take `graph = "edges.txt"` (edge-list file, resolved relative
//! to the description file) or inline `edges = [[0, 1], [1, 2]]`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{catalog, BoundaryChoice, CatalogParams, ModelSpec};
use crate::error::{Error, Result};
use crate::topology::Graph;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub name: String,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sides: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<usize>,
    #[serde(default)]
    pub boundary: BoundaryChoice,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unconstrained: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<usize>,
}

fn default_schema() -> u32 {
    MODEL_SCHEMA_VERSION
}

fn default_q() -> f64 {
    0.5
}

impl ModelDescriptor {
    pub fn named(name: &str, q: f64) -> Self {
        ModelDescriptor {
            schema: MODEL_SCHEMA_VERSION,
            name: name.to_string(),
            q,
            n: None,
            sides: None,
            j: None,
            levels: None,
            graph: None,
            edges: None,
            root: None,
            boundary: BoundaryChoice::Minimal,
            unconstrained: Vec::new(),
            origin: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let d: ModelDescriptor =
            toml::from_str(text).map_err(|e| Error::Parse { line: 0, message: e.message().to_string() })?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("descriptor serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != MODEL_SCHEMA_VERSION {
            return Err(Error::InvalidParams(format!(
                "model schema {} is not supported (expected {MODEL_SCHEMA_VERSION})",
                self.schema
            )));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::InvalidParams(format!("q = {} is not in [0, 1]", self.q)));
        }
        if self.graph.is_some() && self.edges.is_some() {
            return Err(Error::InvalidParams("give either `graph` or `edges`, not both".into()));
        }
        Ok(())
    }

    /// Builds the model, resolving a graph file relative to `base_dir`.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<ModelSpec> {
        self.validate()?;
        let graph = match (&self.graph, &self.edges) {
            (Some(path), _) => {
                let full = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| Error::Io(format!("{}: {e}", full.display())))?;
                Some(Graph::parse_edge_list(&text)?)
            }
            (None, Some(edges)) => {
                let pairs: Vec<(usize, usize)> = edges.iter().map(|[u, v]| (*u, *v)).collect();
                let n = pairs.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(1);
                Some(Graph::from_edges(n, &pairs)?)
            }
            (None, None) => None,
        };
        let params = CatalogParams {
            q: self.q,
            n: self.n,
            sides: self.sides.clone(),
            j: self.j,
            levels: self.levels,
            graph,
            root: self.root,
            boundary: self.boundary,
        };
        let mut model = catalog(&self.name, &params)?;
        if !self.unconstrained.is_empty() {
            let mut all = model.unconstrained().to_vec();
            all.extend(&self.unconstrained);
            model = model.with_unconstrained(&all)?;
        }
        if let Some(o) = self.origin {
            model = model.with_origin(o)?;
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{east, fa};
    use crate::topology::Rectangle;

    #[test]
    fn parse_and_build() {
        let d = ModelDescriptor::parse(
            "schema = 1\nname = \"fa\"\nq = 0.3\nsides = [3, 3]\nj = 2\nboundary = \"maximal\"\n",
        )
        .unwrap();
        let m = d.build(None).unwrap();
        let expected = fa(2, &Rectangle::with_sides(&[3, 3]).unwrap(), 0.3).unwrap().with_maximal_boundary();
        assert_eq!(m, expected);
        assert_eq!(ModelDescriptor::parse(&d.to_toml()).unwrap(), d);
    }

    #[test]
    fn inline_edges_and_unconstrained() {
        let d = ModelDescriptor::parse(
            "name = \"fa1f-graph\"\nedges = [[0, 1], [1, 2]]\nunconstrained = [2]\n",
        )
        .unwrap();
        let m = d.build(None).unwrap();
        assert_eq!(m.len(), 3);
        assert!(m.is_free(2));
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert!(ModelDescriptor::parse("schema = 2\nname = \"east\"\nn = 3").is_err());
        assert!(ModelDescriptor::parse("name = \"east\"\nn = 3\ncolour = 1").is_err());
        assert!(ModelDescriptor::parse("name = \"east\"\nq = 2.0").is_err());
        let d = ModelDescriptor::parse("name = \"east\"\nn = 4\nq = 0.5").unwrap();
        assert_eq!(d.build(None).unwrap(), east(4, 0.5).unwrap());
    }
}
