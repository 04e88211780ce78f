//! Finite graphs, lattice rectangles and rooted trees.
//!
//! Vertices are always dense indices `0..n`. Lattice graphs additionally carry
//! an embedding into `Z^d`, which is what the oriented neighborhoods and the
//! forward boundaries are computed from.

use std::collections::{HashMap, VecDeque};

use rand::Rng;

use crate::error::{Error, Result};

/// A point of `Z^d`.
pub type Point = Vec<i64>;

/// Embedding of the vertex set into `Z^d`, optionally periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    coords: Vec<Point>,
    index: HashMap<Point, usize>,
    /// Side lengths when the lattice wraps around (torus), `None` otherwise.
    period: Option<Vec<i64>>,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.coords.first().map_or(0, Vec::len)
    }

    pub fn coord(&self, x: usize) -> &Point {
        &self.coords[x]
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn period(&self) -> Option<&[i64]> {
        self.period.as_deref()
    }

    /// Vertex at `p`, after wrapping when the lattice is periodic.
    pub fn vertex_at(&self, p: &[i64]) -> Option<usize> {
        match &self.period {
            Some(period) => {
                let origin = &self.coords[0];
                let wrapped: Point = p
                    .iter()
                    .zip(period)
                    .zip(origin)
                    .map(|((&c, &l), &o)| o + (c - o).rem_euclid(l))
                    .collect();
                self.index.get(&wrapped).copied()
            }
            None => self.index.get(p).copied(),
        }
    }
}

/// A finite, connected, undirected simple graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    embedding: Option<Embedding>,
    max_degree: usize,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges are merged; self-loops
    /// and disconnected vertex sets are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, len: n });
                }
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Self::from_adjacency(adjacency, None)
    }

    fn from_adjacency(mut adjacency: Vec<Vec<usize>>, embedding: Option<Embedding>) -> Result<Self> {
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let graph = Graph { adjacency, embedding, max_degree };
        let components = graph.component_count();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(graph)
    }

    /// Parses the edge-list text format: one `u v` pair per line, 0-based.
    /// Blank lines and `#` comments are ignored. The vertex count is one more
    /// than the largest index mentioned.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut n = 0;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|e| Error::Parse {
                    line: lineno + 1,
                    message: format!("`{s}`: {e}"),
                })
            };
            match fields.as_slice() {
                [u] => n = n.max(parse(u)? + 1),
                [u, v] => {
                    let (u, v) = (parse(u)?, parse(v)?);
                    n = n.max(u.max(v) + 1);
                    edges.push((u, v));
                }
                _ => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: "expected `u v`".into(),
                    })
                }
            }
        }
        Self::from_edges(n, &edges)
    }

    /// Serializes into the edge-list text format.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        if self.len() == 1 {
            out.push_str("0\n");
        }
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Nearest-neighbor lattice on a rectangle; vertex indices follow
    /// [`Rectangle::index_of`].
    pub fn lattice(rect: &Rectangle) -> Self {
        let coords = rect.points();
        let index: HashMap<Point, usize> =
            coords.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let adjacency = coords
            .iter()
            .map(|p| {
                let mut nbrs = Vec::new();
                for axis in 0..p.len() {
                    for step in [-1, 1] {
                        let mut q = p.clone();
                        q[axis] += step;
                        if let Some(&y) = index.get(&q) {
                            nbrs.push(y);
                        }
                    }
                }
                nbrs
            })
            .collect();
        let embedding = Embedding { coords, index, period: None };
        Self::from_adjacency(adjacency, Some(embedding)).expect("rectangles are connected")
    }

    /// The `side × side` square lattice with periodic boundary conditions.
    pub fn torus(side: usize) -> Result<Self> {
        if side < 3 {
            return Err(Error::InvalidGraph("torus side must be at least 3".into()));
        }
        let l = side as i64;
        let rect = Rectangle::new(vec![0, 0], vec![l - 1, l - 1])?;
        let coords = rect.points();
        let index: HashMap<Point, usize> =
            coords.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let adjacency = coords
            .iter()
            .map(|p| {
                let mut nbrs = Vec::with_capacity(4);
                for axis in 0..2 {
                    for step in [-1, 1] {
                        let mut q = p.clone();
                        q[axis] = (q[axis] + step).rem_euclid(l);
                        nbrs.push(index[&q]);
                    }
                }
                nbrs
            })
            .collect();
        let embedding = Embedding { coords, index, period: Some(vec![l, l]) };
        Self::from_adjacency(adjacency, Some(embedding))
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges)
    }

    /// Star `K_{1,leaves}` with center 0.
    pub fn star(leaves: usize) -> Result<Self> {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Self::from_edges(leaves + 1, &edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::from_edges(n, &edges)
    }

    /// Full binary tree with `levels` levels in heap order (children of `i`
    /// are `2i+1` and `2i+2`).
    pub fn full_binary_tree(levels: u32) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidGraph("binary tree needs at least one level".into()));
        }
        let n = (1usize << levels) - 1;
        let edges: Vec<_> = (1..n).map(|i| ((i - 1) / 2, i)).collect();
        Self::from_edges(n, &edges)
    }

    /// Seeded Erdős–Rényi helper conditioned on connectivity: samples
    /// `G(n, p)` and then links components along a random spanning path, so
    /// the result is always connected.
    pub fn erdos_renyi_connected<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        let mut labels: Vec<usize> = (0..n).collect();
        let find = |labels: &mut Vec<usize>, mut x: usize| {
            while labels[x] != x {
                labels[x] = labels[labels[x]];
                x = labels[x];
            }
            x
        };
        for &(u, v) in &edges {
            let (a, b) = (find(&mut labels, u), find(&mut labels, v));
            labels[a] = b;
        }
        // after step v, vertices 0..=v all share 0's component
        for v in 1..n {
            if find(&mut labels, v) != find(&mut labels, 0) {
                let u = rng.random_range(0..v);
                let (a, b) = (find(&mut labels, v), find(&mut labels, u));
                labels[a] = b;
                edges.push((u, v));
            }
        }
        Self::from_edges(n, &edges)
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adjacency[x]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adjacency[x].len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn embedding(&self) -> Option<&Embedding> {
        self.embedding.as_ref()
    }

    pub fn is_adjacent(&self, x: usize, y: usize) -> bool {
        self.adjacency[x].binary_search(&y).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Breadth-first distances from `x` (`usize::MAX` for unreachable).
    pub fn distances_from(&self, x: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        let mut queue = VecDeque::from([x]);
        dist[x] = 0;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    fn component_count(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.len() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: x, len: self.len() })
        }
    }
}

/// Integer box `[a_1,b_1] × … × [a_d,b_d]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rectangle {
    lower: Point,
    upper: Point,
}

impl Rectangle {
    pub fn new(lower: Point, upper: Point) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidRectangle(format!(
                "corners {lower:?} and {upper:?} have mismatched or zero dimension"
            )));
        }
        if lower.iter().zip(&upper).any(|(a, b)| a > b) {
            return Err(Error::InvalidRectangle(format!("{lower:?} is not ≤ {upper:?}")));
        }
        Ok(Rectangle { lower, upper })
    }

    /// `[0, side_0 - 1] × … `
    pub fn with_sides(sides: &[usize]) -> Result<Self> {
        if sides.contains(&0) {
            return Err(Error::InvalidRectangle("zero side length".into()));
        }
        Self::new(vec![0; sides.len()], sides.iter().map(|&s| s as i64 - 1).collect())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    pub fn upper(&self) -> &[i64] {
        &self.upper
    }

    pub fn side(&self, axis: usize) -> usize {
        (self.upper[axis] - self.lower[axis] + 1) as usize
    }

    pub fn len(&self) -> usize {
        (0..self.dim()).map(|i| self.side(i)).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.len() == self.dim()
            && p.iter().zip(&self.lower).zip(&self.upper).all(|((c, a), b)| a <= c && c <= b)
    }

    /// Row-major index with the first axis varying fastest.
    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let mut idx = 0;
        let mut stride = 1;
        for axis in 0..self.dim() {
            idx += (p[axis] - self.lower[axis]) as usize * stride;
            stride *= self.side(axis);
        }
        Some(idx)
    }

    /// All points in index order.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.len());
        let mut p = self.lower.clone();
        loop {
            out.push(p.clone());
            let mut axis = 0;
            loop {
                if axis == self.dim() {
                    return out;
                }
                if p[axis] < self.upper[axis] {
                    p[axis] += 1;
                    break;
                }
                p[axis] = self.lower[axis];
                axis += 1;
            }
        }
    }
}

/// The lattice neighborhoods of a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborhoodKind {
    /// Nearest neighbors `x ± e_i`.
    N,
    /// All `x + Σ α_i e_i` with `α_i ∈ {-1,0,1}`, not all zero.
    NStar,
    /// Oriented: `y ∈ N_x` with nonnegative offset, i.e. `x + e_i`.
    K,
    /// `*`-oriented: `α_i ∈ {0,1}`, not all zero.
    KStar,
}

impl NeighborhoodKind {
    /// Offsets in a fixed enumeration order.
    pub fn offsets(self, dim: usize) -> Vec<Point> {
        match self {
            NeighborhoodKind::N => (0..dim)
                .flat_map(|i| {
                    [-1, 1].into_iter().map(move |s| {
                        let mut e = vec![0; dim];
                        e[i] = s;
                        e
                    })
                })
                .collect(),
            NeighborhoodKind::K => (0..dim)
                .map(|i| {
                    let mut e = vec![0; dim];
                    e[i] = 1;
                    e
                })
                .collect(),
            NeighborhoodKind::NStar => cube_offsets(dim, &[-1, 0, 1]),
            NeighborhoodKind::KStar => cube_offsets(dim, &[0, 1]),
        }
    }
}

fn cube_offsets(dim: usize, values: &[i64]) -> Vec<Point> {
    let mut out: Vec<Point> = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out.retain(|p| p.iter().any(|&c| c != 0));
    out
}

/// A neighborhood member: either a vertex of the graph or, in extended mode,
/// a virtual lattice point outside the graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Neighbor {
    Vertex(usize),
    Virtual(Point),
}

/// Lattice neighborhood of `x`. With `extended`, points of `Z^d` that fall
/// outside the graph are returned as [`Neighbor::Virtual`]; otherwise they
/// are dropped.
pub fn neighborhood(
    g: &Graph,
    x: usize,
    kind: NeighborhoodKind,
    extended: bool,
) -> Result<Vec<Neighbor>> {
    g.check_vertex(x)?;
    let emb = g
        .embedding()
        .ok_or_else(|| Error::UnsupportedTopology("graph has no Z^d embedding".into()))?;
    let p = emb.coord(x);
    let mut out = Vec::new();
    for off in kind.offsets(emb.dim()) {
        let q: Point = p.iter().zip(&off).map(|(a, b)| a + b).collect();
        match emb.vertex_at(&q) {
            Some(y) if y != x => {
                let n = Neighbor::Vertex(y);
                if !out.contains(&n) {
                    out.push(n);
                }
            }
            Some(_) => {}
            None if extended => out.push(Neighbor::Virtual(q)),
            None => {}
        }
    }
    Ok(out)
}

/// Forward boundaries of a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// `∂₊Λ = (∪_{x∈Λ} K_x) \ Λ`
    Forward,
    /// `∂₊*Λ = (∪_{x∈Λ} K*_x) \ Λ`
    StarForward,
}

/// Forward boundary as a sorted list of points.
pub fn boundary(rect: &Rectangle, kind: BoundaryKind) -> Vec<Point> {
    let nk = match kind {
        BoundaryKind::Forward => NeighborhoodKind::K,
        BoundaryKind::StarForward => NeighborhoodKind::KStar,
    };
    let offsets = nk.offsets(rect.dim());
    let mut out: Vec<Point> = rect
        .points()
        .into_iter()
        .flat_map(|p| {
            offsets
                .iter()
                .map(|o| p.iter().zip(o).map(|(a, b)| a + b).collect::<Point>())
                .collect::<Vec<_>>()
        })
        .filter(|q| !rect.contains(q))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// A rooted spanning tree of some graph.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedTree {
    tree: Graph,
    root: usize,
    parent: Vec<Option<usize>>,
}

impl RootedTree {
    /// Builds from a parent map; validates acyclicity and reachability.
    pub fn from_parents(root: usize, parent: Vec<Option<usize>>) -> Result<Self> {
        let n = parent.len();
        if root >= n || parent[root].is_some() {
            return Err(Error::InvalidGraph("root must exist and have no parent".into()));
        }
        let mut edges = Vec::with_capacity(n.saturating_sub(1));
        for (x, p) in parent.iter().enumerate() {
            match p {
                Some(p) if x != root => edges.push((*p, x)),
                None if x == root => {}
                _ => return Err(Error::InvalidGraph(format!("vertex {x} has no parent"))),
            }
        }
        let tree = Graph::from_edges(n, &edges)?;
        // n - 1 edges and connected: acyclic
        if tree.edges().count() != n - 1 {
            return Err(Error::InvalidGraph("parent map contains a cycle".into()));
        }
        Ok(RootedTree { tree, root, parent })
    }

    pub fn tree(&self) -> &Graph {
        &self.tree
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, x: usize) -> Option<usize> {
        self.parent[x]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn children(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.parent[y] == Some(x)).collect()
    }

    pub fn depth(&self, x: usize) -> usize {
        let mut d = 0;
        let mut cur = x;
        while let Some(p) = self.parent[cur] {
            d += 1;
            cur = p;
        }
        d
    }
}

/// Breadth-first spanning tree rooted at `r`, exploring neighbors in
/// increasing index order.
pub fn spanning_tree(g: &Graph, r: usize) -> Result<RootedTree> {
    g.check_vertex(r)?;
    let mut parent = vec![None; g.len()];
    let mut seen = vec![false; g.len()];
    let mut queue = VecDeque::from([r]);
    seen[r] = true;
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    let unreached = seen.iter().filter(|s| !**s).count();
    if unreached > 0 {
        return Err(Error::Disconnected { components: 2 });
    }
    RootedTree::from_parents(r, parent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn coords(g: &Graph, ns: &[Neighbor]) -> Vec<Point> {
        let emb = g.embedding().unwrap();
        let mut v: Vec<Point> = ns
            .iter()
            .map(|n| match n {
                Neighbor::Vertex(y) => emb.coord(*y).clone(),
                Neighbor::Virtual(p) => p.clone(),
            })
            .collect();
        v.sort();
        v
    }

    #[test]
    fn oriented_neighborhoods_in_the_plane() {
        let rect = Rectangle::new(vec![-1, -1], vec![1, 1]).unwrap();
        let g = Graph::lattice(&rect);
        let o = rect.index_of(&[0, 0]).unwrap();
        let k = neighborhood(&g, o, NeighborhoodKind::K, false).unwrap();
        assert_eq!(coords(&g, &k), vec![vec![0, 1], vec![1, 0]]);
        let ks = neighborhood(&g, o, NeighborhoodKind::KStar, false).unwrap();
        assert_eq!(coords(&g, &ks), vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
        let ns = neighborhood(&g, o, NeighborhoodKind::NStar, false).unwrap();
        assert_eq!(ns.len(), 8);
    }

    #[test]
    fn star_neighborhood_in_one_dimension_is_nearest() {
        let rect = Rectangle::new(vec![-2], vec![2]).unwrap();
        let g = Graph::lattice(&rect);
        let o = rect.index_of(&[0]).unwrap();
        let ns = neighborhood(&g, o, NeighborhoodKind::NStar, false).unwrap();
        assert_eq!(coords(&g, &ns), vec![vec![-1], vec![1]]);
    }

    #[test]
    fn extended_neighborhood_reports_virtual_points() {
        let rect = Rectangle::new(vec![0, 0], vec![0, 0]).unwrap();
        let g = Graph::lattice(&rect);
        assert!(neighborhood(&g, 0, NeighborhoodKind::K, false).unwrap().is_empty());
        let ext = neighborhood(&g, 0, NeighborhoodKind::KStar, true).unwrap();
        assert_eq!(coords(&g, &ext), vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn neighborhood_requires_embedding() {
        let g = Graph::path(3).unwrap();
        assert!(matches!(
            neighborhood(&g, 0, NeighborhoodKind::N, false),
            Err(Error::UnsupportedTopology(_))
        ));
    }

    #[test]
    fn lattice_adjacency_matches_nearest_neighborhood() {
        let rect = Rectangle::with_sides(&[3, 4]).unwrap();
        let g = Graph::lattice(&rect);
        for x in 0..g.len() {
            let mut n: Vec<usize> = neighborhood(&g, x, NeighborhoodKind::N, false)
                .unwrap()
                .into_iter()
                .map(|n| match n {
                    Neighbor::Vertex(y) => y,
                    Neighbor::Virtual(_) => unreachable!(),
                })
                .collect();
            n.sort();
            assert_eq!(n, g.neighbors(x));
        }
    }

    #[test]
    fn forward_boundaries() {
        let seg = Rectangle::new(vec![0], vec![2]).unwrap();
        assert_eq!(boundary(&seg, BoundaryKind::Forward), vec![vec![3]]);
        let pt = Rectangle::new(vec![0, 0], vec![0, 0]).unwrap();
        assert_eq!(
            boundary(&pt, BoundaryKind::StarForward),
            vec![vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        let sq = Rectangle::with_sides(&[2, 3]).unwrap();
        let fwd = boundary(&sq, BoundaryKind::Forward);
        let star = boundary(&sq, BoundaryKind::StarForward);
        assert!(fwd.iter().all(|p| !sq.contains(p)));
        assert!(fwd.iter().all(|p| star.contains(p)));
        assert_eq!(fwd.len(), 5);
        assert_eq!(star.len(), 6);
    }

    #[test]
    fn bfs_spanning_trees() {
        let path = Graph::path(3).unwrap();
        let t = spanning_tree(&path, 0).unwrap();
        assert_eq!(t.parents(), &[None, Some(0), Some(1)]);

        let tri = Graph::complete(3).unwrap();
        let t = spanning_tree(&tri, 0).unwrap();
        assert_eq!(t.parents(), &[None, Some(0), Some(0)]);

        let star = Graph::star(3).unwrap();
        let t = spanning_tree(&star, 0).unwrap();
        assert!((1..4).all(|x| t.parent(x) == Some(0)));
        assert_eq!(spanning_tree(&star, 0).unwrap(), t);
    }

    #[test]
    fn rejects_bad_graphs() {
        assert!(matches!(
            Graph::from_edges(3, &[(0, 1)]),
            Err(Error::Disconnected { components: 2 })
        ));
        assert!(Graph::from_edges(2, &[(0, 0), (0, 1)]).is_err());
        assert!(Graph::from_edges(2, &[(0, 2)]).is_err());
        assert!(RootedTree::from_parents(0, vec![None, Some(2), Some(1)]).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::parse_edge_list("# square\n0 1\n1 2\n2 3\n3 0\n").unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
        assert!(matches!(Graph::parse_edge_list("0 x"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn random_graphs_are_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..12 {
            let g = Graph::erdos_renyi_connected(n, 0.15, &mut rng).unwrap();
            assert_eq!(g.len(), n);
            assert!(g.distances_from(0).iter().all(|&d| d != usize::MAX));
        }
    }

    #[test]
    fn torus_wraps() {
        let g = Graph::torus(4).unwrap();
        assert!(g.adjacency.iter().all(|n| n.len() == 4));
        let emb = g.embedding().unwrap();
        assert_eq!(emb.vertex_at(&[4, -1]), emb.vertex_at(&[0, 3]));
    }
}
