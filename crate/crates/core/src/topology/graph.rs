use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest node count an [`InterferenceGraph`] supports; activity states are
/// stored as 64-bit masks.
pub const MAX_NODES: usize = 64;

/// Canonical topology families plus an explicit edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologySpec {
    /// All cross-component pairs interfere; nodes inside a component do not.
    CompletePartite { sizes: Vec<usize> },
    /// Nearest-neighbour interference on a `rows x cols` grid, optionally a torus.
    Grid {
        rows: usize,
        cols: usize,
        #[serde(default)]
        wrap: bool,
    },
    Line { n: usize },
    Ring { n: usize },
    /// One hub interfering with every leaf.
    Star { leaves: usize },
    Explicit {
        n: usize,
        edges: Vec<(usize, usize)>,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
}

/// Undirected interference graph on nodes `0..n`.
///
/// Builders from [`TopologySpec`] also record the "natural" component split
/// of the family (the parts of a complete partite graph, the parity colouring
/// of a grid), which [`crate::topology::partite_decomposition`] uses when no
/// explicit partition is supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceGraph {
    n: usize,
    adj: Vec<u64>,
    edges: Vec<(usize, usize)>,
    labels: Option<Vec<String>>,
    natural_components: Option<Vec<Vec<usize>>>,
}

impl InterferenceGraph {
    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) collapse; self-loops and out-of-range endpoints are errors.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph must have at least one node".into()));
        }
        if n > MAX_NODES {
            return Err(Error::Resource {
                what: "node count",
                estimate: n,
                cap: MAX_NODES,
            });
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) has an endpoint outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adj = vec![0u64; n];
        for &(a, b) in &set {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        Ok(Self {
            n,
            adj,
            edges: set.into_iter().collect(),
            labels: None,
            natural_components: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidGraph(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    fn with_components(mut self, components: Vec<Vec<usize>>) -> Self {
        self.natural_components = Some(components);
        self
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbour mask of `node`.
    #[inline]
    pub fn neighbor_mask(&self, node: usize) -> u64 {
        self.adj[node]
    }

    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        let mask = self.adj[node];
        (0..self.n).filter(move |&j| mask >> j & 1 == 1)
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    /// Mask with one bit per node.
    #[inline]
    pub fn full_mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    /// True when no two nodes of `mask` interfere.
    #[inline]
    pub fn is_independent(&self, mask: u64) -> bool {
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            if self.adj[i] & mask != 0 {
                return false;
            }
            rest &= rest - 1;
        }
        true
    }

    pub fn label(&self, node: usize) -> String {
        match &self.labels {
            Some(l) => l[node].clone(),
            None => node.to_string(),
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn natural_components(&self) -> Option<&[Vec<usize>]> {
        self.natural_components.as_deref()
    }

    /// Adjacency-list text, one line per node: `id: neighbor,neighbor,...`.
    pub fn to_adjacency_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let nbrs: Vec<String> = self.neighbors(i).map(|j| j.to_string()).collect();
            let _ = writeln!(out, "{}: {}", i, nbrs.join(","));
        }
        out
    }
}

/// Compact form: `complete_partite(5,5)`, `grid(4,4)`, `grid(4,4,wrap)`,
/// `line(3)`, `ring(6)`, `star(4)`, `explicit(3;0-1,1-2)`.
impl std::str::FromStr for TopologySpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidDescriptor(format!("{text:?}: {why}"));
        let t = text.trim();
        let open = t.find('(').ok_or_else(|| bad("expected name(arguments)"))?;
        if !t.ends_with(')') {
            return Err(bad("missing closing parenthesis"));
        }
        let name = t[..open].trim();
        let body = &t[open + 1..t.len() - 1];
        let ints = |s: &str| -> Result<Vec<usize>> {
            s.split(',')
                .map(|x| x.trim())
                .filter(|x| !x.is_empty())
                .map(|x| x.parse::<usize>().map_err(|_| bad(&format!("{x:?} is not a count"))))
                .collect()
        };
        let single = |s: &str| -> Result<usize> {
            match ints(s)?.as_slice() {
                [n] => Ok(*n),
                _ => Err(bad("expected one count")),
            }
        };
        match name {
            "complete_partite" => Ok(TopologySpec::CompletePartite { sizes: ints(body)? }),
            "grid" => {
                let parts: Vec<&str> = body.split(',').map(str::trim).collect();
                let wrap = match parts.get(2) {
                    None => false,
                    Some(&"wrap") | Some(&"true") => true,
                    Some(&"nowrap") | Some(&"false") => false,
                    Some(other) => return Err(bad(&format!("unknown grid flag {other:?}"))),
                };
                if parts.len() < 2 || parts.len() > 3 {
                    return Err(bad("grid takes rows, cols and an optional wrap flag"));
                }
                Ok(TopologySpec::Grid { rows: single(parts[0])?, cols: single(parts[1])?, wrap })
            }
            "line" => Ok(TopologySpec::Line { n: single(body)? }),
            "ring" => Ok(TopologySpec::Ring { n: single(body)? }),
            "star" => Ok(TopologySpec::Star { leaves: single(body)? }),
            "explicit" => {
                let (n, list) = body.split_once(';').unwrap_or((body, ""));
                let n = single(n)?;
                let edges = list
                    .split(',')
                    .map(str::trim)
                    .filter(|e| !e.is_empty())
                    .map(|e| {
                        let (a, b) = e.split_once('-').ok_or_else(|| bad(&format!("edge {e:?} is not a-b")))?;
                        Ok((single(a)?, single(b)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(TopologySpec::Explicit { n, edges, labels: None })
            }
            other => Err(bad(&format!("unknown topology {other:?}"))),
        }
    }
}

impl fmt::Display for TopologySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            TopologySpec::CompletePartite { sizes } => write!(f, "complete_partite({})", join(sizes)),
            TopologySpec::Grid { rows, cols, wrap } => {
                write!(f, "grid({rows},{cols}{})", if *wrap { ",wrap" } else { "" })
            }
            TopologySpec::Line { n } => write!(f, "line({n})"),
            TopologySpec::Ring { n } => write!(f, "ring({n})"),
            TopologySpec::Star { leaves } => write!(f, "star({leaves})"),
            TopologySpec::Explicit { n, edges, .. } => {
                let e: Vec<String> = edges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
                write!(f, "explicit({n};{})", e.join(","))
            }
        }
    }
}

/// Builds the canonical graph for a topology descriptor.
pub fn build_topology(spec: &TopologySpec) -> Result<InterferenceGraph> {
    match spec {
        TopologySpec::CompletePartite { sizes } => {
            if sizes.is_empty() {
                return Err(Error::InvalidDescriptor("empty component size list".into()));
            }
            if sizes.contains(&0) {
                return Err(Error::InvalidDescriptor("component of size zero".into()));
            }
            let n: usize = sizes.iter().sum();
            let mut components = Vec::with_capacity(sizes.len());
            let mut start = 0;
            for &s in sizes {
                components.push((start..start + s).collect::<Vec<_>>());
                start += s;
            }
            let mut edges = Vec::new();
            for (k, ck) in components.iter().enumerate() {
                for cl in &components[k + 1..] {
                    for &a in ck {
                        for &b in cl {
                            edges.push((a, b));
                        }
                    }
                }
            }
            Ok(InterferenceGraph::from_edges(n, &edges)?.with_components(components))
        }
        TopologySpec::Grid { rows, cols, wrap } => {
            let (r, c) = (*rows, *cols);
            if r == 0 || c == 0 {
                return Err(Error::InvalidDescriptor("grid needs rows, cols >= 1".into()));
            }
            let id = |i: usize, j: usize| i * c + j;
            let mut edges = Vec::new();
            for i in 0..r {
                for j in 0..c {
                    if j + 1 < c {
                        edges.push((id(i, j), id(i, j + 1)));
                    } else if *wrap && c > 2 {
                        edges.push((id(i, j), id(i, 0)));
                    }
                    if i + 1 < r {
                        edges.push((id(i, j), id(i + 1, j)));
                    } else if *wrap && r > 2 {
                        edges.push((id(i, j), id(0, j)));
                    }
                }
            }
            let labels = (0..r)
                .flat_map(|i| (0..c).map(move |j| format!("({},{})", i + 1, j + 1)))
                .collect();
            let g = InterferenceGraph::from_edges(r * c, &edges)?.with_labels(labels)?;
            // Parity colouring with 1-based coordinates: V_1 holds odd i + j.
            // On a torus with an odd side the parity split is not proper; the
            // decomposition step reports that.
            let mut odd = Vec::new();
            let mut even = Vec::new();
            for i in 0..r {
                for j in 0..c {
                    if (i + j) % 2 == 1 {
                        odd.push(id(i, j));
                    } else {
                        even.push(id(i, j));
                    }
                }
            }
            let comps = if odd.is_empty() { vec![even] } else { vec![odd, even] };
            Ok(g.with_components(comps))
        }
        TopologySpec::Line { n } => {
            if *n == 0 {
                return Err(Error::InvalidDescriptor("line needs n >= 1".into()));
            }
            let edges: Vec<_> = (1..*n).map(|i| (i - 1, i)).collect();
            InterferenceGraph::from_edges(*n, &edges)
        }
        TopologySpec::Ring { n } => {
            if *n < 3 {
                return Err(Error::InvalidDescriptor("ring needs n >= 3".into()));
            }
            let edges: Vec<_> = (0..*n).map(|i| (i, (i + 1) % n)).collect();
            InterferenceGraph::from_edges(*n, &edges)
        }
        TopologySpec::Star { leaves } => {
            if *leaves == 0 {
                return Err(Error::InvalidDescriptor("star needs at least one leaf".into()));
            }
            let edges: Vec<_> = (1..=*leaves).map(|j| (0, j)).collect();
            let comps = vec![vec![0], (1..=*leaves).collect()];
            Ok(InterferenceGraph::from_edges(leaves + 1, &edges)?.with_components(comps))
        }
        TopologySpec::Explicit { n, edges, labels } => {
            let g = InterferenceGraph::from_edges(*n, edges)?;
            match labels {
                Some(l) => g.with_labels(l.clone()),
                None => Ok(g),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_partite_5_5() {
        let g = build_topology(&TopologySpec::CompletePartite { sizes: vec![5, 5] }).unwrap();
        assert_eq!(g.n_nodes(), 10);
        assert_eq!(g.n_edges(), 25);
    }

    #[test]
    fn grid_2x2_is_four_cycle() {
        let g = build_topology(&TopologySpec::Grid { rows: 2, cols: 2, wrap: false }).unwrap();
        assert_eq!(g.n_nodes(), 4);
        assert_eq!(g.n_edges(), 4);
        for i in 0..4 {
            assert_eq!(g.neighbors(i).count(), 2);
        }
        let torus = build_topology(&TopologySpec::Grid { rows: 2, cols: 2, wrap: true }).unwrap();
        assert_eq!(torus.edges(), g.edges());
    }

    #[test]
    fn torus_4x4_is_four_regular() {
        let g = build_topology(&TopologySpec::Grid { rows: 4, cols: 4, wrap: true }).unwrap();
        assert_eq!(g.n_edges(), 32);
        assert!((0..16).all(|i| g.neighbors(i).count() == 4));
    }

    #[test]
    fn compact_descriptors_round_trip() {
        for text in ["complete_partite(5,5)", "grid(2,2)", "grid(4,4,wrap)", "line(3)", "ring(6)", "star(4)", "explicit(3;0-1,1-2)"] {
            let spec: TopologySpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert_eq!("grid(2, 3)".parse::<TopologySpec>().unwrap(), TopologySpec::Grid { rows: 2, cols: 3, wrap: false });
        for bad in ["grid(2)", "cube(3)", "line(x)", "ring 4", "grid(2,2,maybe)"] {
            assert!(matches!(bad.parse::<TopologySpec>(), Err(Error::InvalidDescriptor(_))), "{bad}");
        }
    }

    #[test]
    fn empty_sizes_rejected() {
        let err = build_topology(&TopologySpec::CompletePartite { sizes: vec![] }).unwrap_err();
        assert!(matches!(err, Error::InvalidDescriptor(_)));
    }

    #[test]
    fn self_loop_and_range_rejected() {
        assert!(InterferenceGraph::from_edges(3, &[(1, 1)]).is_err());
        assert!(InterferenceGraph::from_edges(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn odd_ring_still_builds() {
        let g = build_topology(&TopologySpec::Ring { n: 5 }).unwrap();
        assert_eq!(g.n_edges(), 5);
    }

    #[test]
    fn adjacency_text() {
        let g = build_topology(&TopologySpec::Line { n: 3 }).unwrap();
        assert_eq!(g.to_adjacency_text(), "0: 1\n1: 0,2\n2: 1\n");
    }
}
