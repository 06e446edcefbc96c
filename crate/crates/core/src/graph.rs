//! Simple undirected graphs with sorted adjacency arrays.
//!
//! A [`Graph`] is immutable once built. Every neighbor list is sorted
//! ascending, so iteration order is deterministic and membership tests are
//! binary searches.

use std::fmt;

use crate::error::GraphError;

/// Dense zero-based vertex index. All tie-breaking in the crate uses the
/// natural order on this type.
pub type VertexId = usize;

/// A simple undirected graph.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<VertexId>>,
    m: usize,
}

/// Result of building a graph from a raw edge list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedGraph {
    pub graph: Graph,
    /// Number of input edges dropped because the same unordered pair had
    /// already been seen.
    pub duplicate_edges: usize,
}

impl Graph {
    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    /// Builds a graph from unordered pairs. Duplicates (in either
    /// orientation) are dropped and counted; self-loops and out-of-range
    /// endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<ParsedGraph, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::OutOfRange {
                    line: None,
                    vertex: u.max(v),
                    n,
                });
            }
            if u == v {
                return Err(GraphError::SelfLoop { line: None, vertex: u });
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        Ok(Self::finish(adj))
    }

    fn finish(mut adj: Vec<Vec<VertexId>>) -> ParsedGraph {
        let mut doubled = 0usize;
        let mut raw = 0usize;
        for list in &mut adj {
            raw += list.len();
            list.sort_unstable();
            list.dedup();
            doubled += list.len();
        }
        ParsedGraph {
            graph: Graph { adj, m: doubled / 2 },
            duplicate_edges: (raw - doubled) / 2,
        }
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::from_edges(n, edges).expect("complete graph").graph
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|v| (v - 1, v))).expect("path").graph
    }

    /// Cycle on `n >= 3` vertices.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least three vertices");
        let edges = (0..n).map(|v| (v, (v + 1) % n));
        Self::from_edges(n, edges).expect("cycle").graph
    }

    /// Star `K_{1,leaves}` with center 0.
    pub fn star(leaves: usize) -> Self {
        Self::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v)))
            .expect("star")
            .graph
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    #[inline]
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        // search the shorter list
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adj[a].binary_search(&b).is_ok()
    }

    /// All edges `(u, v)` with `u < v`, ascending by `u` then `v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let start = list.partition_point(|&v| v <= u);
            list[start..].iter().map(move |&v| (u, v))
        })
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.n()
    }

    /// Checks symmetry, loop-freedom, sortedness and edge-count consistency.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut total = 0usize;
        for (u, list) in self.adj.iter().enumerate() {
            total += list.len();
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("adjacency of {u} not strictly ascending"));
            }
            for &v in list {
                if v == u {
                    return Err(format!("self-loop at {u}"));
                }
                if v >= self.n() {
                    return Err(format!("neighbor {v} of {u} out of range"));
                }
                if self.adj[v].binary_search(&u).is_err() {
                    return Err(format!("edge {u}-{v} not symmetric"));
                }
            }
        }
        if total != 2 * self.m {
            return Err(format!("m = {} but adjacency sizes sum to {total}", self.m));
        }
        Ok(())
    }

    /// Number of connected components (BFS).
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n()];
        let mut queue = std::collections::VecDeque::new();
        let mut count = 0;
        for s in self.vertices() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        count
    }

    /// Writes the graph in the edge-list text format accepted by
    /// [`parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n(), self.m());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges=[", self.n())?;
        for (i, (u, v)) in self.edges().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{u}-{v}")?;
        }
        write!(f, "])")
    }
}

/// Parses the edge-list text format.
///
/// The first line that is neither blank nor a `#` comment holds `n m`; it is
/// followed by exactly `m` lines `u v` with `0 <= u, v < n`. Comment and blank
/// lines may appear anywhere.
pub fn parse_edge_list(text: &str) -> Result<ParsedGraph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(GraphError::MissingHeader)?;
    let (n, m) = parse_pair(hline, header)?;

    let mut adj = vec![Vec::new(); n];
    let mut seen = 0usize;
    for (line, text) in lines {
        seen += 1;
        if seen > m {
            return Err(GraphError::EdgeCount { expected: m, found: seen });
        }
        let (u, v) = parse_pair(line, text)?;
        if u >= n || v >= n {
            return Err(GraphError::OutOfRange {
                line: Some(line),
                vertex: u.max(v),
                n,
            });
        }
        if u == v {
            return Err(GraphError::SelfLoop {
                line: Some(line),
                vertex: u,
            });
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    if seen != m {
        return Err(GraphError::EdgeCount { expected: m, found: seen });
    }
    Ok(Graph::finish(adj))
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize), GraphError> {
    let mut it = text.split_whitespace();
    let bad = || GraphError::Syntax {
        line,
        content: text.to_string(),
    };
    let a = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
    let b = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
    if it.next().is_some() {
        return Err(bad());
    }
    Ok((a, b))
}
