//! Communication graphs, their Laplacian gossip matrices and spectral data.

use std::collections::VecDeque;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named graph families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologyKind {
    Path,
    Star,
    Complete,
    Ring,
    /// Path whose first edge has weight `1 − a`.
    WeightedPath { a: f64 },
    /// Path `0 − 1 − 2` closed by an edge `(0, 2)` of weight `a`.
    WeightedTriangle { a: f64 },
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Connected undirected graph with positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: usize,
    edges: Vec<Edge>,
    kind: TopologyKind,
}

impl Topology {
    pub fn build(kind: TopologyKind, nodes: usize) -> Result<Self> {
        let unit = |i, j| Edge { i, j, weight: 1.0 };
        let check_weight = |a: f64| {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidArgument(format!(
                    "weight parameter a = {a} must lie in [0, 1]"
                )));
            }
            Ok(())
        };
        let edges: Vec<Edge> = match kind {
            TopologyKind::WeightedTriangle { a } => {
                check_weight(a)?;
                if nodes != 3 {
                    return Err(Error::InvalidArgument(
                        "the weighted triangle has exactly 3 nodes".into(),
                    ));
                }
                let mut e = vec![unit(0, 1), unit(1, 2)];
                if a > 0.0 {
                    e.push(Edge { i: 0, j: 2, weight: a });
                }
                e
            }
            _ if nodes < 2 => {
                return Err(Error::InvalidArgument("a topology needs at least 2 nodes".into()))
            }
            TopologyKind::Path => (1..nodes).map(|i| unit(i - 1, i)).collect(),
            TopologyKind::Star => (1..nodes).map(|i| unit(0, i)).collect(),
            TopologyKind::Complete => (0..nodes)
                .flat_map(|i| (i + 1..nodes).map(move |j| unit(i, j)))
                .collect(),
            TopologyKind::Ring => {
                if nodes < 3 {
                    return Err(Error::InvalidArgument("a ring needs at least 3 nodes".into()));
                }
                (0..nodes).map(|i| unit(i, (i + 1) % nodes)).collect()
            }
            TopologyKind::WeightedPath { a } => {
                check_weight(a)?;
                let mut e: Vec<Edge> = (1..nodes).map(|i| unit(i - 1, i)).collect();
                if a < 1.0 {
                    e[0].weight = 1.0 - a;
                } else {
                    e.remove(0);
                }
                e
            }
            TopologyKind::Custom => {
                return Err(Error::InvalidArgument(
                    "custom topologies are built from an edge list".into(),
                ))
            }
        };
        Self::from_parts(nodes, edges, kind)
    }

    pub fn custom(nodes: usize, edges: Vec<Edge>) -> Result<Self> {
        Self::from_parts(nodes, edges, TopologyKind::Custom)
    }

    fn from_parts(nodes: usize, edges: Vec<Edge>, kind: TopologyKind) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidArgument("a topology needs at least 2 nodes".into()));
        }
        for e in &edges {
            if e.i >= nodes || e.j >= nodes {
                return Err(Error::NodeOutOfRange {
                    index: e.i.max(e.j),
                    nodes,
                });
            }
            if e.i == e.j {
                return Err(Error::InvalidArgument(format!("self-loop at node {}", e.i)));
            }
            if !(e.weight > 0.0) || !e.weight.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "edge ({}, {}) has non-positive weight {}",
                    e.i, e.j, e.weight
                )));
            }
        }
        let t = Self { nodes, edges, kind };
        if t.hop_distances(&[0]).iter().any(Option::is_none) {
            return Err(Error::Disconnected);
        }
        Ok(t)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for e in &self.edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        adj
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.i == node || e.j == node)
            .count()
    }

    /// Unweighted hop distance from the nearest node of `sources`.
    pub fn hop_distances(&self, sources: &[usize]) -> Vec<Option<usize>> {
        let adj = self.neighbors();
        let mut dist = vec![None; self.nodes];
        let mut queue = VecDeque::new();
        for &s in sources {
            if s < self.nodes && dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued nodes have distances");
            for &v in &adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Hop diameter via all-pairs BFS; weights are ignored.
    pub fn diameter(&self) -> usize {
        (0..self.nodes)
            .flat_map(|s| self.hop_distances(&[s]))
            .map(|d| d.expect("topology is connected"))
            .max()
            .unwrap_or(0)
    }

    /// `M` on the first line, then one `i j weight` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.nodes);
        for e in &self.edges {
            writeln!(out, "{} {} {}", e.i, e.j, e.weight).expect("writing to a String");
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let nodes: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("missing node count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("node count: {e}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("expected `i j weight`, got `{line}`")));
            }
            let bad = |what: &str| Error::Parse(format!("bad {what} in `{line}`"));
            edges.push(Edge {
                i: parts[0].parse().map_err(|_| bad("node"))?,
                j: parts[1].parse().map_err(|_| bad("node"))?,
                weight: parts[2].parse().map_err(|_| bad("weight"))?,
            });
        }
        Self::custom(nodes, edges)
    }

    /// Weighted graph Laplacian `D − A`.
    pub fn laplacian_matrix(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.nodes, self.nodes);
        for e in &self.edges {
            w[(e.i, e.j)] -= e.weight;
            w[(e.j, e.i)] -= e.weight;
            w[(e.i, e.i)] += e.weight;
            w[(e.j, e.j)] += e.weight;
        }
        w
    }
}

/// Laplacian gossip matrix with its cached spectrum.
#[derive(Debug, Clone)]
pub struct GossipMatrix {
    w: DMatrix<f64>,
    /// Eigenvalues of `W`, descending; the last one is (numerically) zero.
    eigenvalues: Vec<f64>,
    mixing: DMatrix<f64>,
}

impl GossipMatrix {
    pub fn laplacian(topology: &Topology) -> Result<Self> {
        Self::from_matrix(topology.laplacian_matrix())
    }

    /// Wraps a symmetric PSD matrix with constant kernel.
    pub fn from_matrix(w: DMatrix<f64>) -> Result<Self> {
        let m = w.nrows();
        if m < 2 || w.ncols() != m {
            return Err(Error::InvalidArgument(
                "gossip matrix must be square with at least 2 rows".into(),
            ));
        }
        let mut eigenvalues: Vec<f64> = SymmetricEigen::new(w.clone()).eigenvalues.iter().copied().collect();
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let lambda_max = eigenvalues[0];
        let lambda_min_pos = eigenvalues[m - 2];
        if !(lambda_max > 0.0) || lambda_min_pos <= 1e-10 * lambda_max {
            return Err(Error::Disconnected);
        }
        let mixing = DMatrix::identity(m, m) - &w / lambda_max;
        Ok(Self {
            w,
            eigenvalues,
            mixing,
        })
    }

    pub fn nodes(&self) -> usize {
        self.w.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `λ₁(W)`.
    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `λ_{M−1}(W)`, the smallest positive eigenvalue.
    pub fn lambda_min_positive(&self) -> f64 {
        self.eigenvalues[self.nodes() - 2]
    }

    /// `χ = λ₁ / λ_{M−1}`.
    pub fn chi(&self) -> f64 {
        self.lambda_max() / self.lambda_min_positive()
    }

    /// `W̃ = I − W / λ₁`.
    pub fn mixing(&self) -> &DMatrix<f64> {
        &self.mixing
    }

    /// `λ₂(W̃) = 1 − 1/χ`.
    pub fn mixing_lambda2(&self) -> f64 {
        1.0 - 1.0 / self.chi()
    }

    /// Eigenvalues of `W̃` from a separate eigensolve, descending.
    pub fn mixing_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.mixing.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }
}

/// Graph families whose `χ` can be tuned through one weight parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TunableFamily {
    WeightedPath,
    WeightedTriangle,
}

impl TunableFamily {
    fn kind(self, a: f64) -> TopologyKind {
        match self {
            TunableFamily::WeightedPath => TopologyKind::WeightedPath { a },
            TunableFamily::WeightedTriangle => TopologyKind::WeightedTriangle { a },
        }
    }
}

fn chi_at(family: TunableFamily, nodes: usize, a: f64) -> Result<(Topology, GossipMatrix)> {
    let t = Topology::build(family.kind(a), nodes)?;
    let g = GossipMatrix::laplacian(&t)?;
    Ok((t, g))
}

/// Bisection on the family's weight parameter until `|χ − target| ≤ tol·target`.
///
/// The weighted path covers `[χ(a=0), ∞)`; the weighted triangle covers `[1, 3]`.
pub fn tune_chi(
    family: TunableFamily,
    nodes: usize,
    target: f64,
    tol: f64,
) -> Result<(Topology, GossipMatrix)> {
    let nodes = match family {
        TunableFamily::WeightedTriangle => 3,
        TunableFamily::WeightedPath => nodes,
    };
    let (t0, g0) = chi_at(family, nodes, 0.0)?;
    let chi0 = g0.chi();
    if (chi0 - target).abs() <= tol * target {
        return Ok((t0, g0));
    }
    // chi increases with a on the weighted path, decreases on the triangle.
    let (mut lo, mut hi) = match family {
        TunableFamily::WeightedPath => {
            if target < chi0 {
                return Err(Error::ChiOutOfRange {
                    target,
                    min: chi0,
                    max: f64::INFINITY,
                });
            }
            let mut hi = 0.5;
            while chi_at(family, nodes, hi)?.1.chi() < target {
                hi = 1.0 - (1.0 - hi) / 2.0;
                if 1.0 - hi < 1e-15 {
                    return Err(Error::ChiOutOfRange {
                        target,
                        min: chi0,
                        max: f64::INFINITY,
                    });
                }
            }
            (0.0, hi)
        }
        TunableFamily::WeightedTriangle => {
            let chi1 = chi_at(family, nodes, 1.0)?.1.chi();
            if target > chi0 || target < chi1 * (1.0 - tol) {
                return Err(Error::ChiOutOfRange {
                    target,
                    min: chi1,
                    max: chi0,
                });
            }
            (0.0, 1.0)
        }
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (t, g) = chi_at(family, nodes, mid)?;
        let chi = g.chi();
        if (chi - target).abs() <= tol * target {
            return Ok((t, g));
        }
        let below = chi < target;
        match (family, below) {
            (TunableFamily::WeightedPath, true) | (TunableFamily::WeightedTriangle, false) => {
                lo = mid
            }
            _ => hi = mid,
        }
    }
    let (t, g) = chi_at(family, nodes, 0.5 * (lo + hi))?;
    Ok((t, g))
}
