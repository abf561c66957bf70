use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{symmetric_min_eigenvalue, GramSource};
use crate::targets::GraphTarget;

/// Balancing function `g` with `g(t) = t g(1/t)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Balancing {
    /// `min(1, t)`
    #[default]
    Min,
    /// `t / (1 + t)`
    Barker,
}

impl Balancing {
    #[inline]
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Balancing::Min => t.min(1.0),
            Balancing::Barker => t / (1.0 + t),
        }
    }
}

/// A finite graph with neighbourhoods, a balancing function and a positive
/// semidefinite base kernel matrix over its vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSpec {
    neighbours: Vec<Vec<usize>>,
    balancing: Balancing,
    kernel: Vec<f64>,
}

impl GraphSpec {
    /// Validates the neighbourhoods (symmetric, strongly connected, aperiodic)
    /// and the kernel (symmetric, PSD up to round-off).
    pub fn new(
        neighbours: Vec<Vec<usize>>,
        balancing: Balancing,
        kernel: Vec<f64>,
    ) -> Result<Self> {
        let n = neighbours.len();
        if n == 0 {
            return Err(Error::Contract("graph has no vertices".into()));
        }
        if kernel.len() != n * n {
            return Err(Error::Contract(format!("kernel matrix must be {n}x{n}")));
        }
        for (x, nb) in neighbours.iter().enumerate() {
            for &y in nb {
                if y >= n {
                    return Err(Error::Contract(format!("edge {x}->{y} leaves the graph")));
                }
                if !neighbours[y].contains(&x) {
                    return Err(Error::Contract(format!(
                        "edge {x}->{y} has no reverse edge; detailed balance needs symmetric neighbourhoods"
                    )));
                }
            }
        }
        if !strongly_connected(&neighbours) {
            return Err(Error::Contract("graph is not strongly connected".into()));
        }
        if period(&neighbours) != 1 {
            return Err(Error::Contract("graph is periodic".into()));
        }
        let mut trace = 0.0;
        for i in 0..n {
            trace += kernel[i * n + i];
            for j in 0..n {
                let (a, b) = (kernel[i * n + j], kernel[j * n + i]);
                if !a.is_finite() || (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                    return Err(Error::Contract(format!(
                        "kernel matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let min_eig = symmetric_min_eigenvalue(n, &kernel);
        if min_eig < -1e-10 * trace.abs().max(1.0) {
            return Err(Error::Contract(format!(
                "kernel matrix is not PSD (min eigenvalue {min_eig})"
            )));
        }
        Ok(GraphSpec {
            neighbours,
            balancing,
            kernel,
        })
    }

    pub fn len(&self) -> usize {
        self.neighbours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbours.is_empty()
    }

    pub fn neighbours(&self, x: usize) -> &[usize] {
        &self.neighbours[x]
    }

    pub fn balancing(&self) -> Balancing {
        self.balancing
    }

    #[inline]
    fn k(&self, x: usize, y: usize) -> f64 {
        self.kernel[x * self.neighbours.len() + y]
    }
}

fn reachable_from_zero(adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[0] = Some(0);
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if level[v].is_none() {
                level[v] = Some(level[u].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    level
}

fn strongly_connected(adj: &[Vec<usize>]) -> bool {
    let mut reverse = vec![Vec::new(); adj.len()];
    for (u, nb) in adj.iter().enumerate() {
        for &v in nb {
            reverse[v].push(u);
        }
    }
    reachable_from_zero(adj).iter().all(Option::is_some)
        && reachable_from_zero(&reverse).iter().all(Option::is_some)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of a strongly connected graph: gcd of `level(u) + 1 − level(v)`
/// over all edges, with BFS levels from vertex 0.
fn period(adj: &[Vec<usize>]) -> usize {
    let level = reachable_from_zero(adj);
    let mut g = 0;
    for (u, nb) in adj.iter().enumerate() {
        for &v in nb {
            let (lu, lv) = (level[u].unwrap() as i64, level[v].unwrap() as i64);
            g = gcd(g, (lu + 1 - lv).unsigned_abs() as usize);
        }
    }
    g
}

/// Stein kernel of the locally balanced jump process on a graph.
pub struct ZanellaStein<'a> {
    graph: &'a GraphSpec,
    target: &'a GraphTarget,
}

impl<'a> ZanellaStein<'a> {
    pub fn new(graph: &'a GraphSpec, target: &'a GraphTarget) -> Result<Self> {
        if graph.len() != target.len() {
            return Err(Error::Contract(format!(
                "graph has {} vertices but target has {} masses",
                graph.len(),
                target.len()
            )));
        }
        Ok(ZanellaStein { graph, target })
    }

    pub fn eval(&self, x: usize, y: usize) -> Result<f64> {
        let n = self.graph.len();
        if x >= n || y >= n {
            return Err(Error::Domain(format!(
                "vertex pair ({x}, {y}) not in 0..{n}"
            )));
        }
        Ok(self.eval_unchecked(x, y))
    }

    fn eval_unchecked(&self, x: usize, y: usize) -> f64 {
        let pi = self.target.masses();
        let g = self.graph.balancing;
        let mut total = 0.0;
        for &xp in self.graph.neighbours(x) {
            let gx = g.apply(pi[xp] / pi[x]);
            for &yp in self.graph.neighbours(y) {
                let gy = g.apply(pi[yp] / pi[y]);
                let diff = self.graph.k(xp, yp) - self.graph.k(xp, y) - self.graph.k(x, yp)
                    + self.graph.k(x, y);
                total += gx * gy * diff;
            }
        }
        total
    }
}

/// Vertex samples paired with a Zanella–Stein kernel, for Gram assembly.
pub struct GraphSamples<'a> {
    kernel: ZanellaStein<'a>,
    vertices: &'a [usize],
}

impl<'a> GraphSamples<'a> {
    pub fn new(kernel: ZanellaStein<'a>, vertices: &'a [usize]) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Contract("need at least one sample".into()));
        }
        if let Some(v) = vertices.iter().find(|&&v| v >= kernel.graph.len()) {
            return Err(Error::Domain(format!("vertex {v} not in graph")));
        }
        Ok(GraphSamples { kernel, vertices })
    }
}

impl GramSource for GraphSamples<'_> {
    fn len(&self) -> usize {
        self.vertices.len()
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.kernel
            .eval_unchecked(self.vertices[i], self.vertices[j])
    }

    fn provenance(&self) -> String {
        format!("zanella/{:?}", self.kernel.graph.balancing).to_lowercase()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Vec<Vec<usize>> {
        (0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect()
    }

    fn identity(n: usize) -> Vec<f64> {
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            k[i * n + i] = 1.0;
        }
        k
    }

    #[test]
    fn balancing_identity() {
        for g in [Balancing::Min, Balancing::Barker] {
            for t in [0.01, 0.3, 1.0, 2.5, 170.0] {
                let lhs = g.apply(t);
                let rhs = t * g.apply(1.0 / t);
                assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
            }
        }
    }

    #[test]
    fn symmetric_on_odd_cycle() {
        let graph = GraphSpec::new(cycle(5), Balancing::Barker, identity(5)).unwrap();
        let target = GraphTarget::new(vec![1.0, 2.0, 0.5, 3.0, 1.5]).unwrap();
        let k = ZanellaStein::new(&graph, &target).unwrap();
        for x in 0..5 {
            for y in 0..5 {
                assert!((k.eval(x, y).unwrap() - k.eval(y, x).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_kernel_on_uniform_complete_graph_vanishes() {
        let n = 4;
        let nb: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).collect())
            .collect();
        let graph = GraphSpec::new(nb, Balancing::Min, vec![2.5; n * n]).unwrap();
        let target = GraphTarget::new(vec![1.0; n]).unwrap();
        let k = ZanellaStein::new(&graph, &target).unwrap();
        for x in 0..n {
            for y in 0..n {
                assert_eq!(k.eval(x, y).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn validation() {
        // even cycle is bipartite: period 2
        assert!(GraphSpec::new(cycle(4), Balancing::Min, identity(4)).is_err());
        // disconnected
        let nb = vec![vec![1], vec![0], vec![2]];
        assert!(GraphSpec::new(nb, Balancing::Min, identity(3)).is_err());
        // one-way edge
        let nb = vec![vec![1, 2], vec![2], vec![0, 1]];
        assert!(GraphSpec::new(nb, Balancing::Min, identity(3)).is_err());
        // indefinite kernel
        let mut k = identity(3);
        k[1] = 3.0;
        k[3] = 3.0;
        assert!(GraphSpec::new(cycle(3), Balancing::Min, k).is_err());
    }

    #[test]
    fn unknown_vertex_is_domain_error() {
        let graph = GraphSpec::new(cycle(3), Balancing::Min, identity(3)).unwrap();
        let target = GraphTarget::new(vec![1.0; 3]).unwrap();
        let k = ZanellaStein::new(&graph, &target).unwrap();
        assert!(matches!(k.eval(0, 3), Err(Error::Domain(_))));
    }
}
