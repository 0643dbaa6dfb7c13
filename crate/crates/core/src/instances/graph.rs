use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::InstanceError;

/// An undirected multigraph on vertices `0..vertices`. Loops and parallel
/// edges are allowed; a loop adds 2 to the degree of its vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    /// Declared regularity degree, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
}

impl Graph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self, InstanceError> {
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= vertices || v >= vertices) {
            return Err(InstanceError::EdgeOutOfRange { u, v, vertices });
        }
        Ok(Graph { vertices, edges, degree: None })
    }

    /// The cycle `0 - 1 - … - (n-1) - 0`; for `n = 3` the triangle.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a simple cycle needs at least 3 vertices");
        let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph { vertices: n, edges, degree: Some(2) }
    }

    pub fn degree_of(&self, v: usize) -> usize {
        self.edges.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum()
    }

    /// Edge indices incident to `v`; a loop is listed twice.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            if a == v {
                out.push(k);
            }
            if b == v {
                out.push(k);
            }
        }
        out
    }

    pub fn is_regular(&self, d: usize) -> bool {
        (0..self.vertices).all(|v| self.degree_of(v) == d)
    }

    /// Connected components as sorted vertex lists, ordered by least vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.vertices).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for v in 0..self.vertices {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        groups.into_values().collect()
    }
}

/// A `d`-regular multigraph from the pairing (configuration) model: `n·d`
/// half-edges are shuffled and paired consecutively. Loops and parallel
/// edges are kept. Deterministic per seed.
pub fn random_regular_graph(n: usize, d: usize, seed: u64) -> Result<Graph, InstanceError> {
    if (n * d) % 2 == 1 {
        return Err(InstanceError::OddPairing { n, d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    points.shuffle(&mut rng);
    let edges = points.chunks(2).map(|p| (p[0].min(p[1]), p[0].max(p[1]))).collect();
    Ok(Graph { vertices: n, edges, degree: Some(d as u32) })
}
