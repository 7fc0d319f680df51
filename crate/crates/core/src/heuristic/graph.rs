use crate::error::{Error, Result};
use crate::kinematics::{KinematicModel, DOF};

/// Undirected joint graph. Neighbor lists are kept sorted so aggregation order is fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManipulatorGraph {
    nodes: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl ManipulatorGraph {
    pub fn from_edges(nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::invalid("graph needs at least one node"));
        }
        let mut neighbors = vec![Vec::new(); nodes];
        let mut canonical = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= nodes || b >= nodes || a == b {
                return Err(Error::invalid(format!(
                    "bad edge ({a}, {b}) for {nodes} nodes"
                )));
            }
            let e = (a.min(b), a.max(b));
            if canonical.contains(&e) {
                continue;
            }
            canonical.push(e);
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        canonical.sort_unstable();
        neighbors.iter_mut().for_each(|n| n.sort_unstable());
        Ok(Self {
            nodes,
            edges: canonical,
            neighbors,
        })
    }

    /// A path graph `0 - 1 - ... - (nodes-1)`.
    pub fn chain(nodes: usize) -> Result<Self> {
        let edges: Vec<_> = (1..nodes).map(|i| (i - 1, i)).collect();
        Self::from_edges(nodes, &edges)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.nodes];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for &m in &self.neighbors[n] {
                if !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// The joint chain of `model`, base joint first.
pub fn build_graph(model: &KinematicModel) -> Result<ManipulatorGraph> {
    if model.dh.len() != DOF {
        return Err(Error::invalid(format!(
            "expected {DOF} joints, got {}",
            model.dh.len()
        )));
    }
    ManipulatorGraph::chain(DOF)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arm_chain() {
        let g = build_graph(&KinematicModel::ur5e()).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(2), &[1, 3]);
        assert!(g.is_connected());
        assert!((0..6).all(|i| g.degree(i) <= 2));
        assert_eq!(g, build_graph(&KinematicModel::ur5e()).unwrap());
    }

    #[test]
    fn edge_order_does_not_matter() {
        let a = ManipulatorGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let b = ManipulatorGraph::from_edges(3, &[(2, 1), (1, 0)]).unwrap();
        assert_eq!(a, b);
        assert!(ManipulatorGraph::from_edges(3, &[(0, 3)]).is_err());
        assert!(ManipulatorGraph::from_edges(3, &[(1, 1)]).is_err());
    }
}
