use crate::kinematics::JointVector;

/// A rooted tree of configurations with cost-to-come. Vertex 0 is the root.
#[derive(Debug, Clone)]
pub struct Tree {
    vertices: Vec<JointVector>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    cost: Vec<f64>,
}

impl Tree {
    pub fn new(root: JointVector) -> Self {
        Self {
            vertices: vec![root],
            parent: vec![None],
            children: vec![Vec::new()],
            cost: vec![0.0],
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> &JointVector {
        &self.vertices[i]
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn cost(&self, i: usize) -> f64 {
        self.cost[i]
    }

    pub fn add(&mut self, q: JointVector, parent: usize) -> usize {
        let id = self.vertices.len();
        let c = self.cost[parent] + self.vertices[parent].distance(&q);
        self.vertices.push(q);
        self.parent.push(Some(parent));
        self.children.push(Vec::new());
        self.cost.push(c);
        self.children[parent].push(id);
        id
    }

    pub fn nearest(&self, q: &JointVector) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, v) in self.vertices.iter().enumerate() {
            let d = v.distance(q);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }

    /// Indices within `radius` of `q`, ascending.
    pub fn near(&self, q: &JointVector, radius: f64) -> Vec<usize> {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v.distance(q) <= radius)
            .map(|(i, _)| i)
            .collect()
    }

    /// Moves `i` under `new_parent` and updates the cost of its whole subtree.
    /// `new_parent` must not lie in the subtree of `i`.
    pub fn rewire(&mut self, i: usize, new_parent: usize) {
        if let Some(old) = self.parent[i] {
            self.children[old].retain(|&c| c != i);
        }
        self.parent[i] = Some(new_parent);
        self.children[new_parent].push(i);
        let mut stack = vec![i];
        while let Some(v) = stack.pop() {
            let p = self.parent[v].expect("non-root vertex");
            self.cost[v] = self.cost[p] + self.vertices[p].distance(&self.vertices[v]);
            stack.extend_from_slice(&self.children[v]);
        }
    }

    /// Configurations from the root to `i`.
    pub fn path_to(&self, i: usize) -> Vec<JointVector> {
        let mut out = vec![self.vertices[i]];
        let mut v = i;
        while let Some(p) = self.parent[v] {
            out.push(self.vertices[p]);
            v = p;
        }
        out.reverse();
        out
    }
}
