use crate::lattice::{tree_dist, TreeModel};

/// Dense table of path positions, one row of `N + 1` points per tree path.
pub(crate) struct PathTable {
    steps: usize,
    dim: usize,
    pos: Vec<f64>,
}

impl PathTable {
    pub fn new(tree: &TreeModel) -> Self {
        let (steps, dim) = (tree.depth(), tree.dim());
        let mut pos = Vec::with_capacity(tree.num_paths() * (steps + 1) * dim);
        for p in 0..tree.num_paths() {
            for m in 0..=steps {
                pos.extend_from_slice(tree.path_pos(p, m));
            }
        }
        Self { steps, dim, pos }
    }

    fn at(&self, p: usize, m: usize) -> &[f64] {
        let o = (p * (self.steps + 1) + m) * self.dim;
        &self.pos[o..o + self.dim]
    }

    /// Running maximum of the pointwise distance between paths `p` and `q`, for steps `0..=upto`.
    pub fn profile_into(&self, p: usize, q: usize, upto: usize, out: &mut Vec<f64>) {
        out.clear();
        let mut run: f64 = 0.0;
        for m in 0..=upto.min(self.steps) {
            run = run.max(tree_dist(self.at(p, m), self.at(q, m)));
            out.push(run);
        }
    }

    pub fn profile(&self, p: usize, q: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.steps + 1);
        self.profile_into(p, q, self.steps, &mut v);
        v
    }
}
