use crate::binmat::BinMatrix;

/// Edge layout of a parity-check matrix for flooding message passing.
///
/// Edges are numbered row by row; `check_range(r)` is the contiguous block of
/// row `r`. `var_edges` lists each column's edges in increasing row order.
#[derive(Debug, Clone)]
pub struct TannerGraph {
    n_vars: usize,
    check_ptr: Vec<usize>,
    edge_var: Vec<u32>,
    var_ptr: Vec<usize>,
    var_edges: Vec<u32>,
}

impl TannerGraph {
    pub fn new(h: &BinMatrix) -> Self {
        let n_vars = h.n_cols();
        let mut check_ptr = Vec::with_capacity(h.n_rows() + 1);
        let mut edge_var = Vec::with_capacity(h.n_edges());
        check_ptr.push(0);
        for row in h.rows() {
            edge_var.extend(row.iter().map(|&c| c as u32));
            check_ptr.push(edge_var.len());
        }
        let mut deg = vec![0usize; n_vars + 1];
        for &v in &edge_var {
            deg[v as usize + 1] += 1;
        }
        for i in 0..n_vars {
            deg[i + 1] += deg[i];
        }
        let var_ptr = deg.clone();
        let mut fill = deg;
        let mut var_edges = vec![0u32; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v as usize]] = e as u32;
            fill[v as usize] += 1;
        }
        TannerGraph { n_vars, check_ptr, edge_var, var_ptr, var_edges }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.check_ptr.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.edge_var.len()
    }

    #[inline]
    pub fn check_range(&self, r: usize) -> std::ops::Range<usize> {
        self.check_ptr[r]..self.check_ptr[r + 1]
    }

    #[inline]
    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e] as usize
    }

    #[inline]
    pub fn var_edges(&self, v: usize) -> &[u32] {
        &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]]
    }

    /// True when every check sees even parity in `bits`.
    pub fn satisfied(&self, bits: &[u8]) -> bool {
        (0..self.n_checks()).all(|r| self.check_range(r).fold(0u8, |acc, e| acc ^ bits[self.edge_var(e)]) == 0)
    }
}
