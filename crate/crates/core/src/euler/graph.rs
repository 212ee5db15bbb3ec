use crate::error::{Error, Result};
use crate::euler::ExcursionSet;
use crate::lattice::Lattice;
use crate::scalar::Scalar;

/// Graph G^d on an excursion set: two vertices are adjacent iff
/// `1 ≤ d_φ(r, s) ≤ √d`.
///
/// Vertices are numbered `0..n` in increasing flat-index order. Adjacency is
/// stored CSR-style with sorted neighbour rows, and every entry carries its
/// squared index distance so lower-dimensional graphs can be peeled off.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionGraph<'a, T = f64> {
    lattice: &'a Lattice<T>,
    vertices: Vec<usize>,
    dim: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    dist_sq: Vec<u32>,
}

/// Index offsets `o` with `1 ≤ |o|² ≤ d`, each coordinate within `±⌊√d⌋`.
fn stencil(dims: usize, d: usize) -> Vec<Vec<i64>> {
    let reach = (d as f64).sqrt().floor() as i64;
    let side = (2 * reach + 1) as usize;
    let total = side.pow(dims as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut rem = code;
        let mut o = vec![0i64; dims];
        for c in o.iter_mut() {
            *c = (rem % side) as i64 - reach;
            rem /= side;
        }
        let n2: i64 = o.iter().map(|x| x * x).sum();
        if n2 >= 1 && n2 <= d as i64 {
            out.push(o);
        }
    }
    out
}

/// Builds G^d for `1 ≤ d ≤ D` by scanning the bounded index stencil around
/// each vertex, O(|A|·(2⌊√d⌋+1)^D).
pub fn build_graph<'a, T: Scalar>(exc: &ExcursionSet<'a, T>, d: usize) -> Result<ExcursionGraph<'a, T>> {
    let lattice = exc.lattice();
    let dims = lattice.dims();
    if d == 0 || d > dims {
        return Err(Error::Invalid(format!("graph dimension d = {d} must lie in 1..={dims}")));
    }
    let vertices = exc.indices().to_vec();

    let mut vertex_of_grid = vec![u32::MAX; lattice.grid_len()];
    for (v, &r) in vertices.iter().enumerate() {
        vertex_of_grid[lattice.grid_position(r)] = v as u32;
    }

    let shape = lattice.shape();
    let strides = lattice.strides();
    let offsets_nd = stencil(dims, d);
    let moves: Vec<(isize, u32)> = offsets_nd
        .iter()
        .map(|o| {
            let delta = o.iter().zip(strides).map(|(&x, &s)| x as isize * s as isize).sum();
            (delta, o.iter().map(|x| (x * x) as u32).sum())
        })
        .collect();

    let mut offsets = Vec::with_capacity(vertices.len() + 1);
    offsets.push(0);
    let mut neighbors = Vec::new();
    let mut dist_sq = Vec::new();
    let mut iv = vec![0usize; dims];
    let mut row: Vec<(u32, u32)> = Vec::with_capacity(moves.len());
    for &r in &vertices {
        let g = lattice.grid_position(r);
        lattice.grid_index_into(g, &mut iv);
        row.clear();
        'offsets: for (o, &(delta, n2)) in offsets_nd.iter().zip(&moves) {
            for ((&i, &step), &n) in iv.iter().zip(o).zip(shape) {
                let j = i as i64 + step;
                if j < 0 || j >= n as i64 {
                    continue 'offsets;
                }
            }
            let w = vertex_of_grid[(g as isize + delta) as usize];
            if w != u32::MAX {
                row.push((w, n2));
            }
        }
        row.sort_unstable();
        for &(w, n2) in &row {
            neighbors.push(w);
            dist_sq.push(n2);
        }
        offsets.push(neighbors.len());
    }

    Ok(ExcursionGraph { lattice, vertices, dim: d, offsets, neighbors, dist_sq })
}

impl<'a, T: Scalar> ExcursionGraph<'a, T> {
    /// The `d` of G^d.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lattice(&self) -> &'a Lattice<T> {
        self.lattice
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Flat lattice index of vertex `v`.
    pub fn flat_index(&self, v: u32) -> usize {
        self.vertices[v as usize]
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Sorted neighbour list of vertex `v`.
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Undirected edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.vertices.len() as u32)
            .flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// G^d obtained from this graph by deleting the edges longer than √d.
    pub fn restrict(&self, d: usize) -> Result<ExcursionGraph<'a, T>> {
        if d == 0 || d > self.dim {
            return Err(Error::Invalid(format!(
                "cannot restrict G^{} to d = {d}; need 1 ≤ d ≤ {}",
                self.dim, self.dim
            )));
        }
        let mut offsets = Vec::with_capacity(self.offsets.len());
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(self.neighbors.len());
        let mut dist_sq = Vec::with_capacity(self.dist_sq.len());
        for v in 0..self.vertices.len() {
            let span = self.offsets[v]..self.offsets[v + 1];
            for (&w, &n2) in self.neighbors[span.clone()].iter().zip(&self.dist_sq[span]) {
                if n2 as usize <= d {
                    neighbors.push(w);
                    dist_sq.push(n2);
                }
            }
            offsets.push(neighbors.len());
        }
        Ok(ExcursionGraph {
            lattice: self.lattice,
            vertices: self.vertices.clone(),
            dim: d,
            offsets,
            neighbors,
            dist_sq,
        })
    }
}
