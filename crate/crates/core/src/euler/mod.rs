//! Euler characteristics of lattice excursion sets.
//!
//! The excursion set `{r : w(θ_r) ≥ c}` is meshed with unit index hypercubes.
//! Its EC is the alternating sum of the number of d-dimensional hypercubes,
//! and the hypercubes are found as 2^d-vertex cliques of the graph G^d that
//! joins points at index distance between 1 and √d. G^D is built once and the
//! lower graphs are peeled off it by deleting long edges.
//!
//! For D ≥ 3 a 2^d-clique of G^d need not be a hypercube: in G² of a 3-D grid
//! the corner tetrahedron {000, 100, 010, 001} is a 4-clique. Every listed
//! clique is therefore checked to span exactly d unit index axes before it is
//! counted. [`raw_clique_counts`] exposes the unchecked counts.

mod clique;
mod graph;
mod oracle;

pub use clique::{count_cliques, for_each_clique};
pub use graph::{build_graph, ExcursionGraph};
pub use oracle::{euler_characteristic_oracle, hypercube_counts_oracle};

use crate::lattice::{FieldSample, Lattice};
use crate::scalar::Scalar;

/// Included lattice points whose field value is at least the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionSet<'a, T = f64> {
    lattice: &'a Lattice<T>,
    indices: Vec<usize>,
    threshold: T,
}

impl<'a, T: Scalar> ExcursionSet<'a, T> {
    pub fn lattice(&self) -> &'a Lattice<T> {
        self.lattice
    }

    /// Sorted flat indices of the members.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, r: usize) -> bool {
        self.indices.binary_search(&r).is_ok()
    }
}

/// `{r : w(θ_r) ≥ c}`; the comparison is non-strict.
pub fn excursion_set<T: Scalar>(field: &FieldSample<T>, c: T) -> ExcursionSet<'_, T> {
    let indices = field
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= c)
        .map(|(r, _)| r)
        .collect();
    ExcursionSet { lattice: field.lattice(), indices, threshold: c }
}

/// Number of unit d-hypercubes of the excursion mesh for d = 0..=D.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueCounts {
    pub counts: Vec<u64>,
}

impl CliqueCounts {
    pub fn dims(&self) -> usize {
        self.counts.len() - 1
    }

    /// Σ_d (−1)^d |C^d|.
    pub fn euler(&self) -> i64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(d, &n)| if d % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum()
    }
}

/// Whether the listed vertices are the corners of one unit d-hypercube:
/// every index axis has extent 0 or 1 and exactly d axes have extent 1.
/// Given 2^d distinct vertices this forces them to be all the corners.
fn spans_unit_hypercube<T: Scalar>(g: &ExcursionGraph<'_, T>, clique: &[u32], d: usize, lo: &mut [usize], hi: &mut [usize], iv: &mut [usize]) -> bool {
    let lattice = g.lattice();
    lo.fill(usize::MAX);
    hi.fill(0);
    for &v in clique {
        lattice.grid_index_into(lattice.grid_position(g.flat_index(v)), iv);
        for a in 0..iv.len() {
            lo[a] = lo[a].min(iv[a]);
            hi[a] = hi[a].max(iv[a]);
        }
    }
    let mut extent_one = 0;
    for a in 0..lo.len() {
        match hi[a] - lo[a] {
            0 => {}
            1 => extent_one += 1,
            _ => return false,
        }
    }
    extent_one == d
}

fn hypercube_count<T: Scalar>(g: &ExcursionGraph<'_, T>) -> u64 {
    let d = g.dim();
    if d == 1 {
        // 2-cliques of G¹ are exactly the unit edges
        return g.edge_count() as u64;
    }
    let dims = g.lattice().dims();
    let (mut lo, mut hi, mut iv) = (vec![0; dims], vec![0; dims], vec![0; dims]);
    let mut n = 0;
    for_each_clique(g, 1 << d, |c| {
        if spans_unit_hypercube(g, c, d, &mut lo, &mut hi, &mut iv) {
            n += 1;
        }
    });
    n
}

/// Hypercube counts |C⁰|, …, |C^D| via the graph construction: G^D first,
/// then G^{D−1}, …, G¹ by edge deletion.
pub fn clique_counts<T: Scalar>(field: &FieldSample<T>, c: T) -> CliqueCounts {
    let exc = excursion_set(field, c);
    let dims = field.lattice().dims();
    let mut counts = vec![0u64; dims + 1];
    counts[0] = exc.len() as u64;
    if exc.len() > 1 {
        let mut g = build_graph(&exc, dims).expect("D is a valid graph dimension");
        for d in (1..=dims).rev() {
            if d < g.dim() {
                g = g.restrict(d).expect("d < current graph dimension");
            }
            counts[d] = hypercube_count(&g);
        }
    }
    CliqueCounts { counts }
}

/// φ of the excursion set above `c`.
pub fn euler_characteristic<T: Scalar>(field: &FieldSample<T>, c: T) -> i64 {
    clique_counts(field, c).euler()
}

/// Unverified |2^d-cliques of G^d| for d = 0..=D. Equal to the hypercube
/// counts for D ≤ 2; larger in general.
pub fn raw_clique_counts<T: Scalar>(field: &FieldSample<T>, c: T) -> Vec<u64> {
    let exc = excursion_set(field, c);
    let dims = field.lattice().dims();
    let mut counts = vec![0u64; dims + 1];
    counts[0] = exc.len() as u64;
    if exc.len() > 1 {
        let mut g = build_graph(&exc, dims).expect("D is a valid graph dimension");
        for d in (1..=dims).rev() {
            if d < g.dim() {
                g = g.restrict(d).expect("d < current graph dimension");
            }
            counts[d] = count_cliques(&g, 1 << d);
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    fn field(shape: &[usize], values: Vec<f64>) -> FieldSample<f64> {
        let axes = shape.iter().map(|&n| (0..n).map(|i| i as f64).collect()).collect();
        FieldSample::new(Arc::new(Lattice::full(axes).unwrap()), values).unwrap()
    }

    fn from_rows(rows: &[&str]) -> FieldSample<f64> {
        let values = rows
            .iter()
            .flat_map(|r| r.chars().map(|ch| if ch == '#' { 1.0 } else { 0.0 }))
            .collect();
        field(&[rows.len(), rows[0].len()], values)
    }

    #[test]
    fn excursion_set_examples() {
        let f = field(&[3], vec![0.0, 2.0, 5.0]);
        assert_eq!(excursion_set(&f, 1.0).indices(), &[1, 2]);
        assert!(excursion_set(&f, 6.0).is_empty());
        assert_eq!(excursion_set(&f, f64::NEG_INFINITY).len(), 3);
        // ties are members
        assert_eq!(excursion_set(&f, 2.0).indices(), &[1, 2]);
    }

    #[test]
    fn solid_rectangle_and_ring() {
        let solid = field(&[4, 6], vec![1.0; 24]);
        assert_eq!(euler_characteristic(&solid, 0.5), 1);
        let ring = from_rows(&["#####", "#...#", "#...#", "#...#", "#####"]);
        assert_eq!(euler_characteristic(&ring, 0.5), 0);
        assert_eq!(euler_characteristic(&ring, 2.0), 0);
    }

    #[test]
    fn counts_for_three_by_three() {
        let f = field(&[3, 3], vec![1.0; 9]);
        assert_eq!(clique_counts(&f, 0.0).counts, vec![9, 12, 4]);
    }

    #[test]
    fn solid_cube_is_one_even_though_raw_counts_are_not() {
        let f = field(&[2, 2, 2], vec![1.0; 8]);
        assert_eq!(clique_counts(&f, 0.0).counts, vec![8, 12, 6, 1]);
        assert_eq!(euler_characteristic(&f, 0.0), 1);
        let raw = raw_clique_counts(&f, 0.0);
        assert_eq!(raw, vec![8, 12, 16, 1]);
        assert_ne!(raw[0] as i64 - raw[1] as i64 + raw[2] as i64 - raw[3] as i64, 1);
    }

    #[test]
    fn diagonal_contact_does_not_merge_components() {
        // two squares touching at a corner: the mesh has two components
        let f = from_rows(&["##..", "##..", "..##", "..##"]);
        assert_eq!(euler_characteristic(&f, 0.5), 2);
    }

    #[test]
    fn hollow_cube_shell() {
        // 3×3×3 with the centre removed: a sphere-like shell, EC 2
        let mut v = vec![1.0; 27];
        v[13] = 0.0;
        let f = field(&[3, 3, 3], v);
        assert_eq!(euler_characteristic(&f, 0.5), 2);
        assert_eq!(euler_characteristic_oracle(&f, 0.5), 2);
    }

    #[test]
    fn masked_boundary_cells_are_excluded() {
        let axes = vec![(0..3).map(f64::from).collect::<Vec<_>>(); 2];
        let mut mask = vec![true; 9];
        mask[4] = false;
        let l = Lattice::new(axes, Some(mask)).unwrap();
        let f = FieldSample::new(Arc::new(l), vec![1.0; 8]).unwrap();
        // the 8 boundary points form a ring with no full square: EC 0
        assert_eq!(clique_counts(&f, 0.0).counts, vec![8, 8, 0]);
        assert_eq!(euler_characteristic(&f, 0.0), 0);
    }
}
