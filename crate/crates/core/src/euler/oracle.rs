//! Direct mesh enumeration, independent of the graph/clique path.
//!
//! Every unit d-hypercube has a unique lowest corner `p` and axis set `S`
//! (|S| = d); it belongs to the mesh when all `p + Σ_{a∈T} e_a`, `T ⊆ S`,
//! are members of the excursion set.

use crate::lattice::FieldSample;
use crate::scalar::Scalar;

pub fn hypercube_counts_oracle<T: Scalar>(field: &FieldSample<T>, c: T) -> Vec<u64> {
    let lattice = field.lattice();
    let dims = lattice.dims();
    let member = |iv: &[usize]| match lattice.flat_index(iv) {
        Some(r) => field.values()[r] >= c,
        None => false,
    };

    let mut counts = vec![0u64; dims + 1];
    let mut corner = vec![0usize; dims];
    for r in 0..lattice.len() {
        if field.values()[r] < c {
            continue;
        }
        let base = lattice.index_vector(r).expect("r < R");
        for axes in 0u32..(1 << dims) {
            // enumerate the sub-masks of `axes`, each a corner offset
            let mut all_in = true;
            let mut sub = axes;
            loop {
                for a in 0..dims {
                    corner[a] = base[a] + ((sub >> a) & 1) as usize;
                }
                if !member(&corner) {
                    all_in = false;
                    break;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & axes;
            }
            if all_in {
                counts[axes.count_ones() as usize] += 1;
            }
        }
    }
    counts
}

pub fn euler_characteristic_oracle<T: Scalar>(field: &FieldSample<T>, c: T) -> i64 {
    hypercube_counts_oracle(field, c)
        .iter()
        .enumerate()
        .map(|(d, &n)| if d % 2 == 0 { n as i64 } else { -(n as i64) })
        .sum()
}
