//! Clique counting and listing on sparse excursion graphs.
//!
//! Both routines relabel the graph along a degeneracy ordering so that every
//! vertex only looks "forward" at O(degeneracy) neighbours.
//!
//! * [`count_cliques`] counts q-cliques with pivoted Bron–Kerbosch recursion
//!   where each leaf of the pivot tree stands for a whole family of cliques
//!   (held vertices plus any subset of the pivots), so cliques are counted
//!   without being materialised.
//! * [`for_each_clique`] lists q-cliques explicitly; used where each clique
//!   has to be inspected.

use crate::euler::ExcursionGraph;
use crate::scalar::Scalar;

struct Csr {
    offsets: Vec<usize>,
    items: Vec<u32>,
}

impl Csr {
    #[inline]
    fn row(&self, v: u32) -> &[u32] {
        &self.items[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }
}

/// Graph relabelled by degeneracy rank.
struct Ranked {
    /// rank -> original vertex id
    order: Vec<u32>,
    all: Csr,
    forward: Csr,
}

/// Matula–Beck smallest-last ordering via bucket queue.
fn degeneracy_order<T: Scalar>(g: &ExcursionGraph<'_, T>) -> Vec<u32> {
    let n = g.vertex_count();
    let mut degree: Vec<usize> = (0..n as u32).map(|v| g.degree(v)).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); max_deg + 1];
    for v in 0..n {
        buckets[degree[v]].push(v as u32);
    }
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut low = 0;
    while order.len() < n {
        while buckets[low].is_empty() {
            low += 1;
        }
        let v = buckets[low].pop().expect("non-empty bucket");
        // lazy deletion: stale entries carry an outdated degree
        if removed[v as usize] || degree[v as usize] != low {
            continue;
        }
        removed[v as usize] = true;
        order.push(v);
        for &w in g.neighbors(v) {
            let w = w as usize;
            if !removed[w] {
                degree[w] -= 1;
                buckets[degree[w]].push(w as u32);
                if degree[w] < low {
                    low = degree[w];
                }
            }
        }
    }
    order
}

fn ranked<T: Scalar>(g: &ExcursionGraph<'_, T>) -> Ranked {
    let order = degeneracy_order(g);
    let mut rank = vec![0u32; order.len()];
    for (i, &v) in order.iter().enumerate() {
        rank[v as usize] = i as u32;
    }
    let mut all = Csr { offsets: vec![0], items: Vec::new() };
    let mut forward = Csr { offsets: vec![0], items: Vec::new() };
    let mut row = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        row.clear();
        row.extend(g.neighbors(v).iter().map(|&w| rank[w as usize]));
        row.sort_unstable();
        all.items.extend_from_slice(&row);
        all.offsets.push(all.items.len());
        forward.items.extend(row.iter().copied().filter(|&w| w > i as u32));
        forward.offsets.push(forward.items.len());
    }
    Ranked { order, all, forward }
}

/// Sorted-merge intersection.
#[inline]
fn intersect_into(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

#[inline]
fn intersect_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Counts q-cliques in the subgraph induced by `p`, each extended by the
/// `held` vertices (mandatory) and `pivots` vertices (optional).
fn pivot_count(adj: &Csr, p: &[u32], held: usize, pivots: usize, q: usize) -> u128 {
    if held == q {
        // only the held set itself has size q in this subtree
        return 1;
    }
    if held + pivots + p.len() < q {
        return 0;
    }
    if p.is_empty() {
        return binomial(pivots, q - held);
    }

    let pivot = p
        .iter()
        .copied()
        .max_by_key(|&u| (intersect_len(adj.row(u), p), std::cmp::Reverse(u)))
        .expect("p is non-empty");

    let mut scratch = Vec::with_capacity(p.len());
    intersect_into(adj.row(pivot), p, &mut scratch);
    let mut total = pivot_count(adj, &scratch, held, pivots + 1, q);

    let pivot_row = adj.row(pivot);
    let branch: Vec<u32> =
        p.iter().copied().filter(|&w| w != pivot && pivot_row.binary_search(&w).is_err()).collect();
    let mut pool = p.to_vec();
    for w in branch {
        intersect_into(adj.row(w), &pool, &mut scratch);
        total += pivot_count(adj, &scratch, held + 1, pivots, q);
        let at = pool.binary_search(&w).expect("w is still in the pool");
        pool.remove(at);
    }
    total
}

/// Number of vertex subsets of size `q` that are pairwise adjacent.
pub fn count_cliques<T: Scalar>(graph: &ExcursionGraph<'_, T>, q: usize) -> u64 {
    assert!(q >= 1, "clique size must be positive");
    let ranked = ranked(graph);
    let total: u128 = (0..graph.vertex_count() as u32)
        .map(|v| pivot_count(&ranked.all, ranked.forward.row(v), 1, 0, q))
        .sum();
    u64::try_from(total).expect("clique count fits in u64")
}

fn list(
    ranked: &Ranked,
    clique: &mut Vec<u32>,
    cand: &[u32],
    q: usize,
    out: &mut Vec<u32>,
    f: &mut dyn FnMut(&[u32]),
) {
    if clique.len() == q {
        out.clear();
        out.extend(clique.iter().map(|&r| ranked.order[r as usize]));
        f(out);
        return;
    }
    let mut next = Vec::with_capacity(cand.len());
    for (i, &w) in cand.iter().enumerate() {
        if clique.len() + cand.len() - i < q {
            break;
        }
        intersect_into(ranked.forward.row(w), &cand[i + 1..], &mut next);
        if clique.len() + 1 + next.len() < q {
            continue;
        }
        clique.push(w);
        let snapshot = std::mem::take(&mut next);
        list(ranked, clique, &snapshot, q, out, f);
        next = snapshot;
        clique.pop();
    }
}

/// Calls `f` once for every q-clique, with the clique's vertex ids.
pub fn for_each_clique<T: Scalar, F: FnMut(&[u32])>(graph: &ExcursionGraph<'_, T>, q: usize, mut f: F) {
    assert!(q >= 1, "clique size must be positive");
    let ranked = ranked(graph);
    let mut clique = Vec::with_capacity(q);
    let mut out = Vec::with_capacity(q);
    for v in 0..graph.vertex_count() as u32 {
        clique.clear();
        clique.push(v);
        list(&ranked, &mut clique, ranked.forward.row(v), q, &mut out, &mut f);
    }
}
