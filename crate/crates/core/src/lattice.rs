//! Cross-product evaluation grids, optional inclusion masks, and scalar
//! fields sampled on the included points.
//!
//! Included points are numbered in row-major order over the index vector
//! `(φ₁, …, φ_D)` (the last axis varies fastest), skipping masked-out points.
//! All topology downstream is driven by index vectors, never by coordinates.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const ABSENT: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice<T = f64> {
    axes: Vec<Vec<T>>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    mask: Option<Vec<bool>>,
    /// flat index -> linear position in the full cross product
    included: Vec<usize>,
    /// linear grid position -> flat index, `ABSENT` when masked out
    lookup: Option<Vec<usize>>,
}

impl<T: Scalar> Lattice<T> {
    /// Builds a lattice from per-axis coordinates and an optional boolean mask
    /// laid out row-major over the full cross product.
    pub fn new(axes: Vec<Vec<T>>, mask: Option<Vec<bool>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Invalid("a lattice needs at least one axis".into()));
        }
        for (d, axis) in axes.iter().enumerate() {
            if axis.is_empty() {
                return Err(Error::Invalid(format!("axis {} is empty", d + 1)));
            }
            if let Some(bad) = axis.iter().position(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!(
                    "axis {} has a non-finite coordinate at position {bad}",
                    d + 1
                )));
            }
            if let Some(w) = axis.windows(2).position(|w| w[1] <= w[0]) {
                return Err(Error::Invalid(format!(
                    "axis {} is not strictly increasing at position {}",
                    d + 1,
                    w + 1
                )));
            }
        }

        let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
        let total = shape
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::Invalid("lattice cross product overflows usize".into()))?;
        let mut strides = vec![1usize; shape.len()];
        for d in (0..shape.len().saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * shape[d + 1];
        }

        let (included, lookup) = match &mask {
            None => ((0..total).collect(), None),
            Some(m) => {
                if m.len() != total {
                    return Err(Error::Invalid(format!(
                        "mask has {} entries but the cross product has {total} points",
                        m.len()
                    )));
                }
                let mut included = Vec::new();
                let mut lookup = vec![ABSENT; total];
                for (g, &keep) in m.iter().enumerate() {
                    if keep {
                        lookup[g] = included.len();
                        included.push(g);
                    }
                }
                if included.is_empty() {
                    return Err(Error::EmptyDomain("mask excludes every lattice point".into()));
                }
                (included, Some(lookup))
            }
        };

        Ok(Self { axes, shape, strides, mask, included, lookup })
    }

    /// Full cross product of the given axes.
    pub fn full(axes: Vec<Vec<T>>) -> Result<Self> {
        Self::new(axes, None)
    }

    /// Keeps the points of the cross product whose coordinates satisfy `keep`.
    pub fn with_predicate<F>(axes: Vec<Vec<T>>, mut keep: F) -> Result<Self>
    where
        F: FnMut(&[T]) -> bool,
    {
        let full = Self::full(axes)?;
        let mut coords = vec![T::zero(); full.dims()];
        let mask = (0..full.grid_len())
            .map(|g| {
                full.grid_coords_into(g, &mut coords);
                keep(&coords)
            })
            .collect();
        Self::new(full.axes, Some(mask))
    }

    /// Evenly spaced axis with `n` points from `start` to `stop` inclusive.
    pub fn linspace(start: T, stop: T, n: usize) -> Vec<T> {
        match n {
            0 => Vec::new(),
            1 => vec![start],
            _ => {
                let step = (stop - start) / T::from_usize_lossy(n - 1);
                (0..n).map(|i| start + step * T::from_usize_lossy(i)).collect()
            }
        }
    }

    pub fn dims(&self) -> usize {
        self.shape.len()
    }

    /// Number of included points, R.
    pub fn len(&self) -> usize {
        self.included.len()
    }

    pub fn is_empty(&self) -> bool {
        self.included.is_empty()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn axes(&self) -> &[Vec<T>] {
        &self.axes
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn is_masked(&self) -> bool {
        self.mask.is_some()
    }

    /// Size of the full cross product R₁·…·R_D.
    pub fn grid_len(&self) -> usize {
        self.shape.iter().product()
    }

    /// Linear cross-product position of included point `r`.
    #[inline]
    pub fn grid_position(&self, r: usize) -> usize {
        self.included[r]
    }

    /// Flat index of the point at linear grid position `g`, if included.
    #[inline]
    pub fn flat_of_grid(&self, g: usize) -> Option<usize> {
        match &self.lookup {
            None => (g < self.included.len()).then_some(g),
            Some(l) => l.get(g).copied().filter(|&r| r != ABSENT),
        }
    }

    fn check(&self, r: usize) -> Result<()> {
        if r < self.len() {
            Ok(())
        } else {
            Err(Error::OutOfRange { index: r, len: self.len() })
        }
    }

    #[inline]
    pub fn grid_index_into(&self, g: usize, out: &mut [usize]) {
        let mut rem = g;
        for (o, &s) in out.iter_mut().zip(&self.strides) {
            *o = rem / s;
            rem %= s;
        }
    }

    /// Index vector (φ₁(r), …, φ_D(r)), zero-based.
    pub fn index_vector(&self, r: usize) -> Result<Vec<usize>> {
        self.check(r)?;
        let mut out = vec![0; self.dims()];
        self.grid_index_into(self.included[r], &mut out);
        Ok(out)
    }

    /// Inverse of [`index_vector`](Self::index_vector); `None` for vectors
    /// outside the grid or masked out.
    pub fn flat_index(&self, index: &[usize]) -> Option<usize> {
        if index.len() != self.dims() || index.iter().zip(&self.shape).any(|(&i, &n)| i >= n) {
            return None;
        }
        let g = index.iter().zip(&self.strides).map(|(&i, &s)| i * s).sum();
        self.flat_of_grid(g)
    }

    fn grid_coords_into(&self, g: usize, out: &mut [T]) {
        let mut rem = g;
        for ((o, &s), axis) in out.iter_mut().zip(&self.strides).zip(&self.axes) {
            *o = axis[rem / s];
            rem %= s;
        }
    }

    /// Physical coordinates of included point `r`.
    pub fn coords(&self, r: usize) -> Result<Vec<T>> {
        self.check(r)?;
        let mut out = vec![T::zero(); self.dims()];
        self.grid_coords_into(self.included[r], &mut out);
        Ok(out)
    }

    /// Squared index distance Σ_d (φ_d(r) − φ_d(s))².
    pub fn index_distance_sq(&self, r: usize, s: usize) -> Result<usize> {
        self.check(r)?;
        self.check(s)?;
        let (mut a, mut b) = (self.included[r], self.included[s]);
        let mut acc = 0;
        for &st in &self.strides {
            let (ia, ib) = (a / st, b / st);
            acc += ia.abs_diff(ib).pow(2);
            a %= st;
            b %= st;
        }
        Ok(acc)
    }

    /// Euclidean distance between the index vectors of `r` and `s`.
    pub fn index_distance(&self, r: usize, s: usize) -> Result<f64> {
        self.index_distance_sq(r, s).map(|d2| (d2 as f64).sqrt())
    }

    /// Same lattice with every axis mapped through `f` (indices unchanged).
    pub fn map_axes<F: FnMut(usize, T) -> T>(&self, mut f: F) -> Result<Self> {
        let axes = self
            .axes
            .iter()
            .enumerate()
            .map(|(d, axis)| axis.iter().map(|&x| f(d, x)).collect())
            .collect();
        Self::new(axes, self.mask.clone())
    }
}

/// Scalar field values on the included points of a lattice, in flat order.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample<T = f64> {
    lattice: Arc<Lattice<T>>,
    values: Vec<T>,
}

impl<T: Scalar> FieldSample<T> {
    pub fn new(lattice: Arc<Lattice<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::Invalid(format!(
                "field has {} values but the lattice has {} included points",
                values.len(),
                lattice.len()
            )));
        }
        if let Some(r) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("field value at flat index {r} is not finite")));
        }
        Ok(Self { lattice, values })
    }

    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    pub fn shared_lattice(&self) -> &Arc<Lattice<T>> {
        &self.lattice
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Largest value and the first flat index attaining it.
    pub fn argmax(&self) -> (usize, T) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (r, v)| if v > best.1 { (r, v) } else { best })
    }

    pub fn max(&self) -> T {
        self.argmax().1
    }

    /// Pointwise transform; the result must stay finite.
    pub fn map<F: FnMut(T) -> T>(&self, f: F) -> Result<Self> {
        Self::new(self.lattice.clone(), self.values.iter().copied().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64).collect()
    }

    #[test]
    fn full_lattice_sizes() {
        let l = Lattice::full(vec![grid(3), grid(3)]).unwrap();
        assert_eq!(l.len(), 9);
        assert_eq!(l.dims(), 2);
        let l = Lattice::full(vec![grid(100)]).unwrap();
        assert_eq!((l.len(), l.dims()), (100, 1));
    }

    #[test]
    fn disc_mask_matches_direct_count() {
        let axis = Lattice::linspace(-30.0, 30.0, 61);
        let l = Lattice::with_predicate(vec![axis.clone(), axis.clone()], |p| {
            p[0] * p[0] + p[1] * p[1] <= 900.0
        })
        .unwrap();
        let mut count = 0;
        for x in -30i64..=30 {
            for y in -30i64..=30 {
                if x * x + y * y <= 900 {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 2821);
        assert_eq!(l.len(), count);
    }

    #[test]
    fn rejects_bad_axes_and_masks() {
        assert!(matches!(Lattice::full(vec![vec![0.0, 0.0]]), Err(Error::Invalid(_))));
        assert!(matches!(Lattice::full(vec![vec![1.0, 0.5]]), Err(Error::Invalid(_))));
        assert!(matches!(Lattice::<f64>::full(vec![vec![]]), Err(Error::Invalid(_))));
        assert!(matches!(Lattice::full(vec![vec![0.0, f64::NAN]]), Err(Error::Invalid(_))));
        assert!(matches!(
            Lattice::new(vec![grid(2), grid(2)], Some(vec![true; 3])),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(
            Lattice::new(vec![grid(2), grid(2)], Some(vec![false; 4])),
            Err(Error::EmptyDomain(_))
        ));
    }

    #[test]
    fn index_distance_examples() {
        let l = Lattice::full(vec![grid(6), grid(6)]).unwrap();
        let r = l.flat_index(&[3, 4]).unwrap();
        let s = l.flat_index(&[4, 5]).unwrap();
        assert_eq!(l.index_distance(r, r).unwrap(), 0.0);
        assert_eq!(l.index_distance(r, l.flat_index(&[3, 5]).unwrap()).unwrap(), 1.0);
        assert!((l.index_distance(r, s).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(l.index_distance(0, 36), Err(Error::OutOfRange { index: 36, len: 36 })));
    }

    #[test]
    fn index_distance_ignores_coordinates() {
        let l = Lattice::full(vec![vec![0.0, 0.1, 10.0], vec![-5.0, 7.0]]).unwrap();
        let a = l.flat_index(&[0, 0]).unwrap();
        let b = l.flat_index(&[2, 1]).unwrap();
        assert_eq!(l.index_distance_sq(a, b).unwrap(), 5);
    }

    #[test]
    fn row_major_order_last_axis_fastest() {
        let l = Lattice::full(vec![grid(2), grid(3)]).unwrap();
        assert_eq!(l.index_vector(1).unwrap(), vec![0, 1]);
        assert_eq!(l.index_vector(3).unwrap(), vec![1, 0]);
        assert_eq!(l.coords(5).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn masked_indexing_round_trip() {
        let l = Lattice::with_predicate(vec![grid(5), grid(4), grid(3)], |p| {
            (p[0] + p[1] + p[2]) as i64 % 3 != 0
        })
        .unwrap();
        for r in 0..l.len() {
            let iv = l.index_vector(r).unwrap();
            assert_eq!(l.flat_index(&iv), Some(r));
        }
        assert_eq!(l.flat_index(&[0, 0, 0]), None);
        assert_eq!(l.flat_index(&[5, 0, 0]), None);
    }

    #[test]
    fn field_validation() {
        let l = Arc::new(Lattice::full(vec![grid(3)]).unwrap());
        assert!(FieldSample::new(l.clone(), vec![0.0; 2]).is_err());
        assert!(FieldSample::new(l.clone(), vec![0.0, f64::NAN, 1.0]).is_err());
        let f = FieldSample::new(l, vec![0.0, 2.0, 2.0]).unwrap();
        assert_eq!(f.argmax(), (1, 2.0));
    }
}
