use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut};
use rand::Rng;
use rand_distr::StandardNormal;
use tohm_core::{Error, FieldSample, Lattice, Result};

use crate::kernel::SquaredExponential;
use crate::rng::replicate_rng;

/// First diagonal jitter tried before factorizing a covariance matrix.
pub const JITTER_START: f64 = 1e-10;
/// Jitter is doubled until it would exceed this.
pub const JITTER_MAX: f64 = 1e-6;
/// Largest masked lattice factorized densely.
pub const MAX_DENSE_POINTS: usize = 4096;

#[derive(Debug, Clone)]
enum Factor {
    /// Lower Cholesky factor of the full R×R covariance.
    Dense(DMatrix<f64>),
    /// Transposed per-axis Cholesky factors; the covariance of an unmasked
    /// grid is the Kronecker product of the per-axis covariances.
    Separable(Vec<DMatrix<f64>>),
}

/// Draws mean-zero unit-variance Gaussian fields on a lattice.
///
/// Replicate `i` of master seed `s` always consumes the same normals (one
/// per included point, flat order) from its own stream, so draws do not
/// depend on how replicates are scheduled.
#[derive(Debug, Clone)]
pub struct GrfSampler {
    lattice: Arc<Lattice>,
    kernel: SquaredExponential,
    factor: Factor,
    jitter: f64,
}

fn cholesky_with_jitter(k: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let mut eps = JITTER_START;
    while eps <= JITTER_MAX {
        let mut m = k.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += eps;
        }
        if let Some(ch) = m.cholesky() {
            return Ok((ch.unpack(), eps));
        }
        eps *= 2.0;
    }
    let min_eig = k.clone().symmetric_eigenvalues().min();
    Err(Error::Numerical(format!(
        "covariance matrix not factorizable with jitter up to {JITTER_MAX:e}; smallest eigenvalue ≈ {min_eig:.3e}"
    )))
}

impl GrfSampler {
    /// Unmasked lattices use the per-axis factorization, masked ones a dense
    /// factorization of the covariance over the included points.
    pub fn new(lattice: Arc<Lattice>, kernel: SquaredExponential) -> Result<Self> {
        if lattice.is_masked() {
            Self::dense(lattice, kernel)
        } else {
            Self::separable(lattice, kernel)
        }
    }

    pub fn dense(lattice: Arc<Lattice>, kernel: SquaredExponential) -> Result<Self> {
        kernel.check_lattice(&lattice)?;
        let n = lattice.len();
        if n > MAX_DENSE_POINTS {
            return Err(Error::Invalid(format!(
                "{n} included points exceed the dense sampler limit of {MAX_DENSE_POINTS}"
            )));
        }
        let coords: Vec<Vec<f64>> = (0..n).map(|r| lattice.coords(r)).collect::<Result<_>>()?;
        let k = DMatrix::from_fn(n, n, |i, j| kernel.eval(&coords[i], &coords[j]));
        let (l, jitter) = cholesky_with_jitter(&k)?;
        Ok(Self { lattice, kernel, factor: Factor::Dense(l), jitter })
    }

    fn separable(lattice: Arc<Lattice>, kernel: SquaredExponential) -> Result<Self> {
        kernel.check_lattice(&lattice)?;
        let mut factors = Vec::with_capacity(lattice.dims());
        let mut jitter: f64 = 0.0;
        for (axis, xs) in lattice.axes().iter().enumerate() {
            let k = DMatrix::from_fn(xs.len(), xs.len(), |i, j| kernel.eval_axis(axis, xs[i], xs[j]));
            let (l, eps) = cholesky_with_jitter(&k)?;
            jitter = jitter.max(eps);
            factors.push(l.transpose());
        }
        Ok(Self { lattice, kernel, factor: Factor::Separable(factors), jitter })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn kernel(&self) -> &SquaredExponential {
        &self.kernel
    }

    /// Diagonal jitter that made the factorization succeed (largest over axes
    /// for the separable form).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn is_separable(&self) -> bool {
        matches!(self.factor, Factor::Separable(_))
    }

    fn normals(&self, master_seed: u64, replicate: usize, out: &mut [f64]) {
        let mut rng = replicate_rng(master_seed, replicate as u64);
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
    }

    /// Applies ⊗_d L_d to a row-major grid array, one axis at a time.
    fn apply_separable(&self, factors: &[DMatrix<f64>], data: &mut Vec<f64>, scratch: &mut Vec<f64>) {
        let shape = self.lattice.shape();
        scratch.resize(data.len(), 0.0);
        for (axis, lt) in factors.iter().enumerate() {
            let nd = shape[axis];
            let pre: usize = shape[..axis].iter().product();
            let post: usize = shape[axis + 1..].iter().product();
            if post == 1 {
                // data is row-major pre×nd, i.e. column-major nd×pre
                let x = DMatrixView::from_slice(data, nd, pre);
                let mut y = DMatrixViewMut::from_slice(scratch, nd, pre);
                y.gemm(1.0, &lt.transpose(), &x, 0.0);
            } else {
                let block = nd * post;
                for p in 0..pre {
                    let x = DMatrixView::from_slice(&data[p * block..(p + 1) * block], post, nd);
                    let mut y = DMatrixViewMut::from_slice(&mut scratch[p * block..(p + 1) * block], post, nd);
                    y.gemm(1.0, &x, lt, 0.0);
                }
            }
            std::mem::swap(data, scratch);
        }
    }

    /// Field values for the replicates in `range`, in order.
    pub fn sample_values(&self, master_seed: u64, range: Range<usize>) -> Vec<Vec<f64>> {
        let n = self.lattice.len();
        match &self.factor {
            Factor::Dense(l) => {
                let b = range.len();
                let mut e = DMatrix::<f64>::zeros(n, b);
                for (j, rep) in range.enumerate() {
                    self.normals(master_seed, rep, e.column_mut(j).as_mut_slice());
                }
                let z = l * e;
                (0..b).map(|j| z.column(j).as_slice().to_vec()).collect()
            }
            Factor::Separable(factors) => {
                let mut scratch = Vec::new();
                range
                    .map(|rep| {
                        let mut v = vec![0.0; n];
                        self.normals(master_seed, rep, &mut v);
                        self.apply_separable(factors, &mut v, &mut scratch);
                        v
                    })
                    .collect()
            }
        }
    }

    pub fn sample_batch(&self, master_seed: u64, range: Range<usize>) -> Vec<FieldSample> {
        self.sample_values(master_seed, range)
            .into_iter()
            .map(|v| FieldSample::new(Arc::clone(&self.lattice), v).expect("sampler output matches lattice"))
            .collect()
    }

    /// Replicate `replicate` of `master_seed`.
    pub fn sample(&self, master_seed: u64, replicate: usize) -> FieldSample {
        self.sample_batch(master_seed, replicate..replicate + 1).pop().expect("one replicate")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, m: usize) -> Arc<Lattice> {
        Arc::new(Lattice::full(vec![Lattice::linspace(0.0, (n - 1) as f64, n), Lattice::linspace(0.0, (m - 1) as f64, m)]).unwrap())
    }

    #[test]
    fn separable_matches_dense_draw() {
        // same normals, same covariance: the two factorizations agree up to
        // jitter and rounding
        let l = grid(6, 4);
        let k = SquaredExponential::new(vec![1.5, 0.8]).unwrap();
        let sep = GrfSampler::new(Arc::clone(&l), k.clone()).unwrap();
        let dense = GrfSampler::dense(l, k).unwrap();
        assert!(sep.is_separable() && !dense.is_separable());
        // Cholesky factors are unique, and L_x ⊗ L_y is lower triangular in
        // row-major flat order, so the draws coincide
        for rep in 0..5 {
            let a = sep.sample(7, rep);
            let b = dense.sample(7, rep);
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() < 1e-6, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn batch_and_single_draws_agree() {
        let l = grid(5, 5);
        let s = GrfSampler::new(l, SquaredExponential::isotropic(2.0, 2).unwrap()).unwrap();
        let batch = s.sample_values(3, 0..4);
        assert_eq!(batch[2], s.sample(3, 2).into_values());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(GrfSampler::new(grid(3, 3), SquaredExponential::isotropic(1.0, 3).unwrap()).is_err());
    }
}
