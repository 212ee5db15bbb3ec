use tohm_core::{Error, Lattice, Result};

/// Squared-exponential covariance with unit variance,
/// k(θ, θ') = exp(−½ Σ_d ((θ_d − θ'_d)/ℓ_d)²), on physical coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredExponential {
    length_scales: Vec<f64>,
}

impl SquaredExponential {
    /// Same length-scale on every axis; `dims` copies of `ell`.
    pub fn isotropic(ell: f64, dims: usize) -> Result<Self> {
        Self::new(vec![ell; dims])
    }

    pub fn new(length_scales: Vec<f64>) -> Result<Self> {
        if length_scales.is_empty() {
            return Err(Error::Invalid("kernel needs at least one length-scale".into()));
        }
        if let Some(l) = length_scales.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::Invalid(format!("length-scales must be positive and finite, got {l}")));
        }
        Ok(Self { length_scales })
    }

    pub fn length_scales(&self) -> &[f64] {
        &self.length_scales
    }

    pub fn dims(&self) -> usize {
        self.length_scales.len()
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let q: f64 = a
            .iter()
            .zip(b)
            .zip(&self.length_scales)
            .map(|((x, y), l)| ((x - y) / l).powi(2))
            .sum();
        (-0.5 * q).exp()
    }

    /// One-axis factor exp(−½ ((x − y)/ℓ_axis)²).
    pub fn eval_axis(&self, axis: usize, x: f64, y: f64) -> f64 {
        (-0.5 * ((x - y) / self.length_scales[axis]).powi(2)).exp()
    }

    pub fn check_lattice(&self, lattice: &Lattice) -> Result<()> {
        if lattice.dims() != self.dims() {
            return Err(Error::Invalid(format!(
                "kernel has {} length-scales but the lattice is {}-dimensional",
                self.dims(),
                lattice.dims()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_variance_and_symmetry() {
        let k = SquaredExponential::new(vec![2.0, 0.5]).unwrap();
        assert_eq!(k.eval(&[1.0, 3.0], &[1.0, 3.0]), 1.0);
        assert_eq!(k.eval(&[0.0, 0.0], &[1.0, 0.2]), k.eval(&[1.0, 0.2], &[0.0, 0.0]));
        let expect = (-0.5f64 * (0.25 + 0.16)).exp();
        assert!((k.eval(&[0.0, 0.0], &[1.0, 0.2]) - expect).abs() < 1e-15);
        assert!((k.eval_axis(0, 0.0, 1.0) * k.eval_axis(1, 0.0, 0.2) - expect).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_scales() {
        assert!(SquaredExponential::new(vec![]).is_err());
        assert!(SquaredExponential::new(vec![1.0, 0.0]).is_err());
        assert!(SquaredExponential::isotropic(f64::NAN, 2).is_err());
    }
}
