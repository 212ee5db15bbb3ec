use std::f64::consts::TAU;
use std::sync::Arc;

use rayon::prelude::*;
use tohm_core::{Error, FieldSample, Lattice, Result};

use crate::bumphunt::model::EventSet;
use crate::bumphunt::region::Region;

/// Stopping width for the η bracket.
const ETA_TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

/// Profile fit at one θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileFit {
    pub eta: f64,
    /// 2[ℓ(η̂) − ℓ(0)].
    pub w: f64,
}

/// Signal-to-background density ratios g_i = h_sig(x_i | θ) · λ(Θ).
pub fn density_ratios(events: &EventSet, region: &Region, theta: [f64; 2], nu: f64, out: &mut Vec<f64>) {
    let scale = region.area() / (region.gaussian_mass(theta, nu) * TAU * nu * nu);
    let inv = 1.0 / (2.0 * nu * nu);
    out.clear();
    out.extend(events.events.iter().map(|p| {
        let d2 = (p[0] - theta[0]).powi(2) + (p[1] - theta[1]).powi(2);
        scale * (-d2 * inv).exp()
    }));
}

/// ℓ(η) − ℓ(0) = Σ ln(1 + η(g_i − 1)).
pub fn log_likelihood_gain(g: &[f64], eta: f64) -> f64 {
    g.iter().map(|&gi| (eta * (gi - 1.0)).ln_1p()).sum()
}

/// Maximizes the mixture log-likelihood over η ∈ [0, 1].
///
/// The gain is concave in η, so the maximizer is 0 when the score at 0 is
/// non-positive, 1 when the score at 1 is non-negative, and otherwise the
/// unique root of the score, found by Newton steps safeguarded by bisection.
/// `None` if the iteration fails to settle.
pub fn profile_eta(g: &[f64]) -> Option<ProfileFit> {
    let score = |eta: f64| -> (f64, f64) {
        g.iter().fold((0.0, 0.0), |(d1, d2), &gi| {
            let t = (gi - 1.0) / (1.0 + eta * (gi - 1.0));
            (d1 + t, d2 - t * t)
        })
    };
    let (s0, c0) = score(0.0);
    if s0 <= 0.0 {
        return Some(ProfileFit { eta: 0.0, w: 0.0 });
    }
    if g.iter().all(|&gi| gi > 0.0) && score(1.0).0 >= 0.0 {
        return Some(ProfileFit { eta: 1.0, w: (2.0 * log_likelihood_gain(g, 1.0)).max(0.0) });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut eta = (-s0 / c0).clamp(0.0, 1.0);
    if eta <= lo || eta >= hi {
        eta = 0.5;
    }
    for _ in 0..MAX_ITER {
        let (s, c) = score(eta);
        if s > 0.0 {
            lo = eta;
        } else {
            hi = eta;
        }
        let mut next = eta - s / c;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - eta).abs();
        eta = next;
        if step < ETA_TOL || hi - lo < ETA_TOL {
            return Some(ProfileFit { eta, w: (2.0 * log_likelihood_gain(g, eta)).max(0.0) });
        }
    }
    None
}

/// Profile-LRT field and the fitted η at each lattice point.
#[derive(Debug, Clone, PartialEq)]
pub struct LrtField {
    pub field: FieldSample,
    pub eta_hat: Vec<f64>,
}

impl LrtField {
    /// Flat index, value, coordinates and η̂ at the maximum.
    pub fn peak(&self) -> (usize, f64, [f64; 2], f64) {
        let (r, w) = self.field.argmax();
        let xy = self.field.lattice().coords(r).expect("argmax is a lattice point");
        (r, w, [xy[0], xy[1]], self.eta_hat[r])
    }
}

/// W_n(θ_r) = 2[max_η ℓ(η, θ_r) − ℓ(0)] at every included lattice point.
pub fn lrt_field(events: &EventSet, lattice: Arc<Lattice>, region: &Region, nu: f64) -> Result<LrtField> {
    region.validate()?;
    if events.is_empty() {
        return Err(Error::Invalid("no events".into()));
    }
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::Invalid(format!("nu must be positive, got {nu}")));
    }
    if lattice.dims() != 2 {
        return Err(Error::Invalid(format!("bump hunt needs a 2-D lattice, got {} dimensions", lattice.dims())));
    }
    let points: Vec<[f64; 2]> = (0..lattice.len())
        .map(|r| {
            let c = lattice.coords(r)?;
            Ok([c[0], c[1]])
        })
        .collect::<Result<_>>()?;
    if let Some(p) = points.iter().find(|&&p| !region.contains(p)) {
        return Err(Error::Invalid(format!("lattice point {p:?} lies outside the region")));
    }

    let fits: Vec<Result<ProfileFit>> = points
        .par_iter()
        .map_init(Vec::new, |g, &theta| {
            density_ratios(events, region, theta, nu, g);
            profile_eta(g).ok_or_else(|| Error::Numerical(format!("η profile did not converge at θ = {theta:?}")))
        })
        .collect();
    let mut values = Vec::with_capacity(points.len());
    let mut eta_hat = Vec::with_capacity(points.len());
    for fit in fits {
        let fit = fit?;
        values.push(fit.w);
        eta_hat.push(fit.eta);
    }
    Ok(LrtField { field: FieldSample::new(lattice, values)?, eta_hat })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_cases() {
        // all events far from the bump: no signal
        assert_eq!(profile_eta(&[0.0, 0.1, 0.5]).unwrap(), ProfileFit { eta: 0.0, w: 0.0 });
        // every event supports the signal strongly
        let fit = profile_eta(&[5.0, 8.0, 3.0]).unwrap();
        assert_eq!(fit.eta, 1.0);
        assert!((fit.w - 2.0 * (5.0f64 * 8.0 * 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn interior_root_matches_closed_form() {
        // two events with g = (a, 0): score (a−1)/(1+η(a−1)) − 1/(1−η) = 0
        // gives η = (a − 2)/(2(a − 1))
        let a = 9.0;
        let fit = profile_eta(&[a, 0.0]).unwrap();
        assert!((fit.eta - (a - 2.0) / (2.0 * (a - 1.0))).abs() < 1e-10);
    }
}
