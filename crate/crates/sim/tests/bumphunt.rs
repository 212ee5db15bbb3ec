use std::f64::consts::PI;
use std::sync::Arc;

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tohm_sim::bumphunt::{
    bump_hunt, default_kernel_length, density_ratios, log_likelihood_gain, lrt_field, profile_eta, simulate_events,
    BumpModel, Calibration, EventSet, PipelineConfig, Region,
};
use tohm_sim::SquaredExponential;

const SQUARE: Region = Region::Rectangle { x0: 0.0, x1: 6.0, y0: 0.0, y1: 6.0 };

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[test]
fn simulated_mixture_fraction() {
    let model = BumpModel { region: SQUARE, nu: 0.4, eta: 0.3, theta: [3.0, 3.0] };
    let n = 100_000;
    let ev = simulate_events(&model, n, 7).unwrap();
    let r = 3.0 * model.nu;
    let near = ev.events.iter().filter(|&&p| dist(p, model.theta) <= r).count() as f64 / n as f64;
    // the bump sits well inside the square, so truncation is negligible
    let want = model.eta * (1.0 - (-4.5f64).exp()) + (1.0 - model.eta) * PI * r * r / SQUARE.area();
    let se = (want * (1.0 - want) / n as f64).sqrt();
    assert!((near - want).abs() < 4.0 * se, "{near} vs {want}");
    assert!(ev.check_inside(&SQUARE).is_ok());
}

#[test]
fn profile_matches_grid_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let m = rng.random_range(5..60);
        let g: Vec<f64> = (0..m).map(|_| (rng.random::<f64>() * 6.0 - 3.0).exp()).collect();
        let fit = profile_eta(&g).unwrap();
        let best = (0..=10_000)
            .map(|k| k as f64 / 10_000.0)
            .map(|eta| 2.0 * log_likelihood_gain(&g, eta))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(fit.w >= best - 1e-9, "{} < {best}", fit.w);
        assert!(fit.w - best < 1e-3 * best.abs().max(1.0));
        assert!((0.0..=1.0).contains(&fit.eta));
    }
}

fn lattice() -> Arc<tohm_core::Lattice> {
    Arc::new(SQUARE.lattice(0.25).unwrap())
}

#[test]
fn duplicated_events_double_the_statistic() {
    let model = BumpModel { region: SQUARE, nu: 0.5, eta: 0.1, theta: [2.0, 4.0] };
    let ev = simulate_events(&model, 300, 3).unwrap();
    let twice = EventSet { events: ev.events.iter().chain(&ev.events).copied().collect() };
    let a = lrt_field(&ev, lattice(), &SQUARE, 0.5).unwrap();
    let b = lrt_field(&twice, lattice(), &SQUARE, 0.5).unwrap();
    for (x, y) in a.field.values().iter().zip(b.field.values()) {
        assert!((2.0 * x - y).abs() <= 1e-8 * y.abs().max(1.0), "{x} {y}");
    }
}

#[test]
fn event_order_does_not_matter() {
    let model = BumpModel { region: SQUARE, nu: 0.5, eta: 0.1, theta: [2.0, 4.0] };
    let ev = simulate_events(&model, 400, 4).unwrap();
    let mut rev = ev.clone();
    rev.events.reverse();
    let a = lrt_field(&ev, lattice(), &SQUARE, 0.5).unwrap();
    let b = lrt_field(&rev, lattice(), &SQUARE, 0.5).unwrap();
    for (x, y) in a.field.values().iter().zip(b.field.values()) {
        assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
    }
}

#[test]
fn null_statistic_is_zero_about_half_the_time() {
    // at a fixed interior θ, W is a 50:50 mixture of zero and χ²₁
    let null = BumpModel { region: SQUARE, nu: 0.5, eta: 0.0, theta: [3.0, 3.0] };
    let runs = 400;
    let mut zeros = 0;
    let mut g = Vec::new();
    for s in 0..runs {
        let ev = simulate_events(&null, 2000, 500 + s).unwrap();
        density_ratios(&ev, &SQUARE, [3.0, 3.0], 0.5, &mut g);
        if profile_eta(&g).unwrap().w == 0.0 {
            zeros += 1;
        }
    }
    let frac = zeros as f64 / runs as f64;
    assert!((frac - 0.5).abs() <= 0.075, "{frac}");
}

#[test]
fn peak_locates_the_signal() {
    let theta = [4.0, 2.5];
    let model = BumpModel { region: SQUARE, nu: 0.5, eta: 0.05, theta };
    let lat = lattice();
    let hits = (0..50)
        .filter(|&s| {
            let ev = simulate_events(&model, 4000, 900 + s).unwrap();
            let (_, _, peak, _) = lrt_field(&ev, Arc::clone(&lat), &SQUARE, 0.5).unwrap().peak();
            dist(peak, theta) <= 2.0 * model.nu
        })
        .count();
    assert!(hits >= 45, "{hits}/50");
}

fn config(seed: u64) -> PipelineConfig {
    PipelineConfig {
        region: SQUARE,
        nu: 0.5,
        calibration: Calibration::Kernel(SquaredExponential::isotropic(default_kernel_length(0.5), 2).unwrap()),
        thresholds: vec![1.0, 8.0],
        n_reps: 100,
        l0: 1.0,
        seed,
    }
}

#[test]
fn strong_signal_is_significant() {
    let model = BumpModel { region: SQUARE, nu: 0.5, eta: 0.05, theta: [3.0, 3.0] };
    let lat = lattice();
    let strong = (0..50)
        .filter(|&s| {
            let ev = simulate_events(&model, 10_000, 300 + s).unwrap();
            let res = bump_hunt(&ev, Arc::clone(&lat), &config(s)).unwrap();
            res.report.sigma.is_some_and(|z| z >= 5.0)
        })
        .count();
    assert!(strong >= 45, "{strong}/50");
}

#[test]
fn pipeline_rejects_events_outside_region() {
    let ev = EventSet { events: vec![[1.0, 1.0], [7.0, 1.0]] };
    assert!(bump_hunt(&ev, lattice(), &config(0)).is_err());
}

#[test]
fn disc_search_region_with_many_points() {
    let disc = Region::Disc { cx: 0.0, cy: 0.0, radius: 30.0 };
    let lat = Arc::new(disc.lattice(1.0).unwrap());
    assert_eq!(lat.len(), 2821);
    let model = BumpModel { region: disc, nu: 2.0, eta: 0.0, theta: [0.0, 0.0] };
    let ev = simulate_events(&model, 2000, 1).unwrap();
    let cfg = PipelineConfig {
        region: disc,
        nu: 2.0,
        calibration: Calibration::Kernel(SquaredExponential::isotropic(default_kernel_length(2.0), 2).unwrap()),
        thresholds: vec![1.0, 8.0],
        n_reps: 100,
        l0: 1.0,
        seed: 9,
    };
    let res = bump_hunt(&ev, lat, &cfg).unwrap();
    assert!((0.0..=1.0).contains(&res.report.pvalue));
    assert!(res.report.lkc.lkcs[1] > 0.0);
}
