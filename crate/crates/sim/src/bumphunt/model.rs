use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tohm_core::scalar::format_shortest;
use tohm_core::{Error, Result};

use crate::bumphunt::region::Region;

pub const EVENTS_MAGIC: &str = "# tohm-events v1";

/// Gaussian masses below this make rejection sampling of the signal
/// component impractical.
const MIN_SIGNAL_MASS: f64 = 1e-6;

/// Uniform background over the region plus a fraction `eta` of events from
/// a Gaussian bump of known width `nu` at `theta`, truncated to the region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpModel {
    pub region: Region,
    pub nu: f64,
    pub eta: f64,
    pub theta: [f64; 2],
}

impl BumpModel {
    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(Error::Invalid(format!("nu must be positive, got {}", self.nu)));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::Invalid(format!("eta must lie in [0, 1], got {}", self.eta)));
        }
        if !self.region.contains(self.theta) {
            return Err(Error::Invalid(format!("signal centre {:?} is outside the region", self.theta)));
        }
        Ok(())
    }
}

/// Observed event coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventSet {
    pub events: Vec<[f64; 2]>,
}

impl EventSet {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn check_inside(&self, region: &Region) -> Result<()> {
        match self.events.iter().position(|&p| !region.contains(p)) {
            Some(i) => Err(Error::Invalid(format!("event {} at {:?} lies outside the region", i + 1, self.events[i]))),
            None => Ok(()),
        }
    }
}

fn uniform_point<R: Rng>(region: &Region, rng: &mut R) -> [f64; 2] {
    let [x0, x1, y0, y1] = region.bounds();
    loop {
        let p = [x0 + (x1 - x0) * rng.random::<f64>(), y0 + (y1 - y0) * rng.random::<f64>()];
        if region.contains(p) {
            return p;
        }
    }
}

/// Draws `n` events from the model using a single ChaCha8 stream seeded from
/// `rng`. Each event first picks its component, then rejection-samples it.
pub fn simulate_events_with<R: Rng>(model: &BumpModel, n: usize, rng: &mut R) -> Result<EventSet> {
    model.validate()?;
    if model.eta > 0.0 {
        let mass = model.region.gaussian_mass(model.theta, model.nu);
        if mass < MIN_SIGNAL_MASS {
            return Err(Error::Invalid(format!(
                "signal mass inside the region is {mass:.3e}; rejection sampling would stall"
            )));
        }
    }
    let mut events = Vec::with_capacity(n);
    for _ in 0..n {
        let signal = model.eta > 0.0 && rng.random::<f64>() < model.eta;
        let p = if signal {
            loop {
                let dx: f64 = rng.sample(StandardNormal);
                let dy: f64 = rng.sample(StandardNormal);
                let p = [model.theta[0] + model.nu * dx, model.theta[1] + model.nu * dy];
                if model.region.contains(p) {
                    break p;
                }
            }
        } else {
            uniform_point(&model.region, rng)
        };
        events.push(p);
    }
    Ok(EventSet { events })
}

pub fn simulate_events(model: &BumpModel, n: usize, seed: u64) -> Result<EventSet> {
    simulate_events_with(model, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn write_events<W: Write>(events: &EventSet, mut out: W) -> Result<()> {
    writeln!(out, "{EVENTS_MAGIC}")?;
    for p in &events.events {
        writeln!(out, "{}\t{}", format_shortest(p[0]), format_shortest(p[1]))?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_events(events: &EventSet, path: impl AsRef<Path>) -> Result<()> {
    write_events(events, BufWriter::new(File::create(path)?))
}

pub fn read_events<R: BufRead>(input: R) -> Result<EventSet> {
    let mut events = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if i == 0 {
            if line.trim() != EVENTS_MAGIC {
                return Err(Error::Parse { line: 1, msg: format!("expected {EVENTS_MAGIC:?} header") });
            }
            continue;
        }
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = t.split('\t').collect();
        if cols.len() != 2 {
            return Err(Error::Parse { line: lineno, msg: format!("expected 2 tab-separated columns, found {}", cols.len()) });
        }
        let mut p = [0.0; 2];
        for (slot, tok) in p.iter_mut().zip(&cols) {
            *slot = tok
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse { line: lineno, msg: format!("bad coordinate {tok:?}") })?;
        }
        events.push(p);
    }
    if events.is_empty() {
        return Err(Error::Parse { line: 0, msg: "event file holds no events".into() });
    }
    Ok(EventSet { events })
}

pub fn load_events(path: impl AsRef<Path>) -> Result<EventSet> {
    read_events(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Region {
        Region::Rectangle { x0: 0.0, x1: 10.0, y0: 0.0, y1: 10.0 }
    }

    #[test]
    fn background_mean_near_centroid() {
        let m = BumpModel { region: square(), nu: 0.5, eta: 0.0, theta: [5.0, 5.0] };
        let n = 20_000;
        let ev = simulate_events(&m, n, 1).unwrap();
        let sd = 10.0 / 12f64.sqrt();
        for a in 0..2 {
            let mean = ev.events.iter().map(|p| p[a]).sum::<f64>() / n as f64;
            assert!((mean - 5.0).abs() < 3.0 * sd / (n as f64).sqrt());
        }
        assert!(ev.check_inside(&square()).is_ok());
    }

    #[test]
    fn pure_signal_mean_near_theta() {
        let m = BumpModel { region: square(), nu: 0.5, eta: 1.0, theta: [3.0, 6.0] };
        let n = 5000;
        let ev = simulate_events(&m, n, 2).unwrap();
        for a in 0..2 {
            let mean = ev.events.iter().map(|p| p[a]).sum::<f64>() / n as f64;
            assert!((mean - m.theta[a]).abs() < 3.0 * 0.5 / (n as f64).sqrt());
        }
    }

    #[test]
    fn invalid_models() {
        let bad = |eta, nu, theta| BumpModel { region: square(), nu, eta, theta }.validate().is_err();
        assert!(bad(1.5, 0.5, [1.0, 1.0]));
        assert!(bad(0.5, 0.0, [1.0, 1.0]));
        assert!(bad(0.5, 0.5, [11.0, 1.0]));
    }

    #[test]
    fn event_file_round_trip_and_errors() {
        let ev = EventSet { events: vec![[0.1, 2.5e-7], [3.0, 4.0]] };
        let mut buf = Vec::new();
        write_events(&ev, &mut buf).unwrap();
        assert_eq!(read_events(buf.as_slice()).unwrap(), ev);
        assert!(matches!(read_events("# tohm-events v1\n1\t2\n3\n".as_bytes()), Err(Error::Parse { line: 3, .. })));
        assert!(read_events("1\t2\n".as_bytes()).is_err());
        assert!(read_events("# tohm-events v1\n1\tx\n".as_bytes()).is_err());
    }
}
