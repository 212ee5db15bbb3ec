use std::sync::Arc;

use proptest::prelude::*;
use tohm_core::field_io::{load_field, read_field, save_field, write_field};
use tohm_core::{FieldSample, Lattice};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip_is_bit_exact(
        (nx, ny, values, mask) in (1usize..6, 1usize..6).prop_flat_map(|(nx, ny)| {
            (Just(nx), Just(ny), prop::collection::vec(-1e12f64..1e12, nx * ny), prop::collection::vec(any::<bool>(), nx * ny))
        }),
        step in 1e-6f64..1e3,
    ) {
        let axes = vec![(0..nx).map(|i| i as f64 * step).collect(), (0..ny).map(|i| -(i as f64) / step).rev().collect::<Vec<_>>()];
        let mask = if mask.iter().any(|&m| m) { Some(mask) } else { None };
        let lattice = Arc::new(Lattice::new(axes, mask).unwrap());
        let values: Vec<f64> = values.into_iter().take(lattice.len()).collect();
        let f = FieldSample::new(lattice, values).unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        let back: FieldSample = read_field(buf.as_slice()).unwrap();
        prop_assert_eq!(back.lattice(), f.lattice());
        prop_assert_eq!(back.values(), f.values());
    }
}

#[test]
fn file_round_trip_in_single_precision() {
    let lattice = Arc::new(Lattice::<f32>::full(vec![vec![0.0, 0.5, 1.0], vec![2.0, 3.0]]).unwrap());
    let f = FieldSample::new(lattice, vec![0.1f32, 1e-20, -3.5, 7.25e9, 0.0, 1.0]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.txt");
    save_field(&f, &path).unwrap();
    let back: FieldSample<f32> = load_field(&path).unwrap();
    assert_eq!(back.values(), f.values());
    assert!(load_field::<f64>(dir.path().join("missing.txt")).is_err());
}
