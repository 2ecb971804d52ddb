mod common;

use std::collections::BTreeSet;

use common::levenshtein;
use erpipe_core::synthetic::*;
use erpipe_core::Error;

#[test]
fn zero_noise_copies_matched_rows() {
    let spec = SyntheticSpec {
        left_size: 200,
        right_size: 200,
        matches: 100,
        char_noise: 0.0,
        swap_rate: 0.0,
        deletion_rate: 0.0,
        ..Default::default()
    };
    let d = make_synthetic(&spec).unwrap();
    assert_eq!(d.truth.len(), 100);
    for &(l, r) in &d.truth {
        assert_eq!(d.left.tuples()[l].values, d.right.tuples()[r].values);
    }
}

#[test]
fn same_seed_same_output() {
    let spec = SyntheticSpec { seed: 9, ..Default::default() };
    assert_eq!(make_synthetic(&spec).unwrap(), make_synthetic(&spec).unwrap());
    assert_ne!(make_synthetic(&spec).unwrap(), make_synthetic(&SyntheticSpec { seed: 10, ..spec }).unwrap());
}

#[test]
fn character_edit_fraction_tracks_noise_rate() {
    let spec = SyntheticSpec { deletion_rate: 0.0, swap_rate: 0.0, char_noise: 0.1, ..Default::default() };
    let d = make_synthetic(&spec).unwrap();
    let (mut edits, mut chars) = (0usize, 0usize);
    for &(l, r) in &d.truth {
        let lt = &d.left.tuples()[l].values;
        let rt = &d.right.tuples()[r].values;
        for (a, b) in lt.iter().zip(rt) {
            let a = a.as_deref().unwrap();
            edits += levenshtein(a, b.as_deref().unwrap_or(""));
            chars += a.chars().count();
        }
    }
    let fraction = edits as f64 / chars as f64;
    assert!((fraction - 0.1).abs() <= 0.03, "measured {fraction}");
}

#[test]
fn shapes_and_uniqueness() {
    let d = make_synthetic(&SyntheticSpec { left_size: 150, right_size: 220, matches: 90, ..Default::default() }).unwrap();
    assert_eq!((d.left.len(), d.right.len(), d.truth.len()), (150, 220, 90));
    assert_eq!(d.left.attributes(), ATTRIBUTES);
    let lefts: BTreeSet<_> = d.truth.iter().map(|p| p.0).collect();
    let rights: BTreeSet<_> = d.truth.iter().map(|p| p.1).collect();
    assert_eq!((lefts.len(), rights.len()), (90, 90));
    let rows: BTreeSet<_> = d.left.tuples().iter().map(|t| t.values.clone()).collect();
    assert_eq!(rows.len(), 150);
}

#[test]
fn deletion_and_swaps_show_up() {
    let d = make_synthetic(&SyntheticSpec { char_noise: 0.0, deletion_rate: 0.2, swap_rate: 1.0, ..Default::default() }).unwrap();
    let missing: usize = d.truth.iter().map(|&(_, r)| 4 - d.right.tuples()[r].present_count()).sum();
    let cells = 4 * d.truth.len();
    let rate = missing as f64 / cells as f64;
    assert!((rate - 0.2).abs() < 0.05, "deleted {rate}");
    let moved = d
        .truth
        .iter()
        .filter(|&&(l, r)| {
            let (a, b) = (&d.left.tuples()[l].values, &d.right.tuples()[r].values);
            a.iter().zip(b).any(|(x, y)| y.is_some() && x != y)
        })
        .count();
    assert!(moved > d.truth.len() / 2);
}

#[test]
fn infeasible_specs() {
    let too_many = SyntheticSpec { left_size: 5, right_size: 10, matches: 6, ..Default::default() };
    assert!(matches!(make_synthetic(&too_many), Err(Error::Infeasible(_))));
    for bad in [
        SyntheticSpec { char_noise: 1.5, ..Default::default() },
        SyntheticSpec { deletion_rate: -0.1, ..Default::default() },
        SyntheticSpec { variant_rate: 2.0, ..Default::default() },
    ] {
        assert!(matches!(make_synthetic(&bad), Err(Error::Infeasible(_))));
    }
}
