use erpipe_core::dataset::*;
use erpipe_core::Error;
use proptest::prelude::*;

fn products() -> Dataset {
    Dataset::new(
        "T",
        vec!["Title".into(), "Price".into(), "Manufacturer".into()],
        vec![
            Tuple::from_cells("e1", &["sims 2", "", "aspyr media"]),
            Tuple::from_cells("e2", &["", "NULL", "NaN"]),
            Tuple::from_cells("e3", &["  sims   2\tdeluxe ", "19.99", "ea"]),
        ],
    )
    .unwrap()
}

#[test]
fn missing_values_and_names_are_omitted() {
    let d = products();
    assert_eq!(d.serialize(0).unwrap().as_str(), "[COL] Title [VAL] sims 2 [COL] Manufacturer [VAL] aspyr media");
}

#[test]
fn all_missing_serializes_to_nothing() {
    let s = products().serialize(1).unwrap();
    assert!(s.is_empty());
    assert_eq!(s.block_count(), 0);
}

#[test]
fn full_tuple_has_one_block_per_attribute_with_normalized_whitespace() {
    let s = products().serialize(2).unwrap();
    assert_eq!(s.block_count(), 3);
    assert_eq!(s.as_str(), "[COL] Title [VAL] sims 2 deluxe [COL] Price [VAL] 19.99 [COL] Manufacturer [VAL] ea");
}

#[test]
fn pair_serialization() {
    let d = products();
    let (a, b) = (d.serialize(0).unwrap(), d.serialize(2).unwrap());
    let p = serialize_pair(&a, &b);
    assert_eq!(p.as_str(), format!("[CLS] {a} [SEP] {b}"));
    assert_eq!(p.as_str().matches("[SEP]").count(), 1);
    assert_ne!(serialize_pair(&a, &b), serialize_pair(&b, &a));
    let e = d.serialize(1).unwrap();
    assert_eq!(serialize_pair(&e, &e).as_str(), "[CLS] [SEP]");
}

#[test]
fn invariant_violations() {
    let dup = Dataset::new("T", vec!["Title".into(), "Title".into()], vec![]);
    assert_eq!(dup, Err(Error::DuplicateAttribute("Title".into())));
    let ids = Dataset::new("T", vec!["a".into()], vec![Tuple::from_cells("x", &["1"]), Tuple::from_cells("x", &["2"])]);
    assert_eq!(ids, Err(Error::DuplicateTupleId("x".into())));
    let arity = Dataset::new("T", vec!["a".into()], vec![Tuple::from_cells("x", &["1", "2"])]);
    assert!(matches!(arity, Err(Error::Arity { expected: 1, found: 2, .. })));
}

#[test]
fn lookup_helpers() {
    let d = products();
    assert_eq!(d.position("e3"), Some(2));
    assert_eq!(d.attribute_index("Manufacturer"), Some(2));
    assert_eq!(d.present_cells(), 5);
    assert!(d.tuple(3).is_err());
}

fn cell() -> impl Strategy<Value = String> {
    prop_oneof![Just(String::new()), Just("NULL".to_string()), "[a-z ]{1,8}"]
}

proptest! {
    #[test]
    fn block_count_equals_present_values(rows in prop::collection::vec(prop::collection::vec(cell(), 3), 0..12)) {
        let tuples = rows.iter().enumerate().map(|(i, r)| Tuple::from_cells(i.to_string(), r)).collect();
        let d = Dataset::new("P", vec!["a".into(), "b".into(), "c".into()], tuples).unwrap();
        for (i, t) in d.tuples().iter().enumerate() {
            let s = d.serialize(i).unwrap();
            prop_assert_eq!(s.block_count(), t.present_count());
            // markers alternate
            let markers: Vec<&str> = s.as_str().split(' ').filter(|w| *w == "[COL]" || *w == "[VAL]").collect();
            prop_assert!(markers.chunks(2).all(|c| c == ["[COL]", "[VAL]"]));
        }
    }
}
