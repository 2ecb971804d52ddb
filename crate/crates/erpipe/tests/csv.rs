use std::collections::BTreeSet;

use erpipe::csv::*;
use erpipe_core::dataset::{Dataset, Tuple};
use erpipe_core::text::is_missing_cell;
use proptest::prelude::*;

#[test]
fn three_rows_with_an_empty_cell() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("amazon.csv");
    std::fs::write(&path, "id,Title,Price\na1,sims 2,23.44\na2,,9.99\na3,\"chess, master\",\n").unwrap();
    let d = load_csv(&path, Some("id")).unwrap();
    assert_eq!(d.id(), "amazon");
    assert_eq!(d.attributes(), ["Title", "Price"]);
    assert_eq!(d.len(), 3);
    assert_eq!(d.tuples()[1].values, vec![None, Some("9.99".into())]);
    assert_eq!(d.tuples()[2].values, vec![Some("chess, master".into()), None]);
    assert_eq!(d.present_cells(), 4);
}

#[test]
fn row_indices_are_ids_without_id_column() {
    let d = read_dataset("a,b\n1,2\n3,4\n", "T", None).unwrap();
    let ids: Vec<_> = d.tuples().iter().map(|t| t.id.as_str()).collect();
    assert_eq!(ids, ["0", "1"]);
    assert_eq!(d.attributes(), ["a", "b"]);
}

#[test]
fn malformed_inputs() {
    assert!(matches!(read_dataset("Title,Title\nx,y\n", "T", None), Err(CsvError::DuplicateHeader(h)) if h == "Title"));
    assert!(matches!(read_dataset("a,b\n\"open,x\n", "T", None), Err(CsvError::UnterminatedQuote { line: 2 })));
    assert!(matches!(read_dataset("a,b\nx\"y,z\n", "T", None), Err(CsvError::StrayQuote { line: 2 })));
    assert!(matches!(read_dataset("a,b\n\"x\"y,z\n", "T", None), Err(CsvError::AfterQuote { line: 2, found: 'y' })));
    assert!(matches!(
        read_dataset("a,b\n1,2\n1,2,3\n", "T", None),
        Err(CsvError::FieldCount { line: 3, expected: 2, found: 3 })
    ));
    assert!(matches!(read_dataset("", "T", None), Err(CsvError::MissingHeader)));
    assert!(matches!(read_dataset("a,b\n1,2\n", "T", Some("key")), Err(CsvError::UnknownIdColumn(_))));
    assert!(matches!(read_dataset("id,b\n ,2\n", "T", Some("id")), Err(CsvError::EmptyId { line: 2 })));
    assert!(matches!(read_dataset("id,b\nx,1\nx,2\n", "T", Some("id")), Err(CsvError::Dataset(_))));
}

#[test]
fn quoted_fields_span_lines_and_escape_quotes() {
    let recs = parse_records("a,b\r\n\"x\ny\",\"say \"\"hi\"\"\"\r\nlast,row").unwrap();
    assert_eq!(recs.len(), 3);
    assert_eq!(recs[1].fields, ["x\ny", "say \"hi\""]);
    assert_eq!((recs[1].line, recs[2].line), (2, 4));
    assert_eq!(recs[2].fields, ["last", "row"]);
    assert_eq!(parse_records("\u{feff}a,b\n").unwrap()[0].fields, ["a", "b"]);
}

#[test]
fn missing_sentinels_become_none() {
    let d = read_dataset("a,b,c\nNULL,  ,x\n", "T", None).unwrap();
    assert_eq!(d.tuples()[0].values, vec![None, None, Some("x".into())]);
}

#[test]
fn id_column_clash_on_write() {
    let d = Dataset::new("T", vec!["id".into()], vec![Tuple::from_cells("0", &["v"])]).unwrap();
    assert!(matches!(write_dataset(&d, Some("id")), Err(CsvError::DuplicateHeader(_))));
}

fn cell() -> impl Strategy<Value = Option<String>> {
    prop_oneof![
        1 => Just(None),
        4 => "[a-z ,\"\n\r'é]{1,8}".prop_filter("present", |s| !is_missing_cell(s)).prop_map(Some),
    ]
}

fn dataset() -> impl Strategy<Value = Dataset> {
    (1usize..4, 0usize..6).prop_flat_map(|(m, n)| {
        (
            prop::collection::btree_set("[A-Za-z][a-z,\" ]{0,5}", m..=m),
            prop::collection::vec(prop::collection::vec(cell(), m..=m), n..=n),
        )
            .prop_filter("attribute names", |(names, _)| !names.contains("id"))
            .prop_map(|(names, rows): (BTreeSet<String>, Vec<Vec<Option<String>>>)| {
                let tuples = rows.into_iter().enumerate().map(|(i, v)| Tuple::new(format!("r{i}"), v)).collect();
                Dataset::new("T", names.into_iter().collect(), tuples).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn write_then_read_round_trips(d in dataset()) {
        let text = write_dataset(&d, Some("id")).unwrap();
        prop_assert_eq!(read_dataset(&text, "T", Some("id")).unwrap(), d);
    }
}
