use erpipe::formats::*;
use erpipe_core::collab::{CsflParams, LossParts, Prediction};
use erpipe_core::dataset::{Dataset, Tuple};
use erpipe_core::gnn::GnnParams;
use erpipe_core::labels::{NegativeLabel, NegativeLabels, PositiveLabel, PositiveLabels};
use erpipe_core::linalg::Matrix;
use proptest::prelude::*;

const HASH: &str = "abc123";

fn side(id: &str, n: usize) -> Dataset {
    Dataset::new(id, vec!["t".into()], (0..n).map(|i| Tuple::from_cells(format!("{id}{i}"), &["x"])).collect()).unwrap()
}

proptest! {
    #[test]
    fn embeddings_round_trip_bit_exact(rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 3), 0..8)) {
        let ids: Vec<String> = (0..rows.len()).map(|i| format!("e{i}")).collect();
        let text = write_embeddings(Some(HASH), ids.iter().map(String::as_str).zip(rows.iter().map(Vec::as_slice)), 3).unwrap();
        prop_assert_eq!(config_hash(&text), Some(HASH));
        let (dim, back) = read_embeddings(&text).unwrap();
        prop_assert_eq!(dim, 3);
        for ((id, v), (want_id, want)) in back.iter().zip(ids.iter().zip(&rows)) {
            prop_assert_eq!(id, want_id);
            let bits: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
            let want_bits: Vec<u64> = want.iter().map(|x| x.to_bits()).collect();
            prop_assert_eq!(bits, want_bits);
        }
    }
}

#[test]
fn embedding_file_errors() {
    assert!(read_embeddings("").is_err());
    assert!(read_embeddings("2 2\na 1 2\n").is_err());
    assert!(read_embeddings("1 2\na 1\n").is_err());
    assert!(read_embeddings("2 1\na 1\na 2\n").is_err());
    assert!(read_embeddings("1 1\na NaN\n").is_err());
    let row = [1.0];
    assert!(matches!(write_embeddings(None, [("has space", &row[..])].into_iter(), 1), Err(FormatError::BadId(_))));
}

#[test]
fn pairs_labels_predictions_round_trip() {
    let (l, r) = (side("a", 4), side("b", 5));
    let (li, ri) = (IdIndex::new(&l, "left"), IdIndex::new(&r, "right"));
    let pairs = vec![(0, 4), (3, 1), (2, 2)];
    let text = write_pairs(Some(HASH), &pairs, &li, &ri).unwrap();
    assert_eq!(read_pairs(&text, &li, &ri).unwrap(), pairs);

    let pos = PositiveLabels(vec![PositiveLabel { left: 0, right: 0, score: 1.0 }, PositiveLabel { left: 1, right: 1, score: 1.0 }]);
    let neg = NegativeLabels(vec![NegativeLabel { left: 0, right: 3, source: 0 }, NegativeLabel { left: 2, right: 1, source: 1 }]);
    let text = write_labels(Some(HASH), &pos, &neg, &li, &ri).unwrap();
    assert_eq!(text.lines().nth(1), Some("a0\tb0\t1"));
    assert_eq!(read_labels(&text, &li, &ri).unwrap(), (pos, neg));

    let preds = vec![
        Prediction { left: 1, right: 2, probability: 0.123456789, matched: false },
        Prediction { left: 3, right: 0, probability: 0.9, matched: true },
    ];
    let text = write_predictions(Some(HASH), &preds, &li, &ri).unwrap();
    assert_eq!(read_predictions(&text, &li, &ri).unwrap(), preds);

    assert!(matches!(read_pairs("a0\tzz\n", &li, &ri), Err(FormatError::UnknownId { side: "right", .. })));
    assert!(matches!(read_pairs("a0 b0\n", &li, &ri), Err(FormatError::Parse { line: 1, .. })));
    assert!(read_labels("a0\tb0\t2\n", &li, &ri).is_err());
}

#[test]
fn hash_line_is_only_read_from_leading_comments() {
    assert_eq!(config_hash("# config_hash=ff\nx\n"), Some("ff"));
    assert_eq!(config_hash("# note\n# config_hash=ff\n"), Some("ff"));
    assert_eq!(config_hash("x\n# config_hash=ff\n"), None);
}

#[test]
fn loss_traces_round_trip() {
    let trace = [3.5, 2.25, 1.0 / 3.0];
    assert_eq!(read_loss(&write_graph_loss(Some(HASH), &trace)).unwrap(), trace);
    let parts: Vec<LossParts> = trace.iter().map(|&t| LossParts { total: t, l1: t / 2.0, l2: t / 4.0 }).collect();
    assert_eq!(read_loss(&write_collab_loss(None, &parts)).unwrap(), trace);
}

#[test]
fn model_files_round_trip() {
    let params = GnnParams::init(4, 2, vec!["title".into(), "price".into()], 7);
    let ck = GraphCheckpoint {
        params,
        left: Matrix::from_rows(4, &[[0.1, 0.2, 0.3, 0.4], [1.0 / 3.0, -0.5, 0.0, 1e-300]]),
        right: Matrix::from_rows(4, &[[0.5, 0.5, 0.5, 0.5]]),
    };
    let text = write_graph_checkpoint(Some(HASH), &ck);
    assert_eq!(read_graph_checkpoint(&text).unwrap(), ck);
    assert!(read_graph_checkpoint(&text.replace("erpipe-graph-model 1", "something else")).is_err());
    assert!(read_graph_checkpoint(&format!("{text}1 2 3\n")).is_err());

    let collab = CsflParams::init(3, 2, 5);
    let text = write_collab_model(Some(HASH), &collab);
    assert_eq!(read_collab_model(&text).unwrap(), collab);
    let truncated: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
    assert!(read_collab_model(&truncated).is_err());
}
