use gjlab_core::word::{eta_word, ETA_LENGTH_RATIO_BOUND};
use gjlab_core::OmegaWord;
use serde_json::Value;

#[test]
fn eta_lengths_match_fixture() {
    let raw = include_str!("fixtures/eta_lengths.json");
    let v: Value = serde_json::from_str(raw).unwrap();
    let om = OmegaWord::first_grigorchuk();
    let lengths = v["lengths"].as_array().unwrap();
    for (k, len) in lengths.iter().enumerate() {
        let measured = eta_word(&om, k).len();
        assert_eq!(measured as u64, len.as_u64().unwrap(), "k={k}");
        assert!(measured as f64 / (1u64 << k) as f64 <= ETA_LENGTH_RATIO_BOUND);
    }
}
