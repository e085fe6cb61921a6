#![allow(dead_code)]

use handlesplit::io::{load_datum, serialize_datum};
use handlesplit::{validate_datum, MorseDatum, PointId};

/// Parses and validates an inline document; the header is added here.
pub fn datum(body: &str) -> MorseDatum {
    let text = format!("morse-datum 1\n{body}");
    match load_datum(&text) {
        Ok(d) => d,
        Err(e) => panic!("bad test datum: {e}\n{text}"),
    }
}

pub fn id(i: u32) -> PointId {
    PointId(i)
}

pub fn assert_valid(d: &MorseDatum) {
    let report = validate_datum(d);
    assert!(report.is_empty(), "{report:?}\n{}", serialize_datum(d));
}
