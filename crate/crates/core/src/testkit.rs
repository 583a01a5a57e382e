//! Proptest strategies shared by the unit tests.

use proptest::prelude::*;

use crate::dataset::{Dataset, Pattern};
use crate::tolerance::{ToleranceMethod, ToleranceVector};

/// Rows of `1..=max_rows` patterns with `1..=max_n` features. Values come
/// from a coarse grid half of the time so that ties and duplicates occur.
pub fn rows(max_rows: usize, max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_n).prop_flat_map(move |n| {
        let value = prop_oneof![(-4i32..=4).prop_map(f64::from), -10.0f64..10.0,];
        prop::collection::vec(prop::collection::vec(value, n), 1..=max_rows)
    })
}

pub fn dataset(max_rows: usize, max_n: usize) -> impl Strategy<Value = Dataset> {
    rows(max_rows, max_n).prop_map(|r| Dataset::from_rows("prop", r).unwrap())
}

pub fn labeled_dataset(max_rows: usize, max_n: usize) -> impl Strategy<Value = Dataset> {
    rows(max_rows, max_n)
        .prop_flat_map(|r| {
            let len = r.len();
            (Just(r), prop::collection::vec(0u8..3, len))
        })
        .prop_map(|(r, labels)| {
            let patterns = r
                .into_iter()
                .zip(labels)
                .map(|(f, l)| Pattern::labeled(f, l.to_string()))
                .collect();
            Dataset::new("prop", patterns).unwrap()
        })
}

pub fn tolerance(n: usize) -> impl Strategy<Value = ToleranceVector> {
    prop::collection::vec(0.0f64..6.0, n)
        .prop_map(|d| ToleranceVector::new(d, ToleranceMethod::Manual).unwrap())
}

pub fn vigilance() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(0.0),
        Just(1.0),
        (0u32..=4).prop_map(|k| f64::from(k) / 4.0),
        0.0f64..=1.0,
    ]
}
