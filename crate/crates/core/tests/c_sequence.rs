mod common;

use colorsim::bidding::{c_sequence, c_sequence_from_log2};
use common::{exact_sequence, OracleSeq};
use proptest::prelude::*;

fn compare(c0: u64, l: u32, beta: f64) {
    let got = if l < 64 {
        c_sequence(c0, 1u64 << l, beta)
    } else {
        c_sequence_from_log2(c0, f64::from(l), beta)
    };
    match (exact_sequence(c0, l, beta), got) {
        (OracleSeq::Values(want), Ok(seq)) => {
            assert_eq!(seq.values, want, "C0={c0} l={l} β={beta}");
            assert!(seq.values.len() - 1 <= 30);
        }
        (OracleSeq::AboveTarget | OracleSeq::Stall, Err(_)) => {}
        (want, got) => panic!("C0={c0} l={l} β={beta}: oracle {want:?}, got {got:?}"),
    }
}

#[test]
fn known_values() {
    // 3e = 8.15 -> 8; 4e^(4/3) = 15.2 -> 14; 7e^(7/3) = 72.2 clamps to 63 -> 62
    assert_eq!(exact_sequence(6, 63, 1.0), OracleSeq::Values(vec![6, 8, 14, 62]));
    assert_eq!(exact_sequence(4, 63, 1.0), OracleSeq::Stall);
    compare(6, 63, 1.0);
    compare(4, 63, 1.0);
}

#[test]
fn even_integer_caps() {
    // caps that are even integers are where float rounding of the power bites
    for (l, beta) in [(4, 1.5), (16, 1.5), (36, 1.5), (8, 2.0), (4, 3.0), (10, 3.0), (32, 1.0)] {
        for c0 in [6, 8, 10] {
            compare(c0, l, beta);
        }
    }
}

fn square_root_exponents() -> impl Strategy<Value = (u32, f64)> {
    prop_oneof![
        (2u32..64).prop_map(|l| (l, 1.0)),
        (2u32..64).prop_map(|l| (l, 2.0)),
        (2u32..64).prop_map(|l| (l, 3.0)),
        prop::sample::select(vec![4u32, 9, 16, 25, 36, 49]).prop_map(|l| (l, 1.5)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn matches_exact_recurrence(c0 in 2u64..48, (l, beta) in square_root_exponents()) {
        compare(c0, l, beta);
    }
}
