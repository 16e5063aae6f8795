mod common;

use std::collections::BTreeSet;

use colorsim::bidding::{
    audit_honesty, generate_good_instance, outcome_fingerprint, preprocess, public_p_star,
    r_set, replay_with_nstar, sparsified_coloring, BiddingParams, GoodSpec, Status,
};
use colorsim::graph::validate_coloring;
use colorsim::rng::tape_word;

fn instance(n: usize, delta: usize, seed: u64) -> colorsim::bidding::GoodInstance {
    generate_good_instance(&GoodSpec::new(n, delta, 8, 2.0), seed).unwrap()
}

#[test]
fn significant_sets_match_pairwise_scan() {
    for seed in 0..3 {
        let inst = instance(300, 16, seed);
        let params = BiddingParams::new(inst.c0, inst.beta, inst.p_star, inst.delta).unwrap();
        let pre = preprocess(&inst, &params, seed);
        let oracle = common::nstar_oracle(&inst, &params, seed);
        let k = params.iterations();
        for v in 0..inst.graph.n() {
            for i in 0..k {
                let got: BTreeSet<_> = pre.rsets[v][i].iter().copied().collect();
                let want: BTreeSet<_> = oracle.sets[v][i].iter().copied().collect();
                assert_eq!(got, want, "R-set v={v} i={i}");
                let got: BTreeSet<_> = pre.significant[i][v].iter().copied().collect();
                assert_eq!(got, oracle.significant[i][v], "significant v={v} i={i}");
                assert_eq!(pre.overloaded[i][v], oracle.overloaded[i][v]);
            }
            let got: BTreeSet<_> = pre.nstar[v].iter().copied().collect();
            assert_eq!(got, oracle.nstar[v], "N* of {v}");
        }
    }
}

#[test]
fn r_set_early_stop_is_invisible() {
    // a 3-color palette is covered long before the sequence ends
    let pal = [2u64, 5, 9];
    for i in 0..50 {
        let w = tape_word(11, 4, i);
        let full: BTreeSet<u64> = colorsim::bidding::r_sequence(&pal, w, 64).collect();
        assert_eq!(r_set(&pal, w, 64), full.into_iter().collect::<Vec<_>>());
    }
}

#[test]
fn replay_is_bit_identical() {
    for seed in 0..5 {
        let inst = instance(1000, 32, seed);
        let a = sparsified_coloring(&inst, seed).unwrap();
        let b = replay_with_nstar(&inst, seed).unwrap();
        assert_eq!(outcome_fingerprint(&a), outcome_fingerprint(&b));
        assert_eq!(a.coloring, b.coloring);
    }
}

#[test]
fn colored_vertices_form_a_proper_partial_coloring() {
    let inst = instance(2000, 32, 9);
    let out = sparsified_coloring(&inst, 9).unwrap();
    let list = inst.to_list_instance().unwrap();
    let report = validate_coloring(&list, &out.coloring);
    assert!(report.is_empty(), "{report:?}");
    for (v, s) in out.state.status.iter().enumerate() {
        match s {
            Status::Colored { color, .. } => assert_eq!(out.coloring.get(v as u32), Some(*color)),
            _ => assert_eq!(out.coloring.get(v as u32), None),
        }
    }
}

#[test]
fn public_p_star_from_generator_lists() {
    let inst = instance(500, 20, 1);
    let list = inst.to_list_instance().unwrap();
    // palettes of 2Δ+1 = 41 colors; p* = floor + 1 - Δ with floor = 40
    assert!(list.max_degree() <= 20);
    assert_eq!(public_p_star(&list), 41 - list.max_degree() as u64);
}

#[test]
fn honesty_audit_against_definitions() {
    let inst = instance(1000, 32, 3);
    let out = sparsified_coloring(&inst, 3).unwrap();
    let first = audit_honesty(&inst, &out.state, 0);
    // no iteration precedes the first, so no significant neighbors yet
    assert!(first.entries.iter().all(|e| e.max_significant == 0 && e.honest_significant));
    for i in 0..out.state.params.iterations() {
        let audit = audit_honesty(&inst, &out.state, i);
        for e in &audit.entries {
            let sum: f64 = inst
                .graph
                .neighbors(e.v)
                .iter()
                .filter(|&&u| u < e.v)
                .map(|&u| 1.0 / inst.p[u as usize] as f64)
                .sum();
            assert!((sum - e.reciprocal_sum).abs() < 1e-9);
            assert_eq!(e.honest_sum, sum <= 1.0 / audit.c_target as f64 + 1e-12);
            assert_eq!(e.honest_significant, e.max_significant as u64 <= audit.d_target);
        }
    }
}
