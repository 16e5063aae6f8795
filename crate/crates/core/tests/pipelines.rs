use colorsim::bidding::{color_with_bidding, BiddingKnobs};
use colorsim::clique::{run_clique_coloring, run_highdeg_coloring, CliqueConfig};
use colorsim::graph::{
    brute_force_color, gnp, greedy_list_color, validate_coloring, BruteForce, Graph,
    ListColoringInstance, Palette,
};
use colorsim::lca::{lca_sweep, LcaConfig, LcaOracle};
use colorsim::mpc::{check_mpc_palettes, run_mpc_coloring, MpcConfig};
use colorsim::Error;
use colorsim::rng::stream;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Random graph with each palette a random subset of `[0, universe)` of
/// size `deg + 1 + extra(v)`, or `size(v)` when `tight` is false.
fn random_lists(n: usize, p: f64, universe: u64, slack: usize, seed: u64, deg_plus_one: bool) -> ListColoringInstance {
    let g = gnp(n, p, seed).unwrap();
    let mut rng = stream(seed, 99, 0, 0);
    let mut colors: Vec<u64> = (0..universe).collect();
    let palettes = (0..n as u32)
        .map(|v| {
            colors.shuffle(&mut rng);
            let want = if deg_plus_one {
                g.degree(v) + 1 + rng.gen_range(0..=slack)
            } else {
                rng.gen_range(1..=3)
            };
            Palette::new(colors[..want.min(universe as usize)].iter().copied())
        })
        .collect();
    ListColoringInstance::new_unchecked(g, palettes)
}

#[test]
fn brute_force_agrees_with_greedy_witnesses() {
    let mut sat = 0;
    let mut unsat = 0;
    for seed in 0..300 {
        let inst = random_lists(7, 0.5, 4, 0, seed, false);
        let exact = brute_force_color(&inst, 1 << 20).unwrap();
        let greedy = greedy_list_color(&inst, 0..7u32);
        match exact {
            BruteForce::Colored(c) => {
                sat += 1;
                assert!(validate_coloring(&inst, &c).is_valid_total());
            }
            BruteForce::Unsatisfiable => {
                unsat += 1;
                assert!(greedy.is_err(), "greedy colored an unsatisfiable instance");
            }
        }
    }
    assert!(sat > 0 && unsat > 0, "sat {sat} unsat {unsat}");
}

#[test]
fn triangle_with_two_colors_is_unsatisfiable() {
    let g = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
    let inst = ListColoringInstance::new_unchecked(g, vec![Palette::range(0, 2); 3]);
    assert!(matches!(brute_force_color(&inst, 1000).unwrap(), BruteForce::Unsatisfiable));
}

fn check_all_pipelines(inst: &ListColoringInstance, seed: u64) {
    let (c, _) = run_clique_coloring(inst, &CliqueConfig::default(), seed).unwrap();
    assert!(validate_coloring(inst, &c).is_valid_total(), "clique");
    // the MPC path also needs |Ψ(v)| >= Δ - Δ^{3/5}
    match check_mpc_palettes(inst) {
        Ok(()) => {
            let (c, _) = run_mpc_coloring(inst, 0.5, &MpcConfig::default(), seed).unwrap();
            assert!(validate_coloring(inst, &c).is_valid_total(), "mpc");
        }
        Err(_) => assert!(matches!(
            run_mpc_coloring(inst, 0.5, &MpcConfig::default(), seed),
            Err(Error::InvalidInstance(_))
        )),
    }
    let (c, _) = color_with_bidding(inst, &BiddingKnobs::default(), seed).unwrap();
    assert!(validate_coloring(inst, &c).is_valid_total(), "bidding");
    let oracle = LcaOracle::new(inst, seed);
    let mut lca = colorsim::graph::Coloring::new(inst.n());
    for a in lca_sweep(&oracle, &LcaConfig::default()) {
        let a = a.unwrap();
        lca.set(a.vertex, a.color);
    }
    assert!(validate_coloring(inst, &lca).is_valid_total(), "lca");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn every_pipeline_colors_deg_plus_one_lists(
        n in 1usize..40,
        p in 0.0f64..0.6,
        slack in 0usize..4,
        seed in any::<u64>(),
    ) {
        let inst = random_lists(n, p, 60, slack, seed, true);
        check_all_pipelines(&inst, seed);
    }

    #[test]
    fn uniform_lists_on_gnp(n in 2usize..120, p in 0.0f64..0.3, seed in any::<u64>()) {
        let inst = ListColoringInstance::uniform(gnp(n, p, seed).unwrap());
        check_all_pipelines(&inst, seed);
    }
}

#[test]
fn brute_force_confirms_small_pipeline_instances() {
    for seed in 0..40 {
        let inst = random_lists(8, 0.5, 10, 1, seed, true);
        assert!(matches!(brute_force_color(&inst, u128::MAX).unwrap(), BruteForce::Colored(_)));
        check_all_pipelines(&inst, seed);
    }
}

#[test]
fn highdeg_recursion_on_dense_gnp() {
    let inst = ListColoringInstance::uniform(gnp(3000, 0.12, 5).unwrap());
    let (c, trace) = run_highdeg_coloring(&inst, &CliqueConfig::default(), 5).unwrap();
    assert!(validate_coloring(&inst, &c).is_valid_total());
    assert!(trace.depth >= 1, "{trace:?}");
    assert!(trace.unresolved.is_empty());
}
