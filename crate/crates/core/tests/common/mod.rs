//! Oracles shared by the integration tests. Each one recomputes a quantity
//! from its definition without going through the optimized code path.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use num::{BigInt, BigRational, One, ToPrimitive, Zero};

use colorsim::bidding::{r_sequence, BiddingParams, GoodInstance};
use colorsim::graph::{Color, Vertex};
use colorsim::rng::tape_word;

// ---------------------------------------------------------------- C sequence

/// `log2(p*)^β` for `p* = 2^l`, exact. `β = 1.5` needs `l` to be a square.
pub fn exact_cap(l: u32, beta: f64) -> Option<BigRational> {
    let l = BigInt::from(l);
    let r = |x: BigInt| Some(BigRational::from_integer(x));
    match beta {
        1.0 => r(l),
        2.0 => r(&l * &l),
        3.0 => r(&l * &l * &l),
        1.5 => {
            let s = l.sqrt();
            (&s * &s == l).then(|| BigRational::from_integer(&l * s))
        }
        _ => None,
    }
}

fn ceil_half(x: &BigRational) -> BigInt {
    (x / BigRational::from_integer(2.into())).ceil().to_integer()
}

/// `2·ceil(min(½·e^{c/6}·c, cap)/2) − 2`, decided with rational enclosures
/// of the exponential.
pub fn exact_step(c: u64, cap: &BigRational) -> BigInt {
    let x = BigRational::new(BigInt::from(c), BigInt::from(6));
    let half_c = BigRational::new(BigInt::from(c), BigInt::from(2));
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    for n in 0..20_000u32 {
        // sum = Σ_{k<n} x^k/k!, term = x^n/n!
        let lo = &half_c * &sum;
        if &lo >= cap {
            return ceil_half(cap) * 2 - 2;
        }
        let np1 = BigRational::from_integer((n + 1).into());
        if n > 0 && np1 > x {
            let tail = &term * &np1 / (&np1 - &x);
            let hi = &half_c * (&sum + tail);
            if &hi < cap {
                let (a, b) = (ceil_half(&lo), ceil_half(&hi));
                // lo < true value < hi strictly, and the value is irrational
                if a == b && !(&lo / BigRational::from_integer(2.into())).is_integer() {
                    return a * 2 - 2;
                }
            }
        }
        sum += &term;
        term = term * &x / np1;
    }
    panic!("enclosure did not converge at C = {c}");
}

#[derive(Debug, PartialEq, Eq)]
pub enum OracleSeq {
    Values(Vec<u64>),
    AboveTarget,
    Stall,
}

pub fn exact_sequence(c0: u64, l: u32, beta: f64) -> OracleSeq {
    let cap = exact_cap(l, beta).expect("rational cap");
    let target = ceil_half(&cap) * 2 - 2;
    if BigInt::from(c0) > target {
        return OracleSeq::AboveTarget;
    }
    let mut values = vec![c0];
    let mut c = BigInt::from(c0);
    while c != target {
        let next = exact_step(c.to_u64().unwrap(), &cap);
        if next <= c {
            return OracleSeq::Stall;
        }
        values.push(next.to_u64().unwrap());
        c = next;
    }
    OracleSeq::Values(values)
}

// ---------------------------------------------------------------- sparsification

pub struct NstarOracle {
    /// `sets[v][i]`
    pub sets: Vec<Vec<HashSet<Color>>>,
    pub significant: Vec<Vec<BTreeSet<Vertex>>>,
    pub overloaded: Vec<Vec<bool>>,
    pub nstar: Vec<BTreeSet<Vertex>>,
}

/// Rebuilds R-sets from the full, untruncated sequences and finds
/// significant neighbors by scanning every pair of R-sets.
pub fn nstar_oracle(inst: &GoodInstance, params: &BiddingParams, seed: u64) -> NstarOracle {
    let n = inst.graph.n();
    let k = params.iterations();
    let sets: Vec<Vec<HashSet<Color>>> = (0..n)
        .map(|v| {
            (0..k)
                .map(|i| {
                    let w = tape_word(seed, inst.tape_ids[v], i as u64);
                    r_sequence(inst.palettes[v].as_slice(), w, params.big_k).collect()
                })
                .collect()
        })
        .collect();
    let mut significant = vec![vec![BTreeSet::new(); n]; k];
    for i in 0..k {
        for v in 0..n {
            for &u in inst.graph.neighbors(v as Vertex) {
                let hit = (0..=i).any(|j| {
                    sets[v][i]
                        .iter()
                        .any(|c| sets[u as usize][j].contains(c))
                });
                if hit {
                    significant[i][v].insert(u);
                }
            }
        }
    }
    let overloaded: Vec<Vec<bool>> = significant
        .iter()
        .map(|per| {
            per.iter()
                .map(|s| s.len() as u64 > params.overload_threshold)
                .collect()
        })
        .collect();
    let nstar = (0..n)
        .map(|v| {
            (0..k)
                .filter(|&i| !overloaded[i][v])
                .flat_map(|i| significant[i][v].iter().copied())
                .collect()
        })
        .collect();
    NstarOracle {
        sets,
        significant,
        overloaded,
        nstar,
    }
}
