//! K-wise independent hashing by random polynomials over a prime field.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients `c_0..c_{K-1}` of a polynomial over `Z_modulus`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KWiseSeed {
    pub modulus: u64,
    #[serde(rename = "K")]
    pub k: usize,
    pub coefficients: Vec<u64>,
}

impl KWiseSeed {
    /// Builds a seed from explicit coefficients (constant term first).
    pub fn new(modulus: u64, coefficients: Vec<u64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Parameter("K must be at least 1".into()));
        }
        if !is_prime(modulus) {
            return Err(Error::NonPrimeModulus(modulus));
        }
        if let Some(&c) = coefficients.iter().find(|&&c| c >= modulus) {
            return Err(Error::Parameter(format!(
                "coefficient {c} not reduced mod {modulus}"
            )));
        }
        Ok(KWiseSeed {
            modulus,
            k: coefficients.len(),
            coefficients,
        })
    }

    /// Polynomial value at `key`, before any reduction to a part index.
    pub fn raw(&self, key: u64) -> Result<u64> {
        if key >= self.modulus {
            return Err(Error::KeyOutOfRange {
                key,
                modulus: self.modulus,
            });
        }
        let m = u128::from(self.modulus);
        let x = u128::from(key);
        let acc = self
            .coefficients
            .iter()
            .rev()
            .fold(0u128, |acc, &c| (acc * x + u128::from(c)) % m);
        Ok(acc as u64)
    }

    /// Random bits the seed represents: `K * ceil(log2 modulus)`.
    pub fn seed_bits(&self) -> u64 {
        self.k as u64 * u64::from(64 - (self.modulus - 1).leading_zeros())
    }
}

/// Part index in `[0, parts)` for `key`.
pub fn kwise_eval(seed: &KWiseSeed, key: u64, parts: usize) -> Result<usize> {
    if parts == 0 {
        return Err(Error::Parameter("parts must be positive".into()));
    }
    Ok((seed.raw(key)? % parts as u64) as usize)
}

/// Draws `k` coefficients uniformly from the field.
pub fn sample_seed<R: Rng + ?Sized>(k: usize, modulus: u64, rng: &mut R) -> Result<KWiseSeed> {
    if k == 0 {
        return Err(Error::Parameter("K must be at least 1".into()));
    }
    if !is_prime(modulus) {
        return Err(Error::NonPrimeModulus(modulus));
    }
    let coefficients = (0..k).map(|_| rng.gen_range(0..modulus)).collect();
    Ok(KWiseSeed {
        modulus,
        k,
        coefficients,
    })
}

pub fn is_prime(x: u64) -> bool {
    primal_check::miller_rabin(x)
}

/// Smallest prime `>= x`.
pub fn next_prime(x: u64) -> u64 {
    let mut p = x.max(2);
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// `ceil(2 log2 n)`, at least 1.
pub fn default_independence(n: usize) -> usize {
    ((2.0 * (n.max(2) as f64).log2()).ceil() as usize).max(1)
}

/// Prime modulus for hashing colors up to `max_key` into `parts` parts with
/// reduction bias kept small: at least `2^16 * parts` and above `max_key`.
pub fn modulus_for(max_key: u64, parts: usize) -> u64 {
    next_prime((65_536u64.saturating_mul(parts as u64)).max(max_key.saturating_add(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_polynomial() {
        let s = KWiseSeed::new(101, vec![3]).unwrap();
        for key in [0, 5, 100] {
            assert_eq!(kwise_eval(&s, key, 8).unwrap(), 3);
        }
    }

    #[test]
    fn identity_polynomial() {
        let s = KWiseSeed::new(101, vec![0, 1]).unwrap();
        assert_eq!(kwise_eval(&s, 7, 101).unwrap(), 7);
    }

    #[test]
    fn key_out_of_range() {
        let s = KWiseSeed::new(101, vec![0, 1]).unwrap();
        assert!(matches!(s.raw(101), Err(Error::KeyOutOfRange { .. })));
    }

    #[test]
    fn rejects_composite() {
        let mut r = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_seed(3, 100, &mut r),
            Err(Error::NonPrimeModulus(100))
        ));
    }

    #[test]
    fn seed_is_deterministic() {
        let a = sample_seed(3, 101, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = sample_seed(3, 101, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
        assert!(a.coefficients.iter().all(|&c| c < 101));
    }

    #[test]
    fn primes() {
        assert_eq!(next_prime(65_536), 65_537);
        assert_eq!(next_prime(90), 97);
        assert_eq!(modulus_for(10, 1), 65_537);
    }
}
