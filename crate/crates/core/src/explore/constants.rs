//! Exact thresholds of the exploration process.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// `Δ`, `R_m`, `τ_j` and `η_k` for given `ℓ` and `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constants {
    pub ell: usize,
    pub t: usize,
    /// `(20ℓ)^(2ℓ)`
    pub delta: BigUint,
    /// `R_m` for `m = 0..ℓ`.
    pub r: Vec<BigUint>,
    /// `τ_j` for `j = 0..ℓ` (`τ_0 = 0`).
    pub tau: Vec<BigUint>,
    /// `η_k` for `k = 0..=ℓ` (`η_0 = η_1 = 0`).
    pub eta: Vec<BigUint>,
}

pub fn catalan(m: usize) -> BigUint {
    let mut binom = BigUint::one();
    for i in 0..m {
        binom = binom * BigUint::from(2 * m - i) / BigUint::from(i + 1);
    }
    binom / BigUint::from(m + 1)
}

/// `R_m = (2ℓ)^m · Catalan(m) · t^m`.
pub fn r_m(ell: usize, t: usize, m: usize) -> BigUint {
    BigUint::from(2 * ell * t).pow(m as u32) * catalan(m)
}

impl Constants {
    pub fn new(ell: usize, t: usize) -> Self {
        let delta = BigUint::from(20 * ell).pow(2 * ell as u32);
        let r: Vec<BigUint> = (0..ell).map(|m| r_m(ell, t, m)).collect();
        let lt = BigUint::from(ell * t);
        let two_lt = BigUint::from(2usize) * &lt;

        let mut tau = vec![BigUint::zero(); ell];
        for j in 1..ell {
            let mut sum = BigUint::zero();
            for i in 0..j {
                sum += BigUint::from(i + 1) * delta.pow(i as u32);
            }
            tau[j] = &two_lt * sum;
        }

        let mut eta = vec![BigUint::zero(); ell + 1];
        for k in 2..=ell {
            let mut sum = BigUint::zero();
            for i in 0..=k - 2 {
                sum += (&delta + 1u32) * &r[i];
                sum += BigUint::from(2 * (i + 1)) * &lt * delta.pow(i as u32);
                sum += &tau[i];
            }
            eta[k] = sum;
        }
        Constants {
            ell,
            t,
            delta,
            r,
            tau,
            eta,
        }
    }

    /// `R_m` clamped to `u128`.
    pub fn r_u128(&self, m: usize) -> u128 {
        self.r[m].to_u128().unwrap_or(u128::MAX)
    }

    /// `Δ · d`.
    pub fn delta_d(&self, d: u64) -> BigUint {
        &self.delta * d
    }
}
