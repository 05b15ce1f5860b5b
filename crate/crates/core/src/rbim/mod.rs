//! ±J random-bond Ising model on the square lattice.
//!
//! `H = −Σ_b J_b σ_a σ_b` with `J_b = −1` independently with probability `p`.
//! Exact enumeration oracles live in [`exact`], the Metropolis sampler in
//! [`metropolis`] and the finite-size crossing analysis in [`pc`].

pub mod exact;
pub mod metropolis;
pub mod pc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::rng;

pub use exact::{exact_rbim, exact_rbim_enumeration, replica_mapping_crosscheck, ExactRbim, MappingReport, RbimObservable};
pub use metropolis::{metropolis_run, McObservables, McParams};
pub use pc::{estimate_pc, PcEstimate, PcParams};

/// How the inverse temperature is tied to the flip probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaConvention {
    /// `tanh β = p/(1−p)`.
    Tanh,
    /// `e^{−2β} = p/(1−p)`, the Nishimori line of the ±J model.
    Nishimori,
}

impl BetaConvention {
    pub const ALL: [BetaConvention; 2] = [BetaConvention::Tanh, BetaConvention::Nishimori];
}

/// Inverse temperature tied to `p`.
///
/// `Tanh` needs `p ∈ [0, ½)` and gives 0 at `p = 0`. `Nishimori` needs
/// `p ∈ [0, ½]` and gives `+∞` at `p = 0`, 0 at `p = ½`.
pub fn nishimori_beta(p: f64, convention: BetaConvention) -> Result<f64> {
    match convention {
        BetaConvention::Tanh => {
            if !(0.0..0.5).contains(&p) {
                return Err(Error::InvalidParameter {
                    name: "p",
                    value: p,
                    constraint: "0 <= p < 1/2 (beta diverges at 1/2)",
                });
            }
            Ok((p / (1.0 - p)).atanh())
        }
        BetaConvention::Nishimori => {
            check_p(p)?;
            Ok(0.5 * ((1.0 - p) / p).ln())
        }
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            constraint: "0 <= p <= 1/2",
        });
    }
    Ok(())
}

/// One quenched coupling configuration.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct DisorderSample {
    /// `J_b ∈ {+1, −1}` in lattice bond order.
    pub couplings: Vec<i8>,
    pub p_bits: u64,
    pub seed: u64,
}

impl DisorderSample {
    pub fn p(&self) -> f64 {
        f64::from_bits(self.p_bits)
    }

    pub fn uniform(lat: &LatticeSpec) -> Self {
        Self {
            couplings: vec![1; lat.n_bonds()],
            p_bits: 0f64.to_bits(),
            seed: 0,
        }
    }

    pub fn flip_fraction(&self) -> f64 {
        self.couplings.iter().filter(|&&j| j < 0).count() as f64 / self.couplings.len() as f64
    }
}

/// I.i.d. sign flips with probability `p`.
///
/// Each bond draws one uniform number and flips when it falls below `p`, so
/// samples with the same seed are nested in `p`: raising `p` only adds flips.
pub fn sample_disorder(lat: &LatticeSpec, p: f64, seed: u64) -> Result<DisorderSample> {
    check_p(p)?;
    let mut rng = rng::stream(seed, rng::stream_id(rng::TAG_DISORDER, 0, 0, 0));
    let couplings = (0..lat.n_bonds())
        .map(|_| if rng.random::<f64>() < p { -1 } else { 1 })
        .collect();
    Ok(DisorderSample {
        couplings,
        p_bits: p.to_bits(),
        seed,
    })
}

/// `Σ_b J_b σ_a σ_b`, i.e. minus the energy.
pub fn bond_sum(lat: &LatticeSpec, dis: &DisorderSample, spins: &[i8]) -> i64 {
    lat.bonds
        .iter()
        .zip(&dis.couplings)
        .map(|(b, &j)| (j * spins[b.a] * spins[b.b]) as i64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn beta_conventions() {
        assert_eq!(nishimori_beta(0.0, BetaConvention::Tanh).unwrap(), 0.0);
        let p: f64 = 0.109;
        let r = p / (1.0 - p);
        let b = nishimori_beta(p, BetaConvention::Tanh).unwrap();
        assert_relative_eq!(b, 0.5 * ((1.0 + r) / (1.0 - r)).ln(), epsilon = 1e-14);
        assert!(nishimori_beta(0.5, BetaConvention::Tanh).is_err());
        assert!(nishimori_beta(0.4999999, BetaConvention::Tanh).unwrap() > 7.0);
        let bn = nishimori_beta(p, BetaConvention::Nishimori).unwrap();
        assert_relative_eq!((-2.0 * bn).exp(), r, epsilon = 1e-14);
        assert!(nishimori_beta(0.0, BetaConvention::Nishimori).unwrap().is_infinite());
        assert_eq!(nishimori_beta(0.5, BetaConvention::Nishimori).unwrap(), 0.0);
        // the two conventions are Kramers-Wannier duals: tanh β_T = e^{−2β_N}
        assert_relative_eq!(b.tanh(), (-2.0 * bn).exp(), epsilon = 1e-14);
    }

    #[test]
    fn disorder_contract() {
        let lat = LatticeSpec::new(8, true).unwrap();
        assert!(sample_disorder(&lat, 0.0, 1).unwrap().couplings.iter().all(|&j| j == 1));
        assert_eq!(sample_disorder(&lat, 0.2, 5).unwrap(), sample_disorder(&lat, 0.2, 5).unwrap());
        let big = LatticeSpec::new(71, true).unwrap();
        let f = sample_disorder(&big, 0.5, 9).unwrap().flip_fraction();
        assert!((f - 0.5).abs() < 0.02, "{f}");
        let lo = sample_disorder(&lat, 0.1, 3).unwrap();
        let hi = sample_disorder(&lat, 0.3, 3).unwrap();
        assert!(lo.couplings.iter().zip(&hi.couplings).all(|(a, b)| *a == 1 || *b == -1));
        assert!(sample_disorder(&lat, 0.6, 1).is_err());
    }
}
