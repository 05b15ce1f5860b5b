//! Exhaustive-spin oracles for small lattices and the replica-mapping check.
//!
//! Configurations are bitmasks over bonds: bit `b` set means bond `b` is
//! frustrated (`J_b σ_a σ_b = −1`) or flipped (`J_b = −1`).

use rand::Rng;

use super::{check_p, nishimori_beta, BetaConvention};
use crate::correlators::{fidelity_correlator, wightman};
use crate::diagnostics::decohered_ising_state;
use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::operator::{pauli_string, Pauli};
use crate::rng;

/// Largest bond count for which the disorder is enumerated exhaustively.
pub const MAX_EXHAUSTIVE_BONDS: usize = 12;
/// Disorder samples drawn when the bond count is larger.
pub const DISORDER_SAMPLES: usize = 10_000;
const DISORDER_SEED: u64 = 0x5eed_0b1b;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RbimObservable {
    /// `[⟨σ_i σ_j⟩]`.
    M1,
    /// `[⟨σ_i σ_j⟩²]`.
    M2,
    /// Disorder-averaged dual disorder-operator correlator
    /// `[√(Z̃(J ⊕ γ)/Z̃(J))]`, where `Z̃` is the plaquette-spin model
    /// with the same couplings and `γ` a bond path from `i` to `j`.
    Dual,
}

impl RbimObservable {
    pub const ALL: [RbimObservable; 3] = [RbimObservable::M1, RbimObservable::M2, RbimObservable::Dual];
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExactRbim {
    pub m1: f64,
    pub m2: f64,
    pub dual: f64,
    pub disorder_configs: usize,
    pub exhaustive: bool,
}

impl ExactRbim {
    pub fn get(&self, obs: RbimObservable) -> f64 {
        match obs {
            RbimObservable::M1 => self.m1,
            RbimObservable::M2 => self.m2,
            RbimObservable::Dual => self.dual,
        }
    }
}

/// Partition function stored as `e^{β top} · sum`, which survives `β = ∞`.
#[derive(Debug, Clone, Copy)]
struct Partition {
    top: i64,
    sum: f64,
}

fn boltz(beta: f64, d: i64) -> f64 {
    if d == 0 {
        1.0
    } else if beta.is_infinite() {
        if d > 0 { f64::INFINITY } else { 0.0 }
    } else {
        (beta * d as f64).exp()
    }
}

impl Partition {
    /// `Z_a / Z_b`.
    fn ratio(self, other: Partition, beta: f64) -> f64 {
        boltz(beta, self.top - other.top) * self.sum / other.sum
    }
}

struct Enumerator {
    n_bonds: usize,
    beta: f64,
}

impl Enumerator {
    /// Bond sum for a frustration mask.
    fn score(&self, mask: u64) -> i64 {
        self.n_bonds as i64 - 2 * mask.count_ones() as i64
    }

    /// `Σ_c e^{β score(c ⊕ j)}` over masks `c`, with `f(c)` accumulated alongside.
    fn sum(&self, masks: &[u64], j: u64, f: impl Fn(usize) -> f64) -> (Partition, f64) {
        let top = masks.iter().map(|&m| self.score(m ^ j)).max().expect("non-empty");
        let mut z = 0.0;
        let mut acc = 0.0;
        for (k, &m) in masks.iter().enumerate() {
            let w = boltz(self.beta, self.score(m ^ j) - top);
            z += w;
            acc += w * f(k);
        }
        (Partition { top, sum: z }, acc)
    }
}

fn check_size(lat: &LatticeSpec) -> Result<()> {
    let limit = if lat.periodic { 3 } else { 4 };
    if lat.l > limit {
        return Err(Error::TooLarge {
            what: "lattice side for exhaustive enumeration",
            value: lat.l,
            limit,
        });
    }
    Ok(())
}

fn bits(bonds: &[usize]) -> u64 {
    bonds.iter().fold(0, |m, &b| m ^ (1 << b))
}

/// Disorder average of `m1`, `m2` and the dual correlator for the pair `(i, j)`.
///
/// Couplings are enumerated exhaustively when there are at most
/// [`MAX_EXHAUSTIVE_BONDS`] bonds and sampled ([`DISORDER_SAMPLES`] draws)
/// otherwise. `β = ∞` is supported and means ground-state averages.
pub fn exact_rbim(lat: &LatticeSpec, p: f64, beta: f64, pair: (usize, usize)) -> Result<ExactRbim> {
    check_size(lat)?;
    check_p(p)?;
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            constraint: "beta >= 0",
        });
    }
    let n = lat.n_sites();
    let (i, j) = pair;
    for s in [i, j] {
        if s >= n {
            return Err(Error::SiteOutOfRange { site: s, n_qubits: n });
        }
    }
    let nb = lat.n_bonds();
    let en = Enumerator { n_bonds: nb, beta };

    // primal: domain-wall mask of every spin configuration
    let walls: Vec<u64> = (0..1u64 << n)
        .map(|s| {
            lat.bonds
                .iter()
                .enumerate()
                .filter(|(_, b)| ((s >> b.a) ^ (s >> b.b)) & 1 == 1)
                .fold(0, |m, (k, _)| m | (1 << k))
        })
        .collect();
    let corr: Vec<f64> = (0..1u64 << n)
        .map(|s| if ((s >> i) ^ (s >> j)) & 1 == 0 { 1.0 } else { -1.0 })
        .collect();

    // dual: bond masks of every plaquette configuration, times torus twists
    let faces = lat.dual_faces();
    let np = lat.n_plaquettes();
    let loops = lat.torus_loops();
    let twists: Vec<u64> = if lat.periodic {
        let (a, b) = (bits(&loops[0]), bits(&loops[1]));
        vec![0, a, b, a ^ b]
    } else {
        vec![0]
    };
    let mut cycles = Vec::with_capacity(twists.len() << np);
    for t in 0..1u64 << np {
        let base = faces.iter().enumerate().fold(0u64, |m, (k, &(f1, f2))| {
            let side = |f: Option<usize>| f.map_or(0, |f| (t >> f) & 1);
            m | ((side(f1) ^ side(f2)) << k)
        });
        cycles.extend(twists.iter().map(|tw| base ^ tw));
    }
    let gamma = bits(&lat.path(i, j));

    let mut m1 = 0.0;
    let mut m2 = 0.0;
    let mut dual = 0.0;
    let mut visit = |jmask: u64, weight: f64| {
        if weight == 0.0 {
            return;
        }
        let (zp, z1) = en.sum(&walls, jmask, |k| corr[k]);
        let c = z1 / zp.sum;
        m1 += weight * c;
        m2 += weight * c * c;
        let (d0, _) = en.sum(&cycles, jmask, |_| 0.0);
        let (dg, _) = en.sum(&cycles, jmask ^ gamma, |_| 0.0);
        dual += weight * dg.ratio(d0, beta).sqrt();
    };

    let exhaustive = nb <= MAX_EXHAUSTIVE_BONDS;
    let configs = if exhaustive {
        for jmask in 0..1u64 << nb {
            let k = jmask.count_ones() as i32;
            visit(jmask, p.powi(k) * (1.0 - p).powi(nb as i32 - k));
        }
        1usize << nb
    } else {
        let mut rng = rng::stream(DISORDER_SEED, rng::stream_id(rng::TAG_DISORDER, lat.l as u64, 1, 0));
        let w = 1.0 / DISORDER_SAMPLES as f64;
        for _ in 0..DISORDER_SAMPLES {
            let jmask = (0..nb).fold(0u64, |m, b| m | (((rng.random::<f64>() < p) as u64) << b));
            visit(jmask, w);
        }
        DISORDER_SAMPLES
    };
    Ok(ExactRbim {
        m1,
        m2,
        dual,
        disorder_configs: configs,
        exhaustive,
    })
}

/// Single observable of [`exact_rbim`].
pub fn exact_rbim_enumeration(
    lat: &LatticeSpec,
    p: f64,
    beta: f64,
    pair: (usize, usize),
    observable: RbimObservable,
) -> Result<f64> {
    Ok(exact_rbim(lat, p, beta, pair)?.get(observable))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Candidate {
    pub observable: RbimObservable,
    pub convention: BetaConvention,
    pub beta: f64,
    pub value: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MappingRow {
    pub l: usize,
    pub periodic: bool,
    pub p: f64,
    pub i: usize,
    pub j: usize,
    /// Exact `C^W(i,j)` of the decohered state.
    pub cw: f64,
    pub fidelity: f64,
    /// Every observable under every convention whose β is defined at this `p`.
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MappingReport {
    pub rows: Vec<MappingRow>,
    /// Candidates whose residual stays below `tolerance` on every row.
    pub matches: Vec<(RbimObservable, BetaConvention)>,
    pub tolerance: f64,
}

pub const MAPPING_TOL: f64 = 1e-8;

/// Compares `C^W(i,j)` of the decohered Ising state with every RBIM candidate.
pub fn replica_mapping_crosscheck(
    lattices: &[LatticeSpec],
    p_values: &[f64],
    pairs: &[(usize, usize)],
) -> Result<MappingReport> {
    let mut rows = Vec::new();
    for lat in lattices {
        let n = lat.n_sites();
        for &p in p_values {
            let rho = decohered_ising_state(lat, p)?;
            let exact: Vec<(BetaConvention, f64, Option<Vec<ExactRbim>>)> = BetaConvention::ALL
                .iter()
                .map(|&c| match nishimori_beta(p, c) {
                    Ok(beta) => pairs
                        .iter()
                        .map(|&pr| exact_rbim(lat, p, beta, pr))
                        .collect::<Result<Vec<_>>>()
                        .map(|v| (c, beta, Some(v))),
                    Err(_) => Ok((c, f64::NAN, None)),
                })
                .collect::<Result<_>>()?;
            for (k, &(i, j)) in pairs.iter().enumerate() {
                let zi = pauli_string(n, &[(i, Pauli::Z)])?;
                let zj = pauli_string(n, &[(j, Pauli::Z)])?;
                let cw = wightman(&rho, &zi, &zj)?;
                let mut candidates = Vec::new();
                for (conv, beta, vals) in &exact {
                    let Some(vals) = vals else { continue };
                    for obs in RbimObservable::ALL {
                        let value = vals[k].get(obs);
                        candidates.push(Candidate {
                            observable: obs,
                            convention: *conv,
                            beta: *beta,
                            value,
                            residual: (value - cw).abs(),
                        });
                    }
                }
                rows.push(MappingRow {
                    l: lat.l,
                    periodic: lat.periodic,
                    p,
                    i,
                    j,
                    cw,
                    fidelity: fidelity_correlator(&rho, &zi, &zj)?,
                    candidates,
                });
            }
        }
    }
    let mut matches = Vec::new();
    for conv in BetaConvention::ALL {
        for obs in RbimObservable::ALL {
            let ok = rows.iter().all(|r| {
                r.candidates
                    .iter()
                    .any(|c| c.observable == obs && c.convention == conv && c.residual < MAPPING_TOL)
            });
            if ok && !rows.is_empty() {
                matches.push((obs, conv));
            }
        }
    }
    Ok(MappingReport {
        rows,
        matches,
        tolerance: MAPPING_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Open 2×2 plaquette: four spins on a square, four bonds.
    fn square_oracle(beta: f64, j: [f64; 4], i: usize, k: usize) -> f64 {
        let bonds = [(0, 1), (0, 2), (1, 3), (2, 3)];
        let (mut z, mut c) = (0.0, 0.0);
        for s in 0..16u32 {
            let sp = |q: usize| if (s >> q) & 1 == 0 { 1.0 } else { -1.0 };
            let e: f64 = bonds.iter().zip(j).map(|(&(a, b), jj)| jj * sp(a) * sp(b)).sum();
            let w = (beta * e).exp();
            z += w;
            c += w * sp(i) * sp(k);
        }
        c / z
    }

    #[test]
    fn clean_square_matches_hand_enumeration() {
        let lat = LatticeSpec::new(2, false).unwrap();
        for beta in [0.3, 1.0] {
            let r = exact_rbim(&lat, 0.0, beta, (0, 3)).unwrap();
            let want = square_oracle(beta, [1.0; 4], 0, 3);
            assert_relative_eq!(r.m1, want, epsilon = 1e-13);
            assert_relative_eq!(r.m2, want * want, epsilon = 1e-13);
            // high-temperature expansion on the 4-cycle
            let t = beta.tanh();
            assert_relative_eq!(want, 2.0 * t * t / (1.0 + t.powi(4)), epsilon = 1e-13);
        }
    }

    #[test]
    fn infinite_temperature_and_ground_state() {
        let lat = LatticeSpec::new(2, true).unwrap();
        let r = exact_rbim(&lat, 0.2, 0.0, (0, 1)).unwrap();
        assert!(r.m1.abs() < 1e-14 && r.m2.abs() < 1e-14);
        let g = exact_rbim(&lat, 0.0, f64::INFINITY, (0, 3)).unwrap();
        assert_relative_eq!(g.m1, 1.0, epsilon = 1e-14);
        assert!(g.dual.abs() < 1e-14, "{g:?}");
    }

    #[test]
    fn m2_decreases_with_disorder_on_the_square() {
        let lat = LatticeSpec::new(2, false).unwrap();
        let lo = nishimori_beta(0.05, BetaConvention::Nishimori).unwrap();
        let hi = nishimori_beta(0.4, BetaConvention::Nishimori).unwrap();
        let a = exact_rbim(&lat, 0.05, lo, (0, 3)).unwrap().m2;
        let b = exact_rbim(&lat, 0.4, hi, (0, 3)).unwrap().m2;
        assert!(a > b, "{a} {b}");
    }

    #[test]
    fn nishimori_identity_holds_only_on_the_nishimori_line() {
        for periodic in [false, true] {
            let lat = LatticeSpec::new(2, periodic).unwrap();
            for p in [0.05, 0.2, 0.4] {
                let bn = nishimori_beta(p, BetaConvention::Nishimori).unwrap();
                let r = exact_rbim(&lat, p, bn, (0, 3)).unwrap();
                assert!((r.m1 - r.m2).abs() < 1e-12, "{p} {r:?}");
                let bt = nishimori_beta(p, BetaConvention::Tanh).unwrap();
                let r = exact_rbim(&lat, p, bt, (0, 3)).unwrap();
                assert!((r.m1 - r.m2).abs() > 1e-4, "{p} {r:?}");
            }
        }
    }

    #[test]
    fn size_guard() {
        assert!(exact_rbim(&LatticeSpec::new(4, true).unwrap(), 0.1, 1.0, (0, 1)).is_err());
    }
}
