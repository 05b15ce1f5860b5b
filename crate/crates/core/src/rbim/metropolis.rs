//! Single-spin-flip Metropolis sampler with two independent replicas.
//!
//! Sites are chosen uniformly at random. A fixed sequential sweep order is
//! not ergodic at `β = 0`, where every flip is accepted and the sweep just
//! negates the whole configuration.

use rand::{Rng, RngCore};

use super::DisorderSample;
use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct McParams {
    /// Total sweeps, including thermalization.
    pub sweeps: usize,
    pub thermalization: usize,
    /// Record `⟨σ_i σ_j⟩` for every pair (lattices up to [`MAX_TRACKED_SITES`] sites).
    #[serde(default)]
    pub track_pairs: bool,
}

pub const MAX_TRACKED_SITES: usize = 64;
const BINS: usize = 20;

/// Full pair tables, row-major `N × N`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PairTable {
    /// `⟨σ_i σ_j⟩`, averaged over both replicas.
    pub mean: Vec<f64>,
    pub err: Vec<f64>,
    /// `⟨σ_i σ_j⟩_a ⟨σ_i σ_j⟩_b`, an unbiased estimator of `⟨σ_i σ_j⟩²`.
    pub squared: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct McObservables {
    pub l: usize,
    pub beta: f64,
    pub sweeps: usize,
    pub thermalization: usize,
    pub measurements: usize,
    /// Overlap susceptibility `N⁻¹⟨(Σ_i q_i)²⟩` with `q_i = σ^a_i σ^b_i`.
    pub chi0: f64,
    /// The same at the smallest nonzero wave vector, averaged over x and y.
    pub chik: f64,
    /// `⟨σ_x σ_{x + L/2}⟩` averaged over sites, both lattice directions and replicas.
    pub g_half: f64,
    pub g_half_err: f64,
    /// Replica-product estimate of `⟨σ_x σ_{x + L/2}⟩²`, averaged likewise.
    pub g2_half: f64,
    pub g2_half_err: f64,
    pub energy: f64,
    /// Lowest energy seen in either replica over the whole run.
    pub min_energy: i64,
    pub acceptance: f64,
    pub pairs: Option<PairTable>,
}

struct Binned {
    sums: Vec<f64>,
    counts: Vec<usize>,
}

impl Binned {
    fn new(width: usize) -> Self {
        Self {
            sums: vec![0.0; width * BINS],
            counts: vec![0; BINS],
        }
    }

    fn stats(&self, width: usize) -> (Vec<f64>, Vec<f64>) {
        let used: Vec<usize> = (0..BINS).filter(|&b| self.counts[b] > 0).collect();
        let total: usize = self.counts.iter().sum();
        let mut mean = vec![0.0; width];
        let mut err = vec![0.0; width];
        for k in 0..width {
            let m = used.iter().map(|&b| self.sums[b * width + k]).sum::<f64>() / total as f64;
            mean[k] = m;
            if used.len() > 1 {
                let var = used
                    .iter()
                    .map(|&b| {
                        let x = self.sums[b * width + k] / self.counts[b] as f64;
                        (x - m) * (x - m)
                    })
                    .sum::<f64>()
                    / (used.len() * (used.len() - 1)) as f64;
                err[k] = var.sqrt();
            }
        }
        (mean, err)
    }
}

/// Runs two replicas of `H = −Σ_b J_b σ_a σ_b` at inverse temperature `beta`
/// from the all-up state and measures every sweep after thermalization.
pub fn metropolis_run(lat: &LatticeSpec, dis: &DisorderSample, beta: f64, params: &McParams, seed: u64) -> Result<McObservables> {
    if !(params.thermalization > 0 && params.sweeps > params.thermalization) {
        return Err(Error::InvalidParameter {
            name: "sweeps",
            value: params.sweeps as f64,
            constraint: "sweeps > thermalization > 0",
        });
    }
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            constraint: "beta >= 0",
        });
    }
    if dis.couplings.len() != lat.n_bonds() {
        return Err(Error::DimensionMismatch {
            expected: lat.n_bonds(),
            found: dis.couplings.len(),
        });
    }
    let n = lat.n_sites();
    if params.track_pairs && n > MAX_TRACKED_SITES {
        return Err(Error::TooLarge {
            what: "sites with pair tracking",
            value: n,
            limit: MAX_TRACKED_SITES,
        });
    }
    let l = lat.l;

    // neighbour slots; open edges get coupling 0 pointing at the site itself
    let mut nbr = vec![[0u32; 4]; n];
    let mut cpl = vec![[0i8; 4]; n];
    for (s, list) in lat.neighbours().iter().enumerate() {
        nbr[s] = [s as u32; 4];
        for (k, &(t, b)) in list.iter().enumerate() {
            nbr[s][k] = t as u32;
            cpl[s][k] = dis.couplings[b];
        }
    }

    // acceptance threshold on a 32-bit uniform, indexed by σh + 4
    let mut threshold = [0u64; 9];
    for (k, t) in threshold.iter_mut().enumerate() {
        let sh = k as i64 - 4;
        let prob = if sh <= 0 {
            1.0
        } else if beta.is_infinite() {
            0.0
        } else {
            (-2.0 * beta * sh as f64).exp()
        };
        *t = ((prob * 4294967296.0) as u64).min(1 << 32);
    }

    let k_min = 2.0 * std::f64::consts::PI / l as f64;
    let phase: Vec<(f64, f64, f64, f64)> = (0..n)
        .map(|s| {
            let (x, y) = lat.coords(s);
            let (ax, ay) = (k_min * x as f64, k_min * y as f64);
            (ax.cos(), ax.sin(), ay.cos(), ay.sin())
        })
        .collect();
    let half = l / 2;
    let mut partners = Vec::with_capacity(2 * n);
    for s in 0..n {
        let (x, y) = lat.coords(s);
        if lat.periodic || x + half < l {
            partners.push((s, lat.site(x + half, y)));
        }
        if lat.periodic || y + half < l {
            partners.push((s, lat.site(x, y + half)));
        }
    }

    let energy = |spins: &[i8]| -> i64 {
        -lat.bonds
            .iter()
            .zip(&dis.couplings)
            .map(|(b, &j)| (j * spins[b.a] * spins[b.b]) as i64)
            .sum::<i64>()
    };

    let mut rng = rng::stream(seed, rng::stream_id(rng::TAG_METROPOLIS, 0, 0, 0));
    let mut replicas = [vec![1i8; n], vec![1i8; n]];
    let mut min_energy = energy(&replicas[0]);
    let mut accepted = 0u64;
    let mut attempted = 0u64;

    let measurements = params.sweeps - params.thermalization;
    let bin_of = |m: usize| m * BINS / measurements;
    let (mut chi0, mut chik, mut e_sum) = (0.0, 0.0, 0.0);
    let mut g = Binned::new(2);
    let pair_width = if params.track_pairs { n * n } else { 0 };
    let mut pair_bins = Binned::new(pair_width);
    let mut pair_sq = vec![0.0; pair_width];

    for sweep in 0..params.sweeps {
        for spins in replicas.iter_mut() {
            for _ in 0..n {
                let s = rng.random_range(0..n);
                let nb = &nbr[s];
                let c = &cpl[s];
                let h: i32 = (0..4).map(|k| (c[k] * spins[nb[k] as usize]) as i32).sum();
                let sh = spins[s] as i32 * h;
                if (rng.next_u32() as u64) < threshold[(sh + 4) as usize] {
                    spins[s] = -spins[s];
                    accepted += 1;
                }
            }
            attempted += n as u64;
        }
        for spins in &replicas {
            min_energy = min_energy.min(energy(spins));
        }
        if sweep < params.thermalization {
            continue;
        }
        let m = sweep - params.thermalization;
        let bin = bin_of(m);
        let [a, b] = &replicas;
        let (mut q0, mut cx, mut sx, mut cy, mut sy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for s in 0..n {
            let q = (a[s] * b[s]) as f64;
            let (c1, s1, c2, s2) = phase[s];
            q0 += q;
            cx += q * c1;
            sx += q * s1;
            cy += q * c2;
            sy += q * s2;
        }
        chi0 += q0 * q0 / n as f64;
        chik += 0.5 * ((cx * cx + sx * sx) + (cy * cy + sy * sy)) / n as f64;
        let (mut g1, mut g2) = (0.0, 0.0);
        for &(s, t) in &partners {
            g1 += 0.5 * ((a[s] * a[t]) as f64 + (b[s] * b[t]) as f64);
            g2 += (a[s] * a[t] * b[s] * b[t]) as f64;
        }
        let np = partners.len().max(1) as f64;
        g.sums[bin * 2] += g1 / np;
        g.sums[bin * 2 + 1] += g2 / np;
        g.counts[bin] += 1;
        e_sum += 0.5 * (energy(a) + energy(b)) as f64;
        if params.track_pairs {
            let row = &mut pair_bins.sums[bin * pair_width..(bin + 1) * pair_width];
            for i in 0..n {
                for j in 0..n {
                    row[i * n + j] += 0.5 * ((a[i] * a[j]) as f64 + (b[i] * b[j]) as f64);
                    pair_sq[i * n + j] += (a[i] * a[j] * b[i] * b[j]) as f64;
                }
            }
            pair_bins.counts[bin] += 1;
        }
    }

    let mf = measurements as f64;
    let (gm, ge) = g.stats(2);
    let pairs = params.track_pairs.then(|| {
        let (mean, err) = pair_bins.stats(pair_width);
        PairTable {
            mean,
            err,
            squared: pair_sq.iter().map(|x| x / mf).collect(),
        }
    });
    Ok(McObservables {
        l,
        beta,
        sweeps: params.sweeps,
        thermalization: params.thermalization,
        measurements,
        chi0: chi0 / mf,
        chik: chik / mf,
        g_half: gm[0],
        g_half_err: ge[0],
        g2_half: gm[1],
        g2_half_err: ge[1],
        energy: e_sum / mf,
        min_energy,
        acceptance: accepted as f64 / attempted as f64,
        pairs,
    })
}

/// Second-moment correlation length over `L` from overlap susceptibilities.
pub fn xi_over_l(chi0: f64, chik: f64, l: usize) -> f64 {
    let ratio = (chi0 / chik - 1.0).max(0.0);
    ratio.sqrt() / (2.0 * (std::f64::consts::PI / l as f64).sin()) / l as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rbim::sample_disorder;

    fn params(sweeps: usize, therm: usize) -> McParams {
        McParams {
            sweeps,
            thermalization: therm,
            track_pairs: false,
        }
    }

    #[test]
    fn free_spins_are_uncorrelated() {
        let lat = LatticeSpec::new(6, true).unwrap();
        let dis = sample_disorder(&lat, 0.1, 3).unwrap();
        let r = metropolis_run(&lat, &dis, 0.0, &params(4000, 100), 1).unwrap();
        assert_eq!(r.acceptance, 1.0);
        assert!(r.g_half.abs() < 4.0 * r.g_half_err.max(1e-3), "{} ± {}", r.g_half, r.g_half_err);
    }

    #[test]
    fn clean_ferromagnet_orders_and_finds_the_ground_state() {
        let lat = LatticeSpec::new(8, true).unwrap();
        let dis = DisorderSample::uniform(&lat);
        let r = metropolis_run(&lat, &dis, 2.0, &params(600, 100), 5).unwrap();
        assert!(r.g_half > 0.9);
        assert_eq!(r.min_energy, -(lat.n_bonds() as i64));
        assert!(xi_over_l(r.chi0, r.chik, 8) > 1.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let lat = LatticeSpec::new(4, true).unwrap();
        let dis = sample_disorder(&lat, 0.15, 2).unwrap();
        let p = McParams { track_pairs: true, ..params(300, 50) };
        let a = metropolis_run(&lat, &dis, 1.0, &p, 9).unwrap();
        let b = metropolis_run(&lat, &dis, 1.0, &p, 9).unwrap();
        let c = metropolis_run(&lat, &dis, 1.0, &p, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let t = a.pairs.unwrap();
        assert!(t.mean.iter().chain(&t.squared).all(|x| x.abs() <= 1.0));
        assert!(t.err.iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn rejects_bad_schedules() {
        let lat = LatticeSpec::new(4, true).unwrap();
        let dis = DisorderSample::uniform(&lat);
        assert!(metropolis_run(&lat, &dis, 1.0, &params(100, 100), 0).is_err());
        assert!(metropolis_run(&lat, &dis, 1.0, &params(100, 0), 0).is_err());
    }
}
