//! Finite-size crossing estimate of the ordering transition on the Nishimori line.
//!
//! For each size and flip probability the disorder-averaged overlap
//! susceptibilities give `ξ/L`. Below the transition the model orders and
//! `ξ/L` grows with `L`; above it `ξ/L` shrinks. The curves of consecutive
//! sizes cross near `p_c`.

use rand::{Rng, RngCore};

use super::metropolis::{metropolis_run, xi_over_l, McObservables, McParams};
use super::{nishimori_beta, sample_disorder, BetaConvention};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::lattice::LatticeSpec;
use crate::rng;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PcParams {
    pub sizes: Vec<usize>,
    pub p_grid: Vec<f64>,
    /// Disorder samples per `(L, p)`.
    pub samples: usize,
    pub sweeps: usize,
    pub thermalization: usize,
    pub bootstrap: usize,
    #[serde(default = "default_periodic")]
    pub periodic: bool,
}

fn default_periodic() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CurvePoint {
    pub l: usize,
    pub p: f64,
    pub beta: f64,
    pub xi_over_l: f64,
    pub xi_over_l_err: f64,
    /// Disorder average of `⟨σ_x σ_{x+L/2}⟩²`.
    pub g2_half: f64,
    pub g2_half_err: f64,
    /// Disorder average of `⟨σ_x σ_{x+L/2}⟩`; equals `g2_half` on the Nishimori line.
    pub g_half: f64,
    pub chi0: f64,
    pub chik: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Crossing {
    pub l_small: usize,
    pub l_large: usize,
    pub p: f64,
    pub p_err: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PcEstimate {
    pub p_c: f64,
    pub p_c_err: f64,
    pub crossings: Vec<Crossing>,
    pub curves: Vec<CurvePoint>,
    pub bootstrap_successes: usize,
    pub params: PcParams,
}

fn validate(params: &PcParams) -> Result<()> {
    let bad = |name, value: f64, constraint| Err(Error::InvalidParameter { name, value, constraint });
    if params.sizes.len() < 2 {
        return bad("sizes", params.sizes.len() as f64, "at least two lattice sizes");
    }
    if params.sizes.windows(2).any(|w| w[1] <= w[0]) {
        return bad("sizes", f64::NAN, "strictly increasing sizes");
    }
    crate::diagnostics::check_grid("p", &params.p_grid)?;
    if params.p_grid.len() < 2 {
        return bad("p", params.p_grid.len() as f64, "at least two grid points");
    }
    for &p in &params.p_grid {
        if !(p > 0.0 && p <= 0.5) {
            return bad("p", p, "0 < p <= 1/2");
        }
    }
    if params.samples < 2 {
        return bad("samples", params.samples as f64, "at least two disorder samples");
    }
    if params.bootstrap < 2 {
        return bad("bootstrap", params.bootstrap as f64, "at least two bootstrap resamples");
    }
    Ok(())
}

/// `ξ/L` per `(size, p)` from sample weights (bootstrap multiplicities).
fn xi_table(runs: &[Vec<Vec<McObservables>>], sizes: &[usize], weights: &[Vec<f64>]) -> Vec<Vec<f64>> {
    runs.iter()
        .enumerate()
        .map(|(li, per_p)| {
            per_p
                .iter()
                .map(|samples| {
                    let (mut c0, mut ck) = (0.0, 0.0);
                    for (s, o) in samples.iter().enumerate() {
                        c0 += weights[li][s] * o.chi0;
                        ck += weights[li][s] * o.chik;
                    }
                    xi_over_l(c0, ck, sizes[li])
                })
                .collect()
        })
        .collect()
}

/// First point where `small` stops lying below `large`, by linear interpolation.
fn crossing(grid: &[f64], small: &[f64], large: &[f64]) -> Option<f64> {
    let d: Vec<f64> = large.iter().zip(small).map(|(a, b)| a - b).collect();
    (0..d.len() - 1).find_map(|k| {
        (d[k] > 0.0 && d[k + 1] <= 0.0).then(|| grid[k] + (grid[k + 1] - grid[k]) * d[k] / (d[k] - d[k + 1]))
    })
}

fn crossings(grid: &[f64], xi: &[Vec<f64>]) -> Option<Vec<f64>> {
    xi.windows(2).map(|w| crossing(grid, &w[0], &w[1])).collect()
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn std_dev(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

/// Runs the full `(L, p, sample)` grid on the Nishimori line `e^{−2β} = p/(1−p)`
/// and locates the `ξ/L` crossings.
///
/// Disorder sample `s` at size `L` uses the same seed for every `p`, so
/// samples are nested in `p` and the curves share their fluctuations. The
/// error bar is a bootstrap over disorder samples, resampled jointly across `p`.
pub fn estimate_pc(params: &PcParams, seed: u64, exec: Execution) -> Result<PcEstimate> {
    validate(params)?;
    let (ns, np, nsamp) = (params.sizes.len(), params.p_grid.len(), params.samples);
    let lattices: Vec<LatticeSpec> = params
        .sizes
        .iter()
        .map(|&l| LatticeSpec::new(l, params.periodic))
        .collect::<Result<_>>()?;
    let betas: Vec<f64> = params
        .p_grid
        .iter()
        .map(|&p| nishimori_beta(p, BetaConvention::Nishimori))
        .collect::<Result<_>>()?;
    let mc = McParams {
        sweeps: params.sweeps,
        thermalization: params.thermalization,
        track_pairs: false,
    };

    // largest lattices first so the tail of the schedule is short tasks
    let total = ns * np * nsamp;
    let flat: Vec<Result<McObservables>> = exec.map_range(total, |task| {
        let li = ns - 1 - task / (np * nsamp);
        let pi = (task / nsamp) % np;
        let s = task % nsamp;
        let l = params.sizes[li] as u64;
        let dseed = rng::stream(seed, rng::stream_id(rng::TAG_DISORDER, l, 0, s as u64)).next_u64();
        let mseed = rng::stream(seed, rng::stream_id(rng::TAG_METROPOLIS, l, pi as u64, s as u64)).next_u64();
        let dis = sample_disorder(&lattices[li], params.p_grid[pi], dseed)?;
        metropolis_run(&lattices[li], &dis, betas[pi], &mc, mseed)
    });
    let mut runs: Vec<Vec<Vec<McObservables>>> = (0..ns).map(|_| (0..np).map(|_| Vec::with_capacity(nsamp)).collect()).collect();
    for (task, r) in flat.into_iter().enumerate() {
        let li = ns - 1 - task / (np * nsamp);
        runs[li][(task / nsamp) % np].push(r?);
    }

    let uniform = vec![vec![1.0 / nsamp as f64; nsamp]; ns];
    let xi = xi_table(&runs, &params.sizes, &uniform);

    let mut rng = rng::stream(seed, rng::stream_id(rng::TAG_BOOTSTRAP, 0, 0, 0));
    let mut boot_xi: Vec<Vec<Vec<f64>>> = Vec::with_capacity(params.bootstrap);
    for _ in 0..params.bootstrap {
        let mut w = vec![vec![0.0; nsamp]; ns];
        for row in w.iter_mut() {
            for _ in 0..nsamp {
                row[rng.random_range(0..nsamp)] += 1.0 / nsamp as f64;
            }
        }
        boot_xi.push(xi_table(&runs, &params.sizes, &w));
    }
    let boot: Vec<Vec<f64>> = boot_xi.iter().filter_map(|t| crossings(&params.p_grid, t)).collect();

    let mut curves = Vec::with_capacity(ns * np);
    for li in 0..ns {
        for pi in 0..np {
            let samples = &runs[li][pi];
            let g2: Vec<f64> = samples.iter().map(|o| o.g2_half).collect();
            let spread: Vec<f64> = boot_xi.iter().map(|t| t[li][pi]).collect();
            curves.push(CurvePoint {
                l: params.sizes[li],
                p: params.p_grid[pi],
                beta: betas[pi],
                xi_over_l: xi[li][pi],
                xi_over_l_err: std_dev(&spread),
                g2_half: mean(&g2),
                g2_half_err: std_dev(&g2) / (nsamp as f64).sqrt(),
                g_half: mean(&samples.iter().map(|o| o.g_half).collect::<Vec<_>>()),
                chi0: mean(&samples.iter().map(|o| o.chi0).collect::<Vec<_>>()),
                chik: mean(&samples.iter().map(|o| o.chik).collect::<Vec<_>>()),
            });
        }
    }

    let central = crossings(&params.p_grid, &xi)
        .ok_or_else(|| Error::InsufficientStatistics("xi/L curves of consecutive sizes do not cross on the p grid".into()))?;
    if 2 * boot.len() < params.bootstrap {
        return Err(Error::InsufficientStatistics(format!(
            "only {} of {} bootstrap resamples show a crossing",
            boot.len(),
            params.bootstrap
        )));
    }
    let crossings_out: Vec<Crossing> = (0..ns - 1)
        .map(|k| Crossing {
            l_small: params.sizes[k],
            l_large: params.sizes[k + 1],
            p: central[k],
            p_err: std_dev(&boot.iter().map(|c| c[k]).collect::<Vec<_>>()),
        })
        .collect();
    let p_c = mean(&central);
    let p_c_err = std_dev(&boot.iter().map(|c| mean(c)).collect::<Vec<_>>());
    let spacing = (params.p_grid[np - 1] - params.p_grid[0]) / (np - 1) as f64;
    if !(p_c_err <= spacing) {
        return Err(Error::InsufficientStatistics(format!(
            "bootstrap error {p_c_err:.4} exceeds the grid spacing {spacing:.4}"
        )));
    }
    Ok(PcEstimate {
        p_c,
        p_c_err,
        crossings: crossings_out,
        curves,
        bootstrap_successes: boot.len(),
        params: params.clone(),
    })
}
