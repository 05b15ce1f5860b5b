//! Bound verification, susceptibilities, response functions and scans.

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::Rng;

use crate::channels::{apply_all, dephasing_layer, ising_decoherence_layer, is_strongly_symmetric_channel};
use crate::correlators::{cw_alpha, fidelity_correlator, renyi2_correlator, two_point, wightman, wightman_single, wightman_tfd};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::lattice::LatticeSpec;
use crate::models::{charge_gap, parity_gap};
use crate::operator::{hermitian_exp, matrix_log, schatten_norm, Operator, Pauli, C64, HERMITIAN_TOL};
use crate::rng;
use crate::states::{
    charge_sector_projector, parity_sector_projector, parity_x, plus_state, random_density_matrix, tfd, thermal_state,
    tilde_local, u1_charge, BlockEnsemble, DensityMatrix, TfdState,
};

/// Slack allowed in the bound inequalities.
pub const BOUND_TOL: f64 = 1e-10;

fn local(n: usize, site: usize, o: &Matrix2<C64>) -> Result<Operator> {
    Operator::single_site(n, site, o)
}

// ---------------------------------------------------------------------------
// Bounds

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BoundReport {
    pub cw: f64,
    pub f: f64,
    /// `‖O_i‖_∞ ‖O_j‖_∞`.
    pub op_norm: f64,
    /// `F·‖·‖² − C^W`; non-negative when the first bound holds.
    pub bound1_slack: f64,
    /// `√C^W − F`; non-negative when the second bound holds.
    pub bound2_slack: f64,
    pub bound1_ok: bool,
    pub bound2_ok: bool,
}

/// Checks `C^W ≤ F ‖O‖²_∞` and `F ≤ √C^W`.
pub fn verify_bounds(rho: &DensityMatrix, o_i: &Operator, o_j: &Operator) -> Result<BoundReport> {
    let cw = wightman(rho, o_i, o_j)?;
    let f = fidelity_correlator(rho, o_i, o_j)?;
    let op_norm = schatten_norm(o_i, f64::INFINITY)? * schatten_norm(o_j, f64::INFINITY)?;
    let bound1_slack = f * op_norm - cw;
    let bound2_slack = cw.max(0.0).sqrt() - f;
    Ok(BoundReport {
        cw,
        f,
        op_norm,
        bound1_slack,
        bound2_slack,
        bound1_ok: bound1_slack >= -BOUND_TOL,
        bound2_ok: bound2_slack >= -BOUND_TOL,
    })
}

/// One fuzz case: a random state and a random Pauli pair on distinct sites.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FuzzCase {
    pub index: usize,
    pub n_qubits: usize,
    pub rank: usize,
    pub site_i: usize,
    pub site_j: usize,
    pub pauli_i: Pauli,
    pub pauli_j: Pauli,
    pub report: BoundReport,
    /// `C^W` and `F` vanish together.
    pub equivalence_ok: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FuzzSummary {
    pub cases: usize,
    pub bound1_violations: usize,
    pub bound2_violations: usize,
    pub equivalence_violations: usize,
    pub min_bound1_slack: f64,
    pub min_bound2_slack: f64,
    pub records: Vec<FuzzCase>,
}

impl FuzzSummary {
    pub fn passed(&self) -> usize {
        self.records
            .iter()
            .filter(|c| c.report.bound1_ok && c.report.bound2_ok && c.equivalence_ok)
            .count()
    }
}

/// `C^W < 1e-16` must force `F < 1e-8`, and `F < 1e-16` must force `C^W < 1e-16`
/// (both follow from `F² ≤ C^W ≤ F`).
pub fn zero_equivalence(cw: f64, f: f64) -> bool {
    (cw >= 1e-16 || f < 1e-8) && (f >= 1e-16 || cw < 1e-16)
}

/// Random bound checks over `qubit_counts`, cycling through them per case.
pub fn bounds_fuzz(cases: usize, qubit_counts: &[usize], seed: u64, exec: Execution) -> Result<FuzzSummary> {
    if qubit_counts.is_empty() || qubit_counts.iter().any(|&n| n < 2) {
        return Err(Error::InvalidParameter {
            name: "n_qubits",
            value: qubit_counts.iter().copied().min().unwrap_or(0) as f64,
            constraint: "non-empty, every N >= 2",
        });
    }
    let records: Vec<Result<FuzzCase>> = exec.map_range(cases, |index| {
        let n = qubit_counts[index % qubit_counts.len()];
        let mut rng = rng::stream(seed, rng::stream_id(rng::TAG_FUZZ, 0, 0, index as u64));
        let rank = rng.random_range(1..=(1usize << n));
        let site_i = rng.random_range(0..n);
        let site_j = (site_i + rng.random_range(1..n)) % n;
        let pauli_i = Pauli::ALL[rng.random_range(0..3)];
        let pauli_j = Pauli::ALL[rng.random_range(0..3)];
        let rho = random_density_matrix(n, rank, rng.random())?;
        let oi = crate::operator::pauli_string(n, &[(site_i, pauli_i)])?;
        let oj = crate::operator::pauli_string(n, &[(site_j, pauli_j)])?;
        let report = verify_bounds(&rho, &oi, &oj)?;
        Ok(FuzzCase {
            index,
            n_qubits: n,
            rank,
            site_i,
            site_j,
            pauli_i,
            pauli_j,
            equivalence_ok: zero_equivalence(report.cw, report.f),
            report,
        })
    });
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(FuzzSummary {
        cases,
        bound1_violations: records.iter().filter(|c| !c.report.bound1_ok).count(),
        bound2_violations: records.iter().filter(|c| !c.report.bound2_ok).count(),
        equivalence_violations: records.iter().filter(|c| !c.equivalence_ok).count(),
        min_bound1_slack: records.iter().map(|c| c.report.bound1_slack).fold(f64::INFINITY, f64::min),
        min_bound2_slack: records.iter().map(|c| c.report.bound2_slack).fold(f64::INFINITY, f64::min),
        records,
    })
}

// ---------------------------------------------------------------------------
// Susceptibility

/// `χ^W = Σ_j C^W(i,j)` with its individual terms.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ChiW {
    pub site: usize,
    /// `terms[j] = C^W(i,j)`; `terms[i]` is the self term.
    pub terms: Vec<f64>,
    pub total: f64,
}

/// Self term `½[W(O†O) + W(OO†)]` with `W(B) = tr(√ρ B √ρ B†)`; equals 1 for unitary `O`.
fn self_term(rho: &DensityMatrix, o: &Operator) -> Result<f64> {
    if o.unitarity_defect() <= HERMITIAN_TOL {
        return Ok(1.0);
    }
    let a = &o.adjoint() * o;
    let b = o * &o.adjoint();
    Ok(0.5 * (wightman_single(rho, &a)? + wightman_single(rho, &b)?))
}

pub fn chi_w(rho: &DensityMatrix, o: &Matrix2<C64>, site: usize) -> Result<ChiW> {
    let n = rho.n_qubits();
    let oi = local(n, site, o)?;
    let mut terms = Vec::with_capacity(n);
    for j in 0..n {
        terms.push(if j == site {
            self_term(rho, &oi)?
        } else {
            wightman(rho, &oi, &local(n, j, o)?)?
        });
    }
    let total = terms.iter().sum();
    Ok(ChiW { site, terms, total })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PerturbedResponse {
    pub epsilon: f64,
    /// `Re ⟨O_i ⊗ Õ_i⟩` in the normalized perturbed state.
    pub measured: f64,
    pub measured_imag: f64,
    /// `ε χ^W`.
    pub predicted: f64,
    pub chi_w: f64,
    /// Exact first-order expansion `⟨P⟩₀ + ε(½⟨KP + PK⟩₀ − ⟨P⟩₀⟨K⟩₀)`.
    pub first_order: f64,
}

/// Largest physical qubit count for the perturbed purification.
pub const MAX_PERTURBED_QUBITS: usize = 5;

fn pair_matrix(o: &Matrix2<C64>) -> DMatrix<C64> {
    // index = b_phys + 2 b_aux
    let t = tilde_local(o);
    let mut m = DMatrix::zeros(4, 4);
    for (ra, rp, ca, cp) in itertools(2) {
        m[(rp + 2 * ra, cp + 2 * ca)] = o[(rp, cp)] * t[(ra, ca)];
    }
    m
}

fn itertools(d: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..d).flat_map(move |a| (0..d).flat_map(move |b| (0..d).flat_map(move |c| (0..d).map(move |e| (a, b, c, e)))))
}

/// `K = P + P†` for non-Hermitian `P = O ⊗ Õ`, `K = P` when `P` is Hermitian.
fn coupling(p: &DMatrix<C64>) -> DMatrix<C64> {
    let adj = p.adjoint();
    let defect = (p - &adj).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if defect <= HERMITIAN_TOL {
        p.clone()
    } else {
        p + adj
    }
}

/// Couples each physical site to its auxiliary partner,
/// `|ψ⟩ ∝ exp((ε/2) Σ_j K_j)|TFD⟩`, and measures `⟨O_i ⊗ Õ_i⟩`.
pub fn perturbed_tfd_response(rho: &DensityMatrix, o: &Matrix2<C64>, site: usize, eps: f64) -> Result<PerturbedResponse> {
    let n = rho.n_qubits();
    if n > MAX_PERTURBED_QUBITS {
        return Err(Error::TooLarge {
            what: "physical qubits for the perturbed purification",
            value: n,
            limit: MAX_PERTURBED_QUBITS,
        });
    }
    if site >= n {
        return Err(Error::SiteOutOfRange { site, n_qubits: n });
    }
    if !eps.is_finite() {
        return Err(Error::NonFinite);
    }
    let base = tfd(rho)?;
    let p = pair_matrix(o);
    let k = coupling(&p);
    let gate = hermitian_exp(&Operator::new(k.clone())?, eps / 2.0)?.into_matrix();

    let mut state = base.clone();
    for j in 0..n {
        state.apply_pair_gate(j, &gate);
    }
    state.normalize();
    let measure = |s: &TfdState| -> C64 {
        let mut v = s.clone();
        v.apply_pair_gate(site, &p);
        s.overlap(&v)
    };
    let value = measure(&state);

    // first-order expansion around the unperturbed purification
    let mut k_state = TfdState::from_amplitudes(n, DVector::zeros(base.amplitudes().len()))?;
    for j in 0..n {
        let mut v = base.clone();
        v.apply_pair_gate(j, &k);
        k_state = TfdState::from_amplitudes(n, k_state.amplitudes() + v.amplitudes())?;
    }
    let mut p_state = base.clone();
    p_state.apply_pair_gate(site, &p);
    let mut pdag_state = base.clone();
    pdag_state.apply_pair_gate(site, &p.adjoint());
    let p0 = base.overlap(&p_state);
    let k0 = base.overlap(&k_state);
    let kp = k_state.overlap(&p_state);
    let pk = pdag_state.overlap(&k_state);
    let first_order = (p0 + (0.5 * (kp + pk) - p0 * k0) * eps).re;

    let chi = chi_w(rho, o, site)?.total;
    Ok(PerturbedResponse {
        epsilon: eps,
        measured: value.re,
        measured_imag: value.im,
        predicted: eps * chi,
        chi_w: chi,
        first_order,
    })
}

// ---------------------------------------------------------------------------
// Spin glass

/// Block formulas `Σ λ_a |⟨ψ_a|A|ψ_a⟩|²` and `Σ λ_a |⟨ψ_a|A|ψ_a⟩|` for `A = O_i O_j†`.
pub fn block_formulas(ens: &BlockEnsemble, o_i: &Operator, o_j: &Operator) -> Result<(f64, f64)> {
    let a = o_i * &o_j.adjoint();
    check_block_diagonal(ens, &a)?;
    let mut cw = 0.0;
    let mut ea = 0.0;
    for (w, s) in ens.weights.iter().zip(&ens.states) {
        let m = s.dotc(&(a.matrix() * s)).norm();
        cw += w * m * m;
        ea += w * m;
    }
    Ok((cw, ea))
}

fn check_block_diagonal(ens: &BlockEnsemble, a: &Operator) -> Result<()> {
    let mut defect: f64 = 0.0;
    for (x, sa) in ens.states.iter().enumerate() {
        let image = a.matrix() * sa;
        for (y, sb) in ens.states.iter().enumerate() {
            if x != y {
                defect = defect.max(sb.dotc(&image).norm());
            }
        }
    }
    if defect > HERMITIAN_TOL {
        return Err(Error::NotBlockDiagonal { defect });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SpinGlassReport {
    pub n_sites: usize,
    /// `N⁻¹ Σ_ij C^W(i,j)` from the block formula.
    pub chi_sg_block: f64,
    /// The same sum from direct Wightman evaluation.
    pub chi_sg_direct: f64,
    /// `N⁻² Σ_ij C^W(i,j)` from direct evaluation.
    pub mean_cw: f64,
    /// Per-pair `(i, j, C^W block, C^W direct, EA block, F direct)` for `i < j`.
    pub pairs: Vec<(usize, usize, f64, f64, f64, f64)>,
}

/// `χ_SG = N⁻¹ Σ_ij C^W(i,j)` computed both via the block formula and directly.
pub fn spin_glass_susceptibility(ens: &BlockEnsemble, o: &Matrix2<C64>) -> Result<SpinGlassReport> {
    let n = ens.n_qubits();
    let rho = crate::states::block_ensemble_state(ens)?;
    let ops: Vec<Operator> = (0..n).map(|k| local(n, k, o)).collect::<Result<_>>()?;
    let mut sum_block = 0.0;
    let mut sum_direct = 0.0;
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (cb, eb) = block_formulas(ens, &ops[i], &ops[j])?;
            let (cd, fd) = if i == j {
                (self_term(&rho, &ops[i])?, 1.0)
            } else {
                (wightman(&rho, &ops[i], &ops[j])?, fidelity_correlator(&rho, &ops[i], &ops[j])?)
            };
            sum_block += cb;
            sum_direct += cd;
            if i < j {
                pairs.push((i, j, cb, cd, eb, fd));
            }
        }
    }
    let nf = n as f64;
    Ok(SpinGlassReport {
        n_sites: n,
        chi_sg_block: sum_block / nf,
        chi_sg_direct: sum_direct / nf,
        mean_cw: sum_direct / (nf * nf),
        pairs,
    })
}

/// Ensembles used by the spin-glass experiment: GHZ±, product states and random blocks.
pub fn ghz_pair_ensemble(n: usize, weight_plus: f64) -> Result<BlockEnsemble> {
    BlockEnsemble::new(
        vec![weight_plus, 1.0 - weight_plus],
        vec![crate::states::ghz_state(n, true), crate::states::ghz_state(n, false)],
    )
}

/// The single product state `|+⟩^{⊗N}`, where `⟨Z_i Z_j⟩ = δ_ij`.
///
/// Mixing several x-basis product states would break block diagonality:
/// `Z_i Z_j` maps each onto another.
pub fn plus_product_ensemble(n: usize) -> Result<BlockEnsemble> {
    BlockEnsemble::new(vec![1.0], vec![plus_state(n)])
}

// ---------------------------------------------------------------------------
// Entropy response

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EntropyResponse {
    /// `tr(H_M δρ)` with `H_M = −ln ρ`, `δρ = A ρ A† − ρ`.
    pub slope_modular: f64,
    /// `(C^W_0 − C^W_α)/α` with `C^W_0 = 1`.
    pub slope_fd: f64,
    pub alpha: f64,
    pub min_eigenvalue: f64,
}

pub const ENTROPY_FD_ALPHA: f64 = 1e-4;
pub const ENTROPY_MIN_EIGENVALUE: f64 = 1e-12;

pub fn entropy_response(rho: &DensityMatrix, o_i: &Operator, o_j: &Operator) -> Result<EntropyResponse> {
    let min = rho.min_eigenvalue();
    if min <= ENTROPY_MIN_EIGENVALUE {
        return Err(Error::RankDeficient {
            min_eigenvalue: min,
            threshold: ENTROPY_MIN_EIGENVALUE,
        });
    }
    let a = o_i * &o_j.adjoint();
    let defect = a.unitarity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotUnitary { defect });
    }
    let delta = &(&(&a * rho.op()) * &a.adjoint()) - rho.op();
    let modular = matrix_log(rho.op())?.scale(C64::new(-1.0, 0.0));
    let slope_modular = modular.trace_product(&delta).re;
    let alpha = ENTROPY_FD_ALPHA;
    let slope_fd = (1.0 - cw_alpha(rho, o_i, o_j, alpha)?) / alpha;
    Ok(EntropyResponse {
        slope_modular,
        slope_fd,
        alpha,
        min_eigenvalue: min,
    })
}

// ---------------------------------------------------------------------------
// Thermal ensembles

/// Symmetry sector fixing the canonical ensemble.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Sector {
    /// Fixed number of up spins.
    U1 { charge: usize },
    /// Fixed `∏X` parity.
    Z2 { even: bool },
}

impl Sector {
    pub fn projector(&self, n: usize) -> Operator {
        match *self {
            Sector::U1 { charge } => charge_sector_projector(n, charge),
            Sector::Z2 { even } => parity_sector_projector(n, even),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ThermalRow {
    pub beta: f64,
    pub i: usize,
    pub j: usize,
    pub separation: usize,
    pub cw_canonical: f64,
    pub cw_grand_canonical: f64,
    /// `C^W_{O_i} C^W_{O_j}` in the grand-canonical ensemble.
    pub product_single: f64,
    /// `e^{−βΔ}`.
    pub gap_prediction: f64,
    /// Canonical `C^W` via the purification; only for `N ≤ 6`.
    pub cw_canonical_tfd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SlopeFit {
    pub i: usize,
    pub j: usize,
    /// Least-squares slope of `ln C^W` against β.
    pub slope_canonical: f64,
    pub slope_grand_canonical: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ThermalReport {
    pub n_sites: usize,
    pub delta: f64,
    pub mu: f64,
    pub rows: Vec<ThermalRow>,
    pub slopes: Vec<SlopeFit>,
    /// Every `C^W(i,j)` at finite β is strictly positive.
    pub positive: bool,
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Canonical vs grand-canonical Wightman correlators of a charged on-site
/// operator, the single-operator factorization and the gap scaling.
///
/// For U(1), the grand-canonical ensemble is `e^{−β(H − μQ)}` with μ centring
/// it on the chosen charge; for Z2 it is the unrestricted thermal state.
pub fn thermal_factorization_report(
    h: &Operator,
    betas: &[f64],
    sector: Sector,
    o: &Matrix2<C64>,
    pairs: &[(usize, usize)],
) -> Result<ThermalReport> {
    let n = h.n_qubits();
    let projector = sector.projector(n);
    let (delta, mu, h_gc) = match sector {
        Sector::U1 { charge } => {
            let gap = charge_gap(h, charge)?;
            let h_gc = h - &u1_charge(n).scale(C64::new(gap.mu, 0.0));
            (gap.delta, gap.mu, h_gc)
        }
        Sector::Z2 { even } => {
            let (e_even, e_odd) = parity_gap(h)?;
            let delta = if even { e_odd - e_even } else { e_even - e_odd };
            (delta, 0.0, h.clone())
        }
    };
    let ops: Vec<Operator> = (0..n).map(|k| local(n, k, o)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &beta in betas {
        let canonical = thermal_state(h, beta, Some(&projector))?;
        let grand = thermal_state(&h_gc, beta, None)?;
        let singles: Vec<f64> = ops.iter().map(|op| wightman_single(&grand, op)).collect::<Result<_>>()?;
        for &(i, j) in pairs {
            let cw_canonical = wightman(&canonical, &ops[i], &ops[j])?;
            rows.push(ThermalRow {
                beta,
                i,
                j,
                separation: i.abs_diff(j),
                cw_canonical,
                cw_grand_canonical: wightman(&grand, &ops[i], &ops[j])?,
                product_single: singles[i] * singles[j],
                gap_prediction: (-beta * delta).exp(),
                cw_canonical_tfd: if n <= 6 {
                    Some(wightman_tfd(&canonical, &ops[i], &ops[j])?)
                } else {
                    None
                },
            });
        }
    }
    let mut slopes = Vec::new();
    if betas.len() >= 2 {
        for &(i, j) in pairs {
            let sel: Vec<&ThermalRow> = rows.iter().filter(|r| r.i == i && r.j == j).collect();
            let b: Vec<f64> = sel.iter().map(|r| r.beta).collect();
            let lc: Vec<f64> = sel.iter().map(|r| r.cw_canonical.ln()).collect();
            let lg: Vec<f64> = sel.iter().map(|r| r.cw_grand_canonical.ln()).collect();
            slopes.push(SlopeFit {
                i,
                j,
                slope_canonical: ls_slope(&b, &lc),
                slope_grand_canonical: ls_slope(&b, &lg),
            });
        }
    }
    let positive = rows.iter().all(|r| r.cw_canonical > 0.0 && r.cw_grand_canonical > 0.0);
    Ok(ThermalReport {
        n_sites: n,
        delta,
        mu,
        rows,
        slopes,
        positive,
    })
}

// ---------------------------------------------------------------------------
// Stability

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StabilityReport {
    pub before: f64,
    pub after: f64,
    /// Every dephasing Kraus operator is covariant under `∏X`.
    pub layer_strongly_symmetric: bool,
}

/// `C^W(i,j)` before and after a layer of single-site Z dephasing with strength `q`.
pub fn stability_under_dephasing(rho: &DensityMatrix, q: f64, o_i: &Operator, o_j: &Operator) -> Result<StabilityReport> {
    let n = rho.n_qubits();
    let layer = dephasing_layer(n, q)?;
    let u = parity_x(n);
    let mut symmetric = true;
    for ch in &layer {
        symmetric &= is_strongly_symmetric_channel(ch, &u)?;
    }
    let after = apply_all(&layer, rho)?;
    Ok(StabilityReport {
        before: wightman(rho, o_i, o_j)?,
        after: wightman(&after, o_i, o_j)?,
        layer_strongly_symmetric: symmetric,
    })
}

// ---------------------------------------------------------------------------
// Scans

/// Correlators of one site pair at one grid point.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ScanRow {
    pub parameter: f64,
    pub i: usize,
    pub j: usize,
    pub separation: usize,
    pub two_point: f64,
    pub wightman: f64,
    pub fidelity: f64,
    pub renyi2: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ScanResult {
    pub parameter_name: String,
    pub grid: Vec<f64>,
    pub rows: Vec<ScanRow>,
    pub system: String,
    pub seed: Option<u64>,
}

pub(crate) fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            name,
            value: f64::NAN,
            constraint: "grid must be non-empty",
        });
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name,
            value: w[1],
            constraint: "grid must be strictly increasing",
        });
    }
    Ok(())
}

/// Manhattan distance on the lattice, with wrap-around when periodic.
pub fn lattice_distance(lat: &LatticeSpec, i: usize, j: usize) -> usize {
    let (xi, yi) = lat.coords(i);
    let (xj, yj) = lat.coords(j);
    let d = |a: usize, b: usize| {
        let raw = a.abs_diff(b);
        if lat.periodic { raw.min(lat.l - raw) } else { raw }
    };
    d(xi, xj) + d(yi, yj)
}

/// Largest qubit count for the exactly represented decohered state.
pub const MAX_EXACT_LATTICE_SITES: usize = 9;

/// `ρ = ℰ[|+⟩⟨+|^{⊗L²}]` with the Ising channel on every lattice bond.
pub fn decohered_ising_state(lat: &LatticeSpec, p: f64) -> Result<DensityMatrix> {
    let n = lat.n_sites();
    if n > MAX_EXACT_LATTICE_SITES {
        return Err(Error::TooLarge {
            what: "lattice sites for the exact decohered state",
            value: n,
            limit: MAX_EXACT_LATTICE_SITES,
        });
    }
    let layer = ising_decoherence_layer(n, &lat.bond_pairs(), p)?;
    apply_all(&layer, &DensityMatrix::pure(&plus_state(n))?)
}

/// Pair correlators of `Z_i Z_j` on the decohered Ising state over a grid of `p`.
pub fn decohered_ising_scan(
    lat: &LatticeSpec,
    p_grid: &[f64],
    pairs: &[(usize, usize)],
    exec: Execution,
) -> Result<ScanResult> {
    check_grid("p", p_grid)?;
    let n = lat.n_sites();
    let per_point: Vec<Result<Vec<ScanRow>>> = exec.map_range(p_grid.len(), |k| {
        let p = p_grid[k];
        let rho = decohered_ising_state(lat, p)?;
        pairs
            .iter()
            .map(|&(i, j)| {
                let zi = crate::operator::pauli_string(n, &[(i, Pauli::Z)])?;
                let zj = crate::operator::pauli_string(n, &[(j, Pauli::Z)])?;
                Ok(ScanRow {
                    parameter: p,
                    i,
                    j,
                    separation: lattice_distance(lat, i, j),
                    two_point: two_point(&rho, &zi, &zj)?.re,
                    wightman: wightman(&rho, &zi, &zj)?,
                    fidelity: fidelity_correlator(&rho, &zi, &zj)?,
                    renyi2: renyi2_correlator(&rho, &zi, &zj)?,
                })
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in per_point {
        rows.extend(r?);
    }
    Ok(ScanResult {
        parameter_name: "p".into(),
        grid: p_grid.to_vec(),
        rows,
        system: format!(
            "decohered Ising, L = {}, {} boundaries",
            lat.l,
            if lat.periodic { "periodic" } else { "open" }
        ),
        seed: None,
    })
}
