//! Density matrices, the thermofield-double purification and symmetry checks.
//!
//! Doubled-space layout: a TFD amplitude vector has length `4^N`; physical
//! qubits occupy bits `0..N` of the doubled index and auxiliary qubits bits
//! `N..2N`. Reshaping the vector column-major gives the `2^N × 2^N` amplitude
//! matrix `T[p, a]`, and `(A ⊗ B)|T⟩` corresponds to `A T Bᵀ`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::operator::{
    hermitian_eig, pauli_string, schatten_norm, HermitianEigen, Operator, Pauli, C64, HERMITIAN_TOL, ONE, PSD_TOL,
    ZERO,
};
use crate::rng;

/// Tolerance on `tr ρ = 1`.
pub const TRACE_TOL: f64 = 1e-10;
/// Trace-norm tolerance for symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Largest physical qubit count for doubled-space state vectors.
pub const MAX_TFD_QUBITS: usize = 6;

/// A validated density matrix with its spectral decomposition.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: Operator,
    eigen: HermitianEigen,
    sqrt: OnceLock<Operator>,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        let eigen = hermitian_eig(&op)?;
        Self::checked(op, eigen)
    }

    fn checked(op: Operator, eigen: HermitianEigen) -> Result<Self> {
        let min = eigen.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        let trace = op.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized { trace });
        }
        Ok(Self {
            op,
            eigen,
            sqrt: OnceLock::new(),
        })
    }

    /// Builds `Σ_a λ_a |v_a⟩⟨v_a|` from an orthonormal eigenbasis, keeping the
    /// given spectrum exactly (no re-diagonalization).
    pub(crate) fn from_spectral(n_qubits: usize, weights: Vec<f64>, vectors: DMatrix<C64>) -> Result<Self> {
        let eigen = HermitianEigen::from_parts(n_qubits, weights, vectors);
        let op = eigen.reconstruct();
        Self::checked(op, eigen)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        let w = 1.0 / d as f64;
        Self::from_spectral(n_qubits, vec![w; d], DMatrix::identity(d, d)).expect("maximally mixed state is valid")
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidParameter {
                name: "state norm",
                value: norm,
                constraint: "nonzero and finite",
            });
        }
        Self::new(Operator::projector(&(psi / C64::new(norm, 0.0)))?)
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn n_qubits(&self) -> usize {
        self.op.n_qubits()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen.min_eigenvalue()
    }

    /// `√ρ`, computed once.
    pub fn sqrt(&self) -> &Operator {
        self.sqrt
            .get_or_init(|| self.eigen.power(0.5).expect("validated density matrix is PSD"))
    }

    /// `ρ^α` for `α ≥ 0`.
    pub fn power(&self, alpha: f64) -> Result<Operator> {
        if alpha == 0.5 {
            return Ok(self.sqrt().clone());
        }
        self.eigen.power(alpha)
    }

    pub fn purity(&self) -> f64 {
        self.eigen.eigenvalues.iter().map(|l| l * l).sum()
    }

    pub fn von_neumann_entropy(&self) -> f64 {
        let cut = self.eigen.psd_cutoff();
        self.eigen
            .eigenvalues
            .iter()
            .filter(|&&l| l > cut)
            .map(|&l| -l * l.ln())
            .sum()
    }

    pub fn rank(&self) -> usize {
        let cut = self.eigen.psd_cutoff();
        self.eigen.eigenvalues.iter().filter(|&&l| l > cut).count()
    }
}

/// Purification amplitudes on the doubled space.
#[derive(Debug, Clone, PartialEq)]
pub struct TfdState {
    n_qubits: usize,
    amplitudes: DVector<C64>,
}

impl TfdState {
    fn from_matrix(n_qubits: usize, t: DMatrix<C64>) -> Self {
        Self {
            n_qubits,
            amplitudes: DVector::from_column_slice(t.as_slice()),
        }
    }

    pub fn from_amplitudes(n_qubits: usize, amplitudes: DVector<C64>) -> Result<Self> {
        let expected = 1usize << (2 * n_qubits);
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: amplitudes.len(),
            });
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// `T[p, a]`, the amplitude of `|p⟩_phys ⊗ |a⟩_aux`.
    pub fn amplitude_matrix(&self) -> DMatrix<C64> {
        let d = 1 << self.n_qubits;
        DMatrix::from_column_slice(d, d, self.amplitudes.as_slice())
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn overlap(&self, other: &TfdState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `tr_aux |T⟩⟨T| = T T†`.
    pub fn reduced_physical(&self) -> Operator {
        let t = self.amplitude_matrix();
        Operator::from_parts(self.n_qubits, &t * t.adjoint())
    }

    /// `tr_phys |T⟩⟨T| = Tᵀ T̄`.
    pub fn reduced_auxiliary(&self) -> Operator {
        let t = self.amplitude_matrix();
        Operator::from_parts(self.n_qubits, t.transpose() * t.conjugate())
    }

    /// Schmidt coefficients across the physical/auxiliary cut, descending.
    pub fn schmidt_coefficients(&self) -> Vec<f64> {
        crate::operator::singular_values(&Operator::from_parts(self.n_qubits, self.amplitude_matrix()))
    }

    fn check_local(&self, op: &Operator) -> Result<()> {
        if op.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n_qubits,
                found: op.dim(),
            });
        }
        Ok(())
    }

    /// `(A ⊗ B)|T⟩`; `None` stands for the identity.
    pub fn apply(&self, phys: Option<&Operator>, aux: Option<&Operator>) -> Result<TfdState> {
        let d = 1 << self.n_qubits;
        let mut t = Operator::from_parts(self.n_qubits, self.amplitude_matrix());
        if let Some(a) = phys {
            self.check_local(a)?;
            t = a * &t;
        }
        if let Some(b) = aux {
            self.check_local(b)?;
            t = &t * &Operator::from_parts(self.n_qubits, b.matrix().transpose());
        }
        debug_assert_eq!(t.dim(), d);
        Ok(Self::from_matrix(self.n_qubits, t.into_matrix()))
    }

    /// `⟨T|(A ⊗ B)|T⟩`.
    pub fn expectation(&self, phys: Option<&Operator>, aux: Option<&Operator>) -> Result<C64> {
        Ok(self.overlap(&self.apply(phys, aux)?))
    }

    /// Applies a 4×4 gate to physical qubit `site` and its auxiliary partner.
    /// The gate's row/column index is `b_phys + 2 b_aux`.
    pub(crate) fn apply_pair_gate(&mut self, site: usize, gate: &DMatrix<C64>) {
        let n = self.n_qubits;
        let pb = 1usize << site;
        let ab = 1usize << (site + n);
        let len = self.amplitudes.len();
        let amps = self.amplitudes.as_mut_slice();
        for base in 0..len {
            if base & (pb | ab) != 0 {
                continue;
            }
            let idx = [base, base | pb, base | ab, base | pb | ab];
            let old = idx.map(|k| amps[k]);
            for (r, &k) in idx.iter().enumerate() {
                amps[k] = (0..4).map(|c| gate[(r, c)] * old[c]).sum();
            }
        }
    }

    pub(crate) fn normalize(&mut self) {
        let n = self.norm();
        self.amplitudes /= C64::new(n, 0.0);
    }
}

fn singlet_block() -> Operator {
    // rows: physical bit, columns: auxiliary bit
    Operator::from_parts(1, DMatrix::from_row_slice(2, 2, &[ZERO, -ONE, ONE, ZERO]))
}

fn singlet_product(n_qubits: usize) -> Operator {
    let mut e = singlet_block();
    for _ in 1..n_qubits {
        e = e.tensor(&singlet_block());
    }
    e
}

fn check_tfd_size(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_TFD_QUBITS {
        return Err(Error::TooLarge {
            what: "physical qubits for a doubled-space state",
            value: n_qubits,
            limit: MAX_TFD_QUBITS,
        });
    }
    Ok(())
}

/// Per-site singlets `⊗_k (|↑↓⟩ − |↓↑⟩)/√2`, unit norm.
pub fn epr_state(n_qubits: usize) -> Result<TfdState> {
    if n_qubits == 0 {
        return Err(Error::InvalidParameter {
            name: "n_qubits",
            value: 0.0,
            constraint: "n_qubits >= 1",
        });
    }
    check_tfd_size(n_qubits)?;
    let scale = FRAC_1_SQRT_2.powi(n_qubits as i32);
    let e = singlet_product(n_qubits).scale(C64::new(scale, 0.0));
    Ok(TfdState::from_matrix(n_qubits, e.into_matrix()))
}

/// `(√ρ ⊗ I)` applied to the unnormalized singlet product.
///
/// With unnormalized singlets the result has norm `tr ρ = 1`; in terms of the
/// unit-norm [`epr_state`] this is `2^{N/2} (√ρ ⊗ I)|EPR⟩`.
pub fn tfd(rho: &DensityMatrix) -> Result<TfdState> {
    check_tfd_size(rho.n_qubits())?;
    let t = rho.sqrt() * &singlet_product(rho.n_qubits());
    Ok(TfdState::from_matrix(rho.n_qubits(), t.into_matrix()))
}

/// The auxiliary-side image `Õ = W Ō W` with `W = ⊗ Y`.
///
/// It is defined so that `(I ⊗ Õ)|TFD⟩ = (√ρ O† √ρ^{-1} ⊗ I)`-style moves hold,
/// i.e. `⟨O_i Õ_i O_j† Õ_j†⟩_TFD = tr(√ρ O_i O_j† √ρ (O_i O_j†)†)`.
pub fn tilde(op: &Operator) -> Operator {
    let w = y_string(op.n_qubits());
    &(&w * &op.conjugate()) * &w
}

/// 2×2 version of [`tilde`].
pub fn tilde_local(m: &Matrix2<C64>) -> Matrix2<C64> {
    let y = Pauli::Y.matrix();
    y * m.map(|z| z.conj()) * y
}

fn y_string(n: usize) -> Operator {
    let all: Vec<(usize, Pauli)> = (0..n).map(|k| (k, Pauli::Y)).collect();
    pauli_string(n, &all).expect("sites are in range and distinct")
}

/// Symmetry group acting on all qubits.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SymmetryGroup {
    /// Generated by `U = ∏ X_k`.
    Z2,
    /// `U(φ) = exp(iφ Σ Z_k)` at the listed angles.
    U1 { angles: Vec<f64> },
}

impl SymmetryGroup {
    pub const DEFAULT_U1_ANGLES: [f64; 3] = [std::f64::consts::PI / 7.0, 1.0, 2.5];

    pub fn u1() -> Self {
        SymmetryGroup::U1 {
            angles: Self::DEFAULT_U1_ANGLES.to_vec(),
        }
    }

    /// Group elements used for checks (the generator for Z2).
    pub fn elements(&self, n_qubits: usize) -> Vec<Operator> {
        match self {
            SymmetryGroup::Z2 => vec![parity_x(n_qubits)],
            SymmetryGroup::U1 { angles } => angles.iter().map(|&phi| u1_rotation(n_qubits, phi)).collect(),
        }
    }

    /// Auxiliary-side images `Ũ` of [`Self::elements`].
    pub fn tilde_elements(&self, n_qubits: usize) -> Vec<Operator> {
        self.elements(n_qubits).iter().map(tilde).collect()
    }
}

/// `∏_k X_k`.
pub fn parity_x(n_qubits: usize) -> Operator {
    let all: Vec<(usize, Pauli)> = (0..n_qubits).map(|k| (k, Pauli::X)).collect();
    pauli_string(n_qubits, &all).expect("sites are in range and distinct")
}

/// `exp(iφ Σ_k Z_k)`.
pub fn u1_rotation(n_qubits: usize, phi: f64) -> Operator {
    let d = 1 << n_qubits;
    let diag = DVector::from_fn(d, |b, _| {
        let z_sum = n_qubits as f64 - 2.0 * b.count_ones() as f64;
        C64::from_polar(1.0, phi * z_sum)
    });
    Operator::from_parts(n_qubits, DMatrix::from_diagonal(&diag))
}

/// U(1) charge: number of up spins (bit value 0), `Σ_k (1 + Z_k)/2`.
pub fn u1_charge(n_qubits: usize) -> Operator {
    let d = 1usize << n_qubits;
    let diag: Vec<f64> = (0..d).map(|b| (n_qubits - b.count_ones() as usize) as f64).collect();
    Operator::from_real_diagonal(n_qubits, &diag).expect("diagonal has the right length")
}

/// Projector onto states with `charge` up spins.
pub fn charge_sector_projector(n_qubits: usize, charge: usize) -> Operator {
    let d = 1usize << n_qubits;
    let diag: Vec<f64> = (0..d)
        .map(|b| if n_qubits - b.count_ones() as usize == charge { 1.0 } else { 0.0 })
        .collect();
    Operator::from_real_diagonal(n_qubits, &diag).expect("diagonal has the right length")
}

/// `(I ± ∏X)/2`.
pub fn parity_sector_projector(n_qubits: usize, even: bool) -> Operator {
    let s = if even { 0.5 } else { -0.5 };
    &Operator::identity(n_qubits).scale(C64::new(0.5, 0.0)) + &parity_x(n_qubits).scale(C64::new(s, 0.0))
}

/// Maximally mixed state on the even `∏X` sector, `P_even / 2^{N-1}`.
pub fn even_sector_mixed(n_qubits: usize) -> Result<DensityMatrix> {
    let p = parity_sector_projector(n_qubits, true);
    let w = 1.0 / (1u64 << (n_qubits - 1)) as f64;
    DensityMatrix::new(p.scale(C64::new(w, 0.0)))
}

/// `|b⟩` for a computational-basis index.
pub fn basis_state(n_qubits: usize, index: usize) -> DVector<C64> {
    let mut v = DVector::zeros(1 << n_qubits);
    v[index] = ONE;
    v
}

/// `|+⟩^{⊗N}`.
pub fn plus_state(n_qubits: usize) -> DVector<C64> {
    let d = 1usize << n_qubits;
    DVector::from_element(d, C64::new(1.0 / (d as f64).sqrt(), 0.0))
}

/// `(|0..0⟩ ± |1..1⟩)/√2`.
pub fn ghz_state(n_qubits: usize, plus: bool) -> DVector<C64> {
    let d = 1usize << n_qubits;
    let mut v = DVector::zeros(d);
    v[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    v[d - 1] = C64::new(if plus { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 }, 0.0);
    v
}

/// Result of [`check_strong_symmetry`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StrongSymmetry {
    pub holds: bool,
    pub theta: f64,
    /// `‖Uρ − e^{iθ}ρ‖₁`.
    pub residual: f64,
}

fn require_unitary(u: &Operator) -> Result<()> {
    let defect = u.unitarity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotUnitary { defect });
    }
    Ok(())
}

/// Tests `Uρ = e^{iθ}ρ`, fitting θ from the largest-modulus entry of ρ.
pub fn check_strong_symmetry(rho: &DensityMatrix, u: &Operator) -> Result<StrongSymmetry> {
    rho.op().check_same_space(u)?;
    require_unitary(u)?;
    let m = rho.op().matrix();
    let (mut best, mut at) = (0.0, (0, 0));
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let a = m[(r, c)].norm();
            if a > best {
                best = a;
                at = (r, c);
            }
        }
    }
    let u_rho = u * rho.op();
    let theta = (u_rho.matrix()[at] / m[at]).arg();
    let diff = &u_rho - &rho.op().scale(C64::from_polar(1.0, theta));
    let residual = schatten_norm(&diff, 1.0)?;
    Ok(StrongSymmetry {
        holds: residual < SYMMETRY_TOL,
        theta,
        residual,
    })
}

/// Tests `UρU† = ρ` in trace norm.
pub fn check_weak_symmetry(rho: &DensityMatrix, u: &Operator) -> Result<bool> {
    rho.op().check_same_space(u)?;
    require_unitary(u)?;
    let conj = &(u * rho.op()) * &u.adjoint();
    Ok(schatten_norm(&(&conj - rho.op()), 1.0)? < SYMMETRY_TOL)
}

/// Phase action of a doubled-space operator on a TFD state.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhaseAction {
    pub holds: bool,
    pub phase: f64,
    pub residual: f64,
}

fn phase_action(state: &TfdState, image: &TfdState) -> PhaseAction {
    let phase = state.overlap(image).arg();
    let residual = (&image.amplitudes - &state.amplitudes * C64::from_polar(1.0, phase)).norm();
    PhaseAction {
        holds: residual < SYMMETRY_TOL,
        phase,
        residual,
    }
}

/// Outcome of [`doubled_symmetry_check`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DoubledSymmetry {
    /// `U ⊗ Ũ`.
    pub combined: PhaseAction,
    /// `U ⊗ I`.
    pub physical: PhaseAction,
    /// `I ⊗ Ũ`.
    pub auxiliary: PhaseAction,
}

impl DoubledSymmetry {
    /// Both factors act as phases separately: the strong-symmetry signature.
    pub fn doubled(&self) -> bool {
        self.physical.holds && self.auxiliary.holds
    }
}

pub fn doubled_symmetry_check(state: &TfdState, u: &Operator, u_tilde: &Operator) -> Result<DoubledSymmetry> {
    let combined = state.apply(Some(u), Some(u_tilde))?;
    let physical = state.apply(Some(u), None)?;
    let auxiliary = state.apply(None, Some(u_tilde))?;
    Ok(DoubledSymmetry {
        combined: phase_action(state, &combined),
        physical: phase_action(state, &physical),
        auxiliary: phase_action(state, &auxiliary),
    })
}

/// Eigenpairs of `H` restricted to the range of the projector `P`.
pub fn sector_spectrum(h: &Operator, sector: &Operator) -> Result<(Vec<f64>, DMatrix<C64>)> {
    h.check_same_space(sector)?;
    let defect = sector.hermiticity_defect().max((&(sector * sector) - sector).max_abs());
    if defect > HERMITIAN_TOL {
        return Err(Error::InvalidParameter {
            name: "sector projector defect",
            value: defect,
            constraint: "P = P† = P²",
        });
    }
    let comm = (&(h * sector) - &(sector * h)).max_abs();
    if comm > HERMITIAN_TOL {
        return Err(Error::NonCommutingProjector { defect: comm });
    }
    let rank = sector.trace().re.round() as usize;
    if rank == 0 {
        return Err(Error::EmptySector);
    }
    // Push the complement far above the sector spectrum so the two never mix.
    let lift = 2.0 * h.frobenius_norm() + 1.0;
    let complement = &Operator::identity(h.n_qubits()) - sector;
    let shifted = &(&(sector * h) * sector) + &complement.scale(C64::new(lift, 0.0));
    let eig = hermitian_eig(&shifted)?;
    let keep = rank.min(eig.eigenvalues.len());
    let vecs = eig.eigenvectors.columns(0, keep).into_owned();
    Ok((eig.eigenvalues[..keep].to_vec(), vecs))
}

/// `e^{-βH}/Z`, optionally restricted to a charge sector `P e^{-βH} P / tr(P e^{-βH})`.
pub fn thermal_state(h: &Operator, beta: f64, sector: Option<&Operator>) -> Result<DensityMatrix> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            constraint: "finite and >= 0",
        });
    }
    let n = h.n_qubits();
    let d = h.dim();
    let (energies, vectors) = match sector {
        None => {
            let eig = hermitian_eig(h)?;
            (eig.eigenvalues, eig.eigenvectors)
        }
        Some(p) => sector_spectrum(h, p)?,
    };
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut weights: Vec<f64> = energies.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    if !(z.is_finite() && z >= 1.0) {
        return Err(Error::PartitionUnderflow { beta });
    }
    weights.iter_mut().for_each(|w| *w /= z);
    // Complete the basis with zero weights so the spectral data spans the space.
    let (weights, vectors) = complete_basis(d, weights, vectors);
    DensityMatrix::from_spectral(n, weights, vectors)
}

fn complete_basis(d: usize, mut weights: Vec<f64>, vectors: DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let k = vectors.ncols();
    if k == d {
        return (weights, vectors);
    }
    let proj = &vectors * vectors.adjoint();
    let comp = Operator::from_parts(
        d.trailing_zeros() as usize,
        DMatrix::<C64>::identity(d, d) - proj,
    );
    let eig = hermitian_eig(&comp).expect("complement projector is Hermitian");
    let mut full = DMatrix::zeros(d, d);
    full.columns_mut(0, k).copy_from(&vectors);
    // The complement's eigenvalue-1 vectors are the top d − k columns.
    full.columns_mut(k, d - k).copy_from(&eig.eigenvectors.columns(k, d - k));
    weights.resize(d, 0.0);
    (weights, full)
}

/// `ρ = Σ_a λ_a |ψ_a⟩⟨ψ_a|` with orthonormal `|ψ_a⟩`.
#[derive(Debug, Clone)]
pub struct BlockEnsemble {
    pub weights: Vec<f64>,
    pub states: Vec<DVector<C64>>,
}

impl BlockEnsemble {
    pub fn new(weights: Vec<f64>, states: Vec<DVector<C64>>) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                found: weights.len(),
            });
        }
        let d = states[0].len();
        if !d.is_power_of_two() {
            return Err(Error::NotQubitDimension { dim: d });
        }
        if let Some(s) = states.iter().find(|s| s.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|&&w| !(w.is_finite() && w >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "ensemble weight",
                value: w,
                constraint: ">= 0",
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized { trace: total });
        }
        let mut defect: f64 = 0.0;
        for (a, sa) in states.iter().enumerate() {
            for (b, sb) in states.iter().enumerate().skip(a) {
                let target = if a == b { 1.0 } else { 0.0 };
                defect = defect.max((sa.dotc(sb) - C64::new(target, 0.0)).norm());
            }
        }
        if defect > HERMITIAN_TOL {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(Self { weights, states })
    }

    pub fn n_qubits(&self) -> usize {
        self.states[0].len().trailing_zeros() as usize
    }
}

pub fn block_ensemble_state(ens: &BlockEnsemble) -> Result<DensityMatrix> {
    let d = ens.states[0].len();
    let mut m = DMatrix::zeros(d, d);
    for (w, s) in ens.weights.iter().zip(&ens.states) {
        m += s * s.adjoint() * C64::new(*w, 0.0);
    }
    DensityMatrix::new(Operator::new(m)?)
}

/// `G G† / tr(G G†)` with `G` a seeded complex Gaussian `2^N × rank` matrix.
pub fn random_density_matrix(n_qubits: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let d = 1usize << n_qubits;
    if rank == 0 || rank > d {
        return Err(Error::InvalidParameter {
            name: "rank",
            value: rank as f64,
            constraint: "1 <= rank <= 2^N",
        });
    }
    let mut rng = rng::stream(seed, rng::stream_id(rng::TAG_STATE, n_qubits as u64, rank as u64, 0));
    let g = DMatrix::from_fn(d, rank, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let gg = &g * g.adjoint();
    let tr = gg.trace().re;
    DensityMatrix::new(Operator::new(gg / C64::new(tr, 0.0))?)
}

/// `k` random states on disjoint, randomly chosen sets of basis states with
/// random weights. Any diagonal operator (e.g. `Z_i Z_j`) is block diagonal
/// in such an ensemble.
pub fn random_block_ensemble(n_qubits: usize, k: usize, seed: u64) -> Result<BlockEnsemble> {
    let d = 1usize << n_qubits;
    if k == 0 || k > d {
        return Err(Error::InvalidParameter {
            name: "blocks",
            value: k as f64,
            constraint: "1 <= blocks <= 2^N",
        });
    }
    let mut rng = rng::stream(seed, rng::stream_id(rng::TAG_ENSEMBLE, n_qubits as u64, k as u64, 0));
    let mut order: Vec<usize> = (0..d).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let mut states = vec![DVector::zeros(d); k];
    for (pos, &b) in order.iter().enumerate() {
        // the first k positions seed each block so none is empty
        let block = if pos < k { pos } else { rng.random_range(0..k) };
        states[block][b] = C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal));
    }
    for s in &mut states {
        let n = s.norm();
        *s /= C64::new(n, 0.0);
    }
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    BlockEnsemble::new(raw.iter().map(|w| w / total).collect(), states)
}

/// Haar-ish random unit vector (normalized complex Gaussian).
pub fn random_pure_vector(n_qubits: usize, seed: u64, index: u64) -> DVector<C64> {
    let d = 1usize << n_qubits;
    let mut rng = rng::stream(seed, rng::stream_id(rng::TAG_STATE, n_qubits as u64, index, 1));
    let v = DVector::from_fn(d, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let n = v.norm();
    v / C64::new(n, 0.0)
}
