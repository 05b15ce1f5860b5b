//! Dense operators on N-qubit Hilbert spaces.
//!
//! Basis convention: site `k` is bit `k` of the computational-basis index, so
//! site 0 is the least significant qubit. A basis state `|b⟩` has
//! `Z_k |b⟩ = (1 - 2 b_k) |b⟩`, i.e. bit value 0 is spin up.
//!
//! Matrix functions (`matrix_power`, `matrix_log`, ...) go through a Hermitian
//! eigendecomposition; singular values come from an SVD.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hermiticity tolerance (max-abs of `A - A†`).
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues down to `-PSD_TOL` are accepted as numerical zeros.
pub const PSD_TOL: f64 = 1e-10;
/// Smallest eigenvalue for which `matrix_log` is defined.
pub const LOG_FLOOR: f64 = 1e-14;
/// Largest qubit count for dense matrix functions.
pub const MAX_QUBITS: usize = 12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Matrix2<C64> {
        match self {
            Pauli::X => Matrix2::new(ZERO, ONE, ONE, ZERO),
            Pauli::Y => Matrix2::new(ZERO, -I, I, ZERO),
            Pauli::Z => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

impl FromStr for Pauli {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "X" | "x" => Ok(Pauli::X),
            "Y" | "y" => Ok(Pauli::Y),
            "Z" | "z" => Ok(Pauli::Z),
            other => Err(format!("unknown Pauli label {other:?}")),
        }
    }
}

/// `S⁺ = (X + iY)/2 = |0⟩⟨1|`; raises the number of up spins by one.
pub fn sigma_plus() -> Matrix2<C64> {
    Matrix2::new(ZERO, ONE, ZERO, ZERO)
}

/// `S⁻ = (X - iY)/2 = |1⟩⟨0|`.
pub fn sigma_minus() -> Matrix2<C64> {
    Matrix2::new(ZERO, ZERO, ONE, ZERO)
}

/// Column-wise sparse form of a matrix with at most one nonzero per column.
///
/// Column `c` maps to row `rows[c]` with coefficient `vals[c]`. Pauli strings,
/// `S±` strings and diagonal operators all have this shape, which lets
/// products and conjugations run in `O(d²)` instead of `O(d³)`.
#[derive(Debug, Clone)]
pub struct Monomial {
    rows: Vec<usize>,
    vals: Vec<C64>,
}

impl Monomial {
    fn from_matrix(m: &DMatrix<C64>) -> Option<Self> {
        let d = m.ncols();
        let mut rows = Vec::with_capacity(d);
        let mut vals = Vec::with_capacity(d);
        for c in 0..d {
            let mut hit: Option<(usize, C64)> = None;
            for (r, v) in m.column(c).iter().enumerate() {
                if *v != ZERO {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some((r, *v));
                }
            }
            let (r, v) = hit.unwrap_or((c, ZERO));
            rows.push(r);
            vals.push(v);
        }
        Some(Self { rows, vals })
    }

    /// `K ρ K†`, accumulated into `out`.
    pub(crate) fn conjugate_into(&self, rho: &DMatrix<C64>, weight: f64, out: &mut DMatrix<C64>) {
        let d = self.rows.len();
        for c2 in 0..d {
            let v2 = self.vals[c2].conj() * weight;
            if v2 == ZERO {
                continue;
            }
            let r2 = self.rows[c2];
            for c1 in 0..d {
                let v1 = self.vals[c1];
                if v1 == ZERO {
                    continue;
                }
                out[(self.rows[c1], r2)] += v1 * rho[(c1, c2)] * v2;
            }
        }
    }
}

/// A dense complex `2^N × 2^N` matrix acting on `N` qubits.
#[derive(Clone, PartialEq)]
pub struct Operator {
    n_qubits: usize,
    mat: DMatrix<C64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator({} qubits) {}", self.n_qubits, self.mat)
    }
}

fn qubits_for_dim(dim: usize) -> Option<usize> {
    (dim.is_power_of_two() && dim > 0).then(|| dim.trailing_zeros() as usize)
}

impl Operator {
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                found: mat.ncols(),
            });
        }
        let n_qubits = qubits_for_dim(mat.nrows()).ok_or(Error::NotQubitDimension { dim: mat.nrows() })?;
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { n_qubits, mat })
    }

    pub(crate) fn from_parts(n_qubits: usize, mat: DMatrix<C64>) -> Self {
        debug_assert_eq!(mat.nrows(), 1 << n_qubits);
        Self { n_qubits, mat }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        Self::from_parts(n_qubits, DMatrix::identity(d, d))
    }

    pub fn zeros(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        Self::from_parts(n_qubits, DMatrix::zeros(d, d))
    }

    pub fn from_real_diagonal(n_qubits: usize, diag: &[f64]) -> Result<Self> {
        let d = 1 << n_qubits;
        if diag.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: diag.len(),
            });
        }
        let v = DVector::from_iterator(d, diag.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(DMatrix::from_diagonal(&v))
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) state vector.
    pub fn projector(psi: &DVector<C64>) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    /// Places a 2×2 matrix on `site`, identity elsewhere.
    pub fn single_site(n_qubits: usize, site: usize, m: &Matrix2<C64>) -> Result<Self> {
        if site >= n_qubits {
            return Err(Error::SiteOutOfRange { site, n_qubits });
        }
        let d = 1 << n_qubits;
        let bit = 1 << site;
        let mut mat = DMatrix::zeros(d, d);
        for c in 0..d {
            let cb = (c >> site) & 1;
            for rb in 0..2 {
                let r = (c & !bit) | (rb << site);
                mat[(r, c)] = m[(rb, cb)];
            }
        }
        Ok(Self::from_parts(n_qubits, mat))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.n_qubits, self.mat.adjoint())
    }

    /// Entrywise complex conjugate in the computational basis.
    pub fn conjugate(&self) -> Self {
        Self::from_parts(self.n_qubits, self.mat.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_parts(self.n_qubits, &self.mat * s)
    }

    /// `lower ⊗ upper`-style tensor product: `self` keeps sites `0..n`, `upper`
    /// is placed on the following sites.
    pub fn tensor(&self, upper: &Operator) -> Self {
        Self::from_parts(self.n_qubits + upper.n_qubits, upper.mat.kronecker(&self.mat))
    }

    /// Sites on which the operator acts nontrivially.
    pub fn support(&self) -> Vec<usize> {
        let tol = 1e-12 * self.max_abs().max(1.0);
        (0..self.n_qubits)
            .filter(|&k| {
                Pauli::ALL.iter().any(|&p| {
                    let s = pauli_string(self.n_qubits, &[(k, p)]).expect("site in range");
                    (self * &s).max_abs_diff(&(&s * self)) > tol
                })
            })
            .collect()
    }

    pub fn monomial(&self) -> Option<Monomial> {
        Monomial::from_matrix(&self.mat)
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Operator) -> C64 {
        let d = self.dim();
        let mut acc = ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += self.mat[(i, j)] * other.mat[(j, i)];
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut m: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                m = m.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        m
    }

    pub fn unitarity_defect(&self) -> f64 {
        let prod = self * &self.adjoint();
        prod.max_abs_diff(&Operator::identity(self.n_qubits))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub(crate) fn check_same_space(&self, other: &Operator) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    fn hermitian_part(&self) -> DMatrix<C64> {
        (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;

    /// Matrix product with `O(d²)` fast paths when either factor is monomial.
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.n_qubits, rhs.n_qubits, "operator product on different spaces");
        let d = self.dim();
        if let Some(m) = rhs.monomial() {
            let mut out = DMatrix::zeros(d, d);
            for c in 0..d {
                if m.vals[c] != ZERO {
                    let src = self.mat.column(m.rows[c]) * m.vals[c];
                    out.set_column(c, &src);
                }
            }
            return Operator::from_parts(self.n_qubits, out);
        }
        if let Some(m) = self.monomial() {
            let mut out = DMatrix::zeros(d, d);
            for k in 0..d {
                if m.vals[k] != ZERO {
                    let src = rhs.mat.row(k) * m.vals[k];
                    let mut dst = out.row_mut(m.rows[k]);
                    dst += src;
                }
            }
            return Operator::from_parts(self.n_qubits, out);
        }
        Operator::from_parts(self.n_qubits, &self.mat * &rhs.mat)
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.n_qubits, rhs.n_qubits, "operator sum on different spaces");
        Operator::from_parts(self.n_qubits, &self.mat + &rhs.mat)
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.n_qubits, rhs.n_qubits, "operator difference on different spaces");
        Operator::from_parts(self.n_qubits, &self.mat - &rhs.mat)
    }
}

/// Tensor product of the given Paulis with identity on unlisted sites.
pub fn pauli_string(n_qubits: usize, assignments: &[(usize, Pauli)]) -> Result<Operator> {
    let mut seen = vec![None; n_qubits];
    for &(site, p) in assignments {
        if site >= n_qubits {
            return Err(Error::SiteOutOfRange { site, n_qubits });
        }
        if seen[site].is_some() {
            return Err(Error::DuplicateSite { site });
        }
        seen[site] = Some(p);
    }
    let d = 1usize << n_qubits;
    let flip_mask = seen
        .iter()
        .enumerate()
        .filter(|(_, p)| matches!(p, Some(Pauli::X | Pauli::Y)))
        .fold(0usize, |m, (k, _)| m | (1 << k));
    let mut mat = DMatrix::zeros(d, d);
    for c in 0..d {
        let mut phase = ONE;
        for (k, p) in seen.iter().enumerate() {
            let up = (c >> k) & 1 == 0;
            match p {
                Some(Pauli::Y) => phase *= if up { I } else { -I },
                Some(Pauli::Z) if !up => phase = -phase,
                _ => {}
            }
        }
        mat[(c ^ flip_mask, c)] = phase;
    }
    Ok(Operator::from_parts(n_qubits, mat))
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    n_qubits: usize,
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<C64>,
}

impl HermitianEigen {
    /// Wraps a known spectral decomposition; `eigenvalues` are sorted here.
    pub(crate) fn from_parts(n_qubits: usize, eigenvalues: Vec<f64>, eigenvectors: DMatrix<C64>) -> Self {
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let vals = order.iter().map(|&k| eigenvalues[k]).collect();
        let vecs = DMatrix::from_fn(eigenvectors.nrows(), order.len(), |r, c| eigenvectors[(r, order[c])]);
        Self {
            n_qubits,
            eigenvalues: vals,
            eigenvectors: vecs,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `V f(Λ) V†`. Columns where `f` vanishes are skipped.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Operator {
        let d = self.eigenvectors.nrows();
        let keep: Vec<(usize, f64)> = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &l)| (k, f(l)))
            .filter(|&(_, w)| w != 0.0)
            .collect();
        if keep.is_empty() {
            return Operator::zeros(self.n_qubits);
        }
        let v = DMatrix::from_fn(d, keep.len(), |r, c| self.eigenvectors[(r, keep[c].0)]);
        let mut scaled = v.clone();
        for (c, &(_, w)) in keep.iter().enumerate() {
            scaled.column_mut(c).scale_mut(w);
        }
        Operator::from_parts(self.n_qubits, scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> Operator {
        self.map(|l| l)
    }

    /// Eigenvalues with solver noise removed: anything within `64 ε λ_max`
    /// of zero (including small negatives) is treated as an exact zero.
    pub(crate) fn psd_cutoff(&self) -> f64 {
        let scale = self.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        64.0 * f64::EPSILON * scale
    }

    /// Matrix power of a PSD spectrum; see [`matrix_power`].
    pub fn power(&self, alpha: f64) -> Result<Operator> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                constraint: "alpha >= 0",
            });
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        if alpha == 0.0 {
            return Ok(Operator::identity(self.n_qubits));
        }
        let cut = self.psd_cutoff();
        Ok(self.map(|l| if l <= cut { 0.0 } else { l.powf(alpha) }))
    }
}

pub fn hermitian_eig(a: &Operator) -> Result<HermitianEigen> {
    let defect = a.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    if a.n_qubits > MAX_QUBITS {
        return Err(Error::TooLarge {
            what: "qubits",
            value: a.n_qubits,
            limit: MAX_QUBITS,
        });
    }
    let eig = SymmetricEigen::new(a.hermitian_part());
    Ok(HermitianEigen::from_parts(
        a.n_qubits,
        eig.eigenvalues.iter().copied().collect(),
        eig.eigenvectors,
    ))
}

/// `A^α` for positive semidefinite `A`.
///
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero; a more negative
/// eigenvalue is an error. `α = 0` returns the identity.
pub fn matrix_power(a: &Operator, alpha: f64) -> Result<Operator> {
    hermitian_eig(a)?.power(alpha)
}

/// Natural logarithm of a positive definite operator.
pub fn matrix_log(a: &Operator) -> Result<Operator> {
    let eig = hermitian_eig(a)?;
    let min = eig.min_eigenvalue();
    if min <= LOG_FLOOR {
        return Err(Error::RankDeficient {
            min_eigenvalue: min,
            threshold: LOG_FLOOR,
        });
    }
    Ok(eig.map(f64::ln))
}

/// `exp(t A)` for Hermitian `A`.
pub fn hermitian_exp(a: &Operator, t: f64) -> Result<Operator> {
    Ok(hermitian_eig(a)?.map(|l| (t * l).exp()))
}

pub fn singular_values(a: &Operator) -> Vec<f64> {
    let mut s: Vec<f64> = a.mat.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Schatten p-norm `(Σ s_k^p)^(1/p)`; pass `f64::INFINITY` for the operator norm.
pub fn schatten_norm(a: &Operator, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            constraint: "p >= 1",
        });
    }
    Ok(schatten_from_singular(&singular_values(a), p))
}

pub(crate) fn schatten_from_singular(s: &[f64], p: f64) -> f64 {
    let top = s.iter().fold(0.0f64, |m, &x| m.max(x));
    if top == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return top;
    }
    if p == 1.0 {
        return s.iter().sum();
    }
    top * s.iter().map(|&x| (x / top).powf(p)).sum::<f64>().powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_matrix(d: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = crate::rng::stream(seed, 0);
        DMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        })
    }

    fn random_hermitian(n: usize, seed: u64) -> Operator {
        let g = random_matrix(1 << n, seed);
        Operator::new(&g + g.adjoint()).unwrap()
    }

    fn random_psd(n: usize, seed: u64) -> Operator {
        let g = random_matrix(1 << n, seed);
        Operator::new(&g * g.adjoint()).unwrap()
    }

    fn rel_frobenius(a: &Operator, b: &Operator) -> f64 {
        (a - b).frobenius_norm() / b.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn single_z_is_diag() {
        let z = pauli_string(1, &[(0, Pauli::Z)]).unwrap();
        assert_eq!(z, Operator::from_real_diagonal(1, &[1.0, -1.0]).unwrap());
    }

    #[test]
    fn empty_string_is_identity() {
        assert_eq!(pauli_string(2, &[]).unwrap(), Operator::identity(2));
    }

    #[test]
    fn zz_on_two_qubits() {
        // basis |q1 q0⟩: 00, 01, 10, 11 -> signs (+)(+), (+)(-), (-)(+), (-)(-)
        let zz = pauli_string(2, &[(0, Pauli::Z), (1, Pauli::Z)]).unwrap();
        assert_eq!(zz, Operator::from_real_diagonal(2, &[1.0, -1.0, -1.0, 1.0]).unwrap());
    }

    #[test]
    fn pauli_string_matches_single_site_products() {
        let n = 3;
        let p = pauli_string(n, &[(0, Pauli::Y), (2, Pauli::X)]).unwrap();
        let y0 = Operator::single_site(n, 0, &Pauli::Y.matrix()).unwrap();
        let x2 = Operator::single_site(n, 2, &Pauli::X.matrix()).unwrap();
        assert!(p.max_abs_diff(&(&y0 * &x2)) < 1e-15);
    }

    #[test]
    fn pauli_string_errors() {
        assert_eq!(
            pauli_string(2, &[(2, Pauli::X)]).unwrap_err(),
            Error::SiteOutOfRange { site: 2, n_qubits: 2 }
        );
        assert_eq!(
            pauli_string(2, &[(1, Pauli::X), (1, Pauli::Z)]).unwrap_err(),
            Error::DuplicateSite { site: 1 }
        );
    }

    #[test]
    fn paulis_are_involutory_hermitian_and_commute_on_distinct_sites() {
        let n = 3;
        for p in Pauli::ALL {
            for q in Pauli::ALL {
                let a = pauli_string(n, &[(0, p), (1, q)]).unwrap();
                let b = pauli_string(n, &[(2, q)]).unwrap();
                assert_eq!(a.hermiticity_defect(), 0.0);
                assert!((&a * &a).max_abs_diff(&Operator::identity(n)) < 1e-15);
                assert!((&a * &b).max_abs_diff(&(&b * &a)) < 1e-15);
                assert!(a.is_unitary(1e-14));
            }
        }
    }

    #[test]
    fn support_detects_acting_sites() {
        let p = pauli_string(4, &[(1, Pauli::Y), (3, Pauli::Z)]).unwrap();
        assert_eq!(p.support(), vec![1, 3]);
        assert!(Operator::identity(3).support().is_empty());
        assert_eq!(Operator::single_site(3, 2, &sigma_plus()).unwrap().support(), vec![2]);
    }

    #[test]
    fn eig_of_diag_and_x() {
        let e = hermitian_eig(&Operator::from_real_diagonal(1, &[2.0, 1.0]).unwrap()).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0]);
        let x = pauli_string(1, &[(0, Pauli::X)]).unwrap();
        let e = hermitian_eig(&x).unwrap();
        assert_relative_eq!(e.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(e.eigenvalues[1], 1.0, epsilon = 1e-14);
        // eigenvector for -1 is (|0> - |1>)/sqrt 2 up to phase
        let v = e.eigenvectors.column(0);
        assert_relative_eq!((v[0] + v[1]).norm(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(v[0].norm(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = Operator::single_site(1, 0, &sigma_plus()).unwrap();
        assert!(matches!(hermitian_eig(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let a = random_hermitian(4, 11);
        let e = hermitian_eig(&a).unwrap();
        assert!(rel_frobenius(&e.reconstruct(), &a) < 1e-12);
        let v = &e.eigenvectors;
        let gram = Operator::from_parts(4, v.adjoint() * v);
        assert!(gram.max_abs_diff(&Operator::identity(4)) < 1e-12);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn power_examples() {
        let half = Operator::identity(1).scale(C64::new(0.5, 0.0));
        let r = matrix_power(&half, 0.5).unwrap();
        let expect = Operator::identity(1).scale(C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        assert!(r.max_abs_diff(&expect) < 1e-15);

        let psi = DVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let proj = Operator::projector(&psi).unwrap();
        for alpha in [0.1, 0.5, 1.0, 2.7] {
            assert!(matrix_power(&proj, alpha).unwrap().max_abs_diff(&proj) < 1e-14);
        }
        let a = random_psd(3, 5);
        let prod = &matrix_power(&a, 0.3).unwrap() * &matrix_power(&a, 0.7).unwrap();
        assert!(rel_frobenius(&prod, &a) < 1e-10);
        assert!(rel_frobenius(&matrix_power(&a, 1.0).unwrap(), &a) < 1e-12);
        let s = matrix_power(&a, 0.5).unwrap();
        assert!(rel_frobenius(&(&s * &s), &a) < 1e-10);
    }

    #[test]
    fn power_rejects_negative_spectrum() {
        let a = Operator::from_real_diagonal(1, &[1.0, -1e-6]).unwrap();
        assert!(matches!(matrix_power(&a, 0.5), Err(Error::NotPositive { .. })));
        let dust = Operator::from_real_diagonal(1, &[1.0, -1e-13]).unwrap();
        assert!(matrix_power(&dust, 0.5).is_ok());
    }

    #[test]
    fn schatten_examples() {
        let a = Operator::from_real_diagonal(1, &[3.0, 4.0]).unwrap();
        assert_relative_eq!(schatten_norm(&a, 1.0).unwrap(), 7.0, epsilon = 1e-13);
        assert_relative_eq!(schatten_norm(&a, 2.0).unwrap(), 5.0, epsilon = 1e-13);
        assert_relative_eq!(schatten_norm(&a, f64::INFINITY).unwrap(), 4.0, epsilon = 1e-13);
        let u = pauli_string(3, &[(0, Pauli::Y), (1, Pauli::X)]).unwrap();
        assert_relative_eq!(schatten_norm(&u, f64::INFINITY).unwrap(), 1.0, epsilon = 1e-13);
        assert!(matches!(schatten_norm(&a, 0.5), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn log_examples() {
        assert!(matrix_log(&Operator::identity(2)).unwrap().max_abs() < 1e-15);
        let e = std::f64::consts::E;
        let a = Operator::from_real_diagonal(1, &[e, e * e]).unwrap();
        let l = matrix_log(&a).unwrap();
        assert!(l.max_abs_diff(&Operator::from_real_diagonal(1, &[1.0, 2.0]).unwrap()) < 1e-14);
        let singular = Operator::from_real_diagonal(1, &[1.0, 0.0]).unwrap();
        assert!(matches!(matrix_log(&singular), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn log_of_thermal_state_is_shifted_hamiltonian() {
        let h = random_hermitian(3, 21);
        let beta = 0.7;
        let w = hermitian_exp(&h, -beta).unwrap();
        let z = w.trace().re;
        let rho = w.scale(C64::new(1.0 / z, 0.0));
        let modular = matrix_log(&rho).unwrap().scale(C64::new(-1.0, 0.0));
        // -ln ρ = βH + ln Z · I
        let expect = &h.scale(C64::new(beta, 0.0)) + &Operator::identity(3).scale(C64::new(z.ln(), 0.0));
        assert!(modular.max_abs_diff(&expect) < 1e-10);
        let comm = &(&modular * &h) - &(&h * &modular);
        assert!(comm.max_abs() < 1e-9);
        let round = hermitian_exp(&matrix_log(&rho).unwrap(), 1.0).unwrap();
        assert!(round.max_abs_diff(&rho) < 1e-10);
    }

    #[test]
    fn monomial_fast_paths_match_dense() {
        let a = Operator::new(random_matrix(8, 3)).unwrap();
        let p = pauli_string(3, &[(0, Pauli::Y), (2, Pauli::Z)]).unwrap();
        let sp = Operator::single_site(3, 1, &sigma_plus()).unwrap();
        for m in [&p, &sp] {
            let dense_r = Operator::from_parts(3, a.matrix() * m.matrix());
            let dense_l = Operator::from_parts(3, m.matrix() * a.matrix());
            assert!((&a * m).max_abs_diff(&dense_r) < 1e-13);
            assert!((m * &a).max_abs_diff(&dense_l) < 1e-13);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn power_semigroup(seed in 0u64..1000, a in 0.0f64..2.0, b in 0.0f64..2.0) {
            let m = random_psd(3, seed);
            let lhs = &matrix_power(&m, a).unwrap() * &matrix_power(&m, b).unwrap();
            let rhs = matrix_power(&m, a + b).unwrap();
            prop_assert!(rel_frobenius(&lhs, &rhs) < 1e-10);
        }

        #[test]
        fn schatten_is_non_increasing_in_p(seed in 0u64..1000) {
            let a = Operator::new(random_matrix(8, seed)).unwrap();
            let ps: Vec<f64> = (0..20).map(|k| 1.0 + 0.5 * k as f64).collect();
            let norms: Vec<f64> = ps.iter().map(|&p| schatten_norm(&a, p).unwrap()).collect();
            for w in norms.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
            }
            prop_assert!(schatten_norm(&a, f64::INFINITY).unwrap() <= norms[19] * (1.0 + 1e-12));
        }

        #[test]
        fn holder_inequality(seed in 0u64..1000, p in 1.05f64..8.0) {
            let q = p / (p - 1.0);
            let a = Operator::new(random_matrix(8, seed)).unwrap();
            let b = Operator::new(random_matrix(8, seed + 7919)).unwrap();
            let lhs = schatten_norm(&(&a * &b), 1.0).unwrap();
            let rhs = schatten_norm(&a, p).unwrap() * schatten_norm(&b, q).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
