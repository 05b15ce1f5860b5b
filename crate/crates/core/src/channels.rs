//! Kraus channels stored over the full Hilbert space.

use nalgebra::{DMatrix, Matrix2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::operator::{pauli_string, Monomial, Operator, Pauli, C64, HERMITIAN_TOL};
use crate::rng;
use crate::states::{DensityMatrix, SYMMETRY_TOL};

/// A completely positive trace-preserving map `ρ ↦ Σ K ρ K†`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus: Vec<Operator>,
    support: Vec<usize>,
    fast: Vec<Option<Monomial>>,
}

impl KrausChannel {
    /// Validates completeness `Σ K†K = I` to `1e-10`.
    pub fn new(kraus: Vec<Operator>, mut support: Vec<usize>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::IncompleteKraus { defect: 1.0 })?;
        let n = first.n_qubits();
        for k in &kraus {
            first.check_same_space(k)?;
        }
        if let Some(&site) = support.iter().find(|&&s| s >= n) {
            return Err(Error::SiteOutOfRange { site, n_qubits: n });
        }
        support.sort_unstable();
        support.dedup();
        let mut sum = Operator::zeros(n);
        for k in &kraus {
            sum = &sum + &(&k.adjoint() * k);
        }
        let defect = sum.max_abs_diff(&Operator::identity(n));
        if defect > HERMITIAN_TOL {
            return Err(Error::IncompleteKraus { defect });
        }
        let fast = kraus.iter().map(Operator::monomial).collect();
        Ok(Self { kraus, support, fast })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::new(vec![Operator::identity(n_qubits)], vec![]).expect("identity is complete")
    }

    pub fn kraus_ops(&self) -> &[Operator] {
        &self.kraus
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn n_qubits(&self) -> usize {
        self.kraus[0].n_qubits()
    }

    /// `Σ K X K†` on an arbitrary operator, without validating the output.
    pub fn apply_operator(&self, x: &Operator) -> Result<Operator> {
        self.kraus[0].check_same_space(x)?;
        let d = x.dim();
        let mut out = DMatrix::zeros(d, d);
        for (k, fast) in self.kraus.iter().zip(&self.fast) {
            match fast {
                Some(m) => m.conjugate_into(x.matrix(), 1.0, &mut out),
                None => out += (&(k * x) * &k.adjoint()).into_matrix(),
            }
        }
        Ok(Operator::from_parts(x.n_qubits(), out))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.apply_operator(rho.op())?)
    }
}

/// Applies channels in order, validating the density matrix once at the end.
pub fn apply_all(channels: &[KrausChannel], rho: &DensityMatrix) -> Result<DensityMatrix> {
    let mut x = rho.op().clone();
    for ch in channels {
        x = ch.apply_operator(&x)?;
    }
    DensityMatrix::new(x)
}

fn check_probability(name: &'static str, value: f64, max: f64, constraint: &'static str) -> Result<()> {
    if !(value.is_finite() && (0.0..=max).contains(&value)) {
        return Err(Error::InvalidParameter { name, value, constraint });
    }
    Ok(())
}

/// `ρ ↦ (1 − p) ρ + p Z_i Z_j ρ Z_j Z_i`.
pub fn ising_decoherence_channel(n_qubits: usize, i: usize, j: usize, p: f64) -> Result<KrausChannel> {
    check_probability("p", p, 0.5, "p in [0, 1/2]")?;
    if i == j {
        return Err(Error::DuplicateSite { site: i });
    }
    let zz = pauli_string(n_qubits, &[(i, Pauli::Z), (j, Pauli::Z)])?;
    KrausChannel::new(
        vec![
            Operator::identity(n_qubits).scale(C64::new((1.0 - p).sqrt(), 0.0)),
            zz.scale(C64::new(p.sqrt(), 0.0)),
        ],
        vec![i, j],
    )
}

/// One Ising channel per bond.
pub fn ising_decoherence_layer(n_qubits: usize, bonds: &[(usize, usize)], p: f64) -> Result<Vec<KrausChannel>> {
    bonds
        .iter()
        .map(|&(i, j)| ising_decoherence_channel(n_qubits, i, j, p))
        .collect()
}

/// `ρ ↦ (1 − q) ρ + q Z_k ρ Z_k`.
pub fn dephasing_channel(n_qubits: usize, site: usize, q: f64) -> Result<KrausChannel> {
    check_probability("q", q, 1.0, "q in [0, 1]")?;
    let z = pauli_string(n_qubits, &[(site, Pauli::Z)])?;
    KrausChannel::new(
        vec![
            Operator::identity(n_qubits).scale(C64::new((1.0 - q).sqrt(), 0.0)),
            z.scale(C64::new(q.sqrt(), 0.0)),
        ],
        vec![site],
    )
}

/// Single-site Z dephasing on every qubit.
pub fn dephasing_layer(n_qubits: usize, q: f64) -> Result<Vec<KrausChannel>> {
    (0..n_qubits).map(|k| dephasing_channel(n_qubits, k, q)).collect()
}

/// `ρ ↦ (1 − ε²/2) ρ + ε²/4 O† ρ O + ε²/4 O ρ O†` for a unitary single-site `O`.
pub fn charge_perturbation_channel(n_qubits: usize, site: usize, o: &Matrix2<C64>, eps: f64) -> Result<KrausChannel> {
    check_probability("epsilon", eps, 1.0, "epsilon in [0, 1]")?;
    let op = Operator::single_site(n_qubits, site, o)?;
    let defect = op.unitarity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotUnitary { defect });
    }
    let half = C64::new(eps / 2.0, 0.0);
    KrausChannel::new(
        vec![
            Operator::identity(n_qubits).scale(C64::new((1.0 - eps * eps / 2.0).sqrt(), 0.0)),
            op.scale(half),
            op.adjoint().scale(half),
        ],
        vec![site],
    )
}

/// `ρ ↦ (1 − α) ρ + α A ρ A†` with `A = O_i O_j†` unitary.
pub fn mixture_channel(o_i: &Operator, o_j: &Operator, alpha: f64) -> Result<KrausChannel> {
    check_probability("alpha", alpha, 1.0, "alpha in [0, 1]")?;
    o_i.check_same_space(o_j)?;
    let a = o_i * &o_j.adjoint();
    let defect = a.unitarity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotUnitary { defect });
    }
    let n = a.n_qubits();
    KrausChannel::new(
        vec![
            Operator::identity(n).scale(C64::new((1.0 - alpha).sqrt(), 0.0)),
            a.scale(C64::new(alpha.sqrt(), 0.0)),
        ],
        (0..n).collect(),
    )
}

/// Random channel with `n_kraus` operators from a seeded Gaussian isometry.
pub fn random_channel(n_qubits: usize, n_kraus: usize, seed: u64) -> Result<KrausChannel> {
    if n_kraus == 0 {
        return Err(Error::InvalidParameter {
            name: "n_kraus",
            value: 0.0,
            constraint: ">= 1",
        });
    }
    let d = 1usize << n_qubits;
    let mut rng = rng::stream(seed, rng::stream_id(rng::TAG_STATE, n_qubits as u64, n_kraus as u64, 2));
    let g = DMatrix::from_fn(d * n_kraus, d, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let v = g.qr().q();
    let kraus = (0..n_kraus)
        .map(|k| Operator::from_parts(n_qubits, v.rows(k * d, d).into_owned()))
        .collect();
    KrausChannel::new(kraus, (0..n_qubits).collect())
}

/// Per-Kraus covariance: every `K` satisfies `U K U† = e^{iφ_K} K` to `1e-8`.
pub fn is_strongly_symmetric_channel(ch: &KrausChannel, u: &Operator) -> Result<bool> {
    ch.kraus[0].check_same_space(u)?;
    for k in &ch.kraus {
        let rotated = &(u * k) * &u.adjoint();
        let km = k.matrix();
        let Some((at, _)) = km
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .filter(|(_, z)| z.norm() > 0.0)
        else {
            continue;
        };
        let phase = rotated.matrix()[at] / km[at];
        let phase = phase / phase.norm();
        if rotated.max_abs_diff(&k.scale(phase)) > SYMMETRY_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}
