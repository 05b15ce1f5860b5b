//! Hamiltonians and charge-sector spectra for the thermal examples.

use crate::error::Result;
use crate::operator::{pauli_string, Operator, Pauli, C64};
use crate::states::{charge_sector_projector, parity_sector_projector, sector_spectrum};

/// Open XX chain with a staggered longitudinal field,
/// `H = (J/2) Σ (X_k X_{k+1} + Y_k Y_{k+1}) + h Σ (−1)^k Z_k`.
///
/// Conserves the number of up spins; the staggered field opens a charge gap
/// at half filling.
pub fn staggered_xx_chain(n: usize, j: f64, h: f64) -> Result<Operator> {
    let mut out = Operator::zeros(n);
    for k in 0..n.saturating_sub(1) {
        for p in [Pauli::X, Pauli::Y] {
            let term = pauli_string(n, &[(k, p), (k + 1, p)])?;
            out = &out + &term.scale(C64::new(j / 2.0, 0.0));
        }
    }
    for k in 0..n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out = &out + &pauli_string(n, &[(k, Pauli::Z)])?.scale(C64::new(sign * h, 0.0));
    }
    Ok(out)
}

/// Classical open Ising chain `H = −J Σ Z_k Z_{k+1}` (commutes with `∏X`).
pub fn classical_ising_chain(n: usize, j: f64) -> Result<Operator> {
    let mut out = Operator::zeros(n);
    for k in 0..n.saturating_sub(1) {
        out = &out + &pauli_string(n, &[(k, Pauli::Z), (k + 1, Pauli::Z)])?.scale(C64::new(-j, 0.0));
    }
    Ok(out)
}

/// Ground energy of `H` in the sector with `charge` up spins.
pub fn sector_ground_energy(h: &Operator, charge: usize) -> Result<f64> {
    let (e, _) = sector_spectrum(h, &charge_sector_projector(h.n_qubits(), charge))?;
    Ok(e[0])
}

/// Charge gap and chemical potential around a filling `q0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ChargeGap {
    pub charge: usize,
    /// `E0(q0)`.
    pub ground_energy: f64,
    /// Mean cost of adding or removing one charge, `½[(E0(q0+1) − E0(q0)) + (E0(q0−1) − E0(q0))]`.
    pub delta: f64,
    /// `(E0(q0+1) − E0(q0−1))/2`, which centres the grand-canonical ensemble on `q0`.
    pub mu: f64,
}

/// Requires `1 ≤ q0 < N`.
pub fn charge_gap(h: &Operator, q0: usize) -> Result<ChargeGap> {
    let e0 = sector_ground_energy(h, q0)?;
    let up = sector_ground_energy(h, q0 + 1)?;
    let down = sector_ground_energy(h, q0.checked_sub(1).ok_or(crate::Error::EmptySector)?)?;
    Ok(ChargeGap {
        charge: q0,
        ground_energy: e0,
        delta: 0.5 * ((up - e0) + (down - e0)),
        mu: 0.5 * (up - down),
    })
}

/// Lowest energies in the even and odd `∏X` sectors, and their difference.
pub fn parity_gap(h: &Operator) -> Result<(f64, f64)> {
    let n = h.n_qubits();
    let (even, _) = sector_spectrum(h, &parity_sector_projector(n, true))?;
    let (odd, _) = sector_spectrum(h, &parity_sector_projector(n, false))?;
    Ok((even[0], odd[0]))
}
