//! Two-point, Wightman, fidelity, generalized and Rényi-2 correlators.
//!
//! Every correlator of a pair is built from `A = O_i O_j†` with `O_i`, `O_j`
//! acting on disjoint sites. On disjoint supports `O_i† O_j = A†`, which is
//! the form used below.

use crate::error::{Error, Result};
use crate::operator::{schatten_norm, Operator, C64};
use crate::states::{tfd, tilde, DensityMatrix};

/// Imaginary parts above this (relative to `max(1, |z|)`) are reported as errors
/// for correlators that are real by construction.
pub const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelatorKind {
    TwoPoint,
    Wightman,
    Fidelity,
    FAlpha,
    CwAlpha,
    Renyi2,
    WightmanSingle,
    ReplicaN,
}

/// A correlator value together with what produced it.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CorrelatorReport {
    pub kind: CorrelatorKind,
    /// `α` for `FAlpha`/`CwAlpha`, `n` for `ReplicaN`.
    pub parameter: Option<f64>,
    pub value: f64,
    /// Imaginary part; only nonzero for `TwoPoint`.
    pub imaginary: f64,
    /// Sites of `O_i` followed by sites of `O_j`.
    pub sites: (Vec<usize>, Vec<usize>),
}

fn check_pair(rho: &DensityMatrix, o_i: &Operator, o_j: &Operator) -> Result<(Vec<usize>, Vec<usize>)> {
    rho.op().check_same_space(o_i)?;
    rho.op().check_same_space(o_j)?;
    let (si, sj) = (o_i.support(), o_j.support());
    if let Some(&site) = si.iter().find(|s| sj.contains(s)) {
        return Err(Error::OverlappingSupport { site });
    }
    Ok((si, sj))
}

fn pair_operator(rho: &DensityMatrix, o_i: &Operator, o_j: &Operator) -> Result<Operator> {
    check_pair(rho, o_i, o_j)?;
    Ok(o_i * &o_j.adjoint())
}

fn real(z: C64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL * z.norm().max(1.0) {
        return Err(Error::ImaginaryResidue { residue: z.im });
    }
    Ok(z.re)
}

fn check_alpha(alpha: f64, closed_top: bool) -> Result<()> {
    let ok = alpha > 0.0 && if closed_top { alpha <= 1.0 } else { alpha < 1.0 };
    if !ok {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            constraint: if closed_top { "alpha in (0, 1]" } else { "alpha in (0, 1)" },
        });
    }
    Ok(())
}

/// `tr(X A Y A†)` in `O(d²)` when `A` is monomial.
fn sandwich(x: &Operator, a: &Operator, y: &Operator) -> C64 {
    (x * a).trace_product(&(y * &a.adjoint()))
}

/// `tr(ρ O_i O_j†)`.
pub fn two_point(rho: &DensityMatrix, o_i: &Operator, o_j: &Operator) -> Result<C64> {
    let a = pair_operator(rho, o_i, o_j)?;
    Ok(rho.op().trace_product(&a))
}

/// `C^W(i,j) = tr(√ρ A √ρ A†)`.
pub fn wightman(rho: &DensityMatrix, o_i: &Operator, o_j: &Operator) -> Result<f64> {
    let a = pair_operator(rho, o_i, o_j)?;
    real(sandwich(rho.sqrt(), &a, rho.sqrt()))
}

/// `C^W(i,j)` as the doubled-space expectation `⟨O_i Õ_i O_j† Õ_j†⟩` in `tfd(ρ)`.
pub fn wightman_tfd(rho: &DensityMatrix, o_i: &Operator, o_j: &Operator) -> Result<f64> {
    check_pair(rho, o_i, o_j)?;
    let state = tfd(rho)?;
    let phys = o_i * &o_j.adjoint();
    let aux = &tilde(o_i) * &tilde(o_j).adjoint();
    real(state.expectation(Some(&phys), Some(&aux))?)
}

/// `F(i,j) = ‖√ρ A √ρ‖₁`.
pub fn fidelity_correlator(rho: &DensityMatrix, o_i: &Operator, o_j: &Operator) -> Result<f64> {
    let a = pair_operator(rho, o_i, o_j)?;
    schatten_norm(&(&(rho.sqrt() * &a) * rho.sqrt()), 1.0)
}

/// Uhlmann fidelity `tr √(√ρ σ √ρ)` with `σ = A ρ A†`.
pub fn fidelity_uhlmann(rho: &DensityMatrix, o_i: &Operator, o_j: &Operator) -> Result<f64> {
    let a = pair_operator(rho, o_i, o_j)?;
    let sigma = &(&a * rho.op()) * &a.adjoint();
    let inner = &(rho.sqrt() * &sigma) * rho.sqrt();
    // symmetrize away rounding before taking the square root
    let inner = (&inner + &inner.adjoint()).scale(C64::new(0.5, 0.0));
    Ok(crate::operator::matrix_power(&inner, 0.5)?.trace().re)
}

/// `F_α(i,j) = ‖ρ^{α/2} A ρ^{α/2}‖_{1/α}`, `α ∈ (0, 1]`.
pub fn f_alpha(rho: &DensityMatrix, o_i: &Operator, o_j: &Operator, alpha: f64) -> Result<f64> {
    check_alpha(alpha, true)?;
    let a = pair_operator(rho, o_i, o_j)?;
    let half = rho.power(alpha / 2.0)?;
    schatten_norm(&(&(&half * &a) * &half), 1.0 / alpha)
}

/// `C^W_α(i,j) = tr(ρ^α A ρ^{1−α} A†)`, `α ∈ (0, 1)`.
pub fn cw_alpha(rho: &DensityMatrix, o_i: &Operator, o_j: &Operator, alpha: f64) -> Result<f64> {
    check_alpha(alpha, false)?;
    let a = pair_operator(rho, o_i, o_j)?;
    real(sandwich(&rho.power(alpha)?, &a, &rho.power(1.0 - alpha)?))
}

/// `tr(ρ A ρ A†) / tr ρ²`.
pub fn renyi2_correlator(rho: &DensityMatrix, o_i: &Operator, o_j: &Operator) -> Result<f64> {
    let a = pair_operator(rho, o_i, o_j)?;
    let purity = rho.purity();
    if purity <= 1e-14 {
        return Err(Error::InvalidParameter {
            name: "purity",
            value: purity,
            constraint: "tr rho^2 > 1e-14",
        });
    }
    Ok(real(sandwich(rho.op(), &a, rho.op()))? / purity)
}

/// `tr(√ρ O √ρ O†)` for a single operator.
pub fn wightman_single(rho: &DensityMatrix, o: &Operator) -> Result<f64> {
    rho.op().check_same_space(o)?;
    real(sandwich(rho.sqrt(), o, rho.sqrt()))
}

/// `tr(ρⁿ A ρⁿ A†)`, divided by `tr ρ^{2n}` when `normalized`.
pub fn replica_wightman(rho: &DensityMatrix, o_i: &Operator, o_j: &Operator, n: f64, normalized: bool) -> Result<f64> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n,
            constraint: "n > 0",
        });
    }
    let a = pair_operator(rho, o_i, o_j)?;
    let p = rho.power(n)?;
    let value = real(sandwich(&p, &a, &p))?;
    if !normalized {
        return Ok(value);
    }
    let cut = rho.eigen().psd_cutoff();
    let norm: f64 = rho
        .eigen()
        .eigenvalues
        .iter()
        .filter(|&&l| l > cut)
        .map(|&l| l.powf(2.0 * n))
        .sum();
    Ok(value / norm)
}

/// Evaluates any pair correlator by kind. `parameter` is `α` or `n`;
/// `WightmanSingle` uses `o_i` only.
pub fn evaluate(
    kind: CorrelatorKind,
    rho: &DensityMatrix,
    o_i: &Operator,
    o_j: &Operator,
    parameter: Option<f64>,
) -> Result<CorrelatorReport> {
    let need = |name: &'static str| {
        parameter.ok_or(Error::InvalidParameter {
            name,
            value: f64::NAN,
            constraint: "required for this correlator",
        })
    };
    let mut imaginary = 0.0;
    let value = match kind {
        CorrelatorKind::TwoPoint => {
            let z = two_point(rho, o_i, o_j)?;
            imaginary = z.im;
            z.re
        }
        CorrelatorKind::Wightman => wightman(rho, o_i, o_j)?,
        CorrelatorKind::Fidelity => fidelity_correlator(rho, o_i, o_j)?,
        CorrelatorKind::FAlpha => f_alpha(rho, o_i, o_j, need("alpha")?)?,
        CorrelatorKind::CwAlpha => cw_alpha(rho, o_i, o_j, need("alpha")?)?,
        CorrelatorKind::Renyi2 => renyi2_correlator(rho, o_i, o_j)?,
        CorrelatorKind::WightmanSingle => wightman_single(rho, o_i)?,
        CorrelatorKind::ReplicaN => replica_wightman(rho, o_i, o_j, need("n")?, false)?,
    };
    let sites = match kind {
        CorrelatorKind::WightmanSingle => (o_i.support(), Vec::new()),
        _ => (o_i.support(), o_j.support()),
    };
    Ok(CorrelatorReport {
        kind,
        parameter,
        value,
        imaginary,
        sites,
    })
}
