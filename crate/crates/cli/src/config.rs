//! Experiment configuration and validation.

use std::fmt;

use nalgebra::Matrix2;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use swssb::exec::Execution;
use swssb::operator::{sigma_minus, sigma_plus, Pauli, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    BoundsFuzz,
    TfdCheck,
    SpinGlass,
    ThermalScan,
    DecoheredIsingExact,
    RbimMc,
    Susceptibility,
    EntropyResponse,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::BoundsFuzz,
        Kind::TfdCheck,
        Kind::SpinGlass,
        Kind::ThermalScan,
        Kind::DecoheredIsingExact,
        Kind::RbimMc,
        Kind::Susceptibility,
        Kind::EntropyResponse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::BoundsFuzz => "bounds-fuzz",
            Kind::TfdCheck => "tfd-check",
            Kind::SpinGlass => "spin-glass",
            Kind::ThermalScan => "thermal-scan",
            Kind::DecoheredIsingExact => "decohered-ising-exact",
            Kind::RbimMc => "rbim-mc",
            Kind::Susceptibility => "susceptibility",
            Kind::EntropyResponse => "entropy-response",
        }
    }

    /// Kinds that always draw random numbers. `spin-glass` needs a seed only
    /// for the random ensemble.
    pub fn seeded(self) -> bool {
        matches!(
            self,
            Kind::BoundsFuzz | Kind::TfdCheck | Kind::RbimMc | Kind::EntropyResponse
        )
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<Kind>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub execution: Execution,
    #[serde(default)]
    pub params: toml::Table,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OpName {
    X,
    Y,
    Z,
    #[serde(rename = "S+")]
    SPlus,
    #[serde(rename = "S-")]
    SMinus,
}

impl OpName {
    pub fn matrix(self) -> Matrix2<C64> {
        match self {
            OpName::X => Pauli::X.matrix(),
            OpName::Y => Pauli::Y.matrix(),
            OpName::Z => Pauli::Z.matrix(),
            OpName::SPlus => sigma_plus(),
            OpName::SMinus => sigma_minus(),
        }
    }
}

// per-kind parameter tables --------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsFuzz {
    pub n_qubits: Vec<usize>,
    pub cases: usize,
}

impl Default for BoundsFuzz {
    fn default() -> Self {
        Self {
            n_qubits: vec![2, 3, 4],
            cases: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TfdCheck {
    pub n_qubits: Vec<usize>,
    /// Random states per qubit count.
    pub cases: usize,
}

impl Default for TfdCheck {
    fn default() -> Self {
        Self {
            n_qubits: vec![2, 3, 4],
            cases: 34,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    /// `λ|GHZ+⟩⟨GHZ+| + (1−λ)|GHZ−⟩⟨GHZ−|`.
    Ghz,
    /// The single product state `|+…+⟩`.
    Product,
    /// Random orthonormal states supported on disjoint basis blocks.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpinGlass {
    pub n_qubits: usize,
    pub ensemble: EnsembleKind,
    pub blocks: usize,
    pub weight_plus: f64,
    pub operator: OpName,
    pub alphas: Vec<f64>,
}

impl Default for SpinGlass {
    fn default() -> Self {
        Self {
            n_qubits: 4,
            ensemble: EnsembleKind::Ghz,
            blocks: 3,
            weight_plus: 0.5,
            operator: OpName::Z,
            alphas: vec![0.25, 0.5, 0.75],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    U1,
    Z2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermalScan {
    pub n_sites: usize,
    pub j: f64,
    pub h: f64,
    pub betas: Vec<f64>,
    pub symmetry: Symmetry,
    /// U(1) sector (up spins); defaults to half filling.
    pub charge: Option<usize>,
    /// Z2 sector.
    pub even: bool,
    /// Defaults to S+ for U(1) and Z for Z2.
    pub operator: Option<OpName>,
    /// Defaults to the end-to-end pair.
    pub pairs: Option<Vec<[usize; 2]>>,
}

impl Default for ThermalScan {
    fn default() -> Self {
        Self {
            n_sites: 8,
            j: 0.5,
            h: 1.0,
            betas: vec![1.0, 2.0, 4.0],
            symmetry: Symmetry::U1,
            charge: None,
            even: true,
            operator: None,
            pairs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecoheredIsing {
    pub l: usize,
    pub periodic: bool,
    pub p_grid: Vec<f64>,
    /// Defaults to every pair `i < j`.
    pub pairs: Option<Vec<[usize; 2]>>,
    /// Compare with the exact RBIM candidates.
    pub replica_check: bool,
}

impl Default for DecoheredIsing {
    fn default() -> Self {
        Self {
            l: 2,
            periodic: false,
            p_grid: vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45],
            pairs: None,
            replica_check: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RbimMc {
    pub sizes: Vec<usize>,
    pub p_grid: Vec<f64>,
    pub samples: usize,
    pub sweeps: usize,
    pub thermalization: usize,
    pub bootstrap: usize,
    pub periodic: bool,
}

impl Default for RbimMc {
    fn default() -> Self {
        Self {
            sizes: vec![8, 12, 16],
            p_grid: vec![0.05, 0.075, 0.1, 0.125, 0.15, 0.175, 0.2],
            samples: 200,
            sweeps: 10_000,
            thermalization: 2_000,
            bootstrap: 200,
            periodic: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    /// Maximally mixed state of the even `∏X` sector.
    Even,
    /// Canonical thermal state of the staggered XX chain.
    ThermalXx,
    /// Even-sector thermal state of the classical Ising chain.
    ThermalIsing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Susceptibility {
    pub state: StateKind,
    pub n_sites: usize,
    pub site: usize,
    /// Defaults to S+ for the XX chain and Z otherwise.
    pub operator: Option<OpName>,
    pub epsilons: Vec<f64>,
    pub beta: f64,
    pub j: f64,
    pub h: f64,
}

impl Default for Susceptibility {
    fn default() -> Self {
        Self {
            state: StateKind::Even,
            n_sites: 4,
            site: 0,
            operator: None,
            epsilons: vec![0.001, 0.002, 0.004],
            beta: 1.0,
            j: 0.5,
            h: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropyResponse {
    pub n_qubits: usize,
    pub cases: usize,
}

impl Default for EntropyResponse {
    fn default() -> Self {
        Self { n_qubits: 3, cases: 10 }
    }
}

/// Parsed parameters of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    BoundsFuzz(BoundsFuzz),
    TfdCheck(TfdCheck),
    SpinGlass(SpinGlass),
    ThermalScan(ThermalScan),
    DecoheredIsing(DecoheredIsing),
    RbimMc(RbimMc),
    Susceptibility(Susceptibility),
    EntropyResponse(EntropyResponse),
}

fn parse<P: DeserializeOwned>(table: &toml::Table) -> Result<P, Violation> {
    toml::Value::Table(table.clone()).try_into().map_err(|e: toml::de::Error| Violation {
        field: "params".into(),
        message: e.message().trim().to_string(),
    })
}

impl Params {
    pub fn needs_seed(&self) -> bool {
        match self {
            Params::SpinGlass(p) => p.ensemble == EnsembleKind::Random,
            Params::BoundsFuzz(_) | Params::TfdCheck(_) | Params::RbimMc(_) | Params::EntropyResponse(_) => true,
            _ => false,
        }
    }

    pub fn parse(kind: Kind, table: &toml::Table) -> Result<Self, Violation> {
        Ok(match kind {
            Kind::BoundsFuzz => Params::BoundsFuzz(parse(table)?),
            Kind::TfdCheck => Params::TfdCheck(parse(table)?),
            Kind::SpinGlass => Params::SpinGlass(parse(table)?),
            Kind::ThermalScan => Params::ThermalScan(parse(table)?),
            Kind::DecoheredIsingExact => Params::DecoheredIsing(parse(table)?),
            Kind::RbimMc => Params::RbimMc(parse(table)?),
            Kind::Susceptibility => Params::Susceptibility(parse(table)?),
            Kind::EntropyResponse => Params::EntropyResponse(parse(table)?),
        })
    }
}

// validation -----------------------------------------------------------------

/// Resource ceilings enforced before any work starts.
pub mod limits {
    pub const FUZZ_QUBITS: usize = 8;
    pub const TFD_QUBITS: usize = swssb::states::MAX_TFD_QUBITS;
    pub const SPIN_GLASS_QUBITS: usize = 8;
    pub const THERMAL_SITES: usize = 10;
    pub const EXACT_LATTICE_SITES: usize = swssb::diagnostics::MAX_EXACT_LATTICE_SITES;
    pub const MC_SIDE: usize = 128;
    pub const SUSCEPTIBILITY_SITES: usize = swssb::diagnostics::MAX_PERTURBED_QUBITS;
    pub const ENTROPY_QUBITS: usize = 6;
}

#[derive(Default)]
struct Report(Vec<Violation>);

impl Report {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }

    fn check(&mut self, ok: bool, field: &str, message: impl Into<String>) {
        if !ok {
            self.push(field, message);
        }
    }

    fn grid(&mut self, field: &str, grid: &[f64]) {
        if grid.is_empty() {
            self.push(field, "grid must be non-empty");
        }
        for (k, w) in grid.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                self.push(format!("{field}[{}]", k + 1), "grid must be strictly increasing");
            }
        }
        for (k, v) in grid.iter().enumerate() {
            if !v.is_finite() {
                self.push(format!("{field}[{k}]"), "must be finite");
            }
        }
    }

    fn p_grid(&mut self, field: &str, grid: &[f64], open_zero: bool) {
        self.grid(field, grid);
        for (k, &p) in grid.iter().enumerate() {
            let ok = if open_zero { p > 0.0 && p <= 0.5 } else { (0.0..=0.5).contains(&p) };
            if !ok {
                self.push(
                    format!("{field}[{k}] = {p}"),
                    if open_zero { "p ∈ (0, 1/2]" } else { "p ∈ [0, 1/2]" },
                );
            }
        }
    }

    fn qubits(&mut self, field: &str, n: usize, min: usize, max: usize) {
        if n < min {
            self.push(format!("{field} = {n}"), format!("at least {min} required"));
        }
        if n > max {
            self.push(format!("{field} = {n}"), format!("exceeds the resource ceiling of {max}"));
        }
    }

    fn pairs(&mut self, field: &str, pairs: &[[usize; 2]], n: usize) {
        if pairs.is_empty() {
            self.push(field, "at least one pair required");
        }
        for (k, &[i, j]) in pairs.iter().enumerate() {
            if i >= n || j >= n {
                self.push(format!("{field}[{k}]"), format!("sites must be below {n}"));
            } else if i == j {
                self.push(format!("{field}[{k}]"), "sites must differ");
            }
        }
    }
}

/// Violations that prevent `config` from running as `kind`; empty iff the run would start.
pub fn validate(config: &ExperimentConfig, kind: Option<Kind>) -> Vec<Violation> {
    let mut r = Report::default();
    let kind = match (kind, config.kind) {
        (Some(k), Some(c)) if k != c => {
            r.push("kind", format!("config is for {c} but {k} was requested"));
            return r.0;
        }
        (Some(k), _) | (None, Some(k)) => k,
        (None, None) => {
            r.push("kind", "kind required");
            return r.0;
        }
    };
    let params = match Params::parse(kind, &config.params) {
        Ok(p) => p,
        Err(v) => {
            if kind.seeded() && config.seed.is_none() {
                r.push("seed", "seed required");
            }
            r.0.push(v);
            return r.0;
        }
    };
    if params.needs_seed() && config.seed.is_none() {
        r.push("seed", "seed required");
    }
    match &params {
        Params::BoundsFuzz(p) => {
            r.check(!p.n_qubits.is_empty(), "params.n_qubits", "at least one qubit count required");
            for &n in &p.n_qubits {
                r.qubits("params.n_qubits", n, 2, limits::FUZZ_QUBITS);
            }
            r.check(p.cases > 0, "params.cases", "at least one case required");
        }
        Params::TfdCheck(p) => {
            r.check(!p.n_qubits.is_empty(), "params.n_qubits", "at least one qubit count required");
            for &n in &p.n_qubits {
                r.qubits("params.n_qubits", n, 2, limits::TFD_QUBITS);
            }
            r.check(p.cases > 0, "params.cases", "at least one case required");
        }
        Params::SpinGlass(p) => {
            r.qubits("params.n_qubits", p.n_qubits, 2, limits::SPIN_GLASS_QUBITS);
            r.check(
                (0.0..=1.0).contains(&p.weight_plus),
                "params.weight_plus",
                "weight ∈ [0, 1]",
            );
            if p.ensemble == EnsembleKind::Random {
                r.check(
                    p.blocks >= 1 && p.blocks <= 1 << p.n_qubits.min(limits::SPIN_GLASS_QUBITS),
                    "params.blocks",
                    "1 <= blocks <= 2^N",
                );
            }
            r.grid("params.alphas", &p.alphas);
            for (k, &a) in p.alphas.iter().enumerate() {
                if !(a > 0.0 && a < 1.0) {
                    r.push(format!("params.alphas[{k}] = {a}"), "α ∈ (0,1)");
                }
            }
        }
        Params::ThermalScan(p) => {
            r.qubits("params.n_sites", p.n_sites, 2, limits::THERMAL_SITES);
            r.grid("params.betas", &p.betas);
            for (k, &b) in p.betas.iter().enumerate() {
                if b < 0.0 {
                    r.push(format!("params.betas[{k}] = {b}"), "β >= 0");
                }
            }
            if let Some(q) = p.charge {
                r.check(
                    q >= 1 && q < p.n_sites,
                    "params.charge",
                    "1 <= charge < n_sites (both neighbouring sectors must exist)",
                );
            }
            if let Some(pairs) = &p.pairs {
                r.pairs("params.pairs", pairs, p.n_sites);
            }
            r.check(p.j.is_finite() && p.h.is_finite(), "params.j/h", "must be finite");
        }
        Params::DecoheredIsing(p) => {
            r.check(p.l >= 2, "params.l", "L >= 2");
            r.check(
                p.l * p.l <= limits::EXACT_LATTICE_SITES,
                "params.l",
                format!("L² = {} exceeds the resource ceiling of {} qubits", p.l * p.l, limits::EXACT_LATTICE_SITES),
            );
            r.p_grid("params.p_grid", &p.p_grid, false);
            if let Some(pairs) = &p.pairs {
                r.pairs("params.pairs", pairs, p.l * p.l);
            }
        }
        Params::RbimMc(p) => {
            r.check(p.sizes.len() >= 2, "params.sizes", "at least two lattice sizes");
            for (k, w) in p.sizes.windows(2).enumerate() {
                if w[1] <= w[0] {
                    r.push(format!("params.sizes[{}]", k + 1), "sizes must be strictly increasing");
                }
            }
            for &l in &p.sizes {
                r.qubits("params.sizes", l, 2, limits::MC_SIDE);
            }
            r.p_grid("params.p_grid", &p.p_grid, true);
            r.check(p.p_grid.len() >= 2, "params.p_grid", "at least two grid points");
            r.check(p.thermalization > 0, "params.thermalization", "thermalization > 0");
            r.check(
                p.sweeps > p.thermalization,
                "params.sweeps",
                format!("sweeps ({}) must exceed thermalization ({})", p.sweeps, p.thermalization),
            );
            r.check(p.samples >= 2, "params.samples", "at least two disorder samples");
            r.check(p.bootstrap >= 2, "params.bootstrap", "at least two bootstrap resamples");
        }
        Params::Susceptibility(p) => {
            r.qubits("params.n_sites", p.n_sites, 2, limits::SUSCEPTIBILITY_SITES);
            r.check(p.site < p.n_sites, "params.site", "site must be below n_sites");
            r.grid("params.epsilons", &p.epsilons);
            r.check(p.beta >= 0.0, "params.beta", "β >= 0");
        }
        Params::EntropyResponse(p) => {
            r.qubits("params.n_qubits", p.n_qubits, 2, limits::ENTROPY_QUBITS);
            r.check(p.cases > 0, "params.cases", "at least one case required");
        }
    }
    r.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(text).unwrap()
    }

    #[test]
    fn defaults_validate_with_a_seed() {
        for kind in Kind::ALL {
            let c = ExperimentConfig {
                seed: Some(1),
                ..Default::default()
            };
            assert!(validate(&c, Some(kind)).is_empty(), "{kind}");
        }
    }

    #[test]
    fn spec_messages() {
        let v = validate(&cfg("kind = \"bounds-fuzz\""), None);
        assert_eq!(v[0].message, "seed required");
        let v = validate(&cfg("kind = \"spin-glass\"\nseed = 1\n[params]\nalphas = [0.0, 0.5]"), None);
        assert!(v.iter().any(|x| x.message == "α ∈ (0,1)"));
        let v = validate(&cfg("kind = \"decohered-ising-exact\"\n[params]\np_grid = [0.1, 0.6]"), None);
        assert!(v.iter().any(|x| x.message == "p ∈ [0, 1/2]" && x.field.contains("0.6")));
        let v = validate(&cfg("kind = \"rbim-mc\"\nseed = 1\n[params]\nsweeps = 100\nthermalization = 500"), None);
        assert!(v.iter().any(|x| x.field == "params.sweeps"));
    }

    #[test]
    fn unknown_fields_and_ceilings() {
        let v = validate(&cfg("kind = \"tfd-check\"\nseed = 1\n[params]\nqubits = [2]"), None);
        assert_eq!(v[0].field, "params");
        assert!(v[0].message.contains("qubits"));
        let v = validate(&cfg("kind = \"decohered-ising-exact\"\n[params]\nl = 4"), None);
        assert!(v[0].message.contains("ceiling"));
        assert!(ExperimentConfig::from_toml("kind = \"nope\"").is_err());
        let v = validate(&cfg("kind = \"tfd-check\"\nseed = 1"), Some(Kind::RbimMc));
        assert_eq!(v[0].field, "kind");
    }
}
