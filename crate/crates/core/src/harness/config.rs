//! Experiment configuration (TOML). Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{FourierObservable, LatticeVector};
use crate::classical::{CatMatrix, TorusMap, WindowKind, GOLDEN};
use crate::error::{Error, Result};
use crate::propagators::{metaplectic, parabolic, perturbed_cat, ParabolicVariant, Propagator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    VarianceSweep,
    EgorovGrowth,
    ClassicalRate,
    Offdiagonal,
    InequalityAudit,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::VarianceSweep => "variance-sweep",
            ExperimentKind::EgorovGrowth => "egorov-growth",
            ExperimentKind::ClassicalRate => "classical-rate",
            ExperimentKind::Offdiagonal => "offdiagonal",
            ExperimentKind::InequalityAudit => "inequality-audit",
        }
    }
}

/// One Fourier coefficient `â(n) = re + i·im`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub n: [i64; 2],
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub name: String,
    pub modes: Vec<ModeSpec>,
}

impl ObservableSpec {
    pub fn build(&self) -> Result<FourierObservable<f64>> {
        FourierObservable::real(
            self.modes.iter().map(|m| (LatticeVector::new(m.n[0], m.n[1]), Complex::new(m.re, m.im))),
        )
        .map_err(|e| Error::Config(format!("observable '{}': {e}", self.name)))
    }
}

fn default_alpha() -> f64 {
    GOLDEN
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    Cat {
        matrix: [[i64; 2]; 2],
    },
    PerturbedCat {
        matrix: [[i64; 2]; 2],
        epsilon: f64,
        g: ObservableSpec,
    },
    Parabolic {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default)]
        variant: ParabolicVariant,
    },
}

impl MapSpec {
    pub fn label(&self) -> &'static str {
        match self {
            MapSpec::Cat { .. } => "cat",
            MapSpec::PerturbedCat { .. } => "perturbed-cat",
            MapSpec::Parabolic { .. } => "parabolic",
        }
    }

    pub fn variant(&self) -> &'static str {
        match self {
            MapSpec::Cat { .. } | MapSpec::PerturbedCat { .. } => "metaplectic",
            MapSpec::Parabolic { variant, .. } => variant.as_str(),
        }
    }

    fn matrix(m: &[[i64; 2]; 2]) -> Result<CatMatrix> {
        CatMatrix::try_from(*m).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn classical(&self) -> Result<TorusMap<f64>> {
        Ok(match self {
            MapSpec::Cat { matrix } => TorusMap::cat(Self::matrix(matrix)?),
            MapSpec::PerturbedCat { matrix, epsilon, g } => TorusMap::perturbed_cat(Self::matrix(matrix)?, g.build()?, *epsilon)
                .map_err(|e| Error::Config(e.to_string()))?,
            MapSpec::Parabolic { alpha, .. } => TorusMap::parabolic(*alpha),
        })
    }

    pub fn propagator(&self, n: usize) -> Result<Propagator> {
        match self {
            MapSpec::Cat { matrix } => metaplectic(n, Self::matrix(matrix)?),
            MapSpec::PerturbedCat { matrix, epsilon, g } => perturbed_cat(n, Self::matrix(matrix)?, &g.build()?, *epsilon),
            MapSpec::Parabolic { alpha, variant } => parabolic(n, *alpha, *variant),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            MapSpec::Cat { matrix } => {
                let m = Self::matrix(matrix)?;
                if !m.has_parity() {
                    return Err(Error::Config(format!("cat matrix {m} violates the parity condition")));
                }
            }
            MapSpec::PerturbedCat { matrix, epsilon, g } => {
                let m = Self::matrix(matrix)?;
                if !m.has_parity() {
                    return Err(Error::Config(format!("cat matrix {m} violates the parity condition")));
                }
                if !(epsilon.abs() <= 0.5) {
                    return Err(Error::Config(format!("epsilon {epsilon} outside [-0.5, 0.5]")));
                }
                g.build()?;
            }
            MapSpec::Parabolic { alpha, .. } => {
                if !alpha.is_finite() {
                    return Err(Error::Config("alpha must be finite".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct WindowSpec {
    #[serde(default)]
    pub kind: WindowKind,
    /// Explicit window scales `T`.
    #[serde(default)]
    pub scales: Vec<f64>,
    /// Scales tied to the dimension, `T = N^power`.
    #[serde(default)]
    pub n_powers: Vec<f64>,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { kind: WindowKind::Fejer, scales: Vec::new(), n_powers: vec![0.5] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct EgorovSpec {
    pub t_max: i64,
}

impl Default for EgorovSpec {
    fn default() -> Self {
        EgorovSpec { t_max: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct OffdiagSpec {
    /// Shift `ε = kα` for parabolic maps, i.e. `ε_shift = kαN`.
    #[serde(default)]
    pub k: Option<i64>,
    /// Explicit `ε_shift` (phases are compared with `ε_shift/N`).
    #[serde(default)]
    pub eps_shift: Option<f64>,
    /// Window half-width; `N^{−1/2}` when absent.
    #[serde(default)]
    pub width: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ClassicalSpec {
    /// Grid side for sampled correlations of maps without closed forms.
    pub grid: usize,
}

impl Default for ClassicalSpec {
    fn default() -> Self {
        ClassicalSpec { grid: 512 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Tolerances {
    pub inequality: f64,
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { inequality: 1e-9, residual: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub plots: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: PathBuf::from("results"), plots: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CacheSpec {
    pub enabled: bool,
    pub dir: PathBuf,
}

impl Default for CacheSpec {
    fn default() -> Self {
        CacheSpec { enabled: true, dir: PathBuf::from("cache") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub n_list: Vec<usize>,
    pub map: MapSpec,
    pub observables: Vec<ObservableSpec>,
    #[serde(default)]
    pub window: WindowSpec,
    #[serde(default)]
    pub egorov: EgorovSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offdiag: Option<OffdiagSpec>,
    #[serde(default)]
    pub classical: ClassicalSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub cache: CacheSpec,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// SHA-256 of the canonical serialisation, hex encoded. Output and cache
    /// locations are left out: they do not change any number.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSpec::default();
        c.cache = CacheSpec::default();
        hex_digest(c.to_toml().as_bytes())
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(Error::Config(format!("name '{}' must be nonempty [A-Za-z0-9_-]", self.name)));
        }
        if self.kind != ExperimentKind::ClassicalRate && self.n_list.is_empty() {
            return Err(Error::Config("n-list is empty".into()));
        }
        for w in self.n_list.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config(format!("n-list must be strictly increasing ({} then {})", w[0], w[1])));
            }
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n < 8) {
            return Err(Error::Config(format!("N = {n} below the minimum 8")));
        }
        self.map.validate()?;
        if self.observables.is_empty() {
            return Err(Error::Config("at least one observable is required".into()));
        }
        for (i, o) in self.observables.iter().enumerate() {
            o.build()?;
            if self.observables[..i].iter().any(|p| p.name == o.name) {
                return Err(Error::Config(format!("duplicate observable name '{}'", o.name)));
            }
        }
        if self.window.scales.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::Config("window scales must be positive".into()));
        }
        if self.kind == ExperimentKind::ClassicalRate && self.window.scales.len() < 3 {
            return Err(Error::Config("classical-rate needs at least 3 window scales".into()));
        }
        if self.egorov.t_max < 1 {
            return Err(Error::Config("egorov t-max must be at least 1".into()));
        }
        if self.classical.grid < 64 {
            return Err(Error::Config("classical grid must be at least 64".into()));
        }
        if self.kind == ExperimentKind::Offdiagonal {
            match &self.offdiag {
                None => return Err(Error::Config("offdiagonal experiment needs an [offdiag] table".into())),
                Some(o) if o.k.is_some() == o.eps_shift.is_some() => {
                    return Err(Error::Config("[offdiag] needs exactly one of k or eps-shift".into()))
                }
                Some(o) if o.k.is_some() && !matches!(self.map, MapSpec::Parabolic { .. }) => {
                    return Err(Error::Config("[offdiag] k is only defined for parabolic maps".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// `ε_shift` for the off-diagonal window at dimension `n`, if configured.
    pub fn offdiag_shift(&self, n: usize) -> Option<f64> {
        let o = self.offdiag.as_ref()?;
        match (o.k, o.eps_shift, &self.map) {
            (Some(k), _, MapSpec::Parabolic { alpha, .. }) => Some(k as f64 * alpha * n as f64),
            (_, Some(e), _) => Some(e),
            _ => None,
        }
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
