use std::path::{Path, PathBuf};

use bandenc::matcore::MatrixSource;
use bandenc::precond::PreconditionerSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Multiplication {
    /// Form `PA` classically and encode the product.
    Classical,
    /// Encode `P` and `A` separately and multiply the encodings.
    Quantum,
    Both,
}

impl Multiplication {
    pub fn classical(self) -> bool {
        matches!(self, Self::Classical | Self::Both)
    }

    pub fn quantum(self) -> bool {
        matches!(self, Self::Quantum | Self::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of the iterative singular value estimates.
    pub spectral: f64,
    /// Diagonals whose largest entry is at most this are dropped from `PA`.
    /// `None` uses a tolerance relative to the largest entry.
    pub drop: Option<f64>,
    /// Amplification slack for the preamplification estimate.
    pub delta: f64,
    /// Target error of the preamplification estimate.
    pub epsilon: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            spectral: 1e-10,
            drop: None,
            delta: 0.5,
            epsilon: 0.01,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub sources: Vec<MatrixSource>,
    pub preconditioners: Vec<PreconditionerSpec>,
    #[serde(default = "default_multiplication")]
    pub multiplication: Multiplication,
    /// Bin widths to trim at. Empty means no trimming.
    #[serde(default)]
    pub trim_f: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Encodings up to this many qubits are emulated to cross-check `kappa_s`.
    #[serde(default)]
    pub verify_max_qubits: usize,
    #[serde(default)]
    pub output: OutputPaths,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub parallelism: usize,
}

fn default_multiplication() -> Multiplication {
    Multiplication::Classical
}

impl SweepConfig {
    pub fn new(sources: Vec<MatrixSource>, preconditioners: Vec<PreconditionerSpec>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            sources,
            preconditioners,
            multiplication: Multiplication::Classical,
            trim_f: Vec::new(),
            tolerances: Tolerances::default(),
            verify_max_qubits: 0,
            output: OutputPaths::default(),
            parallelism: 0,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.sources.is_empty() {
            return bad("at least one source is required".into());
        }
        if self.preconditioners.is_empty() {
            return bad("at least one preconditioner is required".into());
        }
        if let Some(f) = self.trim_f.iter().find(|f| !(f.is_finite() && **f >= 0.0)) {
            return bad(format!("trim_f values must be finite and >= 0, got {f}"));
        }
        let t = &self.tolerances;
        if !(t.spectral > 0.0 && t.spectral < 1.0) {
            return bad(format!("tolerances.spectral must lie in (0, 1), got {}", t.spectral));
        }
        if !(t.delta > 0.0 && t.delta < 1.0) || !(t.epsilon > 0.0 && t.epsilon < 1.0) {
            return bad("tolerances.delta and tolerances.epsilon must lie in (0, 1)".into());
        }
        if t.drop.is_some_and(|d| !(d >= 0.0)) {
            return bad("tolerances.drop must be >= 0".into());
        }
        Ok(())
    }

    /// The `f` values every classical combination is run at.
    pub fn f_values(&self) -> Vec<f64> {
        if self.trim_f.is_empty() {
            vec![0.0]
        } else {
            self.trim_f.clone()
        }
    }
}

/// Parses the shorthand used on the command line: `DS`, `CLAI`, `TPAI(2)`,
/// `SPAI(3)` or `SPAI-iterative(1)`. A missing level means 0.
pub fn parse_precon(text: &str) -> Result<PreconditionerSpec, String> {
    let t = text.trim();
    let (name, level) = match t.find('(') {
        Some(i) if t.ends_with(')') => {
            let lv = t[i + 1..t.len() - 1]
                .trim()
                .parse::<usize>()
                .map_err(|e| format!("bad infill level in {text:?}: {e}"))?;
            (&t[..i], lv)
        }
        Some(_) => return Err(format!("unbalanced parenthesis in {text:?}")),
        None => (t, 0),
    };
    match name.to_ascii_uppercase().as_str() {
        "DS" => Ok(PreconditionerSpec::Ds),
        "CLAI" => Ok(PreconditionerSpec::Clai),
        "TPAI" => Ok(PreconditionerSpec::tpai(level)),
        "SPAI" | "SPAI-COLUMN" => Ok(PreconditionerSpec::spai(level)),
        "SPAI-ITERATIVE" => Ok(PreconditionerSpec::Spai {
            method: bandenc::precond::SpaiMethod::Iterative,
            infill_level: level,
            iterations: None,
        }),
        _ => Err(format!("unknown preconditioner {text:?}")),
    }
}
