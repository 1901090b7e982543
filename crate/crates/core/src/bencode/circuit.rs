//! Gate-level circuit representation shared by the encoders, the emulator
//! and the trimming passes.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Condition on a set of control qubits. Bit `i` of `bits` and `care` refers
/// to `qubits[i]`; a cleared `care` bit means "don't care".
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct ControlPattern {
    pub qubits: Vec<usize>,
    pub bits: u64,
    pub care: u64,
}

impl ControlPattern {
    pub fn none() -> Self {
        Self::default()
    }

    /// All `qubits` must hold the little-endian integer `value`.
    pub fn value(qubits: Vec<usize>, value: u64) -> Self {
        let care = mask(qubits.len());
        Self {
            qubits,
            bits: value & care,
            care,
        }
    }

    /// Concatenates two patterns on disjoint qubits.
    pub fn and(&self, other: &Self) -> Self {
        let shift = self.qubits.len();
        let mut qubits = self.qubits.clone();
        qubits.extend_from_slice(&other.qubits);
        Self {
            qubits,
            bits: self.bits | (other.bits << shift),
            care: self.care | (other.care << shift),
        }
    }

    /// Number of qubits that actually condition the gate.
    pub fn weight(&self) -> u32 {
        self.care.count_ones()
    }

    /// `(mask, value)` over the full register of basis-state indices.
    pub fn index_mask(&self) -> (u64, u64) {
        let mut m = 0u64;
        let mut v = 0u64;
        for (i, &q) in self.qubits.iter().enumerate() {
            if self.care >> i & 1 == 1 {
                m |= 1 << q;
                v |= (self.bits >> i & 1) << q;
            }
        }
        (m, v)
    }

    /// Pattern string, most significant control first, `.` for don't care.
    pub fn render(&self) -> String {
        (0..self.qubits.len())
            .rev()
            .map(|i| match (self.care >> i & 1, self.bits >> i & 1) {
                (0, _) => '.',
                (_, 1) => '1',
                _ => '0',
            })
            .collect()
    }
}

pub(crate) fn mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate")]
pub enum Gate {
    /// `Ry(angle)` on `target` when the controls match. `diagonal` records
    /// which stored diagonal the rotation loads, for trimming.
    MultiplexedRy {
        target: usize,
        controls: ControlPattern,
        angle: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        diagonal: Option<i64>,
    },
    /// Multiplies every basis state matching `controls` by `exp(i angle)`.
    MultiplexedPhase { controls: ControlPattern, angle: f64 },
    /// Adds `addend` modulo `2^register.len()` to the little-endian register.
    ControlledAdd {
        register: Vec<usize>,
        addend: u64,
        controls: ControlPattern,
    },
    /// Unitary QFT `|x> -> N^-1/2 sum_k exp(2 pi i x k / N) |k>`, or its
    /// inverse.
    QftBlock { register: Vec<usize>, inverse: bool },
    PauliX { target: usize },
    /// Real Householder reflection exchanging `|0>` and `sum_d a_d |d>`.
    /// It is its own inverse, so the same gate serves as PREP and UNPREP.
    PrepLoad {
        register: Vec<usize>,
        amplitudes: Vec<f64>,
    },
}

impl Gate {
    /// Every qubit the gate touches, controls included.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::MultiplexedRy {
                target, controls, ..
            } => std::iter::once(*target).chain(controls.qubits.iter().copied()).collect(),
            Gate::MultiplexedPhase { controls, .. } => controls.qubits.clone(),
            Gate::ControlledAdd {
                register, controls, ..
            } => register.iter().chain(&controls.qubits).copied().collect(),
            Gate::QftBlock { register, .. } | Gate::PrepLoad { register, .. } => register.clone(),
            Gate::PauliX { target } => vec![*target],
        }
    }

    /// Renumbers qubits through `f`.
    pub fn relabel(&self, f: &impl Fn(usize) -> usize) -> Gate {
        let cp = |c: &ControlPattern| ControlPattern {
            qubits: c.qubits.iter().map(|&q| f(q)).collect(),
            ..c.clone()
        };
        let reg = |r: &[usize]| r.iter().map(|&q| f(q)).collect::<Vec<_>>();
        match self {
            Gate::MultiplexedRy {
                target,
                controls,
                angle,
                diagonal,
            } => Gate::MultiplexedRy {
                target: f(*target),
                controls: cp(controls),
                angle: *angle,
                diagonal: *diagonal,
            },
            Gate::MultiplexedPhase { controls, angle } => Gate::MultiplexedPhase {
                controls: cp(controls),
                angle: *angle,
            },
            Gate::ControlledAdd {
                register,
                addend,
                controls,
            } => Gate::ControlledAdd {
                register: reg(register),
                addend: *addend,
                controls: cp(controls),
            },
            Gate::QftBlock { register, inverse } => Gate::QftBlock {
                register: reg(register),
                inverse: *inverse,
            },
            Gate::PauliX { target } => Gate::PauliX { target: f(*target) },
            Gate::PrepLoad {
                register,
                amplitudes,
            } => Gate::PrepLoad {
                register: reg(register),
                amplitudes: amplitudes.clone(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
}

/// Gate counts. Only `MultiplexedRy` gates count as rotations; PREP and
/// UNPREP are reported separately.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSummary {
    pub rotations: usize,
    pub unique_angles: usize,
    pub adders: usize,
    pub qft_blocks: usize,
    pub phases: usize,
    pub prep_loads: usize,
    pub pauli_x: usize,
    pub total: usize,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Checks qubit indices, register disjointness within each gate and
    /// finite parameters.
    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            let qs = g.qubits();
            if let Some(&q) = qs.iter().find(|&&q| q >= self.num_qubits) {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
            let distinct: BTreeSet<_> = qs.iter().collect();
            if distinct.len() != qs.len() {
                return Err(Error::InvalidArgument(format!("gate reuses a qubit: {g:?}")));
            }
            match g {
                Gate::MultiplexedRy { angle, controls, .. }
                | Gate::MultiplexedPhase { angle, controls } => {
                    if !angle.is_finite() {
                        return Err(Error::InvalidArgument(format!("non-finite angle in {g:?}")));
                    }
                    if controls.qubits.len() > 64 {
                        return Err(Error::InvalidArgument("more than 64 controls".into()));
                    }
                }
                Gate::PrepLoad {
                    register,
                    amplitudes,
                } => {
                    if amplitudes.len() > 1 << register.len() {
                        return Err(Error::InvalidArgument("PREP amplitudes exceed register".into()));
                    }
                    let norm: f64 = amplitudes.iter().map(|a| a * a).sum();
                    if (norm - 1.0).abs() > 1e-12 {
                        return Err(Error::InvalidArgument(format!("PREP amplitudes have norm^2 {norm}")));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn summary(&self) -> GateSummary {
        let mut s = GateSummary {
            total: self.gates.len(),
            ..Default::default()
        };
        let mut angles = BTreeSet::new();
        for g in &self.gates {
            match g {
                Gate::MultiplexedRy { angle, .. } => {
                    s.rotations += 1;
                    angles.insert(angle.to_bits());
                }
                Gate::MultiplexedPhase { .. } => s.phases += 1,
                Gate::ControlledAdd { .. } => s.adders += 1,
                Gate::QftBlock { .. } => s.qft_blocks += 1,
                Gate::PauliX { .. } => s.pauli_x += 1,
                Gate::PrepLoad { .. } => s.prep_loads += 1,
            }
        }
        s.unique_angles = angles.len();
        s
    }
}
