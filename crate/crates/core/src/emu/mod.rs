//! Statevector emulation of circuits, block extraction and verification.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::bencode::{BlockEncoding, Circuit, ControlPattern, Gate};
use crate::error::{Error, Result};

/// Default limit on emulated qubits.
pub const DEFAULT_MAX_QUBITS: usize = 24;
/// Environment variable overriding [`DEFAULT_MAX_QUBITS`].
pub const MAX_QUBITS_ENV: &str = "BANDENC_MAX_QUBITS";

pub fn max_qubits() -> usize {
    std::env::var(MAX_QUBITS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

fn check_guard(q: usize) -> Result<()> {
    let guard = max_qubits();
    if q > guard {
        return Err(Error::QubitGuard { needed: q, guard });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_guard(num_qubits)?;
        let len = 1usize << num_qubits;
        if index >= len {
            return Err(Error::InvalidArgument(format!("basis index {index} >= {len}")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); len];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_guard(num_qubits)?;
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Visits every `x` with `x & !free == 0`, in increasing order.
#[inline]
fn for_each_subset(free: u64, mut f: impl FnMut(u64)) {
    let mut x = 0u64;
    loop {
        f(x);
        x = x.wrapping_sub(free) & free;
        if x == 0 {
            break;
        }
    }
}

fn register_offsets(register: &[usize]) -> Vec<u64> {
    (0..1u64 << register.len())
        .map(|v| {
            register
                .iter()
                .enumerate()
                .fold(0, |acc, (b, &q)| acc | ((v >> b) & 1) << q)
        })
        .collect()
}

fn register_mask(register: &[usize]) -> u64 {
    register.iter().fold(0, |m, &q| m | 1 << q)
}

/// Applies `circuit` to `state` in place.
pub fn apply_circuit(circuit: &Circuit, state: &mut StateVector) -> Result<()> {
    if circuit.num_qubits != state.num_qubits {
        return Err(Error::DimensionMismatch(format!(
            "circuit on {} qubits, state on {}",
            circuit.num_qubits, state.num_qubits
        )));
    }
    check_guard(state.num_qubits)?;
    circuit.validate()?;
    let mut planner = FftPlanner::new();
    for g in &circuit.gates {
        apply_gate(g, state, &mut planner);
    }
    Ok(())
}

fn apply_gate(g: &Gate, state: &mut StateVector, planner: &mut FftPlanner<f64>) {
    let full = if state.num_qubits == 64 {
        u64::MAX
    } else {
        (1u64 << state.num_qubits) - 1
    };
    let amp = &mut state.amplitudes;
    match g {
        Gate::MultiplexedRy {
            target,
            controls,
            angle,
            ..
        } => {
            let (mask, val) = controls.index_mask();
            let t = 1u64 << target;
            let (s, c) = (angle / 2.0).sin_cos();
            for_each_subset(full & !mask & !t, |x| {
                let i0 = (x | val) as usize;
                let i1 = i0 | t as usize;
                let (a0, a1) = (amp[i0], amp[i1]);
                amp[i0] = a0 * c - a1 * s;
                amp[i1] = a0 * s + a1 * c;
            });
        }
        Gate::MultiplexedPhase { controls, angle } => {
            let (mask, val) = controls.index_mask();
            let ph = Complex64::from_polar(1.0, *angle);
            for_each_subset(full & !mask, |x| amp[(x | val) as usize] *= ph);
        }
        Gate::PauliX { target } => {
            let t = 1u64 << target;
            for_each_subset(full & !t, |x| amp.swap(x as usize, (x | t) as usize));
        }
        Gate::ControlledAdd {
            register,
            addend,
            controls,
        } => {
            let m = register.len();
            let size = 1u64 << m;
            let shift = addend % size;
            if shift == 0 {
                return;
            }
            let offsets = register_offsets(register);
            let rmask = register_mask(register);
            let (cmask, cval) = controls.index_mask();
            let mut buf = vec![Complex64::new(0.0, 0.0); size as usize];
            for_each_subset(full & !rmask & !cmask, |x| {
                let base = x | cval;
                for v in 0..size {
                    buf[((v + shift) % size) as usize] = amp[(base | offsets[v as usize]) as usize];
                }
                for v in 0..size as usize {
                    amp[(base | offsets[v]) as usize] = buf[v];
                }
            });
        }
        Gate::QftBlock { register, inverse } => {
            let size = 1usize << register.len();
            // rustfft's inverse uses exp(+2 pi i xk / N), the QFT sign
            let fft = if *inverse {
                planner.plan_fft_forward(size)
            } else {
                planner.plan_fft_inverse(size)
            };
            let scale = 1.0 / (size as f64).sqrt();
            let offsets = register_offsets(register);
            let rmask = register_mask(register);
            let mut buf = vec![Complex64::new(0.0, 0.0); size];
            for_each_subset(full & !rmask, |x| {
                for v in 0..size {
                    buf[v] = amp[(x | offsets[v]) as usize];
                }
                fft.process(&mut buf);
                for v in 0..size {
                    amp[(x | offsets[v]) as usize] = buf[v] * scale;
                }
            });
        }
        Gate::PrepLoad {
            register,
            amplitudes,
        } => {
            let size = 1usize << register.len();
            let mut w = vec![0.0; size];
            w[0] = 1.0;
            for (wi, a) in w.iter_mut().zip(amplitudes) {
                *wi -= a;
            }
            let ww: f64 = w.iter().map(|x| x * x).sum();
            if ww <= 1e-30 {
                return;
            }
            let offsets = register_offsets(register);
            let rmask = register_mask(register);
            for_each_subset(full & !rmask, |x| {
                let mut dot = Complex64::new(0.0, 0.0);
                for v in 0..size {
                    if w[v] != 0.0 {
                        dot += amp[(x | offsets[v]) as usize] * w[v];
                    }
                }
                if dot == Complex64::new(0.0, 0.0) {
                    return;
                }
                let f = dot * (2.0 / ww);
                for v in 0..size {
                    if w[v] != 0.0 {
                        amp[(x | offsets[v]) as usize] -= f * w[v];
                    }
                }
            });
        }
    }
}

/// Amplitude map of `circuit` restricted to the subspace spanned by the
/// `system` qubits with every other qubit in `|0>`. Column `c` is the
/// image of the basis state whose system register holds `c`.
pub fn extract_subspace(circuit: &Circuit, system: &[usize]) -> Result<DMatrix<Complex64>> {
    check_guard(circuit.num_qubits)?;
    circuit.validate()?;
    if let Some(&q) = system.iter().find(|&&q| q >= circuit.num_qubits) {
        return Err(Error::QubitOutOfRange {
            qubit: q,
            num_qubits: circuit.num_qubits,
        });
    }
    let offsets = register_offsets(system);
    let dim = offsets.len();
    let columns: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|c| {
            let mut st = StateVector::basis(circuit.num_qubits, offsets[c] as usize)?;
            let mut planner = FftPlanner::new();
            for g in &circuit.gates {
                apply_gate(g, &mut st, &mut planner);
            }
            Ok(offsets.iter().map(|&o| st.amplitudes[o as usize]).collect())
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(dim, dim, |r, c| columns[c][r]))
}

/// Encoded block `<0_anc| U |0_anc>` as an `n x n` matrix.
pub fn extract_block(enc: &BlockEncoding) -> Result<DMatrix<Complex64>> {
    extract_subspace(&enc.circuit, &enc.system)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// `max |subnorm * block - target|` over all entries.
    pub max_abs_err: f64,
    /// Entry where the largest error occurs.
    pub worst_entry: (usize, usize),
    /// Largest imaginary part of `subnorm * block`.
    pub max_imag: f64,
    pub tol: f64,
    pub passed: bool,
    pub n: usize,
    pub q: usize,
    pub gate_count: usize,
    pub wall_time: f64,
}

/// Compares `subnorm * block` with `target` entrywise.
pub fn verify_encoding(enc: &BlockEncoding, target: &DMatrix<f64>, tol: f64) -> Result<VerificationReport> {
    let start = Instant::now();
    let block = extract_block(enc)?;
    Ok(compare_block(enc, &block, target, tol, start.elapsed().as_secs_f64()))
}

/// Verification against an already extracted block.
pub fn compare_block(
    enc: &BlockEncoding,
    block: &DMatrix<Complex64>,
    target: &DMatrix<f64>,
    tol: f64,
    wall_time: f64,
) -> VerificationReport {
    let mut worst = (0, 0);
    let mut max_abs_err = if block.shape() == target.shape() { 0.0 } else { f64::INFINITY };
    let mut max_imag = 0.0f64;
    if block.shape() == target.shape() {
        for c in 0..block.ncols() {
            for r in 0..block.nrows() {
                let z = block[(r, c)] * enc.subnorm;
                max_imag = max_imag.max(z.im.abs());
                let e = (z - target[(r, c)]).norm();
                if e > max_abs_err || e.is_nan() {
                    max_abs_err = e;
                    worst = (r, c);
                }
            }
        }
    }
    VerificationReport {
        max_abs_err,
        worst_entry: worst,
        max_imag,
        tol,
        passed: max_abs_err <= tol,
        n: enc.n(),
        q: enc.num_qubits(),
        gate_count: enc.gate_count(),
        wall_time,
    }
}

/// Real part of a block, after checking the imaginary part is below `tol`.
pub fn real_block(block: &DMatrix<Complex64>, tol: f64) -> Result<DMatrix<f64>> {
    let imag = block.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > tol {
        return Err(Error::InvalidArgument(format!("block has imaginary part {imag:e}")));
    }
    Ok(block.map(|z| z.re))
}

/// Convenience for tests and reports: a single control on one qubit.
pub fn control_on(qubit: usize, bit: bool) -> ControlPattern {
    ControlPattern::value(vec![qubit], bit as u64)
}
