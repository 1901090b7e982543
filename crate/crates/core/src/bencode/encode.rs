//! Block-encoding constructions.
//!
//! Every encoding keeps the column register `j` on qubits `0..log2(n)` so
//! encodings of the same dimension share a system register. Ancillas follow:
//! `del` (Toeplitz only), the data qubit `d0`, then the diagonal-select
//! register `s`. The encoded block is the amplitude map with all ancillas in
//! `|0>`, and `subnorm * block` is the target matrix.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, ControlPattern, Gate, GateSummary};
use crate::error::{Error, Result};
use crate::matcore::banded::first_column;
use crate::matcore::BandedMatrix;
use crate::precond::CirculantSpectrum;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    pub j: Vec<usize>,
    pub s: Vec<usize>,
    pub d0: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub del: Option<usize>,
}

impl RegisterLayout {
    fn relabel(&self, f: &impl Fn(usize) -> usize) -> Self {
        Self {
            j: self.j.iter().map(|&q| f(q)).collect(),
            s: self.s.iter().map(|&q| f(q)).collect(),
            d0: f(self.d0),
            del: self.del.map(f),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockEncoding {
    pub circuit: Circuit,
    /// Column register, always qubits `0..system.len()`.
    pub system: Vec<usize>,
    pub ancillas: Vec<usize>,
    /// One layout per encoded factor.
    pub layouts: Vec<RegisterLayout>,
    pub subnorm: f64,
    /// Scale factors folded into `subnorm` from upstream rescaling.
    pub extra_scale: f64,
    pub target: String,
}

impl BlockEncoding {
    pub fn n(&self) -> usize {
        1 << self.system.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.circuit.num_qubits
    }

    pub fn gate_count(&self) -> usize {
        self.circuit.len()
    }

    pub fn summary(&self) -> GateSummary {
        self.circuit.summary()
    }

    /// Records that the loaded matrix was divided by `r` beforehand, so the
    /// encoding targets `r` times the loaded matrix.
    pub fn with_extra_scale(mut self, r: f64) -> Self {
        self.subnorm *= r;
        self.extra_scale *= r;
        self
    }
}

fn log2_exact(n: usize) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros() as usize)
}

fn ceil_log2(d: usize) -> usize {
    d.next_power_of_two().trailing_zeros() as usize
}

fn range(start: usize, len: usize) -> Vec<usize> {
    (start..start + len).collect()
}

/// Banded encoding: an LCU over the stored diagonals, each loaded by
/// multiplexed arcsine rotations and shifted into place.
///
/// Each diagonal is normalised by its largest magnitude `m_d`; PREP and
/// UNPREP both load `sqrt(m_d / sum m)` so `subnorm = sum_d m_d`.
pub fn encode_banded(a: &BandedMatrix) -> Result<BlockEncoding> {
    let n = a.n();
    let nj = log2_exact(n)?;
    let diags: Vec<(i64, &Vec<f64>, f64)> = a
        .diagonals()
        .iter()
        .map(|(&k, v)| (k, v, v.iter().fold(0.0f64, |m, x| m.max(x.abs()))))
        .filter(|(_, _, m)| *m > 0.0)
        .collect();
    if diags.is_empty() {
        return Err(Error::ZeroMatrix);
    }
    if let Some((k, _, _)) = diags.iter().find(|(_, v, _)| v.iter().any(|x| !x.is_finite())) {
        return Err(Error::InvalidArgument(format!("non-finite value on diagonal {k}")));
    }
    let ns = ceil_log2(diags.len());
    let j = range(0, nj);
    let d0 = nj;
    let s = range(nj + 1, ns);
    let total: f64 = diags.iter().map(|d| d.2).sum();
    let amps: Vec<f64> = diags.iter().map(|d| (d.2 / total).sqrt()).collect();

    let mut c = Circuit::new(nj + 1 + ns);
    if ns > 0 {
        c.push(Gate::PrepLoad {
            register: s.clone(),
            amplitudes: amps.clone(),
        });
    }
    for (i, &(k, values, m)) in diags.iter().enumerate() {
        let select = ControlPattern::value(s.clone(), i as u64);
        let c0 = first_column(k);
        for (t, &v) in values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let x = (v / m).clamp(-1.0, 1.0);
            c.push(Gate::MultiplexedRy {
                target: d0,
                controls: ControlPattern::value(j.clone(), (c0 + t) as u64).and(&select),
                angle: 2.0 * x.asin(),
                diagonal: Some(k),
            });
        }
        let shift = k.rem_euclid(n as i64) as u64;
        if shift != 0 {
            c.push(Gate::ControlledAdd {
                register: j.clone(),
                addend: shift,
                controls: select,
            });
        }
    }
    c.push(Gate::PauliX { target: d0 });
    if ns > 0 {
        c.push(Gate::PrepLoad {
            register: s.clone(),
            amplitudes: amps,
        });
    }
    let mut ancillas = vec![d0];
    ancillas.extend(&s);
    Ok(BlockEncoding {
        circuit: c,
        system: j.clone(),
        ancillas,
        layouts: vec![RegisterLayout { j, s, d0, del: None }],
        subnorm: total,
        extra_scale: 1.0,
        target: format!("banded n={n} d={}", diags.len()),
    })
}

/// Toeplitz encoding of the constants `t` (offset to value) at dimension `n`.
///
/// The column register is extended by `del` to `2n` states so shifted
/// diagonals wrap outside the top-left `n x n` block. Diagonal `k` is shifted
/// by `k - k_min` under control of `s`, then a global addition of `k_min`
/// moves every diagonal into place.
pub fn encode_toeplitz(t: &BTreeMap<i64, f64>, n: usize) -> Result<BlockEncoding> {
    let nj = log2_exact(n)?;
    if let Some(&k) = t.keys().find(|k| k.unsigned_abs() as usize >= n) {
        return Err(Error::OffsetOutOfRange { offset: k, n });
    }
    let diags: Vec<(i64, f64)> = t.iter().filter(|(_, v)| **v != 0.0).map(|(&k, &v)| (k, v)).collect();
    if diags.is_empty() {
        return Err(Error::ZeroMatrix);
    }
    let ns = ceil_log2(diags.len());
    let j = range(0, nj);
    let del = nj;
    let d0 = nj + 1;
    let s = range(nj + 2, ns);
    let ext: Vec<usize> = range(0, nj + 1);
    let modulus = 2 * n as i64;
    let total: f64 = diags.iter().map(|d| d.1.abs()).sum();
    let kmin = diags[0].0;

    let mut c = Circuit::new(nj + 2 + ns);
    if ns > 0 {
        c.push(Gate::PrepLoad {
            register: s.clone(),
            amplitudes: diags.iter().map(|d| (d.1.abs() / total).sqrt()).collect(),
        });
    }
    for (i, &(k, _)) in diags.iter().enumerate() {
        if k != kmin {
            c.push(Gate::ControlledAdd {
                register: ext.clone(),
                addend: (k - kmin) as u64,
                controls: ControlPattern::value(s.clone(), i as u64),
            });
        }
    }
    if kmin != 0 {
        c.push(Gate::ControlledAdd {
            register: ext,
            addend: kmin.rem_euclid(modulus) as u64,
            controls: ControlPattern::none(),
        });
    }
    if ns > 0 {
        c.push(Gate::PrepLoad {
            register: s.clone(),
            amplitudes: diags
                .iter()
                .map(|d| d.1.signum() * (d.1.abs() / total).sqrt())
                .collect(),
        });
    } else if diags[0].1 < 0.0 {
        c.push(Gate::MultiplexedPhase {
            controls: ControlPattern::none(),
            angle: PI,
        });
    }
    let mut ancillas = vec![del, d0];
    ancillas.extend(&s);
    Ok(BlockEncoding {
        circuit: c,
        system: j.clone(),
        ancillas,
        layouts: vec![RegisterLayout {
            j,
            s,
            d0,
            del: Some(del),
        }],
        subnorm: total,
        extra_scale: 1.0,
        target: format!("toeplitz n={n} d={}", diags.len()),
    })
}

/// Encodes `C^-1 A` by appending `F`, a diagonal encoding of
/// `Λ^-1 / max|Λ^-1|`, and `F^H` to the encoding of `A`. With the QFT
/// convention of [`Gate::QftBlock`], `F` is the inverse QFT.
pub fn encode_clai_product(spec: &CirculantSpectrum, enc_a: &BlockEncoding) -> Result<BlockEncoding> {
    let n = enc_a.n();
    if spec.n() != n {
        return Err(Error::DimensionMismatch(format!("spectrum {} vs encoding {}", spec.n(), n)));
    }
    let inv = spec.inverse_eigenvalues()?;
    let scale = inv.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let d1 = enc_a.num_qubits();
    let j = enc_a.system.clone();

    let mut c = enc_a.circuit.clone();
    c.num_qubits = d1 + 1;
    c.push(Gate::QftBlock {
        register: j.clone(),
        inverse: true,
    });
    append_diagonal(&mut c, &j, d1, &inv.iter().map(|z| z / scale).collect::<Vec<_>>());
    c.push(Gate::QftBlock {
        register: j.clone(),
        inverse: false,
    });
    let mut ancillas = enc_a.ancillas.clone();
    ancillas.push(d1);
    let mut layouts = enc_a.layouts.clone();
    layouts.push(RegisterLayout {
        j: j.clone(),
        s: Vec::new(),
        d0: d1,
        del: None,
    });
    Ok(BlockEncoding {
        circuit: c,
        system: j,
        ancillas,
        layouts,
        subnorm: enc_a.subnorm * scale,
        extra_scale: enc_a.extra_scale,
        target: format!("clai * ({})", enc_a.target),
    })
}

/// Diagonal encoding of `z` (all `|z_k| <= 1`) on data qubit `d` indexed by
/// register `j`: arcsine rotation of `|z_k|`, the shared X, then the phase
/// of `z_k` on the `d = 0` branch.
fn append_diagonal(c: &mut Circuit, j: &[usize], d: usize, z: &[Complex64]) {
    for (k, zk) in z.iter().enumerate() {
        let r = zk.norm().min(1.0);
        if r == 0.0 {
            continue;
        }
        c.push(Gate::MultiplexedRy {
            target: d,
            controls: ControlPattern::value(j.to_vec(), k as u64),
            angle: 2.0 * r.asin(),
            diagonal: Some(0),
        });
    }
    c.push(Gate::PauliX { target: d });
    for (k, zk) in z.iter().enumerate() {
        let phi = zk.arg();
        if zk.norm() == 0.0 || phi == 0.0 {
            continue;
        }
        c.push(Gate::MultiplexedPhase {
            controls: ControlPattern::value(j.to_vec(), k as u64).and(&ControlPattern::value(vec![d], 0)),
            angle: phi,
        });
    }
}

/// Product encoding of `P A`: `U_A` runs first, then `U_P`, on a shared
/// system register with the ancillas of `U_P` placed after those of `U_A`.
/// No gates are added.
pub fn multiply_encodings(u_p: &BlockEncoding, u_a: &BlockEncoding) -> Result<BlockEncoding> {
    let nj = u_a.system.len();
    if u_p.system.len() != nj {
        return Err(Error::DimensionMismatch(format!(
            "system registers of {} and {} qubits",
            u_p.system.len(),
            nj
        )));
    }
    if u_a.system != range(0, nj) || u_p.system != range(0, nj) {
        return Err(Error::InvalidArgument("system register must occupy the lowest qubits".into()));
    }
    let offset = u_a.num_qubits() - nj;
    let shift = |q: usize| if q < nj { q } else { q + offset };
    let mut c = u_a.circuit.clone();
    c.num_qubits = u_a.num_qubits() + u_p.num_qubits() - nj;
    c.gates.extend(u_p.circuit.gates.iter().map(|g| g.relabel(&shift)));
    let mut ancillas = u_a.ancillas.clone();
    ancillas.extend(u_p.ancillas.iter().map(|&q| shift(q)));
    let mut layouts = u_a.layouts.clone();
    layouts.extend(u_p.layouts.iter().map(|l| l.relabel(&shift)));
    Ok(BlockEncoding {
        circuit: c,
        system: u_a.system.clone(),
        ancillas,
        layouts,
        subnorm: u_p.subnorm * u_a.subnorm,
        extra_scale: u_p.extra_scale * u_a.extra_scale,
        target: format!("({}) * ({})", u_p.target, u_a.target),
    })
}

/// Largest amplification keeping the amplified singular values inside the
/// valid range: `(1 - delta) * subnorm / sigma_max`.
pub fn max_amplification(enc: &BlockEncoding, sigma_max: f64, delta: f64) -> Result<f64> {
    if !(sigma_max > 0.0) || sigma_max > enc.subnorm * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "sigma_max {sigma_max} exceeds subnormalisation {}",
            enc.subnorm
        )));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidArgument(format!("delta {delta} outside [0, 1)")));
    }
    Ok((1.0 - delta) * enc.subnorm / sigma_max)
}
