use bandenc::bencode::{
    encode_banded, encode_clai_product, encode_toeplitz, max_amplification, multiply_encodings,
    preamp_figure_of_merit, BlockEncoding, PreampParams,
};
use bandenc::emu::{extract_block, real_block};
use bandenc::matcore::{
    banded_multiply, default_drop_tol, diagonal_scale, drop_zero_diagonals, generate_test_matrix,
    kappa_sub, max_norm_scale, spectral_metrics, spectral_metrics_dense, BandedMatrix, MatrixSource,
    Spectrum,
};
use bandenc::precond::{build_preconditioner, clai_apply, clai_spectrum, tpai, PreconditionerSpec};
use bandenc::trim::{trim_encoding, trimming_metrics};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Multiplication, SweepConfig};
use crate::CliError;

/// One line of the sweep report. Unavailable quantities are `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub source: String,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub precon: String,
    pub infill: Option<usize>,
    pub method: String,
    pub s: Option<f64>,
    pub r_p: Option<f64>,
    pub sigma_min: Option<f64>,
    pub kappa: Option<f64>,
    pub kappa_s: Option<f64>,
    #[serde(rename = "diag_P")]
    pub diag_p: Option<usize>,
    #[serde(rename = "diag_PA")]
    pub diag_pa: Option<usize>,
    #[serde(rename = "diag_PA_nonzero")]
    pub diag_pa_nonzero: Option<usize>,
    pub rotations: Option<usize>,
    pub unique_angles: Option<usize>,
    pub f: f64,
    pub l2_err: Option<f64>,
    pub fom_plain: Option<f64>,
    pub fom_preamp: Option<f64>,
    pub multiplication: String,
    pub kappa_s_emulated: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn error_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// A diagonally scaled input shared by every combination on one source.
struct Prepared {
    a: BandedMatrix,
    /// `D^-1 1`, the scaled right-hand side used for solution errors.
    rhs: Vec<f64>,
    spectrum: Spectrum,
}

fn prepare(src: &MatrixSource, tol: f64) -> bandenc::Result<Prepared> {
    let raw = generate_test_matrix(src)?.matrix;
    let (a, d) = diagonal_scale(&raw)?;
    let rhs = d.main_diagonal().iter().map(|v| 1.0 / v).collect();
    let spectrum = spectral_metrics(&a, tol)?;
    Ok(Prepared { a, rhs, spectrum })
}

#[derive(Clone, Copy)]
enum Job {
    Classical { f: f64, trim: bool },
    Quantum,
}

/// Runs every combination of the configuration. Rows come back in config
/// order (source, then preconditioner, then classical `f` values, then the
/// quantum row) whatever the parallelism.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport, CliError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;
    let mut jobs = Vec::new();
    for (si, _) in cfg.sources.iter().enumerate() {
        for (pi, spec) in cfg.preconditioners.iter().enumerate() {
            // CLAI has no banded product; under `both` it only gets the quantum row
            let skip_classical = cfg.multiplication == Multiplication::Both && *spec == PreconditionerSpec::Clai;
            if cfg.multiplication.classical() && !skip_classical {
                for f in cfg.f_values() {
                    jobs.push((si, pi, Job::Classical { f, trim: !cfg.trim_f.is_empty() }));
                }
            }
            if cfg.multiplication.quantum() {
                jobs.push((si, pi, Job::Quantum));
            }
        }
    }
    let rows = pool.install(|| {
        let prepared: Vec<Result<Prepared, String>> = cfg
            .sources
            .par_iter()
            .map(|s| prepare(s, cfg.tolerances.spectral).map_err(|e| e.to_string()))
            .collect();
        jobs.par_iter()
            .map(|&(si, pi, job)| {
                let spec = &cfg.preconditioners[pi];
                let mut row = SweepRow {
                    source: cfg.sources[si].label(),
                    precon: spec.kind_name().into(),
                    infill: spec.infill(),
                    method: spec.method_name().into(),
                    ..Default::default()
                };
                let result = match &prepared[si] {
                    Err(e) => Err(e.clone()),
                    Ok(p) => {
                        row.n = Some(p.a.n());
                        match job {
                            Job::Classical { f, trim } => {
                                row.multiplication = "classical".into();
                                row.f = f;
                                classical_row(cfg, p, spec, f, trim, &mut row)
                            }
                            Job::Quantum => {
                                row.multiplication = "quantum".into();
                                quantum_row(cfg, p, spec, &mut row)
                            }
                        }
                        .map_err(|e| e.to_string())
                    }
                };
                if let Err(e) = result {
                    row.error = Some(e);
                }
                row
            })
            .collect()
    });
    Ok(SweepReport { rows })
}

fn classical_row(
    cfg: &SweepConfig,
    p: &Prepared,
    spec: &PreconditionerSpec,
    f: f64,
    trim: bool,
    row: &mut SweepRow,
) -> bandenc::Result<()> {
    let pre = build_preconditioner(spec, &p.a)?;
    let Some(pm) = pre.banded() else {
        return Err(bandenc::Error::InvalidArgument(format!(
            "{spec} has no banded form; use quantum multiplication"
        )));
    };
    // the Toeplitz encoding loads TPAI without max-norm scaling
    row.r_p = Some(match spec {
        PreconditionerSpec::Tpai { .. } => 1.0,
        _ => max_norm_scale(&pm)?.1,
    });
    row.diag_p = Some(pm.num_diagonals());
    let pa = banded_multiply(&pm, &p.a)?;
    row.diag_pa = Some(pa.num_diagonals());
    let tol = cfg.tolerances.drop.unwrap_or_else(|| default_drop_tol(&pa));
    let (pa, _) = drop_zero_diagonals(&pa, tol);
    row.diag_pa_nonzero = Some(pa.num_diagonals());

    let enc = encode_banded(&pa)?;
    let sp = spectral_metrics(&pa, cfg.tolerances.spectral)?;
    fill_spectral(row, &enc, &sp)?;
    row.fom_plain = Some(enc.subnorm * enc.gate_count() as f64);
    row.kappa_s_emulated = emulated_kappa_s(cfg, &enc)?;

    if trim {
        let t = trim_encoding(&pa, f)?;
        let b = pm.mul_vec(&p.rhs);
        let stats = trimming_metrics(&pa, &t.filtered, &b, &t.before.circuit, &t.after.circuit, f)?;
        row.rotations = Some(stats.rotations_after);
        row.unique_angles = Some(stats.unique_angles_after);
        row.l2_err = Some(stats.l2_solution_error);
    } else {
        let g = enc.summary();
        row.rotations = Some(g.rotations);
        row.unique_angles = Some(g.unique_angles);
    }
    Ok(())
}

fn quantum_row(cfg: &SweepConfig, p: &Prepared, spec: &PreconditionerSpec, row: &mut SweepRow) -> bandenc::Result<()> {
    let tol = cfg.tolerances.spectral;
    let ua = encode_banded(&p.a)?;
    let (prod, sp) = match spec {
        PreconditionerSpec::Ds => {
            row.r_p = Some(1.0);
            row.diag_p = Some(1);
            row.diag_pa = Some(p.a.num_diagonals());
            row.diag_pa_nonzero = Some(p.a.count_nonzero_diagonals());
            row.fom_plain = Some(ua.subnorm * ua.gate_count() as f64);
            (ua, p.spectrum)
        }
        PreconditionerSpec::Clai => {
            let lam = clai_spectrum(&p.a);
            let prod = encode_clai_product(&lam, &ua)?;
            // C^-1 is normal, so its spectral norm is max |1/lambda|
            let beta = prod.subnorm / ua.subnorm;
            row.r_p = Some(beta);
            let sp = spectral_metrics_dense(&clai_apply(&lam, &p.a)?, tol)?;
            let gates_p = prod.gate_count() - ua.gate_count();
            fill_preamp(cfg, row, &ua, p.spectrum.sigma_max, beta, beta, gates_p)?;
            (prod, sp)
        }
        PreconditionerSpec::Tpai { .. } | PreconditionerSpec::Spai { .. } => {
            let (pm, up) = match spec {
                PreconditionerSpec::Tpai { infill_level } => {
                    let t = tpai(&p.a, *infill_level)?;
                    let up = encode_toeplitz(&t.coefficients, p.a.n())?;
                    row.r_p = Some(1.0);
                    (t.p, up)
                }
                _ => {
                    let pm = build_preconditioner(spec, &p.a)?
                        .banded()
                        .expect("SPAI preconditioners are banded");
                    let (scaled, r) = max_norm_scale(&pm)?;
                    row.r_p = Some(r);
                    (pm, encode_banded(&scaled)?.with_extra_scale(r))
                }
            };
            row.diag_p = Some(pm.num_diagonals());
            let pa = banded_multiply(&pm, &p.a)?;
            row.diag_pa = Some(pa.num_diagonals());
            row.diag_pa_nonzero = Some(drop_zero_diagonals(&pa, default_drop_tol(&pa)).0.num_diagonals());
            let prod = multiply_encodings(&up, &ua)?;
            let sigma_p = spectral_metrics(&pm, tol)?.sigma_max;
            fill_preamp(cfg, row, &ua, p.spectrum.sigma_max, up.subnorm, sigma_p, up.gate_count())?;
            (prod, spectral_metrics(&pa, tol)?)
        }
    };
    fill_spectral(row, &prod, &sp)?;
    row.kappa_s_emulated = emulated_kappa_s(cfg, &prod)?;
    let g = prod.summary();
    row.rotations = Some(g.rotations);
    row.unique_angles = Some(g.unique_angles);
    Ok(())
}

fn fill_spectral(row: &mut SweepRow, enc: &BlockEncoding, sp: &Spectrum) -> bandenc::Result<()> {
    row.s = Some(enc.subnorm);
    row.sigma_min = Some(sp.sigma_min);
    row.kappa = Some(sp.kappa);
    row.kappa_s = Some(kappa_sub(enc.subnorm, sp.sigma_min)?);
    Ok(())
}

/// Plain and preamplified figures of merit for `U_P U_A`. The achievable
/// amplifications are clamped to `[1, subnorm)`; when that range is empty
/// only the plain figure is reported.
fn fill_preamp(
    cfg: &SweepConfig,
    row: &mut SweepRow,
    ua: &BlockEncoding,
    sigma_a: f64,
    beta: f64,
    sigma_p: f64,
    gates_p: usize,
) -> bandenc::Result<()> {
    let alpha = ua.subnorm;
    let delta = cfg.tolerances.delta;
    let gates_a = ua.gate_count() as f64;
    let gates_p = gates_p as f64;
    row.fom_plain = Some(alpha * beta * (gates_a + gates_p));
    let g1 = max_amplification(ua, sigma_a, delta)?;
    if !(sigma_p > 0.0) || sigma_p > beta * (1.0 + 1e-12) {
        return Err(bandenc::Error::InvalidArgument(format!(
            "sigma_max(P) = {sigma_p} exceeds its subnormalisation {beta}"
        )));
    }
    let g2 = (1.0 - delta) * beta / sigma_p;
    let (Some(gamma1), Some(gamma2)) = (clamp_gamma(g1, alpha), clamp_gamma(g2, beta)) else {
        return Ok(());
    };
    let fom = preamp_figure_of_merit(&PreampParams {
        alpha,
        beta,
        gamma1,
        gamma2,
        delta,
        epsilon: cfg.tolerances.epsilon,
        gates_a,
        gates_p,
    })?;
    row.fom_preamp = Some(fom.fom_preamp);
    Ok(())
}

fn clamp_gamma(g: f64, subnorm: f64) -> Option<f64> {
    if !(subnorm > 1.0) {
        return None;
    }
    let below = f64::from_bits(subnorm.to_bits() - 1);
    Some(g.clamp(1.0, below))
}

/// `kappa_s` recomputed from the emulated block: the block is `M / s`, so
/// `s / sigma_min(M)` is `1 / sigma_min(block)`.
fn emulated_kappa_s(cfg: &SweepConfig, enc: &BlockEncoding) -> bandenc::Result<Option<f64>> {
    if enc.num_qubits() > cfg.verify_max_qubits {
        return Ok(None);
    }
    let block = real_block(&extract_block(enc)?, 1e-9)?;
    let sp = spectral_metrics_dense(&block, cfg.tolerances.spectral)?;
    Ok(Some(1.0 / sp.sigma_min))
}
