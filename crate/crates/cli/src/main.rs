use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bandenc::bencode::encode_banded;
use bandenc::emu::verify_encoding;
use bandenc::matcore::{
    banded_multiply, default_drop_tol, diagonal_scale, drop_zero_diagonals, generate_test_matrix,
    read_matrix, write_matrix, BandedMatrix, MatrixSource,
};
use bandenc::precond::{build_preconditioner, clai_spectrum, PreconditionerSpec};
use bandenc::trim::{trim_encoding, trimming_metrics, TrimStats};
use bandenc_cli::{
    emit_report, parse_precon, read_json_report, run_sweep, write_csv, CliError, Multiplication, SweepConfig,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "bandenc", version, about = "Preconditioning and block encoding of banded systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshKind {
    #[value(name = "2d")]
    TwoD,
    #[value(name = "3d")]
    ThreeD,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh test matrix.
    Gen {
        #[arg(long, value_enum, default_value = "2d")]
        kind: MeshKind,
        /// Mesh dimensions, e.g. `32,32`.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        /// Write `D^-1 A` instead of `A`.
        #[arg(long)]
        scaled: bool,
        /// `.mtx` or `.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a preconditioner for a diagonally scaled input.
    Precon {
        #[arg(long)]
        input: PathBuf,
        /// `DS`, `SPAI(i)`, `SPAI-iterative(i)`, `TPAI(i)` or `CLAI`.
        #[arg(long, value_parser = parse_precon)]
        precon: PreconditionerSpec,
        /// Where to write `P`; banded preconditioners only.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Block-encode `D^-1 A` (or `P D^-1 A`) and write the circuit as JSON.
    Encode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_precon, default_value = "DS")]
        precon: PreconditionerSpec,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emulate an encoding and compare its block with the target matrix.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_precon, default_value = "DS")]
        precon: PreconditionerSpec,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Trim the encoding of `P D^-1 A` at each bin width.
    Trim {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_precon, default_value = "DS")]
        precon: PreconditionerSpec,
        #[arg(long = "trim-f", value_delimiter = ',', required = true)]
        trim_f: Vec<f64>,
        /// Optional dump of the bins chosen per diagonal.
        #[arg(long)]
        bins_json: Option<PathBuf>,
    },
    /// Run a sweep configuration and write its report.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        multiplication: Option<Multiplication>,
        #[arg(long = "trim-f", value_delimiter = ',')]
        trim_f: Option<Vec<f64>>,
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long)]
        verify_max_qubits: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Re-emit the CSV of a JSON report.
    Report {
        #[arg(long)]
        json: PathBuf,
        /// Defaults to standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_scaled(path: &Path) -> Result<BandedMatrix, CliError> {
    Ok(diagonal_scale(&read_matrix(path)?)?.0)
}

/// `P A` for a banded preconditioner, zero diagonals dropped.
fn classical_product(a: &BandedMatrix, spec: &PreconditionerSpec) -> Result<(BandedMatrix, BandedMatrix), CliError> {
    let p = build_preconditioner(spec, a)?.banded().ok_or_else(|| {
        CliError::Config(format!("{spec} has no banded form; use the sweep with quantum multiplication"))
    })?;
    let pa = banded_multiply(&p, a)?;
    let (pa, _) = drop_zero_diagonals(&pa, default_drop_tol(&pa));
    Ok((p, pa))
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("values serialise"));
}

/// Returns whether the command succeeded without error rows or failed checks.
fn run(cmd: Command) -> Result<bool, CliError> {
    match cmd {
        Command::Gen {
            kind,
            dims,
            scaled,
            out,
        } => {
            let src = match (kind, dims.as_slice()) {
                (MeshKind::TwoD, &[x, y]) => MatrixSource::mesh_2d(x, y),
                (MeshKind::ThreeD, &[x, y, z]) => MatrixSource::mesh_3d(x, y, z),
                _ => return Err(CliError::Config(format!("wrong number of dimensions: {dims:?}"))),
            };
            let t = generate_test_matrix(&src)?;
            for w in &t.warnings {
                eprintln!("warning: {w}");
            }
            let m = if scaled { diagonal_scale(&t.matrix)?.0 } else { t.matrix };
            write_matrix(&out, &m)?;
            print_json(&json!({"source": src.label(), "N": m.n(), "diagonals": m.num_diagonals()}));
        }
        Command::Precon { input, precon, out } => {
            let a = load_scaled(&input)?;
            if precon == PreconditionerSpec::Clai {
                let lam = clai_spectrum(&a);
                let (_, min) = lam.min_abs();
                let max = lam.lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if out.is_some() {
                    return Err(CliError::Config("CLAI is dense and cannot be written as a banded matrix".into()));
                }
                print_json(&json!({"precon": "CLAI", "N": a.n(), "min_abs_lambda": min, "max_abs_lambda": max}));
                return Ok(true);
            }
            let (p, pa) = classical_product(&a, &precon)?;
            if let Some(out) = out {
                write_matrix(&out, &p)?;
            }
            print_json(&json!({
                "precon": precon.to_string(),
                "N": a.n(),
                "diag_P": p.num_diagonals(),
                "diag_PA_nonzero": pa.num_diagonals(),
            }));
        }
        Command::Encode { input, precon, out } => {
            let (_, pa) = classical_product(&load_scaled(&input)?, &precon)?;
            let enc = encode_banded(&pa)?;
            if let Some(out) = out {
                std::fs::write(&out, serde_json::to_string_pretty(&enc)?)?;
            }
            print_json(&json!({
                "target": enc.target,
                "subnorm": enc.subnorm,
                "qubits": enc.num_qubits(),
                "gates": enc.summary(),
            }));
        }
        Command::Verify { input, precon, tol } => {
            let (_, pa) = classical_product(&load_scaled(&input)?, &precon)?;
            let enc = encode_banded(&pa)?;
            let rep = verify_encoding(&enc, &pa.to_dense(), tol)?;
            print_json(&serde_json::to_value(&rep)?);
            return Ok(rep.passed);
        }
        Command::Trim {
            input,
            precon,
            trim_f,
            bins_json,
        } => {
            let raw = read_matrix(&input)?;
            let (a, d) = diagonal_scale(&raw)?;
            let (p, pa) = classical_product(&a, &precon)?;
            let rhs: Vec<f64> = d.main_diagonal().iter().map(|v| 1.0 / v).collect();
            let b = p.mul_vec(&rhs);
            let mut stats: Vec<TrimStats> = Vec::new();
            let mut bins = serde_json::Map::new();
            for f in trim_f {
                let t = trim_encoding(&pa, f)?;
                stats.push(trimming_metrics(&pa, &t.filtered, &b, &t.before.circuit, &t.after.circuit, f)?);
                bins.insert(f.to_string(), serde_json::to_value(&t.bins)?);
            }
            if let Some(path) = bins_json {
                std::fs::write(path, serde_json::to_string_pretty(&bins)?)?;
            }
            print_json(&serde_json::to_value(&stats)?);
        }
        Command::Sweep {
            config,
            multiplication,
            trim_f,
            parallelism,
            verify_max_qubits,
            csv,
            json,
        } => {
            let mut cfg = SweepConfig::load(&config)?;
            if let Some(m) = multiplication {
                cfg.multiplication = m;
            }
            if let Some(f) = trim_f {
                cfg.trim_f = f;
            }
            if let Some(p) = parallelism {
                cfg.parallelism = p;
            }
            if let Some(q) = verify_max_qubits {
                cfg.verify_max_qubits = q;
            }
            if csv.is_some() {
                cfg.output.csv = csv;
            }
            if json.is_some() {
                cfg.output.json = json;
            }
            let report = run_sweep(&cfg)?;
            match &cfg.output.csv {
                Some(path) => emit_report(&report, path, cfg.output.json.as_deref())?,
                None => write_csv(&report, std::io::stdout().lock())?,
            }
            let errors = report.error_rows();
            eprintln!("{} rows, {errors} errors", report.rows.len());
            return Ok(errors == 0);
        }
        Command::Report { json, csv } => {
            let report = read_json_report(&json)?;
            match csv {
                Some(path) => emit_report(&report, &path, None)?,
                None => write_csv(&report, std::io::stdout().lock())?,
            }
            return Ok(report.error_rows() == 0);
        }
    }
    Ok(true)
}
