use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qvqe::ansatz::{AnsatzKind, AnsatzSpec, Entangler, DEFAULT_LAYERS};
use qvqe::encodings::{BitString, EncodingError, FermionQubitMapping, MappingScheme};
use qvqe::fermion::{parse_ladder_product, FermionSum, OccupationVector};
use qvqe::hamio::{parse_fcidump, to_fermion_hamiltonian, MolecularIntegrals};
use qvqe::pauli::PauliSum;
use qvqe::scan::{run_scan, ScanError, ScanManifest, ScanOptions};
use qvqe::simulator::StateVector;
use qvqe::vqe::{
    exact_ground_energy, minimize, supports_parameter_shift, GradientMode, InitialParams,
    Optimizer, Sector, VqeConfig, VqeError,
};

const EXIT_PARSE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;

/// Variational quantum eigensolver on a statevector simulator.
#[derive(Parser)]
#[command(name = "qvqe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map a product of ladder operators to qubit operators.
    Map(MapArgs),
    /// Minimize the energy of one FCIDUMP Hamiltonian.
    Energy(EnergyArgs),
    /// Exact ground energy by dense diagonalization.
    Exact(ExactArgs),
    /// Run VQE over every point of a scan manifest.
    Scan(ScanArgs),
    /// Encode an occupation-number string as a qubit bit string.
    EncodeState(EncodeArgs),
}

#[derive(Args)]
struct MapArgs {
    /// jw, parity, bk or bktree.
    #[arg(long, default_value = "jw")]
    mapping: String,
    /// Number of fermionic modes.
    #[arg(long)]
    modes: usize,
    /// Ladder product such as "a^ 2 a 0"; `^` marks a creation operator.
    #[arg(long)]
    op: String,
}

#[derive(Args)]
struct EnergyArgs {
    #[arg(long)]
    fcidump: PathBuf,
    #[arg(long, default_value = "jw")]
    mapping: String,
    /// uccsd, sp or hea.
    #[arg(long, default_value = "uccsd")]
    ansatz: String,
    /// nelder-mead or gradient-descent.
    #[arg(long, default_value = "nelder-mead")]
    optimizer: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the result JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// HEA layer count.
    #[arg(long, default_value_t = DEFAULT_LAYERS)]
    layers: usize,
    /// HEA entangler: cnot or cz.
    #[arg(long, default_value = "cnot")]
    entangler: String,
    /// Energy tolerance in Hartree.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// zeros, random, random:<scale>, or a comma-separated vector.
    #[arg(long)]
    init: Option<String>,
    /// shift or fd; defaults to shift when every gate allows it.
    #[arg(long)]
    gradient: Option<String>,
    /// Write the circuit, one gate per line.
    #[arg(long)]
    dump_circuit: Option<PathBuf>,
    /// Write the optimized amplitudes (binary plus JSON sidecar).
    #[arg(long)]
    dump_state: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long)]
    fcidump: PathBuf,
    #[arg(long, default_value = "jw")]
    mapping: String,
    /// Restrict to basis states holding this many electrons.
    #[arg(long)]
    sector: Option<usize>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Continue from the checkpoint next to --out.
    #[arg(long)]
    resume: bool,
    #[arg(long)]
    out: PathBuf,
    /// Checkpoint path; defaults to <out stem>.ckpt.json.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Stop after this many points, as if killed.
    #[arg(long)]
    stop_after: Option<usize>,
    /// Write wall_time_s as 0 so reruns produce identical CSV bytes.
    #[arg(long)]
    reproducible: bool,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long, default_value = "jw")]
    mapping: String,
    /// Occupations such as 1100; character k is mode k.
    #[arg(long)]
    occupations: String,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }

    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<VqeError> for Failure {
    fn from(e: VqeError) -> Self {
        Failure::config(e.to_string())
    }
}

impl From<EncodingError> for Failure {
    fn from(e: EncodingError) -> Self {
        match e {
            EncodingError::UnknownScheme(_) | EncodingError::BadBitString(_) => {
                Failure::parse(e.to_string())
            }
            _ => Failure::config(e.to_string()),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Map(a) => cmd_map(a),
        Command::Energy(a) => cmd_energy(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Scan(a) => cmd_scan(a),
        Command::EncodeState(a) => cmd_encode(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if f.message.starts_with("error") {
                eprintln!("{}", f.message);
            } else {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn parse_flag<T: std::str::FromStr>(flag: &str, value: &str) -> Result<T, Failure>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Failure::parse(format!("--{flag}: {e}")))
}

fn load_integrals(path: &Path) -> Result<MolecularIntegrals, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    parse_fcidump(&text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn qubit_hamiltonian(
    ints: &MolecularIntegrals,
    scheme: MappingScheme,
) -> Result<(FermionQubitMapping, PauliSum), Failure> {
    let mapping = FermionQubitMapping::new(scheme, ints.modes())?;
    let h = mapping.map_sum(&to_fermion_hamiltonian(ints))?;
    Ok((mapping, h))
}

fn cmd_map(a: MapArgs) -> Outcome {
    let scheme: MappingScheme = parse_flag("mapping", &a.mapping)?;
    eprintln!("config: mapping={scheme} modes={} op={:?}", a.modes, a.op);
    let term = parse_ladder_product(&a.op).map_err(|e| Failure::parse(e.annotated()))?;
    let mapping = FermionQubitMapping::new(scheme, a.modes)?;
    let image = mapping.map_sum(&FermionSum::from_terms(vec![term]))?;
    print!("{image}");
    Ok(0)
}

fn sig_digits(v: f64, digits: i32) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{:.*}", (digits - 1) as usize, v);
    }
    let magnitude = v.abs().log10().floor() as i32;
    format!("{:.*}", (digits - 1 - magnitude).max(0) as usize, v)
}

fn cmd_exact(a: ExactArgs) -> Outcome {
    let scheme: MappingScheme = parse_flag("mapping", &a.mapping)?;
    let sector = a.sector.map_or("none".to_string(), |n| n.to_string());
    eprintln!(
        "config: fcidump={} mapping={scheme} sector={sector} oracle_limit={}",
        a.fcidump.display(),
        qvqe::pauli::oracle_limit()
    );
    let ints = load_integrals(&a.fcidump)?;
    let (mapping, h) = qubit_hamiltonian(&ints, scheme)?;
    let sector = a.sector.map(|nelec| Sector {
        mapping: &mapping,
        nelec,
    });
    let e = exact_ground_energy(&h, ints.modes(), sector)?;
    println!("E_exact = {} Ha", sig_digits(e, 12));
    Ok(0)
}

fn parse_init(text: &str) -> Result<InitialParams, Failure> {
    match text {
        "zeros" => Ok(InitialParams::Zeros),
        "random" => Ok(InitialParams::Random { scale: 0.1 }),
        _ => {
            if let Some(scale) = text.strip_prefix("random:") {
                return Ok(InitialParams::Random {
                    scale: parse_flag("init", scale)?,
                });
            }
            text.split(',')
                .map(|v| parse_flag::<f64>("init", v.trim()))
                .collect::<Result<Vec<_>, _>>()
                .map(InitialParams::Explicit)
        }
    }
}

fn cmd_energy(a: EnergyArgs) -> Outcome {
    let scheme: MappingScheme = parse_flag("mapping", &a.mapping)?;
    let kind: AnsatzKind = parse_flag("ansatz", &a.ansatz)?;
    let optimizer: Optimizer = parse_flag("optimizer", &a.optimizer)?;
    let entangler: Entangler = parse_flag("entangler", &a.entangler)?;
    let init = match &a.init {
        Some(t) => parse_init(t)?,
        None => InitialParams::default_for(kind),
    };
    let explicit_gradient = a
        .gradient
        .as_deref()
        .map(|g| parse_flag::<GradientMode>("gradient", g))
        .transpose()?;
    if a.layers == 0 {
        return Err(Failure::config("--layers must be at least 1"));
    }

    let ints = load_integrals(&a.fcidump)?;
    let (mapping, h) = qubit_hamiltonian(&ints, scheme)?;
    let spec = AnsatzSpec {
        kind,
        scheme,
        modes: ints.modes(),
        nelec: ints.nelec,
        layers: a.layers,
        entangler: Some(entangler),
    };
    let prepared = spec
        .build(&mapping)
        .map_err(|e| Failure::config(e.to_string()))?;
    let gradient = explicit_gradient.unwrap_or(if supports_parameter_shift(&prepared.circuit) {
        GradientMode::ParameterShift
    } else {
        GradientMode::FiniteDifference
    });
    let config = VqeConfig {
        optimizer,
        gradient,
        tol: a.tol,
        max_iter: a.max_iter,
        seed: a.seed,
        init,
        ..VqeConfig::default()
    };
    config.validate()?;
    let shape = match kind {
        AnsatzKind::HardwareEfficient => format!(" layers={} entangler={entangler}", a.layers),
        _ => String::new(),
    };
    eprintln!(
        "config: fcidump={} mapping={scheme} ansatz={kind}{shape} qubits={} electrons={} slots={} \
         optimizer={optimizer} gradient={gradient} tol={:e} max_iter={} seed={} init={} reference={}",
        a.fcidump.display(),
        ints.modes(),
        ints.nelec,
        prepared.circuit.n_slots(),
        config.tol,
        config.max_iter,
        config.seed,
        config.init,
        prepared.reference,
    );

    if let Some(path) = &a.dump_circuit {
        fs::write(path, prepared.circuit.to_text())
            .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    }
    let result = minimize(&h, &prepared.circuit, &prepared.reference, &config)?;
    if let Some(path) = &a.out {
        let mut json = serde_json::to_string_pretty(&result).expect("result serializes");
        json.push('\n');
        fs::write(path, json).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &a.dump_state {
        let mut state = StateVector::init_basis(prepared.circuit.n_qubits(), &prepared.reference)
            .map_err(|e| Failure::config(e.to_string()))?;
        state
            .apply_circuit(&prepared.circuit, &result.params)
            .map_err(|e| Failure::config(e.to_string()))?;
        state
            .dump_amplitudes(path)
            .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    }
    println!(
        "E = {} Ha ({} iters, converged={})",
        result.energy, result.iterations, result.converged
    );
    Ok(if result.converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn cmd_scan(a: ScanArgs) -> Outcome {
    if a.jobs == 0 {
        return Err(Failure::config("--jobs must be at least 1"));
    }
    let manifest = ScanManifest::load(&a.manifest).map_err(|e| match e {
        ScanError::Manifest { .. } | ScanError::Io { .. } => Failure::parse(e.to_string()),
        _ => Failure::config(e.to_string()),
    })?;
    let options = ScanOptions {
        parallelism: a.jobs,
        resume: a.resume,
        out_csv: a.out.clone(),
        checkpoint: a.checkpoint.clone(),
        stop_after: a.stop_after,
        reproducible: a.reproducible,
    };
    let s = &manifest.shared;
    eprintln!(
        "config: manifest={} points={} mapping={} ansatz={} optimizer={} tol={:e} max_iter={} \
         seed={} warm_start={} jobs={} resume={} out={} checkpoint={}",
        a.manifest.display(),
        manifest.points.len(),
        s.mapping,
        s.ansatz.kind,
        s.vqe.optimizer,
        s.vqe.tol,
        s.vqe.max_iter,
        s.vqe.seed,
        manifest.warm_start,
        a.jobs,
        a.resume,
        a.out.display(),
        options.checkpoint_path().display()
    );
    let report = run_scan(&manifest, &options).map_err(|e| Failure::config(e.to_string()))?;
    for (p, e) in manifest.points.iter().zip(&report.energies) {
        match e {
            Some(e) => println!("{} {} {e}", p.label, p.parameter),
            None => println!("{} {} -", p.label, p.parameter),
        }
    }
    if report.interrupted {
        eprintln!(
            "stopped after {} points; rerun with --resume to finish",
            report.ran
        );
        return Ok(0);
    }
    if report.failed > 0 {
        eprintln!("{} point(s) failed; see {}", report.failed, report.checkpoint.display());
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(0)
}

fn cmd_encode(a: EncodeArgs) -> Outcome {
    let scheme: MappingScheme = parse_flag("mapping", &a.mapping)?;
    eprintln!("config: mapping={scheme} occupations={}", a.occupations);
    let occ: OccupationVector = parse_flag("occupations", &a.occupations)?;
    let mapping = FermionQubitMapping::new(scheme, occ.len())?;
    let bits: BitString = mapping.encode(&occ)?;
    println!("{bits}");
    Ok(0)
}
