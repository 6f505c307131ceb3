//! Command-line front end.
//!
//! Exit codes: `0` success, `1` a computation or validation failure, `2`
//! a usage error (bad flags, unreadable file, schema violation).
//!
//! Payloads go to `--out FILE` or stdout. Each run also emits a
//! [`RunManifest`], written next to the payload as `FILE.manifest.json`, or
//! to stderr when the payload goes to stdout. `pdf` additionally writes its
//! metadata to `FILE.meta.json` (or stderr).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{load_config, SystemConfig};
use crate::error::Error;
use crate::gaussian::CountsVector;
use crate::hafnian::{self, SymmetricMatrix};
use crate::io::{complex_to_json, matrix_to_json, read_matrix_file};
use crate::model::estimate_scattering_time;
use crate::parallel;
use crate::pipeline::Experiment;
use crate::sampling::{self, OutcomeDistribution};
use crate::tol::Tolerances;
use crate::validation;

#[derive(Debug, Parser)]
#[command(
    name = "hybrid-sampler",
    version,
    about = "Exact count statistics of hybrid photon/atom Gaussian states"
)]
pub struct Cli {
    /// Worker threads; overrides HYBRID_SAMPLER_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coupling blocks and the Hamiltonian matrix.
    Build(ConfigArgs),
    /// Quasiparticle energies, Bogoliubov transform and Bloch-Messiah factors.
    Decompose(ConfigArgs),
    /// Covariance matrix G, base matrix C and mean occupations.
    Covariance(ConfigArgs),
    /// Joint count distribution up to a per-mode cutoff (CSV).
    Pdf(PdfArgs),
    /// Probability of a single counts vector.
    Prob(ProbArgs),
    /// Seeded samples from the enumerated distribution (CSV).
    Sample(SampleArgs),
    /// Hafnian of a symmetric matrix file.
    Haf(HafArgs),
    /// Run the invariant suite and print a pass/fail report.
    Validate(ValidateArgs),
    /// Scattering-time estimate from the first cavity mode.
    #[command(name = "scatter-time")]
    ScatterTime(ConfigArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Build(_) => "build",
            Command::Decompose(_) => "decompose",
            Command::Covariance(_) => "covariance",
            Command::Pdf(_) => "pdf",
            Command::Prob(_) => "prob",
            Command::Sample(_) => "sample",
            Command::Haf(_) => "haf",
            Command::Validate(_) => "validate",
            Command::ScatterTime(_) => "scatter-time",
        }
    }

    fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::Build(a)
            | Command::Decompose(a)
            | Command::Covariance(a)
            | Command::ScatterTime(a) => a.out.as_ref(),
            Command::Pdf(a) => a.common.out.as_ref(),
            Command::Prob(a) => a.common.out.as_ref(),
            Command::Sample(a) => a.common.out.as_ref(),
            Command::Haf(a) => a.out.as_ref(),
            Command::Validate(a) => a.common.out.as_ref(),
        }
    }
}

#[derive(Debug, Args)]
pub struct TolArgs {
    #[arg(long = "tol-stability", default_value_t = Tolerances::default().stability)]
    pub stability: f64,
    #[arg(long = "tol-degeneracy", default_value_t = Tolerances::default().degeneracy)]
    pub degeneracy: f64,
    #[arg(long = "tol-symplectic", default_value_t = Tolerances::default().symplectic)]
    pub symplectic: f64,
    #[arg(long = "tol-diagonalization", default_value_t = Tolerances::default().diagonalization)]
    pub diagonalization: f64,
    #[arg(long = "tol-reconstruction", default_value_t = Tolerances::default().reconstruction)]
    pub reconstruction: f64,
    #[arg(long = "tol-squeeze-clamp", default_value_t = Tolerances::default().squeeze_clamp)]
    pub squeeze_clamp: f64,
    #[arg(long = "tol-covariance", default_value_t = Tolerances::default().covariance)]
    pub covariance: f64,
    #[arg(long = "tol-psd", default_value_t = Tolerances::default().psd)]
    pub psd: f64,
    #[arg(long = "tol-c-symmetry", default_value_t = Tolerances::default().c_symmetry)]
    pub c_symmetry: f64,
    #[arg(long = "tol-imaginary", default_value_t = Tolerances::default().imaginary)]
    pub imaginary: f64,
    #[arg(long = "tol-negative-clamp", default_value_t = Tolerances::default().negative_clamp)]
    pub negative_clamp: f64,
    #[arg(long = "tol-moments", default_value_t = Tolerances::default().moments)]
    pub moments: f64,
    #[arg(long = "tol-min-captured-mass", default_value_t = Tolerances::default().min_captured_mass)]
    pub min_captured_mass: f64,
}

impl TolArgs {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            stability: self.stability,
            degeneracy: self.degeneracy,
            symplectic: self.symplectic,
            diagonalization: self.diagonalization,
            reconstruction: self.reconstruction,
            squeeze_clamp: self.squeeze_clamp,
            covariance: self.covariance,
            psd: self.psd,
            c_symmetry: self.c_symmetry,
            imaginary: self.imaginary,
            negative_clamp: self.negative_clamp,
            moments: self.moments,
            min_captured_mass: self.min_captured_mass,
        }
    }
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Write the payload here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Args)]
pub struct PdfArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Largest count per mode.
    #[arg(long)]
    pub cutoff: u32,
    /// Sum out the atom modes.
    #[arg(long)]
    pub photons_only: bool,
}

#[derive(Debug, Args)]
pub struct ProbArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Counts "N1,..,q1,..": atom modes first, then photon modes.
    #[arg(long)]
    pub counts: String,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    #[arg(long)]
    pub cutoff: u32,
    /// Number of samples.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct HafArgs {
    /// Matrix JSON: row-major nested arrays of numbers or [re, im] pairs.
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Cutoff for the enumeration checks (default: from mean occupations).
    #[arg(long)]
    pub cutoff: Option<u32>,
}

/// Provenance record emitted with every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    /// SHA-256 of the input file bytes.
    pub config_digest: String,
    pub tool_version: String,
    pub subcommand: String,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub thread_cap: Option<usize>,
    pub wall_time_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

struct Input {
    bytes: Vec<u8>,
    text: String,
}

fn read_input(path: &Path) -> Result<Input, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| Failure::Usage(format!("{} is not UTF-8: {e}", path.display())))?;
    Ok(Input { bytes, text })
}

struct Loaded {
    input: Input,
    config: SystemConfig,
    tol: Tolerances,
}

fn load(args: &ConfigArgs) -> Result<Loaded, Failure> {
    let input = read_input(&args.config)?;
    let config = load_config(&input.text).map_err(usage)?;
    Ok(Loaded {
        input,
        config,
        tol: args.tol.tolerances(),
    })
}

/// Result of one subcommand before it is written out.
struct Product {
    payload: String,
    /// Extra JSON written as `FILE.meta.json` (or to stderr).
    meta: Option<Value>,
    input_digest: String,
    parameters: Value,
    seed: Option<u64>,
    /// Exit status when the command itself completed.
    status: i32,
}

impl Product {
    fn ok(payload: String, input: &Input, parameters: Value) -> Self {
        Self {
            payload,
            meta: None,
            input_digest: sha256_hex(&input.bytes),
            parameters,
            seed: None,
            status: 0,
        }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{} {sign} {}i", z.re, z.im.abs())
}

fn experiment(loaded: &Loaded) -> Result<Experiment, Failure> {
    Experiment::new(loaded.config.clone(), loaded.tol).map_err(|e| match e {
        Error::ConfigParse { .. } | Error::InvalidConfig { .. } | Error::GridTooCoarse { .. } => {
            usage(e)
        }
        other => other.into(),
    })
}

fn tol_json(tol: &Tolerances) -> Value {
    serde_json::to_value(tol).expect("tolerances serialize")
}

fn cmd_build(args: &ConfigArgs) -> Result<Product, Failure> {
    let loaded = load(args)?;
    let exp = experiment(&loaded)?;
    let grid = exp.basis.as_ref().map(|b| {
        json!({
            "points": b.x.len(),
            "half_length": loaded.config.grid.half_length,
            "orthonormality_residual": b.orthonormality_residual(),
        })
    });
    let payload = json!({
        "M_a": exp.hamiltonian.m_a,
        "M_ph": exp.hamiltonian.m_ph,
        "blocks": exp.blocks.to_json(),
        "hamiltonian": matrix_to_json(&exp.hamiltonian.h),
        "bdg_matrix": matrix_to_json(&exp.hamiltonian.bdg_matrix()),
        "grid": grid,
    });
    Ok(Product::ok(
        json_text(&payload),
        &loaded.input,
        json!({ "tolerances": tol_json(&loaded.tol) }),
    ))
}

fn cmd_decompose(args: &ConfigArgs) -> Result<Product, Failure> {
    let loaded = load(args)?;
    let exp = experiment(&loaded)?;
    let report = exp.stability();
    let dec = exp.decompose()?;
    let factors = exp.bloch_messiah(&dec)?;
    let payload = json!({
        "stability": {
            "stable": report.stable,
            "positive_definite": report.positive_definite,
            "min_eigenvalue": report.min_eigenvalue,
            "bdg_positive_definite": report.bdg_positive_definite,
            "bdg_min_eigenvalue": report.bdg_min_eigenvalue,
            "symplectic_eigenvalues": report.symplectic_eigenvalues.iter().map(|&z| complex_to_json(z)).collect::<Vec<_>>(),
        },
        "energies": dec.energies,
        "A": matrix_to_json(&dec.a),
        "B": matrix_to_json(&dec.b),
        "symplectic_residual": dec.symplectic_residual(),
        "diagonalization_residual": dec.diagonalization_residual(&exp.hamiltonian),
        "bloch_messiah": {
            "r": factors.r,
            "V": matrix_to_json(&factors.v),
            "W": matrix_to_json(&factors.w),
            "reconstruction_residual": factors.reconstruction_residual(&dec),
        },
    });
    Ok(Product::ok(
        json_text(&payload),
        &loaded.input,
        json!({ "tolerances": tol_json(&loaded.tol) }),
    ))
}

fn cmd_covariance(args: &ConfigArgs) -> Result<Product, Failure> {
    let loaded = load(args)?;
    let exp = experiment(&loaded)?;
    let state = exp.state()?;
    let payload = json!({
        "temperature": state.temperature,
        "G": matrix_to_json(&state.g),
        "C": matrix_to_json(&state.c),
        "mean_occupations": state.mean_occupations(),
        "log_norm": state.log_norm,
        "c_asymmetry": state.c_asymmetry,
        "fingerprint": state.fingerprint(),
    });
    Ok(Product::ok(
        json_text(&payload),
        &loaded.input,
        json!({ "tolerances": tol_json(&loaded.tol) }),
    ))
}

fn column_labels(dist: &OutcomeDistribution, m_a_total: usize) -> Vec<String> {
    dist.modes
        .iter()
        .map(|&k| {
            if k < m_a_total {
                format!("N{}", k + 1)
            } else {
                format!("q{}", k - m_a_total + 1)
            }
        })
        .collect()
}

fn cmd_pdf(args: &PdfArgs) -> Result<Product, Failure> {
    let loaded = load(&args.common)?;
    let exp = experiment(&loaded)?;
    let state = exp.state()?;
    let mut dist = sampling::enumerate_distribution_with(&state, args.cutoff, &loaded.tol)?;
    if args.photons_only {
        if state.m_ph == 0 {
            return Err(Failure::Usage("--photons-only needs M_ph ≥ 1".into()));
        }
        dist = sampling::photon_marginal(&dist)?;
    }
    let mut csv = column_labels(&dist, state.m_a).join(",");
    csv.push_str(",probability\n");
    for (counts, p) in &dist.probabilities {
        csv.push_str(&format!("{counts},{p}\n"));
    }
    let mut product = Product::ok(
        csv,
        &loaded.input,
        json!({
            "cutoff": args.cutoff,
            "photons_only": args.photons_only,
            "tolerances": tol_json(&loaded.tol),
        }),
    );
    product.meta = Some(json!({
        "cutoff": dist.cutoff,
        "modes": column_labels(&dist, state.m_a),
        "captured_mass": dist.captured_mass,
        "fingerprint": dist.fingerprint,
        "clamped": dist.clamped,
        "outcomes": dist.probabilities.len(),
    }));
    Ok(product)
}

fn cmd_prob(args: &ProbArgs) -> Result<Product, Failure> {
    let loaded = load(&args.common)?;
    let counts = CountsVector::parse(&args.counts).map_err(usage)?;
    if counts.len() != loaded.config.modes() {
        return Err(Failure::Usage(format!(
            "--counts has {} entries, the configuration has M_a + M_ph = {}",
            counts.len(),
            loaded.config.modes()
        )));
    }
    let exp = experiment(&loaded)?;
    let state = exp.state()?;
    let p = sampling::outcome_probability_with(&state, &counts, &loaded.tol)?;
    Ok(Product::ok(
        format!("{p}\n"),
        &loaded.input,
        json!({ "counts": counts, "tolerances": tol_json(&loaded.tol) }),
    ))
}

fn cmd_sample(args: &SampleArgs) -> Result<Product, Failure> {
    let loaded = load(&args.common)?;
    let exp = experiment(&loaded)?;
    let state = exp.state()?;
    let dist = sampling::enumerate_distribution_with(&state, args.cutoff, &loaded.tol)?;
    let samples = sampling::sample_with(&dist, args.n, args.seed, &loaded.tol)?;
    let mut csv = column_labels(&dist, state.m_a).join(",");
    csv.push('\n');
    for s in &samples {
        csv.push_str(&format!("{s}\n"));
    }
    let mut product = Product::ok(
        csv,
        &loaded.input,
        json!({
            "cutoff": args.cutoff,
            "n": args.n,
            "captured_mass": dist.captured_mass,
            "fingerprint": dist.fingerprint,
            "generator": "ChaCha20 (rand_chacha), stream = batch index",
            "batch": sampling::SAMPLE_BATCH,
            "tolerances": tol_json(&loaded.tol),
        }),
    );
    product.seed = Some(args.seed);
    Ok(product)
}

fn cmd_haf(args: &HafArgs) -> Result<Product, Failure> {
    let input = read_input(&args.matrix)?;
    let m = read_matrix_file(&args.matrix).map_err(usage)?;
    let x = SymmetricMatrix::new(m).map_err(usage)?;
    let value = hafnian::hafnian(&x)?;
    let mut out = format!("{}\n", format_complex(value));
    if x.dim() <= hafnian::NAIVE_MAX_DIM && x.dim() <= hafnian::POWERTRACE_MAX_DIM {
        let naive = hafnian::hafnian_naive(&x)?;
        let pt = hafnian::hafnian_powertrace(&x)?;
        let diff = (naive - pt).norm();
        out.push_str(&format!("matching-sum: {}\n", format_complex(naive)));
        out.push_str(&format!("power-trace: {}\n", format_complex(pt)));
        out.push_str(&format!(
            "agreement: |difference| = {diff:e}, relative = {:e}\n",
            diff / naive.norm().max(f64::MIN_POSITIVE)
        ));
    } else {
        out.push_str(&format!(
            "agreement: skipped, matching sum limited to dimension {}\n",
            hafnian::NAIVE_MAX_DIM
        ));
    }
    Ok(Product::ok(out, &input, json!({ "dimension": x.dim() })))
}

fn cmd_validate(args: &ValidateArgs) -> Result<Product, Failure> {
    let loaded = load(&args.common)?;
    let exp = experiment(&loaded)?;
    let checks = validation::run_suite(&exp, args.cutoff)?;
    let mut out = String::new();
    for c in &checks {
        out.push_str(&format!("{c}\n"));
    }
    let passed = validation::all_passed(&checks);
    out.push_str(if passed {
        "RESULT: PASS\n"
    } else {
        "RESULT: FAIL\n"
    });
    let mut product = Product::ok(
        out,
        &loaded.input,
        json!({ "cutoff": args.cutoff, "tolerances": tol_json(&loaded.tol) }),
    );
    product.status = if passed { 0 } else { 1 };
    Ok(product)
}

fn cmd_scatter_time(args: &ConfigArgs) -> Result<Product, Failure> {
    let loaded = load(args)?;
    let tau = estimate_scattering_time(&loaded.config)?;
    Ok(Product::ok(format!("{tau}\n"), &loaded.input, json!({})))
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Parse `args` (including the program name) and run one subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let thread_cap = match cli.threads {
        Some(0) => {
            let _ = writeln!(err, "error: --threads must be ≥ 1");
            return 2;
        }
        Some(n) => Some(n),
        None => match parallel::thread_cap_from_env() {
            Ok(cap) => cap,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return 2;
            }
        },
    };
    let name = cli.command.name();
    let out_path = cli.command.out().cloned();

    let start = Instant::now();
    let outcome = parallel::with_threads(thread_cap, || match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Covariance(a) => cmd_covariance(a),
        Command::Pdf(a) => cmd_pdf(a),
        Command::Prob(a) => cmd_prob(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Haf(a) => cmd_haf(a),
        Command::Validate(a) => cmd_validate(a),
        Command::ScatterTime(a) => cmd_scatter_time(a),
    });
    let product = match outcome {
        Ok(Ok(p)) => p,
        Ok(Err(Failure::Usage(msg))) => {
            let _ = writeln!(err, "error: {msg}");
            return 2;
        }
        Ok(Err(Failure::Compute(msg))) => {
            let _ = writeln!(err, "error: {msg}");
            return 1;
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let manifest = RunManifest {
        config_digest: product.input_digest.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: name.to_string(),
        parameters: product.parameters.clone(),
        seed: product.seed,
        thread_cap,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let manifest_text = json_text(&serde_json::to_value(&manifest).expect("manifest serializes"));
    let written = match &out_path {
        Some(path) => write_file(path, &product.payload)
            .and_then(|_| write_file(&sidecar(path, ".manifest.json"), &manifest_text))
            .and_then(|_| match &product.meta {
                Some(meta) => write_file(&sidecar(path, ".meta.json"), &json_text(meta)),
                None => Ok(()),
            }),
        None => {
            let _ = out.write_all(product.payload.as_bytes());
            if let Some(meta) = &product.meta {
                let _ = err.write_all(json_text(meta).as_bytes());
            }
            let _ = err.write_all(manifest_text.as_bytes());
            Ok(())
        }
    };
    if let Err(msg) = written {
        let _ = writeln!(err, "error: {msg}");
        return 2;
    }
    product.status
}
