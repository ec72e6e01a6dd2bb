//! `covercount`: exact predictions, numerical connected numbers and Zariski
//! certificates for the Fermat family of line arrangements.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use covercount::exact::{divisors, CertificateEntry, DivisorWitness};
use covercount::fermat::triple_from_js;
use covercount::schema::{ArrangementFile, Metadata, Report};
use covercount::{
    carnot_exists, cross_check, predicted_connected_number, zariski_certificate, Arrangement,
    ArtalFamilyConfig, CarnotQuery, EngineConfig, Error,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_DISAGREEMENT: u8 = 4;
const VERIFY_MAX_B: u32 = 12;

#[derive(Parser)]
#[command(
    name = "covercount",
    version,
    about = "Connected numbers of line arrangements in cyclic covers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact connected number of B_{b,mu} with a tangent triple.
    Predict {
        #[arg(long)]
        b: u64,
        #[arg(long)]
        mu: u64,
        /// Tangency indices j1,j2,j3 (default 1,1,mu).
        #[arg(long, value_delimiter = ',')]
        j: Option<Vec<u32>>,
    },
    /// Carnot congruence for a degree-d curve tangent at three inflection points.
    Carnot {
        #[arg(long)]
        mu: u32,
        #[arg(long, value_delimiter = ',')]
        j: Vec<u32>,
        #[arg(long)]
        d: u32,
    },
    /// Numerical connected number by sheet tracking.
    Compute {
        #[command(flatten)]
        family: FamilyArgs,
        /// Arrangement file to load instead of a family member.
        #[arg(long, conflicts_with_all = ["b", "mu", "j", "family"])]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a family member as an arrangement file.
    Export {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Zariski certificate for degree b.
    Zariski {
        #[arg(long)]
        b: u64,
    },
    /// Predicted against computed connected numbers for every divisor of b.
    Verify {
        #[arg(long)]
        b: u32,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Family {
    /// f1·f2·f3·g + h^nu of degree b, cover degree b.
    Artal,
    /// The Fermat curve of degree mu itself, cover degree mu.
    Fermat,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long)]
    b: Option<u32>,
    #[arg(long)]
    mu: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    j: Option<Vec<u32>>,
    #[arg(long, value_enum, default_value = "artal")]
    family: Family,
}

enum Failure {
    Config(String),
    Core(Error),
    Io(String),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Io(_) => EXIT_CONFIG,
            Failure::Core(Error::MethodDisagreement { .. }) | Failure::Mismatch(_) => {
                EXIT_DISAGREEMENT
            }
            Failure::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            Failure::Core(_) => EXIT_CONFIG,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(s) | Failure::Io(s) | Failure::Mismatch(s) => s.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn js_of(j: &Option<Vec<u32>>, mu: u32) -> CliResult<[u32; 3]> {
    match j {
        None => Ok([1, 1, mu]),
        Some(v) => <[u32; 3]>::try_from(v.as_slice())
            .map_err(|_| Failure::Config("--j takes exactly three values".into())),
    }
}

impl FamilyArgs {
    fn build(&self, seed: u64) -> CliResult<(Arrangement, serde_json::Value)> {
        let mu = self
            .mu
            .ok_or_else(|| Failure::Config("--mu is required".into()))?;
        let js = js_of(&self.j, mu)?;
        match self.family {
            Family::Artal => {
                let b = self
                    .b
                    .ok_or_else(|| Failure::Config("--b is required".into()))?;
                let cfg = ArtalFamilyConfig::with_triple(b, mu, seed, triple_from_js(mu, js)?)?;
                let inputs =
                    json!({"family": self.family, "b": b, "mu": mu, "j": js, "curve_seed": seed});
                Ok((Arrangement::artal(&cfg)?, inputs))
            }
            Family::Fermat => {
                if self.b.is_some_and(|b| b != mu) {
                    return Err(Failure::Config("the Fermat family has b = mu".into()));
                }
                let inputs = json!({"family": self.family, "b": mu, "mu": mu, "j": js});
                Ok((Arrangement::fermat(mu, js)?, inputs))
            }
        }
    }
}

fn emit<T: Serialize>(value: &T, out: &Option<PathBuf>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("reports always serialize");
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Failure::Io(format!("cannot write to standard output: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

#[derive(Serialize)]
struct Prediction {
    c: u64,
    b: u64,
    mu: u64,
    nu: u64,
    j: [u32; 3],
    witnesses: Vec<DivisorWitness>,
}

fn cmd_predict(b: u64, mu: u64, j: Option<Vec<u32>>) -> CliResult<()> {
    let mu32 = u32::try_from(mu).map_err(|_| Failure::Config("--mu is too large".into()))?;
    let js = js_of(&j, mu32)?;
    let r = predicted_connected_number(b, mu, js)?;
    let result = Prediction {
        c: r.lambda,
        b: r.b,
        mu: r.mu,
        nu: r.nu,
        j: r.j,
        witnesses: r.witnesses,
    };
    let metadata = Metadata::new("predict", json!({"b": b, "mu": mu, "j": js}));
    emit(&Report { result, metadata }, &None)
}

#[derive(Serialize)]
struct CarnotAnswer {
    exists: bool,
    mu: u32,
    j: [u32; 3],
    d: u32,
    exponent: u64,
}

fn cmd_carnot(mu: u32, j: Vec<u32>, d: u32) -> CliResult<()> {
    let js = js_of(&Some(j), mu)?;
    let q = CarnotQuery::new(mu, js, d)?;
    let result = CarnotAnswer {
        exists: carnot_exists(&q),
        mu,
        j: js,
        d,
        exponent: q.exponent(),
    };
    let metadata = Metadata::new("carnot", json!({"mu": mu, "j": js, "d": d}));
    emit(&Report { result, metadata }, &None)
}

fn load_arrangement(path: &PathBuf) -> CliResult<(Arrangement, serde_json::Value)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let file = ArrangementFile::from_json(&text)?;
    let inputs = json!({"config": path.display().to_string(), "metadata": file.metadata});
    Ok((file.to_arrangement()?, inputs))
}

fn cmd_compute(
    family: FamilyArgs,
    config: Option<PathBuf>,
    seed: u64,
    out: Option<PathBuf>,
) -> CliResult<()> {
    let (arr, inputs) = match &config {
        Some(path) => load_arrangement(path)?,
        None => family.build(seed)?,
    };
    let engine = EngineConfig::with_seed(seed);
    let result = cross_check(&arr, &engine)?;
    let metadata = Metadata::new("compute", inputs).with_engine(&engine);
    emit(&Report { result, metadata }, &out)
}

fn cmd_export(family: FamilyArgs, seed: u64, out: Option<PathBuf>) -> CliResult<()> {
    let (arr, inputs) = family.build(seed)?;
    let file = ArrangementFile::from_arrangement(&arr, inputs);
    emit(&file, &out)
}

#[derive(Serialize)]
struct Certificate {
    b: u64,
    k: usize,
    entries: Vec<CertificateEntry>,
    distinct: bool,
    summary: String,
}

fn cmd_zariski(b: u64) -> CliResult<()> {
    let cert = zariski_certificate(b)?;
    let k = cert.k();
    let summary = match (k, cert.distinct) {
        (0 | 1, _) => format!("b = {b}: no pair at this degree"),
        (2, true) => format!("b = {b}: Zariski pair"),
        (3, true) => format!("b = {b}: Zariski triple"),
        (_, true) => format!("b = {b}: Zariski {k}-plet"),
        (_, false) => format!("b = {b}: connected numbers repeat, no {k}-plet"),
    };
    eprintln!("{summary}");
    let result = Certificate {
        b: cert.b,
        k,
        entries: cert.entries,
        distinct: cert.distinct,
        summary,
    };
    emit(
        &Report {
            result,
            metadata: Metadata::new("zariski", json!({"b": b})),
        },
        &None,
    )
}

#[derive(Serialize)]
struct VerifyRow {
    b: u32,
    mu: u32,
    seed: u64,
    predicted: u64,
    computed: Option<usize>,
    method_agreement: bool,
    agree: bool,
    error: Option<String>,
}

#[derive(Serialize)]
struct VerifyMatrix {
    b: u32,
    rows: Vec<VerifyRow>,
    all_agree: bool,
}

fn cmd_verify(b: u32, seeds: Vec<u64>, out: Option<PathBuf>, inject_fault: bool) -> CliResult<()> {
    if !(3..=VERIFY_MAX_B).contains(&b) {
        return Err(Failure::Config(format!(
            "verify needs 3 <= b <= {VERIFY_MAX_B}, got {b}"
        )));
    }
    let mut rows = Vec::new();
    for mu in divisors(b as u64).into_iter().filter(|&mu| mu >= 2) {
        let mu = mu as u32;
        for &seed in &seeds {
            let predicted = predicted_connected_number(b as u64, mu as u64, [1, 1, mu])?.lambda;
            let computed = ArtalFamilyConfig::new(b, mu, seed)
                .and_then(|cfg| Arrangement::artal(&cfg))
                .and_then(|arr| cross_check(&arr, &EngineConfig::with_seed(seed)));
            let row = match computed {
                Ok(r) => {
                    let c = if inject_fault { r.c + 1 } else { r.c };
                    VerifyRow {
                        b,
                        mu,
                        seed,
                        predicted,
                        computed: Some(c),
                        method_agreement: r.method_agreement,
                        agree: c as u64 == predicted && r.method_agreement,
                        error: None,
                    }
                }
                Err(e) => VerifyRow {
                    b,
                    mu,
                    seed,
                    predicted,
                    computed: None,
                    method_agreement: false,
                    agree: false,
                    error: Some(e.to_string()),
                },
            };
            rows.push(row);
        }
    }
    let all_agree = rows.iter().all(|r| r.agree);
    let mismatches = rows.iter().filter(|r| !r.agree).count();
    let metadata = Metadata::new("verify", json!({"b": b, "seeds": seeds}))
        .with_engine(&EngineConfig::default());
    emit(
        &Report {
            result: VerifyMatrix { b, rows, all_agree },
            metadata,
        },
        &out,
    )?;
    if all_agree {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("{mismatches} rows disagree")))
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("COVERCOUNT_THREADS") else {
        return Ok(());
    };
    let n: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Config(format!(
            "COVERCOUNT_THREADS must be a positive integer, got {value:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Predict { b, mu, j } => cmd_predict(b, mu, j),
        Command::Carnot { mu, j, d } => cmd_carnot(mu, j, d),
        Command::Compute {
            family,
            config,
            seed,
            out,
        } => cmd_compute(family, config, seed, out),
        Command::Export { family, seed, out } => cmd_export(family, seed, out),
        Command::Zariski { b } => cmd_zariski(b),
        Command::Verify {
            b,
            seeds,
            out,
            inject_fault,
        } => cmd_verify(b, seeds, out, inject_fault),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
