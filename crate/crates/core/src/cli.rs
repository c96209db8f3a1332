//! The `mkmr` command-line tool.
//!
//! Exit codes: 0 success, 1 other, 2 usage, 3 I/O, 4 bad file format,
//! 5 dimension or key mismatch, 6 too many inputs, 7 invalid parameters,
//! 8 a statistical check failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::codec::{self, decode_stream, encode_image, window_width, GrayImage, WindowStream};
use crate::error::Error;
use crate::field::FieldElement;
use crate::mkmr::{
    self, decrypt_all, decrypt_recipient, encrypt, keygen, setup_with, MessageMatrix, Overrides, ParamsFile,
    RecipientKey, SchemeParams, DEFAULT_LAMBDA,
};
use crate::prm::SecretKeyMatrix;
use crate::sampler::{GaussianSpec, Generator, Seed};
use crate::stats::{self, TestRecord};

/// Reference wall-clock figure for the full-size workload (1024 streams of
/// 512x512 pixels). Informational only.
pub const REFERENCE_SECONDS: f64 = 4.0;
pub const REFERENCE_M: usize = 1024;
pub const REFERENCE_L: usize = 512 * 512;

#[derive(Debug, Parser)]
#[command(name = "mkmr", version, about = "Multi-key multi-recipient LWE encryption")]
pub struct Cli {
    /// Parameters file written by `setup`.
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// 64 hex digits; makes every command reproducible.
    #[arg(long, global = true)]
    pub seed: Option<String>,
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a parameters file.
    Setup(SetupArgs),
    /// Generate the key matrix and one key file per recipient.
    Keygen(KeygenArgs),
    /// Encrypt images or streams, one per recipient row.
    Encrypt(EncryptArgs),
    /// Recover one recipient's row.
    Decrypt(DecryptArgs),
    /// Run statistical suites.
    Stats(StatsArgs),
    /// Measure encryption throughput.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SetupArgs {
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: u32,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub tail_cut: Option<u32>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Only write the key matrix.
    #[arg(long)]
    pub no_recipient_files: bool,
}

#[derive(Debug, Args)]
pub struct EncryptArgs {
    /// Key matrix file.
    #[arg(long)]
    pub keys: PathBuf,
    /// PGM, raw image or stream file; row order follows argument order.
    #[arg(long = "input", short, required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Defaults to `<out>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("key-source").required(true).args(["key", "keys"])))]
pub struct DecryptArgs {
    /// Recipient key file.
    #[arg(long)]
    pub key: Option<PathBuf>,
    /// Key matrix file; requires --row.
    #[arg(long, requires = "row")]
    pub keys: Option<PathBuf>,
    /// One-based row to recover; defaults to the recipient key's own row.
    #[arg(long)]
    pub row: Option<usize>,
    #[arg(long)]
    pub ciphertext: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Decode the first R*C elements as an R x C image and write a PGM.
    #[arg(long, num_args = 2, value_names = ["R", "C"])]
    pub image: Option<Vec<usize>>,
    /// Sender manifest; used for image dimensions and stream length.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// sampler, lwe, ciphertext, wrong-key, ind-cpa, collusion or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Test a stream file for uniformity instead of running a suite.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Write one JSON record per test to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 256)]
    pub m: usize,
    #[arg(long, default_value_t = 4096)]
    pub l: usize,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// Write the report as JSON to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{context}: {source}")]
    Scheme { context: String, source: Error },
    #[error("{path}: invalid JSON: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{0} statistical check(s) failed")]
    StatsFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 3,
            CliError::Json { .. } => 4,
            CliError::Usage(_) => 2,
            CliError::StatsFailed(_) => 8,
            CliError::Scheme { source, .. } => match source {
                Error::BadMagic { .. }
                | Error::UnsupportedVersion(_)
                | Error::Truncated { .. }
                | Error::TrailingData(_)
                | Error::ChecksumMismatch { .. }
                | Error::MalformedHeader(_)
                | Error::NonCanonical { .. }
                | Error::MalformedImage(_) => 4,
                Error::DimensionMismatch { .. }
                | Error::ModulusMismatch { .. }
                | Error::RecipientOutOfRange { .. }
                | Error::WindowTooWide { .. } => 5,
                Error::TooManyStreams { .. } => 6,
                Error::NotPrime(_)
                | Error::ModulusOutOfRange(_)
                | Error::InvalidGaussian(_)
                | Error::NoiseBudget { .. }
                | Error::InvalidSeed(_)
                | Error::InvalidParams(_)
                | Error::UnsupportedLambda(_)
                | Error::ModulusTooSmall(_) => 7,
                _ => 1,
            },
        }
    }

    /// Stable one-word class used in diagnostics.
    pub fn class(&self) -> &'static str {
        match self.exit_code() {
            2 => "usage",
            3 => "io",
            4 => "bad-format",
            5 => "dimension-mismatch",
            6 => "too-many-inputs",
            7 => "invalid-parameters",
            8 => "check-failed",
            _ => "error",
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for crate::error::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|source| CliError::Scheme {
            context: what(),
            source,
        })
    }
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    serde_json::from_slice(&read(path)?).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write(path, text.as_bytes())
}

/// Per-row entry of the sender manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    /// One-based recipient row.
    pub row: usize,
    pub label: String,
    /// `image` or `stream`.
    pub kind: String,
    /// True payload length; entries beyond it are padding.
    pub length: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub image_rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub image_cols: Option<usize>,
}

/// Sender-side record of what each ciphertext row carries. Not needed to
/// decrypt a full row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub q: u64,
    pub m: usize,
    pub l: usize,
    pub window: usize,
    /// `deterministic` when produced with `--seed`, else `nondeterministic`.
    pub randomness: String,
    pub rows: Vec<ManifestRow>,
    /// Rows past the listed ones carry uniform random filler.
    pub filler_rows: usize,
}

impl Manifest {
    pub fn row(&self, j: usize) -> Option<&ManifestRow> {
        self.rows.iter().find(|r| r.row == j)
    }
}

/// Throughput measurement written by `bench`.
#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub m: usize,
    pub l: usize,
    pub reps: usize,
    pub encrypt_seconds_best: f64,
    pub encrypt_seconds_mean: f64,
    pub decrypt_seconds_best: f64,
    pub elements_per_second: f64,
    pub mults_per_second: f64,
    pub reference_m: usize,
    pub reference_l: usize,
    pub reference_megabytes: f64,
    pub projected_reference_seconds: f64,
    pub reference_seconds: f64,
}

impl BenchReport {
    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("workload           m={} l={} reps={}", self.m, self.l, self.reps),
            format!(
                "encrypt            best {:.4} s, mean {:.4} s",
                self.encrypt_seconds_best, self.encrypt_seconds_mean
            ),
            format!("decrypt (all rows) best {:.4} s", self.decrypt_seconds_best),
            format!("throughput         {:.3e} elements/s", self.elements_per_second),
            format!("                   {:.3e} modular mult-adds/s", self.mults_per_second),
            format!(
                "projection         m={} l={} (~{:.0} MB): {:.2} s",
                self.reference_m, self.reference_l, self.reference_megabytes, self.projected_reference_seconds
            ),
            format!(
                "reference          {:.1} s reported for the same workload (informational, not a gate)",
                self.reference_seconds
            ),
        ]
    }
}

struct Ctx {
    params: Option<PathBuf>,
    seed: Option<Seed>,
    quiet: bool,
}

impl Ctx {
    fn rng(&self) -> Generator {
        self.seed.unwrap_or_else(Seed::from_entropy).generator()
    }

    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn scheme_params(&self) -> CliResult<SchemeParams> {
        match &self.params {
            Some(p) => {
                let file: ParamsFile = read_json(p)?;
                SchemeParams::from_file(&file).context(|| p.display().to_string())
            }
            None => mkmr::setup(DEFAULT_LAMBDA).context(|| "default parameters".into()),
        }
    }

    /// Noise for a key of modulus `q`: the params file's if given, else the
    /// default distribution.
    fn noise_for(&self, keys: &SecretKeyMatrix) -> CliResult<GaussianSpec> {
        if self.params.is_some() {
            let p = self.scheme_params()?;
            if p.field != *keys.field() || p.m != keys.dim() {
                return Err(CliError::Scheme {
                    context: "parameters file does not match the key matrix".into(),
                    source: Error::DimensionMismatch {
                        expected: p.m,
                        actual: keys.dim(),
                    },
                });
            }
            Ok(p.noise)
        } else {
            GaussianSpec::default_for(keys.field()).context(|| "noise".into())
        }
    }
}

/// Parses arguments and runs the command.
pub fn run(cli: Cli) -> CliResult<()> {
    let seed = cli
        .seed
        .as_deref()
        .map(Seed::from_hex)
        .transpose()
        .context(|| "--seed".into())?;
    let ctx = Ctx {
        params: cli.params,
        seed,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Setup(a) => cmd_setup(&ctx, a),
        Command::Keygen(a) => cmd_keygen(&ctx, a),
        Command::Encrypt(a) => cmd_encrypt(&ctx, a),
        Command::Decrypt(a) => cmd_decrypt(&ctx, a),
        Command::Stats(a) => cmd_stats(&ctx, a),
        Command::Bench(a) => cmd_bench(&ctx, a).map(|_| ()),
    }
}

fn cmd_setup(ctx: &Ctx, a: SetupArgs) -> CliResult<()> {
    let params = setup_with(
        a.lambda,
        &Overrides {
            m: a.m,
            q: a.q,
            sigma: a.sigma,
            tail_cut: a.tail_cut,
        },
    )
    .context(|| "setup".into())?;
    write_json(&a.out, &params.to_file())?;
    ctx.say(format!(
        "wrote {} (m={}, q={}, sigma={}, tail cut={}, noise bound={})",
        a.out.display(),
        params.m,
        params.field.modulus(),
        params.noise.sigma(),
        params.noise.tail_cut(),
        params.noise.bound()
    ));
    Ok(())
}

pub fn recipient_file_name(j: usize) -> String {
    format!("recipient-{j:04}.mkrk")
}

pub const KEY_MATRIX_FILE: &str = "keys.mksk";

fn cmd_keygen(ctx: &Ctx, a: KeygenArgs) -> CliResult<()> {
    let params = ctx.scheme_params()?;
    let keys = keygen(&params, &mut ctx.rng());
    fs::create_dir_all(&a.out_dir).map_err(|source| CliError::Io {
        path: a.out_dir.clone(),
        source,
    })?;
    write(&a.out_dir.join(KEY_MATRIX_FILE), &mkmr::serialize_key_matrix(&keys))?;
    if !a.no_recipient_files {
        for j in 1..=keys.dim() {
            let k = keys.recipient_key(j).context(|| format!("recipient {j}"))?;
            write(
                &a.out_dir.join(recipient_file_name(j)),
                &mkmr::serialize_recipient_key(&k),
            )?;
        }
    }
    ctx.say(format!("wrote {} keys to {}", keys.dim(), a.out_dir.display()));
    Ok(())
}

/// An encryption input after format detection.
enum Input {
    Image(GrayImage),
    Stream(Vec<FieldElement>),
}

fn load_input(path: &Path, field: &crate::field::FieldParams) -> CliResult<Input> {
    let bytes = read(path)?;
    let ctx = || path.display().to_string();
    if bytes.starts_with(b"P5") {
        Ok(Input::Image(codec::read_pgm(&bytes).context(ctx)?))
    } else if bytes.starts_with(mkmr::STREAM_MAGIC) {
        let (f, xs) = mkmr::deserialize_stream(&bytes).context(ctx)?;
        if f != *field {
            return Err(CliError::Scheme {
                context: ctx(),
                source: Error::ModulusMismatch {
                    left: field.modulus(),
                    right: f.modulus(),
                },
            });
        }
        Ok(Input::Stream(xs))
    } else {
        Ok(Input::Image(codec::read_raw(&bytes).context(ctx)?))
    }
}

fn cmd_encrypt(ctx: &Ctx, a: EncryptArgs) -> CliResult<()> {
    let keys = mkmr::deserialize_key_matrix(&read(&a.keys)?).context(|| a.keys.display().to_string())?;
    let field = *keys.field();
    let noise = ctx.noise_for(&keys)?;
    if a.inputs.len() > keys.dim() {
        return Err(CliError::Scheme {
            context: "encrypt".into(),
            source: Error::TooManyStreams {
                given: a.inputs.len(),
                m: keys.dim(),
            },
        });
    }
    let t = window_width(&field).context(|| "window width".into())?;
    let mut streams = Vec::with_capacity(a.inputs.len());
    let mut rows = Vec::with_capacity(a.inputs.len());
    for (i, path) in a.inputs.iter().enumerate() {
        let label = path
            .file_name()
            .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into());
        let (stream, row) = match load_input(path, &field)? {
            Input::Image(img) => {
                let ws = encode_image(&img, t, &field).context(|| path.display().to_string())?;
                let row = ManifestRow {
                    row: i + 1,
                    label,
                    kind: "image".into(),
                    length: ws.elements().len(),
                    image_rows: Some(img.rows()),
                    image_cols: Some(img.cols()),
                };
                (ws.into_elements(), row)
            }
            Input::Stream(xs) => {
                let row = ManifestRow {
                    row: i + 1,
                    label,
                    kind: "stream".into(),
                    length: xs.len(),
                    image_rows: None,
                    image_cols: None,
                };
                (xs, row)
            }
        };
        streams.push(stream);
        rows.push(row);
    }
    let mut rng = ctx.rng();
    let msg = codec::pack_messages(&streams, keys.dim(), None, &field, &mut rng).context(|| "packing".into())?;
    let c = encrypt(&keys, &msg, &noise, &mut rng).context(|| "encrypt".into())?;
    write(&a.out, &mkmr::serialize_ciphertext(&c))?;
    let manifest = Manifest {
        q: field.modulus(),
        m: keys.dim(),
        l: msg.cols(),
        window: t,
        randomness: if ctx.seed.is_some() {
            "deterministic"
        } else {
            "nondeterministic"
        }
        .into(),
        rows,
        filler_rows: keys.dim() - streams.len(),
    };
    let manifest_path = a.manifest.unwrap_or_else(|| default_manifest_path(&a.out));
    write_json(&manifest_path, &manifest)?;
    ctx.say(format!(
        "encrypted {} input(s) into {} rows x {} columns -> {} (manifest {})",
        streams.len(),
        c.rows(),
        c.num_columns(),
        a.out.display(),
        manifest_path.display()
    ));
    Ok(())
}

pub fn default_manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn cmd_decrypt(ctx: &Ctx, a: DecryptArgs) -> CliResult<()> {
    let c = mkmr::deserialize_ciphertext(&read(&a.ciphertext)?).context(|| a.ciphertext.display().to_string())?;
    let field = *c.field();
    let key = match (&a.key, &a.keys) {
        (Some(path), None) => {
            let k = mkmr::deserialize_recipient_key(&read(path)?).context(|| path.display().to_string())?;
            match a.row {
                Some(j) if j != k.index() => {
                    RecipientKey::new(*k.field(), j, k.vector().to_vec()).context(|| format!("row {j}"))?
                }
                _ => k,
            }
        }
        (None, Some(path)) => {
            let s = mkmr::deserialize_key_matrix(&read(path)?).context(|| path.display().to_string())?;
            let j = a.row.ok_or_else(|| CliError::Usage("--keys requires --row".into()))?;
            s.recipient_key(j).context(|| format!("row {j}"))?
        }
        _ => return Err(CliError::Usage("give exactly one of --key or --keys".into())),
    };
    let row = key.index();
    let mut plain = decrypt_recipient(&key, &c).context(|| "decrypt".into())?;

    let manifest: Option<Manifest> = a.manifest.as_deref().map(read_json).transpose()?;
    let entry = manifest.as_ref().and_then(|m| m.row(row));
    let dims = match (&a.image, entry) {
        (Some(d), _) => Some((d[0], d[1])),
        (None, Some(e)) if e.kind == "image" => e.image_rows.zip(e.image_cols),
        _ => None,
    };
    match dims {
        Some((r, cc)) => {
            let n = r * cc;
            if plain.len() < n {
                return Err(CliError::Scheme {
                    context: format!("image {r}x{cc}"),
                    source: Error::DimensionMismatch {
                        expected: n,
                        actual: plain.len(),
                    },
                });
            }
            plain.truncate(n);
            let t = window_width(&field).context(|| "window width".into())?;
            let ws = WindowStream::from_elements(r, cc, t, plain).context(|| "window stream".into())?;
            let img = decode_stream(&ws, &field).context(|| "decode".into())?;
            write(&a.out, &codec::write_pgm(&img))?;
            ctx.say(format!("row {row}: decoded {r}x{cc} image -> {}", a.out.display()));
        }
        None => {
            if let Some(e) = entry {
                plain.truncate(e.length);
            }
            write(&a.out, &mkmr::serialize_stream(&field, &plain))?;
            ctx.say(format!("row {row}: {} elements -> {}", plain.len(), a.out.display()));
        }
    }
    Ok(())
}

fn cmd_stats(ctx: &Ctx, a: StatsArgs) -> CliResult<()> {
    let records = match &a.input {
        Some(path) => {
            let (field, xs) = mkmr::deserialize_stream(&read(path)?).context(|| path.display().to_string())?;
            stats::suite::stream_records(&format!("stream-uniform:{}", path.display()), &field, &xs)
                .context(|| "stats".into())?
        }
        None => {
            let seed = ctx.seed.unwrap_or_else(Seed::from_entropy);
            stats::suite::run(&a.suite, seed).context(|| format!("suite {}", a.suite))?
        }
    };
    report_records(ctx, &records, a.report.as_deref())?;
    let failed = records.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(CliError::StatsFailed(failed));
    }
    Ok(())
}

fn report_records(ctx: &Ctx, records: &[TestRecord], path: Option<&Path>) -> CliResult<()> {
    for r in records {
        ctx.say(r.to_line());
    }
    if let Some(p) = path {
        let mut out = String::new();
        for r in records {
            out.push_str(&serde_json::to_string(r).expect("serializable"));
            out.push('\n');
        }
        write(p, out.as_bytes())?;
    }
    Ok(())
}

/// Times encryption and decryption of an `m x l` random workload and
/// projects the full-size workload from the measured rate.
pub fn bench(m: usize, l: usize, reps: usize, seed: Seed) -> crate::error::Result<BenchReport> {
    let params = setup_with(
        0,
        &Overrides {
            m: Some(m),
            q: Some(crate::field::MERSENNE_31),
            ..Default::default()
        },
    )?;
    let mut rng = seed.generator();
    let keys = keygen(&params, &mut rng);
    let msg = MessageMatrix::random(params.field, m, l, &mut rng);
    let reps = reps.max(1);
    let mut enc = Vec::with_capacity(reps);
    let mut dec = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t0 = Instant::now();
        let c = encrypt(&keys, &msg, &params.noise, &mut rng)?;
        enc.push(t0.elapsed());
        let t1 = Instant::now();
        let p = decrypt_all(&keys, &c)?;
        dec.push(t1.elapsed());
        std::hint::black_box(p);
    }
    let best = enc
        .iter()
        .min()
        .copied()
        .unwrap_or(Duration::ZERO)
        .as_secs_f64()
        .max(1e-9);
    let mean = enc.iter().map(Duration::as_secs_f64).sum::<f64>() / reps as f64;
    let dbest = dec.iter().min().copied().unwrap_or(Duration::ZERO).as_secs_f64();
    let mults = (m * m * l) as f64;
    let mults_per_second = mults / best;
    let reference_mults = (REFERENCE_M * REFERENCE_M * REFERENCE_L) as f64;
    Ok(BenchReport {
        m,
        l,
        reps,
        encrypt_seconds_best: best,
        encrypt_seconds_mean: mean,
        decrypt_seconds_best: dbest,
        elements_per_second: (m * l) as f64 / best,
        mults_per_second,
        reference_m: REFERENCE_M,
        reference_l: REFERENCE_L,
        reference_megabytes: (REFERENCE_M * REFERENCE_L) as f64 / 1e6,
        projected_reference_seconds: reference_mults / mults_per_second,
        reference_seconds: REFERENCE_SECONDS,
    })
}

fn cmd_bench(ctx: &Ctx, a: BenchArgs) -> CliResult<BenchReport> {
    if a.m < 2 || a.l == 0 {
        return Err(CliError::Usage("bench needs m >= 2 and l >= 1".into()));
    }
    let report = bench(a.m, a.l, a.reps, ctx.seed.unwrap_or_else(Seed::from_entropy)).context(|| "bench".into())?;
    for line in report.lines() {
        ctx.say(line);
    }
    if let Some(p) = &a.report {
        write_json(p, &report)?;
    }
    Ok(report)
}
