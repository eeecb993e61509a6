//! The `prc` command line.
//!
//! Exit codes: 0 success, 1 usage or parameter error, 2 the attack reported
//! FAILURE, 3 I/O or file-format error. Every run writes one manifest: to
//! `--manifest` if given, next to `--out` as `<out>.manifest.json` otherwise,
//! and to stderr when there is no output file.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::attacks::mitm::{self, MitmConfig};
use crate::attacks::overlay::{self, OverlayConfig};
use crate::attacks::pkfree::{self, PkFreeConfig};
use crate::attacks::{decoder_aligned_tau, default_tau, weakkey};
use crate::channel::{self, GimChannelParams, SyntheticTokenModel};
use crate::complexity::{advise_parameters, emit_table};
use crate::error::{Error, Result};
use crate::io;
use crate::prc::{self, Codeword, PrcParams, Scheme};
use crate::report::{AttackReport, RunManifest};
use crate::rng::{derive_seed, rng_for, Stream};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ATTACK_FAILED: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "prc", version, about = "Key generation, encoding and attacks for LDPC-based pseudorandom codes")]
pub struct Cli {
    /// Worker threads for parallel attack stages (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Where to write the run manifest.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a key pair into <out>.pk and <out>.sk.
    Keygen(KeygenArgs),
    /// Encode codewords under a public key.
    Encode(EncodeArgs),
    /// Decode codewords with a secret key.
    Decode(DecodeArgs),
    /// Meet-in-the-middle dual recovery and inner-product distinguisher.
    Attack1(Attack1Args),
    /// Weak-key scan over a directory of public keys and pair distinguisher.
    Attack2(Attack2Args),
    /// Noise recovery by information-set decoding, then a disjoint overlay.
    Attack3(Attack3Args),
    /// Distinguisher that never reads a public key.
    Attack4(Attack4Args),
    /// Complexity table as CSV.
    Estimate(EstimateArgs),
    /// Code lengths needed for a target security level.
    Advise(AdviseArgs),
    /// Run a codeword through a simulated watermark channel.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Llm,
    Gim,
    Revised,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Llm => Scheme::Llm,
            SchemeArg::Gim => Scheme::Gim,
            SchemeArg::Revised => Scheme::Revised,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelArg {
    Llm,
    Gim,
}

#[derive(Debug, Args, Serialize)]
pub struct KeygenArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub t: usize,
    /// Encode noise rate [default: 0 for llm and revised, η for gim].
    #[arg(long)]
    pub omega: Option<f64>,
    /// Rows of P [default: the scheme's layout].
    #[arg(long)]
    pub r: Option<usize>,
    /// Columns of G [default: ⌊log₂ C(n,t)⌋].
    #[arg(long)]
    pub g: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output stem; writes <out>.pk and <out>.sk.
    #[arg(long)]
    pub out: PathBuf,
    /// Record the seed in the key headers (test fixtures only).
    #[arg(long)]
    pub embed_seed: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct EncodeArgs {
    #[arg(long)]
    pub pk: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Encode noise rate [default: the value in the key header].
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DecodeArgs {
    #[arg(long)]
    pub sk: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Also write decisions as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct Attack1Args {
    #[arg(long)]
    pub pk: PathBuf,
    #[arg(long)]
    pub targets: PathBuf,
    /// Size of the first sub-list [default: balanced lists for l].
    #[arg(long)]
    pub l1_size: Option<u128>,
    /// Zero-ratio threshold [default: 0.60 for t = 3, 0.55 otherwise].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Use τ = ½ + r^{-1/4} instead of the default.
    #[arg(long, conflicts_with = "tau")]
    pub decoder_tau: bool,
    /// Expected number of recovered secret rows.
    #[arg(long, default_value_t = 1.0)]
    pub l: f64,
    /// Ceiling on the combined list size when retrying with larger lists.
    #[arg(long, default_value_t = 1 << 24)]
    pub max_entries: u128,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct Attack2Args {
    /// Directory of *.pk files, scanned in file-name order.
    #[arg(long)]
    pub pk_dir: PathBuf,
    #[arg(long)]
    pub targets: PathBuf,
    /// Pair-equality threshold [default: 0.60 for t = 3, 0.65 otherwise].
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct Attack3Args {
    #[arg(long)]
    pub pk: PathBuf,
    /// Codeword file; the first codeword is attacked unless --index is given.
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Overlay rate [default: the smallest rate that crosses the decode threshold].
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: u64,
    /// Secret key used only to evaluate the result.
    #[arg(long)]
    pub sk: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct Attack4Args {
    /// Codeword file with 2m targets.
    #[arg(long)]
    pub targets: PathBuf,
    /// Weight of the sampled parity checks (t for secret rows, 2 for duplicate rows).
    #[arg(long, default_value_t = 3)]
    pub weight: usize,
    /// Number of sampled checks [default: ⌈3·C(n,w)/⌊0.99n⌋⌉].
    #[arg(long)]
    pub n_times: Option<u128>,
    /// Noise rate behind τ₁ [default: estimated from the targets].
    #[arg(long)]
    pub omega: Option<f64>,
    /// Per-check zero-ratio threshold [default: from ω].
    #[arg(long)]
    pub tau1: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub tau2: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 3)]
    pub t_min: usize,
    /// Last row [default: 14 for llm, 7 for gim].
    #[arg(long)]
    pub t_max: Option<usize>,
    /// CSV path [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct AdviseArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 128.0)]
    pub bits: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub channel: ChannelArg,
    /// Beta concentration κ of the token marginals (llm) [default: calibrated to --flip-rate].
    #[arg(long, conflicts_with = "sigma")]
    pub entropy: Option<f64>,
    /// Target flip rate used to calibrate the channel when no knob is given.
    #[arg(long, default_value_t = 0.074)]
    pub flip_rate: f64,
    /// Error calibration factor of the soft decision (gim).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Inversion noise std (gim) [default: calibrated to --flip-rate].
    #[arg(long)]
    pub noise_std: Option<f64>,
    #[arg(long, default_value_t = 16)]
    pub vocab_bits: usize,
    /// Codeword file to send; otherwise a uniform word of length --n.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Transcript JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Received codewords.
    #[arg(long)]
    pub codewords_out: Option<PathBuf>,
}

/// What a subcommand hands back to the driver.
struct Outcome {
    code: i32,
    out: Option<PathBuf>,
    seed: Option<u64>,
}

impl Outcome {
    fn ok(out: Option<PathBuf>, seed: Option<u64>) -> Self {
        Self { code: EXIT_OK, out, seed }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_IO,
        Error::BadMagic { .. } | Error::LengthMismatch(_) | Error::Header(_) | Error::Invariant(_) => EXIT_IO,
        Error::EmptyRecovered
        | Error::EmptyPairs
        | Error::NoWeakKey(_)
        | Error::IsdExhausted(_)
        | Error::NoOverlayGap(_)
        | Error::OverlayTooLarge { .. } => EXIT_ATTACK_FAILED,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let (name, params) = command_summary(&cli.command);
    let mut manifest = RunManifest::start(name, params, None);
    let result = pool.install(|| dispatch(&cli.command));
    manifest.finish();
    let (code, out) = match result {
        Ok(o) => {
            manifest.seed = o.seed;
            (o.code, o.out)
        }
        Err(e) => {
            eprintln!("error: {e}");
            (exit_code(&e), None)
        }
    };
    if let Err(e) = emit_manifest(&manifest, cli.manifest.as_deref(), out.as_deref()) {
        eprintln!("error: cannot write manifest: {e}");
        return if code == EXIT_OK { EXIT_IO } else { code };
    }
    code
}

fn command_summary(cmd: &Command) -> (&'static str, serde_json::Value) {
    fn v<T: Serialize>(a: &T) -> serde_json::Value {
        serde_json::to_value(a).unwrap_or(serde_json::Value::Null)
    }
    match cmd {
        Command::Keygen(a) => ("keygen", v(a)),
        Command::Encode(a) => ("encode", v(a)),
        Command::Decode(a) => ("decode", v(a)),
        Command::Attack1(a) => ("attack1", v(a)),
        Command::Attack2(a) => ("attack2", v(a)),
        Command::Attack3(a) => ("attack3", v(a)),
        Command::Attack4(a) => ("attack4", v(a)),
        Command::Estimate(a) => ("estimate", v(a)),
        Command::Advise(a) => ("advise", v(a)),
        Command::Simulate(a) => ("simulate", v(a)),
    }
}

fn emit_manifest(m: &RunManifest, explicit: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let path = explicit.map(Path::to_path_buf).or_else(|| {
        out.map(|o| {
            let mut s = o.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    match path {
        Some(p) => io::write_json(BufWriter::new(File::create(p)?), m),
        None => io::write_json(std::io::stderr().lock(), m),
    }
}

fn dispatch(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Keygen(a) => keygen(a),
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Attack1(a) => attack1(a),
        Command::Attack2(a) => attack2(a),
        Command::Attack3(a) => attack3(a),
        Command::Attack4(a) => attack4(a),
        Command::Estimate(a) => estimate(a),
        Command::Advise(a) => advise(a),
        Command::Simulate(a) => simulate(a),
    }
}

/// Resolves keygen parameters from the scheme layout and any overrides.
pub fn keygen_params(scheme: Scheme, n: usize, t: usize, r: Option<usize>, g: Option<usize>, omega: Option<f64>) -> Result<PrcParams> {
    let base = match scheme {
        Scheme::Gim if r.is_none() => PrcParams::gim(n, t)?,
        Scheme::Gim => {
            let lambda = prc::security_bits(n, t);
            PrcParams::custom(Scheme::Gim, n, r.unwrap_or(0), lambda, t, prc::gim_eta(lambda, lambda))?
        }
        _ => PrcParams::llm(n, t)?.with_scheme(scheme),
    };
    let g = g.unwrap_or(base.g);
    let r = r.unwrap_or(base.r);
    let mut omega = omega.unwrap_or(base.omega);
    if scheme == Scheme::Gim && g != base.g && omega == base.omega {
        omega = prc::gim_eta(base.lambda, g);
    }
    PrcParams::custom(scheme, n, r, g, t, omega)
}

fn keygen(a: &KeygenArgs) -> Result<Outcome> {
    let params = keygen_params(a.scheme.into(), a.n, a.t, a.r, a.g, a.omega)?;
    let kp = prc::keygen(&params, a.seed)?;
    io::save_keypair(&a.out, &kp, &params, a.embed_seed.then_some(a.seed))?;
    let (pk, sk) = io::keypair_paths(&a.out);
    println!(
        "keygen {} n={} r={} g={} t={} omega={} -> {} {}",
        params.scheme.as_str(),
        params.n,
        params.r,
        params.g,
        params.t,
        params.omega,
        pk.display(),
        sk.display()
    );
    Ok(Outcome::ok(Some(a.out.clone()), Some(a.seed)))
}

fn encode(a: &EncodeArgs) -> Result<Outcome> {
    let (pk, mut params) = io::load_public_key(&a.pk)?;
    if let Some(w) = a.omega {
        params = params.with_omega(w)?;
    }
    let words: Vec<Codeword> = (0..a.count).map(|i| prc::encode(&pk, &params, derive_seed(a.seed, i as u64)).0).collect();
    io::save_codewords(&a.out, params.n, &words)?;
    println!("encoded {} codewords of length {} at omega={} -> {}", a.count, params.n, params.omega, a.out.display());
    Ok(Outcome::ok(Some(a.out.clone()), Some(a.seed)))
}

#[derive(Serialize)]
struct DecodeLine {
    index: usize,
    syndrome_weight: usize,
    threshold: usize,
    decision: prc::Decision,
}

fn decode(a: &DecodeArgs) -> Result<Outcome> {
    let (sk, params) = io::load_secret_key(&a.sk)?;
    let (n, words) = io::load_codewords(&a.input)?;
    if n != params.n {
        return Err(Error::Dimension(format!("codewords have length {n}, key expects {}", params.n)));
    }
    let threshold = prc::decode_threshold(sk.p.rows());
    let mut lines = Vec::with_capacity(words.len());
    for (index, c) in words.iter().enumerate() {
        let decision = prc::decode(&sk, &params, c)?;
        let syndrome_weight = prc::syndrome_weight(&sk, &c.x)?;
        println!("{index} {} syndrome_weight={syndrome_weight} threshold={threshold}", decision_str(decision));
        lines.push(DecodeLine { index, syndrome_weight, threshold, decision });
    }
    if let Some(out) = &a.out {
        io::write_json(BufWriter::new(File::create(out)?), &lines)?;
    }
    Ok(Outcome::ok(a.out.clone(), None))
}

fn decision_str(d: prc::Decision) -> &'static str {
    if d.is_accept() {
        "ACCEPT"
    } else {
        "REJECT"
    }
}

/// Writes the report and maps its verdict to an exit code.
fn finish_report(report: &mut AttackReport, started: Instant, out: &Option<PathBuf>) -> Result<Outcome> {
    report.finish(started);
    match out {
        Some(p) => io::write_json(BufWriter::new(File::create(p)?), report)?,
        None => io::write_json(std::io::stdout().lock(), report)?,
    }
    let status = if report.is_success() { "SUCCESS" } else { "FAILURE" };
    match &report.failure_reason {
        Some(reason) => eprintln!("{} {status}: {reason}", report.attack),
        None => eprintln!("{} {status}", report.attack),
    }
    let code = if report.is_success() { EXIT_OK } else { EXIT_ATTACK_FAILED };
    Ok(Outcome { code, out: out.clone(), seed: Some(report.seed) })
}

/// Attack errors become a FAILURE report; anything else propagates.
fn absorb(report: &mut AttackReport, e: Error) -> Result<()> {
    if exit_code(&e) == EXIT_ATTACK_FAILED {
        report.fail(e.to_string(), serde_json::Value::Null);
        Ok(())
    } else {
        Err(e)
    }
}

fn load_targets(path: &Path, n: usize) -> Result<Vec<Codeword>> {
    let (tn, targets) = io::load_codewords(path)?;
    if tn != n {
        return Err(Error::Dimension(format!("targets have length {tn}, key has n = {n}")));
    }
    Ok(targets)
}

fn attack1(a: &Attack1Args) -> Result<Outcome> {
    let started = Instant::now();
    let (pk, params) = io::load_public_key(&a.pk)?;
    let targets = load_targets(&a.targets, params.n)?;
    let tau = match (a.tau, a.decoder_tau) {
        (Some(t), _) => t,
        (None, true) => decoder_aligned_tau(params.r),
        (None, false) => default_tau(params.t),
    };
    if !(0.5 < tau && tau < 1.0) {
        return Err(Error::InvalidParams(format!("τ = {tau} outside (1/2, 1)")));
    }
    let mut config = MitmConfig::balanced(params.n, params.r, params.t, a.l, tau);
    if let Some(l1) = a.l1_size {
        let full = MitmConfig::full(params.n, params.t, tau);
        if l1 == 0 || l1 > full.list_cap_1 {
            return Err(Error::CapTooLarge { cap: l1, available: full.list_cap_1 });
        }
        config.list_cap_1 = l1;
        config.list_cap_2 = l1.min(full.list_cap_2);
        config.alpha = l1 as f64 / full.list_cap_1 as f64;
        config.beta = config.list_cap_2 as f64 / full.list_cap_2 as f64;
    }
    let mut report = AttackReport::new("attack1", a.seed, params);
    report.counter("targets", targets.len());
    match mitm::recover_with_retries(&pk.g, params.r, params.t, config, a.max_entries, a.seed) {
        Ok(outcome) => {
            report.counter("attempts", outcome.attempts);
            report.counter("list_entries", outcome.list_entries);
            report.counter("recovered", outcome.recovered.len());
            if outcome.recovered.is_empty() {
                report.fail("no dual vectors recovered within the list ceiling", json!({ "config": outcome.config }));
            } else {
                let verdict = mitm::distinguish(&outcome.recovered, &pk.z, &targets, tau)?;
                let supports: Vec<Vec<usize>> = outcome.recovered.vectors.iter().map(|v| v.support()).collect();
                println!(
                    "recovered {} dual vectors; zero ratio {:.4} vs tau {:.4}: {}",
                    supports.len(),
                    verdict.ratio,
                    tau,
                    if verdict.verdict { "watermarked" } else { "not watermarked" }
                );
                report.succeed(json!({ "config": outcome.config, "recovered_supports": supports, "distinguisher": verdict }));
            }
        }
        Err(e) => absorb(&mut report, e)?,
    }
    finish_report(&mut report, started, &a.out)
}

fn attack2(a: &Attack2Args) -> Result<Outcome> {
    let started = Instant::now();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&a.pk_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pk"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidParams(format!("no .pk files in {}", a.pk_dir.display())));
    }
    let mut keys = Vec::with_capacity(paths.len());
    let mut params = Vec::with_capacity(paths.len());
    for p in &paths {
        let (k, pp) = io::load_public_key(p)?;
        keys.push(k);
        params.push(pp);
    }
    let mut report = AttackReport::new("attack2", a.seed, json!({ "keys": paths.len(), "first": params[0] }));
    report.counter("keys_scanned", keys.len());
    match weakkey::multi_target_scan(&keys) {
        Ok((idx, pairs)) => {
            let pp = params[idx];
            let targets = load_targets(&a.targets, pp.n)?;
            let tau = a.tau.unwrap_or(weakkey::default_pair_tau(pp.t));
            let verdict = weakkey::distinguish_by_pairs(&pairs, &keys[idx].z, &targets, tau)?;
            report.counter("duplicate_pairs", pairs.len());
            report.counter("targets", targets.len());
            println!(
                "weak key {} with {} duplicate pairs; equality ratio {:.4} vs tau {:.2}: {}",
                paths[idx].display(),
                pairs.len(),
                verdict.ratio,
                tau,
                if verdict.verdict { "watermarked" } else { "not watermarked" }
            );
            report.succeed(json!({
                "weak_key": paths[idx],
                "weak_key_index": idx,
                "pairs": pairs.pairs,
                "distinguisher": verdict,
            }));
        }
        Err(e) => absorb(&mut report, e)?,
    }
    finish_report(&mut report, started, &a.out)
}

fn attack3(a: &Attack3Args) -> Result<Outcome> {
    let started = Instant::now();
    let (pk, params) = io::load_public_key(&a.pk)?;
    let targets = load_targets(&a.target, params.n)?;
    let x = targets
        .get(a.index)
        .ok_or_else(|| Error::InvalidParams(format!("index {} but the file holds {} codewords", a.index, targets.len())))?;
    let sk = match &a.sk {
        Some(p) => {
            let (sk, sp) = io::load_secret_key(p)?;
            if sp.n != params.n {
                return Err(Error::Dimension("secret key length differs from the public key".into()));
            }
            Some(sk)
        }
        None => None,
    };
    let mut report = AttackReport::new("attack3", a.seed, params);
    let mu = match a.mu {
        Some(m) => m,
        None => match overlay::choose_mu(&params) {
            Ok(m) => m,
            Err(e) => {
                absorb(&mut report, e)?;
                return finish_report(&mut report, started, &a.out);
            }
        },
    };
    if !(0.0..=0.5).contains(&mu) {
        return Err(Error::InvalidParams(format!("μ = {mu} outside [0, 1/2]")));
    }
    let config = OverlayConfig::new(&params, mu, a.max_iters);
    report.counter("max_iters", a.max_iters);
    match overlay::overlay_attack(&pk, x, &config, a.seed) {
        Ok(out) => {
            report.counter("iterations", out.iterations);
            report.counter("recovered_weight", out.recovered_e.weight());
            report.counter("overlay_weight", out.overlay.weight());
            let mut details = json!({
                "mu": mu,
                "weight_window": config.weight_window,
                "g_rank_deficient": out.g_deficient,
            });
            if let Some(sk) = &sk {
                let mut rng = rng_for(derive_seed(a.seed, 3), Stream::Overlay);
                let random =
                    Codeword::new(x.x.xor(&crate::gf2::BitVector::bernoulli(params.n, mu, &mut rng)), prc::Provenance::ChannelNoised);
                details["decode_original"] = json!(prc::decode(sk, &params, x)?);
                details["decode_attacked"] = json!(prc::decode(sk, &params, &out.attacked)?);
                details["decode_random_overlay"] = json!(prc::decode(sk, &params, &random)?);
                println!(
                    "decode(x)={} decode(x+e')={} decode(x+random)={}",
                    decision_str(prc::decode(sk, &params, x)?),
                    decision_str(prc::decode(sk, &params, &out.attacked)?),
                    decision_str(prc::decode(sk, &params, &random)?)
                );
            }
            println!("noise of weight {} recovered after {} trials", out.recovered_e.weight(), out.iterations);
            report.succeed(details);
        }
        Err(e) => absorb(&mut report, e)?,
    }
    finish_report(&mut report, started, &a.out)
}

fn attack4(a: &Attack4Args) -> Result<Outcome> {
    let started = Instant::now();
    let (n, targets) = io::load_codewords(&a.targets)?;
    if targets.len() % 2 == 1 {
        return Err(Error::OddTargets(targets.len()));
    }
    let ys = pkfree::pairwise_differences(&targets)?;
    let (omega, estimated) = match a.omega {
        Some(w) => (w, false),
        None => (pkfree::estimate_omega(&ys), true),
    };
    if estimated {
        eprintln!("warning: ω estimated as {omega:.3} from difference weights; pass --omega for a meaningful τ₁");
    }
    let r = prc::llm_rows(n);
    let mut config = PkFreeConfig::new(n, r, omega, a.weight);
    config.m = ys.len();
    if let Some(nt) = a.n_times {
        config.n_times = nt;
    }
    if let Some(t1) = a.tau1 {
        config.tau1 = t1;
    }
    config.tau2 = a.tau2;
    let mut report = AttackReport::new("attack4", a.seed, json!({ "n": n, "config": config }));
    report.counter("targets", targets.len());
    let verdict = pkfree::pkfree_distinguish(&targets, &config, a.seed)?;
    report.counter("biased_checks", verdict.s);
    report.counter("n_times", verdict.n_times);
    println!(
        "{} of {} weight-{} checks biased (max zeros {} of {}): {}",
        verdict.s,
        verdict.n_times,
        a.weight,
        verdict.max_zeros,
        verdict.m,
        if verdict.verdict { "watermarked" } else { "not watermarked" }
    );
    report.succeed(json!({ "omega": omega, "omega_estimated": estimated, "verdict": verdict }));
    finish_report(&mut report, started, &a.out)
}

fn estimate(a: &EstimateArgs) -> Result<Outcome> {
    let scheme: Scheme = a.scheme.into();
    let (_, range) = crate::complexity::table_layout(scheme);
    let rows = emit_table(scheme, a.t_min, a.t_max.unwrap_or(*range.end()))?;
    match &a.out {
        Some(p) => io::write_table_csv(BufWriter::new(File::create(p)?), scheme, &rows)?,
        None => io::write_table_csv(std::io::stdout().lock(), scheme, &rows)?,
    }
    Ok(Outcome::ok(a.out.clone(), None))
}

fn advise(a: &AdviseArgs) -> Result<Outcome> {
    let adv = advise_parameters(a.scheme.into(), a.bits)?;
    for p in &adv.partial {
        match p.suggest_exponent {
            Some(e) => println!("t={}: partial recovery reaches {} bits once n > 2^{}", p.t, a.bits, e),
            None => println!("t={}: partial recovery stays below {} bits up to 2^48", p.t, a.bits),
        }
    }
    match adv.overlay_suggest_exponent {
        Some(e) => println!("overlay: n > 2^{e}"),
        None => println!("overlay: no power of two up to 2^48 suffices"),
    }
    for note in &adv.notes {
        println!("note: {note}");
    }
    if let Some(p) = &a.out {
        io::write_json(BufWriter::new(File::create(p)?), &adv)?;
    }
    Ok(Outcome::ok(a.out.clone(), None))
}

fn simulate(a: &SimulateArgs) -> Result<Outcome> {
    let words = match &a.input {
        Some(p) => io::load_codewords(p)?.1,
        None => {
            let mut rng = rng_for(a.seed, Stream::Batch);
            vec![prc::random_word(a.n, &mut rng)]
        }
    };
    let mut received = Vec::with_capacity(words.len());
    let transcript = match a.channel {
        ChannelArg::Llm => {
            let kappa = match a.entropy {
                Some(k) => k,
                None => channel::knob_for_flip_rate(a.flip_rate)?,
            };
            let model = SyntheticTokenModel::new(a.vocab_bits, kappa)?;
            let mut runs = Vec::with_capacity(words.len());
            for (i, w) in words.iter().enumerate() {
                let (rec, tr) = channel::simulate_llm(&model, &w.x, derive_seed(a.seed, i as u64))?;
                println!("codeword {i}: flip rate {:.4} (expected {:.4})", tr.flip_rate(), model.flip_rate());
                received.push(Codeword::new(rec, prc::Provenance::ChannelNoised));
                runs.push(tr);
            }
            serde_json::to_value(runs)?
        }
        ChannelArg::Gim => {
            let std = match a.noise_std {
                Some(s) => s,
                None => channel::inversion_std_for_flip_rate(a.flip_rate)?,
            };
            let params = GimChannelParams::new(a.sigma.unwrap_or(1.0), std)?;
            let mut runs = Vec::with_capacity(words.len());
            for (i, w) in words.iter().enumerate() {
                let run = channel::simulate_gim(&w.x, &params, derive_seed(a.seed, i as u64));
                println!("codeword {i}: flip rate {:.4} (expected {:.4})", run.flip_rate, channel::gim_flip_rate(std));
                received.push(Codeword::new(run.recovered.clone(), prc::Provenance::ChannelNoised));
                runs.push(run);
            }
            json!({ "params": params, "runs": runs })
        }
    };
    if let Some(p) = &a.out {
        let mut w = BufWriter::new(File::create(p)?);
        io::write_json(&mut w, &transcript)?;
        w.flush()?;
    }
    if let Some(p) = &a.codewords_out {
        let n = received.first().map_or(a.n, |c| c.len());
        io::save_codewords(p, n, &received)?;
    }
    Ok(Outcome::ok(a.out.clone().or_else(|| a.codewords_out.clone()), Some(a.seed)))
}
