use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use trimap::suites::{self, Status, Subject};
use trimap::{format, read_text, retry_budget, write_text};
use trimap_core::trimap::{discrete_log, publish_instance, setup, Evaluator, SetupParams};

/// Desk-scale cryptographic trilinear map: setup, publication, encoding,
/// public evaluation, verification and the trapdoor DLP.
#[derive(Parser)]
#[command(name = "trimap", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search parameters, generate keys and write instance.pub and instance.sec.
    Setup(SetupArgs),
    /// Re-publish the public file of an existing secret file.
    Publish(PublishArgs),
    /// Privately encode a scalar into an encoding file.
    Encode(EncodeArgs),
    /// Evaluate e-hat([a] alpha-hat, f([b] beta-hat)) from the public file alone.
    Eval(EvalArgs),
    /// Run invariant suites; exits nonzero on any failure.
    Verify(VerifyArgs),
    /// Trapdoor DLP challenges.
    #[command(subcommand)]
    Dlp(DlpCmd),
}

#[derive(Args)]
struct SetupArgs {
    /// Number of blocks.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Torsion prime.
    #[arg(long, default_value_t = 5)]
    ell: u64,
    #[arg(long, default_value_t = 200_000)]
    q_max: u64,
    #[arg(long, default_value_t = 2)]
    d_max: usize,
    /// Smallest admissible |K|.
    #[arg(long, default_value_t = 30_000)]
    k_min: u64,
    /// Number of generator matrices; defaults to n^2 + 1.
    #[arg(long = "N")]
    num_gens: Option<usize>,
    /// Published samples of the kernel coset [0].
    #[arg(long, default_value_t = 4)]
    kernel: usize,
    /// Blind G1 and G2 with independent keys.
    #[arg(long)]
    ddh: bool,
    /// Frobenius-twisted keys (not supported by the trilinear map).
    #[arg(long)]
    twisted: bool,
    #[arg(long)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct PublishArgs {
    #[arg(long)]
    sec: PathBuf,
    #[arg(long, default_value_t = 4)]
    kernel: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    sec: PathBuf,
    /// Scalar in F_ell.
    #[arg(long)]
    a: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long = "pub")]
    public: PathBuf,
    #[arg(long)]
    a: u64,
    #[arg(long)]
    b: u64,
    /// Encoding file.
    #[arg(long)]
    enc: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "pub")]
    public: PathBuf,
    #[arg(long)]
    sec: Option<PathBuf>,
    /// Comma-separated suites, or `all`.
    #[arg(long)]
    checks: Option<String>,
    /// Seed for sampled inputs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum DlpCmd {
    /// Write a fresh challenge f in [a] and print a.
    Challenge {
        #[arg(long)]
        sec: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover a from a challenge with the trapdoor, or with the pairing (`--pairing`).
    Solve {
        #[arg(long)]
        enc: PathBuf,
        #[arg(long)]
        sec: Option<PathBuf>,
        #[arg(long = "pub")]
        public: Option<PathBuf>,
        /// Solve through e-hat and a search over F_ell, using the public file only.
        #[arg(long)]
        pairing: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Setup(a) => cmd_setup(a),
        Cmd::Publish(a) => cmd_publish(a),
        Cmd::Encode(a) => cmd_encode(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Dlp(c) => cmd_dlp(c),
    }
}

fn read_secret(path: &Path) -> Result<(trimap_core::trimap::SecretParams, trimap_core::field::Field)> {
    format::secret_from_str(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_public(path: &Path) -> Result<(trimap_core::trimap::PublicParams, String)> {
    let text = read_text(path)?;
    let pp = format::public_from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok((pp, text))
}

fn read_encoding(path: &Path) -> Result<(trimap_core::trimap::NCPoly, u64)> {
    format::encoding_from_str(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_setup(a: SetupArgs) -> Result<ExitCode> {
    if a.twisted {
        bail!("--twisted: the trilinear map needs untwisted keys, since the published pairing chains are evaluated over K directly");
    }
    let params = SetupParams {
        n: a.n,
        ell: a.ell,
        num_gens: a.num_gens.unwrap_or(a.n * a.n + 1),
        q_max: a.q_max,
        d_max: a.d_max,
        k_min: a.k_min,
        ddh: a.ddh,
        kernel_samples: a.kernel,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let inst = setup(&params, &mut rng)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let f = inst.field();
    write_text(&a.out.join("instance.pub"), &format::public_to_string(&inst.public))?;
    write_text(&a.out.join("instance.sec"), &format::secret_to_string(&inst.secret, f))?;
    println!("field q={} d={} |K|={}", f.q(), f.d(), f.order());
    println!("curve #E={} ell={}", inst.secret.curve.order, inst.secret.ell());
    println!("wrote {} and {}", a.out.join("instance.pub").display(), a.out.join("instance.sec").display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_publish(a: PublishArgs) -> Result<ExitCode> {
    let (secret, f) = read_secret(&a.sec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let pp = publish_instance(&secret, f, a.kernel, &mut rng)?;
    write_text(&a.out, &format::public_to_string(&pp))?;
    println!("wrote {}", a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_encode(a: EncodeArgs) -> Result<ExitCode> {
    let (secret, f) = read_secret(&a.sec)?;
    let ell = secret.ell();
    ensure!(a.a < ell, "--a must lie in [0, {ell})");
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let enc = secret.encode(a.a, &f, &mut rng)?;
    write_text(&a.out, &format::encoding_to_string(&enc, ell))?;
    println!("wrote {} ({} terms)", a.out.display(), enc.len());
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(a: EvalArgs) -> Result<ExitCode> {
    let (pp, _) = read_public(&a.public)?;
    let (enc, ell) = read_encoding(&a.enc)?;
    ensure!(ell == pp.ell, "encoding is over F_{ell}, instance over F_{}", pp.ell);
    let mut ev = Evaluator::with_budget(&pp, retry_budget())?;
    let x = ev.mul_g1(a.a % ell, &pp.alpha_hat)?;
    let y = ev.mul_g2(a.b % ell, &pp.beta_hat)?;
    let v = ev.tri_eval(&x, &y, &enc)?;
    let zeta = ev.pair(&pp.alpha_hat, &pp.beta_hat)?;
    let k = discrete_log(zeta, v, ell, &pp.field).context("value outside <zeta>")?;
    println!("value {}", v.raw());
    println!("exponent {k}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode> {
    let (pp, text) = read_public(&a.public)?;
    let instance = match &a.sec {
        Some(p) => Some(suites::join(pp.clone(), read_secret(p)?)?),
        None => None,
    };
    let explicit = a.checks.as_deref().is_some_and(|c| c != "all");
    let names = suites::select(a.checks.as_deref())?;
    let subject = Subject { public: &pp, pub_text: &text, instance: instance.as_ref(), budget: retry_budget(), seed: a.seed };
    let mut ok = true;
    for name in names {
        let r = suites::run(name, &subject);
        println!("{r}");
        ok &= match r.status {
            Status::Pass => true,
            Status::Fail => false,
            Status::Skipped => !explicit,
        };
    }
    println!("{}", if ok { "verify: all selected suites passed" } else { "verify: FAILED" });
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_dlp(c: DlpCmd) -> Result<ExitCode> {
    match c {
        DlpCmd::Challenge { sec, seed, out } => {
            let (secret, f) = read_secret(&sec)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (enc, a) = secret.dlp_challenge(&f, &mut rng)?;
            write_text(&out, &format::encoding_to_string(&enc, secret.ell()))?;
            println!("wrote {}", out.display());
            println!("answer {a}");
        }
        DlpCmd::Solve { enc, sec, public, pairing } => {
            let (p, ell) = read_encoding(&enc)?;
            let a = if pairing {
                let Some(public) = public else { bail!("--pairing needs --pub") };
                let (pp, _) = read_public(&public)?;
                ensure!(ell == pp.ell, "challenge is over F_{ell}, instance over F_{}", pp.ell);
                Evaluator::with_budget(&pp, retry_budget())?.dlp_pairing_solve(&p)?
            } else {
                let Some(sec) = sec else {
                    bail!("the trapdoor solver needs the secret file (--sec); pass --pairing --pub for the public solver")
                };
                let (secret, _) = read_secret(&sec)?;
                ensure!(ell == secret.ell(), "challenge is over F_{ell}, instance over F_{}", secret.ell());
                secret.trapdoor_solve(&p)?
            };
            println!("answer {a}");
        }
    }
    Ok(ExitCode::SUCCESS)
}
