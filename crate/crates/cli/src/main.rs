mod cmd;
mod error;
mod files;
mod keystore;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};

use pairmps::backend::{Bls12Backend, MockBackend, PairingBackend};
use pairmps::bench;
use pairmps::envelope::Kind;
use pairmps::idmpms::PublicParams;
use pairmps::session::{self, Role, Scheme, SessionConfig, Verdict};

use cmd::Ctx;
use error::{CliError, Exit, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Production,
    /// Toy Z_q pairing. Offers no security.
    Mock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Idmpms,
    Liuxiao,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Idmpms => Scheme::Idmpms,
            SchemeArg::Liuxiao => Scheme::Liuxiao,
        }
    }
}

/// Identity-based multi-proxy multi-signcryption.
#[derive(Debug, Parser)]
#[command(name = "pairmps", version)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "production")]
    backend: BackendArg,
    #[arg(long, global = true, value_enum, default_value = "idmpms")]
    scheme: SchemeArg,
    /// Directory of passphrase-sealed key records (passphrase from PAIRMPS_PASSPHRASE).
    #[arg(long, global = true)]
    keystore: Option<PathBuf>,
    /// Public parameters file [default: <keystore>/params.env].
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    #[arg(long, global = true)]
    warrant: Option<PathBuf>,
    /// Derive all randomness from this seed. Reproducible, not secret.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file [default: stdout].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Unix time used for warrant validity checks [default: now].
    #[arg(long, global = true)]
    now: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Create the master key and public parameters.
    Setup,
    /// Issue an identity key (idmpms) or generate a key pair (liuxiao).
    Extract {
        #[arg(long)]
        id: String,
    },
    /// Write a warrant naming the original and proxy groups.
    Warrant {
        #[arg(long = "original", required = true)]
        originals: Vec<String>,
        #[arg(long = "proxy", required = true)]
        proxies: Vec<String>,
        #[arg(long)]
        scope: Option<String>,
        #[arg(long, default_value_t = session::DEFAULT_VALID_FROM)]
        valid_from: u64,
        #[arg(long, default_value_t = session::DEFAULT_VALID_TO)]
        valid_to: u64,
    },
    /// Sign the warrant as an original signer.
    Delegate {
        #[arg(long)]
        id: String,
    },
    /// Check delegation shares against the warrant.
    VerifyDelegation {
        #[arg(long = "share", required = true)]
        shares: Vec<PathBuf>,
        /// Signer public keys (liuxiao only).
        #[arg(long = "pubkey")]
        pubkeys: Vec<PathBuf>,
    },
    /// Aggregate the delegation and derive this proxy's signing key.
    ProxyKey {
        #[arg(long)]
        id: String,
        #[arg(long = "share", required = true)]
        shares: Vec<PathBuf>,
        #[arg(long = "pubkey")]
        pubkeys: Vec<PathBuf>,
    },
    /// Draw a nonce and broadcast this proxy's round-1 values.
    Round1 {
        #[arg(long)]
        id: String,
        /// Receiver identity (idmpms).
        #[arg(long, required_unless_present = "receiver_pubkey")]
        receiver: Option<String>,
        /// Receiver public key file (liuxiao).
        #[arg(long)]
        receiver_pubkey: Option<PathBuf>,
    },
    /// Encrypt the message and fix the commitment r_p.
    Commit {
        #[arg(long = "r1", required = true)]
        r1: Vec<PathBuf>,
        #[arg(long)]
        message: PathBuf,
    },
    /// Produce this proxy's partial signcryption. Consumes the round-1 nonce.
    Partial {
        #[arg(long)]
        id: String,
        #[arg(long)]
        commit: PathBuf,
    },
    /// Check the partials and assemble the signcryption.
    Combine {
        #[arg(long)]
        proxy_key: PathBuf,
        #[arg(long = "r1")]
        r1: Vec<PathBuf>,
        #[arg(long = "partial", required = true)]
        partials: Vec<PathBuf>,
        #[arg(long)]
        commit: PathBuf,
    },
    /// Verify a signcryption from public data only.
    Verify {
        #[arg(long)]
        sc: PathBuf,
    },
    /// Decrypt and verify as the receiver.
    Unsigncrypt {
        #[arg(long)]
        id: String,
        #[arg(long)]
        sc: PathBuf,
        /// Proxy public keys (liuxiao only).
        #[arg(long = "pubkey")]
        pubkeys: Vec<PathBuf>,
    },
    /// Run a whole session in one process and print its transcript.
    Demo {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        l: usize,
        #[arg(long)]
        message: Option<PathBuf>,
        /// ROLE:BEHAVIOR, e.g. P1:bad-partial, A2:bad-delegation-share, channel:tamper-ciphertext.
        #[arg(long)]
        adversary: Option<String>,
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Also write the final signcryption envelope here.
        #[arg(long)]
        sc_out: Option<PathBuf>,
    },
    /// Count pairings, scalar multiplications and Gt exponentiations per phase.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 4, 8])]
        sizes: Vec<usize>,
        #[arg(long)]
        csv: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Malformed as u8 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pairmps: {e}");
            ExitCode::from(e.exit as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let now = match cli.now {
        Some(t) => t,
        None => SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    match cli.backend {
        BackendArg::Production => run(Bls12Backend::new(), &cli, now),
        BackendArg::Mock => {
            eprintln!("warning: the mock backend is insecure and meant for testing only");
            run(mock_backend(&cli)?, &cli, now)
        }
    }
}

/// Mock order comes from the parameter file when there is one.
fn mock_backend(cli: &Cli) -> Result<MockBackend> {
    let path = match (&cli.params, &cli.keystore) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(ks)) => Some(ks.join(cmd::PARAMS_FILE)),
        _ => None,
    };
    let Some(path) = path.filter(|p| p.exists()) else {
        return Ok(MockBackend::wide());
    };
    if matches!(cli.command, Command::Setup) {
        return Ok(MockBackend::wide());
    }
    let bytes = files::read_envelope(&path, Kind::Params)?;
    let (_, order) = PublicParams::<MockBackend>::peek_backend(&bytes)?;
    if order.len() > 8 {
        return Err(CliError::malformed("mock group order does not fit in 64 bits"));
    }
    let q = order.iter().fold(0u64, |acc, b| (acc << 8) | u64::from(*b));
    Ok(MockBackend::insecure_for_testing(q)?)
}

fn run<B: PairingBackend>(be: B, cli: &Cli, now: u64) -> Result<()> {
    let ctx = Ctx {
        be,
        keystore: cli.keystore.clone(),
        params: cli.params.clone(),
        warrant: cli.warrant.clone(),
        seed: cli.seed,
        out: cli.out.clone(),
        now,
    };
    let lx = cli.scheme == SchemeArg::Liuxiao;
    match &cli.command {
        Command::Setup if lx => cmd::lx::setup(),
        Command::Setup => cmd::idmpms::setup(&ctx),
        Command::Extract { id } if lx => cmd::lx::extract(&ctx, id),
        Command::Extract { id } => cmd::idmpms::extract(&ctx, id),
        Command::Warrant {
            originals,
            proxies,
            scope,
            valid_from,
            valid_to,
        } => cmd::warrant(
            &ctx,
            &cmd::WarrantArgs {
                originals: originals.clone(),
                proxies: proxies.clone(),
                scope: scope
                    .clone()
                    .unwrap_or_else(|| String::from_utf8_lossy(session::DEFAULT_SCOPE).into_owned()),
                valid_from: *valid_from,
                valid_to: *valid_to,
            },
        ),
        Command::Delegate { id } if lx => cmd::lx::delegate(&ctx, id),
        Command::Delegate { id } => cmd::idmpms::delegate(&ctx, id),
        Command::VerifyDelegation { shares, pubkeys } if lx => cmd::lx::verify_delegation(&ctx, shares, pubkeys),
        Command::VerifyDelegation { shares, .. } => cmd::idmpms::verify_delegation(&ctx, shares),
        Command::ProxyKey { id, shares, pubkeys } if lx => cmd::lx::proxy_key(&ctx, id, shares, pubkeys),
        Command::ProxyKey { id, shares, .. } => cmd::idmpms::proxy_key(&ctx, id, shares),
        Command::Round1 {
            id, receiver_pubkey, ..
        } if lx => {
            let pk = receiver_pubkey
                .as_deref()
                .ok_or_else(|| CliError::missing("liuxiao round1 needs --receiver-pubkey"))?;
            cmd::lx::round1(&ctx, id, pk)
        }
        Command::Round1 { id, receiver, .. } => {
            let receiver = receiver
                .as_deref()
                .ok_or_else(|| CliError::missing("idmpms round1 needs --receiver"))?;
            cmd::idmpms::round1(&ctx, id, receiver)
        }
        Command::Commit { r1, message } if lx => cmd::lx::commit(&ctx, r1, message),
        Command::Commit { r1, message } => cmd::idmpms::commit(&ctx, r1, message),
        Command::Partial { id, commit } if lx => cmd::lx::partial(&ctx, id, commit),
        Command::Partial { id, commit } => cmd::idmpms::partial(&ctx, id, commit),
        Command::Combine {
            proxy_key,
            partials,
            commit,
            ..
        } if lx => cmd::lx::combine(&ctx, proxy_key, partials, commit),
        Command::Combine {
            proxy_key,
            r1,
            partials,
            commit,
        } => cmd::idmpms::combine(&ctx, proxy_key, r1, partials, commit),
        Command::Verify { .. } if lx => cmd::lx::verify(),
        Command::Verify { sc } => cmd::idmpms::verify(&ctx, sc),
        Command::Unsigncrypt { id, sc, pubkeys } if lx => cmd::lx::unsigncrypt(&ctx, id, sc, pubkeys),
        Command::Unsigncrypt { id, sc, .. } => cmd::idmpms::unsigncrypt(&ctx, id, sc),
        Command::Demo {
            n,
            l,
            message,
            adversary,
            transcript,
            sc_out,
        } => demo(
            &ctx,
            cli.scheme.into(),
            DemoArgs {
                n: *n,
                l: *l,
                message: message.clone(),
                adversary: adversary.clone(),
                transcript: transcript.clone(),
                sc_out: sc_out.clone(),
                now: cli.now,
            },
        ),
        Command::Bench { sizes, csv } => {
            let report = bench::full_report(&ctx.be, sizes);
            if *csv {
                print!("{}", report.to_lines());
            } else {
                print!("{}", report.to_table());
            }
            Ok(())
        }
    }
}

struct DemoArgs {
    n: usize,
    l: usize,
    message: Option<PathBuf>,
    adversary: Option<String>,
    transcript: Option<PathBuf>,
    sc_out: Option<PathBuf>,
    now: Option<u64>,
}

fn parse_adversary(arg: &str, n: usize, l: usize) -> Result<(Role, session::Behavior)> {
    let (role, behavior) = arg
        .split_once(':')
        .ok_or_else(|| CliError::malformed("--adversary expects ROLE:BEHAVIOR"))?;
    let index = |s: &str, max: usize| -> Result<usize> {
        match s.parse::<usize>() {
            Ok(i) if (1..=max).contains(&i) => Ok(i - 1),
            _ => Err(CliError::malformed(format!("no such participant: {role}"))),
        }
    };
    let role = if role.eq_ignore_ascii_case("channel") {
        Role::Channel
    } else if let Some(i) = role.strip_prefix('A') {
        Role::Original(index(i, n)?)
    } else if let Some(j) = role.strip_prefix('P') {
        Role::Proxy(index(j, l)?)
    } else {
        return Err(CliError::malformed(format!("unknown role {role}; use A<i>, P<j> or channel")));
    };
    let behavior = behavior.parse().map_err(CliError::malformed)?;
    Ok((role, behavior))
}

fn demo<B: PairingBackend>(ctx: &Ctx<B>, scheme: Scheme, args: DemoArgs) -> Result<()> {
    let seed = ctx.seed.unwrap_or_else(rand::random);
    let mut cfg = SessionConfig::new(scheme, args.n, args.l, seed);
    if let Some(path) = &args.message {
        cfg.message = files::read(path)?;
    }
    if let Some(now) = args.now {
        cfg.now = now;
    }
    if let Some(arg) = &args.adversary {
        let (role, behavior) = parse_adversary(arg, args.n, args.l)?;
        cfg = cfg.with_adversary(role, behavior);
    }
    let t = session::run_session(&ctx.be, &cfg).map_err(|e| CliError::malformed(e.to_string()))?;
    let path = args
        .transcript
        .unwrap_or_else(|| std::env::temp_dir().join(format!("pairmps-demo-{scheme}-{seed}.txt")));
    files::write_atomic(&path, t.to_text().as_bytes())?;
    if let (Some(out), Some(env)) = (&args.sc_out, t.signcryption_envelope()) {
        files::write_atomic(out, env.as_bytes())?;
    }
    println!("seed: {seed}");
    println!("transcript: {}", path.display());
    match &t.verdict {
        Verdict::Accept => {
            let m = t.plaintext.as_deref().unwrap_or_default();
            println!("accepted; recovered message: {}", String::from_utf8_lossy(m));
            Ok(())
        }
        Verdict::Reject { stage, culprit, reason } => {
            let who = culprit.as_deref().unwrap_or("unattributed");
            println!("rejected at {stage:?} ({who}): {reason}");
            Err(CliError::verify(format!("session rejected at {stage:?}")))
        }
    }
}
