//! Command-line front end: setup, extract, encrypt, decrypt, recover, inspect.
//!
//! Exit codes: 0 success, 1 usage error, 2 cryptographic failure (including a rejected
//! recovery, reported as `BOTTOM`), 3 I/O or format error.

pub mod keystore;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use aibeir::aibeir::{
    self as scheme, AibeirCiphertext, AibeirMasterKey, AibeirPublicKey, AibeirUserKey, IrmKey,
};
use aibeir::wire::{self, ObjectKind};
use aibeir::{generate_params, CurveParams, Error};
use clap::{Args, Parser, Subcommand};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use keystore::{digest, write_atomic, Keystore, Role};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CRYPTO: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Crypto(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Crypto(_) => EXIT_CRYPTO,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::IdentityTooLong { .. } | Error::Precondition(_) => {
                CliError::Usage(e.to_string())
            }
            Error::ReservedIdentity | Error::MalformedC0 | Error::HashToGroupExhausted => {
                CliError::Crypto(e.to_string())
            }
            _ => CliError::Io(e.to_string()),
        }
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(
    name = "aibeir",
    version,
    about = "Anonymous IBE with a recipient-recovery manager"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct KeystoreArg {
    /// Keystore directory
    #[arg(long, env = "AIBEIR_KEYSTORE")]
    keystore: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate parameters and the master, public and recovery-manager keys
    Setup {
        /// Bit length of the prime group order
        #[arg(long, default_value_t = 256)]
        bits: usize,
        /// Identity hash length for the testable layer
        #[arg(long, default_value_t = aibeir::testable::DEFAULT_IDENTITY_BITS)]
        n_bits: usize,
        /// Reserved identity of the recovery manager
        #[arg(long, default_value = "IRM")]
        irm_id: String,
        #[command(flatten)]
        keystore: KeystoreArg,
        /// Hex seed for reproducible setup
        #[arg(long)]
        seed: Option<String>,
        /// Write the recovery-manager key to this directory instead of the keystore
        #[arg(long)]
        split_irm: Option<PathBuf>,
        /// Replace an existing setup
        #[arg(long)]
        force: bool,
    },
    /// Issue a user key
    Extract {
        #[arg(long)]
        id: String,
        #[command(flatten)]
        keystore: KeystoreArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt a file to an identity
    Encrypt {
        #[arg(long)]
        id: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        keystore: KeystoreArg,
    },
    /// Decrypt with a user key file
    Decrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the recipient identity of a ciphertext, or BOTTOM
    Recover {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        keystore: KeystoreArg,
        /// Recovery-manager key file, when kept outside the keystore
        #[arg(long)]
        irm: Option<PathBuf>,
    },
    /// Describe a stored object without revealing secrets
    Inspect {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                CommandResult {
                    exit_code: code,
                    stdout: text.into_bytes(),
                    stderr: String::new(),
                }
            } else {
                CommandResult {
                    exit_code: code,
                    stdout: Vec::new(),
                    stderr: text,
                }
            };
        }
    };
    let mut out = Vec::new();
    match dispatch(cli.command, &mut out) {
        Ok(()) => CommandResult {
            exit_code: EXIT_OK,
            stdout: out,
            stderr: String::new(),
        },
        Err(e) => CommandResult {
            exit_code: e.exit_code(),
            stdout: out,
            stderr: format!("aibeir: {e}\n"),
        },
    }
}

fn dispatch(command: Command, out: &mut Vec<u8>) -> Result<(), CliError> {
    match command {
        Command::Setup {
            bits,
            n_bits,
            irm_id,
            keystore,
            seed,
            split_irm,
            force,
        } => setup(
            bits,
            n_bits,
            &irm_id,
            &keystore.keystore,
            seed.as_deref(),
            split_irm.as_deref(),
            force,
            out,
        ),
        Command::Extract {
            id,
            keystore,
            out: path,
        } => extract(&id, &keystore.keystore, &path, out),
        Command::Encrypt {
            id,
            input,
            out: path,
            keystore,
        } => encrypt(&id, &input, &path, &keystore.keystore),
        Command::Decrypt {
            key,
            input,
            out: path,
        } => decrypt(&key, &input, &path),
        Command::Recover {
            input,
            keystore,
            irm,
        } => recover(&input, &keystore.keystore, irm.as_deref(), out),
        Command::Inspect { input } => inspect(&input, out),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn check_identity(id: &str) -> Result<(), CliError> {
    if id.len() > scheme::MAX_IDENTITY_LEN {
        return Err(CliError::Usage(format!(
            "identity longer than {} bytes",
            scheme::MAX_IDENTITY_LEN
        )));
    }
    Ok(())
}

fn load_mpk(ks: &Keystore) -> Result<AibeirPublicKey, CliError> {
    Ok(AibeirPublicKey::from_bytes(&ks.load(Role::Mpk)?)?)
}

#[allow(clippy::too_many_arguments)]
fn setup(
    bits: usize,
    n_bits: usize,
    irm_id: &str,
    root: &Path,
    seed: Option<&str>,
    split_irm: Option<&Path>,
    force: bool,
    out: &mut Vec<u8>,
) -> Result<(), CliError> {
    if irm_id.is_empty() {
        return Err(CliError::Usage("--irm-id must not be empty".into()));
    }
    check_identity(irm_id)?;
    let seed = match seed {
        Some(hex_seed) => {
            hex::decode(hex_seed).map_err(|e| CliError::Usage(format!("--seed: {e}")))?
        }
        None => {
            let mut fresh = [0u8; 32];
            rand::thread_rng().fill_bytes(&mut fresh);
            fresh.to_vec()
        }
    };

    let params = generate_params(bits, &seed)?;
    let mut rng = ChaCha20Rng::from_seed(
        Sha256::new()
            .chain_update(b"aibeir setup")
            .chain_update(&seed)
            .finalize()
            .into(),
    );
    let (mpk, msk, irm) = scheme::setup(&params, n_bits, irm_id.as_bytes(), &mut rng)?;

    fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
    let ks = Keystore::new(root);
    if ks.has(Role::Mpk) || ks.has(Role::Msk) {
        if !force {
            return Err(CliError::Io(format!(
                "{} already holds a setup; pass --force to replace it",
                root.display()
            )));
        }
        for role in [Role::Mpk, Role::Msk, Role::Irm] {
            ks.remove(role)?;
        }
    }
    let irm_store = match split_irm {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            let store = Keystore::new(dir);
            store.remove(Role::Irm)?;
            store
        }
        None => Keystore::new(root),
    };

    let mpk_bytes = mpk.to_bytes();
    let msk_bytes = msk.to_bytes(&mpk);
    let irm_bytes = irm.to_bytes(&mpk);
    ks.store(Role::Mpk, &mpk_bytes)?;
    ks.store(Role::Msk, &msk_bytes)?;
    let irm_path = irm_store.store(Role::Irm, &irm_bytes)?;

    let _ = writeln!(
        Text(out),
        "params {} {}",
        params.digest(),
        params.security_label()
    );
    let _ = writeln!(Text(out), "mpk {}", digest(&mpk_bytes));
    let _ = writeln!(Text(out), "msk {}", digest(&msk_bytes));
    let _ = writeln!(
        Text(out),
        "irm {} {}",
        digest(&irm_bytes),
        irm_path.display()
    );
    Ok(())
}

fn extract(id: &str, root: &Path, path: &Path, out: &mut Vec<u8>) -> Result<(), CliError> {
    check_identity(id)?;
    let ks = Keystore::new(root);
    let mpk = load_mpk(&ks)?;
    let msk = AibeirMasterKey::from_bytes(&ks.load(Role::Msk)?, &mpk)?;
    let sk = scheme::extract(&mpk, &msk, id.as_bytes(), &mut rand::thread_rng())?;
    let bytes = sk.to_bytes(&mpk);
    write_atomic(path, &bytes)?;
    let _ = writeln!(Text(out), "user-key {}", digest(&bytes));
    Ok(())
}

fn encrypt(id: &str, input: &Path, path: &Path, root: &Path) -> Result<(), CliError> {
    check_identity(id)?;
    let msg = read(input)?;
    if msg.len() > scheme::MAX_MESSAGE {
        return Err(CliError::Io(format!(
            "{}: {} bytes exceeds the {}-byte limit",
            input.display(),
            msg.len(),
            scheme::MAX_MESSAGE
        )));
    }
    let mpk = load_mpk(&Keystore::new(root))?;
    let ct = scheme::encrypt(&mpk, id.as_bytes(), &msg, &mut rand::thread_rng())?;
    write_atomic(path, &ct.to_bytes()?)
}

fn decrypt(key: &Path, input: &Path, path: &Path) -> Result<(), CliError> {
    let (mpk, sk) = AibeirUserKey::from_bytes(&read(key)?)?;
    let ct = AibeirCiphertext::from_bytes(&read(input)?)?;
    let msg = scheme::decrypt(&mpk, &sk, &ct)?;
    write_atomic(path, &msg)
}

fn recover(
    input: &Path,
    root: &Path,
    irm_path: Option<&Path>,
    out: &mut Vec<u8>,
) -> Result<(), CliError> {
    let ks = Keystore::new(root);
    let mpk = load_mpk(&ks)?;
    let irm_bytes = match irm_path {
        Some(p) => read(p)?,
        None => ks.load(Role::Irm)?,
    };
    let irm = IrmKey::from_bytes(&irm_bytes, &mpk)?;
    let bytes = read(input)?;
    // a file that is not a ciphertext at all is a format error; anything past the header is ⊥
    if wire::peek_kind(&bytes)? != ObjectKind::AibeirCiphertext {
        return Err(CliError::Io(format!(
            "{}: not a ciphertext",
            input.display()
        )));
    }
    let recovered = AibeirCiphertext::from_bytes(&bytes)
        .ok()
        .and_then(|ct| scheme::recover(&mpk, &irm, &ct));
    match recovered {
        Some(id) => {
            out.extend_from_slice(&id);
            out.push(b'\n');
            Ok(())
        }
        None => {
            out.extend_from_slice(b"BOTTOM\n");
            Err(CliError::Crypto("recovery rejected the ciphertext".into()))
        }
    }
}

fn inspect(input: &Path, out: &mut Vec<u8>) -> Result<(), CliError> {
    let bytes = read(input)?;
    let (kind, lens) = wire::field_lengths(&bytes)?;
    let mut line = format!("type={} version={}", kind.name(), wire::VERSION);
    if kind.is_secret() {
        let _ = write!(line, " secret=yes digest={}", digest(&bytes));
        // parse far enough to reject truncation without printing anything from inside
        if lens.is_empty() {
            return Err(CliError::Io("secret object has no fields".into()));
        }
        let _ = writeln!(Text(out), "{line}");
        return Ok(());
    }
    let params: Option<CurveParams> = match kind {
        ObjectKind::AibeirCiphertext => {
            let ct = AibeirCiphertext::from_bytes(&bytes)?;
            let _ = write!(
                line,
                " c1={} c2={} c3={}",
                ct.c1.len(),
                ct.c2.len(),
                ct.c3.len()
            );
            None
        }
        ObjectKind::AibeirPublicKey => {
            let mpk = AibeirPublicKey::from_bytes(&bytes)?;
            let _ = write!(
                line,
                " id_epsilon={} n_bits={}",
                String::from_utf8_lossy(&mpk.id_epsilon),
                mpk.testable.identity_bits()
            );
            Some(mpk.params().clone())
        }
        ObjectKind::AibeirUserKey => {
            let (mpk, sk) = AibeirUserKey::from_bytes(&bytes)?;
            let _ = write!(line, " id={}", String::from_utf8_lossy(&sk.id));
            Some(mpk.params().clone())
        }
        ObjectKind::CurveParams => Some(CurveParams::from_bytes(&bytes)?),
        _ => {
            let joined: Vec<String> = lens.iter().map(|l| l.to_string()).collect();
            let _ = write!(line, " fields={}", joined.join(","));
            None
        }
    };
    if let Some(p) = params {
        let _ = write!(line, " params={} label={}", p.digest(), p.security_label());
    }
    let _ = write!(line, " size={}", bytes.len());
    let _ = writeln!(Text(out), "{line}");
    Ok(())
}

/// `fmt::Write` over a byte buffer.
struct Text<'a>(&'a mut Vec<u8>);

impl std::fmt::Write for Text<'_> {
    fn write_str(&mut self, s: &str) -> std::fmt::Result {
        self.0.extend_from_slice(s.as_bytes());
        Ok(())
    }
}
