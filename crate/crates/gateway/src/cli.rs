//! The `fourfa` command line.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use fourfa_core::crypto::Block64;
use fourfa_core::factors::{enroll_user, GeoPoint};
use fourfa_core::flow::{FactorEvent, FlowError, SessionState};
use fourfa_core::transport::SmsTransport;
use fourfa_core::{open_envelope, seal_envelope, Channels, EnvelopeError, Outcome, RasterImage};
use rand::RngCore;

use crate::config::{load_config, Config};
use crate::image_io::{read_png, write_png, ImageError};
use crate::service::{ApiError, Gateway};
use crate::sms::MockSmsTransport;
use crate::store::FileUserStore;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Failure = 1,
    Usage = 2,
    Capacity = 3,
    Tamper = 4,
    Denied = 5,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s as u8)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fourfa",
    version,
    about = "Four-factor transaction authentication gateway"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encrypt a file and hide it in the pixels of a PNG cover.
    Hide {
        /// Passphrase for the authentication tag.
        #[arg(short = 'm', value_name = "MAC-PASSWORD")]
        mac_pass: String,
        /// Passphrase for the cipher.
        #[arg(short = 'k', value_name = "PASSWORD")]
        key_pass: String,
        secret: PathBuf,
        cover: PathBuf,
        /// Output path (default: <cover>.stego.png).
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Recover a hidden file and write it to stdout.
    Open {
        #[arg(short = 'm', value_name = "MAC-PASSWORD")]
        mac_pass: String,
        #[arg(short = 'k', value_name = "PASSWORD")]
        key_pass: String,
        stego: PathBuf,
    },
    /// Add or replace a user in the store.
    Enroll {
        #[arg(long)]
        user: String,
        /// Read the password from the first line of stdin.
        #[arg(long, required = true)]
        password_stdin: bool,
        #[arg(long)]
        face: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lat: f64,
        #[arg(long, allow_hyphen_values = true)]
        lon: f64,
        #[arg(long, env = "FOURFA_STORE")]
        store: PathBuf,
    },
    /// Walk through one transaction interactively against the local store.
    Demo {
        #[arg(long)]
        user: String,
        #[arg(long)]
        face: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lat: f64,
        #[arg(long, allow_hyphen_values = true)]
        lon: f64,
        /// Cover image for the sealed transaction (default: a generated one).
        #[arg(long)]
        cover: Option<PathBuf>,
        /// Where to write the sealed image.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Status::Usage
            } else {
                Status::Ok
            }
            .into();
        }
    };
    match execute(cli.command) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            Status::Failure.into()
        }
    }
}

fn execute(command: Command) -> anyhow::Result<Status> {
    match command {
        Command::Hide {
            mac_pass,
            key_pass,
            secret,
            cover,
            output,
        } => hide(&mac_pass, &key_pass, &secret, &cover, output.as_deref()),
        Command::Open {
            mac_pass,
            key_pass,
            stego,
        } => open(&mac_pass, &key_pass, &stego),
        Command::Enroll {
            user,
            password_stdin: _,
            face,
            lat,
            lon,
            store,
        } => enroll(&user, &face, lat, lon, &store),
        Command::Demo {
            user,
            face,
            lat,
            lon,
            cover,
            out,
            config,
        } => demo(
            &user,
            &face,
            lat,
            lon,
            cover.as_deref(),
            out.as_deref(),
            config.as_deref(),
        ),
        Command::Serve { config } => serve(config.as_deref()),
    }
}

/// `x.png` becomes `x.stego.png`.
pub fn stego_path(cover: &Path) -> PathBuf {
    cover.with_extension("stego.png")
}

fn envelope_status(e: &EnvelopeError) -> Status {
    match e {
        EnvelopeError::CapacityExceeded { .. } => Status::Capacity,
        _ => Status::Tamper,
    }
}

fn read_image(path: &Path) -> anyhow::Result<Result<RasterImage, Status>> {
    match read_png(path) {
        Ok(img) => Ok(Ok(img)),
        Err(e @ ImageError::Io { .. }) => Err(e.into()),
        Err(e) => {
            eprintln!("error: {e}");
            Ok(Err(Status::Usage))
        }
    }
}

fn hide(
    mac: &str,
    key: &str,
    secret: &Path,
    cover: &Path,
    output: Option<&Path>,
) -> anyhow::Result<Status> {
    let data = std::fs::read(secret).with_context(|| format!("reading {}", secret.display()))?;
    let cover_img = match read_image(cover)? {
        Ok(img) => img,
        Err(status) => return Ok(status),
    };
    let mut iv = [0u8; 8];
    rand::rng().fill_bytes(&mut iv);
    let stego = match seal_envelope(
        &cover_img,
        &data,
        mac.as_bytes(),
        key.as_bytes(),
        Block64(iv),
    ) {
        Ok(img) => img,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(envelope_status(&e));
        }
    };
    let out = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| stego_path(cover));
    write_png(&out, &stego)?;
    eprintln!("wrote {}", out.display());
    Ok(Status::Ok)
}

fn open(mac: &str, key: &str, stego: &Path) -> anyhow::Result<Status> {
    let img = match read_image(stego)? {
        Ok(img) => img,
        Err(status) => return Ok(status),
    };
    match open_envelope(&img, mac.as_bytes(), key.as_bytes()) {
        Ok(data) => {
            let mut out = std::io::stdout().lock();
            out.write_all(&data)?;
            out.flush()?;
            Ok(Status::Ok)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(envelope_status(&e))
        }
    }
}

fn read_line(input: &mut impl BufRead) -> anyhow::Result<String> {
    let mut line = String::new();
    if input.read_line(&mut line)? == 0 {
        return Err(anyhow!("unexpected end of input"));
    }
    Ok(line.trim_end_matches(['\r', '\n']).to_owned())
}

fn geo(lat: f64, lon: f64) -> Result<GeoPoint, Status> {
    GeoPoint::new(lat, lon).map_err(|e| {
        eprintln!("error: {e}");
        Status::Usage
    })
}

fn enroll(
    user: &str,
    face: &Path,
    lat: f64,
    lon: f64,
    store_path: &Path,
) -> anyhow::Result<Status> {
    let home = match geo(lat, lon) {
        Ok(p) => p,
        Err(s) => return Ok(s),
    };
    let face_img = match read_image(face)? {
        Ok(img) => img,
        Err(status) => return Ok(status),
    };
    let password = read_line(&mut std::io::stdin().lock())?;
    let mut salt = [0u8; 16];
    rand::rng().fill_bytes(&mut salt);
    let record = match enroll_user(user, password.as_bytes(), &face_img, home, salt) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(Status::Usage);
        }
    };
    let store = FileUserStore::open(store_path)?;
    store.put(record)?;
    eprintln!("enrolled {user} in {}", store_path.display());
    Ok(Status::Ok)
}

/// A cover generated for the demo: a smooth gradient large enough for any payload.
pub fn synthetic_cover() -> RasterImage {
    const SIDE: u32 = 128;
    let mut samples = Vec::with_capacity((SIDE * SIDE * 3) as usize);
    for y in 0..SIDE {
        for x in 0..SIDE {
            samples.extend_from_slice(&[(x * 2) as u8, (y * 2) as u8, ((x + y) % 256) as u8]);
        }
    }
    RasterImage::new(SIDE, SIDE, Channels::Rgb, samples).expect("dimensions match")
}

fn demo_config(path: Option<&Path>) -> anyhow::Result<Config> {
    let env = |name: &str| {
        std::env::var(name).ok().or_else(|| match name {
            "FOURFA_STORE" => Some("users.jsonl".into()),
            "FOURFA_MAC_PASS" => Some("demo-mac".into()),
            "FOURFA_KEY_PASS" => Some("demo-key".into()),
            _ => None,
        })
    };
    Ok(load_config(path, env)?)
}

fn demo(
    user: &str,
    face: &Path,
    lat: f64,
    lon: f64,
    cover: Option<&Path>,
    out: Option<&Path>,
    config: Option<&Path>,
) -> anyhow::Result<Status> {
    let config = demo_config(config)?;
    let point = match geo(lat, lon) {
        Ok(p) => p,
        Err(s) => return Ok(s),
    };
    let face_img = match read_image(face)? {
        Ok(img) => img,
        Err(status) => return Ok(status),
    };
    let cover_img = match cover {
        Some(path) => match read_image(path)? {
            Ok(img) => img,
            Err(status) => return Ok(status),
        },
        None => synthetic_cover(),
    };

    let store = Arc::new(FileUserStore::open(&config.store_path)?);
    let transport: Arc<dyn SmsTransport + Send + Sync> =
        Arc::new(MockSmsTransport::new(&config.sms_mock_log).echoing());
    let gateway = Gateway::new(store, transport, config.policy(), config.seal_keys());
    let session = gateway.begin(user)?;
    let id = session.id().as_str().to_owned();

    let mut input = std::io::stdin().lock();
    let mut state = session.state();
    let mut sealed = None;
    while !state.is_terminal() {
        let event = match state {
            SessionState::AwaitPassword => {
                eprint!("password: ");
                FactorEvent::PasswordSubmitted(read_line(&mut input)?)
            }
            SessionState::AwaitOtp => FactorEvent::OtpRequested,
            SessionState::OtpPending => {
                eprint!("code: ");
                FactorEvent::OtpSubmitted(read_line(&mut input)?)
            }
            SessionState::ParallelChecks {
                face_done: false, ..
            } => FactorEvent::FaceSubmitted(face_img.clone()),
            SessionState::ParallelChecks { .. } => FactorEvent::LocationReported(point),
            _ => FactorEvent::FinalizeRequested(cover_img.clone()),
        };
        let (next, stego) = match gateway.apply(&id, event) {
            Ok(r) => r,
            Err(ApiError::Flow(FlowError::Envelope(e))) => {
                eprintln!("error: {e}");
                return Ok(envelope_status(&e));
            }
            Err(e) => return Err(e.into()),
        };
        state = next;
        eprintln!("state: {}", state.name());
        sealed = sealed.or(stego);
    }

    if let SessionState::Denied(reason) = state {
        println!("deny {}", reason.as_str());
        return Ok(Status::Denied);
    }
    let stego = sealed.ok_or_else(|| anyhow!("transaction completed without an image"))?;
    if let Some(path) = out {
        write_png(path, &stego)?;
        eprintln!("wrote {}", path.display());
    }
    let decision = gateway.verify(&stego);
    match decision.outcome() {
        Outcome::Approve => {
            println!("approve {}", decision.reason().as_str());
            Ok(Status::Ok)
        }
        Outcome::Deny => {
            println!("deny {}", decision.reason().as_str());
            Ok(Status::Denied)
        }
    }
}

fn serve(config_path: Option<&Path>) -> anyhow::Result<Status> {
    let config = load_config(config_path, |name| std::env::var(name).ok())?;
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(crate::service::serve(&config))?;
    Ok(Status::Ok)
}
