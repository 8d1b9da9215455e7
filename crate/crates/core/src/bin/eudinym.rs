use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::OsRng;

use eudinym::actors::{
    create_record, load_record, save_record, write_atomic, AccountStatus, IssuerState, NymMode, NymPolicy, Policy,
    RelyingPartyInfo, RelyingPartyState, StateLock, WalletState,
};
use eudinym::bbs::{self, BlindIssuanceRequest, BlindSignature, IssuerPublicKey, PresentationMode, PresentationProof};
use eudinym::codec::{Record, RecordKind, MAGIC};
use eudinym::prf::{epoch_index, EpochGranularity, Index, Scope};
use eudinym::transfer::{self, BackupBlob, TransferPackage, TransferPublicKey, TransferSecretKey};
use eudinym::vectors::{self, Suite};
use eudinym::Error;

#[derive(Parser)]
#[command(name = "eudinym", version, about = "Certified per-relying-party pseudonyms from BBS credentials")]
struct Cli {
    /// Output style on stdout. Files are always written in the binary format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Binary)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Binary,
    Text,
}

#[derive(Subcommand)]
enum Command {
    #[command(subcommand)]
    Issuer(IssuerCmd),
    #[command(subcommand)]
    Wallet(WalletCmd),
    #[command(subcommand)]
    Rp(RpCmd),
    #[command(subcommand)]
    Transfer(TransferCmd),
    #[command(subcommand)]
    Backup(BackupCmd),
    /// Emit deterministic test vectors.
    Vectors {
        #[arg(long)]
        suite: Suite,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Describe any file written by this tool.
    Inspect { file: PathBuf },
    /// List the exit codes and their error classes.
    ExitCodes,
}

#[derive(Args)]
struct StateArg {
    #[arg(long)]
    state: PathBuf,
}

#[derive(Subcommand)]
enum IssuerCmd {
    Init {
        #[command(flatten)]
        s: StateArg,
        /// Comma-separated names of the clear attribute slots.
        #[arg(long, value_delimiter = ',', default_value = "age_over_18,expiry")]
        attributes: Vec<String>,
        #[arg(long)]
        public_out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Check an enrollment request and sign it.
    Enroll {
        #[command(flatten)]
        s: StateArg,
        #[arg(long)]
        holder: String,
        #[arg(long)]
        request: PathBuf,
        /// Clear attribute as name=value; repeat for every slot.
        #[arg(long = "attr")]
        attrs: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        time: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EpochArg {
    Day,
    Week,
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long, conflicts_with = "epoch")]
    index: Option<u64>,
    /// Derive the index from the current epoch instead.
    #[arg(long, value_enum)]
    epoch: Option<EpochArg>,
    /// Unix time used for epochs and timestamps (defaults to now).
    #[arg(long)]
    time: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Hmac,
    Hashdh,
    Dy,
}

#[derive(Subcommand)]
enum WalletCmd {
    Init {
        #[command(flatten)]
        s: StateArg,
        #[arg(long)]
        force: bool,
    },
    EnrollRequest {
        #[command(flatten)]
        s: StateArg,
        #[arg(long)]
        issuer: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    EnrollFinish {
        #[command(flatten)]
        s: StateArg,
        #[arg(long)]
        response: PathBuf,
    },
    /// Derive and record a pseudonym.
    Nym {
        #[command(flatten)]
        s: StateArg,
        #[arg(long)]
        scope: String,
        #[command(flatten)]
        idx: IndexArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Hashdh)]
        mode: ModeArg,
        #[arg(long, default_value = "")]
        label: String,
    },
    /// Build a presentation for a relying party.
    Present {
        #[command(flatten)]
        s: StateArg,
        #[arg(long)]
        rp_info: PathBuf,
        /// Scope the wallet expects; must match the relying party's.
        #[arg(long)]
        scope: Option<String>,
        #[command(flatten)]
        idx: IndexArgs,
        #[arg(long, value_delimiter = ',')]
        disclose: Vec<String>,
        /// Hex session context (defaults to a hash of the relying party info).
        #[arg(long)]
        context: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Show the pseudonym ledger with re-derived values.
    List {
        #[command(flatten)]
        s: StateArg,
    },
}

#[derive(Subcommand)]
enum RpCmd {
    Init {
        #[command(flatten)]
        s: StateArg,
        #[arg(long)]
        scope: String,
        #[arg(long)]
        issuer: PathBuf,
        #[arg(long, value_enum, default_value_t = RpMode::Hashdh)]
        mode: RpMode,
        /// Pseudonym bound ℓ (required for dy).
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        require: Vec<String>,
        #[arg(long)]
        info_out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    Verify {
        #[command(flatten)]
        s: StateArg,
        #[arg(long)]
        presentation: PathBuf,
        #[arg(long)]
        context: Option<String>,
        /// Run as an account-recovery login.
        #[arg(long)]
        recover: bool,
        #[arg(long)]
        time: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RpMode {
    Hashdh,
    Dy,
}

#[derive(Subcommand)]
enum TransferCmd {
    /// Key pair for the receiving device.
    Keygen {
        #[arg(long)]
        secret_out: PathBuf,
        #[arg(long)]
        public_out: PathBuf,
    },
    Export {
        #[arg(long)]
        wallet: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Import {
        #[arg(long)]
        secret: PathBuf,
        #[arg(long)]
        package: PathBuf,
        #[command(flatten)]
        s: StateArg,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Args)]
struct PassphraseArg {
    /// Environment variable holding the passphrase.
    #[arg(long, default_value = "EUDINYM_PASSPHRASE")]
    passphrase_env: String,
}

#[derive(Subcommand)]
enum BackupCmd {
    Create {
        #[arg(long)]
        wallet: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pass: PassphraseArg,
    },
    Restore {
        #[arg(long)]
        blob: PathBuf,
        #[command(flatten)]
        s: StateArg,
        #[command(flatten)]
        pass: PassphraseArg,
        #[arg(long)]
        force: bool,
    },
}

fn now(time: Option<u64>) -> u64 {
    time.unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn scope(s: &str) -> Result<Scope, Error> {
    Ok(Scope::new(s)?)
}

fn resolve_index(a: &IndexArgs) -> Result<Index, Error> {
    match (a.index, a.epoch) {
        (Some(i), _) => Ok(Index(i)),
        (None, Some(e)) => {
            let g = match e {
                EpochArg::Day => EpochGranularity::Day,
                EpochArg::Week => EpochGranularity::Week,
            };
            Ok(epoch_index(now(a.time), g))
        }
        (None, None) => Err(usage("either --index or --epoch is required")),
    }
}

fn context(arg: &Option<String>, default: [u8; 32]) -> Result<Vec<u8>, Error> {
    match arg {
        Some(h) => hex::decode(h).map_err(|_| usage("--context must be hex")),
        None => Ok(default.to_vec()),
    }
}

fn read_msg<T: Record>(path: &Path) -> Result<T, Error> {
    Ok(load_record(path)?)
}

fn write_msg<T: Record>(path: &Path, value: &T) -> Result<(), Error> {
    Ok(save_record(path, value)?)
}

fn report(format: Format, summary: String, annotated: Vec<(&str, String)>) {
    match format {
        Format::Binary => println!("{summary}"),
        Format::Text => {
            for (k, v) in annotated {
                println!("{k}: {v}");
            }
        }
    }
}

fn mode_name(mode: PresentationMode) -> String {
    match mode {
        PresentationMode::Plain => "plain".into(),
        PresentationMode::HashDh => "hashdh".into(),
        PresentationMode::DyRateLimited { bound } => format!("dy(bound={})", bound.0),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let fmt = cli.format;
    match cli.command {
        Command::Issuer(IssuerCmd::Init {
            s,
            attributes,
            public_out,
            force,
        }) => {
            let names: Vec<&str> = attributes.iter().map(String::as_str).filter(|n| !n.is_empty()).collect();
            let keypair = bbs::keygen(&names, &mut OsRng)?;
            let _lock = StateLock::acquire(&s.state)?;
            create_record(&s.state, &IssuerState::new(keypair.clone()), force)?;
            write_msg(&public_out, &keypair.public)?;
            report(
                fmt,
                format!("issuer initialised with {} slots", keypair.public.slot_count()),
                vec![
                    ("public_key", hex::encode(keypair.public.w.to_bytes())),
                    ("attributes", keypair.public.attribute_names.join(",")),
                ],
            );
        }
        Command::Issuer(IssuerCmd::Enroll {
            s,
            holder,
            request,
            attrs,
            out,
            time,
        }) => {
            let request: BlindIssuanceRequest = read_msg(&request)?;
            let mut clear = BTreeMap::new();
            for a in &attrs {
                let (k, v) = a.split_once('=').ok_or_else(|| usage(format!("--attr {a:?} is not name=value")))?;
                clear.insert(k.to_owned(), v.as_bytes().to_vec());
            }
            let _lock = StateLock::acquire(&s.state)?;
            let mut state: IssuerState = load_record(&s.state)?;
            let known = state.enrollment_ledger.contains_key(&holder);
            let sig = state.enroll(&holder, &request, &clear, now(time))?;
            save_record(&s.state, &state)?;
            write_msg(&out, &sig)?;
            report(
                fmt,
                format!("issued credential to {holder}{}", if known { " (re-enrollment)" } else { "" }),
                vec![
                    ("holder", holder.clone()),
                    ("re_enrollment", known.to_string()),
                    ("ledger_size", state.enrollment_ledger.len().to_string()),
                ],
            );
        }
        Command::Wallet(WalletCmd::Init { s, force }) => {
            let _lock = StateLock::acquire(&s.state)?;
            create_record(&s.state, &WalletState::new(&mut OsRng), force)?;
            report(fmt, "wallet initialised".into(), vec![("seed", "<redacted>".into())]);
        }
        Command::Wallet(WalletCmd::EnrollRequest { s, issuer, out }) => {
            let issuer: IssuerPublicKey = read_msg(&issuer)?;
            let _lock = StateLock::acquire(&s.state)?;
            let mut w: WalletState = load_record(&s.state)?;
            let req = w.enroll_request(&issuer, &mut OsRng);
            save_record(&s.state, &w)?;
            write_msg(&out, &req)?;
            report(
                fmt,
                "enrollment request written".into(),
                vec![
                    ("pnc", hex::encode(eudinym::codec::Encode::to_bytes(&req.pnc))),
                    ("device_commitment", hex::encode(req.device_commitment.to_bytes())),
                ],
            );
        }
        Command::Wallet(WalletCmd::EnrollFinish { s, response }) => {
            let sig: BlindSignature = read_msg(&response)?;
            let _lock = StateLock::acquire(&s.state)?;
            let mut w: WalletState = load_record(&s.state)?;
            w.enroll_finish(&sig)?;
            save_record(&s.state, &w)?;
            report(
                fmt,
                "credential stored".into(),
                vec![("attributes", sig.attributes.keys().cloned().collect::<Vec<_>>().join(","))],
            );
        }
        Command::Wallet(WalletCmd::Nym {
            s,
            scope: scp,
            idx,
            mode,
            label,
        }) => {
            let scp = scope(&scp)?;
            let index = resolve_index(&idx)?;
            let mode = match mode {
                ModeArg::Hmac => NymMode::Hmac,
                ModeArg::Hashdh => NymMode::HashDh,
                ModeArg::Dy => NymMode::Dy,
            };
            let _lock = StateLock::acquire(&s.state)?;
            let mut w: WalletState = load_record(&s.state)?;
            let nym = w.register_pseudonym(&scp, index, mode, &label)?;
            save_record(&s.state, &w)?;
            report(
                fmt,
                format!("nym={} idx={}", hex::encode(nym.value_bytes()), index.0),
                vec![
                    ("scope", scp.as_str().into()),
                    ("idx", index.0.to_string()),
                    ("mode", format!("{mode:?}")),
                    ("nym", hex::encode(nym.value_bytes())),
                ],
            );
        }
        Command::Wallet(WalletCmd::Present {
            s,
            rp_info,
            scope: expected,
            idx,
            disclose,
            context: ctx,
            out,
        }) => {
            let info: RelyingPartyInfo = read_msg(&rp_info)?;
            if let Some(expected) = expected {
                let expected = scope(&expected)?;
                if expected != info.scope {
                    return Err(bbs::BbsError::ScopeMismatch {
                        expected: expected.as_str().into(),
                        found: info.scope.as_str().into(),
                    }
                    .into());
                }
            }
            let index = resolve_index(&idx)?;
            let session = context(&ctx, info.default_context())?;
            let disclose: BTreeSet<String> = disclose.into_iter().filter(|d| !d.is_empty()).collect();
            let _lock = StateLock::acquire(&s.state)?;
            let mut w: WalletState = load_record(&s.state)?;
            let proof = w.present(
                &info.issuer_public,
                &info.scope,
                index,
                info.policy.nym.presentation_mode(),
                &disclose,
                &session,
                now(idx.time),
                &mut OsRng,
            )?;
            save_record(&s.state, &w)?;
            write_msg(&out, &proof)?;
            report(
                fmt,
                format!("presentation for {} written", info.scope),
                describe_presentation(&proof),
            );
        }
        Command::Wallet(WalletCmd::List { s }) => {
            let w: WalletState = load_record(&s.state)?;
            println!("credentials: {}", w.credentials.len());
            for (k, nym) in w.pseudonyms()? {
                let entry = &w.ledger[&k];
                println!(
                    "{} idx={} mode={:?} label={:?} nym={}",
                    k.scope,
                    k.index.0,
                    k.mode,
                    entry.label,
                    hex::encode(nym.value_bytes())
                );
            }
        }
        Command::Rp(RpCmd::Init {
            s,
            scope: scp,
            issuer,
            mode,
            bound,
            require,
            info_out,
            force,
        }) => {
            let scp = scope(&scp)?;
            let issuer: IssuerPublicKey = read_msg(&issuer)?;
            let nym = match (mode, bound) {
                (_, Some(0)) => return Err(usage("--bound must be at least 1")),
                (RpMode::Hashdh, b) => NymPolicy::HashDh { bound: b.map(Index) },
                (RpMode::Dy, Some(b)) => NymPolicy::DyRateLimited { bound: Index(b) },
                (RpMode::Dy, None) => return Err(usage("--mode dy needs --bound")),
            };
            let policy = Policy {
                nym,
                required_disclosures: require.into_iter().filter(|r| !r.is_empty()).collect(),
            };
            let state = RelyingPartyState::new(scp, policy, issuer);
            let _lock = StateLock::acquire(&s.state)?;
            create_record(&s.state, &state, force)?;
            write_msg(&info_out, &state.info())?;
            report(
                fmt,
                format!("relying party {} initialised", state.scope),
                vec![
                    ("scope", state.scope.as_str().into()),
                    ("mode", mode_name(state.policy.nym.presentation_mode())),
                    ("default_context", hex::encode(state.default_context())),
                ],
            );
        }
        Command::Rp(RpCmd::Verify {
            s,
            presentation,
            context: ctx,
            recover,
            time,
        }) => {
            let proof: PresentationProof = read_msg(&presentation)?;
            let _lock = StateLock::acquire(&s.state)?;
            let mut state: RelyingPartyState = load_record(&s.state)?;
            let session = context(&ctx, state.default_context())?;
            let decision = if recover {
                state.recover_account(&proof, &session, now(time))?
            } else {
                state.authenticate(&proof, &session, now(time))?
            };
            save_record(&s.state, &state)?;
            let status = match decision.status {
                AccountStatus::New => "new account",
                AccountStatus::Returning => "returning account",
            };
            let disclosed: Vec<String> = decision
                .disclosed
                .iter()
                .map(|(k, v)| format!("{k}={}", String::from_utf8_lossy(v)))
                .collect();
            report(
                fmt,
                format!("{status} {}", decision.record.label),
                vec![
                    ("status", status.into()),
                    ("account", decision.record.label.clone()),
                    ("account_key", hex::encode(decision.account)),
                    ("disclosed", disclosed.join(",")),
                    ("registry_size", state.registry.len().to_string()),
                ],
            );
        }
        Command::Transfer(TransferCmd::Keygen { secret_out, public_out }) => {
            let sk = TransferSecretKey::generate(&mut OsRng);
            write_msg(&secret_out, &sk)?;
            write_msg(&public_out, &sk.public())?;
            report(fmt, "transfer key pair written".into(), vec![("public", hex::encode(sk.public().0))]);
        }
        Command::Transfer(TransferCmd::Export { wallet, target, out }) => {
            let w: WalletState = load_record(&wallet)?;
            let target: TransferPublicKey = read_msg(&target)?;
            let pkg = transfer::export_to_target(&w, &target, &mut OsRng)?;
            write_msg(&out, &pkg)?;
            report(
                fmt,
                "transfer package written".into(),
                vec![
                    ("ephemeral_public", hex::encode(pkg.ephemeral_public)),
                    ("target_binding", hex::encode(pkg.target_binding)),
                    ("ciphertext_len", pkg.ciphertext.len().to_string()),
                ],
            );
        }
        Command::Transfer(TransferCmd::Import { secret, package, s, force }) => {
            let sk: TransferSecretKey = read_msg(&secret)?;
            let pkg: TransferPackage = read_msg(&package)?;
            let w = transfer::import_from_package(&pkg, &sk, &mut OsRng)?;
            let _lock = StateLock::acquire(&s.state)?;
            create_record(&s.state, &w, force)?;
            report(
                fmt,
                format!("wallet imported with {} ledger entries; re-enroll to obtain a credential", w.ledger.len()),
                vec![("ledger_entries", w.ledger.len().to_string())],
            );
        }
        Command::Backup(BackupCmd::Create { wallet, out, pass }) => {
            let passphrase = read_passphrase(&pass)?;
            let w: WalletState = load_record(&wallet)?;
            let blob = transfer::backup(&w, &passphrase, &mut OsRng)?;
            write_msg(&out, &blob)?;
            report(fmt, "backup written".into(), vec![("salt", hex::encode(blob.salt))]);
        }
        Command::Backup(BackupCmd::Restore { blob, s, pass, force }) => {
            let passphrase = read_passphrase(&pass)?;
            let blob: BackupBlob = read_msg(&blob)?;
            let w = transfer::restore(&blob, &passphrase, &mut OsRng)?;
            let _lock = StateLock::acquire(&s.state)?;
            create_record(&s.state, &w, force)?;
            report(
                fmt,
                format!("wallet restored with {} ledger entries; re-enroll to obtain a credential", w.ledger.len()),
                vec![("ledger_entries", w.ledger.len().to_string())],
            );
        }
        Command::Vectors { suite, out } => {
            let text = vectors::generate(suite);
            match out {
                Some(p) => write_atomic(&p, text.as_bytes())?,
                None => print!("{text}"),
            }
        }
        Command::Inspect { file } => inspect(&file)?,
        Command::ExitCodes => {
            for (code, class) in eudinym::error::EXIT_CODES {
                println!("{code}\t{class}");
            }
        }
    }
    Ok(())
}

fn read_passphrase(p: &PassphraseArg) -> Result<String, Error> {
    std::env::var(&p.passphrase_env).map_err(|_| usage(format!("environment variable {} is not set", p.passphrase_env)))
}

fn describe_presentation(p: &PresentationProof) -> Vec<(&'static str, String)> {
    let mut out = vec![
        ("scope", p.scope.as_str().to_owned()),
        ("mode", mode_name(p.mode())),
        ("session_context", hex::encode(&p.session_context)),
    ];
    if let Some(nym) = &p.nym {
        out.push(("nym", hex::encode(nym.value_bytes())));
        if let Some(i) = nym.index_disclosed {
            out.push(("idx", i.0.to_string()));
        }
    }
    for (k, v) in &p.disclosed {
        out.push(("disclosed", format!("{k}={}", String::from_utf8_lossy(v))));
    }
    out
}

fn inspect(path: &Path) -> Result<(), Error> {
    let bytes = fs::read(path).map_err(|e| Error::Actor(eudinym::actors::ActorError::Io {
        path: path.to_owned(),
        source: e,
    }))?;
    if bytes.len() < 6 || bytes[..4] != MAGIC {
        return Err(eudinym::codec::DecodeError::BadMagic.into());
    }
    let lines: Vec<(&str, String)> = match bytes[5] {
        k if k == RecordKind::IssuerState as u8 => {
            let s = IssuerState::from_record(&bytes)?;
            vec![
                ("kind", "issuer state".into()),
                ("public_key", hex::encode(s.keypair.public.w.to_bytes())),
                ("holders", s.enrollment_ledger.len().to_string()),
                ("issued", s.issuance_log.len().to_string()),
            ]
        }
        k if k == RecordKind::WalletState as u8 => {
            let w = WalletState::from_record(&bytes)?;
            vec![
                ("kind", "wallet state".into()),
                ("seed", "<redacted>".into()),
                ("credentials", w.credentials.len().to_string()),
                ("ledger_entries", w.ledger.len().to_string()),
                ("enrollment_pending", w.pending.is_some().to_string()),
            ]
        }
        k if k == RecordKind::RelyingPartyState as u8 => {
            let s = RelyingPartyState::from_record(&bytes)?;
            vec![
                ("kind", "relying party state".into()),
                ("scope", s.scope.as_str().into()),
                ("mode", mode_name(s.policy.nym.presentation_mode())),
                ("accounts", s.registry.len().to_string()),
            ]
        }
        k if k == RecordKind::Presentation as u8 => {
            let mut v = vec![("kind", "presentation".to_string())];
            v.extend(describe_presentation(&PresentationProof::from_record(&bytes)?));
            v
        }
        k => vec![("kind", format!("record {k:#04x}")), ("length", bytes.len().to_string())],
    };
    for (k, v) in lines {
        println!("{k}: {v}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.class());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
