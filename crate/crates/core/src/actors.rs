//! Issuer, wallet and relying-party state machines, and the snapshot files
//! they persist to.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use fs2::FileExt;
use rand_core::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bbs::{
    self, BbsError, BlindIssuanceRequest, BlindSignature, BlindingState, Credential, IssuerKeyPair,
    IssuerPublicKey, PresentationMode, PresentationProof,
};
use crate::codec::{Decode, DecodeError, Encode, Reader, Record, RecordKind, Writer};
use crate::commitments::PseudonymSeed;
use crate::groups::Scalar;
use crate::prf::{self, Index, PrfError, Pseudonym, Scope};

#[derive(Debug, Error)]
pub enum ActorError {
    #[error("enrollment request rejected: {0}")]
    BadRequest(BbsError),
    #[error("holder {holder_id:?} is already enrolled with a different seed")]
    SeedConflict { holder_id: String },
    #[error("issuance failed: {0}")]
    Issuance(BbsError),
    #[error("wallet holds no credential from this issuer")]
    NoCredential,
    #[error("no enrollment in progress")]
    NoPendingIssuance,
    #[error("presentation failed: {0}")]
    Presentation(BbsError),
    #[error("presentation rejected: {0}")]
    Rejected(BbsError),
    #[error("presentation mode {found:?} does not satisfy the policy {expected:?}")]
    PolicyMismatch { expected: NymPolicy, found: PresentationMode },
    #[error("required attribute {0:?} not disclosed")]
    MissingDisclosure(String),
    #[error(transparent)]
    Prf(#[from] PrfError),
    #[error("state file {path}: {source}")]
    Decode { path: PathBuf, source: DecodeError },
    #[error("state file {path} already exists")]
    StateExists { path: PathBuf },
    #[error("state file {path} is locked by another process")]
    Locked { path: PathBuf },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Pseudonym family recorded in the wallet ledger.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NymMode {
    Hmac,
    HashDh,
    Dy,
}

impl NymMode {
    fn byte(self) -> u8 {
        match self {
            NymMode::Hmac => 0,
            NymMode::HashDh => 1,
            NymMode::Dy => 2,
        }
    }

    fn from_byte(b: u8) -> Result<Self, DecodeError> {
        match b {
            0 => Ok(NymMode::Hmac),
            1 => Ok(NymMode::HashDh),
            2 => Ok(NymMode::Dy),
            _ => Err(DecodeError::Invalid("pseudonym mode")),
        }
    }

    pub fn of_presentation(mode: PresentationMode) -> Option<Self> {
        match mode {
            PresentationMode::Plain => None,
            PresentationMode::HashDh => Some(NymMode::HashDh),
            PresentationMode::DyRateLimited { .. } => Some(NymMode::Dy),
        }
    }
}

fn sha256(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

// ---------------------------------------------------------------- issuer

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IssuanceRecord {
    pub holder_id: String,
    pub credential_fingerprint: [u8; 32],
    pub timestamp: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IssuerState {
    pub keypair: IssuerKeyPair,
    /// holder id → SHA-256 of the enrollment fingerprint element.
    pub enrollment_ledger: BTreeMap<String, [u8; 32]>,
    pub issuance_log: Vec<IssuanceRecord>,
}

impl IssuerState {
    pub fn new(keypair: IssuerKeyPair) -> Self {
        Self {
            keypair,
            enrollment_ledger: BTreeMap::new(),
            issuance_log: Vec::new(),
        }
    }

    /// Check the request, enforce one seed per holder, then sign.
    /// Nothing is recorded unless signing succeeds.
    pub fn enroll(
        &mut self,
        holder_id: &str,
        request: &BlindIssuanceRequest,
        clear_attributes: &BTreeMap<String, Vec<u8>>,
        now: u64,
    ) -> Result<BlindSignature, ActorError> {
        request.verify(&self.keypair.public).map_err(ActorError::BadRequest)?;
        let fingerprint = sha256(&request.fingerprint.to_bytes());
        if let Some(known) = self.enrollment_ledger.get(holder_id) {
            if *known != fingerprint {
                return Err(ActorError::SeedConflict {
                    holder_id: holder_id.to_owned(),
                });
            }
        }
        let signature = bbs::blind_sign(&self.keypair, request, clear_attributes).map_err(ActorError::Issuance)?;
        self.enrollment_ledger.entry(holder_id.to_owned()).or_insert(fingerprint);
        self.issuance_log.push(IssuanceRecord {
            holder_id: holder_id.to_owned(),
            credential_fingerprint: sha256(&signature.to_bytes()),
            timestamp: now,
        });
        Ok(signature)
    }
}

impl Encode for IssuerState {
    fn encode(&self, w: &mut Writer) {
        self.keypair.encode(w);
        w.len_of(self.enrollment_ledger.len());
        for (holder, fp) in &self.enrollment_ledger {
            w.str(holder).raw(fp);
        }
        w.len_of(self.issuance_log.len());
        for rec in &self.issuance_log {
            w.str(&rec.holder_id).raw(&rec.credential_fingerprint).u64(rec.timestamp);
        }
    }
}

impl Decode for IssuerState {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let keypair = IssuerKeyPair::decode(r)?;
        let mut enrollment_ledger = BTreeMap::new();
        for _ in 0..r.len("ledger size")? {
            let holder = r.string("holder id")?;
            if enrollment_ledger.insert(holder, r.array("fingerprint")?).is_some() {
                return Err(DecodeError::Invalid("duplicate holder"));
            }
        }
        let mut issuance_log = Vec::new();
        for _ in 0..r.len("log size")? {
            issuance_log.push(IssuanceRecord {
                holder_id: r.string("holder id")?,
                credential_fingerprint: r.array("credential fingerprint")?,
                timestamp: r.u64("timestamp")?,
            });
        }
        Ok(Self {
            keypair,
            enrollment_ledger,
            issuance_log,
        })
    }
}

impl Record for IssuerState {
    const KIND: RecordKind = RecordKind::IssuerState;
}

// ---------------------------------------------------------------- wallet

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LedgerKey {
    pub scope: Scope,
    pub index: Index,
    pub mode: NymMode,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerEntry {
    pub label: String,
    pub last_used: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoredCredential {
    pub issuer: IssuerPublicKey,
    pub credential: Credential,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PendingIssuance {
    pub issuer: IssuerPublicKey,
    pub blinding: BlindingState,
}

/// Wallet state. The ledger stores labels only; pseudonym values are always
/// re-derived from the seed.
#[derive(Clone, PartialEq, Eq)]
pub struct WalletState {
    seed: PseudonymSeed,
    pub device_scalar: Scalar,
    pub credentials: Vec<StoredCredential>,
    pub pending: Option<PendingIssuance>,
    pub ledger: BTreeMap<LedgerKey, LedgerEntry>,
}

impl std::fmt::Debug for WalletState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WalletState")
            .field("seed", &self.seed)
            .field("credentials", &self.credentials.len())
            .field("pending", &self.pending.is_some())
            .field("ledger", &self.ledger)
            .finish_non_exhaustive()
    }
}

impl WalletState {
    pub fn new<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self::from_seed(PseudonymSeed::generate(rng), rng)
    }

    /// Wallet around an existing seed with a fresh device key and no
    /// credentials, as after a transfer or restore.
    pub fn from_seed<R: RngCore + CryptoRng>(seed: PseudonymSeed, rng: &mut R) -> Self {
        Self {
            seed,
            device_scalar: Scalar::random_nonzero(rng),
            credentials: Vec::new(),
            pending: None,
            ledger: BTreeMap::new(),
        }
    }

    pub fn seed(&self) -> &PseudonymSeed {
        &self.seed
    }

    pub fn enroll_request<R: RngCore + CryptoRng>(
        &mut self,
        issuer: &IssuerPublicKey,
        rng: &mut R,
    ) -> BlindIssuanceRequest {
        let (request, blinding) = bbs::blind_issuance_request(&self.seed, self.device_scalar, issuer, rng);
        self.pending = Some(PendingIssuance {
            issuer: issuer.clone(),
            blinding,
        });
        request
    }

    pub fn enroll_finish(&mut self, signature: &BlindSignature) -> Result<(), ActorError> {
        let pending = self.pending.as_ref().ok_or(ActorError::NoPendingIssuance)?;
        let credential = bbs::unblind(&pending.issuer, signature, &pending.blinding, &self.seed, self.device_scalar)
            .map_err(ActorError::Issuance)?;
        let issuer = pending.issuer.clone();
        self.credentials.retain(|c| c.issuer != issuer);
        self.credentials.push(StoredCredential { issuer, credential });
        self.pending = None;
        Ok(())
    }

    pub fn derive(&self, scope: &Scope, index: Index, mode: NymMode) -> Result<Pseudonym, ActorError> {
        Ok(match mode {
            NymMode::Hmac => prf::hmac_nym(&self.seed, scope, index),
            NymMode::HashDh => prf::hashdh_nym(self.seed.scalar(), scope, index)?,
            NymMode::Dy => prf::dy_nym(self.seed.scalar(), scope, index)?,
        })
    }

    /// Derive and record a pseudonym. Repeating a triple returns the same
    /// pseudonym and leaves the ledger (including its label) unchanged.
    pub fn register_pseudonym(
        &mut self,
        scope: &Scope,
        index: Index,
        mode: NymMode,
        label: &str,
    ) -> Result<Pseudonym, ActorError> {
        if self.credentials.is_empty() {
            return Err(ActorError::NoCredential);
        }
        let nym = self.derive(scope, index, mode)?;
        self.ledger
            .entry(LedgerKey {
                scope: scope.clone(),
                index,
                mode,
            })
            .or_insert_with(|| LedgerEntry {
                label: label.to_owned(),
                last_used: None,
            });
        Ok(nym)
    }

    /// Every ledger entry with its re-derived pseudonym.
    pub fn pseudonyms(&self) -> Result<Vec<(LedgerKey, Pseudonym)>, ActorError> {
        self.ledger
            .keys()
            .map(|k| Ok((k.clone(), self.derive(&k.scope, k.index, k.mode)?)))
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn present<R: RngCore + CryptoRng>(
        &mut self,
        issuer: &IssuerPublicKey,
        scope: &Scope,
        index: Index,
        mode: PresentationMode,
        disclose: &BTreeSet<String>,
        session_context: &[u8],
        now: u64,
        rng: &mut R,
    ) -> Result<PresentationProof, ActorError> {
        let stored = self
            .credentials
            .iter()
            .find(|c| &c.issuer == issuer)
            .ok_or(ActorError::NoCredential)?;
        let proof = bbs::present(issuer, &stored.credential, disclose, scope, index, mode, session_context, rng)
            .map_err(ActorError::Presentation)?;
        if let Some(nym_mode) = NymMode::of_presentation(mode) {
            let entry = self
                .ledger
                .entry(LedgerKey {
                    scope: scope.clone(),
                    index,
                    mode: nym_mode,
                })
                .or_insert_with(|| LedgerEntry {
                    label: String::new(),
                    last_used: None,
                });
            entry.last_used = Some(now);
        }
        Ok(proof)
    }
}

pub(crate) fn encode_ledger(w: &mut Writer, ledger: &BTreeMap<LedgerKey, LedgerEntry>) {
    w.len_of(ledger.len());
    for (k, v) in ledger {
        k.scope.encode(w);
        w.u64(k.index.0).u8(k.mode.byte()).str(&v.label);
        match v.last_used {
            Some(t) => w.u8(1).u64(t),
            None => w.u8(0),
        };
    }
}

pub(crate) fn decode_ledger(r: &mut Reader<'_>) -> Result<BTreeMap<LedgerKey, LedgerEntry>, DecodeError> {
    let mut ledger = BTreeMap::new();
    for _ in 0..r.len("ledger size")? {
        let key = LedgerKey {
            scope: Scope::decode(r)?,
            index: Index(r.u64("index")?),
            mode: NymMode::from_byte(r.u8("mode")?)?,
        };
        let label = r.string("label")?;
        let last_used = match r.u8("last-used flag")? {
            0 => None,
            1 => Some(r.u64("last used")?),
            _ => return Err(DecodeError::Invalid("last-used flag")),
        };
        if ledger.insert(key, LedgerEntry { label, last_used }).is_some() {
            return Err(DecodeError::Invalid("duplicate ledger entry"));
        }
    }
    Ok(ledger)
}

impl Encode for WalletState {
    fn encode(&self, w: &mut Writer) {
        w.raw(self.seed.secret()).scalar(&self.device_scalar);
        w.len_of(self.credentials.len());
        for c in &self.credentials {
            c.issuer.encode(w);
            c.credential.encode(w);
        }
        match &self.pending {
            Some(p) => {
                w.u8(1);
                p.issuer.encode(w);
                w.scalar(&p.blinding.nonce);
            }
            None => {
                w.u8(0);
            }
        }
        encode_ledger(w, &self.ledger);
    }
}

impl Decode for WalletState {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let seed = PseudonymSeed::from_secret(r.array("seed")?);
        let device_scalar = r.scalar()?;
        let mut credentials = Vec::new();
        for _ in 0..r.len("credential count")? {
            credentials.push(StoredCredential {
                issuer: IssuerPublicKey::decode(r)?,
                credential: Credential::decode(r)?,
            });
        }
        let pending = match r.u8("pending flag")? {
            0 => None,
            1 => Some(PendingIssuance {
                issuer: IssuerPublicKey::decode(r)?,
                blinding: BlindingState { nonce: r.scalar()? },
            }),
            _ => return Err(DecodeError::Invalid("pending flag")),
        };
        Ok(Self {
            seed,
            device_scalar,
            credentials,
            pending,
            ledger: decode_ledger(r)?,
        })
    }
}

impl Record for WalletState {
    const KIND: RecordKind = RecordKind::WalletState;
}

// ---------------------------------------------------------------- relying party

/// Which pseudonym family the relying party accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NymPolicy {
    /// Hash-DH pseudonyms; with a bound the revealed index must lie in `1..=bound`.
    HashDh { bound: Option<Index> },
    /// Dodis-Yampolskiy pseudonyms with a hidden index proven in `1..=bound`.
    DyRateLimited { bound: Index },
}

impl NymPolicy {
    pub fn bound(&self) -> Option<Index> {
        match self {
            NymPolicy::HashDh { bound } => *bound,
            NymPolicy::DyRateLimited { bound } => Some(*bound),
        }
    }

    /// The presentation mode a wallet should use for this policy.
    pub fn presentation_mode(&self) -> PresentationMode {
        match self {
            NymPolicy::HashDh { .. } => PresentationMode::HashDh,
            NymPolicy::DyRateLimited { bound } => PresentationMode::DyRateLimited { bound: *bound },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Policy {
    pub nym: NymPolicy,
    pub required_disclosures: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccountRecord {
    pub label: String,
    pub created_at: u64,
    pub last_seen: u64,
}

/// What the relying party stores and hands to wallets. The registry is keyed
/// on pseudonym fingerprints only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelyingPartyState {
    pub scope: Scope,
    pub policy: Policy,
    pub issuer_public: IssuerPublicKey,
    pub registry: BTreeMap<[u8; 32], AccountRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccountStatus {
    New,
    Returning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccountDecision {
    pub status: AccountStatus,
    pub account: [u8; 32],
    pub record: AccountRecord,
    pub disclosed: BTreeMap<String, Vec<u8>>,
}

impl RelyingPartyState {
    pub fn new(scope: Scope, policy: Policy, issuer_public: IssuerPublicKey) -> Self {
        Self {
            scope,
            policy,
            issuer_public,
            registry: BTreeMap::new(),
        }
    }

    /// Default session context: SHA-256 of the relying party's public
    /// identity (scope, policy, issuer key).
    pub fn default_context(&self) -> [u8; 32] {
        self.info().default_context()
    }

    pub fn info(&self) -> RelyingPartyInfo {
        RelyingPartyInfo {
            scope: self.scope.clone(),
            policy: self.policy.clone(),
            issuer_public: self.issuer_public.clone(),
        }
    }

    /// Verify under this party's scope and policy, then look up or open the
    /// account. The registry is only touched after every check passed.
    pub fn authenticate(
        &mut self,
        proof: &PresentationProof,
        session_context: &[u8],
        now: u64,
    ) -> Result<AccountDecision, ActorError> {
        let verified = bbs::verify_presentation(
            &self.issuer_public,
            proof,
            &self.scope,
            self.policy.nym.bound(),
            session_context,
        )
        .map_err(ActorError::Rejected)?;
        let mode = proof.mode();
        let mode_ok = match (self.policy.nym, mode) {
            (NymPolicy::HashDh { .. }, PresentationMode::HashDh) => true,
            (NymPolicy::DyRateLimited { bound }, PresentationMode::DyRateLimited { bound: b }) => bound == b,
            _ => false,
        };
        if !mode_ok {
            return Err(ActorError::PolicyMismatch {
                expected: self.policy.nym,
                found: mode,
            });
        }
        if let Some(missing) = self
            .policy
            .required_disclosures
            .iter()
            .find(|n| !verified.disclosed.contains_key(*n))
        {
            return Err(ActorError::MissingDisclosure(missing.clone()));
        }
        let nym = verified.nym.expect("policy modes always carry a pseudonym");
        let account = nym.fingerprint();
        let next_label = format!("account-{}", self.registry.len() + 1);
        let (status, record) = match self.registry.get_mut(&account) {
            Some(rec) => {
                rec.last_seen = now;
                (AccountStatus::Returning, rec.clone())
            }
            None => {
                let rec = AccountRecord {
                    label: next_label,
                    created_at: now,
                    last_seen: now,
                };
                self.registry.insert(account, rec.clone());
                (AccountStatus::New, rec)
            }
        };
        Ok(AccountDecision {
            status,
            account,
            record,
            disclosed: verified.disclosed,
        })
    }

    /// Account recovery: the same lookup as [`Self::authenticate`]. A wallet
    /// restored from the same seed re-derives the same pseudonym, which is
    /// what makes the account reachable again.
    pub fn recover_account(
        &mut self,
        proof: &PresentationProof,
        session_context: &[u8],
        now: u64,
    ) -> Result<AccountDecision, ActorError> {
        self.authenticate(proof, session_context, now)
    }
}

fn encode_policy(w: &mut Writer, p: &Policy) {
    match p.nym {
        NymPolicy::HashDh { bound: None } => w.u8(1).u64(0),
        NymPolicy::HashDh { bound: Some(b) } => w.u8(2).u64(b.0),
        NymPolicy::DyRateLimited { bound } => w.u8(3).u64(bound.0),
    };
    w.len_of(p.required_disclosures.len());
    for n in &p.required_disclosures {
        w.str(n);
    }
}

fn decode_policy(r: &mut Reader<'_>) -> Result<Policy, DecodeError> {
    let tag = r.u8("policy mode")?;
    let bound = Index(r.u64("policy bound")?);
    let nym = match (tag, bound.0) {
        (1, 0) => NymPolicy::HashDh { bound: None },
        (2, b) if b >= 1 => NymPolicy::HashDh { bound: Some(bound) },
        (3, b) if b >= 1 => NymPolicy::DyRateLimited { bound },
        _ => return Err(DecodeError::Invalid("policy")),
    };
    let required_disclosures = (0..r.len("disclosure count")?)
        .map(|_| r.string("disclosure"))
        .collect::<Result<_, _>>()?;
    Ok(Policy {
        nym,
        required_disclosures,
    })
}

impl Encode for RelyingPartyState {
    fn encode(&self, w: &mut Writer) {
        self.scope.encode(w);
        encode_policy(w, &self.policy);
        self.issuer_public.encode(w);
        w.len_of(self.registry.len());
        for (fp, rec) in &self.registry {
            w.raw(fp).str(&rec.label).u64(rec.created_at).u64(rec.last_seen);
        }
    }
}

impl Decode for RelyingPartyState {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let scope = Scope::decode(r)?;
        let policy = decode_policy(r)?;
        let issuer_public = IssuerPublicKey::decode(r)?;
        let mut registry = BTreeMap::new();
        for _ in 0..r.len("registry size")? {
            let fp: [u8; 32] = r.array("account")?;
            let rec = AccountRecord {
                label: r.string("label")?,
                created_at: r.u64("created at")?,
                last_seen: r.u64("last seen")?,
            };
            if registry.insert(fp, rec).is_some() {
                return Err(DecodeError::Invalid("duplicate account"));
            }
        }
        Ok(Self {
            scope,
            policy,
            issuer_public,
            registry,
        })
    }
}

impl Record for RelyingPartyState {
    const KIND: RecordKind = RecordKind::RelyingPartyState;
}

/// The public part of a relying party, handed to wallets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelyingPartyInfo {
    pub scope: Scope,
    pub policy: Policy,
    pub issuer_public: IssuerPublicKey,
}

impl RelyingPartyInfo {
    pub fn default_context(&self) -> [u8; 32] {
        sha256(&self.to_bytes())
    }
}

impl Encode for RelyingPartyInfo {
    fn encode(&self, w: &mut Writer) {
        self.scope.encode(w);
        encode_policy(w, &self.policy);
        self.issuer_public.encode(w);
    }
}

impl Decode for RelyingPartyInfo {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            scope: Scope::decode(r)?,
            policy: decode_policy(r)?,
            issuer_public: IssuerPublicKey::decode(r)?,
        })
    }
}

impl Record for RelyingPartyInfo {
    const KIND: RecordKind = RecordKind::RelyingPartyInfo;
}

// ---------------------------------------------------------------- snapshots

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ActorError + '_ {
    move |source| ActorError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Exclusive advisory lock on `<path>.lock`, held until dropped.
pub struct StateLock {
    file: File,
}

impl StateLock {
    pub fn acquire(path: &Path) -> Result<Self, ActorError> {
        let lock_path = lock_path(path);
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock_path)
            .map_err(io_err(&lock_path))?;
        file.try_lock_exclusive().map_err(|_| ActorError::Locked {
            path: path.to_owned(),
        })?;
        Ok(Self { file })
    }
}

impl Drop for StateLock {
    fn drop(&mut self) {
        let _ = FileExt::unlock(&self.file);
    }
}

fn lock_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".lock");
    path.with_file_name(name)
}

/// Write a framed record by writing a sibling temp file, syncing it and
/// renaming over the target.
pub fn save_record<T: Record>(path: &Path, value: &T) -> Result<(), ActorError> {
    write_atomic(path, &value.to_record())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ActorError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| ActorError::Io {
        path: path.to_owned(),
        source: e.error,
    })?;
    Ok(())
}

pub fn load_record<T: Record>(path: &Path) -> Result<T, ActorError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    T::from_record(&bytes).map_err(|source| ActorError::Decode {
        path: path.to_owned(),
        source,
    })
}

/// Create a new state file; refuses to replace an existing one unless
/// `force` is set.
pub fn create_record<T: Record>(path: &Path, value: &T, force: bool) -> Result<(), ActorError> {
    if path.exists() && !force {
        return Err(ActorError::StateExists { path: path.to_owned() });
    }
    save_record(path, value)
}
