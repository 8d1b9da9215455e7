//! Moving a wallet's seed to another device: an encrypted package for a
//! known target key, or a passphrase-protected backup.
//!
//! Only the seed and the pseudonym ledger labels travel. Credentials, issuance
//! nonces and the device key stay behind; the receiving wallet gets a fresh
//! device key and re-enrolls with the issuer, which recognises the seed.

use argon2::{Algorithm, Argon2, Params, Version};
use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use hkdf::Hkdf;
use rand_core::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};
use thiserror::Error;
use x25519_dalek::{PublicKey, StaticSecret};
use zeroize::Zeroizing;

use crate::actors::{decode_ledger, encode_ledger, WalletState};
use crate::codec::{Decode, DecodeError, Encode, Reader, Record, RecordKind, Writer};
use crate::commitments::PseudonymSeed;
use crate::groups::tags;

pub const PACKAGE_VERSION: u8 = 1;
pub const BACKUP_VERSION: u8 = 1;
pub const MIN_PASSPHRASE_CHARS: usize = 8;

const SALT_LEN: usize = 16;
const NONCE_LEN: usize = 12;
/// Refuse blobs asking for more than 1 GiB of KDF memory.
const MAX_M_COST: u32 = 1 << 20;
const MAX_T_COST: u32 = 64;
const MAX_P_COST: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransferError {
    #[error("invalid target public key")]
    InvalidPublicKey,
    #[error("package is bound to a different target key")]
    BindingMismatch,
    #[error("authentication failed (wrong key, wrong passphrase or corrupted data)")]
    Authentication,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("passphrase must have at least {MIN_PASSPHRASE_CHARS} characters")]
    WeakPassphrase,
    #[error("invalid key derivation parameters")]
    KdfParams,
    #[error("malformed payload: {0}")]
    Payload(DecodeError),
}

/// Argon2id cost parameters stored in every backup.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KdfParams {
    pub m_cost_kib: u32,
    pub t_cost: u32,
    pub p_cost: u32,
}

impl Default for KdfParams {
    fn default() -> Self {
        Self {
            m_cost_kib: 19 * 1024,
            t_cost: 2,
            p_cost: 1,
        }
    }
}

#[derive(Clone)]
pub struct TransferSecretKey(StaticSecret);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransferPublicKey(pub [u8; 32]);

impl TransferSecretKey {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self(StaticSecret::random_from_rng(rng))
    }

    pub fn public(&self) -> TransferPublicKey {
        TransferPublicKey(PublicKey::from(&self.0).to_bytes())
    }
}

impl std::fmt::Debug for TransferSecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("TransferSecretKey(<redacted>)")
    }
}

impl TransferPublicKey {
    pub fn binding(&self) -> [u8; 32] {
        Sha256::digest(self.0).into()
    }
}

impl Encode for TransferPublicKey {
    fn encode(&self, w: &mut Writer) {
        w.raw(&self.0);
    }
}

impl Decode for TransferPublicKey {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self(r.array("transfer public key")?))
    }
}

impl Record for TransferPublicKey {
    const KIND: RecordKind = RecordKind::TransferPublicKey;
}

impl Encode for TransferSecretKey {
    fn encode(&self, w: &mut Writer) {
        w.raw(self.0.as_bytes());
    }
}

impl Decode for TransferSecretKey {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self(StaticSecret::from(r.array::<32>("transfer secret key")?)))
    }
}

impl Record for TransferSecretKey {
    const KIND: RecordKind = RecordKind::TransferSecretKey;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferPackage {
    pub version: u8,
    pub ephemeral_public: [u8; 32],
    pub target_binding: [u8; 32],
    pub nonce: [u8; NONCE_LEN],
    pub ciphertext: Vec<u8>,
}

impl TransferPackage {
    /// Everything before the ciphertext; authenticated as associated data.
    pub fn header(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(self.version)
            .raw(&self.ephemeral_public)
            .raw(&self.target_binding)
            .raw(&self.nonce);
        w.finish()
    }
}

impl Encode for TransferPackage {
    fn encode(&self, w: &mut Writer) {
        w.raw(&self.header()).bytes(&self.ciphertext);
    }
}

impl Decode for TransferPackage {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            version: r.u8("version")?,
            ephemeral_public: r.array("ephemeral public key")?,
            target_binding: r.array("target binding")?,
            nonce: r.array("nonce")?,
            ciphertext: r.bytes("ciphertext")?.to_vec(),
        })
    }
}

impl Record for TransferPackage {
    const KIND: RecordKind = RecordKind::TransferPackage;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackupBlob {
    pub version: u8,
    pub kdf: KdfParams,
    pub salt: [u8; SALT_LEN],
    pub nonce: [u8; NONCE_LEN],
    pub ciphertext: Vec<u8>,
}

impl BackupBlob {
    pub fn header(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(self.version)
            .u32(self.kdf.m_cost_kib)
            .u32(self.kdf.t_cost)
            .u32(self.kdf.p_cost)
            .raw(&self.salt)
            .raw(&self.nonce);
        w.finish()
    }
}

impl Encode for BackupBlob {
    fn encode(&self, w: &mut Writer) {
        w.raw(&self.header()).bytes(&self.ciphertext);
    }
}

impl Decode for BackupBlob {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            version: r.u8("version")?,
            kdf: KdfParams {
                m_cost_kib: r.u32("memory cost")?,
                t_cost: r.u32("time cost")?,
                p_cost: r.u32("parallelism")?,
            },
            salt: r.array("salt")?,
            nonce: r.array("nonce")?,
            ciphertext: r.bytes("ciphertext")?.to_vec(),
        })
    }
}

impl Record for BackupBlob {
    const KIND: RecordKind = RecordKind::BackupBlob;
}

/// `seed || ledger`.
fn payload(wallet: &WalletState) -> Zeroizing<Vec<u8>> {
    let mut w = Writer::new();
    w.raw(wallet.seed().secret());
    encode_ledger(&mut w, &wallet.ledger);
    Zeroizing::new(w.finish())
}

fn wallet_from_payload<R: RngCore + CryptoRng>(plain: &[u8], rng: &mut R) -> Result<WalletState, TransferError> {
    let mut r = Reader::new(plain);
    let seed = PseudonymSeed::from_secret(r.array("seed").map_err(TransferError::Payload)?);
    let ledger = decode_ledger(&mut r).map_err(TransferError::Payload)?;
    r.finish().map_err(TransferError::Payload)?;
    let mut wallet = WalletState::from_seed(seed, rng);
    wallet.ledger = ledger;
    Ok(wallet)
}

fn transfer_key(shared: &[u8; 32], ephemeral: &[u8; 32], target: &[u8; 32]) -> Zeroizing<[u8; 32]> {
    let mut info = tags::TRANSFER.to_vec();
    info.extend_from_slice(ephemeral);
    info.extend_from_slice(target);
    let mut key = Zeroizing::new([0u8; 32]);
    Hkdf::<Sha256>::new(None, shared)
        .expand(&info, key.as_mut())
        .expect("32 bytes is a valid HKDF output length");
    key
}

/// Encrypt the seed and ledger for `target` under a fresh ephemeral key.
pub fn export_to_target<R: RngCore + CryptoRng>(
    wallet: &WalletState,
    target: &TransferPublicKey,
    rng: &mut R,
) -> Result<TransferPackage, TransferError> {
    let ephemeral = StaticSecret::random_from_rng(&mut *rng);
    let ephemeral_public = PublicKey::from(&ephemeral).to_bytes();
    let shared = ephemeral.diffie_hellman(&PublicKey::from(target.0));
    if !shared.was_contributory() {
        return Err(TransferError::InvalidPublicKey);
    }
    let key = transfer_key(shared.as_bytes(), &ephemeral_public, &target.0);
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let mut package = TransferPackage {
        version: PACKAGE_VERSION,
        ephemeral_public,
        target_binding: target.binding(),
        nonce,
        ciphertext: Vec::new(),
    };
    let plain = payload(wallet);
    package.ciphertext = ChaCha20Poly1305::new(Key::from_slice(key.as_ref()))
        .encrypt(
            Nonce::from_slice(&nonce),
            Payload {
                msg: &plain,
                aad: &package.header(),
            },
        )
        .expect("encryption of an in-memory buffer does not fail");
    Ok(package)
}

/// Decrypt a package addressed to `target`. The binding is checked before
/// any decryption is attempted.
pub fn import_from_package<R: RngCore + CryptoRng>(
    package: &TransferPackage,
    target: &TransferSecretKey,
    rng: &mut R,
) -> Result<WalletState, TransferError> {
    if package.version != PACKAGE_VERSION {
        return Err(TransferError::UnsupportedVersion(package.version));
    }
    let public = target.public();
    if package.target_binding != public.binding() {
        return Err(TransferError::BindingMismatch);
    }
    let shared = target.0.diffie_hellman(&PublicKey::from(package.ephemeral_public));
    if !shared.was_contributory() {
        return Err(TransferError::Authentication);
    }
    let key = transfer_key(shared.as_bytes(), &package.ephemeral_public, &public.0);
    let plain = Zeroizing::new(
        ChaCha20Poly1305::new(Key::from_slice(key.as_ref()))
            .decrypt(
                Nonce::from_slice(&package.nonce),
                Payload {
                    msg: &package.ciphertext,
                    aad: &package.header(),
                },
            )
            .map_err(|_| TransferError::Authentication)?,
    );
    wallet_from_payload(&plain, rng)
}

fn passphrase_key(passphrase: &str, salt: &[u8], kdf: KdfParams) -> Result<Zeroizing<[u8; 32]>, TransferError> {
    if kdf.m_cost_kib > MAX_M_COST || kdf.t_cost > MAX_T_COST || kdf.p_cost > MAX_P_COST {
        return Err(TransferError::KdfParams);
    }
    let params = Params::new(kdf.m_cost_kib, kdf.t_cost, kdf.p_cost, Some(32)).map_err(|_| TransferError::KdfParams)?;
    let mut key = Zeroizing::new([0u8; 32]);
    Argon2::new(Algorithm::Argon2id, Version::V0x13, params)
        .hash_password_into(passphrase.as_bytes(), salt, key.as_mut())
        .map_err(|_| TransferError::KdfParams)?;
    Ok(key)
}

pub fn backup<R: RngCore + CryptoRng>(
    wallet: &WalletState,
    passphrase: &str,
    rng: &mut R,
) -> Result<BackupBlob, TransferError> {
    backup_with_params(wallet, passphrase, KdfParams::default(), rng)
}

pub fn backup_with_params<R: RngCore + CryptoRng>(
    wallet: &WalletState,
    passphrase: &str,
    kdf: KdfParams,
    rng: &mut R,
) -> Result<BackupBlob, TransferError> {
    if passphrase.chars().count() < MIN_PASSPHRASE_CHARS {
        return Err(TransferError::WeakPassphrase);
    }
    let mut salt = [0u8; SALT_LEN];
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut salt);
    rng.fill_bytes(&mut nonce);
    let key = passphrase_key(passphrase, &salt, kdf)?;
    let mut blob = BackupBlob {
        version: BACKUP_VERSION,
        kdf,
        salt,
        nonce,
        ciphertext: Vec::new(),
    };
    let plain = payload(wallet);
    blob.ciphertext = ChaCha20Poly1305::new(Key::from_slice(key.as_ref()))
        .encrypt(
            Nonce::from_slice(&nonce),
            Payload {
                msg: &plain,
                aad: &blob.header(),
            },
        )
        .expect("encryption of an in-memory buffer does not fail");
    Ok(blob)
}

pub fn restore<R: RngCore + CryptoRng>(
    blob: &BackupBlob,
    passphrase: &str,
    rng: &mut R,
) -> Result<WalletState, TransferError> {
    if blob.version != BACKUP_VERSION {
        return Err(TransferError::UnsupportedVersion(blob.version));
    }
    let key = passphrase_key(passphrase, &blob.salt, blob.kdf)?;
    let plain = Zeroizing::new(
        ChaCha20Poly1305::new(Key::from_slice(key.as_ref()))
            .decrypt(
                Nonce::from_slice(&blob.nonce),
                Payload {
                    msg: &blob.ciphertext,
                    aad: &blob.header(),
                },
            )
            .map_err(|_| TransferError::Authentication)?,
    );
    wallet_from_payload(&plain, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actors::NymMode;
    use crate::prf::{Index, Scope};
    use rand::rngs::OsRng;

    const CHEAP: KdfParams = KdfParams {
        m_cost_kib: 64,
        t_cost: 1,
        p_cost: 1,
    };

    fn wallet_with_ledger() -> WalletState {
        let mut w = WalletState::new(&mut OsRng);
        w.ledger.insert(
            crate::actors::LedgerKey {
                scope: Scope::new("shop.example").unwrap(),
                index: Index(2),
                mode: NymMode::HashDh,
            },
            crate::actors::LedgerEntry {
                label: "business".into(),
                last_used: Some(9),
            },
        );
        w
    }

    #[test]
    fn export_import_round_trip() {
        let w = wallet_with_ledger();
        let target = TransferSecretKey::generate(&mut OsRng);
        let pkg = export_to_target(&w, &target.public(), &mut OsRng).unwrap();
        let pkg = TransferPackage::from_record(&pkg.to_record()).unwrap();
        let got = import_from_package(&pkg, &target, &mut OsRng).unwrap();
        assert_eq!(got.seed(), w.seed());
        assert_eq!(got.ledger, w.ledger);
        assert!(got.credentials.is_empty());
        assert_ne!(got.device_scalar, w.device_scalar);
        assert_eq!(got.pseudonyms().unwrap(), w.pseudonyms().unwrap());
    }

    #[test]
    fn exports_are_fresh_and_bound() {
        let w = wallet_with_ledger();
        let a = TransferSecretKey::generate(&mut OsRng);
        let b = TransferSecretKey::generate(&mut OsRng);
        let p1 = export_to_target(&w, &a.public(), &mut OsRng).unwrap();
        let p2 = export_to_target(&w, &a.public(), &mut OsRng).unwrap();
        assert_ne!(p1.ephemeral_public, p2.ephemeral_public);
        assert_ne!(p1.ciphertext, p2.ciphertext);
        assert_eq!(import_from_package(&p1, &b, &mut OsRng).unwrap_err(), TransferError::BindingMismatch);

        let mut forged = p1.clone();
        forged.target_binding = b.public().binding();
        assert_eq!(import_from_package(&forged, &b, &mut OsRng).unwrap_err(), TransferError::Authentication);

        let mut tampered = p1.clone();
        tampered.ciphertext[3] ^= 1;
        assert_eq!(import_from_package(&tampered, &a, &mut OsRng).unwrap_err(), TransferError::Authentication);
    }

    #[test]
    fn low_order_target_is_rejected() {
        let w = WalletState::new(&mut OsRng);
        assert_eq!(
            export_to_target(&w, &TransferPublicKey([0u8; 32]), &mut OsRng).unwrap_err(),
            TransferError::InvalidPublicKey
        );
    }

    #[test]
    fn backup_restore_and_failures() {
        let w = wallet_with_ledger();
        let blob = backup_with_params(&w, "correct horse", CHEAP, &mut OsRng).unwrap();
        let blob2 = backup_with_params(&w, "correct horse", CHEAP, &mut OsRng).unwrap();
        assert_ne!(blob.salt, blob2.salt);
        assert_ne!(blob.ciphertext, blob2.ciphertext);

        let got = restore(&blob, "correct horse", &mut OsRng).unwrap();
        assert_eq!(got.seed(), w.seed());
        assert_eq!(got.ledger, w.ledger);

        assert_eq!(restore(&blob, "wrong horse!", &mut OsRng).unwrap_err(), TransferError::Authentication);
        let mut salted = blob.clone();
        salted.salt[0] ^= 1;
        assert_eq!(restore(&salted, "correct horse", &mut OsRng).unwrap_err(), TransferError::Authentication);
        let mut future = blob.clone();
        future.version = 9;
        assert_eq!(restore(&future, "correct horse", &mut OsRng).unwrap_err(), TransferError::UnsupportedVersion(9));
        let mut greedy = blob.clone();
        greedy.kdf.m_cost_kib = u32::MAX;
        assert_eq!(restore(&greedy, "correct horse", &mut OsRng).unwrap_err(), TransferError::KdfParams);
    }

    #[test]
    fn passphrase_policy_counts_characters() {
        let w = WalletState::new(&mut OsRng);
        assert_eq!(backup_with_params(&w, "short", CHEAP, &mut OsRng).unwrap_err(), TransferError::WeakPassphrase);
        // seven multi-byte characters: long in bytes, short in characters
        assert_eq!(backup_with_params(&w, "ééééééé", CHEAP, &mut OsRng).unwrap_err(), TransferError::WeakPassphrase);
        assert!(backup_with_params(&w, "éééééééé", CHEAP, &mut OsRng).is_ok());
    }

    #[test]
    fn seed_bytes_only_inside_ciphertext() {
        for _ in 0..20 {
            let w = WalletState::new(&mut OsRng);
            let t = TransferSecretKey::generate(&mut OsRng);
            let pkg = export_to_target(&w, &t.public(), &mut OsRng).unwrap().to_record();
            let blob = backup_with_params(&w, "passphrase", CHEAP, &mut OsRng).unwrap().to_record();
            let seed = w.seed().secret();
            for bytes in [&pkg, &blob] {
                assert!(!bytes.windows(32).any(|win| win == seed));
            }
        }
    }
}
