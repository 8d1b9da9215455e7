//! Commitments to the pseudonym seed: SHA-256 hash commitments and Pedersen
//! commitments, plus opening verification.

use std::fmt;
use std::sync::OnceLock;

use rand_core::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};
use thiserror::Error;
use zeroize::{Zeroize, ZeroizeOnDrop};

use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};
use crate::groups::{hash_to_group, hash_to_scalar, tags, GroupElement, Scalar};

pub const SEED_LEN: usize = 32;
pub const NONCE_LEN: usize = 32;

const KIND_HASH: u8 = 0x01;
const KIND_PEDERSEN: u8 = 0x02;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CommitmentError {
    #[error("opening of kind {opening} supplied for a {commitment} commitment")]
    KindMismatch {
        commitment: &'static str,
        opening: &'static str,
    },
}

/// The holder's long-term pseudonym seed.
///
/// Never printed: `Debug` is redacted, and the bytes are wiped on drop.
#[derive(Clone, Zeroize, ZeroizeOnDrop, PartialEq, Eq)]
pub struct PseudonymSeed {
    secret: [u8; SEED_LEN],
}

impl PseudonymSeed {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut secret = [0u8; SEED_LEN];
        rng.fill_bytes(&mut secret);
        Self { secret }
    }

    pub fn from_secret(secret: [u8; SEED_LEN]) -> Self {
        Self { secret }
    }

    pub fn secret(&self) -> &[u8; SEED_LEN] {
        &self.secret
    }

    /// The seed as a scalar, used as exponent and as credential slot 0.
    pub fn scalar(&self) -> Scalar {
        hash_to_scalar(&self.secret, tags::SEED)
    }
}

impl fmt::Debug for PseudonymSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PseudonymSeed(<redacted>)")
    }
}

/// Second generator h for Pedersen commitments. Derived by hashing to the
/// group, so nobody knows log_g(h).
pub fn pedersen_h() -> GroupElement {
    static H: OnceLock<GroupElement> = OnceLock::new();
    *H.get_or_init(|| hash_to_group(b"generator-h", tags::PEDERSEN_H))
}

/// Public commitment value. The nonce is kept separately in
/// [`CommitmentOpening`] by whoever can open it.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SeedCommitment {
    Hash([u8; 32]),
    Pedersen(GroupElement),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CommitmentOpening {
    Hash([u8; NONCE_LEN]),
    Pedersen(Scalar),
}

impl SeedCommitment {
    fn kind_name(&self) -> &'static str {
        match self {
            SeedCommitment::Hash(_) => "hash",
            SeedCommitment::Pedersen(_) => "pedersen",
        }
    }
}

impl CommitmentOpening {
    fn kind_name(&self) -> &'static str {
        match self {
            CommitmentOpening::Hash(_) => "hash",
            CommitmentOpening::Pedersen(_) => "pedersen",
        }
    }
}

/// Length-prefixed `(seed, nonce)` encoding hashed by [`commit_hash`].
pub fn hash_commitment_input(seed: &PseudonymSeed, nonce: &[u8; NONCE_LEN]) -> Vec<u8> {
    let mut w = Writer::new();
    w.bytes(seed.secret()).bytes(nonce);
    w.finish()
}

/// `SHA-256(len || seed || len || nonce)`.
pub fn commit_hash(seed: &PseudonymSeed, nonce: &[u8; NONCE_LEN]) -> SeedCommitment {
    SeedCommitment::Hash(Sha256::digest(hash_commitment_input(seed, nonce)).into())
}

/// `seed·g + nonce·h`.
pub fn commit_pedersen(seed_scalar: Scalar, nonce_scalar: Scalar) -> SeedCommitment {
    SeedCommitment::Pedersen(commit_pedersen_with(
        GroupElement::generator(),
        pedersen_h(),
        seed_scalar,
        nonce_scalar,
    ))
}

/// Pedersen commitment over caller-chosen bases (BBS blind issuance commits
/// over the slot-0 message generator and the blinding generator).
pub fn commit_pedersen_with(
    g: GroupElement,
    h: GroupElement,
    seed_scalar: Scalar,
    nonce_scalar: Scalar,
) -> GroupElement {
    g * seed_scalar + h * nonce_scalar
}

pub fn verify_opening(
    c: &SeedCommitment,
    seed: &PseudonymSeed,
    opening: &CommitmentOpening,
) -> Result<bool, CommitmentError> {
    match (c, opening) {
        (SeedCommitment::Hash(_), CommitmentOpening::Hash(nonce)) => {
            Ok(commit_hash(seed, nonce) == *c)
        }
        (SeedCommitment::Pedersen(_), CommitmentOpening::Pedersen(nonce)) => {
            Ok(commit_pedersen(seed.scalar(), *nonce) == *c)
        }
        _ => Err(CommitmentError::KindMismatch {
            commitment: c.kind_name(),
            opening: opening.kind_name(),
        }),
    }
}

/// `1-byte kind || value bytes`.
impl Encode for SeedCommitment {
    fn encode(&self, w: &mut Writer) {
        match self {
            SeedCommitment::Hash(d) => {
                w.u8(KIND_HASH).raw(d);
            }
            SeedCommitment::Pedersen(p) => {
                w.u8(KIND_PEDERSEN).point(p);
            }
        }
    }
}

impl Decode for SeedCommitment {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        match r.u8("commitment kind")? {
            KIND_HASH => Ok(SeedCommitment::Hash(r.array("hash commitment")?)),
            KIND_PEDERSEN => Ok(SeedCommitment::Pedersen(r.point()?)),
            _ => Err(DecodeError::Invalid("commitment kind")),
        }
    }
}
