//! Pseudonym derivation: HMAC-SHA256, Hash-DH and Dodis-Yampolskiy PRFs keyed
//! on the pseudonym seed, over an unambiguous `(scope, index)` encoding.

use std::fmt;

use hmac::{Hmac, Mac};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};
use crate::commitments::PseudonymSeed;
use crate::groups::{hash_to_group, hash_to_scalar, tags, GroupElement, Scalar};

pub const MAX_SCOPE_LEN: usize = 1024;

const KIND_MAC: u8 = 0x01;
const KIND_GROUP: u8 = 0x02;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrfError {
    #[error("scope must not be empty")]
    EmptyScope,
    #[error("scope is {0} bytes, limit is {MAX_SCOPE_LEN}")]
    OversizeScope(usize),
    #[error("seed scalar is zero")]
    ZeroSeed,
    #[error("degenerate Dodis-Yampolskiy input: seed + x = 0")]
    Degenerate,
}

/// Relying-party identifier, typically its FQDN or URL.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scope(String);

impl Scope {
    pub fn new(value: impl Into<String>) -> Result<Self, PrfError> {
        let value = value.into();
        match value.len() {
            0 => Err(PrfError::EmptyScope),
            n if n > MAX_SCOPE_LEN => Err(PrfError::OversizeScope(n)),
            _ => Ok(Self(value)),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Length-prefixed scope bytes.
    pub fn encoding(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.str(&self.0);
        w.finish()
    }
}

impl fmt::Debug for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scope({:?})", self.0)
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Encode for Scope {
    fn encode(&self, w: &mut Writer) {
        w.str(&self.0);
    }
}

impl Decode for Scope {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Scope::new(r.string("scope")?).map_err(|_| DecodeError::Invalid("scope"))
    }
}

/// Pseudonym index. 0 is the "empty" index for one-pseudonym-per-scope use;
/// rate-limited mode uses 1..=ℓ.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Index(pub u64);

impl Index {
    pub const EMPTY: Index = Index(0);

    pub fn scalar(&self) -> Scalar {
        Scalar::from_u64(self.0)
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PseudonymValue {
    Mac([u8; 32]),
    Group(GroupElement),
}

/// A per-(scope, index) pseudonym as presented to a relying party.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Pseudonym {
    pub value: PseudonymValue,
    pub scope: Scope,
    pub index_disclosed: Option<Index>,
}

impl Pseudonym {
    /// SHA-256 of the canonical serialization; the relying party's account key.
    pub fn fingerprint(&self) -> [u8; 32] {
        Sha256::digest(self.to_bytes()).into()
    }

    pub fn group_element(&self) -> Option<GroupElement> {
        match self.value {
            PseudonymValue::Group(p) => Some(p),
            PseudonymValue::Mac(_) => None,
        }
    }

    pub fn value_bytes(&self) -> Vec<u8> {
        match &self.value {
            PseudonymValue::Mac(m) => m.to_vec(),
            PseudonymValue::Group(p) => p.to_bytes().to_vec(),
        }
    }
}

/// `kind || value || length-prefixed scope || optional 8-byte index`.
/// The index is present iff eight bytes remain.
impl Encode for Pseudonym {
    fn encode(&self, w: &mut Writer) {
        match &self.value {
            PseudonymValue::Mac(m) => w.u8(KIND_MAC).raw(m),
            PseudonymValue::Group(p) => w.u8(KIND_GROUP).point(p),
        };
        self.scope.encode(w);
        if let Some(idx) = self.index_disclosed {
            w.u64(idx.0);
        }
    }
}

impl Decode for Pseudonym {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let value = match r.u8("pseudonym kind")? {
            KIND_MAC => PseudonymValue::Mac(r.array("mac pseudonym")?),
            KIND_GROUP => PseudonymValue::Group(r.point()?),
            _ => return Err(DecodeError::Invalid("pseudonym kind")),
        };
        let scope = Scope::decode(r)?;
        let index_disclosed = match r.remaining() {
            0 => None,
            8 => Some(Index(r.u64("pseudonym index")?)),
            _ => return Err(DecodeError::Invalid("pseudonym index")),
        };
        Ok(Self {
            value,
            scope,
            index_disclosed,
        })
    }
}

/// `len(scope) || scope || idx` with idx as 8 bytes big-endian.
pub fn encode_prf_input(scp: &Scope, idx: Index) -> Vec<u8> {
    let mut w = Writer::new();
    w.str(scp.as_str()).u64(idx.0);
    w.finish()
}

pub fn hmac_sha256(key: &[u8], msg: &[u8]) -> [u8; 32] {
    let mut mac = <Hmac<Sha256> as Mac>::new_from_slice(key).expect("HMAC accepts any key length");
    mac.update(msg);
    mac.finalize().into_bytes().into()
}

pub fn hmac_nym(seed: &PseudonymSeed, scp: &Scope, idx: Index) -> Pseudonym {
    Pseudonym {
        value: PseudonymValue::Mac(hmac_sha256(seed.secret(), &encode_prf_input(scp, idx))),
        scope: scp.clone(),
        index_disclosed: Some(idx),
    }
}

/// H(scp || idx) for the Hash-DH pseudonym.
pub fn hashdh_base(scp: &Scope, idx: Index) -> GroupElement {
    hash_to_group(&encode_prf_input(scp, idx), tags::NYM)
}

/// `seed · H(scp || idx)`.
pub fn hashdh_nym(seed_scalar: Scalar, scp: &Scope, idx: Index) -> Result<Pseudonym, PrfError> {
    if seed_scalar.is_zero() {
        return Err(PrfError::ZeroSeed);
    }
    Ok(Pseudonym {
        value: PseudonymValue::Group(hashdh_base(scp, idx) * seed_scalar),
        scope: scp.clone(),
        index_disclosed: Some(idx),
    })
}

/// Scope-bound base point G_scp of the Dodis-Yampolskiy PRF.
pub fn dy_base(scp: &Scope) -> GroupElement {
    hash_to_group(&scp.encoding(), tags::DY_BASE)
}

fn dy_eval(seed_scalar: Scalar, x: Scalar, scp: &Scope) -> Result<Pseudonym, PrfError> {
    let inv = (seed_scalar + x).invert().ok_or(PrfError::Degenerate)?;
    Ok(Pseudonym {
        value: PseudonymValue::Group(dy_base(scp) * inv),
        scope: scp.clone(),
        index_disclosed: None,
    })
}

/// `(1 / (seed + idx)) · G_scp` with idx used directly as the scalar input.
/// This is the form range proofs operate on.
pub fn dy_nym(seed_scalar: Scalar, scp: &Scope, idx: Index) -> Result<Pseudonym, PrfError> {
    dy_eval(seed_scalar, idx.scalar(), scp)
}

/// Dodis-Yampolskiy with a hashed input `x = H(scp || idx)`, for use without
/// range proofs.
pub fn dy_nym_hashed(seed_scalar: Scalar, scp: &Scope, idx: Index) -> Result<Pseudonym, PrfError> {
    dy_eval(
        seed_scalar,
        hash_to_scalar(&encode_prf_input(scp, idx), tags::DY_INPUT),
        scp,
    )
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EpochGranularity {
    Day,
    Week,
}

impl EpochGranularity {
    pub fn seconds(&self) -> u64 {
        match self {
            EpochGranularity::Day => 86_400,
            EpochGranularity::Week => 604_800,
        }
    }
}

/// Index for time-rotating pseudonyms: the number of whole epochs since the
/// Unix epoch.
pub fn epoch_index(unix_time: u64, granularity: EpochGranularity) -> Index {
    Index(unix_time / granularity.seconds())
}
