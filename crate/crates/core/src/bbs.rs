//! BBS signatures with blind issuance of the pseudonym seed and
//! pseudonym-linked selective-disclosure presentations.
//!
//! Slot layout of every credential:
//!
//! | slot | content                              | disclosed? |
//! |------|--------------------------------------|------------|
//! | 0    | pseudonym seed scalar                | never      |
//! | 1    | per-wallet device key scalar         | never      |
//! | 2..  | named clear attributes               | optional   |
//!
//! plus a blinding slot carrying the issuance nonce. A signature is `(A, e)`
//! with `A = B / (x + e)` and `B = P1 + nonce·H_blind + Σ m_i·H_i`.
//!
//! A presentation randomizes the signature as `Abar = r·A`,
//! `Bbar = r·B - e·Abar` (so `Bbar = x·Abar`, checked with one pairing
//! equation) and proves, under a single Fiat-Shamir transcript, the linear
//! relation `P1 + Σ_disclosed m_i·H_i = r⁻¹·Bbar + (e/r)·Abar - Σ_hidden m_j·H_j`
//! together with the pseudonym equations that reuse the slot-0 witness.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use rand_core::{CryptoRng, RngCore};
use thiserror::Error;

use crate::codec::{Decode, DecodeError, Encode, Reader, Record, RecordKind, Writer};
use crate::commitments::{commit_pedersen_with, pedersen_h, PseudonymSeed, SeedCommitment};
use crate::groups::{
    hash_to_group, hash_to_scalar, multi_pairing, tags, G2Element, GroupElement, Scalar,
};
use crate::prf::{dy_base, hashdh_base, Index, PrfError, Pseudonym, PseudonymValue, Scope};
use crate::sigma::{prove_range, verify_range, LinearRelation, RangeProof, SchnorrProof, SigmaError, Transcript};

pub const SLOT_SEED: usize = 0;
pub const SLOT_DEVICE: usize = 1;
pub const FIRST_NAMED_SLOT: usize = 2;

/// Names reserved for the two hidden slots.
pub const SEED_SLOT_NAME: &str = "pseudonym_seed";
pub const DEVICE_SLOT_NAME: &str = "device_key";

const MODE_PLAIN: u8 = 0x00;
const MODE_HASHDH: u8 = 0x01;
const MODE_DY: u8 = 0x02;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BbsError {
    #[error("invalid attribute schema: {0}")]
    InvalidSchema(String),
    #[error("issuance request proof invalid: {0}")]
    InvalidRequest(SigmaError),
    #[error("clear attributes do not match the issuer schema")]
    AttributeMismatch,
    #[error("signature does not verify")]
    InvalidSignature,
    #[error("the pseudonym seed slot can never be disclosed")]
    SeedDisclosure,
    #[error("the device key slot can never be disclosed")]
    DeviceDisclosure,
    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),
    #[error("index {idx} outside 1..={bound}")]
    OutOfRange { idx: u64, bound: u64 },
    #[error(transparent)]
    Prf(#[from] PrfError),
    #[error("presentation is for scope {found:?}, expected {expected:?}")]
    ScopeMismatch { expected: String, found: String },
    #[error("session context mismatch")]
    ContextMismatch,
    #[error("rate limit required but no range proof or index present")]
    MissingRangeProof,
    #[error("index {idx} violates the rate limit 1..={bound}")]
    RangeViolation { idx: u64, bound: u64 },
    #[error("range proof is for bound {found}, policy requires {expected}")]
    BoundMismatch { expected: u64, found: u64 },
    #[error("presentation proof invalid: {0}")]
    InvalidProof(SigmaError),
    #[error("randomized signature fails the pairing check")]
    PairingCheckFailed,
    #[error("malformed presentation: {0}")]
    Malformed(&'static str),
}

/// Fixed base point P1 shared by all issuers.
pub fn p1() -> GroupElement {
    static P1: OnceLock<GroupElement> = OnceLock::new();
    *P1.get_or_init(|| hash_to_group(b"P1", tags::BBS_P1))
}

/// Base of the enrollment fingerprint `seed · G_enroll` the issuer uses to
/// recognise a returning seed across fresh blinded commitments.
pub fn enrollment_fingerprint_base() -> GroupElement {
    static G: OnceLock<GroupElement> = OnceLock::new();
    *G.get_or_init(|| hash_to_group(b"enrollment", tags::ENROLL_FINGERPRINT))
}

/// Scalar encoding of a named attribute value.
pub fn attribute_scalar(name: &str, value: &[u8]) -> Scalar {
    let mut w = Writer::new();
    w.str(name).bytes(value);
    hash_to_scalar(&w.finish(), tags::ATTRIBUTE)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IssuerPublicKey {
    pub w: G2Element,
    /// Names of slots 2.. in slot order.
    pub attribute_names: Vec<String>,
}

/// Message generators H_0..H_{L-1} plus the blinding generator, all derived
/// from the public key.
#[derive(Clone, Debug)]
pub struct Generators {
    pub message: Vec<GroupElement>,
    pub blinding: GroupElement,
}

impl IssuerPublicKey {
    pub fn slot_count(&self) -> usize {
        FIRST_NAMED_SLOT + self.attribute_names.len()
    }

    pub fn generators(&self) -> Generators {
        let w = self.w.to_bytes();
        let message = (0..self.slot_count())
            .map(|i| {
                let mut input = w.to_vec();
                input.extend_from_slice(&(i as u32).to_be_bytes());
                hash_to_group(&input, tags::BBS_GENERATOR)
            })
            .collect();
        Generators {
            message,
            blinding: hash_to_group(&w, tags::BBS_BLINDING),
        }
    }

    pub fn slot_of(&self, name: &str) -> Result<usize, BbsError> {
        match name {
            SEED_SLOT_NAME => Err(BbsError::SeedDisclosure),
            DEVICE_SLOT_NAME => Err(BbsError::DeviceDisclosure),
            _ => self
                .attribute_names
                .iter()
                .position(|n| n == name)
                .map(|i| i + FIRST_NAMED_SLOT)
                .ok_or_else(|| BbsError::UnknownAttribute(name.to_owned())),
        }
    }

    fn check_schema(names: &[String]) -> Result<(), BbsError> {
        let mut seen = BTreeSet::new();
        for n in names {
            if n.is_empty() || n == SEED_SLOT_NAME || n == DEVICE_SLOT_NAME {
                return Err(BbsError::InvalidSchema(format!("reserved or empty name {n:?}")));
            }
            if !seen.insert(n) {
                return Err(BbsError::InvalidSchema(format!("duplicate name {n:?}")));
            }
        }
        Ok(())
    }
}

impl Encode for IssuerPublicKey {
    fn encode(&self, w: &mut Writer) {
        w.g2(&self.w).len_of(self.attribute_names.len());
        for n in &self.attribute_names {
            w.str(n);
        }
    }
}

impl Decode for IssuerPublicKey {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let w = r.g2()?;
        let n = r.len("attribute count")?;
        let attribute_names = (0..n).map(|_| r.string("attribute name")).collect::<Result<Vec<_>, _>>()?;
        IssuerPublicKey::check_schema(&attribute_names).map_err(|_| DecodeError::Invalid("attribute schema"))?;
        Ok(Self { w, attribute_names })
    }
}

impl Record for IssuerPublicKey {
    const KIND: RecordKind = RecordKind::IssuerPublic;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IssuerKeyPair {
    secret: Scalar,
    pub public: IssuerPublicKey,
}

impl IssuerKeyPair {
    pub fn secret(&self) -> &Scalar {
        &self.secret
    }
}

impl Encode for IssuerKeyPair {
    fn encode(&self, w: &mut Writer) {
        w.scalar(&self.secret);
        self.public.encode(w);
    }
}

impl Decode for IssuerKeyPair {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let secret = r.scalar()?;
        let public = IssuerPublicKey::decode(r)?;
        if G2Element::generator() * secret != public.w {
            return Err(DecodeError::Invalid("issuer key pair"));
        }
        Ok(Self { secret, public })
    }
}

/// New issuer key for credentials with the two hidden slots plus the given
/// named attributes.
pub fn keygen<R: RngCore + CryptoRng>(
    attribute_names: &[&str],
    rng: &mut R,
) -> Result<IssuerKeyPair, BbsError> {
    let names: Vec<String> = attribute_names.iter().map(|s| s.to_string()).collect();
    IssuerPublicKey::check_schema(&names)?;
    let secret = Scalar::random_nonzero(rng);
    Ok(IssuerKeyPair {
        secret,
        public: IssuerPublicKey {
            w: G2Element::generator() * secret,
            attribute_names: names,
        },
    })
}

/// What the wallet sends to the issuer: a blinded commitment to the seed, a
/// commitment to the device key, the enrollment fingerprint, and a proof
/// tying all three to known openings with the same seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlindIssuanceRequest {
    pub pnc: SeedCommitment,
    pub device_commitment: GroupElement,
    pub fingerprint: GroupElement,
    pub opening_proof: SchnorrProof,
}

/// Wallet-side secret retained between request and unblinding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlindingState {
    pub nonce: Scalar,
}

fn issuance_relation(
    public: &IssuerPublicKey,
    pnc: GroupElement,
    device_commitment: GroupElement,
    fingerprint: GroupElement,
) -> LinearRelation {
    let gens = public.generators();
    // variables: 0 = seed, 1 = nonce, 2 = device key
    let mut rel = LinearRelation::new("blind-issuance", 3);
    rel.equation(vec![(0, gens.message[SLOT_SEED]), (1, gens.blinding)], pnc)
        .equation(vec![(2, gens.message[SLOT_DEVICE])], device_commitment)
        .equation(vec![(0, enrollment_fingerprint_base())], fingerprint);
    rel
}

fn issuance_transcript(public: &IssuerPublicKey) -> Transcript {
    let mut t = Transcript::new(b"blind-issuance");
    t.append("issuer-public", &public.to_bytes());
    t
}

impl BlindIssuanceRequest {
    fn pnc_point(&self) -> Result<GroupElement, BbsError> {
        match self.pnc {
            SeedCommitment::Pedersen(p) => Ok(p),
            SeedCommitment::Hash(_) => Err(BbsError::InvalidRequest(SigmaError::Malformed(
                "seed commitment must be pedersen",
            ))),
        }
    }

    pub fn verify(&self, public: &IssuerPublicKey) -> Result<(), BbsError> {
        let rel = issuance_relation(public, self.pnc_point()?, self.device_commitment, self.fingerprint);
        rel.verify(&self.opening_proof, &mut issuance_transcript(public))
            .map_err(BbsError::InvalidRequest)
    }
}

impl Encode for BlindIssuanceRequest {
    fn encode(&self, w: &mut Writer) {
        self.pnc.encode(w);
        w.point(&self.device_commitment).point(&self.fingerprint);
        self.opening_proof.encode(w);
    }
}

impl Decode for BlindIssuanceRequest {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            pnc: SeedCommitment::decode(r)?,
            device_commitment: r.point()?,
            fingerprint: r.point()?,
            opening_proof: SchnorrProof::decode(r)?,
        })
    }
}

impl Record for BlindIssuanceRequest {
    const KIND: RecordKind = RecordKind::EnrollmentRequest;
}

/// Fresh blinded issuance request. A new nonce is drawn every time, so two
/// requests from the same seed carry unrelated commitments.
pub fn blind_issuance_request<R: RngCore + CryptoRng>(
    seed: &PseudonymSeed,
    device_scalar: Scalar,
    public: &IssuerPublicKey,
    rng: &mut R,
) -> (BlindIssuanceRequest, BlindingState) {
    let gens = public.generators();
    let seed_scalar = seed.scalar();
    let nonce = Scalar::random(&mut *rng);
    let pnc = commit_pedersen_with(gens.message[SLOT_SEED], gens.blinding, seed_scalar, nonce);
    let device_commitment = gens.message[SLOT_DEVICE] * device_scalar;
    let fingerprint = enrollment_fingerprint_base() * seed_scalar;
    let rel = issuance_relation(public, pnc, device_commitment, fingerprint);
    let opening_proof = rel
        .prove(&[seed_scalar, nonce, device_scalar], &mut issuance_transcript(public), rng)
        .expect("witness satisfies the relation by construction");
    (
        BlindIssuanceRequest {
            pnc: SeedCommitment::Pedersen(pnc),
            device_commitment,
            fingerprint,
            opening_proof,
        },
        BlindingState { nonce },
    )
}

/// Issuer's answer: the signature and the clear attributes it signed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlindSignature {
    pub a: GroupElement,
    pub e: Scalar,
    pub attributes: BTreeMap<String, Vec<u8>>,
}

impl Encode for BlindSignature {
    fn encode(&self, w: &mut Writer) {
        w.point(&self.a).scalar(&self.e);
        encode_attributes(w, &self.attributes);
    }
}

impl Decode for BlindSignature {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            a: r.point()?,
            e: r.scalar()?,
            attributes: decode_attributes(r)?,
        })
    }
}

impl Record for BlindSignature {
    const KIND: RecordKind = RecordKind::EnrollmentResponse;
}

fn encode_attributes(w: &mut Writer, attrs: &BTreeMap<String, Vec<u8>>) {
    w.len_of(attrs.len());
    for (k, v) in attrs {
        w.str(k).bytes(v);
    }
}

fn decode_attributes(r: &mut Reader<'_>) -> Result<BTreeMap<String, Vec<u8>>, DecodeError> {
    let n = r.len("attribute count")?;
    let mut out = BTreeMap::new();
    for _ in 0..n {
        let k = r.string("attribute name")?;
        let v = r.bytes("attribute value")?.to_vec();
        if out.insert(k, v).is_some() {
            return Err(DecodeError::Invalid("duplicate attribute"));
        }
    }
    Ok(out)
}

fn named_scalars(
    public: &IssuerPublicKey,
    attrs: &BTreeMap<String, Vec<u8>>,
) -> Result<Vec<Scalar>, BbsError> {
    if attrs.len() != public.attribute_names.len() {
        return Err(BbsError::AttributeMismatch);
    }
    public
        .attribute_names
        .iter()
        .map(|n| {
            attrs
                .get(n)
                .map(|v| attribute_scalar(n, v))
                .ok_or(BbsError::AttributeMismatch)
        })
        .collect()
}

/// Sign the blinded seed and device commitments together with the clear
/// attributes. `e` is derived from the secret key and the signed point, so
/// signing is deterministic.
pub fn blind_sign(
    issuer: &IssuerKeyPair,
    request: &BlindIssuanceRequest,
    clear_attributes: &BTreeMap<String, Vec<u8>>,
) -> Result<BlindSignature, BbsError> {
    request.verify(&issuer.public)?;
    let gens = issuer.public.generators();
    let named = named_scalars(&issuer.public, clear_attributes)?;
    let b = p1()
        + request.pnc_point()?
        + request.device_commitment
        + named
            .iter()
            .zip(&gens.message[FIRST_NAMED_SLOT..])
            .map(|(m, h)| *h * *m)
            .sum::<GroupElement>();
    let mut e_input = issuer.secret.to_bytes().to_vec();
    e_input.extend_from_slice(&b.to_bytes());
    let e = hash_to_scalar(&e_input, tags::BBS_E);
    let inv = (issuer.secret + e).invert().ok_or(BbsError::InvalidSignature)?;
    Ok(BlindSignature {
        a: b * inv,
        e,
        attributes: clear_attributes.clone(),
    })
}

/// A BBS credential as held by the wallet. Contains the seed scalar, so it
/// never leaves the wallet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Credential {
    pub a: GroupElement,
    pub e: Scalar,
    /// Slot values: seed scalar, device scalar, then named attributes.
    pub messages: Vec<Scalar>,
    pub blinding: Scalar,
    pub attributes: BTreeMap<String, Vec<u8>>,
}

impl Credential {
    pub fn seed_scalar(&self) -> Scalar {
        self.messages[SLOT_SEED]
    }

    fn signed_point(&self, gens: &Generators) -> GroupElement {
        p1() + gens.blinding * self.blinding
            + self
                .messages
                .iter()
                .zip(&gens.message)
                .map(|(m, h)| *h * *m)
                .sum::<GroupElement>()
    }
}

/// Turn the issuer's response into a standard credential and check it.
pub fn unblind(
    public: &IssuerPublicKey,
    signature: &BlindSignature,
    state: &BlindingState,
    seed: &PseudonymSeed,
    device_scalar: Scalar,
) -> Result<Credential, BbsError> {
    let mut messages = vec![seed.scalar(), device_scalar];
    messages.extend(named_scalars(public, &signature.attributes)?);
    let credential = Credential {
        a: signature.a,
        e: signature.e,
        messages,
        blinding: state.nonce,
        attributes: signature.attributes.clone(),
    };
    if !verify_signature(public, &credential) {
        return Err(BbsError::InvalidSignature);
    }
    Ok(credential)
}

/// `e(A, W + e·g2) = e(B, g2)`.
pub fn verify_signature(public: &IssuerPublicKey, credential: &Credential) -> bool {
    if credential.messages.len() != public.slot_count() || credential.a.is_identity() {
        return false;
    }
    let gens = public.generators();
    let b = credential.signed_point(&gens);
    let g2 = G2Element::generator();
    multi_pairing(&[(credential.a, public.w + g2 * credential.e), (-b, g2)]).is_identity()
}

impl Encode for Credential {
    fn encode(&self, w: &mut Writer) {
        w.point(&self.a).scalar(&self.e).len_of(self.messages.len());
        for m in &self.messages {
            w.scalar(m);
        }
        w.scalar(&self.blinding);
        encode_attributes(w, &self.attributes);
    }
}

impl Decode for Credential {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let a = r.point()?;
        let e = r.scalar()?;
        let n = r.len("message count")?;
        if n < FIRST_NAMED_SLOT {
            return Err(DecodeError::Invalid("message count"));
        }
        let messages = (0..n).map(|_| r.scalar()).collect::<Result<_, _>>()?;
        Ok(Self {
            a,
            e,
            messages,
            blinding: r.scalar()?,
            attributes: decode_attributes(r)?,
        })
    }
}

impl Record for Credential {
    const KIND: RecordKind = RecordKind::Credential;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PresentationMode {
    /// Certified presentation without a pseudonym.
    Plain,
    /// Hash-DH pseudonym with the index revealed.
    HashDh,
    /// Dodis-Yampolskiy pseudonym with a hidden index proven in `1..=bound`.
    DyRateLimited { bound: Index },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateLimitProof {
    pub bound: Index,
    pub idx_commitment: GroupElement,
    pub range_proof: RangeProof,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresentationProof {
    pub abar: GroupElement,
    pub bbar: GroupElement,
    pub disclosed: BTreeMap<String, Vec<u8>>,
    pub nym: Option<Pseudonym>,
    pub rate_limit: Option<RateLimitProof>,
    pub scope: Scope,
    pub session_context: Vec<u8>,
    pub proof: SchnorrProof,
}

impl PresentationProof {
    pub fn mode(&self) -> PresentationMode {
        match (&self.nym, &self.rate_limit) {
            (_, Some(rl)) => PresentationMode::DyRateLimited { bound: rl.bound },
            (Some(_), None) => PresentationMode::HashDh,
            (None, None) => PresentationMode::Plain,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifiedPresentation {
    pub disclosed: BTreeMap<String, Vec<u8>>,
    pub nym: Option<Pseudonym>,
}

/// Everything public about a presentation, in the order it enters the
/// transcript.
#[allow(clippy::too_many_arguments)]
fn presentation_transcript(
    public: &IssuerPublicKey,
    session_context: &[u8],
    scope: &Scope,
    mode: PresentationMode,
    disclosed: &BTreeMap<String, Vec<u8>>,
    abar: &GroupElement,
    bbar: &GroupElement,
    nym: Option<&Pseudonym>,
    idx_commitment: Option<&GroupElement>,
) -> Transcript {
    let mut t = Transcript::new(session_context);
    t.append("protocol", b"presentation");
    t.append("issuer-public", &public.to_bytes());
    t.append("scope", scope.as_str().as_bytes());
    let (mode_byte, bound) = match mode {
        PresentationMode::Plain => (MODE_PLAIN, 0),
        PresentationMode::HashDh => (MODE_HASHDH, 0),
        PresentationMode::DyRateLimited { bound } => (MODE_DY, bound.0),
    };
    t.append("mode", &[mode_byte]);
    t.append_u64("bound", bound);
    let mut w = Writer::new();
    encode_attributes(&mut w, disclosed);
    t.append("disclosed", &w.finish());
    t.append_point("abar", abar);
    t.append_point("bbar", bbar);
    if let Some(nym) = nym {
        t.append("nym", &nym.to_bytes());
    }
    if let Some(c) = idx_commitment {
        t.append_point("idx-commitment", c);
    }
    t
}

/// Assembled statement: the linear relation plus where the seed, index and
/// index-blinding variables sit in the witness vector.
struct Statement {
    relation: LinearRelation,
}

#[allow(clippy::too_many_arguments)]
fn presentation_statement(
    public: &IssuerPublicKey,
    gens: &Generators,
    disclosed_slots: &BTreeMap<usize, Scalar>,
    abar: GroupElement,
    bbar: GroupElement,
    mode: PresentationMode,
    nym: Option<&Pseudonym>,
    idx_commitment: Option<GroupElement>,
) -> Result<(Statement, Vec<usize>), BbsError> {
    let hidden: Vec<usize> = (0..public.slot_count())
        .filter(|i| !disclosed_slots.contains_key(i))
        .collect();
    // variables: 0 = 1/r, 1 = e/r, 2.. = hidden messages, then blinding nonce,
    // then (dy only) idx and its commitment randomness
    let nonce_var = 2 + hidden.len();
    let seed_var = 2 + hidden.iter().position(|s| *s == SLOT_SEED).expect("seed is always hidden");
    let var_count = nonce_var + 1 + if matches!(mode, PresentationMode::DyRateLimited { .. }) { 2 } else { 0 };

    let mut rel = LinearRelation::new("bbs-presentation", var_count);
    let disclosed_point = p1()
        + disclosed_slots
            .iter()
            .map(|(slot, m)| gens.message[*slot] * *m)
            .sum::<GroupElement>();
    let mut terms = vec![(0, bbar), (1, abar)];
    terms.extend(hidden.iter().enumerate().map(|(k, slot)| (2 + k, -gens.message[*slot])));
    terms.push((nonce_var, -gens.blinding));
    rel.equation(terms, disclosed_point);

    match mode {
        PresentationMode::Plain => {}
        PresentationMode::HashDh => {
            let nym = nym.ok_or(BbsError::Malformed("missing pseudonym"))?;
            let idx = nym.index_disclosed.ok_or(BbsError::Malformed("missing pseudonym index"))?;
            let value = nym.group_element().ok_or(BbsError::Malformed("pseudonym kind"))?;
            rel.equation(vec![(seed_var, hashdh_base(&nym.scope, idx))], value);
        }
        PresentationMode::DyRateLimited { .. } => {
            let nym = nym.ok_or(BbsError::Malformed("missing pseudonym"))?;
            let value = nym.group_element().ok_or(BbsError::Malformed("pseudonym kind"))?;
            let c = idx_commitment.ok_or(BbsError::Malformed("missing index commitment"))?;
            let (idx_var, rho_var) = (nonce_var + 1, nonce_var + 2);
            // G_scp = seed·nym + idx·nym
            rel.equation(vec![(seed_var, value), (idx_var, value)], dy_base(&nym.scope));
            rel.equation(vec![(idx_var, GroupElement::generator()), (rho_var, pedersen_h())], c);
        }
    }
    Ok((Statement { relation: rel }, hidden))
}

fn disclosed_slots(
    public: &IssuerPublicKey,
    disclosed: &BTreeMap<String, Vec<u8>>,
) -> Result<BTreeMap<usize, Scalar>, BbsError> {
    disclosed
        .iter()
        .map(|(name, value)| Ok((public.slot_of(name)?, attribute_scalar(name, value))))
        .collect()
}

/// Build a presentation of `credential` to the relying party `scp`.
///
/// Slot 0 (and the device slot) are always hidden; requesting either in
/// `disclose` is an error.
#[allow(clippy::too_many_arguments)]
pub fn present<R: RngCore + CryptoRng>(
    public: &IssuerPublicKey,
    credential: &Credential,
    disclose: &BTreeSet<String>,
    scp: &Scope,
    idx: Index,
    mode: PresentationMode,
    session_context: &[u8],
    rng: &mut R,
) -> Result<PresentationProof, BbsError> {
    let mut disclosed = BTreeMap::new();
    for name in disclose {
        public.slot_of(name)?;
        let value = credential
            .attributes
            .get(name)
            .ok_or_else(|| BbsError::UnknownAttribute(name.clone()))?;
        disclosed.insert(name.clone(), value.clone());
    }
    if credential.messages.len() != public.slot_count() {
        return Err(BbsError::AttributeMismatch);
    }
    let seed_scalar = credential.seed_scalar();

    let (nym, idx_opening) = match mode {
        PresentationMode::Plain => (None, None),
        PresentationMode::HashDh => (Some(crate::prf::hashdh_nym(seed_scalar, scp, idx)?), None),
        PresentationMode::DyRateLimited { bound } => {
            if idx.0 < 1 || idx.0 > bound.0 {
                return Err(BbsError::OutOfRange { idx: idx.0, bound: bound.0 });
            }
            let rho = Scalar::random(&mut *rng);
            let c = GroupElement::generator() * idx.scalar() + pedersen_h() * rho;
            (Some(crate::prf::dy_nym(seed_scalar, scp, idx)?), Some((c, rho)))
        }
    };

    let gens = public.generators();
    let r = Scalar::random_nonzero(&mut *rng);
    let r_inv = r.invert().expect("r is non-zero");
    let abar = credential.a * r;
    let bbar = credential.signed_point(&gens) * r - abar * credential.e;

    let slots = disclosed_slots(public, &disclosed)?;
    let idx_commitment = idx_opening.map(|(c, _)| c);
    let (statement, hidden) =
        presentation_statement(public, &gens, &slots, abar, bbar, mode, nym.as_ref(), idx_commitment)?;

    let mut transcript = presentation_transcript(
        public,
        session_context,
        scp,
        mode,
        &disclosed,
        &abar,
        &bbar,
        nym.as_ref(),
        idx_commitment.as_ref(),
    );

    let rate_limit = match (mode, idx_opening) {
        (PresentationMode::DyRateLimited { bound }, Some((c, rho))) => {
            let range_proof = prove_range(idx, c, rho, bound, &mut transcript, &mut *rng).map_err(|e| match e {
                SigmaError::OutOfRange { idx, bound } => BbsError::OutOfRange { idx, bound },
                other => BbsError::InvalidProof(other),
            })?;
            Some(RateLimitProof {
                bound,
                idx_commitment: c,
                range_proof,
            })
        }
        _ => None,
    };

    let mut witness = vec![r_inv, credential.e * r_inv];
    witness.extend(hidden.iter().map(|slot| credential.messages[*slot]));
    witness.push(credential.blinding);
    if let Some((_, rho)) = idx_opening {
        witness.push(idx.scalar());
        witness.push(rho);
    }
    let proof = statement
        .relation
        .prove(&witness, &mut transcript, rng)
        .map_err(BbsError::InvalidProof)?;

    Ok(PresentationProof {
        abar,
        bbar,
        disclosed,
        nym,
        rate_limit,
        scope: scp.clone(),
        session_context: session_context.to_vec(),
        proof,
    })
}

/// Relying-party verification. Policy checks (scope, session context, rate
/// limit) run before any cryptography and each has its own error.
pub fn verify_presentation(
    public: &IssuerPublicKey,
    proof: &PresentationProof,
    expected_scope: &Scope,
    bound: Option<Index>,
    session_context: &[u8],
) -> Result<VerifiedPresentation, BbsError> {
    if &proof.scope != expected_scope {
        return Err(BbsError::ScopeMismatch {
            expected: expected_scope.as_str().to_owned(),
            found: proof.scope.as_str().to_owned(),
        });
    }
    if proof.session_context != session_context {
        return Err(BbsError::ContextMismatch);
    }
    if let Some(nym) = &proof.nym {
        if nym.scope != proof.scope {
            return Err(BbsError::Malformed("pseudonym scope differs from presentation scope"));
        }
        if !matches!(nym.value, PseudonymValue::Group(_)) {
            return Err(BbsError::Malformed("pseudonym kind"));
        }
    }
    let mode = proof.mode();
    match mode {
        PresentationMode::DyRateLimited { .. } if proof.nym.is_none() => {
            return Err(BbsError::Malformed("rate-limited presentation without pseudonym"))
        }
        PresentationMode::DyRateLimited { .. } if proof.nym.as_ref().unwrap().index_disclosed.is_some() => {
            return Err(BbsError::Malformed("rate-limited pseudonym must hide its index"))
        }
        PresentationMode::HashDh if proof.nym.as_ref().unwrap().index_disclosed.is_none() => {
            return Err(BbsError::Malformed("missing pseudonym index"))
        }
        _ => {}
    }
    if let Some(limit) = bound {
        match (&proof.rate_limit, proof.nym.as_ref().and_then(|n| n.index_disclosed)) {
            (Some(rl), _) if rl.bound != limit => {
                return Err(BbsError::BoundMismatch {
                    expected: limit.0,
                    found: rl.bound.0,
                })
            }
            (Some(_), _) => {}
            (None, Some(idx)) => {
                if idx.0 < 1 || idx.0 > limit.0 {
                    return Err(BbsError::RangeViolation { idx: idx.0, bound: limit.0 });
                }
            }
            (None, None) => return Err(BbsError::MissingRangeProof),
        }
    }

    if proof.abar.is_identity() {
        return Err(BbsError::PairingCheckFailed);
    }
    let g2 = G2Element::generator();
    if !multi_pairing(&[(proof.abar, public.w), (-proof.bbar, g2)]).is_identity() {
        return Err(BbsError::PairingCheckFailed);
    }

    let gens = public.generators();
    let slots = disclosed_slots(public, &proof.disclosed)?;
    let idx_commitment = proof.rate_limit.as_ref().map(|rl| rl.idx_commitment);
    let (statement, _) = presentation_statement(
        public,
        &gens,
        &slots,
        proof.abar,
        proof.bbar,
        mode,
        proof.nym.as_ref(),
        idx_commitment,
    )?;
    let mut transcript = presentation_transcript(
        public,
        session_context,
        &proof.scope,
        mode,
        &proof.disclosed,
        &proof.abar,
        &proof.bbar,
        proof.nym.as_ref(),
        idx_commitment.as_ref(),
    );
    if let Some(rl) = &proof.rate_limit {
        verify_range(&rl.range_proof, rl.idx_commitment, rl.bound, &mut transcript)
            .map_err(BbsError::InvalidProof)?;
    }
    statement
        .relation
        .verify(&proof.proof, &mut transcript)
        .map_err(BbsError::InvalidProof)?;

    Ok(VerifiedPresentation {
        disclosed: proof.disclosed.clone(),
        nym: proof.nym.clone(),
    })
}

impl Encode for PresentationProof {
    fn encode(&self, w: &mut Writer) {
        let mode = match self.mode() {
            PresentationMode::Plain => MODE_PLAIN,
            PresentationMode::HashDh => MODE_HASHDH,
            PresentationMode::DyRateLimited { .. } => MODE_DY,
        };
        w.u8(mode).point(&self.abar).point(&self.bbar);
        encode_attributes(w, &self.disclosed);
        if let Some(nym) = &self.nym {
            w.bytes(&nym.to_bytes());
        }
        if let Some(rl) = &self.rate_limit {
            w.u64(rl.bound.0).point(&rl.idx_commitment);
            rl.range_proof.encode(w);
        }
        self.scope.encode(w);
        w.bytes(&self.session_context);
        self.proof.encode(w);
    }
}

impl Decode for PresentationProof {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let mode = r.u8("presentation mode")?;
        if mode > MODE_DY {
            return Err(DecodeError::Invalid("presentation mode"));
        }
        let abar = r.point()?;
        let bbar = r.point()?;
        let disclosed = decode_attributes(r)?;
        let nym = if mode != MODE_PLAIN {
            Some(Pseudonym::from_bytes(r.bytes("pseudonym")?)?)
        } else {
            None
        };
        let rate_limit = if mode == MODE_DY {
            Some(RateLimitProof {
                bound: Index(r.u64("bound")?),
                idx_commitment: r.point()?,
                range_proof: RangeProof::decode(r)?,
            })
        } else {
            None
        };
        Ok(Self {
            abar,
            bbar,
            disclosed,
            nym,
            rate_limit,
            scope: Scope::decode(r)?,
            session_context: r.bytes("session context")?.to_vec(),
            proof: SchnorrProof::decode(r)?,
        })
    }
}

impl Record for PresentationProof {
    const KIND: RecordKind = RecordKind::Presentation;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prf::hashdh_nym;
    use rand::rngs::OsRng;

    struct Fixture {
        issuer: IssuerKeyPair,
        seed: PseudonymSeed,
        credential: Credential,
    }

    fn attrs() -> BTreeMap<String, Vec<u8>> {
        BTreeMap::from([
            ("age_over_18".to_string(), b"true".to_vec()),
            ("expiry".to_string(), b"2030-01-01".to_vec()),
        ])
    }

    fn fixture() -> Fixture {
        let issuer = keygen(&["age_over_18", "expiry"], &mut OsRng).unwrap();
        let seed = PseudonymSeed::generate(&mut OsRng);
        let device = Scalar::random(&mut OsRng);
        let (req, state) = blind_issuance_request(&seed, device, &issuer.public, &mut OsRng);
        let sig = blind_sign(&issuer, &req, &attrs()).unwrap();
        let credential = unblind(&issuer.public, &sig, &state, &seed, device).unwrap();
        Fixture { issuer, seed, credential }
    }

    fn scope(s: &str) -> Scope {
        Scope::new(s).unwrap()
    }

    #[test]
    fn keygen_schema_rules() {
        let a = keygen(&["x"], &mut OsRng).unwrap();
        let b = keygen(&["x"], &mut OsRng).unwrap();
        assert_ne!(a.secret, b.secret);
        let gens = a.public.generators().message;
        assert_eq!(gens, a.public.generators().message);
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                assert_ne!(gens[i], gens[j]);
            }
            assert_ne!(gens[i], a.public.generators().blinding);
        }
        assert!(keygen(&["x", "x"], &mut OsRng).is_err());
        assert!(keygen(&[SEED_SLOT_NAME], &mut OsRng).is_err());
    }

    #[test]
    fn blind_issuance_end_to_end() {
        let f = fixture();
        assert!(verify_signature(&f.issuer.public, &f.credential));
        assert_eq!(f.credential.seed_scalar(), f.seed.scalar());
    }

    #[test]
    fn fresh_requests_have_distinct_commitments() {
        let issuer = keygen(&["a"], &mut OsRng).unwrap();
        let seed = PseudonymSeed::generate(&mut OsRng);
        let d = Scalar::random(&mut OsRng);
        let (r1, _) = blind_issuance_request(&seed, d, &issuer.public, &mut OsRng);
        let (r2, _) = blind_issuance_request(&seed, d, &issuer.public, &mut OsRng);
        assert_ne!(r1.pnc, r2.pnc);
        assert_eq!(r1.fingerprint, r2.fingerprint);
    }

    #[test]
    fn tampered_request_is_rejected() {
        let issuer = keygen(&["age_over_18", "expiry"], &mut OsRng).unwrap();
        let seed = PseudonymSeed::generate(&mut OsRng);
        let (mut req, _) = blind_issuance_request(&seed, Scalar::one(), &issuer.public, &mut OsRng);
        let SeedCommitment::Pedersen(p) = req.pnc else { unreachable!() };
        req.pnc = SeedCommitment::Pedersen(p + GroupElement::generator());
        assert!(matches!(blind_sign(&issuer, &req, &attrs()), Err(BbsError::InvalidRequest(_))));
    }

    #[test]
    fn request_for_another_issuer_is_rejected() {
        let a = keygen(&["age_over_18", "expiry"], &mut OsRng).unwrap();
        let b = keygen(&["age_over_18", "expiry"], &mut OsRng).unwrap();
        let seed = PseudonymSeed::generate(&mut OsRng);
        let (req, _) = blind_issuance_request(&seed, Scalar::one(), &a.public, &mut OsRng);
        assert!(blind_sign(&b, &req, &attrs()).is_err());
    }

    #[test]
    fn wrong_attribute_set_is_rejected() {
        let issuer = keygen(&["age_over_18", "expiry"], &mut OsRng).unwrap();
        let seed = PseudonymSeed::generate(&mut OsRng);
        let (req, _) = blind_issuance_request(&seed, Scalar::one(), &issuer.public, &mut OsRng);
        let mut a = attrs();
        a.remove("expiry");
        assert_eq!(blind_sign(&issuer, &req, &a), Err(BbsError::AttributeMismatch));
    }

    #[test]
    fn signature_rejects_altered_attribute_and_other_key() {
        let f = fixture();
        let mut altered = f.credential.clone();
        altered.messages[2] += Scalar::one();
        assert!(!verify_signature(&f.issuer.public, &altered));
        let other = keygen(&["age_over_18", "expiry"], &mut OsRng).unwrap();
        assert!(!verify_signature(&other.public, &f.credential));
    }

    #[test]
    fn hashdh_presentation_discloses_exactly_the_requested_attribute() {
        let f = fixture();
        let scp = scope("shop.example");
        let disclose = BTreeSet::from(["age_over_18".to_string()]);
        let p = present(&f.issuer.public, &f.credential, &disclose, &scp, Index(1), PresentationMode::HashDh, b"ctx", &mut OsRng)
            .unwrap();
        let v = verify_presentation(&f.issuer.public, &p, &scp, None, b"ctx").unwrap();
        assert_eq!(v.disclosed.len(), 1);
        assert_eq!(v.disclosed["age_over_18"], b"true");
        assert_eq!(v.nym, Some(hashdh_nym(f.seed.scalar(), &scp, Index(1)).unwrap()));
        assert_eq!(PresentationProof::from_bytes(&p.to_bytes()).unwrap(), p);
    }

    #[test]
    fn repeated_presentations_share_the_nym_but_not_the_bytes() {
        let f = fixture();
        let scp = scope("shop.example");
        let none = BTreeSet::new();
        let a = present(&f.issuer.public, &f.credential, &none, &scp, Index(0), PresentationMode::HashDh, b"", &mut OsRng).unwrap();
        let b = present(&f.issuer.public, &f.credential, &none, &scp, Index(0), PresentationMode::HashDh, b"", &mut OsRng).unwrap();
        assert_eq!(a.nym, b.nym);
        assert_ne!(a.to_bytes(), b.to_bytes());
    }

    #[test]
    fn seed_and_device_slots_cannot_be_disclosed() {
        let f = fixture();
        let scp = scope("rp");
        for (name, err) in [(SEED_SLOT_NAME, BbsError::SeedDisclosure), (DEVICE_SLOT_NAME, BbsError::DeviceDisclosure)] {
            let d = BTreeSet::from([name.to_string()]);
            assert_eq!(
                present(&f.issuer.public, &f.credential, &d, &scp, Index(0), PresentationMode::Plain, b"", &mut OsRng),
                Err(err)
            );
        }
    }

    #[test]
    fn rate_limited_presentation_bounds() {
        let f = fixture();
        let scp = scope("forum.example");
        let none = BTreeSet::new();
        let mode = PresentationMode::DyRateLimited { bound: Index(3) };
        for idx in 1..=3 {
            let p = present(&f.issuer.public, &f.credential, &none, &scp, Index(idx), mode, b"c", &mut OsRng).unwrap();
            let v = verify_presentation(&f.issuer.public, &p, &scp, Some(Index(3)), b"c").unwrap();
            assert!(v.nym.unwrap().index_disclosed.is_none());
            assert_eq!(PresentationProof::from_bytes(&p.to_bytes()).unwrap(), p);
        }
        assert_eq!(
            present(&f.issuer.public, &f.credential, &none, &scp, Index(4), mode, b"c", &mut OsRng),
            Err(BbsError::OutOfRange { idx: 4, bound: 3 })
        );
    }

    #[test]
    fn verifier_policy_errors() {
        let f = fixture();
        let a = scope("rp-a.example");
        let none = BTreeSet::new();
        let p = present(&f.issuer.public, &f.credential, &none, &a, Index(7), PresentationMode::HashDh, b"c", &mut OsRng).unwrap();
        assert!(matches!(
            verify_presentation(&f.issuer.public, &p, &scope("rp-b.example"), None, b"c"),
            Err(BbsError::ScopeMismatch { .. })
        ));
        assert_eq!(
            verify_presentation(&f.issuer.public, &p, &a, None, b"other"),
            Err(BbsError::ContextMismatch)
        );
        assert_eq!(
            verify_presentation(&f.issuer.public, &p, &a, Some(Index(5)), b"c"),
            Err(BbsError::RangeViolation { idx: 7, bound: 5 })
        );
        let plain = present(&f.issuer.public, &f.credential, &none, &a, Index(0), PresentationMode::Plain, b"c", &mut OsRng).unwrap();
        assert_eq!(
            verify_presentation(&f.issuer.public, &plain, &a, Some(Index(5)), b"c"),
            Err(BbsError::MissingRangeProof)
        );
        let dy = present(&f.issuer.public, &f.credential, &none, &a, Index(2), PresentationMode::DyRateLimited { bound: Index(4) }, b"c", &mut OsRng).unwrap();
        assert_eq!(
            verify_presentation(&f.issuer.public, &dy, &a, Some(Index(5)), b"c"),
            Err(BbsError::BoundMismatch { expected: 5, found: 4 })
        );
    }

    #[test]
    fn rewritten_context_or_disclosure_breaks_the_proof() {
        let f = fixture();
        let scp = scope("rp");
        let d = BTreeSet::from(["expiry".to_string()]);
        let p = present(&f.issuer.public, &f.credential, &d, &scp, Index(1), PresentationMode::HashDh, b"c1", &mut OsRng).unwrap();
        let mut replay = p.clone();
        replay.session_context = b"c2".to_vec();
        assert!(matches!(
            verify_presentation(&f.issuer.public, &replay, &scp, None, b"c2"),
            Err(BbsError::InvalidProof(_))
        ));
        let mut lie = p.clone();
        lie.disclosed.insert("expiry".into(), b"2099-01-01".to_vec());
        assert!(verify_presentation(&f.issuer.public, &lie, &scp, None, b"c1").is_err());
        let mut swapped = p.clone();
        swapped.nym = Some(hashdh_nym(Scalar::from_u64(5), &scp, Index(1)).unwrap());
        assert!(verify_presentation(&f.issuer.public, &swapped, &scp, None, b"c1").is_err());
    }

    #[test]
    fn presentation_fails_under_a_different_issuer_key() {
        let f = fixture();
        let other = keygen(&["age_over_18", "expiry"], &mut OsRng).unwrap();
        let scp = scope("rp");
        let p = present(&f.issuer.public, &f.credential, &BTreeSet::new(), &scp, Index(1), PresentationMode::HashDh, b"", &mut OsRng).unwrap();
        assert!(verify_presentation(&other.public, &p, &scp, None, b"").is_err());
    }
}
