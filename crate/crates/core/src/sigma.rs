//! Non-interactive sigma protocols compiled with Fiat-Shamir.
//!
//! Everything is built on [`LinearRelation`]: a system of equations
//! `image_j = Σ_i witness_i · base_ij` over G1, proven with the usual
//! commit / challenge / respond flow and the response convention
//! `z = k + c·w`. Discrete-log, DLEQ and Pedersen-opening proofs are thin
//! constructors on top. Bit proofs are Cramer-Damgård-Schoenmakers OR-proofs,
//! and range proofs decompose `idx - 1` and `ℓ - idx` into committed bits.
//!
//! Proofs that share a [`Transcript`] are chained: each challenge hashes the
//! whole transcript so far and is then appended to it.

use rand_core::{CryptoRng, RngCore};
use thiserror::Error;

use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};
use crate::commitments::{pedersen_h, SeedCommitment};
use crate::groups::{hash_to_scalar, tags, GroupElement, Scalar};
use crate::prf::Index;

pub const PROTOCOL_VERSION: &[u8] = b"EUDINYM-v1";

const TAG_SCHNORR: u8 = 0x51;
const TAG_BIT: u8 = 0x52;
const TAG_RANGE: u8 = 0x53;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SigmaError {
    #[error("witness does not satisfy the statement")]
    StatementMismatch,
    #[error("bit value {0} is not 0 or 1")]
    InvalidBit(u64),
    #[error("index {idx} outside 1..={bound}")]
    OutOfRange { idx: u64, bound: u64 },
    #[error("range bound must be at least 1")]
    InvalidBound,
    #[error("malformed proof: {0}")]
    Malformed(&'static str),
    #[error("verification equation failed")]
    EquationFailed,
    #[error("Fiat-Shamir challenge mismatch")]
    ChallengeMismatch,
}

/// Ordered, append-only Fiat-Shamir transcript.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    entries: Vec<(String, Vec<u8>)>,
}

impl Transcript {
    /// Starts with the protocol version and the session context (the stand-in
    /// for TLS channel binding). An empty context is allowed.
    pub fn new(session_context: &[u8]) -> Self {
        let mut t = Self { entries: Vec::new() };
        t.append("protocol-version", PROTOCOL_VERSION);
        t.append("session-context", session_context);
        t
    }

    pub fn append(&mut self, label: &str, bytes: &[u8]) {
        self.entries.push((label.to_owned(), bytes.to_vec()));
    }

    pub fn append_point(&mut self, label: &str, p: &GroupElement) {
        self.append(label, &p.to_bytes());
    }

    pub fn append_scalar(&mut self, label: &str, s: &Scalar) {
        self.append(label, &s.to_bytes());
    }

    pub fn append_u64(&mut self, label: &str, v: u64) {
        self.append(label, &v.to_be_bytes());
    }

    pub fn entries(&self) -> &[(String, Vec<u8>)] {
        &self.entries
    }

    pub fn encoding(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.len_of(self.entries.len());
        for (label, bytes) in &self.entries {
            w.str(label).bytes(bytes);
        }
        w.finish()
    }

    /// Derive a challenge over everything absorbed so far, then absorb it.
    pub fn challenge(&mut self, label: &str) -> Scalar {
        let c = hash_to_scalar(&self.encoding(), tags::CHALLENGE);
        self.append_scalar(label, &c);
        c
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Equation {
    terms: Vec<(usize, GroupElement)>,
    image: GroupElement,
}

/// `image_j = Σ witness_i · base_ij` for every equation j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearRelation {
    label: &'static str,
    var_count: usize,
    equations: Vec<Equation>,
}

impl LinearRelation {
    pub fn new(label: &'static str, var_count: usize) -> Self {
        Self {
            label,
            var_count,
            equations: Vec::new(),
        }
    }

    pub fn equation(&mut self, terms: Vec<(usize, GroupElement)>, image: GroupElement) -> &mut Self {
        assert!(terms.iter().all(|(i, _)| *i < self.var_count), "variable out of range");
        self.equations.push(Equation { terms, image });
        self
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn equation_count(&self) -> usize {
        self.equations.len()
    }

    fn eval(eq: &Equation, values: &[Scalar]) -> GroupElement {
        eq.terms.iter().map(|(i, base)| *base * values[*i]).sum()
    }

    pub fn is_satisfied(&self, witness: &[Scalar]) -> bool {
        witness.len() == self.var_count
            && self.equations.iter().all(|eq| Self::eval(eq, witness) == eq.image)
    }

    /// First prover message for the given nonces.
    pub fn commit(&self, nonces: &[Scalar]) -> Vec<GroupElement> {
        self.equations.iter().map(|eq| Self::eval(eq, nonces)).collect()
    }

    pub fn respond(&self, witness: &[Scalar], nonces: &[Scalar], challenge: Scalar) -> Vec<Scalar> {
        witness
            .iter()
            .zip(nonces)
            .map(|(w, k)| *k + challenge * *w)
            .collect()
    }

    /// Checks `Σ z_i · base_ij = T_j + c · image_j` for every equation.
    pub fn check(&self, commitments: &[GroupElement], challenge: Scalar, responses: &[Scalar]) -> bool {
        commitments.len() == self.equations.len()
            && responses.len() == self.var_count
            && self
                .equations
                .iter()
                .zip(commitments)
                .all(|(eq, t)| Self::eval(eq, responses) == *t + eq.image * challenge)
    }

    pub fn absorb_statement(&self, transcript: &mut Transcript) {
        let mut w = Writer::new();
        w.len_of(self.var_count).len_of(self.equations.len());
        for eq in &self.equations {
            w.len_of(eq.terms.len());
            for (i, base) in &eq.terms {
                w.len_of(*i).point(base);
            }
            w.point(&eq.image);
        }
        transcript.append("relation", self.label.as_bytes());
        transcript.append("statement", &w.finish());
    }

    fn absorb_commitments(transcript: &mut Transcript, commitments: &[GroupElement]) {
        for t in commitments {
            transcript.append_point("commitment", t);
        }
    }

    pub fn prove<R: RngCore + CryptoRng>(
        &self,
        witness: &[Scalar],
        transcript: &mut Transcript,
        rng: &mut R,
    ) -> Result<SchnorrProof, SigmaError> {
        if !self.is_satisfied(witness) {
            return Err(SigmaError::StatementMismatch);
        }
        let nonces: Vec<Scalar> = (0..self.var_count).map(|_| Scalar::random(&mut *rng)).collect();
        let commitments = self.commit(&nonces);
        self.absorb_statement(transcript);
        Self::absorb_commitments(transcript, &commitments);
        let challenge = transcript.challenge("challenge");
        let responses = self.respond(witness, &nonces, challenge);
        Ok(SchnorrProof {
            commitments,
            challenge,
            responses,
        })
    }

    pub fn verify(&self, proof: &SchnorrProof, transcript: &mut Transcript) -> Result<(), SigmaError> {
        if proof.commitments.len() != self.equations.len() {
            return Err(SigmaError::Malformed("commitment count"));
        }
        if proof.responses.len() != self.var_count {
            return Err(SigmaError::Malformed("response count"));
        }
        self.absorb_statement(transcript);
        Self::absorb_commitments(transcript, &proof.commitments);
        if transcript.challenge("challenge") != proof.challenge {
            return Err(SigmaError::ChallengeMismatch);
        }
        if !self.check(&proof.commitments, proof.challenge, &proof.responses) {
            return Err(SigmaError::EquationFailed);
        }
        Ok(())
    }

    /// Honest-verifier simulator: picks responses first and solves for the
    /// commitments. Takes no witness.
    pub fn simulate<R: RngCore + CryptoRng>(&self, challenge: Scalar, rng: &mut R) -> SchnorrProof {
        let responses: Vec<Scalar> = (0..self.var_count).map(|_| Scalar::random(&mut *rng)).collect();
        let commitments = self
            .equations
            .iter()
            .map(|eq| Self::eval(eq, &responses) - eq.image * challenge)
            .collect();
        SchnorrProof {
            commitments,
            challenge,
            responses,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchnorrProof {
    pub commitments: Vec<GroupElement>,
    pub challenge: Scalar,
    pub responses: Vec<Scalar>,
}

impl Encode for SchnorrProof {
    fn encode(&self, w: &mut Writer) {
        w.u8(TAG_SCHNORR).len_of(self.commitments.len());
        for t in &self.commitments {
            w.point(t);
        }
        w.scalar(&self.challenge).len_of(self.responses.len());
        for z in &self.responses {
            w.scalar(z);
        }
    }
}

impl Decode for SchnorrProof {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        if r.u8("proof tag")? != TAG_SCHNORR {
            return Err(DecodeError::Invalid("schnorr proof tag"));
        }
        let n = r.len("commitment count")?;
        let commitments = (0..n).map(|_| r.point()).collect::<Result<_, _>>()?;
        let challenge = r.scalar()?;
        let m = r.len("response count")?;
        let responses = (0..m).map(|_| r.scalar()).collect::<Result<_, _>>()?;
        Ok(Self {
            commitments,
            challenge,
            responses,
        })
    }
}

pub fn dlog_relation(base: GroupElement, public: GroupElement) -> LinearRelation {
    let mut rel = LinearRelation::new("dlog", 1);
    rel.equation(vec![(0, base)], public);
    rel
}

pub fn dleq_relation(
    base1: GroupElement,
    pub1: GroupElement,
    base2: GroupElement,
    pub2: GroupElement,
) -> LinearRelation {
    let mut rel = LinearRelation::new("dleq", 1);
    rel.equation(vec![(0, base1)], pub1);
    rel.equation(vec![(0, base2)], pub2);
    rel
}

/// Knowledge of `(s, n)` with `c = s·g + n·h`.
pub fn pedersen_relation(g: GroupElement, h: GroupElement, c: GroupElement) -> LinearRelation {
    let mut rel = LinearRelation::new("pedersen-opening", 2);
    rel.equation(vec![(0, g), (1, h)], c);
    rel
}

fn pedersen_point(c: &SeedCommitment) -> Result<GroupElement, SigmaError> {
    match c {
        SeedCommitment::Pedersen(p) => Ok(*p),
        SeedCommitment::Hash(_) => Err(SigmaError::Malformed("expected a pedersen commitment")),
    }
}

pub fn prove_dlog<R: RngCore + CryptoRng>(
    witness: Scalar,
    base: GroupElement,
    public: GroupElement,
    transcript: &mut Transcript,
    rng: &mut R,
) -> Result<SchnorrProof, SigmaError> {
    dlog_relation(base, public).prove(&[witness], transcript, rng)
}

pub fn verify_dlog(
    proof: &SchnorrProof,
    base: GroupElement,
    public: GroupElement,
    transcript: &mut Transcript,
) -> Result<(), SigmaError> {
    dlog_relation(base, public).verify(proof, transcript)
}

pub fn prove_dleq<R: RngCore + CryptoRng>(
    witness: Scalar,
    (base1, pub1): (GroupElement, GroupElement),
    (base2, pub2): (GroupElement, GroupElement),
    transcript: &mut Transcript,
    rng: &mut R,
) -> Result<SchnorrProof, SigmaError> {
    dleq_relation(base1, pub1, base2, pub2).prove(&[witness], transcript, rng)
}

pub fn verify_dleq(
    proof: &SchnorrProof,
    (base1, pub1): (GroupElement, GroupElement),
    (base2, pub2): (GroupElement, GroupElement),
    transcript: &mut Transcript,
) -> Result<(), SigmaError> {
    dleq_relation(base1, pub1, base2, pub2).verify(proof, transcript)
}

/// Proof of knowledge of the opening of a Pedersen seed commitment over the
/// default bases g and h.
pub fn prove_pedersen_opening<R: RngCore + CryptoRng>(
    seed_scalar: Scalar,
    nonce_scalar: Scalar,
    c: &SeedCommitment,
    transcript: &mut Transcript,
    rng: &mut R,
) -> Result<SchnorrProof, SigmaError> {
    pedersen_relation(GroupElement::generator(), pedersen_h(), pedersen_point(c)?).prove(
        &[seed_scalar, nonce_scalar],
        transcript,
        rng,
    )
}

pub fn verify_pedersen_opening(
    proof: &SchnorrProof,
    c: &SeedCommitment,
    transcript: &mut Transcript,
) -> Result<(), SigmaError> {
    pedersen_relation(GroupElement::generator(), pedersen_h(), pedersen_point(c)?)
        .verify(proof, transcript)
}

/// HVZK simulator for a discrete-log statement `public = w · base`.
pub fn simulate_dlog<R: RngCore + CryptoRng>(
    base: GroupElement,
    public: GroupElement,
    challenge: Scalar,
    rng: &mut R,
) -> SchnorrProof {
    dlog_relation(base, public).simulate(challenge, rng)
}

/// OR-proof that a Pedersen commitment `C = b·g + r·h` opens to b ∈ {0, 1}.
///
/// Branch 0 proves `C = r·h`, branch 1 proves `C - g = r·h`. The challenge
/// split satisfies `c0 + c1 = c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitProof {
    pub t0: GroupElement,
    pub t1: GroupElement,
    pub c0: Scalar,
    pub c1: Scalar,
    pub z0: Scalar,
    pub z1: Scalar,
}

/// The two branch targets `(C, C - g)`, both claimed multiples of h.
pub fn bit_branches(commitment: GroupElement) -> [GroupElement; 2] {
    [commitment, commitment - GroupElement::generator()]
}

pub fn absorb_bit_statement(transcript: &mut Transcript, commitment: &GroupElement) {
    transcript.append("relation", b"bit");
    transcript.append_point("bit-commitment", commitment);
}

pub fn prove_bit<R: RngCore + CryptoRng>(
    bit: u64,
    commitment: GroupElement,
    randomness: Scalar,
    transcript: &mut Transcript,
    rng: &mut R,
) -> Result<BitProof, SigmaError> {
    if bit > 1 {
        return Err(SigmaError::InvalidBit(bit));
    }
    let h = pedersen_h();
    let real = bit as usize;
    let fake = 1 - real;
    let targets = bit_branches(commitment);
    if targets[real] != h * randomness {
        return Err(SigmaError::StatementMismatch);
    }

    let mut t = [GroupElement::identity(); 2];
    let mut c = [Scalar::zero(); 2];
    let mut z = [Scalar::zero(); 2];

    c[fake] = Scalar::random(&mut *rng);
    z[fake] = Scalar::random(&mut *rng);
    t[fake] = h * z[fake] - targets[fake] * c[fake];
    let k = Scalar::random(&mut *rng);
    t[real] = h * k;

    absorb_bit_statement(transcript, &commitment);
    transcript.append_point("t0", &t[0]);
    transcript.append_point("t1", &t[1]);
    let challenge = transcript.challenge("challenge");
    c[real] = challenge - c[fake];
    z[real] = k + c[real] * randomness;

    Ok(BitProof {
        t0: t[0],
        t1: t[1],
        c0: c[0],
        c1: c[1],
        z0: z[0],
        z1: z[1],
    })
}

pub fn verify_bit(proof: &BitProof, commitment: GroupElement, transcript: &mut Transcript) -> Result<(), SigmaError> {
    let h = pedersen_h();
    absorb_bit_statement(transcript, &commitment);
    transcript.append_point("t0", &proof.t0);
    transcript.append_point("t1", &proof.t1);
    let challenge = transcript.challenge("challenge");
    if proof.c0 + proof.c1 != challenge {
        return Err(SigmaError::ChallengeMismatch);
    }
    let [b0, b1] = bit_branches(commitment);
    if h * proof.z0 != proof.t0 + b0 * proof.c0 || h * proof.z1 != proof.t1 + b1 * proof.c1 {
        return Err(SigmaError::EquationFailed);
    }
    Ok(())
}

impl Encode for BitProof {
    fn encode(&self, w: &mut Writer) {
        w.u8(TAG_BIT)
            .point(&self.t0)
            .point(&self.t1)
            .scalar(&self.c0)
            .scalar(&self.c1)
            .scalar(&self.z0)
            .scalar(&self.z1);
    }
}

impl Decode for BitProof {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        if r.u8("proof tag")? != TAG_BIT {
            return Err(DecodeError::Invalid("bit proof tag"));
        }
        Ok(Self {
            t0: r.point()?,
            t1: r.point()?,
            c0: r.scalar()?,
            c1: r.scalar()?,
            z0: r.scalar()?,
            z1: r.scalar()?,
        })
    }
}

/// Number of committed bits per decomposition: `ceil(log2 ℓ) + 1`.
pub fn range_width(bound: u64) -> usize {
    debug_assert!(bound >= 1);
    let ceil_log2 = if bound <= 1 {
        0
    } else {
        (64 - (bound - 1).leading_zeros()) as usize
    };
    ceil_log2 + 1
}

/// Proof that a committed index satisfies `1 ≤ idx ≤ ℓ`.
///
/// `lower_*` decomposes `idx - 1`, `upper_*` decomposes `ℓ - idx`. Both are
/// non-negative and below `2^width`, and they sum to `ℓ - 1`, which pins
/// idx into the range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RangeProof {
    pub lower_bits: Vec<GroupElement>,
    pub upper_bits: Vec<GroupElement>,
    pub lower_or: Vec<BitProof>,
    pub upper_or: Vec<BitProof>,
    pub lower_consistency: SchnorrProof,
    pub upper_consistency: SchnorrProof,
}

fn pow2(i: usize) -> Scalar {
    Scalar::from_u64(1u64 << i)
}

/// `Σ 2^i · C_i`.
pub fn recompose(bits: &[GroupElement]) -> GroupElement {
    bits.iter().enumerate().map(|(i, c)| *c * pow2(i)).sum()
}

/// Points that must be multiples of h if the bit commitments recompose to
/// `C - g` (lower) and `ℓ·g - C` (upper).
pub fn range_consistency_targets(
    idx_commitment: GroupElement,
    bound: u64,
    lower_bits: &[GroupElement],
    upper_bits: &[GroupElement],
) -> (GroupElement, GroupElement) {
    let g = GroupElement::generator();
    let lower = idx_commitment - g - recompose(lower_bits);
    let upper = g * Scalar::from_u64(bound) - idx_commitment - recompose(upper_bits);
    (lower, upper)
}

pub fn absorb_range_statement(
    transcript: &mut Transcript,
    idx_commitment: &GroupElement,
    bound: u64,
    lower_bits: &[GroupElement],
    upper_bits: &[GroupElement],
) {
    transcript.append("relation", b"range");
    transcript.append_u64("bound", bound);
    transcript.append_point("idx-commitment", idx_commitment);
    for c in lower_bits {
        transcript.append_point("lower-bit", c);
    }
    for c in upper_bits {
        transcript.append_point("upper-bit", c);
    }
}

pub fn prove_range<R: RngCore + CryptoRng>(
    idx: Index,
    idx_commitment: GroupElement,
    randomness: Scalar,
    bound: Index,
    transcript: &mut Transcript,
    rng: &mut R,
) -> Result<RangeProof, SigmaError> {
    let (idx, bound) = (idx.0, bound.0);
    if bound == 0 {
        return Err(SigmaError::InvalidBound);
    }
    if idx < 1 || idx > bound {
        return Err(SigmaError::OutOfRange { idx, bound });
    }
    let g = GroupElement::generator();
    let h = pedersen_h();
    if idx_commitment != g * Scalar::from_u64(idx) + h * randomness {
        return Err(SigmaError::StatementMismatch);
    }
    let width = range_width(bound);

    let mut commit_bits = |value: u64| {
        let mut commitments = Vec::with_capacity(width);
        let mut blinds = Vec::with_capacity(width);
        for i in 0..width {
            let bit = (value >> i) & 1;
            let r = Scalar::random(&mut *rng);
            commitments.push(g * Scalar::from_u64(bit) + h * r);
            blinds.push((bit, r));
        }
        (commitments, blinds)
    };
    let (lower_bits, lower_blinds) = commit_bits(idx - 1);
    let (upper_bits, upper_blinds) = commit_bits(bound - idx);

    absorb_range_statement(transcript, &idx_commitment, bound, &lower_bits, &upper_bits);

    let mut bit_proofs = |commitments: &[GroupElement], blinds: &[(u64, Scalar)], transcript: &mut Transcript| {
        commitments
            .iter()
            .zip(blinds)
            .map(|(c, (bit, r))| prove_bit(*bit, *c, *r, transcript, &mut *rng))
            .collect::<Result<Vec<_>, _>>()
    };
    let lower_or = bit_proofs(&lower_bits, &lower_blinds, transcript)?;
    let upper_or = bit_proofs(&upper_bits, &upper_blinds, transcript)?;

    let weighted = |blinds: &[(u64, Scalar)]| -> Scalar {
        blinds.iter().enumerate().map(|(i, (_, r))| *r * pow2(i)).sum()
    };
    let (lower_target, upper_target) =
        range_consistency_targets(idx_commitment, bound, &lower_bits, &upper_bits);
    let lower_consistency = prove_dlog(
        randomness - weighted(&lower_blinds),
        h,
        lower_target,
        transcript,
        &mut *rng,
    )?;
    let upper_consistency = prove_dlog(
        -randomness - weighted(&upper_blinds),
        h,
        upper_target,
        transcript,
        &mut *rng,
    )?;

    Ok(RangeProof {
        lower_bits,
        upper_bits,
        lower_or,
        upper_or,
        lower_consistency,
        upper_consistency,
    })
}

pub fn verify_range(
    proof: &RangeProof,
    idx_commitment: GroupElement,
    bound: Index,
    transcript: &mut Transcript,
) -> Result<(), SigmaError> {
    let bound = bound.0;
    if bound == 0 {
        return Err(SigmaError::InvalidBound);
    }
    let width = range_width(bound);
    if proof.lower_bits.len() != width
        || proof.upper_bits.len() != width
        || proof.lower_or.len() != width
        || proof.upper_or.len() != width
    {
        return Err(SigmaError::Malformed("range proof width"));
    }
    absorb_range_statement(transcript, &idx_commitment, bound, &proof.lower_bits, &proof.upper_bits);
    for (c, p) in proof.lower_bits.iter().zip(&proof.lower_or) {
        verify_bit(p, *c, transcript)?;
    }
    for (c, p) in proof.upper_bits.iter().zip(&proof.upper_or) {
        verify_bit(p, *c, transcript)?;
    }
    let h = pedersen_h();
    let (lower_target, upper_target) =
        range_consistency_targets(idx_commitment, bound, &proof.lower_bits, &proof.upper_bits);
    verify_dlog(&proof.lower_consistency, h, lower_target, transcript)?;
    verify_dlog(&proof.upper_consistency, h, upper_target, transcript)?;
    Ok(())
}

impl Encode for RangeProof {
    fn encode(&self, w: &mut Writer) {
        w.u8(TAG_RANGE).len_of(self.lower_bits.len());
        for c in self.lower_bits.iter().chain(&self.upper_bits) {
            w.point(c);
        }
        for p in self.lower_or.iter().chain(&self.upper_or) {
            p.encode(w);
        }
        self.lower_consistency.encode(w);
        self.upper_consistency.encode(w);
    }
}

impl Decode for RangeProof {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        if r.u8("proof tag")? != TAG_RANGE {
            return Err(DecodeError::Invalid("range proof tag"));
        }
        let width = r.len("range width")?;
        if width > 64 {
            return Err(DecodeError::Invalid("range width"));
        }
        let mut points = |n| (0..n).map(|_| r.point()).collect::<Result<Vec<_>, _>>();
        let lower_bits = points(width)?;
        let upper_bits = points(width)?;
        let mut bits = |n| (0..n).map(|_| BitProof::decode(r)).collect::<Result<Vec<_>, _>>();
        let lower_or = bits(width)?;
        let upper_or = bits(width)?;
        Ok(Self {
            lower_bits,
            upper_bits,
            lower_or,
            upper_or,
            lower_consistency: SchnorrProof::decode(r)?,
            upper_consistency: SchnorrProof::decode(r)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commitments::commit_pedersen;
    use rand::rngs::OsRng;

    fn random_point() -> GroupElement {
        GroupElement::generator() * Scalar::random(&mut OsRng)
    }

    #[test]
    fn dlog_completeness_and_tamper() {
        let w = Scalar::random(&mut OsRng);
        let g = GroupElement::generator();
        let mut proof = prove_dlog(w, g, g * w, &mut Transcript::new(b"ctx"), &mut OsRng).unwrap();
        assert_eq!(verify_dlog(&proof, g, g * w, &mut Transcript::new(b"ctx")), Ok(()));
        proof.responses[0] += Scalar::one();
        assert_eq!(
            verify_dlog(&proof, g, g * w, &mut Transcript::new(b"ctx")),
            Err(SigmaError::EquationFailed)
        );
    }

    #[test]
    fn dlog_statement_mismatch_at_prove_time() {
        let g = GroupElement::generator();
        assert_eq!(
            prove_dlog(Scalar::one(), g, g + g, &mut Transcript::new(b""), &mut OsRng),
            Err(SigmaError::StatementMismatch)
        );
    }

    #[test]
    fn flipped_challenge_is_rejected() {
        let w = Scalar::random(&mut OsRng);
        let g = GroupElement::generator();
        let mut proof = prove_dlog(w, g, g * w, &mut Transcript::new(b""), &mut OsRng).unwrap();
        let mut bytes = proof.challenge.to_bytes();
        bytes[31] ^= 1;
        proof.challenge = Scalar::from_bytes(&bytes).unwrap();
        assert_eq!(
            verify_dlog(&proof, g, g * w, &mut Transcript::new(b"")),
            Err(SigmaError::ChallengeMismatch)
        );
    }

    #[test]
    fn dleq_accepts_equal_and_refuses_unequal_witness() {
        let w = Scalar::random(&mut OsRng);
        let g = GroupElement::generator();
        let h = random_point();
        let proof = prove_dleq(w, (g, g * w), (h, h * w), &mut Transcript::new(b""), &mut OsRng).unwrap();
        assert!(verify_dleq(&proof, (g, g * w), (h, h * w), &mut Transcript::new(b"")).is_ok());

        let other = h * (w + Scalar::one());
        assert_eq!(
            prove_dleq(w, (g, g * w), (h, other), &mut Transcript::new(b""), &mut OsRng),
            Err(SigmaError::StatementMismatch)
        );
        // the honest proof does not carry over to the wrong statement
        assert!(verify_dleq(&proof, (g, g * w), (h, other), &mut Transcript::new(b"")).is_err());
    }

    #[test]
    fn pedersen_opening_and_swapped_responses() {
        let (s, n) = (Scalar::random(&mut OsRng), Scalar::random(&mut OsRng));
        let c = commit_pedersen(s, n);
        let mut proof = prove_pedersen_opening(s, n, &c, &mut Transcript::new(b""), &mut OsRng).unwrap();
        assert!(verify_pedersen_opening(&proof, &c, &mut Transcript::new(b"")).is_ok());
        proof.responses.swap(0, 1);
        assert!(verify_pedersen_opening(&proof, &c, &mut Transcript::new(b"")).is_err());
        assert_eq!(
            prove_pedersen_opening(n, s, &c, &mut Transcript::new(b""), &mut OsRng),
            Err(SigmaError::StatementMismatch)
        );
    }

    #[test]
    fn context_binding() {
        let w = Scalar::random(&mut OsRng);
        let g = GroupElement::generator();
        let proof = prove_dlog(w, g, g * w, &mut Transcript::new(b"session-a"), &mut OsRng).unwrap();
        assert_eq!(
            verify_dlog(&proof, g, g * w, &mut Transcript::new(b"session-b")),
            Err(SigmaError::ChallengeMismatch)
        );
        let mut t = Transcript::new(b"session-a");
        t.append("scope", b"other");
        assert!(verify_dlog(&proof, g, g * w, &mut t).is_err());
    }

    #[test]
    fn simulated_proofs_satisfy_the_equations() {
        let base = random_point();
        let public = random_point();
        let c = Scalar::random(&mut OsRng);
        let sim = simulate_dlog(base, public, c, &mut OsRng);
        assert!(dlog_relation(base, public).check(&sim.commitments, c, &sim.responses));
    }

    #[test]
    fn bits_zero_and_one_verify() {
        let h = pedersen_h();
        for bit in 0..=1u64 {
            let r = Scalar::random(&mut OsRng);
            let c = GroupElement::generator() * Scalar::from_u64(bit) + h * r;
            let p = prove_bit(bit, c, r, &mut Transcript::new(b""), &mut OsRng).unwrap();
            assert!(verify_bit(&p, c, &mut Transcript::new(b"")).is_ok());
            assert_eq!(BitProof::from_bytes(&p.to_bytes()).unwrap(), p);
        }
    }

    #[test]
    fn commitment_to_two_has_no_bit_proof() {
        let h = pedersen_h();
        let r = Scalar::random(&mut OsRng);
        let c = GroupElement::generator() * Scalar::from_u64(2) + h * r;
        assert_eq!(
            prove_bit(2, c, r, &mut Transcript::new(b""), &mut OsRng),
            Err(SigmaError::InvalidBit(2))
        );
        for claimed in 0..=1 {
            assert_eq!(
                prove_bit(claimed, c, r, &mut Transcript::new(b""), &mut OsRng),
                Err(SigmaError::StatementMismatch)
            );
        }
    }

    #[test]
    fn range_width_values() {
        assert_eq!(range_width(1), 1);
        assert_eq!(range_width(2), 2);
        assert_eq!(range_width(3), 3);
        assert_eq!(range_width(4), 3);
        assert_eq!(range_width(5), 4);
        assert_eq!(range_width(8), 4);
        assert_eq!(range_width(9), 5);
    }

    fn committed(idx: u64) -> (GroupElement, Scalar) {
        let r = Scalar::random(&mut OsRng);
        (GroupElement::generator() * Scalar::from_u64(idx) + pedersen_h() * r, r)
    }

    #[test]
    fn range_boundaries() {
        for bound in [1u64, 3, 4, 5, 8] {
            for idx in 1..=bound {
                let (c, r) = committed(idx);
                let p = prove_range(Index(idx), c, r, Index(bound), &mut Transcript::new(b"x"), &mut OsRng)
                    .unwrap();
                assert!(verify_range(&p, c, Index(bound), &mut Transcript::new(b"x")).is_ok());
                assert_eq!(RangeProof::from_bytes(&p.to_bytes()).unwrap(), p);
            }
            let (c, r) = committed(bound + 1);
            assert_eq!(
                prove_range(Index(bound + 1), c, r, Index(bound), &mut Transcript::new(b""), &mut OsRng),
                Err(SigmaError::OutOfRange { idx: bound + 1, bound })
            );
        }
        let (c, r) = committed(0);
        assert!(prove_range(Index(0), c, r, Index(4), &mut Transcript::new(b""), &mut OsRng).is_err());
    }

    #[test]
    fn range_proof_does_not_transfer_to_another_commitment_or_bound() {
        let (c, r) = committed(2);
        let p = prove_range(Index(2), c, r, Index(4), &mut Transcript::new(b""), &mut OsRng).unwrap();
        let (other, _) = committed(2);
        assert!(verify_range(&p, other, Index(4), &mut Transcript::new(b"")).is_err());
        assert!(verify_range(&p, c, Index(3), &mut Transcript::new(b"")).is_err());
        assert!(verify_range(&p, c, Index(8), &mut Transcript::new(b"")).is_err());
    }
}
