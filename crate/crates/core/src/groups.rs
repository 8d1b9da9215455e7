//! Prime-order group abstraction over BLS12-381.
//!
//! Every higher layer works with [`Scalar`], [`GroupElement`] (G1),
//! [`G2Element`] and [`PairingTarget`] only. Encodings are fixed-length:
//! scalars are 32 bytes big-endian, G1 elements 48 bytes compressed and G2
//! elements 96 bytes compressed. Decoding always performs the on-curve and
//! subgroup checks.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use bls12_381::hash_to_curve::{ExpandMsgXmd, HashToCurve};
use bls12_381::{G1Affine, G1Projective, G2Affine, G2Prepared, G2Projective, Gt};
use ff::Field;
use group::Curve;
use rand_core::{CryptoRng, RngCore};
use sha2::{Digest, Sha512};

use crate::codec::DecodeError;

pub const SCALAR_LEN: usize = 32;
pub const G1_LEN: usize = 48;
pub const G2_LEN: usize = 96;

/// Domain separation tags. Every hash into a scalar or the group goes
/// through one of these.
pub mod tags {
    pub const SEED: &[u8] = b"EUDINYM-v1-seed";
    pub const PEDERSEN_H: &[u8] = b"EUDINYM-v1-pedersen-h";
    pub const NYM: &[u8] = b"EUDINYM-v1-nym-hashdh";
    pub const DY_BASE: &[u8] = b"EUDINYM-v1-nym-dy-base";
    pub const DY_INPUT: &[u8] = b"EUDINYM-v1-nym-dy-input";
    pub const CHALLENGE: &[u8] = b"EUDINYM-v1-challenge";
    pub const ATTRIBUTE: &[u8] = b"EUDINYM-v1-attribute";
    pub const BBS_P1: &[u8] = b"EUDINYM-v1-bbs-p1";
    pub const BBS_GENERATOR: &[u8] = b"EUDINYM-v1-bbs-generator";
    pub const BBS_BLINDING: &[u8] = b"EUDINYM-v1-bbs-blinding";
    pub const BBS_E: &[u8] = b"EUDINYM-v1-bbs-e";
    pub const ENROLL_FINGERPRINT: &[u8] = b"EUDINYM-v1-enroll-fingerprint";
    pub const TRANSFER: &[u8] = b"EUDINYM-v1-transfer";
}

/// Integer modulo the BLS12-381 group order r.
#[derive(Clone, Copy, PartialEq, Eq, Default)]
pub struct Scalar(pub(crate) bls12_381::Scalar);

impl Scalar {
    pub fn zero() -> Self {
        Self(bls12_381::Scalar::ZERO)
    }

    pub fn one() -> Self {
        Self(bls12_381::Scalar::ONE)
    }

    pub fn from_u64(v: u64) -> Self {
        Self(bls12_381::Scalar::from(v))
    }

    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self(bls12_381::Scalar::random(rng))
    }

    /// Uniform non-zero scalar.
    pub fn random_nonzero<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        loop {
            let s = Self::random(&mut *rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        bool::from(self.0.is_zero())
    }

    pub fn invert(&self) -> Option<Self> {
        Option::from(self.0.invert()).map(Self)
    }

    pub fn square(&self) -> Self {
        Self(self.0.square())
    }

    /// 32-byte big-endian encoding.
    pub fn to_bytes(&self) -> [u8; SCALAR_LEN] {
        let mut b = self.0.to_bytes();
        b.reverse();
        b
    }

    /// Rejects values that are not fully reduced modulo r.
    pub fn from_bytes(bytes: &[u8; SCALAR_LEN]) -> Result<Self, DecodeError> {
        let mut le = *bytes;
        le.reverse();
        Option::from(bls12_381::Scalar::from_bytes(&le))
            .map(Self)
            .ok_or(DecodeError::InvalidScalar)
    }

    /// Reduce 64 uniformly random bytes (big-endian) modulo r.
    pub fn from_wide_bytes(bytes: &[u8; 64]) -> Self {
        let mut le = *bytes;
        le.reverse();
        Self(bls12_381::Scalar::from_bytes_wide(&le))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({})", hex::encode(self.to_bytes()))
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 + rhs.0)
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        self.0 += rhs.0;
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 - rhs.0)
    }
}

impl SubAssign for Scalar {
    fn sub_assign(&mut self, rhs: Scalar) {
        self.0 -= rhs.0;
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 * rhs.0)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |a, b| a + b)
    }
}

/// Element of G1, the group all commitments, pseudonyms and proofs live in.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct GroupElement(pub(crate) G1Projective);

impl GroupElement {
    pub fn identity() -> Self {
        Self(G1Projective::identity())
    }

    /// The fixed generator g of G1.
    pub fn generator() -> Self {
        Self(G1Projective::generator())
    }

    pub fn is_identity(&self) -> bool {
        bool::from(self.0.is_identity())
    }

    pub fn to_bytes(&self) -> [u8; G1_LEN] {
        self.0.to_affine().to_compressed()
    }

    pub fn from_bytes(bytes: &[u8; G1_LEN]) -> Result<Self, DecodeError> {
        // from_compressed performs both the curve and the subgroup check.
        Option::from(G1Affine::from_compressed(bytes))
            .map(|p: G1Affine| Self(p.into()))
            .ok_or(DecodeError::InvalidPoint)
    }

    /// Σ scalar_i · point_i.
    pub fn multi_mul(terms: &[(Scalar, GroupElement)]) -> Self {
        terms
            .iter()
            .fold(Self::identity(), |acc, (s, p)| acc + *p * *s)
    }

    pub(crate) fn affine(&self) -> G1Affine {
        self.0.to_affine()
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement({})", hex::encode(self.to_bytes()))
    }
}

impl Add for GroupElement {
    type Output = GroupElement;
    fn add(self, rhs: GroupElement) -> GroupElement {
        GroupElement(self.0 + rhs.0)
    }
}

impl AddAssign for GroupElement {
    fn add_assign(&mut self, rhs: GroupElement) {
        self.0 += rhs.0;
    }
}

impl Sub for GroupElement {
    type Output = GroupElement;
    fn sub(self, rhs: GroupElement) -> GroupElement {
        GroupElement(self.0 - rhs.0)
    }
}

impl Neg for GroupElement {
    type Output = GroupElement;
    fn neg(self) -> GroupElement {
        GroupElement(-self.0)
    }
}

impl Mul<Scalar> for GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: Scalar) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

impl Sum for GroupElement {
    fn sum<I: Iterator<Item = GroupElement>>(iter: I) -> GroupElement {
        iter.fold(GroupElement::identity(), |a, b| a + b)
    }
}

/// Element of G2; carries issuer public keys.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct G2Element(pub(crate) G2Projective);

impl G2Element {
    pub fn identity() -> Self {
        Self(G2Projective::identity())
    }

    pub fn generator() -> Self {
        Self(G2Projective::generator())
    }

    pub fn is_identity(&self) -> bool {
        bool::from(self.0.is_identity())
    }

    pub fn to_bytes(&self) -> [u8; G2_LEN] {
        self.0.to_affine().to_compressed()
    }

    pub fn from_bytes(bytes: &[u8; G2_LEN]) -> Result<Self, DecodeError> {
        Option::from(G2Affine::from_compressed(bytes))
            .map(|p: G2Affine| Self(p.into()))
            .ok_or(DecodeError::InvalidPoint)
    }
}

impl fmt::Debug for G2Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G2Element({})", hex::encode(self.to_bytes()))
    }
}

impl Add for G2Element {
    type Output = G2Element;
    fn add(self, rhs: G2Element) -> G2Element {
        G2Element(self.0 + rhs.0)
    }
}

impl Mul<Scalar> for G2Element {
    type Output = G2Element;
    fn mul(self, rhs: Scalar) -> G2Element {
        G2Element(self.0 * rhs.0)
    }
}

/// Element of the pairing target group GT. Only produced by [`pairing`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PairingTarget(Gt);

impl PairingTarget {
    pub fn identity() -> Self {
        Self(Gt::identity())
    }

    pub fn is_identity(&self) -> bool {
        self.0 == Gt::identity()
    }

    pub fn pow(&self, exponent: Scalar) -> Self {
        Self(self.0 * exponent.0)
    }
}

impl Mul for PairingTarget {
    type Output = PairingTarget;
    /// Group operation of GT (written additively by the backend).
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: PairingTarget) -> PairingTarget {
        PairingTarget(self.0 + rhs.0)
    }
}

pub fn pairing(a: &GroupElement, b: &G2Element) -> PairingTarget {
    PairingTarget(bls12_381::pairing(&a.affine(), &b.0.to_affine()))
}

/// Π e(a_i, b_i) with a single final exponentiation.
pub fn multi_pairing(terms: &[(GroupElement, G2Element)]) -> PairingTarget {
    let g1: Vec<G1Affine> = terms.iter().map(|(a, _)| a.affine()).collect();
    let g2: Vec<G2Prepared> = terms
        .iter()
        .map(|(_, b)| G2Prepared::from(b.0.to_affine()))
        .collect();
    let refs: Vec<(&G1Affine, &G2Prepared)> = g1.iter().zip(g2.iter()).collect();
    PairingTarget(bls12_381::multi_miller_loop(&refs).final_exponentiation())
}

fn assert_tag(domain_tag: &[u8]) {
    assert!(!domain_tag.is_empty(), "domain tag must be non-empty");
    assert!(domain_tag.len() <= 255, "domain tag longer than 255 bytes");
}

/// Hash arbitrary bytes to a scalar under a domain tag.
///
/// SHA-512 over `len(tag) || tag || input`, reduced modulo r from 64 bytes so
/// the bias is negligible.
pub fn hash_to_scalar(input: &[u8], domain_tag: &[u8]) -> Scalar {
    assert_tag(domain_tag);
    let mut h = Sha512::new();
    h.update([domain_tag.len() as u8]);
    h.update(domain_tag);
    h.update(input);
    let digest: [u8; 64] = h.finalize().into();
    Scalar::from_wide_bytes(&digest)
}

/// Hash to G1 using the hash_to_curve suite BLS12381G1_XMD:SHA-256_SSWU_RO_
/// with `domain_tag` as the DST. Nobody knows the discrete log of the output.
pub fn hash_to_group(input: &[u8], domain_tag: &[u8]) -> GroupElement {
    assert_tag(domain_tag);
    GroupElement(<G1Projective as HashToCurve<ExpandMsgXmd<sha2_09::Sha256>>>::hash_to_curve(
        input, domain_tag,
    ))
}
