//! Independent reference implementations used as test oracles, plus shared
//! fixtures. Nothing here calls the crate's own hashing or field code for
//! the values it checks.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rand::rngs::OsRng;

use eudinym::actors::{IssuerState, NymPolicy, Policy, RelyingPartyState, WalletState};
use eudinym::bbs;
use eudinym::groups::{GroupElement, Scalar};
use eudinym::prf::Scope;
use eudinym::sigma::{
    absorb_range_statement, prove_bit, range_consistency_targets, range_width, BitProof, LinearRelation,
    RangeProof, SchnorrProof, Transcript,
};

// ------------------------------------------------------------ SHA-256

const K: [u32; 64] = [
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
];

pub fn sha256(msg: &[u8]) -> [u8; 32] {
    let mut h: [u32; 8] = [
        0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19,
    ];
    let mut data = msg.to_vec();
    data.push(0x80);
    while data.len() % 64 != 56 {
        data.push(0);
    }
    data.extend_from_slice(&((msg.len() as u64) * 8).to_be_bytes());
    for block in data.chunks(64) {
        let mut w = [0u32; 64];
        for i in 0..16 {
            w[i] = u32::from_be_bytes(block[4 * i..4 * i + 4].try_into().unwrap());
        }
        for i in 16..64 {
            let s0 = w[i - 15].rotate_right(7) ^ w[i - 15].rotate_right(18) ^ (w[i - 15] >> 3);
            let s1 = w[i - 2].rotate_right(17) ^ w[i - 2].rotate_right(19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16].wrapping_add(s0).wrapping_add(w[i - 7]).wrapping_add(s1);
        }
        let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut hh] = h;
        for i in 0..64 {
            let s1 = e.rotate_right(6) ^ e.rotate_right(11) ^ e.rotate_right(25);
            let ch = (e & f) ^ (!e & g);
            let t1 = hh.wrapping_add(s1).wrapping_add(ch).wrapping_add(K[i]).wrapping_add(w[i]);
            let s0 = a.rotate_right(2) ^ a.rotate_right(13) ^ a.rotate_right(22);
            let maj = (a & b) ^ (a & c) ^ (b & c);
            let t2 = s0.wrapping_add(maj);
            hh = g;
            g = f;
            f = e;
            e = d.wrapping_add(t1);
            d = c;
            c = b;
            b = a;
            a = t1.wrapping_add(t2);
        }
        for (x, y) in h.iter_mut().zip([a, b, c, d, e, f, g, hh]) {
            *x = x.wrapping_add(y);
        }
    }
    let mut out = [0u8; 32];
    for (i, word) in h.iter().enumerate() {
        out[4 * i..4 * i + 4].copy_from_slice(&word.to_be_bytes());
    }
    out
}

pub fn hmac_sha256(key: &[u8], msg: &[u8]) -> [u8; 32] {
    let mut k = [0u8; 64];
    if key.len() > 64 {
        k[..32].copy_from_slice(&sha256(key));
    } else {
        k[..key.len()].copy_from_slice(key);
    }
    let mut inner: Vec<u8> = k.iter().map(|b| b ^ 0x36).collect();
    inner.extend_from_slice(msg);
    let mut outer: Vec<u8> = k.iter().map(|b| b ^ 0x5c).collect();
    outer.extend_from_slice(&sha256(&inner));
    sha256(&outer)
}

/// `len(scope) as u32 BE || scope || idx as u64 BE`, written out by hand.
pub fn prf_input(scope: &str, idx: u64) -> Vec<u8> {
    let mut v = (scope.len() as u32).to_be_bytes().to_vec();
    v.extend_from_slice(scope.as_bytes());
    v.extend_from_slice(&idx.to_be_bytes());
    v
}

// ------------------------------------------------------------ scalar field

pub fn group_order() -> BigUint {
    BigUint::parse_bytes(b"73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001", 16).unwrap()
}

pub fn to_big(s: &Scalar) -> BigUint {
    BigUint::from_bytes_be(&s.to_bytes())
}

pub fn from_big(v: &BigUint) -> Scalar {
    let bytes = (v % group_order()).to_bytes_be();
    let mut out = [0u8; 32];
    out[32 - bytes.len()..].copy_from_slice(&bytes);
    Scalar::from_bytes(&out).unwrap()
}

/// Modular inverse by the extended Euclidean algorithm over BigUint.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    use num_bigint::BigInt;
    let (mut old_r, mut r) = (BigInt::from(a.clone()), BigInt::from(m.clone()));
    let (mut old_s, mut s) = (BigInt::from(1u8), BigInt::from(0u8));
    while r != BigInt::from(0u8) {
        let q = &old_r / &r;
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
    }
    if old_r != BigInt::from(1u8) {
        return None;
    }
    let m = BigInt::from(m.clone());
    Some((((old_s % &m) + &m) % &m).to_biguint().unwrap())
}

// ------------------------------------------------------------ sigma helpers

/// Two accepting transcripts sharing one commitment, for the fork extractor.
/// A challenge together with the responses it produced.
pub type Answer = (Scalar, Vec<Scalar>);

pub fn fork(rel: &LinearRelation, witness: &[Scalar]) -> (Vec<GroupElement>, Answer, Answer) {
    let nonces: Vec<Scalar> = (0..rel.var_count()).map(|_| Scalar::random(&mut OsRng)).collect();
    let t = rel.commit(&nonces);
    let c1 = Scalar::random(&mut OsRng);
    let mut c2 = Scalar::random(&mut OsRng);
    while c2 == c1 {
        c2 = Scalar::random(&mut OsRng);
    }
    let z1 = rel.respond(witness, &nonces, c1);
    let z2 = rel.respond(witness, &nonces, c2);
    (t, (c1, z1), (c2, z2))
}

/// Special-soundness extractor: `w = (z1 - z2) / (c1 - c2)`.
pub fn extract(c1: Scalar, z1: &[Scalar], c2: Scalar, z2: &[Scalar]) -> Vec<Scalar> {
    let inv = (c1 - c2).invert().expect("distinct challenges");
    z1.iter().zip(z2).map(|(a, b)| (*a - *b) * inv).collect()
}

/// A Fiat-Shamir proof computed with whatever witness the caller has, valid
/// or not. Mirrors the honest prover's transcript handling without its
/// satisfiability check.
pub fn forge_fs(rel: &LinearRelation, witness: &[Scalar], transcript: &mut Transcript) -> SchnorrProof {
    let nonces: Vec<Scalar> = (0..rel.var_count()).map(|_| Scalar::random(&mut OsRng)).collect();
    let commitments = rel.commit(&nonces);
    rel.absorb_statement(transcript);
    for t in &commitments {
        transcript.append_point("commitment", t);
    }
    let challenge = transcript.challenge("challenge");
    let responses = rel.respond(witness, &nonces, challenge);
    SchnorrProof {
        commitments,
        challenge,
        responses,
    }
}

fn pow2(i: usize) -> Scalar {
    Scalar::from_u64(1u64 << i)
}

/// Adversarial range prover for an out-of-range index: commits to the chosen
/// bit patterns with honest bit proofs and forges the consistency proofs from
/// the only witnesses it has.
pub fn forge_range(
    commitment: GroupElement,
    randomness: Scalar,
    bound: u64,
    lower_pattern: u64,
    upper_pattern: u64,
    context: &[u8],
) -> RangeProof {
    let g = GroupElement::generator();
    let h = eudinym::commitments::pedersen_h();
    let width = range_width(bound);
    let commit_bits = |value: u64| -> (Vec<GroupElement>, Vec<(u64, Scalar)>) {
        (0..width)
            .map(|i| {
                let bit = (value >> i) & 1;
                let r = Scalar::random(&mut OsRng);
                (g * Scalar::from_u64(bit) + h * r, (bit, r))
            })
            .unzip()
    };
    let (lower_bits, lower_blinds) = commit_bits(lower_pattern);
    let (upper_bits, upper_blinds) = commit_bits(upper_pattern);
    let mut t = Transcript::new(context);
    absorb_range_statement(&mut t, &commitment, bound, &lower_bits, &upper_bits);
    let bits = |cs: &[GroupElement], bl: &[(u64, Scalar)], t: &mut Transcript| -> Vec<BitProof> {
        cs.iter()
            .zip(bl)
            .map(|(c, (b, r))| prove_bit(*b, *c, *r, t, &mut OsRng).unwrap())
            .collect()
    };
    let lower_or = bits(&lower_bits, &lower_blinds, &mut t);
    let upper_or = bits(&upper_bits, &upper_blinds, &mut t);
    let weighted = |bl: &[(u64, Scalar)]| -> Scalar { bl.iter().enumerate().map(|(i, (_, r))| *r * pow2(i)).sum() };
    let (lt, ut) = range_consistency_targets(commitment, bound, &lower_bits, &upper_bits);
    let dlog = |target| {
        let mut rel = LinearRelation::new("dlog", 1);
        rel.equation(vec![(0, h)], target);
        rel
    };
    let lower_consistency = forge_fs(&dlog(lt), &[randomness - weighted(&lower_blinds)], &mut t);
    let upper_consistency = forge_fs(&dlog(ut), &[-randomness - weighted(&upper_blinds)], &mut t);
    RangeProof {
        lower_bits,
        upper_bits,
        lower_or,
        upper_or,
        lower_consistency,
        upper_consistency,
    }
}

// ------------------------------------------------------------ fixtures

pub fn attrs() -> BTreeMap<String, Vec<u8>> {
    BTreeMap::from([
        ("age_over_18".to_string(), b"true".to_vec()),
        ("expiry".to_string(), b"2030-01-01".to_vec()),
    ])
}

pub fn new_issuer() -> IssuerState {
    IssuerState::new(bbs::keygen(&["age_over_18", "expiry"], &mut OsRng).unwrap())
}

pub fn enroll(issuer: &mut IssuerState, wallet: &mut WalletState, holder: &str) {
    let req = wallet.enroll_request(&issuer.keypair.public, &mut OsRng);
    let sig = issuer.enroll(holder, &req, &attrs(), 0).unwrap();
    wallet.enroll_finish(&sig).unwrap();
}

pub fn new_rp(issuer: &IssuerState, scope: &str, nym: NymPolicy) -> RelyingPartyState {
    RelyingPartyState::new(
        Scope::new(scope).unwrap(),
        Policy {
            nym,
            required_disclosures: Default::default(),
        },
        issuer.keypair.public.clone(),
    )
}
