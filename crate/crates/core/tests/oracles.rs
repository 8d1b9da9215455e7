mod common;

use common::*;
use eudinym::commitments::{commit_hash, hash_commitment_input, PseudonymSeed, SeedCommitment};
use eudinym::groups::Scalar;
use eudinym::prf::{self, dy_base, Index, Scope};
use rand::{rngs::OsRng, Rng, RngCore};

#[test]
fn sha256_oracle_known_answers() {
    assert_eq!(
        hex::encode(sha256(b"")),
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    );
    assert_eq!(
        hex::encode(sha256(b"abc")),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
    assert_eq!(
        hex::encode(sha256(b"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")),
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1"
    );
}

#[test]
fn hmac_oracle_matches_rfc4231() {
    assert_eq!(
        hex::encode(hmac_sha256(&[0x0b; 20], b"Hi There")),
        "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7"
    );
    assert_eq!(
        hex::encode(hmac_sha256(b"Jefe", b"what do ya want for nothing?")),
        "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843"
    );
}

#[test]
fn hmac_nym_matches_oracle() {
    for i in 0..200u64 {
        let seed = PseudonymSeed::generate(&mut OsRng);
        let scope = format!("rp-{}.example", OsRng.gen::<u32>());
        let idx = if i < 4 { i } else { OsRng.gen() };
        let nym = prf::hmac_nym(&seed, &Scope::new(scope.clone()).unwrap(), Index(idx));
        assert_eq!(nym.value_bytes(), hmac_sha256(seed.secret(), &prf_input(&scope, idx)));
    }
}

#[test]
fn hash_commitment_matches_oracle() {
    for _ in 0..100 {
        let seed = PseudonymSeed::generate(&mut OsRng);
        let mut nonce = [0u8; 32];
        OsRng.fill_bytes(&mut nonce);
        let mut input = 32u32.to_be_bytes().to_vec();
        input.extend_from_slice(seed.secret());
        input.extend_from_slice(&32u32.to_be_bytes());
        input.extend_from_slice(&nonce);
        assert_eq!(hash_commitment_input(&seed, &nonce), input);
        assert_eq!(commit_hash(&seed, &nonce), SeedCommitment::Hash(sha256(&input)));
    }
}

#[test]
fn dy_nym_matches_modular_inverse_oracle() {
    let r = group_order();
    for i in 0..150u64 {
        let s = Scalar::random(&mut OsRng);
        let scope = Scope::new(format!("scope-{i}")).unwrap();
        let idx = 1 + OsRng.gen_range(0..1000u64);
        let inv = mod_inverse(&((to_big(&s) + idx) % &r), &r).unwrap();
        let expected = dy_base(&scope) * from_big(&inv);
        let nym = prf::dy_nym(s, &scope, Index(idx)).unwrap();
        assert_eq!(nym.group_element(), Some(expected));
    }
}

#[test]
fn dy_degenerate_input_has_no_inverse() {
    let r = group_order();
    // seed = -idx makes seed + idx = 0
    let s = from_big(&(&r - 5u32));
    assert!(mod_inverse(&((to_big(&s) + 5u32) % &r), &r).is_none());
    assert!(prf::dy_nym(s, &Scope::new("x").unwrap(), Index(5)).is_err());
}

#[test]
fn scalar_encoding_agrees_with_bigint() {
    let r = group_order();
    for _ in 0..100 {
        let (a, b) = (Scalar::random(&mut OsRng), Scalar::random(&mut OsRng));
        assert_eq!(to_big(&(a * b)), (to_big(&a) * to_big(&b)) % &r);
        assert_eq!(to_big(&(a + b)), (to_big(&a) + to_big(&b)) % &r);
        assert_eq!(from_big(&to_big(&a)), a);
    }
    let mut r_bytes = [0u8; 32];
    let rb = r.to_bytes_be();
    r_bytes[32 - rb.len()..].copy_from_slice(&rb);
    assert!(Scalar::from_bytes(&r_bytes).is_err());
}

#[test]
fn epoch_index_boundaries() {
    use prf::{epoch_index, EpochGranularity};
    assert_eq!(epoch_index(0, EpochGranularity::Day), Index(0));
    assert_eq!(epoch_index(86_399, EpochGranularity::Day), Index(0));
    assert_eq!(epoch_index(86_400, EpochGranularity::Day), Index(1));
    assert_eq!(epoch_index(7 * 86_400, EpochGranularity::Week), Index(1));
}
