//! Deterministic test vectors for cross-implementation checks.
//!
//! Output is plain text, one `suite.case.field = hex-or-text` line per value,
//! generated from fixed ChaCha20 seeds so every run on every platform yields
//! the same bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_core::RngCore;

use crate::bbs::{self, PresentationMode};
use crate::codec::{Encode, Record};
use crate::commitments::{commit_hash, commit_pedersen, PseudonymSeed, SeedCommitment};
use crate::groups::{GroupElement, Scalar};
use crate::prf::{self, Index, Scope};
use crate::sigma::{self, Transcript};

pub const CASES: usize = 8;

/// Session context used by every proof vector.
pub const PROOF_CONTEXT: &[u8] = b"eudinym-test-vectors";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Commitments,
    Hmac,
    HashDh,
    Dy,
    Proofs,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Commitments, Suite::Hmac, Suite::HashDh, Suite::Dy, Suite::Proofs];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Commitments => "commitments",
            Suite::Hmac => "hmac",
            Suite::HashDh => "hashdh",
            Suite::Dy => "dy",
            Suite::Proofs => "proofs",
        }
    }

    fn rng(self) -> ChaCha20Rng {
        let mut seed = [0u8; 32];
        seed[..self.name().len()].copy_from_slice(self.name().as_bytes());
        ChaCha20Rng::from_seed(seed)
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| format!("unknown suite {s:?}"))
    }
}

struct Out {
    suite: &'static str,
    text: String,
}

impl Out {
    fn line(&mut self, case: usize, field: &str, value: impl AsRef<str>) {
        writeln!(self.text, "{}.{}.{} = {}", self.suite, case, field, value.as_ref()).unwrap();
    }

    fn hex(&mut self, case: usize, field: &str, bytes: impl AsRef<[u8]>) {
        self.line(case, field, hex::encode(bytes));
    }
}

fn test_seed(rng: &mut ChaCha20Rng) -> PseudonymSeed {
    let mut s = [0u8; 32];
    rng.fill_bytes(&mut s);
    PseudonymSeed::from_secret(s)
}

fn test_scope(case: usize) -> Scope {
    Scope::new(format!("rp-{case}.example")).unwrap()
}

pub fn generate(suite: Suite) -> String {
    let mut out = Out {
        suite: suite.name(),
        text: format!("# eudinym test vectors: {}\n", suite.name()),
    };
    let mut rng = suite.rng();
    match suite {
        Suite::Commitments => commitments(&mut out, &mut rng),
        Suite::Hmac => hmac(&mut out, &mut rng),
        Suite::HashDh => hashdh(&mut out, &mut rng),
        Suite::Dy => dy(&mut out, &mut rng),
        Suite::Proofs => proofs(&mut out, &mut rng),
    }
    out.text
}

fn commitments(out: &mut Out, rng: &mut ChaCha20Rng) {
    for case in 0..CASES {
        let seed = test_seed(rng);
        let mut nonce = [0u8; 32];
        rng.fill_bytes(&mut nonce);
        let nonce_scalar = Scalar::random(&mut *rng);
        out.hex(case, "seed", seed.secret());
        out.hex(case, "nonce", nonce);
        out.hex(case, "hash_commitment", commit_hash(&seed, &nonce).to_bytes());
        out.hex(case, "seed_scalar", seed.scalar().to_bytes());
        out.hex(case, "pedersen_nonce", nonce_scalar.to_bytes());
        out.hex(case, "pedersen_commitment", commit_pedersen(seed.scalar(), nonce_scalar).to_bytes());
    }
}

fn hmac(out: &mut Out, rng: &mut ChaCha20Rng) {
    for case in 0..CASES {
        let seed = test_seed(rng);
        let scope = test_scope(case);
        let idx = Index(case as u64);
        out.hex(case, "seed", seed.secret());
        out.line(case, "scope", scope.as_str());
        out.line(case, "index", idx.0.to_string());
        out.hex(case, "prf_input", prf::encode_prf_input(&scope, idx));
        out.hex(case, "nym", prf::hmac_nym(&seed, &scope, idx).value_bytes());
    }
}

fn hashdh(out: &mut Out, rng: &mut ChaCha20Rng) {
    for case in 0..CASES {
        let seed = test_seed(rng);
        let scope = test_scope(case);
        let idx = Index(case as u64 + 1);
        out.hex(case, "seed_scalar", seed.scalar().to_bytes());
        out.line(case, "scope", scope.as_str());
        out.line(case, "index", idx.0.to_string());
        out.hex(case, "base", prf::hashdh_base(&scope, idx).to_bytes());
        out.hex(case, "nym", prf::hashdh_nym(seed.scalar(), &scope, idx).unwrap().value_bytes());
    }
}

fn dy(out: &mut Out, rng: &mut ChaCha20Rng) {
    for case in 0..CASES {
        let seed = test_seed(rng);
        let scope = test_scope(case);
        let idx = Index(case as u64 + 1);
        out.hex(case, "seed_scalar", seed.scalar().to_bytes());
        out.line(case, "scope", scope.as_str());
        out.line(case, "index", idx.0.to_string());
        out.hex(case, "base", prf::dy_base(&scope).to_bytes());
        out.hex(case, "nym", prf::dy_nym(seed.scalar(), &scope, idx).unwrap().value_bytes());
    }
}

fn proofs(out: &mut Out, rng: &mut ChaCha20Rng) {
    let g = GroupElement::generator();
    for case in 0..CASES {
        let w = Scalar::random(&mut *rng);
        let public = g * w;
        let proof = sigma::prove_dlog(w, g, public, &mut Transcript::new(PROOF_CONTEXT), rng).unwrap();
        out.hex(case, "dlog_public", public.to_bytes());
        out.hex(case, "dlog_proof", proof.to_bytes());

        let (s, n) = (Scalar::random(&mut *rng), Scalar::random(&mut *rng));
        let c = commit_pedersen(s, n);
        let proof =
            sigma::prove_pedersen_opening(s, n, &c, &mut Transcript::new(PROOF_CONTEXT), rng).unwrap();
        out.hex(case, "pedersen_commitment", c.to_bytes());
        out.hex(case, "pedersen_proof", proof.to_bytes());

        let bound = Index(8);
        let idx = Index(case as u64 + 1);
        let rho = Scalar::random(&mut *rng);
        let SeedCommitment::Pedersen(ci) = commit_pedersen(idx.scalar(), rho) else { unreachable!() };
        let range = sigma::prove_range(idx, ci, rho, bound, &mut Transcript::new(PROOF_CONTEXT), rng).unwrap();
        out.line(case, "range_bound", bound.0.to_string());
        out.hex(case, "range_commitment", ci.to_bytes());
        out.hex(case, "range_proof", range.to_bytes());
    }

    // Full presentations from one deterministic issuer and wallet.
    let issuer = bbs::keygen(&["age_over_18", "expiry"], rng).unwrap();
    let seed = test_seed(rng);
    let device = Scalar::random(&mut *rng);
    let (req, state) = bbs::blind_issuance_request(&seed, device, &issuer.public, rng);
    let attrs = BTreeMap::from([
        ("age_over_18".to_string(), b"true".to_vec()),
        ("expiry".to_string(), b"2030-01-01".to_vec()),
    ]);
    let sig = bbs::blind_sign(&issuer, &req, &attrs).unwrap();
    let cred = bbs::unblind(&issuer.public, &sig, &state, &seed, device).unwrap();
    out.hex(CASES, "issuer_public", issuer.public.to_record());
    out.hex(CASES, "credential", cred.to_record());
    let disclose = BTreeSet::from(["age_over_18".to_string()]);
    let modes = [
        ("hashdh", PresentationMode::HashDh, Index(1)),
        ("dy", PresentationMode::DyRateLimited { bound: Index(4) }, Index(3)),
    ];
    for (name, mode, idx) in modes {
        let scope = test_scope(CASES);
        let p = bbs::present(&issuer.public, &cred, &disclose, &scope, idx, mode, PROOF_CONTEXT, rng).unwrap();
        out.line(CASES, &format!("{name}_scope"), scope.as_str());
        out.hex(CASES, &format!("{name}_presentation"), p.to_record());
    }
}

/// Parse vector text back into `field path → value`.
pub fn parse(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect()
}
