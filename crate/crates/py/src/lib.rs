//! Python bindings. Every object round-trips through the same framed records
//! the command-line tool writes, so files are interchangeable.

use std::collections::{BTreeMap, BTreeSet};

use eudinym::actors::{
    AccountStatus, IssuerState, NymMode, NymPolicy, Policy, RelyingPartyInfo, RelyingPartyState, WalletState,
};
use eudinym::bbs::{self, BlindIssuanceRequest, BlindSignature, IssuerPublicKey, PresentationProof};
use eudinym::codec::Record;
use eudinym::commitments::PseudonymSeed;
use eudinym::prf::{self, Index, Scope};
use eudinym::transfer::{self, BackupBlob, TransferPackage, TransferPublicKey, TransferSecretKey};
use eudinym::vectors::{self, Suite};
use eudinym::Error;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use rand::rngs::OsRng;

create_exception!(eudinym_py, EudinymError, PyException, "Protocol failure; the message starts with the error class.");

fn fail(e: impl Into<Error>) -> PyErr {
    let e = e.into();
    EudinymError::new_err(format!("{}: {e}", e.class()))
}

fn usage(msg: impl Into<String>) -> PyErr {
    fail(Error::Usage(msg.into()))
}

fn decode<T: Record>(data: &[u8]) -> PyResult<T> {
    T::from_record(data).map_err(fail)
}

fn bytes<'py>(py: Python<'py>, data: &[u8]) -> Bound<'py, PyBytes> {
    PyBytes::new(py, data)
}

type LedgerRow<'py> = (String, u64, &'static str, Bound<'py, PyBytes>);
type Decision = (&'static str, String, BTreeMap<String, Vec<u8>>);

fn scope(s: &str) -> PyResult<Scope> {
    Scope::new(s).map_err(fail)
}

fn nym_mode(mode: &str) -> PyResult<NymMode> {
    match mode {
        "hmac" => Ok(NymMode::Hmac),
        "hashdh" => Ok(NymMode::HashDh),
        "dy" => Ok(NymMode::Dy),
        other => Err(usage(format!("unknown pseudonym mode {other:?}"))),
    }
}

#[pyclass(module = "eudinym_py")]
struct Issuer {
    state: IssuerState,
}

#[pymethods]
impl Issuer {
    #[new]
    fn new(attributes: Vec<String>) -> PyResult<Self> {
        let names: Vec<&str> = attributes.iter().map(String::as_str).collect();
        let keypair = bbs::keygen(&names, &mut OsRng).map_err(fail)?;
        Ok(Self {
            state: IssuerState::new(keypair),
        })
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        Ok(Self { state: decode(data)? })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        bytes(py, &self.state.to_record())
    }

    fn public_key<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        bytes(py, &self.state.keypair.public.to_record())
    }

    /// Check a blind request and sign it together with the clear attributes.
    #[pyo3(signature = (holder, request, attributes, now = 0))]
    fn enroll<'py>(
        &mut self,
        py: Python<'py>,
        holder: &str,
        request: &[u8],
        attributes: BTreeMap<String, Vec<u8>>,
        now: u64,
    ) -> PyResult<Bound<'py, PyBytes>> {
        let req: BlindIssuanceRequest = decode(request)?;
        let sig = self.state.enroll(holder, &req, &attributes, now).map_err(fail)?;
        Ok(bytes(py, &sig.to_record()))
    }

    #[getter]
    fn holders(&self) -> Vec<String> {
        self.state.enrollment_ledger.keys().cloned().collect()
    }
}

#[pyclass(module = "eudinym_py")]
struct Wallet {
    state: WalletState,
}

#[pymethods]
impl Wallet {
    #[new]
    fn new() -> Self {
        Self {
            state: WalletState::new(&mut OsRng),
        }
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        Ok(Self { state: decode(data)? })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        bytes(py, &self.state.to_record())
    }

    fn enroll_request<'py>(&mut self, py: Python<'py>, issuer_public: &[u8]) -> PyResult<Bound<'py, PyBytes>> {
        let public: IssuerPublicKey = decode(issuer_public)?;
        Ok(bytes(py, &self.state.enroll_request(&public, &mut OsRng).to_record()))
    }

    fn enroll_finish(&mut self, response: &[u8]) -> PyResult<()> {
        let sig: BlindSignature = decode(response)?;
        self.state.enroll_finish(&sig).map_err(fail)
    }

    #[getter]
    fn credential_count(&self) -> usize {
        self.state.credentials.len()
    }

    /// Derive a pseudonym and record it in the ledger under `label`.
    #[pyo3(signature = (scope_name, index, mode = "hashdh", label = ""))]
    fn nym<'py>(
        &mut self,
        py: Python<'py>,
        scope_name: &str,
        index: u64,
        mode: &str,
        label: &str,
    ) -> PyResult<Bound<'py, PyBytes>> {
        let (scp, mode) = (scope(scope_name)?, nym_mode(mode)?);
        let nym = if self.state.credentials.is_empty() {
            self.state.derive(&scp, Index(index), mode)
        } else {
            self.state.register_pseudonym(&scp, Index(index), mode, label)
        }
        .map_err(fail)?;
        Ok(bytes(py, &nym.value_bytes()))
    }

    /// Ledger entries as `(scope, index, mode, pseudonym)`.
    fn pseudonyms<'py>(&self, py: Python<'py>) -> PyResult<Vec<LedgerRow<'py>>> {
        let entries = self.state.pseudonyms().map_err(fail)?;
        Ok(entries
            .into_iter()
            .map(|(k, nym)| {
                let mode = match k.mode {
                    NymMode::Hmac => "hmac",
                    NymMode::HashDh => "hashdh",
                    NymMode::Dy => "dy",
                };
                (k.scope.as_str().to_owned(), k.index.0, mode, bytes(py, &nym.value_bytes()))
            })
            .collect())
    }

    /// Build a presentation for the relying party described by `rp_info`.
    /// Without `context` the party's default session context is used.
    #[pyo3(signature = (rp_info, index, disclose = Vec::new(), context = None, now = 0))]
    fn present<'py>(
        &mut self,
        py: Python<'py>,
        rp_info: &[u8],
        index: u64,
        disclose: Vec<String>,
        context: Option<Vec<u8>>,
        now: u64,
    ) -> PyResult<Bound<'py, PyBytes>> {
        let info: RelyingPartyInfo = decode(rp_info)?;
        let ctx = context.unwrap_or_else(|| info.default_context().to_vec());
        let disclose: BTreeSet<String> = disclose.into_iter().collect();
        let proof = self
            .state
            .present(
                &info.issuer_public,
                &info.scope,
                Index(index),
                info.policy.nym.presentation_mode(),
                &disclose,
                &ctx,
                now,
                &mut OsRng,
            )
            .map_err(fail)?;
        Ok(bytes(py, &proof.to_record()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Wallet(credentials={}, pseudonyms={})",
            self.state.credentials.len(),
            self.state.ledger.len()
        )
    }
}

#[pyclass(module = "eudinym_py")]
struct RelyingParty {
    state: RelyingPartyState,
}

#[pymethods]
impl RelyingParty {
    /// `mode` is "hashdh" (optionally bounded) or "dy" (bound required).
    #[new]
    #[pyo3(signature = (scope_name, issuer_public, mode = "hashdh", bound = None, require = Vec::new()))]
    fn new(scope_name: &str, issuer_public: &[u8], mode: &str, bound: Option<u64>, require: Vec<String>) -> PyResult<Self> {
        let nym = match (mode, bound) {
            ("hashdh", b) => NymPolicy::HashDh { bound: b.map(Index) },
            ("dy", Some(b)) => NymPolicy::DyRateLimited { bound: Index(b) },
            ("dy", None) => return Err(usage("dy policy needs a bound")),
            (other, _) => return Err(usage(format!("unknown policy mode {other:?}"))),
        };
        let policy = Policy {
            nym,
            required_disclosures: require.into_iter().collect(),
        };
        Ok(Self {
            state: RelyingPartyState::new(scope(scope_name)?, policy, decode(issuer_public)?),
        })
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        Ok(Self { state: decode(data)? })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        bytes(py, &self.state.to_record())
    }

    fn info<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        bytes(py, &self.state.info().to_record())
    }

    fn default_context<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        bytes(py, &self.state.default_context())
    }

    #[getter]
    fn account_count(&self) -> usize {
        self.state.registry.len()
    }

    /// Returns `(status, account_label, disclosed_attributes)` where status
    /// is "new" or "returning".
    #[pyo3(signature = (presentation, context = None, now = 0))]
    fn authenticate(
        &mut self,
        presentation: &[u8],
        context: Option<Vec<u8>>,
        now: u64,
    ) -> PyResult<Decision> {
        let proof: PresentationProof = decode(presentation)?;
        let ctx = context.unwrap_or_else(|| self.state.default_context().to_vec());
        let d = self.state.authenticate(&proof, &ctx, now).map_err(fail)?;
        let status = match d.status {
            AccountStatus::New => "new",
            AccountStatus::Returning => "returning",
        };
        Ok((status, d.record.label, d.disclosed))
    }
}

/// Keyed pseudonym for a 32-byte seed.
#[pyfunction]
fn hmac_nym<'py>(py: Python<'py>, seed: [u8; 32], scope_name: &str, index: u64) -> PyResult<Bound<'py, PyBytes>> {
    let nym = prf::hmac_nym(&PseudonymSeed::from_secret(seed), &scope(scope_name)?, Index(index));
    Ok(bytes(py, &nym.value_bytes()))
}

/// Deterministic test vectors for one suite, as text.
#[pyfunction]
fn test_vectors(suite: &str) -> PyResult<String> {
    let suite: Suite = suite.parse().map_err(|_| usage(format!("unknown suite {suite:?}")))?;
    Ok(vectors::generate(suite))
}

/// `(secret_record, public_record)` for a new transfer key.
#[pyfunction]
fn transfer_keygen<'py>(py: Python<'py>) -> (Bound<'py, PyBytes>, Bound<'py, PyBytes>) {
    let sk = TransferSecretKey::generate(&mut OsRng);
    (bytes(py, &sk.to_record()), bytes(py, &sk.public().to_record()))
}

#[pyfunction]
fn export_wallet<'py>(py: Python<'py>, wallet: &Wallet, target_public: &[u8]) -> PyResult<Bound<'py, PyBytes>> {
    let target: TransferPublicKey = decode(target_public)?;
    let pkg = transfer::export_to_target(&wallet.state, &target, &mut OsRng).map_err(fail)?;
    Ok(bytes(py, &pkg.to_record()))
}

#[pyfunction]
fn import_wallet(package: &[u8], secret: &[u8]) -> PyResult<Wallet> {
    let pkg: TransferPackage = decode(package)?;
    let sk: TransferSecretKey = decode(secret)?;
    let state = transfer::import_from_package(&pkg, &sk, &mut OsRng).map_err(fail)?;
    Ok(Wallet { state })
}

#[pyfunction]
fn backup_wallet<'py>(py: Python<'py>, wallet: &Wallet, passphrase: &str) -> PyResult<Bound<'py, PyBytes>> {
    let blob = transfer::backup(&wallet.state, passphrase, &mut OsRng).map_err(fail)?;
    Ok(bytes(py, &blob.to_record()))
}

#[pyfunction]
fn restore_wallet(blob: &[u8], passphrase: &str) -> PyResult<Wallet> {
    let blob: BackupBlob = decode(blob)?;
    let state = transfer::restore(&blob, passphrase, &mut OsRng).map_err(fail)?;
    Ok(Wallet { state })
}

/// Error class → CLI exit code.
#[pyfunction]
fn exit_codes() -> BTreeMap<&'static str, i32> {
    eudinym::error::EXIT_CODES.iter().map(|(code, class)| (*class, *code)).collect()
}

#[pymodule]
fn eudinym_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("EudinymError", m.py().get_type::<EudinymError>())?;
    m.add_class::<Issuer>()?;
    m.add_class::<Wallet>()?;
    m.add_class::<RelyingParty>()?;
    m.add_function(wrap_pyfunction!(hmac_nym, m)?)?;
    m.add_function(wrap_pyfunction!(test_vectors, m)?)?;
    m.add_function(wrap_pyfunction!(transfer_keygen, m)?)?;
    m.add_function(wrap_pyfunction!(export_wallet, m)?)?;
    m.add_function(wrap_pyfunction!(import_wallet, m)?)?;
    m.add_function(wrap_pyfunction!(backup_wallet, m)?)?;
    m.add_function(wrap_pyfunction!(restore_wallet, m)?)?;
    m.add_function(wrap_pyfunction!(exit_codes, m)?)?;
    Ok(())
}
