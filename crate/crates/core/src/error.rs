//! Crate-wide error type and the stable exit codes the command-line tool
//! reports for each error class.

use thiserror::Error;

use crate::actors::ActorError;
use crate::bbs::BbsError;
use crate::codec::DecodeError;
use crate::prf::PrfError;
use crate::transfer::TransferError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Actor(#[from] ActorError),
    #[error(transparent)]
    Bbs(#[from] BbsError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error(transparent)]
    Prf(#[from] PrfError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("{0}")]
    Usage(String),
}

/// `(code, class)` for every failure the CLI can report. Codes never change
/// meaning once published.
pub const EXIT_CODES: &[(i32, &str)] = &[
    (1, "usage"),
    (10, "io"),
    (11, "malformed-file"),
    (12, "state-exists"),
    (13, "state-locked"),
    (20, "bad-request"),
    (21, "seed-conflict"),
    (22, "issuance-failed"),
    (23, "no-pending-enrollment"),
    (24, "no-credential"),
    (30, "presentation-failed"),
    (31, "seed-disclosure"),
    (32, "unknown-attribute"),
    (33, "index-out-of-range"),
    (40, "scope-mismatch"),
    (41, "context-mismatch"),
    (42, "missing-range-proof"),
    (43, "range-violation"),
    (44, "bound-mismatch"),
    (45, "invalid-proof"),
    (46, "pairing-check-failed"),
    (47, "policy-mismatch"),
    (48, "missing-disclosure"),
    (49, "malformed-presentation"),
    (50, "invalid-transfer-key"),
    (51, "binding-mismatch"),
    (52, "authentication-failed"),
    (53, "unsupported-version"),
    (54, "weak-passphrase"),
    (55, "kdf-parameters"),
    (60, "invalid-scope"),
];

pub fn exit_code_for(class: &str) -> i32 {
    EXIT_CODES
        .iter()
        .find(|(_, c)| *c == class)
        .map(|(code, _)| *code)
        .unwrap_or_else(|| panic!("unknown error class {class}"))
}

fn bbs_class(e: &BbsError) -> &'static str {
    match e {
        BbsError::InvalidSchema(_) => "usage",
        BbsError::InvalidRequest(_) => "bad-request",
        BbsError::AttributeMismatch | BbsError::InvalidSignature => "issuance-failed",
        BbsError::SeedDisclosure | BbsError::DeviceDisclosure => "seed-disclosure",
        BbsError::UnknownAttribute(_) => "unknown-attribute",
        BbsError::OutOfRange { .. } => "index-out-of-range",
        BbsError::Prf(_) => "invalid-scope",
        BbsError::ScopeMismatch { .. } => "scope-mismatch",
        BbsError::ContextMismatch => "context-mismatch",
        BbsError::MissingRangeProof => "missing-range-proof",
        BbsError::RangeViolation { .. } => "range-violation",
        BbsError::BoundMismatch { .. } => "bound-mismatch",
        BbsError::InvalidProof(_) => "invalid-proof",
        BbsError::PairingCheckFailed => "pairing-check-failed",
        BbsError::Malformed(_) => "malformed-presentation",
    }
}

impl Error {
    pub fn class(&self) -> &'static str {
        match self {
            Error::Usage(_) => "usage",
            Error::Decode(_) => "malformed-file",
            Error::Prf(_) => "invalid-scope",
            Error::Bbs(e) => bbs_class(e),
            Error::Transfer(e) => match e {
                TransferError::InvalidPublicKey => "invalid-transfer-key",
                TransferError::BindingMismatch => "binding-mismatch",
                TransferError::Authentication => "authentication-failed",
                TransferError::UnsupportedVersion(_) => "unsupported-version",
                TransferError::WeakPassphrase => "weak-passphrase",
                TransferError::KdfParams => "kdf-parameters",
                TransferError::Payload(_) => "malformed-file",
            },
            Error::Actor(e) => match e {
                ActorError::BadRequest(_) => "bad-request",
                ActorError::SeedConflict { .. } => "seed-conflict",
                ActorError::Issuance(_) => "issuance-failed",
                ActorError::NoPendingIssuance => "no-pending-enrollment",
                ActorError::NoCredential => "no-credential",
                ActorError::Presentation(inner) => match inner {
                    BbsError::SeedDisclosure
                    | BbsError::DeviceDisclosure
                    | BbsError::UnknownAttribute(_)
                    | BbsError::OutOfRange { .. } => bbs_class(inner),
                    _ => "presentation-failed",
                },
                ActorError::Rejected(inner) => bbs_class(inner),
                ActorError::PolicyMismatch { .. } => "policy-mismatch",
                ActorError::MissingDisclosure(_) => "missing-disclosure",
                ActorError::Prf(_) => "invalid-scope",
                ActorError::Decode { source, .. } => match source {
                    DecodeError::UnsupportedVersion(_) => "unsupported-version",
                    _ => "malformed-file",
                },
                ActorError::StateExists { .. } => "state-exists",
                ActorError::Locked { .. } => "state-locked",
                ActorError::Io { .. } => "io",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        exit_code_for(self.class())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn codes_and_classes_are_unique_and_nonzero() {
        let codes: HashSet<_> = EXIT_CODES.iter().map(|(c, _)| *c).collect();
        let classes: HashSet<_> = EXIT_CODES.iter().map(|(_, c)| *c).collect();
        assert_eq!(codes.len(), EXIT_CODES.len());
        assert_eq!(classes.len(), EXIT_CODES.len());
        assert!(!codes.contains(&0));
        // clap reports argument errors with 2
        assert!(!codes.contains(&2));
    }

    #[test]
    fn scope_mismatch_maps_the_same_from_every_layer() {
        let e = BbsError::ScopeMismatch {
            expected: "a".into(),
            found: "b".into(),
        };
        assert_eq!(Error::from(e.clone()).exit_code(), 40);
        assert_eq!(Error::from(ActorError::Rejected(e)).exit_code(), 40);
    }
}
