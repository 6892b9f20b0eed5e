use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameter search exhausted after {0} candidates")]
    SearchExhausted(usize),

    #[error("hash-to-group failed to find a point")]
    HashToGroupExhausted,

    #[error("malformed length: expected {expected} bytes, found {found}")]
    MalformedLength { expected: usize, found: usize },

    #[error("invalid point prefix byte 0x{0:02x}")]
    InvalidPrefix(u8),

    #[error("coordinate is not a canonical field element")]
    NonCanonical,

    #[error("point is not on the curve")]
    NotOnCurve,

    #[error("element is not in the prime-order subgroup")]
    NotInSubgroup,

    #[error("identity has {found} bits, public key expects {expected}")]
    IdentityLengthMismatch { expected: usize, found: usize },

    #[error("message of {len} bytes exceeds the {max}-byte limit")]
    MessageTooLong { len: usize, max: usize },

    #[error("identity of {len} bytes exceeds the {max}-byte limit")]
    IdentityTooLong { len: usize, max: usize },

    #[error("identity is reserved for the recovery manager")]
    ReservedIdentity,

    #[error("anonymous-layer plaintext is not a valid identity part")]
    MalformedC0,

    #[error("framing error: {0}")]
    Framing(String),

    #[error("objects were created under different curve parameters")]
    ParamsMismatch,

    #[error("key does not belong to this public key")]
    KeyMismatch,

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn framing(msg: impl Into<String>) -> Self {
        Error::Framing(msg.into())
    }
}
