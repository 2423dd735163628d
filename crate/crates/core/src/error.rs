use thiserror::Error;

/// Errors raised by the library.
///
/// `Input` covers malformed or out-of-range data supplied by the caller.
/// `Invariant` means a structural identity that must hold for every valid
/// input was observed to fail; it names the identity so that failures can be
/// grepped for.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("refused: {what} has order {estimate}, above the cap {cap}")]
    CapExceeded {
        what: String,
        estimate: String,
        cap: u64,
    },
    #[error("invariant violated [{identity}]: {detail}")]
    Invariant {
        identity: &'static str,
        detail: String,
    },
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn invariant(identity: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant {
            identity,
            detail: detail.into(),
        }
    }

    pub fn is_invariant(&self) -> bool {
        matches!(self, Error::Invariant { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
