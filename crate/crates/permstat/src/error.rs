use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Input text or word is not a permutation of `1..=n`.
    #[error("invalid permutation: {0}")]
    Validation(String),

    /// Requested size exceeds what exhaustive routines accept.
    #[error("n = {n} is outside the supported range 1..={cap}")]
    Capacity { n: usize, cap: usize },

    /// An internal invariant of the forward construction broke.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// The inverse construction found no consistent completion.
    #[error("inconsistent skeleton: {0}")]
    Inconsistent(String),

    /// `phi(phi_inverse(t))` did not give back `t`.
    #[error("round trip failed: phi({preimage}) = {image}, expected {target}")]
    RoundTrip {
        target: String,
        preimage: String,
        image: String,
    },

    /// Two permutations share an image under the forward map.
    #[error("phi is not injective: phi({first}) = phi({second}) = {image}")]
    Collision {
        image: String,
        first: String,
        second: String,
    },

    /// Unknown name for a statistic, vector, format or check.
    #[error("unknown {what}: {token}")]
    UnknownToken { what: &'static str, token: String },

    /// Cache or export I/O failure.
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
