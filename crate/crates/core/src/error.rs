use alloc::string::String;

/// Errors raised by the numerical core.
///
/// `Resample` is not a failure of an identity: it signals that the inputs sit
/// too close to a zero or pole for the check to be meaningful, and a fresh
/// random draw should be taken.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole of the term ratio at {0}")]
    Pole(String),
    #[error("series diverges: {0}")]
    Divergence(String),
    #[error("inputs too close to a zero or pole ({0}); resample")]
    Resample(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("model construction failed: {0}")]
    Construction(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub fn is_resample(&self) -> bool {
        matches!(self, Error::Resample(_))
    }
}

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
