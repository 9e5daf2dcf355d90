use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A configuration value is outside its allowed range.
    InvalidConfig(&'static str),
    /// Two streams or buffers that must agree in length do not.
    LengthMismatch { expected: usize, actual: usize },
    /// Image dimensions disagree, or the pixel buffer does not match them.
    DimensionMismatch,
    /// A serialized container is too short, has the wrong magic or an unknown codec.
    MalformedContainer(&'static str),
    /// The entropy-coded payload could not be parsed.
    DecodeFailure(&'static str),
    /// A fading channel was demodulated without its gains.
    MissingGains,
    /// CRC check on a stream shorter than the check field.
    StreamTooShort,
    /// A quality curve never crosses the threshold.
    CoverageUndefined,
    /// An operation that needs data was given none.
    EmptyInput,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            Error::LengthMismatch { expected, actual } => {
                write!(f, "length mismatch: expected {expected}, got {actual}")
            }
            Error::DimensionMismatch => f.write_str("image dimensions do not match"),
            Error::MalformedContainer(what) => write!(f, "malformed container: {what}"),
            Error::DecodeFailure(what) => write!(f, "decode failure: {what}"),
            Error::MissingGains => f.write_str("fading channel requires channel gains"),
            Error::StreamTooShort => f.write_str("stream shorter than the CRC field"),
            Error::CoverageUndefined => f.write_str("coverage undefined: curve never crosses threshold"),
            Error::EmptyInput => f.write_str("empty input"),
        }
    }
}

impl core::error::Error for Error {}
