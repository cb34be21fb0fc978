//! Crate-wide error type.

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// All singular values of the input fall below the rank threshold.
    #[error("matrix is numerically zero: no singular value exceeds the rank threshold")]
    ZeroMatrix,

    /// A matrix required to have orthonormal columns does not.
    #[error("columns are not orthonormal: max deviation of U^T U from I is {max_dev:e}")]
    NotOrthonormal { max_dev: f64 },

    /// A matrix required to be symmetric is not.
    #[error("matrix is not symmetric: max deviation of M from M^T is {max_dev:e}")]
    NotSymmetric { max_dev: f64 },

    /// Operands have incompatible shapes.
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    /// A covariance that must be inverted is numerically singular.
    #[error("covariance matrix is numerically singular")]
    SingularCovariance,

    /// An angle-product term underflows outside the excluded index range,
    /// so the angle-form bound is not finite.
    #[error(
        "degenerate principal angles: product term {term:e} at angle pair ({p}, {q}) \
         is below 1e-14"
    )]
    DegenerateAngles { p: usize, q: usize, term: f64 },

    /// A capacity ratio lies outside its admissible range.
    #[error("invalid ratio: {context}")]
    InvalidRatio { context: String },

    /// The noise variance is zero where a nondegenerate density is required.
    #[error("noise variance is zero: the class-conditional density is degenerate")]
    ZeroNoise,

    /// Too few usable points for a fit.
    #[error("insufficient data: {context}")]
    InsufficientData { context: String },

    /// A Gram matrix is singular even after ridge regularization.
    #[error("Gram matrix is singular after ridge regularization")]
    SingularGram,

    /// A class has no training signals.
    #[error("class {class} has no signals")]
    EmptyClass { class: usize },

    /// A file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },

    /// Declared and actual shapes of a file disagree.
    #[error("shape mismatch: {context}")]
    ShapeMismatch { context: String },

    /// The reference signal is zero, so relative error is undefined.
    #[error("reference signal is zero: normalized error is undefined")]
    ZeroSignal,

    /// An I/O failure while reading or writing a file.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
