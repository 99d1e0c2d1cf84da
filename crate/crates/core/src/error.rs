use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    NotPrime(u64),
    ZeroDegree,
    FieldTooLarge { q: u64, d: usize },
    /// A point failed the `F_{i2} - F_{i3} = 0` membership test.
    OffVariety,
    /// A published or hidden denominator vanished at the evaluation point.
    DenominatorZero,
    /// A Miller factor hit a zero or pole; `step` indexes the loop iteration.
    PoleHit { step: usize },
    /// Identity or a coordinate where a transport is undefined.
    ExceptionalPoint,
    DegeneratePair,
    LinearFormDegenerate,
    SearchExhausted { ell: u64, q_max: u64, d_max: usize },
    SpanFailure,
    SolveFailure,
    RetryBudgetExhausted { op: &'static str },
    Singular,
    InvalidInput(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPrime(q) => write!(f, "{q} is not prime"),
            Error::ZeroDegree => write!(f, "extension degree must be at least 1"),
            Error::FieldTooLarge { q, d } => write!(f, "field {q}^{d} exceeds 2^64"),
            Error::OffVariety => write!(f, "point is not on the blinding space W"),
            Error::DenominatorZero => write!(f, "denominator vanished at the evaluation point"),
            Error::PoleHit { step } => write!(f, "Miller loop hit a zero or pole at step {step}"),
            Error::ExceptionalPoint => write!(f, "exceptional point (identity or undefined transport)"),
            Error::DegeneratePair => write!(f, "pairing inputs stayed degenerate after all retries"),
            Error::LinearFormDegenerate => write!(f, "could not sample non-vanishing linear forms"),
            Error::SearchExhausted { ell, q_max, d_max } => write!(
                f,
                "no curve with full rational {ell}-torsion for q <= {q_max}, d <= {d_max}; raise --q-max or --d-max"
            ),
            Error::SpanFailure => write!(f, "generator matrices failed to span Mat_n(F_ell)"),
            Error::SolveFailure => write!(f, "encoding system had no solution"),
            Error::RetryBudgetExhausted { op } => write!(f, "retry budget exhausted in {op}"),
            Error::Singular => write!(f, "matrix is singular"),
            Error::InvalidInput(s) => write!(f, "invalid input: {s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
