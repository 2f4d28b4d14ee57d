use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("level {level} exceeds the configured maximum {max}")]
    LevelTooDeep { level: u32, max: u32 },

    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(u32, u32),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid recursion table: {0}")]
    InvalidTable(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("malformed word token `{0}`")]
    BadToken(String),

    #[error("invalid orbit (r = {r}, s = {s}): need r >= 3 and 2 <= s <= r")]
    InvalidOrbit { r: u32, s: u32 },

    #[error("generator index {index} out of range 1..={r}")]
    IndexOutOfRange { index: usize, r: u32 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parity-class search over 2^{0} subsets exceeds the limit of 2^20")]
    SearchTooLarge(u32),

    #[error("abelianization check requires s = 2, got s = {0}")]
    WrongS(u32),

    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("malformed map expression: {0}")]
    MapParse(String),

    #[error("map has degree {0} modulo p, expected 2")]
    MapDegree(usize),

    #[error("base point {a} lies in the post-critical set modulo {p}")]
    PostCriticalBase { a: u64, p: u64 },

    #[error("pullback of degree {expected} dropped to affine degree {affine}; {at_infinity} preimage(s) at infinity")]
    DegreeDrop {
        expected: usize,
        affine: usize,
        at_infinity: usize,
    },

    #[error("ramified pullback at level {level}")]
    Ramified { level: u32 },

    #[error("depth {depth} exceeds the configured maximum {max}")]
    DepthTooLarge { depth: u32, max: u32 },
}
