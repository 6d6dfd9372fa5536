use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("operation requires a nonzero field element")]
    ZeroElement,
    #[error("no built-in modulus for degree {0}")]
    UnsupportedDegree(u32),
    #[error("modulus {modulus:#x} is not irreducible of degree {degree}")]
    Reducible { degree: u32, modulus: u64 },
    #[error("n = {n} exceeds the desk-scale guard n <= {guard}; pass --force to override")]
    SizeGuard { n: u32, guard: u32 },
    #[error("the two points coincide")]
    SamePoint,
    #[error("points are not pairwise distinct")]
    DuplicatePoint,
    #[error("lines {0} and {1} intersect")]
    NotSkew(usize, usize),
    #[error("no irreducible y^2 + y + a over GF(q)")]
    NoIrreducibleConstant,
    #[error("the Suzuki-Tits ovoid requires odd n >= 3, got n = {0}")]
    EvenDegree(u32),
    #[error("point set is not an ovoid: {0}")]
    NotAnOvoid(String),
    #[error("no quadric has exactly this zero set")]
    NoQuadric,
    #[error("no nondegenerate symplectic polarity: {0}")]
    NoPolarity(String),
    #[error("not a fibration: {0}")]
    NotAFibration(String),
    #[error("not a spread: {0}")]
    NotASpread(String),
    #[error("spread is not regular: {0}")]
    NotRegular(String),
    #[error("spread line {0} is not tangent to the ovoid")]
    SpreadNotTangent(usize),
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("vector length {got} does not match matrix width {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("matrix has no rows")]
    EmptyMatrix,
    #[error("no regular spread found within {nodes} search nodes")]
    SearchExhausted { nodes: u64 },
    #[error("unknown mutation {0}; expected 1, 2 or 3")]
    UnknownMutation(usize),
    #[error("cache: {0}")]
    Cache(String),
}
