use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no roots of a constant")]
    ConstantPolynomial,

    #[error("gcd of two zero polynomials is undefined")]
    GcdOfZeros,

    #[error("root finder did not converge for degree {degree} polynomial")]
    RootsNotConverged { degree: usize },

    #[error("evaluation on support: z lies within {distance} of node {node}")]
    EvaluationOnSupport { node: String, distance: String },

    #[error("supports overlap: node {0} is shared by both measures")]
    SupportsOverlap(String),

    #[error("inverse measure construction failed; raise precision")]
    InverseMeasureFailed,

    #[error("interval adjacency violated between generators {0} and {1}: {2}")]
    Adjacency(usize, usize, String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("tails too short: need {needed} coefficients, have {available}")]
    TailsTooShort { needed: usize, available: usize },

    #[error("pole cancellation failure: T * r_{0} is not a polynomial")]
    PoleCancellation(usize),

    #[error("degenerate last component: a_m vanishes identically")]
    DegenerateLastComponent,

    #[error("degenerate component: a_{0} vanishes identically")]
    DegenerateComponent(usize),

    #[error("function vanishes on grid")]
    VanishesOnGrid,

    #[error("rate estimation needs at least {needed} rows with increasing |n|, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("achieved order {achieved} < required {required} even at {bits} bits")]
    PrecisionExhausted {
        achieved: usize,
        required: usize,
        bits: u32,
    },
}
