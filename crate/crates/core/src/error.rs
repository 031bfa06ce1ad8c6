use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point ({x}, {t}) outside the slab domain")]
    OutOfDomain { x: f64, t: f64 },

    #[error("root search failed on element {element}, node {node}: {reason}")]
    RootSearch {
        element: usize,
        node: usize,
        reason: String,
    },

    #[error("displacement {disp:e} on element {element}, node {node} exceeds mesh size {h:e}; geometry under-resolved")]
    DisplacementTooLarge {
        element: usize,
        node: usize,
        disp: f64,
        h: f64,
    },

    #[error("inversion of the deformation failed at y = {y}, t = {t} on element {element}")]
    Inversion { element: usize, y: f64, t: f64 },

    #[error("extension constraint violated between slabs {slab} and {next}: increase eps_f (currently {eps_f})")]
    ConstraintViolation { slab: usize, next: usize, eps_f: f64 },

    #[error("singular slab system on slab {slab} (pivot {pivot:e} below {threshold:e}); gamma_J = {gamma:e} may be too small")]
    SingularSystem {
        slab: usize,
        pivot: f64,
        threshold: f64,
        gamma: f64,
    },

    #[error("empty trial space on slab {0}")]
    EmptySpace(usize),

    #[error("unsupported temporal basis: {0}")]
    UnsupportedBasis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
