use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown model `{input}`; expected one of: fixed-end-tree:k=<k>, oriented-tree-112, tree-x-lattice:k=<k>,d=<d>, grandparent:k=<k>{hint}")]
    UnknownModel { input: String, hint: String },

    #[error("invalid model parameter: {0}")]
    InvalidModel(String),

    #[error("vertex handle does not belong to this registry")]
    ForeignHandle,

    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(u32, u32),

    #[error("invalid slab: {0}")]
    InvalidSlab(String),

    #[error("invalid probability specification: {0}")]
    InvalidProbability(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("divergent quantity: {0}")]
    Divergent(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}
