//! Error type shared by the whole crate.

use thiserror::Error;

/// Which scan of a Cayley table failed the Latin-square property.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatinDefect {
    /// Row `a`: the map `x -> a*x` is not a bijection.
    Row(usize),
    /// Column `a`: the map `x -> x*a` is not a bijection.
    Col(usize),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("table `{table}`: {msg}")]
    BadTable { table: String, msg: String },

    #[error("table `{table}`: element index {index} out of range (order {order})")]
    ElementOutOfRange {
        table: String,
        index: usize,
        order: usize,
    },

    #[error("table `{table}` is not a quasigroup: {defect:?} is not a permutation")]
    NotQuasigroup { table: String, defect: LatinDefect },

    #[error("table `{table}` has no identity element")]
    NoIdentity { table: String },

    #[error("table `{table}` is not a metagroup: {reason}")]
    NotMetagroup { table: String, reason: String },

    #[error("order {requested} exceeds the order cap {cap}")]
    OrderCap { requested: usize, cap: usize },

    #[error("wreath carrier of order {requested} exceeds the wreath cap {cap}")]
    WreathCap { requested: usize, cap: usize },

    #[error("element {witness} is not in the center of `{table}`")]
    NotCentral { table: String, witness: usize },

    #[error("member set of `{table}` is not a subgroup: witness element {witness}")]
    NotSubgroup { table: String, witness: usize },

    #[error("associator value {witness} of `{table}` escapes the chosen central subgroup")]
    TRangeEscapes { table: String, witness: usize },

    #[error("factor system invalid: condition {condition} fails{}", witness.as_deref().map(|w| format!(" at {w}")).unwrap_or_default())]
    InvalidFactors {
        condition: &'static str,
        witness: Option<String>,
    },

    #[error("search space of {needed} candidates exceeds budget {budget}")]
    SearchSpaceExceeded { needed: u128, budget: u128 },

    #[error("cosets of the chosen substructure do not partition `{table}`: cosets of {v1} and {v2} overlap at element {elem}")]
    PartitionFailure {
        table: String,
        v1: usize,
        v2: usize,
        elem: usize,
    },

    #[error("decomposition mismatch in `{table}` at element {elem}: scan and closed form disagree")]
    DecompositionMismatch { table: String, elem: usize },

    #[error("wreath specs are not compatible: {what}")]
    SpecMismatch { what: String },

    #[error("order constraint violated: l = {l} does not divide 2^{k} - 1")]
    BadOrderConstraint { l: usize, k: usize },

    #[error("chosen element {elem} is central in `{table}`; a non-central element is required")]
    CentralD0 { table: String, elem: usize },

    #[error("action map {elem} -> b0^2 does not extend to a consistent factor system")]
    PhiExtension { elem: usize },

    #[error("unknown law id `{0}`")]
    UnknownLaw(String),

    #[error("empty product has no carrier")]
    EmptyProduct,

    #[error("{file}: {msg}")]
    Parse { file: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line tool.
    ///
    /// 0 pass, 1 verification failure, 2 input error, 3 resource cap.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            OrderCap { .. } | WreathCap { .. } | SearchSpaceExceeded { .. } => 3,
            NotQuasigroup { .. }
            | NoIdentity { .. }
            | NotMetagroup { .. }
            | NotCentral { .. }
            | NotSubgroup { .. }
            | TRangeEscapes { .. }
            | InvalidFactors { .. }
            | PartitionFailure { .. }
            | DecompositionMismatch { .. }
            | BadOrderConstraint { .. }
            | CentralD0 { .. }
            | PhiExtension { .. } => 1,
            _ => 2,
        }
    }
}
