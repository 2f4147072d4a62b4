use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fractional shift of {shift} on coordinate {coord} straddles 1 on the given interval; split the box first")]
    WrapSplitRequired { coord: usize, shift: String },
    #[error("invalid interval [{lo}, {hi})")]
    InvalidInterval { lo: String, hi: String },
    #[error("invalid transformation: {0}")]
    InvalidDescriptor(String),
    #[error("dialect renaming is not injective")]
    NotInjective,
    #[error("graphings are not comparable: {0}")]
    NonComparable(String),
    #[error("project supports overlap on a set of positive measure")]
    OverlappingSupports,
    #[error("projects do not share a support")]
    SupportMismatch,
    #[error("edge {edge} is not cell-rigid: {reason}")]
    NotCellRigid { edge: String, reason: String },
    #[error("edge {edge} is not measure-preserving")]
    NotMeasurePreserving { edge: String },
    #[error("path enumeration exceeded the iteration cap of {cap} expansions")]
    IterationCapExceeded { cap: usize },
    #[error("execution did not terminate within {cap} expansions")]
    NonTerminating { cap: usize },
    #[error("exact arithmetic would overflow 64-bit rationals: {0}")]
    ArithmeticOverflow(String),
    #[error("series measurement cannot be certified: {0}")]
    SeriesNotCertifiable(String),
    #[error("exact measurement requires unit weights; use series mode")]
    NonUnitWeight,
    #[error("execution wrapper is infinite")]
    InfiniteWrapper,
    #[error("symbol {0:?} is not in the binary alphabet")]
    BadAlphabet(char),
    #[error("promotion requires edges acting trivially on coordinate 1 (edge {0})")]
    PairingRequired(usize),
    #[error("machine is not star-essential: {0}")]
    NotEssential(String),
    #[error("halting transition fired with heads off the end-marker (state {state}, positions {positions:?})")]
    MalformedHalt { state: String, positions: Vec<usize> },
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),
    #[error("invalid machine: {0}")]
    InvalidMachine(String),
    #[error("decision routes disagree: {0}")]
    RouteDisagreement(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
