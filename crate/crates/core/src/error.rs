use thiserror::Error;

use crate::market::Pair;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{agent}: support is empty")]
    EmptySupport { agent: String },

    #[error("{agent}: support and pmf lengths differ ({support} vs {pmf})")]
    LengthMismatch {
        agent: String,
        support: usize,
        pmf: usize,
    },

    #[error("{agent}: support is not strictly ascending at index {index}")]
    NonAscendingSupport { agent: String, index: usize },

    #[error("{agent}: negative or non-finite value {value}")]
    NegativeValue { agent: String, value: f64 },

    #[error("{agent}: pmf entry {index} = {value} is not in (0, 1]")]
    NonPositiveProbability {
        agent: String,
        index: usize,
        value: f64,
    },

    #[error("{agent}: pmf does not sum to 1 (deviation {deviation:.3e})")]
    PmfNotNormalized { agent: String, deviation: f64 },

    #[error("instance needs at least one buyer and one seller")]
    NoAgents,

    #[error("feasible set {set:?} is not a matching")]
    NotAMatching { set: Vec<Pair> },

    #[error("pair {pair:?} references an agent outside {n} buyers x {m} sellers")]
    PairOutOfRange { pair: Pair, n: usize, m: usize },

    #[error("cap must be positive")]
    ZeroCap,

    #[error("profile space has {size} profiles, cap is {cap}")]
    ProfileSpaceTooLarge { size: f64, cap: usize },

    #[error("{agent}: value {value} is not in the support")]
    TypeNotInSupport { agent: String, value: f64 },

    #[error("profile has {got} entries for {side}, expected {expected}")]
    ProfileShape {
        side: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("feasibility family enumeration exceeded {cap} members")]
    FamilyTooLarge { cap: usize },

    #[error("weight table has {got} entries, expected {expected}")]
    WeightShape { got: usize, expected: usize },

    #[error("non-finite weight at pair {pair:?}")]
    NonFiniteWeight { pair: Pair },

    #[error("operation needs exactly one buyer and one seller, got {n}x{m}")]
    NotBilateral { n: usize, m: usize },

    #[error("alpha must be non-negative, got {0}")]
    NegativeAlpha(f64),

    #[error("LP would have {vars} variables, cap is {cap}")]
    LpTooLarge { vars: usize, cap: usize },

    #[error("malformed LP: {0}")]
    MalformedLp(String),

    #[error("simplex hit the iteration limit ({0} pivots)")]
    IterationLimit(usize),

    #[error("LP solution violates constraints by {0:.3e}")]
    ResidualCheckFailed(f64),

    #[error("LP status {0}")]
    LpNotOptimal(&'static str),

    #[error("mechanism is not ex-ante weakly budget balanced (surplus {surplus:.3e})")]
    NotExAnteWbb { surplus: f64 },

    #[error("mechanism is not ex-ante strongly budget balanced (surplus {surplus:.3e})")]
    NotExAnteSbb { surplus: f64 },

    #[error("negative payment {value} for {agent} at profile {profile}")]
    NegativePayment {
        agent: String,
        profile: usize,
        value: f64,
    },

    #[error("mechanism table does not match its instance: {0}")]
    TableMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
