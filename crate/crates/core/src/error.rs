use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative mass {mass} at outcome `{outcome}`")]
    NegativeMass { outcome: String, mass: f64 },
    #[error("non-finite mass at outcome `{0}`")]
    NonFiniteMass(String),
    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("measure is not normalized (total mass {0})")]
    NotNormalized(f64),
    #[error("eta must lie in [0, 1], got {0}")]
    EtaOutOfRange(f64),
    #[error("epsilon must be non-negative, got {0}")]
    NegativeEpsilon(f64),
    #[error("kernel has no entry for input `{0}`")]
    MissingKernelEntry(String),
    #[error("theta must be positive, got {0}")]
    NonPositiveTheta(f64),
    #[error("p must lie in [1/2, 1], got {0}")]
    POutOfRange(f64),
    #[error("empirical profile needs at least one pair")]
    EmptyPairList,
    #[error("group size k must be >= 1, got {0}")]
    BadK(usize),
    #[error("white-box group profiles are only defined for Laplace and Gaussian bases, not {0}")]
    UnsupportedFamily(&'static str),
    #[error("invalid tabulated profile: {0}")]
    InvalidTable(String),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("unsupported pairing: {scheme} subsampling under the {relation} relation")]
    UnsupportedPairing {
        scheme: &'static str,
        relation: &'static str,
    },
    #[error("no group profile supplied for k = {0}")]
    MissingGroupProfile(usize),
    #[error("instance too large to enumerate: {what} = {cardinality}")]
    InstanceTooLarge { what: &'static str, cardinality: u128 },
    #[error("datasets are not connected under the {0} relation")]
    Unreachable(&'static str),
    #[error("marginals have different total mass ({0} vs {1})")]
    InfeasibleMarginals(f64, f64),
    #[error("invalid cost {cost} for pair ({from}, {to})")]
    InvalidCost { from: String, to: String, cost: f64 },
    #[error("integrand does not decay before cutoff {0}")]
    DivergentIntegrand(f64),
    #[error("moment generating function is infinite: loss distribution has an atom at +inf")]
    InfiniteLoss,
    #[error("lambda must be > 1, got {0}")]
    BadLambda(f64),
    #[error("loss distribution probabilities sum to {0}")]
    BadLossDistribution(f64),
    #[error("malformed input: {0}")]
    Parse(String),
}
