use crate::series::{Units, YearMonth};

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("duplicate observation for {0}")]
    DuplicateMonth(YearMonth),
    #[error("month gap: {before} is followed by {after}")]
    MonthGap { before: YearMonth, after: YearMonth },
    #[error("non-finite value at {0}")]
    NonFinite(YearMonth),
    #[error("value {value} at {month} must exceed -100%")]
    BelowMinusHundred { month: YearMonth, value: f64 },
    #[error("series is empty")]
    EmptySeries,
    #[error("series too short: need at least {required} observations, got {actual}")]
    TooShort { required: usize, actual: usize },
    #[error("expected a {expected} series, got {actual}")]
    WrongUnits { expected: Units, actual: Units },
    #[error("invalid {name} = {value}: must be {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("{name} = {value} looks like a percentage; rates here live on the unit interval (did you mean {hint}?)")]
    PercentScale { name: &'static str, value: f64, hint: f64 },
    #[error("max lag {max_lag} must be below {limit}")]
    LagTooLarge { max_lag: usize, limit: usize },
    #[error("Durbin-Levinson recursion broke down at lag {0}")]
    RecursionBreakdown(usize),
    #[error("regressors are collinear or constant")]
    DegenerateRegressor,
    #[error("estimated model is not stationary: {0}")]
    NonStationary(&'static str),
    #[error("AR(1) coefficient {0} <= 0 has no Ornstein-Uhlenbeck counterpart")]
    NonPositiveAutocorrelation(f64),
    #[error("payoff evaluation needs S0, d, D and the margin rate")]
    MissingCollateral,
    #[error("no-arbitrage-consistent {0} does not exist for these inputs")]
    NoSolution(&'static str),
    #[error("closed-form forecast disagrees with the recursion at horizon {horizon}")]
    ForecastMismatch { horizon: u32 },
}

/// Rejects NaN and values outside `(lo, hi)` (open interval, infinite bounds allowed).
pub(crate) fn check_open(name: &'static str, value: f64, lo: f64, hi: f64, constraint: &'static str) -> Result<f64> {
    if value.is_finite() && value > lo && value < hi {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            constraint,
        })
    }
}
