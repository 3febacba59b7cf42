use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
    #[error("root not bracketed: f({a}) = {fa}, f({b}) = {fb}")]
    Bracket { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("root finder did not converge within {0} iterations")]
    RootNoConvergence(usize),
    #[error("quadrature budget exhausted: estimated error {err:e} > tol {tol:e}")]
    QuadratureBudget { err: f64, tol: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("tie between outcomes {0:?} and {1:?}")]
    Tie((u8, u8), (u8, u8)),
    #[error("ambiguous probe for player {player}: probability {prob}")]
    AmbiguousSign { player: usize, prob: f64 },
    #[error("marginal probability for player {player} is not monotone (drop {drop:e})")]
    NonMonotone { player: usize, drop: f64 },
    #[error("probability {prob} outside the recovered CDF range [{lo}, {hi}]")]
    Inversion { prob: f64, lo: f64, hi: f64 },
    #[error("no jump in the correlation profile: range [{lo}, {hi}]")]
    NoJump { lo: f64, hi: f64 },
    #[error("no observations within 5 bandwidths of ({z1}, {z2})")]
    EmptyNeighborhood { z1: f64, z2: f64 },
    #[error("limit not reached: {0}")]
    Limit(String),
}

impl Error {
    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Bracket { .. }
                | Error::RootNoConvergence(_)
                | Error::QuadratureBudget { .. }
                | Error::NoJump { .. }
                | Error::AmbiguousSign { .. }
                | Error::NonMonotone { .. }
                | Error::Inversion { .. }
                | Error::EmptyNeighborhood { .. }
                | Error::Limit(_)
                | Error::Degenerate(_)
                | Error::Tie(..)
        )
    }
}
