use crate::lambda_poly::LevelVector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not coinvariant-finite at level {0}")]
    NotCoinvariantFinite(LevelVector),
    #[error("p-adic precision exceeds the representable range")]
    PrecisionOverflow,
    #[error("zero determinant - module not torsion-with-square-presentation")]
    ZeroDeterminant,
}
