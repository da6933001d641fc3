use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate capacitance network: C_sigma = {0} <= 0")]
    DegenerateCapacitance(f64),
    #[error("far-detuned correction factor is singular for qubit {qubit}: varsigma_12^2 = {value}")]
    SingularCorrection { qubit: usize, value: f64 },
    #[error("closed form requires a symmetric circuit (eps_J = {0} vs {1})")]
    Asymmetric(f64, f64),
    #[error("budget {budget} ps is smaller than the two pulses ({pulses} ps)")]
    BudgetTooSmall { budget: f64, pulses: f64 },
    #[error("shots must be at least 1")]
    NoShots,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no maximal plateau before {0} ps")]
    NoPlateau(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
