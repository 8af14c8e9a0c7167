use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {x} is outside the domain of the map")]
    Domain { x: f64 },
    #[error("input interval is empty or degenerate")]
    EmptyInput,
    #[error("adaptive quadrature did not reach tolerance {tol} on [{lo}, {hi}]")]
    QuadratureFailure { lo: f64, hi: f64, tol: f64 },
    #[error("leaf {leaf} is a singular leaf")]
    SingularLeaf { leaf: f64 },
    #[error("box count {boxes} exceeds the cap of {cap}")]
    BudgetExceeded { boxes: usize, cap: usize },
    #[error("vector field vanishes identically on the sampling grid")]
    DegenerateField,
    #[error("separatrix of {label} did not reach the section")]
    NoCrossing { label: String },
    #[error("orbit landed on the singular leaf {leaf}")]
    StagnationAtSingularity { leaf: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
