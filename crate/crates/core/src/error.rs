use thiserror::Error;

/// Errors produced while setting up or running a simulation.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid polynomial basis order: {0}")]
    InvalidOrder(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("mesh parse error at {path}:{line}: {msg}")]
    MeshParse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("mesh topology error: {0}")]
    Topology(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("inverted element {element}: |J| = {jacobian} at ({xi}, {eta})")]
    InvertedElement {
        element: usize,
        jacobian: f64,
        xi: f64,
        eta: f64,
    },

    #[error("inadmissible state in element {element} at point {point}: rho = {rho}, p = {p}")]
    Inadmissible {
        element: usize,
        point: usize,
        rho: f64,
        p: f64,
    },

    #[error("solution diverged (NaN/Inf) at step {step}, stage {stage}, t = {time}")]
    Diverged { step: usize, stage: usize, time: f64 },

    #[error("sliding interface {0} misaligned: no mortar overlap found")]
    InterfaceMisaligned(usize),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SolverError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        SolverError::Io {
            path: path.into(),
            source,
        }
    }
}
