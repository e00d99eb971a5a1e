use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("target is not interior to the hull: margin {margin:.3e} <= tolerance {tolerance:.3e}")]
    NotInterior { margin: f64, tolerance: f64 },

    #[error("extreme-point selection stayed degenerate after {retries} perturbation retries (best slack {best_slack:.3e})")]
    Degenerate { retries: usize, best_slack: f64 },

    #[error("hull slack {slack:.3e} of the current state is below the requested margin {margin:.3e}")]
    SlackBelowMargin { slack: f64, margin: f64 },

    #[error("no vertex pair has both barycentric weights above the floor {floor:.3e}")]
    NoFeasiblePair { floor: f64 },

    #[error("profile smoothing width {delta:.3e} must be below {limit:.3e}")]
    SmoothingTooWide { delta: f64, limit: f64 },

    #[error("frequency search hit the cap {lambda:.3e} with error bound {bound:.3e} > {eps:.3e}")]
    FrequencyCap { lambda: f64, bound: f64, eps: f64 },

    #[error("chi curve infeasible at t = {time:.4}: chi = {chi:.4e}, floor = {floor:.4e}")]
    ChiInfeasible { time: f64, chi: f64, floor: f64 },

    #[error("initial density is not a small perturbation: {which} = {value:.4e} exceeds budget {budget:.4e}")]
    Smallness { which: &'static str, value: f64, budget: f64 },

    #[error("strictness margin violated at node {node} of slice t = {time:.4}: margin {margin:.3e}")]
    Strictness { node: usize, time: f64, margin: f64 },

    #[error("density bound violated: rho = {rho:.4e} outside [{lower:.4e}, {upper:.4e}]")]
    DensityBounds { rho: f64, lower: f64, upper: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("covering cannot meet the continuity budget: {0}")]
    Covering(String),

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("config error at '{pointer}': {message}")]
    Config { pointer: String, message: String },

    #[error("dump error in {path}: {message}")]
    Dump { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// Deserializes JSON text, reporting schema violations at their JSON pointer.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        pointer: pointer(e.path()),
        message: e.inner().to_string(),
    })
}

pub(crate) fn config_error(pointer: &str, message: impl std::fmt::Display) -> Error {
    Error::Config { pointer: pointer.to_string(), message: message.to_string() }
}
