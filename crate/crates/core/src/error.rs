use thiserror::Error;

/// Errors surfaced by lattice construction, model building, bba loading,
/// combination rules and the pignistic transformations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("frame size {0} is outside the supported range 1..=6")]
    FrameSize(usize),

    #[error("cannot parse expression {input:?} at byte {at}: {reason}")]
    ExprParse {
        input: String,
        at: usize,
        reason: String,
    },

    #[error("expression refers to t{index} but the frame only has t1..t{n}")]
    ThetaOutOfRange { index: u8, n: u8 },

    #[error("the empty set cannot be used as an integrity constraint")]
    EmptyConstraint,

    #[error("constraints empty the total ignorance: the model is degenerate")]
    DegenerateModel,

    #[error("mass {mass} assigned to the empty set")]
    MassOnEmptySet { mass: f64 },

    #[error("mass {mass} assigned to {expr:?}, which is empty under the model")]
    MassOnEmptyElement { expr: String, mass: f64 },

    #[error("negative mass {mass} assigned to {expr:?}")]
    NegativeMass { expr: String, mass: f64 },

    #[error("masses sum to {sum}, expected 1 within {tolerance}")]
    MassSum { sum: f64, tolerance: f64 },

    #[error("cannot normalize a bba whose total mass is {sum}")]
    UnnormalizableMass { sum: f64 },

    #[error("combination needs at least two sources, got {0}")]
    TooFewSources(usize),

    #[error("sources are defined over different models")]
    ModelMismatch,

    #[error("{operation} requires a Shafer model")]
    ShaferRequired { operation: &'static str },

    #[error("{operation} requires the free model")]
    FreeRequired { operation: &'static str },

    #[error("sources are in full contradiction (conflict degree 1)")]
    FullContradiction,

    #[error("decision requires a non-empty candidate list")]
    NoCandidates,

    #[error("bba names no model and none was supplied")]
    MissingModel,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
