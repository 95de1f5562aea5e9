use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("major axis {major} m is shorter than minor axis {minor} m; orient the ellipse so a >= b")]
    MisorientedEllipse { major: f64, minor: f64 },

    #[error("not magnetostrictive: saturation magnetostriction is zero")]
    NotMagnetostrictive,

    #[error("integration diverged at step {step}: |m| drifted by {drift:e} before renormalization")]
    Diverged { step: u64, drift: f64 },

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("zero variance: series is constant")]
    ZeroVariance,

    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },

    #[error("degenerate binning: bins {0:?} are empty")]
    EmptyBins(Vec<usize>),

    #[error("negative barrier {0} J")]
    NegativeBarrier(f64),

    #[error("target retention {target} s is shorter than the attempt time {attempt} s")]
    RetentionBelowAttempt { target: f64, attempt: f64 },

    #[error("barrier {target} J unreachable without barrier-raising strain (zero-stress barrier {natural} J)")]
    NeedsBarrierRaising { target: f64, natural: f64 },

    #[error("required stress {stress} Pa exceeds the admissible magnitude {limit} Pa")]
    StressOutOfRange { stress: f64, limit: f64 },

    #[error("devices {0:?} cannot reach the target barrier")]
    UnreachableDevices(Vec<usize>),

    #[error("instance too large for oracle: {n} spins (max {max})")]
    InstanceTooLarge { n: usize, max: usize },

    #[error("invalid Ising problem: {0}")]
    InvalidProblem(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
