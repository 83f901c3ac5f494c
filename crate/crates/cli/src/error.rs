use serde_json::{json, Value};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: String, source: std::io::Error },
    Core(pfdde::Error),
}

impl CliError {
    pub fn io(path: &str, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }

    /// 2 validation, 3 numerical failure, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 4,
            CliError::Core(pfdde::Error::Io(_)) => 4,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        use pfdde::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Core(e) => match e {
                E::Parse(_) => "parse",
                E::Invalid(_) => "invalid",
                E::DelayOutOfRange { .. } => "delay_out_of_range",
                E::DimensionMismatch { .. } => "dimension_mismatch",
                E::PeriodMismatch(..) => "period_mismatch",
                E::RealFlagViolation { .. } => "real_flag_violation",
                E::OrderMismatch { .. } => "order_mismatch",
                E::MissingStencil(_) => "missing_stencil",
                E::NotARoot { .. } => "not_a_root",
                E::NotSimple(_) => "not_simple",
                E::ResonantMode { .. } => "resonant_mode",
                E::PoleAtX { .. } => "pole_at_x",
                E::WindingMismatch { .. } => "winding_mismatch",
                E::InvalidStep(_) => "invalid_step",
                E::InsufficientSpan { .. } => "insufficient_span",
                E::Degenerate(_) => "degenerate",
                E::Io(_) => "io",
            },
        }
    }

    /// Machine-readable diagnostic for stderr.
    pub fn diagnostic(&self) -> Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Core(pfdde::Error::ResonantMode { z, modes }) = self {
            v["z"] = json!([z.re, z.im]);
            v["modes"] = json!(modes);
        }
        if let CliError::Core(pfdde::Error::PoleAtX { x, w }) = self {
            v["x"] = json!(x);
            v["w"] = json!(w);
        }
        v
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io { path, source } => write!(f, "{path}: {source}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<pfdde::Error> for CliError {
    fn from(e: pfdde::Error) -> Self {
        CliError::Core(e)
    }
}
