use std::fmt;

/// Exit status classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Bad flags, configuration or scenario file.
    Config,
    /// Unreadable or inconsistent data files.
    Data,
    /// A failure while computing.
    Runtime,
}

impl Kind {
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Config => 2,
            Kind::Data => 3,
            Kind::Runtime => 4,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.kind {
            Kind::Config => "configuration error",
            Kind::Data => "data error",
            Kind::Runtime => "runtime failure",
        };
        write!(f, "{label}: {}", self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn new(kind: Kind, message: impl fmt::Display) -> Self {
        Self {
            kind,
            message: message.to_string(),
        }
    }

    pub fn config(message: impl fmt::Display) -> Self {
        Self::new(Kind::Config, message)
    }

    pub fn data(message: impl fmt::Display) -> Self {
        Self::new(Kind::Data, message)
    }

    pub fn runtime(message: impl fmt::Display) -> Self {
        Self::new(Kind::Runtime, message)
    }
}

/// Classifies a library error; `io_kind` decides where file problems land.
pub fn classify(err: netcp::Error, io_kind: Kind) -> CliError {
    use netcp::Error as E;
    let kind = match &err {
        E::Format { .. } | E::Io { .. } => io_kind,
        E::ParameterOutOfRange(_) | E::InvalidTrim(_) | E::InfeasibleCap(_) => Kind::Config,
        E::EntryOutOfRange { .. }
        | E::LabelOutOfRange { .. }
        | E::Asymmetric { .. }
        | E::DegenerateScenario(_) => io_kind,
        E::TooShort { .. }
        | E::DimensionMismatch(_)
        | E::PrelimOutOfRange { .. }
        | E::IndexOrder { .. } => Kind::Data,
        E::EigenFailure(_) | E::EmptyInterval { .. } => Kind::Runtime,
    };
    CliError::new(kind, err)
}

pub trait Context<T> {
    fn or_config(self) -> CliResult<T>;
    fn or_data(self) -> CliResult<T>;
    fn or_runtime(self) -> CliResult<T>;
}

impl<T> Context<T> for netcp::Result<T> {
    fn or_config(self) -> CliResult<T> {
        self.map_err(|e| classify(e, Kind::Config))
    }

    fn or_data(self) -> CliResult<T> {
        self.map_err(|e| classify(e, Kind::Data))
    }

    fn or_runtime(self) -> CliResult<T> {
        self.map_err(|e| classify(e, Kind::Runtime))
    }
}
