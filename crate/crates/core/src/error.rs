use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CellError {
    #[error("bit must be 0 or 1")]
    InvalidBit,
    #[error("{phase} with DL=1 needs a fresh sample on node N")]
    StaleNode { phase: &'static str },
    #[error("illegal line assignment: {0}")]
    IllegalLines(&'static str),
    #[error("line assignment does not realise a {0} phase")]
    PhaseMismatch(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArrayError {
    #[error("row mask selects no rows")]
    MaskEmpty,
    #[error("operand B contains X")]
    OperandX,
    #[error("row {row} out of range for {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("geometry mismatch: {0}")]
    Geometry(String),
    #[error("column {col}: phase lines disagree on WL (rows share word lines)")]
    SharedLineConflict { col: usize },
    #[error("cell ({row},{col}): {source}")]
    Cell {
        row: usize,
        col: usize,
        #[source]
        source: CellError,
    },
    #[error("array image: {0}")]
    Image(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalogError {
    #[error("invalid device parameters: {0}")]
    InvalidParams(String),
    #[error("DC solve did not converge at input {input_v} V (residual {residual_a:e} A)")]
    NoConvergence { input_v: f64, residual_a: f64 },
    #[error("cell does not flip for any bit-line voltage (write path too weak)")]
    NoFlipDetected,
    #[error("integration left the physical voltage window at t = {time_s:e} s; retry with dt < {dt_s:e} s")]
    StepSize { time_s: f64, dt_s: f64 },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: protocol violation: {source}")]
    Protocol {
        line: usize,
        #[source]
        source: ArrayError,
    },
    #[error("line {line}: {source}")]
    Io {
        line: usize,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkloadError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Array(#[from] ArrayError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgingError {
    #[error("invalid hold schedule: {0}")]
    Schedule(String),
    #[error(transparent)]
    Array(#[from] ArrayError),
}
