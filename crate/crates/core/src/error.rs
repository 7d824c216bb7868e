use thiserror::Error;

/// Errors raised by constructors and numeric routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("observation {observation_id}: entry time {entry} is after exit time {exit}")]
    EntryAfterExit {
        observation_id: String,
        entry: i64,
        exit: i64,
    },

    #[error("observation {0}: location is empty")]
    EmptyLocation(String),

    #[error("events are not in chronological order (index {0})")]
    UnorderedEvents(usize),

    #[error("gap of {gap_ms} ms at index {index} exceeds the journey maximum of {max_ms} ms")]
    JourneyGapExceeded {
        index: usize,
        gap_ms: i64,
        max_ms: i64,
    },

    #[error("a journey must contain at least one event")]
    EmptyJourney,

    #[error("cannot fit a scaler on an empty population")]
    EmptyPopulation,

    #[error("normalization needs at least two rows, got {0}")]
    TooFewRows(usize),

    #[error("rows have inconsistent widths ({0} vs {1})")]
    RaggedMatrix(usize, usize),

    #[error("requested {requested} components but the data has {available} dimensions")]
    InvalidComponentCount { requested: usize, available: usize },

    #[error("{name} = {value} is not a probability in [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("population is empty, nothing to rank against")]
    EmptyRankPopulation,
}
