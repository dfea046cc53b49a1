use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported function id {0}")]
    UnsupportedFunction(u32),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("data integrity: {0}")]
    DataIntegrity(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("run failed at topology={topology} config_index={config_index} fid={fid} iid={iid} run={run}: {source}")]
    RunFailed {
        topology: String,
        config_index: usize,
        fid: u32,
        iid: u32,
        run: u32,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
