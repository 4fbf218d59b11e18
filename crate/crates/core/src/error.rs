use thiserror::Error;

use crate::channel::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scalar argument fell outside the domain of the function.
    #[error("{function}: argument {value} outside domain {domain}")]
    Domain {
        function: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid channel: {}", join_violations(.0))]
    InvalidChannel(Vec<Violation>),

    #[error("malformed channel file: {0}")]
    ChannelFormat(String),

    /// A polarization transform would produce more outputs than allowed.
    #[error("alphabet cap exceeded at depth {depth}: {outputs} outputs > cap {cap}")]
    AlphabetCap {
        depth: usize,
        outputs: usize,
        cap: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
