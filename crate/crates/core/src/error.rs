use thiserror::Error;

use crate::sketch::SketchConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("signature size must be at least 1")]
    ZeroSize,

    #[error("empty integer range {lo}..={hi}")]
    EmptyRange { lo: u64, hi: u64 },

    #[error("signature configurations differ: {left} vs {right}")]
    ConfigMismatch {
        left: SketchConfig,
        right: SketchConfig,
    },

    #[error("signature has {count} unset slot(s); Jaccard index of an empty set is undefined")]
    UnsetSlots { count: usize },

    #[error("invalid {name} = {value}: {constraint}")]
    Domain {
        name: &'static str,
        value: String,
        constraint: &'static str,
    },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: impl ToString, constraint: &'static str) -> Self {
        Error::Domain {
            name,
            value: value.to_string(),
            constraint,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
