//! Exit codes: 0 success, 1 usage or parse error, 2 partial data failure,
//! 3 numeric failure.

use echorec_core::dataset::DatasetError;
use echorec_core::{AcousticsError, MeshError, NnError};

pub const USAGE: u8 = 1;
pub const PARTIAL: u8 = 2;
pub const NUMERIC: u8 = 3;

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Usage(String);

/// Some items failed while the rest completed and were written.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Partial(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub fn usage_from(e: anyhow::Error) -> anyhow::Error {
    usage(format!("{e:#}"))
}

fn nn_numeric(e: &NnError) -> bool {
    matches!(e, NnError::NonFinite(_))
}

fn acoustics_numeric(e: &AcousticsError) -> bool {
    matches!(e, AcousticsError::ZeroAbsorption | AcousticsError::DivisionByZero(_))
}

fn mesh_numeric(e: &MeshError) -> bool {
    matches!(e, MeshError::Degenerate(_))
}

pub fn code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Partial>() {
            return PARTIAL;
        }
        let numeric = if let Some(e) = cause.downcast_ref::<NnError>() {
            nn_numeric(e)
        } else if let Some(e) = cause.downcast_ref::<AcousticsError>() {
            acoustics_numeric(e)
        } else if let Some(e) = cause.downcast_ref::<MeshError>() {
            mesh_numeric(e)
        } else if let Some(e) = cause.downcast_ref::<DatasetError>() {
            match e {
                DatasetError::Nn(e) => nn_numeric(e),
                DatasetError::Acoustics(e) => acoustics_numeric(e),
                _ => false,
            }
        } else {
            false
        };
        if numeric {
            return NUMERIC;
        }
    }
    USAGE
}

pub fn kind(code: u8) -> &'static str {
    match code {
        PARTIAL => "partial_failure",
        NUMERIC => "numeric_failure",
        _ => "usage",
    }
}
