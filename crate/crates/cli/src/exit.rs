//! Process exit codes, one per failure class.

use std::fmt;

use skywatch_core::Error;

pub const USAGE: u8 = 1;
pub const IO: u8 = 2;
pub const CONFIG: u8 = 3;
pub const DATA: u8 = 4;

/// Error explicitly tagged with an exit code.
#[derive(Debug)]
pub struct Tagged {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for Tagged {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Tagged {}

pub fn config(message: impl Into<String>) -> anyhow::Error {
    Tagged {
        code: CONFIG,
        message: message.into(),
    }
    .into()
}

pub fn data(message: impl Into<String>) -> anyhow::Error {
    Tagged {
        code: DATA,
        message: message.into(),
    }
    .into()
}

fn core_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Format(_) => IO,
        Error::InvalidConfig(_) | Error::BadParams(_) => CONFIG,
        _ => DATA,
    }
}

pub fn code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(t) = cause.downcast_ref::<Tagged>() {
            return t.code;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return core_code(e);
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return IO;
        }
    }
    DATA
}
