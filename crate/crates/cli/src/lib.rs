//! Front end for `bellbound-core`: evaluation, bound reports, grid scans,
//! extremal values and the self-verification suites, rendered as text, CSV
//! or JSON.
//!
//! Every command returns its complete output as a string so the binary, the
//! tests and the acceptance harness all see the same bytes.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod format;
pub mod grid;
pub mod suites;

use bellbound_core::BellError;

/// Process exit codes, shared by every command.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const DOMAIN: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const VERIFY_FAILED: i32 = 4;
}

/// Environment variable overriding the series `p_max`.
pub const PMAX_ENV: &str = "BELLBOUND_PMAX";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn domain(message: impl Into<String>) -> Self {
        CliError {
            code: exit::DOMAIN,
            message: message.into(),
        }
    }
}

/// Domain, regime and parse errors exit 2; everything numerical exits 3.
pub fn exit_code_for(e: &BellError) -> i32 {
    if e.is_domain() {
        exit::DOMAIN
    } else {
        exit::NUMERIC
    }
}

impl From<BellError> for CliError {
    fn from(e: BellError) -> Self {
        CliError {
            code: exit_code_for(&e),
            message: e.to_string(),
        }
    }
}

/// A rendered command result and the exit code it should produce.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: String,
    pub code: i32,
}

impl Output {
    pub fn ok(body: String) -> Self {
        Output {
            body,
            code: exit::SUCCESS,
        }
    }
}
