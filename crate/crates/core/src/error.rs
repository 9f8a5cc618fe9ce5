use thiserror::Error;

use crate::tiling::Letter;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("beam element {label} is at a pole at omega = {omega}")]
    BeamPole { label: Letter, omega: f64 },

    #[error("generalised Fibonacci number F_{n} overflows 64 bits")]
    Overflow { n: usize },

    #[error("word of length {len} exceeds the cap of {cap} letters")]
    WordCapExceeded { len: u64, cap: u64 },

    #[error("no growth condition covers the tiling rule (m = {m}, l = {l})")]
    UnsupportedRule { m: u32, l: u32 },

    #[error("lower-right entry of the global transfer matrix vanishes at omega = {omega}")]
    DegenerateEntry { omega: f64 },

    #[error("invalid stack description: {0}")]
    InvalidStack(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
