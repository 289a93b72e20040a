pub mod config;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod pipeline;
pub mod synth;
