use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use diagonal_core::cli::{main_with, JobConfig, WORKDIR_ENV};

fn main() -> ExitCode {
    let config = JobConfig::parse();
    let workdir = std::env::var_os(WORKDIR_ENV).map(PathBuf::from);
    ExitCode::from(main_with(&config, workdir.as_deref()) as u8)
}
