//! Regenerates the shipped synthetic benchmark:
//! `cargo run --example make_fixture -- crates/core/fixtures/synthetic`

use std::path::PathBuf;

use clarifyir::harness::fixture::{generate, DEFAULT_FIXTURE_SEED};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .ok_or("usage: make_fixture <dir>")?;
    generate(DEFAULT_FIXTURE_SEED)?.write(&dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}
