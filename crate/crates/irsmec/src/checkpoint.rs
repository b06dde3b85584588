//! Denoiser and policy checkpoints on disk.

use std::fs;
use std::path::Path;

use irsmec_core::nn::Mlp;

use crate::Error;

pub fn save_mlp(path: &Path, net: &Mlp) -> Result<(), Error> {
    fs::write(path, net.to_bytes())?;
    Ok(())
}

pub fn load_mlp(path: &Path) -> Result<Mlp, Error> {
    let bytes = fs::read(path)?;
    Ok(Mlp::from_bytes(&bytes)?)
}
