pub mod evaluate;
pub mod export;
pub mod phantom;
pub mod reconstruct;
pub mod simulate;
pub mod train;

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use force_core::io::load_image;
use force_core::Image64;

use crate::error::{usage, CliResult};

/// Parses a comma-separated list of numbers.
pub fn parse_list<T: FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| usage(format!("invalid {what} `{s}`")))
        })
        .collect()
}

/// `<path><suffix>` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// All `.timg` files of a directory, sorted by name.
pub fn load_image_dir(dir: &Path, fov: f64) -> CliResult<Vec<(String, Image64)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| usage(format!("cannot read directory {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "timg"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(usage(format!("no .timg images in {}", dir.display())));
    }
    paths
        .into_iter()
        .map(|p| {
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((name, load_image(&p, fov)?))
        })
        .collect()
}

/// Fails when an output path would land in a missing directory.
pub fn check_writable(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(usage(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}
