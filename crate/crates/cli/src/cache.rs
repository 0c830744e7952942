//! On-disk cache of reference optima, one JSON file per problem.

use std::fs;
use std::path::{Path, PathBuf};

use zoqn::problems::Problem;
use zoqn::solver::{compute_reference_optimum, ReferenceOptimum};

use crate::error::CliResult;

pub const CACHE_ENV: &str = "ZOQN_CACHE_DIR";

/// `$ZOQN_CACHE_DIR`, or `zoqn-cache` under the system temp directory.
pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV).map_or_else(|| std::env::temp_dir().join("zoqn-cache"), PathBuf::from)
}

/// File name for `problem`. The optimum does not depend on the noise
/// model; the random instance is keyed by its seed.
pub fn cache_key(problem: &Problem, instance_seed: u64) -> String {
    match problem.nonsmooth_data() {
        Some(_) => format!("{}-{}-d{}.json", problem.name(), instance_seed, problem.dim()),
        None => format!("{}.json", problem.name()),
    }
}

/// Cached optimum if present and readable, else computed and stored. A
/// cache that cannot be written is skipped silently.
pub fn reference_optimum(problem: &Problem, instance_seed: u64, dir: Option<&Path>) -> CliResult<ReferenceOptimum> {
    let Some(dir) = dir else {
        return Ok(compute_reference_optimum(problem)?);
    };
    let path = dir.join(cache_key(problem, instance_seed));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(cached) = serde_json::from_str::<ReferenceOptimum>(&text) {
            if cached.x_ref.len() == problem.dim() {
                return Ok(cached);
            }
        }
    }
    let fresh = compute_reference_optimum(problem)?;
    if fs::create_dir_all(dir).is_ok() {
        if let Ok(text) = serde_json::to_string_pretty(&fresh) {
            let _ = fs::write(&path, text);
        }
    }
    Ok(fresh)
}
