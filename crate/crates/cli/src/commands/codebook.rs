use adsched_core::codebook::{build_codebook, KMeansParams};
use adsched_core::DirStore;

use super::load_manifest;
use crate::error::{CmdResult, Failure};
use crate::BuildCodebookArgs;

pub fn run(args: &BuildCodebookArgs) -> CmdResult {
    if !args.embeddings.is_dir() {
        return Err(Failure::runtime(format!(
            "embeddings directory {} does not exist",
            args.embeddings.display()
        )));
    }
    let manifest = load_manifest(&args.manifest)?;
    let store = DirStore::new(&args.embeddings);
    let params = KMeansParams {
        max_iters: args.max_iters,
        tol: args.tol,
    };
    let cb = build_codebook(&manifest, &store, args.k, args.subset_fraction, args.seed, &params)?;
    cb.save(&args.out)
        .map_err(|e| Failure::runtime(format!("writing {}: {e}", args.out.display())))?;

    let fit = cb.fit().expect("freshly built codebooks carry fit stats");
    eprintln!("K = {}", cb.k());
    eprintln!("dimension = {}", cb.dim());
    eprintln!("subset size = {} of {}", fit.subset_size, manifest.len());
    eprintln!(
        "iterations = {}{}",
        cb.iterations(),
        if fit.converged { "" } else { " (max_iters reached)" }
    );
    eprintln!("inertia = {}", fit.inertia);
    eprintln!("wrote {}", args.out.display());
    Ok(())
}
