use rayon::prelude::*;

use fluorocnn_core::eval::{assemble, run_fold, FoldOutcome, LoocvData, LoocvRun};
use fluorocnn_core::{Dataset, HyperParams, ParameterId};

use crate::error::{Error, Result};

/// Leave-one-oil-out cross-validation with folds spread over `jobs` threads
/// (`0` = all cores). Results do not depend on `jobs`.
pub fn loocv_parallel(
    dataset: &Dataset,
    parameter: ParameterId,
    hp: &HyperParams,
    seed: u64,
    jobs: usize,
) -> Result<(LoocvData, LoocvRun)> {
    let data = LoocvData::new(dataset, parameter)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Input(format!("cannot start {jobs} worker threads: {e}")))?;
    let outcomes: Vec<FoldOutcome> = pool.install(|| {
        (0..data.n_oils())
            .into_par_iter()
            .map(|i| run_fold(&data, i, hp, seed).map_err(|e| e.in_fold(&data.oils[i].oil_id)))
            .collect::<fluorocnn_core::Result<Vec<_>>>()
    })?;
    let run = assemble(parameter, outcomes)?;
    Ok((data, run))
}
