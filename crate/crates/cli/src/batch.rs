//! Parallel butterfly batches with atomic checkpoints.
//!
//! Fractions are processed in dataset order, in blocks of [`CHECKPOINT_EVERY`].
//! A block is computed on the worker pool, appended to the output file and then
//! recorded in the checkpoint, so the completed set is always a prefix of the
//! dataset order and the file offset in the checkpoint marks a row boundary.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use harper_core::butterfly::{compute_row, fractions, validate, ButterflyDataset, ButterflyRow};
use harper_core::RationalFrequency;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::formats::{dataset_config, dataset_preamble, dataset_rows};

pub const CHECKPOINT_EVERY: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchCheckpoint {
    pub config_hash: String,
    /// `(p, q)` of every finished fraction, in dataset order.
    pub completed: Vec<(u64, u64)>,
    /// Length of the output file after the last finished block.
    pub offset: u64,
    pub total: usize,
}

#[derive(Debug, Clone)]
pub struct BatchOptions {
    pub q_max: u64,
    pub beta: f64,
    pub min_width: f64,
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    pub resume: bool,
    /// Stop at the first checkpoint with at least this many fractions done.
    pub stop_after: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchOutcome {
    Complete { rows: usize },
    Stopped { completed: usize, total: usize },
}

#[derive(Debug)]
pub enum BatchError {
    Io(io::Error),
    Invalid(String),
}

impl From<io::Error> for BatchError {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

impl std::fmt::Display for BatchError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Io(e) => write!(f, "{e}"),
            Self::Invalid(m) => write!(f, "{m}"),
        }
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, BatchError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| BatchError::Invalid(format!("worker pool: {e}")))
}

fn compute_block(
    pool: &rayon::ThreadPool,
    block: &[RationalFrequency],
    beta: f64,
    min_width: f64,
) -> Vec<ButterflyRow> {
    // indexed collect keeps dataset order whatever the completion order
    pool.install(|| block.par_iter().map(|&f| compute_row(f, beta, min_width)).collect())
}

/// Whole dataset in memory.
pub fn compute_dataset(q_max: u64, beta: f64, min_width: f64, workers: usize) -> Result<ButterflyDataset, BatchError> {
    validate(q_max, beta).map_err(|e| BatchError::Invalid(e.to_string()))?;
    let fracs = fractions(q_max).map_err(|e| BatchError::Invalid(e.to_string()))?;
    let rows = compute_block(&pool(workers)?, &fracs, beta, min_width);
    Ok(ButterflyDataset { beta, q_max, min_width, rows })
}

pub fn read_checkpoint(path: &Path) -> Result<BatchCheckpoint, BatchError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| BatchError::Invalid(format!("checkpoint {}: {e}", path.display())))
}

/// Write-temp-then-rename.
pub fn write_checkpoint(path: &Path, ck: &BatchCheckpoint) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = File::create(&tmp)?;
        f.write_all(serde_json::to_string_pretty(ck).expect("checkpoint serializes").as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Runs (or resumes) a batch writing the dataset file at `out`.
pub fn run_batch(opts: &BatchOptions, out: &Path) -> Result<BatchOutcome, BatchError> {
    validate(opts.q_max, opts.beta).map_err(|e| BatchError::Invalid(e.to_string()))?;
    let config: RunConfig = dataset_config(opts.q_max, opts.beta, opts.min_width);
    let hash = config.hash();
    let fracs = fractions(opts.q_max).map_err(|e| BatchError::Invalid(e.to_string()))?;
    let total = fracs.len();

    let (mut file, mut ck) = match (&opts.checkpoint, opts.resume) {
        (Some(path), true) => {
            let ck = read_checkpoint(path)?;
            if ck.config_hash != hash {
                return Err(BatchError::Invalid("checkpoint belongs to a different configuration".into()));
            }
            let prefix: Vec<(u64, u64)> = fracs.iter().take(ck.completed.len()).map(|f| (f.p(), f.q())).collect();
            if prefix != ck.completed || ck.total != total {
                return Err(BatchError::Invalid("checkpoint does not match the dataset order".into()));
            }
            let file = OpenOptions::new().write(true).open(out)?;
            if file.metadata()?.len() < ck.offset {
                return Err(BatchError::Invalid("output file is shorter than the checkpoint offset".into()));
            }
            // drop anything written after the last recorded block
            file.set_len(ck.offset)?;
            (file, ck)
        }
        (None, true) => return Err(BatchError::Invalid("resuming needs a checkpoint path".into())),
        _ => {
            let mut file = File::create(out)?;
            let pre = dataset_preamble(&config, opts.q_max, opts.beta, opts.min_width);
            file.write_all(pre.as_bytes())?;
            let ck = BatchCheckpoint { config_hash: hash, completed: Vec::new(), offset: pre.len() as u64, total };
            (file, ck)
        }
    };

    let pool = pool(opts.workers)?;
    use std::io::Seek;
    file.seek(io::SeekFrom::Start(ck.offset))?;
    while ck.completed.len() < total {
        if let (Some(n), Some(_)) = (opts.stop_after, &opts.checkpoint) {
            if ck.completed.len() >= n {
                return Ok(BatchOutcome::Stopped { completed: ck.completed.len(), total });
            }
        }
        let start = ck.completed.len();
        let block = &fracs[start..(start + CHECKPOINT_EVERY).min(total)];
        let rows = compute_block(&pool, block, opts.beta, opts.min_width);
        let text: String = rows.iter().map(dataset_rows).collect();
        file.write_all(text.as_bytes())?;
        file.sync_data()?;
        ck.offset += text.len() as u64;
        ck.completed.extend(block.iter().map(|f| (f.p(), f.q())));
        if let Some(path) = &opts.checkpoint {
            write_checkpoint(path, &ck)?;
        }
    }
    Ok(BatchOutcome::Complete { rows: total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::dataset_file;
    use harper_core::spectrum::DEFAULT_MIN_WIDTH;

    fn opts(q_max: u64, workers: usize, checkpoint: Option<PathBuf>) -> BatchOptions {
        BatchOptions {
            q_max,
            beta: 0.8,
            min_width: DEFAULT_MIN_WIDTH,
            workers,
            checkpoint,
            resume: false,
            stop_after: None,
        }
    }

    #[test]
    fn file_matches_in_memory_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("d.csv");
        assert_eq!(run_batch(&opts(9, 3, None), &out).unwrap(), BatchOutcome::Complete { rows: 29 });
        let mem = compute_dataset(9, 0.8, DEFAULT_MIN_WIDTH, 2).unwrap();
        let expected = dataset_file(&dataset_config(9, 0.8, DEFAULT_MIN_WIDTH), &mem);
        assert_eq!(fs::read_to_string(&out).unwrap(), expected);
    }

    #[test]
    fn interrupted_run_resumes_identically() {
        let dir = tempfile::tempdir().unwrap();
        let whole = dir.path().join("whole.csv");
        run_batch(&opts(13, 1, None), &whole).unwrap();

        let part = dir.path().join("part.csv");
        let ck = dir.path().join("ck.json");
        let mut o = opts(13, 2, Some(ck.clone()));
        o.stop_after = Some(1);
        assert_eq!(run_batch(&o, &part).unwrap(), BatchOutcome::Stopped { completed: 32, total: 59 });
        assert_eq!(read_checkpoint(&ck).unwrap().completed.len(), 32);
        // junk past the recorded offset, as left by a crash mid-block
        let mut f = OpenOptions::new().append(true).open(&part).unwrap();
        f.write_all(b"1,2,garbage\n").unwrap();
        o.stop_after = None;
        o.resume = true;
        assert_eq!(run_batch(&o, &part).unwrap(), BatchOutcome::Complete { rows: 59 });
        assert_eq!(fs::read(&part).unwrap(), fs::read(&whole).unwrap());
    }

    #[test]
    fn resume_rejects_other_configuration() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("d.csv");
        let ck = dir.path().join("ck.json");
        run_batch(&opts(5, 1, Some(ck.clone())), &out).unwrap();
        let mut o = opts(5, 1, Some(ck));
        o.beta = 0.7;
        o.resume = true;
        assert!(matches!(run_batch(&o, &out), Err(BatchError::Invalid(_))));
    }
}
