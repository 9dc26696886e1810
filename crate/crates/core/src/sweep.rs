//! Exhaustive (or sampled) comparison of the orbit criterion against the
//! direct orbit search, with resumable checkpoints.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::factor::MonicPolys;
use crate::field::Field;
use crate::orbit::{criterion_from, direct_orbit, CriterionConfig, Evaluations};
use crate::poly::Poly;
use crate::ratfunc::RatFunc;

const BLOCK: usize = 512;

type BlockResult = io::Result<(usize, Vec<(bool, bool)>)>;

/// All reduced `num/den` with both degrees at most `max_degree`, sorted.
pub fn enumerate_ratfuncs(field: &Field, max_degree: usize) -> Vec<RatFunc> {
    enumerate_bounded(field, max_degree, max_degree)
}

/// All reduced `num/den` with `deg num <= max_num` and `deg den <= max_den`,
/// sorted by total degree and then canonical order.
pub fn enumerate_bounded(field: &Field, max_num: usize, max_den: usize) -> Vec<RatFunc> {
    let mut nums = vec![Poly::zero(field)];
    for d in 0..=max_num {
        for monic in MonicPolys::new(field, d) {
            for c in 1..field.q() {
                nums.push(monic.scale(c));
            }
        }
    }
    let dens: Vec<Poly> = (0..=max_den).flat_map(|d| MonicPolys::new(field, d)).collect();
    let mut out = BTreeSet::new();
    for num in &nums {
        for den in &dens {
            if num.is_zero() && !den.is_one() {
                continue;
            }
            if num.gcd(den).is_one() || num.is_zero() {
                out.insert(RatFunc::new(num.clone(), den.clone()).expect("nonzero"));
            }
        }
    }
    out.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub pairs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub config: CriterionConfig,
    pub max_degree: usize,
    /// Restrict to a seeded random sample of pairs instead of all of them.
    pub sample: Option<Sample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub f: String,
    pub g: String,
    pub criterion: bool,
    pub oracle: bool,
    pub agree: bool,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub disagreements: usize,
    /// Blocks restored from a checkpoint rather than recomputed.
    pub resumed_blocks: usize,
}

#[derive(Serialize, Deserialize, PartialEq)]
struct Meta {
    spec: SweepSpec,
    pairs: usize,
    block: usize,
}

#[derive(Serialize, Deserialize)]
struct BlockRecord {
    block: usize,
    results: Vec<(bool, bool)>,
}

/// Ordered pairs `(i, j)` of indices into `universe`, skipping constant pairs.
pub fn sweep_pairs(universe: &[RatFunc], sample: Option<Sample>) -> Vec<(usize, usize)> {
    let n = universe.len();
    let admissible = |i: usize, j: usize| !(universe[i].is_constant() && universe[j].is_constant());
    match sample {
        None => (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| admissible(i, j)).collect(),
        Some(Sample { pairs, seed }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut chosen = BTreeSet::new();
            let total = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| admissible(i, j)).count();
            let target = pairs.min(total);
            while chosen.len() < target {
                let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
                if admissible(i, j) {
                    chosen.insert((i, j));
                }
            }
            chosen.into_iter().collect()
        }
    }
}

fn read_checkpoint(path: &Path, meta: &Meta) -> io::Result<BTreeMap<usize, Vec<(bool, bool)>>> {
    let mut done = BTreeMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(done),
        Err(e) => return Err(e),
    };
    let mut lines = BufReader::new(file).lines();
    match lines.next() {
        None => return Ok(done),
        Some(first) => {
            let found: Meta = serde_json::from_str(&first?).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
            if &found != meta {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("checkpoint {} belongs to a different sweep", path.display()),
                ));
            }
        }
    }
    for line in lines {
        // A torn final line from an interrupted write is simply recomputed.
        if let Ok(record) = serde_json::from_str::<BlockRecord>(&line?) {
            done.insert(record.block, record.results);
        }
    }
    Ok(done)
}

/// Runs the sweep on `workers` threads (all cores if `None`). With a
/// checkpoint path, finished blocks are appended there and reused on restart.
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>, checkpoint: Option<&Path>) -> io::Result<SweepOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(io::Error::other)?;
    pool.install(|| sweep_inner(spec, checkpoint))
}

fn sweep_inner(spec: &SweepSpec, checkpoint: Option<&Path>) -> io::Result<SweepOutcome> {
    let cfg = &spec.config;
    let field = cfg.field();
    let universe = enumerate_ratfuncs(&field, spec.max_degree);
    let pairs = sweep_pairs(&universe, spec.sample);
    let meta = Meta { spec: spec.clone(), pairs: pairs.len(), block: BLOCK };

    let mut done = match checkpoint {
        Some(path) => read_checkpoint(path, &meta)?,
        None => BTreeMap::new(),
    };
    let resumed_blocks = done.len();
    let writer = match checkpoint {
        Some(path) => {
            let mut file = OpenOptions::new().create(true).append(true).open(path)?;
            if file.metadata()?.len() == 0 {
                writeln!(file, "{}", serde_json::to_string(&meta).map_err(io::Error::other)?)?;
            } else {
                // Terminate a possibly torn last line.
                writeln!(file)?;
            }
            Some(Mutex::new(file))
        }
        None => None,
    };

    let blocks: Vec<usize> = (0..pairs.len().div_ceil(BLOCK)).filter(|b| !done.contains_key(b)).collect();
    if !blocks.is_empty() {
        let mut needed = vec![false; universe.len()];
        for &b in &blocks {
            for &(i, j) in &pairs[b * BLOCK..((b + 1) * BLOCK).min(pairs.len())] {
                needed[i] = true;
                needed[j] = true;
            }
        }
        let evals: Vec<Option<Evaluations>> = universe
            .par_iter()
            .zip(needed.par_iter())
            .map(|(f, &need)| need.then(|| Evaluations::new(f, cfg)))
            .collect();
        let computed: Vec<BlockResult> = blocks
            .par_iter()
            .map(|&b| {
                let results: Vec<(bool, bool)> = pairs[b * BLOCK..((b + 1) * BLOCK).min(pairs.len())]
                    .iter()
                    .map(|&(i, j)| {
                        let (a, c) = (evals[i].as_ref().unwrap(), evals[j].as_ref().unwrap());
                        (criterion_from(a, c, cfg.p), direct_orbit(&universe[i], &universe[j]).in_orbit)
                    })
                    .collect();
                if let Some(w) = &writer {
                    let line = serde_json::to_string(&BlockRecord { block: b, results: results.clone() })
                        .map_err(io::Error::other)?;
                    let mut file = w.lock().expect("checkpoint lock");
                    writeln!(file, "{line}")?;
                    file.flush()?;
                }
                Ok((b, results))
            })
            .collect();
        for item in computed {
            let (b, results) = item?;
            done.insert(b, results);
        }
    }

    let mut rows = Vec::with_capacity(pairs.len());
    for (b, results) in &done {
        for (&(i, j), &(criterion, oracle)) in pairs[b * BLOCK..].iter().zip(results) {
            rows.push(SweepRow {
                f: universe[i].to_string(),
                g: universe[j].to_string(),
                criterion,
                oracle,
                agree: criterion == oracle,
            });
        }
    }
    let disagreements = rows.iter().filter(|r| !r.agree).count();
    Ok(SweepOutcome { rows, disagreements, resumed_blocks })
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(io::Error::other)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universe_sizes() {
        let f2 = Field::new(2, 1).unwrap();
        // Degree <= 1 over F_2: 0, 1, t, t+1, 1/t, 1/(t+1), t/(t+1), (t+1)/t.
        assert_eq!(enumerate_ratfuncs(&f2, 1).len(), 8);
        let all = enumerate_ratfuncs(&f2, 2);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all.iter().all(|r| r.num().deg0() <= 2 && r.den().deg0() <= 2));
    }

    #[test]
    fn small_sweep_agrees_and_resumes() {
        let spec = SweepSpec { config: CriterionConfig::choose(0, 2, 1).unwrap(), max_degree: 1, sample: None };
        let plain = run_sweep(&spec, Some(2), None).unwrap();
        assert_eq!(plain.rows.len(), 8 * 8 - 4);
        assert_eq!(plain.disagreements, 0);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.checkpoint");
        let first = run_sweep(&spec, Some(1), Some(&path)).unwrap();
        let again = run_sweep(&spec, Some(3), Some(&path)).unwrap();
        assert_eq!(again.resumed_blocks, 1);
        assert_eq!(first.rows, again.rows);
        assert_eq!(first.rows, plain.rows);

        let mut other = spec.clone();
        other.max_degree = 0;
        assert!(run_sweep(&other, None, Some(&path)).is_err());
    }

    #[test]
    fn sample_is_deterministic() {
        let f3 = Field::new(3, 1).unwrap();
        let universe = enumerate_ratfuncs(&f3, 1);
        let s = Some(Sample { pairs: 50, seed: 7 });
        assert_eq!(sweep_pairs(&universe, s), sweep_pairs(&universe, s));
        assert_eq!(sweep_pairs(&universe, s).len(), 50);
    }

    #[test]
    fn csv_columns() {
        let rows = vec![SweepRow { f: "t^2".into(), g: "t".into(), criterion: true, oracle: true, agree: true }];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "f,g,criterion,oracle,agree\nt^2,t,true,true,true\n");
    }
}
