//! Full-factorial hyperparameter campaigns.
//!
//! A campaign runs every grid configuration on every requested function,
//! instance and repetition, scores each run by AOCC and produces flat
//! [`RunRecord`]s. Record content is fully determined by the plan: every run
//! draws its own seed from [`derive_seed`], so worker count and scheduling
//! order do not matter.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::{ProblemId, ProblemInstance};
use crate::error::{Error, Result};
use crate::metrics::{self, AoccBounds};
use crate::seed;
use crate::swarm::{self, Hyperparameters};
use crate::topology::Topology;

pub const FEATURE_NAMES: [&str; 7] = ["c1", "c2", "w", "n", "k", "p", "r"];

pub const RUNS_HEADER: [&str; 15] = [
    "topology", "config_index", "c1", "c2", "w", "n", "k", "p", "r", "fid", "iid", "run", "seed", "aocc", "final_best",
];

pub const AGGREGATE_HEADER: [&str; 8] = [
    "fid", "topology", "single_best_mean", "single_best_std", "avg_best_mean", "avg_best_std", "all_mean", "all_std",
];

/// Value levels of every tunable hyperparameter.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigGrid {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub w: Vec<f64>,
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub p: Vec<u32>,
    pub r: Vec<u32>,
}

impl ConfigGrid {
    pub fn full() -> Self {
        Self {
            c1: vec![0.3, 0.5, 0.7, 0.9],
            c2: vec![0.2, 0.4, 0.6, 0.7],
            w: vec![0.9, 1.2, 0.4],
            n: vec![50, 100, 150],
            k: vec![1, 2, 3],
            p: vec![1, 2],
            r: vec![1, 2],
        }
    }

    /// First level of every row; a single configuration for smoke tests.
    pub fn reduced() -> Self {
        let f = Self::full();
        Self {
            c1: f.c1[..1].to_vec(),
            c2: f.c2[..1].to_vec(),
            w: f.w[..1].to_vec(),
            n: f.n[..1].to_vec(),
            k: f.k[..1].to_vec(),
            p: f.p[..1].to_vec(),
            r: f.r[..1].to_vec(),
        }
    }

    fn radices(&self) -> [usize; 7] {
        [self.c1.len(), self.c2.len(), self.w.len(), self.n.len(), self.k.len(), self.p.len(), self.r.len()]
    }

    pub fn len(&self) -> usize {
        self.radices().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Configuration at lexicographic position `index` (r varies fastest).
    pub fn point(&self, index: usize) -> Option<GridPoint> {
        if index >= self.len() {
            return None;
        }
        let mut digits = [0usize; 7];
        let mut rest = index;
        for (slot, radix) in digits.iter_mut().zip(self.radices()).rev() {
            *slot = rest % radix;
            rest /= radix;
        }
        Some(GridPoint {
            c1: self.c1[digits[0]],
            c2: self.c2[digits[1]],
            w: self.w[digits[2]],
            n: self.n[digits[3]],
            k: self.k[digits[4]],
            p: self.p[digits[5]],
            r: self.r[digits[6]],
        })
    }

    pub fn enumerate(&self) -> Vec<GridPoint> {
        (0..self.len()).filter_map(|i| self.point(i)).collect()
    }
}

impl Default for ConfigGrid {
    fn default() -> Self {
        Self::full()
    }
}

/// One hyperparameter tuple, independent of topology.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub c1: f64,
    pub c2: f64,
    pub w: f64,
    pub n: usize,
    pub k: usize,
    pub p: u32,
    pub r: u32,
}

impl GridPoint {
    pub fn hyperparameters(&self, topology: Topology) -> Hyperparameters<f64> {
        Hyperparameters { topology, c1: self.c1, c2: self.c2, w: self.w, n: self.n, k: self.k, p: self.p, r: self.r }
    }

    /// Feature vector in [`FEATURE_NAMES`] order.
    pub fn features(&self) -> [f64; 7] {
        [self.c1, self.c2, self.w, self.n as f64, self.k as f64, self.p as f64, self.r as f64]
    }
}

/// The full 4·4·3·3·3·2·2 = 1728 tuple grid in lexicographic order.
pub fn enumerate_grid() -> Vec<GridPoint> {
    ConfigGrid::full().enumerate()
}

/// Seed of one run: `mix_words([RUN_DOMAIN, topology code (star=0, ring=1,
/// vonneumann=2), config_index, fid, iid, run])`, see [`crate::seed`].
pub fn derive_seed(topology: Topology, config_index: usize, fid: u32, iid: u32, run: u32) -> u64 {
    seed::mix_words(&[
        seed::RUN_DOMAIN,
        topology.seed_code(),
        config_index as u64,
        fid as u64,
        iid as u64,
        run as u64,
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub topology: Topology,
    pub config_index: usize,
    pub c1: f64,
    pub c2: f64,
    pub w: f64,
    pub n: usize,
    pub k: usize,
    pub p: u32,
    pub r: u32,
    pub fid: u32,
    pub iid: u32,
    pub run: u32,
    pub seed: u64,
    pub aocc: f64,
    pub final_best: f64,
}

impl RunRecord {
    pub fn point(&self) -> GridPoint {
        GridPoint { c1: self.c1, c2: self.c2, w: self.w, n: self.n, k: self.k, p: self.p, r: self.r }
    }

    fn sort_key(&self) -> (Topology, usize, u32, u32, u32) {
        (self.topology, self.config_index, self.fid, self.iid, self.run)
    }
}

pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by_key(|a| a.sort_key());
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignPlan {
    pub topology: Topology,
    pub grid: ConfigGrid,
    pub fids: Vec<ProblemId>,
    pub instances: u32,
    pub runs: u32,
    pub budget: usize,
    pub dim: usize,
}

impl CampaignPlan {
    /// Five instances, five runs each, 100 iterations, two dimensions.
    pub fn new(topology: Topology, grid: ConfigGrid, fids: Vec<ProblemId>) -> Self {
        Self { topology, grid, fids, instances: 5, runs: 5, budget: 100, dim: 2 }
    }

    pub fn record_count(&self) -> usize {
        self.grid.len() * self.fids.len() * self.instances as usize * self.runs as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 || self.instances == 0 || self.runs == 0 || self.dim == 0 {
            return Err(Error::Config("budget, instances, runs and dim must all be >= 1".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::Config("empty configuration grid".into()));
        }
        if self.fids.is_empty() {
            return Err(Error::Config("no functions selected".into()));
        }
        for point in self.grid.enumerate() {
            point.hyperparameters(self.topology).validate()?;
        }
        Ok(())
    }
}

/// Runs and scores a single coordinate of the campaign.
pub fn run_one(
    topology: Topology,
    config_index: usize,
    point: &GridPoint,
    inst: &ProblemInstance<f64>,
    run: u32,
    budget: usize,
) -> Result<RunRecord> {
    let fid = inst.pid().fid();
    let iid = inst.iid();
    let seed = derive_seed(topology, config_index, fid, iid, run);
    let scored = swarm::run(&point.hyperparameters(topology), inst, budget, seed).and_then(|trace| {
        let aocc = metrics::trace_aocc(&trace, inst.f_opt(), &AoccBounds::default())?;
        Ok((aocc, trace.final_best().unwrap_or(f64::NAN)))
    });
    let (aocc, final_best) = scored.map_err(|e| Error::RunFailed {
        topology: topology.to_string(),
        config_index,
        fid,
        iid,
        run,
        source: Box::new(e),
    })?;
    Ok(RunRecord {
        topology,
        config_index,
        c1: point.c1,
        c2: point.c2,
        w: point.w,
        n: point.n,
        k: point.k,
        p: point.p,
        r: point.r,
        fid,
        iid,
        run,
        seed,
        aocc,
        final_best,
    })
}

/// Executes every run of `plan` on up to `workers` threads (all cores when
/// `None`) and returns the records sorted by coordinate.
pub fn execute_campaign(plan: &CampaignPlan, workers: Option<usize>) -> Result<Vec<RunRecord>> {
    plan.validate()?;
    let mut instances = HashMap::new();
    for &pid in &plan.fids {
        for iid in 1..=plan.instances {
            instances.insert((pid.fid(), iid), ProblemInstance::<f64>::new(pid, iid, plan.dim)?);
        }
    }
    let points = plan.grid.enumerate();
    let tasks: Vec<(usize, u32, u32, u32)> = (0..points.len())
        .flat_map(|c| {
            plan.fids.iter().flat_map(move |pid| {
                (1..=plan.instances).flat_map(move |iid| (1..=plan.runs).map(move |run| (c, pid.fid(), iid, run)))
            })
        })
        .collect();

    let job = || {
        tasks
            .par_iter()
            .map(|&(c, fid, iid, run)| run_one(plan.topology, c, &points[c], &instances[&(fid, iid)], run, plan.budget))
            .collect::<Result<Vec<_>>>()
    };
    let mut records = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(job)?,
        None => job()?,
    };
    sort_records(&mut records);
    Ok(records)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub fid: u32,
    pub topology: Topology,
    pub single_best_mean: f64,
    pub single_best_std: f64,
    pub avg_best_mean: f64,
    pub avg_best_std: f64,
    pub all_mean: f64,
    pub all_std: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for a single value.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn argmax_first(values: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Per-(function, topology) statistics over AOCC.
///
/// The configuration set of each topology is the set of config indices seen
/// for it; every (configuration, function) cell must be present with the same
/// number of runs. `single-best` is the per-function argmax of mean AOCC,
/// `avg-best` the argmax of mean AOCC averaged over all functions of the
/// topology, `all` pools every run of the function. Ties go to the lower
/// config index.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<AggregateRow>> {
    if records.is_empty() {
        return Err(Error::DataIntegrity("no run records".into()));
    }
    type Cells = BTreeMap<(usize, u32), Vec<(u32, u32, f64)>>;
    let mut by_topology: BTreeMap<Topology, Cells> = BTreeMap::new();
    for rec in records {
        by_topology
            .entry(rec.topology)
            .or_default()
            .entry((rec.config_index, rec.fid))
            .or_default()
            .push((rec.iid, rec.run, rec.aocc));
    }

    let mut rows = Vec::new();
    for (topology, mut cells) in by_topology {
        let configs: BTreeSet<usize> = cells.keys().map(|&(c, _)| c).collect();
        let fids: BTreeSet<u32> = cells.keys().map(|&(_, f)| f).collect();
        let mut gaps = Vec::new();
        for &c in &configs {
            for &f in &fids {
                if !cells.contains_key(&(c, f)) {
                    gaps.push(format!("config {c} fid {f}"));
                }
            }
        }
        if !gaps.is_empty() {
            return Err(Error::DataIntegrity(format!("{topology}: missing cells: {}", gaps.join(", "))));
        }
        let mut expected = None;
        for ((c, f), runs) in cells.iter_mut() {
            runs.sort_by_key(|a| (a.0, a.1));
            if runs.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
                return Err(Error::DataIntegrity(format!("{topology}: duplicate runs in config {c} fid {f}")));
            }
            match expected {
                None => expected = Some(runs.len()),
                Some(e) if e != runs.len() => {
                    return Err(Error::DataIntegrity(format!(
                        "{topology}: config {c} fid {f} has {} runs, expected {e}",
                        runs.len()
                    )))
                }
                _ => {}
            }
        }

        let values = |c: usize, f: u32| -> Vec<f64> { cells[&(c, f)].iter().map(|x| x.2).collect() };
        let cell_mean: BTreeMap<(usize, u32), f64> = cells.keys().map(|&(c, f)| ((c, f), mean(&values(c, f)))).collect();
        let avg_best = argmax_first(
            configs
                .iter()
                .map(|&c| (c, fids.iter().map(|&f| cell_mean[&(c, f)]).sum::<f64>() / fids.len() as f64)),
        )
        .expect("non-empty configuration set");

        for &f in &fids {
            let single_best = argmax_first(configs.iter().map(|&c| (c, cell_mean[&(c, f)]))).expect("non-empty");
            let sb = values(single_best, f);
            let ab = values(avg_best, f);
            let all: Vec<f64> = configs.iter().flat_map(|&c| values(c, f)).collect();
            rows.push(AggregateRow {
                fid: f,
                topology,
                single_best_mean: mean(&sb),
                single_best_std: sample_std(&sb),
                avg_best_mean: mean(&ab),
                avg_best_std: sample_std(&ab),
                all_mean: mean(&all),
                all_std: sample_std(&all),
            });
        }
    }
    rows.sort_by_key(|a| (a.fid, a.topology));
    Ok(rows)
}

pub fn write_runs_csv<W: Write>(writer: W, records: &[RunRecord]) -> Result<()> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(RUNS_HEADER)?;
    for rec in &sorted {
        w.serialize(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_runs_csv<R: Read>(reader: R) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().ne(RUNS_HEADER) {
        return Err(Error::DataIntegrity(format!(
            "unexpected runs header '{}', expected '{}'",
            headers.iter().collect::<Vec<_>>().join(","),
            RUNS_HEADER.join(",")
        )));
    }
    Ok(r.deserialize().collect::<std::result::Result<Vec<RunRecord>, _>>()?)
}

pub fn write_aggregate_csv<W: Write>(writer: W, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(AGGREGATE_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aggregate_csv<R: Read>(reader: R) -> Result<Vec<AggregateRow>> {
    let mut r = csv::Reader::from_reader(reader);
    Ok(r.deserialize().collect::<std::result::Result<Vec<AggregateRow>, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(topology: Topology, config_index: usize, fid: u32, iid: u32, run: u32, aocc: f64) -> RunRecord {
        let p = ConfigGrid::full().point(config_index).unwrap();
        RunRecord {
            topology,
            config_index,
            c1: p.c1,
            c2: p.c2,
            w: p.w,
            n: p.n,
            k: p.k,
            p: p.p,
            r: p.r,
            fid,
            iid,
            run,
            seed: derive_seed(topology, config_index, fid, iid, run),
            aocc,
            final_best: 1.0,
        }
    }

    #[test]
    fn grid_shape() {
        let g = enumerate_grid();
        assert_eq!(g.len(), 1728);
        assert_eq!(g[0], GridPoint { c1: 0.3, c2: 0.2, w: 0.9, n: 50, k: 1, p: 1, r: 1 });
        assert_eq!(g[1].r, 2);
        assert_eq!(g[1727], GridPoint { c1: 0.9, c2: 0.7, w: 0.4, n: 150, k: 3, p: 2, r: 2 });
        assert_eq!(ConfigGrid::reduced().enumerate(), vec![g[0]]);
        assert!(ConfigGrid::full().point(1728).is_none());
    }

    #[test]
    fn seeds() {
        let a = derive_seed(Topology::Star, 0, 1, 1, 1);
        assert_eq!(a, derive_seed(Topology::Star, 0, 1, 1, 1));
        assert_ne!(a, derive_seed(Topology::Star, 0, 1, 1, 2));
        assert_ne!(a, derive_seed(Topology::Ring, 0, 1, 1, 1));
    }

    #[test]
    fn std_conventions() {
        assert_eq!(sample_std(&[0.5]), 0.0);
        assert!((sample_std(&[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_config_is_both_bests() {
        let recs: Vec<_> = (1..=2).flat_map(|i| (1..=2).map(move |r| rec(Topology::Star, 5, 1, i, r, 0.1 * (i + r) as f64))).collect();
        let rows = aggregate(&recs).unwrap();
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert_eq!(row.single_best_mean, row.avg_best_mean);
        assert_eq!(row.single_best_mean, row.all_mean);
        assert!((row.all_mean - 0.3).abs() < 1e-12);
    }

    #[test]
    fn dominant_config_wins_everywhere() {
        let mut recs = Vec::new();
        for fid in [1, 3] {
            for run in 1..=3 {
                recs.push(rec(Topology::Ring, 0, fid, 1, run, 0.2 + 0.01 * run as f64));
                recs.push(rec(Topology::Ring, 1, fid, 1, run, 0.6 + 0.01 * run as f64));
            }
        }
        let rows = aggregate(&recs).unwrap();
        for row in rows {
            assert!((row.single_best_mean - 0.62).abs() < 1e-12);
            assert_eq!(row.single_best_mean, row.avg_best_mean);
            assert!((row.all_mean - 0.42).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_cells_detected() {
        let recs = vec![rec(Topology::Star, 0, 1, 1, 1, 0.1), rec(Topology::Star, 1, 2, 1, 1, 0.1)];
        assert!(matches!(aggregate(&recs), Err(Error::DataIntegrity(_))));
        let recs = vec![rec(Topology::Star, 0, 1, 1, 1, 0.1), rec(Topology::Star, 0, 1, 1, 1, 0.2)];
        assert!(aggregate(&recs).is_err());
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let recs = vec![rec(Topology::VonNeumann, 3, 21, 2, 4, 0.123456789012345678), rec(Topology::Star, 0, 1, 1, 1, 1.0 / 3.0)];
        let mut buf = Vec::new();
        write_runs_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("topology,config_index,c1,c2,w,n,k,p,r,fid,iid,run,seed,aocc,final_best\nstar,0,"));
        let back = read_runs_csv(buf.as_slice()).unwrap();
        let mut sorted = recs.clone();
        sort_records(&mut sorted);
        assert_eq!(back, sorted);
        assert!(read_runs_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn micro_campaign_counts_and_determinism() {
        let plan = CampaignPlan { budget: 10, ..CampaignPlan::new(Topology::Ring, ConfigGrid::reduced(), vec![ProblemId::new(1).unwrap()]) };
        let a = execute_campaign(&plan, Some(1)).unwrap();
        assert_eq!(a.len(), 25);
        assert_eq!(a, execute_campaign(&plan, Some(3)).unwrap());
        assert!(a.iter().all(|r| (0.0..=1.0).contains(&r.aocc)));
    }

    #[test]
    fn invalid_plan_rejected() {
        let mut plan = CampaignPlan::new(Topology::Star, ConfigGrid::reduced(), vec![]);
        assert!(execute_campaign(&plan, Some(1)).is_err());
        plan.fids = vec![ProblemId::new(1).unwrap()];
        plan.budget = 0;
        assert!(execute_campaign(&plan, Some(1)).is_err());
    }
}
