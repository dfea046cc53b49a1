use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use swarmx_core::campaign::{self, RunRecord};
use swarmx_core::xplain::{self, AttributionRow, ForestParams, SurrogateReport, FEATURE_NAMES, NUM_FEATURES};
use swarmx_core::{Error, Topology};
use thiserror::Error as ThisError;

use crate::config::CampaignSpec;
use crate::svg;

/// Exit code 2 for usage or configuration problems, 1 for data or runtime failures.
#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::UnsupportedFunction(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| io_err(path, e))
}

fn read_records(path: &Path) -> Result<Vec<RunRecord>, CliError> {
    let records = campaign::read_runs_csv(open(path)?)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    if records.is_empty() {
        return Err(CliError::Runtime(format!("{}: no run records", path.display())));
    }
    Ok(records)
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub records: usize,
    pub path: PathBuf,
    pub elapsed: Duration,
}

pub fn cmd_run(spec: &CampaignSpec, workers: Option<usize>) -> Result<RunSummary, CliError> {
    spec.validate()?;
    let start = Instant::now();
    let plan = spec.plan();
    plan.validate()?;
    let records = campaign::execute_campaign(&plan, workers).map_err(|e| match e {
        Error::Config(_) => CliError::Usage(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    })?;
    let path = spec.output_dir.join("runs.csv");
    let mut out = create(&path)?;
    campaign::write_runs_csv(&mut out, &records)?;
    out.flush().map_err(|e| io_err(&path, e))?;
    Ok(RunSummary { records: records.len(), path, elapsed: start.elapsed() })
}

pub fn cmd_stats(runs_csv: &Path, out: &Path) -> Result<usize, CliError> {
    let records = read_records(runs_csv)?;
    let rows = campaign::aggregate(&records)?;
    let mut w = create(out)?;
    campaign::write_aggregate_csv(&mut w, &rows)?;
    w.flush().map_err(|e| io_err(out, e))?;
    Ok(rows.len())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExplainMode {
    Exact,
    Surrogate,
    Both,
}

impl FromStr for ExplainMode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "exact" => Ok(ExplainMode::Exact),
            "surrogate" => Ok(ExplainMode::Surrogate),
            "both" => Ok(ExplainMode::Both),
            other => Err(CliError::Usage(format!("unknown mode '{other}' (expected exact|surrogate|both)"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ExplainOptions {
    pub mode: ExplainMode,
    pub forest: ForestParams,
    pub permutations: usize,
}

impl Default for ExplainOptions {
    fn default() -> Self {
        Self { mode: ExplainMode::Both, forest: ForestParams::default(), permutations: 256 }
    }
}

#[derive(Clone, Debug)]
pub struct ExplainOutput {
    pub attributions: PathBuf,
    pub surrogate: PathBuf,
    pub rows: usize,
}

/// Writes `attr_f{fid}.csv` and `surrogate_f{fid}.csv` into `out_dir`, one
/// block per topology present in the runs file.
pub fn cmd_explain(runs_csv: &Path, fid: u32, out_dir: &Path, opts: &ExplainOptions) -> Result<ExplainOutput, CliError> {
    if opts.permutations == 0 {
        return Err(CliError::Usage("permutations must be >= 1".into()));
    }
    let records = read_records(runs_csv)?;
    let mut topologies: Vec<Topology> = records.iter().filter(|r| r.fid == fid).map(|r| r.topology).collect();
    topologies.sort();
    topologies.dedup();
    if topologies.is_empty() {
        return Err(CliError::Runtime(format!("no records for fid {fid}")));
    }

    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for topology in topologies {
        let fm = xplain::build_feature_matrix(&records, topology, Some(fid))?;
        let exact = xplain::ExactShapley::new(&fm)
            .map_err(|e| CliError::Runtime(format!("{topology} f{fid}: grid incomplete ({e})")))?;
        let model = xplain::fit_surrogate(&fm, opts.forest)?;
        reports.push(SurrogateReport {
            fid,
            topology,
            r2_train: model.r2_train(),
            trees: opts.forest.trees,
            max_depth: opts.forest.max_depth,
            seed: opts.forest.seed,
        });
        let exact_phi = match opts.mode {
            ExplainMode::Exact | ExplainMode::Both => Some(
                (0..fm.len()).map(|i| exact.values(i)).collect::<Result<Vec<_>, _>>()?,
            ),
            ExplainMode::Surrogate => None,
        };
        let surrogate_phi = match opts.mode {
            ExplainMode::Surrogate | ExplainMode::Both => {
                Some(xplain::surrogate_attributions(&model, &fm, opts.permutations, opts.forest.seed)?)
            }
            ExplainMode::Exact => None,
        };
        for i in 0..fm.len() {
            for j in 0..NUM_FEATURES {
                rows.push(AttributionRow {
                    fid,
                    topology,
                    config_index: fm.config_indices()[i],
                    feature: FEATURE_NAMES[j].to_string(),
                    feature_value: fm.rows()[i][j],
                    shap_exact: exact_phi.as_ref().map(|p| p[i][j]),
                    shap_surrogate: surrogate_phi.as_ref().map(|p| p[i][j].shap_value),
                });
            }
        }
    }

    let attributions = out_dir.join(format!("attr_f{fid}.csv"));
    let surrogate = out_dir.join(format!("surrogate_f{fid}.csv"));
    let mut w = create(&attributions)?;
    xplain::write_attributions_csv(&mut w, &rows)?;
    w.flush().map_err(|e| io_err(&attributions, e))?;
    let mut w = create(&surrogate)?;
    xplain::write_surrogate_csv(&mut w, &reports)?;
    w.flush().map_err(|e| io_err(&surrogate, e))?;
    Ok(ExplainOutput { attributions, surrogate, rows: rows.len() })
}

/// Renders the attribution file as a beeswarm SVG. Returns the number of
/// plotted points.
pub fn cmd_plot(attribution_csv: &Path, out_svg: &Path) -> Result<usize, CliError> {
    let rows = xplain::read_attributions_csv(open(attribution_csv)?)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", attribution_csv.display())))?;
    let points = xplain::swarm_plot_data(
        rows.iter().filter_map(|r| r.shap().map(|s| (r.feature.as_str(), r.feature_value, s))),
    );
    let doc = svg::render_swarm(&points);
    let mut w = create(out_svg)?;
    w.write_all(doc.as_bytes()).map_err(|e| io_err(out_svg, e))?;
    w.flush().map_err(|e| io_err(out_svg, e))?;
    Ok(points.len())
}
