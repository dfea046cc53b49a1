//! Campaign specifications: flat `key = value` files overridden by flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use swarmx_core::bench::ProblemId;
use swarmx_core::campaign::{CampaignPlan, ConfigGrid};
use swarmx_core::Topology;

use crate::commands::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridChoice {
    Full,
    Reduced,
}

impl FromStr for GridChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "full" => Ok(GridChoice::Full),
            "reduced" => Ok(GridChoice::Reduced),
            other => Err(CliError::Usage(format!("unknown grid '{other}' (expected full|reduced)"))),
        }
    }
}

impl fmt::Display for GridChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridChoice::Full => "full",
            GridChoice::Reduced => "reduced",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignSpec {
    pub topology: Topology,
    pub fids: Vec<ProblemId>,
    pub dim: usize,
    pub budget: usize,
    pub instances: u32,
    pub runs: u32,
    pub grid: GridChoice,
    pub output_dir: PathBuf,
}

impl CampaignSpec {
    pub fn plan(&self) -> CampaignPlan {
        let grid = match self.grid {
            GridChoice::Full => ConfigGrid::full(),
            GridChoice::Reduced => ConfigGrid::reduced(),
        };
        CampaignPlan {
            topology: self.topology,
            grid,
            fids: self.fids.clone(),
            instances: self.instances,
            runs: self.runs,
            budget: self.budget,
            dim: self.dim,
        }
    }

    /// Builds a spec from `key = value` settings. Missing keys take the
    /// defaults (all supported functions, dim 2, budget 100, 5 instances,
    /// 5 runs, full grid); `topology` and `out` are required.
    pub fn from_settings(settings: &BTreeMap<String, String>) -> Result<Self, CliError> {
        const KNOWN: [&str; 8] = ["topology", "fids", "dim", "budget", "instances", "runs", "grid", "out"];
        if let Some(bad) = settings.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(CliError::Usage(format!("unknown setting '{bad}'")));
        }
        let get = |k: &str| settings.get(k).map(String::as_str);
        let topology = get("topology")
            .ok_or_else(|| CliError::Usage("missing topology".into()))?
            .parse::<Topology>()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let fids = match get("fids") {
            Some(list) => parse_fids(list)?,
            None => ProblemId::all().collect(),
        };
        let spec = CampaignSpec {
            topology,
            fids,
            dim: parse_num(get("dim"), "dim", 2)?,
            budget: parse_num(get("budget"), "budget", 100)?,
            instances: parse_num(get("instances"), "instances", 5)?,
            runs: parse_num(get("runs"), "runs", 5)?,
            grid: get("grid").map(str::parse).transpose()?.unwrap_or(GridChoice::Full),
            output_dir: PathBuf::from(get("out").ok_or_else(|| CliError::Usage("missing output directory".into()))?),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.budget < 1 || self.instances < 1 || self.runs < 1 || self.dim < 1 {
            return Err(CliError::Usage("budget, instances, runs and dim must be >= 1".into()));
        }
        if self.fids.is_empty() {
            return Err(CliError::Usage("no functions selected".into()));
        }
        Ok(())
    }
}

fn parse_num<T: FromStr>(raw: Option<&str>, key: &str, default: T) -> Result<T, CliError> {
    match raw {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| CliError::Usage(format!("invalid {key} '{v}'"))),
    }
}

pub fn parse_fids(list: &str) -> Result<Vec<ProblemId>, CliError> {
    let mut fids = Vec::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let fid: u32 = part.parse().map_err(|_| CliError::Usage(format!("invalid function id '{part}'")))?;
        let pid = ProblemId::new(fid).map_err(|e| CliError::Usage(e.to_string()))?;
        if !fids.contains(&pid) {
            fids.push(pid);
        }
    }
    fids.sort();
    Ok(fids)
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are ignored.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", no + 1)))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}
