//! Communication topologies: who shares best-known positions with whom.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::swarm::Hyperparameters;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Star,
    Ring,
    #[serde(rename = "vonneumann")]
    VonNeumann,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::Star, Topology::Ring, Topology::VonNeumann];

    pub fn as_str(self) -> &'static str {
        match self {
            Topology::Star => "star",
            Topology::Ring => "ring",
            Topology::VonNeumann => "vonneumann",
        }
    }

    /// Word mixed into run seeds.
    pub fn seed_code(self) -> u64 {
        match self {
            Topology::Star => 0,
            Topology::Ring => 1,
            Topology::VonNeumann => 2,
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "star" => Ok(Topology::Star),
            "ring" => Ok(Topology::Ring),
            "vonneumann" | "von-neumann" | "von_neumann" => Ok(Topology::VonNeumann),
            other => Err(Error::Config(format!("unknown topology '{other}'"))),
        }
    }
}

/// Per-particle neighbor sets. Every set contains its own particle.
#[derive(Clone, Debug)]
pub enum NeighborhoodAssignment {
    /// Every particle sees every particle.
    Full(usize),
    /// Explicit sets, each sorted ascending.
    Sets(Vec<Vec<usize>>),
}

impl NeighborhoodAssignment {
    pub fn len(&self) -> usize {
        match self {
            NeighborhoodAssignment::Full(n) => *n,
            NeighborhoodAssignment::Sets(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sorted neighbor indices of particle `i`.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        match self {
            NeighborhoodAssignment::Full(n) => (0..*n).collect(),
            NeighborhoodAssignment::Sets(s) => s[i].clone(),
        }
    }

    pub fn to_sets(&self) -> Vec<Vec<usize>> {
        (0..self.len()).map(|i| self.neighbors(i)).collect()
    }

    /// For every particle, the index of the lowest value within its
    /// neighborhood. Ties go to the lowest index.
    pub fn best_indices<T: Scalar>(&self, values: &[T]) -> Vec<usize> {
        match self {
            NeighborhoodAssignment::Full(n) => vec![argmin(values, 0..*n); *n],
            NeighborhoodAssignment::Sets(s) => {
                s.iter().map(|set| argmin(values, set.iter().copied())).collect()
            }
        }
    }
}

impl PartialEq for NeighborhoodAssignment {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && (0..self.len()).all(|i| self.neighbors(i) == other.neighbors(i))
    }
}

fn argmin<T: Scalar>(values: &[T], indices: impl Iterator<Item = usize>) -> usize {
    let mut best: Option<usize> = None;
    for j in indices {
        match best {
            Some(b) if !(values[j] < values[b]) => {}
            _ => best = Some(j),
        }
    }
    best.expect("neighborhoods are non-empty")
}

pub fn neighbors_star(n: usize) -> Result<NeighborhoodAssignment> {
    if n < 2 {
        return Err(Error::Config(format!("swarm needs at least 2 particles, got {n}")));
    }
    Ok(NeighborhoodAssignment::Full(n))
}

pub fn minkowski<T: Scalar>(a: &[T], b: &[T], p: u32) -> T {
    match p {
        1 => a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum(),
        2 => a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt(),
        _ => {
            let pf = T::lit(p as f64);
            a.iter()
                .zip(b)
                .map(|(&x, &y)| (x - y).abs().powf(pf))
                .sum::<T>()
                .powf(pf.recip())
        }
    }
}

fn check_norm(p: u32) -> Result<()> {
    if p == 1 || p == 2 {
        Ok(())
    } else {
        Err(Error::Config(format!("Minkowski order must be 1 or 2, got {p}")))
    }
}

/// Each particle plus its `k` nearest particles by Minkowski-`p` distance
/// between current positions; distance ties go to the lower index.
pub fn neighbors_ring<T: Scalar>(positions: &[Vec<T>], k: usize, p: u32) -> Result<NeighborhoodAssignment> {
    let n = positions.len();
    check_norm(p)?;
    if k == 0 || k >= n {
        return Err(Error::Config(format!("ring needs 1 <= k <= n-1, got k={k} with n={n}")));
    }
    if k == n - 1 {
        return Ok(NeighborhoodAssignment::Full(n));
    }
    let order = |a: &(T, usize), b: &(T, usize)| -> Ordering {
        a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
    };
    let mut sets = Vec::with_capacity(n);
    let mut dist: Vec<(T, usize)> = Vec::with_capacity(n - 1);
    for (i, xi) in positions.iter().enumerate() {
        dist.clear();
        dist.extend(
            positions
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, xj)| (minkowski(xi, xj, p), j)),
        );
        dist.select_nth_unstable_by(k - 1, order);
        let mut set: Vec<usize> = dist[..k].iter().map(|&(_, j)| j).collect();
        set.push(i);
        set.sort_unstable();
        sets.push(set);
    }
    Ok(NeighborhoodAssignment::Sets(sets))
}

/// Delannoy number `D(m, q)`: lattice paths from `(0,0)` to `(m,q)` using
/// east, north and north-east steps.
pub fn delannoy(m: u32, q: u32) -> Result<u64> {
    let (m, q) = (m as usize, q as usize);
    let mut row = vec![1u64; q + 1];
    for _ in 1..=m {
        let mut diag = row[0];
        for j in 1..=q {
            let up = row[j];
            row[j] = up
                .checked_add(diag)
                .and_then(|v| v.checked_add(row[j - 1]))
                .ok_or_else(|| Error::Argument(format!("D({m},{q}) overflows u64")))?;
            diag = up;
        }
    }
    Ok(row[q])
}

/// Neighbor count used by the Von Neumann topology: `min(D(dim, r) - 1, n - 1)`.
pub fn von_neumann_k(dim: usize, r: u32, n: usize) -> Result<usize> {
    if r == 0 {
        return Err(Error::Config("Delannoy range r must be >= 1".into()));
    }
    let dim = u32::try_from(dim).map_err(|_| Error::Argument("dimension too large".into()))?;
    let d = delannoy(dim, r)?;
    Ok(usize::try_from(d - 1).unwrap_or(usize::MAX).min(n.saturating_sub(1)))
}

pub fn neighbors_von_neumann<T: Scalar>(
    positions: &[Vec<T>],
    r: u32,
    p: u32,
    dim: usize,
) -> Result<NeighborhoodAssignment> {
    let k = von_neumann_k(dim, r, positions.len())?;
    neighbors_ring(positions, k, p)
}

/// Neighborhoods for the current swarm positions under `hp.topology`.
pub fn assign<T: Scalar>(hp: &Hyperparameters<T>, positions: &[Vec<T>], dim: usize) -> Result<NeighborhoodAssignment> {
    match hp.topology {
        Topology::Star => neighbors_star(positions.len()),
        Topology::Ring => neighbors_ring(positions, hp.k, hp.p),
        Topology::VonNeumann => neighbors_von_neumann(positions, hp.r, hp.p, dim),
    }
}
