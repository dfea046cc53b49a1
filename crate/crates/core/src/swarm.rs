//! Particle swarm state machine.
//!
//! Velocities follow the classic inertia-weight update
//! `v' = w v + c1 r1 (pbest - x) + c2 r2 (nbest - x)` with per-dimension
//! uniforms `r1, r2`, and positions move by `x' = x + v'` before being clamped
//! to the search box. `nbest` is the best personal best inside the particle's
//! neighborhood, taken from the snapshot at the start of the iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bench::{ProblemInstance, SEARCH_LOWER, SEARCH_UPPER};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::topology::{self, NeighborhoodAssignment, Topology};

#[derive(Clone, Debug, PartialEq)]
pub struct Hyperparameters<T> {
    pub topology: Topology,
    /// Cognitive coefficient.
    pub c1: T,
    /// Social coefficient.
    pub c2: T,
    /// Inertia weight.
    pub w: T,
    /// Number of particles.
    pub n: usize,
    /// Nearest neighbors (Ring).
    pub k: usize,
    /// Minkowski norm order, 1 or 2.
    pub p: u32,
    /// Delannoy range (Von Neumann).
    pub r: u32,
}

impl<T: Scalar> Hyperparameters<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be >= 2, got {}", self.n)));
        }
        if self.k == 0 || self.k > self.n - 1 {
            return Err(Error::Config(format!("k must be in [1, n-1], got k={} n={}", self.k, self.n)));
        }
        if !(self.c1 >= T::zero() && self.c2 >= T::zero()) {
            return Err(Error::Config("c1 and c2 must be non-negative".into()));
        }
        if !self.w.is_finite() || !self.c1.is_finite() || !self.c2.is_finite() {
            return Err(Error::Config("coefficients must be finite".into()));
        }
        if self.p != 1 && self.p != 2 {
            return Err(Error::Config(format!("p must be 1 or 2, got {}", self.p)));
        }
        if self.r == 0 {
            return Err(Error::Config("r must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Particle<T> {
    pub position: Vec<T>,
    pub velocity: Vec<T>,
    pub pbest_pos: Vec<T>,
    pub pbest_val: T,
}

#[derive(Clone, Debug)]
pub struct SwarmState<T> {
    pub particles: Vec<Particle<T>>,
    pub gbest_pos: Vec<T>,
    pub gbest_val: T,
    pub iteration: usize,
    rng: ChaCha8Rng,
}

impl<T: Scalar> SwarmState<T> {
    pub fn positions(&self) -> Vec<Vec<T>> {
        self.particles.iter().map(|p| p.position.clone()).collect()
    }

    pub fn pbest_values(&self) -> Vec<T> {
        self.particles.iter().map(|p| p.pbest_val).collect()
    }

    fn refresh_gbest(&mut self) {
        for p in &self.particles {
            if p.pbest_val < self.gbest_val {
                self.gbest_val = p.pbest_val;
                self.gbest_pos.clone_from(&p.pbest_pos);
            }
        }
    }
}

/// Best-so-far objective value at the end of every iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTrace<T> {
    pub best_so_far: Vec<T>,
}

impl<T: Scalar> ConvergenceTrace<T> {
    pub fn budget(&self) -> usize {
        self.best_so_far.len()
    }

    pub fn final_best(&self) -> Option<T> {
        self.best_so_far.last().copied()
    }
}

fn uniform<T: Scalar>(rng: &mut ChaCha8Rng) -> T {
    T::lit(rng.random::<f64>())
}

pub fn init_swarm<T: Scalar>(hp: &Hyperparameters<T>, inst: &ProblemInstance<T>, seed: u64) -> Result<SwarmState<T>> {
    hp.validate()?;
    let dim = inst.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = T::lit(SEARCH_LOWER);
    let width = T::lit(SEARCH_UPPER - SEARCH_LOWER);
    let mut particles = Vec::with_capacity(hp.n);
    for _ in 0..hp.n {
        let position: Vec<T> = (0..dim).map(|_| lo + width * uniform::<T>(&mut rng)).collect();
        let value = inst.evaluate(&position)?;
        particles.push(Particle {
            velocity: vec![T::zero(); dim],
            pbest_pos: position.clone(),
            pbest_val: value,
            position,
        });
    }
    let mut state = SwarmState {
        gbest_pos: particles[0].pbest_pos.clone(),
        gbest_val: particles[0].pbest_val,
        particles,
        iteration: 0,
        rng,
    };
    state.refresh_gbest();
    Ok(state)
}

fn check_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::Argument(format!("{name} has length {got}, expected {want}")))
    }
}

#[allow(clippy::too_many_arguments)]
fn velocity_in_place<T: Scalar>(v: &mut [T], x: &[T], pbest: &[T], nbest: &[T], hp: &Hyperparameters<T>, r1: &[T], r2: &[T]) {
    for d in 0..v.len() {
        v[d] = hp.w * v[d] + hp.c1 * r1[d] * (pbest[d] - x[d]) + hp.c2 * r2[d] * (nbest[d] - x[d]);
    }
}

fn position_in_place<T: Scalar>(x: &mut [T], v: &[T]) {
    let lo = T::lit(SEARCH_LOWER);
    let hi = T::lit(SEARCH_UPPER);
    for (xi, &vi) in x.iter_mut().zip(v) {
        *xi = (*xi + vi).max(lo).min(hi);
    }
}

pub fn velocity_update<T: Scalar>(
    v: &[T],
    x: &[T],
    pbest: &[T],
    nbest: &[T],
    hp: &Hyperparameters<T>,
    r1: &[T],
    r2: &[T],
) -> Result<Vec<T>> {
    let dim = v.len();
    for (name, len) in [("x", x.len()), ("pbest", pbest.len()), ("nbest", nbest.len()), ("r1", r1.len()), ("r2", r2.len())] {
        check_len(name, len, dim)?;
    }
    let mut out = v.to_vec();
    velocity_in_place(&mut out, x, pbest, nbest, hp, r1, r2);
    Ok(out)
}

/// `x + v`, clamped to the search box. Velocity is left untouched on clamp.
pub fn position_update<T: Scalar>(x: &[T], v: &[T]) -> Result<Vec<T>> {
    check_len("v", v.len(), x.len())?;
    let mut out = x.to_vec();
    position_in_place(&mut out, v);
    Ok(out)
}

/// Advances every particle by one synchronous iteration.
pub fn step<T: Scalar>(
    state: &mut SwarmState<T>,
    inst: &ProblemInstance<T>,
    hp: &Hyperparameters<T>,
    neighborhood: &NeighborhoodAssignment,
) -> Result<()> {
    let n = state.particles.len();
    if neighborhood.len() != n {
        return Err(Error::Argument(format!(
            "neighborhood covers {} particles, swarm has {n}",
            neighborhood.len()
        )));
    }
    let dim = inst.dim();
    let snapshot = state.pbest_values();
    let best = neighborhood.best_indices(&snapshot);
    // Leader positions are copied before any particle moves.
    let mut nbest_pos = Vec::with_capacity(n * dim);
    for &b in &best {
        nbest_pos.extend_from_slice(&state.particles[b].pbest_pos);
    }

    let mut r1 = vec![T::zero(); dim];
    let mut r2 = vec![T::zero(); dim];
    for (i, particle) in state.particles.iter_mut().enumerate() {
        r1.iter_mut().for_each(|r| *r = uniform(&mut state.rng));
        r2.iter_mut().for_each(|r| *r = uniform(&mut state.rng));
        velocity_in_place(
            &mut particle.velocity,
            &particle.position,
            &particle.pbest_pos,
            &nbest_pos[i * dim..(i + 1) * dim],
            hp,
            &r1,
            &r2,
        );
        position_in_place(&mut particle.position, &particle.velocity);
        let value = inst.evaluate(&particle.position)?;
        if value < particle.pbest_val {
            particle.pbest_val = value;
            particle.pbest_pos.clone_from(&particle.position);
        }
    }
    state.refresh_gbest();
    state.iteration += 1;
    Ok(())
}

/// Runs `budget` iterations from a fresh swarm and returns the best-so-far trace.
pub fn run<T: Scalar>(hp: &Hyperparameters<T>, inst: &ProblemInstance<T>, budget: usize, seed: u64) -> Result<ConvergenceTrace<T>> {
    if budget == 0 {
        return Err(Error::Argument("budget must be >= 1".into()));
    }
    let mut state = init_swarm(hp, inst, seed)?;
    let mut best_so_far = Vec::with_capacity(budget);
    for _ in 0..budget {
        let hood = match hp.topology {
            Topology::Star => topology::neighbors_star(hp.n)?,
            _ => topology::assign(hp, &state.positions(), inst.dim())?,
        };
        step(&mut state, inst, hp, &hood)?;
        best_so_far.push(state.gbest_val);
    }
    Ok(ConvergenceTrace { best_so_far })
}
