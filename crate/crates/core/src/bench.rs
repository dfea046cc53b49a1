//! BBOB-style noiseless benchmark suite.
//!
//! Twelve functions from the BBOB family, each evaluated on shifted
//! coordinates `z = x - shift` with the optimum value fixed at zero. Rotations
//! and the oscillation/asymmetry warps of the original suite are not applied.
//! Instances are deterministic: the shift (and the peak layout of f21) is a
//! pure function of `(fid, iid, dim)`.

use std::fmt;

use rand::Rng;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;

pub const SEARCH_LOWER: f64 = -5.0;
pub const SEARCH_UPPER: f64 = 5.0;

/// Shift coordinates are drawn from `[-SHIFT_BOUND, SHIFT_BOUND]`.
pub const SHIFT_BOUND: f64 = 4.0;

const GALLAGHER_LOCAL_PEAKS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModalClass {
    Unimodal,
    Multimodal,
    HighlyMultimodal,
}

impl fmt::Display for ModalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModalClass::Unimodal => "unimodal",
            ModalClass::Multimodal => "multimodal",
            ModalClass::HighlyMultimodal => "highly-multimodal",
        })
    }
}

/// Identifier of a supported benchmark function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProblemId(u32);

impl ProblemId {
    pub const SUPPORTED: [u32; 12] = [1, 2, 3, 4, 5, 6, 8, 9, 12, 15, 17, 21];

    pub fn new(fid: u32) -> Result<Self> {
        if Self::SUPPORTED.contains(&fid) {
            Ok(Self(fid))
        } else {
            Err(Error::UnsupportedFunction(fid))
        }
    }

    pub fn all() -> impl Iterator<Item = ProblemId> {
        Self::SUPPORTED.iter().map(|&fid| ProblemId(fid))
    }

    pub fn fid(self) -> u32 {
        self.0
    }

    pub fn modal_class(self) -> ModalClass {
        match self.0 {
            1 | 2 | 5 | 6 | 8 | 9 | 12 => ModalClass::Unimodal,
            3 | 4 | 15 => ModalClass::Multimodal,
            17 | 21 => ModalClass::HighlyMultimodal,
            _ => unreachable!("ProblemId is validated at construction"),
        }
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            1 => "sphere",
            2 => "ellipsoidal",
            3 => "rastrigin",
            4 => "bueche-rastrigin",
            5 => "linear-slope",
            6 => "attractive-sector",
            8 => "rosenbrock",
            9 => "rosenbrock-rotated",
            12 => "bent-cigar",
            15 => "rastrigin-nonseparable",
            17 => "schaffers-f7",
            21 => "gallagher-21",
            _ => unreachable!("ProblemId is validated at construction"),
        }
    }
}

impl TryFrom<u32> for ProblemId {
    type Error = Error;

    fn try_from(fid: u32) -> Result<Self> {
        Self::new(fid)
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

pub fn modal_class(pid: ProblemId) -> ModalClass {
    pid.modal_class()
}

/// Gaussian peak of the Gallagher landscape with a diagonal precision matrix.
#[derive(Clone, Debug, PartialEq)]
struct Peak<T> {
    center: Vec<T>,
    height: T,
    precision: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance<T> {
    pid: ProblemId,
    dim: usize,
    iid: u32,
    shift: Vec<T>,
    f_opt: T,
    peaks: Vec<Peak<T>>,
}

impl<T: Scalar> ProblemInstance<T> {
    /// Builds instance `iid` of function `pid` in `dim` dimensions.
    pub fn new(pid: ProblemId, iid: u32, dim: usize) -> Result<Self> {
        if iid == 0 {
            return Err(Error::Argument("instance id must be >= 1".into()));
        }
        if dim == 0 {
            return Err(Error::Argument("dimension must be >= 1".into()));
        }
        let mut rng = instance_rng(pid, iid, dim);
        let shift = (0..dim)
            .map(|_| T::lit(rng.random_range(-SHIFT_BOUND..=SHIFT_BOUND)))
            .collect::<Vec<_>>();
        let peaks = if pid.fid() == 21 {
            gallagher_peaks(&mut rng, &shift)
        } else {
            Vec::new()
        };
        Ok(Self { pid, dim, iid, shift, f_opt: T::zero(), peaks })
    }

    /// Builds an instance with an explicit optimum location. The remaining
    /// instance data (Gallagher peaks) still derives from `(fid, iid, dim)`.
    pub fn with_shift(pid: ProblemId, iid: u32, shift: Vec<T>) -> Result<Self> {
        let mut inst = Self::new(pid, iid, shift.len())?;
        if shift.iter().any(|s| !s.is_finite()) {
            return Err(Error::Argument("shift must be finite".into()));
        }
        if pid.fid() == 21 {
            inst.peaks[0].center = shift.clone();
        }
        inst.shift = shift;
        Ok(inst)
    }

    pub fn pid(&self) -> ProblemId {
        self.pid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn iid(&self) -> u32 {
        self.iid
    }

    pub fn shift(&self) -> &[T] {
        &self.shift
    }

    pub fn f_opt(&self) -> T {
        self.f_opt
    }

    pub fn evaluate(&self, x: &[T]) -> Result<T> {
        if x.len() != self.dim {
            return Err(Error::Argument(format!(
                "dimension mismatch: expected {}, got {}",
                self.dim,
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("non-finite coordinate".into()));
        }
        let z: SmallVec<[T; 8]> = x.iter().zip(&self.shift).map(|(&a, &s)| a - s).collect();
        let raw = match self.pid.fid() {
            1 => sphere(&z),
            2 => ellipsoidal(&z),
            3 | 15 => rastrigin(&z),
            4 => bueche_rastrigin(&z),
            5 => linear_slope(&z),
            6 => attractive_sector(&z, &self.shift),
            8 | 9 => rosenbrock(&z),
            12 => bent_cigar(&z),
            17 => schaffers_f7(&z),
            21 => gallagher(x, &self.peaks),
            _ => unreachable!("ProblemId is validated at construction"),
        };
        Ok(raw + self.f_opt)
    }
}

pub fn make_instance<T: Scalar>(pid: ProblemId, iid: u32, dim: usize) -> Result<ProblemInstance<T>> {
    ProblemInstance::new(pid, iid, dim)
}

fn instance_rng(pid: ProblemId, iid: u32, dim: usize) -> rand_chacha::ChaCha8Rng {
    seed::rng_from_words(&[seed::INSTANCE_DOMAIN, pid.fid() as u64, iid as u64, dim as u64])
}

/// `base^(i / (dim - 1))`, with exponent 0 in one dimension.
fn graded<T: Scalar>(base: f64, i: usize, dim: usize) -> T {
    if dim < 2 {
        T::one()
    } else {
        T::lit(base.powf(i as f64 / (dim - 1) as f64))
    }
}

fn sphere<T: Scalar>(z: &[T]) -> T {
    z.iter().map(|&v| v * v).sum()
}

fn ellipsoidal<T: Scalar>(z: &[T]) -> T {
    let d = z.len();
    z.iter()
        .enumerate()
        .map(|(i, &v)| graded::<T>(1e6, i, d) * v * v)
        .sum()
}

fn rastrigin<T: Scalar>(z: &[T]) -> T {
    let ten = T::lit(10.0);
    let tau = T::lit(std::f64::consts::TAU);
    // 10 * dim + sum(z^2 - 10 cos(2 pi z)), summed termwise to stay non-negative.
    z.iter().map(|&v| v * v + ten * (T::one() - (tau * v).cos())).sum()
}

fn bueche_rastrigin<T: Scalar>(z: &[T]) -> T {
    let d = z.len();
    let scaled: Vec<T> = z
        .iter()
        .enumerate()
        .map(|(i, &v)| graded::<T>(10f64.sqrt(), i, d) * v)
        .collect();
    rastrigin(&scaled)
}

/// Slope rising linearly away from the optimum along every axis.
fn linear_slope<T: Scalar>(z: &[T]) -> T {
    let d = z.len();
    z.iter()
        .enumerate()
        .map(|(i, &v)| graded::<T>(10.0, i, d) * v.abs())
        .sum()
}

fn attractive_sector<T: Scalar>(z: &[T], shift: &[T]) -> T {
    let hundred = T::lit(100.0);
    let s: T = z
        .iter()
        .zip(shift)
        .map(|(&v, &o)| {
            let sv = if v * o > T::zero() { hundred * v } else { v };
            sv * sv
        })
        .sum();
    s.powf(T::lit(0.9))
}

fn rosenbrock<T: Scalar>(z: &[T]) -> T {
    let d = z.len();
    let scale = T::lit((d as f64).sqrt() / 8.0).max(T::one());
    let one = T::one();
    let hundred = T::lit(100.0);
    let u: Vec<T> = z.iter().map(|&v| scale * v + one).collect();
    if d == 1 {
        return (u[0] - one).powi(2);
    }
    u.windows(2)
        .map(|w| hundred * (w[0] * w[0] - w[1]).powi(2) + (w[0] - one).powi(2))
        .sum()
}

fn bent_cigar<T: Scalar>(z: &[T]) -> T {
    let tail: T = z.iter().skip(1).map(|&v| v * v).sum();
    z[0] * z[0] + T::lit(1e6) * tail
}

fn schaffers_f7<T: Scalar>(z: &[T]) -> T {
    let term = |s: T| {
        let root = s.sqrt();
        let sn = (T::lit(50.0) * s.powf(T::lit(0.2))).sin();
        root + root * sn * sn
    };
    if z.len() == 1 {
        return term(z[0].abs()).powi(2);
    }
    let pairs = T::lit((z.len() - 1) as f64);
    let total: T = z.windows(2).map(|w| term(w[0].hypot(w[1]))).sum();
    (total / pairs).powi(2)
}

fn gallagher<T: Scalar>(x: &[T], peaks: &[Peak<T>]) -> T {
    let d = T::lit(x.len() as f64);
    let two = T::lit(2.0);
    let best = peaks
        .iter()
        .map(|pk| {
            let q: T = x
                .iter()
                .zip(&pk.center)
                .zip(&pk.precision)
                .map(|((&a, &c), &p)| p * (a - c) * (a - c))
                .sum();
            pk.height * (-q / (two * d)).exp()
        })
        .fold(T::zero(), T::max);
    (T::lit(10.0) - best).powi(2)
}

/// Global peak of height 10 at the shift plus 20 lower local peaks.
fn gallagher_peaks<T: Scalar>(rng: &mut impl Rng, shift: &[T]) -> Vec<Peak<T>> {
    let dim = shift.len();
    let precision = |alpha: f64| -> Vec<T> {
        (0..dim)
            .map(|j| {
                let lam = if dim < 2 {
                    1.0
                } else {
                    alpha.powf(0.5 * j as f64 / (dim - 1) as f64)
                };
                T::lit(lam / alpha.powf(0.25))
            })
            .collect()
    };

    // Condition exponents for the local peaks are a random permutation.
    let mut exponents: Vec<usize> = (0..GALLAGHER_LOCAL_PEAKS).collect();
    for i in (1..exponents.len()).rev() {
        let j = rng.random_range(0..=i);
        exponents.swap(i, j);
    }

    let mut peaks = Vec::with_capacity(GALLAGHER_LOCAL_PEAKS + 1);
    peaks.push(Peak { center: shift.to_vec(), height: T::lit(10.0), precision: precision(1000.0) });
    for (i, &e) in exponents.iter().enumerate() {
        let center = (0..dim).map(|_| T::lit(rng.random_range(-4.9..=4.9))).collect();
        let height = 1.1 + 8.0 * i as f64 / (GALLAGHER_LOCAL_PEAKS - 1) as f64;
        let alpha = 1000f64.powf(2.0 * e as f64 / (GALLAGHER_LOCAL_PEAKS - 1) as f64);
        peaks.push(Peak { center, height: T::lit(height), precision: precision(alpha) });
    }
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pid(fid: u32) -> ProblemId {
        ProblemId::new(fid).unwrap()
    }

    #[test]
    fn unsupported_fid_rejected() {
        let err = ProblemId::new(99).unwrap_err();
        assert!(err.to_string().contains("unsupported function id"));
        assert!(ProblemId::new(7).is_err());
    }

    #[test]
    fn modal_classes() {
        assert_eq!(pid(1).modal_class(), ModalClass::Unimodal);
        assert_eq!(pid(3).modal_class(), ModalClass::Multimodal);
        assert_eq!(pid(17).modal_class(), ModalClass::HighlyMultimodal);
        let uni = ProblemId::all().filter(|p| p.modal_class() == ModalClass::Unimodal).count();
        assert_eq!(uni, 7);
    }

    #[test]
    fn instances_are_deterministic() {
        let a = make_instance::<f64>(pid(1), 1, 2).unwrap();
        let b = make_instance::<f64>(pid(1), 1, 2).unwrap();
        assert_eq!(a.shift(), b.shift());
        let g1 = make_instance::<f64>(pid(21), 3, 5).unwrap();
        let g2 = make_instance::<f64>(pid(21), 3, 5).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn instance_ids_give_different_shifts() {
        let a = make_instance::<f64>(pid(3), 1, 2).unwrap();
        let b = make_instance::<f64>(pid(3), 2, 2).unwrap();
        assert_ne!(a.shift(), b.shift());
    }

    #[test]
    fn hand_values() {
        let sphere = ProblemInstance::with_shift(pid(1), 1, vec![0.0, 0.0]).unwrap();
        assert_eq!(sphere.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(sphere.evaluate(&[1.0, 2.0]).unwrap(), 5.0);
        let rast = ProblemInstance::<f64>::with_shift(pid(3), 1, vec![0.0, 0.0]).unwrap();
        assert!((rast.evaluate(&[0.5, 0.5]).unwrap() - 40.5).abs() < 1e-12);
        let cigar = ProblemInstance::with_shift(pid(12), 1, vec![0.0, 0.0]).unwrap();
        assert_eq!(cigar.evaluate(&[1.0, 1.0]).unwrap(), 1.0 + 1e6);
        let ell = ProblemInstance::with_shift(pid(2), 1, vec![0.0, 0.0]).unwrap();
        assert_eq!(ell.evaluate(&[1.0, 1.0]).unwrap(), 1.0 + 1e6);
        let rosen = ProblemInstance::with_shift(pid(8), 1, vec![0.0, 0.0]).unwrap();
        // u = (2, 1): 100 * (4 - 1)^2 + 1
        assert_eq!(rosen.evaluate(&[1.0, 0.0]).unwrap(), 901.0);
    }

    #[test]
    fn argument_errors() {
        let inst = make_instance::<f64>(pid(1), 1, 2).unwrap();
        assert!(inst.evaluate(&[0.0]).is_err());
        assert!(inst.evaluate(&[f64::NAN, 0.0]).is_err());
        assert!(make_instance::<f64>(pid(1), 0, 2).is_err());
        assert!(make_instance::<f64>(pid(1), 1, 0).is_err());
    }

    #[test]
    fn optimum_is_zero_for_all_functions_and_dims() {
        for p in ProblemId::all() {
            for dim in [1, 2, 5, 10] {
                for iid in 1..=5 {
                    let inst = make_instance::<f64>(p, iid, dim).unwrap();
                    assert_eq!(inst.evaluate(inst.shift()).unwrap(), 0.0, "{p} d={dim} i={iid}");
                    assert!(inst.shift().iter().all(|s| s.abs() <= SHIFT_BOUND));
                }
            }
        }
    }

    #[test]
    fn single_precision_instances_work() {
        for p in ProblemId::all() {
            let inst = make_instance::<f32>(p, 1, 2).unwrap();
            assert_eq!(inst.evaluate(inst.shift()).unwrap(), 0.0);
            assert!(inst.evaluate(&[5.0, -5.0]).unwrap().is_finite());
        }
    }

    proptest! {
        #[test]
        fn finite_and_nonnegative_in_box(
            fi in 0usize..12,
            iid in 1u32..=5,
            x in proptest::collection::vec(-5.0f64..=5.0, 2),
        ) {
            let inst = make_instance::<f64>(ProblemId::new(ProblemId::SUPPORTED[fi]).unwrap(), iid, 2).unwrap();
            let v = inst.evaluate(&x).unwrap();
            prop_assert!(v.is_finite());
            prop_assert!(v >= 0.0);
        }

        #[test]
        fn sphere_zero_only_at_shift(x in proptest::collection::vec(-5.0f64..=5.0, 3)) {
            let inst = make_instance::<f64>(ProblemId::new(1).unwrap(), 2, 3).unwrap();
            let v = inst.evaluate(&x).unwrap();
            prop_assert!(v >= 0.0);
            prop_assert_eq!(v == 0.0, x.as_slice() == inst.shift());
        }
    }
}
