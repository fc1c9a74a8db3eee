//! TensorSketch estimates of bilinear forms `uᵀAᵀBv` without forming `AᵀB`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, SketchError};
use crate::linalg::{CMat, CScalar, CVec};
use crate::rng::{derive_seed, rng_from_seed};

/// Simple tabulation hashing over the four bytes of a 32-bit key
/// (3-wise independent).
#[derive(Clone, PartialEq, Eq)]
struct Tabulation {
    tables: Box<[[u64; 256]; 4]>,
}

impl Tabulation {
    fn new(seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let mut tables = Box::new([[0u64; 256]; 4]);
        for t in tables.iter_mut() {
            for v in t.iter_mut() {
                *v = rng.random();
            }
        }
        Self { tables }
    }

    fn hash(&self, key: usize) -> u64 {
        let key = key as u32;
        (0..4).fold(0, |acc, i| acc ^ self.tables[i][((key >> (8 * i)) & 0xff) as usize])
    }

    fn bucket(&self, key: usize, k: usize) -> usize {
        ((self.hash(key) as u128 * k as u128) >> 64) as usize
    }

    fn sign(&self, key: usize) -> f64 {
        if self.hash(key) >> 63 == 0 { 1.0 } else { -1.0 }
    }
}

/// One TensorSketch instance: two CountSketches and an accumulator.
#[derive(Clone)]
pub struct TensorSketchState {
    k: usize,
    seed: u64,
    h1: Tabulation,
    s1: Tabulation,
    h2: Tabulation,
    s2: Tabulation,
    q: Vec<CScalar>,
    ingested: usize,
    /// Vector length fixed by the first ingested pair.
    dim: Option<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TensorSketchState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TensorSketchState")
            .field("k", &self.k)
            .field("seed", &self.seed)
            .field("ingested", &self.ingested)
            .finish_non_exhaustive()
    }
}

impl TensorSketchState {
    pub fn new(k: usize, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(SketchError::invalid("bucket count must be at least 1"));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            k,
            seed,
            h1: Tabulation::new(derive_seed(seed, 1)),
            s1: Tabulation::new(derive_seed(seed, 2)),
            h2: Tabulation::new(derive_seed(seed, 3)),
            s2: Tabulation::new(derive_seed(seed, 4)),
            q: vec![CScalar::new(0.0, 0.0); k],
            ingested: 0,
            dim: None,
            forward: planner.plan_fft_forward(k),
            inverse: planner.plan_fft_inverse(k),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn accumulator(&self) -> &[CScalar] {
        &self.q
    }

    pub fn ingested(&self) -> usize {
        self.ingested
    }

    /// Bucket and sign of coordinate `j` under the first or second CountSketch.
    pub fn hash_of(&self, second: bool, j: usize) -> (usize, f64) {
        if second {
            (self.h2.bucket(j, self.k), self.s2.sign(j))
        } else {
            (self.h1.bucket(j, self.k), self.s1.sign(j))
        }
    }

    fn count_sketch(&self, x: &[CScalar], second: bool) -> Vec<CScalar> {
        let mut out = vec![CScalar::new(0.0, 0.0); self.k];
        for (j, v) in x.iter().enumerate() {
            let (b, s) = self.hash_of(second, j);
            out[b] += v * s;
        }
        out
    }

    /// `S(a ⊗ b)`: circular convolution of the two CountSketches via FFT.
    pub fn pair(&self, a: &CVec, b: &CVec) -> Result<Vec<CScalar>> {
        if a.len() != b.len() {
            return Err(SketchError::invalid(format!("vector lengths differ: {} vs {}", a.len(), b.len())));
        }
        let mut x = self.count_sketch(a.as_slice(), false);
        let mut y = self.count_sketch(b.as_slice(), true);
        self.forward.process(&mut x);
        self.forward.process(&mut y);
        for (u, v) in x.iter_mut().zip(&y) {
            *u *= v;
        }
        self.inverse.process(&mut x);
        let scale = 1.0 / self.k as f64;
        for u in x.iter_mut() {
            *u *= scale;
        }
        Ok(x)
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        match self.dim {
            Some(d) if d != len => Err(SketchError::invalid(format!("expected vectors of length {d}, got {len}"))),
            _ => Ok(()),
        }
    }

    pub fn ingest(&mut self, a: &CVec, b: &CVec) -> Result<()> {
        self.check_dim(a.len())?;
        let p = self.pair(a, b)?;
        self.dim = Some(a.len());
        for (q, v) in self.q.iter_mut().zip(p) {
            *q += v;
        }
        self.ingested += 1;
        Ok(())
    }

    /// Adds every row pair `(A_i, B_i)`.
    pub fn ingest_rows(&mut self, a: &CMat, b: &CMat) -> Result<()> {
        if a.rows() != b.rows() || a.cols() != b.cols() {
            return Err(SketchError::invalid("A and B must have the same shape"));
        }
        for i in 0..a.rows() {
            self.ingest(&CVec::new(a.row(i).to_vec()), &CVec::new(b.row(i).to_vec()))?;
        }
        Ok(())
    }

    /// Adds another state's accumulator; both must share `k` and the seed.
    pub fn merge(&mut self, other: &TensorSketchState) -> Result<()> {
        if self.k != other.k || self.seed != other.seed {
            return Err(SketchError::invalid("can only merge states with equal k and seed"));
        }
        if let Some(d) = other.dim {
            self.check_dim(d)?;
            self.dim = Some(d);
        }
        for (q, v) in self.q.iter_mut().zip(&other.q) {
            *q += v;
        }
        self.ingested += other.ingested;
        Ok(())
    }

    pub fn query_vec(&self, u: &CVec, v: &CVec) -> Result<Vec<CScalar>> {
        self.check_dim(u.len())?;
        self.pair(u, v)
    }

    /// `Σ_j p_j q_j` (no conjugation), an unbiased estimate of `uᵀAᵀBv`.
    pub fn estimate(&self, u: &CVec, v: &CVec) -> Result<CScalar> {
        let p = self.query_vec(u, v)?;
        Ok(p.iter().zip(&self.q).map(|(a, b)| a * b).sum())
    }
}

/// Median of means over `reps` independent sketches, groups of `⌈reps/3⌉`.
/// Real and imaginary parts take their medians separately.
pub fn estimate_vmv(a: &CMat, b: &CMat, u: &CVec, v: &CVec, k: usize, reps: usize, seed: u64) -> Result<CScalar> {
    if reps == 0 {
        return Err(SketchError::invalid("reps must be at least 1"));
    }
    if u.len() != a.cols() || v.len() != b.cols() {
        return Err(SketchError::invalid("u and v must match the column counts of A and B"));
    }
    let mut values = Vec::with_capacity(reps);
    for r in 0..reps {
        let mut st = TensorSketchState::new(k, derive_seed(seed, r as u64))?;
        st.ingest_rows(a, b)?;
        values.push(st.estimate(u, v)?);
    }
    let group = reps.div_ceil(3);
    let means: Vec<CScalar> = values.chunks(group).map(|g| g.iter().sum::<CScalar>() / g.len() as f64).collect();
    Ok(CScalar::new(median(means.iter().map(|z| z.re).collect()), median(means.iter().map(|z| z.im).collect())))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

/// Exact `uᵀAᵀBv = Σ_i (uᵀA_i)(B_iᵀv)`.
pub fn exact_vmv(a: &CMat, b: &CMat, u: &CVec, v: &CVec) -> Result<CScalar> {
    let au = a.matvec(u)?;
    let bv = b.matvec(v)?;
    if au.len() != bv.len() {
        return Err(SketchError::invalid("A and B must have the same row count"));
    }
    Ok(au.as_slice().iter().zip(bv.as_slice()).map(|(x, y)| x * y).sum())
}
