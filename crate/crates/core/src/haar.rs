//! Monte Carlo oracle over Haar-random pure states on `H_A ⊗ H_B ⊗ H_E`.
//!
//! Sample `i` under seed `s` is drawn from ChaCha20 keyed by `s` on stream
//! `i`, so the sample set does not depend on how indices are spread across
//! threads. Per-sample records are gathered in index order and reduced with
//! pairwise summation, which makes every statistic bitwise independent of
//! the worker count.

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::dims::{Dimensions, MC_MAX_TOTAL_DIM};
use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// Generator identity recorded in output metadata.
pub const RNG_NAME: &str = "ChaCha20 (rand_chacha 0.9), seed_from_u64(seed), stream = sample index";

/// Eigenvalues below this contribute nothing to an entropy.
pub const EIGEN_ZERO: f64 = 1e-14;

/// Eigenvalues below this make a density matrix invalid.
pub const EIGEN_FLOOR: f64 = -1e-10;

const STATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    dims: Dimensions,
}

impl PureState {
    /// Amplitudes in `(a, b, e)` row-major order: index `(a·d_B + b)·d_E + e`.
    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &Dimensions {
        &self.dims
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// The computational basis state `|a⟩|b⟩|e⟩`.
    pub fn basis(dims: Dimensions, a: u64, b: u64, e: u64) -> Result<Self> {
        if a >= dims.d_a() || b >= dims.d_b() || e >= dims.d_e() {
            return Err(Error::Domain(format!("basis label ({a},{b},{e}) out of range for {dims}")));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dims.total() as usize];
        amplitudes[((a * dims.d_b() + b) * dims.d_e() + e) as usize] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes, dims })
    }

    /// Wraps and validates a normalised amplitude vector.
    pub fn from_amplitudes(dims: Dimensions, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() as u64 != dims.total() {
            return Err(Error::Domain(format!(
                "expected {} amplitudes for {dims}, got {}",
                dims.total(),
                amplitudes.len()
            )));
        }
        let state = Self { amplitudes, dims };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Domain(format!("state norm squared is {norm}, not 1")));
        }
        Ok(state)
    }

    fn amp(&self, a: usize, b: usize, e: usize) -> C64 {
        let (db, de) = (self.dims.d_b() as usize, self.dims.d_e() as usize);
        self.amplitudes[(a * db + b) * de + e]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    A,
    B,
    AB,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates hermiticity and unit trace to `1e-12`.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let m = entries.nrows();
        if m == 0 || entries.ncols() != m {
            return Err(Error::InvalidDensityMatrix(format!(
                "{}x{} is not a non-empty square matrix",
                m,
                entries.ncols()
            )));
        }
        for i in 0..m {
            for j in i..m {
                if (entries[(i, j)] - entries[(j, i)].conj()).norm() > STATE_TOL {
                    return Err(Error::InvalidDensityMatrix(format!("not Hermitian at ({i},{j})")));
                }
            }
        }
        let trace: f64 = (0..m).map(|i| entries[(i, i)].re).sum();
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace is {trace}")));
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries.clone().symmetric_eigenvalues().iter().copied().collect()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// The diagonal `P_k = ρ_kk`.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.entries[(k, k)].re).collect()
    }

    /// `Tr(ρ X)` for a square `X` of the same size.
    pub fn expectation(&self, x: &DMatrix<C64>) -> C64 {
        let m = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                acc += self.entries[(i, j)] * x[(j, i)];
            }
        }
        acc
    }
}

/// `ψ` as a matrix with rows labelled by the target factor(s) and columns by
/// the complement, so that `ρ_target = M M†`.
fn split_matrix(state: &PureState, target: Target) -> DMatrix<C64> {
    let (da, db, de) = (
        state.dims.d_a() as usize,
        state.dims.d_b() as usize,
        state.dims.d_e() as usize,
    );
    match target {
        Target::A => DMatrix::from_fn(da, db * de, |a, c| state.amp(a, c / de, c % de)),
        Target::B => DMatrix::from_fn(db, da * de, |b, c| state.amp(c / de, b, c % de)),
        Target::AB => DMatrix::from_fn(da * db, de, |r, e| state.amp(r / db, r % db, e)),
    }
}

/// Partial trace of `|ψ⟩⟨ψ|` onto the target.
pub fn reduce(state: &PureState, target: Target) -> DensityMatrix {
    let m = split_matrix(state, target);
    DensityMatrix {
        entries: &m * m.adjoint(),
    }
}

/// Nonzero spectrum of `ρ_target`, taken from whichever of `M M†`, `M† M`
/// is smaller.
fn split_spectrum(state: &PureState, target: Target) -> Vec<f64> {
    let m = split_matrix(state, target);
    let gram = if m.nrows() <= m.ncols() {
        &m * m.adjoint()
    } else {
        m.adjoint() * &m
    };
    gram.symmetric_eigenvalues().iter().copied().collect()
}

fn shannon(probabilities: &[f64]) -> Result<f64> {
    let mut h = 0.0;
    for &p in probabilities {
        if p < EIGEN_FLOOR {
            return Err(Error::NegativeEigenvalue(p));
        }
        if p >= EIGEN_ZERO {
            h -= p * p.ln();
        }
    }
    Ok(h)
}

/// `−Σ λ ln λ` over the spectrum.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    shannon(&rho.eigenvalues())
}

/// Shannon entropy of the diagonal in the computational basis.
pub fn diagonal_entropy(rho: &DensityMatrix) -> Result<f64> {
    shannon(&rho.diagonal())
}

/// Haar-random state number `index` under `seed`.
pub fn sample_state(dims: &Dimensions, seed: u64, index: u64) -> Result<PureState> {
    let n = dims.total();
    if n > MC_MAX_TOTAL_DIM {
        return Err(Error::Resource {
            n,
            cap: MC_MAX_TOTAL_DIM,
        });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut amplitudes: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut amplitudes {
        *z /= norm;
    }
    Ok(PureState {
        amplitudes,
        dims: *dims,
    })
}

/// `S(A) + S(B) − S(AB)` for one sample.
pub fn mutual_info_sample(dims: &Dimensions, seed: u64, index: u64) -> Result<f64> {
    let state = sample_state(dims, seed, index)?;
    state_mutual_information(&state)
}

fn state_mutual_information(state: &PureState) -> Result<f64> {
    let s_a = shannon(&split_spectrum(state, Target::A))?;
    let s_b = shannon(&split_spectrum(state, Target::B))?;
    let s_ab = shannon(&split_spectrum(state, Target::AB))?;
    Ok(s_a + s_b - s_ab)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub matrix: DMatrix<C64>,
    pub cartan: bool,
}

/// Generalised Gell-Mann basis of `su(m)`, normalised to `Tr(λ_a λ_b) = 2δ_ab`:
/// symmetric and antisymmetric pairs for `j < k` first, then the `m − 1`
/// diagonal generators.
pub fn gell_mann_basis(m: usize) -> Result<Vec<Generator>> {
    if m < 2 {
        return Err(Error::Domain(format!("su(m) needs m >= 2, got {m}")));
    }
    let zero = DMatrix::<C64>::zeros(m, m);
    let mut basis = Vec::with_capacity(m * m - 1);
    for j in 0..m {
        for k in (j + 1)..m {
            let mut sym = zero.clone();
            sym[(j, k)] = C64::new(1.0, 0.0);
            sym[(k, j)] = C64::new(1.0, 0.0);
            basis.push(Generator {
                matrix: sym,
                cartan: false,
            });
            let mut anti = zero.clone();
            anti[(j, k)] = C64::new(0.0, -1.0);
            anti[(k, j)] = C64::new(0.0, 1.0);
            basis.push(Generator {
                matrix: anti,
                cartan: false,
            });
        }
    }
    for l in 1..m {
        let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = zero.clone();
        for j in 0..l {
            diag[(j, j)] = C64::new(scale, 0.0);
        }
        diag[(l, l)] = C64::new(-(l as f64) * scale, 0.0);
        basis.push(Generator {
            matrix: diag,
            cartan: true,
        });
    }
    Ok(basis)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `√n`.
    pub stderr: f64,
}

impl Estimate {
    /// `|mean − target| ≤ k·stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HaarSampleStats {
    pub n_samples: u64,
    pub seed: u64,
    pub mutual_information: Estimate,
    pub entropy_a: Estimate,
    pub entropy_b: Estimate,
    pub entropy_ab: Estimate,
    pub purity_a: Estimate,
    pub diag_entropy_a: Estimate,
    pub diag_second_moment_a: Estimate,
    /// Mean of `r_a²` over Cartan generators of `su(d_A)`; absent when `d_A = 1`.
    pub cartan_var: Option<Estimate>,
    pub offdiag_var: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlochVariances {
    pub cartan_var: Estimate,
    pub offdiag_var: Estimate,
    /// `⟨r_a⟩` per generator, in basis order.
    pub component_means: Vec<Estimate>,
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

fn estimate(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    Estimate {
        mean,
        stderr: (var / n).sqrt(),
    }
}

fn column(records: &[Vec<f64>], i: usize) -> Vec<f64> {
    records.iter().map(|r| r[i]).collect()
}

/// Evaluates `record(index)` for every index on a pool of `workers` threads
/// and returns the results in index order. The first failing index aborts.
fn collect_records<F>(n_samples: u64, workers: usize, record: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    if n_samples < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {n_samples}")));
    }
    if workers == 0 {
        return Err(Error::Domain("worker count must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Domain(format!("cannot start {workers} workers: {e}")))?;
    let results: Vec<Result<Vec<f64>>> = pool.install(|| (0..n_samples).into_par_iter().map(&record).collect());
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|source| Error::OracleAborted {
                index: index as u64,
                source: Box::new(source),
            })
        })
        .collect()
}

fn bloch_components(rho: &DensityMatrix, basis: &[Generator]) -> Vec<f64> {
    basis.iter().map(|g| rho.expectation(&g.matrix).re).collect()
}

fn sector_mean_squares(components: &[f64], basis: &[Generator]) -> (f64, f64) {
    let (mut cartan, mut n_cartan, mut offdiag, mut n_offdiag) = (0.0, 0.0, 0.0, 0.0);
    for (r, g) in components.iter().zip(basis) {
        if g.cartan {
            cartan += r * r;
            n_cartan += 1.0;
        } else {
            offdiag += r * r;
            n_offdiag += 1.0;
        }
    }
    (cartan / n_cartan, offdiag / n_offdiag)
}

/// Sample means and standard errors of the per-state quantities over
/// `n_samples` Haar states.
pub fn run_oracle(dims: &Dimensions, n_samples: u64, seed: u64, workers: usize) -> Result<HaarSampleStats> {
    if dims.total() > MC_MAX_TOTAL_DIM {
        return Err(Error::Resource {
            n: dims.total(),
            cap: MC_MAX_TOTAL_DIM,
        });
    }
    let basis = if dims.d_a() >= 2 {
        Some(gell_mann_basis(dims.d_a() as usize)?)
    } else {
        None
    };
    let records = collect_records(n_samples, workers, |index| {
        let state = sample_state(dims, seed, index)?;
        let s_a = shannon(&split_spectrum(&state, Target::A))?;
        let s_b = shannon(&split_spectrum(&state, Target::B))?;
        let s_ab = shannon(&split_spectrum(&state, Target::AB))?;
        let rho_a = reduce(&state, Target::A);
        let diag = rho_a.diagonal();
        let mut record = vec![
            s_a + s_b - s_ab,
            s_a,
            s_b,
            s_ab,
            rho_a.purity(),
            shannon(&diag)?,
            diag.iter().map(|p| p * p).sum(),
        ];
        if let Some(basis) = &basis {
            let (c, o) = sector_mean_squares(&bloch_components(&rho_a, basis), basis);
            record.extend([c, o]);
        }
        Ok(record)
    })?;
    let est = |i| estimate(&column(&records, i));
    Ok(HaarSampleStats {
        n_samples,
        seed,
        mutual_information: est(0),
        entropy_a: est(1),
        entropy_b: est(2),
        entropy_ab: est(3),
        purity_a: est(4),
        diag_entropy_a: est(5),
        diag_second_moment_a: est(6),
        cartan_var: basis.as_ref().map(|_| est(7)),
        offdiag_var: basis.as_ref().map(|_| est(8)),
    })
}

/// Bloch-vector statistics of the `m`-dimensional factor of Haar states on
/// `C^m ⊗ C^n`.
pub fn bloch_variances(m: u64, n: u64, n_samples: u64, seed: u64, workers: usize) -> Result<BlochVariances> {
    let dims = Dimensions::new(m, 1, n)?;
    if dims.total() > MC_MAX_TOTAL_DIM {
        return Err(Error::Resource {
            n: dims.total(),
            cap: MC_MAX_TOTAL_DIM,
        });
    }
    let basis = gell_mann_basis(m as usize)?;
    let records = collect_records(n_samples, workers, |index| {
        let rho = reduce(&sample_state(&dims, seed, index)?, Target::A);
        let mut components = bloch_components(&rho, &basis);
        let (c, o) = sector_mean_squares(&components, &basis);
        components.extend([c, o]);
        Ok(components)
    })?;
    let g = basis.len();
    Ok(BlochVariances {
        cartan_var: estimate(&column(&records, g)),
        offdiag_var: estimate(&column(&records, g + 1)),
        component_means: (0..g).map(|i| estimate(&column(&records, i))).collect(),
    })
}
