//! Distance measures, the quantum speed limit time and the BLP
//! non-Markovianity measure.

use std::f64::consts::PI;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::qmat::{hermitian_eigenvalues, level_index, trace_norm, ComplexMatrix, DensityMatrix, C64};
use crate::tol;
use crate::vchannel::{derived_rates, kraus_set, pair_state_and_rate, ChannelParams, LocalMap};

fn same_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(())
}

/// `Re Σ_ij a_ij conj(b_ij)`, which is `Tr(a b)` for Hermitian `b`. Written
/// so it is exactly symmetric and reduces to `Tr a²` when `a == b`.
fn overlap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

fn fidelity_raw(rho0: &ComplexMatrix, rhot: &ComplexMatrix) -> f64 {
    overlap(rho0, rhot) / (rho0.frobenius_sq() * rhot.frobenius_sq()).sqrt()
}

/// Relative-purity fidelity `Tr(ρ0 ρt) / √(Tr ρ0² · Tr ρt²)`.
pub fn fidelity_alt(rho0: &DensityMatrix, rhot: &DensityMatrix) -> Result<f64> {
    same_dims(rho0, rhot)?;
    Ok(fidelity_raw(rho0.matrix(), rhot.matrix()))
}

/// `D = ½ Tr|ρ1 - ρ2|`.
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    same_dims(rho1, rho2)?;
    Ok(0.5 * trace_norm(&(rho1.matrix() - rho2.matrix()))?)
}

fn speed_raw(rho0: &ComplexMatrix, p: &ChannelParams, t: f64) -> f64 {
    let (rho_t, rho_dot) = pair_state_and_rate(rho0, p, t);
    (rho_dot.frobenius_sq() / rho_t.frobenius_sq()).sqrt()
}

/// `√(Tr ρ̇t² / Tr ρt²)` for an atom pair.
pub fn speed_integrand(rho0: &DensityMatrix, p: &ChannelParams, t: f64) -> Result<f64> {
    check_pair(rho0)?;
    if !(t >= 0.0) {
        return Err(Error::GridError(format!("negative time {t}")));
    }
    Ok(speed_raw(rho0.matrix(), p, t))
}

fn check_pair(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 9 {
        return Err(Error::DimensionMismatch {
            expected: 9,
            actual: rho.dim(),
        });
    }
    Ok(())
}

/// Composite Simpson estimate on a uniform grid of `values.len() - 1`
/// (even) intervals of width `h`.
fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    let odd: f64 = values[1..n].iter().step_by(2).sum();
    let even: f64 = values[2..n].iter().step_by(2).sum();
    h / 3.0 * (values[0] + values[n] + 4.0 * odd + 2.0 * even)
}

/// Integral of `f` over `[0, upper]`, doubling the number of Simpson
/// intervals (reusing previous nodes) until two successive estimates agree.
fn refine_simpson(f: impl Fn(f64) -> f64, upper: f64, start: usize) -> Result<(f64, usize)> {
    let mut n = start;
    let mut values: Vec<f64> = (0..=n).map(|i| f(upper * i as f64 / n as f64)).collect();
    let mut estimate = simpson(&values, upper / n as f64);
    let mut rel_change = f64::NAN;
    loop {
        let finer = 2 * n;
        if finer > tol::QUADRATURE_MAX_INTERVALS {
            return Err(Error::QuadratureNotConverged {
                intervals: n,
                rel_change,
            });
        }
        let mut next = Vec::with_capacity(finer + 1);
        for (i, &v) in values[..n].iter().enumerate() {
            next.push(v);
            next.push(f(upper * (2 * i + 1) as f64 / finer as f64));
        }
        next.push(values[n]);
        let refined = simpson(&next, upper / finer as f64);
        let change = (refined - estimate).abs();
        if change <= tol::QUADRATURE_REL * refined.abs() || change <= tol::QUADRATURE_ABS {
            return Ok((refined, finer));
        }
        rel_change = change / refined.abs();
        values = next;
        n = finer;
        estimate = refined;
    }
}

fn check_quadrature_args(tau: f64, n_steps: usize) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "tau",
            value: tau,
            range: "(0, ∞)",
        });
    }
    if !n_steps.is_multiple_of(2)
        || !(tol::QUADRATURE_MIN_INTERVALS..=tol::QUADRATURE_MAX_INTERVALS).contains(&n_steps)
    {
        return Err(Error::ParamOutOfRange {
            name: "quadrature_steps",
            value: n_steps as f64,
            range: "even, between 32 and 16384",
        });
    }
    Ok(())
}

fn x_of_tau_raw(rho0: &ComplexMatrix, p: &ChannelParams, tau: f64, n_steps: usize) -> Result<(f64, usize)> {
    let (integral, n) = refine_simpson(|t| speed_raw(rho0, p, t), tau, n_steps)?;
    Ok((2.0 / tau * integral, n))
}

/// `X(τ) = (2/τ) ∫₀^τ √(Tr ρ̇t² / Tr ρt²) dt`, by self-refining Simpson
/// quadrature starting from `n_steps` intervals.
pub fn x_of_tau(rho0: &DensityMatrix, p: &ChannelParams, tau: f64, n_steps: usize) -> Result<f64> {
    check_pair(rho0)?;
    check_quadrature_args(tau, n_steps)?;
    Ok(x_of_tau_raw(rho0.matrix(), p, tau, n_steps)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QslResult {
    pub tau: f64,
    pub fidelity: f64,
    pub x_of_tau: f64,
    pub tau_qsl: f64,
    /// Simpson intervals used after refinement.
    pub n_quadrature_steps: usize,
}

/// `τ_QSL = |1 - F(ρ0, ρτ)| / X(τ)`, zero when the state does not move.
pub fn qsl_time(rho0: &DensityMatrix, p: &ChannelParams, tau: f64, n_steps: usize) -> Result<QslResult> {
    check_pair(rho0)?;
    check_quadrature_args(tau, n_steps)?;
    let (x, n) = x_of_tau_raw(rho0.matrix(), p, tau, n_steps)?;
    let (rho_tau, _) = pair_state_and_rate(rho0.matrix(), p, tau);
    let fidelity = fidelity_raw(rho0.matrix(), &rho_tau);
    let tau_qsl = if x > tol::QSL_SPEED_FLOOR {
        (1.0 - fidelity).abs() / x
    } else {
        0.0
    };
    Ok(QslResult {
        tau,
        fidelity,
        x_of_tau: x,
        tau_qsl,
        n_quadrature_steps: n,
    })
}

/// Candidate initial pairs for the BLP maximization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairFamily {
    /// Points of the phase grid for `(|2⟩ ± e^{iφ}|1⟩)/√2`.
    pub phase_points: usize,
    /// Random orthogonal pure pairs on the full qutrit space.
    pub random_pairs: usize,
    pub seed: u64,
}

impl Default for PairFamily {
    fn default() -> Self {
        Self {
            phase_points: 16,
            random_pairs: 64,
            seed: 0x5eed_b1f0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairDescription {
    Phase { phi: f64 },
    Random { index: usize, seed: u64 },
}

impl fmt::Display for PairDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairDescription::Phase { phi } => {
                write!(f, "phase pair (|2> +/- e^(i*{phi:.6})|1>)/sqrt(2)")
            }
            PairDescription::Random { index, seed } => {
                write!(f, "random orthogonal pure pair #{index} (seed {seed})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonMarkovResult {
    /// Lower bound on the measure: the best pair found in the family.
    pub n_measure: f64,
    pub pair_description: PairDescription,
    pub grid_step: f64,
    pub t_max: f64,
}

pub const DEFAULT_BLP_DT: f64 = 5e-3;
const MAX_BLP_DT: f64 = 1e-2;
const MAX_DEFAULT_T_MAX: f64 = 1000.0;

/// Integration window long enough for the slowest relevant envelope
/// (`e^{-λt/2}` oscillations or `γ+` decay) to die out by ~e^{-10}.
pub fn default_t_max(p: &ChannelParams) -> f64 {
    let gamma_plus = derived_rates(p).gamma_plus;
    (20.0 / p.lambda.min(gamma_plus)).min(MAX_DEFAULT_T_MAX)
}

fn candidate_pairs(family: &PairFamily) -> Vec<(PairDescription, ComplexMatrix)> {
    let zero = C64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(family.phase_points + family.random_pairs);
    let s = 0.5f64.sqrt();
    for k in 0..family.phase_points {
        let phi = 2.0 * PI * k as f64 / family.phase_points as f64;
        let e = C64::from_polar(s, phi);
        let mut a = vec![zero; 3];
        let mut b = vec![zero; 3];
        a[level_index(2)] = C64::new(s, 0.0);
        a[level_index(1)] = e;
        b[level_index(2)] = C64::new(s, 0.0);
        b[level_index(1)] = -e;
        let diff = &ComplexMatrix::outer(&a) - &ComplexMatrix::outer(&b);
        out.push((PairDescription::Phase { phi }, diff));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(family.seed);
    let gaussian_ket = |rng: &mut ChaCha8Rng| -> Vec<C64> {
        (0..3)
            .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect()
    };
    let normalize = |v: &mut Vec<C64>| {
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= n);
    };
    for index in 0..family.random_pairs {
        let mut a = gaussian_ket(&mut rng);
        normalize(&mut a);
        let mut b = gaussian_ket(&mut rng);
        let proj: C64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
        b.iter_mut().zip(&a).for_each(|(y, x)| *y -= proj * x);
        normalize(&mut b);
        let diff = &ComplexMatrix::outer(&a) - &ComplexMatrix::outer(&b);
        out.push((
            PairDescription::Random {
                index,
                seed: family.seed,
            },
            diff,
        ));
    }
    out
}

/// BLP measure estimated over a candidate family: for each pair the positive
/// increments of `D(ρ1(t), ρ2(t))` on a uniform grid are summed, and the
/// largest total is returned.
pub fn blp_measure(p: &ChannelParams, t_max: f64, dt: f64, family: &PairFamily) -> Result<NonMarkovResult> {
    if !(dt > 0.0 && dt <= MAX_BLP_DT) {
        return Err(Error::GridError(format!("dt = {dt} must lie in (0, {MAX_BLP_DT}]")));
    }
    if !(t_max.is_finite() && t_max >= dt) {
        return Err(Error::GridError(format!("t_max = {t_max} must be at least dt = {dt}")));
    }
    let pairs = candidate_pairs(family);
    if pairs.is_empty() {
        return Err(Error::GridError("empty candidate pair family".into()));
    }

    let steps = (t_max / dt).round() as usize;
    let mut previous: Vec<f64> = vec![0.0; pairs.len()];
    let mut backflow: Vec<f64> = vec![0.0; pairs.len()];
    for step in 0..=steps {
        let t = step as f64 * dt;
        let map = LocalMap::channel(&kraus_set(p, t));
        for (k, (_, diff)) in pairs.iter().enumerate() {
            let d = 0.5 * hermitian_eigenvalues(&map.apply_single(diff))?.abs_sum();
            if step > 0 && d > previous[k] {
                backflow[k] += d - previous[k];
            }
            previous[k] = d;
        }
    }

    // First maximum wins, so ties resolve to the earliest candidate.
    let (best, n_measure) = backflow
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    Ok(NonMarkovResult {
        n_measure,
        pair_description: pairs[best].0.clone(),
        grid_step: dt,
        t_max: steps as f64 * dt,
    })
}
