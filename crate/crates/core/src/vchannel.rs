//! Exact decoherence channel of a V-type atom in a Lorentzian reservoir.
//!
//! The two excited levels `|2⟩`, `|1⟩` decay to the ground level `|0⟩` with
//! rates `γ1`, `γ2` and a cross-coupling `√(γ1γ2)·θ` from spontaneously
//! generated interference. Resonance (`Δ = 0`) is assumed throughout.
//! Rotating the excited subspace with [`mixing_unitary`] diagonalizes the
//! decay matrix into two independent channels with rates `γ±`, whose survival
//! amplitudes are
//!
//! ```text
//! G±(t) = e^{-λt/2} [cosh(d± t/2) + (λ/d±) sinh(d± t/2)],   d± = √(λ² - 2λγ±)
//! ```
//!
//! The single-atom map is the Kraus set `K_i = U† 𝒦_i U` built from
//! `𝒦_1 = diag(G+, G-, 1)`, `𝒦_2 = √(1-G+²)|0⟩⟨+|`, `𝒦_3 = √(1-G-²)|0⟩⟨-|`.
//! Two atoms in independent reservoirs evolve under `K_k ⊗ K_l`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, DensityMatrix, C64};
use crate::tol;

/// Reservoir and atom parameters, in one common inverse-time unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub theta: f64,
    pub lambda: f64,
}

impl ChannelParams {
    pub fn new(gamma1: f64, gamma2: f64, theta: f64, lambda: f64) -> Result<Self> {
        let positive = |name, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::ParamOutOfRange {
                    name,
                    value,
                    range: "(0, ∞)",
                })
            }
        };
        positive("gamma1", gamma1)?;
        positive("gamma2", gamma2)?;
        positive("lambda", lambda)?;
        if !(theta.is_finite() && theta.abs() <= 1.0) {
            return Err(Error::ParamOutOfRange {
                name: "theta",
                value: theta,
                range: "[-1, 1]",
            });
        }
        Ok(Self {
            gamma1,
            gamma2,
            theta,
            lambda,
        })
    }

    /// Equal relaxation rates `γ1 = γ2 = γ`.
    pub fn symmetric(gamma: f64, theta: f64, lambda: f64) -> Result<Self> {
        Self::new(gamma, gamma, theta, lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    pub q: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub d_plus: Complex64,
    pub d_minus: Complex64,
}

pub fn derived_rates(p: &ChannelParams) -> DerivedRates {
    let (g1, g2) = (p.gamma1, p.gamma2);
    let cross = 4.0 * g1 * g2 * p.theta * p.theta;
    let q = ((g1 - g2).powi(2) + cross).sqrt();
    let gamma_plus = 0.5 * (g1 + g2 + q);
    // (γ1+γ2-q)/2 rewritten without cancellation; exactly zero at |θ| = 1.
    let gamma_minus = if q < tol::DEGENERATE_Q {
        g1
    } else {
        2.0 * g1 * g2 * (1.0 - p.theta * p.theta) / (g1 + g2 + q)
    };
    let d = |rate: f64| principal_sqrt(p.lambda * p.lambda - 2.0 * p.lambda * rate);
    DerivedRates {
        q,
        gamma_plus,
        gamma_minus,
        d_plus: d(gamma_plus),
        d_minus: d(gamma_minus),
    }
}

fn principal_sqrt(x: f64) -> Complex64 {
    if x >= 0.0 {
        Complex64::new(x.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-x).sqrt())
    }
}

/// Survival amplitudes `G±(t)` and their time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudePair {
    pub g_plus: f64,
    pub g_minus: f64,
    pub gdot_plus: f64,
    pub gdot_minus: f64,
}

pub fn amplitude(p: &ChannelParams, t: f64) -> AmplitudePair {
    let rates = derived_rates(p);
    let (g_plus, gdot_plus) = survival(p.lambda, rates.gamma_plus, t);
    let (g_minus, gdot_minus) = survival(p.lambda, rates.gamma_minus, t);
    AmplitudePair {
        g_plus,
        g_minus,
        gdot_plus,
        gdot_minus,
    }
}

/// `(G, Ġ)` for a single decay channel of rate `rate`.
///
/// With `C = e^{-λt/2} cosh(dt/2)` and `S = e^{-λt/2} sinh(dt/2)/d`,
/// `G = C + λS` and `Ġ = -λ·rate·S`. `d² = λ² - 2λ·rate` is real, so the
/// overdamped (`d² > 0`) and oscillatory (`d² < 0`) branches are evaluated in
/// real arithmetic, and both removable singularities (`d → 0`, `t → 0`) go
/// through the series of `cosh x` and `sinh x / x`.
fn survival(lambda: f64, rate: f64, t: f64) -> (f64, f64) {
    let d2 = lambda * lambda - 2.0 * lambda * rate;
    let half_t = 0.5 * t;
    let x2 = d2 * half_t * half_t;
    let (c, s) = if x2.abs() < tol::SERIES_SWITCH * tol::SERIES_SWITCH {
        let damp = (-lambda * half_t).exp();
        let cosh = 1.0 + x2 / 2.0 + x2 * x2 / 24.0;
        let sinhc = 1.0 + x2 / 6.0 + x2 * x2 / 120.0;
        (damp * cosh, damp * half_t * sinhc)
    } else if d2 > 0.0 {
        // d ≤ λ, so both exponents are non-positive and nothing overflows.
        let d = d2.sqrt();
        let slow = ((d - lambda) * half_t).exp();
        let fast = (-(d + lambda) * half_t).exp();
        (0.5 * (slow + fast), 0.5 * (slow - fast) / d)
    } else {
        let w = (-d2).sqrt();
        let damp = (-lambda * half_t).exp();
        let phase = w * half_t;
        (damp * phase.cos(), damp * phase.sin() / w)
    };
    (c + lambda * s, -lambda * rate * s)
}

/// Fixed-step RK4 solution of the local form of the amplitude equation.
///
/// In the diagonal basis the memory kernel is exponential, so each channel
/// obeys `ċ = -(γ±λ/2) z`, `ż = c - λz` with `c(0) = 1`, `z(0) = 0`. The
/// returned `gdot` values are `ċ` at each grid time.
pub fn oracle_amplitude_ode(p: &ChannelParams, t_grid: &[f64]) -> Result<Vec<AmplitudePair>> {
    validate_grid(t_grid)?;
    let rates = derived_rates(p);
    let plus = integrate_channel(p.lambda, rates.gamma_plus, t_grid);
    let minus = integrate_channel(p.lambda, rates.gamma_minus, t_grid);
    Ok(plus
        .into_iter()
        .zip(minus)
        .map(|((g_plus, gdot_plus), (g_minus, gdot_minus))| AmplitudePair {
            g_plus,
            g_minus,
            gdot_plus,
            gdot_minus,
        })
        .collect())
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    match t_grid.first() {
        None => return Err(Error::GridError("empty time grid".into())),
        Some(&t0) if t0 != 0.0 => {
            return Err(Error::GridError(format!("grid must start at 0, got {t0}")))
        }
        _ => {}
    }
    if let Some(w) = t_grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::GridError(format!(
            "grid not strictly ascending at {} -> {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

fn integrate_channel(lambda: f64, rate: f64, t_grid: &[f64]) -> Vec<(f64, f64)> {
    let k = 0.5 * rate * lambda;
    let deriv = |c: f64, z: f64| (-k * z, c - lambda * z);

    let mut out = Vec::with_capacity(t_grid.len());
    let (mut c, mut z) = (1.0, 0.0);
    let mut t = 0.0;
    for &target in t_grid {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / tol::ODE_MAX_STEP).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                let (k1c, k1z) = deriv(c, z);
                let (k2c, k2z) = deriv(c + 0.5 * h * k1c, z + 0.5 * h * k1z);
                let (k3c, k3z) = deriv(c + 0.5 * h * k2c, z + 0.5 * h * k2z);
                let (k4c, k4z) = deriv(c + h * k3c, z + h * k3z);
                c += h / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
                z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
            }
            t = target;
        }
        out.push((c, -k * z));
    }
    out
}

/// The real orthogonal transform taking `(c2, c1, c0)` to `(c+, c-, c0)`.
pub fn mixing_unitary(p: &ChannelParams) -> ComplexMatrix {
    let q = derived_rates(p).q;
    if q < tol::DEGENERATE_Q {
        return ComplexMatrix::identity(3);
    }
    let diff = p.gamma1 - p.gamma2;
    let a = ((q + diff) / (2.0 * q)).max(0.0).sqrt();
    let b = ((q - diff) / (2.0 * q)).max(0.0).sqrt();
    #[rustfmt::skip]
    let u = ComplexMatrix::from_real(3, &[
        a,  -b,  0.0,
        b,   a,  0.0,
        0.0, 0.0, 1.0,
    ]);
    u
}

/// Kraus operators of the single-atom map at time `t`, with their derivatives.
#[derive(Debug, Clone)]
pub struct KrausSet {
    pub time: f64,
    pub ops: [ComplexMatrix; 3],
    pub derivs: [ComplexMatrix; 3],
}

impl KrausSet {
    pub fn k1(&self) -> &ComplexMatrix {
        &self.ops[0]
    }

    pub fn k2(&self) -> &ComplexMatrix {
        &self.ops[1]
    }

    pub fn k3(&self) -> &ComplexMatrix {
        &self.ops[2]
    }

    /// `Σ K†K`.
    pub fn completeness(&self) -> ComplexMatrix {
        self.ops
            .iter()
            .map(|k| &k.adjoint() * k)
            .fold(ComplexMatrix::zeros(3), |acc, m| &acc + &m)
    }

    /// `d/dt Σ K†K = Σ (K̇†K + K†K̇)`; zero for a trace-preserving family.
    pub fn completeness_rate(&self) -> ComplexMatrix {
        self.ops
            .iter()
            .zip(&self.derivs)
            .map(|(k, kd)| &(&kd.adjoint() * k) + &(&k.adjoint() * kd))
            .fold(ComplexMatrix::zeros(3), |acc, m| &acc + &m)
    }

    /// `Σ K ρ K†` for a 3×3 operator.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.ops
            .iter()
            .map(|k| &(k * rho) * &k.adjoint())
            .fold(ComplexMatrix::zeros(3), |acc, m| &acc + &m)
    }
}

/// `√(1-G²)` and its time derivative `-GĠ/√(1-G²)`.
///
/// `1 - G²` vanishes only at `t = 0` (or identically for a dark channel).
/// There `G ≈ 1 - λγt²/4`, so `√(1-G²) ≈ t√(λγ/2)` and the derivative tends
/// to `√(λγ/2)`.
fn leak_amplitude(g: f64, gdot: f64, lambda: f64, rate: f64) -> (f64, f64) {
    let one_minus = (1.0 - g) * (1.0 + g);
    if one_minus < tol::SQRT_GUARD {
        (one_minus.max(0.0).sqrt(), (0.5 * lambda * rate).sqrt())
    } else {
        let root = one_minus.sqrt();
        (root, -g * gdot / root)
    }
}

pub fn kraus_set(p: &ChannelParams, t: f64) -> KrausSet {
    let rates = derived_rates(p);
    let amp = amplitude(p, t);
    let u = mixing_unitary(p);
    let ud = u.adjoint();
    let (s_plus, sdot_plus) = leak_amplitude(amp.g_plus, amp.gdot_plus, p.lambda, rates.gamma_plus);
    let (s_minus, sdot_minus) =
        leak_amplitude(amp.g_minus, amp.gdot_minus, p.lambda, rates.gamma_minus);

    let conj = |m: ComplexMatrix| &(&ud * &m) * &u;
    let diag = |a: f64, b: f64, c: f64| ComplexMatrix::from_real_diag(&[a, b, c]);
    let jump = |col: usize, amp: f64| {
        let mut m = ComplexMatrix::zeros(3);
        m[(2, col)] = C64::new(amp, 0.0);
        m
    };

    KrausSet {
        time: t,
        ops: [
            conj(diag(amp.g_plus, amp.g_minus, 1.0)),
            conj(jump(0, s_plus)),
            conj(jump(1, s_minus)),
        ],
        derivs: [
            conj(diag(amp.gdot_plus, amp.gdot_minus, 0.0)),
            conj(jump(0, sdot_plus)),
            conj(jump(1, sdot_minus)),
        ],
    }
}

/// Single-qutrit superoperator `S[(i,j),(a,b)] = Σ_k A_k[i,a] conj(B_k[j,b])`.
///
/// Stored as a flat 81-entry array; `(i,j)` and `(a,b)` are row-major pairs.
#[derive(Clone)]
pub(crate) struct LocalMap {
    s: [C64; 81],
}

impl LocalMap {
    fn from_pairs<'a>(pairs: impl Iterator<Item = (&'a ComplexMatrix, &'a ComplexMatrix)>) -> Self {
        let mut s = [C64::new(0.0, 0.0); 81];
        for (a, b) in pairs {
            for i in 0..3 {
                for j in 0..3 {
                    for x in 0..3 {
                        let aix = a[(i, x)];
                        if aix == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for y in 0..3 {
                            s[(3 * i + j) * 9 + 3 * x + y] += aix * b[(j, y)].conj();
                        }
                    }
                }
            }
        }
        Self { s }
    }

    /// `ρ ↦ Σ K ρ K†`.
    pub(crate) fn channel(k: &KrausSet) -> Self {
        Self::from_pairs(k.ops.iter().zip(k.ops.iter()))
    }

    /// `ρ ↦ Σ (K̇ ρ K† + K ρ K̇†)`.
    pub(crate) fn channel_rate(k: &KrausSet) -> Self {
        Self::from_pairs(
            k.derivs
                .iter()
                .zip(k.ops.iter())
                .chain(k.ops.iter().zip(k.derivs.iter())),
        )
    }

    pub(crate) fn apply_single(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(3);
        let r = rho.as_slice();
        for ij in 0..9 {
            let row = &self.s[ij * 9..ij * 9 + 9];
            out[(ij / 3, ij % 3)] = row.iter().zip(r).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Acts on the first qutrit of a 9×9 operator.
    pub(crate) fn apply_first(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(9);
        for x in 0..3 {
            for y in 0..3 {
                for ij in 0..9 {
                    let (i, j) = (ij / 3, ij % 3);
                    let row = &self.s[ij * 9..ij * 9 + 9];
                    let mut acc = C64::new(0.0, 0.0);
                    for (ab, coeff) in row.iter().enumerate() {
                        acc += coeff * rho[(3 * (ab / 3) + x, 3 * (ab % 3) + y)];
                    }
                    out[(3 * i + x, 3 * j + y)] = acc;
                }
            }
        }
        out
    }

    /// Acts on the second qutrit of a 9×9 operator.
    pub(crate) fn apply_second(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(9);
        for x in 0..3 {
            for y in 0..3 {
                for ij in 0..9 {
                    let (i, j) = (ij / 3, ij % 3);
                    let row = &self.s[ij * 9..ij * 9 + 9];
                    let mut acc = C64::new(0.0, 0.0);
                    for (ab, coeff) in row.iter().enumerate() {
                        acc += coeff * rho[(3 * x + ab / 3, 3 * y + ab % 3)];
                    }
                    out[(3 * x + i, 3 * y + j)] = acc;
                }
            }
        }
        out
    }
}

/// `ρ(t)` and `ρ̇(t)` of an atom pair, sharing one Kraus evaluation.
pub(crate) fn pair_state_and_rate(
    rho0: &ComplexMatrix,
    p: &ChannelParams,
    t: f64,
) -> (ComplexMatrix, ComplexMatrix) {
    let k = kraus_set(p, t);
    let map = LocalMap::channel(&k);
    let rate = LocalMap::channel_rate(&k);
    let half = map.apply_second(rho0);
    let rho_t = map.apply_first(&half);
    let rho_dot = &rate.apply_first(&half) + &map.apply_first(&rate.apply_second(rho0));
    (rho_t, rho_dot)
}

fn require_dim(rho: &DensityMatrix, dim: usize) -> Result<()> {
    if rho.dim() != dim {
        return Err(Error::InvalidState(format!(
            "expected a {dim}x{dim} density matrix, got {0}x{0}",
            rho.dim()
        )));
    }
    Ok(())
}

pub fn evolve_single(rho0: &DensityMatrix, p: &ChannelParams, t: f64) -> Result<DensityMatrix> {
    require_dim(rho0, 3)?;
    let k = kraus_set(p, t);
    Ok(DensityMatrix::from_trusted(k.apply(rho0.matrix())))
}

/// `ρ(t) = Σ_{k,l} (K_k ⊗ K_l) ρ(0) (K_k ⊗ K_l)†`, applied one atom at a time.
pub fn evolve_pair(rho0: &DensityMatrix, p: &ChannelParams, t: f64) -> Result<DensityMatrix> {
    require_dim(rho0, 9)?;
    let map = LocalMap::channel(&kraus_set(p, t));
    let rho_t = map.apply_first(&map.apply_second(rho0.matrix()));
    Ok(DensityMatrix::from_trusted(rho_t))
}

/// Analytic `ρ̇(t)` of an atom pair.
pub fn rho_dot_pair(rho0: &DensityMatrix, p: &ChannelParams, t: f64) -> Result<ComplexMatrix> {
    require_dim(rho0, 9)?;
    Ok(pair_state_and_rate(rho0.matrix(), p, t).1)
}
