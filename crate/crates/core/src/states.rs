//! Initial two-qutrit states and entanglement diagnostics.
//!
//! Kets are written with physical level labels (`|0⟩` = ground); the
//! conversion to matrix indices goes through [`pair_index`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::qmat::{
    hermitian_eigenvalues, pair_index, partial_transpose_second, swap_qutrits, tensor,
    ComplexMatrix, DensityMatrix, C64,
};
use crate::tol;

/// Which maximally entangled ket the Werner mixture is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WernerVariant {
    /// `(|00⟩ + |11⟩ + |22⟩)/√3`.
    Psi0,
    /// `(|01⟩ + |12⟩ + |20⟩)/√3`.
    Psi1,
    /// `Psi1` with the two atoms exchanged: `(|10⟩ + |21⟩ + |02⟩)/√3`.
    Psi1Swapped,
}

impl WernerVariant {
    fn label_pairs(self) -> [(usize, usize); 3] {
        match self {
            WernerVariant::Psi0 => [(0, 0), (1, 1), (2, 2)],
            WernerVariant::Psi1 => [(0, 1), (1, 2), (2, 0)],
            WernerVariant::Psi1Swapped => [(1, 0), (2, 1), (0, 2)],
        }
    }

    pub fn ket(self) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); 9];
        let amp = C64::new(1.0 / 3f64.sqrt(), 0.0);
        for (a, b) in self.label_pairs() {
            v[pair_index(a, b)] = amp;
        }
        v
    }
}

/// The state families swept by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateFamily {
    Werner(WernerVariant),
    Horodecki,
}

impl StateFamily {
    pub const ALL: [StateFamily; 4] = [
        StateFamily::Werner(WernerVariant::Psi0),
        StateFamily::Werner(WernerVariant::Psi1),
        StateFamily::Werner(WernerVariant::Psi1Swapped),
        StateFamily::Horodecki,
    ];

    pub fn label(self) -> &'static str {
        match self {
            StateFamily::Werner(WernerVariant::Psi0) => "werner-psi0",
            StateFamily::Werner(WernerVariant::Psi1) => "werner-psi1",
            StateFamily::Werner(WernerVariant::Psi1Swapped) => "werner-psi1-swapped",
            StateFamily::Horodecki => "horodecki",
        }
    }

    /// Name of the family parameter (`p` or `alpha`).
    pub fn param_name(self) -> &'static str {
        match self {
            StateFamily::Werner(_) => "p",
            StateFamily::Horodecki => "alpha",
        }
    }

    pub fn domain(self) -> (f64, f64) {
        match self {
            StateFamily::Werner(_) => (0.0, 1.0),
            StateFamily::Horodecki => (0.0, 5.0),
        }
    }

    pub fn check_param(self, param: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if param.is_finite() && (lo..=hi).contains(&param) {
            Ok(())
        } else {
            Err(Error::ParamOutOfRange {
                name: self.param_name(),
                value: param,
                range: match self {
                    StateFamily::Werner(_) => "[0, 1]",
                    StateFamily::Horodecki => "[0, 5]",
                },
            })
        }
    }

    pub fn state(self, param: f64) -> Result<DensityMatrix> {
        match self {
            StateFamily::Werner(v) => werner(param, v),
            StateFamily::Horodecki => horodecki(param),
        }
    }
}

impl fmt::Display for StateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for StateFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        StateFamily::ALL
            .into_iter()
            .find(|f| f.label() == s)
            .ok_or_else(|| {
                let names: Vec<_> = StateFamily::ALL.iter().map(|f| f.label()).collect();
                format!("unknown state family `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    Separable,
    FreeEntangled,
    BoundEntangled,
}

impl RegionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::Separable => "Separable",
            RegionLabel::FreeEntangled => "FreeEntangled",
            RegionLabel::BoundEntangled => "BoundEntangled",
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementRegion {
    pub label: RegionLabel,
    pub parameter: f64,
}

/// `(1-p) I/9 + p |ψ⟩⟨ψ|`.
pub fn werner(p: f64, variant: WernerVariant) -> Result<DensityMatrix> {
    StateFamily::Werner(variant).check_param(p)?;
    let noise = ComplexMatrix::identity(9).scale((1.0 - p) / 9.0);
    let proj = ComplexMatrix::outer(&variant.ket()).scale(p);
    Ok(DensityMatrix::from_trusted(&noise + &proj))
}

/// The cyclic shift of the level labels, `S|0⟩ = |2⟩`, `S|1⟩ = |0⟩`, `S|2⟩ = |1⟩`.
pub fn shift_operator() -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(3);
    let one = C64::new(1.0, 0.0);
    for (from, to) in [(0usize, 2usize), (1, 0), (2, 1)] {
        s[(crate::qmat::level_index(to), crate::qmat::level_index(from))] = one;
    }
    s
}

/// `I ⊗ S`, acting on the second atom only.
///
/// `(I ⊗ S†)|ψ0⟩ = |ψ1⟩`, so `werner(p, Psi1)` is `werner(p, Psi0)`
/// conjugated by the adjoint of this operator.
pub fn shift_unitary() -> ComplexMatrix {
    tensor(&ComplexMatrix::identity(3), &shift_operator())
}

/// `2/7 |ψ0⟩⟨ψ0| + α/7 σ+ + (5-α)/7 σ-`.
pub fn horodecki(alpha: f64) -> Result<DensityMatrix> {
    StateFamily::Horodecki.check_param(alpha)?;
    let mut m = ComplexMatrix::outer(&WernerVariant::Psi0.ket()).scale(2.0 / 7.0);
    let plus = alpha / 21.0;
    let minus = (5.0 - alpha) / 21.0;
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        m[(pair_index(a, b), pair_index(a, b))] += C64::new(plus, 0.0);
    }
    for (a, b) in [(1, 0), (2, 1), (0, 2)] {
        m[(pair_index(a, b), pair_index(a, b))] += C64::new(minus, 0.0);
    }
    Ok(DensityMatrix::from_trusted(m))
}

/// Sum of the magnitudes of the negative partial-transpose eigenvalues.
/// Eigenvalues within round-off of zero do not count.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    let pt = partial_transpose_second(rho.matrix())?;
    let spectrum = hermitian_eigenvalues(&pt)?;
    Ok(spectrum
        .values
        .iter()
        .filter(|&&v| v < tol::PPT_FLOOR)
        .fold(0.0, |acc, v| acc - v))
}

/// Smallest eigenvalue of the partial transpose.
pub fn min_partial_transpose_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    let pt = partial_transpose_second(rho.matrix())?;
    Ok(hermitian_eigenvalues(&pt)?.min())
}

/// Region of a family parameter. Bound entanglement is taken from the known
/// classification of the Horodecki family; it is not detected numerically.
pub fn classify_region(family: StateFamily, param: f64) -> Result<EntanglementRegion> {
    family.check_param(param)?;
    let label = match family {
        StateFamily::Werner(_) if param <= 0.25 => RegionLabel::Separable,
        StateFamily::Werner(_) => RegionLabel::FreeEntangled,
        StateFamily::Horodecki => match param {
            a if a < 1.0 => RegionLabel::FreeEntangled,
            a if a < 2.0 => RegionLabel::BoundEntangled,
            a if a <= 3.0 => RegionLabel::Separable,
            a if a <= 4.0 => RegionLabel::BoundEntangled,
            _ => RegionLabel::FreeEntangled,
        },
    };
    Ok(EntanglementRegion {
        label,
        parameter: param,
    })
}

/// Exchanges the two atoms.
pub fn swap_parties(rho: &DensityMatrix) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_trusted(swap_qutrits(rho.matrix())?))
}
