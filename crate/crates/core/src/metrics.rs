//! Right-invariant metrics with diagonal penalty matrices, their clean and
//! noise-switched costs, and path lengths.

use serde::{Deserialize, Serialize};

use crate::dynamics::{effective_hamiltonian, step_pieces, ControlSchedule, HamiltonianSet};
use crate::error::{Error, Result};
use crate::noise::NoiseRealization;
use crate::pauli::{binomial, expand, expand_raw, expansion_matrix, PauliBasis};

/// Penalty family, assigned by Pauli weight unless noted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricKind {
    /// Unit penalty everywhere: the bi-invariant inner product.
    Killing,
    /// `1` on weights 1 and 2, `k` on weight `k > 2`.
    Cliff,
    /// `(C(n,k) 3^k)^alpha`.
    Binomial { alpha: f64 },
    /// `x^(2k)`.
    Exponential { x: f64 },
    /// One qubit, penalty `p` on `z` only.
    SingleQubitZz { p: f64 },
    /// Two qubits, penalty `p` on every weight-2 direction.
    TwoQubitWeight2 { p: f64 },
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Killing => "killing",
            Self::Cliff => "cliff",
            Self::Binomial { .. } => "binomial",
            Self::Exponential { .. } => "exponential",
            Self::SingleQubitZz { .. } => "single_qubit_zz",
            Self::TwoQubitWeight2 { .. } => "two_qubit_weight2",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            Self::Killing | Self::Cliff => Ok(()),
            Self::Binomial { alpha } if !alpha.is_finite() || alpha < 0.0 => {
                bad(format!("binomial alpha = {alpha} must be finite and >= 0"))
            }
            Self::Exponential { x } if !x.is_finite() || x <= 1.0 => {
                bad(format!("exponential base x = {x} must be finite and > 1"))
            }
            Self::SingleQubitZz { p } | Self::TwoQubitWeight2 { p } if !p.is_finite() || p < 1.0 => {
                bad(format!("penalty p = {p} must be finite and >= 1"))
            }
            _ => Ok(()),
        }
    }

    fn weight_penalty(&self, n: usize, k: usize) -> f64 {
        match *self {
            Self::Killing => 1.0,
            Self::Cliff => {
                if k <= 2 {
                    1.0
                } else {
                    k as f64
                }
            }
            Self::Binomial { alpha } => (binomial(n, k) as f64 * 3f64.powi(k as i32)).powf(alpha),
            Self::Exponential { x } => x.powi(2 * k as i32),
            Self::TwoQubitWeight2 { p } => {
                if k == 2 {
                    p
                } else {
                    1.0
                }
            }
            Self::SingleQubitZz { .. } => unreachable!("direction-specific"),
        }
    }
}

/// Diagonal penalty `I_II` attached to one basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyMatrix {
    qubits: usize,
    diag: Vec<f64>,
}

impl PenaltyMatrix {
    /// Arbitrary positive diagonal for a basis.
    pub fn from_diagonal(basis: &PauliBasis, diag: Vec<f64>) -> Result<Self> {
        if diag.len() != basis.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                actual: diag.len(),
            });
        }
        if let Some(bad) = diag.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::InvalidParameter(format!("penalty entry {bad} must be positive")));
        }
        Ok(Self {
            qubits: basis.qubits(),
            diag,
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.diag.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.diag.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn check_basis(&self, basis: &PauliBasis) -> Result<()> {
        if basis.qubits() != self.qubits || basis.len() != self.diag.len() {
            return Err(Error::DimensionMismatch {
                expected: self.diag.len(),
                actual: basis.len(),
            });
        }
        Ok(())
    }
}

pub fn build_penalty(kind: MetricKind, basis: &PauliBasis) -> Result<PenaltyMatrix> {
    kind.validate()?;
    let n = basis.qubits();
    let diag = match kind {
        MetricKind::SingleQubitZz { p } => {
            if n != 1 {
                return Err(Error::MetricMismatch {
                    kind: kind.name().into(),
                    n,
                });
            }
            vec![1.0, 1.0, p]
        }
        MetricKind::TwoQubitWeight2 { .. } if n != 2 => {
            return Err(Error::MetricMismatch {
                kind: kind.name().into(),
                n,
            })
        }
        _ => basis
            .elements()
            .iter()
            .map(|e| kind.weight_penalty(n, e.weight()))
            .collect(),
    };
    PenaltyMatrix::from_diagonal(basis, diag)
}

/// `g(H,H) = sum_I I_II h_I^2`.
pub fn metric_cost_clean(h: &[f64], penalty: &PenaltyMatrix) -> Result<f64> {
    if h.len() != penalty.len() {
        return Err(Error::LengthMismatch {
            expected: penalty.len(),
            actual: h.len(),
        });
    }
    Ok(weighted_square(h, penalty.diag()))
}

fn weighted_square(h: &[f64], diag: &[f64]) -> f64 {
    h.iter().zip(diag).map(|(c, w)| w * c * c).sum()
}

/// Cost of the noise-switched generator: expand the effective Hamiltonian in
/// the basis and apply the clean cost.
pub fn metric_cost_noisy_oracle(
    h: &[f64],
    alpha: &[u8],
    set: &HamiltonianSet,
    basis: &PauliBasis,
    penalty: &PenaltyMatrix,
) -> Result<f64> {
    penalty.check_basis(basis)?;
    let effective = effective_hamiltonian(h, alpha, set)?;
    let coeffs = expand(&effective, basis)?.coeffs;
    metric_cost_clean(&coeffs, penalty)
}

/// Expanded three-term evaluation next to the direct expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyCostComparison {
    pub expanded: f64,
    pub oracle: f64,
    /// `expanded - oracle`.
    pub difference: f64,
}

/// Basis position `I(j)` of every channel whose intended Hamiltonian is a
/// single Pauli string with unit coefficient.
pub fn pauli_alignment(set: &HamiltonianSet, basis: &PauliBasis) -> Result<Vec<usize>> {
    const TOL: f64 = 1e-12;
    let mut positions = Vec::with_capacity(set.len());
    for (j, ch) in set.channels().iter().enumerate() {
        let coeffs = expand(&ch.intended, basis)?.coeffs;
        let mut support = coeffs.iter().enumerate().filter(|(_, c)| c.abs() > TOL);
        let pos = match (support.next(), support.next()) {
            (Some((pos, c)), None) if (c - 1.0).abs() <= TOL => pos,
            _ => return Err(Error::NotPauliAligned { channel: j }),
        };
        if positions.contains(&pos) {
            return Err(Error::NotPauliAligned { channel: j });
        }
        positions.push(pos);
    }
    Ok(positions)
}

/// Noisy cost through the expansion
///
/// ```text
/// g = sum_I I_II (a_I h_I)^2
///   + 2 sum_I sum_{J != I} I_II a_I (1 - a_J) h_I h_J M_IJ
///   +   sum_{I,J,K} I_II (1 - a_I)(1 - a_J) h_I h_J M_KI M_KJ
/// ```
///
/// with `H~_J = sum_I M_IJ sigma_I`, evaluated term by term as written and
/// returned together with [`metric_cost_noisy_oracle`]. The third term
/// weights by `I_II` rather than `I_KK`, so the two agree for the Killing
/// metric and whenever no channel is in error or errors map each direction
/// to itself, and differ otherwise.
pub fn metric_cost_noisy_expanded(
    h: &[f64],
    alpha: &[u8],
    set: &HamiltonianSet,
    basis: &PauliBasis,
    penalty: &PenaltyMatrix,
) -> Result<NoisyCostComparison> {
    penalty.check_basis(basis)?;
    let oracle = metric_cost_noisy_oracle(h, alpha, set, basis, penalty)?;
    let dirs = pauli_alignment(set, basis)?;
    let m = expansion_matrix(&set.erroneous(), basis)?;
    let w = penalty.diag();
    let a: Vec<f64> = alpha.iter().map(|&v| f64::from(v)).collect();
    let channels = set.len();

    let mut first = 0.0;
    let mut second = 0.0;
    let mut third = 0.0;
    for i in 0..channels {
        let wi = w[dirs[i]];
        first += wi * (a[i] * h[i]).powi(2);
        for j in 0..channels {
            if j != i {
                second += wi * a[i] * (1.0 - a[j]) * h[i] * h[j] * m[(dirs[i], j)];
            }
            let overlap: f64 = m.column(i).dot(&m.column(j));
            third += wi * (1.0 - a[i]) * (1.0 - a[j]) * h[i] * h[j] * overlap;
        }
    }
    let expanded = first + 2.0 * second + third;
    Ok(NoisyCostComparison {
        expanded,
        oracle,
        difference: expanded - oracle,
    })
}

/// `c(H,T) = sum sqrt(g) dt` over the jump-refined grid, with the noisy cost
/// on each piece (clean cost of the intended generator without a
/// realization).
pub fn path_length(
    schedule: &ControlSchedule,
    realization: Option<&NoiseRealization>,
    set: &HamiltonianSet,
    basis: &PauliBasis,
    penalty: &PenaltyMatrix,
) -> Result<f64> {
    penalty.check_basis(basis)?;
    if basis.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            actual: basis.dim(),
        });
    }
    if schedule.steps() > 0 && schedule.channels() != set.len() {
        return Err(Error::LengthMismatch {
            expected: set.len(),
            actual: schedule.channels(),
        });
    }
    if let Some(r) = realization {
        if r.channels() != set.len() {
            return Err(Error::LengthMismatch {
                expected: set.len(),
                actual: r.channels(),
            });
        }
    }
    let mut total = 0.0;
    for k in 0..schedule.steps() {
        let row = schedule.row(k);
        if row.iter().all(|v| *v == 0.0) {
            continue;
        }
        for (a, b, alpha) in step_pieces(schedule, realization, set.len(), k) {
            let effective = effective_hamiltonian(row, &alpha, set)?;
            let coeffs = expand_raw(effective.matrix(), basis).coeffs;
            total += weighted_square(&coeffs, penalty.diag()).sqrt() * (b - a);
        }
    }
    Ok(total)
}
