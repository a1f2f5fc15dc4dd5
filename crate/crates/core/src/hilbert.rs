//! Composite space of two three-level atoms and one truncated Fock mode.
//!
//! Basis states are ordered as `index = (l1 * 3 + l2) * (n_max + 1) + n`
//! with `a = 0, b = 1, s = 2`, so the photon number runs fastest and the
//! space is `atom1 ⊗ atom2 ⊗ field`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

/// Atomic level. `A` and `B` are the cavity-coupled Rydberg levels, `S` is
/// the decay sink that the Hamiltonian never touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomLevel {
    A,
    B,
    S,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 3] = [AtomLevel::A, AtomLevel::B, AtomLevel::S];

    pub fn index(self) -> usize {
        match self {
            AtomLevel::A => 0,
            AtomLevel::B => 1,
            AtomLevel::S => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_lowercase() {
            'a' => Some(AtomLevel::A),
            'b' => Some(AtomLevel::B),
            's' => Some(AtomLevel::S),
            _ => None,
        }
    }
}

pub const LEVELS_PER_ATOM: usize = 3;
pub const N_ATOMS: usize = 2;
const ATOM_DIM: usize = LEVELS_PER_ATOM * LEVELS_PER_ATOM;

/// Truncation of the composite basis. Photon states `0..=n_max` are kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisSpec {
    n_max: usize,
}

impl BasisSpec {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParameter {
                name: "n_max",
                reason: "Fock truncation must keep at least two photon states".into(),
            });
        }
        Ok(Self { n_max })
    }

    /// Truncation for a field with mean photon number `n_bar`.
    ///
    /// Takes `ceil(10 n_bar)` and raises it until the discarded geometric tail
    /// `(n_bar / (1 + n_bar))^(n_max + 1)` is below `1e-7`, clamped to
    /// `[10, 200]`.
    pub fn default_for(n_bar: f64) -> Self {
        let by_mean = (10.0 * n_bar).ceil().max(0.0) as usize;
        let by_tail = if n_bar > 0.0 {
            let ratio = n_bar / (1.0 + n_bar);
            (((1e-7f64).ln() / ratio.ln()).ceil() as usize).saturating_sub(1)
        } else {
            0
        };
        Self { n_max: by_mean.max(by_tail).clamp(10, 200) }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn atom_dim(&self) -> usize {
        ATOM_DIM
    }

    pub fn dim(&self) -> usize {
        ATOM_DIM * self.fock_dim()
    }

    pub fn index(&self, level1: AtomLevel, level2: AtomLevel, n: usize) -> usize {
        debug_assert!(n <= self.n_max);
        (level1.index() * LEVELS_PER_ATOM + level2.index()) * self.fock_dim() + n
    }

    pub fn decompose(&self, index: usize) -> (AtomLevel, AtomLevel, usize) {
        let n = index % self.fock_dim();
        let atoms = index / self.fock_dim();
        (
            AtomLevel::from_index(atoms / LEVELS_PER_ATOM).expect("index within basis"),
            AtomLevel::from_index(atoms % LEVELS_PER_ATOM).expect("index within basis"),
            n,
        )
    }
}

fn level_projector(mu: AtomLevel, nu: AtomLevel) -> SparseOperator {
    SparseOperator::from_triplets(LEVELS_PER_ATOM, [(mu.index(), nu.index(), C64::new(1.0, 0.0))]).expect("3x3 projector")
}

/// `|mu><nu|` on atom `atom` (1 or 2), identity on the other factors.
pub fn atomic_operator(atom: usize, mu: AtomLevel, nu: AtomLevel, basis: &BasisSpec) -> Result<SparseOperator> {
    let single = level_projector(mu, nu);
    let id3 = SparseOperator::identity(LEVELS_PER_ATOM);
    let idf = SparseOperator::identity(basis.fock_dim());
    match atom {
        1 => Ok(single.kron(&id3).kron(&idf)),
        2 => Ok(id3.kron(&single).kron(&idf)),
        other => Err(Error::InvalidAtomIndex(other)),
    }
}

/// Annihilator on the bare Fock space `0..=n_max`.
pub fn fock_annihilator(n_max: usize) -> SparseOperator {
    SparseOperator::from_triplets(n_max + 1, (1..=n_max).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))))
        .expect("annihilator indices in range")
}

/// Photon number operator on the bare Fock space.
pub fn fock_number(n_max: usize) -> SparseOperator {
    SparseOperator::from_triplets(n_max + 1, (1..=n_max).map(|n| (n, n, C64::new(n as f64, 0.0))))
        .expect("number operator indices in range")
}

/// Photon annihilator on the composite space.
pub fn field_annihilator(basis: &BasisSpec) -> SparseOperator {
    SparseOperator::identity(ATOM_DIM).kron(&fock_annihilator(basis.n_max()))
}

/// Photon number operator on the composite space.
pub fn photon_number(basis: &BasisSpec) -> SparseOperator {
    SparseOperator::identity(ATOM_DIM).kron(&fock_number(basis.n_max()))
}

/// Projector onto the two-atom configuration `|level1 level2>` summed over photon number.
pub fn pair_projector(level1: AtomLevel, level2: AtomLevel, basis: &BasisSpec) -> SparseOperator {
    level_projector(level1, level1).kron(&level_projector(level2, level2)).kron(&SparseOperator::identity(basis.fock_dim()))
}

/// Thermal photon statistics truncated to `0..=n_max` and renormalized.
#[derive(Clone, Debug, PartialEq)]
pub struct ThermalDistribution {
    pub probabilities: Vec<f64>,
    /// Probability mass beyond `n_max` that was removed before renormalizing.
    pub discarded_tail: f64,
}

impl ThermalDistribution {
    pub fn mean(&self) -> f64 {
        self.probabilities.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}

/// Geometric photon-number law `P_n = n̄^n / (1 + n̄)^(n+1)` on `0..=n_max`.
pub fn thermal_distribution(n_bar: f64, n_max: usize) -> Result<ThermalDistribution> {
    if !(n_bar >= 0.0) || !n_bar.is_finite() {
        return Err(Error::NegativePhotonNumber(n_bar));
    }
    let ratio = n_bar / (1.0 + n_bar);
    let p0 = 1.0 / (1.0 + n_bar);
    let raw: Vec<f64> = (0..=n_max).map(|n| p0 * ratio.powi(n as i32)).collect();
    let discarded_tail = ratio.powi(n_max as i32 + 1);
    let kept: f64 = raw.iter().sum();
    Ok(ThermalDistribution { probabilities: raw.into_iter().map(|p| p / kept).collect(), discarded_tail })
}

/// Diagonal field state with thermal statistics on the Fock factor.
#[derive(Clone, Debug)]
pub struct ThermalField {
    pub state: DensityMatrix,
    pub discarded_tail: f64,
}

pub fn thermal_field_state(n_bar: f64, basis: &BasisSpec) -> Result<ThermalField> {
    let dist = thermal_distribution(n_bar, basis.n_max())?;
    let state = field_state_from_distribution(&dist.probabilities)?;
    Ok(ThermalField { state, discarded_tail: dist.discarded_tail })
}

/// Diagonal Fock-space density matrix with the given photon-number populations.
pub fn field_state_from_distribution(probabilities: &[f64]) -> Result<DensityMatrix> {
    let d = probabilities.len();
    DensityMatrix::new(DMatrix::from_fn(d, d, |r, c| if r == c { C64::new(probabilities[r], 0.0) } else { C64::new(0.0, 0.0) }))
}

/// `|level1 level2><level1 level2| ⊗ field`.
pub fn product_state(level1: AtomLevel, level2: AtomLevel, field: &DensityMatrix) -> Result<DensityMatrix> {
    let fd = field.dim();
    if fd < 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: fd });
    }
    let basis = BasisSpec::new(fd - 1)?;
    let mut m = DMatrix::zeros(basis.dim(), basis.dim());
    let off = basis.index(level1, level2, 0);
    m.view_mut((off, off), (fd, fd)).copy_from(field.matrix());
    DensityMatrix::new(m)
}

/// Reduced field state `tr_atoms ρ`.
pub fn partial_trace_atoms(rho: &DensityMatrix, basis: &BasisSpec) -> Result<DensityMatrix> {
    check_dim(rho, basis)?;
    let fd = basis.fock_dim();
    let m = rho.matrix();
    let mut out = DMatrix::zeros(fd, fd);
    for a in 0..ATOM_DIM {
        out += m.view((a * fd, a * fd), (fd, fd));
    }
    DensityMatrix::new(out)
}

/// Reduced two-atom state `tr_field ρ` (9 x 9).
pub fn partial_trace_field(rho: &DensityMatrix, basis: &BasisSpec) -> Result<DensityMatrix> {
    check_dim(rho, basis)?;
    let fd = basis.fock_dim();
    let m = rho.matrix();
    let out = DMatrix::from_fn(ATOM_DIM, ATOM_DIM, |r, c| (0..fd).map(|n| m[(r * fd + n, c * fd + n)]).sum());
    DensityMatrix::new(out)
}

fn check_dim(rho: &DensityMatrix, basis: &BasisSpec) -> Result<()> {
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: rho.dim() });
    }
    Ok(())
}

/// `tr(op ρ)`.
pub fn expectation(rho: &DensityMatrix, op: &SparseOperator) -> Result<C64> {
    if rho.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), found: rho.dim() });
    }
    let m = rho.matrix();
    Ok(op.entries().map(|(r, c, v)| v * m[(c, r)]).sum())
}
