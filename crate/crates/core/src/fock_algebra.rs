//! Operators and states on the truncated atom ⊗ cavity space `C² ⊗ C^d`.
//!
//! Tensor order is atom ⊗ cavity and the atom basis is `(|g⟩, |e⟩)`, so the
//! composite index of `|atom, n⟩` is `atom * d + n` and `|g,0⟩` sits at 0.

use ndarray::{Array1, Array2};
use ndarray_linalg::{EigValsh, UPLO};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Atom {
    Ground = 0,
    Excited = 1,
}

/// Dimensions of the truncated Hilbert space: a two-level atom and a cavity
/// with basis `|0⟩ … |d−1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertDims {
    fock_cutoff: usize,
}

impl HilbertDims {
    pub const ATOM_DIM: usize = 2;

    pub fn new(fock_cutoff: usize) -> Result<Self> {
        if fock_cutoff < 2 {
            return Err(Error::CutoffTooSmall {
                cutoff: fock_cutoff,
                required: 1,
            });
        }
        Ok(HilbertDims { fock_cutoff })
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn total(&self) -> usize {
        Self::ATOM_DIM * self.fock_cutoff
    }

    pub fn index(&self, atom: Atom, n: usize) -> usize {
        debug_assert!(n < self.fock_cutoff);
        atom as usize * self.fock_cutoff + n
    }

    /// Fails unless `d > required`.
    pub fn require_above(&self, required: usize) -> Result<()> {
        if self.fock_cutoff <= required {
            Err(Error::CutoffTooSmall {
                cutoff: self.fock_cutoff,
                required,
            })
        } else {
            Ok(())
        }
    }
}

/// Sparse operator on the composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dims: HilbertDims,
    data: CsrMatrix,
}

impl Operator {
    pub fn new(dims: HilbertDims, data: CsrMatrix) -> Result<Self> {
        let n = dims.total();
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: data.nrows().max(data.ncols()),
            });
        }
        Ok(Operator { dims, data })
    }

    pub fn identity(dims: HilbertDims) -> Self {
        Operator {
            dims,
            data: CsrMatrix::identity(dims.total()),
        }
    }

    pub fn zeros(dims: HilbertDims) -> Self {
        Operator {
            dims,
            data: CsrMatrix::zeros(dims.total(), dims.total()),
        }
    }

    /// `atom_part ⊗ cavity_part` for a 2×2 and a d×d factor.
    pub fn from_factors(dims: HilbertDims, atom_part: &CsrMatrix, cavity_part: &CsrMatrix) -> Self {
        assert_eq!(atom_part.nrows(), HilbertDims::ATOM_DIM);
        assert_eq!(cavity_part.nrows(), dims.fock_cutoff());
        Operator {
            dims,
            data: atom_part.kron(cavity_part),
        }
    }

    pub fn dims(&self) -> HilbertDims {
        self.dims
    }

    pub fn data(&self) -> &CsrMatrix {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data.get(i, j)
    }

    pub fn element(&self, bra: (Atom, usize), ket: (Atom, usize)) -> Complex64 {
        self.data
            .get(self.dims.index(bra.0, bra.1), self.dims.index(ket.0, ket.1))
    }

    pub fn nnz(&self) -> usize {
        self.data.nnz()
    }

    pub fn adjoint(&self) -> Self {
        Operator {
            dims: self.dims,
            data: self.data.adjoint(),
        }
    }

    pub fn mul(&self, other: &Operator) -> Self {
        assert_eq!(self.dims, other.dims);
        Operator {
            dims: self.dims,
            data: self.data.matmul(&other.data),
        }
    }

    pub fn add(&self, other: &Operator) -> Self {
        assert_eq!(self.dims, other.dims);
        Operator {
            dims: self.dims,
            data: self.data.add(&other.data),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Operator {
            dims: self.dims,
            data: self.data.scale(factor),
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        self.data.to_dense()
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.data.hermiticity_error()
    }
}

fn cavity_annihilation(d: usize) -> CsrMatrix {
    CsrMatrix::from_triplets(
        d,
        d,
        (1..d).map(|n| (n - 1, n, Complex64::new((n as f64).sqrt(), 0.0))),
    )
}

fn cavity_projector(d: usize, k: usize) -> CsrMatrix {
    CsrMatrix::from_triplets(d, d, std::iter::once((k, k, Complex64::new(1.0, 0.0))))
}

/// `I₂ ⊗ a` with `a|n⟩ = √n |n−1⟩`.
pub fn annihilation(dims: HilbertDims) -> Operator {
    Operator::from_factors(
        dims,
        &CsrMatrix::identity(2),
        &cavity_annihilation(dims.fock_cutoff()),
    )
}

/// `I₂ ⊗ a†a`.
pub fn number_operator(dims: HilbertDims) -> Operator {
    let a = annihilation(dims);
    a.adjoint().mul(&a)
}

/// `I₂ ⊗ |k⟩⟨k|`.
pub fn fock_projector(dims: HilbertDims, k: usize) -> Operator {
    Operator::from_factors(
        dims,
        &CsrMatrix::identity(2),
        &cavity_projector(dims.fock_cutoff(), k),
    )
}

/// Returns `(σ₋, σ₊, σ_z)`, each tensored with the cavity identity.
pub fn atomic_operators(dims: HilbertDims) -> (Operator, Operator, Operator) {
    let one = Complex64::new(1.0, 0.0);
    // σ₊ = |e⟩⟨g| has its entry at (e, g) = (1, 0)
    let sigma_plus = CsrMatrix::from_triplets(2, 2, [(1, 0, one)]);
    let sigma_minus = sigma_plus.adjoint();
    let sigma_z = CsrMatrix::from_diagonal(&[-one, one]);
    let id = CsrMatrix::identity(dims.fock_cutoff());
    (
        Operator::from_factors(dims, &sigma_minus, &id),
        Operator::from_factors(dims, &sigma_plus, &id),
        Operator::from_factors(dims, &sigma_z, &id),
    )
}

/// `op^k`, with `op⁰ = I`.
pub fn op_power(op: &Operator, k: u32) -> Operator {
    let mut out = Operator::identity(op.dims());
    let mut base = op.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            out = out.mul(&base);
        }
        k >>= 1;
        if k > 0 {
            base = base.mul(&base);
        }
    }
    out
}

/// Dense density matrix on the composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: HilbertDims,
    data: Array2<Complex64>,
}

impl DensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-8;
    pub const POSITIVITY_TOL: f64 = 1e-8;

    /// Wraps a matrix without checking physicality; see [`DensityMatrix::validate`].
    pub fn from_matrix(dims: HilbertDims, data: Array2<Complex64>) -> Result<Self> {
        let n = dims.total();
        if data.dim() != (n, n) {
            return Err(Error::DimensionMismatch {
                left: n,
                right: data.nrows(),
            });
        }
        Ok(DensityMatrix { dims, data })
    }

    pub fn basis(dims: HilbertDims, atom: Atom, n: usize) -> Self {
        let mut data = Array2::zeros((dims.total(), dims.total()));
        let i = dims.index(atom, n);
        data[[i, i]] = Complex64::new(1.0, 0.0);
        DensityMatrix { dims, data }
    }

    /// `|g,0⟩⟨g,0|`.
    pub fn ground(dims: HilbertDims) -> Self {
        Self::basis(dims, Atom::Ground, 0)
    }

    /// `|ψ⟩⟨ψ|` for a state vector of length `2d` (normalized here).
    pub fn pure(dims: HilbertDims, psi: &Array1<Complex64>) -> Result<Self> {
        if psi.len() != dims.total() {
            return Err(Error::DimensionMismatch {
                left: dims.total(),
                right: psi.len(),
            });
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let psi = psi.mapv(|z| z / norm);
        let data = Array2::from_shape_fn((psi.len(), psi.len()), |(i, j)| psi[i] * psi[j].conj());
        Ok(DensityMatrix { dims, data })
    }

    pub fn dims(&self) -> HilbertDims {
        self.dims
    }

    pub fn data(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<Complex64> {
        self.data
    }

    pub fn element(&self, bra: (Atom, usize), ket: (Atom, usize)) -> Complex64 {
        self.data[[self.dims.index(bra.0, bra.1), self.dims.index(ket.0, ket.1)]]
    }

    pub fn trace(&self) -> Complex64 {
        self.data.diag().sum()
    }

    /// `max |ρ − ρ†|` entrywise.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.data.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[[i, j]] - self.data[[j, i]].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let herm = (&self.data + &self.data.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        let vals = herm.eigvalsh(UPLO::Lower)?;
        Ok(vals.iter().copied().fold(f64::INFINITY, f64::min))
    }

    /// Population of the excited atomic state.
    pub fn excited_population(&self) -> f64 {
        let d = self.dims.fock_cutoff();
        (0..d)
            .map(|n| self.element((Atom::Excited, n), (Atom::Excited, n)).re)
            .sum()
    }

    /// Checks Hermiticity, unit trace and positivity at their tolerances.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > Self::HERMITICITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix not Hermitian (error {herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let min = self.min_eigenvalue()?;
        if min < -Self::POSITIVITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    /// Trace distance `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                left: self.dims.total(),
                right: other.dims.total(),
            });
        }
        let diff = &self.data - &other.data;
        let herm = (&diff + &diff.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        let vals = herm.eigvalsh(UPLO::Lower)?;
        Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
    }
}

/// `Tr(op ρ)`.
pub fn expectation(rho: &DensityMatrix, op: &Operator) -> Result<Complex64> {
    if rho.dims != op.dims {
        return Err(Error::DimensionMismatch {
            left: rho.dims.total(),
            right: op.dims.total(),
        });
    }
    Ok(op.data.iter().map(|(i, j, v)| v * rho.data[[j, i]]).sum())
}

/// Cavity Fock populations `P_k = Tr[(I₂ ⊗ |k⟩⟨k|) ρ]` for `k < d`.
pub fn fock_probabilities(rho: &DensityMatrix) -> Vec<f64> {
    let dims = rho.dims;
    (0..dims.fock_cutoff())
        .map(|k| {
            rho.element((Atom::Ground, k), (Atom::Ground, k)).re
                + rho.element((Atom::Excited, k), (Atom::Excited, k)).re
        })
        .collect()
}
