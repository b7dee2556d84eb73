//! Quantum systems labelled by a translation generator with integer spectrum.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::eig::unitarity_error;
use crate::linalg::matrix::{ComplexMatrix, C64};
use crate::tol::TOL_STRUCT;

/// A system of dimension `dim` with Hamiltonian
/// `eigenbasis * diag(spectrum) * eigenbasis^dagger`.
///
/// Composite systems remember their factors in `parts`; the spectrum of a
/// composite lists sums of factor eigenvalues in Kronecker order.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    dim: usize,
    hamiltonian: ComplexMatrix,
    spectrum: Vec<i64>,
    eigenbasis: ComplexMatrix,
    parts: Vec<SystemSpec>,
}

impl SystemSpec {
    /// Validates that `eigenbasis` is unitary and builds the Hamiltonian.
    pub fn new(spectrum: Vec<i64>, eigenbasis: ComplexMatrix) -> Result<Self> {
        let dim = spectrum.len();
        if dim == 0 {
            return Err(Error::InvalidSystem("dimension must be positive".into()));
        }
        if eigenbasis.rows() != dim || eigenbasis.cols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{dim} eigenvalues but a {}x{} eigenbasis",
                eigenbasis.rows(),
                eigenbasis.cols()
            )));
        }
        let err = unitarity_error(&eigenbasis);
        if err > TOL_STRUCT {
            return Err(Error::InvalidSystem(format!(
                "eigenbasis is not unitary (error {err:.3e})"
            )));
        }
        let hamiltonian = build_hamiltonian(&spectrum, &eigenbasis);
        Ok(Self {
            dim,
            hamiltonian,
            spectrum,
            eigenbasis,
            parts: Vec::new(),
        })
    }

    /// Hamiltonian diagonal in the computational basis.
    pub fn from_diag(spectrum: &[i64]) -> Self {
        let d = spectrum.len();
        Self::new(spectrum.to_vec(), ComplexMatrix::identity(d)).expect("identity is unitary")
    }

    /// Dimension-`d` system with zero Hamiltonian.
    pub fn trivial(d: usize) -> Self {
        Self::from_diag(&vec![0; d])
    }

    /// `H = diag(0, 1, ..., d - 1)`.
    pub fn ladder(d: usize) -> Self {
        Self::from_diag(&(0..d as i64).collect::<Vec<_>>())
    }

    /// Joint system with `H = sum_k I x .. x H_k x .. x I`.
    pub fn compose(parts: &[SystemSpec]) -> Self {
        assert!(!parts.is_empty(), "compose needs at least one part");
        let mut spectrum = vec![0i64];
        let mut basis = ComplexMatrix::identity(1);
        for p in parts {
            spectrum = spectrum
                .iter()
                .flat_map(|&a| p.spectrum.iter().map(move |&b| a + b))
                .collect();
            basis = basis.kron(&p.eigenbasis);
        }
        let hamiltonian = build_hamiltonian(&spectrum, &basis);
        Self {
            dim: spectrum.len(),
            hamiltonian,
            spectrum,
            eigenbasis: basis,
            parts: parts.to_vec(),
        }
    }

    pub fn pair(a: &SystemSpec, b: &SystemSpec) -> Self {
        Self::compose(&[a.clone(), b.clone()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn spectrum(&self) -> &[i64] {
        &self.spectrum
    }

    pub fn eigenbasis(&self) -> &ComplexMatrix {
        &self.eigenbasis
    }

    /// Direct factors, empty for an elementary system.
    pub fn parts(&self) -> &[SystemSpec] {
        &self.parts
    }

    /// Dimensions of the direct factors (`[dim]` for an elementary system).
    pub fn factor_dims(&self) -> Vec<usize> {
        if self.parts.is_empty() {
            vec![self.dim]
        } else {
            self.parts.iter().map(|p| p.dim).collect()
        }
    }

    pub fn is_composite(&self) -> bool {
        !self.parts.is_empty()
    }

    pub fn spectral_diameter(&self) -> i64 {
        let max = self.spectrum.iter().max().copied().unwrap_or(0);
        let min = self.spectrum.iter().min().copied().unwrap_or(0);
        max - min
    }

    /// `e^{-iHt}`, exact in the stored eigenbasis.
    pub fn unitary(&self, t: f64) -> ComplexMatrix {
        let phases: Vec<C64> = self
            .spectrum
            .iter()
            .map(|&g| C64::from_polar(1.0, -(g as f64) * t))
            .collect();
        let w = &self.eigenbasis;
        ComplexMatrix::from_fn(self.dim, self.dim, |i, j| {
            (0..self.dim).map(|k| w[(i, k)] * phases[k] * w[(j, k)].conj()).sum()
        })
    }

    /// Distinct eigenvalues in increasing order with the projector onto each
    /// eigenspace.
    pub fn sectors(&self) -> Vec<(i64, ComplexMatrix)> {
        let mut values = self.spectrum.clone();
        values.sort_unstable();
        values.dedup();
        values
            .into_iter()
            .map(|g| {
                let cols: Vec<Vec<C64>> = (0..self.dim)
                    .filter(|&k| self.spectrum[k] == g)
                    .map(|k| self.eigenbasis.column(k))
                    .collect();
                let v = ComplexMatrix::from_columns(self.dim, &cols);
                (g, v.matmul(&v.adjoint()))
            })
            .collect()
    }

    /// Same system with negated, transposed generator (for the reference
    /// system of a maximally entangled probe).
    pub fn dual(&self) -> Self {
        Self {
            dim: self.dim,
            hamiltonian: self.hamiltonian.transpose().scale_real(-1.0),
            spectrum: self.spectrum.iter().map(|g| -g).collect(),
            eigenbasis: self.eigenbasis.conj(),
            parts: self.parts.iter().map(|p| p.dual()).collect(),
        }
    }

    fn check_dim(&self, m: &ComplexMatrix) -> Result<()> {
        if m.rows() != self.dim || m.cols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on a {}-dimensional system",
                m.rows(),
                m.cols(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Errors unless `m` is a `dim x dim` operator.
    pub fn ensure_operator(&self, m: &ComplexMatrix) -> Result<()> {
        self.check_dim(m)
    }
}

fn build_hamiltonian(spectrum: &[i64], basis: &ComplexMatrix) -> ComplexMatrix {
    let d = spectrum.len();
    let h = ComplexMatrix::from_fn(d, d, |i, j| {
        (0..d)
            .map(|k| basis[(i, k)] * basis[(j, k)].conj() * spectrum[k] as f64)
            .sum()
    });
    h.hermitian_part()
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BasisJson {
    Named(String),
    Matrix(ComplexMatrix),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemJson {
    dim: usize,
    spectrum: Vec<i64>,
    eigenbasis: BasisJson,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    parts: Vec<SystemSpec>,
}

impl Serialize for SystemSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let eigenbasis = if self.eigenbasis == ComplexMatrix::identity(self.dim) {
            BasisJson::Named("computational".into())
        } else {
            BasisJson::Matrix(self.eigenbasis.clone())
        };
        SystemJson {
            dim: self.dim,
            spectrum: self.spectrum.clone(),
            eigenbasis,
            parts: self.parts.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SystemSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SystemJson::deserialize(d)?;
        if raw.dim != raw.spectrum.len() {
            return Err(D::Error::custom(format!(
                "dim is {} but spectrum has {} entries",
                raw.dim,
                raw.spectrum.len()
            )));
        }
        let basis = match raw.eigenbasis {
            BasisJson::Named(name) if name == "computational" => ComplexMatrix::identity(raw.dim),
            BasisJson::Named(name) => {
                return Err(D::Error::custom(format!(
                    "unknown eigenbasis \"{name}\" (expected \"computational\" or a matrix)"
                )))
            }
            BasisJson::Matrix(m) => m,
        };
        let mut sys = SystemSpec::new(raw.spectrum, basis).map_err(D::Error::custom)?;
        if !raw.parts.is_empty() {
            let joint = SystemSpec::compose(&raw.parts);
            if joint.spectrum != sys.spectrum || (&joint.eigenbasis - &sys.eigenbasis).max_abs() > TOL_STRUCT {
                return Err(D::Error::custom("parts do not compose to the stated system"));
            }
            sys.parts = raw.parts;
        }
        Ok(sys)
    }
}
