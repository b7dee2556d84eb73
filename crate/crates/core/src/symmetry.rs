//! Translation group action, covariance, twirling and asymmetry measures.
//!
//! Every generator has an integer spectrum, so `t -> e^{-iHt}` has period
//! `2 pi` and all group averages are exact sector dephasings.
//!
//! # Covariance on the Choi operator
//!
//! A channel `E` is covariant iff its Choi operator `J` commutes with
//! `K = H_out x I - I x H_in^T`. The eigenvectors of `K` are
//! `w_a x conj(v_i)` for eigenvectors `w_a` of `H_out` (eigenvalue `g_a`) and
//! `v_i` of `H_in` (eigenvalue `h_i`), with eigenvalue `g_a - h_i`. Twirling a
//! channel therefore zeroes the entries of `J` between distinct `K` sectors.
//!
//! # Random covariant channels
//!
//! Draw `J0 = G G^dagger` with `G` Ginibre and dephase it across the `K`
//! sectors, so `[J0, K] = 0`. Let `X = Tr_out J0`. Taking the partial trace
//! over the output of `[J0, H_out x I] - [J0, I x H_in^T] = 0`, the first term
//! vanishes (cyclicity of the partial trace on the traced factor), leaving
//! `[X, H_in^T] = 0`. Hence `Y = I x X^{-1/2}` commutes with `K`, and
//! `J = Y J0 Y` is PSD, commutes with `K`, and has
//! `Tr_out J = X^{-1/2} X X^{-1/2} = I`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::channel::{choi_input_marginal, Channel};
use crate::linalg::eig::{hermitian_eig, psd_pinv_sqrt, psd_sqrt};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::quantum::{fidelity, DensityMatrix};
use crate::linalg::random::ginibre;
use crate::linalg::system::SystemSpec;

/// Boolean verdict together with the measured witness norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    pub witness: f64,
}

/// Default tolerance of the covariance predicate.
pub const COVARIANCE_TOL: f64 = 1e-9;

/// Minimum eigenvalue of `Tr_out J0` accepted by [`random_covariant_channel`].
pub const RANDOM_CHANNEL_MIN_EIG: f64 = 1e-8;
const RANDOM_CHANNEL_ATTEMPTS: usize = 100;

fn check_dim(rho: &DensityMatrix, sys: &SystemSpec) -> Result<()> {
    if rho.dim() != sys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional state on a {}-dimensional system",
            rho.dim(),
            sys.dim()
        )));
    }
    Ok(())
}

/// `e^{-iHt} rho e^{iHt}`.
pub fn time_translate(rho: &DensityMatrix, sys: &SystemSpec, t: f64) -> Result<DensityMatrix> {
    check_dim(rho, sys)?;
    let u = sys.unitary(t);
    Ok(DensityMatrix::new_unchecked(
        rho.as_matrix().conjugate_by(&u).hermitian_part(),
    ))
}

/// `||[rho, H]||_max <= tol`.
pub fn is_symmetric_state(rho: &DensityMatrix, sys: &SystemSpec, tol: f64) -> Result<Verdict> {
    is_symmetric_operator(rho.as_matrix(), sys, tol)
}

pub fn is_symmetric_operator(m: &ComplexMatrix, sys: &SystemSpec, tol: f64) -> Result<Verdict> {
    sys.ensure_operator(m)?;
    let witness = m.commutator(sys.hamiltonian()).max_abs();
    Ok(Verdict {
        holds: witness <= tol,
        witness,
    })
}

/// System with generator `-H^T`.
pub fn dual_system(sys: &SystemSpec) -> SystemSpec {
    sys.dual()
}

/// Eigen-decomposition of `K = H_out x I - I x H_in^T` grouped by eigenvalue.
#[derive(Clone, Debug)]
pub struct CovarianceSector {
    basis: ComplexMatrix,
    labels: Vec<i64>,
    sectors: BTreeMap<i64, Vec<usize>>,
}

impl CovarianceSector {
    pub fn new(input: &SystemSpec, output: &SystemSpec) -> Self {
        let basis = output.eigenbasis().kron(&input.eigenbasis().conj());
        let labels: Vec<i64> = output
            .spectrum()
            .iter()
            .flat_map(|&g| input.spectrum().iter().map(move |&h| g - h))
            .collect();
        let mut sectors: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (k, &l) in labels.iter().enumerate() {
            sectors.entry(l).or_default().push(k);
        }
        Self { basis, labels, sectors }
    }

    /// The operator `K`.
    pub fn generator(&self) -> ComplexMatrix {
        let labels: Vec<f64> = self.labels.iter().map(|&l| l as f64).collect();
        ComplexMatrix::diag_real(&labels)
            .conjugate_by(&self.basis)
            .hermitian_part()
    }

    pub fn labels(&self) -> Vec<i64> {
        self.sectors.keys().copied().collect()
    }

    /// Orthogonal projector onto the `K = label` eigenspace.
    pub fn projector(&self, label: i64) -> ComplexMatrix {
        let n = self.basis.rows();
        let cols: Vec<Vec<_>> = self
            .sectors
            .get(&label)
            .map(|ks| ks.iter().map(|&k| self.basis.column(k)).collect())
            .unwrap_or_default();
        let v = ComplexMatrix::from_columns(n, &cols);
        v.matmul(&v.adjoint())
    }

    pub(crate) fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// Basis-column indices of each `K` eigenspace.
    pub(crate) fn index_sets(&self) -> impl Iterator<Item = &[usize]> {
        self.sectors.values().map(Vec::as_slice)
    }

    /// Zeroes every block of `j` between distinct `K` eigenvalues.
    pub fn dephase(&self, j: &ComplexMatrix) -> ComplexMatrix {
        let mut m = j.compress(&self.basis);
        let n = m.rows();
        for r in 0..n {
            for c in 0..n {
                if self.labels[r] != self.labels[c] {
                    m[(r, c)] = crate::linalg::matrix::ZERO;
                }
            }
        }
        m.conjugate_by(&self.basis)
    }
}

/// Covariance test `||[J, K]||_max <= tol`.
pub fn is_covariant_channel(ch: &Channel, tol: f64) -> Result<Verdict> {
    ch.validate(10.0 * crate::tol::TOL_STRUCT)?;
    let k = CovarianceSector::new(ch.input(), ch.output()).generator();
    let witness = ch.choi().commutator(&k).max_abs();
    Ok(Verdict {
        holds: witness <= tol,
        witness,
    })
}

/// Covariance under the finite set of translations `times` only:
/// `max_t ||[J, V_t x conj(U_t)]||_max`.
pub fn is_covariant_at_times(ch: &Channel, times: &[f64], tol: f64) -> Result<Verdict> {
    ch.validate(10.0 * crate::tol::TOL_STRUCT)?;
    let mut witness: f64 = 0.0;
    for &t in times {
        let g = ch.output().unitary(t).kron(&ch.input().unitary(t).conj());
        witness = witness.max(ch.choi().commutator(&g).max_abs());
    }
    Ok(Verdict {
        holds: witness <= tol,
        witness,
    })
}

/// Group average of a channel over the compact translation group.
pub fn twirl_channel(ch: &Channel) -> Result<Channel> {
    ch.validate(10.0 * crate::tol::TOL_STRUCT)?;
    let j = CovarianceSector::new(ch.input(), ch.output()).dephase(ch.choi());
    Ok(Channel::new_unchecked(
        ch.input().clone(),
        ch.output().clone(),
        j.hermitian_part(),
    ))
}

/// Average of `(V_t x conj(U_t)) J (V_t x conj(U_t))^dagger` over `times`.
pub fn twirl_choi_at_times(j: &ComplexMatrix, input: &SystemSpec, output: &SystemSpec, times: &[f64]) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(j.rows(), j.cols());
    for &t in times {
        let g = output.unitary(t).kron(&input.unitary(t).conj());
        acc = &acc + &j.conjugate_by(&g);
    }
    acc.scale_real(1.0 / times.len() as f64).hermitian_part()
}

/// Removes coherence between distinct energy eigenspaces.
pub fn twirl_state(rho: &DensityMatrix, sys: &SystemSpec) -> Result<DensityMatrix> {
    check_dim(rho, sys)?;
    let mut out = ComplexMatrix::zeros(sys.dim(), sys.dim());
    for (_, p) in sys.sectors() {
        out = &out + &rho.as_matrix().conjugate_by(&p);
    }
    Ok(DensityMatrix::new_unchecked(out.hermitian_part()))
}

/// Random covariant channel `input -> output`.
pub fn random_covariant_channel<R: Rng + ?Sized>(
    input: &SystemSpec,
    output: &SystemSpec,
    rng: &mut R,
) -> Result<Channel> {
    let (d_in, d_out) = (input.dim(), output.dim());
    let n = d_in * d_out;
    let sectors = CovarianceSector::new(input, output);
    let mut smallest = 0.0;
    for _ in 0..RANDOM_CHANNEL_ATTEMPTS {
        let g = ginibre(n, n, rng);
        let j0 = sectors.dephase(&g.matmul(&g.adjoint())).hermitian_part();
        let x = choi_input_marginal(&j0, d_in, d_out).hermitian_part();
        smallest = hermitian_eig(&x)?.min();
        if smallest < RANDOM_CHANNEL_MIN_EIG {
            continue;
        }
        let y = ComplexMatrix::identity(d_out).kron(&psd_pinv_sqrt(&x, 0.0)?);
        let j = y.matmul(&j0).matmul(&y).hermitian_part();
        return Channel::new(input.clone(), output.clone(), j);
    }
    Err(Error::Singular(format!(
        "Tr_out J0 stayed near-singular after {RANDOM_CHANNEL_ATTEMPTS} draws (last min eigenvalue {smallest:.3e})"
    )))
}

/// `f_t(rho) = 1 - Fid(rho, e^{-iHt} rho e^{iHt})`, clamped to `[0, 1]`.
pub fn measure_ft(rho: &DensityMatrix, sys: &SystemSpec, t: f64) -> Result<f64> {
    let shifted = time_translate(rho, sys, t)?;
    Ok((1.0 - fidelity(rho, &shifted)?).clamp(0.0, 1.0))
}

/// Wigner-Yanase skew information `-Tr([sqrt(rho), H]^2)/2`.
pub fn skew_information(rho: &DensityMatrix, sys: &SystemSpec) -> Result<f64> {
    check_dim(rho, sys)?;
    let c = psd_sqrt(rho.as_matrix())?.commutator(sys.hamiltonian());
    // [sqrt(rho), H] is anti-Hermitian, so -Tr(C^2) = ||C||_F^2.
    Ok(0.5 * c.frobenius_norm().powi(2))
}

/// `|f_t(a x b) - [1 - (1 - f_t(a))(1 - f_t(b))]|` with the joint generator.
pub fn product_ft_identity_check(
    a: &DensityMatrix,
    b: &DensityMatrix,
    sys_a: &SystemSpec,
    sys_b: &SystemSpec,
    t: f64,
) -> Result<f64> {
    let joint = SystemSpec::pair(sys_a, sys_b);
    let f_joint = measure_ft(&a.tensor(b), &joint, t)?;
    let fa = measure_ft(a, sys_a, t)?;
    let fb = measure_ft(b, sys_b, t)?;
    Ok((f_joint - (1.0 - (1.0 - fa) * (1.0 - fb))).abs())
}

/// Selects one of the implemented asymmetry measures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum AsymmetryMeasureId {
    FidelityShift { t: f64 },
    SkewInformation,
}

impl AsymmetryMeasureId {
    pub fn fidelity_shift(t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self::FidelityShift { t })
    }

    pub fn evaluate(&self, rho: &DensityMatrix, sys: &SystemSpec) -> Result<f64> {
        match *self {
            Self::FidelityShift { t } => measure_ft(rho, sys, t),
            Self::SkewInformation => skew_information(rho, sys),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::FidelityShift { t } => format!("f_t(t={t})"),
            Self::SkewInformation => "skew_information".into(),
        }
    }
}
