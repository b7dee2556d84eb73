//! Channels in Choi form.
//!
//! The Choi operator is `J = sum_ij E(|i><j|) x |i><j|` with the output factor
//! first, so `J[(a, i), (b, j)] = E(|i><j|)[a, b]` and `Tr_out J = I_in` is
//! trace preservation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::eig::hermitian_eig;
use crate::linalg::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::linalg::quantum::{partial_trace, DensityMatrix};
use crate::linalg::system::SystemSpec;
use crate::tol::TOL_STRUCT;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelJson")]
pub struct Channel {
    input: SystemSpec,
    output: SystemSpec,
    choi: ComplexMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelJson {
    input: SystemSpec,
    output: SystemSpec,
    choi: ComplexMatrix,
}

impl TryFrom<ChannelJson> for Channel {
    type Error = Error;
    fn try_from(raw: ChannelJson) -> Result<Self> {
        Channel::new(raw.input, raw.output, raw.choi)
    }
}

/// Worst violations of complete positivity and trace preservation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChoiDefects {
    pub hermiticity: f64,
    pub negativity: f64,
    pub trace_preservation: f64,
}

impl ChoiDefects {
    pub fn worst(&self) -> f64 {
        self.hermiticity.max(self.negativity).max(self.trace_preservation)
    }
}

/// `Tr_out J` for a Choi operator with `d_out x d_in` factors.
pub fn choi_input_marginal(j: &ComplexMatrix, d_in: usize, d_out: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d_in, d_in, |i, k| {
        (0..d_out).map(|a| j[(a * d_in + i, a * d_in + k)]).sum()
    })
}

pub fn choi_defects(j: &ComplexMatrix, d_in: usize, d_out: usize) -> Result<ChoiDefects> {
    if j.rows() != d_in * d_out || !j.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} Choi matrix for a {d_in} -> {d_out} channel",
            j.rows(),
            j.cols()
        )));
    }
    let hermiticity = j.hermiticity_error();
    let min = hermitian_eig(&j.hermitian_part())?.min();
    let marginal = choi_input_marginal(j, d_in, d_out);
    let trace_preservation = (&marginal - &ComplexMatrix::identity(d_in)).max_abs();
    Ok(ChoiDefects {
        hermiticity,
        negativity: (-min).max(0.0),
        trace_preservation,
    })
}

/// `E(X)` for the linear map with Choi operator `j` (no validity assumed).
pub fn apply_choi_linear(j: &ComplexMatrix, d_in: usize, d_out: usize, x: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(d_out, d_out);
    for a in 0..d_out {
        for b in 0..d_out {
            let mut acc = ZERO;
            for i in 0..d_in {
                let row = a * d_in + i;
                for k in 0..d_in {
                    acc += j[(row, b * d_in + k)] * x[(i, k)];
                }
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// Adjoint map `E^dagger(Y)` (Heisenberg picture).
pub fn apply_choi_adjoint(j: &ComplexMatrix, d_in: usize, d_out: usize, y: &ComplexMatrix) -> ComplexMatrix {
    // E^dagger(Y)[k, i] = sum_ab Y[b, a] J[(a, i), (b, k)]
    ComplexMatrix::from_fn(d_in, d_in, |k, i| {
        let mut acc = ZERO;
        for a in 0..d_out {
            for b in 0..d_out {
                acc += y[(b, a)] * j[(a * d_in + i, b * d_in + k)];
            }
        }
        acc
    })
}

/// Choi operator of an arbitrary linear map given as a closure.
pub fn choi_from_map(d_in: usize, d_out: usize, mut f: impl FnMut(&ComplexMatrix) -> ComplexMatrix) -> ComplexMatrix {
    let mut j = ComplexMatrix::zeros(d_out * d_in, d_out * d_in);
    for i in 0..d_in {
        for k in 0..d_in {
            let mut e = ComplexMatrix::zeros(d_in, d_in);
            e[(i, k)] = ONE;
            let img = f(&e);
            assert_eq!((img.rows(), img.cols()), (d_out, d_out), "map output has wrong shape");
            for a in 0..d_out {
                for b in 0..d_out {
                    j[(a * d_in + i, b * d_in + k)] = img[(a, b)];
                }
            }
        }
    }
    j
}

impl Channel {
    /// Validates complete positivity and trace preservation at `TOL_STRUCT`.
    pub fn new(input: SystemSpec, output: SystemSpec, choi: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(input, output, choi, TOL_STRUCT)
    }

    pub fn with_tolerance(input: SystemSpec, output: SystemSpec, choi: ComplexMatrix, tol: f64) -> Result<Self> {
        if !choi.is_finite() {
            return Err(Error::NonFinite);
        }
        let defects = choi_defects(&choi, input.dim(), output.dim())?;
        if defects.hermiticity > tol {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix not Hermitian (error {:.3e})",
                defects.hermiticity
            )));
        }
        if defects.negativity > tol {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix not PSD (min eigenvalue {:.3e})",
                -defects.negativity
            )));
        }
        if defects.trace_preservation > tol {
            return Err(Error::InvalidChannel(format!(
                "not trace preserving (error {:.3e})",
                defects.trace_preservation
            )));
        }
        Ok(Self {
            input,
            output,
            choi: choi.hermitian_part(),
        })
    }

    /// Skips validation; for Choi operators valid by construction.
    pub fn new_unchecked(input: SystemSpec, output: SystemSpec, choi: ComplexMatrix) -> Self {
        debug_assert_eq!(choi.rows(), input.dim() * output.dim());
        Self { input, output, choi }
    }

    /// Channel with Kraus operators `k`: `X -> sum k X k^dagger`.
    pub fn from_kraus(input: SystemSpec, output: SystemSpec, kraus: &[ComplexMatrix]) -> Result<Self> {
        let (d_in, d_out) = (input.dim(), output.dim());
        for k in kraus {
            if k.rows() != d_out || k.cols() != d_in {
                return Err(Error::DimensionMismatch(format!(
                    "{}x{} Kraus operator for a {d_in} -> {d_out} channel",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        // J = sum_k vec(K) vec(K)^dagger with vec(K)[(a, i)] = K[a, i].
        let n = d_in * d_out;
        let mut j = ComplexMatrix::zeros(n, n);
        for k in kraus {
            let v: Vec<C64> = (0..n).map(|r| k[(r / d_in, r % d_in)]).collect();
            j.add_scaled(&ComplexMatrix::outer(&v, &v), ONE);
        }
        Self::new(input, output, j)
    }

    pub fn identity(sys: &SystemSpec) -> Self {
        Self::unitary(sys, &ComplexMatrix::identity(sys.dim())).expect("identity is unitary")
    }

    /// `X -> U X U^dagger`.
    pub fn unitary(sys: &SystemSpec, u: &ComplexMatrix) -> Result<Self> {
        Self::from_kraus(sys.clone(), sys.clone(), std::slice::from_ref(u))
    }

    /// `X -> Tr(X) tau`.
    pub fn constant(input: &SystemSpec, output: &SystemSpec, tau: &DensityMatrix) -> Result<Self> {
        if tau.dim() != output.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}-dimensional state prepared on a {}-dimensional output",
                tau.dim(),
                output.dim()
            )));
        }
        let j = tau.as_matrix().kron(&ComplexMatrix::identity(input.dim()));
        Ok(Self::new_unchecked(input.clone(), output.clone(), j))
    }

    /// `X -> Tr(X) I/d_out`.
    pub fn completely_depolarizing(input: &SystemSpec, output: &SystemSpec) -> Self {
        Self::constant(input, output, &DensityMatrix::maximally_mixed(output.dim())).expect("dimensions agree")
    }

    /// Removes coherence between distinct energy eigenspaces.
    pub fn dephasing(sys: &SystemSpec) -> Self {
        let kraus: Vec<ComplexMatrix> = sys.sectors().into_iter().map(|(_, p)| p).collect();
        Self::from_kraus(sys.clone(), sys.clone(), &kraus).expect("sector projectors form a channel")
    }

    /// Exchanges the two factors of `sys = A x B` with `dim A = dim B`.
    pub fn swap(sys: &SystemSpec) -> Result<Self> {
        let dims = sys.factor_dims();
        if dims.len() != 2 || dims[0] != dims[1] {
            return Err(Error::InvalidSystem(
                "swap needs a composite of two equal-dimensional factors".into(),
            ));
        }
        Self::unitary(sys, &swap_operator(dims[0]))
    }

    pub fn input(&self) -> &SystemSpec {
        &self.input
    }

    pub fn output(&self) -> &SystemSpec {
        &self.output
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn into_choi(self) -> ComplexMatrix {
        self.choi
    }

    pub fn defects(&self) -> Result<ChoiDefects> {
        choi_defects(&self.choi, self.input.dim(), self.output.dim())
    }

    /// Re-checks the channel invariants at `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let d = self.defects()?;
        if d.worst() > tol {
            return Err(Error::InvalidChannel(format!("Choi defects {d:?} exceed {tol:.1e}")));
        }
        Ok(())
    }

    /// Linear action on an arbitrary operator.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.input.ensure_operator(x)?;
        Ok(apply_choi_linear(&self.choi, self.input.dim(), self.output.dim(), x))
    }

    /// Heisenberg-picture action.
    pub fn apply_adjoint(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.output.ensure_operator(y)?;
        Ok(apply_choi_adjoint(&self.choi, self.input.dim(), self.output.dim(), y))
    }

    /// `E2 . E1` where `self = E1`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if next.input.dim() != self.output.dim() {
            return Err(Error::DimensionMismatch(format!(
                "composing a {}-dimensional output with a {}-dimensional input",
                self.output.dim(),
                next.input.dim()
            )));
        }
        let (d_in, d_mid, d_out) = (self.input.dim(), self.output.dim(), next.output.dim());
        let j = choi_from_map(d_in, d_out, |x| {
            let mid = apply_choi_linear(&self.choi, d_in, d_mid, x);
            apply_choi_linear(&next.choi, d_mid, d_out, &mid)
        });
        Ok(Channel::new_unchecked(self.input.clone(), next.output.clone(), j))
    }

    /// `E1 x E2` acting on the composite input and output systems.
    pub fn tensor(&self, other: &Channel) -> Channel {
        let (i1, o1) = (self.input.dim(), self.output.dim());
        let (i2, o2) = (other.input.dim(), other.output.dim());
        let d_in = i1 * i2;
        let n = o1 * o2 * d_in;
        let mut j = ComplexMatrix::zeros(n, n);
        // Output index (a1 a2), input index (i1 i2).
        for a1 in 0..o1 {
            for b1 in 0..o1 {
                for x1 in 0..i1 {
                    for y1 in 0..i1 {
                        let v1 = self.choi[(a1 * i1 + x1, b1 * i1 + y1)];
                        if v1 == ZERO {
                            continue;
                        }
                        for a2 in 0..o2 {
                            for b2 in 0..o2 {
                                for x2 in 0..i2 {
                                    for y2 in 0..i2 {
                                        let v2 = other.choi[(a2 * i2 + x2, b2 * i2 + y2)];
                                        let r = (a1 * o2 + a2) * d_in + x1 * i2 + x2;
                                        let c = (b1 * o2 + b2) * d_in + y1 * i2 + y2;
                                        j[(r, c)] = v1 * v2;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Channel::new_unchecked(
            SystemSpec::pair(&self.input, &other.input),
            SystemSpec::pair(&self.output, &other.output),
            j,
        )
    }

    /// Reduced channel onto the output factors listed in `keep` (indices into
    /// `output.parts()`).
    pub fn output_marginal(&self, keep: &[usize]) -> Result<Channel> {
        let parts = self.output.parts();
        if parts.is_empty() {
            return Err(Error::InvalidSystem("output is not composite".into()));
        }
        let mut dims = self.output.factor_dims();
        dims.push(self.input.dim());
        let mut keep_all = keep.to_vec();
        keep_all.push(parts.len());
        let j = partial_trace(&self.choi, &dims, &keep_all)?;
        let kept: Vec<SystemSpec> = keep
            .iter()
            .map(|&k| {
                parts.get(k).cloned().ok_or(Error::BadIndex {
                    index: k,
                    n_factors: parts.len(),
                })
            })
            .collect::<Result<_>>()?;
        let out = if kept.len() == 1 {
            kept[0].clone()
        } else {
            SystemSpec::compose(&kept)
        };
        Ok(Channel::new_unchecked(self.input.clone(), out, j))
    }

    /// Replaces the system labels (same dimensions) without touching the Choi operator.
    pub fn relabel(&self, input: SystemSpec, output: SystemSpec) -> Result<Channel> {
        if input.dim() != self.input.dim() || output.dim() != self.output.dim() {
            return Err(Error::DimensionMismatch("relabel must preserve dimensions".into()));
        }
        Ok(Channel::new_unchecked(input, output, self.choi.clone()))
    }
}

/// `sum_ij |ij><ji|` on `C^d x C^d`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(i * d + j, j * d + i)] = ONE;
        }
    }
    s
}

/// Applies `ch` to `rho`.
pub fn apply_channel(ch: &Channel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != ch.input().dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional state into a channel on {} dimensions",
            rho.dim(),
            ch.input().dim()
        )));
    }
    let out = apply_choi_linear(ch.choi(), ch.input().dim(), ch.output().dim(), rho.as_matrix());
    Ok(DensityMatrix::new_unchecked(out.hermitian_part()))
}

/// The map `sigma -> Tr_{Q'}[ lambda(rho_q x sigma) ]` on `S -> S'`, for
/// `lambda` acting on `Q x S -> Q' x S'`.
pub fn induce_channel(lambda: &Channel, rho_q: &DensityMatrix) -> Result<Channel> {
    let (inp, out) = (lambda.input(), lambda.output());
    if inp.parts().len() != 2 || out.parts().len() != 2 {
        return Err(Error::InvalidSystem(
            "induce_channel needs bipartite input and output systems".into(),
        ));
    }
    let (q, s) = (&inp.parts()[0], &inp.parts()[1]);
    let (qp, sp) = (&out.parts()[0], &out.parts()[1]);
    if rho_q.dim() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional state for a {}-dimensional Q factor",
            rho_q.dim(),
            q.dim()
        )));
    }
    let dims_out = [qp.dim(), sp.dim()];
    let j = choi_from_map(s.dim(), sp.dim(), |x| {
        let joint_in = rho_q.as_matrix().kron(x);
        let joint_out = apply_choi_linear(lambda.choi(), inp.dim(), out.dim(), &joint_in);
        partial_trace(&joint_out, &dims_out, &[1]).expect("dimensions agree")
    });
    Channel::new(s.clone(), sp.clone(), j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::quantum::PureState;
    use crate::linalg::random::{ginibre, random_density_matrix, random_unitary, rng_from_seed};

    fn random_channel(d_in: usize, d_out: usize, seed: u64) -> Channel {
        let mut rng = rng_from_seed(seed);
        let g = ginibre(d_in * d_out, d_in * d_out, &mut rng);
        let j0 = g.matmul(&g.adjoint());
        let x = choi_input_marginal(&j0, d_in, d_out);
        let xi = crate::linalg::eig::psd_pinv_sqrt(&x, 1e-14).unwrap();
        let left = ComplexMatrix::identity(d_out).kron(&xi);
        let j = left.matmul(&j0).matmul(&left);
        Channel::new(SystemSpec::trivial(d_in), SystemSpec::trivial(d_out), j).unwrap()
    }

    #[test]
    fn identity_channel_fixes_states() {
        let mut rng = rng_from_seed(1);
        let rho = random_density_matrix(3, 3, &mut rng);
        let sys = SystemSpec::ladder(3);
        let out = apply_channel(&Channel::identity(&sys), &rho).unwrap();
        assert!((out.as_matrix() - rho.as_matrix()).max_abs() < 1e-14);
        assert!((Channel::identity(&sys).choi().trace().re - 3.0).abs() < 1e-14);
    }

    #[test]
    fn depolarizing_and_dephasing() {
        let sys = SystemSpec::ladder(2);
        let plus = PureState::plus().to_density();
        let out = apply_channel(&Channel::completely_depolarizing(&sys, &sys), &plus).unwrap();
        assert!((out.as_matrix() - DensityMatrix::maximally_mixed(2).as_matrix()).max_abs() < 1e-15);
        let out = apply_channel(&Channel::dephasing(&sys), &plus).unwrap();
        assert!((out.as_matrix() - DensityMatrix::maximally_mixed(2).as_matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_choi() {
        let sys = SystemSpec::trivial(2);
        let bad = ComplexMatrix::identity(4).scale_real(0.3);
        assert!(matches!(
            Channel::new(sys.clone(), sys.clone(), bad),
            Err(Error::InvalidChannel(_))
        ));
        let neg = ComplexMatrix::diag_real(&[1.5, 1.0, -0.5, 0.0]);
        assert!(matches!(
            Channel::new(sys.clone(), sys, neg),
            Err(Error::InvalidChannel(_))
        ));
    }

    #[test]
    fn random_channels_preserve_states() {
        for seed in 0..50 {
            let ch = random_channel(2 + (seed % 2) as usize, 3 - (seed % 2) as usize, seed);
            let mut rng = rng_from_seed(1000 + seed);
            let rho = random_density_matrix(ch.input().dim(), 2, &mut rng);
            let out = apply_channel(&ch, &rho).unwrap();
            assert!(DensityMatrix::new(out.into_matrix()).is_ok());
        }
    }

    #[test]
    fn adjoint_is_dual() {
        let ch = random_channel(2, 3, 7);
        let mut rng = rng_from_seed(8);
        let x = ginibre(2, 2, &mut rng);
        let y = ginibre(3, 3, &mut rng);
        let lhs = y.hs_inner(&ch.apply_operator(&x).unwrap());
        let rhs = ch.apply_adjoint(&y).unwrap().hs_inner(&x);
        assert!((lhs - rhs).norm() < 1e-12);
        let unit = ch.apply_adjoint(&ComplexMatrix::identity(3)).unwrap();
        assert!((&unit - &ComplexMatrix::identity(2)).max_abs() < 1e-12);
    }

    #[test]
    fn kraus_and_map_agree() {
        let mut rng = rng_from_seed(2);
        let u = random_unitary(3, &mut rng);
        let sys = SystemSpec::trivial(3);
        let ch = Channel::unitary(&sys, &u).unwrap();
        let j = choi_from_map(3, 3, |x| x.conjugate_by(&u));
        assert!((&j - ch.choi()).max_abs() < 1e-12);
    }

    #[test]
    fn composition_and_tensor() {
        let a = random_channel(2, 2, 3);
        let b = random_channel(2, 3, 4);
        let ab = a.then(&b).unwrap();
        let mut rng = rng_from_seed(5);
        let rho = random_density_matrix(2, 2, &mut rng);
        let direct = apply_channel(&b, &apply_channel(&a, &rho).unwrap()).unwrap();
        let via = apply_channel(&ab, &rho).unwrap();
        assert!((direct.as_matrix() - via.as_matrix()).max_abs() < 1e-12);

        let t = a.tensor(&b);
        assert!(t.validate(1e-9).is_ok());
        let sigma = random_density_matrix(2, 2, &mut rng);
        let joint = apply_channel(&t, &rho.tensor(&sigma)).unwrap();
        let expected = apply_channel(&a, &rho)
            .unwrap()
            .tensor(&apply_channel(&b, &sigma).unwrap());
        assert!((joint.as_matrix() - expected.as_matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn output_marginal_of_product() {
        let q = SystemSpec::ladder(2);
        let tau = random_density_matrix(3, 3, &mut rng_from_seed(6));
        let prep = Channel::constant(&SystemSpec::trivial(1), &SystemSpec::trivial(3), &tau).unwrap();
        let broadcast = Channel::identity(&q).tensor(&prep);
        let broadcast = broadcast.relabel(q.clone(), broadcast.output().clone()).unwrap();
        let m0 = broadcast.output_marginal(&[0]).unwrap();
        assert!((m0.choi() - Channel::identity(&q).choi()).max_abs() < 1e-14);
        let m1 = broadcast.output_marginal(&[1]).unwrap();
        let c = Channel::constant(&q, &SystemSpec::trivial(3), &tau).unwrap();
        assert!((m1.choi() - c.choi()).max_abs() < 1e-14);
    }

    #[test]
    fn induced_channel_examples() {
        let q = SystemSpec::ladder(2);
        let qs = SystemSpec::pair(&q, &q);
        let mut rng = rng_from_seed(9);
        let rho_q = random_density_matrix(2, 2, &mut rng);

        let swap = Channel::swap(&qs).unwrap();
        let induced = induce_channel(&swap, &rho_q).unwrap();
        let constant = Channel::constant(&q, &q, &rho_q).unwrap();
        assert!((induced.choi() - constant.choi()).max_abs() < 1e-12);

        let id = Channel::identity(&qs);
        let induced = induce_channel(&id, &rho_q).unwrap();
        assert!((induced.choi() - Channel::identity(&q).choi()).max_abs() < 1e-12);

        let deph = Channel::dephasing(&q).tensor(&Channel::identity(&q));
        let induced = induce_channel(&deph, &rho_q).unwrap();
        assert!((induced.choi() - Channel::identity(&q).choi()).max_abs() < 1e-12);

        assert!(induce_channel(&id, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn channel_json_round_trip() {
        let ch = Channel::dephasing(&SystemSpec::ladder(2));
        let text = serde_json::to_string(&ch).unwrap();
        let back: Channel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, ch);
    }
}
