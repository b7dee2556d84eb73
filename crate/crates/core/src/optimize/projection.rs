use crate::error::{Error, Result};
use crate::linalg::channel::choi_input_marginal;
use crate::linalg::eig::hermitian_eig;
use crate::linalg::matrix::{ComplexMatrix, ZERO};
use crate::linalg::system::SystemSpec;
use crate::symmetry::CovarianceSector;
use crate::tol::TOL_STRUCT;

/// Default iteration cap of [`project_covariant_tp_psd`].
pub const PROJECTION_MAX_ITER: usize = 5000;

/// Feasible set of covariant channels `input -> output` in Choi form.
///
/// Projections run in the eigenbasis of `K`, where the feasible set is
/// block diagonal over the `K` eigenspaces.
#[derive(Clone, Debug)]
pub(crate) struct CovariantChoiSet {
    sectors: CovarianceSector,
    /// `None` when the `K` eigenbasis is the computational basis.
    basis: Option<ComplexMatrix>,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
    d_in: usize,
    d_out: usize,
}

impl CovariantChoiSet {
    pub(crate) fn new(input: &SystemSpec, output: &SystemSpec) -> Self {
        let sectors = CovarianceSector::new(input, output);
        let n = input.dim() * output.dim();
        let basis = sectors.basis();
        let basis = ((basis - &ComplexMatrix::identity(n)).max_abs() > 0.0).then(|| basis.clone());
        let blocks: Vec<Vec<usize>> = sectors.index_sets().map(<[usize]>::to_vec).collect();
        let mut block_of = vec![0; n];
        for (b, idx) in blocks.iter().enumerate() {
            for &k in idx {
                block_of[k] = b;
            }
        }
        Self {
            sectors,
            basis,
            blocks,
            block_of,
            d_in: input.dim(),
            d_out: output.dim(),
        }
    }

    pub(crate) fn identity_out_kron(&self, m: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::identity(self.d_out).kron(m)
    }

    pub(crate) fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub(crate) fn dims(&self) -> (usize, usize) {
        (self.d_in, self.d_out)
    }

    /// Orthogonal projection onto the linear space parallel to the affine set.
    pub(crate) fn tangent(&self, g: &ComplexMatrix) -> ComplexMatrix {
        let deph = self.sectors.dephase(g);
        let marginal = choi_input_marginal(&deph, self.d_in, self.d_out);
        let mut out = deph;
        out.add_scaled(&self.identity_out_kron(&marginal), (-1.0 / self.d_out as f64).into());
        out.hermitian_part()
    }

    pub(crate) fn enter_frame(&self, j: &ComplexMatrix) -> ComplexMatrix {
        match &self.basis {
            Some(b) => j.compress(b),
            None => j.clone(),
        }
    }

    pub(crate) fn leave_frame(&self, x: ComplexMatrix) -> ComplexMatrix {
        match &self.basis {
            Some(b) => x.conjugate_by(b).hermitian_part(),
            None => x,
        }
    }

    /// Affine projection in the `K` frame: zero the off-sector entries, then
    /// restore `Tr_out X = I`.
    fn affine_frame(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = x.rows();
        let mut out = ComplexMatrix::from_fn(n, n, |r, c| {
            if self.block_of[r] == self.block_of[c] {
                x[(r, c)]
            } else {
                ZERO
            }
        });
        let defect = &ComplexMatrix::identity(self.d_in) - &choi_input_marginal(&out, self.d_in, self.d_out);
        out.add_scaled(&self.identity_out_kron(&defect), (1.0 / self.d_out as f64).into());
        out.hermitian_part()
    }

    fn block(&self, m: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
        ComplexMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
    }

    /// PSD clipping of a block-diagonal matrix in the `K` frame.
    fn psd_clip_frame(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = m.rows();
        let mut out = ComplexMatrix::zeros(n, n);
        for idx in &self.blocks {
            let clipped = hermitian_eig(&self.block(m, idx))?
                .apply(|x| x.max(0.0))
                .hermitian_part();
            for (r, &i) in idx.iter().enumerate() {
                for (c, &k) in idx.iter().enumerate() {
                    out[(i, k)] = clipped[(r, c)];
                }
            }
        }
        Ok(out)
    }

    fn min_eig_frame(&self, m: &ComplexMatrix) -> Result<f64> {
        let mut e = f64::INFINITY;
        for idx in &self.blocks {
            e = e.min(hermitian_eig(&self.block(m, idx))?.min());
        }
        Ok(e)
    }

    /// Mixes an affine-feasible `y` with `I / d_out` just enough to make it PSD.
    fn mix_frame(&self, y: ComplexMatrix) -> Result<ComplexMatrix> {
        let e = self.min_eig_frame(&y)?;
        if e >= 0.0 {
            return Ok(y);
        }
        let floor = 1.0 / self.d_out as f64;
        let w = -e / (floor - e);
        let mixed = &y.scale_real(1.0 - w) + &ComplexMatrix::identity(y.rows()).scale_real(w * floor);
        Ok(mixed.hermitian_part())
    }

    /// Feasible point near the Dykstra pair: the PSD iterate `x` renormalized
    /// by `(I x Y^{-1/2}) x (I x Y^{-1/2})` with `Y = Tr_out x`, which keeps
    /// positivity and sector structure exact. Falls back to mixing the affine
    /// iterate `y` when `Y` is far from the identity.
    fn repair_frame(&self, x: &ComplexMatrix, y: ComplexMatrix) -> Result<ComplexMatrix> {
        let marginal = choi_input_marginal(x, self.d_in, self.d_out).hermitian_part();
        let eig = hermitian_eig(&marginal)?;
        if eig.min() < 0.5 {
            return self.mix_frame(y);
        }
        let a = self.identity_out_kron(&eig.apply(|l| 1.0 / l.sqrt()));
        Ok(a.matmul(x).matmul(&a).hermitian_part())
    }

    /// Dykstra iteration; returns the repaired point and whether the
    /// iterates met within `tol` before `max_iter`.
    pub(crate) fn project(&self, j: &ComplexMatrix, max_iter: usize, tol: f64) -> Result<(ComplexMatrix, bool, f64)> {
        let n = j.rows();
        let mut x = self.enter_frame(&j.hermitian_part());
        let mut y = self.affine_frame(&x);
        if self.min_eig_frame(&y)? >= 0.0 {
            return Ok((self.leave_frame(y), true, 0.0));
        }
        let mut p = ComplexMatrix::zeros(n, n);
        let mut q = ComplexMatrix::zeros(n, n);
        let mut gap = f64::INFINITY;
        for _ in 0..max_iter {
            y = self.affine_frame(&(&x + &p));
            p = &(&x + &p) - &y;
            let x_new = self.psd_clip_frame(&(&y + &q))?;
            q = &(&y + &q) - &x_new;
            let change = (&x_new - &x).max_abs();
            gap = (&x_new - &y).max_abs();
            x = x_new;
            if gap <= tol && change <= tol {
                return Ok((self.leave_frame(self.repair_frame(&x, y)?), true, gap));
            }
        }
        Ok((self.leave_frame(self.repair_frame(&x, y)?), false, gap))
    }
}

/// Nearest covariant, trace-preserving, positive Choi operator to `j`
/// (Dykstra alternating projections between the PSD cone and the affine
/// covariant trace-preserving set). The last affine iterate is mixed with
/// the completely depolarizing Choi just enough to clear rounding negativity.
pub fn project_covariant_tp_psd(
    j: &ComplexMatrix,
    input: &SystemSpec,
    output: &SystemSpec,
    max_iter: usize,
    tol: f64,
) -> Result<ComplexMatrix> {
    let n = input.dim() * output.dim();
    if !j.is_square() || j.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for a {n}-dimensional Choi space",
            j.rows(),
            j.cols()
        )));
    }
    if !j.is_finite() {
        return Err(Error::NonFinite);
    }
    let herm = j.hermiticity_error();
    if herm > TOL_STRUCT * j.max_abs().max(1.0) {
        return Err(Error::NonHermitian(herm));
    }
    let set = CovariantChoiSet::new(input, output);
    let (out, converged, gap) = set.project(j, max_iter, tol)?;
    if !converged {
        return Err(Error::NoConvergence {
            what: "covariant channel projection",
            iterations: max_iter,
            residual: gap,
        });
    }
    Ok(out)
}
