//! Log-barrier interior-point solver for the recovery fidelity as a
//! semidefinite program: maximize `Re Tr Z` over covariant channels `R` and
//! `Z` with `[[rho, Z], [Z^dagger, R(sigma)]] >= 0`.

use crate::error::{Error, Result};
use crate::linalg::channel::{apply_choi_linear, choi_input_marginal};
use crate::linalg::eig::{hermitian_eig, support_basis};
use crate::linalg::matrix::{ComplexMatrix, C64};
use crate::optimize::projection::CovariantChoiSet;
use crate::tol::TOL_RANK;

const BARRIER_GROWTH: f64 = 10.0;
/// Target bound `m / t` on the duality gap.
const GAP_TOL: f64 = 1e-11;
const NEWTON_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 200;
const MAX_HALVINGS: usize = 80;
const BASIS_DROP: f64 = 1e-10;

/// `a0 + sum_k v_k a[k] > 0`; `active` lists the `k` with nonzero `a[k]`.
struct Lmi {
    a0: ComplexMatrix,
    a: Vec<(usize, ComplexMatrix)>,
}

impl Lmi {
    fn at(&self, v: &[f64]) -> ComplexMatrix {
        let mut s = self.a0.clone();
        for (k, ak) in &self.a {
            if v[*k] != 0.0 {
                s.add_scaled(ak, v[*k].into());
            }
        }
        s.hermitian_part()
    }
}

fn real_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.hs_inner(b).re
}

/// Orthonormal basis (real inner product) of the Hermitian, block-diagonal,
/// `Tr_out`-free directions in the `K` frame.
fn tangent_basis(set: &CovariantChoiSet) -> Vec<ComplexMatrix> {
    let (d_in, d_out) = set.dims();
    let n = d_in * d_out;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out: Vec<ComplexMatrix> = Vec::new();
    for idx in set.blocks() {
        for (p, &i) in idx.iter().enumerate() {
            for &k in &idx[p..] {
                let mut units = Vec::with_capacity(2);
                if i == k {
                    let mut e = ComplexMatrix::zeros(n, n);
                    e[(i, i)] = C64::new(1.0, 0.0);
                    units.push(e);
                } else {
                    let mut re = ComplexMatrix::zeros(n, n);
                    re[(i, k)] = C64::new(s, 0.0);
                    re[(k, i)] = C64::new(s, 0.0);
                    let mut im = ComplexMatrix::zeros(n, n);
                    im[(i, k)] = C64::new(0.0, s);
                    im[(k, i)] = C64::new(0.0, -s);
                    units.push(re);
                    units.push(im);
                }
                for mut h in units {
                    let marginal = choi_input_marginal(&h, d_in, d_out);
                    h.add_scaled(&set.identity_out_kron(&marginal), (-1.0 / d_out as f64).into());
                    for _ in 0..2 {
                        for b in &out {
                            let c = real_inner(b, &h);
                            h.add_scaled(b, (-c).into());
                        }
                    }
                    let r = h.frobenius_norm();
                    if r > BASIS_DROP {
                        out.push(h.scale_real(1.0 / r));
                    }
                }
            }
        }
    }
    out
}

fn sub_block(m: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}

/// Upper-left `r x r`, upper-right `r x r`, lower-right `r x r` assembled into `2r x 2r`.
fn assemble(tl: &ComplexMatrix, tr: &ComplexMatrix, br: &ComplexMatrix) -> ComplexMatrix {
    let r = tl.rows();
    ComplexMatrix::from_fn(2 * r, 2 * r, |i, j| match (i < r, j < r) {
        (true, true) => tl[(i, j)],
        (true, false) => tr[(i, j - r)],
        (false, true) => tr[(j, i - r)].conj(),
        (false, false) => br[(i - r, j - r)],
    })
}

/// Solves `g x = b` for symmetric positive definite `g` (row-major, `n x n`).
fn cholesky_solve(g: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = g[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    Some(y)
}

struct Problem {
    lmis: Vec<Lmi>,
    c: Vec<f64>,
    n_vars: usize,
    barrier_dim: usize,
}

impl Problem {
    /// Barrier value `t c.v + sum log det S_L(v)`, or `None` outside the interior.
    fn value(&self, v: &[f64], t: f64) -> Result<Option<f64>> {
        let mut f = t * self.c.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        for lmi in &self.lmis {
            let eig = hermitian_eig(&lmi.at(v))?;
            if eig.min() <= 0.0 {
                return Ok(None);
            }
            f += eig.values.iter().map(|x| x.ln()).sum::<f64>();
        }
        Ok(Some(f))
    }

    /// Gradient and negated Hessian of the barrier objective.
    fn derivatives(&self, v: &[f64], t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n_vars;
        let mut g: Vec<f64> = self.c.iter().map(|c| t * c).collect();
        let mut h = vec![0.0; n * n];
        for lmi in &self.lmis {
            let w = hermitian_eig(&lmi.at(v))?.apply(|x| 1.0 / x.sqrt());
            let scaled: Vec<(usize, ComplexMatrix)> =
                lmi.a.iter().map(|(k, ak)| (*k, w.matmul(ak).matmul(&w))).collect();
            for (p, (k, ak)) in scaled.iter().enumerate() {
                g[*k] += ak.trace().re;
                for (l, al) in &scaled[..=p] {
                    let x = real_inner(ak, al);
                    h[k * n + l] += x;
                    if k != l {
                        h[l * n + k] += x;
                    }
                }
            }
        }
        Ok((g, h))
    }
}

/// Maximizer of the recovery fidelity `Fid(rho, R(sigma))` over covariant
/// channels in `set`, as a Choi operator in the original frame.
pub(crate) fn recovery_fidelity_sdp(
    set: &CovariantChoiSet,
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let (d_in, d_out) = set.dims();
    let (supp, lambdas) = support_basis(rho, TOL_RANK)?;
    let r = lambdas.len();
    if r == 0 {
        return Err(Error::SingularPrior("target state has empty support".into()));
    }
    let tangent = tangent_basis(set);
    let n_x = tangent.len();
    let n_vars = n_x + 2 * r * r;

    let x0 = ComplexMatrix::identity(d_in * d_out).scale_real(1.0 / d_out as f64);
    let mut lmis: Vec<Lmi> = set
        .blocks()
        .iter()
        .map(|idx| Lmi {
            a0: sub_block(&x0, idx),
            a: tangent
                .iter()
                .enumerate()
                .map(|(k, t)| (k, sub_block(t, idx)))
                .filter(|(_, b)| b.max_abs() > 0.0)
                .collect(),
        })
        .collect();

    let image = |frame: &ComplexMatrix| -> ComplexMatrix {
        let j = set.leave_frame(frame.clone());
        apply_choi_linear(&j, d_in, d_out, sigma).compress(&supp)
    };
    let zero = ComplexMatrix::zeros(r, r);
    let rho_s = ComplexMatrix::diag_real(&lambdas);
    let mut fid_terms: Vec<(usize, ComplexMatrix)> = tangent
        .iter()
        .enumerate()
        .map(|(k, t)| (k, assemble(&zero, &zero, &image(t).hermitian_part())))
        .collect();
    let mut c = vec![0.0; n_vars];
    for i in 0..r {
        for j in 0..r {
            let k = n_x + 2 * (i * r + j);
            let mut e = ComplexMatrix::zeros(r, r);
            e[(i, j)] = C64::new(1.0, 0.0);
            fid_terms.push((k, assemble(&zero, &e, &zero)));
            e[(i, j)] = C64::new(0.0, 1.0);
            fid_terms.push((k + 1, assemble(&zero, &e, &zero)));
            if i == j {
                c[k] = 1.0;
            }
        }
    }
    lmis.push(Lmi {
        a0: assemble(&rho_s, &zero, &image(&x0).hermitian_part()),
        a: fid_terms,
    });
    let barrier_dim = lmis.iter().map(|l| l.a0.rows()).sum();
    let problem = Problem {
        lmis,
        c,
        n_vars,
        barrier_dim,
    };

    let mut v = vec![0.0; n_vars];
    let mut t = 1.0;
    loop {
        let mut f = problem.value(&v, t)?.ok_or(Error::NonFinite)?;
        for _ in 0..MAX_NEWTON {
            let (g, h) = problem.derivatives(&v, t)?;
            let step = match cholesky_solve(&h, &g, n_vars) {
                Some(s) => s,
                None => break,
            };
            let decrement: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
            if !(decrement.is_finite()) || decrement / 2.0 <= NEWTON_TOL {
                break;
            }
            let mut alpha = 1.0;
            let mut moved = false;
            for _ in 0..MAX_HALVINGS {
                let cand: Vec<f64> = v.iter().zip(&step).map(|(a, b)| a + alpha * b).collect();
                if let Some(fc) = problem.value(&cand, t)? {
                    if fc >= f + 0.25 * alpha * decrement {
                        v = cand;
                        f = fc;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if problem.barrier_dim as f64 / t <= GAP_TOL {
            break;
        }
        t *= BARRIER_GROWTH;
    }

    let mut frame = x0;
    for (k, b) in tangent.iter().enumerate() {
        frame.add_scaled(b, v[k].into());
    }
    let j = set.leave_frame(frame.hermitian_part());
    if !j.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(j)
}
