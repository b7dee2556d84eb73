//! Counterexamples to sub- and super-additivity of asymmetry measures.
//!
//! * Entangled: a Bell state is asymmetric for the total generator while
//!   both marginals are maximally mixed.
//! * Classical register: `(1/N) sum_j |j><j|_A x U(t_j) rho U(t_j)^dagger_B`
//!   with `H_A = 0` and `N` translations `t_j = 2 pi j / N`, `N` larger than
//!   the spectral diameter of `H_B`, so the `B` marginal is exactly dephased
//!   while the joint state keeps the coherence of each branch.
//! * Cloner: super-additivity would force `n f(rho_n) <= f(rho)` for the
//!   universal cloner's marginals `rho_n`; skew information breaks this for
//!   large enough `n`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiments::cloner::cloner_marginal_closed_form;
use crate::experiments::Assertion;
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::quantum::{partial_trace, DensityMatrix, PureState};
use crate::linalg::system::SystemSpec;
use crate::symmetry::{is_symmetric_state, time_translate, AsymmetryMeasureId};

/// Slack beyond which an inequality counts as violated.
pub const VIOLATION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Construction {
    EntangledSubadditivity,
    ClassicalRegisterSubadditivity,
    ClonerSuperadditivity,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonadditivityRecord {
    pub construction: Construction,
    pub measure: AsymmetryMeasureId,
    pub f_joint: f64,
    pub f_marg_a: f64,
    /// Second marginal, or `n f(rho_n)` for the cloner sweep.
    pub f_marg_b_or_n_scaled: f64,
    /// Number of copies for cloner rows.
    pub n: Option<usize>,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonadditivityConfig {
    /// Largest copy number in the cloner sweep.
    pub max_n: usize,
    /// Translation time for the `f_t` rows.
    pub t: f64,
}

impl Default for NonadditivityConfig {
    fn default() -> Self {
        Self {
            max_n: 64,
            t: std::f64::consts::FRAC_PI_2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonadditivityReport {
    pub records: Vec<NonadditivityRecord>,
    /// Smallest `n` whose cloner row violates super-additivity.
    pub smallest_cloner_violation: Option<usize>,
    pub assertions: Vec<Assertion>,
}

fn sub_additive_record(
    construction: Construction,
    measure: AsymmetryMeasureId,
    joint: (&DensityMatrix, &SystemSpec),
    a: (&DensityMatrix, &SystemSpec),
    b: (&DensityMatrix, &SystemSpec),
) -> Result<NonadditivityRecord> {
    let f_joint = measure.evaluate(joint.0, joint.1)?;
    let fa = measure.evaluate(a.0, a.1)?;
    let fb = measure.evaluate(b.0, b.1)?;
    Ok(NonadditivityRecord {
        construction,
        measure,
        f_joint,
        f_marg_a: fa,
        f_marg_b_or_n_scaled: fb,
        n: None,
        violated: f_joint > fa + fb + VIOLATION_TOL,
    })
}

fn marginals(rho: &DensityMatrix, da: usize, db: usize) -> Result<(DensityMatrix, DensityMatrix)> {
    let a = partial_trace(rho.as_matrix(), &[da, db], &[0])?;
    let b = partial_trace(rho.as_matrix(), &[da, db], &[1])?;
    Ok((DensityMatrix::new_unchecked(a), DensityMatrix::new_unchecked(b)))
}

/// `(1/N) sum_j |j><j| x U(2 pi j / N) rho U(2 pi j / N)^dagger` with `N =`
/// spectral diameter of `sys_b` plus one.
pub fn classical_register_state(rho_b: &DensityMatrix, sys_b: &SystemSpec) -> Result<DensityMatrix> {
    let n = sys_b.spectral_diameter() as usize + 1;
    let db = sys_b.dim();
    let mut joint = ComplexMatrix::zeros(n * db, n * db);
    for j in 0..n {
        let branch = time_translate(rho_b, sys_b, 2.0 * std::f64::consts::PI * j as f64 / n as f64)?;
        let reg = DensityMatrix::basis(n, j);
        joint = &joint + &reg.as_matrix().kron(branch.as_matrix());
    }
    Ok(DensityMatrix::new_unchecked(
        joint.scale_real(1.0 / n as f64).hermitian_part(),
    ))
}

pub fn run_nonadditivity(cfg: &NonadditivityConfig) -> Result<NonadditivityReport> {
    let skew = AsymmetryMeasureId::SkewInformation;
    let shift = AsymmetryMeasureId::fidelity_shift(cfg.t)?;
    let qubit = SystemSpec::ladder(2);
    let mut records = Vec::new();
    let mut assertions = Vec::new();

    // Entangled construction.
    let bell = PureState::normalized(vec![1.0.into(), 0.0.into(), 0.0.into(), 1.0.into()])?.to_density();
    let pair = SystemSpec::pair(&qubit, &qubit);
    let (ba, bb) = marginals(&bell, 2, 2)?;
    let mut excess = f64::INFINITY;
    for m in [skew, shift] {
        let rec = sub_additive_record(
            Construction::EntangledSubadditivity,
            m,
            (&bell, &pair),
            (&ba, &qubit),
            (&bb, &qubit),
        )?;
        excess = excess.min(rec.f_joint - rec.f_marg_a - rec.f_marg_b_or_n_scaled);
        records.push(rec);
    }
    assertions.push(Assertion::above(
        "entangled sub-additivity violated",
        excess,
        VIOLATION_TOL,
    ));

    // Classical register construction.
    let plus = PureState::plus().to_density();
    let joint = classical_register_state(&plus, &qubit)?;
    let n_reg = qubit.spectral_diameter() as usize + 1;
    let reg_sys = SystemSpec::trivial(n_reg);
    let joint_sys = SystemSpec::pair(&reg_sys, &qubit);
    let (ra, rb) = marginals(&joint, n_reg, 2)?;
    let wa = is_symmetric_state(&ra, &reg_sys, 0.0)?;
    let wb = is_symmetric_state(&rb, &qubit, 1e-10)?;
    let mut excess = f64::INFINITY;
    for m in [skew, shift] {
        let rec = sub_additive_record(
            Construction::ClassicalRegisterSubadditivity,
            m,
            (&joint, &joint_sys),
            (&ra, &reg_sys),
            (&rb, &qubit),
        )?;
        excess = excess.min(rec.f_joint - rec.f_marg_a - rec.f_marg_b_or_n_scaled);
        records.push(rec);
    }
    // Both marginals must be symmetric for the construction to be the intended one.
    assertions.push(Assertion::new(
        "classical-register sub-additivity violated",
        wa.holds && wb.holds && excess > VIOLATION_TOL,
        excess,
    ));

    // Cloner sweep with the closed-form marginal.
    let f_single = skew.evaluate(&plus, &qubit)?;
    let mut smallest = None;
    for n in 1..=cfg.max_n {
        let marg = cloner_marginal_closed_form(&plus, n);
        let scaled = n as f64 * skew.evaluate(&marg, &qubit)?;
        let violated = scaled > f_single + VIOLATION_TOL;
        if violated && smallest.is_none() {
            smallest = Some(n);
        }
        records.push(NonadditivityRecord {
            construction: Construction::ClonerSuperadditivity,
            measure: skew,
            f_joint: f_single,
            f_marg_a: skew.evaluate(&marg, &qubit)?,
            f_marg_b_or_n_scaled: scaled,
            n: Some(n),
            violated,
        });
    }
    assertions.push(Assertion::new(
        format!("cloner super-additivity violated for some n <= {}", cfg.max_n),
        smallest.is_some(),
        smallest.map(|n| n as f64).unwrap_or(0.0),
    ));
    Ok(NonadditivityReport {
        records,
        smallest_cloner_violation: smallest,
        assertions,
    })
}
