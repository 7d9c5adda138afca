//! Master-equation dynamics
//!
//! ```text
//! dρ/dt = −i[H_I, ρ] + γ D[σ₋]ρ + κ D[a]ρ + γφ (σz ρ σz − ρ)
//! D[c]ρ = 2cρc† − c†cρ − ρc†c
//! ```
//!
//! Rates keep the explicit factor 2, so an undriven cavity photon number
//! decays as `e^{−2κt}`. Superoperators act on column-stacked `vec(ρ)` with
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use ndarray::{Array1, Array2, Zip};
use ndarray_linalg::{FactorizeInto, ReciprocalConditionNum, Solve};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock_algebra::{
    annihilation, atomic_operators, fock_probabilities, Atom, DensityMatrix, HilbertDims, Operator,
};
use crate::model::{drive_operator, hamiltonian_static, ModelParams, PulseEnvelope};
use crate::sparse::CsrMatrix;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Column-stacking `vec(ρ)`: entry `(i, j)` lands at `i + D j`.
pub fn vectorize(rho: &Array2<Complex64>) -> Array1<Complex64> {
    let n = rho.nrows();
    Array1::from_shape_fn(n * n, |k| rho[[k % n, k / n]])
}

pub fn unvectorize(dims: HilbertDims, v: &Array1<Complex64>) -> DensityMatrix {
    let n = dims.total();
    let data = Array2::from_shape_fn((n, n), |(i, j)| v[i + n * j]);
    DensityMatrix::from_matrix(dims, data).expect("vector length matches dims")
}

/// `A ρ` as a superoperator.
fn left(a: &CsrMatrix) -> CsrMatrix {
    CsrMatrix::identity(a.nrows()).kron(a)
}

/// `ρ B` as a superoperator.
fn right(b: &CsrMatrix) -> CsrMatrix {
    b.transpose().kron(&CsrMatrix::identity(b.nrows()))
}

fn commutator_part(h: &Operator) -> CsrMatrix {
    left(h.data()).sub(&right(h.data())).scale(-I)
}

fn dissipator(c: &Operator, rate: f64) -> CsrMatrix {
    let n = c.dims().total() * c.dims().total();
    if rate == 0.0 {
        return CsrMatrix::zeros(n, n);
    }
    let c = c.data();
    let cdc = c.adjoint().matmul(c);
    let jump = c.conj().kron(c).scale(Complex64::new(2.0, 0.0));
    jump.sub(&left(&cdc))
        .sub(&right(&cdc))
        .scale(Complex64::new(rate, 0.0))
}

/// Sparse superoperator on `vec(ρ)`.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    dims: HilbertDims,
    matrix: CsrMatrix,
}

impl Liouvillian {
    pub fn dims(&self) -> HilbertDims {
        self.dims
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let v = vectorize(rho.data());
        let mut out = Array1::zeros(v.len());
        self.matrix
            .mul_vec_acc(Complex64::new(1.0, 0.0), v.view(), out.view_mut());
        unvectorize(self.dims, &out)
    }
}

/// The Liouvillian split as `fixed + ε(t) · drive`.
#[derive(Clone, Debug)]
pub struct LiouvillianParts {
    dims: HilbertDims,
    fixed: CsrMatrix,
    drive: CsrMatrix,
    /// `‖H_static‖∞` and `‖drive‖∞`, used for step selection.
    h_norms: (f64, f64),
    rate_scale: f64,
}

impl LiouvillianParts {
    pub fn new(params: &ModelParams, dims: HilbertDims) -> Result<Self> {
        let h0 = hamiltonian_static(params, dims)?;
        let hd = drive_operator(params, dims)?;
        let a = annihilation(dims);
        let (sigma_minus, _, sigma_z) = atomic_operators(dims);
        let mut fixed = commutator_part(&h0)
            .add(&dissipator(&a, params.kappa))
            .add(&dissipator(&sigma_minus, params.gamma));
        if params.gamma_phi != 0.0 {
            let n = dims.total();
            let dephasing = sigma_z
                .data()
                .transpose()
                .kron(sigma_z.data())
                .sub(&CsrMatrix::identity(n * n))
                .scale(Complex64::new(params.gamma_phi, 0.0));
            fixed = fixed.add(&dephasing);
        }
        let d = dims.fock_cutoff() as f64;
        Ok(LiouvillianParts {
            dims,
            fixed,
            drive: commutator_part(&hd),
            h_norms: (h0.data().norm_inf(), hd.data().norm_inf()),
            rate_scale: 2.0 * params.kappa * (d - 1.0)
                + 2.0 * params.gamma
                + 2.0 * params.gamma_phi,
        })
    }

    pub fn at(&self, eps: f64) -> Liouvillian {
        Liouvillian {
            dims: self.dims,
            matrix: self.fixed.add(&self.drive.scale(Complex64::new(eps, 0.0))),
        }
    }

    /// `max(‖H‖, rates)` for a drive no stronger than `eps_max`.
    pub fn frequency_scale(&self, eps_max: f64) -> f64 {
        (self.h_norms.0 + eps_max * self.h_norms.1).max(self.rate_scale)
    }

    /// `out = (fixed + eps · drive) y`.
    fn apply_into(&self, eps: f64, y: &Array1<Complex64>, out: &mut Array1<Complex64>) {
        out.fill(Complex64::new(0.0, 0.0));
        self.fixed
            .mul_vec_acc(Complex64::new(1.0, 0.0), y.view(), out.view_mut());
        if eps != 0.0 {
            self.drive
                .mul_vec_acc(Complex64::new(eps, 0.0), y.view(), out.view_mut());
        }
    }
}

/// Superoperator for a constant drive strength `eps`.
pub fn build_liouvillian(params: &ModelParams, dims: HilbertDims, eps: f64) -> Result<Liouvillian> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(
            "drive strength must be non-negative".into(),
        ));
    }
    Ok(LiouvillianParts::new(params, dims)?.at(eps))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    /// Upper bound on `h · max(‖H‖, rates)`.
    pub step_bound: f64,
    /// Re-run at half the step and compare.
    pub halving_check: bool,
    /// Accepted relative change between successive halvings.
    pub rel_tol: f64,
    pub max_halvings: usize,
    /// Keep the full density matrix at every grid time.
    pub store_states: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            step_bound: 0.05,
            halving_check: true,
            rel_tol: 1e-6,
            max_halvings: 4,
            store_states: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffPolicy {
    pub start: usize,
    pub increment: usize,
    pub cap: usize,
    /// Maximum accepted `P_{d−1} + P_{d−2}`.
    pub tail_tol: f64,
}

impl CutoffPolicy {
    pub fn starting_at(start: usize) -> Self {
        CutoffPolicy {
            start,
            increment: 4,
            cap: 40,
            tail_tol: 1e-6,
        }
    }

    /// Never escalates.
    pub fn fixed(d: usize) -> Self {
        CutoffPolicy {
            start: d,
            increment: 0,
            cap: d,
            tail_tol: f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    Ground,
    Basis { atom: Atom, n: usize },
}

impl InitialState {
    pub fn density_matrix(&self, dims: HilbertDims) -> Result<DensityMatrix> {
        match *self {
            InitialState::Ground => Ok(DensityMatrix::ground(dims)),
            InitialState::Basis { atom, n } => {
                dims.require_above(n)?;
                Ok(DensityMatrix::basis(dims, atom, n))
            }
        }
    }
}

/// Worst-case physicality diagnostics over a set of density matrices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateChecks {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub max_tail: f64,
    pub states: usize,
}

impl Default for StateChecks {
    fn default() -> Self {
        StateChecks {
            max_trace_error: 0.0,
            max_hermiticity_error: 0.0,
            min_eigenvalue: f64::INFINITY,
            max_tail: 0.0,
            states: 0,
        }
    }
}

impl StateChecks {
    pub fn of(rho: &DensityMatrix) -> Result<Self> {
        Ok(StateChecks {
            max_trace_error: (rho.trace() - 1.0).norm(),
            max_hermiticity_error: rho.hermiticity_error(),
            min_eigenvalue: rho.min_eigenvalue()?,
            max_tail: tail_population(&fock_probabilities(rho)),
            states: 1,
        })
    }

    pub fn over<'a>(states: impl IntoIterator<Item = &'a DensityMatrix>) -> Result<Self> {
        states
            .into_iter()
            .try_fold(StateChecks::default(), |acc, rho| {
                Ok(acc.merge(&StateChecks::of(rho)?))
            })
    }

    pub fn merge(&self, other: &StateChecks) -> StateChecks {
        StateChecks {
            max_trace_error: self.max_trace_error.max(other.max_trace_error),
            max_hermiticity_error: self.max_hermiticity_error.max(other.max_hermiticity_error),
            min_eigenvalue: self.min_eigenvalue.min(other.min_eigenvalue),
            max_tail: self.max_tail.max(other.max_tail),
            states: self.states + other.states,
        }
    }

    /// Trace drift < 1e-7, Hermiticity error < 1e-9, eigenvalues ≥ −1e-7
    /// and tail population below `tail_tol`.
    pub fn violations(&self, tail_tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.max_trace_error < 1e-7) {
            out.push(format!("trace drift {:.3e} ≥ 1e-7", self.max_trace_error));
        }
        if !(self.max_hermiticity_error < 1e-9) {
            out.push(format!(
                "Hermiticity error {:.3e} ≥ 1e-9",
                self.max_hermiticity_error
            ));
        }
        if !(self.min_eigenvalue >= -1e-7) {
            out.push(format!(
                "minimum eigenvalue {:.3e} < −1e-7",
                self.min_eigenvalue
            ));
        }
        if !(self.max_tail < tail_tol) {
            out.push(format!(
                "tail population {:.3e} ≥ {tail_tol:.0e}",
                self.max_tail
            ));
        }
        out
    }
}

/// Tail weight `P_{d−1} + P_{d−2}` used to judge the cutoff.
pub fn tail_population(populations: &[f64]) -> f64 {
    populations.iter().rev().take(2).sum()
}

#[derive(Clone, Debug)]
pub struct TrajectoryResult {
    pub dims: HilbertDims,
    pub times: Vec<f64>,
    /// Empty unless [`IntegratorOptions::store_states`] is set.
    pub states: Vec<DensityMatrix>,
    /// `P_k(t)` for every grid time, `k < d`.
    pub populations: Vec<Vec<f64>>,
    pub photon_number: Vec<f64>,
    pub excited_population: Vec<f64>,
    /// Largest RK4 substep used in the accepted run.
    pub step: f64,
    /// Relative change between the last two step halvings, if checked.
    pub halving_change: Option<f64>,
    pub max_tail: f64,
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("time grid is empty".into()));
    }
    if t_grid[0] != 0.0 {
        return Err(Error::InvalidParameter("time grid must start at 0".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "time grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

struct RawRun {
    states: Vec<Array1<Complex64>>,
    step: f64,
}

fn integrate(
    parts: &LiouvillianParts,
    pulse: &PulseEnvelope,
    rho0: &Array1<Complex64>,
    t_grid: &[f64],
    h_max: f64,
) -> Result<RawRun> {
    let n = rho0.len();
    let mut y = rho0.clone();
    let mut tmp = Array1::zeros(n);
    let (mut k1, mut k2, mut k3, mut k4) = (
        Array1::zeros(n),
        Array1::zeros(n),
        Array1::zeros(n),
        Array1::zeros(n),
    );
    let mut states = Vec::with_capacity(t_grid.len());
    states.push(y.clone());
    let mut step_used: f64 = 0.0;

    for w in t_grid.windows(2) {
        let (t_a, t_b) = (w[0], w[1]);
        let substeps = ((t_b - t_a) / h_max).ceil().max(1.0) as usize;
        let h = (t_b - t_a) / substeps as f64;
        step_used = step_used.max(h);
        let hc = Complex64::new(h, 0.0);
        let half = Complex64::new(0.5 * h, 0.0);
        for s in 0..substeps {
            let t = t_a + s as f64 * h;
            let (e0, e1, e2) = (pulse.value(t), pulse.value(t + 0.5 * h), pulse.value(t + h));
            parts.apply_into(e0, &y, &mut k1);
            Zip::from(&mut tmp)
                .and(&y)
                .and(&k1)
                .for_each(|o, &a, &b| *o = a + half * b);
            parts.apply_into(e1, &tmp, &mut k2);
            Zip::from(&mut tmp)
                .and(&y)
                .and(&k2)
                .for_each(|o, &a, &b| *o = a + half * b);
            parts.apply_into(e1, &tmp, &mut k3);
            Zip::from(&mut tmp)
                .and(&y)
                .and(&k3)
                .for_each(|o, &a, &b| *o = a + hc * b);
            parts.apply_into(e2, &tmp, &mut k4);
            let sixth = hc / 6.0;
            Zip::from(&mut y)
                .and(&k1)
                .and(&k2)
                .and(&k3)
                .and(&k4)
                .for_each(|y, &a, &b, &c, &d| *y += sixth * (a + 2.0 * b + 2.0 * c + d));
        }
        if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { t: t_b });
        }
        states.push(y.clone());
    }
    Ok(RawRun {
        states,
        step: step_used,
    })
}

fn max_relative_change(coarse: &RawRun, fine: &RawRun) -> f64 {
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (a, b) in coarse.states.iter().zip(&fine.states) {
        for (x, y) in a.iter().zip(b) {
            diff = diff.max((x - y).norm());
            scale = scale.max(y.norm());
        }
    }
    diff / scale.max(f64::MIN_POSITIVE)
}

/// Integrates the master equation on a fixed grid starting at `t = 0`.
///
/// Fixed-step RK4 with `h · max(‖H‖, rates) ≤ step_bound`, the envelope
/// sampled at substep times. With `halving_check`, the run is repeated at
/// half the step until successive results agree to `rel_tol`.
pub fn evolve(
    params: &ModelParams,
    dims: HilbertDims,
    pulse: &PulseEnvelope,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: &IntegratorOptions,
) -> Result<TrajectoryResult> {
    pulse.validate()?;
    check_grid(t_grid)?;
    if rho0.dims() != dims {
        return Err(Error::DimensionMismatch {
            left: dims.total(),
            right: rho0.dims().total(),
        });
    }
    let parts = LiouvillianParts::new(params, dims)?;
    let h_max = opts.step_bound / parts.frequency_scale(pulse.peak()).max(f64::MIN_POSITIVE);
    let v0 = vectorize(rho0.data());

    let mut run = integrate(&parts, pulse, &v0, t_grid, h_max)?;
    let mut halving_change = None;
    if opts.halving_check {
        let mut h = h_max;
        let mut halvings = 0;
        loop {
            h *= 0.5;
            halvings += 1;
            let finer = integrate(&parts, pulse, &v0, t_grid, h)?;
            let change = max_relative_change(&run, &finer);
            run = finer;
            halving_change = Some(change);
            if change < opts.rel_tol {
                break;
            }
            if halvings >= opts.max_halvings {
                return Err(Error::NotConverged { change, halvings });
            }
        }
    }

    let a = annihilation(dims);
    let number = a.adjoint().mul(&a);
    let mut result = TrajectoryResult {
        dims,
        times: t_grid.to_vec(),
        states: Vec::new(),
        populations: Vec::with_capacity(t_grid.len()),
        photon_number: Vec::with_capacity(t_grid.len()),
        excited_population: Vec::with_capacity(t_grid.len()),
        step: run.step,
        halving_change,
        max_tail: 0.0,
    };
    for v in &run.states {
        let rho = unvectorize(dims, v);
        let pops = fock_probabilities(&rho);
        result.max_tail = result.max_tail.max(tail_population(&pops));
        result
            .photon_number
            .push(crate::fock_algebra::expectation(&rho, &number)?.re);
        result.excited_population.push(rho.excited_population());
        result.populations.push(pops);
        if opts.store_states {
            result.states.push(rho);
        }
    }
    Ok(result)
}

/// [`evolve`] with automatic cutoff escalation: the run is repeated with
/// `d + increment` while the tail population exceeds the policy tolerance.
pub fn evolve_adaptive(
    params: &ModelParams,
    pulse: &PulseEnvelope,
    initial: InitialState,
    t_grid: &[f64],
    policy: &CutoffPolicy,
    opts: &IntegratorOptions,
) -> Result<TrajectoryResult> {
    let mut d = policy.start.max(params.min_cutoff());
    loop {
        let dims = HilbertDims::new(d)?;
        let rho0 = initial.density_matrix(dims)?;
        let run = evolve(params, dims, pulse, &rho0, t_grid, opts)?;
        if run.max_tail < policy.tail_tol {
            return Ok(run);
        }
        if policy.increment == 0 || d >= policy.cap {
            return Err(Error::CutoffCapReached {
                cap: d,
                tail: run.max_tail,
            });
        }
        log::debug!("tail {:.3e} at d = {d}, escalating", run.max_tail);
        d = (d + policy.increment).min(policy.cap);
    }
}

/// Maximum accepted `‖L vec(ρ_ss)‖∞`.
pub const STEADY_STATE_RESIDUAL_TOL: f64 = 1e-10;

/// Solves `L vec(ρ) = 0` with `Tr ρ = 1` replacing the first equation.
pub fn steady_state(params: &ModelParams, dims: HilbertDims, eps0: f64) -> Result<DensityMatrix> {
    if !(params.kappa > 0.0) {
        return Err(Error::InvalidParameter(
            "steady state requires κ > 0".into(),
        ));
    }
    let liouvillian = build_liouvillian(params, dims, eps0)?;
    let n = dims.total();
    let size = n * n;
    let dense = liouvillian.matrix().to_dense();
    let mut system = dense.clone();
    system.row_mut(0).fill(Complex64::new(0.0, 0.0));
    for i in 0..n {
        system[[0, i + n * i]] = Complex64::new(1.0, 0.0);
    }
    let mut rhs = Array1::zeros(size);
    rhs[0] = Complex64::new(1.0, 0.0);

    let lu = system.clone().factorize_into().map_err(|e| {
        Error::SteadyState(format!(
            "LU factorization failed ({e}); steady state not unique"
        ))
    })?;
    let rcond = lu.rcond()?;
    if !(rcond > 1e-14) {
        return Err(Error::SteadyState(format!(
            "trace-constrained Liouvillian is numerically singular (rcond {rcond:.2e}); steady state not unique"
        )));
    }
    let mut x = lu.solve(&rhs)?;
    // one step of iterative refinement
    let r = &rhs - &system.dot(&x);
    x = x + lu.solve(&r)?;

    let residual = dense.dot(&x).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(residual < STEADY_STATE_RESIDUAL_TOL) {
        return Err(Error::SteadyState(format!(
            "residual {residual:.3e} exceeds {STEADY_STATE_RESIDUAL_TOL:.0e}"
        )));
    }
    let rho = unvectorize(dims, &x).into_data();
    let herm = (&rho + &rho.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
    DensityMatrix::from_matrix(dims, herm)
}

#[derive(Clone, Debug)]
pub struct SteadyStateResult {
    pub rho: DensityMatrix,
    pub tail: f64,
}

/// [`steady_state`] with the same cutoff escalation rule as [`evolve_adaptive`].
pub fn steady_state_adaptive(
    params: &ModelParams,
    eps0: f64,
    policy: &CutoffPolicy,
) -> Result<SteadyStateResult> {
    let mut d = policy.start.max(params.min_cutoff());
    loop {
        let dims = HilbertDims::new(d)?;
        let rho = steady_state(params, dims, eps0)?;
        let tail = tail_population(&fock_probabilities(&rho));
        if tail < policy.tail_tol {
            return Ok(SteadyStateResult { rho, tail });
        }
        if policy.increment == 0 || d >= policy.cap {
            return Err(Error::CutoffCapReached { cap: d, tail });
        }
        d = (d + policy.increment).min(policy.cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock_algebra::number_operator;
    use approx::assert_abs_diff_eq;

    fn dims(d: usize) -> HilbertDims {
        HilbertDims::new(d).unwrap()
    }

    fn random_hermitian(n: usize, seed: u64) -> DensityMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = Array2::from_shape_fn((n, n), |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        m = &m + &m.t().mapv(|z| z.conj());
        DensityMatrix::from_matrix(dims(n / 2), m).unwrap()
    }

    #[test]
    fn vectorization_round_trip_and_convention() {
        let d = dims(2);
        let m = Array2::from_shape_fn((4, 4), |(i, j)| Complex64::new(i as f64, j as f64));
        let v = vectorize(&m);
        assert_eq!(v[1], m[[1, 0]]);
        assert_eq!(v[4], m[[0, 1]]);
        assert_eq!(unvectorize(d, &v).into_data(), m);
    }

    #[test]
    fn superoperator_matches_direct_master_equation() {
        let p = ModelParams::new(2, 1, 1.3)
            .with_rates(0.7, 0.4, 0.25)
            .with_detuning(0.3)
            .with_phase(0.4);
        let dd = dims(4);
        let eps = 0.9;
        let rho = random_hermitian(8, 3);
        let lhs = build_liouvillian(&p, dd, eps)
            .unwrap()
            .apply(&rho)
            .into_data();

        let h = crate::model::hamiltonian_interaction(&p, dd, eps)
            .unwrap()
            .to_dense();
        let a = annihilation(dd).to_dense();
        let (sm, _, sz) = atomic_operators(dd);
        let (sm, sz) = (sm.to_dense(), sz.to_dense());
        let r = rho.data();
        let dag = |m: &Array2<Complex64>| m.t().mapv(|z| z.conj());
        let diss = |c: &Array2<Complex64>| {
            let cdc = dag(c).dot(c);
            c.dot(r).dot(&dag(c)).mapv(|z| z * 2.0) - cdc.dot(r) - r.dot(&cdc)
        };
        let expected = (h.dot(r) - r.dot(&h)).mapv(|z| z * -I)
            + diss(&sm).mapv(|z| z * p.gamma)
            + diss(&a).mapv(|z| z * p.kappa)
            + (sz.dot(r).dot(&sz) - r).mapv(|z| z * p.gamma_phi);
        for (x, y) in lhs.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(x.re, y.re, epsilon = 1e-12);
            assert_abs_diff_eq!(x.im, y.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn liouvillian_is_trace_free() {
        let p = ModelParams::new(3, 2, 2.0)
            .with_rates(1.0, 0.5, 0.5)
            .with_detuning(0.2);
        let l = build_liouvillian(&p, dims(6), 1.5).unwrap();
        for seed in 0..5 {
            let out = l.apply(&random_hermitian(12, seed));
            assert!(out.trace().norm() < 1e-10);
            assert!(out.hermiticity_error() < 1e-12);
        }
    }

    #[test]
    fn cavity_decays_at_twice_kappa() {
        let p = ModelParams::new(1, 1, 0.0).with_rates(1.0, 0.0, 0.0);
        let dd = dims(3);
        let grid: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
        let rho0 = DensityMatrix::basis(dd, Atom::Ground, 1);
        let run = evolve(
            &p,
            dd,
            &PulseEnvelope::constant(0.0),
            &rho0,
            &grid,
            &IntegratorOptions::default(),
        )
        .unwrap();
        for (t, n) in run.times.iter().zip(&run.photon_number) {
            assert_abs_diff_eq!(*n, (-2.0 * t).exp(), epsilon = 1e-8);
        }
    }

    #[test]
    fn atom_decays_at_twice_gamma() {
        let p = ModelParams::new(1, 1, 0.0).with_rates(0.0, 0.8, 0.0);
        let dd = dims(2);
        let grid: Vec<f64> = (0..=10).map(|k| 0.2 * k as f64).collect();
        let rho0 = DensityMatrix::basis(dd, Atom::Excited, 0);
        let run = evolve(
            &p,
            dd,
            &PulseEnvelope::constant(0.0),
            &rho0,
            &grid,
            &IntegratorOptions::default(),
        )
        .unwrap();
        for (t, pe) in run.times.iter().zip(&run.excited_population) {
            assert_abs_diff_eq!(*pe, (-2.0 * 0.8 * t).exp(), epsilon = 1e-8);
        }
    }

    #[test]
    fn pure_dephasing_channel() {
        // dρ_ge/dt = γφ(σz ρ σz − ρ)_ge = −2γφ ρ_ge; populations fixed
        let gp = 0.3;
        let p = ModelParams::new(1, 1, 0.0).with_rates(0.0, 0.0, gp);
        let dd = dims(2);
        let mut psi = Array1::zeros(4);
        psi[dd.index(Atom::Ground, 0)] = Complex64::new(1.0, 0.0);
        psi[dd.index(Atom::Excited, 0)] = Complex64::new(0.0, 1.0);
        let rho0 = DensityMatrix::pure(dd, &psi).unwrap();
        let grid: Vec<f64> = (0..=10).map(|k| 0.3 * k as f64).collect();
        let run = evolve(
            &p,
            dd,
            &PulseEnvelope::constant(0.0),
            &rho0,
            &grid,
            &IntegratorOptions::default(),
        )
        .unwrap();
        for (t, rho) in run.times.iter().zip(&run.states) {
            let coh = rho.element((Atom::Ground, 0), (Atom::Excited, 0)).norm();
            assert_abs_diff_eq!(coh, 0.5 * (-2.0 * gp * t).exp(), epsilon = 1e-8);
            assert_abs_diff_eq!(rho.excited_population(), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn ground_state_is_dark_without_drive() {
        let p = ModelParams::new(2, 1, 5.0)
            .with_rates(1.0, 0.5, 0.5)
            .with_detuning(0.7);
        let dd = dims(5);
        let rho0 = DensityMatrix::ground(dd);
        let grid = [0.0, 0.5, 1.0];
        let run = evolve(
            &p,
            dd,
            &PulseEnvelope::constant(0.0),
            &rho0,
            &grid,
            &IntegratorOptions::default(),
        )
        .unwrap();
        for rho in &run.states {
            assert_eq!(rho, &rho0);
        }
    }

    #[test]
    fn grid_and_dims_are_checked() {
        let p = ModelParams::new(1, 1, 1.0);
        let dd = dims(3);
        let pulse = PulseEnvelope::constant(1.0);
        let rho = DensityMatrix::ground(dd);
        let opts = IntegratorOptions::default();
        assert!(evolve(&p, dd, &pulse, &rho, &[], &opts).is_err());
        assert!(evolve(&p, dd, &pulse, &rho, &[0.1, 0.2], &opts).is_err());
        assert!(evolve(&p, dd, &pulse, &rho, &[0.0, 0.2, 0.2], &opts).is_err());
        assert!(evolve(&p, dims(4), &pulse, &rho, &[0.0, 0.2], &opts).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let p = ModelParams::new(1, 1, 1.0);
        let dd = dims(3);
        let opts = IntegratorOptions {
            step_bound: 50.0,
            halving_check: false,
            ..Default::default()
        };
        let grid: Vec<f64> = (0..=400).map(|k| 10.0 * k as f64).collect();
        let err = evolve(
            &p,
            dd,
            &PulseEnvelope::constant(1.0),
            &DensityMatrix::ground(dd),
            &grid,
            &opts,
        );
        assert!(matches!(err, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn steady_state_of_undriven_system_is_ground() {
        let p = ModelParams::new(2, 1, 3.0).with_rates(1.0, 0.5, 0.5);
        let dd = dims(5);
        let rho = steady_state(&p, dd, 0.0).unwrap();
        let ground = DensityMatrix::ground(dd);
        assert!(rho.trace_distance(&ground).unwrap() < 1e-10);
    }

    #[test]
    fn steady_state_of_driven_empty_cavity_is_coherent() {
        // dα/dt = −iε − κα  ⇒  |α|² = (ε/κ)²; γ > 0 keeps the decoupled atom non-degenerate
        let p = ModelParams::new(1, 1, 0.0).with_rates(1.0, 0.3, 0.0);
        let eps = 0.8;
        let dd = dims(14);
        let rho = steady_state(&p, dd, eps).unwrap();
        let n = crate::fock_algebra::expectation(&rho, &number_operator(dd))
            .unwrap()
            .re;
        assert_abs_diff_eq!(n, eps * eps, epsilon = 1e-9);
        let a = crate::fock_algebra::expectation(&rho, &annihilation(dd)).unwrap();
        assert_abs_diff_eq!(a.re, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(a.im, -eps, epsilon = 1e-9);
    }

    #[test]
    fn steady_state_requires_cavity_loss() {
        let p = ModelParams::new(1, 1, 1.0).with_rates(0.0, 1.0, 0.0);
        assert!(steady_state(&p, dims(3), 0.1).is_err());
    }

    #[test]
    fn degenerate_steady_state_is_reported() {
        // No loss anywhere with κ > 0 on an uncoupled, undriven excited
        // manifold: the atom never relaxes, so |e,0⟩ and |g,0⟩ are both stationary.
        let p = ModelParams::new(1, 1, 0.0).with_rates(1.0, 0.0, 0.0);
        let err = steady_state(&p, dims(3), 0.0);
        assert!(matches!(err, Err(Error::SteadyState(_))), "{err:?}");
    }

    #[test]
    fn escalation_grows_cutoff_until_tail_is_small() {
        let p = ModelParams::new(1, 1, 0.0).with_rates(1.0, 0.3, 0.0);
        let policy = CutoffPolicy::starting_at(4);
        let res = steady_state_adaptive(&p, 1.0, &policy).unwrap();
        assert!(res.tail < 1e-6);
        assert!(res.rho.dims().fock_cutoff() > 4);
        let capped = CutoffPolicy {
            cap: 8,
            ..CutoffPolicy::starting_at(4)
        };
        assert!(matches!(
            steady_state_adaptive(&p, 2.0, &capped),
            Err(Error::CutoffCapReached { .. })
        ));
    }
}
