//! Analytics built on top of the model: the dispersive effective Hamiltonian
//! for `M < N`, the vacuum ↔ `|M⟩` rotation it generates, Fock-filter
//! leakage, probe absorption spectra and the transmitted-field moments.

use ndarray::Array1;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fock_algebra::{
    annihilation, expectation, fock_probabilities, number_operator, Atom, DensityMatrix,
    HilbertDims, Operator,
};
use crate::lindblad::{steady_state_adaptive, CutoffPolicy, StateChecks, TrajectoryResult};
use crate::model::{falling_factorial, ModelParams, PulseEnvelope};
use crate::sparse::CsrMatrix;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Effective Hamiltonian for a resonant probe (`Δp = 0`) and `M < N`:
///
/// ```text
/// ε e^{iχ} Σ_{n=0}^{N−M−1} √((n+M)!/n!) |g,n+M⟩⟨g,n| + h.c.
/// ```
pub fn effective_hamiltonian(
    params: &ModelParams,
    dims: HilbertDims,
    eps: f64,
) -> Result<Operator> {
    params.validate()?;
    let (big_n, m) = (params.jc_order as usize, params.drive_order as usize);
    if m >= big_n {
        return Err(Error::Inapplicable(format!(
            "effective Hamiltonian needs M < N (got M = {m}, N = {big_n})"
        )));
    }
    if params.delta_p != 0.0 {
        return Err(Error::Inapplicable(
            "effective Hamiltonian assumes Δp = 0".into(),
        ));
    }
    dims.require_above(big_n - 1)?;
    let phase = Complex64::from_polar(eps, params.chi);
    let mut triplets = Vec::new();
    for n in 0..big_n - m {
        let amp = phase * falling_factorial(n + m, m).sqrt();
        let (up, down) = (dims.index(Atom::Ground, n + m), dims.index(Atom::Ground, n));
        triplets.push((up, down, amp));
        triplets.push((down, up, amp.conj()));
    }
    Operator::new(
        dims,
        CsrMatrix::from_triplets(dims.total(), dims.total(), triplets),
    )
}

/// A vacuum ↔ `|M⟩` rotation driven by `pulse`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    pub jc_order: u32,
    pub drive_order: u32,
    pub pulse: PulseEnvelope,
    pub chi: f64,
    /// Coupling, used only for the validity ratio.
    pub g: f64,
}

impl RotationSpec {
    pub fn from_params(params: &ModelParams, pulse: PulseEnvelope) -> Self {
        RotationSpec {
            jc_order: params.jc_order,
            drive_order: params.drive_order,
            pulse,
            chi: params.chi,
            g: params.g,
        }
    }

    /// Requires `N/2 ≤ M < N`, where the effective dynamics is a two-level rotation.
    pub fn validate(&self) -> Result<()> {
        let (n, m) = (self.jc_order, self.drive_order);
        if m >= n || 2 * m < n {
            return Err(Error::Inapplicable(format!(
                "rotation requires N/2 ≤ M < N (got N = {n}, M = {m})"
            )));
        }
        self.pulse.validate()
    }

    /// `ε_m / (g √(2 (N−M)!))`; the effective description needs this ≪ 1.
    pub fn validity_ratio(&self) -> f64 {
        let k = self.jc_order.saturating_sub(self.drive_order);
        self.pulse.peak() / (self.g * (2.0 * factorial(k)).sqrt())
    }

    /// Polar angle `θ_M(t) = 2 √(M!) ∫₀ᵗ ε`.
    pub fn theta(&self, t: f64) -> f64 {
        2.0 * factorial(self.drive_order).sqrt() * self.pulse.integral(t)
    }

    /// Azimuth `φ = χ − π/2`.
    pub fn phi(&self) -> f64 {
        self.chi - FRAC_PI_2
    }

    /// Rotation period in t for a constant drive.
    pub fn period(&self) -> Option<f64> {
        match self.pulse {
            PulseEnvelope::Constant { amplitude } if amplitude > 0.0 => {
                Some(std::f64::consts::PI / (factorial(self.drive_order).sqrt() * amplitude))
            }
            _ => None,
        }
    }
}

/// Cavity amplitudes `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|M⟩`, length `M + 1`; the atom stays in `|g⟩`.
pub fn rotation_state(spec: &RotationSpec, t: f64) -> Result<Array1<Complex64>> {
    spec.validate()?;
    let m = spec.drive_order as usize;
    let half = 0.5 * spec.theta(t);
    let mut psi = Array1::zeros(m + 1);
    psi[0] = Complex64::new(half.cos(), 0.0);
    psi[m] = Complex64::from_polar(half.sin(), spec.phi());
    Ok(psi)
}

/// [`rotation_state`] embedded as `|g⟩ ⊗ ψ` in the composite space.
pub fn rotation_state_full(
    spec: &RotationSpec,
    dims: HilbertDims,
    t: f64,
) -> Result<Array1<Complex64>> {
    let cavity = rotation_state(spec, t)?;
    dims.require_above(cavity.len() - 1)?;
    let mut psi = Array1::zeros(dims.total());
    for (n, c) in cavity.iter().enumerate() {
        psi[dims.index(Atom::Ground, n)] = *c;
    }
    Ok(psi)
}

/// `F(t) = ⟨Ψ(t)|ρ(t)|Ψ(t)⟩` against the analytic rotation state.
pub fn rotation_fidelity(trajectory: &TrajectoryResult, spec: &RotationSpec) -> Result<Vec<f64>> {
    if trajectory.states.len() != trajectory.times.len() {
        return Err(Error::InvalidParameter(
            "trajectory was run without stored states".into(),
        ));
    }
    trajectory
        .times
        .iter()
        .zip(&trajectory.states)
        .map(|(&t, rho)| {
            let psi = rotation_state_full(spec, rho.dims(), t)?;
            let r = rho.data();
            let mut f = Complex64::new(0.0, 0.0);
            for (i, a) in psi.iter().enumerate().filter(|(_, a)| a.norm() > 0.0) {
                for (j, b) in psi.iter().enumerate().filter(|(_, b)| b.norm() > 0.0) {
                    f += a.conj() * r[[i, j]] * b;
                }
            }
            Ok(f.re)
        })
        .collect()
}

/// `Σ_{k≥N} P_k`: weight outside the filter subspace `{|0⟩ … |N−1⟩}`.
pub fn filter_leakage(rho: &DensityMatrix, jc_order: u32) -> f64 {
    leakage_of(&fock_probabilities(rho), jc_order)
}

pub fn leakage_of(populations: &[f64], jc_order: u32) -> f64 {
    populations.iter().skip(jc_order as usize).sum()
}

/// Probe strength `g / (10 √(N!))` keeping the absorption in the linear regime.
pub fn weak_probe_strength(g: f64, jc_order: u32) -> f64 {
    g / (10.0 * factorial(jc_order).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumScan {
    pub delta_p: Vec<f64>,
    /// `⟨a†a⟩ / ⟨a†a⟩_max`.
    pub absorption: Vec<f64>,
    pub photon_number: Vec<f64>,
    /// `⟨a†a⟩` at `g = Δp = 0` with the same drive and rates.
    pub normalization: f64,
    pub max_cutoff: usize,
    /// Physicality of every steady state solved, including the normalization run.
    pub checks: StateChecks,
}

/// Steady-state `⟨a†a⟩`, cutoff and state checks at one parameter point.
fn steady_photon_number(
    params: &ModelParams,
    eps0: f64,
    policy: &CutoffPolicy,
) -> Result<(f64, usize, StateChecks)> {
    let ss = steady_state_adaptive(params, eps0, policy)?;
    let dims = ss.rho.dims();
    let n = expectation(&ss.rho, &number_operator(dims))?.re;
    Ok((n, dims.fock_cutoff(), StateChecks::of(&ss.rho)?))
}

/// Normalized steady-state absorption of an `N`-photon probe (`M = N`) over `delta_grid`.
pub fn absorption_scan(
    params: &ModelParams,
    delta_grid: &[f64],
    eps0: f64,
    policy: &CutoffPolicy,
    exec: Execution,
) -> Result<SpectrumScan> {
    if params.drive_order != params.jc_order {
        return Err(Error::Inapplicable(format!(
            "absorption scan needs M = N (got M = {}, N = {})",
            params.drive_order, params.jc_order
        )));
    }
    if delta_grid.is_empty() {
        return Err(Error::InvalidParameter("detuning grid is empty".into()));
    }
    let mut reference = params.clone();
    reference.g = 0.0;
    reference.delta_p = 0.0;
    let (normalization, ref_d, ref_checks) = steady_photon_number(&reference, eps0, policy)?;
    if !(normalization > 0.0) {
        return Err(Error::InvalidParameter(
            "normalization run has no photons; drive strength must be positive".into(),
        ));
    }

    let points = exec.try_map(delta_grid, |&delta| {
        let p = params.clone().with_detuning(delta);
        steady_photon_number(&p, eps0, policy)
    })?;
    Ok(SpectrumScan {
        delta_p: delta_grid.to_vec(),
        absorption: points.iter().map(|p| p.0 / normalization).collect(),
        photon_number: points.iter().map(|p| p.0).collect(),
        normalization,
        max_cutoff: points.iter().map(|p| p.1).fold(ref_d, usize::max),
        checks: points.iter().fold(ref_checks, |acc, p| acc.merge(&p.2)),
    })
}

impl SpectrumScan {
    /// Index of the grid point closest to `Δp = 0`.
    pub fn center_index(&self) -> usize {
        self.delta_p
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Positions of the highest point on each side of `Δp = 0`.
    pub fn side_peaks(&self) -> Option<(f64, f64)> {
        let argmax = |pred: &dyn Fn(f64) -> bool| {
            self.delta_p
                .iter()
                .zip(&self.absorption)
                .filter(|(d, _)| pred(**d))
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(d, _)| *d)
        };
        Some((argmax(&|d| d < 0.0)?, argmax(&|d| d > 0.0)?))
    }

    /// Full width of the central dip at half depth, measured between the
    /// dip minimum and the lower of the two side peaks.
    pub fn dip_fwhm(&self) -> Option<f64> {
        let (left_peak, right_peak) = self.side_peaks()?;
        let idx = |x: f64| self.delta_p.iter().position(|&d| d == x).unwrap();
        let (il, ir) = (idx(left_peak), idx(right_peak));
        if ir <= il + 1 {
            return None;
        }
        let (imin, &amin) = self.absorption[il..=ir]
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, v)| (k + il, v))?;
        let half = 0.5 * (amin + self.absorption[il].min(self.absorption[ir]));
        let crossing = |from: usize, to: usize| -> Option<f64> {
            let step: isize = if to > from { 1 } else { -1 };
            let mut k = from as isize;
            while k != to as isize {
                let next = k + step;
                let (a0, a1) = (self.absorption[k as usize], self.absorption[next as usize]);
                if a0 <= half && a1 >= half {
                    let (d0, d1) = (self.delta_p[k as usize], self.delta_p[next as usize]);
                    return Some(if a1 == a0 {
                        d0
                    } else {
                        d0 + (half - a0) / (a1 - a0) * (d1 - d0)
                    });
                }
                k = next;
            }
            None
        };
        Some(crossing(imin, ir)? - crossing(imin, il)?)
    }
}

/// Steady-state Fock populations over a coupling sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingSweep {
    pub g: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
    pub photon_number: Vec<f64>,
    pub leakage: Vec<f64>,
    pub max_cutoff: usize,
    pub checks: StateChecks,
}

pub fn coupling_sweep(
    params: &ModelParams,
    g_grid: &[f64],
    eps0: f64,
    policy: &CutoffPolicy,
    exec: Execution,
) -> Result<CouplingSweep> {
    if g_grid.is_empty() {
        return Err(Error::InvalidParameter("coupling grid is empty".into()));
    }
    let points = exec.try_map(g_grid, |&g| {
        let mut p = params.clone();
        p.g = g;
        let ss = steady_state_adaptive(&p, eps0, policy)?;
        let dims = ss.rho.dims();
        let n = expectation(&ss.rho, &number_operator(dims))?.re;
        Ok::<_, Error>((
            fock_probabilities(&ss.rho),
            n,
            StateChecks::of(&ss.rho)?,
            dims.fock_cutoff(),
        ))
    })?;
    Ok(CouplingSweep {
        g: g_grid.to_vec(),
        leakage: points
            .iter()
            .map(|p| leakage_of(&p.0, params.jc_order))
            .collect(),
        photon_number: points.iter().map(|p| p.1).collect(),
        checks: points
            .iter()
            .fold(StateChecks::default(), |acc, p| acc.merge(&p.2)),
        max_cutoff: points.iter().map(|p| p.3).max().unwrap_or(0),
        populations: points.into_iter().map(|p| p.0).collect(),
    })
}

/// Transmitted-field moments through a mirror with amplitude decay `κ_out`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputField {
    /// `⟨a_out⟩ = √(2κ_out) ⟨a⟩`
    pub amplitude: Complex64,
    /// `⟨a_out† a_out⟩ = 2κ_out ⟨a†a⟩`
    pub flux: f64,
}

pub fn output_field_map(
    rho: &DensityMatrix,
    kappa_out: f64,
    kappa_total: f64,
) -> Result<OutputField> {
    if !(kappa_out >= 0.0 && kappa_out <= kappa_total) {
        return Err(Error::InvalidParameter(format!(
            "output decay rate {kappa_out} must lie in [0, κ = {kappa_total}]"
        )));
    }
    let dims = rho.dims();
    let a = expectation(rho, &annihilation(dims))?;
    let n = expectation(rho, &number_operator(dims))?.re;
    Ok(OutputField {
        amplitude: a * (2.0 * kappa_out).sqrt(),
        flux: 2.0 * kappa_out * n,
    })
}
