//! Driven N-photon Jaynes–Cummings Hamiltonians, the analytic spectrum of the
//! undriven model and the drive envelopes.
//!
//! All rates and energies are in units of the cavity decay rate κ, times in
//! units of 1/κ. Dynamics always uses the probe frame
//!
//! ```text
//! H_I = Δp (a†a + N σz/2) + [ε(t) a^M e^{−iχ} + g a^N σ₊ + h.c.]
//! ```
//!
//! with the envelope ε(t) substituted instantaneously. The lab-frame
//! Hamiltonian `ω a†a + Nω σz/2 + g(σ₊a^N + h.c.)` is only built to validate
//! the analytic eigensystem.

use libm::erf;
use ndarray::Array1;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::fock_algebra::{
    annihilation, atomic_operators, number_operator, op_power, Atom, HilbertDims, Operator,
};

/// Physical parameters of the driven system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Photons exchanged per atomic flip (N).
    #[serde(rename = "N")]
    pub jc_order: u32,
    /// Nonlinearity of the drive (M).
    #[serde(rename = "M")]
    pub drive_order: u32,
    /// Atom-field coupling.
    pub g: f64,
    /// Probe detuning Δp = ω − ωp.
    #[serde(default)]
    pub delta_p: f64,
    /// Drive phase χ in radians.
    #[serde(default)]
    pub chi: f64,
    /// Cavity field amplitude decay rate.
    #[serde(default = "one")]
    pub kappa: f64,
    /// Atomic polarization decay rate.
    #[serde(default)]
    pub gamma: f64,
    /// Pure dephasing rate.
    #[serde(default)]
    pub gamma_phi: f64,
    /// Asserts ω₀ = Nω; the probe frame has no other atomic detuning.
    #[serde(default = "yes")]
    pub resonant: bool,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl ModelParams {
    pub fn new(jc_order: u32, drive_order: u32, g: f64) -> Self {
        ModelParams {
            jc_order,
            drive_order,
            g,
            delta_p: 0.0,
            chi: 0.0,
            kappa: 1.0,
            gamma: 0.0,
            gamma_phi: 0.0,
            resonant: true,
        }
    }

    pub fn with_rates(mut self, kappa: f64, gamma: f64, gamma_phi: f64) -> Self {
        self.kappa = kappa;
        self.gamma = gamma;
        self.gamma_phi = gamma_phi;
        self
    }

    pub fn with_detuning(mut self, delta_p: f64) -> Self {
        self.delta_p = delta_p;
        self
    }

    pub fn with_phase(mut self, chi: f64) -> Self {
        self.chi = chi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.jc_order < 1 || self.drive_order < 1 {
            return Err(Error::InvalidParameter("N and M must be at least 1".into()));
        }
        let finite = [
            self.g,
            self.delta_p,
            self.chi,
            self.kappa,
            self.gamma,
            self.gamma_phi,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        if self.g < 0.0 || self.gamma < 0.0 || self.gamma_phi < 0.0 || self.kappa < 0.0 {
            return Err(Error::InvalidParameter(
                "g and all rates must be non-negative".into(),
            ));
        }
        if !self.resonant {
            return Err(Error::Inapplicable(
                "only the resonant case ω₀ = Nω is modelled".into(),
            ));
        }
        Ok(())
    }

    /// Smallest cutoff `d` for which `a^N` and `a^M` are non-trivial.
    pub fn min_cutoff(&self) -> usize {
        self.jc_order.max(self.drive_order) as usize + 1
    }
}

/// Time profile ε(t) of the drive strength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseEnvelope {
    Constant {
        amplitude: f64,
    },
    /// `ε(t) = ε_m / √(2πη²) · exp(−(t−t₀)²/2η²)`; `ε_m` is the pulse area.
    Gaussian {
        amplitude: f64,
        width: f64,
        center: f64,
    },
}

impl PulseEnvelope {
    pub fn constant(amplitude: f64) -> Self {
        PulseEnvelope::Constant { amplitude }
    }

    pub fn gaussian(amplitude: f64, width: f64, center: f64) -> Self {
        PulseEnvelope::Gaussian {
            amplitude,
            width,
            center,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PulseEnvelope::Constant { amplitude } if amplitude >= 0.0 && amplitude.is_finite() => {
                Ok(())
            }
            PulseEnvelope::Constant { .. } => Err(Error::InvalidParameter(
                "pulse amplitude must be finite and non-negative".into(),
            )),
            PulseEnvelope::Gaussian {
                amplitude,
                width,
                center,
            } => {
                if !(amplitude >= 0.0 && amplitude.is_finite()) {
                    Err(Error::InvalidParameter(
                        "pulse amplitude must be finite and non-negative".into(),
                    ))
                } else if !(width > 0.0 && width.is_finite()) {
                    Err(Error::InvalidParameter(
                        "Gaussian width η must be positive".into(),
                    ))
                } else if !center.is_finite() {
                    Err(Error::InvalidParameter(
                        "Gaussian center must be finite".into(),
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            PulseEnvelope::Constant { amplitude } => amplitude,
            PulseEnvelope::Gaussian {
                amplitude,
                width,
                center,
            } => {
                let x = (t - center) / width;
                amplitude / (2.0 * PI * width * width).sqrt() * (-0.5 * x * x).exp()
            }
        }
    }

    /// `∫₀ᵗ ε(t′) dt′`. The Gaussian integral starts at 0, not at −∞.
    pub fn integral(&self, t: f64) -> f64 {
        match *self {
            PulseEnvelope::Constant { amplitude } => amplitude * t,
            PulseEnvelope::Gaussian {
                amplitude,
                width,
                center,
            } => {
                let s = SQRT_2 * width;
                0.5 * amplitude * (erf((t - center) / s) + erf(center / s))
            }
        }
    }

    /// Maximum of ε(t) over all t.
    pub fn peak(&self) -> f64 {
        match *self {
            PulseEnvelope::Constant { amplitude } => amplitude,
            PulseEnvelope::Gaussian { center, .. } => self.value(center),
        }
    }
}

/// `H_I` without the drive term.
pub fn hamiltonian_static(params: &ModelParams, dims: HilbertDims) -> Result<Operator> {
    params.validate()?;
    dims.require_above(params.jc_order.max(params.drive_order) as usize)?;
    let n = params.jc_order;
    let a = annihilation(dims);
    let (_, sigma_plus, sigma_z) = atomic_operators(dims);

    let detuning = number_operator(dims)
        .add(&sigma_z.scale_re(0.5 * n as f64))
        .scale_re(params.delta_p);
    let exchange = op_power(&a, n).mul(&sigma_plus).scale_re(params.g);
    Ok(detuning.add(&exchange).add(&exchange.adjoint()))
}

/// Unit-strength drive `a^M e^{−iχ} + h.c.`; `H_I = static + ε(t) · drive`.
pub fn drive_operator(params: &ModelParams, dims: HilbertDims) -> Result<Operator> {
    params.validate()?;
    dims.require_above(params.jc_order.max(params.drive_order) as usize)?;
    let a_m = op_power(&annihilation(dims), params.drive_order)
        .scale(Complex64::from_polar(1.0, -params.chi));
    Ok(a_m.add(&a_m.adjoint()))
}

/// Probe-frame Hamiltonian at instantaneous drive strength `eps`.
pub fn hamiltonian_interaction(
    params: &ModelParams,
    dims: HilbertDims,
    eps: f64,
) -> Result<Operator> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(
            "drive strength must be non-negative".into(),
        ));
    }
    let h0 = hamiltonian_static(params, dims)?;
    Ok(h0.add(&drive_operator(params, dims)?.scale_re(eps)))
}

/// Lab-frame Hamiltonian with `ω₀ = Nω`.
pub fn hamiltonian_bare(params: &ModelParams, dims: HilbertDims, omega: f64) -> Result<Operator> {
    params.validate()?;
    dims.require_above(params.jc_order as usize)?;
    let n = params.jc_order;
    let a = annihilation(dims);
    let (_, sigma_plus, sigma_z) = atomic_operators(dims);
    let free = number_operator(dims)
        .scale_re(omega)
        .add(&sigma_z.scale_re(0.5 * n as f64 * omega));
    let exchange = sigma_plus.mul(&op_power(&a, n)).scale_re(params.g);
    Ok(free.add(&exchange).add(&exchange.adjoint()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LevelLabel {
    /// `|g,n⟩`, `n < N`.
    Uncorrelated(usize),
    /// `(|g,n⟩ + |e,n−N⟩)/√2`, `n ≥ N`.
    DressedPlus(usize),
    /// `(|g,n⟩ − |e,n−N⟩)/√2`, `n ≥ N`.
    DressedMinus(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenLevel {
    pub label: LevelLabel,
    pub energy: f64,
    pub state: Array1<Complex64>,
}

/// `n! / (n−k)!`
pub fn falling_factorial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ((n - k + 1)..=n).map(|x| x as f64).product()
}

/// Closed-form eigensystem of the lab-frame Hamiltonian, sorted by energy.
///
/// Levels are listed for cavity occupation `n ≤ d−1`. The states `|e,m⟩`
/// with `m ≥ d−N` have no partner inside the cutoff and are not listed.
pub fn analytic_spectrum(
    params: &ModelParams,
    dims: HilbertDims,
    omega: f64,
) -> Result<Vec<EigenLevel>> {
    params.validate()?;
    dims.require_above(params.jc_order as usize)?;
    let big_n = params.jc_order as usize;
    let d = dims.fock_cutoff();
    let basis = |atom: Atom, n: usize| {
        let mut v = Array1::zeros(dims.total());
        v[dims.index(atom, n)] = Complex64::new(1.0, 0.0);
        v
    };
    let ladder = |n: usize| (n as f64 - big_n as f64 / 2.0) * omega;

    let mut levels = Vec::with_capacity(2 * d);
    for n in 0..big_n {
        levels.push(EigenLevel {
            label: LevelLabel::Uncorrelated(n),
            energy: ladder(n),
            state: basis(Atom::Ground, n),
        });
    }
    for n in big_n..d {
        let split = params.g * falling_factorial(n, big_n).sqrt();
        let g_part = basis(Atom::Ground, n);
        let e_part = basis(Atom::Excited, n - big_n);
        levels.push(EigenLevel {
            label: LevelLabel::DressedPlus(n),
            energy: ladder(n) + split,
            state: (&g_part + &e_part).mapv(|z| z * FRAC_1_SQRT_2),
        });
        levels.push(EigenLevel {
            label: LevelLabel::DressedMinus(n),
            energy: ladder(n) - split,
            state: (&g_part - &e_part).mapv(|z| z * FRAC_1_SQRT_2),
        });
    }
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(levels)
}
