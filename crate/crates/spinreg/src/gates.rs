//! Compiles Control-Not and Hadamard gates into pulse parameters.
//!
//! A gate on this register is one rectangular pulse. The carrier is
//! resonant with the target-spin flip in the firing value of the
//! control, `nu = E_i' - E_i`, and the amplitude satisfies the `2piK`
//! condition against the same flip in the non-firing value,
//! `Omega = |Delta| / sqrt(4K^2 - 1)` with `Delta = E_j' - E_j - nu`,
//! so a pi pulse completes the wanted transition while the unwanted one
//! returns exactly to its initial state. Qubit values: up is `|0>`,
//! down is `|1>`, for electrons and nuclei alike; a plain CN fires on
//! `|1>`, the inverse CN on `|0>`.
//!
//! The Rabi frequency entering the condition is not the bare
//! `gamma B1`: the exchange admixture reduces the electron value by
//! `1 - J / (4 gamma_e delta_b)` and the hyperfine admixture roughly
//! doubles the nuclear one, `1 + A / (2 gamma_n b)`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::basis::{BasisIndex, Orientation, SpinId, DIM};
use crate::eigen::{first_order_vectors, EigenSystem, EnergySource};
use crate::error::SimError;
use crate::model::{build_v, SystemParams};
use crate::pulse::Pulse;

/// Gate family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    ControlledNot,
    InverseControlledNot,
    Hadamard,
}

/// Definite orientations for the spins that are neither control nor
/// target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SpectatorContext {
    slots: [Option<Orientation>; 4],
}

impl SpectatorContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, spin: SpinId, label: Orientation) -> Self {
        self.slots[spin.bit_position()] = Some(label);
        self
    }

    pub fn get(&self, spin: SpinId) -> Option<Orientation> {
        self.slots[spin.bit_position()]
    }

    pub fn assigned(&self) -> impl Iterator<Item = SpinId> + '_ {
        SpinId::ALL.into_iter().filter(|s| self.get(*s).is_some())
    }
}

/// An abstract gate: kind, control/target spins and the spectator
/// assignment that fixes the reference transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSpec {
    pub kind: GateKind,
    /// None only for Hadamard.
    pub control: Option<SpinId>,
    pub target: SpinId,
    pub context: SpectatorContext,
}

impl GateSpec {
    pub fn cnot(control: SpinId, target: SpinId, context: SpectatorContext) -> Self {
        GateSpec {
            kind: GateKind::ControlledNot,
            control: Some(control),
            target,
            context,
        }
    }

    pub fn inverse_cnot(control: SpinId, target: SpinId, context: SpectatorContext) -> Self {
        GateSpec {
            kind: GateKind::InverseControlledNot,
            control: Some(control),
            target,
            context,
        }
    }

    pub fn hadamard(target: SpinId, context: SpectatorContext) -> Self {
        GateSpec {
            kind: GateKind::Hadamard,
            control: None,
            target,
            context,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        match self.kind {
            GateKind::Hadamard => {
                if self.control.is_some() {
                    return Err(SimError::InvalidGate("Hadamard takes no control".into()));
                }
                if self.target.is_electron() {
                    return Err(SimError::InvalidGate(
                        "Hadamard target must be a nuclear spin".into(),
                    ));
                }
            }
            _ => {
                let control = self
                    .control
                    .ok_or_else(|| SimError::InvalidGate("CN needs a control spin".into()))?;
                if control == self.target {
                    return Err(SimError::InvalidGate(
                        "control and target must differ".into(),
                    ));
                }
            }
        }
        // The context must assign exactly the remaining spins.
        for spin in SpinId::ALL {
            let is_actor = Some(spin) == self.control || spin == self.target;
            match (is_actor, self.context.get(spin)) {
                (true, Some(_)) => {
                    return Err(SimError::InvalidGate(format!(
                        "context assigns the {} spin, which is control or target",
                        spin.name()
                    )))
                }
                (false, None) => {
                    return Err(SimError::InvalidGate(format!(
                        "context misses the {} spin",
                        spin.name()
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Short name like `CN_n1_e1` or `Had_n1`.
    pub fn name(&self) -> String {
        match (self.kind, self.control) {
            (GateKind::ControlledNot, Some(c)) => format!("CN_{}_{}", c.name(), self.target.name()),
            (GateKind::InverseControlledNot, Some(c)) => {
                format!("iCN_{}_{}", c.name(), self.target.name())
            }
            _ => format!("Had_{}", self.target.name()),
        }
    }

    /// Context rendered as `n2=up,e2=down`, in chain order.
    pub fn context_string(&self) -> String {
        let mut parts = Vec::new();
        for spin in SpinId::ALL {
            if let Some(label) = self.context.get(spin) {
                let dir = match label {
                    Orientation::Up => "up",
                    Orientation::Down => "down",
                };
                parts.push(format!("{}={dir}", spin.name()));
            }
        }
        parts.join(",")
    }
}

/// One compiled pulse plus its selection bookkeeping.
#[derive(Debug, Clone)]
pub struct CompiledPulse {
    pub gate: GateSpec,
    pub pulse: Pulse,
    /// Suppression order of the unwanted transition.
    pub k: u32,
    /// Detuning of the suppressed transition, rad/s.
    pub detuning: f64,
    /// Rabi frequency of the driven pair at the compiled amplitude,
    /// rad/s; the pulse duration is `pi / omega` (half for Hadamard).
    pub omega: f64,
    /// Driven pair (control firing): target up, target down.
    pub driven: (BasisIndex, BasisIndex),
    /// Suppressed pair (control not firing).
    pub suppressed: (BasisIndex, BasisIndex),
    /// Electron selectivity error `Omega_e / (4 gamma_e delta_b)`.
    pub eps_e: f64,
    /// Nuclear selectivity error `Omega_n / (4 gamma_n delta_b)`.
    pub eps_n: f64,
    /// Nonselective-excitation error estimate for the target species.
    pub sqrt_pe: f64,
}

/// Species-corrected Rabi frequency at RF amplitude `b1`:
/// `Omega_e = gamma_e B1 (1 - J/(4 gamma_e delta_b))` or
/// `Omega_n = gamma_n B1 (1 + A/(2 gamma_n b))`, rad/s.
pub fn corrected_rabi(p: &SystemParams, b1: f64, electron: bool) -> Result<f64, SimError> {
    if electron {
        if p.delta_b == 0.0 {
            return Err(SimError::DegenerateField);
        }
        Ok(p.gamma_e * b1 * (1.0 - p.j / (4.0 * p.gamma_e * p.delta_b)))
    } else {
        Ok(p.gamma_n * b1 * (1.0 + p.a / (2.0 * p.gamma_n * p.b)))
    }
}

/// Inverts [`corrected_rabi`]: the amplitude `B1` at which the
/// corrected Rabi frequency meets the `2piK` condition
/// `Omega = |Delta| / sqrt(4K^2 - 1)`.
pub fn suppression_amplitude(
    delta: f64,
    k: u32,
    electron: bool,
    p: &SystemParams,
) -> Result<f64, SimError> {
    assert!(k >= 1, "suppression order must be at least 1");
    assert!(delta != 0.0, "suppressed transition must be detuned");
    let omega = delta.abs() / (4.0 * (k as f64) * (k as f64) - 1.0).sqrt();
    let gamma_factor = if electron {
        if p.delta_b == 0.0 {
            return Err(SimError::DegenerateField);
        }
        p.gamma_e * (1.0 - p.j / (4.0 * p.gamma_e * p.delta_b))
    } else {
        p.gamma_n * (1.0 + p.a / (2.0 * p.gamma_n * p.b))
    };
    Ok(omega / gamma_factor)
}

/// The four states selecting the resonance and the suppression:
/// `(i, i')` with the control in the firing value, `(j, j')` with it in
/// the other value; the target points up in `i` and `j`.
fn gate_states(g: &GateSpec) -> Result<(BasisIndex, BasisIndex, BasisIndex, BasisIndex), SimError> {
    g.validate()?;
    // Hadamard has no control; the same-atom electron discriminates the
    // suppressed line (its orientation shifts the nuclear frequency by
    // about A), with the context value as the "firing" one.
    let (discriminator, firing) = match g.kind {
        GateKind::ControlledNot => (g.control.unwrap(), Orientation::Down),
        GateKind::InverseControlledNot => (g.control.unwrap(), Orientation::Up),
        GateKind::Hadamard => {
            let partner = g.target.same_atom_electron();
            let value = g.context.get(partner).expect("context validated");
            (partner, value)
        }
    };

    let mut i = BasisIndex(0);
    for spin in SpinId::ALL {
        if let Some(label) = g.context.get(spin) {
            i = i.with_label(spin, label);
        }
    }
    i = i
        .with_label(discriminator, firing)
        .with_label(g.target, Orientation::Up);
    let i_prime = i.with_flipped(g.target);
    let j = i.with_flipped(discriminator);
    let j_prime = j.with_flipped(g.target);
    Ok((i, i_prime, j, j_prime))
}

/// Rabi frequency of one transition pair at unit RF amplitude:
/// `2 |<psi_a| V(B1 = 1 T) |psi_b>|`, rad/s/T.
///
/// The species-level correction factors are only the leading behavior;
/// the matrix element depends on the pair. In particular a nuclear
/// flip beside an up electron is nearly quenched at the default
/// parameters because the direct and electron-mediated paths cancel
/// (`1 - A/(2 gamma_n b)` with the ratio close to one), while the same
/// flip beside a down electron is nearly doubled.
pub fn pair_rabi_per_tesla(
    p: &SystemParams,
    vectors: &[[Complex64; DIM]; DIM],
    a: BasisIndex,
    b: BasisIndex,
) -> f64 {
    let v = build_v(p, 1.0);
    let vb = v.apply(&vectors[b.0]);
    let mel: Complex64 = vectors[a.0]
        .iter()
        .zip(vb.iter())
        .map(|(x, y)| x.conj() * y)
        .sum();
    2.0 * mel.norm()
}

fn compile(
    g: &GateSpec,
    eig: &EigenSystem,
    k: u32,
    p: &SystemParams,
    half_rotation: bool,
) -> Result<CompiledPulse, SimError> {
    let (i, i_prime, j, j_prime) = gate_states(g)?;
    let nu = eig.energies[i_prime.0] - eig.energies[i.0];
    let detuning = eig.energies[j_prime.0] - eig.energies[j.0] - nu;
    let electron = g.target.is_electron();
    let b1 = suppression_amplitude(detuning, k, electron, p)?;

    // Duration from the driven pair's own matrix element. Perturbative
    // eigenvectors carry no inter-block admixtures, so the first-order
    // corrected ones stand in for them.
    let corrected;
    let me_vectors = match eig.source {
        EnergySource::Exact => &eig.vectors,
        _ => {
            corrected = first_order_vectors(p);
            &corrected
        }
    };
    let omega = b1 * pair_rabi_per_tesla(p, me_vectors, i, i_prime);
    if !(omega > 0.0) {
        return Err(SimError::InvalidGate(format!(
            "driven transition {} -> {} carries no matrix element",
            i.0, i_prime.0
        )));
    }
    let tau = if half_rotation {
        0.5 * PI / omega
    } else {
        PI / omega
    };
    let pulse = Pulse::new(nu, 0.0, tau, b1)?;

    let omega_e = corrected_rabi(p, b1, true)?;
    let omega_n = corrected_rabi(p, b1, false)?;
    let eps_e = omega_e / (4.0 * p.gamma_e * p.delta_b);
    let eps_n = omega_n / (4.0 * p.gamma_n * p.delta_b);
    let sqrt_pe = if electron { eps_e } else { eps_n };

    Ok(CompiledPulse {
        gate: *g,
        pulse,
        k,
        detuning,
        omega,
        driven: (i, i_prime),
        suppressed: (j, j_prime),
        eps_e,
        eps_n,
        sqrt_pe,
    })
}

/// Compiles a (possibly inverse) Control-Not gate into a pi pulse.
pub fn compile_cnot(
    g: &GateSpec,
    eig: &EigenSystem,
    k: u32,
    p: &SystemParams,
) -> Result<CompiledPulse, SimError> {
    if g.kind == GateKind::Hadamard {
        return Err(SimError::InvalidGate(
            "use compile_hadamard for Hadamard gates".into(),
        ));
    }
    compile(g, eig, k, p, false)
}

/// Compiles a Hadamard on a nuclear spin: same carrier and amplitude
/// selection as the corresponding Control-Not, at half the duration
/// (`tau = pi / (2 Omega_n)`).
pub fn compile_hadamard(
    g: &GateSpec,
    eig: &EigenSystem,
    k_n: u32,
    p: &SystemParams,
) -> Result<CompiledPulse, SimError> {
    if g.kind != GateKind::Hadamard {
        return Err(SimError::InvalidGate("gate is not a Hadamard".into()));
    }
    compile(g, eig, k_n, p, true)
}

/// Selectivity numbers of a compiled pulse: `(eps_e, eps_n, sqrt_Pe)`.
pub fn selectivity_report(cp: &CompiledPulse) -> (f64, f64, f64) {
    (cp.eps_e, cp.eps_n, cp.sqrt_pe)
}

/// Closed-form error estimate for an electron gate with a nuclear
/// control: `sqrt(P_e) ~ A / (8 gamma_e delta_b K_e)`.
pub fn sqrt_pe_estimate(p: &SystemParams, k_e: u32) -> f64 {
    p.a / (8.0 * p.gamma_e * p.delta_b * k_e as f64)
}
