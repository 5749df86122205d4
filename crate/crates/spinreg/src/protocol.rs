//! Initialization and entanglement protocols, the register error
//! metric, seeded random initial states and the J / field-gradient
//! sweep drivers.
//!
//! A protocol starts from a superposition of the four lowest states
//! {6, 7, 14, 15} (both electrons down), polarizes the nuclei with
//! Control-Not pairs interleaved with electron relaxation, then builds
//! the maximal superposition (|0...0> + e^{i theta} |1...1>)/sqrt(2).
//! The figure of merit is
//! `P = |1/2 - |C_0|^2| + |1/2 - |C_15|^2|`.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::sync::Arc;

use crate::basis::{Orientation, SpinId, DIM, ELECTRON_MASK};
use crate::eigen::{
    eigensystem, exact_eigensystem_with_alternative, EigenSystem, EnergySource,
};
use crate::error::SimError;
use crate::gates::{compile_cnot, compile_hadamard, CompiledPulse, GateSpec, SpectatorContext};
use crate::model::SystemParams;
use crate::pulse::{evolve_pulse, RegisterState};

/// Suppression orders for the three gate classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateKs {
    /// Electron target, nuclear control.
    pub k_e: u32,
    /// Electron target, electron control.
    pub k_e_prime: u32,
    /// Nuclear target.
    pub k_n: u32,
}

impl GateKs {
    pub fn defaults() -> Self {
        GateKs {
            k_e: 103,
            k_e_prime: 1,
            k_n: 33620,
        }
    }
}

/// One step of a protocol.
#[derive(Debug, Clone)]
pub enum ProtocolStep {
    Pulse(CompiledPulse),
    /// Flip every up electron "by hand" (the nonunitary relaxation).
    RelaxElectrons,
    /// Advance the clock without touching the amplitudes.
    Wait(f64),
}

impl ProtocolStep {
    pub fn name(&self) -> String {
        match self {
            ProtocolStep::Pulse(cp) => cp.gate.name(),
            ProtocolStep::RelaxElectrons => "relax".into(),
            ProtocolStep::Wait(d) => format!("wait({d:.3e}s)"),
        }
    }
}

/// Result of one protocol run.
#[derive(Debug, Clone)]
pub struct RunResult {
    /// Final amplitudes in the basis-state representation.
    pub final_amplitudes: [Complex64; DIM],
    /// `P = |1/2 - |C_0|^2| + |1/2 - |C_15|^2|`.
    pub error: f64,
    /// Basis populations after every step, with the step name.
    pub trace: Vec<(String, [f64; DIM])>,
}

/// The register error metric over basis amplitudes.
pub fn error_metric(c: &[Complex64; DIM]) -> f64 {
    (0.5 - c[0].norm_sqr()).abs() + (0.5 - c[15].norm_sqr()).abs()
}

/// Draws normalized amplitudes for states (6, 7, 14, 15): independent
/// standard-normal real and imaginary parts, then one normalization.
/// Deterministic per seed.
pub fn random_initial(seed: u64) -> [Complex64; 4] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = [Complex64::ZERO; 4];
    let mut norm = 0.0f64;
    for a in c.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *a = Complex64::new(re, im);
        norm += a.norm_sqr();
    }
    let scale = norm.sqrt();
    for a in c.iter_mut() {
        *a /= scale;
    }
    c
}

/// Transfers all population sitting on states with an up electron to
/// the all-down-electron state with the same nuclear labels.
///
/// On a collision the resulting magnitude is the root sum square of all
/// contributors (population is conserved exactly) and the phase is that
/// of the amplitude already on the all-down state, or of the largest
/// contributor when there is none.
pub fn relax_electrons(c: &[Complex64; DIM]) -> [Complex64; DIM] {
    let mut out = [Complex64::ZERO; DIM];
    // Targets are exactly the four all-electron-down states.
    for nuclear_bits in [0usize, 1, 8, 9] {
        let target = nuclear_bits | ELECTRON_MASK;
        let resident = c[target];
        let mut power = 0.0f64;
        let mut largest = Complex64::ZERO;
        for electron_bits in [0usize, 2, 4, 6] {
            let member = nuclear_bits | electron_bits;
            let amp = c[member];
            power += amp.norm_sqr();
            if member != target && amp.norm() > largest.norm() {
                largest = amp;
            }
        }
        if power > 0.0 {
            let phase_source = if resident.norm() > 0.0 {
                resident
            } else {
                largest
            };
            let phase = if phase_source.norm() > 0.0 {
                phase_source / phase_source.norm()
            } else {
                Complex64::ONE
            };
            out[target] = phase * power.sqrt();
        }
    }
    out
}

fn k_for_gate(gate: &GateSpec, ks: &GateKs) -> u32 {
    if gate.target.is_electron() {
        match gate.control {
            Some(c) if c.is_electron() => ks.k_e_prime,
            _ => ks.k_e,
        }
    } else {
        ks.k_n
    }
}

fn compile_step(
    gate: GateSpec,
    eig: &EigenSystem,
    ks: &GateKs,
    p: &SystemParams,
) -> Result<ProtocolStep, SimError> {
    let k = k_for_gate(&gate, ks);
    let cp = match gate.kind {
        crate::gates::GateKind::Hadamard => compile_hadamard(&gate, eig, k, p)?,
        _ => compile_cnot(&gate, eig, k, p)?,
    };
    Ok(ProtocolStep::Pulse(cp))
}

/// Nuclear-spin initialization: swap polarization from each electron to
/// its nucleus, letting the electrons re-relax in between.
///
/// From any superposition of states {6, 7, 14, 15} the sequence ends
/// with all population on state 15.
pub fn initialization_sequence(
    p: &SystemParams,
    eig: &EigenSystem,
    ks: &GateKs,
) -> Result<Vec<ProtocolStep>, SimError> {
    use Orientation::{Down, Up};
    let ctx_q1 = SpectatorContext::new()
        .with(SpinId::N2, Up)
        .with(SpinId::E2, Down);
    let ctx_q2 = SpectatorContext::new()
        .with(SpinId::E1, Down)
        .with(SpinId::N1, Down);
    Ok(vec![
        compile_step(GateSpec::cnot(SpinId::N1, SpinId::E1, ctx_q1), eig, ks, p)?,
        compile_step(GateSpec::cnot(SpinId::E1, SpinId::N1, ctx_q1), eig, ks, p)?,
        ProtocolStep::RelaxElectrons,
        compile_step(GateSpec::cnot(SpinId::N2, SpinId::E2, ctx_q2), eig, ks, p)?,
        compile_step(GateSpec::cnot(SpinId::E2, SpinId::N2, ctx_q2), eig, ks, p)?,
        ProtocolStep::RelaxElectrons,
    ])
}

/// Entanglement generation from state 15: Hadamard on nucleus 1, then a
/// chain of inverse Control-Nots carries the superposition across the
/// register, ideally onto (|0> + e^{i theta} |15>)/sqrt(2).
pub fn entanglement_sequence(
    p: &SystemParams,
    eig: &EigenSystem,
    ks: &GateKs,
) -> Result<Vec<ProtocolStep>, SimError> {
    use Orientation::{Down, Up};
    let had_ctx = SpectatorContext::new()
        .with(SpinId::N2, Down)
        .with(SpinId::E2, Down)
        .with(SpinId::E1, Down);
    let ctx_a = SpectatorContext::new()
        .with(SpinId::N2, Down)
        .with(SpinId::E2, Down);
    let ctx_b = SpectatorContext::new()
        .with(SpinId::N2, Down)
        .with(SpinId::N1, Up);
    let ctx_c = SpectatorContext::new()
        .with(SpinId::E1, Up)
        .with(SpinId::N1, Up);
    Ok(vec![
        compile_step(GateSpec::hadamard(SpinId::N1, had_ctx), eig, ks, p)?,
        compile_step(
            GateSpec::inverse_cnot(SpinId::N1, SpinId::E1, ctx_a),
            eig,
            ks,
            p,
        )?,
        compile_step(
            GateSpec::inverse_cnot(SpinId::E1, SpinId::E2, ctx_b),
            eig,
            ks,
            p,
        )?,
        compile_step(
            GateSpec::inverse_cnot(SpinId::E2, SpinId::N2, ctx_c),
            eig,
            ks,
            p,
        )?,
    ])
}

/// Both sequences back to back.
pub fn full_protocol(
    p: &SystemParams,
    eig: &EigenSystem,
    ks: &GateKs,
) -> Result<Vec<ProtocolStep>, SimError> {
    let mut steps = initialization_sequence(p, eig, ks)?;
    steps.extend(entanglement_sequence(p, eig, ks)?);
    Ok(steps)
}

/// Runs a protocol from initial amplitudes `(C6, C7, C14, C15)`.
///
/// The amplitudes are converted to the level representation, driven
/// through the steps (pulses advance the clock, relaxation acts in the
/// basis representation at the current clock, waits only advance the
/// clock), and converted back at the final time.
pub fn run_protocol(
    initial: &[Complex64; 4],
    steps: &[ProtocolStep],
    p: &SystemParams,
    sim_eig: Arc<EigenSystem>,
) -> Result<RunResult, SimError> {
    let mut c0 = [Complex64::ZERO; DIM];
    c0[6] = initial[0];
    c0[7] = initial[1];
    c0[14] = initial[2];
    c0[15] = initial[3];
    let mut state = RegisterState::from_basis_amplitudes(&c0, sim_eig);

    let mut trace = Vec::with_capacity(steps.len());
    for step in steps {
        match step {
            ProtocolStep::Pulse(cp) => {
                state = evolve_pulse(&state, p, &cp.pulse)?;
            }
            ProtocolStep::RelaxElectrons => {
                let c = state.basis_amplitudes();
                let relaxed = relax_electrons(&c);
                // Back to level amplitudes at the same clock.
                let mut d = state.basis.basis_to_levels(&relaxed);
                for (n, amp) in d.iter_mut().enumerate() {
                    *amp *= Complex64::from_polar(1.0, state.basis.energies[n] * state.clock);
                }
                state.amplitudes = d;
            }
            ProtocolStep::Wait(duration) => {
                state.clock += duration;
            }
        }
        trace.push((step.name(), state.basis_populations()));
    }

    let final_amplitudes = state.basis_amplitudes();
    Ok(RunResult {
        final_amplitudes,
        error: error_metric(&final_amplitudes),
        trace,
    })
}

/// Sweep axis (values are internal units: rad/s for the exchange,
/// tesla for the field half-difference).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Exchange,
    FieldHalfDifference,
}

/// Aggregated protocol error at one sweep point.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    /// The axis value, in the axis' internal unit.
    pub value: f64,
    pub mean_p: f64,
    pub std_p: f64,
    pub n_realizations: usize,
    /// 1 when the labeling at this point was ambiguous (the statistics
    /// then pool both label orderings).
    pub n_ambiguous: usize,
}

/// Seed for one realization, decorrelated from its neighbors so that
/// any work ordering gives identical results.
fn realization_seed(master: u64, grid_index: usize, realization: usize) -> u64 {
    // splitmix64 over a simple combination.
    let mut z = master
        .wrapping_add(0x9E3779B97F4A7C15u64.wrapping_mul(1 + grid_index as u64))
        .wrapping_add(0xBF58476D1CE4E5B9u64.wrapping_mul(1 + realization as u64));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn run_point(
    p: &SystemParams,
    compile_source: EnergySource,
    ks: &GateKs,
    realizations: usize,
    master_seed: u64,
    grid_index: usize,
) -> Result<SweepPoint, SimError> {
    // Simulation always uses the exact eigensystem; compilation uses
    // the configured source. Ambiguous points are run under both label
    // orderings and pooled.
    let (sim_a, sim_b) = exact_eigensystem_with_alternative(p)?;
    let ambiguous = sim_b.is_some();

    let mut variants: Vec<(Arc<EigenSystem>, Vec<ProtocolStep>)> = Vec::new();
    for sim in std::iter::once(sim_a).chain(sim_b) {
        let compile_eig = match compile_source {
            EnergySource::Exact => sim.clone(),
            EnergySource::Perturbative0 => crate::eigen::perturbative_eigensystem(p, 0),
            EnergySource::Perturbative2 => crate::eigen::perturbative_eigensystem(p, 2),
        };
        let steps = full_protocol(p, &compile_eig, ks)?;
        variants.push((Arc::new(sim), steps));
    }

    let mut errors = Vec::with_capacity(realizations * variants.len());
    for (sim, steps) in &variants {
        for r in 0..realizations {
            let seed = realization_seed(master_seed, grid_index, r);
            let initial = random_initial(seed);
            let result = run_protocol(&initial, steps, p, sim.clone())?;
            errors.push(result.error);
        }
    }
    let (mean_p, std_p) = mean_std(&errors);
    Ok(SweepPoint {
        value: 0.0,
        mean_p,
        std_p,
        n_realizations: errors.len(),
        n_ambiguous: usize::from(ambiguous),
    })
}

/// Runs the full protocol over a parameter grid, `realizations` seeded
/// random initial states per point.
///
/// Grid points are independent and evaluated in parallel; per-point
/// seeds are derived from `(seed, grid index, realization)` so the
/// result is identical for any worker-pool size.
pub fn sweep(
    axis: SweepAxis,
    grid: &[f64],
    realizations: usize,
    seed: u64,
    base: &SystemParams,
    compile_source: EnergySource,
    ks: &GateKs,
) -> Result<Vec<SweepPoint>, SimError> {
    assert!(!grid.is_empty() && realizations >= 1);
    grid.par_iter()
        .enumerate()
        .map(|(idx, &value)| {
            let p = match axis {
                SweepAxis::Exchange => base.with_j(value),
                SweepAxis::FieldHalfDifference => base.with_delta_b(value),
            };
            let mut point = run_point(&p, compile_source, ks, realizations, seed, idx)?;
            point.value = value;
            Ok(point)
        })
        .collect()
}

/// Convenience wrapper: compile with `source`, simulate exactly, run
/// the full protocol once for each of `realizations` seeded initial
/// states at fixed parameters, and return the per-realization errors.
pub fn protocol_errors(
    p: &SystemParams,
    compile_source: EnergySource,
    ks: &GateKs,
    realizations: usize,
    seed: u64,
) -> Result<Vec<f64>, SimError> {
    let sim = Arc::new(eigensystem(p, EnergySource::Exact)?);
    let compile_eig = eigensystem(p, compile_source)?;
    let steps = full_protocol(p, &compile_eig, ks)?;
    (0..realizations)
        .map(|r| {
            let initial = random_initial(realization_seed(seed, 0, r));
            run_protocol(&initial, &steps, p, sim.clone()).map(|res| res.error)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{exact_eigensystem, perturbative_eigensystem};
    use crate::model::TWO_PI;

    fn setup() -> (SystemParams, EigenSystem, Arc<EigenSystem>) {
        let p = SystemParams::defaults();
        let compile_eig = perturbative_eigensystem(&p, 2);
        let sim_eig = Arc::new(exact_eigensystem(&p).unwrap());
        (p, compile_eig, sim_eig)
    }

    #[test]
    fn random_initial_is_normalized_and_deterministic() {
        for seed in [0u64, 1, 42, u64::MAX] {
            let c = random_initial(seed);
            let norm: f64 = c.iter().map(|a| a.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            assert_eq!(c, random_initial(seed));
        }
    }

    #[test]
    fn random_initial_is_isotropic_on_average() {
        let n = 10_000;
        let mut mean = [0.0f64; 4];
        for seed in 0..n {
            let c = random_initial(seed as u64);
            for (m, a) in mean.iter_mut().zip(c.iter()) {
                *m += a.norm_sqr();
            }
        }
        for m in mean {
            assert!((m / n as f64 - 0.25).abs() < 0.02);
        }
    }

    #[test]
    fn relaxation_accumulates_root_sum_square() {
        // alpha |5> + beta |7> -> sqrt(|alpha|^2 + |beta|^2) |7>,
        // keeping the phase of the resident |7> amplitude.
        let mut c = [Complex64::ZERO; DIM];
        let alpha = Complex64::new(0.6, 0.0);
        let beta = Complex64::from_polar(0.8, 1.2);
        c[5] = alpha;
        c[7] = beta;
        let out = relax_electrons(&c);
        assert!((out[7].norm() - 1.0).abs() < 1e-12);
        assert!((out[7] / out[7].norm() - beta / beta.norm()).norm() < 1e-12);
        for (i, amp) in out.iter().enumerate() {
            if i != 7 {
                assert_eq!(*amp, Complex64::ZERO);
            }
        }
    }

    #[test]
    fn relaxation_is_identity_on_all_down_states() {
        let mut c = [Complex64::ZERO; DIM];
        c[7] = Complex64::from_polar(0.6, 0.3);
        c[15] = Complex64::from_polar(0.8, -1.0);
        let out = relax_electrons(&c);
        for i in 0..DIM {
            assert!((out[i] - c[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn relaxation_collects_equal_superpositions() {
        // Equal four-way superposition over the electron labels with
        // fixed nuclei (up2, up1): states 0, 2, 4, 6 -> state 6.
        let mut c = [Complex64::ZERO; DIM];
        for i in [0usize, 2, 4, 6] {
            c[i] = Complex64::new(0.5, 0.0);
        }
        let out = relax_electrons(&c);
        assert!((out[6].norm() - 1.0).abs() < 1e-12);
        let total: f64 = out.iter().map(|a| a.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relaxation_phase_falls_back_to_largest_contributor() {
        let mut c = [Complex64::ZERO; DIM];
        c[5] = Complex64::from_polar(0.3, 0.7);
        c[1] = Complex64::from_polar(0.9, -0.4); // largest, maps to |7>
        let out = relax_electrons(&c);
        let expect_phase = Complex64::from_polar(1.0, -0.4);
        assert!((out[7] / out[7].norm() - expect_phase).norm() < 1e-12);
    }

    #[test]
    fn error_metric_reference_points() {
        let mut ideal = [Complex64::ZERO; DIM];
        ideal[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        ideal[15] = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, 0.9);
        assert!(error_metric(&ideal).abs() < 1e-12);

        let mut all_fifteen = [Complex64::ZERO; DIM];
        all_fifteen[15] = Complex64::ONE;
        assert!((error_metric(&all_fifteen) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn error_metric_is_bounded() {
        for seed in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut c = [Complex64::ZERO; DIM];
            let mut norm = 0.0;
            for a in c.iter_mut() {
                *a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                norm += a.norm_sqr();
            }
            for a in c.iter_mut() {
                *a /= norm.sqrt();
            }
            let p = error_metric(&c);
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn initialization_structure_and_intermediate_states() {
        let (p, compile_eig, sim_eig) = setup();
        let ks = GateKs::defaults();
        let steps = initialization_sequence(&p, &compile_eig, &ks).unwrap();
        assert_eq!(steps.len(), 6);
        assert!(matches!(steps[2], ProtocolStep::RelaxElectrons));
        assert!(matches!(steps[5], ProtocolStep::RelaxElectrons));

        // Mixed four-state input: after the first gate pair plus
        // relaxation the population is confined to {7, 15}.
        let initial = random_initial(17);
        let result = run_protocol(&initial, &steps[..3], &p, sim_eig.clone()).unwrap();
        let pops = result.trace.last().unwrap().1;
        assert!(pops[7] + pops[15] >= 0.98, "pops {:?}", pops);
    }

    #[test]
    fn initialization_reaches_state_fifteen() {
        let (p, compile_eig, sim_eig) = setup();
        let steps = initialization_sequence(&p, &compile_eig, &GateKs::defaults()).unwrap();
        // From state 6.
        let from_six = [Complex64::ONE, Complex64::ZERO, Complex64::ZERO, Complex64::ZERO];
        let result = run_protocol(&from_six, &steps, &p, sim_eig.clone()).unwrap();
        assert!(result.final_amplitudes[15].norm_sqr() >= 0.99);
        // Already initialized.
        let from_fifteen = [Complex64::ZERO, Complex64::ZERO, Complex64::ZERO, Complex64::ONE];
        let result = run_protocol(&from_fifteen, &steps, &p, sim_eig).unwrap();
        assert!(result.final_amplitudes[15].norm_sqr() >= 0.99);
    }

    #[test]
    fn entanglement_from_state_fifteen() {
        let (p, compile_eig, sim_eig) = setup();
        let steps = entanglement_sequence(&p, &compile_eig, &GateKs::defaults()).unwrap();
        let from_fifteen = [Complex64::ZERO, Complex64::ZERO, Complex64::ZERO, Complex64::ONE];
        let result = run_protocol(&from_fifteen, &steps, &p, sim_eig).unwrap();

        // Intermediate: after the inverse CN on (n1 -> e1) the
        // population splits over states 15 and 12.
        let mid = &result.trace[1].1;
        assert!(mid[12] + mid[15] >= 0.98, "mid {:?}", mid);
        assert!((mid[12] - 0.5).abs() < 0.05 && (mid[15] - 0.5).abs() < 0.05);

        let p0 = result.final_amplitudes[0].norm_sqr();
        let p15 = result.final_amplitudes[15].norm_sqr();
        assert!((p0 - 0.5).abs() < 0.02, "pop0 {p0}");
        assert!((p15 - 0.5).abs() < 0.02, "pop15 {p15}");
    }

    #[test]
    fn wait_steps_are_free_evolution() {
        // A wait advances the clock but is a no-op on the level
        // amplitudes; |C15|^2 sits alone in its sector and must come
        // through exactly, and the norm is conserved.
        let (p, _, sim_eig) = setup();
        let steps = [ProtocolStep::Wait(0.1)];
        let initial = random_initial(31);
        let result = run_protocol(&initial, &steps, &p, sim_eig).unwrap();
        assert!(result.trace[0].0.starts_with("wait"));
        let p15 = result.final_amplitudes[15].norm_sqr();
        assert!((p15 - initial[3].norm_sqr()).abs() < 1e-12);
        let total: f64 = result.final_amplitudes.iter().map(|a| a.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn population_is_conserved_through_every_step() {
        let (p, compile_eig, sim_eig) = setup();
        let steps = full_protocol(&p, &compile_eig, &GateKs::defaults()).unwrap();
        let initial = random_initial(23);
        let result = run_protocol(&initial, &steps, &p, sim_eig).unwrap();
        for (name, pops) in &result.trace {
            let total: f64 = pops.iter().sum();
            assert!((total - 1.0).abs() < 1e-9, "{name}: total {total}");
        }
    }

    #[test]
    fn sector_population_discipline_during_a_pulse() {
        // The nuclear CN on (e1 -> n1) drives within Sigma in {0, -1}
        // states; sectors +1 and +2 should stay below eps^2-scale.
        let (p, compile_eig, sim_eig) = setup();
        let ks = GateKs::defaults();
        let steps = initialization_sequence(&p, &compile_eig, &ks).unwrap();
        let from_six = [Complex64::ONE, Complex64::ZERO, Complex64::ZERO, Complex64::ZERO];
        let result = run_protocol(&from_six, &steps[1..2], &p, sim_eig).unwrap();
        let pops = result.trace[0].1;
        let upper: f64 = (0..DIM)
            .filter(|&i| crate::basis::sigma_of(crate::basis::BasisIndex(i)) > 0)
            .map(|i| pops[i])
            .sum();
        assert!(upper < 0.01, "upper sectors hold {upper}");
    }

    #[test]
    fn mean_error_is_small_at_defaults() {
        let p = SystemParams::defaults();
        let errors = protocol_errors(
            &p,
            EnergySource::Perturbative2,
            &GateKs::defaults(),
            20,
            99,
        )
        .unwrap();
        let (mean, _) = mean_std(&errors);
        assert!(mean <= 0.1, "mean P {mean}");
        assert!(errors.iter().all(|e| (0.0..=1.0).contains(e)));
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let p = SystemParams::defaults();
        let grid: Vec<f64> = [0.2e6, 5.0e6].iter().map(|f| TWO_PI * f).collect();
        let ks = GateKs::defaults();
        let run = || {
            sweep(
                SweepAxis::Exchange,
                &grid,
                5,
                7,
                &p,
                EnergySource::Perturbative2,
                &ks,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.mean_p, y.mean_p);
            assert_eq!(x.std_p, y.std_p);
        }
        assert_eq!(a[0].value, grid[0]);
        assert_eq!(a[0].n_realizations, 5);
    }
}
