//! Rotating-frame propagation of rectangular RF pulses.
//!
//! During a rectangular pulse the rotating-frame Hamiltonian in the
//! level basis is time independent,
//!
//! ```text
//! h[n][m] = (E_n + nu Sigma_n) delta_nm + V_nm,
//! V_nm = sum_ij conj(a[n][i]) <i|V|j> a[m][j],
//! ```
//!
//! so one pulse is: transform lab -> rotating at the pulse start,
//! propagate through the eigendecomposition of `h`, transform back at
//! the pulse end. Between pulses the level amplitudes `D_p` are frame
//! constants (the `exp(-i E_p t)` factor is carried symbolically), so
//! free evolution is a no-op on them while the clock advances.

use num_complex::Complex64;
use std::sync::Arc;

use crate::basis::DIM;
use crate::eigen::EigenSystem;
use crate::error::SimError;
use crate::model::{build_v, SystemParams};
use crate::operator::{hermitian_eigen16, Operator16};

/// A rectangular RF pulse. The carrier frequency is signed: a negative
/// `nu` selects the opposite circular polarization and is the natural
/// choice for transitions that lower the energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    /// Signed carrier angular frequency, rad/s.
    pub nu: f64,
    /// Carrier phase, rad.
    pub phase: f64,
    /// Duration, s.
    pub duration: f64,
    /// Field amplitude, T.
    pub amplitude: f64,
}

impl Pulse {
    pub fn new(nu: f64, phase: f64, duration: f64, amplitude: f64) -> Result<Self, SimError> {
        if !(duration > 0.0) {
            return Err(SimError::InvalidParams("pulse duration must be > 0".into()));
        }
        if !(amplitude >= 0.0) {
            return Err(SimError::InvalidParams(
                "pulse amplitude must be >= 0".into(),
            ));
        }
        Ok(Pulse {
            nu,
            phase,
            duration,
            amplitude,
        })
    }
}

/// Which decomposition the amplitudes of a [`RegisterState`] refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// `D_p` of `|Psi(t)> = sum_p D_p exp(-i E_p t) |psi_p>`.
    Lab,
    /// `c_n` of `|Phi(t)> = sum_n c_n |psi_n>` in the frame co-rotating
    /// with the current pulse.
    Rotating,
}

/// 16 level amplitudes plus the global clock.
#[derive(Debug, Clone)]
pub struct RegisterState {
    pub amplitudes: [Complex64; DIM],
    pub frame: Frame,
    /// Global time, s.
    pub clock: f64,
    /// The eigensystem the amplitudes are expressed in.
    pub basis: Arc<EigenSystem>,
}

impl RegisterState {
    /// Lab-frame state at `t = 0` with all amplitude on level `n`.
    pub fn level_state(n: usize, basis: Arc<EigenSystem>) -> Self {
        let mut amplitudes = [Complex64::ZERO; DIM];
        amplitudes[n] = Complex64::ONE;
        RegisterState {
            amplitudes,
            frame: Frame::Lab,
            clock: 0.0,
            basis,
        }
    }

    /// Lab-frame state at `t = 0` from basis-state amplitudes `C_i`.
    pub fn from_basis_amplitudes(c: &[Complex64; DIM], basis: Arc<EigenSystem>) -> Self {
        let amplitudes = basis.basis_to_levels(c);
        RegisterState {
            amplitudes,
            frame: Frame::Lab,
            clock: 0.0,
            basis,
        }
    }

    /// Basis-state amplitudes `C_i(t) = sum_n a_{n,i} D_n exp(-i E_n t)`
    /// at the current clock (lab frame only).
    pub fn basis_amplitudes(&self) -> [Complex64; DIM] {
        debug_assert_eq!(self.frame, Frame::Lab);
        let mut d = self.amplitudes;
        for (n, amp) in d.iter_mut().enumerate() {
            *amp *= Complex64::from_polar(1.0, -self.basis.energies[n] * self.clock);
        }
        self.basis.levels_to_basis(&d)
    }

    /// Populations `|C_i|^2` in the basis-state representation.
    pub fn basis_populations(&self) -> [f64; DIM] {
        let c = self.basis_amplitudes();
        let mut out = [0.0f64; DIM];
        for (o, a) in out.iter_mut().zip(c.iter()) {
            *o = a.norm_sqr();
        }
        out
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Direction of a frame transformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameDirection {
    ToRotating,
    ToLab,
}

/// Applies `D_p = exp[i E_p t + i Sigma_p (nu t + phi)] c_p` at the
/// current clock, forward (`ToLab`) or inverted (`ToRotating`).
///
/// The clock must sit at the pulse boundary where the transformation is
/// evaluated; the norm is unchanged (pure phases).
pub fn frame_transform(
    state: &RegisterState,
    pulse: &Pulse,
    direction: FrameDirection,
) -> Result<RegisterState, SimError> {
    let target = match direction {
        FrameDirection::ToRotating => Frame::Rotating,
        FrameDirection::ToLab => Frame::Lab,
    };
    if state.frame == target {
        return Err(SimError::FrameMismatch(target));
    }
    let t = state.clock;
    let mut out = state.clone();
    out.frame = target;
    for (p, amp) in out.amplitudes.iter_mut().enumerate() {
        let phase = state.basis.energies[p] * t
            + state.basis.sigmas[p] as f64 * (pulse.nu * t + pulse.phase);
        let factor = match direction {
            FrameDirection::ToLab => Complex64::from_polar(1.0, phase),
            FrameDirection::ToRotating => Complex64::from_polar(1.0, -phase),
        };
        *amp *= factor;
    }
    Ok(out)
}

/// Rotating-frame Hamiltonian of a pulse in the level basis (rad/s).
pub fn build_rotating_h(p: &SystemParams, pulse: &Pulse, eig: &EigenSystem) -> Operator16 {
    let v = build_v(p, pulse.amplitude);
    let mut h = Operator16::zero();
    for n in 0..DIM {
        for m in 0..DIM {
            // V_nm = <psi_n|V|psi_m>
            let mut vnm = Complex64::ZERO;
            for i in 0..DIM {
                if eig.vectors[n][i] == Complex64::ZERO {
                    continue;
                }
                let mut row = Complex64::ZERO;
                for j in 0..DIM {
                    let vij = v.get(i, j);
                    if vij != Complex64::ZERO {
                        row += vij * eig.vectors[m][j];
                    }
                }
                vnm += eig.vectors[n][i].conj() * row;
            }
            h.set(n, m, vnm);
        }
        let diag = eig.energies[n] + pulse.nu * eig.sigmas[n] as f64;
        h.entries[n][n] += Complex64::new(diag, 0.0);
    }
    h
}

/// Propagates a lab-frame state through one rectangular pulse.
///
/// The clock must equal the pulse start time; afterwards it has
/// advanced by the pulse duration and the state is back in the lab
/// frame. Unitary to the accuracy of the eigensolver.
pub fn evolve_pulse(
    state: &RegisterState,
    p: &SystemParams,
    pulse: &Pulse,
) -> Result<RegisterState, SimError> {
    let mut rot = frame_transform(state, pulse, FrameDirection::ToRotating)?;
    let h = build_rotating_h(p, pulse, &state.basis);
    let pairs = hermitian_eigen16(&h)?;

    // c_n(t' + tau) = sum_q b^q_n e^{-i e^q tau} sum_m conj(b^q_m) c_m(t')
    let mut weights = [Complex64::ZERO; DIM];
    for (q, w) in weights.iter_mut().enumerate() {
        let mut acc = Complex64::ZERO;
        for m in 0..DIM {
            acc += pairs.vectors[m][q].conj() * rot.amplitudes[m];
        }
        *w = acc * Complex64::from_polar(1.0, -pairs.values[q] * pulse.duration);
    }
    let mut c_next = [Complex64::ZERO; DIM];
    for (n, c) in c_next.iter_mut().enumerate() {
        let mut acc = Complex64::ZERO;
        for (q, w) in weights.iter().enumerate() {
            acc += pairs.vectors[n][q] * w;
        }
        *c = acc;
    }
    rot.amplitudes = c_next;
    rot.clock += pulse.duration;
    frame_transform(&rot, pulse, FrameDirection::ToLab)
}

/// Which of the two levels initially holds all amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoLevelStart {
    P,
    Q,
}

/// Closed-form rectangular-pulse dynamics of an isolated two-level
/// system, the oracle for [`evolve_pulse`] on near-isolated pairs.
///
/// With detuning `delta = E_q - E_p - nu`, Rabi frequency `omega` and
/// `lambda = sqrt(delta^2 + omega^2)`, a pulse of duration `tau`
/// starting at `t_prime` with phase `phi` maps the initial amplitude 1
/// on `p` (or `q`) to the returned `(D_p, D_q)`; exactly unitary.
pub fn two_level_solution(
    delta: f64,
    omega: f64,
    tau: f64,
    t_prime: f64,
    phi: f64,
    initial: TwoLevelStart,
) -> (Complex64, Complex64) {
    let lambda = delta.hypot(omega);
    if lambda == 0.0 {
        return match initial {
            TwoLevelStart::P => (Complex64::ONE, Complex64::ZERO),
            TwoLevelStart::Q => (Complex64::ZERO, Complex64::ONE),
        };
    }
    let half = 0.5 * lambda * tau;
    let (sin, cos) = half.sin_cos();
    let stay = Complex64::new(cos, delta / lambda * sin);
    let cross = Complex64::new(0.0, omega / lambda * sin);
    match initial {
        TwoLevelStart::P => {
            let d_p = stay * Complex64::from_polar(1.0, -0.5 * delta * tau);
            let d_q = cross * Complex64::from_polar(1.0, delta * t_prime - phi + 0.5 * delta * tau);
            (d_p, d_q)
        }
        TwoLevelStart::Q => {
            let d_p =
                cross * Complex64::from_polar(1.0, -delta * t_prime + phi - 0.5 * delta * tau);
            let d_q = stay.conj() * Complex64::from_polar(1.0, 0.5 * delta * tau);
            (d_p, d_q)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{exact_eigensystem, perturbative_eigensystem};
    use crate::model::TWO_PI;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn defaults_exact() -> (SystemParams, Arc<EigenSystem>) {
        let p = SystemParams::defaults();
        let eig = Arc::new(exact_eigensystem(&p).unwrap());
        (p, eig)
    }

    /// Amplitude of a nuclear pi pulse at suppression order k against a
    /// detuning of A.
    fn nuclear_b1(p: &SystemParams, k: f64) -> f64 {
        let omega = p.a / (4.0 * k * k - 1.0).sqrt();
        omega / (p.gamma_n * (1.0 + p.a / (2.0 * p.gamma_n * p.b)))
    }

    #[test]
    fn two_level_resonant_pi_pulse() {
        let omega = TWO_PI * 1.0e3;
        let (d_p, d_q) = two_level_solution(0.0, omega, PI / omega, 0.0, 0.0, TwoLevelStart::P);
        assert!(d_p.norm() < 1e-12);
        assert!((d_q.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_level_2pik_suppression() {
        let delta = TWO_PI * 116.0e6;
        for k in [1.0f64, 103.0, 33620.0] {
            let omega = delta / (4.0 * k * k - 1.0).sqrt();
            let tau = PI / omega;
            let (d_p, d_q) = two_level_solution(delta, omega, tau, 0.3e-6, 0.7, TwoLevelStart::P);
            assert!(d_q.norm_sqr() < 1e-12, "K={k} leaks {}", d_q.norm_sqr());
            assert!((d_p.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_level_half_transfer_point() {
        let omega = TWO_PI * 5.0e3;
        let delta = omega;
        let lambda = delta.hypot(omega);
        let (_, d_q) = two_level_solution(delta, omega, PI / lambda, 0.0, 0.0, TwoLevelStart::P);
        assert!((d_q.norm_sqr() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_level_degenerate_inputs_are_identity() {
        for start in [TwoLevelStart::P, TwoLevelStart::Q] {
            let (d_p, d_q) = two_level_solution(0.0, 0.0, 1.0e-3, 0.0, 0.3, start);
            match start {
                TwoLevelStart::P => assert_eq!((d_p, d_q), (Complex64::ONE, Complex64::ZERO)),
                TwoLevelStart::Q => assert_eq!((d_p, d_q), (Complex64::ZERO, Complex64::ONE)),
            }
        }
    }

    #[test]
    fn pulse_parameters_are_validated() {
        assert!(Pulse::new(1.0, 0.0, 0.0, 1.0e-5).is_err());
        assert!(Pulse::new(1.0, 0.0, -1.0e-6, 1.0e-5).is_err());
        assert!(Pulse::new(1.0, 0.0, 1.0e-6, -1.0e-5).is_err());
        assert!(Pulse::new(-1.0, 0.2, 1.0e-6, 0.0).is_ok());
    }

    #[test]
    fn two_level_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let delta = TWO_PI * rng.random_range(-1.0e6..1.0e6);
            let omega = TWO_PI * rng.random_range(0.0..1.0e6);
            let tau = rng.random_range(0.0..1.0e-3);
            let phi = rng.random_range(0.0..TWO_PI);
            for start in [TwoLevelStart::P, TwoLevelStart::Q] {
                let (d_p, d_q) = two_level_solution(delta, omega, tau, 1.0e-6, phi, start);
                assert!((d_p.norm_sqr() + d_q.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frame_transform_identity_at_origin() {
        let (_, eig) = defaults_exact();
        let state = RegisterState::level_state(7, eig);
        let pulse = Pulse::new(TWO_PI * 1.0e8, 0.0, 1.0e-6, 1.0e-5).unwrap();
        let rot = frame_transform(&state, &pulse, FrameDirection::ToRotating).unwrap();
        for (a, b) in state.amplitudes.iter().zip(rot.amplitudes.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn frame_transform_round_trip_and_mismatch() {
        let (_, eig) = defaults_exact();
        let mut state = RegisterState::level_state(7, eig);
        state.clock = 3.7e-5;
        let pulse = Pulse::new(-TWO_PI * 2.0e8, 1.1, 1.0e-6, 1.0e-5).unwrap();
        let rot = frame_transform(&state, &pulse, FrameDirection::ToRotating).unwrap();
        // Single-amplitude state picks up the expected phase.
        let expect = Complex64::from_polar(
            1.0,
            -state.basis.energies[7] * state.clock
                - (state.basis.sigmas[7] as f64) * (pulse.nu * state.clock + pulse.phase),
        );
        assert_eq!(state.basis.sigmas[7], -1);
        assert!((rot.amplitudes[7] - expect).norm() < 1e-12);
        assert!((rot.amplitudes[7].norm() - 1.0).abs() < 1e-12);

        let back = frame_transform(&rot, &pulse, FrameDirection::ToLab).unwrap();
        for (a, b) in state.amplitudes.iter().zip(back.amplitudes.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(matches!(
            frame_transform(&rot, &pulse, FrameDirection::ToRotating),
            Err(SimError::FrameMismatch(Frame::Rotating))
        ));
    }

    #[test]
    fn rotating_h_diagonal_without_drive() {
        let (p, eig) = defaults_exact();
        let pulse = Pulse::new(TWO_PI * 1.0e8, 0.0, 1.0e-6, 0.0).unwrap();
        let h = build_rotating_h(&p, &pulse, &eig);
        for n in 0..DIM {
            for m in 0..DIM {
                if n == m {
                    let expect = eig.energies[n] + pulse.nu * eig.sigmas[n] as f64;
                    assert!((h.get(n, n).re - expect).abs() < 1e-6 * expect.abs().max(1.0));
                } else {
                    assert_eq!(h.get(n, m), Complex64::ZERO);
                }
            }
        }
    }

    #[test]
    fn rotating_h_rabi_matrix_elements() {
        let (p, eig) = defaults_exact();
        let b1 = 2.0e-5;
        let pulse = Pulse::new(TWO_PI * 1.0e8, 0.0, 1.0e-6, b1).unwrap();
        let h = build_rotating_h(&p, &pulse, &eig);
        assert!(h.hermiticity_residual() < 1e-9 * h.max_abs_entry());

        // V_64: electron Rabi reduced by the exchange admixture.
        let omega_e0 = p.gamma_e * b1;
        let expect_e = 0.5 * omega_e0 * (1.0 - p.j / (4.0 * p.gamma_e * p.delta_b));
        let v64 = h.get(6, 4).norm();
        assert!(
            (v64 - expect_e).abs() / expect_e < 1e-3,
            "V64 {v64} vs {expect_e}"
        );

        // |2 V_67| is about twice the bare nuclear Rabi frequency.
        let omega_n0 = p.gamma_n * b1;
        let ratio = 2.0 * h.get(6, 7).norm() / omega_n0;
        assert!((1.9..2.1).contains(&ratio), "nuclear enhancement {ratio}");
    }

    #[test]
    fn evolve_short_pulse_is_identity() {
        let (p, eig) = defaults_exact();
        let state = RegisterState::level_state(6, eig);
        let pulse = Pulse::new(TWO_PI * 1.0e8, 0.0, 1.0e-16, 1.0e-5).unwrap();
        let out = evolve_pulse(&state, &p, &pulse).unwrap();
        for (a, b) in state.amplitudes.iter().zip(out.amplitudes.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn resonant_nuclear_pi_pulse_transfers_population() {
        let (p, eig) = defaults_exact();
        let b1 = nuclear_b1(&p, 33620.0);
        let omega_n = p.gamma_n * b1 * (1.0 + p.a / (2.0 * p.gamma_n * p.b));
        let nu = eig.energies[7] - eig.energies[6];
        let pulse = Pulse::new(nu, 0.0, PI / omega_n, b1).unwrap();
        let state = RegisterState::level_state(6, eig.clone());
        let out = evolve_pulse(&state, &p, &pulse).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
        assert!(
            out.amplitudes[7].norm_sqr() >= 0.99,
            "transfer {}",
            out.amplitudes[7].norm_sqr()
        );

        // With the zeroth-order carrier the detuning (~35 kHz) dwarfs
        // the nuclear Rabi frequency and the transfer collapses.
        let p0 = perturbative_eigensystem(&p, 0);
        let nu0 = p0.energies[7] - p0.energies[6];
        let pulse0 = Pulse::new(nu0, 0.0, PI / omega_n, b1).unwrap();
        let out0 = evolve_pulse(&state, &p, &pulse0).unwrap();
        assert!(
            out0.amplitudes[7].norm_sqr() <= 0.01,
            "off-resonant transfer {}",
            out0.amplitudes[7].norm_sqr()
        );
    }

    #[test]
    fn evolution_matches_two_level_oracle() {
        let (p, eig) = defaults_exact();
        let b1 = nuclear_b1(&p, 33620.0);
        let probe = Pulse::new(0.0, 0.0, 1.0, b1).unwrap();
        let omega_n = 2.0 * build_rotating_h(&p, &probe, &eig).get(6, 7).norm();
        let nu = eig.energies[7] - eig.energies[6];
        // An arbitrary partial rotation, not a special pulse.
        let tau = 0.37 * PI / omega_n;
        let pulse = Pulse::new(nu, 0.0, tau, b1).unwrap();
        let state = RegisterState::level_state(6, eig.clone());
        let out = evolve_pulse(&state, &p, &pulse).unwrap();
        let (d_p, d_q) = two_level_solution(0.0, omega_n, tau, 0.0, 0.0, TwoLevelStart::P);

        let eps_n = omega_n / (4.0 * p.gamma_n * p.delta_b);
        let eps_e = p.gamma_e * b1 * (1.0 - p.j / (4.0 * p.gamma_e * p.delta_b))
            / (4.0 * p.gamma_e * p.delta_b);
        let tol = eps_n.max(eps_e).powi(2) + 1e-6;
        assert!((out.amplitudes[6].norm_sqr() - d_p.norm_sqr()).abs() < tol);
        assert!((out.amplitudes[7].norm_sqr() - d_q.norm_sqr()).abs() < tol);
    }

    #[test]
    fn pulse_composition() {
        // Quarter/three-quarter split so the two durations add back to
        // the total exactly in floating point; level phases reach
        // ~1e6 rad here, which keeps their rounding below the 1e-9
        // amplitude tolerance.
        let (p, eig) = defaults_exact();
        let b1 = 20.0 * nuclear_b1(&p, 33620.0);
        let nu = eig.energies[7] - eig.energies[6];
        let total = 4.0e-6;
        let state = RegisterState::level_state(6, eig.clone());

        let whole = Pulse::new(nu, 0.4, total, b1).unwrap();
        let out_whole = evolve_pulse(&state, &p, &whole).unwrap();

        let t1 = 0.25 * total;
        let first = Pulse::new(nu, 0.4, t1, b1).unwrap();
        let second = Pulse::new(nu, 0.4, total - t1, b1).unwrap();
        let mid = evolve_pulse(&state, &p, &first).unwrap();
        let out_split = evolve_pulse(&mid, &p, &second).unwrap();

        for (a, b) in out_whole.amplitudes.iter().zip(out_split.amplitudes.iter()) {
            assert!((a - b).norm() < 1e-9);
        }
        assert!((out_split.clock - total).abs() < 1e-18);
    }

    #[test]
    fn populations_independent_of_pulse_phase() {
        let (p, eig) = defaults_exact();
        let b1 = nuclear_b1(&p, 33620.0);
        let omega_n = p.gamma_n * b1 * (1.0 + p.a / (2.0 * p.gamma_n * p.b));
        let nu = eig.energies[7] - eig.energies[6];
        let state = RegisterState::level_state(6, eig.clone());
        let mut reference: Option<[f64; DIM]> = None;
        for phi in [0.0, 0.9, 2.4] {
            let pulse = Pulse::new(nu, phi, PI / omega_n, b1).unwrap();
            let out = evolve_pulse(&state, &p, &pulse).unwrap();
            let pops: [f64; DIM] = std::array::from_fn(|i| out.amplitudes[i].norm_sqr());
            if let Some(r) = reference {
                for (a, b) in pops.iter().zip(r.iter()) {
                    assert!((a - b).abs() < 1e-9);
                }
            } else {
                reference = Some(pops);
            }
        }
    }

    #[test]
    fn evolution_is_unitary() {
        let (p, eig) = defaults_exact();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut amplitudes = [Complex64::ZERO; DIM];
        let mut norm = 0.0;
        for a in amplitudes.iter_mut() {
            *a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            norm += a.norm_sqr();
        }
        for a in amplitudes.iter_mut() {
            *a /= norm.sqrt();
        }
        let state = RegisterState {
            amplitudes,
            frame: Frame::Lab,
            clock: 0.0,
            basis: eig,
        };
        let pulse = Pulse::new(TWO_PI * 116.0e6, 0.3, 5.0e-5, 3.0e-5).unwrap();
        let out = evolve_pulse(&state, &p, &pulse).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
    }
}
