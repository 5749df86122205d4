//! Physical parameters, spin operators and the static Hamiltonian.
//!
//! The Hamiltonian of the chain `|n2 e2 e1 n1>` is
//!
//! ```text
//! H0 = gamma_e (B1z S1z + B2z S2z) - gamma_n (B1z I1z + B2z I2z)
//!    + A [S1z I1z + S2z I2z + (S1+ I1- + S1- I1+ + S2+ I2- + S2- I2+)/2]
//!    + J [S1z S2z + (S1+ S2- + S1- S2+)/2]
//! ```
//!
//! with `B1z = b - delta_b`, `B2z = b + delta_b`. A circularly polarized
//! RF field of amplitude `B1` couples through
//! `V = gamma_e B1 (S1x + S2x) - gamma_n B1 (I1x + I2x)`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::basis::{sigma_of, BasisIndex, Orientation, SpinId, DIM};
use crate::error::SimError;
use crate::operator::Operator16;

pub const TWO_PI: f64 = 2.0 * PI;

/// Static parameters of the register. Frequencies are angular (rad/s),
/// fields are in tesla.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Electron gyromagnetic ratio, rad/s/T.
    pub gamma_e: f64,
    /// Nuclear gyromagnetic ratio, rad/s/T.
    pub gamma_n: f64,
    /// Hyperfine constant, rad/s.
    pub a: f64,
    /// Exchange constant, rad/s.
    pub j: f64,
    /// Mean field (B2z + B1z)/2, T.
    pub b: f64,
    /// Half field difference (B2z - B1z)/2, T.
    pub delta_b: f64,
}

impl SystemParams {
    pub fn new(
        gamma_e: f64,
        gamma_n: f64,
        a: f64,
        j: f64,
        b: f64,
        delta_b: f64,
    ) -> Result<Self, SimError> {
        let p = SystemParams {
            gamma_e,
            gamma_n,
            a,
            j,
            b,
            delta_b,
        };
        if !(gamma_e > 0.0 && gamma_n > 0.0 && a > 0.0 && b > 0.0) {
            return Err(SimError::InvalidParams(
                "gamma_e, gamma_n, A and b must be positive".into(),
            ));
        }
        if !(j >= 0.0 && delta_b >= 0.0) {
            return Err(SimError::InvalidParams(
                "J and delta_b must be non-negative".into(),
            ));
        }
        if p.b1z() <= 0.0 {
            return Err(SimError::InvalidParams(
                "B1z = b - delta_b must be positive".into(),
            ));
        }
        Ok(p)
    }

    /// Default register: gamma_e/2pi = 28.1818 GHz/T (93 GHz electron
    /// Larmor at 3.3 T), gamma_n/2pi = 17.25144 MHz/T, A/2pi = 116 MHz,
    /// J/2pi = 0.5 MHz, b = 3.3 T, 2*delta_b = 1 mT.
    pub fn defaults() -> Self {
        SystemParams::new(
            TWO_PI * 28.1818e9,
            TWO_PI * 17.25144e6,
            TWO_PI * 116.0e6,
            TWO_PI * 0.5e6,
            3.3,
            0.5e-3,
        )
        .expect("default parameters are valid")
    }

    /// Field at atom 1, `b - delta_b`.
    pub fn b1z(&self) -> f64 {
        self.b - self.delta_b
    }

    /// Field at atom 2, `b + delta_b`.
    pub fn b2z(&self) -> f64 {
        self.b + self.delta_b
    }

    pub fn with_j(mut self, j: f64) -> Self {
        self.j = j;
        self
    }

    pub fn with_delta_b(mut self, delta_b: f64) -> Self {
        self.delta_b = delta_b;
        self
    }
}

/// `<bra| s^z_spin |ket>` contribution helper: z projection of one spin.
fn zproj(i: BasisIndex, spin: SpinId) -> f64 {
    i.label_of(spin).z_projection()
}

/// Builds the static Hamiltonian `H0` in the product basis.
///
/// The result is real symmetric, commutes with the total-`Sigma`
/// operator, and restricted to each `Sigma` sector reproduces the
/// closed-form sector blocks.
pub fn build_h0(p: &SystemParams) -> Operator16 {
    let mut h = Operator16::zero();
    let gamma_e_b1 = p.gamma_e * p.b1z();
    let gamma_e_b2 = p.gamma_e * p.b2z();
    let gamma_n_b1 = p.gamma_n * p.b1z();
    let gamma_n_b2 = p.gamma_n * p.b2z();

    for idx in 0..DIM {
        let i = BasisIndex(idx);
        let s1 = zproj(i, SpinId::E1);
        let s2 = zproj(i, SpinId::E2);
        let i1 = zproj(i, SpinId::N1);
        let i2 = zproj(i, SpinId::N2);

        let diag = gamma_e_b1 * s1 + gamma_e_b2 * s2 - gamma_n_b1 * i1 - gamma_n_b2 * i2
            + p.a * (s1 * i1 + s2 * i2)
            + p.j * s1 * s2;
        h.set(idx, idx, Complex64::new(diag, 0.0));

        // Hyperfine flip-flop (A/2) within each atom: S+ I- + S- I+
        // connects states where the electron and its nucleus point in
        // opposite directions.
        for (e, n) in [(SpinId::E1, SpinId::N1), (SpinId::E2, SpinId::N2)] {
            if i.label_of(e) == Orientation::Down && i.label_of(n) == Orientation::Up {
                let j_idx = i.with_flipped(e).with_flipped(n);
                h.add_hermitian_pair(j_idx.0, idx, Complex64::new(0.5 * p.a, 0.0));
            }
        }
        // Exchange flip-flop (J/2) between the electrons.
        if i.label_of(SpinId::E1) == Orientation::Down && i.label_of(SpinId::E2) == Orientation::Up
        {
            let j_idx = i.with_flipped(SpinId::E1).with_flipped(SpinId::E2);
            h.add_hermitian_pair(j_idx.0, idx, Complex64::new(0.5 * p.j, 0.0));
        }
    }
    h
}

/// Builds the RF coupling operator for amplitude `b1` (tesla):
/// `V = Omega_e^0 (S1x + S2x) - Omega_n^0 (I1x + I2x)` with
/// `Omega_e^0 = gamma_e B1`, `Omega_n^0 = gamma_n B1`.
///
/// Nonzero entries connect states differing by exactly one spin flip:
/// `+Omega_e^0 / 2` for an electron flip, `-Omega_n^0 / 2` for a
/// nuclear flip, so every entry changes `Sigma` by one.
pub fn build_v(p: &SystemParams, b1: f64) -> Operator16 {
    let mut v = Operator16::zero();
    let omega_e0 = p.gamma_e * b1;
    let omega_n0 = p.gamma_n * b1;
    for idx in 0..DIM {
        let i = BasisIndex(idx);
        for spin in SpinId::ALL {
            // Count each unordered pair once.
            if i.label_of(spin) == Orientation::Up {
                let j_idx = i.with_flipped(spin);
                let amp = if spin.is_electron() {
                    0.5 * omega_e0
                } else {
                    -0.5 * omega_n0
                };
                v.add_hermitian_pair(j_idx.0, idx, Complex64::new(amp, 0.0));
            }
        }
    }
    v
}

/// The diagonal total-`Sigma` operator.
pub fn build_sigma() -> Operator16 {
    let mut s = Operator16::zero();
    for idx in 0..DIM {
        s.set(
            idx,
            idx,
            Complex64::new(sigma_of(BasisIndex(idx)) as f64, 0.0),
        );
    }
    s
}

/// Extra context needed by the operating-condition checks beyond the
/// register parameters themselves.
#[derive(Debug, Clone, Copy)]
pub struct ValidationContext {
    /// RF amplitude of the slowest (nuclear) pulses, T.
    pub b1: f64,
    /// Electron transverse relaxation (coherence) time, s.
    pub t2: f64,
    /// Operating temperature, K.
    pub temperature: f64,
    /// Permanent external field during electron relaxation, T.
    pub b0: f64,
    /// Transverse stray field during electron relaxation, T.
    pub bx: f64,
}

impl ValidationContext {
    /// `b1` is the amplitude of a nuclear pi pulse at the default
    /// suppression order; the CLI recomputes it from the compiled gates.
    pub fn defaults() -> Self {
        ValidationContext {
            b1: 4.954e-5,
            t2: 60.0e-3,
            temperature: 1.0,
            b0: 3.3,
            bx: 0.5e-4,
        }
    }
}

/// Boltzmann constant over hbar, rad/s per kelvin.
pub const KB_OVER_HBAR: f64 = 1.380649e-23 / 1.054571817e-34;

/// Outcome of one operating-condition check.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub index: usize,
    pub description: String,
    /// Ratio tested against the threshold below.
    pub ratio: f64,
    /// "<= 0.1" for a much-less-than condition, ">= 10" for
    /// much-greater-than, the explicit bound for condition 6.
    pub threshold: String,
    pub pass: bool,
}

/// Factor implementing "much less / much greater than".
pub const MUCH_FACTOR: f64 = 10.0;

/// Evaluates the six operating conditions of the architecture and
/// returns one report per condition; never fails.
///
/// 1. `Omega_n << 2 gamma_n (B2z - B1z)` (selective nuclear pulses)
/// 2. `tau_CN << T2` (electron stays coherent through a nuclear gate)
/// 3. `gamma_e Bz >> kB T / hbar` (electrons polarize)
/// 4. `gamma_e (B2z - B1z) >> J`
/// 5. `|gamma_e (B2z - B1z) - A| >> J`
/// 6. `Bx <= 5 gauss` or `B0 >~ B0_min = A / (2 gamma_n)`
pub fn validate_params(p: &SystemParams, ctx: &ValidationContext) -> Vec<ConditionReport> {
    let mut out = Vec::with_capacity(6);
    let two_db = 2.0 * p.delta_b;

    // Corrected nuclear Rabi frequency at the given RF amplitude.
    let omega_n = p.gamma_n * ctx.b1 * (1.0 + p.a / (2.0 * p.gamma_n * p.b));
    let r1 = omega_n / (2.0 * p.gamma_n * two_db);
    out.push(ConditionReport {
        index: 1,
        description: "Omega_n << 2 gamma_n (B2z - B1z)".into(),
        ratio: r1,
        threshold: format!("<= {}", 1.0 / MUCH_FACTOR),
        pass: r1 <= 1.0 / MUCH_FACTOR,
    });

    let tau_cn = PI / omega_n;
    let r2 = tau_cn / ctx.t2;
    out.push(ConditionReport {
        index: 2,
        description: "tau_CN << T2".into(),
        ratio: r2,
        threshold: format!("<= {}", 1.0 / MUCH_FACTOR),
        pass: r2 <= 1.0 / MUCH_FACTOR,
    });

    let r3 = p.gamma_e * p.b / (KB_OVER_HBAR * ctx.temperature);
    out.push(ConditionReport {
        index: 3,
        description: "gamma_e Bz >> kB T / hbar".into(),
        ratio: r3,
        threshold: format!(">= {MUCH_FACTOR}"),
        pass: r3 >= MUCH_FACTOR,
    });

    let r4 = p.gamma_e * two_db / p.j;
    out.push(ConditionReport {
        index: 4,
        description: "gamma_e (B2z - B1z) >> J".into(),
        ratio: r4,
        threshold: format!(">= {MUCH_FACTOR}"),
        pass: r4 >= MUCH_FACTOR,
    });

    let r5 = (p.gamma_e * two_db - p.a).abs() / p.j;
    out.push(ConditionReport {
        index: 5,
        description: "|gamma_e (B2z - B1z) - A| >> J".into(),
        ratio: r5,
        threshold: format!(">= {MUCH_FACTOR}"),
        pass: r5 >= MUCH_FACTOR,
    });

    // Condition 6 is a disjunction; report the branch that applies.
    let bx_gauss = ctx.bx / 1.0e-4;
    let b0_min = p.a / (2.0 * p.gamma_n);
    let (r6, threshold, pass) = if bx_gauss <= 5.0 {
        (bx_gauss / 5.0, "<= 1 (Bx / 5 gauss)".to_string(), true)
    } else {
        let ratio = ctx.b0 / b0_min;
        (ratio, ">= 0.98 (B0 / B0_min)".to_string(), ratio >= 0.98)
    };
    out.push(ConditionReport {
        index: 6,
        description: "Bx <= 5 gauss or B0 >~ B0_min".into(),
        ratio: r6,
        threshold,
        pass,
    });

    out
}
