//! Classical nuclear-moment dynamics during electron-spin relaxation.
//!
//! While an electron relaxes, its hyperfine field sweeps the effective
//! z field seen by the nucleus, `Bz(t) = B0 - (A / gamma_n) Sz(t)` with
//! the linear ramp `Sz(t) = Sz0 (1 - 2 t / Tc)`. If that sweep crosses
//! zero slowly on the scale set by a transverse stray field `Bx`
//! (adiabaticity `xi << 1`), the nucleus follows the field and flips;
//! keeping `xi >> 1` or `B0 > B0_min = A / (2 gamma_n)` suppresses the
//! flip. The trajectory integrator advances
//! `dI/dt = gamma_n I x B_eff(t)` by exact rotations about the
//! midpoint field (fixed step, Richardson step check): each step is
//! orthogonal, so |I| is conserved to rounding and no artificial
//! transverse damping can build up over the ~10^7 steps of a sweep.

use crate::error::SimError;
use crate::model::SystemParams;

/// Inputs for one relaxation trajectory.
#[derive(Debug, Clone, Copy)]
pub struct RelaxationScenario {
    /// Permanent field, T.
    pub b0: f64,
    /// Transverse stray field, T.
    pub bx: f64,
    /// Electron relaxation time, s.
    pub tc: f64,
    /// Initial electron z projection, in [-1/2, 1/2].
    pub sz0: f64,
    /// Initial nuclear z projection, +-1/2 (transverse components zero).
    pub iz0: f64,
    pub gamma_n: f64,
    pub a: f64,
}

impl RelaxationScenario {
    pub fn new(p: &SystemParams, b0: f64, bx: f64, tc: f64, sz0: f64, iz0: f64) -> Result<Self, SimError> {
        if !(tc > 0.0) {
            return Err(SimError::InvalidParams("Tc must be positive".into()));
        }
        if !(-0.5..=0.5).contains(&sz0) {
            return Err(SimError::InvalidParams("Sz0 must lie in [-1/2, 1/2]".into()));
        }
        if iz0.abs() != 0.5 {
            return Err(SimError::InvalidParams("Iz0 must be +-1/2".into()));
        }
        if bx < 0.0 {
            return Err(SimError::InvalidParams("Bx must be non-negative".into()));
        }
        Ok(RelaxationScenario {
            b0,
            bx,
            tc,
            sz0,
            iz0,
            gamma_n: p.gamma_n,
            a: p.a,
        })
    }

    pub fn defaults(p: &SystemParams) -> Self {
        RelaxationScenario::new(p, 3.3, 0.5e-4, 6.0e-3, 0.5, -0.5).expect("valid defaults")
    }
}

/// Effective z field at time `t`: `B0 - (A / gamma_n) Sz0 (1 - 2t/Tc)`.
pub fn field_profile(sc: &RelaxationScenario, t: f64) -> f64 {
    let sz = sc.sz0 * (1.0 - 2.0 * t / sc.tc);
    sc.b0 - sc.a / sc.gamma_n * sz
}

/// Adiabaticity parameter `xi = |dBz/dt| / (gamma_n Bx^2)`; infinite
/// when `Bx = 0` (the sweep is never adiabatic without a transverse
/// field).
pub fn adiabaticity(sc: &RelaxationScenario) -> f64 {
    let dbz_dt = (sc.a / sc.gamma_n) * 2.0 * sc.sz0.abs() / sc.tc;
    if sc.bx == 0.0 {
        return f64::INFINITY;
    }
    dbz_dt / (sc.gamma_n * sc.bx * sc.bx)
}

/// Threshold field `B0_min = A / (2 gamma_n)` and the ensemble fraction
/// `eta = max(0, (1 - B0/B0_min)/2)` of spins whose sweep crosses zero.
pub fn ensemble_fraction(p: &SystemParams, b0: f64) -> (f64, f64) {
    let b0_min = p.a / (2.0 * p.gamma_n);
    let eta = (0.5 * (1.0 - b0 / b0_min)).max(0.0);
    (eta, b0_min)
}

/// Step-size control for the trajectory integrator.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    /// Starting step, s.
    pub initial_step: f64,
    /// Relative agreement required between a step and its half.
    pub rel_tol: f64,
    /// Halvings to attempt before giving up.
    pub max_halvings: u32,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            initial_step: 1.0e-9,
            rel_tol: 0.01,
            max_halvings: 6,
        }
    }
}

/// Integrated trajectory and its summary numbers.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Sampled `(t, Ix, Iy, Iz)` rows, including both endpoints.
    pub samples: Vec<[f64; 4]>,
    /// Relative z-projection loss `(Iz(0) - Iz(Tc)) / Iz(0)`.
    pub delta_iz: f64,
    /// True when `Iz` changed sign over the sweep.
    pub flipped: bool,
    /// The accepted integration step, s.
    pub step: f64,
    /// Worst relative deviation of |I| from 1/2 along the trajectory.
    pub norm_drift: f64,
}

#[derive(Clone, Copy)]
struct Vec3([f64; 3]);

impl Vec3 {
    fn cross(self, other: Vec3) -> Vec3 {
        let [ax, ay, az] = self.0;
        let [bx, by, bz] = other.0;
        Vec3([ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx])
    }

    fn scaled(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    fn plus(self, other: Vec3) -> Vec3 {
        Vec3([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }

    fn dot(self, other: Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// One step: rotate `I` about the field at the step midpoint by the
/// precession angle `-gamma_n |B| h` (Rodrigues formula). `dI/dt =
/// gamma_n I x B` is clockwise rotation about `B` for gamma_n > 0.
fn rotation_step(sc: &RelaxationScenario, t_mid: f64, i: Vec3, h: f64) -> Vec3 {
    let b = Vec3([sc.bx, 0.0, field_profile(sc, t_mid)]);
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return i;
    }
    let axis = b.scaled(1.0 / b_norm);
    let angle = -sc.gamma_n * b_norm * h;
    let (sin, cos) = angle.sin_cos();
    i.scaled(cos)
        .plus(axis.cross(i).scaled(sin))
        .plus(axis.scaled(axis.dot(i) * (1.0 - cos)))
}

fn integrate_fixed(sc: &RelaxationScenario, step: f64, samples: usize) -> (Vec<[f64; 4]>, f64, f64) {
    let n_steps = (sc.tc / step).ceil() as usize;
    let h = sc.tc / n_steps as f64;
    let sample_every = (n_steps / samples.max(1)).max(1);

    let mut i = Vec3([0.0, 0.0, sc.iz0]);
    let mut out = Vec::with_capacity(samples + 2);
    out.push([0.0, i.0[0], i.0[1], i.0[2]]);
    let mut norm_drift = 0.0f64;

    for k in 0..n_steps {
        let t_mid = (k as f64 + 0.5) * h;
        i = rotation_step(sc, t_mid, i, h);
        // Rotations conserve |I|; rescale away the floating-point
        // residue so it cannot random-walk over 10^7 steps.
        let norm = i.norm();
        norm_drift = norm_drift.max((norm - 0.5).abs() / 0.5);
        i = i.scaled(0.5 / norm);

        if (k + 1) % sample_every == 0 || k + 1 == n_steps {
            out.push([(k + 1) as f64 * h, i.0[0], i.0[1], i.0[2]]);
        }
    }
    let iz_end = i.0[2];
    (out, iz_end, norm_drift)
}

/// Integrates a trajectory, halving the step until two consecutive
/// resolutions agree on `delta_Iz` to the requested tolerance.
pub fn integrate_trajectory(
    sc: &RelaxationScenario,
    control: &StepControl,
    samples: usize,
) -> Result<Trajectory, SimError> {
    let mut step = control.initial_step;
    let (_, mut iz_end, mut drift) = integrate_fixed(sc, step, samples);
    let mut last_rel_change = f64::INFINITY;

    for _ in 0..=control.max_halvings {
        let half = step / 2.0;
        let (rows_h, iz_end_h, drift_h) = integrate_fixed(sc, half, samples);
        let delta = (sc.iz0 - iz_end) / sc.iz0;
        let delta_h = (sc.iz0 - iz_end_h) / sc.iz0;
        last_rel_change = (delta - delta_h).abs() / delta_h.abs().max(1e-9);
        if last_rel_change <= control.rel_tol {
            return Ok(Trajectory {
                samples: rows_h,
                delta_iz: delta_h,
                flipped: iz_end_h.signum() != sc.iz0.signum(),
                step: half,
                norm_drift: drift_h.max(drift),
            });
        }
        step = half;
        iz_end = iz_end_h;
        drift = drift_h;
    }
    Err(SimError::StepTooCoarse {
        step,
        rel_change: last_rel_change,
        tol: control.rel_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;

    fn scenario(bx_gauss: f64, b0: f64, tc: f64) -> RelaxationScenario {
        let p = SystemParams::defaults();
        RelaxationScenario::new(&p, b0, bx_gauss * 1.0e-4, tc, 0.5, -0.5).unwrap()
    }

    #[test]
    fn field_profile_reference_points() {
        let sc = scenario(0.5, 3.3, 6.0e-3);
        // Mid-sweep the electron contribution vanishes.
        assert!((field_profile(&sc, sc.tc / 2.0) - sc.b0).abs() < 1e-12);
        // At B0 = B0_min the field starts exactly at zero.
        let p = SystemParams::defaults();
        let (_, b0_min) = ensemble_fraction(&p, 3.3);
        let at_min = RelaxationScenario::new(&p, b0_min, 0.5e-4, 6.0e-3, 0.5, -0.5).unwrap();
        assert!(field_profile(&at_min, 0.0).abs() < 1e-12);
        // Defaults start slightly negative: 3.3 - 3.362 T.
        assert!((field_profile(&sc, 0.0) + 0.0620375).abs() < 1e-4);
    }

    #[test]
    fn adiabaticity_reference_values() {
        // xi ~ 6.2e3 / (Tc_ms * Bx_gauss^2)
        let xi_small = adiabaticity(&scenario(0.5, 3.3, 6.0e-3));
        assert!((xi_small - 4.1e3).abs() / 4.1e3 < 0.03, "xi {xi_small}");
        let xi_large = adiabaticity(&scenario(50.0, 3.3, 6.0e-3));
        assert!((xi_large - 0.41).abs() / 0.41 < 0.03, "xi {xi_large}");
        // Quadrupling Bx divides xi by 16, exactly.
        let xi_4 = adiabaticity(&scenario(2.0, 3.3, 6.0e-3));
        assert!((adiabaticity(&scenario(0.5, 3.3, 6.0e-3)) / xi_4 - 16.0).abs() < 1e-9);
        // No transverse field: never adiabatic.
        assert!(adiabaticity(&scenario(0.0, 3.3, 6.0e-3)).is_infinite());
    }

    #[test]
    fn ensemble_fraction_reference_values() {
        let p = SystemParams::defaults();
        let (eta, b0_min) = ensemble_fraction(&p, 3.3);
        assert!((b0_min - 3.36).abs() < 0.01, "B0_min {b0_min}");
        assert!((eta - 0.009).abs() < 0.001, "eta {eta}");
        let (eta_above, _) = ensemble_fraction(&p, 3.5);
        assert_eq!(eta_above, 0.0);
    }

    #[test]
    fn nonadiabatic_sweep_preserves_the_spin() {
        // Earth-field case: xi ~ 4.1e3, delta_Iz ~ 7.5e-4.
        let sc = scenario(0.5, 3.3, 6.0e-3);
        let traj = integrate_trajectory(&sc, &StepControl::default(), 200).unwrap();
        assert!(!traj.flipped);
        assert!(
            (traj.delta_iz - 7.5e-4).abs() / 7.5e-4 < 0.3,
            "delta_Iz {}",
            traj.delta_iz
        );
        assert!(traj.norm_drift < 1e-9, "norm drift {}", traj.norm_drift);
    }

    #[test]
    fn adiabatic_sweep_flips_the_spin() {
        let sc = scenario(50.0, 3.3, 6.0e-3);
        let traj = integrate_trajectory(&sc, &StepControl::default(), 200).unwrap();
        assert!(traj.flipped);
        let iz_end = traj.samples.last().unwrap()[3];
        assert!((iz_end - 0.5).abs() < 0.05, "Iz(Tc) {iz_end}");
    }

    #[test]
    fn severity_grows_as_adiabaticity_falls() {
        // Over Bx in {0.5, 5, 50} gauss, xi drops by 100x each step and
        // the sweep damages Iz monotonically more, up to a full flip.
        let control = StepControl::default();
        let weak = integrate_trajectory(&scenario(0.5, 3.3, 6.0e-3), &control, 10).unwrap();
        let medium = integrate_trajectory(&scenario(5.0, 3.3, 6.0e-3), &control, 10).unwrap();
        let strong = integrate_trajectory(&scenario(50.0, 3.3, 6.0e-3), &control, 10).unwrap();
        assert!(!weak.flipped && !medium.flipped);
        assert!(weak.delta_iz.abs() < medium.delta_iz.abs());
        assert!(strong.flipped);
        assert!(medium.delta_iz.abs() < strong.delta_iz.abs());
        // Medium case reference: delta_Iz ~ 0.075.
        assert!((medium.delta_iz - 0.075).abs() / 0.075 < 0.3);
    }

    #[test]
    fn coarse_step_without_halvings_is_rejected() {
        let sc = scenario(5.0, 3.3, 1.0e-4);
        let control = StepControl {
            initial_step: 2.0e-8,
            rel_tol: 1e-6,
            max_halvings: 0,
        };
        assert!(matches!(
            integrate_trajectory(&sc, &control, 10),
            Err(SimError::StepTooCoarse { .. })
        ));
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        let p = SystemParams::defaults();
        assert!(RelaxationScenario::new(&p, 3.3, 0.5e-4, 0.0, 0.5, -0.5).is_err());
        assert!(RelaxationScenario::new(&p, 3.3, 0.5e-4, 1e-3, 0.7, -0.5).is_err());
        assert!(RelaxationScenario::new(&p, 3.3, 0.5e-4, 1e-3, 0.5, -0.3).is_err());
        assert!(RelaxationScenario::new(&p, 3.3, -1e-4, 1e-3, 0.5, -0.5).is_err());
    }
}
