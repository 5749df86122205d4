//! Plain `key = value` configuration with `#` comments.
//!
//! Unknown keys, duplicate keys and malformed values are errors carrying
//! the line number. All physical keys are in display units (T, mT, MHz,
//! GHz/T, ms, gauss, ns); conversion to internal angular frequencies
//! happens once, at [`RunConfig::params`].

use std::fmt::Write as _;
use std::str::FromStr;

use spinreg::eigen::EnergySource;
use spinreg::model::{SystemParams, ValidationContext, TWO_PI};
use spinreg::protocol::GateKs;
use spinreg::SimError;

#[derive(Debug, Clone)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Complete run configuration in display units.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub b_t: f64,
    pub delta_b_mt: f64,
    pub a_mhz: f64,
    pub j_mhz: f64,
    pub gamma_e_ghz_per_t: f64,
    pub gamma_n_mhz_per_t: f64,
    pub k_e: u32,
    pub k_e_prime: u32,
    pub k_n: u32,
    pub energy_source: EnergySource,
    pub seed: u64,
    pub realizations: usize,
    /// Exchange sweep grid, J/2pi in MHz.
    pub sweep_j_mhz: Vec<f64>,
    /// Gradient sweep: full difference 2*delta_b in mT, log spaced.
    pub sweep_db_min_mt: f64,
    pub sweep_db_max_mt: f64,
    pub sweep_db_points: usize,
    /// Exchange used during the gradient sweep, MHz.
    pub sweep_db_j_mhz: f64,
    pub relax_b0_t: f64,
    pub relax_bx_gauss: f64,
    pub relax_tc_ms: f64,
    pub relax_sz0: f64,
    pub relax_iz0: f64,
    pub relax_step_ns: f64,
    pub relax_samples: usize,
    pub temperature_k: f64,
    pub t2_ms: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            b_t: 3.3,
            delta_b_mt: 0.5,
            a_mhz: 116.0,
            j_mhz: 0.5,
            gamma_e_ghz_per_t: 28.1818,
            gamma_n_mhz_per_t: 17.25144,
            k_e: 103,
            k_e_prime: 1,
            k_n: 33620,
            energy_source: EnergySource::Perturbative2,
            seed: 12345,
            realizations: 100,
            sweep_j_mhz: vec![0.1, 0.2, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0],
            sweep_db_min_mt: 0.1,
            sweep_db_max_mt: 5.0,
            sweep_db_points: 25,
            sweep_db_j_mhz: 2.0,
            relax_b0_t: 3.3,
            relax_bx_gauss: 0.5,
            relax_tc_ms: 6.0,
            relax_sz0: 0.5,
            relax_iz0: -0.5,
            relax_step_ns: 1.0,
            relax_samples: 2000,
            temperature_k: 1.0,
            t2_ms: 60.0,
        }
    }
}

fn parse_value<T: FromStr>(line_no: usize, key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| {
        ConfigError(format!(
            "config line {line_no}: invalid value `{value}` for key `{key}`: {e}"
        ))
    })
}

fn parse_list(line_no: usize, key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|item| parse_value::<f64>(line_no, key, item.trim()))
        .collect()
}

impl RunConfig {
    /// Parses a config file on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        // The gradient pair is an alternative way to set delta_b.
        let mut grad_t_per_m: Option<f64> = None;
        let mut spacing_nm: Option<f64> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError(format!("config line {line_no}: expected `key = value`"))
            })?;
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError(format!(
                    "config line {line_no}: duplicate key `{key}`"
                )));
            }
            seen.push(key.to_string());

            match key {
                "b_T" => cfg.b_t = parse_value(line_no, key, value)?,
                "delta_b_mT" => cfg.delta_b_mt = parse_value(line_no, key, value)?,
                "A_MHz" => cfg.a_mhz = parse_value(line_no, key, value)?,
                "J_MHz" => cfg.j_mhz = parse_value(line_no, key, value)?,
                "gamma_e_GHz_per_T" => cfg.gamma_e_ghz_per_t = parse_value(line_no, key, value)?,
                "gamma_n_MHz_per_T" => cfg.gamma_n_mhz_per_t = parse_value(line_no, key, value)?,
                "grad_T_per_m" => grad_t_per_m = Some(parse_value(line_no, key, value)?),
                "spacing_nm" => spacing_nm = Some(parse_value(line_no, key, value)?),
                "K_e" => cfg.k_e = parse_value(line_no, key, value)?,
                "K_e_prime" => cfg.k_e_prime = parse_value(line_no, key, value)?,
                "K_n" => cfg.k_n = parse_value(line_no, key, value)?,
                "energy_source" => {
                    cfg.energy_source = value.parse::<EnergySource>().map_err(|e| {
                        ConfigError(format!("config line {line_no}: {e}"))
                    })?
                }
                "seed" => cfg.seed = parse_value(line_no, key, value)?,
                "realizations" => cfg.realizations = parse_value(line_no, key, value)?,
                "sweep_j_MHz" => cfg.sweep_j_mhz = parse_list(line_no, key, value)?,
                "sweep_db_min_mT" => cfg.sweep_db_min_mt = parse_value(line_no, key, value)?,
                "sweep_db_max_mT" => cfg.sweep_db_max_mt = parse_value(line_no, key, value)?,
                "sweep_db_points" => cfg.sweep_db_points = parse_value(line_no, key, value)?,
                "sweep_db_J_MHz" => cfg.sweep_db_j_mhz = parse_value(line_no, key, value)?,
                "relax_B0_T" => cfg.relax_b0_t = parse_value(line_no, key, value)?,
                "relax_Bx_gauss" => cfg.relax_bx_gauss = parse_value(line_no, key, value)?,
                "relax_Tc_ms" => cfg.relax_tc_ms = parse_value(line_no, key, value)?,
                "relax_Sz0" => cfg.relax_sz0 = parse_value(line_no, key, value)?,
                "relax_Iz0" => cfg.relax_iz0 = parse_value(line_no, key, value)?,
                "relax_step_ns" => cfg.relax_step_ns = parse_value(line_no, key, value)?,
                "relax_samples" => cfg.relax_samples = parse_value(line_no, key, value)?,
                "temperature_K" => cfg.temperature_k = parse_value(line_no, key, value)?,
                "T2_ms" => cfg.t2_ms = parse_value(line_no, key, value)?,
                other => {
                    return Err(ConfigError(format!(
                        "config line {line_no}: unknown key `{other}`"
                    )))
                }
            }
        }

        match (grad_t_per_m, spacing_nm) {
            (None, None) => {}
            (Some(grad), Some(spacing)) => {
                if seen.iter().any(|k| k == "delta_b_mT") {
                    return Err(ConfigError(
                        "config: delta_b_mT conflicts with grad_T_per_m/spacing_nm".into(),
                    ));
                }
                // Full difference 2*delta_b = gradient * spacing.
                cfg.delta_b_mt = grad * spacing * 1.0e-9 / 2.0 * 1.0e3;
            }
            _ => {
                return Err(ConfigError(
                    "config: grad_T_per_m and spacing_nm must be given together".into(),
                ))
            }
        }
        Ok(cfg)
    }

    /// System parameters in internal units (rad/s, T).
    pub fn params(&self) -> Result<SystemParams, SimError> {
        SystemParams::new(
            TWO_PI * self.gamma_e_ghz_per_t * 1.0e9,
            TWO_PI * self.gamma_n_mhz_per_t * 1.0e6,
            TWO_PI * self.a_mhz * 1.0e6,
            TWO_PI * self.j_mhz * 1.0e6,
            self.b_t,
            self.delta_b_mt * 1.0e-3,
        )
    }

    pub fn gate_ks(&self) -> GateKs {
        GateKs {
            k_e: self.k_e,
            k_e_prime: self.k_e_prime,
            k_n: self.k_n,
        }
    }

    /// Validation context; `b1` is the compiled nuclear-gate amplitude.
    pub fn validation_context(&self, b1: f64) -> ValidationContext {
        ValidationContext {
            b1,
            t2: self.t2_ms * 1.0e-3,
            temperature: self.temperature_k,
            b0: self.relax_b0_t,
            bx: self.relax_bx_gauss * 1.0e-4,
        }
    }

    /// Log-spaced gradient sweep grid, as internal `delta_b` in tesla.
    pub fn db_sweep_grid(&self) -> Vec<f64> {
        let n = self.sweep_db_points.max(1);
        let lo = (self.sweep_db_min_mt * 1.0e-3).ln();
        let hi = (self.sweep_db_max_mt * 1.0e-3).ln();
        (0..n)
            .map(|i| {
                let f = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                // Full difference 2*delta_b is log spaced; store delta_b.
                (lo + f * (hi - lo)).exp() / 2.0
            })
            .collect()
    }

    /// Exchange sweep grid in rad/s.
    pub fn j_sweep_grid(&self) -> Vec<f64> {
        self.sweep_j_mhz
            .iter()
            .map(|mhz| TWO_PI * mhz * 1.0e6)
            .collect()
    }

    /// Renders the effective configuration in the same `key = value`
    /// format it is parsed from; parsing the dump reproduces `self`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# effective configuration (all keys explicit)");
        let _ = writeln!(s, "b_T = {}", self.b_t);
        let _ = writeln!(s, "delta_b_mT = {}", self.delta_b_mt);
        let _ = writeln!(s, "A_MHz = {}", self.a_mhz);
        let _ = writeln!(s, "J_MHz = {}", self.j_mhz);
        let _ = writeln!(s, "gamma_e_GHz_per_T = {}", self.gamma_e_ghz_per_t);
        let _ = writeln!(s, "gamma_n_MHz_per_T = {}", self.gamma_n_mhz_per_t);
        let _ = writeln!(s, "K_e = {}", self.k_e);
        let _ = writeln!(s, "K_e_prime = {}", self.k_e_prime);
        let _ = writeln!(s, "K_n = {}", self.k_n);
        let _ = writeln!(s, "energy_source = {}", self.energy_source.as_str());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "realizations = {}", self.realizations);
        let list = self
            .sweep_j_mhz
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(s, "sweep_j_MHz = {list}");
        let _ = writeln!(s, "sweep_db_min_mT = {}", self.sweep_db_min_mt);
        let _ = writeln!(s, "sweep_db_max_mT = {}", self.sweep_db_max_mt);
        let _ = writeln!(s, "sweep_db_points = {}", self.sweep_db_points);
        let _ = writeln!(s, "sweep_db_J_MHz = {}", self.sweep_db_j_mhz);
        let _ = writeln!(s, "relax_B0_T = {}", self.relax_b0_t);
        let _ = writeln!(s, "relax_Bx_gauss = {}", self.relax_bx_gauss);
        let _ = writeln!(s, "relax_Tc_ms = {}", self.relax_tc_ms);
        let _ = writeln!(s, "relax_Sz0 = {}", self.relax_sz0);
        let _ = writeln!(s, "relax_Iz0 = {}", self.relax_iz0);
        let _ = writeln!(s, "relax_step_ns = {}", self.relax_step_ns);
        let _ = writeln!(s, "relax_samples = {}", self.relax_samples);
        let _ = writeln!(s, "temperature_K = {}", self.temperature_k);
        let _ = writeln!(s, "T2_ms = {}", self.t2_ms);
        s
    }
}
