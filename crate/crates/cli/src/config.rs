//! Run configuration: a flat document of dotted `section.key = value` lines.
//!
//! Units at this boundary are the human-scale ones named in each key (nm,
//! eV, meV, pm, ps, ns, pA); conversion to the library's SI/eV/nm units
//! happens only in this module.

use std::fmt;

use fullerene_stm::physics::{
    calibrate_baseline, BarrierModel, Calibration, DeviceGeometry, Mode, Spin, SpinAlignment, SpinManifold,
};
use fullerene_stm::readout::{DetectabilityCriterion, NoiseModel, ReadoutSettings};
use fullerene_stm::stochastic::{
    ArrivalModel, ArrivalProcess, Estimator, MixedSpinState, Scenario, SpinSource, VibrationModel,
};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    #[default]
    Paper,
    Exact,
    Both,
}

impl ModeChoice {
    pub fn modes(self) -> Vec<Mode> {
        match self {
            ModeChoice::Paper => vec![Mode::PaperLinearized],
            ModeChoice::Exact => vec![Mode::ExactWkb],
            ModeChoice::Both => vec![Mode::PaperLinearized, Mode::ExactWkb],
        }
    }

    /// The single mode, or an error naming `command` when `both` was chosen.
    pub fn single(self, command: &str) -> Result<Mode, ConfigError> {
        match self {
            ModeChoice::Paper => Ok(Mode::PaperLinearized),
            ModeChoice::Exact => Ok(Mode::ExactWkb),
            ModeChoice::Both => Err(ConfigError::new("mode", format!("`both` is not supported by `{command}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinChoice {
    Up,
    Down,
}

impl From<SpinChoice> for Spin {
    fn from(s: SpinChoice) -> Spin {
        match s {
            SpinChoice::Up => Spin::Up,
            SpinChoice::Down => Spin::Down,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ManifoldChoice {
    #[serde(rename = "1/2")]
    Half,
    #[serde(rename = "3/2")]
    ThreeHalves,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessChoice {
    Normal,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorChoice {
    Counting,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseChoice {
    Counting,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub d1_nm: f64,
    pub d2_nm: f64,
    pub d3_nm: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            d1_nm: DeviceGeometry::DEFAULT_D1_NM,
            d2_nm: DeviceGeometry::DEFAULT_D2_NM,
            d3_nm: DeviceGeometry::DEFAULT_D3_NM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierConfig {
    pub phi1_ev: f64,
    pub phi2_ev: f64,
    pub phi3_ev: f64,
    pub j_mev: f64,
    pub manifold: ManifoldChoice,
}

impl Default for BarrierConfig {
    fn default() -> Self {
        let b = BarrierModel::default();
        Self {
            phi1_ev: b.phi1(),
            phi2_ev: b.phi2(),
            phi3_ev: b.phi3(),
            j_mev: b.exchange() * 1e3,
            manifold: ManifoldChoice::Half,
        }
    }
}

/// Caged spin `F|↑⟩ + G|↓⟩`; `g = 0` is a pure state along `caged`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinConfig {
    pub tip: SpinChoice,
    pub caged: SpinChoice,
    pub g: f64,
}

impl Default for SpinConfig {
    fn default() -> Self {
        Self {
            tip: SpinChoice::Up,
            caged: SpinChoice::Up,
            g: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VibrationConfig {
    /// Peak-to-peak displacement.
    pub delta_pm: f64,
    pub omega_rad_s: f64,
    pub phase_rad: f64,
}

impl Default for VibrationConfig {
    fn default() -> Self {
        Self {
            delta_pm: VibrationModel::DEFAULT_DELTA_NM * 1e3,
            omega_rad_s: VibrationModel::DEFAULT_OMEGA_RAD_S,
            phase_rad: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrivalConfig {
    pub t0_ps: f64,
    pub sigma_ps: f64,
    pub window_ns: f64,
    pub process: ProcessChoice,
}

impl Default for ArrivalConfig {
    fn default() -> Self {
        Self {
            t0_ps: ArrivalModel::DEFAULT_T0_S * 1e12,
            sigma_ps: ArrivalModel::DEFAULT_SIGMA_S * 1e12,
            window_ns: ArrivalModel::DEFAULT_WINDOW_S * 1e9,
            process: ProcessChoice::Normal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub d1_ref_nm: f64,
    pub i0_ref_pa: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            d1_ref_nm: DeviceGeometry::DEFAULT_D1_NM,
            i0_ref_pa: Calibration::DEFAULT_I0_REF_PA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutConfig {
    pub resolution_pa: f64,
    pub noise_floor_pa: f64,
    pub estimator: EstimatorChoice,
    /// Decision threshold; absent means the spin-independent current.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_pa: Option<f64>,
    pub integration_ns: Vec<f64>,
    pub trials: u64,
    pub k_sigma: f64,
    pub noise: NoiseChoice,
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        Self {
            resolution_pa: fullerene_stm::readout::DEFAULT_RESOLUTION_PA,
            noise_floor_pa: Scenario::DEFAULT_NOISE_FLOOR_PA,
            estimator: EstimatorChoice::Counting,
            threshold_pa: None,
            integration_ns: vec![100.0, 1000.0, 3000.0],
            trials: 1000,
            k_sigma: DetectabilityCriterion::DEFAULT_K_SIGMA,
            noise: NoiseChoice::Counting,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub d1_min_nm: f64,
    pub d1_max_nm: f64,
    pub steps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            d1_min_nm: 0.2,
            d1_max_nm: 0.3,
            steps: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    pub duration_ns: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self { duration_ns: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionConfig {
    pub g: f64,
    pub n_events: u64,
    pub trials: u64,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            g: 0.1,
            n_events: 500,
            trials: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    pub tau_e_ps: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self { tau_e_ps: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: ModeChoice,
    #[serde(with = "seed_repr")]
    pub seed: u64,
    pub geometry: GeometryConfig,
    pub barrier: BarrierConfig,
    pub spin: SpinConfig,
    pub vibration: VibrationConfig,
    pub arrival: ArrivalConfig,
    pub calibration: CalibrationConfig,
    pub readout: ReadoutConfig,
    pub sweep: SweepConfig,
    pub trace: TraceConfig,
    pub dispersion: DispersionConfig,
    pub decay: DecayConfig,
    pub output: OutputConfig,
}

/// TOML integers are signed 64-bit, so seeds above `i64::MAX` are written as
/// strings.
mod seed_repr {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        struct SeedVisitor;
        impl Visitor<'_> for SeedVisitor {
            type Value = u64;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a non-negative integer seed")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<u64, E> {
                u64::try_from(v).map_err(|_| E::custom(format!("seed must be non-negative, got {v}")))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<u64, E> {
                Ok(v)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<u64, E> {
                v.parse().map_err(|_| E::custom(format!("invalid seed `{v}`")))
            }
        }
        d.deserialize_any(SeedVisitor)
    }
}

fn parse_error(err: toml::de::Error) -> ConfigError {
    let msg = err.message().to_string();
    // serde names the unknown or mistyped key in backticks; fall back to the
    // whole document.
    let field = msg
        .split('`')
        .nth(1)
        .filter(|_| msg.contains("unknown field"))
        .unwrap_or("config")
        .to_string();
    ConfigError::new(field, msg)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: Table = text.parse().map_err(parse_error)?;
        Self::from_table(table)
    }

    fn from_table(table: Table) -> Result<Self, ConfigError> {
        Value::Table(table.clone()).try_into().map_err(|e| {
            let mut err = parse_error(e);
            if let Some(path) = find_key("", &table, &err.field) {
                err.field = path;
            }
            err
        })
    }

    /// Parses `text` and then applies `key=value` overrides in order.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table: Table = text.parse().map_err(parse_error)?;
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        Self::from_table(table)
    }

    /// Flat `section.key = value` lines, one per leaf.
    pub fn to_dotted(&self) -> String {
        let value = Value::try_from(self).expect("config always serializes");
        let mut out = String::new();
        flatten("", &value, &mut out);
        out
    }

    pub fn geometry(&self) -> Result<DeviceGeometry, ConfigError> {
        let g = &self.geometry;
        positive("geometry.d1_nm", g.d1_nm)?;
        positive("geometry.d2_nm", g.d2_nm)?;
        positive("geometry.d3_nm", g.d3_nm)?;
        DeviceGeometry::new(g.d1_nm, g.d2_nm, g.d3_nm).map_err(|e| ConfigError::new("geometry", e.to_string()))
    }

    pub fn barriers(&self) -> Result<BarrierModel, ConfigError> {
        let b = &self.barrier;
        positive("barrier.phi1_ev", b.phi1_ev)?;
        positive("barrier.phi2_ev", b.phi2_ev)?;
        positive("barrier.phi3_ev", b.phi3_ev)?;
        non_negative("barrier.j_mev", b.j_mev)?;
        let manifold = match b.manifold {
            ManifoldChoice::Half => SpinManifold::Half,
            ManifoldChoice::ThreeHalves => SpinManifold::ThreeHalves,
        };
        BarrierModel::new(b.phi1_ev, b.phi2_ev, b.phi3_ev, b.j_mev * 1e-3, manifold)
            .map_err(|e| ConfigError::new("barrier.j_mev", e.to_string()))
    }

    pub fn calibration(&self) -> Result<Calibration, ConfigError> {
        positive("calibration.d1_ref_nm", self.calibration.d1_ref_nm)?;
        positive("calibration.i0_ref_pa", self.calibration.i0_ref_pa)?;
        let reference = self
            .geometry()?
            .with_d1(self.calibration.d1_ref_nm)
            .map_err(|e| ConfigError::new("calibration.d1_ref_nm", e.to_string()))?;
        calibrate_baseline(&reference, &self.barriers()?, self.calibration.i0_ref_pa)
            .map_err(|e| ConfigError::new("calibration", e.to_string()))
    }

    pub fn vibration(&self) -> Result<VibrationModel, ConfigError> {
        let v = &self.vibration;
        non_negative("vibration.delta_pm", v.delta_pm)?;
        positive("vibration.omega_rad_s", v.omega_rad_s)?;
        finite("vibration.phase_rad", v.phase_rad)?;
        let model = VibrationModel::new(v.delta_pm * 1e-3, v.omega_rad_s, v.phase_rad)
            .map_err(|e| ConfigError::new("vibration", e.to_string()))?;
        model
            .check_gaps(&self.geometry()?)
            .map_err(|e| ConfigError::new("vibration.delta_pm", e.to_string()))?;
        Ok(model)
    }

    pub fn arrival(&self) -> Result<ArrivalModel, ConfigError> {
        let a = &self.arrival;
        positive("arrival.t0_ps", a.t0_ps)?;
        non_negative("arrival.sigma_ps", a.sigma_ps)?;
        positive("arrival.window_ns", a.window_ns)?;
        let process = match a.process {
            ProcessChoice::Normal => ArrivalProcess::Normal,
            ProcessChoice::Poisson => ArrivalProcess::Poisson,
        };
        ArrivalModel::new(a.t0_ps * 1e-12, a.sigma_ps * 1e-12, a.window_ns * 1e-9, process)
            .map_err(|e| ConfigError::new("arrival", e.to_string()))
    }

    /// Device, vibration and measurement model for `mode`.
    pub fn scenario(&self, mode: Mode) -> Result<Scenario, ConfigError> {
        non_negative("readout.noise_floor_pa", self.readout.noise_floor_pa)?;
        Ok(Scenario {
            geometry: self.geometry()?,
            barriers: self.barriers()?,
            vibration: self.vibration()?,
            arrival: self.arrival()?,
            calibration: self.calibration()?,
            mode,
            noise_floor_pa: self.readout.noise_floor_pa,
        })
    }

    pub fn alignment(&self) -> SpinAlignment {
        SpinAlignment::new(self.spin.tip.into(), self.spin.caged.into())
    }

    pub fn spin_source(&self) -> Result<SpinSource, ConfigError> {
        let g = self.spin.g;
        if !(0.0..=1.0).contains(&g) {
            return Err(ConfigError::new("spin.g", format!("amplitude must lie in [0, 1], got {g}")));
        }
        if g == 0.0 {
            return Ok(SpinSource::Pure(self.alignment()));
        }
        let state = MixedSpinState::from_down_amplitude(g).map_err(|e| ConfigError::new("spin.g", e.to_string()))?;
        Ok(SpinSource::Mixed {
            tip: self.spin.tip.into(),
            state,
        })
    }

    pub fn readout_settings(&self) -> Result<ReadoutSettings, ConfigError> {
        let r = &self.readout;
        non_negative("readout.resolution_pa", r.resolution_pa)?;
        if let Some(t) = r.threshold_pa {
            finite("readout.threshold_pa", t)?;
        }
        Ok(ReadoutSettings {
            tip: self.spin.tip.into(),
            threshold_pa: r.threshold_pa,
            resolution_pa: r.resolution_pa,
            estimator: match r.estimator {
                EstimatorChoice::Counting => Estimator::Counting,
                EstimatorChoice::Literal => Estimator::Literal,
            },
        })
    }

    pub fn detectability(&self) -> Result<DetectabilityCriterion, ConfigError> {
        non_negative("readout.resolution_pa", self.readout.resolution_pa)?;
        non_negative("readout.k_sigma", self.readout.k_sigma)?;
        Ok(DetectabilityCriterion {
            resolution_pa: self.readout.resolution_pa,
            k_sigma: self.readout.k_sigma,
            noise: match self.readout.noise {
                NoiseChoice::Counting => NoiseModel::CountingStatistics,
                NoiseChoice::None => NoiseModel::Noiseless,
            },
        })
    }

    /// Integration times in seconds.
    pub fn integration_times(&self) -> Result<Vec<f64>, ConfigError> {
        if self.readout.integration_ns.is_empty() {
            return Err(ConfigError::new("readout.integration_ns", "need at least one integration time"));
        }
        self.readout
            .integration_ns
            .iter()
            .map(|&t| positive("readout.integration_ns", t).map(|_| t * 1e-9))
            .collect()
    }

    pub fn sweep_range(&self) -> Result<((f64, f64), usize), ConfigError> {
        let s = &self.sweep;
        positive("sweep.d1_min_nm", s.d1_min_nm)?;
        positive("sweep.d1_max_nm", s.d1_max_nm)?;
        if s.d1_max_nm <= s.d1_min_nm {
            return Err(ConfigError::new(
                "sweep.d1_max_nm",
                format!("must exceed sweep.d1_min_nm = {}", s.d1_min_nm),
            ));
        }
        if s.steps < 2 {
            return Err(ConfigError::new("sweep.steps", format!("need at least 2 points, got {}", s.steps)));
        }
        Ok(((s.d1_min_nm, s.d1_max_nm), s.steps))
    }
}

fn finite(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be finite, got {v}")))
    }
}

pub(crate) fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be positive, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be non-negative, got {v}")))
    }
}

/// Dotted path of the first key named `leaf`.
fn find_key(prefix: &str, table: &Table, leaf: &str) -> Option<String> {
    for (k, v) in table {
        if k == leaf {
            return Some(format!("{prefix}{k}"));
        }
        if let Value::Table(t) = v {
            if let Some(found) = find_key(&format!("{prefix}{k}."), t, leaf) {
                return Some(found);
            }
        }
    }
    None
}

fn flatten(prefix: &str, value: &Value, out: &mut String) {
    match value {
        Value::Table(t) => {
            // Scalars of a table before its subtables keeps top-level keys first.
            for (k, v) in t.iter().filter(|(_, v)| !v.is_table()) {
                out.push_str(&format!("{prefix}{k} = {v}\n"));
            }
            for (k, v) in t.iter().filter(|(_, v)| v.is_table()) {
                flatten(&format!("{prefix}{k}."), v, out);
            }
        }
        other => out.push_str(&format!("{} = {other}\n", prefix.trim_end_matches('.'))),
    }
}

/// Applies one `section.key=value` override. Values are read as TOML and
/// fall back to a bare string (`spin.tip=down`).
fn apply_override(table: &mut Table, item: &str) -> Result<(), ConfigError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| ConfigError::new(item, "override must look like `section.key=value`"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.to_string()),
    };
    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| ConfigError::new(key, "empty key"))?;
    let mut node = table;
    for part in parts {
        let entry = node.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::new(key, format!("`{part}` is not a section")))?;
    }
    node.insert(leaf.to_string(), value);
    Ok(())
}
