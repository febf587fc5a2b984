//! Versioned JSON persistence for trained models and their calibrators.
//!
//! Files round-trip scores bit-identically: floats serialize at full
//! shortest-round-trip precision and loading validates the schema version
//! before touching the payload. The optional `trained_at` stamp is left
//! unset by the CLI so that identical runs produce identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boost::{BoostConfig, BoostedEnsemble};
use crate::calib::{logistic_correction, IsotonicCalibrator, SigmoidCalibrator};
use crate::dataset::Dataset;
use crate::error::{config, Error};
use crate::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// Calibration method attached to a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMethod {
    None,
    Logistic,
    Platt,
    Isotonic,
}

impl CalibrationMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CalibrationMethod::None => "none",
            CalibrationMethod::Logistic => "logistic",
            CalibrationMethod::Platt => "platt",
            CalibrationMethod::Isotonic => "isotonic",
        }
    }

    pub fn parse(s: &str) -> Result<CalibrationMethod> {
        match s {
            "none" => Ok(CalibrationMethod::None),
            "logistic" => Ok(CalibrationMethod::Logistic),
            "platt" => Ok(CalibrationMethod::Platt),
            "isotonic" => Ok(CalibrationMethod::Isotonic),
            other => Err(config(format!("unknown calibration method {other:?}"))),
        }
    }
}

/// Fitted calibrator, tagged for JSON as `{"sigmoid": {...}}` or
/// `{"isotonic": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibratorKind {
    Sigmoid(SigmoidCalibrator),
    Isotonic(IsotonicCalibrator),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMetadata {
    pub config_hash: String,
    pub seed: u64,
    pub method: CalibrationMethod,
    pub config: BoostConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trained_at: Option<String>,
}

/// A trained ensemble, an optional calibrator, and provenance metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub schema_version: u32,
    pub ensemble: BoostedEnsemble,
    pub calibrator: Option<CalibratorKind>,
    pub metadata: BundleMetadata,
}

/// FNV-1a of the canonical config encoding, as a 16-hex-digit string.
fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

pub fn config_hash(cfg: &BoostConfig, seed: u64) -> String {
    let encoded = format!(
        "{}|{seed}",
        serde_json::to_string(cfg).expect("config serializes")
    );
    fnv1a_hex(encoded.as_bytes())
}

impl ModelBundle {
    pub fn new(
        ensemble: BoostedEnsemble,
        calibrator: Option<CalibratorKind>,
        method: CalibrationMethod,
        cfg: BoostConfig,
        seed: u64,
    ) -> Result<ModelBundle> {
        let bundle = ModelBundle {
            schema_version: SCHEMA_VERSION,
            ensemble,
            calibrator,
            metadata: BundleMetadata {
                config_hash: config_hash(&cfg, seed),
                seed,
                method,
                config: cfg,
                trained_at: None,
            },
        };
        bundle.check_calibrator()?;
        Ok(bundle)
    }

    /// The calibrator payload must match the method named in the metadata.
    fn check_calibrator(&self) -> Result<()> {
        let ok = match (self.metadata.method, &self.calibrator) {
            (CalibrationMethod::None, None) => true,
            (CalibrationMethod::Logistic, Some(CalibratorKind::Sigmoid(s))) => {
                s.a == -2.0 && s.b == 0.0
            }
            (CalibrationMethod::Platt, Some(CalibratorKind::Sigmoid(_))) => true,
            (CalibrationMethod::Isotonic, Some(CalibratorKind::Isotonic(_))) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(config(format!(
                "calibrator payload does not match method {:?}",
                self.metadata.method.as_str()
            )))
        }
    }

    /// Probability of the positive class for one feature vector.
    ///
    /// The logistic correction applies to the raw score `F`; Platt and
    /// isotonic calibrators apply to the normalized score `f`; without a
    /// calibrator the normalized score itself is the (uncalibrated)
    /// probability.
    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        match (self.metadata.method, &self.calibrator) {
            (CalibrationMethod::None, _) => self.ensemble.normalized_score(x),
            (CalibrationMethod::Logistic, _) => Ok(logistic_correction(self.ensemble.raw_score(x)?)),
            (CalibrationMethod::Platt, Some(CalibratorKind::Sigmoid(s))) => {
                Ok(s.apply(self.ensemble.normalized_score(x)?))
            }
            (CalibrationMethod::Isotonic, Some(CalibratorKind::Isotonic(c))) => {
                Ok(c.apply(self.ensemble.normalized_score(x)?))
            }
            _ => Err(config("calibrator payload does not match method".to_string())),
        }
    }

    pub fn probabilities(&self, d: &Dataset) -> Result<Vec<f64>> {
        (0..d.n_rows()).map(|i| self.probability(d.row(i))).collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }

    /// Load a bundle, rejecting unknown schema versions before decoding the
    /// payload.
    pub fn load(path: &Path) -> Result<ModelBundle> {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let version = value
            .get("schema_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| config("model file has no schema_version"))?;
        if version != u64::from(SCHEMA_VERSION) {
            return Err(Error::SchemaVersion {
                found: version as u32,
                supported: SCHEMA_VERSION,
            });
        }
        let bundle: ModelBundle = serde_json::from_value(value)?;
        bundle.check_calibrator()?;
        Ok(bundle)
    }
}
