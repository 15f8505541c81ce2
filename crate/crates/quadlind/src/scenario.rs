//! JSON scenario files: a declarative description of a quadratic system,
//! its baths, an optional rotating frame, and an optional parameter sweep.
//!
//! Complex numbers are spelled as `{"re": x, "im": y}` objects so files
//! stay language-neutral and diff-friendly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bath::BathSpec;
use crate::nambu::{NambuError, QuadraticSystem};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("coupling index {index} out of range for {n_modes} modes")]
    IndexOutOfRange { index: usize, n_modes: usize },
    #[error("coupling indices must satisfy i < j, got ({0}, {1})")]
    BadCouplingOrder(usize, usize),
    #[error("frame length {got} does not match mode count {expected}")]
    FrameLength { expected: usize, got: usize },
    #[error("sweep path '{0}' does not resolve to a numeric scalar")]
    BadSweepPath(String),
    #[error(transparent)]
    System(#[from] NambuError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Complex numbers in scenario files are `{"re": .., "im": ..}` objects.
mod cpx {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Parts {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        Parts { re: c.re, im: c.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let p = Parts::deserialize(d)?;
        Ok(Complex64::new(p.re, p.im))
    }
}

fn zero_c() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn is_zero_c(c: &Complex64) -> bool {
    c.re == 0.0 && c.im == 0.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModeSpec {
    pub name: String,
    pub omega: f64,
    /// Degenerate two-photon drive amplitude (coefficient of the squared
    /// creation operator over two, plus conjugate).
    #[serde(default = "zero_c", with = "cpx", skip_serializing_if = "is_zero_c")]
    pub chi: Complex64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CouplingSpec {
    pub i: usize,
    pub j: usize,
    /// Beamsplitter (excitation-conserving) amplitude.
    #[serde(default = "zero_c", with = "cpx", skip_serializing_if = "is_zero_c")]
    pub lambda: Complex64,
    /// Pair-creation (two-mode squeezing) amplitude.
    #[serde(default = "zero_c", with = "cpx", skip_serializing_if = "is_zero_c")]
    pub g: Complex64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepSpec {
    /// Dotted reference into this document, e.g. "couplings.0.lambda.re".
    pub path: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Scenario {
    pub modes: Vec<ModeSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub couplings: Vec<CouplingSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub baths: Vec<BathSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let sc: Scenario = serde_json::from_str(text)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ScenarioError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        // BTreeMap round-trip sorts the keys for deterministic output.
        let value = serde_json::to_value(self).expect("scenario serialization");
        serde_json::to_string_pretty(&sort_keys(value)).expect("scenario serialization")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let n = self.modes.len();
        for c in &self.couplings {
            if c.i >= c.j {
                return Err(ScenarioError::BadCouplingOrder(c.i, c.j));
            }
            if c.j >= n {
                return Err(ScenarioError::IndexOutOfRange { index: c.j, n_modes: n });
            }
        }
        if let Some(frame) = &self.frame {
            if frame.len() != n {
                return Err(ScenarioError::FrameLength { expected: n, got: frame.len() });
            }
        }
        Ok(())
    }

    /// Build the quadratic system this scenario describes.
    pub fn system(&self) -> Result<QuadraticSystem, ScenarioError> {
        let mut sys = QuadraticSystem::new(self.modes.iter().map(|m| m.omega).collect())?;
        for (i, m) in self.modes.iter().enumerate() {
            if !is_zero_c(&m.chi) {
                sys = sys.with_two_photon(i, m.chi);
            }
        }
        for c in &self.couplings {
            if !is_zero_c(&c.lambda) {
                sys = sys.with_coupling(c.i, c.j, c.lambda);
            }
            if !is_zero_c(&c.g) {
                sys = sys.with_pair_coupling(c.i, c.j, c.g);
            }
        }
        sys.validate()?;
        Ok(sys)
    }

    /// The scenario with the swept field set to `x` (the sweep spec itself
    /// is preserved).
    pub fn at_sweep_value(&self, x: f64) -> Result<Scenario, ScenarioError> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| ScenarioError::BadSweepPath("<no sweep declared>".into()))?;
        let mut value = serde_json::to_value(self)?;
        set_path(&mut value, &sweep.path, x)
            .ok_or_else(|| ScenarioError::BadSweepPath(sweep.path.clone()))?;
        let sc: Scenario = serde_json::from_value(value)?;
        sc.validate()?;
        Ok(sc)
    }

    /// The grid of sweep parameter values.
    pub fn sweep_grid(&self) -> Option<Vec<f64>> {
        let s = self.sweep.as_ref()?;
        if s.points < 2 {
            return Some(vec![s.from]);
        }
        Some(
            (0..s.points)
                .map(|i| s.from + (s.to - s.from) * i as f64 / (s.points - 1) as f64)
                .collect(),
        )
    }
}

fn sort_keys(v: serde_json::Value) -> serde_json::Value {
    match v {
        serde_json::Value::Object(map) => {
            let sorted: std::collections::BTreeMap<String, serde_json::Value> =
                map.into_iter().map(|(k, val)| (k, sort_keys(val))).collect();
            serde_json::to_value(sorted).unwrap()
        }
        serde_json::Value::Array(items) => {
            serde_json::Value::Array(items.into_iter().map(sort_keys).collect())
        }
        other => other,
    }
}

/// Navigate a dotted path (object keys and array indices) and overwrite the
/// numeric scalar at its end. Returns None if the path does not resolve.
fn set_path(root: &mut serde_json::Value, path: &str, x: f64) -> Option<()> {
    let mut cur = root;
    for part in path.split('.') {
        cur = match cur {
            serde_json::Value::Object(map) => map.get_mut(part)?,
            serde_json::Value::Array(items) => {
                let idx: usize = part.parse().ok()?;
                items.get_mut(idx)?
            }
            _ => return None,
        };
    }
    if !cur.is_number() {
        return None;
    }
    *cur = serde_json::json!(x);
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{SpectralDensity, Statistics};

    fn sample() -> Scenario {
        Scenario {
            modes: vec![
                ModeSpec { name: "a".into(), omega: 5.0, chi: zero_c() },
                ModeSpec { name: "b".into(), omega: 5.0, chi: Complex64::new(0.1, -0.2) },
            ],
            couplings: vec![CouplingSpec {
                i: 0,
                j: 1,
                lambda: Complex64::new(1.0, 0.0),
                g: Complex64::new(0.0, 0.5),
            }],
            baths: vec![BathSpec {
                mode: 0,
                statistics: Statistics::Bose,
                temperature: 0.0,
                chemical_potential: 0.0,
                spectral_density: SpectralDensity::Flat { gamma: 0.2 },
            }],
            frame: Some(vec![5.0, 5.0]),
            sweep: Some(SweepSpec {
                path: "couplings.0.lambda.re".into(),
                from: 0.0,
                to: 2.0,
                points: 5,
            }),
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let sc = sample();
        let text = sc.to_json();
        let back = Scenario::from_json(&text).unwrap();
        assert_eq!(sc, back);
        // And a second serialization is byte-identical.
        assert_eq!(text, back.to_json());
    }

    #[test]
    fn complex_fields_use_re_im_objects() {
        let text = sample().to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["couplings"][0]["lambda"]["re"], 1.0);
        assert_eq!(v["couplings"][0]["g"]["im"], 0.5);
    }

    #[test]
    fn system_reflects_all_terms() {
        let sys = sample().system().unwrap();
        assert_eq!(sys.n_modes, 2);
        assert_eq!(sys.omega, vec![5.0, 5.0]);
        assert_eq!(sys.lambda[[0, 1]], Complex64::new(1.0, 0.0));
        assert_eq!(sys.g[[0, 1]], Complex64::new(0.0, 0.5));
        assert_eq!(sys.chi[1], Complex64::new(0.1, -0.2));
    }

    #[test]
    fn sweep_resolution_and_grid() {
        let sc = sample();
        let grid = sc.sweep_grid().unwrap();
        assert_eq!(grid, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let at = sc.at_sweep_value(1.5).unwrap();
        assert_eq!(at.couplings[0].lambda, Complex64::new(1.5, 0.0));
        // Everything else is untouched.
        assert_eq!(at.modes, sc.modes);
        assert_eq!(at.baths, sc.baths);

        // Paths into baths and modes work too.
        let mut sc2 = sc.clone();
        sc2.sweep = Some(SweepSpec {
            path: "baths.0.spectral_density.gamma".into(),
            from: 0.0,
            to: 1.0,
            points: 3,
        });
        let at = sc2.at_sweep_value(0.7).unwrap();
        match at.baths[0].spectral_density {
            SpectralDensity::Flat { gamma } => assert_eq!(gamma, 0.7),
            _ => panic!("wrong density kind"),
        }

        sc2.sweep = Some(SweepSpec { path: "modes.1.nonsense".into(), from: 0.0, to: 1.0, points: 3 });
        assert!(matches!(
            sc2.at_sweep_value(0.5),
            Err(ScenarioError::BadSweepPath(_))
        ));
    }

    #[test]
    fn bad_files_are_rejected() {
        assert!(Scenario::from_json("{").is_err());
        let mut sc = sample();
        sc.couplings[0].j = 5;
        let text = serde_json::to_string(&sc).unwrap();
        assert!(matches!(
            Scenario::from_json(&text),
            Err(ScenarioError::IndexOutOfRange { .. })
        ));
        let mut sc = sample();
        sc.frame = Some(vec![1.0]);
        let text = serde_json::to_string(&sc).unwrap();
        assert!(matches!(Scenario::from_json(&text), Err(ScenarioError::FrameLength { .. })));
    }
}
