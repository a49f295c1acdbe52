//! Robot profiles: which API calls exist, what they do, and where the robot starts.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::{Pose, SimError};

/// Semantic behaviour an API name is bound to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiKind {
    Takeoff,
    Land,
    /// Absolute world-frame target position.
    FlyTo,
    GetYaw,
    /// Absolute heading in degrees.
    SetYaw,
    GetPosition,
    /// Body-frame forward move; vertical component is always zero.
    MoveForward,
    /// Relative heading change in degrees.
    Rotate,
    GetHeading,
}

impl ApiKind {
    pub fn arity(self) -> usize {
        match self {
            ApiKind::FlyTo | ApiKind::SetYaw | ApiKind::MoveForward | ApiKind::Rotate => 1,
            _ => 0,
        }
    }

    pub fn is_query(self) -> bool {
        matches!(self, ApiKind::GetYaw | ApiKind::GetPosition | ApiKind::GetHeading)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiSpec {
    pub name: String,
    pub kind: ApiKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AirborneCheck {
    /// Moving while grounded is an error.
    #[default]
    Error,
    /// Moving while grounded is recorded as a warning.
    Warn,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StartPose {
    #[serde(default)]
    pub north: f64,
    #[serde(default)]
    pub east: f64,
    #[serde(default)]
    pub down: f64,
    #[serde(default)]
    pub yaw: f64,
    #[serde(default)]
    pub airborne: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotProfile {
    pub name: String,
    pub dimensionality: u8,
    pub api: Vec<ApiSpec>,
    pub takeoff_supported: bool,
    /// Nominal speed in m/s. Informational only.
    #[serde(default)]
    pub speed: f64,
    #[serde(default)]
    pub start: StartPose,
    #[serde(default)]
    pub airborne_check: AirborneCheck,
}

impl RobotProfile {
    /// Six-call drone API in a 3-D NED world.
    pub fn uav() -> Self {
        let api = [
            ("takeoff", ApiKind::Takeoff),
            ("land", ApiKind::Land),
            ("fly_to", ApiKind::FlyTo),
            ("get_yaw", ApiKind::GetYaw),
            ("set_yaw", ApiKind::SetYaw),
            ("get_drone_position", ApiKind::GetPosition),
        ];
        Self {
            name: "uav".into(),
            dimensionality: 3,
            api: api.iter().map(|(n, k)| ApiSpec { name: (*n).into(), kind: *k }).collect(),
            takeoff_supported: true,
            speed: 2.0,
            start: StartPose::default(),
            airborne_check: AirborneCheck::Error,
        }
    }

    /// Planar differential-drive style vehicle.
    pub fn ground() -> Self {
        let api = [
            ("move_forward", ApiKind::MoveForward),
            ("rotate", ApiKind::Rotate),
            ("get_position", ApiKind::GetPosition),
            ("get_heading", ApiKind::GetHeading),
        ];
        Self {
            name: "ground".into(),
            dimensionality: 2,
            api: api.iter().map(|(n, k)| ApiSpec { name: (*n).into(), kind: *k }).collect(),
            takeoff_supported: false,
            speed: 0.5,
            start: StartPose::default(),
            airborne_check: AirborneCheck::Error,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let profile: RobotProfile =
            toml::from_str(text).map_err(|e| SimError::Profile { message: e.to_string() })?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = fs::read_to_string(path)
            .map_err(|e| SimError::Profile { message: format!("{}: {e}", path.display()) })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("profile serializes")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |message: String| Err(SimError::Profile { message });
        if self.name.trim().is_empty() {
            return bad("profile name is empty".into());
        }
        if !(self.dimensionality == 2 || self.dimensionality == 3) {
            return bad(format!("dimensionality must be 2 or 3, got {}", self.dimensionality));
        }
        if self.api.is_empty() {
            return bad("api list is empty".into());
        }
        let mut seen = HashSet::new();
        for spec in &self.api {
            if !is_identifier(&spec.name) {
                return bad(format!("api name `{}` is not an identifier", spec.name));
            }
            if !seen.insert(spec.name.as_str()) {
                return bad(format!("duplicate api name `{}`", spec.name));
            }
            if matches!(spec.kind, ApiKind::Takeoff | ApiKind::Land) && !self.takeoff_supported {
                return bad(format!("`{}` requires takeoff_supported", spec.name));
            }
        }
        let s = self.start;
        if ![s.north, s.east, s.down, s.yaw].iter().all(|v| v.is_finite()) {
            return bad("start pose must be finite".into());
        }
        if self.dimensionality == 2 && s.down != 0.0 {
            return bad("planar profile must start at down = 0".into());
        }
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<ApiKind> {
        self.api.iter().find(|a| a.name == name).map(|a| a.kind)
    }

    pub fn start_pose<S: Scalar>(&self) -> Pose<S> {
        let s = self.start;
        Pose {
            north: S::of(s.north),
            east: S::of(s.east),
            down: S::of(s.down),
            yaw: super::frame::wrap_degrees(S::of(s.yaw)),
            airborne: s.airborne,
        }
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Named collection of profiles; insertion order is preserved for listing.
#[derive(Debug, Clone)]
pub struct ProfileRegistry {
    profiles: Vec<Arc<RobotProfile>>,
}

impl ProfileRegistry {
    pub fn empty() -> Self {
        Self { profiles: Vec::new() }
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.insert(RobotProfile::uav());
        reg.insert(RobotProfile::ground());
        reg
    }

    /// Inserts or replaces a profile by name.
    pub fn insert(&mut self, profile: RobotProfile) {
        let profile = Arc::new(profile);
        match self.profiles.iter_mut().find(|p| p.name == profile.name) {
            Some(slot) => *slot = profile,
            None => self.profiles.push(profile),
        }
    }

    /// Loads every `*.toml` file of `dir` (sorted by file name).
    pub fn load_dir(&mut self, dir: &Path) -> Result<usize, SimError> {
        let entries = fs::read_dir(dir)
            .map_err(|e| SimError::Profile { message: format!("{}: {e}", dir.display()) })?;
        let mut paths: BTreeSet<_> = BTreeSet::new();
        for entry in entries {
            let entry = entry.map_err(|e| SimError::Profile { message: e.to_string() })?;
            let path = entry.path();
            if path.extension().is_some_and(|e| e == "toml") {
                paths.insert(path);
            }
        }
        for path in &paths {
            self.insert(RobotProfile::load(path)?);
        }
        Ok(paths.len())
    }

    pub fn get(&self, name: &str) -> Option<Arc<RobotProfile>> {
        self.profiles.iter().find(|p| p.name == name).cloned()
    }

    pub fn names(&self) -> Vec<String> {
        self.profiles.iter().map(|p| p.name.clone()).collect()
    }
}

impl Default for ProfileRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        RobotProfile::uav().validate().unwrap();
        RobotProfile::ground().validate().unwrap();
        assert_eq!(ProfileRegistry::with_builtins().names(), vec!["uav", "ground"]);
    }

    #[test]
    fn toml_round_trip() {
        let text = RobotProfile::ground().to_toml_string();
        assert_eq!(RobotProfile::from_toml_str(&text).unwrap(), RobotProfile::ground());
    }

    #[test]
    fn loads_declarative_profile() {
        let text = r#"
name = "rover"
dimensionality = 2
takeoff_supported = false
speed = 1.0

[start]
yaw = 90.0

[[api]]
name = "drive"
kind = "move_forward"

[[api]]
name = "turn"
kind = "rotate"
"#;
        let p = RobotProfile::from_toml_str(text).unwrap();
        assert_eq!(p.lookup("drive"), Some(ApiKind::MoveForward));
        assert_eq!(p.start_pose::<f64>().yaw, 90.0);
    }

    #[test]
    fn rejects_duplicates_and_empty_api() {
        let mut p = RobotProfile::uav();
        p.api.push(ApiSpec { name: "land".into(), kind: ApiKind::Land });
        assert!(p.validate().is_err());
        let mut p = RobotProfile::uav();
        p.api.clear();
        assert!(p.validate().is_err());
        let mut p = RobotProfile::ground();
        p.api.push(ApiSpec { name: "takeoff".into(), kind: ApiKind::Takeoff });
        assert!(p.validate().is_err());
    }
}
