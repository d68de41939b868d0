//! JSON scene files.
//!
//! ```json
//! {
//!   "bounds": { "min": [0, 0, 0], "max": [120, 40, 12] },
//!   "materials": [ { "name": "steel", "eps_r": 1.0, "sigma": 1e7, "pec": true } ],
//!   "obstacles": [ { "name": "beam", "min": [..], "max": [..], "material": "metal", "diffracting": true } ],
//!   "humans": [ { "name": "op1", "position": [10, 5, 0] } ],
//!   "transmitters": [ { "position": [..], "power_dbm": 0, "frequency_hz": 2.44e9,
//!                       "antenna": { "kind": "monopole", "peak_gain_dbi": 2.15 } } ]
//! }
//! ```
//!
//! Materials listed in the file override built-in ones of the same name and
//! extend the library otherwise. A human given by `position` (feet center)
//! becomes the default 0.4 × 0.25 × 1.7 m box; explicit `min`/`max` and
//! `material` override the preset.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AntennaPattern, MaterialSpec, Obstacle, Scene, SceneError, TransmitterSpec, HUMAN_BOX_SIZE};
use crate::geometry::{Aabb, Vec3};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    bounds: BoundsDto,
    #[serde(default)]
    materials: Vec<MaterialSpec>,
    #[serde(default)]
    obstacles: Vec<ObstacleDto>,
    #[serde(default)]
    humans: Vec<HumanDto>,
    #[serde(default)]
    transmitters: Vec<TransmitterDto>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsDto {
    min: Vec3,
    max: Vec3,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleDto {
    name: String,
    min: Vec3,
    max: Vec3,
    material: String,
    #[serde(default)]
    diffracting: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HumanDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    position: Option<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min: Option<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max: Option<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    material: Option<String>,
    #[serde(default)]
    diffracting: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransmitterDto {
    position: Vec3,
    #[serde(default)]
    power_dbm: f64,
    #[serde(default)]
    antenna: AntennaPattern,
    frequency_hz: f64,
}

/// Reads and validates a scene file.
pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene, SceneError> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|source| SceneError::Io { path: path.display().to_string(), source })?;
    parse_scene(&text, &path.display().to_string())
}

/// Parses scene JSON; `origin` labels parse errors.
pub fn parse_scene(text: &str, origin: &str) -> Result<Scene, SceneError> {
    let file: SceneFile = serde_json::from_str(text).map_err(|e| SceneError::Parse {
        path: origin.to_string(),
        message: e.to_string(),
        line: e.line(),
        column: e.column(),
    })?;
    from_file(file)
}

fn from_file(file: SceneFile) -> Result<Scene, SceneError> {
    let mut materials = MaterialSpec::default_library();
    for m in file.materials {
        match materials.iter_mut().find(|x| x.name == m.name) {
            Some(slot) => *slot = m,
            None => materials.push(m),
        }
    }
    let lookup = |owner: &str, name: &str| {
        materials
            .iter()
            .position(|m| m.name == name)
            .ok_or_else(|| SceneError::Invalid(format!("{owner} references unknown material '{name}'")))
    };

    let mut obstacles = Vec::with_capacity(file.obstacles.len());
    for o in file.obstacles {
        let material = lookup(&format!("obstacle '{}'", o.name), &o.material)?;
        obstacles.push(Obstacle { name: o.name, shape: Aabb::new(o.min, o.max), material, diffracting: o.diffracting });
    }

    let mut humans = Vec::with_capacity(file.humans.len());
    for (i, h) in file.humans.into_iter().enumerate() {
        let name = h.name.unwrap_or_else(|| format!("human{i}"));
        let shape = match (h.position, h.min, h.max) {
            (Some(p), None, None) => {
                let half = Vec3::new(HUMAN_BOX_SIZE.x / 2.0, HUMAN_BOX_SIZE.y / 2.0, 0.0);
                Aabb::new(p - half, p + half + Vec3::new(0.0, 0.0, HUMAN_BOX_SIZE.z))
            }
            (None, Some(min), Some(max)) => Aabb::new(min, max),
            _ => {
                return Err(SceneError::Invalid(format!(
                    "human '{name}': give either `position` or both `min` and `max`"
                )))
            }
        };
        let material = lookup(&format!("human '{name}'"), h.material.as_deref().unwrap_or("human"))?;
        humans.push(Obstacle { name, shape, material, diffracting: h.diffracting });
    }

    let transmitters = file
        .transmitters
        .into_iter()
        .map(|t| TransmitterSpec {
            position: t.position,
            power_dbm: t.power_dbm,
            antenna: t.antenna,
            frequency_hz: t.frequency_hz,
        })
        .collect();

    Scene::new(Aabb::new(file.bounds.min, file.bounds.max), materials, obstacles, humans, transmitters)
}

/// Serializes a scene so that [`parse_scene`] reproduces it exactly.
pub fn scene_to_json(scene: &Scene) -> String {
    let name = |o: &Obstacle| scene.materials[o.material].name.clone();
    let file = SceneFile {
        bounds: BoundsDto { min: scene.bounds.min, max: scene.bounds.max },
        materials: scene.materials.clone(),
        obstacles: scene
            .obstacles
            .iter()
            .map(|o| ObstacleDto {
                name: o.name.clone(),
                min: o.shape.min,
                max: o.shape.max,
                material: name(o),
                diffracting: o.diffracting,
            })
            .collect(),
        humans: scene
            .humans
            .iter()
            .map(|h| HumanDto {
                name: Some(h.name.clone()),
                position: None,
                min: Some(h.shape.min),
                max: Some(h.shape.max),
                material: Some(name(h)),
                diffracting: h.diffracting,
            })
            .collect(),
        transmitters: scene
            .transmitters
            .iter()
            .map(|t| TransmitterDto {
                position: t.position,
                power_dbm: t.power_dbm,
                antenna: t.antenna,
                frequency_hz: t.frequency_hz,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("scene serializes")
}

pub fn save_scene(scene: &Scene, path: impl AsRef<Path>) -> Result<(), SceneError> {
    let path = path.as_ref();
    fs::write(path, scene_to_json(scene)).map_err(|source| SceneError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EMPTY_ROOM: &str = r#"{
        "bounds": { "min": [0, 0, 0], "max": [10, 8, 3] },
        "transmitters": [ { "position": [5, 4, 1.5], "power_dbm": 0, "frequency_hz": 2.44e9 } ]
    }"#;

    #[test]
    fn empty_room_has_no_obstacles() {
        let s = parse_scene(EMPTY_ROOM, "inline").unwrap();
        assert!(s.obstacles.is_empty());
        assert_eq!(s.transmitters.len(), 1);
        assert_eq!(s.transmitters[0].antenna, AntennaPattern::isotropic());
    }

    #[test]
    fn inverted_obstacle_is_named() {
        let text = r#"{
            "bounds": { "min": [0, 0, 0], "max": [10, 8, 3] },
            "obstacles": [ { "name": "cabinet-3", "min": [4, 1, 0], "max": [3, 2, 2], "material": "metal" } ]
        }"#;
        let err = parse_scene(text, "inline").unwrap_err();
        assert!(matches!(err, SceneError::Invalid(_)));
        assert!(err.to_string().contains("cabinet-3"), "{err}");
    }

    #[test]
    fn parse_error_reports_line() {
        let text =
            "{\n  \"bounds\": { \"min\": [0, 0, 0], \"max\": [10, 8, 3] },\n  \"obstacles\": [ { \"name\": 5 } ]\n}";
        match parse_scene(text, "bad.json").unwrap_err() {
            SceneError::Parse { line, path, .. } => {
                assert_eq!(line, 3);
                assert_eq!(path, "bad.json");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unknown_material_rejected() {
        let text = r#"{
            "bounds": { "min": [0, 0, 0], "max": [10, 8, 3] },
            "obstacles": [ { "name": "x", "min": [1, 1, 0], "max": [2, 2, 2], "material": "unobtainium" } ]
        }"#;
        let err = parse_scene(text, "inline").unwrap_err();
        assert!(err.to_string().contains("unobtainium"));
    }

    #[test]
    fn human_preset_box_and_override() {
        let text = r#"{
            "bounds": { "min": [0, 0, 0], "max": [10, 8, 3] },
            "materials": [ { "name": "human", "eps_r": 40, "sigma": 1.2 } ],
            "humans": [ { "name": "op", "position": [2, 3, 0] } ]
        }"#;
        let s = parse_scene(text, "inline").unwrap();
        let h = &s.humans[0];
        let ext = h.shape.extent();
        assert!((ext.x - 0.4).abs() < 1e-12 && (ext.y - 0.25).abs() < 1e-12);
        assert!((ext.z - 1.7).abs() < 1e-12);
        assert_eq!(s.materials[h.material].eps_r, 40.0);
        // override replaces the built-in entry in place
        assert_eq!(s.materials.len(), MaterialSpec::default_library().len());
    }

    fn arb_scene() -> impl Strategy<Value = Scene> {
        let obstacle =
            (0.0..8.0f64, 0.0..6.0f64, 0.0..2.0f64, 0.1..2.0f64, 0.1..2.0f64, 0.1..1.0f64, 0usize..5, any::<bool>());
        (prop::collection::vec(obstacle, 0..6), prop::collection::vec((0.5..9.5f64, 0.5..7.5f64), 0..3)).prop_map(
            |(obs, humans)| {
                let obstacles = obs
                    .into_iter()
                    .enumerate()
                    .map(|(i, (x, y, z, dx, dy, dz, m, d))| Obstacle {
                        name: format!("o{i}"),
                        shape: Aabb::new(Vec3::new(x, y, z), Vec3::new(x + dx, y + dy, z + dz)),
                        material: m,
                        diffracting: d,
                    })
                    .collect();
                let humans = humans
                    .into_iter()
                    .enumerate()
                    .map(|(i, (x, y))| Obstacle {
                        name: format!("h{i}"),
                        shape: Aabb::new(Vec3::new(x - 0.2, y - 0.125, 0.0), Vec3::new(x + 0.2, y + 0.125, 1.7)),
                        material: 4,
                        diffracting: false,
                    })
                    .collect();
                Scene::new(
                    Aabb::new(Vec3::ZERO, Vec3::new(10.0, 8.0, 3.0)),
                    MaterialSpec::default_library(),
                    obstacles,
                    humans,
                    vec![TransmitterSpec {
                        position: Vec3::new(5.0, 4.0, 1.62),
                        power_dbm: 0.0,
                        antenna: AntennaPattern::monopole(),
                        frequency_hz: 2.44e9,
                    }],
                )
                .unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn save_load_round_trip(scene in arb_scene()) {
            let text = scene_to_json(&scene);
            let back = parse_scene(&text, "roundtrip").unwrap();
            prop_assert_eq!(back, scene);
        }
    }
}
