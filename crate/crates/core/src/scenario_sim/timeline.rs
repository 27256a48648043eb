use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ScenarioConfig, SimError};
use crate::box_geometry::{Box3D, Dims, Frame};

/// Gains of the constant-time-headway follower: 1/s² on gap error, 1/s on
/// speed difference.
const GAP_GAIN: f64 = 0.2;
const SPEED_GAIN: f64 = 0.8;

const DODGE_CHARGER: (&str, Dims) = (
    "DodgeCharger",
    Dims {
        length: 5.0,
        width: 1.95,
        height: 1.45,
    },
);
const MERCEDES_COUPE: (&str, Dims) = (
    "MercedesCoupe",
    Dims {
        length: 4.7,
        width: 1.85,
        height: 1.40,
    },
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Ego,
    Fast,
    Slow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub id: u32,
    pub role: Role,
    pub model_name: String,
    /// Continuous lane coordinate: 1.0 is the centre of the leftmost lane.
    pub lane: f64,
    /// Longitudinal position of the box centre along the road, metres.
    pub s: f64,
    /// m/s
    pub speed: f64,
    /// Heading relative to the road, CARLA convention (positive turns right).
    pub yaw: f64,
    pub box_dims: Dims,
}

impl VehicleState {
    fn new(id: u32, role: Role, (model, dims): (&str, Dims), lane: f64, s: f64, speed: f64) -> Self {
        Self {
            id,
            role,
            model_name: model.to_string(),
            lane,
            s,
            speed,
            yaw: 0.0,
            box_dims: dims,
        }
    }
}

/// Every vehicle at one simulation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneState {
    pub step: u64,
    pub time_s: f64,
    pub lane_width: f64,
    pub vehicles: Vec<VehicleState>,
}

impl SceneState {
    pub fn ego(&self) -> &VehicleState {
        self.vehicles
            .iter()
            .find(|v| v.role == Role::Ego)
            .expect("scene has an ego vehicle")
    }

    pub fn vehicle(&self, role: Role) -> Option<&VehicleState> {
        self.vehicles.iter().find(|v| v.role == role)
    }

    /// Lateral road coordinate in CARLA's right-positive convention.
    pub fn lateral(&self, v: &VehicleState) -> f64 {
        (v.lane - 1.0) * self.lane_width
    }

    /// Footprint box on the road surface, CARLA axes, ground at z = 0.
    pub fn road_box(&self, v: &VehicleState) -> Box3D {
        Box3D::new(
            [v.s, self.lateral(v), v.box_dims.height / 2.0],
            v.box_dims,
            v.yaw,
            Frame::CarlaWorld,
        )
        .expect("vehicle dims are positive")
    }

    /// Nearest vehicle ahead of `follower` whose centre is within half a lane.
    pub fn lead_of(&self, follower: &VehicleState) -> Option<&VehicleState> {
        self.vehicles
            .iter()
            .filter(|v| v.id != follower.id && v.s > follower.s)
            .filter(|v| (v.lane - follower.lane).abs() < 0.5)
            .min_by(|a, b| a.s.total_cmp(&b.s))
    }

    /// SHA-256 over the exact bit patterns of the state.
    pub fn state_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.step.to_le_bytes());
        h.update(self.time_s.to_bits().to_le_bytes());
        h.update(self.lane_width.to_bits().to_le_bytes());
        for v in &self.vehicles {
            h.update(v.id.to_le_bytes());
            h.update(v.model_name.as_bytes());
            for x in [
                v.lane,
                v.s,
                v.speed,
                v.yaw,
                v.box_dims.length,
                v.box_dims.width,
                v.box_dims.height,
            ] {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

fn bumper_gap(follower: &VehicleState, lead: &VehicleState) -> f64 {
    lead.s - follower.s - (lead.box_dims.length + follower.box_dims.length) / 2.0
}

fn ego_accel(cfg: &ScenarioConfig, state: &SceneState) -> f64 {
    let ego = state.ego();
    let v = ego.speed;
    let cruise = SPEED_GAIN * (cfg.ego_initial_speed / 3.6 - v);
    let follow = state.lead_of(ego).map_or(f64::INFINITY, |lead| {
        let desired = cfg.standstill_gap + cfg.time_headway * v;
        GAP_GAIN * (bumper_gap(ego, lead) - desired) + SPEED_GAIN * (lead.speed * lead.yaw.cos() - v)
    });
    cruise.min(follow).clamp(-cfg.max_decel, cfg.max_accel)
}

fn check_no_overlap(state: &SceneState) -> Result<(), SimError> {
    let boxes: Vec<(u32, Box3D)> = state
        .vehicles
        .iter()
        .map(|v| (v.id, state.road_box(v)))
        .collect();
    for (i, (id_a, a)) in boxes.iter().enumerate() {
        for (id_b, b) in &boxes[i + 1..] {
            if a.bev_polygon().intersection_area(&b.bev_polygon()) > 0.0 {
                return Err(SimError::InfeasibleConfig(format!(
                    "vehicles {id_a} and {id_b} overlap at step {}",
                    state.step
                )));
            }
        }
    }
    Ok(())
}

/// Integrates the scenario at `sim_rate` for `total_recorded_frames *
/// record_every` steps.
///
/// The fast vehicle keeps its lane until its bumper gap to the slow vehicle
/// drops below `overtake_trigger_gap`, then moves one lane left (right when
/// the ego lane is the leftmost) along a half-cosine lateral profile lasting
/// `lane_change_duration`. The slow vehicle cruises. The ego follows its
/// in-lane lead with a constant-time-headway law, capped at its initial speed.
pub fn build_timeline(cfg: &ScenarioConfig) -> Result<Vec<SceneState>, SimError> {
    cfg.validate()?;
    let dt = cfg.dt();
    let steps = cfg.total_recorded_frames as u64 * cfg.record_every as u64;
    let kmh = |v: f64| v / 3.6;
    let ego_lane = cfg.ego_lane as f64;
    let target_lane = if cfg.ego_lane > 1 {
        ego_lane - 1.0
    } else {
        ego_lane + 1.0
    };

    let ego = VehicleState::new(0, Role::Ego, MERCEDES_COUPE, ego_lane, 0.0, kmh(cfg.ego_initial_speed));
    let fast_s = MERCEDES_COUPE.1.length / 2.0 + cfg.ego_fast_gap + DODGE_CHARGER.1.length / 2.0;
    let fast = VehicleState::new(1, Role::Fast, DODGE_CHARGER, ego_lane, fast_s, kmh(cfg.fast_vehicle_speed));
    let slow_s = fast_s + DODGE_CHARGER.1.length + cfg.fast_slow_gap;
    let slow = VehicleState::new(2, Role::Slow, DODGE_CHARGER, ego_lane, slow_s, kmh(cfg.slow_vehicle_speed));

    let mut state = SceneState {
        step: 0,
        time_s: 0.0,
        lane_width: cfg.lane_width,
        vehicles: vec![ego, fast, slow],
    };
    let mut lane_change_start: Option<f64> = None;
    let mut timeline = Vec::with_capacity(steps as usize);

    for step in 0..steps {
        state.step = step;
        state.time_s = step as f64 * dt;
        check_no_overlap(&state)?;
        timeline.push(state.clone());

        let t = state.time_s;
        let accel = ego_accel(cfg, &state);
        let [ego, fast, slow] = &mut state.vehicles[..] else {
            unreachable!("three vehicles");
        };
        if lane_change_start.is_none()
            && (fast.lane - slow.lane).abs() < 0.5
            && bumper_gap(fast, slow) < cfg.overtake_trigger_gap
        {
            lane_change_start = Some(t);
        }
        fast.s += fast.speed * dt;
        if let Some(t0) = lane_change_start {
            let duration = cfg.lane_change_duration;
            let phase = PI * ((t + dt - t0).clamp(0.0, duration) / duration);
            fast.lane = ego_lane + (target_lane - ego_lane) * (1.0 - phase.cos()) / 2.0;
            let lateral_rate =
                (target_lane - ego_lane) * cfg.lane_width * PI / (2.0 * duration) * phase.sin();
            fast.yaw = lateral_rate.atan2(fast.speed);
        }
        slow.s += slow.speed * dt;
        ego.speed = (ego.speed + accel * dt).max(0.0);
        ego.s += ego.speed * dt;
    }
    Ok(timeline)
}
