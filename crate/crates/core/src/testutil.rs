//! Shared fixtures for unit tests.

use crate::model::Bounds;
use crate::sensing::{SensorKind, SensorModel};

/// Range-bearing sensor with the default field parameters used across tests:
/// 200 m detection range, 0.008/m falloff, distance-dependent noise.
pub(crate) fn range_bearing_sensor() -> SensorModel {
    SensorModel {
        kind: SensorKind::RangeBearing {
            sigma0_bearing: 2.0 * std::f64::consts::PI / 180.0,
            beta_bearing: 1.7e-5,
            sigma0_range: 10.0,
            beta_range: 5e-3,
        },
        detection_range: 200.0,
        falloff: 0.008,
        p_d_max: 0.98,
        clutter_rate: 0.2,
    }
}

/// Vision sensor observing a 1 km² window.
pub(crate) fn vision_sensor() -> SensorModel {
    SensorModel {
        kind: SensorKind::Vision {
            sigma0_xy: 10.0,
            beta_xy: 1e-2,
            window: Bounds::new([0.0, 0.0], [1000.0, 1000.0]),
        },
        detection_range: 200.0,
        falloff: 0.008,
        p_d_max: 0.98,
        clutter_rate: 0.2,
    }
}

/// Sensor whose detection probability is `p_d` everywhere (unbounded range).
pub(crate) fn constant_pd_sensor(p_d: f64, clutter_rate: f64) -> SensorModel {
    SensorModel {
        kind: SensorKind::RangeBearing {
            sigma0_bearing: 0.05,
            beta_bearing: 0.0,
            sigma0_range: 10.0,
            beta_range: 0.0,
        },
        detection_range: 1e12,
        falloff: 0.008,
        p_d_max: p_d,
        clutter_rate,
    }
}
