//! Angle conventions: principal values in (−π, π] and distances mod 2π.

use std::f64::consts::{PI, TAU};

/// Reduces `x` to the principal interval (−π, π].
pub fn principal(x: f64) -> f64 {
    let y = x - TAU * ((x + PI) / TAU).floor();
    if y <= -PI {
        y + TAU
    } else if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Like [`principal`], but values within `snap` of −π are reported as
/// exactly +π. Angles such as e^{−iθ} = −1 arrive with rounding noise on
/// either side of the branch cut.
pub fn principal_snapped(x: f64, snap: f64) -> f64 {
    let y = principal(x);
    if y < -PI + snap {
        PI
    } else {
        y
    }
}

/// Snap width for reported phases: well above accumulated rounding, far
/// below any tolerance a phase is compared at.
pub const PHASE_SNAP: f64 = 1e-11;

/// Principal value of a reported phase, with the branch cut snapped.
pub fn phase(x: f64) -> f64 {
    principal_snapped(x, PHASE_SNAP)
}

/// Distance between two angles on the circle, `min(|Δ|, 2π − |Δ|)`.
pub fn mod2pi_distance(a: f64, b: f64) -> f64 {
    principal(a - b).abs()
}
