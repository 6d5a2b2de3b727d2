//! Seeded sampling of chart-interior wedge points.

use wedgeheat_core::num::SplitMix64;
use wedgeheat_core::wedge::{WedgeModel, WedgePoint};

/// Draw a random wedge point with `r` away from both the tip and the
/// wall and fiber coordinates in the interior of the preset chart (polar
/// angles keep clear of the poles, where the chart degenerates).
///
/// Returns `None` for custom fibers, whose charts carry no published
/// coordinate ranges.
pub fn random_wedge_point(model: &WedgeModel, rng: &mut SplitMix64) -> Option<WedgePoint> {
    let axes = model.fiber().axes()?;
    let x = axes
        .iter()
        .map(|a| {
            let span = a.hi - a.lo;
            if a.periodic {
                a.lo + rng.uniform(0.05, 0.95) * span
            } else {
                a.lo + rng.uniform(0.2, 0.8) * span
            }
        })
        .collect();
    Some(WedgePoint::new(rng.uniform(0.1, 0.9), rng.uniform(0.0, model.sigma_length()), x))
}
