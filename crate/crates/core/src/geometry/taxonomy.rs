use serde::Serialize;

use super::{GeometryError, ProfileCurve};
use crate::orbit::{Orbit, OrbitClass};
use crate::prescription::{profile_of, HSource};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "label")]
pub enum SurfaceLabel {
    Cylinder {
        radius: f64,
    },
    /// Profile meets the axis periodically, `x(s0 + kT) = 0`.
    AxisPeriodic {
        period: f64,
    },
    Tube {
        period: f64,
    },
    NodoidFamily {
        period: f64,
    },
    UnduloidFamily {
        period: f64,
    },
    /// Profile leaves along a direction with `x' -> 0`.
    AxisAsymptotic,
    LineAsymptotic {
        t0: f64,
    },
    Unbounded,
}

impl SurfaceLabel {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceLabel::Cylinder { .. } => "Cylinder",
            SurfaceLabel::AxisPeriodic { .. } => "AxisPeriodic",
            SurfaceLabel::Tube { .. } => "Tube",
            SurfaceLabel::NodoidFamily { .. } => "NodoidFamily",
            SurfaceLabel::UnduloidFamily { .. } => "UnduloidFamily",
            SurfaceLabel::AxisAsymptotic => "AxisAsymptotic",
            SurfaceLabel::LineAsymptotic { .. } => "LineAsymptotic",
            SurfaceLabel::Unbounded => "Unbounded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaxonomyReport {
    pub label: SurfaceLabel,
    pub embedded_profile: bool,
    pub z_monotone: bool,
    pub warnings: Vec<String>,
}

fn is_constant(orbit: &Orbit) -> bool {
    matches!(orbit.h.source(), HSource::Constant(_)) || {
        let p = profile_of(&orbit.h);
        p.max_value - p.min_value < 1e-12
    }
}

/// Surface type from the orbit class, profile embeddedness and `z` monotonicity.
pub fn surface_taxonomy(
    orbit: &Orbit,
    profile: &ProfileCurve,
    class: &OrbitClass,
) -> Result<TaxonomyReport, GeometryError> {
    let mut warnings = Vec::new();
    let hp = profile_of(&orbit.h);
    if !hp.classification_applies() {
        let mut why = Vec::new();
        if !hp.is_positive {
            why.push("not positive");
        }
        if !hp.is_even {
            why.push("not even");
        }
        if !hp.is_increasing_on_0_1 {
            why.push("not increasing on [0, 1]");
        }
        warnings.push(format!(
            "h is {}; the five-case list for positive, even, increasing h does not apply",
            why.join(", ")
        ));
    }
    let embedded = profile.is_embedded();
    let z_monotone = profile.z_strictly_monotone();
    let label = match class {
        OrbitClass::Equilibrium { radius } => SurfaceLabel::Cylinder { radius: *radius },
        OrbitClass::AxisMeeting {
            spacing: Some(period), ..
        } => SurfaceLabel::AxisPeriodic { period: *period },
        OrbitClass::AxisMeeting { spacing: None, .. } => {
            return Err(GeometryError::Unclassified(
                "single axis contact without an asymptote; extend the horizon".into(),
            ))
        }
        OrbitClass::TubeClosedProfile { period } => {
            if is_constant(orbit) {
                warnings.push("a tube with constant h contradicts the known rigidity for constant mean curvature; suspect the numerics".into());
            }
            SurfaceLabel::Tube { period: *period }
        }
        OrbitClass::NodoidType { period, .. } => {
            if embedded {
                warnings.push("nodoid-type orbit but no profile self-intersection found in the sampled range".into());
            }
            SurfaceLabel::NodoidFamily { period: *period }
        }
        OrbitClass::ClosedUnduloidType { period, .. } => {
            if !embedded {
                warnings.push("unduloid-type orbit with a self-intersecting profile".into());
            }
            SurfaceLabel::UnduloidFamily { period: *period }
        }
        OrbitClass::AsymptoteToYZeroAxis { .. } => SurfaceLabel::AxisAsymptotic,
        OrbitClass::AsymptoteToLine { t0, .. } => SurfaceLabel::LineAsymptotic { t0: *t0 },
        OrbitClass::EscapeUnbounded { .. } => SurfaceLabel::Unbounded,
    };
    Ok(TaxonomyReport {
        label,
        embedded_profile: embedded,
        z_monotone,
        warnings,
    })
}
