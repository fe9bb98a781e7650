//! Triangle quadrature rules in barycentric form. Weights sum to one and are
//! multiplied by the element area.

use crate::mesh::Point;

pub struct Rule {
    pub bary: &'static [[f64; 3]],
    pub weights: &'static [f64],
}

/// 3-point rule, exact for polynomials of degree 2.
pub const ORDER2: Rule = Rule {
    bary: &[
        [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
    ],
    weights: &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
};

const A1: f64 = 0.059_715_871_789_770;
const B1: f64 = 0.470_142_064_105_115;
const A2: f64 = 0.797_426_985_353_087;
const B2: f64 = 0.101_286_507_323_456;
const W1: f64 = 0.132_394_152_788_506;
const W2: f64 = 0.125_939_180_544_827;

/// 7-point Dunavant rule, exact for polynomials of degree 5. Used for error
/// norms against analytic functions.
pub const ORDER5: Rule = Rule {
    bary: &[
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [A1, B1, B1],
        [B1, A1, B1],
        [B1, B1, A1],
        [A2, B2, B2],
        [B2, A2, B2],
        [B2, B2, A2],
    ],
    weights: &[0.225, W1, W1, W1, W2, W2, W2],
};

pub fn map_point(tri: &[Point; 3], bary: &[f64; 3]) -> Point {
    [
        bary[0] * tri[0][0] + bary[1] * tri[1][0] + bary[2] * tri[2][0],
        bary[0] * tri[0][1] + bary[1] * tri[1][1] + bary[2] * tri[2][1],
    ]
}
