//! Fixed quadrature rules on triangles and edges.
//!
//! Triangle rules are given in barycentric coordinates with weights that sum
//! to one; multiply by the element area to integrate.

/// A quadrature point on the reference triangle.
#[derive(Clone, Copy, Debug)]
pub struct TriPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

/// Symmetric 3-point rule, exact for polynomials of degree 2.
pub const TRI_DEGREE2: [TriPoint; 3] = [
    TriPoint { bary: [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], weight: 1.0 / 3.0 },
    TriPoint { bary: [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], weight: 1.0 / 3.0 },
    TriPoint { bary: [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], weight: 1.0 / 3.0 },
];

// (6 -+ sqrt(15)) / 21 and (9 +- 2 sqrt(15)) / 21
const A1: f64 = 0.101_286_507_323_456_33;
const B1: f64 = 0.797_426_985_353_087_3;
const W1: f64 = 0.125_939_180_544_827_14;
const A2: f64 = 0.470_142_064_105_115_05;
const B2: f64 = 0.059_715_871_789_769_82;
const W2: f64 = 0.132_394_152_788_506_19;

/// Symmetric 7-point rule, exact for polynomials of degree 5.
pub const TRI_DEGREE5: [TriPoint; 7] = [
    TriPoint { bary: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], weight: 0.225 },
    TriPoint { bary: [A1, A1, B1], weight: W1 },
    TriPoint { bary: [A1, B1, A1], weight: W1 },
    TriPoint { bary: [B1, A1, A1], weight: W1 },
    TriPoint { bary: [A2, A2, B2], weight: W2 },
    TriPoint { bary: [A2, B2, A2], weight: W2 },
    TriPoint { bary: [B2, A2, A2], weight: W2 },
];

/// 3-point Gauss-Legendre rule on `[0, 1]` as `(parameter, weight)`, exact
/// for degree 5.
pub const EDGE_GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// Maps barycentric coordinates to a physical point.
#[inline]
pub fn bary_to_point(corners: &[[f64; 2]; 3], bary: [f64; 3]) -> [f64; 2] {
    [
        bary[0] * corners[0][0] + bary[1] * corners[1][0] + bary[2] * corners[2][0],
        bary[0] * corners[0][1] + bary[1] * corners[1][1] + bary[2] * corners[2][1],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    // integral of x^a y^b over the unit triangle is a! b! / (a + b + 2)!
    fn monomial_exact(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    fn integrate(rule: &[TriPoint], a: u32, b: u32) -> f64 {
        let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        rule.iter()
            .map(|q| {
                let p = bary_to_point(&corners, q.bary);
                q.weight * 0.5 * p[0].powi(a as i32) * p[1].powi(b as i32)
            })
            .sum()
    }

    #[test]
    fn weights_sum_to_one() {
        let s2: f64 = TRI_DEGREE2.iter().map(|q| q.weight).sum();
        let s5: f64 = TRI_DEGREE5.iter().map(|q| q.weight).sum();
        let se: f64 = EDGE_GAUSS3.iter().map(|q| q.1).sum();
        assert!((s2 - 1.0).abs() < 1e-15);
        assert!((s5 - 1.0).abs() < 1e-15);
        assert!((se - 1.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_rules_are_exact_to_their_degree() {
        for deg in 0..=5u32 {
            for a in 0..=deg {
                let b = deg - a;
                let exact = monomial_exact(a, b);
                assert!((integrate(&TRI_DEGREE5, a, b) - exact).abs() < 1e-15, "deg5 x^{a}y^{b}");
                if deg <= 2 {
                    assert!((integrate(&TRI_DEGREE2, a, b) - exact).abs() < 1e-15, "deg2 x^{a}y^{b}");
                }
            }
        }
    }

    #[test]
    fn edge_rule_exact_to_degree_five() {
        for k in 0..=5 {
            let q: f64 = EDGE_GAUSS3.iter().map(|&(t, w)| w * t.powi(k)).sum();
            assert!((q - 1.0 / f64::from(k as u32 + 1)).abs() < 1e-15);
        }
    }
}
