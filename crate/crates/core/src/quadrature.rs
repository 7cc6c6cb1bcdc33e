//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 40;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let sum = f(center - dx) + f(center + dx);
        kronrod += w * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by recursive
/// bisection. Fails with the offending subinterval when the recursion limit
/// is hit before the local error estimate meets its share of `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    recurse(f, a, b, tol, 0)
}

fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let (value, estimate) = gk15(f, a, b);
    if !value.is_finite() {
        return Err(Error::Quadrature { start: a, end: b, estimate: f64::INFINITY });
    }
    // below this the estimate is rounding noise, not truncation error
    if estimate <= tol || estimate <= 50.0 * f64::EPSILON * value.abs() {
        return Ok(value);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature { start: a, end: b, estimate });
    }
    let mid = 0.5 * (a + b);
    Ok(recurse(f, a, mid, 0.5 * tol, depth + 1)? + recurse(f, mid, b, 0.5 * tol, depth + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions() {
        let v = integrate(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let v = integrate(&|x: f64| (3.0 * x).exp(), -1.0, 2.0, 1e-12).unwrap();
        let exact = ((6.0f64).exp() - (-3.0f64).exp()) / 3.0;
        assert!((v - exact).abs() < 1e-10);
        let v = integrate(&|x: f64| x.powi(7), 2.0, 0.0, 1e-12).unwrap();
        assert!((v + 32.0).abs() < 1e-12);
    }

    #[test]
    fn reports_offending_interval() {
        let err = integrate(&|x: f64| 1.0 / x, 0.0, 1.0, 1e-12).unwrap_err();
        match err {
            Error::Quadrature { start, end, .. } => assert!(start >= 0.0 && end <= 1.0 && end > start),
            other => panic!("unexpected {other:?}"),
        }
    }
}
