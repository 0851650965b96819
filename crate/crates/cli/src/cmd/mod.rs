pub mod duality;
pub mod exponents;
pub mod fremlin;
pub mod geometry;
pub mod kakeya;
pub mod polysurf;
pub mod proptest;

/// Least-squares slope of `y` on `x` and the largest absolute residual.
pub fn fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    if x.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let slope = kbl_core::linalg::ols_slope(x, y);
    let n = x.len() as f64;
    let icpt = (y.iter().sum::<f64>() - slope * x.iter().sum::<f64>()) / n;
    let res = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).abs()).fold(0.0, f64::max);
    (slope, res)
}
