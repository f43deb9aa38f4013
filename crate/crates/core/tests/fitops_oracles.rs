use ptide_core::fitops::ols;
use ptide_core::seed::{rng_for, Stream};
use rand::Rng;

/// Dyadic data so every sum is exact in 128-bit integers.
#[test]
fn noisy_line_matches_exact_integer_oracle() {
    const SX: f64 = 1024.0; // x = i / 2^10
    const SY: f64 = 1048576.0; // y = k / 2^20
    let mut rng = rng_for(42, Stream::Test);
    let mut xi: Vec<i128> = Vec::new();
    let mut yi: Vec<i128> = Vec::new();
    for i in 0..100i128 {
        let x = 37 * i + rng.random_range(0..10);
        let noise = rng.random_range(-50_000..50_000) as f64;
        let y = (((1.75 - 0.3 * x as f64 / SX) * SY) + noise).round() as i128;
        xi.push(x);
        yi.push(y);
    }
    let n = xi.len() as i128;
    let sx: i128 = xi.iter().sum();
    let sy: i128 = yi.iter().sum();
    let sxx: i128 = xi.iter().map(|x| x * x).sum();
    let sxy: i128 = xi.iter().zip(&yi).map(|(x, y)| x * y).sum();
    let num = n * sxy - sx * sy;
    let den = n * sxx - sx * sx;
    // slope in scaled units is num/den; rescale by SX/SY.
    let slope = (num as f64 / den as f64) * SX / SY;
    let intercept_num = sy * sxx - sx * sxy;
    let intercept = (intercept_num as f64 / den as f64) / SY;

    let xs: Vec<f64> = xi.iter().map(|&x| x as f64 / SX).collect();
    let ys: Vec<f64> = yi.iter().map(|&y| y as f64 / SY).collect();
    let fit = ols(&xs, &ys).unwrap();
    assert!((fit.slope - slope).abs() < 1e-10, "{} vs {slope}", fit.slope);
    assert!((fit.intercept - intercept).abs() < 1e-10);
    assert!(fit.r2 > 0.9 && fit.r2 <= 1.0);
    assert_eq!(fit.n_points, 100);
}

#[test]
fn shifting_ys_moves_only_the_intercept() {
    let xs: Vec<f64> = (0..50).map(|i| i as f64 * 0.25).collect();
    let ys: Vec<f64> = xs.iter().map(|x| (x * 1.3).sin() + 0.5 * x).collect();
    let base = ols(&xs, &ys).unwrap();
    let shifted: Vec<f64> = ys.iter().map(|y| y + 8.0).collect();
    let moved = ols(&xs, &shifted).unwrap();
    assert!((moved.slope - base.slope).abs() < 1e-13);
    assert!((moved.intercept - base.intercept - 8.0).abs() < 1e-12);
}
