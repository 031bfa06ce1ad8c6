//! Manufactured test problems with hand-derived sources.

use std::f64::consts::PI;

use crate::levelset::ProblemDefinition;

/// Interval of half-width 0.5 oscillating with centre ρ(t) = sin(2πt)/π on [-1, 1], T = 0.5.
pub fn manufactured_moving_interval() -> ProblemDefinition {
    let rho = |t: f64| (2.0 * PI * t).sin() / PI;
    let drho = |t: f64| 2.0 * (2.0 * PI * t).cos();
    ProblemDefinition {
        name: "moving_interval".into(),
        domain: (-1.0, 1.0),
        t_end: 0.5,
        phi: Box::new(move |x, t| (x - rho(t)).abs() - 0.5),
        w: Box::new(move |_, t| drho(t)),
        // u = cos(2π(x - ρ)) sin(πt): u_t + w u_x = π cos(2πξ) cos(πt), u_xx = -4π² u
        f: Box::new(move |x, t| {
            let c = (2.0 * PI * (x - rho(t))).cos();
            PI * c * (PI * t).cos() + 4.0 * PI * PI * c * (PI * t).sin()
        }),
        u_exact: Some(Box::new(move |x, t| {
            (2.0 * PI * (x - rho(t))).cos() * (PI * t).sin()
        })),
        u0: Box::new(|_| 0.0),
        u0_dt: Some(Box::new(|x| PI * (2.0 * PI * x).cos())),
        w_inf: 2.0,
        boundary: Some(Box::new(move |t| vec![rho(t) - 0.5, rho(t) + 0.5])),
    }
}

/// Interval of radius R = 0.505 translating with speed 0.5; the solution is a quartic polynomial.
pub fn manufactured_poly_test() -> ProblemDefinition {
    const R: f64 = 0.505;
    const W: f64 = 0.5;
    ProblemDefinition {
        name: "poly_test".into(),
        domain: (-1.0, 1.0),
        t_end: 0.5,
        phi: Box::new(|x, t| (x - W * t).abs() - R),
        w: Box::new(|_, _| W),
        // transported profile: u_t + w u_x = 0, so f = -u_xx
        f: Box::new(|x, t| {
            let xi = x - W * t;
            4.0 * R * R - 12.0 * xi * xi
        }),
        u_exact: Some(Box::new(|x, t| {
            let xi = x - W * t;
            (xi * xi - R * R).powi(2)
        })),
        u0: Box::new(|x| (x * x - R * R).powi(2)),
        u0_dt: Some(Box::new(|x| -W * 4.0 * x * (x * x - R * R))),
        w_inf: W,
        boundary: Some(Box::new(|t| vec![W * t - R, W * t + R])),
    }
}

/// Whole background domain [-1, 1] (φ ≡ -1), u = t(x³ - 3x) which has zero flux at x = ±1.
pub fn manufactured_fitted_static() -> ProblemDefinition {
    const W: f64 = 0.5;
    ProblemDefinition {
        name: "fitted_static".into(),
        domain: (-1.0, 1.0),
        t_end: 0.5,
        phi: Box::new(|_, _| -1.0),
        w: Box::new(|_, _| W),
        f: Box::new(|x, t| (x * x * x - 3.0 * x) + W * t * (3.0 * x * x - 3.0) - 6.0 * x * t),
        u_exact: Some(Box::new(|x, t| t * (x * x * x - 3.0 * x))),
        u0: Box::new(|_| 0.0),
        u0_dt: Some(Box::new(|x| x * x * x - 3.0 * x)),
        w_inf: 0.0,
        boundary: Some(Box::new(|_| vec![])),
    }
}

pub fn problem_by_name(name: &str) -> Option<ProblemDefinition> {
    match name {
        "moving_interval" => Some(manufactured_moving_interval()),
        "poly_test" => Some(manufactured_poly_test()),
        "fitted_static" => Some(manufactured_fitted_static()),
        _ => None,
    }
}
