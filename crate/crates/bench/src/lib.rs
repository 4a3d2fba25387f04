//! Deterministic fixtures shared by the benchmarks.

use implicit_online::{Loss, MirrorSetup};

/// Cheap deterministic values in `[-1, 1]`.
fn wave(i: usize, k: usize) -> f64 {
    ((i * 7 + k * 13) as f64 * 0.618_033_988_7).sin()
}

/// One prox instance per loss family in dimension `d`, as
/// `(family, loss, x_t)`.
pub fn prox_fixtures(d: usize) -> Vec<(&'static str, Loss, Vec<f64>)> {
    let z: Vec<f64> = (0..d).map(|k| 0.5 + wave(1, k)).collect();
    let x: Vec<f64> = (0..d).map(|k| 2.0 * wave(2, k)).collect();
    vec![
        ("hinge", Loss::hinge(z.clone(), 1.0).unwrap(), x.clone()),
        ("absolute", Loss::absolute(z.clone(), 3.0).unwrap(), x.clone()),
        ("square", Loss::square(z.clone(), 3.0).unwrap(), x.clone()),
        ("quad1d", Loss::quad1d(40.0).unwrap(), vec![x[0]]),
        ("linear", Loss::linear(z, 1.5).unwrap(), x),
    ]
}

pub fn domains() -> [(&'static str, MirrorSetup); 2] {
    [("unconstrained", MirrorSetup::unconstrained()), ("ball", MirrorSetup::ball(1.0).unwrap())]
}

/// `n` hinge losses in dimension `d` with alternating labels.
pub fn hinge_stream(n: usize, d: usize) -> Vec<Loss> {
    (0..n)
        .map(|i| {
            let z: Vec<f64> = (0..d).map(|k| wave(i, k)).collect();
            Loss::hinge(z, if i % 2 == 0 { 1.0 } else { -1.0 }).unwrap()
        })
        .collect()
}
