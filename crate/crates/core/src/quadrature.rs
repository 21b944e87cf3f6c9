//! Fixed deterministic quadrature rules.
//!
//! Every integral over an interval in this crate goes through composite
//! Simpson on [`SIMPSON_POINTS`] nodes unless a closed form exists. Short
//! sub-cell integrals (cumulative tables, design cells) use a 5-point
//! Gauss-Legendre rule.

/// Number of Simpson nodes (`2^14 + 1`).
pub const SIMPSON_POINTS: usize = (1 << 14) + 1;

/// Composite Simpson rule on `[a, b]` with [`SIMPSON_POINTS`] nodes.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    simpson_n(f, a, b, SIMPSON_POINTS)
}

/// Composite Simpson rule with an explicit (odd) number of nodes.
pub fn simpson_n<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, points: usize) -> f64 {
    assert!(points >= 3 && points % 2 == 1, "Simpson needs an odd node count >= 3");
    let intervals = points - 1;
    let h = (b - a) / intervals as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..intervals {
        let v = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// Simpson nodes on `[a, b]` together with their weights.
pub fn simpson_nodes(a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let intervals = SIMPSON_POINTS - 1;
    let h = (b - a) / intervals as f64;
    let mut xs = Vec::with_capacity(SIMPSON_POINTS);
    let mut ws = Vec::with_capacity(SIMPSON_POINTS);
    for i in 0..SIMPSON_POINTS {
        xs.push(a + i as f64 * h);
        let w = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        ws.push(w * h / 3.0);
    }
    (xs, ws)
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Five-point Gauss-Legendre rule on `[a, b]`; exact for polynomials of degree 9.
pub fn gauss_legendre5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS.iter())
        .map(|(&u, &w)| w * f(mid + half * u))
        .sum::<f64>()
        * half
}

/// Pairwise summation; the result does not depend on how the input was produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
