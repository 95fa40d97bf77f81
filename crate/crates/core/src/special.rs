//! Special functions not covered by `std`.

/// Γ(x), from the platform libm.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Even Bernoulli numbers B_2, B_4, …, B_16.
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Riemann zeta function for real `s != 1`, by Euler–Maclaurin summation.
///
/// Accurate to ~1e-15 for `s > -10`; used for the origin weight of the
/// discrete nonlocal sum, where `s = 1/3`.
pub fn riemann_zeta(s: f64) -> f64 {
    assert!(s != 1.0, "zeta has a pole at s = 1");
    const N: usize = 24;
    let n = N as f64;
    let head: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    let mut sum = head + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // Σ_k B_2k/(2k)! · s(s+1)…(s+2k-2) · N^{-s-2k+1}
    let mut rising = s; // s(s+1)...(s+2k-2) for k = 1
    let mut factorial = 2.0; // (2k)!
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let k = k + 1;
        sum += b / factorial * rising * n.powf(-s - 2.0 * k as f64 + 1.0);
        let m = 2.0 * k as f64;
        rising *= (s + m - 1.0) * (s + m);
        factorial *= (m + 1.0) * (m + 2.0);
    }
    sum
}
