//! Combat and spotting probability models.

/// Hit probability per attacking strength point:
/// `clamp(0.05, 0.95, 0.5 + 0.1 * (attack - defense + terrain_mod))`.
pub fn hit_probability(attack: u8, defense: u8, terrain_mod: i32) -> f64 {
    let diff = attack as i32 - defense as i32 + terrain_mod;
    (0.5 + 0.1 * diff as f64).clamp(0.05, 0.95)
}

/// Binomial(n, p) pmf by the direct product formula.
pub fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut coeff = 1.0f64;
    for k in 0..=n {
        if k > 0 {
            coeff = coeff * (n - k + 1) as f64 / k as f64;
        }
        out.push(coeff * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32));
    }
    out
}

/// Inverse CDF of Binomial(n, p) at `u` in `[0, 1)`: the smallest `k` with
/// `u < F(k)`. A single uniform therefore yields exactly the binomial law.
pub fn binomial_inverse_cdf(n: u32, p: f64, u: f64) -> u32 {
    let q = 1.0 - p;
    // pmf(0) = q^n, pmf(k) = pmf(k-1) * (n-k+1)/k * p/q.
    let mut pmf = q.powi(n as i32);
    let mut cdf = pmf;
    let mut k = 0;
    while u >= cdf && k < n {
        k += 1;
        pmf *= (n - k + 1) as f64 / k as f64 * (p / q);
        cdf += pmf;
    }
    k
}

/// Casualties from one engagement: `min(defender, Binomial^-1(attacker, p_hit; u))`.
pub fn casualties(attacker_strength: u8, defender_strength: u8, p_hit: f64, u: f64) -> u8 {
    let k = binomial_inverse_cdf(attacker_strength as u32, p_hit, u);
    k.min(defender_strength as u32) as u8
}

/// `0.9 * (1 - d / (sight + 1)) * concealment`.
pub fn spot_probability(distance: u32, sight: u32, concealment: f64) -> f64 {
    0.9 * (1.0 - distance as f64 / (sight as f64 + 1.0)) * concealment
}
