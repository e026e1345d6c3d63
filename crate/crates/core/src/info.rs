//! Entropies, divergences and distances on finite outcome sets, in nats.

use crate::error::{out_of_range, Error, Result};

/// `−α ln α − (1−α) ln(1−α)`.
pub fn binary_entropy(alpha: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    h(alpha) + h(1.0 - alpha)
}

/// Binary entropy in bits.
pub fn binary_entropy_bits(alpha: f64) -> f64 {
    nats_to_bits(binary_entropy(alpha))
}

pub fn nats_to_bits(x: f64) -> f64 {
    x / std::f64::consts::LN_2
}

fn same_support(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::MismatchedSupport(p.len(), q.len()));
    }
    Ok(())
}

/// `Σ p ln(p/q)`, `+∞` when `p` is not dominated by `q`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    same_support(p, q)?;
    let mut kl = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return Ok(f64::INFINITY);
            }
            kl += a * (a / b).ln();
        }
    }
    Ok(kl.max(0.0))
}

/// `d(a ‖ b)` between Bernoulli distributions.
pub fn binary_kl(a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(out_of_range(format!("binary_kl({a}, {b})")));
    }
    kl_divergence(&[a, 1.0 - a], &[b, 1.0 - b])
}

fn check_bias(nu: f64) -> Result<()> {
    if nu > 0.0 && nu < 0.25 {
        Ok(())
    } else {
        Err(out_of_range(format!("nu = {nu} not in (0, 1/4)")))
    }
}

/// `D_ν = KL(Ber(½+ν) ‖ Ber(½−ν)) = 2ν ln((1+2ν)/(1−2ν))`.
pub fn bernoulli_bias_kl(nu: f64) -> Result<f64> {
    check_bias(nu)?;
    // 2 atanh(2ν) = ln((1+2ν)/(1−2ν)) without cancellation for small ν
    Ok(4.0 * nu * (2.0 * nu).atanh())
}

/// `2(1 − Σ √(p q))`.
pub fn hellinger_sq(p: &[f64], q: &[f64]) -> Result<f64> {
    same_support(p, q)?;
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    Ok((2.0 * (1.0 - bc)).clamp(0.0, 2.0))
}

/// Squared Hellinger distance between `Ber(½+ν)^{⊗k}` and `Ber(½−ν)^{⊗k}`.
pub fn hellinger_sq_biased_product(nu: f64, k: usize) -> Result<f64> {
    if !(0.0..0.5).contains(&nu) || k == 0 {
        return Err(out_of_range(format!("nu = {nu}, k = {k}")));
    }
    let rho = (1.0 - 4.0 * nu * nu).powf(k as f64 / 2.0);
    Ok(2.0 * (1.0 - rho))
}

/// `ν ≥ √(ε / 2k)`.
pub fn hellinger_separation_holds(nu: f64, eps: f64, k: usize) -> bool {
    nu >= (eps / (2.0 * k as f64)).sqrt()
}

/// `½ Σ |p − q|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    same_support(p, q)?;
    Ok((0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()).min(1.0))
}

/// `max(0, 1 − (avg_kl + ln 2)/ln M)`.
pub fn fano_error_lower_bound(m: usize, avg_kl_to_mean: f64) -> Result<f64> {
    if m < 2 {
        return Err(out_of_range(format!("M = {m} must be at least 2")));
    }
    if !(avg_kl_to_mean >= 0.0) {
        return Err(out_of_range("average KL must be nonnegative"));
    }
    Ok((1.0 - (avg_kl_to_mean + std::f64::consts::LN_2) / (m as f64).ln()).max(0.0))
}

/// `Δ(θ, θ′) · D_ν`.
pub fn kl_additivity_check(theta: &[i8], theta2: &[i8], nu: f64) -> Result<f64> {
    if theta.len() != theta2.len() {
        return Err(Error::MismatchedSupport(theta.len(), theta2.len()));
    }
    let hamming = theta.iter().zip(theta2).filter(|(a, b)| a != b).count();
    Ok(hamming as f64 * bernoulli_bias_kl(nu)?)
}

/// Mixture `P̄ = (1/M) Σ_v P_v` of the rows of a channel.
pub fn mean_distribution(channel: &[Vec<f64>]) -> Vec<f64> {
    let m = channel.len() as f64;
    let mut bar = vec![0.0; channel[0].len()];
    for row in channel {
        for (b, x) in bar.iter_mut().zip(row) {
            *b += x / m;
        }
    }
    bar
}

/// `(1/M) Σ_v KL(P_v ‖ P̄)`, which equals `I(V; Y)` for uniform `V`.
pub fn average_kl_to_mean(channel: &[Vec<f64>]) -> Result<f64> {
    let bar = mean_distribution(channel);
    let mut total = 0.0;
    for row in channel {
        total += kl_divergence(row, &bar)?;
    }
    Ok(total / channel.len() as f64)
}

/// `H(V | Y)` for `V` uniform on the rows, computed from the posterior.
pub fn conditional_entropy_uniform_prior(channel: &[Vec<f64>]) -> f64 {
    let m = channel.len() as f64;
    let outcomes = channel[0].len();
    let mut h = 0.0;
    for y in 0..outcomes {
        let py: f64 = channel.iter().map(|r| r[y] / m).sum();
        if py <= 0.0 {
            continue;
        }
        for row in channel {
            let joint = row[y] / m;
            if joint > 0.0 {
                h -= joint * (joint / py).ln();
            }
        }
    }
    h
}
