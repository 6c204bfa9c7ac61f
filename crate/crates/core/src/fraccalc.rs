//! Riemann–Liouville integrals and derivatives of Haar and Schauder functions in
//! closed form, lifted to whole expansions.
//!
//! Everything reduces to the second-difference kernels
//!
//! ```text
//! τ¹(a; t)    = [(t - l)_+^a - 2 (t - c)_+^a + (t - r)_+^a] / Γ(1 + a)
//! τ²(a; t, T) = [2 (T∧c - t)_+^a - (T∧l - t)_+^a - (T∧r - t)_+^a] / Γ(1 + a)
//! ```
//!
//! where `l < c < r` are the endpoints and midpoint of a dyadic cell. Away from
//! the cell both kernels are evaluated through the fractional Gaussian noise
//! covariance, which avoids subtracting nearly equal powers.

use crate::dyadic::{exp2, schauder, DyadicIndex, HolderExpansion};
use crate::error::{domain, precondition, Error, Result};

/// Gamma function (Lanczos approximation, relative error below `1e-14` on `(0, 4]`).
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// `(x)_+^a` with `0^a = 0`.
#[inline]
fn pos_pow(x: f64, a: f64) -> f64 {
    if x > 0.0 {
        x.powf(a)
    } else {
        0.0
    }
}

/// Covariance of fractional Gaussian noise at lag `t`,
/// `C_h(t) = (|t + 1|^{2h} - 2|t|^{2h} + |t - 1|^{2h}) / 2`.
///
/// For `|t| >= 4` a binomial series in `1/t²` replaces the direct formula.
pub fn fgn_covariance(h: f64, t: f64) -> f64 {
    let x = t.abs();
    let e = 2.0 * h;
    if x < 4.0 {
        return 0.5 * ((x + 1.0).powf(e) - 2.0 * x.powf(e) + (x - 1.0).abs().powf(e));
    }
    let u2 = 1.0 / (x * x);
    let mut binom = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for i in 1..=60u32 {
        binom *= (e - i as f64 + 1.0) / i as f64;
        if i % 2 == 0 {
            power *= u2;
            let term = binom * power;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() || binom == 0.0 {
                break;
            }
        }
    }
    x.powf(e) * sum
}

/// Precomputed `τ` kernels of a fixed exponent `a > 0`.
#[derive(Debug, Clone, Copy)]
pub struct Tau {
    a: f64,
    inv_gamma: f64,
}

impl Tau {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(domain(format!("kernel exponent must be positive, got {a}")));
        }
        Ok(Self {
            a,
            inv_gamma: 1.0 / gamma(1.0 + a),
        })
    }

    pub fn exponent(&self) -> f64 {
        self.a
    }

    /// `(h/2)^a · 2 · C_{a/2}(x) / Γ(1 + a)` with `h = 2^{-m}`.
    #[inline]
    fn far(&self, level: u32, x: f64) -> f64 {
        exp2((1.0 - self.a) - level as f64 * self.a) * fgn_covariance(0.5 * self.a, x) * self.inv_gamma
    }

    /// Left kernel `τ¹`.
    #[inline]
    pub fn left(&self, idx: DyadicIndex, t: f64) -> f64 {
        let [l, c, r] = idx.points();
        if t <= l {
            0.0
        } else if t >= r {
            let x = exp2(idx.level() as f64 + 1.0) * t - 2.0 * idx.shift() as f64 - 1.0;
            self.far(idx.level(), x)
        } else {
            (pos_pow(t - l, self.a) - 2.0 * pos_pow(t - c, self.a)) * self.inv_gamma
        }
    }

    /// Right kernel `τ²` on `[0, T]`; assumes `t <= T`.
    #[inline]
    pub fn right(&self, idx: DyadicIndex, t: f64, end: f64) -> f64 {
        let [l, c, r] = idx.points();
        if t <= l && end >= r {
            let x = 2.0 * idx.shift() as f64 + 1.0 - exp2(idx.level() as f64 + 1.0) * t;
            return -self.far(idx.level(), x);
        }
        (2.0 * pos_pow(end.min(c) - t, self.a)
            - pos_pow(end.min(l) - t, self.a)
            - pos_pow(end.min(r) - t, self.a))
            * self.inv_gamma
    }
}

fn check_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("order must be positive, got {alpha}")))
    }
}

fn check_unit_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("order must lie in (0, 1), got {alpha}")))
    }
}

fn check_interval(t: f64, end: f64) -> Result<()> {
    if t <= end {
        Ok(())
    } else {
        Err(domain(format!("need t <= T, got t = {t}, T = {end}")))
    }
}

/// Left kernel `τ¹` of exponent `a`.
pub fn tau1(a: f64, idx: DyadicIndex, t: f64) -> Result<f64> {
    Ok(Tau::new(a)?.left(idx, t))
}

/// Right kernel `τ²` of exponent `a` on `[0, T]`.
pub fn tau2(a: f64, idx: DyadicIndex, t: f64, end: f64) -> Result<f64> {
    check_interval(t, end)?;
    Ok(Tau::new(a)?.right(idx, t, end))
}

fn half_level(idx: DyadicIndex) -> f64 {
    exp2(0.5 * idx.level() as f64)
}

/// `I_{0+}^α H_{m,k}(t)`.
pub fn frac_integral_haar_left(alpha: f64, idx: DyadicIndex, t: f64) -> Result<f64> {
    check_order(alpha)?;
    Ok(half_level(idx) * tau1(alpha, idx, t)?)
}

/// `I_{T-}^α H_{m,k}(t)`.
pub fn frac_integral_haar_right(alpha: f64, idx: DyadicIndex, t: f64, end: f64) -> Result<f64> {
    check_order(alpha)?;
    Ok(half_level(idx) * tau2(alpha, idx, t, end)?)
}

/// `I_{0+}^α e_{m,k}(t)`.
pub fn frac_integral_schauder_left(alpha: f64, idx: DyadicIndex, t: f64) -> Result<f64> {
    check_order(alpha)?;
    Ok(half_level(idx) * tau1(1.0 + alpha, idx, t)?)
}

/// `I_{T-}^α e_{m,k}(t)`.
pub fn frac_integral_schauder_right(alpha: f64, idx: DyadicIndex, t: f64, end: f64) -> Result<f64> {
    check_order(alpha)?;
    check_interval(t, end)?;
    let boundary = schauder(idx, end) * (end - t).powf(alpha) / gamma(1.0 + alpha);
    Ok(boundary - half_level(idx) * tau2(1.0 + alpha, idx, t, end)?)
}

/// `D_{0+}^α e_{m,k}(t)`, `0 < α < 1`.
pub fn frac_deriv_schauder_left(alpha: f64, idx: DyadicIndex, t: f64) -> Result<f64> {
    check_unit_order(alpha)?;
    Ok(half_level(idx) * tau1(1.0 - alpha, idx, t)?)
}

/// `D_{T-}^α e_{m,k}(t)`, `0 < α < 1`. Singular at `t = T` unless `e_{m,k}(T) = 0`.
pub fn frac_deriv_schauder_right(alpha: f64, idx: DyadicIndex, t: f64, end: f64) -> Result<f64> {
    check_unit_order(alpha)?;
    check_interval(t, end)?;
    let at_end = schauder(idx, end);
    let boundary = if at_end == 0.0 {
        0.0
    } else if t == end {
        return Err(Error::Pole(format!("right derivative at t = T = {end}")));
    } else {
        at_end * (end - t).powf(-alpha) / gamma(1.0 - alpha)
    };
    Ok(boundary - half_level(idx) * tau2(1.0 - alpha, idx, t, end)?)
}

/// `Σ_{m<=up_to} Σ_k 2^{m(1-H)} c_{m,k} K(idx, t)`; only cells starting before `t`
/// can contribute for the left kernels, so those are the only ones visited.
fn level_sum(x: &HolderExpansion, up_to: u32, t: f64, mut kernel: impl FnMut(DyadicIndex) -> f64) -> f64 {
    let top = up_to.min(x.max_level());
    let mut total = 0.0;
    for m in 0..=top {
        let coeffs = x.level(m);
        let weight = exp2(m as f64 * (1.0 - x.hurst()));
        let width = exp2(m as f64);
        let last = ((t * width).ceil() as usize).min(coeffs.len());
        let mut level_total = 0.0;
        for (k, &c) in coeffs.iter().enumerate().take(last) {
            if c != 0.0 {
                level_total += c * kernel(DyadicIndex::new_unchecked(m, k as u64));
            }
        }
        total += weight * level_total;
    }
    total
}

/// Same as [`level_sum`] over every stored cell.
fn level_sum_all(x: &HolderExpansion, up_to: u32, mut kernel: impl FnMut(DyadicIndex) -> f64) -> f64 {
    let top = up_to.min(x.max_level());
    let mut total = 0.0;
    for m in 0..=top {
        let weight = exp2(m as f64 * (1.0 - x.hurst()));
        let mut level_total = 0.0;
        for (k, &c) in x.level(m).iter().enumerate() {
            if c != 0.0 {
                level_total += c * kernel(DyadicIndex::new_unchecked(m, k as u64));
            }
        }
        total += weight * level_total;
    }
    total
}

/// `I_{0+}^α x(t)` for an expansion truncated at `up_to`; any `α > 0`.
pub fn frac_integral_expansion(x: &HolderExpansion, alpha: f64, t: f64, up_to: u32) -> Result<f64> {
    check_order(alpha)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!("t = {t} outside [0, 1]")));
    }
    let tau = Tau::new(1.0 + alpha)?;
    let affine = x.f0() * t.powf(alpha) / gamma(1.0 + alpha)
        + (x.f1() - x.f0()) * t.powf(1.0 + alpha) / gamma(2.0 + alpha);
    Ok(affine + level_sum(x, up_to, t, |idx| tau.left(idx, t)))
}

fn check_derivative_order(x: &HolderExpansion, alpha: f64) -> Result<()> {
    check_unit_order(alpha)?;
    if alpha >= x.hurst() {
        return Err(precondition(format!(
            "derivative order {alpha} must be below the Hurst exponent {}",
            x.hurst()
        )));
    }
    Ok(())
}

/// `D_{0+}^α x(t)` for `0 < α < H`, expansion truncated at `up_to`.
pub fn frac_deriv_expansion_left(x: &HolderExpansion, alpha: f64, t: f64, up_to: u32) -> Result<f64> {
    check_derivative_order(x, alpha)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!("t = {t} outside [0, 1]")));
    }
    let constant = if x.f0() == 0.0 {
        0.0
    } else if t == 0.0 {
        return Err(Error::Pole("left derivative at t = 0 with x(0) != 0".into()));
    } else {
        x.f0() * t.powf(-alpha) / gamma(1.0 - alpha)
    };
    let tau = Tau::new(1.0 - alpha)?;
    let slope = (x.f1() - x.f0()) * t.powf(1.0 - alpha) / gamma(2.0 - alpha);
    Ok(constant + slope + level_sum(x, up_to, t, |idx| tau.left(idx, t)))
}

/// `D_{T-}^α [x - x(T)](t)` on `[0, T]`: the right derivative without the boundary
/// singularity.
pub fn frac_deriv_expansion_right_centered(
    x: &HolderExpansion,
    alpha: f64,
    t: f64,
    end: f64,
    up_to: u32,
) -> Result<f64> {
    check_derivative_order(x, alpha)?;
    check_interval(t, end)?;
    if !(0.0..=1.0).contains(&end) || t < 0.0 {
        return Err(domain(format!("need 0 <= t <= T <= 1, got t = {t}, T = {end}")));
    }
    let tau = Tau::new(1.0 - alpha)?;
    let slope = (x.f1() - x.f0()) * (end - t).powf(1.0 - alpha) / gamma(2.0 - alpha);
    Ok(-slope - level_sum_all(x, up_to, |idx| tau.right(idx, t, end)))
}

/// `D_{T-}^α x(t)` for `0 < α < H`; singular at `t = T` unless `x(T) = 0`.
pub fn frac_deriv_expansion_right(x: &HolderExpansion, alpha: f64, t: f64, end: f64, up_to: u32) -> Result<f64> {
    let centered = frac_deriv_expansion_right_centered(x, alpha, t, end, up_to)?;
    let at_end = x.eval_to(end, up_to);
    let boundary = if at_end == 0.0 {
        0.0
    } else if t == end {
        return Err(Error::Pole(format!("right derivative at t = T = {end} with x(T) != 0")));
    } else {
        at_end * (end - t).powf(-alpha) / gamma(1.0 - alpha)
    };
    Ok(boundary + centered)
}

/// Uniform constant `c_1(α)` bounding `|Σ_k τ^{1-α}(t)|` by `c_1(α) 2^{m(α-1)}`:
///
/// ```text
/// c_1(α) = 2^α (Σ_{k>=1} |C_{(1-α)/2}(k)| + 2) / Γ(2 - α)
/// ```
///
/// The covariances are all negative and telescope, so the series equals `1/2`.
pub fn c1_constant(alpha: f64) -> Result<f64> {
    check_unit_order(alpha)?;
    Ok(exp2(alpha) * 2.5 / gamma(2.0 - alpha))
}

/// `c_1(α)` with the covariance series summed explicitly up to `cutoff` and the
/// remainder `((K+1)^{1-α} - K^{1-α}) / 2` added in closed form.
pub fn c1_partial(alpha: f64, cutoff: u64) -> Result<f64> {
    check_unit_order(alpha)?;
    let h = 0.5 * (1.0 - alpha);
    let head: f64 = (1..=cutoff).map(|k| fgn_covariance(h, k as f64).abs()).sum();
    let tail = if cutoff == 0 {
        0.5
    } else {
        let k = cutoff as f64;
        0.5 * k.powf(1.0 - alpha) * ((1.0 - alpha) * (1.0 / k).ln_1p()).exp_m1()
    };
    Ok(exp2(alpha) * (head + tail + 2.0) / gamma(2.0 - alpha))
}

/// Largest number of covariance terms [`dm_sequence`] is willing to add.
const DM_MAX_TERMS: u64 = 1 << 30;

/// The sequence `d_m = 2^{m(1/2-H)} Σ_k D_{0+}^H e_{m,k}(k_0 / 2^{m_0})` for
/// `m = m_0..=M`, via `d_m = 2^H / Γ(2-H) Σ_{i<K} C_{(1-H)/2}(2i + 1)` with
/// `K = 2^{m-m_0} k_0`. Its partial sums diverge to `-∞`.
pub fn dm_sequence(hurst: f64, m0: u32, k0: u64, max_level: u32) -> Result<Vec<f64>> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(domain(format!("Hurst exponent must lie in (0, 1), got {hurst}")));
    }
    if m0 > 62 || k0 >= 1u64 << m0 {
        return Err(domain(format!("k0 = {k0} out of range for m0 = {m0}")));
    }
    if max_level < m0 {
        return Err(domain(format!("M = {max_level} below m0 = {m0}")));
    }
    if k0 == 0 {
        return Ok(vec![0.0; (max_level - m0 + 1) as usize]);
    }
    let span = max_level - m0;
    if span >= 64 || k0.checked_shl(span).map_or(true, |n| n > DM_MAX_TERMS || n >> span != k0) {
        return Err(domain(format!("M = {max_level} needs more than {DM_MAX_TERMS} terms")));
    }
    let scale = exp2(hurst) / gamma(2.0 - hurst);
    let h = 0.5 * (1.0 - hurst);
    let mut out = Vec::with_capacity(span as usize + 1);
    let mut sum = 0.0;
    let mut done = 0u64;
    for j in 0..=span {
        let terms = k0 << j;
        sum += (done..terms)
            .map(|i| fgn_covariance(h, (2 * i + 1) as f64))
            .sum::<f64>();
        done = terms;
        out.push(scale * sum);
    }
    Ok(out)
}
