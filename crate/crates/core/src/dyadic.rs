//! Haar and Faber–Schauder functions on `[0, 1]` and functions represented by
//! their (weighted) Takagi–Landsberg expansion
//!
//! ```text
//! f(t) = f(0)(1 - t) + f(1) t + Σ_m Σ_k 2^{m(1/2 - H)} c_{m,k} e_{m,k}(t)
//! ```
//!
//! with `e_{m,k}(t) = 2^{-m/2} e_{0,0}(2^m t - k)` and the tent
//! `e_{0,0}(t) = min(t, 1 - t)_+`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, input, Error, Result};

/// Label of a Haar/Schauder basis function: level `m`, shift `k < 2^m`.
///
/// The flat index `n = 2^m + k` starts at 1 and enumerates the basis level by
/// level, left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicIndex {
    level: u32,
    shift: u64,
}

/// Levels beyond this make `2^m` lose meaning as a dyadic step in `f64`.
pub const MAX_LEVEL: u32 = 52;

impl DyadicIndex {
    pub fn new(level: u32, shift: u64) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(domain(format!("level {level} exceeds {MAX_LEVEL}")));
        }
        if shift >= 1u64 << level {
            return Err(domain(format!("shift {shift} out of range for level {level}")));
        }
        Ok(Self { level, shift })
    }

    pub(crate) const fn new_unchecked(level: u32, shift: u64) -> Self {
        Self { level, shift }
    }

    /// Inverse of [`DyadicIndex::flat`].
    pub fn from_flat(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(domain("flat index must be at least 1"));
        }
        let level = 63 - n.leading_zeros();
        Self::new(level, n - (1u64 << level))
    }

    pub fn level(self) -> u32 {
        self.level
    }

    pub fn shift(self) -> u64 {
        self.shift
    }

    pub fn flat(self) -> u64 {
        (1u64 << self.level) + self.shift
    }

    /// Support width `2^{-m}`.
    pub fn width(self) -> f64 {
        pow2(-(self.level as i32))
    }

    pub fn left(self) -> f64 {
        self.shift as f64 * self.width()
    }

    pub fn mid(self) -> f64 {
        (self.shift as f64 + 0.5) * self.width()
    }

    pub fn right(self) -> f64 {
        (self.shift as f64 + 1.0) * self.width()
    }

    /// The three dyadic points `(k, k + 1/2, k + 1) / 2^m`.
    pub fn points(self) -> [f64; 3] {
        [self.left(), self.mid(), self.right()]
    }

    /// All indices of levels `0..=max_level` in flat order.
    pub fn up_to(max_level: u32) -> impl Iterator<Item = DyadicIndex> {
        (0..=max_level).flat_map(|m| (0..1u64 << m).map(move |k| DyadicIndex::new_unchecked(m, k)))
    }
}

/// Exact power of two.
pub(crate) fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// `2^x` for non-integral exponents.
pub(crate) fn exp2(x: f64) -> f64 {
    x.exp2()
}

/// Haar function `H_{m,k}`: `2^{m/2}` on `(k/2^m, (k+1/2)/2^m]`, `-2^{m/2}` on
/// `((k+1/2)/2^m, (k+1)/2^m]`, zero elsewhere.
pub fn haar(idx: DyadicIndex, t: f64) -> f64 {
    let [l, c, r] = idx.points();
    let height = exp2(0.5 * idx.level as f64);
    if t > l && t <= c {
        height
    } else if t > c && t <= r {
        -height
    } else {
        0.0
    }
}

/// Faber–Schauder tent `e_{m,k}`, the primitive of [`haar`].
pub fn schauder(idx: DyadicIndex, t: f64) -> f64 {
    let scale = pow2(idx.level as i32);
    let u = t * scale - idx.shift as f64;
    let tent = u.min(1.0 - u).max(0.0);
    tent * exp2(-0.5 * idx.level as f64)
}

/// A continuous function on `[0, 1]` given by its Takagi–Landsberg representation,
/// truncated after level [`HolderExpansion::max_level`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderExpansion {
    #[serde(rename = "H")]
    hurst: f64,
    f0: f64,
    f1: f64,
    levels: Vec<Vec<f64>>,
}

impl HolderExpansion {
    /// Builds an expansion from per-level coefficient arrays. Level `m` must hold
    /// exactly `2^m` finite values; at least level 0 must be present.
    pub fn new(hurst: f64, f0: f64, f1: f64, levels: Vec<Vec<f64>>) -> Result<Self> {
        if !(hurst > 0.0) || !hurst.is_finite() {
            return Err(domain(format!("Hurst exponent must be positive, got {hurst}")));
        }
        if !f0.is_finite() || !f1.is_finite() {
            return Err(input("boundary values must be finite"));
        }
        if levels.is_empty() {
            return Err(input("an expansion needs at least level 0"));
        }
        if levels.len() > MAX_LEVEL as usize + 1 {
            return Err(input("too many levels"));
        }
        for (m, level) in levels.iter().enumerate() {
            if level.len() != 1usize << m {
                return Err(input(format!(
                    "level {m} has {} coefficients, expected {}",
                    level.len(),
                    1usize << m
                )));
            }
            if level.iter().any(|c| !c.is_finite()) {
                return Err(input(format!("non-finite coefficient at level {m}")));
            }
        }
        Ok(Self { hurst, f0, f1, levels })
    }

    /// The affine function `f0 (1 - t) + f1 t` with zero coefficients up to `max_level`.
    pub fn affine(hurst: f64, f0: f64, f1: f64, max_level: u32) -> Result<Self> {
        Self::new(hurst, f0, f1, zero_levels(max_level))
    }

    /// Samples `f` on the dyadic grid of level `p + 1` and returns its expansion up to level `p`:
    /// `c_{m,k} = 2^{mH} [2 f((k+1/2)/2^m) - f((k+1)/2^m) - f(k/2^m)]`.
    pub fn expand(f: impl Fn(f64) -> f64, hurst: f64, p: u32) -> Result<Self> {
        if p >= MAX_LEVEL {
            return Err(domain(format!("level {p} too deep")));
        }
        let q = p + 1;
        let n = 1usize << q;
        let h = pow2(-(q as i32));
        let samples = (0..=n)
            .map(|j| {
                let v = f(j as f64 * h);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(input(format!("non-finite sample at t = {}", j as f64 * h)))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_dyadic_samples(&samples, hurst)
    }

    /// Expansion from samples `f(j / 2^q)`, `j = 0..=2^q`, `q >= 1`; the result has depth `q - 1`.
    pub fn from_dyadic_samples(samples: &[f64], hurst: f64) -> Result<Self> {
        let len = samples.len();
        if len < 3 || !(len - 1).is_power_of_two() {
            return Err(input(format!("need 2^q + 1 samples with q >= 1, got {len}")));
        }
        if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
            return Err(input(format!("non-finite sample at index {j}")));
        }
        let q = (len - 1).trailing_zeros();
        let levels = (0..q)
            .map(|m| {
                let stride = 1usize << (q - m);
                let weight = exp2(m as f64 * hurst);
                (0..1usize << m)
                    .map(|k| {
                        let l = samples[k * stride];
                        let c = samples[k * stride + stride / 2];
                        let r = samples[(k + 1) * stride];
                        weight * (2.0 * c - r - l)
                    })
                    .collect()
            })
            .collect();
        Self::new(hurst, samples[0], samples[len - 1], levels)
    }

    /// The Takagi–Landsberg function `x^H` truncated at level `p` (all coefficients 1).
    pub fn takagi_landsberg(hurst: f64, p: u32) -> Result<Self> {
        if p > MAX_LEVEL {
            return Err(domain(format!("level {p} too deep")));
        }
        let levels = (0..=p).map(|m| vec![1.0; 1usize << m]).collect();
        Self::new(hurst, 0.0, 0.0, levels)
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn f1(&self) -> f64 {
        self.f1
    }

    pub fn max_level(&self) -> u32 {
        self.levels.len() as u32 - 1
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn level(&self, m: u32) -> &[f64] {
        &self.levels[m as usize]
    }

    /// Coefficient `c_{m,k}`; zero beyond the stored depth.
    pub fn coeff(&self, idx: DyadicIndex) -> f64 {
        self.levels
            .get(idx.level as usize)
            .map_or(0.0, |level| level[idx.shift as usize])
    }

    /// Level weight `2^{m(1/2 - H)}` multiplying `c_{m,k} e_{m,k}`.
    pub fn weight(&self, m: u32) -> f64 {
        exp2(m as f64 * (0.5 - self.hurst))
    }

    /// `L = max |c_{m,k}|` over the stored coefficients.
    pub fn bound(&self) -> f64 {
        self.levels.iter().flatten().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    /// Iterates over `(index, c_{m,k})` in flat order.
    pub fn coefficients(&self) -> impl Iterator<Item = (DyadicIndex, f64)> + '_ {
        self.levels.iter().enumerate().flat_map(|(m, level)| {
            level
                .iter()
                .enumerate()
                .map(move |(k, &c)| (DyadicIndex::new_unchecked(m as u32, k as u64), c))
        })
    }

    /// Same Hurst exponent and boundary values, coefficients from levels `0..=p` only.
    pub fn truncated(&self, p: u32) -> Self {
        let keep = (p as usize + 1).min(self.levels.len());
        Self {
            levels: self.levels[..keep].to_vec(),
            ..self.clone()
        }
    }

    /// The non-affine part `y` with `f = f0 + (f1 - f0) t + y`.
    pub fn without_affine(&self) -> Self {
        Self {
            f0: 0.0,
            f1: 0.0,
            ..self.clone()
        }
    }

    /// Evaluates at the full stored depth.
    pub fn eval(&self, t: f64) -> f64 {
        self.eval_to(t, self.max_level())
    }

    /// Partial sum `S_{up_to}` at `t`. Only one tent per level can be non-zero, so the
    /// cost is `O(up_to)`.
    pub fn eval_to(&self, t: f64, up_to: u32) -> f64 {
        let top = up_to.min(self.max_level());
        let mut sum = self.f0 * (1.0 - t) + self.f1 * t;
        if !(0.0..=1.0).contains(&t) {
            return sum;
        }
        for m in 0..=top {
            let scale = pow2(m as i32);
            let k = ((t * scale).floor() as u64).min((1u64 << m) - 1);
            let c = self.levels[m as usize][k as usize];
            if c != 0.0 {
                let idx = DyadicIndex::new_unchecked(m, k);
                sum += self.weight(m) * c * schauder(idx, t);
            }
        }
        sum
    }

    /// Values on the dyadic grid `j / 2^grid_level`.
    pub fn sample(&self, grid_level: u32) -> Vec<f64> {
        let n = 1usize << grid_level;
        let h = pow2(-(grid_level as i32));
        (0..=n).map(|j| self.eval(j as f64 * h)).collect()
    }

    /// Linear combination `a * self + b * other`; both must share the Hurst exponent.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.hurst != other.hurst {
            return Err(input("cannot combine expansions with different Hurst exponents"));
        }
        let depth = self.levels.len().max(other.levels.len());
        let levels = (0..depth)
            .map(|m| {
                (0..1usize << m)
                    .map(|k| {
                        let x = self.levels.get(m).map_or(0.0, |l| l[k]);
                        let y = other.levels.get(m).map_or(0.0, |l| l[k]);
                        a * x + b * y
                    })
                    .collect()
            })
            .collect();
        Self::new(self.hurst, a * self.f0 + b * other.f0, a * self.f1 + b * other.f1, levels)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: HolderExpansion = serde_json::from_str(text)?;
        Self::new(raw.hurst, raw.f0, raw.f1, raw.levels)
    }
}

pub(crate) fn zero_levels(max_level: u32) -> Vec<Vec<f64>> {
    (0..=max_level).map(|m| vec![0.0; 1usize << m]).collect()
}

/// `max_j |a(t_j) - b(t_j)|` over `t_j = j / 2^grid_level`, both at full depth.
pub fn sup_distance(a: &HolderExpansion, b: &HolderExpansion, grid_level: u32) -> f64 {
    sup_distance_fn(a, |t| b.eval(t), grid_level)
}

/// [`sup_distance`] against an arbitrary function.
pub fn sup_distance_fn(a: &HolderExpansion, f: impl Fn(f64) -> f64, grid_level: u32) -> f64 {
    let n = 1usize << grid_level;
    let h = pow2(-(grid_level as i32));
    (0..=n)
        .map(|j| {
            let t = j as f64 * h;
            (a.eval(t) - f(t)).abs()
        })
        .fold(0.0, f64::max)
}

impl std::str::FromStr for HolderExpansion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_json(s)
    }
}
