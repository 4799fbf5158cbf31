//! Closed-form eigendata on the disk of radius `R` centered at the origin.
//!
//! Separation of variables gives
//! - DBS: `b ∝ (r^{k+2}/R² − r^k) trig(kθ)`, `q = (2k+2)/R`;
//! - harmonic Steklov: `s ∝ r^k trig(kθ)`, `δ = k/R`;
//! - Dirichlet Laplacian: `e ∝ J_k(j_{k,m} r/R) trig(kθ)`, `λ = (j_{k,m}/R)²`.
//!
//! Bessel functions are computed here without external special-function
//! support: the ascending series for small arguments and Miller's downward
//! recurrence otherwise.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiskFamily {
    Dbs,
    Steklov,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Cos,
    Sin,
}

impl Parity {
    fn eval(self, k: usize, theta: f64) -> f64 {
        match self {
            Parity::Cos => (k as f64 * theta).cos(),
            Parity::Sin => (k as f64 * theta).sin(),
        }
    }

    /// `∫₀^{2π} trig²(kθ) dθ`
    fn angular_norm_sq(self, k: usize) -> f64 {
        if k == 0 {
            2.0 * PI
        } else {
            PI
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskMode {
    pub family: DiskFamily,
    pub k: usize,
    /// Radial index, 1-based; always 0 for the DBS and Steklov families.
    pub m: usize,
    pub parity: Parity,
    pub eigenvalue: f64,
}

fn check_mode(k: usize, parity: Parity, radius: f64) -> Result<()> {
    if k == 0 && parity == Parity::Sin {
        return Err(Error::param("parity", "the k = 0 mode has no sine component"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::param("R", format!("must be positive, got {radius}")));
    }
    Ok(())
}

fn polar(p: Point) -> (f64, f64) {
    (p[0].hypot(p[1]), p[1].atan2(p[0]))
}

/// DBS eigenpair normalized so that `‖Δb‖_{L²} = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskDbsMode {
    pub k: usize,
    pub parity: Parity,
    pub radius: f64,
    pub q: f64,
    coeff: f64,
}

impl DiskDbsMode {
    pub fn b(&self, p: Point) -> f64 {
        let (r, t) = polar(p);
        let k = self.k as i32;
        self.coeff * (r.powi(k + 2) / (self.radius * self.radius) - r.powi(k)) * self.parity.eval(self.k, t)
    }

    pub fn h(&self, p: Point) -> f64 {
        let (r, t) = polar(p);
        let k = self.k as f64;
        self.coeff * (4.0 * k + 4.0) / (self.radius * self.radius) * r.powi(self.k as i32) * self.parity.eval(self.k, t)
    }

    pub fn grad_b(&self, p: Point) -> Point {
        // b = c (r^{k+2}/R² − r^k) trig, written in Cartesian form through
        // z^k = r^k e^{ikθ}: r^k trig is a harmonic polynomial P, so
        // ∇(r^{k+2} P / r^k) = ∇(r² P) = 2 x P + r² ∇P.
        let (pk, gk) = harmonic_poly(self.k, self.parity, p);
        let r2 = p[0] * p[0] + p[1] * p[1];
        let s = 1.0 / (self.radius * self.radius);
        [
            self.coeff * (s * (2.0 * p[0] * pk + r2 * gk[0]) - gk[0]),
            self.coeff * (s * (2.0 * p[1] * pk + r2 * gk[1]) - gk[1]),
        ]
    }

    /// `D_ν b` at angle `θ` on the circle.
    pub fn flux(&self, theta: f64) -> f64 {
        self.coeff * 2.0 * self.radius.powi(self.k as i32 - 1) * self.parity.eval(self.k, theta)
    }

    /// `w = √(q|∂Ω|) D_ν b`, unit in the normalized boundary inner product.
    pub fn w(&self, theta: f64) -> f64 {
        (self.q * 2.0 * PI * self.radius).sqrt() * self.flux(theta)
    }
}

/// `r^k trig(kθ)` and its gradient as polynomials in `x, y`.
fn harmonic_poly(k: usize, parity: Parity, p: Point) -> (f64, Point) {
    // (x + iy)^k = Re + i Im; d/dx z^k = k z^{k−1}, d/dy z^k = i k z^{k−1}.
    let (mut re, mut im) = (1.0, 0.0);
    let (mut re1, mut im1) = (1.0, 0.0);
    for j in 0..k {
        if j + 1 == k {
            re1 = re;
            im1 = im;
        }
        let nr = re * p[0] - im * p[1];
        im = re * p[1] + im * p[0];
        re = nr;
    }
    let kf = k as f64;
    if k == 0 {
        return (1.0, [0.0, 0.0]);
    }
    match parity {
        Parity::Cos => (re, [kf * re1, -kf * im1]),
        Parity::Sin => (im, [kf * im1, kf * re1]),
    }
}

pub fn disk_dbs_exact(k: usize, parity: Parity, radius: f64) -> Result<DiskDbsMode> {
    check_mode(k, parity, radius)?;
    let kf = k as f64;
    // ‖r^k trig‖² = R^{2k+2}/(2k+2) · ∫trig²
    let norm = (radius.powi(2 * k as i32 + 2) / (2.0 * kf + 2.0) * parity.angular_norm_sq(k)).sqrt();
    Ok(DiskDbsMode {
        k,
        parity,
        radius,
        q: (2.0 * kf + 2.0) / radius,
        coeff: radius * radius / ((4.0 * kf + 4.0) * norm),
    })
}

/// Harmonic Steklov eigenpair with `⟨s, s⟩_∂Ω = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskSteklovMode {
    pub k: usize,
    pub parity: Parity,
    pub radius: f64,
    pub delta: f64,
    coeff: f64,
}

impl DiskSteklovMode {
    pub fn s(&self, p: Point) -> f64 {
        self.coeff * harmonic_poly(self.k, self.parity, p).0
    }
}

pub fn disk_steklov_exact(k: usize, parity: Parity, radius: f64) -> Result<DiskSteklovMode> {
    check_mode(k, parity, radius)?;
    // (2πR)⁻¹ ∫ R^{2k} trig² R dθ
    let mean_sq = radius.powi(2 * k as i32) * parity.angular_norm_sq(k) / (2.0 * PI);
    Ok(DiskSteklovMode {
        k,
        parity,
        radius,
        delta: k as f64 / radius,
        coeff: 1.0 / mean_sq.sqrt(),
    })
}

/// Dirichlet Laplacian eigenpair with `‖e‖_{L²} = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskDirichletMode {
    pub k: usize,
    pub m: usize,
    pub parity: Parity,
    pub radius: f64,
    pub zero: f64,
    pub lambda: f64,
    coeff: f64,
}

impl DiskDirichletMode {
    pub fn e(&self, p: Point) -> f64 {
        let (r, t) = polar(p);
        self.coeff * bessel_j(self.k, self.zero * r / self.radius) * self.parity.eval(self.k, t)
    }

    /// `∂_r e` at angle `θ` on the circle.
    pub fn flux(&self, theta: f64) -> f64 {
        // J_k'(j) = −J_{k+1}(j) at a zero of J_k
        -self.coeff * self.zero / self.radius * bessel_j(self.k + 1, self.zero) * self.parity.eval(self.k, theta)
    }
}

pub fn disk_dirichlet_exact(k: usize, m: usize, parity: Parity, radius: f64) -> Result<DiskDirichletMode> {
    check_mode(k, parity, radius)?;
    if m == 0 {
        return Err(Error::param("m", "radial index starts at 1"));
    }
    let zero = bessel_j_zero(k, m);
    // ∫₀^R J_k(j r/R)² r dr = R²/2 · J_{k+1}(j)²
    let radial = radius * radius / 2.0 * bessel_j(k + 1, zero).powi(2);
    Ok(DiskDirichletMode {
        k,
        m,
        parity,
        radius,
        zero,
        lambda: (zero / radius).powi(2),
        coeff: 1.0 / (radial * parity.angular_norm_sq(k)).sqrt(),
    })
}

/// `(R² − |x|²) / (2πR |x − z|²)`, normalized so that `∫ P(x, ·) dσ = 1`.
pub fn disk_poisson_kernel_exact(x: Point, z: Point, radius: f64) -> Result<f64> {
    let rx = x[0].hypot(x[1]);
    if !(rx < radius) {
        return Err(Error::OutsideDomain {
            x: x[0],
            y: x[1],
            reason: format!("|x| = {rx} is not below R = {radius}"),
        });
    }
    let d2 = (x[0] - z[0]).powi(2) + (x[1] - z[1]).powi(2);
    Ok((radius * radius - rx * rx) / (2.0 * PI * radius * d2))
}

/// The first `count` modes of `family` in ascending order, cosine before sine
/// within a degenerate pair.
pub fn disk_spectrum(family: DiskFamily, count: usize, radius: f64) -> Result<Vec<DiskMode>> {
    check_mode(0, Parity::Cos, radius)?;
    let mut modes = Vec::new();
    let kmax = count / 2 + 1;
    for k in 0..=kmax {
        let parities: &[Parity] = if k == 0 { &[Parity::Cos] } else { &[Parity::Cos, Parity::Sin] };
        let radial = if family == DiskFamily::Dirichlet { 1..=count.max(1) } else { 0..=0 };
        for m in radial {
            let eigenvalue = match family {
                DiskFamily::Dbs => (2.0 * k as f64 + 2.0) / radius,
                DiskFamily::Steklov => k as f64 / radius,
                DiskFamily::Dirichlet => (bessel_j_zero(k, m) / radius).powi(2),
            };
            for &parity in parities {
                modes.push(DiskMode {
                    family,
                    k,
                    m,
                    parity,
                    eigenvalue,
                });
            }
        }
    }
    modes.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    modes.truncate(count);
    Ok(modes)
}

// ---- Bessel functions ---------------------------------------------------------------

/// Bessel function of the first kind `J_n(x)` for `x ≥ 0`.
pub fn bessel_j(n: usize, x: f64) -> f64 {
    assert!(x >= 0.0, "bessel_j needs a non-negative argument");
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < 1.0 {
        return bessel_series(n, x);
    }
    bessel_miller(n, x)
}

/// `Σ_m (−1)^m (x/2)^{2m+n} / (m! (m+n)!)`
fn bessel_series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (1..=n).fold(1.0, |acc, i| acc * half / i as f64);
    let mut sum = term;
    let q = -half * half;
    for m in 1..60 {
        term *= q / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Miller's algorithm: recur `J_{k−1} = (2k/x) J_k − J_{k+1}` downward from a
/// high order, then normalize with `J_0 + 2 Σ J_{2k} = 1`.
fn bessel_miller(n: usize, x: f64) -> f64 {
    let start = 2 * ((n.max(x as usize) + 15 + (x.sqrt() * 10.0) as usize) / 2);
    let (mut above, mut current) = (0.0f64, 1e-300f64);
    let mut result = 0.0;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let below = 2.0 * k as f64 / x * current - above;
        above = current;
        current = below;
        if current.abs() > 1e250 {
            current *= 1e-250;
            above *= 1e-250;
            result *= 1e-250;
            norm *= 1e-250;
        }
        // `current` now holds the unnormalized J_{k−1}
        if k - 1 == n {
            result = current;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * current;
        }
    }
    norm += current;
    result / norm
}

/// The `m`-th positive zero of `J_k`, by bracketing and bisection.
pub fn bessel_j_zero(k: usize, m: usize) -> f64 {
    assert!(m >= 1, "zeros are numbered from 1");
    let step = 0.05;
    // J_k has no zero in (0, k] for k ≥ 1, and J_0 > 0 on [0, 2].
    let mut a = (k as f64).max(step);
    let mut fa = bessel_j(k, a);
    let mut found = 0;
    loop {
        let b = a + step;
        let fb = bessel_j(k, b);
        if fa == 0.0 || fa.signum() != fb.signum() {
            found += 1;
            if found == m {
                return bisect(k, a, b);
            }
        }
        a = b;
        fa = fb;
    }
}

fn bisect(k: usize, mut a: f64, mut b: f64) -> f64 {
    let mut fa = bessel_j(k, a);
    if fa == 0.0 {
        return a;
    }
    while b - a > 1e-14 * b {
        let mid = 0.5 * (a + b);
        let fm = bessel_j(k, mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_zeros() {
        assert!((bessel_j_zero(0, 1) - 2.404_825_557_695_773).abs() < 1e-12);
        assert!((bessel_j_zero(1, 1) - 3.831_705_970_207_512).abs() < 1e-12);
        assert!((bessel_j_zero(0, 2) - 5.520_078_110_286_311).abs() < 1e-12);
    }

    #[test]
    fn unit_disk_first_modes() {
        let m = disk_dbs_exact(0, Parity::Cos, 1.0).unwrap();
        assert_eq!(m.q, 2.0);
        let c = 1.0 / (4.0 * PI.sqrt());
        assert!((m.b([0.0, 0.0]) + c).abs() < 1e-15);
        assert!((m.h([0.3, 0.1]) - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!((m.w(0.7) - 1.0).abs() < 1e-14);
        assert_eq!(disk_dbs_exact(1, Parity::Cos, 1.0).unwrap().q, 4.0);
        assert_eq!(disk_dbs_exact(0, Parity::Cos, 2.0).unwrap().q, 1.0);
        let d = disk_dirichlet_exact(1, 1, Parity::Cos, 1.0).unwrap();
        assert!((d.lambda - 14.681_970_642_123_9).abs() < 1e-9);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for (k, par) in [(0, Parity::Cos), (1, Parity::Sin), (3, Parity::Cos), (4, Parity::Sin)] {
            let m = disk_dbs_exact(k, par, 1.5).unwrap();
            let p = [0.4, -0.3];
            let e = 1e-6;
            let g = m.grad_b(p);
            let fx = (m.b([p[0] + e, p[1]]) - m.b([p[0] - e, p[1]])) / (2.0 * e);
            let fy = (m.b([p[0], p[1] + e]) - m.b([p[0], p[1] - e])) / (2.0 * e);
            assert!((g[0] - fx).abs() < 1e-8 && (g[1] - fy).abs() < 1e-8, "k={k}");
        }
    }

    #[test]
    fn sine_of_order_zero_is_rejected() {
        assert!(disk_dbs_exact(0, Parity::Sin, 1.0).is_err());
        assert!(disk_dirichlet_exact(0, 0, Parity::Cos, 1.0).is_err());
        assert!(disk_poisson_kernel_exact([1.0, 0.0], [1.0, 0.0], 1.0).is_err());
    }
}
