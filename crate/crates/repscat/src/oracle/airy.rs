//! Airy functions `Ai`, `Bi` and their derivatives on the real line, and
//! the exact free `α = 1` scattering data built from them.
//!
//! Evaluation switches between the Maclaurin series (`|t| ≤ 1`), Taylor
//! stepping of `y″ = t y` (moderate `|t|`) and the large-argument expansions
//! summed to their smallest term (`|t| ≥ 9`). On `t > 0`, `Ai` is stepped
//! backward from the asymptotic region so that the decaying solution is
//! never integrated in its unstable direction.

use std::f64::consts::PI;

use num_complex::Complex64;

const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = -0.258_819_403_792_806_8;
const BI0: f64 = 0.614_926_627_446_000_7;
const BIP0: f64 = 0.448_288_357_353_826_4;
const ASYMPTOTIC: f64 = 9.0;
const STEP: f64 = 0.25;

/// `(Ai, Ai′, Bi, Bi′)` at `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Airy {
    pub ai: f64,
    pub aip: f64,
    pub bi: f64,
    pub bip: f64,
}

impl Airy {
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bip - self.aip * self.bi
    }
}

pub fn airy(t: f64) -> Airy {
    if t.abs() <= 1.0 {
        let (ai, aip) = maclaurin(t, AI0, AIP0);
        let (bi, bip) = maclaurin(t, BI0, BIP0);
        return Airy { ai, aip, bi, bip };
    }
    if t <= -ASYMPTOTIC {
        return oscillatory(-t);
    }
    if t >= ASYMPTOTIC {
        return monotone(t);
    }
    if t < 0.0 {
        let start = maclaurin_pair(-1.0);
        let (ai, aip) = step(-1.0, start.0, t);
        let (bi, bip) = step(-1.0, start.1, t);
        return Airy { ai, aip, bi, bip };
    }
    let start = maclaurin_pair(1.0);
    let (bi, bip) = step(1.0, start.1, t);
    let far = monotone(ASYMPTOTIC);
    let (ai, aip) = step(ASYMPTOTIC, (far.ai, far.aip), t);
    Airy { ai, aip, bi, bip }
}

fn maclaurin_pair(t: f64) -> ((f64, f64), (f64, f64)) {
    (maclaurin(t, AI0, AIP0), maclaurin(t, BI0, BIP0))
}

/// Series solution with `y(0) = y0`, `y′(0) = y1`.
fn maclaurin(t: f64, y0: f64, y1: f64) -> (f64, f64) {
    taylor(0.0, y0, y1, t)
}

/// Sums the Taylor series of `y″ = t y` about `t0` at `t0 + h`.
fn taylor(t0: f64, y0: f64, y1: f64, t: f64) -> (f64, f64) {
    let h = t - t0;
    let mut c = vec![y0, y1, 0.5 * t0 * y0];
    let mut val = y0 + y1 * h + c[2] * h * h;
    let mut der = y1 + 2.0 * c[2] * h;
    let mut hp = h * h;
    let mut small = 0;
    for n in 3..400 {
        // n(n−1) c_n = t0 c_{n−2} + c_{n−3}
        let cn = (t0 * c[n - 2] + c[n - 3]) / (n as f64 * (n as f64 - 1.0));
        c.push(cn);
        let dterm = n as f64 * cn * hp;
        der += dterm;
        hp *= h;
        let term = cn * hp;
        val += term;
        let tiny = term.abs() <= 1e-18 * val.abs() && dterm.abs() <= 1e-18 * der.abs();
        small = if tiny { small + 1 } else { 0 };
        if small >= 3 {
            break;
        }
    }
    (val, der)
}

fn step(t0: f64, mut y: (f64, f64), t: f64) -> (f64, f64) {
    let n = ((t - t0).abs() / STEP).ceil().max(1.0) as usize;
    let h = (t - t0) / n as f64;
    let mut s = t0;
    for _ in 0..n {
        y = taylor(s, y.0, y.1, s + h);
        s += h;
    }
    y
}

/// `u_k` and `v_k` of the large-argument expansions.
fn coefficients(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..n {
        let kf = k as f64;
        let next = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(next);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * next);
    }
    (u, v)
}

/// Sums `Σ s_k c_k / ζ^k` with sign pattern `s_k`, stopping at the smallest term.
fn sum_smallest(c: &[f64], zeta: f64, sign: impl Fn(usize) -> f64, parity: Option<usize>) -> f64 {
    let mut acc = 0.0;
    let mut prev = f64::INFINITY;
    let mut p = 1.0;
    for (k, ck) in c.iter().enumerate() {
        if k > 0 {
            p /= zeta;
        }
        let term = ck * p;
        if k > 1 && term.abs() > prev {
            break;
        }
        prev = term.abs();
        if parity.map_or(true, |r| k % 2 == r) {
            acc += sign(k) * term;
        }
    }
    acc
}

fn monotone(t: f64) -> Airy {
    let zeta = 2.0 / 3.0 * t.powf(1.5);
    let (u, v) = coefficients(60);
    let alt = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let t4 = t.powf(0.25);
    let sp = PI.sqrt();
    let em = (-zeta).exp();
    let ep = zeta.exp();
    Airy {
        ai: em / (2.0 * sp * t4) * sum_smallest(&u, zeta, alt, None),
        aip: -t4 * em / (2.0 * sp) * sum_smallest(&v, zeta, alt, None),
        bi: ep / (sp * t4) * sum_smallest(&u, zeta, |_| 1.0, None),
        bip: t4 * ep / sp * sum_smallest(&v, zeta, |_| 1.0, None),
    }
}

fn oscillatory(y: f64) -> Airy {
    let zeta = 2.0 / 3.0 * y.powf(1.5);
    let (u, v) = coefficients(80);
    // (−1)^k on the k-th even or odd term
    let even = |k: usize| if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let ue = sum_smallest(&u, zeta, even, Some(0));
    let uo = sum_smallest(&u, zeta, even, Some(1));
    let ve = sum_smallest(&v, zeta, even, Some(0));
    let vo = sum_smallest(&v, zeta, even, Some(1));
    let ph = zeta - 0.25 * PI;
    let (s, c) = ph.sin_cos();
    let y4 = y.powf(0.25);
    let sp = PI.sqrt();
    Airy {
        ai: (c * ue + s * uo) / (sp * y4),
        aip: y4 / sp * (s * ve - c * vo),
        bi: (-s * ue + c * uo) / (sp * y4),
        bip: y4 / sp * (c * ve + s * vo),
    }
}

/// Exact solutions of `u″ + (|x| + 2λ)u = 0` for the free `α = 1` line.
#[derive(Clone, Copy, Debug)]
pub struct FreeAiryLine {
    pub lambda: f64,
}

impl FreeAiryLine {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }

    /// `lim (θ₁ − θ)` with `θ₁ = (2/3)(r + 2λ)^{3/2}` and
    /// `θ = (2/3) r^{3/2} + λ(2√r − 1)`.
    pub fn phase_offset(&self) -> f64 {
        self.lambda
    }

    /// Coefficients `(Q, P)` of `Q Ai(t) + P Bi(t)`, `t = −(x + 2λ)`, on
    /// `x > 0` for the even (`parity = 1`) or odd (`parity = −1`) solution.
    fn parity_coefficients(&self, parity: i32) -> (f64, f64) {
        let a = airy(-2.0 * self.lambda);
        if parity > 0 {
            (-a.bip, a.aip)
        } else {
            (a.bi, -a.ai)
        }
    }

    /// `a_out / a_in` relative to `x^{−1/4} e^{±iθ}` for a real combination.
    fn amplitude_ratio(&self, q: f64, p: f64) -> Complex64 {
        let z = Complex64::new(q, p) / Complex64::new(q, -p);
        z * Complex64::from_polar(1.0, -0.5 * PI + 2.0 * self.phase_offset())
    }

    /// Eigenvalues `(s_even, s_odd)` of `S(λ)` on the parity basis.
    pub fn parity_eigenvalues(&self) -> (Complex64, Complex64) {
        let kappa = 1.0 / 3.0;
        let ph = Complex64::from_polar(1.0, 0.5 * PI * kappa);
        let (qe, pe) = self.parity_coefficients(1);
        let (qo, po) = self.parity_coefficients(-1);
        (ph * self.amplitude_ratio(qe, pe), -ph * self.amplitude_ratio(qo, po))
    }

    /// `S(λ)` on the basis `(δ_{+1}, δ_{−1})`.
    pub fn s_matrix(&self) -> [[Complex64; 2]; 2] {
        let (se, so) = self.parity_eigenvalues();
        let a = 0.5 * (se + so);
        let b = 0.5 * (se - so);
        [[a, b], [b, a]]
    }

    /// Outgoing solution on `x ≥ 0`: `Ai(t) − i Bi(t)` and its `x`-derivative.
    fn outgoing_right(&self, x: f64) -> (Complex64, Complex64) {
        let a = airy(-(x + 2.0 * self.lambda));
        (
            Complex64::new(a.ai, -a.bi),
            -Complex64::new(a.aip, -a.bip),
        )
    }

    /// Solution that is outgoing as `x → +∞`, on the whole line.
    pub fn outgoing_plus(&self, x: f64) -> (Complex64, Complex64) {
        if x >= 0.0 {
            return self.outgoing_right(x);
        }
        // continue through x = 0 with the mirrored basis e(|x|), o(|x|)
        let (u0, d0) = self.outgoing_right(0.0);
        let a0 = airy(-2.0 * self.lambda);
        let a = airy(-(-x + 2.0 * self.lambda));
        // basis on x < 0: Ai(−(−x+2λ)), Bi(−(−x+2λ)); x-derivatives +Ai′, +Bi′
        let w = a0.wronskian();
        // solve c1 Ai + c2 Bi = u0, c1 Ai′ + c2 Bi′ = d0 at x = 0⁻
        let c1 = (u0 * a0.bip - d0 * a0.bi) / w;
        let c2 = (d0 * a0.ai - u0 * a0.aip) / w;
        (c1 * a.ai + c2 * a.bi, c1 * a.aip + c2 * a.bip)
    }

    /// Solution that is outgoing as `x → −∞`.
    pub fn outgoing_minus(&self, x: f64) -> (Complex64, Complex64) {
        let (u, d) = self.outgoing_plus(-x);
        (u, -d)
    }

    /// Kernel of `R(λ + i0)` for `−½∂² − ½|x| − λ`.
    pub fn green_plus(&self, x: f64, y: f64) -> Complex64 {
        let (l0, l1) = self.outgoing_minus(0.0);
        let (r0, r1) = self.outgoing_plus(0.0);
        let w = l0 * r1 - l1 * r0;
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        -2.0 * self.outgoing_minus(lo).0 * self.outgoing_plus(hi).0 / w
    }
}
