//! Maximizer of the DC surrogate `f(a, b) - g_L(a, b)` over the null-space
//! ball `||x||^2 <= p_eff`.
//!
//! Components of `x` outside `span{u, v}` change neither `a = |u^H x|^2`
//! nor `b = |v^H x|^2` and only consume budget, so the search runs over
//!
//! ```text
//! x = sqrt(p) (cos(theta) e1 + sin(theta) exp(i phi) e2),
//! p in [0, p_eff], theta in [0, pi/2], phi in [0, 2 pi)
//! ```
//!
//! with `{e1, e2}` an orthonormal basis of `span{u, v}`. Along a fixed
//! direction the surrogate is `log2(A1 p + d1) + log2(A2 p + d2) - K p`,
//! concave in `p`, and its maximizer is found to machine precision by a
//! monotone Newton iteration on the derivative. The remaining two angles
//! are scanned on a coarse grid and then polished by a compass search that
//! halves its step until both steps drop below `box_tol`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use crate::dc::{g_gradient, g_term, ReducedProblem};
use crate::error::{Error, Result};
use crate::CVector;

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSettings {
    /// Coarse grid points over `theta in [0, pi/2]`, endpoints included.
    pub theta_points: usize,
    /// Coarse grid points over `phi in [0, 2 pi)`.
    pub phi_points: usize,
    /// Compass search stops once both angle steps are below this.
    pub box_tol: f64,
    /// The warm start is kept unless the search beats it by more than this.
    pub keep_warm_tol: f64,
}

impl Default for SubproblemSettings {
    fn default() -> Self {
        Self {
            theta_points: 9,
            phi_points: 16,
            box_tol: 1e-5,
            keep_warm_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    /// Maximizer in null-space coordinates.
    pub x: CVector,
    pub a: f64,
    pub b: f64,
    /// `f(a, b) - g_L(a, b; a_k, b_k)` at the maximizer.
    pub value: f64,
}

/// Surrogate restricted to the gains: `f(a, b) - ka a - kb b`, i.e. the
/// DC surrogate without its constant part.
#[derive(Debug, Clone, Copy)]
struct Surrogate {
    c1: f64,
    d1: f64,
    c2: f64,
    d2: f64,
    ka: f64,
    kb: f64,
    budget: f64,
}

impl Surrogate {
    fn value(&self, a: f64, b: f64) -> f64 {
        (self.c1 * a + self.d1).log2() + (self.c2 * b + self.d2).log2() - self.ka * a - self.kb * b
    }

    /// Best power along a direction with unit-power gains `(ga, gb)`.
    fn best_power(&self, ga: f64, gb: f64) -> f64 {
        let (a1, a2) = (self.c1 * ga, self.c2 * gb);
        let slope = (self.ka * ga + self.kb * gb) * LN_2;
        // ln(2) times the derivative; convex and decreasing in p.
        let deriv = |p: f64| a1 / (a1 * p + self.d1) + a2 / (a2 * p + self.d2) - slope;
        if deriv(self.budget) >= 0.0 {
            return self.budget;
        }
        if deriv(0.0) <= 0.0 {
            return 0.0;
        }
        // Newton from the left of the root never overshoots a convex
        // decreasing function.
        let mut p = 0.0f64;
        for _ in 0..200 {
            let (t1, t2) = (a1 * p + self.d1, a2 * p + self.d2);
            let g = a1 / t1 + a2 / t2 - slope;
            let dg = -(a1 * a1) / (t1 * t1) - (a2 * a2) / (t2 * t2);
            let next = (p - g / dg).min(self.budget);
            if !(next > p) || next - p <= 1e-15 * (1.0 + p) {
                p = next.max(p);
                break;
            }
            p = next;
        }
        p
    }
}

/// Orthonormal frame of `span{u, v}` with the inner products needed to
/// evaluate the gains of a direction.
#[derive(Debug, Clone)]
struct SpanFrame {
    e1: CVector,
    e2: Option<CVector>,
    /// `u^H e1, u^H e2`.
    su: [Complex64; 2],
    /// `v^H e1, v^H e2`.
    sv: [Complex64; 2],
}

impl SpanFrame {
    fn new(u: &CVector, v: &CVector) -> Result<Self> {
        let (un, vn) = (u.norm(), v.norm());
        let tiny = 1e-14;
        if un <= tiny && vn <= tiny {
            return Err(Error::ZeroGain);
        }
        let e1 = if un > tiny {
            u / Complex64::new(un, 0.0)
        } else {
            v / Complex64::new(vn, 0.0)
        };
        let rest = v - &e1 * e1.dotc(v);
        let rn = rest.norm();
        let e2 = (rn > 1e-10 * vn.max(tiny)).then(|| rest / Complex64::new(rn, 0.0));
        let zero = Complex64::new(0.0, 0.0);
        let su = [u.dotc(&e1), e2.as_ref().map_or(zero, |e| u.dotc(e))];
        let sv = [v.dotc(&e1), e2.as_ref().map_or(zero, |e| v.dotc(e))];
        Ok(Self { e1, e2, su, sv })
    }

    /// Unit-power gains `(|u^H d|^2, |v^H d|^2)` of the direction
    /// `d = cos(theta) e1 + sin(theta) exp(i phi) e2`.
    fn gains(&self, theta: f64, phi: f64) -> (f64, f64) {
        let (s, c) = theta.sin_cos();
        let rot = Complex64::from_polar(s, phi);
        (
            (self.su[0] * c + self.su[1] * rot).norm_sqr(),
            (self.sv[0] * c + self.sv[1] * rot).norm_sqr(),
        )
    }

    fn vector(&self, p: f64, theta: f64, phi: f64) -> CVector {
        let (s, c) = theta.sin_cos();
        let mut x = &self.e1 * Complex64::new(c, 0.0);
        if let Some(e2) = &self.e2 {
            x += e2 * Complex64::from_polar(s, phi);
        }
        x * Complex64::new(p.sqrt(), 0.0)
    }

    /// Angles of the direction of `x` within the frame.
    fn angles(&self, x: &CVector) -> (f64, f64) {
        let z1 = self.e1.dotc(x);
        let z2 = self.e2.as_ref().map_or(Complex64::new(0.0, 0.0), |e| e.dotc(x));
        let theta = z2.norm().atan2(z1.norm());
        let phi = (z2.arg() - z1.arg()).rem_euclid(2.0 * PI);
        (theta, phi)
    }
}

/// Maximizes `f - g_L( . ; a_k, b_k)` over `||x||^2 <= p_eff`.
///
/// `warm` (typically the current DC iterate) seeds the local polish when it
/// beats the coarse grid, and is returned unchanged if nothing improves on
/// it by more than `keep_warm_tol`, which keeps the DC sequence monotone
/// and makes a converged point a fixed point.
pub fn solve_subproblem(
    rp: &ReducedProblem,
    a_k: f64,
    b_k: f64,
    warm: Option<&CVector>,
    settings: &SubproblemSettings,
) -> Result<SubproblemSolution> {
    let frame = SpanFrame::new(&rp.u, &rp.v)?;
    let k = rp.coefficients();
    let (ka, kb) = g_gradient(a_k, b_k, rp);
    let sur = Surrogate {
        c1: k.c1,
        d1: k.d1,
        c2: k.c2,
        d2: k.d2,
        ka,
        kb,
        budget: rp.p_eff.max(0.0),
    };
    // f - g_L = sur.value + offset.
    let offset = -(g_term(a_k, b_k, rp) - ka * a_k - kb * b_k);

    let profile = |theta: f64, phi: f64| -> (f64, f64) {
        let (ga, gb) = frame.gains(theta, phi);
        let p = sur.best_power(ga, gb);
        (sur.value(p * ga, p * gb), p)
    };

    let (theta, phi, _) = if frame.e2.is_none() {
        (0.0, 0.0, profile(0.0, 0.0).0)
    } else {
        let nt = settings.theta_points.max(2);
        let np = settings.phi_points.max(1);
        let mut best = (0.0, 0.0, f64::NEG_INFINITY);
        for i in 0..nt {
            let t = FRAC_PI_2 * i as f64 / (nt - 1) as f64;
            for j in 0..np {
                let f = 2.0 * PI * j as f64 / np as f64;
                let v = profile(t, f).0;
                if v > best.2 {
                    best = (t, f, v);
                }
            }
        }
        if let Some(x) = warm {
            let (t, f) = frame.angles(x);
            let v = profile(t, f).0;
            if v > best.2 {
                best = (t, f, v);
            }
        }

        let (mut t, mut f, mut v) = best;
        let mut dt = FRAC_PI_2 / (nt - 1) as f64;
        let mut df = 2.0 * PI / np as f64;
        while dt >= settings.box_tol || df >= settings.box_tol {
            let moves = [
                ((t + dt).min(FRAC_PI_2), f),
                ((t - dt).max(0.0), f),
                (t, (f + df).rem_euclid(2.0 * PI)),
                (t, (f - df).rem_euclid(2.0 * PI)),
            ];
            let mut improved = false;
            for (mt, mf) in moves {
                let mv = profile(mt, mf).0;
                if mv > v {
                    (t, f, v) = (mt, mf, mv);
                    improved = true;
                }
            }
            if !improved {
                dt *= 0.5;
                df *= 0.5;
            }
        }
        (t, f, v)
    };

    let p = profile(theta, phi).1;
    let mut x = frame.vector(p, theta, phi);
    let (mut a, mut b) = rp.gains(&x);
    let mut best = sur.value(a, b);

    if let Some(w) = warm {
        let (wa, wb) = rp.gains(w);
        let wv = sur.value(wa, wb);
        if wv >= best - settings.keep_warm_tol && w.norm_squared() <= rp.p_eff {
            x = w.clone();
            (a, b, best) = (wa, wb, wv);
        }
    }

    Ok(SubproblemSolution {
        x,
        a,
        b,
        value: best + offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{derive_seed, sample_channels, SystemParams};
    use crate::dc::{f_term, g_linearized};
    use crate::rx::build_wr;
    use crate::CMatrix;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn surrogate_at(rp: &ReducedProblem, x: &CVector, a_k: f64, b_k: f64) -> f64 {
        let (a, b) = rp.gains(x);
        f_term(a, b, rp) - g_linearized(a, b, a_k, b_k, rp)
    }

    fn reduced(seed: u64, m_t: usize) -> ReducedProblem {
        let params = SystemParams {
            m_t,
            ..SystemParams::default()
        };
        let ch = sample_channels(&params, seed).unwrap();
        let w_r = build_wr(0.5, &ch).unwrap().w_r;
        ReducedProblem::new(&ch, &w_r, 0.7, &params).unwrap()
    }

    /// Golden-section maximizer of a unimodal function on `[lo, hi]`.
    fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let r = 0.618_033_988_749_894_9;
        while hi - lo > 1e-12 * (1.0 + hi) {
            let (x1, x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
            if f(x1) >= f(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        f(0.5 * (lo + hi))
    }

    #[test]
    fn single_link_matches_line_search() {
        // v = 0: only the a-term reacts to x, so the optimum lies along u.
        let mut rp = reduced(1, 3);
        rp.v.fill(c(0.0, 0.0));
        let (ak, bk) = (0.5, 0.0);
        let sol = solve_subproblem(&rp, ak, bk, None, &SubproblemSettings::default()).unwrap();
        let dir = &rp.u / c(rp.u.norm(), 0.0);
        let oracle = golden_max(
            |p| surrogate_at(&rp, &(&dir * c(p.sqrt(), 0.0)), ak, bk),
            0.0,
            rp.p_eff,
        );
        assert_abs_diff_eq!(sol.value, oracle, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.value, surrogate_at(&rp, &sol.x, ak, bk), epsilon = 1e-12);
    }

    #[test]
    fn orthogonal_links_match_fine_grid() {
        let mut rp = reduced(2, 3);
        rp.u = CVector::from_column_slice(&[c(1.0, 0.0), c(0.0, 0.0)]);
        rp.v = CVector::from_column_slice(&[c(0.0, 0.0), c(1.0, 0.0)]);
        rp.basis = CMatrix::identity(2, 2);
        rp.c_ra = 1.0;
        rp.c_rb = 1.0;
        rp.p_a = 2.0;
        rp.p_b = 2.0;
        rp.rsi_a = 0.0;
        rp.rsi_b = 0.0;
        rp.p_eff = 3.0;
        let (ak, bk) = (0.4, 0.4);
        let sol = solve_subproblem(&rp, ak, bk, None, &SubproblemSettings::default()).unwrap();
        let mut oracle = f64::NEG_INFINITY;
        let n = 600;
        for i in 0..=n {
            let p = rp.p_eff * i as f64 / n as f64;
            for j in 0..=n {
                let t = FRAC_PI_2 * j as f64 / n as f64;
                let x = CVector::from_column_slice(&[c(p.sqrt() * t.cos(), 0.0), c(p.sqrt() * t.sin(), 0.0)]);
                oracle = oracle.max(surrogate_at(&rp, &x, ak, bk));
            }
        }
        assert!(sol.value >= oracle - 1e-9);
        assert!(sol.value - oracle <= 1e-4 * oracle.abs());
        // Symmetric links share the power.
        assert_abs_diff_eq!(sol.a, sol.b, epsilon = 1e-6);
    }

    #[test]
    fn vanishing_budget_gives_zero_vector() {
        let mut rp = reduced(3, 4);
        rp.p_eff = 0.0;
        let sol = solve_subproblem(&rp, 1.0, 1.0, None, &SubproblemSettings::default()).unwrap();
        assert_eq!(sol.x.norm(), 0.0);
        let zero = f_term(0.0, 0.0, &rp) - g_linearized(0.0, 0.0, 1.0, 1.0, &rp);
        assert_abs_diff_eq!(sol.value, zero, epsilon = 1e-12);
    }

    #[test]
    fn zero_gain_is_reported() {
        let mut rp = reduced(4, 3);
        rp.u.fill(c(0.0, 0.0));
        rp.v.fill(c(0.0, 0.0));
        assert!(matches!(
            solve_subproblem(&rp, 0.0, 0.0, None, &SubproblemSettings::default()),
            Err(Error::ZeroGain)
        ));
    }

    #[test]
    fn never_worse_than_warm_start() {
        for i in 0..30 {
            let rp = reduced(derive_seed(6, i), 4);
            let warm = rp.default_init();
            let (ak, bk) = rp.gains(&warm);
            let sol = solve_subproblem(&rp, ak, bk, Some(&warm), &SubproblemSettings::default()).unwrap();
            assert!(sol.value >= surrogate_at(&rp, &warm, ak, bk) - 1e-12);
            assert!(sol.x.norm_squared() <= rp.p_eff * (1.0 + 1e-12));
        }
    }
}
