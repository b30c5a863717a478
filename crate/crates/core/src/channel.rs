//! System parameters, Rayleigh channel draws and the projection primitives
//! used by the receive-beamformer parameterization and the zero-forcing
//! null space.
//!
//! Receiver noise at the relay input, the processing stage and both sources
//! is normalized to unit variance; only the residual self-interference (RSI)
//! variances are free.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::{CMatrix, CVector};

/// Norm below which a projection basis vector is treated as zero.
pub const BASIS_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Source A transmit power (W).
    pub p_a: f64,
    /// Source B transmit power (W).
    pub p_b: f64,
    /// Relay transmit power budget (W).
    pub p_r: f64,
    /// Minimum harvested energy at the relay (W).
    pub q_bar: f64,
    /// RSI channel variance at source A.
    pub var_rsi_a: f64,
    /// RSI channel variance at source B.
    pub var_rsi_b: f64,
    /// RSI channel variance of the relay loop `H_RR`.
    pub var_rsi_r: f64,
    /// Processing-noise variance; fixed to 1.
    pub var_proc: f64,
    /// Relay transmit antennas.
    pub m_t: usize,
    /// Relay receive antennas.
    pub m_r: usize,
    /// Energy conversion efficiency; fixed to 1.
    pub beta: f64,
    /// Processing delay in symbols. Informational only.
    pub tau: u32,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            p_a: 10.0,
            p_b: 10.0,
            p_r: 10.0,
            q_bar: 0.0,
            var_rsi_a: 0.1,
            var_rsi_b: 0.1,
            var_rsi_r: 0.1,
            var_proc: 1.0,
            m_t: 4,
            m_r: 4,
            beta: 1.0,
            tau: 1,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("p_a", self.p_a),
            ("p_b", self.p_b),
            ("p_r", self.p_r),
            ("q_bar", self.q_bar),
            ("var_rsi_a", self.var_rsi_a),
            ("var_rsi_b", self.var_rsi_b),
            ("var_rsi_r", self.var_rsi_r),
        ];
        for (name, value) in nonneg {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and >= 0, got {value}"
                )));
            }
        }
        if self.m_t < 2 {
            return Err(Error::InvalidParams(format!(
                "m_t must be >= 2 for a non-empty zero-forcing null space, got {}",
                self.m_t
            )));
        }
        if self.m_r < 1 {
            return Err(Error::InvalidParams("m_r must be >= 1".into()));
        }
        if self.beta != 1.0 {
            return Err(Error::InvalidParams(format!(
                "beta is fixed to 1, got {}",
                self.beta
            )));
        }
        if self.var_proc != 1.0 {
            return Err(Error::InvalidParams(format!(
                "var_proc is normalized to 1, got {}",
                self.var_proc
            )));
        }
        if self.tau < 1 {
            return Err(Error::InvalidParams("tau must be a positive integer".into()));
        }
        Ok(())
    }
}

/// One draw of every channel in the network.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Source A to relay receive array (`m_r`).
    pub h_ar: CVector,
    /// Source B to relay receive array (`m_r`).
    pub h_br: CVector,
    /// Relay transmit array to source A (`m_t`).
    pub h_ra: CVector,
    /// Relay transmit array to source B (`m_t`).
    pub h_rb: CVector,
    /// Relay self-interference loop (`m_r x m_t`).
    pub h_rr: CMatrix,
    /// Residual self-interference at source A.
    pub h_aa: Complex64,
    /// Residual self-interference at source B.
    pub h_bb: Complex64,
}

impl ChannelRealization {
    pub fn m_t(&self) -> usize {
        self.h_ra.len()
    }

    pub fn m_r(&self) -> usize {
        self.h_ar.len()
    }

    /// Checks dimensions against `params` and that every entry is finite.
    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        let (m_t, m_r) = (params.m_t, params.m_r);
        for (len, expected) in [
            (self.h_ar.len(), m_r),
            (self.h_br.len(), m_r),
            (self.h_ra.len(), m_t),
            (self.h_rb.len(), m_t),
            (self.h_rr.nrows(), m_r),
            (self.h_rr.ncols(), m_t),
        ] {
            if len != expected {
                return Err(Error::DimensionMismatch { expected, got: len });
            }
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        let all_finite = self.h_ar.iter().all(finite)
            && self.h_br.iter().all(finite)
            && self.h_ra.iter().all(finite)
            && self.h_rb.iter().all(finite)
            && self.h_rr.iter().all(finite)
            && finite(&self.h_aa)
            && finite(&self.h_bb);
        if !all_finite {
            return Err(Error::InvalidParams("channel entries must be finite".into()));
        }
        Ok(())
    }

    /// Copy with every self-interference channel set to zero.
    pub fn without_rsi(&self) -> Self {
        let mut ch = self.clone();
        ch.h_rr.fill(Complex64::new(0.0, 0.0));
        ch.h_aa = Complex64::new(0.0, 0.0);
        ch.h_bb = Complex64::new(0.0, 0.0);
        ch
    }
}

/// Derives the seed of stream `index` from a master seed (SplitMix64 of
/// `master + (index + 1) * golden_gamma`).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn cn(rng: &mut ChaCha8Rng, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

/// Draws a flat Rayleigh realization: information channels are unit-variance
/// circularly-symmetric Gaussian, self-interference channels carry the RSI
/// variances of `params`.
///
/// The standard-normal draws happen in a fixed order independent of the
/// variances, so the same seed yields scaled copies of the same channels
/// across an RSI sweep.
pub fn sample_channels(params: &SystemParams, seed: u64) -> Result<ChannelRealization> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m_t, m_r) = (params.m_t, params.m_r);
    let h_ar = CVector::from_fn(m_r, |_, _| cn(&mut rng, 1.0));
    let h_br = CVector::from_fn(m_r, |_, _| cn(&mut rng, 1.0));
    let h_ra = CVector::from_fn(m_t, |_, _| cn(&mut rng, 1.0));
    let h_rb = CVector::from_fn(m_t, |_, _| cn(&mut rng, 1.0));
    let h_rr = DMatrix::from_fn(m_r, m_t, |_, _| cn(&mut rng, params.var_rsi_r));
    let h_aa = cn(&mut rng, params.var_rsi_a);
    let h_bb = cn(&mut rng, params.var_rsi_b);
    Ok(ChannelRealization {
        h_ar,
        h_br,
        h_ra,
        h_rb,
        h_rr,
        h_aa,
        h_bb,
    })
}

/// Orthogonal projection of `x` onto `span{b}`: `b (b^H b)^-1 b^H x`.
pub fn project_onto(x: &CVector, b: &CVector) -> Result<CVector> {
    if x.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            got: x.len(),
        });
    }
    let norm_sq = b.norm_squared();
    if norm_sq.sqrt() < BASIS_EPS {
        return Err(Error::DegenerateBasis {
            norm: norm_sq.sqrt(),
        });
    }
    let coeff = b.dotc(x) / norm_sq;
    Ok(b * coeff)
}

/// Projection of `x` onto the orthogonal complement of `span{b}`.
pub fn project_complement(x: &CVector, b: &CVector) -> Result<CVector> {
    Ok(x - project_onto(x, b)?)
}

/// Orthonormal basis (as columns) of the orthogonal complement of `span{c}`,
/// taken from the trailing columns of the Householder reflector that maps
/// `c` onto the first axis. Returns the identity when `c` vanishes.
pub fn orthonormal_complement(c: &CVector) -> CMatrix {
    let m = c.len();
    let norm = c.norm();
    if norm < BASIS_EPS {
        return CMatrix::identity(m, m);
    }
    let x = c / Complex64::new(norm, 0.0);
    let lead = x[0].norm();
    let phase = if lead > 0.0 {
        x[0] / lead
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut u = x;
    u[0] += phase;
    let scale = 2.0 / u.norm_squared();
    let reflector = CMatrix::identity(m, m) - (&u * u.adjoint()) * Complex64::new(scale, 0.0);
    reflector.columns(1, m - 1).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cvec(v: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&(re, im)| c(re, im)))
    }

    fn assert_vec_eq(a: &CVector, b: &CVector, tol: f64) {
        assert_eq!(a.len(), b.len());
        assert!((a - b).norm() <= tol, "{a} != {b}");
    }

    #[test]
    fn projection_examples() {
        let x = cvec(&[(1.0, 0.0), (1.0, 0.0)]);
        let e1 = cvec(&[(1.0, 0.0), (0.0, 0.0)]);
        assert_vec_eq(&project_onto(&x, &e1).unwrap(), &e1, 1e-15);
        assert_vec_eq(&project_onto(&x, &x).unwrap(), &x, 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = cvec(&[(s, 0.0), (s, 0.0)]);
        let e2 = cvec(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_vec_eq(&project_onto(&x, &e2).unwrap(), &cvec(&[(0.0, 0.0), (s, 0.0)]), 1e-15);
        assert_vec_eq(
            &project_complement(&x, &e1).unwrap(),
            &cvec(&[(0.0, 0.0), (s, 0.0)]),
            1e-15,
        );
        assert!(project_complement(&x, &x).unwrap().norm() < 1e-15);
        assert_vec_eq(&project_complement(&e2, &e1).unwrap(), &e2, 0.0);
    }

    #[test]
    fn degenerate_basis_is_rejected() {
        let x = cvec(&[(1.0, 0.0), (1.0, 0.0)]);
        let z = cvec(&[(1e-13, 0.0), (0.0, 0.0)]);
        assert!(matches!(project_onto(&x, &z), Err(Error::DegenerateBasis { .. })));
        let short = cvec(&[(1.0, 0.0)]);
        assert!(matches!(
            project_onto(&x, &short),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_variance_rsi_gives_zero_loop() {
        let params = SystemParams {
            var_rsi_r: 0.0,
            ..SystemParams::default()
        };
        let ch = sample_channels(&params, 7).unwrap();
        assert!(ch.h_rr.iter().all(|z| z.norm() == 0.0));
        ch.validate(&params).unwrap();
    }

    #[test]
    fn same_seed_same_draw() {
        let params = SystemParams::default();
        assert_eq!(
            sample_channels(&params, 42).unwrap(),
            sample_channels(&params, 42).unwrap()
        );
        assert_ne!(
            sample_channels(&params, 42).unwrap(),
            sample_channels(&params, 43).unwrap()
        );
    }

    #[test]
    fn information_channel_power_is_unit() {
        let params = SystemParams {
            m_r: 2,
            m_t: 2,
            ..SystemParams::default()
        };
        let n = 100_000;
        let mean = (0..n)
            .map(|i| sample_channels(&params, derive_seed(3, i)).unwrap().h_ar[0].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean |h|^2 = {mean}");
    }

    #[test]
    fn entry_variances_match_configuration() {
        // |h|^2 of a CN(0, v) entry is exponential with mean v and std v, so
        // the standard error of its sample mean is v / sqrt(n).
        let params = SystemParams {
            m_t: 2,
            m_r: 2,
            var_rsi_a: 0.5,
            var_rsi_b: 2.0,
            var_rsi_r: 0.1,
            ..SystemParams::default()
        };
        let n = 20_000usize;
        let mut sums = [0.0f64; 4];
        for i in 0..n {
            let ch = sample_channels(&params, derive_seed(11, i as u64)).unwrap();
            sums[0] += ch.h_rb[1].norm_sqr();
            sums[1] += ch.h_rr[(1, 0)].norm_sqr();
            sums[2] += ch.h_aa.norm_sqr();
            sums[3] += ch.h_bb.norm_sqr();
        }
        for (sum, var) in sums.iter().zip([1.0, 0.1, 0.5, 2.0]) {
            let mean = sum / n as f64;
            let se = var / (n as f64).sqrt();
            assert!((mean - var).abs() <= 3.0 * se, "mean {mean} vs {var}");
        }
    }

    #[test]
    fn validation_rejects_bad_params() {
        let bad = [
            SystemParams {
                m_t: 1,
                ..SystemParams::default()
            },
            SystemParams {
                m_r: 0,
                ..SystemParams::default()
            },
            SystemParams {
                p_r: -1.0,
                ..SystemParams::default()
            },
            SystemParams {
                beta: 0.7,
                ..SystemParams::default()
            },
            SystemParams {
                q_bar: f64::NAN,
                ..SystemParams::default()
            },
        ];
        for p in bad {
            assert!(matches!(
                sample_channels(&p, 0),
                Err(Error::InvalidParams(_))
            ));
        }
    }

    #[test]
    fn householder_complement_of_axis() {
        let basis = orthonormal_complement(&cvec(&[(1.0, 0.0), (0.0, 0.0)]));
        assert_eq!(basis.ncols(), 1);
        assert_abs_diff_eq!(basis[(0, 0)].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(basis[(1, 0)].norm(), 1.0, epsilon = 1e-15);
    }

    fn arb_cvec(n: usize) -> impl Strategy<Value = CVector> {
        prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), n)
            .prop_map(|v| CVector::from_iterator(v.len(), v.into_iter().map(|(a, b)| c(a, b))))
    }

    proptest! {
        #[test]
        fn projection_identities(
            (x, b) in (1usize..6).prop_flat_map(|n| (arb_cvec(n), arb_cvec(n)))
        ) {
            prop_assume!(b.norm() > 1e-3);
            let p = project_onto(&x, &b).unwrap();
            let q = project_complement(&x, &b).unwrap();
            let scale = 1.0 + x.norm();
            prop_assert!((&p + &q - &x).norm() <= 1e-12 * scale);
            prop_assert!((project_onto(&p, &b).unwrap() - &p).norm() <= 1e-12 * scale);
            prop_assert!(p.dotc(&q).norm() <= 1e-12 * scale * scale);
        }

        #[test]
        fn complement_is_orthonormal(c in (2usize..6).prop_flat_map(arb_cvec)) {
            prop_assume!(c.norm() > 1e-3);
            let basis = orthonormal_complement(&c);
            let m = c.len();
            prop_assert_eq!(basis.ncols(), m - 1);
            let gram = basis.adjoint() * &basis;
            prop_assert!((gram - CMatrix::identity(m - 1, m - 1)).norm() <= 1e-12);
            prop_assert!((basis.adjoint() * &c).norm() <= 1e-12 * c.norm());
        }
    }
}
