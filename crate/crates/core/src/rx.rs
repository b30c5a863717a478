//! Receive beamforming: the one-parameter family
//! `w_r(alpha) ~ alpha u_par + sqrt(1 - alpha) u_perp`, where `u_par` and
//! `u_perp` are the normalized projections of `h_AR` onto `span{h_BR}` and
//! its orthogonal complement, and the search over `alpha`.

use crate::channel::{project_onto, ChannelRealization, BASIS_EPS};
use crate::error::{Error, Result};
use crate::CVector;
use num_complex::Complex64;

/// Below this norm the complement component of `h_AR` is treated as absent
/// (`h_AR` parallel to `h_BR`).
pub const COLLINEAR_EPS: f64 = 1e-10;

/// Grid of the 1-D search over `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaGrid {
    pub start: f64,
    pub stop: f64,
    /// Grid spacing.
    pub step: f64,
    /// Width at which the golden-section refinement around the best grid
    /// point stops. Refinement is skipped when `refine_tol >= 2 * step`.
    pub refine_tol: f64,
    /// Extra points always evaluated in addition to the regular grid.
    pub anchors: Vec<f64>,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 1.0,
            step: 0.01,
            refine_tol: 1e-3,
            anchors: vec![0.583],
        }
    }
}

impl AlphaGrid {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.start && self.start < self.stop && self.stop <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "alpha grid needs 0 <= start < stop <= 1, got [{}, {}]",
                self.start, self.stop
            )));
        }
        if !(self.step > 0.0) || !(self.refine_tol > 0.0) {
            return Err(Error::InvalidParams(
                "alpha step and refine_tol must be > 0".into(),
            ));
        }
        Ok(())
    }

    /// Sorted, deduplicated evaluation points: the regular grid (always
    /// including `stop`) merged with the anchors that fall in range.
    pub fn points(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        let mut k = 0u32;
        loop {
            let a = self.start + f64::from(k) * self.step;
            if a > self.stop + 1e-12 {
                break;
            }
            pts.push(a.min(self.stop));
            k += 1;
        }
        if pts.last().is_some_and(|&last| self.stop - last > 1e-12) {
            pts.push(self.stop);
        }
        pts.extend(
            self.anchors
                .iter()
                .copied()
                .filter(|a| (self.start..=self.stop).contains(a)),
        );
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        pts
    }
}

/// Output of [`build_wr`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveBeamformer {
    pub w_r: CVector,
    /// `h_AR` has no component orthogonal to `h_BR`; `w_r` is the matched
    /// filter `h_AR / ||h_AR||` for every `alpha`.
    pub degenerate: bool,
}

/// Builds the unit-norm receive beamformer for `alpha`.
///
/// The two directions are combined with weights `(alpha, sqrt(1 - alpha))`
/// and the result is renormalized, since those weights alone give
/// `||w||^2 = alpha^2 + 1 - alpha`.
pub fn build_wr(alpha: f64, ch: &ChannelRealization) -> Result<ReceiveBeamformer> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParams(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let ar_norm = ch.h_ar.norm();
    if ar_norm < BASIS_EPS {
        return Err(Error::ZeroChannel("h_ar"));
    }
    let br_norm = ch.h_br.norm();
    if br_norm < BASIS_EPS {
        return Err(Error::ZeroChannel("h_br"));
    }
    let parallel = project_onto(&ch.h_ar, &ch.h_br)?;
    let perp = &ch.h_ar - &parallel;
    let perp_norm = perp.norm();
    if perp_norm < COLLINEAR_EPS {
        return Ok(ReceiveBeamformer {
            w_r: &ch.h_ar / Complex64::new(ar_norm, 0.0),
            degenerate: true,
        });
    }
    let par_norm = parallel.norm();
    // h_AR orthogonal to h_BR: the parallel direction is h_BR itself.
    let u_par = if par_norm < COLLINEAR_EPS {
        &ch.h_br / Complex64::new(br_norm, 0.0)
    } else {
        parallel / Complex64::new(par_norm, 0.0)
    };
    let u_perp = perp / Complex64::new(perp_norm, 0.0);
    let w = u_par * Complex64::new(alpha, 0.0) + u_perp * Complex64::new((1.0 - alpha).sqrt(), 0.0);
    let norm = w.norm();
    Ok(ReceiveBeamformer {
        w_r: w / Complex64::new(norm, 0.0),
        degenerate: false,
    })
}

/// Best point of an `alpha` search.
#[derive(Debug, Clone)]
pub struct AlphaSearch<T> {
    pub alpha: f64,
    pub value: f64,
    pub payload: T,
    /// Every `(alpha, value)` evaluated, in evaluation order; infeasible
    /// points carry `-inf`.
    pub evaluations: Vec<(f64, f64)>,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `inner(alpha)` over the grid, ties going to the smaller
/// `alpha`, then refines around the winner by golden-section search within
/// one grid step. A refined point replaces the grid winner only if strictly
/// better.
///
/// `inner` returns the achieved value with its payload, or an error. An
/// [`Error::Infeasible`] marks that `alpha` as unusable; any other error
/// aborts the search.
pub fn search_alpha<T, F>(grid: &AlphaGrid, mut inner: F) -> Result<AlphaSearch<T>>
where
    F: FnMut(f64) -> Result<(f64, T)>,
{
    grid.validate()?;
    let mut best: Option<(f64, f64, T)> = None;
    let mut first_infeasible: Option<Error> = None;
    let mut evaluations = Vec::new();

    let mut eval = |alpha: f64,
                    best: &mut Option<(f64, f64, T)>,
                    evaluations: &mut Vec<(f64, f64)>|
     -> Result<f64> {
        match inner(alpha) {
            Ok((value, payload)) => {
                evaluations.push((alpha, value));
                if best.as_ref().is_none_or(|(_, v, _)| value > *v) {
                    *best = Some((alpha, value, payload));
                }
                Ok(value)
            }
            Err(e @ Error::Infeasible { .. }) => {
                evaluations.push((alpha, f64::NEG_INFINITY));
                if first_infeasible.is_none() {
                    first_infeasible = Some(e);
                }
                Ok(f64::NEG_INFINITY)
            }
            Err(e) => Err(e),
        }
    };

    for alpha in grid.points() {
        eval(alpha, &mut best, &mut evaluations)?;
    }
    let Some((center, _, _)) = best else {
        return Err(first_infeasible.expect("grid is never empty"));
    };

    let mut lo = (center - grid.step).max(grid.start);
    let mut hi = (center + grid.step).min(grid.stop);
    if hi - lo > grid.refine_tol {
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let mut f1 = eval(x1, &mut best, &mut evaluations)?;
        let mut f2 = eval(x2, &mut best, &mut evaluations)?;
        while hi - lo > grid.refine_tol {
            if f1 >= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - INV_PHI * (hi - lo);
                f1 = eval(x1, &mut best, &mut evaluations)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + INV_PHI * (hi - lo);
                f2 = eval(x2, &mut best, &mut evaluations)?;
            }
        }
    }

    let (alpha, value, payload) = best.expect("at least one feasible point");
    Ok(AlphaSearch {
        alpha,
        value,
        payload,
        evaluations,
    })
}
