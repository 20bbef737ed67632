//! The curve family u_k(r), the lower envelope b(r), and its
//! constituent-piece decomposition.
//!
//! Everything that decides *which* curve is lowest is independent of the
//! Margulis threshold: u_k(r) = w_k(r)/√E with w_k(r) = √(c_k·r² + k²) and
//! c_k = 1 − cos(kθ), so argmins, crossing radii, and the piece structure are
//! computed in the E-free scaled family w_k and only reported values carry
//! the 1/√E factor.

use std::sync::Mutex;

use crate::cf::CFAngle;
use crate::error::{Error, Result};

/// Default half-width of the constituent search window, in convergent-index
/// space.
pub const DEFAULT_WINDOW: usize = 8;

/// Number of sample radii used by the decompose cross-validation oracle.
const ORACLE_SAMPLES: usize = 1000;

/// Curve parameters for one index k.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryCurve {
    pub k: u64,
    /// c_k = 1 − cos(kθ), in [0, 2].
    pub c_k: f64,
}

/// Piecewise description of b(r) on [0, r_max]: piece m (0-based) is
/// u_{indices[m]} active on [breakpoints[m], breakpoints[m+1]).
#[derive(Debug, Clone)]
pub struct PieceDecomposition {
    pub indices: Vec<u64>,
    pub breakpoints: Vec<f64>,
    pub r_max: f64,
    /// Sample count of the brute-force oracle cross-validation.
    pub oracle_checks: usize,
    /// Largest relative disagreement seen by the oracle (0 when the argmin
    /// matched everywhere).
    pub max_residual: f64,
}

impl PieceDecomposition {
    /// Index of the curve active at r (last piece for r ≥ last breakpoint).
    pub fn active_index(&self, r: f64) -> u64 {
        let m = self
            .breakpoints
            .partition_point(|&b| b <= r)
            .saturating_sub(1)
            .min(self.indices.len() - 1);
        self.indices[m]
    }
}

/// Result of the windowed constituent test for the n-th convergent curve.
#[derive(Debug, Clone)]
pub struct ConstituentCheck {
    pub constituent: bool,
    /// Convergent indices (k, m) with k < n < m witnessing exclusion.
    pub witness: Option<(usize, usize)>,
    /// The index window actually searched.
    pub window: (usize, usize),
}

/// The Margulis-region boundary machinery for one angle and threshold ε.
#[derive(Debug)]
pub struct Region {
    angle: CFAngle,
    epsilon: f64,
    e: f64,
    inv_sqrt_e: f64,
    /// c_k cache, index k (entry 0 is a placeholder).
    cache: Mutex<Vec<f64>>,
}

impl Region {
    pub fn new(angle: CFAngle, epsilon: f64) -> Result<Region> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let e = epsilon.cosh() - 1.0;
        Ok(Region {
            angle,
            epsilon,
            e,
            inv_sqrt_e: 1.0 / e.sqrt(),
            cache: Mutex::new(vec![f64::NAN]),
        })
    }

    pub fn angle(&self) -> &CFAngle {
        &self.angle
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// E = cosh(ε) − 1.
    pub fn e_value(&self) -> f64 {
        self.e
    }

    /// c_k = 1 − cos(kθ). Cached sequentially for the small k an envelope
    /// scan walks through; large isolated k (deep convergent denominators)
    /// are computed directly so the cache stays bounded.
    pub fn c_value(&self, k: u64) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        const CACHE_CAP: u64 = 1 << 21;
        if k > CACHE_CAP {
            return self.angle.one_minus_cos(k);
        }
        let mut cache = self.cache.lock().unwrap();
        while cache.len() <= k as usize {
            let j = cache.len() as u64;
            let c = self.angle.one_minus_cos(j)?;
            cache.push(c);
        }
        Ok(cache[k as usize])
    }

    pub fn boundary_curve(&self, k: u64) -> Result<BoundaryCurve> {
        Ok(BoundaryCurve {
            k,
            c_k: self.c_value(k)?,
        })
    }

    /// E-free scaled curve w_k(r) = √(c_k·r² + k²); u_k = w_k/√E.
    fn scaled_curve(&self, k: u64, r: f64) -> Result<f64> {
        let c = self.c_value(k)?;
        let kf = k as f64;
        Ok((c * r * r + kf * kf).sqrt())
    }

    /// u_k(r) = (1/√E)·√((1 − cos kθ)·r² + k²).
    pub fn curve_value(&self, k: u64, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("r must be >= 0, got {r}")));
        }
        Ok(self.scaled_curve(k, r)? * self.inv_sqrt_e)
    }

    /// b(r) = min over k ≥ 1 of u_k(r), with a minimizing index (smallest on
    /// ties). Complete by pruning: w_k(r) ≥ k, so no k ≥ current best scaled
    /// value can improve, and the scan up to that bound is a full brute
    /// force.
    pub fn envelope_value(&self, r: f64) -> Result<(f64, u64)> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("r must be >= 0, got {r}")));
        }
        let mut best = f64::INFINITY;
        let mut arg = 0u64;
        let mut k = 1u64;
        loop {
            if k as f64 >= best {
                break;
            }
            let w = self.scaled_curve(k, r)?;
            if w < best {
                best = w;
                arg = k;
            }
            k += 1;
        }
        Ok((best * self.inv_sqrt_e, arg))
    }

    /// Closed-form crossing radius of u_k and u_m for m > k, when the graphs
    /// intersect (iff cos(mθ) > cos(kθ)); None otherwise.
    pub fn intersection_radius(&self, k: u64, m: u64) -> Result<Option<f64>> {
        if m <= k || k == 0 {
            return Err(Error::InvalidArgument(format!(
                "need m > k >= 1, got k = {k}, m = {m}"
            )));
        }
        let ck = self.c_value(k)?;
        let cm = self.c_value(m)?;
        if cm >= ck {
            return Ok(None);
        }
        let (kf, mf) = (k as f64, m as f64);
        Ok(Some(((mf * mf - kf * kf) / (ck - cm)).sqrt()))
    }

    /// Crossing radius r_n of v_n = u_{q_n} and v_{n+2} = u_{q_{n+2}}; always
    /// exists since the norms strictly decrease along convergents.
    pub fn successor_intersection(&self, n: usize) -> Result<f64> {
        let convs = self.angle.convergents(n + 2)?;
        let q_n = big_to_u64(&convs[n].q)?;
        let q_n2 = big_to_u64(&convs[n + 2].q)?;
        self.intersection_radius(q_n, q_n2)?.ok_or_else(|| {
            Error::CrossValidation(format!(
                "v_{n} and v_{} unexpectedly fail to intersect",
                n + 2
            ))
        })
    }

    /// Windowed test of the exclusion condition: v_n is not a constituent iff
    /// some k < n < m has crossing(v_k, v_n) ≥ crossing(v_n, v_m). A `true`
    /// answer is relative to the window searched; `decompose` cross-validates
    /// against the brute-force envelope.
    pub fn is_constituent(&self, n: usize, window: usize) -> Result<ConstituentCheck> {
        let lo = n.saturating_sub(window);
        let hi = (n + window).min(self.angle.depth());
        if n >= hi {
            return Err(Error::InvalidArgument(format!(
                "index {n} has no room above it within depth {}",
                self.angle.depth()
            )));
        }
        let convs = self.angle.convergents(hi)?;
        let q_n = big_to_u64(&convs[n].q)?;
        // Crossing of v_n with each neighbor; equal denominators (the
        // duplicated q_0 = q_1 = 1 case) are the same curve and are skipped.
        let mut left: Vec<(usize, f64)> = Vec::new();
        for j in lo..n {
            let q_j = big_to_u64(&convs[j].q)?;
            if q_j == q_n {
                continue;
            }
            let r = self.intersection_radius(q_j, q_n)?.ok_or_else(|| {
                Error::CrossValidation(format!("v_{j} and v_{n} fail to intersect"))
            })?;
            left.push((j, r));
        }
        let mut right: Vec<(usize, f64)> = Vec::new();
        for j in (n + 1)..=hi {
            let q_j = big_to_u64(&convs[j].q)?;
            if q_j == q_n {
                continue;
            }
            let r = self.intersection_radius(q_n, q_j)?.ok_or_else(|| {
                Error::CrossValidation(format!("v_{n} and v_{j} fail to intersect"))
            })?;
            right.push((j, r));
        }
        let best_left = left.iter().cloned().max_by(|a, b| a.1.total_cmp(&b.1));
        let best_right = right.iter().cloned().min_by(|a, b| a.1.total_cmp(&b.1));
        if let (Some((jk, rk)), Some((jm, rm))) = (best_left, best_right) {
            if rk >= rm {
                return Ok(ConstituentCheck {
                    constituent: false,
                    witness: Some((jk, jm)),
                    window: (lo, hi),
                });
            }
        }
        Ok(ConstituentCheck {
            constituent: true,
            witness: None,
            window: (lo, hi),
        })
    }

    /// One-sided bisection polish of the crossing of w_k and w_m around the
    /// closed-form seed, to absolute tolerance 1e-9·(1 + r). Guards against
    /// cancellation in m² − k² over tiny cosine differences.
    fn polished_crossing(&self, k: u64, m: u64) -> Result<f64> {
        let seed = self.intersection_radius(k, m)?.ok_or_else(|| {
            Error::CrossValidation(format!("curves {k} and {m} fail to intersect"))
        })?;
        // d(r) = w_m − w_k: positive before the crossing, negative after.
        let d = |r: f64| -> Result<f64> { Ok(self.scaled_curve(m, r)? - self.scaled_curve(k, r)?) };
        let mut lo = seed * (1.0 - 1e-6);
        let mut hi = seed * (1.0 + 1e-6);
        let mut tries = 0;
        while d(lo)? <= 0.0 {
            lo *= 0.999;
            tries += 1;
            if tries > 200 {
                return Err(Error::CrossValidation(format!(
                    "failed to bracket crossing of curves {k} and {m}"
                )));
            }
        }
        tries = 0;
        while d(hi)? >= 0.0 {
            hi *= 1.001;
            tries += 1;
            if tries > 200 {
                return Err(Error::CrossValidation(format!(
                    "failed to bracket crossing of curves {k} and {m}"
                )));
            }
        }
        let tol = 1e-9 * (1.0 + seed);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if d(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Candidate convergent denominators for the envelope on [0, r_max]:
    /// unique q_n up to the smallest n whose grandparent crossing r_{n−2}
    /// exceeds r_max, plus two guard indices. For an exactly rational angle
    /// the final (constant) curve closes the family instead.
    fn candidate_denominators(&self, r_max: f64) -> Result<Vec<u64>> {
        let mut qs: Vec<u64> = Vec::new();
        let mut n = 0usize;
        let mut cutoff: Option<usize> = None;
        loop {
            let within = self.angle.coefficient(n).is_some();
            if !within {
                // Finite coefficient source exhausted.
                let last = *qs.last().ok_or_else(|| Error::InvalidAngle("no convergents".into()))?;
                if self.c_value(last)? == 0.0 {
                    // Rational rotation: u_{last} is the eventual constant.
                    break;
                }
                return Err(Error::DepthExceeded {
                    requested: n,
                    available: n - 1,
                });
            }
            if n > self.angle.depth() {
                return Err(Error::DepthExceeded {
                    requested: n,
                    available: self.angle.depth(),
                });
            }
            let convs = self.angle.convergents(n)?;
            let q = big_to_u64(&convs[n].q)?;
            if qs.last() != Some(&q) {
                qs.push(q);
            }
            if let Some(stop) = cutoff {
                if n >= stop {
                    break;
                }
            } else if n >= 2 {
                let r = self.successor_intersection(n - 2)?;
                if r > r_max {
                    cutoff = Some(n + 2);
                }
            }
            n += 1;
        }
        Ok(qs)
    }

    /// Exact piece structure of b on [0, r_max], cross-validated against the
    /// brute-force envelope at geometrically spaced radii.
    pub fn decompose(&self, r_max: f64) -> Result<PieceDecomposition> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "r_max must be positive, got {r_max}"
            )));
        }
        let cands = self.candidate_denominators(r_max)?;
        // Lower-envelope stack over curves that pairwise cross at most once:
        // each new (higher-index) curve pops pieces it makes vacuous. A
        // crossing that lands exactly on the top piece's start is an isolated
        // touch and pops it too (half-open convention).
        let mut stack: Vec<(u64, f64)> = vec![(cands[0], 0.0)];
        for &m in &cands[1..] {
            loop {
                let &(k_top, start_top) = stack.last().unwrap();
                let r_x = self.polished_crossing(k_top, m)?;
                if r_x <= start_top {
                    if stack.len() == 1 {
                        return Err(Error::CrossValidation(format!(
                            "curve {m} undercuts the first piece at r = 0"
                        )));
                    }
                    stack.pop();
                    continue;
                }
                stack.push((m, r_x));
                break;
            }
        }
        let mut indices = Vec::new();
        let mut breakpoints = vec![0.0];
        for (i, &(k, start)) in stack.iter().enumerate() {
            if start >= r_max {
                break;
            }
            indices.push(k);
            let end = stack.get(i + 1).map(|&(_, s)| s).unwrap_or(f64::INFINITY);
            breakpoints.push(end.min(r_max));
        }
        let mut dec = PieceDecomposition {
            indices,
            breakpoints,
            r_max,
            oracle_checks: 0,
            max_residual: 0.0,
        };
        self.cross_validate(&mut dec)?;
        Ok(dec)
    }

    /// Brute-force oracle check: at geometrically spaced radii the envelope
    /// argmin must be the active piece (value ties allowed at breakpoints).
    fn cross_validate(&self, dec: &mut PieceDecomposition) -> Result<()> {
        let lo = 1e-3f64.min(dec.r_max / 2.0);
        let ratio = (dec.r_max / lo).powf(1.0 / (ORACLE_SAMPLES as f64 - 1.0));
        let mut max_residual = 0.0f64;
        for i in 0..ORACLE_SAMPLES {
            let r = lo * ratio.powi(i as i32);
            let (b_val, b_arg) = self.envelope_value(r)?;
            let active = dec.active_index(r);
            if active != b_arg {
                let piece_val = self.curve_value(active, r)?;
                let residual = (piece_val - b_val).abs() / b_val;
                max_residual = max_residual.max(residual);
                if residual > 1e-12 {
                    return Err(Error::CrossValidation(format!(
                        "at r = {r}: decomposition says index {active} (u = {piece_val}), \
                         brute force says index {b_arg} (u = {b_val})"
                    )));
                }
            }
        }
        dec.oracle_checks = ORACLE_SAMPLES;
        dec.max_residual = max_residual;
        Ok(())
    }

    /// min and max of b(r)/√r over a geometric grid on [r_lo, r_hi].
    pub fn comparability_report(&self, r_lo: f64, r_hi: f64, samples: usize) -> Result<(f64, f64)> {
        if !(r_lo >= 1.0) || !(r_hi > r_lo) {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= r_lo < r_hi, got [{r_lo}, {r_hi}]"
            )));
        }
        if samples < 2 {
            return Err(Error::InvalidArgument("samples must be >= 2".into()));
        }
        let ratio = (r_hi / r_lo).powf(1.0 / (samples as f64 - 1.0));
        let mut inf = f64::INFINITY;
        let mut sup = 0.0f64;
        for i in 0..samples {
            let r = r_lo * ratio.powi(i as i32);
            let (b, _) = self.envelope_value(r)?;
            let q = b / r.sqrt();
            inf = inf.min(q);
            sup = sup.max(q);
        }
        Ok((inf, sup))
    }

    /// Tail height l/√E of b(r) for an exactly rational rotation of order l.
    pub fn rational_tail(&self, l: u64) -> Result<f64> {
        match self.angle.rational_order() {
            Some(order) if order == l => Ok(l as f64 * self.inv_sqrt_e),
            Some(order) => Err(Error::InvalidArgument(format!(
                "l = {l} is not the exact rotation order (which is {order})"
            ))),
            None => Err(Error::InvalidArgument(
                "rational tail requires an exactly rational rotation".into(),
            )),
        }
    }
}

fn big_to_u64(q: &num_bigint::BigInt) -> Result<u64> {
    use num_traits::ToPrimitive;
    q.to_u64().ok_or_else(|| {
        Error::PrecisionBudget(format!("convergent denominator {q} exceeds u64 range"))
    })
}
