//! Exact continued-fraction arithmetic for rotation angles.
//!
//! An angle θ is represented through x = θ/2π ∈ (0, 1) given by its
//! continued-fraction coefficients [0; a_1, a_2, ...]. All evaluations go
//! through an exact rational surrogate p_N/q_N held at a guard depth N, so
//! that frac(k·x) is computed in integer arithmetic with a certified error
//! bound k/(q_N·q_{N+1}); the only floating rounding happens once, at the
//! end. Operations whose certified relative error would exceed
//! [`REL_BUDGET`] deepen the surrogate when the coefficient source allows it
//! and fail loudly otherwise.

use std::f64::consts::PI;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Relative certified-error budget for surrogate evaluations.
pub const REL_BUDGET: f64 = 1e-15;

/// Hard cap on automatic surrogate deepening.
const MAX_GUARD_DEPTH: usize = 20_000;

/// How an angle is specified by a caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AngleSpec {
    /// Explicit finite coefficient list a_1, a_2, ..., a_L (a_0 = 0 implied).
    /// The angle is then the exact rational [0; a_1, ..., a_L].
    Coefficients(Vec<u64>),
    /// Eventually periodic coefficients: preperiod then period repeated
    /// forever. This is the bounded-type workhorse (quadratic irrationals).
    Periodic { preperiod: Vec<u64>, period: Vec<u64> },
    /// Decimal string like "0.6180339887498949", expanded by the standard
    /// integer-part/reciprocal algorithm on the exact rational it encodes.
    Decimal(String),
    /// Exact rational rotation x = p/q (rational screw parabolic case).
    Rational { p: u64, q: u64 },
}

impl AngleSpec {
    /// Parse the CLI surface syntax: "1,2,3", "pre:[1];per:[2,3]",
    /// "rat:1/3", or a decimal string.
    pub fn parse_str(s: &str) -> Result<AngleSpec> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidAngle("empty angle specification".into()));
        }
        if let Some(rest) = s.strip_prefix("rat:") {
            let (p, q) = rest
                .split_once('/')
                .ok_or_else(|| Error::InvalidAngle(format!("bad rational spec {s:?}")))?;
            let p: u64 = p
                .trim()
                .parse()
                .map_err(|_| Error::InvalidAngle(format!("bad numerator in {s:?}")))?;
            let q: u64 = q
                .trim()
                .parse()
                .map_err(|_| Error::InvalidAngle(format!("bad denominator in {s:?}")))?;
            return Ok(AngleSpec::Rational { p, q });
        }
        if s.starts_with("pre:") {
            let mut pre = None;
            let mut per = None;
            for part in s.split(';') {
                if let Some(body) = part.strip_prefix("pre:") {
                    pre = Some(parse_bracket_list(body)?);
                } else if let Some(body) = part.strip_prefix("per:") {
                    per = Some(parse_bracket_list(body)?);
                } else {
                    return Err(Error::InvalidAngle(format!("bad periodic spec part {part:?}")));
                }
            }
            return Ok(AngleSpec::Periodic {
                preperiod: pre.unwrap_or_default(),
                period: per.ok_or_else(|| Error::InvalidAngle("periodic spec missing per:[..]".into()))?,
            });
        }
        if s.contains('.') {
            return Ok(AngleSpec::Decimal(s.to_string()));
        }
        let coeffs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidAngle(format!("bad coefficient {t:?}")))
            })
            .collect::<Result<Vec<u64>>>()?;
        Ok(AngleSpec::Coefficients(coeffs))
    }
}

fn parse_bracket_list(body: &str) -> Result<Vec<u64>> {
    let body = body.trim();
    let inner = body
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .ok_or_else(|| Error::InvalidAngle(format!("expected [..] list, got {body:?}")))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidAngle(format!("bad coefficient {t:?}")))
        })
        .collect()
}

#[derive(Debug)]
enum CoeffSource {
    /// Finite list: the angle is exactly the rational [0; a_1..a_L].
    Finite(Vec<u64>),
    /// Infinite eventually periodic list.
    Periodic { pre: Vec<u64>, per: Vec<u64> },
}

#[derive(Debug, Clone)]
struct Surrogate {
    depth: usize,
    p: BigInt,
    q: BigInt,
    /// Certified bound on |x - p/q| per unit k; total error for frac(k·x)
    /// is k times this. Zero when the surrogate equals the angle exactly.
    err_per_unit: BigRational,
}

/// An angle x = θ/2π ∈ (0, 1) in continued-fraction form with an exact
/// rational surrogate.
#[derive(Debug)]
pub struct CFAngle {
    source: CoeffSource,
    depth: usize,
    bound_d: u64,
    surrogate: RwLock<Surrogate>,
    /// Smallest l ≥ 1 with l·x an integer, when x is rational.
    rational_order: Option<u64>,
}

/// The n-th convergent p_n/q_n together with δ_n = |q_n·x − p_n|
/// (so ‖q_nθ‖ = 2π·δ_n) and the recorded guard error of the δ evaluation.
#[derive(Debug, Clone)]
pub struct Convergent {
    pub n: usize,
    pub p: BigInt,
    pub q: BigInt,
    pub delta: f64,
    pub guard_err: f64,
}

/// Outcome of checking the norm recursion and the norm bounds.
#[derive(Debug, Clone)]
pub struct NormRecursionReport {
    pub depth: usize,
    /// Max over n of |δ_n − (a_{n+2}·δ_{n+1} + δ_{n+2})| / δ_n. The identity
    /// is exact in the surrogate's integer arithmetic, so this is 0 unless
    /// something is wrong.
    pub max_rel_residual: f64,
    /// Indices n where δ_{n+1} < δ_n failed.
    pub monotonicity_failures: Vec<usize>,
    /// Indices n where π/q_{n+1} < ‖q_nθ‖ < 2π/q_{n+1} failed.
    pub bound_failures: Vec<usize>,
}

impl NormRecursionReport {
    pub fn pass(&self) -> bool {
        self.max_rel_residual < 1e-12
            && self.monotonicity_failures.is_empty()
            && self.bound_failures.is_empty()
    }
}

impl CFAngle {
    /// Build an angle from a specification.
    ///
    /// `depth` is the working depth (convergent indices the caller intends to
    /// use); `guard_depth` the surrogate depth, raised to at least
    /// depth + 10 for infinite sources. `bound_d`, when absent, is set to the
    /// maximum observed coefficient.
    pub fn parse(
        spec: &AngleSpec,
        depth: Option<usize>,
        guard_depth: Option<usize>,
        bound_d: Option<u64>,
    ) -> Result<CFAngle> {
        match spec {
            AngleSpec::Coefficients(coeffs) => {
                validate_coeffs(coeffs)?;
                let depth = depth.unwrap_or(coeffs.len()).min(coeffs.len());
                Self::from_finite(coeffs.clone(), depth, bound_d, None)
            }
            AngleSpec::Periodic { preperiod, period } => {
                if period.is_empty() {
                    return Err(Error::InvalidAngle("empty period".into()));
                }
                if preperiod.iter().chain(period).any(|&a| a == 0) {
                    return Err(Error::InvalidAngle("zero coefficient".into()));
                }
                let depth = depth.unwrap_or(30).max(1);
                let observed = preperiod.iter().chain(period).copied().max().unwrap();
                let bound_d = resolve_bound(bound_d, observed)?;
                let guard = guard_depth.unwrap_or(0).max(depth + 10);
                let source = CoeffSource::Periodic {
                    pre: preperiod.clone(),
                    per: period.clone(),
                };
                let surrogate = build_surrogate(&source, guard)?;
                Ok(CFAngle {
                    source,
                    depth,
                    bound_d,
                    surrogate: RwLock::new(surrogate),
                    rational_order: None,
                })
            }
            AngleSpec::Decimal(s) => Self::from_decimal(s, depth, bound_d),
            AngleSpec::Rational { p, q } => Self::from_rational(*p, *q, bound_d),
        }
    }

    fn from_finite(
        coeffs: Vec<u64>,
        depth: usize,
        bound_d: Option<u64>,
        extra_err: Option<BigRational>,
    ) -> Result<CFAngle> {
        let observed = coeffs.iter().copied().max().unwrap_or(1);
        let bound_d = resolve_bound(bound_d, observed)?;
        let source = CoeffSource::Finite(coeffs);
        let guard = source.len_hint().unwrap();
        let mut surrogate = build_surrogate(&source, guard)?;
        if let Some(e) = extra_err {
            surrogate.err_per_unit = e;
        }
        let rational_order = if surrogate.err_per_unit.is_zero() {
            surrogate.q.to_u64()
        } else {
            None
        };
        Ok(CFAngle {
            source,
            depth,
            bound_d,
            surrogate: RwLock::new(surrogate),
            rational_order,
        })
    }

    fn from_decimal(s: &str, depth: Option<usize>, bound_d: Option<u64>) -> Result<CFAngle> {
        let body = s.trim();
        let frac_digits = body
            .strip_prefix("0.")
            .or_else(|| body.strip_prefix('.'))
            .ok_or_else(|| Error::InvalidAngle(format!("decimal angle must be 0.xxx, got {body:?}")))?;
        if frac_digits.is_empty() || !frac_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::InvalidAngle(format!("bad decimal string {body:?}")));
        }
        let sig_digits = frac_digits.trim_start_matches('0').len();
        let requested = depth.unwrap_or(30);
        if sig_digits < 16 && requested >= 20 {
            return Err(Error::InvalidAngle(format!(
                "decimal string has {sig_digits} significant digits; depth {requested} needs at least 16"
            )));
        }
        let den: BigInt = BigInt::from(10u32).pow(frac_digits.len() as u32);
        let num: BigInt = frac_digits
            .parse()
            .map_err(|_| Error::InvalidAngle(format!("bad decimal string {body:?}")))?;
        if num.is_zero() || num >= den {
            return Err(Error::InvalidAngle("decimal angle must lie in (0, 1)".into()));
        }
        // Euclid expansion of num/den, truncated before the tail becomes an
        // artifact of the decimal truncation: stop once the convergent
        // denominator exceeds sqrt(den).
        let limit = den.sqrt();
        let mut coeffs = Vec::new();
        let (mut a, mut b) = (num.clone(), den.clone()); // x = a/b, 0 < a < b
        let (mut q_prev, mut q_cur) = (BigInt::one(), BigInt::zero()); // q_{-2}, q_{-1}
        while !a.is_zero() {
            let (quot, rem) = b.div_rem(&a);
            let coeff = quot
                .to_u64()
                .ok_or_else(|| Error::InvalidAngle("continued-fraction coefficient overflow".into()))?;
            let q_next = BigInt::from(coeff) * &q_cur + &q_prev;
            if !coeffs.is_empty() && q_next > limit {
                break;
            }
            coeffs.push(coeff);
            q_prev = std::mem::replace(&mut q_cur, q_next);
            b = std::mem::replace(&mut a, rem);
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidAngle("decimal string too short to expand".into()));
        }
        let depth = requested.min(coeffs.len());
        // Uncertainty: one ulp of the decimal string plus the distance from
        // the decimal rational to the truncated expansion value.
        let dec = BigRational::new(num, den.clone());
        let ulp = BigRational::new(BigInt::one(), den);
        let cf_val = finite_value(&coeffs);
        let extra = ulp + (dec - cf_val).abs();
        Self::from_finite(coeffs, depth, bound_d, Some(extra))
    }

    fn from_rational(p: u64, q: u64, bound_d: Option<u64>) -> Result<CFAngle> {
        if q == 0 {
            return Err(Error::InvalidAngle("zero denominator".into()));
        }
        let p = p % q;
        if p == 0 {
            // Trivial rotation: the pure parabolic case, order 1. x = 0 with
            // an empty coefficient list; every norm is exactly 0.
            let mut angle = Self::from_finite(Vec::new(), 0, bound_d, None)?;
            angle.rational_order = Some(1);
            return Ok(angle);
        }
        let g = p.gcd(&q);
        let (p, q) = (p / g, q / g);
        // Plain Euclid expansion of p/q; exact.
        let mut coeffs = Vec::new();
        let (mut a, mut b) = (p, q);
        while a != 0 {
            coeffs.push(b / a);
            let r = b % a;
            b = a;
            a = r;
        }
        let depth = coeffs.len();
        let mut angle = Self::from_finite(coeffs, depth, bound_d, None)?;
        angle.rational_order = Some(q);
        Ok(angle)
    }

    /// Working depth: the largest convergent index the caller declared.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Uniform bound on the coefficients (bounded type bookkeeping).
    pub fn bound_d(&self) -> u64 {
        self.bound_d
    }

    /// Current guard depth of the rational surrogate.
    pub fn guard_depth(&self) -> usize {
        self.surrogate.read().unwrap().depth
    }

    /// Exact rational surrogate (p_N, q_N).
    pub fn surrogate(&self) -> (BigInt, BigInt) {
        let s = self.surrogate.read().unwrap();
        (s.p.clone(), s.q.clone())
    }

    /// When the angle is exactly rational p/q, the order q (the smallest
    /// l ≥ 1 with l·x ∈ ℤ, i.e. cos(lθ) = 1).
    pub fn rational_order(&self) -> Option<u64> {
        self.rational_order
    }

    /// Coefficient a_n for n ≥ 1, or None past the end of a finite source.
    pub fn coefficient(&self, n: usize) -> Option<u64> {
        if n == 0 {
            return Some(0);
        }
        match &self.source {
            CoeffSource::Finite(list) => list.get(n - 1).copied(),
            CoeffSource::Periodic { pre, per } => {
                let i = n - 1;
                Some(if i < pre.len() {
                    pre[i]
                } else {
                    per[(i - pre.len()) % per.len()]
                })
            }
        }
    }

    /// Convergents for n = 0..=n_max. δ_n is evaluated on the surrogate with
    /// the guard error recorded per entry.
    pub fn convergents(&self, n_max: usize) -> Result<Vec<Convergent>> {
        if n_max > self.depth {
            return Err(Error::DepthExceeded {
                requested: n_max,
                available: self.depth,
            });
        }
        self.ensure_guard(n_max + 2)?;
        let s = self.surrogate.read().unwrap().clone();
        let mut out = Vec::with_capacity(n_max + 1);
        // Seeds: q_{-2} = 1, q_{-1} = 0; p_{-2} = 0, p_{-1} = 1.
        let (mut q_m2, mut q_m1) = (BigInt::one(), BigInt::zero());
        let (mut p_m2, mut p_m1) = (BigInt::zero(), BigInt::one());
        for n in 0..=n_max {
            let a = BigInt::from(self.coefficient(n).ok_or(Error::DepthExceeded {
                requested: n,
                available: self.source.len_hint().unwrap_or(usize::MAX),
            })?);
            let p_n = &a * &p_m1 + &p_m2;
            let q_n = &a * &q_m1 + &q_m2;
            let d_num = (&q_n * &s.p - &p_n * &s.q).abs();
            let delta = big_ratio_to_f64(&d_num, &s.q);
            let guard_err = rational_to_f64(&(&s.err_per_unit * BigRational::from(q_n.clone())));
            out.push(Convergent {
                n,
                p: p_n.clone(),
                q: q_n.clone(),
                delta,
                guard_err,
            });
            p_m2 = std::mem::replace(&mut p_m1, p_n);
            q_m2 = std::mem::replace(&mut q_m1, q_n);
        }
        Ok(out)
    }

    /// Convergent denominators as u64, for n = 0.. while they fit and the
    /// source has coefficients, up to (and including) the first value
    /// exceeding `limit`.
    pub(crate) fn denominators_through(&self, limit: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let (mut q_m2, mut q_m1) = (1u128, 0u128);
        let mut n = 0usize;
        loop {
            let Some(a) = self.coefficient(n) else { break };
            let q_n = a as u128 * q_m1 + q_m2;
            q_m2 = std::mem::replace(&mut q_m1, q_n);
            if let Ok(q) = u64::try_from(q_n) {
                out.push(q);
                if q > limit {
                    break;
                }
            } else {
                break;
            }
            n += 1;
        }
        out
    }

    /// ‖kθ‖ = 2π·min(frac(kx), 1 − frac(kx)), in (0, π] (0 exactly when the
    /// angle is rational and k a multiple of its order).
    pub fn angle_norm(&self, k: u64) -> Result<f64> {
        let (dist, _) = self.norm_frac(k)?;
        Ok(2.0 * PI * dist)
    }

    /// 1 − cos(kθ), evaluated as 2·sin²(π·dist) to avoid cancellation when
    /// ‖kθ‖ is small.
    pub fn one_minus_cos(&self, k: u64) -> Result<f64> {
        let (dist, _) = self.norm_frac(k)?;
        let s = (PI * dist).sin();
        Ok(2.0 * s * s)
    }

    /// frac(k·x), for reducing the rotation angle of g^k mod 2π.
    pub fn frac_times(&self, k: u64) -> Result<f64> {
        if k == 0 {
            return Ok(0.0);
        }
        let (frac_num, q) = self.frac_exact(k)?;
        Ok(big_ratio_to_f64(&frac_num, &q))
    }

    /// min(frac(kx), 1 − frac(kx)) as f64, with budget enforcement.
    fn norm_frac(&self, k: u64) -> Result<(f64, f64)> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        let (frac_num, q) = self.frac_exact(k)?;
        let dist_num = (&q - &frac_num).min(frac_num);
        let dist = big_ratio_to_f64(&dist_num, &q);
        let err = {
            let s = self.surrogate.read().unwrap();
            rational_to_f64(&(&s.err_per_unit * BigRational::from(BigInt::from(k))))
        };
        Ok((dist, err))
    }

    /// Exact frac(k·p_N/q_N) as (numerator, q_N), after enforcing the
    /// relative precision budget (deepening the surrogate if possible).
    fn frac_exact(&self, k: u64) -> Result<(BigInt, BigInt)> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        loop {
            {
                let s = self.surrogate.read().unwrap();
                let num = (BigInt::from(k) * &s.p).mod_floor(&s.q);
                let dist_num = num.clone().min(&s.q - &num);
                let err = &s.err_per_unit * BigRational::from(BigInt::from(k));
                if budget_ok(&err, &dist_num, &s.q) {
                    return Ok((num, s.q.clone()));
                }
            }
            self.deepen(k)?;
        }
    }

    /// Budget precheck for a whole scan range: the smallest norm over
    /// k = 1..=k_max sits at the largest closest return in range.
    fn ensure_budget_through(&self, k_max: u64) -> Result<()> {
        if self.surrogate.read().unwrap().err_per_unit.is_zero() {
            return Ok(());
        }
        let qs = self.denominators_through(k_max);
        if let Some(q) = qs.iter().copied().filter(|&q| q <= k_max).max() {
            self.frac_exact(q)?;
        }
        Ok(())
    }

    /// Brute-force scan of closest return moments over k = 1..=k_max.
    pub fn closest_returns(&self, k_max: u64) -> Result<Vec<u64>> {
        if k_max == 0 {
            return Err(Error::InvalidArgument("k_max must be positive".into()));
        }
        self.ensure_budget_through(k_max)?;
        let s = self.surrogate.read().unwrap().clone();
        let mut out = Vec::new();
        let mut best: Option<BigInt> = None;
        let mut acc = BigInt::zero();
        let p_red = s.p.mod_floor(&s.q);
        for k in 1..=k_max {
            acc += &p_red;
            if acc >= s.q {
                acc -= &s.q;
            }
            let dist = acc.clone().min(&s.q - &acc);
            let better = match &best {
                None => true,
                Some(b) => &dist < b,
            };
            if better {
                out.push(k);
                best = Some(dist);
            }
        }
        Ok(out)
    }

    /// Check the classical norm identities over n = 1..=depth: the recursion
    /// ‖q_nθ‖ = a_{n+2}‖q_{n+1}θ‖ + ‖q_{n+2}θ‖, strict monotonicity of the
    /// norms, and the two-sided bounds against q_{n+1}.
    pub fn verify_norm_recursion(&self, depth: usize) -> Result<NormRecursionReport> {
        if depth == 0 {
            return Ok(NormRecursionReport {
                depth: 0,
                max_rel_residual: 0.0,
                monotonicity_failures: Vec::new(),
                bound_failures: Vec::new(),
            });
        }
        if depth + 2 > self.depth {
            return Err(Error::DepthExceeded {
                requested: depth + 2,
                available: self.depth,
            });
        }
        self.ensure_guard(depth + 12)?;
        let s = self.surrogate.read().unwrap().clone();
        let convs = self.convergents(depth + 2)?;
        // Exact δ numerators over the common denominator q_N.
        let d: Vec<BigInt> = convs
            .iter()
            .map(|c| (&c.q * &s.p - &c.p * &s.q).abs())
            .collect();
        let mut max_rel = 0.0f64;
        let mut mono = Vec::new();
        let mut bounds = Vec::new();
        for n in 1..=depth {
            let a_n2 = BigInt::from(self.coefficient(n + 2).unwrap());
            let residual = &d[n] - (&a_n2 * &d[n + 1] + &d[n + 2]);
            if !residual.is_zero() && !d[n].is_zero() {
                let rel = big_ratio_to_f64(&residual.abs(), &d[n]);
                max_rel = max_rel.max(rel);
            }
            if d[n + 1] >= d[n] {
                mono.push(n);
            }
            // π/q_{n+1} < 2π·δ_n < 2π/q_{n+1}  ⇔  q_N < 2·d_n·q_{n+1} and d_n·q_{n+1} < q_N.
            let prod = &d[n] * &convs[n + 1].q;
            if !(BigInt::from(2) * &prod > s.q && prod < s.q) {
                bounds.push(n);
            }
        }
        Ok(NormRecursionReport {
            depth,
            max_rel_residual: max_rel,
            monotonicity_failures: mono,
            bound_failures: bounds,
        })
    }

    /// Raise the surrogate to at least `min_depth` (no-op for exact sources).
    fn ensure_guard(&self, min_depth: usize) -> Result<()> {
        if matches!(self.source, CoeffSource::Finite(_)) {
            return Ok(());
        }
        let current = self.surrogate.read().unwrap().depth;
        if current >= min_depth {
            return Ok(());
        }
        let fresh = build_surrogate(&self.source, min_depth)?;
        let mut s = self.surrogate.write().unwrap();
        if s.depth < fresh.depth {
            *s = fresh;
        }
        Ok(())
    }

    /// One deepening step, used when a budget check fails.
    fn deepen(&self, k: u64) -> Result<()> {
        match &self.source {
            CoeffSource::Finite(_) => Err(Error::PrecisionBudget(format!(
                "k = {k} exceeds the certified precision of this angle; its coefficient \
                 source cannot be extended"
            ))),
            CoeffSource::Periodic { .. } => {
                let current = self.surrogate.read().unwrap().depth;
                if current + 10 > MAX_GUARD_DEPTH {
                    return Err(Error::PrecisionBudget(format!(
                        "guard depth cap {MAX_GUARD_DEPTH} reached while certifying k = {k}"
                    )));
                }
                self.ensure_guard(current + 10)
            }
        }
    }
}

impl CoeffSource {
    fn len_hint(&self) -> Option<usize> {
        match self {
            CoeffSource::Finite(v) => Some(v.len()),
            CoeffSource::Periodic { .. } => None,
        }
    }

    fn coefficient(&self, n: usize) -> Option<u64> {
        if n == 0 {
            return Some(0);
        }
        match self {
            CoeffSource::Finite(list) => list.get(n - 1).copied(),
            CoeffSource::Periodic { pre, per } => {
                let i = n - 1;
                Some(if i < pre.len() {
                    pre[i]
                } else {
                    per[(i - pre.len()) % per.len()]
                })
            }
        }
    }
}

fn validate_coeffs(coeffs: &[u64]) -> Result<()> {
    if coeffs.is_empty() {
        return Err(Error::InvalidAngle("empty coefficient list".into()));
    }
    if coeffs.contains(&0) {
        return Err(Error::InvalidAngle("zero coefficient".into()));
    }
    Ok(())
}

fn resolve_bound(requested: Option<u64>, observed: u64) -> Result<u64> {
    match requested {
        None => Ok(observed),
        Some(d) if d >= observed => Ok(d),
        Some(d) => Err(Error::InvalidAngle(format!(
            "declared bound D = {d} is below an observed coefficient {observed}"
        ))),
    }
}

/// Exact value of the finite continued fraction [0; a_1..a_L].
fn finite_value(coeffs: &[u64]) -> BigRational {
    let (mut p_m2, mut p_m1) = (BigInt::zero(), BigInt::one());
    let (mut q_m2, mut q_m1) = (BigInt::one(), BigInt::zero());
    let mut p = BigInt::zero();
    let mut q = BigInt::one();
    for &a in std::iter::once(&0u64).chain(coeffs.iter()) {
        let a = BigInt::from(a);
        p = &a * &p_m1 + &p_m2;
        q = &a * &q_m1 + &q_m2;
        p_m2 = std::mem::replace(&mut p_m1, p.clone());
        q_m2 = std::mem::replace(&mut q_m1, q.clone());
    }
    BigRational::new(p, q)
}

fn build_surrogate(source: &CoeffSource, guard_depth: usize) -> Result<Surrogate> {
    let depth = match source.len_hint() {
        Some(len) => guard_depth.min(len),
        None => guard_depth,
    };
    let (mut p_m2, mut p_m1) = (BigInt::zero(), BigInt::one());
    let (mut q_m2, mut q_m1) = (BigInt::one(), BigInt::zero());
    let mut p = BigInt::zero();
    let mut q = BigInt::one();
    for n in 0..=depth {
        let a = BigInt::from(source.coefficient(n).expect("depth within source"));
        p = &a * &p_m1 + &p_m2;
        q = &a * &q_m1 + &q_m2;
        p_m2 = std::mem::replace(&mut p_m1, p.clone());
        q_m2 = std::mem::replace(&mut q_m1, q.clone());
    }
    let err_per_unit = match source {
        CoeffSource::Finite(_) => BigRational::zero(),
        CoeffSource::Periodic { .. } => {
            // |x − p_N/q_N| < 1/(q_N·q_{N+1}).
            let a_next = BigInt::from(source.coefficient(depth + 1).expect("periodic is infinite"));
            let q_next = &a_next * &q + &q_m2;
            BigRational::new(BigInt::one(), &q * q_next)
        }
    };
    let g = p.gcd(&q);
    Ok(Surrogate {
        depth,
        p: &p / &g,
        q: &q / &g,
        err_per_unit,
    })
}

/// err ≤ REL_BUDGET · (dist_num / q), with the zero cases handled exactly.
fn budget_ok(err: &BigRational, dist_num: &BigInt, q: &BigInt) -> bool {
    if err.is_zero() {
        return true;
    }
    if dist_num.is_zero() {
        return false;
    }
    // err · 10^15 ≤ dist_num / q
    let lhs = err * BigRational::from(BigInt::from(10u64.pow(15)));
    lhs <= BigRational::new(dist_num.clone(), q.clone())
}

/// Accurate num/den → f64 without overflowing intermediate conversions.
fn big_ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    BigRational::new(num.clone(), den.clone())
        .to_f64()
        .unwrap_or(f64::NAN)
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
