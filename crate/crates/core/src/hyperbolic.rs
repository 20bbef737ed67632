//! Upper half-space model of hyperbolic 4-space: distance formulas, the
//! screw parabolic action, the model region profile a(r), the maps h and f,
//! and seeded distortion certification.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::region::Region;

/// A point (x, y, z, u) of the upper half-space, u > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point4 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub u: f64,
}

impl Point4 {
    pub fn new(x: f64, y: f64, z: f64, u: f64) -> Result<Point4> {
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "height coordinate must be positive, got {u}"
            )));
        }
        Ok(Point4 { x, y, z, u })
    }

    /// Distance from the rotation axis: r = √(x² + y²).
    pub fn radial(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Hyperbolic distance, in the cancellation-safe form
/// ρ = 2·asinh(|P − Q| / (2√(u₁u₂))).
pub fn dist(p: Point4, q: Point4) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let dz = p.z - q.z;
    let du = p.u - q.u;
    let sep = (dx * dx + dy * dy + dz * dz + du * du).sqrt();
    2.0 * (sep / (2.0 * (p.u * q.u).sqrt())).asinh()
}

/// The cosh form of the same distance, ρ = acosh(1 + |P − Q|²/(2u₁u₂)).
/// Used only as a cross-check; it loses digits near cosh = 1.
pub fn dist_cosh(p: Point4, q: Point4) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let dz = p.z - q.z;
    let du = p.u - q.u;
    let sep2 = dx * dx + dy * dy + dz * dz + du * du;
    (1.0 + sep2 / (2.0 * p.u * q.u)).acosh()
}

/// Apply g^k for g(x,y,z,u) = (x cosθ − y sinθ, x sinθ + y cosθ, z + √2, u):
/// rotation by kθ in the (x, y)-plane with the angle reduced through the
/// exact surrogate, translation by k√2 in z.
pub fn screw_apply(region: &Region, k: i64, p: Point4) -> Result<Point4> {
    if k == 0 {
        return Ok(p);
    }
    let frac = region.angle().frac_times(k.unsigned_abs())?;
    let mut phi = 2.0 * PI * frac;
    if k < 0 {
        phi = -phi;
    }
    let (s, c) = phi.sin_cos();
    Ok(Point4 {
        x: p.x * c - p.y * s,
        y: p.x * s + p.y * c,
        z: p.z + k as f64 * std::f64::consts::SQRT_2,
        u: p.u,
    })
}

/// Membership test for the Margulis region: true iff
/// E·u² ≥ (1 − cos kθ)·r² + k² for some 1 ≤ k ≤ k_max. Only k ≤ √E·u can
/// satisfy the inequality, so any k_max at least that large is complete.
pub fn in_margulis_region(region: &Region, p: Point4, k_max: u64) -> Result<bool> {
    let e = region.e_value();
    let r = p.radial();
    let lhs = e * p.u * p.u;
    let cap = ((e.sqrt() * p.u).ceil() as u64).min(k_max);
    for k in 1..=cap {
        let c = region.c_value(k)?;
        let kf = k as f64;
        if lhs >= c * r * r + kf * kf {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Height profile of the model region S_a: a(r) = √((√(4r² + 1) + 1)/2).
/// Asymptotic to √r, with a(0) = 1.
pub fn profile_a(r: f64) -> f64 {
    (((4.0 * r * r + 1.0).sqrt() + 1.0) / 2.0).sqrt()
}

/// Companion profile s_r = √((√(4r² + 1) − 1)/2); satisfies a² − s² = 1 and
/// inverts r ↦ r√(r² + 1).
pub fn profile_s(r: f64) -> f64 {
    // (√(4r²+1) − 1)/2 cancels for small r; equal to 2r²/(√(4r²+1) + 1).
    let root = (4.0 * r * r + 1.0).sqrt();
    (2.0 * r * r / (root + 1.0)).sqrt()
}

/// The radial squaring map h: P ↦ λP with λ = √(x² + y² + u²). Bilipschitz
/// with constant 4 on the whole space, 2 on the slice z = 0.
pub fn map_h(p: Point4) -> Point4 {
    let lambda = (p.x * p.x + p.y * p.y + p.u * p.u).sqrt();
    Point4 {
        x: lambda * p.x,
        y: lambda * p.y,
        z: lambda * p.z,
        u: lambda * p.u,
    }
}

/// The vertical scaling f: (x, y, z, u) ↦ (x, y, z, (b(r)/a(r))·u), mapping
/// the boundary of S_a onto the boundary of the Margulis region.
pub fn map_f(region: &Region, p: Point4) -> Result<Point4> {
    let r = p.radial();
    let (b, _) = region.envelope_value(r)?;
    Ok(Point4 {
        u: p.u * b / profile_a(r),
        ..p
    })
}

/// Sampler settings for the certification runs. Coordinates are uniform in
/// [−1e3, 1e3] (z pinned to 0 in slice mode), heights log-uniform in
/// [1e−3, 1e3]; pairs closer than 1e−6 in hyperbolic distance are rejected.
#[derive(Debug, Clone, Copy)]
pub struct SamplerConfig {
    pub samples: usize,
    pub seed: u64,
    pub slice_z0: bool,
}

impl SamplerConfig {
    pub fn new(samples: usize, seed: u64) -> SamplerConfig {
        SamplerConfig {
            samples,
            seed,
            slice_z0: false,
        }
    }
}

/// Sampled distortion statistics for a self-map of hyperbolic 4-space.
#[derive(Debug, Clone, Copy)]
pub struct DistortionReport {
    pub sample_count: usize,
    pub seed: u64,
    /// min and max of ρ(f(P), f(Q)) / ρ(P, Q) over accepted pairs.
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// max of |ρ(f(P), f(Q)) − ρ(P, Q)|.
    pub max_additive_defect: f64,
    /// max of ρ(P, f(P)) over sampled points.
    pub max_displacement: f64,
    /// C = max(|ln A|, |ln B|) for the quasi-isometry bound; 0 for maps
    /// certified multiplicatively only.
    pub constant_c: f64,
    /// Whether the constructed preimages of random targets mapped back
    /// exactly (surjectivity witness); always true for h.
    pub surjectivity_ok: bool,
}

const MIN_PAIR_DIST: f64 = 1e-6;

fn sample_point(rng: &mut ChaCha8Rng, slice_z0: bool) -> Point4 {
    let x = rng.gen_range(-1e3..1e3);
    let y = rng.gen_range(-1e3..1e3);
    let z = if slice_z0 { 0.0 } else { rng.gen_range(-1e3..1e3) };
    let log_u = rng.gen_range((1e-3f64).ln()..(1e3f64).ln());
    Point4 {
        x,
        y,
        z,
        u: log_u.exp(),
    }
}

fn sample_pair(rng: &mut ChaCha8Rng, slice_z0: bool) -> (Point4, Point4, f64) {
    loop {
        let p = sample_point(rng, slice_z0);
        let q = sample_point(rng, slice_z0);
        let d = dist(p, q);
        if d >= MIN_PAIR_DIST {
            return (p, q, d);
        }
    }
}

/// Sampled bilipschitz certification of h. A ratio outside [1/4, 4] shows up
/// in the report's extrema; it is not an error here.
pub fn certify_bilipschitz(config: &SamplerConfig) -> Result<DistortionReport> {
    if config.samples == 0 {
        return Err(Error::InvalidArgument("sample_count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    let mut max_defect = 0.0f64;
    for _ in 0..config.samples {
        let (p, q, d) = sample_pair(&mut rng, config.slice_z0);
        let dh = dist(map_h(p), map_h(q));
        let ratio = dh / d;
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        max_defect = max_defect.max((dh - d).abs());
    }
    Ok(DistortionReport {
        sample_count: config.samples,
        seed: config.seed,
        min_ratio,
        max_ratio,
        max_additive_defect: max_defect,
        max_displacement: 0.0,
        constant_c: 0.0,
        surjectivity_ok: true,
    })
}

/// Sampled quasi-isometry certification of f. A and B bound b(r)/a(r) over
/// the union of the sampled radii and a geometric grid on [0, r_max] with
/// 10⁴ points, widened by 1% before setting C = max(|ln A|, |ln B|).
pub fn certify_quasi_isometry(
    region: &Region,
    config: &SamplerConfig,
    r_max: f64,
) -> Result<DistortionReport> {
    if config.samples == 0 {
        return Err(Error::InvalidArgument("sample_count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pairs: Vec<(Point4, Point4, f64)> = (0..config.samples)
        .map(|_| sample_pair(&mut rng, config.slice_z0))
        .collect();

    // Empirical bounds A < b/a < B over sampled radii plus the grid.
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut account = |r: f64| -> Result<()> {
        let (b, _) = region.envelope_value(r)?;
        let q = b / profile_a(r);
        lo = lo.min(q);
        hi = hi.max(q);
        Ok(())
    };
    account(0.0)?;
    let grid_lo = 1e-3f64;
    let grid_n = 10_000usize;
    let ratio = (r_max / grid_lo).powf(1.0 / (grid_n as f64 - 1.0));
    for i in 0..grid_n {
        account(grid_lo * ratio.powi(i as i32))?;
    }
    for (p, q, _) in &pairs {
        account(p.radial())?;
        account(q.radial())?;
    }
    let a_bound = lo / 1.01;
    let b_bound = hi * 1.01;
    let constant_c = a_bound.ln().abs().max(b_bound.ln().abs());

    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    let mut max_defect = 0.0f64;
    let mut max_disp = 0.0f64;
    for (p, q, d) in &pairs {
        let fp = map_f(region, *p)?;
        let fq = map_f(region, *q)?;
        let df = dist(fp, fq);
        min_ratio = min_ratio.min(df / d);
        max_ratio = max_ratio.max(df / d);
        max_defect = max_defect.max((df - d).abs());
        max_disp = max_disp.max(dist(*p, fp));
    }

    // Surjectivity witness: random targets pull back exactly along the
    // vertical scaling.
    let mut surjectivity_ok = true;
    for _ in 0..(config.samples / 10).max(10) {
        let target = sample_point(&mut rng, config.slice_z0);
        let r = target.radial();
        let (b, _) = region.envelope_value(r)?;
        let pre = Point4 {
            u: target.u * profile_a(r) / b,
            ..target
        };
        let back = map_f(region, pre)?;
        if (back.u - target.u).abs() > 1e-9 * target.u {
            surjectivity_ok = false;
        }
    }

    Ok(DistortionReport {
        sample_count: config.samples,
        seed: config.seed,
        min_ratio,
        max_ratio,
        max_additive_defect: max_defect,
        max_displacement: max_disp,
        constant_c,
        surjectivity_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::{AngleSpec, CFAngle};

    fn golden_region() -> Region {
        let angle = CFAngle::parse(
            &AngleSpec::Periodic {
                preperiod: vec![],
                period: vec![1],
            },
            Some(30),
            None,
            None,
        )
        .unwrap();
        Region::new(angle, 0.1).unwrap()
    }

    fn pt(x: f64, y: f64, z: f64, u: f64) -> Point4 {
        Point4::new(x, y, z, u).unwrap()
    }

    #[test]
    fn vertical_distance_is_log_height_ratio() {
        let d = dist(pt(0.0, 0.0, 0.0, 1.0), pt(0.0, 0.0, 0.0, std::f64::consts::E));
        assert!((d - 1.0).abs() < 1e-12);
        assert_eq!(dist(pt(1.0, 2.0, 3.0, 4.0), pt(1.0, 2.0, 3.0, 4.0)), 0.0);
    }

    #[test]
    fn horizontal_unit_separation() {
        let d = dist(pt(0.0, 0.0, 0.0, 1.0), pt(1.0, 0.0, 0.0, 1.0));
        assert!((d - 2.0 * 0.5f64.asinh()).abs() < 1e-12);
        assert!((d - 0.962_423_650_1).abs() < 1e-9);
    }

    #[test]
    fn cosh_and_sinh_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (p, q, d) = sample_pair(&mut rng, false);
            let dc = dist_cosh(p, q);
            assert!((d - dc).abs() < 1e-12 * d.max(1.0), "{d} vs {dc}");
        }
    }

    #[test]
    fn distance_axioms_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let p = sample_point(&mut rng, false);
            let q = sample_point(&mut rng, false);
            let w = sample_point(&mut rng, false);
            let dpq = dist(p, q);
            assert!((dpq - dist(q, p)).abs() <= 1e-12 * dpq.max(1.0));
            assert!(dpq + dist(q, w) >= dist(p, w) - 1e-12);
        }
    }

    #[test]
    fn screw_identity_and_rotation_invariants() {
        let reg = golden_region();
        let p = pt(3.0, -4.0, 5.0, 2.0);
        assert_eq!(screw_apply(&reg, 0, p).unwrap(), p);
        for k in [1i64, 2, 17, -5, 144] {
            let gp = screw_apply(&reg, k, p).unwrap();
            assert!((gp.u - p.u).abs() == 0.0);
            let r2 = p.x * p.x + p.y * p.y;
            let r2g = gp.x * gp.x + gp.y * gp.y;
            assert!((r2 - r2g).abs() < 1e-12 * r2);
            assert!((gp.z - p.z - k as f64 * std::f64::consts::SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn screw_is_isometry() {
        let reg = golden_region();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let (p, q, d) = sample_pair(&mut rng, false);
            let k = rng.gen_range(-1000i64..1000);
            let dg = dist(
                screw_apply(&reg, k, p).unwrap(),
                screw_apply(&reg, k, q).unwrap(),
            );
            assert!((d - dg).abs() < 1e-10 * d.max(1.0));
        }
    }

    #[test]
    fn displacement_identity() {
        // cosh(ρ(P, g^k(P))) = 1 + ((1 − cos kθ)r² + k²)/u².
        let reg = golden_region();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let p = sample_point(&mut rng, false);
            let k = rng.gen_range(1u64..500);
            let gp = screw_apply(&reg, k as i64, p).unwrap();
            let lhs = dist(p, gp).cosh();
            let r = p.radial();
            let c = reg.c_value(k).unwrap();
            let rhs = 1.0 + (c * r * r + (k as f64) * (k as f64)) / (p.u * p.u);
            assert!((lhs - rhs).abs() < 1e-10 * rhs, "k={k} lhs={lhs} rhs={rhs}");
        }
    }

    #[test]
    fn membership_matches_envelope() {
        let reg = golden_region();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let r = rng.gen_range(0.0..1e3);
            let (b, _) = reg.envelope_value(r).unwrap();
            let above = pt(r, 0.0, 0.0, b * (1.0 + 1e-6));
            let below = pt(r.max(1.0), 0.0, 0.0, b * (1.0 - 1e-6));
            let k_max = (reg.e_value().sqrt() * b * 2.0).ceil() as u64 + 1;
            assert!(in_margulis_region(&reg, above, k_max).unwrap());
            if r >= 1.0 {
                assert!(!in_margulis_region(&reg, below, k_max).unwrap());
            }
        }
    }

    #[test]
    fn membership_flips_at_boundary() {
        // Bisect in u along random rays; the flip height must match b(r).
        let reg = golden_region();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..25 {
            let r = rng.gen_range(0.5..1e3);
            let (b, _) = reg.envelope_value(r).unwrap();
            let k_max = (reg.e_value().sqrt() * b * 4.0).ceil() as u64 + 1;
            let (mut lo, mut hi) = (b * 0.5, b * 2.0);
            assert!(!in_margulis_region(&reg, pt(r, 0.0, 0.0, lo), k_max).unwrap());
            assert!(in_margulis_region(&reg, pt(r, 0.0, 0.0, hi), k_max).unwrap());
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if in_margulis_region(&reg, pt(r, 0.0, 0.0, mid), k_max).unwrap() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            assert!((hi - b).abs() < 1e-9 * b.max(1.0));
        }
    }

    #[test]
    fn profiles_satisfy_identities() {
        assert_eq!(profile_a(0.0), 1.0);
        assert_eq!(profile_s(0.0), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let r: f64 = rng.gen_range(0.0..1e6);
            let a = profile_a(r);
            let s = profile_s(r);
            assert!((a * a - s * s - 1.0).abs() < 1e-12 * (a * a).max(1.0));
            assert!((a.powi(4) - a * a - r * r).abs() < 1e-12 * (r * r).max(1.0));
        }
        // a is asymptotic to √r.
        let big = profile_a(1e8) / 1e4;
        assert!((big - 1.0).abs() < 1e-7);
        // a strictly increasing on a grid.
        let mut prev = 0.0;
        for i in 0..100 {
            let a = profile_a(i as f64);
            assert!(a > prev);
            prev = a;
        }
    }

    #[test]
    fn map_h_examples() {
        let p = map_h(pt(0.0, 0.0, 0.0, 3.0));
        assert_eq!((p.x, p.y, p.z), (0.0, 0.0, 0.0));
        assert!((p.u - 9.0).abs() < 1e-12);

        let q = map_h(pt(3.0, 4.0, 0.0, 1.0));
        let lambda = 26f64.sqrt();
        assert!((q.x - 3.0 * lambda).abs() < 1e-12);
        assert!((q.y - 4.0 * lambda).abs() < 1e-12);
        assert_eq!(q.z, 0.0);
        assert!((q.u - lambda).abs() < 1e-12);
    }

    #[test]
    fn map_h_sends_horosphere_to_profile_graph() {
        // Image of the height-1 horosphere lies on u' = a(r').
        for r in [0.0, 0.3, 1.0, 17.5, 999.0] {
            let p = map_h(pt(r, 0.0, 2.0, 1.0));
            let r_img = p.radial();
            assert!((p.u - profile_a(r_img)).abs() < 1e-12 * p.u.max(1.0));
        }
    }

    #[test]
    fn map_f_on_model_boundary() {
        let reg = golden_region();
        for r in [0.0, 1.0, 50.0, 2e3] {
            let p = pt(r, 0.0, 7.0, profile_a(r).max(1e-300));
            let fp = map_f(&reg, p).unwrap();
            let (b, _) = reg.envelope_value(r).unwrap();
            assert!((fp.u - b).abs() < 1e-12 * b);
            assert_eq!((fp.x, fp.y, fp.z), (p.x, p.y, p.z));
        }
        // r = 0 scales by b(0)/a(0) = 1/√E.
        let p0 = pt(0.0, 0.0, 0.0, 1.0);
        let f0 = map_f(&reg, p0).unwrap();
        let e = 0.1f64.cosh() - 1.0;
        assert!((f0.u - 1.0 / e.sqrt()).abs() < 1e-12 * f0.u);
    }

    #[test]
    fn axis_pairs_have_ratio_exactly_two() {
        let p = pt(0.0, 0.0, 0.0, 0.7);
        let q = pt(0.0, 0.0, 0.0, 11.0);
        let ratio = dist(map_h(p), map_h(q)) / dist(p, q);
        assert!((ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bilipschitz_certification_small() {
        let rep = certify_bilipschitz(&SamplerConfig::new(2000, 42)).unwrap();
        assert!(rep.min_ratio >= 0.25 && rep.max_ratio <= 4.0, "{rep:?}");
        let slice = certify_bilipschitz(&SamplerConfig {
            samples: 2000,
            seed: 42,
            slice_z0: true,
        })
        .unwrap();
        assert!(slice.min_ratio >= 0.5 && slice.max_ratio <= 2.0, "{slice:?}");
    }

    #[test]
    fn quasi_isometry_certification_small() {
        let reg = golden_region();
        let rep = certify_quasi_isometry(&reg, &SamplerConfig::new(500, 7), 1e6).unwrap();
        assert!(rep.max_additive_defect <= 2.0 * rep.constant_c, "{rep:?}");
        assert!(rep.max_displacement <= rep.constant_c, "{rep:?}");
        assert!(rep.surjectivity_ok);
        // Same vertical ray, equal radius: the scaling factor cancels.
        let p = pt(5.0, 5.0, 1.0, 2.0);
        let q = pt(5.0, 5.0, 1.0, 20.0);
        let d = dist(p, q);
        let df = dist(map_f(&reg, p).unwrap(), map_f(&reg, q).unwrap());
        assert!((d - df).abs() < 1e-9);
    }

    #[test]
    fn composite_maps_horosphere_to_envelope_graph() {
        let reg = golden_region();
        for i in 0..100 {
            let r = 1e-2 * (1e3f64 / 1e-2).powf(i as f64 / 99.0);
            let image = map_f(&reg, map_h(pt(r, 0.0, 0.0, 1.0))).unwrap();
            let (b, _) = reg.envelope_value(image.radial()).unwrap();
            assert!((image.u - b).abs() < 1e-9 * b.max(1.0));
        }
    }
}
