//! Root bookkeeping for meromorphic secular functions: argument-principle
//! censuses on rectangles, bisection-based zero isolation, Newton polish,
//! parameter continuation of resonance poles, and departure-angle
//! estimation from the first few trajectory samples.
//!
//! Everything here treats the target function as a black box
//! `Complex64 -> Complex64`, analytic on the region of interest apart from
//! isolated poles. Derivatives, where needed, are formed by central
//! differences, which keeps the API honest about what callers must provide
//! and costs one extra digit at worst for the well-scaled functions this
//! crate produces.

use num_complex::Complex64;
use thiserror::Error;

/// Cut fractions tried when a subdivision line lands on (or too close to)
/// a zero: nudge the cut rather than the zero.
const JITTER_FRACTIONS: [f64; 5] = [0.5, 0.53, 0.47, 0.56, 0.44];

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("derivative vanishes at {k}")]
    DerivativeVanishes { k: Complex64 },
    #[error("no convergence after {steps} steps, last iterate {last}")]
    NoConvergence { last: Complex64, steps: usize },
    #[error("zero sits on the census contour near {k}")]
    ZeroOnContour { k: Complex64 },
    #[error("census quadrature failed to settle (residual {residual})")]
    QuadratureFailure { residual: f64 },
    #[error("could not split cell around a boundary zero")]
    CellSplitFailed,
    #[error("continuation step fell below the minimum at lambda = {lambda}")]
    StepUnderflow { lambda: f64 },
    #[error("pole lost at lambda = {lambda}: corrector keeps failing")]
    LostPole { lambda: f64 },
    #[error("pure-perturbative tracking requires a perturbative step rule")]
    MissingPerturbativeRule,
    #[error("need at least {needed} trajectory samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
}

/// Axis-aligned census rectangle in the complex momentum plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
}

impl Rect {
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64) -> Self {
        assert!(re0 < re1 && im0 < im1, "degenerate rectangle");
        Self { re0, re1, im0, im1 }
    }

    pub fn centered(c: Complex64, half_width: f64, half_height: f64) -> Self {
        Self::new(
            c.re - half_width,
            c.re + half_width,
            c.im - half_height,
            c.im + half_height,
        )
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))
    }

    pub fn width(&self) -> f64 {
        self.re1 - self.re0
    }

    pub fn height(&self) -> f64 {
        self.im1 - self.im0
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, k: Complex64) -> bool {
        self.re0 <= k.re && k.re <= self.re1 && self.im0 <= k.im && k.im <= self.im1
    }

    /// Corners in counterclockwise order starting at the lower left.
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re0, self.im0),
            Complex64::new(self.re1, self.im0),
            Complex64::new(self.re1, self.im1),
            Complex64::new(self.re0, self.im1),
        ]
    }

    /// Split across the longer side at the given fraction.
    fn split(&self, frac: f64) -> (Rect, Rect) {
        if self.width() >= self.height() {
            let cut = self.re0 + frac * self.width();
            (
                Rect { re1: cut, ..*self },
                Rect { re0: cut, ..*self },
            )
        } else {
            let cut = self.im0 + frac * self.height();
            (
                Rect { im1: cut, ..*self },
                Rect { im0: cut, ..*self },
            )
        }
    }
}

/// Central difference derivative with a step scaled to the argument.
pub fn central_diff<F: Fn(Complex64) -> Complex64>(f: &F, k: Complex64) -> Complex64 {
    let h = 1e-7 * k.norm().max(1.0);
    (f(k + h) - f(k - h)) / Complex64::new(2.0 * h, 0.0)
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
        }
    }
}

/// Newton iteration for a simple zero.
pub fn newton_root<F: Fn(Complex64) -> Complex64>(
    f: &F,
    start: Complex64,
    opts: &NewtonOptions,
) -> Result<Complex64, NumericsError> {
    newton_root_multiplicity(f, start, 1, opts)
}

/// Newton iteration with the classical multiplicity correction
/// `k <- k - m f/f'`, which restores quadratic convergence at an m-fold
/// zero. Convergence requires both a small last step and a small residual
/// relative to the derivative scale.
pub fn newton_root_multiplicity<F: Fn(Complex64) -> Complex64>(
    f: &F,
    start: Complex64,
    multiplicity: usize,
    opts: &NewtonOptions,
) -> Result<Complex64, NumericsError> {
    assert!(multiplicity >= 1);
    let m = multiplicity as f64;
    let mut k = start;
    for step in 0..opts.max_iter {
        let fk = f(k);
        let dfk = central_diff(f, k);
        if !fk.is_finite() || !dfk.is_finite() {
            return Err(NumericsError::NoConvergence { last: k, steps: step });
        }
        if dfk.norm() < 1e-290 {
            return Err(NumericsError::DerivativeVanishes { k });
        }
        let delta = Complex64::new(m, 0.0) * fk / dfk;
        k -= delta;
        let scale = k.norm().max(1.0);
        if delta.norm() <= opts.tol * scale && f(k).norm() <= opts.tol * dfk.norm().max(1.0) {
            return Ok(k);
        }
    }
    Err(NumericsError::NoConvergence {
        last: k,
        steps: opts.max_iter,
    })
}

/// Outcome of an argument-principle census over a rectangle.
#[derive(Debug, Clone, Copy)]
pub struct CountResult {
    /// Number of zeros minus poles inside, counted with multiplicity.
    pub count: i64,
    /// Distance of the accumulated boundary phase, in turns, from the
    /// nearest integer. Rounding noise when the march converges.
    pub residual: f64,
}

/// Initial uniform segments per rectangle side before adaptive bisection.
const MARCH_SEGMENTS: usize = 8;
/// Bisection depth cap; reaching it means a singularity sits essentially
/// on the contour.
const MARCH_MAX_DEPTH: usize = 48;
/// Largest phase step, in radians, accepted between neighbouring samples.
/// Keeping every accepted step comfortably below pi prevents a step from
/// aliasing across the principal branch cut.
const MARCH_MAX_JUMP: f64 = 2.0;

struct March {
    total: f64,
    min_abs: f64,
    max_abs: f64,
    min_at: Complex64,
}

impl March {
    fn observe(&mut self, z: Complex64, fz: Complex64) -> Result<(), NumericsError> {
        let v = fz.norm();
        if !v.is_finite() || v == 0.0 {
            return Err(NumericsError::ZeroOnContour { k: z });
        }
        if v < self.min_abs {
            self.min_abs = v;
            self.min_at = z;
        }
        if v > self.max_abs {
            self.max_abs = v;
        }
        Ok(())
    }
}

fn march_segment<F: Fn(Complex64) -> Complex64>(
    f: &F,
    a: Complex64,
    b: Complex64,
    fa: Complex64,
    fb: Complex64,
    depth: usize,
    march: &mut March,
) -> Result<(), NumericsError> {
    let jump = (fb / fa).arg();
    if jump.is_finite() && jump.abs() <= MARCH_MAX_JUMP {
        march.total += jump;
        return Ok(());
    }
    if depth >= MARCH_MAX_DEPTH {
        return Err(NumericsError::QuadratureFailure {
            residual: jump.abs() / (2.0 * std::f64::consts::PI),
        });
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    march.observe(mid, fm)?;
    march_segment(f, a, mid, fa, fm, depth + 1, march)?;
    march_segment(f, mid, b, fm, fb, depth + 1, march)
}

/// Count zeros minus poles of `f` inside the rectangle by tracking the
/// continuous argument of `f` around the boundary. Each side starts as
/// [`MARCH_SEGMENTS`] uniform segments; any step whose phase change
/// exceeds [`MARCH_MAX_JUMP`] is bisected until every step stays well
/// inside the principal branch, which makes the winding number exact up
/// to rounding noise and keeps the cost of near-boundary singularities
/// logarithmic in their distance to the contour. A function value on the
/// contour that vanishes — exactly, or relative to the largest sampled
/// magnitude — aborts with [`NumericsError::ZeroOnContour`]; bisection
/// that hits the depth cap aborts with
/// [`NumericsError::QuadratureFailure`].
///
/// The one structural blind spot: a group of zeros (or a zero/pole pair)
/// whose multiplicities sum to an even number, lying a distance `d` from
/// the contour, turns the phase by a near-exact multiple of `2π`
/// concentrated in a width of order `d`. A single step longer than about
/// `3.6 d` swallows that turn whole, reads a small principal jump, and is
/// accepted; bisection only engages for step lengths between roughly
/// `1.1 d` and `3.6 d`. The count is therefore exact only when every zero
/// and pole keeps a clearance from the boundary comparable to the initial
/// step length (side length / [`MARCH_SEGMENTS`]); odd-multiplicity
/// clusters are always caught, because their half-turn surplus trips the
/// jump threshold at every scale. [`find_zeros`] censuses far more densely,
/// cross-checks parent counts against children while subdividing, and
/// re-censuses on disagreement, so it recovers boundary-hugging clusters
/// that a single fixed-box count misses; prefer it whenever the zero
/// layout near the boundary is unknown.
pub fn count_zeros<F: Fn(Complex64) -> Complex64>(
    f: &F,
    rect: &Rect,
) -> Result<CountResult, NumericsError> {
    count_zeros_with(f, rect, MARCH_SEGMENTS)
}

fn count_zeros_with<F: Fn(Complex64) -> Complex64>(
    f: &F,
    rect: &Rect,
    segments: usize,
) -> Result<CountResult, NumericsError> {
    let corners = rect.corners();
    let mut pts = Vec::with_capacity(4 * segments + 1);
    for side in 0..4 {
        let a = corners[side];
        let b = corners[(side + 1) % 4];
        for s in 0..segments {
            pts.push(a + (b - a) * (s as f64 / segments as f64));
        }
    }
    pts.push(corners[0]);
    let mut march = March {
        total: 0.0,
        min_abs: f64::INFINITY,
        max_abs: 0.0,
        min_at: corners[0],
    };
    let vals: Vec<Complex64> = pts.iter().map(|&z| f(z)).collect();
    for (&z, &v) in pts.iter().zip(&vals) {
        march.observe(z, v)?;
    }
    for i in 0..pts.len() - 1 {
        march_segment(f, pts[i], pts[i + 1], vals[i], vals[i + 1], 0, &mut march)?;
    }
    if march.min_abs < 1e-12 * march.max_abs {
        return Err(NumericsError::ZeroOnContour { k: march.min_at });
    }
    let turns = march.total / (2.0 * std::f64::consts::PI);
    let count = turns.round();
    Ok(CountResult {
        count: count as i64,
        residual: (turns - count).abs(),
    })
}

/// A located zero with its multiplicity.
#[derive(Debug, Clone, Copy)]
pub struct Zero {
    pub k: Complex64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct FindOptions {
    /// Cells at most this far across get polished instead of split.
    pub resolve: f64,
    /// Zeros closer than this are merged.
    pub dedupe: f64,
    pub newton: NewtonOptions,
    pub max_depth: usize,
}

impl Default for FindOptions {
    fn default() -> Self {
        Self {
            resolve: 1e-3,
            dedupe: 1e-8,
            newton: NewtonOptions::default(),
            max_depth: 64,
        }
    }
}

/// Locate every zero of `f` in the rectangle, with multiplicities.
///
/// The rectangle is recursively bisected along its longer side until each
/// cell holding zeros is smaller than `opts.resolve`; the center of such a
/// cell seeds a multiplicity-corrected Newton polish. Cuts that land on a
/// zero are nudged through a fixed jitter schedule. The outermost boundary
/// is the caller's responsibility: a zero sitting on it surfaces as an
/// error.
///
/// `f` may be meromorphic: the winding count is signed, so poles are
/// isolated by the same subdivision and then dropped. The one blind spot is
/// a zero and a pole closer together than the cell at which they become the
/// only singularities — their windings cancel and both go unreported.
pub fn find_zeros<F: Fn(Complex64) -> Complex64>(
    f: &F,
    rect: &Rect,
    opts: &FindOptions,
) -> Result<Vec<Zero>, NumericsError> {
    // The top box is the widest cell the search will ever census, which
    // makes it the most exposed to near-boundary zero clusters aliasing
    // out of the count; a denser initial march keeps that in check.
    let top = count_zeros_with(f, rect, 128)?;
    let mut found = Vec::new();
    recurse(f, rect, &top, opts, 0, &mut found)?;
    found.sort_by(|a, b| (a.k.re, a.k.im).partial_cmp(&(b.k.re, b.k.im)).unwrap());
    let mut merged: Vec<Zero> = Vec::new();
    for z in found {
        match merged.last_mut() {
            Some(last) if (last.k - z.k).norm() <= opts.dedupe => {
                let total = (last.multiplicity + z.multiplicity) as f64;
                last.k = (last.k * last.multiplicity as f64 + z.k * z.multiplicity as f64) / total;
                last.multiplicity += z.multiplicity;
            }
            _ => merged.push(z),
        }
    }
    Ok(merged)
}

fn recurse<F: Fn(Complex64) -> Complex64>(
    f: &F,
    rect: &Rect,
    census: &CountResult,
    opts: &FindOptions,
    depth: usize,
    out: &mut Vec<Zero>,
) -> Result<(), NumericsError> {
    if census.count == 0 {
        return Ok(());
    }
    if rect.diameter() <= opts.resolve || depth >= opts.max_depth {
        // A negative count is an isolated pole: real, but not a zero.
        if census.count < 0 {
            return Ok(());
        }
        let multiplicity = census.count as usize;
        // The cell isolates the zero, so its center is a sound polish seed.
        let polished = newton_root_multiplicity(f, rect.center(), multiplicity, &opts.newton)
            .ok()
            .filter(|k| {
                // Reject a polish that ran away from the isolating cell.
                let slack = 2.0 * rect.diameter() + opts.resolve;
                (*k - rect.center()).norm() <= slack
            })
            .unwrap_or_else(|| rect.center());
        out.push(Zero {
            k: polished,
            multiplicity,
        });
        return Ok(());
    }
    let mut count = census.count;
    let mut segments = MARCH_SEGMENTS;
    loop {
        for frac in JITTER_FRACTIONS {
            let (ra, rb) = rect.split(frac);
            let (ca, cb) = match (
                count_zeros_with(f, &ra, segments),
                count_zeros_with(f, &rb, segments),
            ) {
                (Ok(ca), Ok(cb)) => (ca, cb),
                _ => continue,
            };
            if ca.count + cb.count != count {
                continue;
            }
            recurse(f, &ra, &ca, opts, depth + 1, out)?;
            recurse(f, &rb, &cb, opts, depth + 1, out)?;
            return Ok(());
        }
        // No cut conserved the count. Either a cut kept grazing a zero, or
        // some census aliased a cluster of near-boundary zeros (see
        // [`count_zeros`]); denser sampling resolves the latter. The
        // parent's own count may be the stale one, so remeasure it too.
        if segments >= 256 {
            return Err(NumericsError::CellSplitFailed);
        }
        segments *= 2;
        if let Ok(rescored) = count_zeros_with(f, rect, segments) {
            count = rescored.count;
            if count == 0 {
                return Ok(());
            }
        }
    }
}

/// One record along a continued pole trajectory.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub lambda: f64,
    pub k: Complex64,
    /// |F(k, lambda)| at the accepted point.
    pub residual: f64,
    /// Whether the pole sits within the touch threshold of the real axis.
    pub touches_axis: bool,
}

#[derive(Debug, Clone)]
pub struct PoleTrajectory {
    pub samples: Vec<TrajectorySample>,
}

impl PoleTrajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory is never empty")
    }

    /// Sample closest in `lambda`.
    pub fn nearest(&self, lambda: f64) -> &TrajectorySample {
        self.samples
            .iter()
            .min_by(|a, b| {
                (a.lambda - lambda)
                    .abs()
                    .partial_cmp(&(b.lambda - lambda).abs())
                    .unwrap()
            })
            .expect("trajectory is never empty")
    }

    /// Local maxima of `Im k` that come within `threshold` of the real
    /// axis, refined by a parabola through the three nearest samples.
    /// Returns `(lambda, im)` pairs; endpoint maxima are included.
    pub fn close_approaches(&self, threshold: f64) -> Vec<(f64, f64)> {
        let s = &self.samples;
        let mut hits = Vec::new();
        for i in 0..s.len() {
            let im = s[i].k.im;
            let left_ok = i == 0 || s[i - 1].k.im <= im;
            let right_ok = i + 1 == s.len() || s[i + 1].k.im <= im;
            let interior_peak = i > 0 && i + 1 < s.len() && left_ok && right_ok;
            let edge_peak = (i == 0 && right_ok) || (i + 1 == s.len() && left_ok);
            if !(interior_peak || edge_peak) || im < -threshold {
                continue;
            }
            if interior_peak {
                let (x0, x1, x2) = (s[i - 1].lambda, s[i].lambda, s[i + 1].lambda);
                let (y0, y1, y2) = (s[i - 1].k.im, im, s[i + 1].k.im);
                let d1 = (y1 - y0) / (x1 - x0);
                let d2 = (y2 - y1) / (x2 - x1);
                let curv = (d2 - d1) / (x2 - x0);
                if curv.abs() > 1e-300 {
                    let vertex = 0.5 * (x0 + x1) - d1 / (2.0 * curv);
                    let im_at_vertex =
                        y0 + d1 * (vertex - x0) + curv * (vertex - x0) * (vertex - x1);
                    hits.push((vertex, im_at_vertex));
                    continue;
                }
            }
            hits.push((s[i].lambda, im));
        }
        // Merge duplicates produced by flat stretches.
        hits.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12);
        hits
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrackOptions {
    /// Target parameter step (signed direction follows the range).
    pub step: f64,
    /// Below this step size the continuation gives up.
    pub min_step: f64,
    pub newton: NewtonOptions,
    /// Skip the Newton corrector and advance by the perturbative rule only.
    pub pure_perturbative: bool,
    /// |Im k| below this marks a real-axis touch.
    pub touch_threshold: f64,
    /// Corrector moves beyond this multiple of the expected motion count
    /// as failures (the pole was probably lost to a neighbour).
    pub jump_factor: f64,
    /// Expected-motion floor for the jump guard on the first steps.
    pub jump_floor: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            step: 0.01,
            min_step: 1e-8,
            newton: NewtonOptions::default(),
            pure_perturbative: false,
            touch_threshold: 1e-6,
            jump_factor: 20.0,
            jump_floor: 0.5,
        }
    }
}

/// Convenience `None` literal for the perturbative-rule argument of
/// [`track_pole`].
pub const NO_STEP_RULE: Option<fn(Complex64, f64, f64) -> Option<Complex64>> = None;

/// Continue a pole of the two-parameter family `f(k, lambda)` from
/// `lambda0` to `lambda1`.
///
/// Predictor: tangent extrapolation from the last two accepted samples
/// (the perturbative rule seeds the very first step when present), which
/// also resolves crossings at degenerate real-axis touches by carrying the
/// incoming direction through. Corrector: Newton on `k -> f(k, lambda)`,
/// unless `pure_perturbative` is set, in which case the perturbative rule
/// alone advances the pole and `f` is only consulted for residuals.
/// Failed or implausibly long steps halve the parameter step; halving
/// below `min_step` or persistent corrector failure ends the run with an
/// error.
pub fn track_pole<F, P>(
    f: F,
    perturbative: Option<P>,
    k_start: Complex64,
    lambda0: f64,
    lambda1: f64,
    opts: &TrackOptions,
) -> Result<PoleTrajectory, NumericsError>
where
    F: Fn(Complex64, f64) -> Complex64,
    P: Fn(Complex64, f64, f64) -> Option<Complex64>,
{
    if opts.pure_perturbative && perturbative.is_none() {
        return Err(NumericsError::MissingPerturbativeRule);
    }
    let mut k = if opts.pure_perturbative {
        k_start
    } else {
        newton_root(&|z| f(z, lambda0), k_start, &opts.newton)?
    };
    let sample = |k: Complex64, lambda: f64| TrajectorySample {
        lambda,
        k,
        residual: f(k, lambda).norm(),
        touches_axis: k.im.abs() < opts.touch_threshold,
    };
    let mut samples = vec![sample(k, lambda0)];
    if (lambda1 - lambda0).abs() < 1e-15 {
        return Ok(PoleTrajectory { samples });
    }
    let dir = (lambda1 - lambda0).signum();
    let mut lambda = lambda0;
    let mut dl = opts.step.abs() * dir;
    let mut velocity: Option<Complex64> = None;
    let mut failures = 0usize;
    while (lambda1 - lambda) * dir > 1e-15 {
        let mut step = dl;
        if (lambda + step - lambda1) * dir > 0.0 {
            step = lambda1 - lambda;
        }
        let predictor = match (&velocity, &perturbative) {
            (Some(v), _) => k + v * step,
            (None, Some(rule)) => rule(k, lambda, step).map(|d| k + d).unwrap_or(k),
            (None, None) => k,
        };
        let accepted = if opts.pure_perturbative {
            let rule = perturbative.as_ref().unwrap();
            rule(k, lambda, step).map(|d| k + d).filter(|z| z.is_finite())
        } else {
            newton_root(&|z| f(z, lambda + step), predictor, &opts.newton)
                .ok()
                .filter(|z| z.is_finite())
        };
        let expected = velocity
            .map(|v| (v * step).norm())
            .unwrap_or(opts.jump_floor)
            .max(1e-4);
        let plausible = accepted
            .filter(|z| (z - predictor).norm() <= opts.jump_factor * expected.max(opts.jump_floor * 0.01));
        match plausible {
            Some(k_new) => {
                velocity = Some((k_new - k) / step);
                k = k_new;
                lambda += step;
                samples.push(sample(k, lambda));
                failures = 0;
                let grown = (dl.abs() * 1.6).min(opts.step.abs());
                dl = grown * dir;
            }
            None => {
                failures += 1;
                if failures > 12 {
                    return Err(NumericsError::LostPole { lambda });
                }
                dl *= 0.5;
                if dl.abs() < opts.min_step {
                    return Err(NumericsError::StepUnderflow { lambda });
                }
            }
        }
    }
    Ok(PoleTrajectory { samples })
}

/// Direction a pole leaves a base point, measured from the first few
/// displacement samples.
///
/// The principal axis of the displacement cloud (second-moment matrix
/// about the base point) gives the line; the net motion orients it. The
/// returned angle is positive for motion into the lower half-plane:
/// `atan2(-dir_im, dir_re)`.
pub fn departure_angle(points: &[Complex64]) -> Result<f64, NumericsError> {
    if points.len() < 3 {
        return Err(NumericsError::TooFewSamples {
            needed: 3,
            got: points.len(),
        });
    }
    let base = points[0];
    let displacements: Vec<Complex64> = points[1..]
        .iter()
        .take(20)
        .map(|p| p - base)
        .collect();
    let (mut sxx, mut sxy, mut syy) = (0.0f64, 0.0f64, 0.0f64);
    let mut net = Complex64::new(0.0, 0.0);
    for d in &displacements {
        sxx += d.re * d.re;
        sxy += d.re * d.im;
        syy += d.im * d.im;
        net += d;
    }
    // Leading eigenvector of [[sxx, sxy], [sxy, syy]].
    let trace = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let lead = 0.5 * trace + (0.25 * trace * trace - det).max(0.0).sqrt();
    let mut dir = if sxy.abs() > 1e-300 {
        Complex64::new(lead - syy, sxy)
    } else if sxx >= syy {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 1.0)
    };
    if dir.norm() < 1e-300 {
        dir = Complex64::new(1.0, 0.0);
    }
    if dir.re * net.re + dir.im * net.im < 0.0 {
        dir = -dir;
    }
    Ok(f64::atan2(-dir.im, dir.re))
}
