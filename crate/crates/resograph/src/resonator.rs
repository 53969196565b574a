//! Closed-form resonance models: a loop with two oscillator-decorated
//! vertices, and a cross made of a Dirichlet segment with a delta vertex
//! carrying two leads.
//!
//! Both models depend on an asymmetry parameter `lambda` splitting a total
//! internal length `2l` into pieces `l (1 - lambda)` and `l (1 + lambda)`.
//! At `lambda = 0` each model has real eigenvalues embedded at
//! `k0 = n pi / l`; asymmetry generically pushes them into the lower half
//! plane as resonance poles, which return to the axis only at the rational
//! points the rank criteria in [`crate::embedded`] predict.
//!
//! Alongside the secular functions this module carries their exact
//! first-order continuation steps, the departure-angle and high-index
//! width-bound formulas, fixture parameter sets used by the command line
//! interface, and metric-graph builders that realise the same models
//! through the general machinery for cross-validation.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::graph::{coupling_from_conditions, CouplingSpec, Edge, GraphError, MetricGraph};
use crate::numerics::{newton_root, NewtonOptions};
use crate::spectral::{FamilyKind, SecularFamily};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const NAN_C: Complex64 = Complex64::new(f64::NAN, f64::NAN);

#[derive(Debug, Error)]
pub enum ResonatorError {
    #[error("oscillator response has a pole at k = {k}")]
    PoleOfBeta { k: Complex64 },
    #[error("asymmetry parameter {lambda} leaves no positive edge length")]
    DegenerateEdge { lambda: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// One dangling oscillator channel: its coupling strengths to the graph
/// (`alpha_inv`), to itself (`alpha_tilde_inv`), and the cross term
/// `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub alpha_inv: f64,
    pub alpha_tilde_inv: f64,
    pub gamma: Complex64,
}

impl OscillatorParams {
    pub fn new(alpha_inv: f64, alpha_tilde_inv: f64, gamma_sq: f64) -> Self {
        Self {
            alpha_inv,
            alpha_tilde_inv,
            gamma: c(gamma_sq.sqrt(), 0.0),
        }
    }
}

/// Loop of total length `2 l` with an oscillator-decorated vertex at each
/// junction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopParams {
    pub l: f64,
    pub osc1: OscillatorParams,
    pub osc2: OscillatorParams,
}

/// Segment of total length `2 l` with Dirichlet ends and a delta vertex of
/// strength `alpha` carrying two leads at the interior split point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossParams {
    pub l: f64,
    pub alpha: f64,
}

/// Energy-dependent response of one oscillator channel after its internal
/// degree of freedom is eliminated against outgoing behaviour.
pub fn beta_inv(osc: &OscillatorParams, k: Complex64) -> Result<Complex64, ResonatorError> {
    let den = c(1.0, 0.0) - Complex64::i() * k * osc.alpha_tilde_inv;
    if den.norm() <= 1e-14 * (1.0 + (k * osc.alpha_tilde_inv).norm()) {
        return Err(ResonatorError::PoleOfBeta { k });
    }
    Ok(c(osc.alpha_inv, 0.0) + Complex64::i() * k * osc.gamma.norm_sqr() / den)
}

/// Derivative of [`beta_inv`] in `k`.
pub fn beta_inv_dk(osc: &OscillatorParams, k: Complex64) -> Result<Complex64, ResonatorError> {
    let den = c(1.0, 0.0) - Complex64::i() * k * osc.alpha_tilde_inv;
    if den.norm() <= 1e-14 * (1.0 + (k * osc.alpha_tilde_inv).norm()) {
        return Err(ResonatorError::PoleOfBeta { k });
    }
    Ok(Complex64::i() * osc.gamma.norm_sqr() / (den * den))
}

/// Poles of the oscillator responses in the complex momentum plane.
pub fn loop_singular_points(p: &LoopParams) -> Vec<Complex64> {
    [p.osc1, p.osc2]
        .iter()
        .filter(|o| o.alpha_tilde_inv != 0.0 && o.gamma.norm_sqr() != 0.0)
        .map(|o| c(0.0, -1.0 / o.alpha_tilde_inv))
        .collect()
}

/// Resonance condition of the loop model in product form:
/// `sin(k l (1 - lambda)) sin(k l (1 + lambda))
///  - 4 k^2 b1 b2 sin^2(k l) + k (b1 + b2) sin(2 k l)`
/// with `b_j` the oscillator responses. Returns NaN at response poles.
pub fn loop_secular(p: &LoopParams, k: Complex64, lambda: f64) -> Complex64 {
    let (b1, b2) = match (beta_inv(&p.osc1, k), beta_inv(&p.osc2, k)) {
        (Ok(b1), Ok(b2)) => (b1, b2),
        _ => return NAN_C,
    };
    let kl = k * p.l;
    (kl * (1.0 - lambda)).sin() * (kl * (1.0 + lambda)).sin()
        - 4.0 * k * k * b1 * b2 * kl.sin() * kl.sin()
        + k * (b1 + b2) * (2.0 * kl).sin()
}

/// The same condition in difference-of-cosines form,
/// `cos(2 k l lambda) - cos(2 k l) - 8 k^2 b1 b2 sin^2(k l)
///  + 2 k (b1 + b2) sin(2 k l)`,
/// equal to twice [`loop_secular`].
pub fn loop_secular_sum(p: &LoopParams, k: Complex64, lambda: f64) -> Complex64 {
    let (b1, b2) = match (beta_inv(&p.osc1, k), beta_inv(&p.osc2, k)) {
        (Ok(b1), Ok(b2)) => (b1, b2),
        _ => return NAN_C,
    };
    let kl = k * p.l;
    (2.0 * kl * lambda).cos() - (2.0 * kl).cos()
        - 8.0 * k * k * b1 * b2 * kl.sin() * kl.sin()
        + 2.0 * k * (b1 + b2) * (2.0 * kl).sin()
}

/// Exact first-order displacement of a loop zero when the asymmetry moves
/// from `lambda` to `lambda + eps`, evaluated at the current zero `k0`.
///
/// The step is a Newton quotient in disguise: the numerator equals
/// `F(k0, lambda) - F(k0, lambda + eps)` and the denominator equals
/// `dF/dk (k0, lambda + eps)`, both written out in closed form. `None`
/// when the denominator is too small to divide by or a response pole is
/// hit.
pub fn loop_perturbative_step(
    p: &LoopParams,
    k0: Complex64,
    lambda: f64,
    eps: f64,
) -> Option<Complex64> {
    let (b1, b2) = match (beta_inv(&p.osc1, k0), beta_inv(&p.osc2, k0)) {
        (Ok(b1), Ok(b2)) => (b1, b2),
        _ => return None,
    };
    let (bt1, bt2) = match (beta_inv_dk(&p.osc1, k0), beta_inv_dk(&p.osc2, k0)) {
        (Ok(t1), Ok(t2)) => (t1, t2),
        _ => return None,
    };
    let l = p.l;
    let kl = k0 * l;
    let s2 = (2.0 * kl).sin();
    let c2 = (2.0 * kl).cos();
    let s1 = kl.sin();
    let g = (kl * (2.0 * lambda + eps)).sin() * (kl * eps).sin();
    let f = l * s2 - l * lambda * (2.0 * kl * lambda).sin()
        - 4.0 * l * k0 * k0 * b1 * b2 * s2
        - (8.0 * k0 * b1 * b2 + 4.0 * k0 * k0 * (b1 * bt2 + bt1 * b2)) * s1 * s1
        + (b1 + b2 + k0 * bt1 + k0 * bt2) * s2
        + 2.0 * l * k0 * (b1 + b2) * c2
        - l * (eps * (kl * eps).cos() * (kl * (2.0 * lambda + eps)).sin()
            + (2.0 * lambda + eps) * (kl * (2.0 * lambda + eps)).cos() * (kl * eps).sin());
    if !f.is_finite() || f.norm() < 1e-280 {
        return None;
    }
    Some(g / f)
}

/// Direction in which the resonance pole leaves the embedded point
/// `k0 = n pi / l` under a small asymmetry, measured downward from the
/// positive real direction. Follows from the leading-order step
/// `n pi eps^2 / (2 S)` with `S` the sum of the oscillator responses at
/// `k0`.
pub fn loop_angle(p: &LoopParams, n: u32) -> f64 {
    let k0 = c(n as f64 * std::f64::consts::PI / p.l, 0.0);
    let s = beta_inv(&p.osc1, k0).expect("response regular at real momenta")
        + beta_inv(&p.osc2, k0).expect("response regular at real momenta");
    f64::atan2(s.im, s.re)
}

/// Upper bound for the resonance width on the asymmetry window
/// `[0, 1/n]`, valid for large index `n`; scales as `n^-2`. `None` when
/// the bound degenerates (the leading real part of the response sum
/// vanishes while an oscillator keeps a finite internal coupling).
pub fn loop_im_bound(p: &LoopParams, n: u32) -> Option<f64> {
    let scale = p.l / (2.0 * (std::f64::consts::PI * n as f64).powi(2));
    let g1 = p.osc1.gamma.norm_sqr();
    let g2 = p.osc2.gamma.norm_sqr();
    let t1 = p.osc1.alpha_tilde_inv;
    let t2 = p.osc2.alpha_tilde_inv;
    let factor = match (t1 != 0.0, t2 != 0.0) {
        (true, true) => {
            let a1 = 1.0 / t1;
            let a2 = 1.0 / t2;
            let den = p.osc1.alpha_inv + p.osc2.alpha_inv - g1 * a1 - g2 * a2;
            if den == 0.0 {
                return None;
            }
            (g1 * a1 * a1 + g2 * a2 * a2) / (den * den)
        }
        (false, false) => {
            let den = g1 + g2;
            if den == 0.0 {
                return None;
            }
            1.0 / den
        }
        (false, true) => {
            if g1 == 0.0 {
                return None;
            }
            1.0 / g1
        }
        (true, false) => {
            if g2 == 0.0 {
                return None;
            }
            1.0 / g2
        }
    };
    Some(scale * factor)
}

/// Package the loop model as a parametrised secular family.
pub fn loop_family(p: LoopParams) -> SecularFamily {
    let eval = {
        let p = p;
        move |k: Complex64, lambda: f64| loop_secular(&p, k, lambda)
    };
    let step = {
        let p = p;
        move |k0: Complex64, lambda: f64, eps: f64| loop_perturbative_step(&p, k0, lambda, eps)
    };
    SecularFamily::from_parts(
        FamilyKind::LoopExample,
        Arc::new(eval),
        loop_singular_points(&p),
        Some(Arc::new(step)),
    )
}

/// Boundary-condition matrices `(A, B)` of one loop vertex in outward
/// form: continuity of the two edge values, the coupling of their value to
/// the derivative sum and the oscillator derivative, and the oscillator
/// value tied to the same combination. Port order: first edge, second
/// edge, oscillator lead.
fn oscillator_conditions(osc: &OscillatorParams) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let ai = c(osc.alpha_inv, 0.0);
    let ti = c(osc.alpha_tilde_inv, 0.0);
    let a = DMatrix::from_row_slice(3, 3, &[one, -one, z, one, z, z, z, z, one]);
    let b = DMatrix::from_row_slice(
        3,
        3,
        &[z, z, z, -ai, -ai, -osc.gamma, -osc.gamma.conj(), -osc.gamma.conj(), -ti],
    );
    (a, b)
}

/// Metric-graph realisation of the loop model at a given asymmetry: two
/// vertices joined by edges of length `l (1 -+ lambda)`, one oscillator
/// lead per vertex. Valid for `|lambda| < 1`.
pub fn loop_graph(p: &LoopParams, lambda: f64) -> Result<MetricGraph, ResonatorError> {
    if lambda.abs() >= 1.0 {
        return Err(ResonatorError::DegenerateEdge { lambda });
    }
    let (a1, b1) = oscillator_conditions(&p.osc1);
    let (a2, b2) = oscillator_conditions(&p.osc2);
    let u1 = coupling_from_conditions(&a1, &b1)?;
    let u2 = coupling_from_conditions(&a2, &b2)?;
    Ok(MetricGraph::new(
        2,
        vec![
            Edge {
                from: 0,
                to: 1,
                length: p.l * (1.0 - lambda),
            },
            Edge {
                from: 0,
                to: 1,
                length: p.l * (1.0 + lambda),
            },
        ],
        vec![0, 1],
        vec![CouplingSpec::Custom(u1), CouplingSpec::Custom(u2)],
    ))
}

/// Resonance condition of the cross model:
/// `2 k sin(2 k l) + (alpha - 2 i k)(cos(2 k l lambda) - cos(2 k l))`.
pub fn cross_secular(p: &CrossParams, k: Complex64, lambda: f64) -> Complex64 {
    let kl = k * p.l;
    2.0 * k * (2.0 * kl).sin()
        + (c(p.alpha, 0.0) - 2.0 * Complex64::i() * k)
            * ((2.0 * kl * lambda).cos() - (2.0 * kl).cos())
}

/// Exact first-order displacement of a cross zero when the asymmetry moves
/// from `lambda` to `lambda + eps`; same Newton structure as the loop
/// step.
pub fn cross_perturbative_step(
    p: &CrossParams,
    k0: Complex64,
    lambda: f64,
    eps: f64,
) -> Option<Complex64> {
    let l = p.l;
    let kl = k0 * l;
    let am = c(p.alpha, 0.0) - 2.0 * Complex64::i() * k0;
    let num = -2.0 * am * (kl * eps).sin() * (kl * (2.0 * lambda + eps)).sin();
    let lam_e = lambda + eps;
    let den = 2.0 * Complex64::i() * ((2.0 * kl * lam_e).cos() - (2.0 * kl).cos())
        + am * 2.0
            * l
            * (lam_e * (2.0 * kl * lam_e).sin() - (2.0 * kl).sin())
        - 2.0 * (2.0 * kl).sin()
        - 4.0 * k0 * l * (2.0 * kl).cos();
    if !den.is_finite() || den.norm() < 1e-280 {
        return None;
    }
    Some(num / den)
}

/// Departure angle of the cross resonance from `k0 = n pi / l`, downward
/// positive: `atan2(2 n pi, alpha l)`.
pub fn cross_angle(p: &CrossParams, n: u32) -> f64 {
    f64::atan2(2.0 * n as f64 * std::f64::consts::PI, p.alpha * p.l)
}

/// Package the cross model as a parametrised secular family.
pub fn cross_family(p: CrossParams) -> SecularFamily {
    let eval = move |k: Complex64, lambda: f64| cross_secular(&p, k, lambda);
    let step =
        move |k0: Complex64, lambda: f64, eps: f64| cross_perturbative_step(&p, k0, lambda, eps);
    SecularFamily::from_parts(
        FamilyKind::CrossExample,
        Arc::new(eval),
        vec![],
        Some(Arc::new(step)),
    )
}

/// Metric-graph realisation of the cross model: Dirichlet endpoints, a
/// delta vertex of strength `alpha` in the interior carrying two leads.
pub fn cross_graph(p: &CrossParams, lambda: f64) -> Result<MetricGraph, ResonatorError> {
    if lambda.abs() >= 1.0 {
        return Err(ResonatorError::DegenerateEdge { lambda });
    }
    Ok(MetricGraph::new(
        3,
        vec![
            Edge {
                from: 0,
                to: 1,
                length: p.l * (1.0 - lambda),
            },
            Edge {
                from: 1,
                to: 2,
                length: p.l * (1.0 + lambda),
            },
        ],
        vec![1, 1],
        vec![
            CouplingSpec::Dirichlet,
            CouplingSpec::Delta { alpha: p.alpha },
            CouplingSpec::Dirichlet,
        ],
    ))
}

/// At zero asymmetry the cross condition factors as
/// `2 sin(k l) [2 k cos(k l) + (alpha - 2 i k) sin(k l)]`; this finds the
/// zero of the bracket near a given real momentum -- the resonance branch
/// that coexists with the embedded eigenvalues.
pub fn cross_resonance_branch(p: &CrossParams, near: f64) -> Option<Complex64> {
    let alpha = p.alpha;
    let l = p.l;
    let h = move |k: Complex64| {
        2.0 * k * (k * l).cos() + (c(alpha, 0.0) - 2.0 * Complex64::i() * k) * (k * l).sin()
    };
    let guess = {
        let am = c(alpha, 0.0) - 2.0 * Complex64::i() * c(near, 0.0);
        c(near, 0.0) - 2.0 * near / (c(2.0, 0.0) + am * l)
    };
    newton_root(&h, guess, &NewtonOptions::default()).ok()
}

/// Which closed-form model a fixture instantiates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixtureModel {
    Loop(LoopParams),
    Cross(CrossParams),
}

/// Named parameter preset: a model, the index `n` of the embedded momentum
/// `k0 = n pi / l` the trajectory starts from, and the asymmetry range of
/// interest.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub model: FixtureModel,
    pub n: u32,
    pub lambda_end: f64,
    pub notes: &'static str,
}

impl Fixture {
    pub fn all() -> Vec<Fixture> {
        let mixed_loop = LoopParams {
            l: 1.0,
            osc1: OscillatorParams::new(1.0, -2.0, 1.0),
            osc2: OscillatorParams::new(0.0, 1.0, 1.0),
        };
        let unit_loop = LoopParams {
            l: 1.0,
            osc1: OscillatorParams::new(1.0, 1.0, 1.0),
            osc2: OscillatorParams::new(1.0, 1.0, 1.0),
        };
        vec![
            Fixture {
                name: "fig4",
                model: FixtureModel::Loop(mixed_loop),
                n: 2,
                lambda_end: 1.0,
                notes: "loop, mixed oscillators; the pole returns to the axis at \
                        lambda = 1/2 and 1",
            },
            Fixture {
                name: "fig5",
                model: FixtureModel::Loop(unit_loop),
                n: 3,
                lambda_end: 1.0,
                notes: "loop, unit oscillators, third momentum; only lambda = 2/3 \
                        brings the pole back",
            },
            Fixture {
                name: "fig6",
                model: FixtureModel::Loop(unit_loop),
                n: 2,
                lambda_end: 1.0,
                notes: "loop, unit oscillators, second momentum; the pole returns \
                        only at lambda = 1",
            },
            Fixture {
                name: "fig8",
                model: FixtureModel::Cross(CrossParams { l: 1.0, alpha: 10.0 }),
                n: 2,
                lambda_end: 1.0,
                notes: "cross, strong coupling; flatter departure from the axis",
            },
            Fixture {
                name: "fig9",
                model: FixtureModel::Cross(CrossParams { l: 1.0, alpha: 1.0 }),
                n: 2,
                lambda_end: 1.0,
                notes: "cross, weak coupling; near-vertical departure from the axis",
            },
            Fixture {
                name: "fig10",
                model: FixtureModel::Cross(CrossParams {
                    l: 1.0,
                    alpha: 2.596,
                }),
                n: 2,
                lambda_end: 1.0,
                notes: "cross, tuned coupling; the embedded branch and the \
                        resonance branch repel in an avoided crossing",
            },
        ]
    }

    pub fn by_name(name: &str) -> Option<Fixture> {
        Self::all().into_iter().find(|f| f.name == name)
    }

    /// Half the total internal length.
    pub fn l(&self) -> f64 {
        match &self.model {
            FixtureModel::Loop(p) => p.l,
            FixtureModel::Cross(p) => p.l,
        }
    }

    /// Embedded momentum the primary trajectory starts from.
    pub fn k0(&self) -> f64 {
        self.n as f64 * std::f64::consts::PI / self.l()
    }

    pub fn family(&self) -> SecularFamily {
        match &self.model {
            FixtureModel::Loop(p) => loop_family(*p),
            FixtureModel::Cross(p) => cross_family(*p),
        }
    }

    /// Closed-form departure angle at the embedded starting point.
    pub fn formula_angle(&self) -> f64 {
        match &self.model {
            FixtureModel::Loop(p) => loop_angle(p, self.n),
            FixtureModel::Cross(p) => cross_angle(p, self.n),
        }
    }

    /// Trajectory starting points at zero asymmetry: the embedded momentum
    /// first, then any coexisting resonance-branch pole worth following
    /// (present for the avoided-crossing preset).
    pub fn starts(&self) -> Vec<Complex64> {
        let mut out = vec![c(self.k0(), 0.0)];
        if self.name == "fig10" {
            if let FixtureModel::Cross(p) = &self.model {
                if let Some(k) = cross_resonance_branch(p, self.k0()) {
                    out.push(k);
                }
            }
        }
        out
    }

    /// Metric-graph realisation at a given asymmetry, where available.
    pub fn graph(&self, lambda: f64) -> Result<MetricGraph, ResonatorError> {
        match &self.model {
            FixtureModel::Loop(p) => loop_graph(p, lambda),
            FixtureModel::Cross(p) => cross_graph(p, lambda),
        }
    }
}
