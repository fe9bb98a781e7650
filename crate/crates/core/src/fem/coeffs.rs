use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

/// Declarative analytic function of `(x, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum Preset {
    Constant {
        value: f64,
    },
    /// `c + cx x1 + cy x2`.
    AffineX {
        c: f64,
        #[serde(default)]
        cx: f64,
        #[serde(default)]
        cy: f64,
    },
    /// `c + ct t`.
    AffineT { c: f64, ct: f64 },
    /// `mean + amplitude sin(omega t)`.
    HarmonicT {
        mean: f64,
        amplitude: f64,
        omega: f64,
    },
    /// `scale exp(rate t)`.
    ExpT {
        scale: f64,
        rate: f64,
    },
    /// `sin(freq x_axis + phase)`.
    Sine {
        axis: usize,
        freq: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Smooth compactly supported bump of the given amplitude at `centre`.
    Bump {
        centre: [f64; 2],
        radius: f64,
        amplitude: f64,
    },
    /// `r^power cos(k theta + phase)` with `theta` measured in `[0, 2π)` from
    /// the positive `x1` axis; lower crack lips see `theta = 2π`.
    CrackMode {
        power: f64,
        k: f64,
        #[serde(default)]
        phase: f64,
    },
    Product {
        factors: Vec<Preset>,
    },
    Sum {
        terms: Vec<Preset>,
    },
}

impl Preset {
    pub fn zero() -> Self {
        Preset::Constant { value: 0.0 }
    }

    pub fn constant(value: f64) -> Self {
        Preset::Constant { value }
    }

    pub fn product(factors: Vec<Preset>) -> Self {
        Preset::Product { factors }
    }

    pub fn eval(&self, x: Point, t: f64) -> f64 {
        self.eval_sided(x, t, false)
    }

    /// Evaluation that distinguishes the lower crack lip (`theta = 2π`).
    pub fn eval_sided(&self, x: Point, t: f64, lower_lip: bool) -> f64 {
        match self {
            Preset::Constant { value } => *value,
            Preset::AffineX { c, cx, cy } => c + cx * x[0] + cy * x[1],
            Preset::AffineT { c, ct } => c + ct * t,
            Preset::HarmonicT {
                mean,
                amplitude,
                omega,
            } => mean + amplitude * (omega * t).sin(),
            Preset::ExpT { scale, rate } => scale * (rate * t).exp(),
            Preset::Sine { axis, freq, phase } => (freq * x[*axis] + phase).sin(),
            Preset::Bump {
                centre,
                radius,
                amplitude,
            } => {
                let s2 = ((x[0] - centre[0]).powi(2) + (x[1] - centre[1]).powi(2)) / radius.powi(2);
                if s2 < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - s2)).exp()
                } else {
                    0.0
                }
            }
            Preset::CrackMode { power, k, phase } => {
                let r = x[0].hypot(x[1]);
                let th = angle(x, lower_lip);
                r.powf(*power) * (k * th + phase).cos()
            }
            Preset::Product { factors } => factors
                .iter()
                .map(|f| f.eval_sided(x, t, lower_lip))
                .product(),
            Preset::Sum { terms } => terms.iter().map(|f| f.eval_sided(x, t, lower_lip)).sum(),
        }
    }

    /// Spatial gradient.
    pub fn grad(&self, x: Point, t: f64) -> [f64; 2] {
        match self {
            Preset::Constant { .. }
            | Preset::AffineT { .. }
            | Preset::HarmonicT { .. }
            | Preset::ExpT { .. } => [0.0, 0.0],
            Preset::AffineX { cx, cy, .. } => [*cx, *cy],
            Preset::Sine { axis, freq, phase } => {
                let mut g = [0.0, 0.0];
                g[*axis] = freq * (freq * x[*axis] + phase).cos();
                g
            }
            Preset::Bump {
                centre,
                radius,
                amplitude,
            } => {
                let d = [x[0] - centre[0], x[1] - centre[1]];
                let s2 = (d[0] * d[0] + d[1] * d[1]) / radius.powi(2);
                if s2 < 1.0 {
                    let v = amplitude * (1.0 - 1.0 / (1.0 - s2)).exp();
                    // d/dx exp(1 - 1/(1-s2)) = exp(..) * (-1/(1-s2)^2) * ds2/dx
                    let f = -v / (1.0 - s2).powi(2) * 2.0 / radius.powi(2);
                    [f * d[0], f * d[1]]
                } else {
                    [0.0, 0.0]
                }
            }
            Preset::CrackMode { power, k, phase } => {
                let r = x[0].hypot(x[1]);
                if r == 0.0 {
                    return [0.0, 0.0];
                }
                let th = angle(x, false);
                let dr = power * r.powf(power - 1.0) * (k * th + phase).cos();
                let dth = -k * r.powf(*power) * (k * th + phase).sin();
                let (c, s) = (x[0] / r, x[1] / r);
                [dr * c - dth * s / r, dr * s + dth * c / r]
            }
            Preset::Product { factors } => {
                let vals: Vec<f64> = factors.iter().map(|f| f.eval(x, t)).collect();
                let mut g = [0.0, 0.0];
                for (i, f) in factors.iter().enumerate() {
                    let gi = f.grad(x, t);
                    let others: f64 = vals
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, v)| v)
                        .product();
                    g[0] += gi[0] * others;
                    g[1] += gi[1] * others;
                }
                g
            }
            Preset::Sum { terms } => terms.iter().fold([0.0, 0.0], |acc, f| {
                let g = f.grad(x, t);
                [acc[0] + g[0], acc[1] + g[1]]
            }),
        }
    }

    pub fn depends_on_time(&self) -> bool {
        match self {
            Preset::HarmonicT { amplitude, omega, .. } => *amplitude != 0.0 && *omega != 0.0,
            Preset::ExpT { rate, .. } => *rate != 0.0,
            Preset::AffineT { ct, .. } => *ct != 0.0,
            Preset::Product { factors } => factors.iter().any(Preset::depends_on_time),
            Preset::Sum { terms } => terms.iter().any(Preset::depends_on_time),
            _ => false,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Preset::Constant { value } => *value == 0.0,
            Preset::AffineX { c, cx, cy } => *c == 0.0 && *cx == 0.0 && *cy == 0.0,
            Preset::Bump { amplitude, .. } => *amplitude == 0.0,
            Preset::Product { factors } => factors.iter().any(Preset::is_zero),
            Preset::Sum { terms } => terms.iter().all(Preset::is_zero),
            _ => false,
        }
    }
}

fn angle(x: Point, lower_lip: bool) -> f64 {
    if lower_lip && x[1] == 0.0 && x[0] > 0.0 {
        return 2.0 * PI;
    }
    let a = x[1].atan2(x[0]);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Pointwise values of the coefficients of the bilinear form
/// `a(t; u, v) = ∫ (a_ij ∂_j u + a_i u) ∂_i v + b_i ∂_i u v + c0 u v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffValues {
    pub a: [[f64; 2]; 2],
    pub a_vec: [f64; 2],
    pub b_vec: [f64; 2],
    pub c0: f64,
}

impl CoeffValues {
    pub fn is_finite(&self) -> bool {
        self.a.iter().flatten().all(|v| v.is_finite())
            && self.a_vec.iter().all(|v| v.is_finite())
            && self.b_vec.iter().all(|v| v.is_finite())
            && self.c0.is_finite()
    }
}

fn zero2() -> [Preset; 2] {
    [Preset::zero(), Preset::zero()]
}

fn default_alpha() -> f64 {
    1.0
}

fn default_bound() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub a_ij: [[Preset; 2]; 2],
    #[serde(default = "zero2")]
    pub a_i: [Preset; 2],
    #[serde(default = "zero2")]
    pub b_i: [Preset; 2],
    #[serde(default = "Preset::zero")]
    pub c0: Preset,
    /// Declared ellipticity constant.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Declared bound on all coefficient magnitudes.
    #[serde(default = "default_bound", rename = "M")]
    pub bound: f64,
    /// Declared coercivity shift.
    #[serde(default)]
    pub lambda: f64,
}

impl CoefficientSet {
    /// `a_ij = k δ_ij`, all other coefficients zero.
    pub fn scaled_laplacian(k: f64) -> Self {
        CoefficientSet {
            a_ij: [
                [Preset::constant(k), Preset::zero()],
                [Preset::zero(), Preset::constant(k)],
            ],
            a_i: zero2(),
            b_i: zero2(),
            c0: Preset::zero(),
            alpha: k,
            bound: k,
            lambda: 0.0,
        }
    }

    pub fn laplacian() -> Self {
        Self::scaled_laplacian(1.0)
    }

    /// Only `c0` set: the form reduces to `∫ c0 u v`.
    pub fn reaction(c0: f64) -> Self {
        let mut c = Self::scaled_laplacian(0.0);
        c.c0 = Preset::constant(c0);
        c.alpha = 0.0;
        c.bound = c0.abs();
        c
    }

    pub fn with_c0(mut self, c0: Preset) -> Self {
        self.c0 = c0;
        self
    }

    pub fn eval(&self, x: Point, t: f64) -> CoeffValues {
        CoeffValues {
            a: [
                [self.a_ij[0][0].eval(x, t), self.a_ij[0][1].eval(x, t)],
                [self.a_ij[1][0].eval(x, t), self.a_ij[1][1].eval(x, t)],
            ],
            a_vec: [self.a_i[0].eval(x, t), self.a_i[1].eval(x, t)],
            b_vec: [self.b_i[0].eval(x, t), self.b_i[1].eval(x, t)],
            c0: self.c0.eval(x, t),
        }
    }

    pub fn depends_on_time(&self) -> bool {
        self.a_ij.iter().flatten().any(Preset::depends_on_time)
            || self.a_i.iter().any(Preset::depends_on_time)
            || self.b_i.iter().any(Preset::depends_on_time)
            || self.c0.depends_on_time()
    }

    /// Has no first-order terms and a symmetric `a_ij`, so that the assembled
    /// matrix is symmetric.
    pub fn is_symmetric(&self) -> bool {
        self.a_i.iter().all(Preset::is_zero)
            && self.b_i.iter().all(Preset::is_zero)
            && self.a_ij[0][1] == self.a_ij[1][0]
    }

    /// Checks ellipticity with the declared `alpha` (64 random unit
    /// directions per sample) and the declared bound `M` at the order-2
    /// quadrature points of `mesh` for every time in `times`.
    pub fn check_hypotheses(&self, mesh: &Mesh, times: &[f64], seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dirs: Vec<[f64; 2]> = (0..64)
            .map(|_| {
                let a: f64 = rng.random_range(0.0..2.0 * PI);
                [a.cos(), a.sin()]
            })
            .collect();
        for &t in times {
            for tri in 0..mesh.n_triangles() {
                let pts = mesh.triangle_points(tri);
                for b in super::quadrature::ORDER2.bary {
                    let x = super::quadrature::map_point(&pts, b);
                    let c = self.eval(x, t);
                    if !c.is_finite() {
                        return Err(Error::invalid(format!(
                            "coefficients not finite at {x:?}, t = {t}"
                        )));
                    }
                    for xi in &dirs {
                        let q = xi[0] * (c.a[0][0] * xi[0] + c.a[0][1] * xi[1])
                            + xi[1] * (c.a[1][0] * xi[0] + c.a[1][1] * xi[1]);
                        if q < self.alpha * (1.0 - 1e-12) {
                            return Err(Error::invalid(format!(
                                "ellipticity a_ij ξ_i ξ_j >= alpha |ξ|^2 fails at {x:?}, t = {t}: {q} < {}",
                                self.alpha
                            )));
                        }
                    }
                    let mags = c
                        .a
                        .iter()
                        .flatten()
                        .chain(&c.a_vec)
                        .chain(&c.b_vec)
                        .chain(std::iter::once(&c.c0))
                        .fold(0.0_f64, |m, v| m.max(v.abs()));
                    if mags > self.bound * (1.0 + 1e-12) {
                        return Err(Error::invalid(format!(
                            "coefficient magnitude {mags} exceeds declared bound M = {} at {x:?}, t = {t}",
                            self.bound
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
