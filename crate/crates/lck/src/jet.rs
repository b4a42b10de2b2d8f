//! Truncated second-order jets for forward-mode differentiation.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to the chart coordinates the evaluation was seeded with. Every
//! field in this crate is a closure over coordinate jets, so composing
//! fields composes their derivatives through the chain rule.
//!
//! Each jet also records how many derivative orders are trustworthy.
//! Taking a coordinate derivative of a field ([`Jet::d`]) costs one order,
//! which is how derived objects (an exterior derivative, a metric built
//! from it, Christoffel symbols of that metric) stay honest about what
//! they can still be differentiated. Reading an order that was never
//! computed yields `NaN`.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Largest chart dimension a jet can differentiate against.
pub const MAX_DIM: usize = 9;

/// Value, gradient and Hessian of a scalar with respect to chart coordinates.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    order: u8,
    dim: u8,
    value: f64,
    grad: [f64; MAX_DIM],
    hess: [f64; MAX_DIM * MAX_DIM],
}

impl Jet {
    /// A constant. Constants are exact to every order and broadcast
    /// against jets of any dimension.
    pub fn constant(value: f64) -> Self {
        Jet {
            order: 2,
            dim: 0,
            value,
            grad: [0.0; MAX_DIM],
            hess: [0.0; MAX_DIM * MAX_DIM],
        }
    }

    /// The coordinate function `x_index` seeded at `value`, tracked to `order`.
    pub fn variable(value: f64, index: usize, dim: usize, order: u8) -> Self {
        assert!(dim <= MAX_DIM, "chart dimension {dim} exceeds {MAX_DIM}");
        assert!(index < dim);
        let mut j = Jet::constant(value);
        j.dim = dim as u8;
        j.order = order.min(2);
        j.grad[index] = 1.0;
        j
    }

    /// Seeds every coordinate of a point as a jet variable.
    pub fn seed(coords: &[f64], order: u8) -> Vec<Jet> {
        let d = coords.len();
        coords
            .iter()
            .enumerate()
            .map(|(i, &x)| Jet::variable(x, i, d, order))
            .collect()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// `∂/∂x_i`. Returns `NaN` if first derivatives were not tracked.
    pub fn grad(&self, i: usize) -> f64 {
        if self.order < 1 {
            return f64::NAN;
        }
        if i < MAX_DIM {
            self.grad[i]
        } else {
            0.0
        }
    }

    pub fn gradient(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.grad(i)).collect()
    }

    /// `∂²/∂x_i∂x_j`. Returns `NaN` if second derivatives were not tracked.
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        if self.order < 2 {
            return f64::NAN;
        }
        self.hess[i * MAX_DIM + j]
    }

    pub fn hessian(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.hess(i, j)).collect())
            .collect()
    }

    /// The partial derivative `∂_i` of this jet, as a jet one order lower.
    pub fn d(&self, i: usize) -> Jet {
        let mut out = Jet::constant(0.0);
        out.dim = self.dim;
        if self.order == 0 {
            out.order = 0;
            out.value = f64::NAN;
            return out;
        }
        out.order = self.order - 1;
        out.value = self.grad[i];
        if out.order >= 1 {
            let d = self.dim();
            for k in 0..d {
                out.grad[k] = self.hess[i * MAX_DIM + k];
            }
        }
        out
    }

    /// Applies a scalar function given its value and first two derivatives.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet {
        let mut out = *self;
        out.value = f0;
        let d = self.dim();
        if self.order >= 2 {
            for i in 0..d {
                for j in 0..d {
                    out.hess[i * MAX_DIM + j] = f1 * self.hess[i * MAX_DIM + j]
                        + f2 * self.grad[i] * self.grad[j];
                }
            }
        }
        if self.order >= 1 {
            for i in 0..d {
                out.grad[i] = f1 * self.grad[i];
            }
        }
        out
    }

    pub fn exp(self) -> Jet {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Jet {
        let x = self.value;
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    pub fn sqrt(self) -> Jet {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * r * r))
    }

    pub fn sin(self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn recip(self) -> Jet {
        let x = self.value;
        self.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }

    pub fn powi(self, n: i32) -> Jet {
        let x = self.value;
        let nf = n as f64;
        self.chain(
            x.powi(n),
            nf * x.powi(n - 1),
            nf * (nf - 1.0) * x.powi(n - 2),
        )
    }

    pub fn scale(self, k: f64) -> Jet {
        self * k
    }

    /// True if the tracked Hessian is symmetric to `tol`.
    pub fn hessian_is_symmetric(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| (self.hess(i, j) - self.hess(j, i)).abs() <= tol))
    }
}

impl Default for Jet {
    fn default() -> Self {
        Jet::constant(0.0)
    }
}

impl From<f64> for Jet {
    fn from(x: f64) -> Self {
        Jet::constant(x)
    }
}

fn merged_shape(a: &Jet, b: &Jet) -> (u8, u8) {
    (a.order.min(b.order), a.dim.max(b.dim))
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let (order, dim) = merged_shape(&self, &rhs);
        let mut out = self;
        out.order = order;
        out.dim = dim;
        out.value += rhs.value;
        let d = dim as usize;
        if order >= 1 {
            for i in 0..d {
                out.grad[i] += rhs.grad[i];
            }
        }
        if order >= 2 {
            for i in 0..d {
                for j in 0..d {
                    out.hess[i * MAX_DIM + j] += rhs.hess[i * MAX_DIM + j];
                }
            }
        }
        out
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self * -1.0
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let (order, dim) = merged_shape(&self, &rhs);
        let d = dim as usize;
        let (a, b) = (&self, &rhs);
        let mut out = Jet::constant(a.value * b.value);
        out.order = order;
        out.dim = dim;
        if order >= 1 {
            for i in 0..d {
                out.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
            }
        }
        if order >= 2 {
            for i in 0..d {
                for j in 0..d {
                    let k = i * MAX_DIM + j;
                    out.hess[k] = a.hess[k] * b.value
                        + a.value * b.hess[k]
                        + a.grad[i] * b.grad[j]
                        + a.grad[j] * b.grad[i];
                }
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self;
        out.value += rhs;
        out
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + (-rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, k: f64) -> Jet {
        let mut out = self;
        out.value *= k;
        let d = self.dim();
        if self.order >= 1 {
            for i in 0..d {
                out.grad[i] *= k;
            }
        }
        if self.order >= 2 {
            for i in 0..d {
                for j in 0..d {
                    out.hess[i * MAX_DIM + j] *= k;
                }
            }
        }
        out
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, k: f64) -> Jet {
        self * (1.0 / k)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, k: f64) {
        *self = *self * k;
    }
}

impl std::iter::Sum for Jet {
    fn sum<I: Iterator<Item = Jet>>(iter: I) -> Jet {
        iter.fold(Jet::constant(0.0), |acc, x| acc + x)
    }
}

/// Values of a slice of jets.
pub fn values(jets: &[Jet]) -> Vec<f64> {
    jets.iter().map(Jet::value).collect()
}

/// Jacobian `∂f_r/∂x_c` of a jet-valued map, row-major by output.
pub fn jacobian(outputs: &[Jet], dim: usize) -> Vec<Vec<f64>> {
    outputs
        .iter()
        .map(|f| (0..dim).map(|c| f.grad(c)).collect())
        .collect()
}


/// Evaluates `f` on fresh coordinate jets at the values of `p`, then
/// composes the outputs with `p` by the chain rule. Closures that call
/// [`Jet::d`] on their argument must go through this, otherwise derivatives
/// are taken against whatever `p` was seeded from.
pub fn reseeded(p: &[Jet], f: impl Fn(&[Jet]) -> Vec<Jet>) -> Vec<Jet> {
    let d = p.len();
    let identity = p.iter().enumerate().all(|(i, u)| {
        u.dim() == d
            && (0..d).all(|k| u.grad[k] == if k == i { 1.0 } else { 0.0 })
            && u.hess[..].iter().all(|h| *h == 0.0)
    });
    if identity {
        return f(p);
    }
    let order = p.iter().map(|u| u.order).min().unwrap_or(2);
    let outer = p.iter().map(|u| u.dim()).max().unwrap_or(0);
    let fresh: Vec<Jet> = p
        .iter()
        .enumerate()
        .map(|(i, u)| Jet::variable(u.value, i, d, order))
        .collect();
    f(&fresh)
        .into_iter()
        .map(|g| {
            if g.dim == 0 {
                return g;
            }
            let mut out = Jet::constant(g.value);
            out.dim = outer as u8;
            out.order = g.order.min(order);
            if out.order >= 1 {
                for a in 0..outer {
                    out.grad[a] = (0..d).map(|i| g.grad[i] * p[i].grad[a]).sum();
                }
            }
            if out.order >= 2 {
                for a in 0..outer {
                    for b in 0..outer {
                        let mut s = 0.0;
                        for i in 0..d {
                            s += g.grad[i] * p[i].hess[a * MAX_DIM + b];
                            for j in 0..d {
                                s += g.hess[i * MAX_DIM + j] * p[i].grad[a] * p[j].grad[b];
                            }
                        }
                        out.hess[a * MAX_DIM + b] = s;
                    }
                }
            }
            out
        })
        .collect()
}
