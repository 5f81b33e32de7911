use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{OpKind, Tape, POW_GRAD_CLAMP};
use crate::numerics::{digamma_unchecked, gamma_unchecked};

/// Logistic function, kept strictly inside (0, 1) even where the exact
/// result rounds to an endpoint.
pub fn sigmoid(x: f64) -> f64 {
    const UPPER: f64 = 1.0 - f64::EPSILON / 2.0;
    let s = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, UPPER)
}

/// Arithmetic shared by plain `f64` evaluation and taped [`Var`] evaluation.
///
/// Numerical code written against this trait produces bit-identical values
/// for both implementations; the taped one additionally records the graph.
pub trait Scalar:
    Copy
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn value(&self) -> f64;
    /// A constant living in the same context as `self`.
    fn lift(&self, v: f64) -> Self;
    fn tanh(self) -> Self;
    fn sigmoid(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    /// `self^c`.
    fn powf_const(self, c: f64) -> Self;
    /// `base^self`.
    fn base_pow(self, base: f64) -> Self;
    /// Γ(self); the caller guarantees a positive argument.
    fn gamma(self) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn lift(&self, v: f64) -> Self {
        v
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn sigmoid(self) -> Self {
        sigmoid(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn powf_const(self, c: f64) -> Self {
        self.powf(c)
    }
    #[inline]
    fn base_pow(self, base: f64) -> Self {
        base.powf(self)
    }
    #[inline]
    fn gamma(self) -> Self {
        gamma_unchecked(self)
    }
}

/// A value recorded on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    id: usize,
    value: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Var(#{} = {})", self.id, self.value)
    }
}

impl<'t> Var<'t> {
    pub(crate) fn from_parts(tape: &'t Tape, id: usize, value: f64) -> Self {
        Self { tape, id, value }
    }

    pub fn id(&self) -> super::NodeId {
        super::NodeId(self.id)
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    #[inline]
    fn unary(self, op: OpKind, value: f64, grad: f64) -> Self {
        let id = self.tape.push(op, [self.id, 0], value, [grad, 0.0]);
        Self { tape: self.tape, id, value }
    }

    #[inline]
    fn binary(self, rhs: Self, op: OpKind, value: f64, ga: f64, gb: f64) -> Self {
        debug_assert!(std::ptr::eq(self.tape, rhs.tape), "operands recorded on different tapes");
        let id = self.tape.push(op, [self.id, rhs.id], value, [ga, gb]);
        Self { tape: self.tape, id, value }
    }
}

impl Add for Var<'_> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        self.binary(rhs, OpKind::Add, self.value + rhs.value, 1.0, 1.0)
    }
}

impl Sub for Var<'_> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self.binary(rhs, OpKind::Sub, self.value - rhs.value, 1.0, -1.0)
    }
}

impl Mul for Var<'_> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        self.binary(rhs, OpKind::Mul, self.value * rhs.value, rhs.value, self.value)
    }
}

impl Div for Var<'_> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let q = self.value / rhs.value;
        self.binary(rhs, OpKind::Div, q, 1.0 / rhs.value, -q / rhs.value)
    }
}

impl Neg for Var<'_> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.unary(OpKind::Neg, -self.value, -1.0)
    }
}

impl Scalar for Var<'_> {
    #[inline]
    fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    fn lift(&self, v: f64) -> Self {
        self.tape.constant(v)
    }

    fn tanh(self) -> Self {
        let t = self.value.tanh();
        self.unary(OpKind::Tanh, t, 1.0 - t * t)
    }

    fn sigmoid(self) -> Self {
        let s = sigmoid(self.value);
        self.unary(OpKind::Sigmoid, s, s * (1.0 - s))
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        self.unary(OpKind::Exp, e, e)
    }

    fn ln(self) -> Self {
        self.unary(OpKind::Ln, self.value.ln(), 1.0 / self.value)
    }

    fn powf_const(self, c: f64) -> Self {
        let v = self.value.powf(c);
        let mut grad = c * self.value.powf(c - 1.0);
        if self.value == 0.0 && c < 1.0 {
            grad = POW_GRAD_CLAMP;
            self.tape.note_clamp();
        }
        self.unary(OpKind::PowConst, v, grad)
    }

    fn base_pow(self, base: f64) -> Self {
        let v = base.powf(self.value);
        let grad = if base == 0.0 { 0.0 } else { v * base.ln() };
        self.unary(OpKind::PowBase, v, grad)
    }

    fn gamma(self) -> Self {
        let g = gamma_unchecked(self.value);
        self.unary(OpKind::Gamma, g, g * digamma_unchecked(self.value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn central(f: &dyn Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6 * x.abs().max(1.0);
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    #[test]
    fn sigmoid_stays_open() {
        assert!(sigmoid(800.0) < 1.0);
        assert!(sigmoid(-800.0) > 0.0);
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn unary_ops_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        type Case = (&'static str, fn(Var<'_>) -> Var<'_>, fn(f64) -> f64, (f64, f64));
        let cases: [Case; 8] = [
            ("tanh", |v| v.tanh(), f64::tanh, (-3.0, 3.0)),
            ("sigmoid", |v| v.sigmoid(), sigmoid, (-6.0, 6.0)),
            ("exp", |v| v.exp(), f64::exp, (-3.0, 3.0)),
            ("ln", |v| v.ln(), f64::ln, (0.1, 5.0)),
            ("neg", |v| -v, |x| -x, (-5.0, 5.0)),
            ("pow_const", |v| v.powf_const(1.7), |x| x.powf(1.7), (0.1, 4.0)),
            ("base_pow", |v| v.base_pow(3.5), |x| 3.5f64.powf(x), (-2.0, 2.0)),
            ("gamma", |v| v.gamma(), gamma_unchecked, (0.1, 3.9)),
        ];
        for (name, taped, plain, (lo, hi)) in cases {
            for _ in 0..100 {
                let x0 = rng.gen_range(lo..hi);
                let tape = Tape::new();
                let x = tape.param(x0);
                let y = taped(x);
                assert_eq!(y.value(), plain(x0), "{name} value");
                let g = tape.backward(y.id()).unwrap().wrt(x);
                let fd = central(&plain, x0);
                assert!(rel_err(g, fd) < 1e-6, "{name} at {x0}: {g} vs {fd}");
            }
        }
    }

    #[test]
    fn binary_ops_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        type Case = (&'static str, for<'a> fn(Var<'a>, Var<'a>) -> Var<'a>, fn(f64, f64) -> f64);
        let cases: [Case; 4] = [
            ("add", |a, b| a + b, |a, b| a + b),
            ("sub", |a, b| a - b, |a, b| a - b),
            ("mul", |a, b| a * b, |a, b| a * b),
            ("div", |a, b| a / b, |a, b| a / b),
        ];
        for (name, taped, plain) in cases {
            for _ in 0..100 {
                let a0 = rng.gen_range(-4.0..4.0);
                let b0 = rng.gen_range(0.5..4.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let tape = Tape::new();
                let (a, b) = (tape.param(a0), tape.param(b0));
                let y = taped(a, b);
                let g = tape.backward(y.id()).unwrap();
                let fda = central(&|x| plain(x, b0), a0);
                let fdb = central(&|x| plain(a0, x), b0);
                assert!(rel_err(g.wrt(a), fda) < 1e-6, "{name} d/da");
                assert!(rel_err(g.wrt(b), fdb) < 1e-6, "{name} d/db");
            }
        }
    }

    #[test]
    fn gradient_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let (x0, y0) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let (ca, cb) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            fn f<'a>(x: Var<'a>, y: Var<'a>) -> Var<'a> {
                (x * y).tanh() + x.exp()
            }
            fn g<'a>(x: Var<'a>, y: Var<'a>) -> Var<'a> {
                x * x * y - y.sigmoid()
            }

            let grads = |build: &dyn for<'a> Fn(Var<'a>, Var<'a>) -> Var<'a>| {
                let tape = Tape::new();
                let (x, y) = (tape.param(x0), tape.param(y0));
                let out = build(x, y);
                tape.backward(out.id()).unwrap().params()
            };
            let gf = grads(&|x, y| f(x, y));
            let gg = grads(&|x, y| g(x, y));
            let combo = grads(&|x, y| {
                let a = x.lift(ca);
                let b = x.lift(cb);
                a * f(x, y) + b * g(x, y)
            });
            for i in 0..2 {
                let want: f64 = ca * gf[i] + cb * gg[i];
                assert!((combo[i] - want).abs() < 1e-12 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn replay_is_bit_identical() {
        let run = || {
            let tape = Tape::new();
            let x = tape.param(0.37);
            let y = tape.param(-1.2);
            let z = (x * y).sigmoid() / (y.exp() + x.tanh()) - x.base_pow(2.0).gamma();
            let g = tape.backward(z.id()).unwrap();
            let values: Vec<u64> = (0..tape.len())
                .map(|i| tape.node(super::super::NodeId(i)).unwrap().value.to_bits())
                .collect();
            (z.id(), values, g.adjoints().iter().map(|a| a.to_bits()).collect::<Vec<_>>())
        };
        assert_eq!(run(), run());
    }
}
