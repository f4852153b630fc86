//! The generator compiled into sums of banded left/right products.
//!
//! Every term group is expanded symbolically into `c L rho R` monomials, with
//! `L`, `R` products of the truncated operators. Monomials sharing a left
//! factor are merged, so one application costs a few banded-times-dense
//! passes instead of dense matrix products.

use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::banded::BandedMatrix;
use super::{AngleCoefficients, DissipatorSpec, TermGroup};
use crate::error::Result;
use crate::model::SystemOperators;
use crate::operator::OperatorMatrix;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };
const ID: usize = 0;

struct Registry {
    ops: Vec<Array2<C64>>,
    products: HashMap<(usize, usize), usize>,
}

impl Registry {
    fn new(n: usize) -> Self {
        Self { ops: vec![Array2::from_diag_elem(n, ONE)], products: HashMap::new() }
    }

    fn add(&mut self, op: &OperatorMatrix) -> usize {
        self.ops.push(op.as_array().clone());
        self.ops.len() - 1
    }

    fn mul(&mut self, a: usize, b: usize) -> usize {
        if a == ID {
            return b;
        }
        if b == ID {
            return a;
        }
        if let Some(&k) = self.products.get(&(a, b)) {
            return k;
        }
        let prod = self.ops[a].dot(&self.ops[b]);
        self.ops.push(prod);
        let k = self.ops.len() - 1;
        self.products.insert((a, b), k);
        k
    }
}

#[derive(Debug, Clone, Copy)]
struct Monomial {
    coeff: C64,
    left: usize,
    right: usize,
}

/// A superoperator as a sum of `coeff * L rho R`.
#[derive(Debug, Clone, Default)]
struct Expr(Vec<Monomial>);

impl Expr {
    fn rho() -> Self {
        Expr(vec![Monomial { coeff: ONE, left: ID, right: ID }])
    }

    fn scale(mut self, c: C64) -> Self {
        for m in &mut self.0 {
            m.coeff *= c;
        }
        self
    }

    fn plus(mut self, other: Expr) -> Self {
        self.0.extend(other.0);
        self
    }

    fn left(&self, reg: &mut Registry, a: usize) -> Self {
        Expr(self.0.iter().map(|m| Monomial { left: reg.mul(a, m.left), ..*m }).collect())
    }

    fn right(&self, reg: &mut Registry, a: usize) -> Self {
        Expr(self.0.iter().map(|m| Monomial { right: reg.mul(m.right, a), ..*m }).collect())
    }

    fn comm(&self, reg: &mut Registry, a: usize) -> Self {
        self.left(reg, a).plus(self.right(reg, a).scale(-ONE))
    }

    fn acomm(&self, reg: &mut Registry, a: usize) -> Self {
        self.left(reg, a).plus(self.right(reg, a))
    }
}

#[derive(Debug, Clone)]
enum RightFactor {
    Scalar(C64),
    Banded(BandedMatrix),
}

#[derive(Debug, Clone)]
struct Group {
    left: Option<BandedMatrix>,
    right: RightFactor,
}

#[derive(Debug, Clone, Default)]
struct Part {
    groups: Vec<Group>,
}

impl Part {
    /// Monomials with a trivial right factor collapse into one left operator
    /// and those with a trivial left factor into one right operator; the
    /// remaining sandwiches are merged by left factor.
    fn compile(reg: &Registry, expr: &Expr) -> Self {
        let n = reg.ops[0].nrows();
        let zero = C64::new(0.0, 0.0);
        let mut left_only = Array2::<C64>::zeros((n, n));
        let mut right_only = Array2::<C64>::zeros((n, n));
        let mut order: Vec<usize> = Vec::new();
        let mut sums: HashMap<usize, Array2<C64>> = HashMap::new();
        for m in expr.0.iter().filter(|m| m.coeff != zero) {
            if m.right == ID {
                left_only.scaled_add(m.coeff, &reg.ops[m.left]);
            } else if m.left == ID {
                right_only.scaled_add(m.coeff, &reg.ops[m.right]);
            } else {
                let acc = sums.entry(m.left).or_insert_with(|| {
                    order.push(m.left);
                    Array2::zeros((n, n))
                });
                acc.scaled_add(m.coeff, &reg.ops[m.right]);
            }
        }
        let mut groups = Vec::new();
        if let Some(f) = right_factor(&left_only) {
            groups.push(match f {
                RightFactor::Scalar(c) => Group { left: None, right: RightFactor::Scalar(c) },
                RightFactor::Banded(b) => Group { left: Some(b), right: RightFactor::Scalar(ONE) },
            });
        }
        if let Some(f) = right_factor(&right_only) {
            groups.push(Group { left: None, right: f });
        }
        for l in order {
            if let Some(right) = right_factor(&sums[&l]) {
                groups.push(Group { left: Some(BandedMatrix::from_dense(&reg.ops[l])), right });
            }
        }
        Self { groups }
    }

    fn apply_add(&self, scale: C64, rho: &[C64], out: &mut [C64], scratch: &mut [C64]) {
        for g in &self.groups {
            match (&g.left, &g.right) {
                (None, RightFactor::Scalar(c)) => {
                    let a = scale * c;
                    for (o, r) in out.iter_mut().zip(rho) {
                        *o += a * r;
                    }
                }
                (None, RightFactor::Banded(r)) => r.right_mul_add(scale, rho, out),
                (Some(l), RightFactor::Scalar(c)) => l.left_mul_add(scale * c, rho, out),
                (Some(l), RightFactor::Banded(r)) => {
                    scratch.fill(C64::new(0.0, 0.0));
                    r.right_mul_add(ONE, rho, scratch);
                    l.left_mul_add(scale, scratch, out);
                }
            }
        }
    }

    fn len(&self) -> usize {
        self.groups.len()
    }

    /// Diagonal sweeps per application.
    fn passes(&self) -> usize {
        self.groups
            .iter()
            .map(|g| {
                let l = g.left.as_ref().map_or(0, BandedMatrix::bandwidth);
                let r = match &g.right {
                    RightFactor::Scalar(_) => 1,
                    RightFactor::Banded(b) => b.bandwidth(),
                };
                l + r
            })
            .sum()
    }
}

fn right_factor(r: &Array2<C64>) -> Option<RightFactor> {
    let n = r.nrows();
    let d = r[[0, 0]];
    let scalar = r.indexed_iter().all(|((i, j), z)| if i == j { *z == d } else { *z == C64::new(0.0, 0.0) });
    if scalar {
        return (d != C64::new(0.0, 0.0)).then_some(RightFactor::Scalar(d));
    }
    debug_assert_eq!(n, r.ncols());
    Some(RightFactor::Banded(BandedMatrix::from_dense(r)))
}

#[derive(Debug, Clone)]
struct TonePart {
    frequency: f64,
    part: Part,
}

/// The full generator `L(t) = L_static + sum_n cos(omega_n t) L_n` in banded form.
#[derive(Debug, Clone)]
pub struct LiouvillianKernel {
    dim: usize,
    static_part: Part,
    tones: Vec<TonePart>,
}

impl LiouvillianKernel {
    pub fn new(ops: &SystemOperators, spec: &DissipatorSpec) -> Result<Self> {
        let n = ops.dim();
        let terms = spec.terms();
        let AngleCoefficients { a_plus, a_minus, b, s } = spec.angles();
        let (g, c_t, w0) = (spec.gamma, spec.c_t, ops.space.omega0());
        let mut reg = Registry::new(n);
        let x = reg.add(&ops.x);
        let p = reg.add(&ops.p);
        let rho = Expr::rho();

        // b/omega0² [p,{O,rho}] + i s cT/omega0 [x,[O,rho]]
        let dressed = |reg: &mut Registry, o: usize| {
            let drift = rho.acomm(reg, o).comm(reg, p).scale(ONE * (b / (w0 * w0)));
            let diffusion = rho.comm(reg, o).comm(reg, x).scale(I * (s * c_t / w0));
            drift.plus(diffusion)
        };

        let mut st = Expr::default();
        if terms.contains(TermGroup::Unitary) {
            let h = reg.add(&ops.h_static);
            st = st.plus(rho.comm(&mut reg, h).scale(-I));
        }
        if terms.contains(TermGroup::Decoherence) {
            let cx = a_plus * g * w0 * c_t / 4.0;
            let cp = a_minus * g * c_t / (4.0 * w0);
            let xx = rho.comm(&mut reg, x).comm(&mut reg, x).scale(-ONE * cx);
            let pp = rho.comm(&mut reg, p).comm(&mut reg, p).scale(-ONE * cp);
            st = st.plus(xx).plus(pp);
        }
        if terms.contains(TermGroup::Friction) {
            let a = rho.acomm(&mut reg, p).comm(&mut reg, x).scale(-I * (a_plus * g / 4.0));
            let c = rho.acomm(&mut reg, x).comm(&mut reg, p).scale(I * (a_minus * g / 4.0));
            st = st.plus(a).plus(c);
        }
        if terms.contains(TermGroup::Nonlinear) && ops.v1_prime.max_abs() > 0.0 {
            let w = reg.add(&ops.v1_prime.scale(I));
            st = st.plus(dressed(&mut reg, w).scale(ONE * (g / 4.0)));
        }

        let mut tones = Vec::new();
        for d in &ops.drives {
            d.tone.ensure_supported()?;
            let f = d.tone.amplitude;
            let mut e = Expr::default();
            if terms.contains(TermGroup::Unitary) {
                let xk = reg.add(&d.x_pow);
                e = e.plus(rho.comm(&mut reg, xk).scale(-I * f));
            }
            if terms.contains(TermGroup::Drive) {
                let xk1 = reg.add(&d.x_pow_minus_one);
                let c = I * (g * d.tone.order as f64 * f / 4.0);
                e = e.plus(dressed(&mut reg, xk1).scale(c));
            }
            tones.push(TonePart { frequency: d.tone.frequency, part: Part::compile(&reg, &e) });
        }
        let static_part = Part::compile(&reg, &st);
        log::debug!(
            "compiled generator: {} static groups, {} tone groups",
            static_part.len(),
            tones.iter().map(|t| t.part.len()).sum::<usize>()
        );
        Ok(Self { dim: n, static_part, tones })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(groups, diagonal sweeps)` per application, for cost reporting.
    pub fn cost(&self) -> (usize, usize) {
        let parts = std::iter::once(&self.static_part).chain(self.tones.iter().map(|t| &t.part));
        parts.fold((0, 0), |(g, p), part| (g + part.len(), p + part.passes()))
    }

    pub fn is_time_dependent(&self) -> bool {
        self.tones.iter().any(|t| t.part.len() > 0)
    }

    /// `out = L(t) rho`. `rho`, `out` and `scratch` are row-major `N x N`.
    pub fn apply_into(&self, rho: &[C64], t: f64, out: &mut [C64], scratch: &mut [C64]) {
        out.fill(C64::new(0.0, 0.0));
        self.static_part.apply_add(ONE, rho, out, scratch);
        for tone in &self.tones {
            let c = (tone.frequency * t).cos();
            if c != 0.0 {
                tone.part.apply_add(ONE * c, rho, out, scratch);
            }
        }
    }

    pub fn apply(&self, rho: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
        rho.ensure_dim(self.dim)?;
        let n = self.dim;
        let input = rho.as_array().as_standard_layout().into_owned();
        let mut out = Array2::zeros((n, n));
        let mut scratch = vec![C64::new(0.0, 0.0); n * n];
        self.apply_into(
            input.as_slice().expect("standard layout"),
            t,
            out.as_slice_mut().expect("standard layout"),
            &mut scratch,
        );
        OperatorMatrix::new(out)
    }
}
