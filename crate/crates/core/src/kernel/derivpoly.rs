//! Exact polynomials `P_l(x1, D)` with
//! `∂^l/∂x1^l (1/|σ|^4) = P_l(x1, D) / D^{2+l}`, `D = |σ|^2`.
//!
//! They follow from `P_0 = 1` and
//! `P_{l+1} = (dP_l/dx1)·D - (2l+4)·x1·P_l`, where `d/dx1` is the total
//! derivative (`dD/dx1 = 2 x1`). This representation never touches the
//! complex slice, so it serves as an independent check on the other forms.

use std::sync::OnceLock;

use crate::scalar::Scalar;

/// Highest order kept in the shared table.
pub const MAX_ORDER: usize = 25;

/// `coef · x1^a · D^b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Term {
    pub a: u32,
    pub b: u32,
    pub coef: i128,
}

fn mul(a: i128, b: i128) -> i128 {
    a.checked_mul(b).expect("coefficient overflow")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivPoly {
    pub order: usize,
    pub terms: Vec<Term>,
}

impl DerivPoly {
    pub fn one() -> Self {
        DerivPoly {
            order: 0,
            terms: vec![Term { a: 0, b: 0, coef: 1 }],
        }
    }

    pub fn next(&self) -> Self {
        let l = self.order as i128;
        let mut acc: Vec<Term> = Vec::new();
        let mut push = |a: u32, b: u32, coef: i128| {
            if coef == 0 {
                return;
            }
            match acc.iter_mut().find(|t| t.a == a && t.b == b) {
                Some(t) => t.coef = t.coef.checked_add(coef).expect("coefficient overflow"),
                None => acc.push(Term { a, b, coef }),
            }
        };
        for t in &self.terms {
            // (∂P/∂x1)·D
            if t.a > 0 {
                push(t.a - 1, t.b + 1, mul(t.coef, t.a as i128));
            }
            // (∂P/∂D · 2x1)·D
            if t.b > 0 {
                push(t.a + 1, t.b, mul(t.coef, 2 * t.b as i128));
            }
            // -(2l+4) x1 P
            push(t.a + 1, t.b, mul(t.coef, -(2 * l + 4)));
        }
        acc.retain(|t| t.coef != 0);
        acc.sort_by_key(|t| (t.a, t.b));
        DerivPoly {
            order: self.order + 1,
            terms: acc,
        }
    }

    /// `P_l` for `l ≤ MAX_ORDER`, computed once.
    pub fn get(order: usize) -> &'static DerivPoly {
        static TABLE: OnceLock<Vec<DerivPoly>> = OnceLock::new();
        assert!(order <= MAX_ORDER, "derivative order {order} exceeds {MAX_ORDER}");
        let table = TABLE.get_or_init(|| {
            let mut v = vec![DerivPoly::one()];
            for _ in 0..MAX_ORDER {
                let next = v.last().expect("nonempty").next();
                v.push(next);
            }
            v
        });
        &table[order]
    }

    pub fn eval<T: Scalar>(&self, x1: &T, d: &T) -> T {
        self.terms.iter().fold(T::zero(), |acc, t| {
            acc + T::from_i128(t.coef) * x1.powi(t.a) * d.powi(t.b)
        })
    }

    /// `∂P/∂D` at fixed `x1`.
    pub fn eval_d_partial<T: Scalar>(&self, x1: &T, d: &T) -> T {
        self.terms.iter().filter(|t| t.b > 0).fold(T::zero(), |acc, t| {
            acc + T::from_i128(t.coef * t.b as i128) * x1.powi(t.a) * d.powi(t.b - 1)
        })
    }

    /// `R_l = P_l / D^{2+l}` = `∂^l/∂x1^l (1/D^2)`.
    pub fn ratio<T: Scalar>(&self, x1: &T, d: &T) -> T {
        self.eval(x1, d) / d.powi(2 + self.order as u32)
    }

    /// `∂R_l/∂D` at fixed `x1`.
    pub fn ratio_d_partial<T: Scalar>(&self, x1: &T, d: &T) -> T {
        let l = self.order as u32;
        self.eval_d_partial(x1, d) / d.powi(2 + l)
            - T::from_i64(2 + l as i64) * self.eval(x1, d) / d.powi(3 + l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_orders() {
        assert_eq!(
            DerivPoly::get(1).terms,
            vec![Term { a: 1, b: 0, coef: -4 }]
        );
        // P_2 = -4 D + 24 x1^2
        assert_eq!(
            DerivPoly::get(2).terms,
            vec![Term { a: 0, b: 1, coef: -4 }, Term { a: 2, b: 0, coef: 24 }]
        );
    }

    #[test]
    fn total_degree_matches_order() {
        for l in 0..=MAX_ORDER {
            for t in &DerivPoly::get(l).terms {
                assert_eq!((t.a + 2 * t.b) as usize, l);
            }
        }
    }

    #[test]
    fn matches_finite_differences_in_x1() {
        // d/dx1 of R_l along x1 with rho fixed equals R_{l+1}
        let rho2 = 0.7;
        let x1 = 0.9;
        let h = 1e-5;
        for l in 0..6 {
            let p = DerivPoly::get(l);
            let r = |x: f64| p.ratio(&x, &(x * x + rho2));
            let fd = (r(x1 + h) - r(x1 - h)) / (2.0 * h);
            let exact = DerivPoly::get(l + 1).ratio(&x1, &(x1 * x1 + rho2));
            assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1.0), "l={l}");
        }
    }
}
