//! Complex polynomials in chart coordinates, with exact derivatives.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::C64;

/// `Σ c_α z^α` over multi-indices `α`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    vars: usize,
    terms: BTreeMap<Vec<u32>, C64>,
}

impl Polynomial {
    pub fn zero(vars: usize) -> Self {
        Self { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, c: C64) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    /// The coordinate function `z^{index}` (0-based).
    pub fn variable(vars: usize, index: usize) -> Self {
        let mut e = vec![0; vars];
        e[index] = 1;
        let mut p = Self::zero(vars);
        p.add_term(e, C64::new(1.0, 0.0));
        p
    }

    pub fn monomial(exponents: Vec<u32>, c: C64) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &C64)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, e: Vec<u32>, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert(C64::new(0.0, 0.0));
        *slot += c;
        if *slot == C64::new(0.0, 0.0) {
            self.terms.remove(&e);
        }
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.terms.iter().fold(C64::new(0.0, 0.0), |acc, (e, c)| {
            acc + e
                .iter()
                .zip(z)
                .fold(*c, |m, (&k, zi)| m * zi.powu(k))
        })
    }

    /// `∂/∂z^{index}`.
    pub fn derivative(&self, index: usize) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            if e[index] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[index] -= 1;
            out.add_term(d, *c * e[index] as f64);
        }
        out
    }

    pub fn gradient(&self, z: &[C64]) -> Vec<C64> {
        (0..self.vars).map(|i| self.derivative(i).eval(z)).collect()
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), *v * c);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.vars, C64::new(1.0, 0.0));
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.vars = out.vars.max(rhs.vars);
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.vars.max(rhs.vars));
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}
