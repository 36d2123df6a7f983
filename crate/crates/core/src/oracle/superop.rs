use ndarray::Array2;
use num_complex::Complex64;

use super::{FockOperators, OracleError, Variant};
use crate::coefficients::CoefficientSample;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuperKind {
    /// `ρ ↦ [A, ρ]`
    S,
    /// `ρ ↦ {A, ρ}`
    Sigma,
    N,
    Composite,
}

/// Linear map on column-stacked `d × d` operators.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperMap {
    pub kind: SuperKind,
    pub d: usize,
    pub matrix: Array2<Complex64>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

impl SuperMap {
    pub fn zeros(d: usize, kind: SuperKind) -> Self {
        SuperMap {
            kind,
            d,
            matrix: Array2::zeros((d * d, d * d)),
        }
    }

    /// Adds `s · (ρ ↦ A ρ B)`, i.e. `s · (Bᵗ ⊗ A)`.
    pub fn add_sandwich(&mut self, a: &Array2<Complex64>, b: &Array2<Complex64>, s: Complex64) {
        let d = self.d;
        for i in 0..d {
            for k in 0..d {
                let aik = a[[i, k]];
                if aik == ZERO {
                    continue;
                }
                for l in 0..d {
                    for j in 0..d {
                        let blj = b[[l, j]];
                        if blj == ZERO {
                            continue;
                        }
                        self.matrix[[i + j * d, k + l * d]] += s * aik * blj;
                    }
                }
            }
        }
    }

    /// `ρ ↦ [A, ρ]`
    pub fn commutator(a: &Array2<Complex64>) -> Self {
        let d = a.nrows();
        let id = Array2::eye(d);
        let mut m = SuperMap::zeros(d, SuperKind::S);
        m.add_sandwich(a, &id, c(1.0));
        m.add_sandwich(&id, a, c(-1.0));
        m
    }

    /// `ρ ↦ {A, ρ}`
    pub fn anticommutator(a: &Array2<Complex64>) -> Self {
        let d = a.nrows();
        let id = Array2::eye(d);
        let mut m = SuperMap::zeros(d, SuperKind::Sigma);
        m.add_sandwich(a, &id, c(1.0));
        m.add_sandwich(&id, a, c(1.0));
        m
    }

    pub fn identity(d: usize) -> Self {
        SuperMap {
            kind: SuperKind::Composite,
            d,
            matrix: Array2::eye(d * d),
        }
    }

    pub fn apply(&self, rho: &Array2<Complex64>) -> Result<Array2<Complex64>, OracleError> {
        let d = self.d;
        if rho.dim() != (d, d) {
            return Err(OracleError::Shape { d, found: rho.dim() });
        }
        let mut v = ndarray::Array1::zeros(d * d);
        for j in 0..d {
            for i in 0..d {
                v[i + j * d] = rho[[i, j]];
            }
        }
        let w = self.matrix.dot(&v);
        Ok(Array2::from_shape_fn((d, d), |(i, j)| w[i + j * d]))
    }

    /// `self ∘ other` as a dense product.
    pub fn compose(&self, other: &SuperMap) -> SuperMap {
        SuperMap {
            kind: SuperKind::Composite,
            d: self.d,
            matrix: self.matrix.dot(&other.matrix),
        }
    }

    /// Largest `|tr(L E_kl)|` over basis operators `E_kl` with `k, l < support`.
    pub fn trace_defect(&self, support: usize) -> f64 {
        let d = self.d;
        let mut worst: f64 = 0.0;
        for l in 0..support.min(d) {
            for k in 0..support.min(d) {
                let col = k + l * d;
                let tr: Complex64 = (0..d).map(|i| self.matrix[[i + i * d, col]]).sum();
                worst = worst.max(tr.norm());
            }
        }
        worst
    }
}

/// `Xˢ, Pˢ, X^Σ, P^Σ` and `N = −(i/2)(P^Σ Xˢ − X^Σ Pˢ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOps {
    pub xs: SuperMap,
    pub ps: SuperMap,
    pub xsig: SuperMap,
    pub psig: SuperMap,
    pub n: SuperMap,
}

pub fn build_superops(ops: &FockOperators) -> SuperOps {
    let (x, p) = (&ops.x, &ops.p);
    let d = ops.d;
    let id = Array2::eye(d);
    let comm = x.dot(p) - p.dot(x);
    // P^Σ Xˢ − X^Σ Pˢ = −Cρ − ρC + 2XρP − 2PρX with C = XP − PX
    let mut n = SuperMap::zeros(d, SuperKind::N);
    let f = Complex64::new(0.0, -0.5);
    n.add_sandwich(&comm, &id, -f);
    n.add_sandwich(&id, &comm, -f);
    n.add_sandwich(x, p, 2.0 * f);
    n.add_sandwich(p, x, -2.0 * f);
    SuperOps {
        xs: SuperMap::commutator(x),
        ps: SuperMap::commutator(p),
        xsig: SuperMap::anticommutator(x),
        psig: SuperMap::anticommutator(p),
        n,
    }
}

/// The master-equation generator at one instant.
pub fn generator(
    sample: &CoefficientSample,
    ops: &FockOperators,
    variant: Variant,
    omega0: f64,
) -> SuperMap {
    let d = ops.d;
    let id = Array2::eye(d);
    let (x, p) = (&ops.x, &ops.p);
    let xx = x.dot(x);
    let pp = p.dot(p);
    let xp = x.dot(p);
    let px = p.dot(x);
    let mut l = SuperMap::zeros(d, SuperKind::Composite);

    let h = match variant {
        Variant::Full | Variant::UnitaryOnly => ops.h0_bar(omega0, sample.r, sample.gamma),
        Variant::NoRenorm | Variant::Rwa => ops.h0(omega0),
    };
    let mi = Complex64::new(0.0, -1.0);
    l.add_sandwich(&h, &id, mi);
    l.add_sandwich(&id, &h, -mi);

    let (db, pi) = (sample.delta_bar, sample.pi);
    match variant {
        Variant::Full | Variant::NoRenorm => {
            // −Δ̄ [X,[X,ρ]] + Π [X,[P,ρ]]
            l.add_sandwich(&xx, &id, c(-db));
            l.add_sandwich(x, x, c(2.0 * db));
            l.add_sandwich(&id, &xx, c(-db));
            l.add_sandwich(&xp, &id, c(pi));
            l.add_sandwich(x, p, c(-pi));
            l.add_sandwich(p, x, c(-pi));
            l.add_sandwich(&id, &px, c(pi));
        }
        Variant::Rwa => {
            let half = 0.5 * db;
            for (a, aa) in [(x, &xx), (p, &pp)] {
                l.add_sandwich(aa, &id, c(-half));
                l.add_sandwich(a, a, c(2.0 * half));
                l.add_sandwich(&id, aa, c(-half));
            }
        }
        Variant::UnitaryOnly => {}
    }

    if variant != Variant::UnitaryOnly {
        let g = sample.gamma;
        let comm = &xp - &px;
        // γ(N + 2) = −(iγ/2)([X, {P, ·}] − [P, {X, ·}])
        //         = −(iγ/2)(Cρ + ρC + 2XρP − 2PρX)
        let f = Complex64::new(0.0, -0.5 * g);
        l.add_sandwich(&comm, &id, f);
        l.add_sandwich(&id, &comm, f);
        l.add_sandwich(x, p, 2.0 * f);
        l.add_sandwich(p, x, -2.0 * f);
    }
    l
}
