use std::fmt;

use ndarray::{s, Array2};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{
    build_superops, interior_test_operator, max_abs, weyl_operator, FockOperators, OracleError,
    SuperMap,
};

/// Exact identities must hold to this residual on interior operators.
pub const EXACT_TOL: f64 = 1e-8;
/// Test operators live on levels `0..d − INTERIOR_MARGIN`.
pub const INTERIOR_MARGIN: usize = 5;
/// Phase-space point used for the Weyl-operator checks; large enough that
/// the truncation error stays visible above roundoff up to `d = 30`.
pub const WEYL_POINT: [f64; 2] = [2.8, 1.4];
/// The Weyl eigenrelations are compared on levels `0..WEYL_BLOCK`.
pub const WEYL_BLOCK: usize = 10;
/// Point used for the `N (pX − xP)ⁿ` eigenrelation.
const LINEAR_POINT: [f64; 2] = [0.7, -0.4];

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl AlgebraCheck {
    pub fn passed(&self) -> bool {
        self.residual < self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraReport {
    pub d: usize,
    pub checks: Vec<AlgebraCheck>,
}

impl AlgebraReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(AlgebraCheck::passed)
    }

    pub fn get(&self, name: &str) -> Option<&AlgebraCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for AlgebraReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# superoperator algebra, d = {}; columns: identity, residual, tolerance, result", self.d)?;
        for c in &self.checks {
            writeln!(
                f,
                "{}\t{:.3e}\t{:.1e}\t{}",
                c.name,
                c.residual,
                c.tolerance,
                if c.passed() { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

fn interior(a: &Array2<Complex64>, d: usize) -> f64 {
    let m = d - INTERIOR_MARGIN;
    max_abs(&a.slice(s![..m, ..m]).to_owned())
}

fn mpow(a: &Array2<Complex64>, n: u32) -> Array2<Complex64> {
    let mut out = Array2::eye(a.nrows());
    for _ in 0..n {
        out = out.dot(a);
    }
    out
}

/// Residuals of `Xˢ W = −x W` and `Pˢ W = −p W` on the leading
/// `WEYL_BLOCK` levels, with `W = e^{−i(pX − xP)}` built on `d` levels.
pub fn weyl_residuals(d: usize, z: [f64; 2]) -> Result<(f64, f64), OracleError> {
    let ops = FockOperators::new(d)?;
    let w = weyl_operator(&ops, [-z[0], -z[1]]);
    let xs = &ops.x.dot(&w) - &w.dot(&ops.x);
    let ps = &ops.p.dot(&w) - &w.dot(&ops.p);
    let rx = &xs + &(&w * Complex64::new(z[0], 0.0));
    let rp = &ps + &(&w * Complex64::new(z[1], 0.0));
    let block = |a: &Array2<Complex64>| max_abs(&a.slice(s![..WEYL_BLOCK, ..WEYL_BLOCK]).to_owned());
    Ok((block(&rx), block(&rp)))
}

type Check<'a> = (String, f64, Box<dyn Fn() -> Result<f64, OracleError> + Sync + 'a>);

/// Superoperator identities on a `d`-level truncation.
pub fn algebra_suite(d: usize) -> Result<AlgebraReport, OracleError> {
    if d < 20 {
        return Err(OracleError::DimensionTooSmall { d, min: 20 });
    }
    let ops = FockOperators::new(d)?;
    let so = build_superops(&ops);
    let support = d - INTERIOR_MARGIN;
    let rho = interior_test_operator(d, support, 0x9e37_79b9_7f4a_7c15);
    let id = Array2::<Complex64>::eye(d);
    let two_i = Complex64::new(0.0, 2.0);
    let h_bar = SuperMap::commutator(&ops.h0_bar(1.0, 0.1, 0.05));
    let (db, pi) = (0.3, 0.1);
    let dissipator = |a: &Array2<Complex64>| -> Result<Array2<Complex64>, OracleError> {
        let xx = so.xs.apply(&so.xs.apply(a)?)?;
        let xp = so.xs.apply(&so.ps.apply(a)?)?;
        Ok(xx * Complex64::new(db, 0.0) - xp * Complex64::new(pi, 0.0))
    };
    let lin = &ops.x * Complex64::new(LINEAR_POINT[1], 0.0) - &ops.p * Complex64::new(LINEAR_POINT[0], 0.0);

    let mut checks: Vec<Check> = vec![
        (
            "X^S I = 0".into(),
            EXACT_TOL,
            Box::new(|| Ok(max_abs(&so.xs.apply(&id)?))),
        ),
        (
            "X^Sigma I = 2X".into(),
            EXACT_TOL,
            Box::new(|| Ok(max_abs(&(so.xsig.apply(&id)? - &ops.x * Complex64::new(2.0, 0.0))))),
        ),
        (
            "[X^S, P^S] = 0".into(),
            EXACT_TOL,
            Box::new(|| {
                let a = so.xs.apply(&so.ps.apply(&rho)?)?;
                let b = so.ps.apply(&so.xs.apply(&rho)?)?;
                Ok(max_abs(&(a - b)))
            }),
        ),
        (
            "[X^S, P^Sigma] = 2i".into(),
            EXACT_TOL,
            Box::new(|| {
                let a = so.xs.apply(&so.psig.apply(&rho)?)?;
                let b = so.psig.apply(&so.xs.apply(&rho)?)?;
                Ok(max_abs(&(a - b - &rho * two_i)))
            }),
        ),
        (
            "[X^Sigma, P^S] = 2i".into(),
            EXACT_TOL,
            Box::new(|| {
                let a = so.xsig.apply(&so.ps.apply(&rho)?)?;
                let b = so.ps.apply(&so.xsig.apply(&rho)?)?;
                Ok(max_abs(&(a - b - &rho * two_i)))
            }),
        ),
        (
            "X^S X^Sigma = (X^2)^S".into(),
            EXACT_TOL,
            Box::new(|| {
                let a = so.xs.apply(&so.xsig.apply(&rho)?)?;
                let xx = ops.x.dot(&ops.x);
                Ok(max_abs(&(a - (xx.dot(&rho) - rho.dot(&xx)))))
            }),
        ),
        (
            "P^S P^Sigma = (P^2)^S".into(),
            EXACT_TOL,
            Box::new(|| {
                let a = so.ps.apply(&so.psig.apply(&rho)?)?;
                let pp = ops.p.dot(&ops.p);
                Ok(max_abs(&(a - (pp.dot(&rho) - rho.dot(&pp)))))
            }),
        ),
        (
            "[N, H0bar^S] = 0".into(),
            EXACT_TOL,
            Box::new(|| {
                let a = so.n.apply(&h_bar.apply(&rho)?)?;
                let b = h_bar.apply(&so.n.apply(&rho)?)?;
                Ok(max_abs(&(a - b)))
            }),
        ),
        (
            "[N, D] = -2D".into(),
            EXACT_TOL,
            Box::new(|| {
                let a = so.n.apply(&dissipator(&rho)?)?;
                let b = dissipator(&so.n.apply(&rho)?)?;
                let c = dissipator(&rho)? * Complex64::new(2.0, 0.0);
                Ok(max_abs(&(a - b + c)))
            }),
        ),
    ];
    let so_ref = &so;
    for n in 1..=3u32 {
        let xn = mpow(&ops.x, n);
        checks.push((
            format!("N X^{n} = {n} X^{n}"),
            EXACT_TOL,
            Box::new(move || {
                let r = so_ref.n.apply(&xn)? - &xn * Complex64::new(n as f64, 0.0);
                Ok(interior(&r, d))
            }),
        ));
        let ln = mpow(&lin, n);
        checks.push((
            format!("N (pX-xP)^{n} = {n} (pX-xP)^{n}"),
            EXACT_TOL,
            Box::new(move || {
                let r = so_ref.n.apply(&ln)? - &ln * Complex64::new(n as f64, 0.0);
                Ok(interior(&r, d))
            }),
        ));
    }
    let weyl = weyl_residuals(d, WEYL_POINT)?;
    checks.push(("X^S W = -x W".into(), EXACT_TOL, Box::new(move || Ok(weyl.0))));
    checks.push(("P^S W = -p W".into(), EXACT_TOL, Box::new(move || Ok(weyl.1))));

    let checks = checks
        .par_iter()
        .map(|(name, tol, f)| {
            Ok(AlgebraCheck {
                name: name.clone(),
                residual: f()?,
                tolerance: *tol,
            })
        })
        .collect::<Result<Vec<_>, OracleError>>()?;
    Ok(AlgebraReport { d, checks })
}
