use std::io::Write;

use ndarray::Array2;
use num_complex::Complex64;

use super::band::Band;
use super::{FockOperators, OracleError, TruncatedState, Variant};
use crate::coefficients::{CoefficientSample, CoefficientTable};
use crate::qcf::MomentRow;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleOptions {
    pub d: usize,
    /// Abort threshold for the population of the top three levels.
    pub leakage: f64,
    /// Grid indices at which the full state is kept.
    pub snapshots: Vec<usize>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            d: 30,
            leakage: 1e-6,
            snapshots: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleTrajectory {
    pub variant: Variant,
    pub d: usize,
    pub times: Vec<f64>,
    pub rows: Vec<MomentRow>,
    pub energy: Vec<f64>,
    pub trace: Vec<f64>,
    /// Largest `|ρ − ρ†|` removed by the per-step symmetrization.
    pub max_hermiticity_drift: f64,
    pub max_leakage: f64,
    pub snapshots: Vec<TruncatedState>,
}

impl OracleTrajectory {
    pub fn max_trace_error(&self) -> f64 {
        self.trace.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# oracle variant {}, d = {}; columns: t, <X>, <P>, <X^2>, <P^2>, <XP+PX>, energy, trace",
            self.variant, self.d
        )?;
        writeln!(out, "t,mean_x,mean_p,xx,pp,xp_sym,energy,trace")?;
        for (k, r) in self.rows.iter().enumerate() {
            writeln!(
                out,
                "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
                self.times[k], r.mean_x, r.mean_p, r.xx, r.pp, r.xp_sym, self.energy[k], self.trace[k]
            )?;
        }
        Ok(())
    }
}

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Banded operators and scratch space for the generator without `−iH₀ˢ`.
struct Engine {
    d: usize,
    x: Band,
    p: Band,
    xx: Band,
    xp_sym: Band,
    /// diagonal of the truncated `H₀`
    energies: Vec<f64>,
    variant: Variant,
    c_x: Array2<Complex64>,
    c_p: Array2<Complex64>,
    a_x: Array2<Complex64>,
    a_p: Array2<Complex64>,
}

impl Engine {
    fn new(ops: &FockOperators, variant: Variant, omega0: f64) -> Self {
        let d = ops.d;
        let xx = ops.x.dot(&ops.x);
        let xp = ops.x.dot(&ops.p) + ops.p.dot(&ops.x);
        let h0 = ops.h0(omega0);
        Engine {
            d,
            x: Band::from_dense(&ops.x),
            p: Band::from_dense(&ops.p),
            xx: Band::from_dense(&xx),
            xp_sym: Band::from_dense(&xp),
            energies: (0..d).map(|n| h0[[n, n]].re).collect(),
            variant,
            c_x: Array2::zeros((d, d)),
            c_p: Array2::zeros((d, d)),
            a_x: Array2::zeros((d, d)),
            a_p: Array2::zeros((d, d)),
        }
    }

    fn commutator_into(a: &Band, rho: &Array2<Complex64>, out: &mut Array2<Complex64>, s: Complex64) {
        a.left(rho, out, s, true);
        a.right(rho, out, -s, true);
    }

    fn anticommutator_into(a: &Band, rho: &Array2<Complex64>, out: &mut Array2<Complex64>, s: Complex64) {
        a.left(rho, out, s, true);
        a.right(rho, out, s, true);
    }

    /// `out = (L + iH₀ˢ) ρ`.
    fn l1(&mut self, rho: &Array2<Complex64>, s: &CoefficientSample, out: &mut Array2<Complex64>) {
        out.fill(Complex64::new(0.0, 0.0));
        let mi = Complex64::new(0.0, -1.0);
        if matches!(self.variant, Variant::Full | Variant::UnitaryOnly) {
            // H̄₀ − H₀ = −(r/2)X² + (γ/2)(XP + PX)
            Self::commutator_into(&self.xx, rho, out, mi * (-0.5 * s.r));
            Self::commutator_into(&self.xp_sym, rho, out, mi * (0.5 * s.gamma));
        }
        if self.variant == Variant::UnitaryOnly {
            return;
        }
        self.c_x.fill(Complex64::new(0.0, 0.0));
        self.c_p.fill(Complex64::new(0.0, 0.0));
        Self::commutator_into(&self.x, rho, &mut self.c_x, ONE);
        Self::commutator_into(&self.p, rho, &mut self.c_p, ONE);
        match self.variant {
            Variant::Full | Variant::NoRenorm => {
                Self::commutator_into(&self.x, &self.c_x, out, Complex64::new(-s.delta_bar, 0.0));
                Self::commutator_into(&self.x, &self.c_p, out, Complex64::new(s.pi, 0.0));
            }
            Variant::Rwa => {
                let h = Complex64::new(-0.5 * s.delta_bar, 0.0);
                Self::commutator_into(&self.x, &self.c_x, out, h);
                Self::commutator_into(&self.p, &self.c_p, out, h);
            }
            Variant::UnitaryOnly => unreachable!(),
        }
        // γ(N + 2)ρ = −(iγ/2)([X, {P, ρ}] − [P, {X, ρ}]), traceless at any d
        self.a_x.fill(Complex64::new(0.0, 0.0));
        self.a_p.fill(Complex64::new(0.0, 0.0));
        Self::anticommutator_into(&self.x, rho, &mut self.a_x, ONE);
        Self::anticommutator_into(&self.p, rho, &mut self.a_p, ONE);
        let f = Complex64::new(0.0, -0.5 * s.gamma);
        Self::commutator_into(&self.x, &self.a_p, out, f);
        Self::commutator_into(&self.p, &self.a_x, out, -f);
    }

    /// `u_m = e^{−i e_m t}`; Schrödinger `ρ_mn = u_m ū_n ρ̃_mn`.
    fn phases(&self, t: f64) -> Vec<Complex64> {
        self.energies
            .iter()
            .map(|e| Complex64::from_polar(1.0, -e * t))
            .collect()
    }

    fn to_schrodinger(u: &[Complex64], rho_i: &Array2<Complex64>) -> Array2<Complex64> {
        Array2::from_shape_fn(rho_i.dim(), |(m, n)| u[m] * u[n].conj() * rho_i[[m, n]])
    }

    /// Interaction-picture derivative at time `t`.
    fn derivative(
        &mut self,
        t: f64,
        rho_i: &Array2<Complex64>,
        s: &CoefficientSample,
        out: &mut Array2<Complex64>,
    ) {
        let u = self.phases(t);
        let rho = Self::to_schrodinger(&u, rho_i);
        self.l1(&rho, s, out);
        for ((m, n), v) in out.indexed_iter_mut() {
            *v *= u[m].conj() * u[n];
        }
    }
}

/// `L(t) ρ` in the Schrödinger picture, through the fast banded path.
pub fn rhs(
    ops: &FockOperators,
    variant: Variant,
    sample: &CoefficientSample,
    omega0: f64,
    rho: &Array2<Complex64>,
) -> Array2<Complex64> {
    let mut engine = Engine::new(ops, variant, omega0);
    let mut out = Array2::zeros((engine.d, engine.d));
    engine.l1(rho, sample, &mut out);
    for ((m, n), v) in out.indexed_iter_mut() {
        let de = engine.energies[m] - engine.energies[n];
        *v += Complex64::new(0.0, -de) * rho[[m, n]];
    }
    out
}

fn suggested_dimension(d: usize) -> usize {
    d + (d / 2).max(10)
}

/// RK4 on the coefficient grid in the interaction picture of `H₀`; the
/// state is re-symmetrized after every step.
pub fn integrate(
    rho0: &TruncatedState,
    coeffs: &CoefficientTable,
    variant: Variant,
    opts: &OracleOptions,
) -> Result<OracleTrajectory, OracleError> {
    let ops = FockOperators::new(opts.d)?;
    let d = opts.d;
    if rho0.d() != d {
        return Err(OracleError::Shape {
            d,
            found: rho0.rho.dim(),
        });
    }
    let omega0 = coeffs.omega0;
    let mut engine = Engine::new(&ops, variant, omega0);
    let times = coeffs.grid.times().to_vec();
    let mids = coeffs.midpoints();

    let (mut rows, mut energy, mut trace) = (Vec::new(), Vec::new(), Vec::new());
    let mut snapshots = Vec::new();
    let mut max_drift: f64 = 0.0;
    let mut max_leakage: f64 = 0.0;

    let mut record = |rho_i: &Array2<Complex64>, k: usize, engine: &Engine| -> Result<(), OracleError> {
        let t = times[k];
        let state = TruncatedState {
            rho: Engine::to_schrodinger(&engine.phases(t), rho_i),
            t,
        };
        let leak = state.leakage();
        max_leakage = max_leakage.max(leak);
        if leak > opts.leakage {
            return Err(OracleError::Leakage {
                t,
                leakage: leak,
                threshold: opts.leakage,
                suggested_d: suggested_dimension(d),
            });
        }
        let m = state.moments(&ops);
        energy.push(m.energy(omega0));
        rows.push(m);
        trace.push(state.trace().re);
        if opts.snapshots.contains(&k) {
            snapshots.push(state);
        }
        Ok(())
    };

    let mut rho = rho0.rho.clone();
    record(&rho, 0, &engine)?;
    let shape = (d, d);
    let (mut k1, mut k2, mut k3, mut k4) = (
        Array2::zeros(shape),
        Array2::zeros(shape),
        Array2::zeros(shape),
        Array2::zeros(shape),
    );
    for k in 0..times.len() - 1 {
        let (t, h) = (times[k], times[k + 1] - times[k]);
        let (sa, sm, sb) = (coeffs.sample(k), mids[k], coeffs.sample(k + 1));
        let hc = |v: f64| Complex64::new(v, 0.0);
        engine.derivative(t, &rho, &sa, &mut k1);
        let y = &rho + &(&k1 * hc(0.5 * h));
        engine.derivative(t + 0.5 * h, &y, &sm, &mut k2);
        let y = &rho + &(&k2 * hc(0.5 * h));
        engine.derivative(t + 0.5 * h, &y, &sm, &mut k3);
        let y = &rho + &(&k3 * hc(h));
        engine.derivative(t + h, &y, &sb, &mut k4);
        let sixth = hc(h / 6.0);
        rho.scaled_add(sixth, &k1);
        rho.scaled_add(sixth * 2.0, &k2);
        rho.scaled_add(sixth * 2.0, &k3);
        rho.scaled_add(sixth, &k4);

        for i in 0..d {
            for j in 0..i {
                let (a, b) = (rho[[i, j]], rho[[j, i]]);
                max_drift = max_drift.max((a - b.conj()).norm());
                let avg = 0.5 * (a + b.conj());
                rho[[i, j]] = avg;
                rho[[j, i]] = avg.conj();
            }
            let v = rho[[i, i]];
            max_drift = max_drift.max(v.im.abs());
            rho[[i, i]] = Complex64::new(v.re, 0.0);
        }
        record(&rho, k + 1, &engine)?;
    }
    log::debug!("oracle {variant}: largest hermiticity drift removed per step {max_drift:.3e}");

    Ok(OracleTrajectory {
        variant,
        d,
        times,
        rows,
        energy,
        trace,
        max_hermiticity_drift: max_drift,
        max_leakage,
        snapshots,
    })
}
