//! The whole pipeline for one config, writing CSV artifacts.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::RunConfig;
use crate::coefficients::{compute_coefficients, CoefficientTable};
use crate::grid::TimeGrid;
use crate::homogeneous::{build_rotation, solve_fundamental, write_rotation_csv};
use crate::kernels::tabulate_kernels;
use crate::oracle::{integrate, OracleOptions, OracleTrajectory, TruncatedState, Variant};
use crate::propagator::{propagator_from_coefficients, Mode};
use crate::qcf::{observable_series, wigner, InitialState, ObservableSeries, PhaseGrid, WignerField, WignerOptions};
use crate::Error;

/// Largest absolute analytic-minus-oracle deviation per observable.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffRow {
    pub mode: Mode,
    pub mean_x: f64,
    pub mean_p: f64,
    pub xx: f64,
    pub pp: f64,
    pub xp_sym: f64,
    pub energy: f64,
}

impl DiffRow {
    pub fn max(&self) -> f64 {
        [self.mean_x, self.mean_p, self.xx, self.pp, self.xp_sym, self.energy]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffReport {
    pub rows: Vec<DiffRow>,
}

impl DiffReport {
    pub fn max_deviation(&self) -> f64 {
        self.rows.iter().map(DiffRow::max).fold(0.0, f64::max)
    }
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# max |analytic - oracle| over the grid; columns: mode, mean_x, mean_p, xx, pp, xp_sym, energy")?;
        for r in &self.rows {
            writeln!(
                f,
                "{}\t{:.6e}\t{:.6e}\t{:.6e}\t{:.6e}\t{:.6e}\t{:.6e}",
                r.mode, r.mean_x, r.mean_p, r.xx, r.pp, r.xp_sym, r.energy
            )?;
        }
        Ok(())
    }
}

pub fn diff_observables(series: &ObservableSeries, oracle: &OracleTrajectory) -> DiffRow {
    let mut d = DiffRow {
        mode: series.mode,
        mean_x: 0.0,
        mean_p: 0.0,
        xx: 0.0,
        pp: 0.0,
        xp_sym: 0.0,
        energy: 0.0,
    };
    for (k, (a, o)) in series.rows.iter().zip(&oracle.rows).enumerate() {
        d.mean_x = d.mean_x.max((a.mean_x - o.mean_x).abs());
        d.mean_p = d.mean_p.max((a.mean_p - o.mean_p).abs());
        d.xx = d.xx.max((a.xx - o.xx).abs());
        d.pp = d.pp.max((a.pp - o.pp).abs());
        d.xp_sym = d.xp_sym.max((a.xp_sym - o.xp_sym).abs());
        d.energy = d.energy.max((series.energy[k] - oracle.energy[k]).abs());
    }
    d
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub series: Vec<ObservableSeries>,
    pub oracle: Vec<OracleTrajectory>,
    pub diff: Option<DiffReport>,
}

fn write_file<F>(path: &Path, files: &mut Vec<PathBuf>, body: F) -> Result<(), Error>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    body(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))?;
    files.push(path.to_path_buf());
    Ok(())
}

fn create_dir(path: &Path) -> Result<(), Error> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

struct ModeOutput {
    series: ObservableSeries,
    propagator_csv: Vec<u8>,
    wigner: Vec<(usize, WignerField)>,
}

fn analytic(
    cfg: &RunConfig,
    coeffs: &CoefficientTable,
    state: &InitialState,
    mode: Mode,
) -> Result<ModeOutput, Error> {
    let bundle = propagator_from_coefficients(coeffs, mode)?;
    let min_eig = bundle.min_w_bar_eigenvalue();
    if min_eig < -1e-9 {
        log::warn!("{mode}: W_bar is not positive semidefinite (smallest eigenvalue {min_eig:.3e})");
    }
    let series = observable_series(&bundle, state)?;
    let mut propagator_csv = Vec::new();
    bundle
        .write_csv(&mut propagator_csv)
        .map_err(|e| Error::io("<memory>", e))?;
    let mut fields = Vec::new();
    if cfg.wigner.enabled {
        let phase = PhaseGrid::square(cfg.wigner.extent, cfg.wigner.points)?;
        let opts = WignerOptions {
            z_points: cfg.wigner.z_points,
            z_extent: cfg.wigner.z_extent,
        };
        for &t in &cfg.wigner.times {
            let k = coeffs.grid.nearest_index(t);
            fields.push((k, wigner(&bundle, state, k, &phase, &opts)?));
        }
    }
    Ok(ModeOutput {
        series,
        propagator_csv,
        wigner: fields,
    })
}

/// Runs every configured mode and writes the artifacts under
/// `cfg.output_dir`. Identical configs give byte-identical files.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, Error> {
    let grid = TimeGrid::uniform(cfg.dt, cfg.t_max)?;
    let spec = cfg.reservoir_spec()?;
    let state = cfg.initial_state()?;
    let coeffs = compute_coefficients(&tabulate_kernels(&spec, &grid)?, cfg.omega0)?;
    let rotation = build_rotation(&solve_fundamental(&coeffs)?, &coeffs)?;

    let outputs: Vec<ModeOutput> = cfg
        .modes
        .par_iter()
        .map(|&m| analytic(cfg, &coeffs, &state, m))
        .collect::<Result<_, _>>()?;

    let variants: Vec<Variant> = if !cfg.oracle {
        Vec::new()
    } else if cfg.modes.is_empty() {
        vec![Variant::Full]
    } else {
        cfg.modes.iter().map(|&m| m.into()).collect()
    };
    let oracle: Vec<OracleTrajectory> = if variants.is_empty() {
        Vec::new()
    } else {
        let rho0 = TruncatedState::from_initial(&state, cfg.oracle_d)?;
        let opts = OracleOptions {
            d: cfg.oracle_d,
            leakage: cfg.oracle_leakage,
            snapshots: Vec::new(),
        };
        variants
            .par_iter()
            .map(|&v| integrate(&rho0, &coeffs, v, &opts))
            .collect::<Result<_, _>>()?
    };

    let dir = &cfg.output_dir;
    create_dir(dir)?;
    let mut files = Vec::new();
    write_file(&dir.join("coefficients.csv"), &mut files, |w| coeffs.write_csv(w))?;
    write_file(&dir.join("rotation.csv"), &mut files, |w| {
        write_rotation_csv(&grid, &rotation, w)
    })?;
    for out in &outputs {
        let sub = dir.join(out.series.mode.as_str());
        create_dir(&sub)?;
        write_file(&sub.join("propagator.csv"), &mut files, |w| w.write_all(&out.propagator_csv))?;
        write_file(&sub.join("observables.csv"), &mut files, |w| out.series.write_csv(w))?;
        for (k, field) in &out.wigner {
            write_file(&sub.join(format!("wigner_t{k}.csv")), &mut files, |w| field.write_csv(w))?;
        }
    }
    for tr in &oracle {
        let sub = dir.join(format!("oracle-{}", tr.variant));
        create_dir(&sub)?;
        write_file(&sub.join("oracle_observables.csv"), &mut files, |w| tr.write_csv(w))?;
    }

    let series: Vec<ObservableSeries> = outputs.into_iter().map(|o| o.series).collect();
    let diff = if !series.is_empty() && !oracle.is_empty() {
        let report = DiffReport {
            rows: series
                .iter()
                .zip(&oracle)
                .map(|(s, o)| diff_observables(s, o))
                .collect(),
        };
        write_file(&dir.join("diff_report.txt"), &mut files, |w| write!(w, "{report}"))?;
        Some(report)
    } else {
        None
    };
    Ok(RunSummary {
        files,
        series,
        oracle,
        diff,
    })
}
