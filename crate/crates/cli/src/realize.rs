use std::fmt::Write as _;
use std::io::Write;
use std::sync::Arc;

use crystal_hydro::lattice::LatticeSpec;
use crystal_hydro::realization::{
    diffusion_matrix, energy, solve_harmonic, standard_realization, vertex_tensions, Basis, DiffusionMatrix,
    Realization,
};
use nalgebra::{DMatrix, DVector};

use crate::config::RealizationMode;
use crate::error::HarnessError;

/// A realization chosen by mode, with the diffusion matrix that drives the PDE.
#[derive(Debug, Clone)]
pub struct RealizedLattice {
    pub realization: Realization,
    /// `A` with `D_{Φ_A} = (det D)^{1/d} I`, for the standard mode.
    pub transform: Option<DMatrix<f64>>,
    /// `D` of the harmonic realization sharing the lattice group.
    pub harmonic_diffusion: DiffusionMatrix,
}

pub fn lattice_basis(spec: &LatticeSpec, basis_override: Option<&[Vec<f64>]>) -> Result<Basis, HarnessError> {
    let columns = match basis_override {
        Some(cols) => {
            let d = spec.dimension;
            if cols.len() != d || cols.iter().any(|c| c.len() != d) {
                return Err(HarnessError::Invalid(format!("basis override must be {d} vectors of length {d}")));
            }
            cols.to_vec()
        }
        None => spec.basis_vectors()?,
    };
    Ok(Basis::from_columns(&columns)?)
}

pub fn realize(
    spec: &LatticeSpec,
    basis_override: Option<&[Vec<f64>]>,
    mode: RealizationMode,
) -> Result<RealizedLattice, HarnessError> {
    let graph = Arc::new(spec.quotient_graph()?);
    let basis = lattice_basis(spec, basis_override)?;
    let (realization, transform) = match mode {
        RealizationMode::Given => {
            let positions = spec
                .ordered_positions()?
                .ok_or_else(|| HarnessError::Invalid("mode `given` needs a [positions] table".into()))?;
            let positions = positions.into_iter().map(DVector::from_vec).collect();
            (Realization::new(graph.clone(), basis, positions)?, None)
        }
        RealizationMode::Harmonic => (solve_harmonic(graph.clone(), basis)?, None),
        RealizationMode::Standard => {
            let h = solve_harmonic(graph.clone(), basis)?;
            let (s, a) = standard_realization(&h)?;
            (s, Some(a))
        }
    };
    let harmonic = solve_harmonic(graph, realization.basis().clone())?;
    Ok(RealizedLattice { harmonic_diffusion: diffusion_matrix(&harmonic), realization, transform })
}

#[derive(Debug, Clone)]
pub struct RealizationReport {
    pub mode: RealizationMode,
    pub vertex_ids: Vec<String>,
    pub basis: Basis,
    pub positions: Vec<DVector<f64>>,
    /// `|Σ p(e) v(e)|` at each vertex.
    pub residuals: Vec<f64>,
    pub diffusion: DiffusionMatrix,
    pub energy: f64,
    pub transform_determinant: Option<f64>,
    pub harmonic_diffusion: DiffusionMatrix,
}

pub fn report_realization(spec: &LatticeSpec, mode: RealizationMode) -> Result<RealizationReport, HarnessError> {
    let rl = realize(spec, None, mode)?;
    let r = &rl.realization;
    Ok(RealizationReport {
        mode,
        vertex_ids: r.graph().vertices().to_vec(),
        basis: r.basis().clone(),
        positions: r.positions().to_vec(),
        residuals: vertex_tensions(r).iter().map(|t| t.norm()).collect(),
        diffusion: diffusion_matrix(r),
        energy: energy(r),
        transform_determinant: rl.transform.as_ref().map(|a| a.determinant().abs()),
        harmonic_diffusion: rl.harmonic_diffusion,
    })
}

fn format_matrix(out: &mut String, label: &str, m: &DMatrix<f64>) {
    let _ = writeln!(out, "{label}:");
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:>22}", format!("{:?}", m[(i, j)]))).collect();
        let _ = writeln!(out, "  [{}]", row.join(","));
    }
}

impl RealizationReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mode: {:?}", self.mode);
        let basis: Vec<String> = self.basis.columns().iter().map(|c| format!("{c:?}")).collect();
        let _ = writeln!(out, "basis (columns): {}", basis.join(" "));
        let _ = writeln!(out, "positions:");
        for ((id, x), res) in self.vertex_ids.iter().zip(&self.positions).zip(&self.residuals) {
            let _ = writeln!(out, "  {id}: {:?}  residual {res:e}", x.as_slice());
        }
        format_matrix(&mut out, "diffusion matrix", self.diffusion.matrix());
        let _ = writeln!(out, "energy: {:?}", self.energy);
        if let Some(det) = self.transform_determinant {
            let _ = writeln!(out, "|det A|: {det:?}");
        }
        format_matrix(&mut out, "harmonic diffusion matrix", self.harmonic_diffusion.matrix());
        out
    }

    /// One row per vertex of the fundamental domain:
    /// `vertex_id, sigma_1..d, pos_1..d, residual`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), HarnessError> {
        let d = self.basis.dimension();
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["vertex_id".to_string()];
        header.extend((1..=d).map(|i| format!("sigma_{i}")));
        header.extend((1..=d).map(|i| format!("pos_{i}")));
        header.push("residual".into());
        w.write_record(&header)?;
        for ((id, x), res) in self.vertex_ids.iter().zip(&self.positions).zip(&self.residuals) {
            let mut row = vec![id.clone()];
            row.extend((0..d).map(|_| "0".to_string()));
            row.extend(x.iter().map(|v| format!("{v:?}")));
            row.push(format!("{res:?}"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
