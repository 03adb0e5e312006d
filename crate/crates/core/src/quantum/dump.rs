use std::io::Write;

use crate::error::Result;

use super::fields::{flux_velocity, osmotic_velocity, quantum_potential, MaskedField};
use super::wavefunction::Wavefunction;

pub const FIELD_CSV_HEADER: &str = "x,re_psi,im_psi,rho,v,u,V_Q";

fn cell(f: &MaskedField, i: usize) -> String {
    match f.get(i) {
        Some(x) => format!("{x:.16e}"),
        None => "nan".to_string(),
    }
}

/// Writes one row per grid node with 17 significant digits. Masked nodes
/// (ρ ≤ ρ_floor) carry `nan` in the v, u and V_Q columns.
pub fn write_field_csv<W: Write>(psi: &Wavefunction, mut out: W) -> Result<()> {
    let grid = *psi.grid();
    let rho = psi.density();
    let v = flux_velocity(psi)?;
    let u = osmotic_velocity(psi)?;
    let vq = quantum_potential(&rho, psi.params())?.amplitude_form;
    writeln!(out, "{FIELD_CSV_HEADER}")?;
    for (i, z) in psi.psi().values().iter().enumerate() {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
            grid.x(i),
            z.re,
            z.im,
            rho.get(i),
            cell(&v, i),
            cell(&u, i),
            cell(&vq, i)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::params::PhysicalParams;

    #[test]
    fn csv_has_header_and_full_precision() {
        let grid = Grid1D::new(-5.0, 5.0, 11).unwrap();
        let psi = Wavefunction::gaussian(grid, PhysicalParams::natural(), 0.0, 1.0, 0.5).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&psi, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(FIELD_CSV_HEADER));
        let row: Vec<&str> = lines.nth(5).unwrap().split(',').collect();
        assert_eq!(row.len(), 7);
        let x: f64 = row[0].parse().unwrap();
        assert_eq!(x, 0.0);
        let mantissa = row[3].split('e').next().unwrap();
        assert_eq!(mantissa.replace(['.', '-'], "").len(), 17);
        assert_eq!(text.lines().count(), 12);
    }
}
