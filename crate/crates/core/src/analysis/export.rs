use std::io::Write;

use super::sensitivity::SensitivitySet;
use crate::error::{Error, Result};
use crate::linsys::StateSpaceSystem;

fn db(v: f64) -> f64 {
    20.0 * v.log10()
}

/// Write Bode magnitudes (dB) of several loops side by side.
///
/// All sets must share one frequency grid. Columns are `omega` followed by
/// `<label>_S`, `<label>_KS`, `<label>_Sdi`, `<label>_Sdo`, `<label>_Sn`,
/// then `S_template` (`1/|We|`) when a tracking weight is given.
pub fn write_sensitivity_csv<W: Write>(
    out: W,
    sets: &[(&str, &SensitivitySet)],
    we: Option<&StateSpaceSystem>,
) -> Result<()> {
    let Some((_, first)) = sets.first() else {
        return Err(Error::InvalidParameter("nothing to export".into()));
    };
    let n = first.points.len();
    if sets.iter().any(|(_, s)| s.points.len() != n || s.points.iter().zip(&first.points).any(|(a, b)| a.omega != b.omega)) {
        return Err(Error::Dimension("sensitivity sets use different grids".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["omega".to_string()];
    for (label, _) in sets {
        for col in ["S", "KS", "Sdi", "Sdo", "Sn"] {
            header.push(format!("{label}_{col}"));
        }
    }
    if we.is_some() {
        header.push("S_template".to_string());
    }
    w.write_record(&header)?;
    for i in 0..n {
        let mut row = vec![first.points[i].omega.to_string()];
        for (_, s) in sets {
            let p = &s.points[i];
            for v in [p.s, p.ks, p.s_di, p.s_do, p.s_n] {
                row.push(db(v.norm()).to_string());
            }
        }
        if let Some(we) = we {
            row.push((-db(we.freq_response(first.points[i].omega)?[(0, 0)].norm())).to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
