use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use slabsel::dataset::{format_g17, label_distribution, CaseRecord, Criterion};
use slabsel::eval::EvalReport;
use slabsel::transport::Solver;
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run never leaves a partial file behind.
pub fn write_atomic<F>(path: &Path, body: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> CliResult<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    {
        let mut out = BufWriter::new(tmp.as_file_mut());
        body(&mut out)?;
        out.flush().map_err(|e| CliError::io(path, e))?;
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        fs::set_permissions(tmp.path(), fs::Permissions::from_mode(0o644)).map_err(|e| CliError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn distribution_summary(records: &[CaseRecord]) -> String {
    let mut s = format!("Best solver distribution over {} cases\n", records.len());
    s.push_str(&format!("{:<9}", "label"));
    for solver in Solver::ALL {
        s.push_str(&format!("{:>20}", solver.name()));
    }
    s.push('\n');
    for criterion in [Criterion::Sweeps, Criterion::Runtime] {
        s.push_str(&format!("{:<9}", criterion.name()));
        for (_, count, pct) in label_distribution(records, criterion) {
            s.push_str(&format!("{:>20}", format!("{count} ({pct:.2}%)")));
        }
        s.push('\n');
    }
    s
}

pub fn ranking_table(reports: &[EvalReport]) -> String {
    let mut s = format!(
        "{:<5}{:<6}{:>18}{:>18}{:>12}\n",
        "Rank", "Model", "Accuracy", "Kappa", "Seconds"
    );
    for (i, r) in reports.iter().enumerate() {
        s.push_str(&format!(
            "{:<5}{:<6}{:>18}{:>18}{:>12.2}\n",
            i + 1,
            r.model.name(),
            format!("{:.3} ({:.3})", r.accuracy_mean, r.accuracy_sd),
            format!("{:.3} ({:.3})", r.kappa_mean, r.kappa_sd),
            r.modeling_seconds
        ));
    }
    s
}

pub fn distribution_csv(records: &[CaseRecord], criterion: Criterion, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "solver,count,percent")?;
    for (solver, count, pct) in label_distribution(records, criterion) {
        writeln!(out, "{solver},{count},{}", format_g17(pct))?;
    }
    Ok(())
}

pub fn feature_space_csv(records: &[CaseRecord], out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "sn_order,num_cells,scattering_ratio,best_sweeps,best_runtime")?;
    let name = |s: Option<Solver>| s.map_or("", Solver::name);
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.sn_order,
            r.num_cells,
            format_g17(r.scattering_ratio),
            name(r.best_by_sweeps),
            name(r.best_by_runtime)
        )?;
    }
    Ok(())
}

/// Grouped bar chart of label shares per criterion.
pub fn distribution_svg(records: &[CaseRecord], out: &mut dyn Write) -> std::io::Result<()> {
    const COLORS: [&str; 3] = ["#4c72b0", "#dd8452", "#55a868"];
    let (w, h, base, bar) = (420.0, 260.0, 220.0, 40.0);
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    )?;
    for (g, criterion) in [Criterion::Sweeps, Criterion::Runtime].into_iter().enumerate() {
        let x0 = 40.0 + g as f64 * 190.0;
        for (i, (solver, _, pct)) in label_distribution(records, criterion).into_iter().enumerate() {
            let x = x0 + i as f64 * (bar + 10.0);
            let bh = 1.8 * pct;
            writeln!(
                out,
                r#"<rect x="{x}" y="{:.2}" width="{bar}" height="{bh:.2}" fill="{}"><title>{solver} {pct:.2}%</title></rect>"#,
                base - bh,
                COLORS[i]
            )?;
            writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="middle">{pct:.1}%</text>"#, x + bar / 2.0, base - bh - 4.0)?;
            writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{solver}</text>"#, x + bar / 2.0, base + 15.0)?;
        }
        writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{criterion}</text>"#, x0 + 70.0, base + 32.0)?;
    }
    writeln!(out, "</svg>")
}
