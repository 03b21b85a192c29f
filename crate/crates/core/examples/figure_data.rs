//! Writes the CSV behind every figure into a directory (default `figures/`).

use nqr_holonomy::lab::figures::{figure_tables, FIGURES};

fn main() -> nqr_holonomy::Result<()> {
    let dir = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    std::fs::create_dir_all(&dir).expect("output directory");
    for id in FIGURES {
        for t in figure_tables(id)? {
            let stem = format!("fig{id}");
            let file = if t.name == stem { format!("{stem}.csv") } else { format!("{stem}_{}.csv", t.name) };
            let path = dir.join(file);
            t.write_csv(&path)?;
            println!("{} ({} rows, columns {})", path.display(), t.rows.len(), t.columns.join(","));
        }
    }
    Ok(())
}
