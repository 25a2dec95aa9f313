//! Tabulates a quadratic selection function next to conventional specifications and
//! writes plot-ready CSV files.
//!
//! Run with `cargo run --example selection_tables -- [out_dir]`.

use std::fs::File;
use std::path::PathBuf;

use saom_quadratic::selection::legacy::{LegacyFamily, LegacySelection};
use saom_quadratic::selection::{
    selection_table, AlterGrid, CovariateScale, QuadraticSelection, SelectionFunction,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "selection_tables".into()));
    std::fs::create_dir_all(&out)?;
    let scale = CovariateScale::new(-6.0, 4.0, 0.0)?;
    let quadratic = QuadraticSelection::new([-0.0288, -0.003, 0.044, -0.095, 0.026], scale)?;
    let legacy = [
        ("abs_difference", LegacySelection::new(LegacyFamily::AbsDifference, vec![-0.12], scale)?),
        (
            "ego_alter_product",
            LegacySelection::new(LegacyFamily::EgoAlterProduct, vec![-0.09, 0.05, 0.03], scale)?,
        ),
        ("pure_quadratic", LegacySelection::new(LegacyFamily::PureQuadratic, vec![-0.0288], scale)?),
    ];

    let egos = [-6.0, -3.0, 0.0, 2.0, 4.0];
    let grid = AlterGrid::Uniform(41);
    let table = selection_table(&quadratic, &egos, &grid)?;
    table.write_rows(File::create(out.join("quadratic.csv"))?)?;
    table.write_optimum(File::create(out.join("quadratic_optimum.csv"))?)?;

    println!("{:>6} {:>12} {:>14} {:>16} {:>14}", "ego", "quadratic", "abs_difference", "ego_alter_prod", "pure_quadratic");
    for &v in &egos {
        print!("{v:>6.1} {:>12.4}", quadratic.optimum_value(v));
        for (_, l) in &legacy {
            print!(" {:>14.4}", l.optimum_value(v) + 0.0);
        }
        println!();
    }
    for (name, l) in &legacy {
        let t = selection_table(l, &egos, &grid)?;
        t.write_rows(File::create(out.join(format!("{name}.csv")))?)?;
        t.write_optimum(File::create(out.join(format!("{name}_optimum.csv")))?)?;
    }

    // the pure quadratic specification is the θ = (β, 0, 0, 0, 0) member of the family
    let nested = QuadraticSelection::new([-0.0288, 0.0, 0.0, 0.0, 0.0], scale)?;
    let gap = scale
        .grid(21)
        .iter()
        .flat_map(|&a| scale.grid(21).into_iter().map(move |b| (a, b)))
        .map(|(a, b)| (nested.evaluate(a, b) - legacy[2].1.evaluate(a, b)).abs())
        .fold(0.0, f64::max);
    println!("\npure quadratic vs nested quadratic, largest difference {gap:.1e}");
    println!("tables written to {}", out.display());
    Ok(())
}
