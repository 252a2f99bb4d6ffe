use std::fs::File;

use ssie_core::inference::simulate_generating_probabilities;
use ssie_core::Result;

use crate::manifest::{ensure_out_dir, Manifest};
use crate::SimulateArgs;

pub fn run(args: SimulateArgs) -> Result<()> {
    let table = simulate_generating_probabilities(args.n, args.iters, args.seed)?;

    println!(
        "mean generating probability, N = {} ({} iterations, seed {})",
        args.n, args.iters, args.seed
    );
    println!("{:>4}  {:>6}  {:>6}  {:>8}", "K", "Pr", "P", "hits");
    for row in &table.rows {
        let p = row
            .mean_generating_probability
            .map(|m| format!("{m:.2}"))
            .unwrap_or_else(|| "-".to_string());
        println!(
            "{:>4}  {:>6.2}  {:>6}  {:>8}",
            row.successes, row.sample_proportion, p, row.hits
        );
    }

    ensure_out_dir(&args.out)?;
    let csv_name = format!("simulate_n{}.csv", args.n);
    table.write_csv(File::create(args.out.join(&csv_name))?)?;

    let mut manifest = Manifest::new("simulate", Some(args.seed));
    manifest.add_output(&csv_name);
    manifest.write(&args.out)?;
    println!("\nwrote {}", args.out.join(csv_name).display());
    Ok(())
}
