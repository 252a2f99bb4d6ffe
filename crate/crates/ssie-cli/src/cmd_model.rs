use std::fs::File;
use std::path::Path;

use ssie_core::analytic::{
    aggregate_bias, bias_ratio, default_exponent_grid, default_rate_grid,
    group_underprediction_curve, single_pvc_scenario, threshold_group_rate,
    threshold_predicted_rate, write_curve_csv, CurveSweep, GroupOutcome, LeafSizeDistribution,
    PvcScenario, RoundedGroupView,
};
use ssie_core::inference::BetaPrior;
use ssie_core::{Error, Result};

use crate::manifest::{ensure_out_dir, Manifest};
use crate::{BiasArgs, CurvesArgs, ModelCommand, PvcArgs, ThresholdArgs};

pub fn run(cmd: ModelCommand) -> Result<()> {
    match cmd {
        ModelCommand::Pvc(args) => pvc(args),
        ModelCommand::Curves(args) => curves(args),
        ModelCommand::Threshold(args) => threshold(args),
        ModelCommand::Bias(args) => bias(args),
    }
}

fn pvc(args: PvcArgs) -> Result<()> {
    let (s1, s2) = match (args.s, args.s1, args.s2) {
        (Some(s), _, _) => (s, s),
        (None, Some(s1), Some(s2)) => (s1, s2),
        _ => {
            return Err(Error::InvalidArgument(
                "give --s, or both --s1 and --s2".into(),
            ))
        }
    };
    let prior = BetaPrior::new(args.a, args.b)?;
    let scenario = PvcScenario::new(args.n, args.r, s1, s2, prior)?;
    let result = single_pvc_scenario(&scenario);
    let rounded = result.rounded();

    println!(
        "single-PVC scenario: N = {}, R = {}, S1 = {s1}, S2 = {s2}, prior Beta({}, {})",
        args.n, args.r, args.a, args.b
    );
    println!(
        "{:<10} {:>6} {:>5} {:>12} {:>10} {:>12} {:>12} {:>8}",
        "group", "size", "PVC", "conditional", "in-group", "joint pred", "joint act", "fall"
    );
    print_group(&result.majority);
    print_group(&result.minority);

    println!("\nsame cells with 2-decimal display rounding at each step:");
    println!(
        "{:<10} {:>12} {:>10} {:>12} {:>12} {:>10}",
        "group", "conditional", "in-group", "joint pred", "joint act", "cell fall"
    );
    print_rounded(&rounded.majority);
    print_rounded(&rounded.minority);

    for (g, r) in [
        (&result.majority, &rounded.majority),
        (&result.minority, &rounded.minority),
    ] {
        if let (Some(fall), Some(cell_fall)) = (g.relative_fall, r.relative_fall_from_cells) {
            if (fall - cell_fall).abs() > 0.005 {
                println!(
                    "\nnote: {} fall is {:.1}% unrounded, but the rounded joint cells \
                     ({:.2} vs {:.2}) read as a {:.0}% fall — rounding, not a different model",
                    g.label,
                    fall * 100.0,
                    r.joint_predicted,
                    r.joint_actual,
                    cell_fall * 100.0
                );
            }
        }
    }

    ensure_out_dir(&args.out)?;
    let json = serde_json::json!({
        "scenario": {
            "total": args.n, "minority_share": args.r,
            "majority_rate": s1, "minority_rate": s2,
            "prior": { "a": args.a, "b": args.b },
        },
        "unrounded": result,
        "two_decimal_view": rounded,
    });
    std::fs::write(
        args.out.join("scenario.json"),
        serde_json::to_string_pretty(&json).expect("serializes"),
    )?;
    let mut manifest = Manifest::new("model pvc", None);
    manifest.add_output("scenario.json");
    manifest.write(&args.out)?;
    println!("\nwrote {}", args.out.join("scenario.json").display());
    Ok(())
}

fn print_group(g: &GroupOutcome) {
    let conditional = match g.conditional_fraction {
        Some((n, d)) => format!("{n}/{d}={:.4}", g.conditional),
        None => format!("{:.4}", g.conditional),
    };
    let fall = g
        .relative_fall
        .map(|f| format!("{:.1}%", f * 100.0))
        .unwrap_or_else(|| "-".into());
    let degenerate = if g.degenerate { " (degenerate: no PVC rows)" } else { "" };
    println!(
        "{:<10} {:>6} {:>5} {:>12} {:>10.4} {:>12.4} {:>12.4} {:>8}{}",
        g.label,
        g.group_size,
        g.pvc_count,
        conditional,
        g.predicted_in_group,
        g.joint_predicted,
        g.joint_actual,
        fall,
        degenerate
    );
}

fn print_rounded(g: &RoundedGroupView) {
    let fall = g
        .relative_fall_from_cells
        .map(|f| format!("{:.0}%", f * 100.0))
        .unwrap_or_else(|| "-".into());
    println!(
        "{:<10} {:>12.2} {:>10.3} {:>12.2} {:>12.2} {:>10}",
        g.label, g.conditional, g.predicted_in_group, g.joint_predicted, g.joint_actual, fall
    );
}

fn curves(args: CurvesArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = Manifest::new("model curves", None);

    let exponents = args.exponents.clone().unwrap_or_else(default_exponent_grid);
    let sweep = CurveSweep::Exponent {
        exponents,
        target_rate: args.s,
    };
    let points = group_underprediction_curve(args.max_size, args.group_fraction, args.a, &sweep)?;
    write_curve_csv(&points, File::create(args.out.join("curve_exponent.csv"))?)?;
    manifest.add_output("curve_exponent.csv");
    println!(
        "exponent sweep at S = {} ({} points) -> {}",
        args.s,
        points.len(),
        args.out.join("curve_exponent.csv").display()
    );
    for p in &points {
        println!("  X = {:<4} underprediction = {:.4}", p.x, p.underprediction);
    }

    if let Some(rates) = &args.s_grid {
        let sweep = CurveSweep::TargetRate {
            rates: rates.clone(),
            exponent: args.exponent,
        };
        let points =
            group_underprediction_curve(args.max_size, args.group_fraction, args.a, &sweep)?;
        write_curve_csv(&points, File::create(args.out.join("curve_target_rate.csv"))?)?;
        manifest.add_output("curve_target_rate.csv");
        println!(
            "target-rate sweep at X = {} ({} points) -> {}",
            args.exponent,
            points.len(),
            args.out.join("curve_target_rate.csv").display()
        );
        for p in &points {
            println!("  S = {:<4} underprediction = {:.4}", p.x, p.underprediction);
        }
    }

    manifest.write(&args.out)?;
    Ok(())
}

fn threshold(args: ThresholdArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&args.p) {
        return Err(Error::InvalidArgument(format!(
            "--p must lie in [0, 1], got {}",
            args.p
        )));
    }
    ensure_out_dir(&args.out)?;
    let path = args.out.join("threshold_curve.csv");
    write_threshold_curve(&args, &path)?;
    println!(
        "threshold predicted rate for p = {} over F = 1..{}{} -> {}",
        args.p,
        args.max_size,
        if args.odd_only { " (odd only)" } else { "" },
        path.display()
    );

    if let Some(exponents) = &args.exponents {
        println!("power-law group rates:");
        for &x in exponents {
            let d = LeafSizeDistribution::power_law(x, args.max_size)?;
            let rate = threshold_group_rate(&d, args.p);
            println!("  X = {x:<4} group rate = {rate:.4} (target rate {})", args.p);
        }
    }

    let mut manifest = Manifest::new("model threshold", None);
    manifest.add_output("threshold_curve.csv");
    manifest.write(&args.out)?;
    Ok(())
}

fn write_threshold_curve(args: &ThresholdArgs, path: &Path) -> Result<()> {
    let mut w = File::create(path)?;
    use std::io::Write;
    writeln!(w, "x,value")?;
    for f in 1..=args.max_size {
        if args.odd_only && f % 2 == 0 {
            continue;
        }
        writeln!(w, "{},{}", f, threshold_predicted_rate(f, args.p))?;
    }
    Ok(())
}

fn bias(args: BiasArgs) -> Result<()> {
    let d = LeafSizeDistribution::power_law(args.exponent, args.max_size)?;
    let aggregate = aggregate_bias(&d, args.r, args.s1, args.s2)?;
    println!(
        "aggregate minority/majority bias ratio B = {aggregate:.4} \
         (X = {}, N = {}, R = {}, S1 = {}, S2 = {})",
        args.exponent, args.max_size, args.r, args.s1, args.s2
    );

    ensure_out_dir(&args.out)?;
    let path = args.out.join("bias_ratio.csv");
    {
        use std::io::Write;
        let mut w = File::create(&path)?;
        writeln!(w, "x,value")?;
        for (f, _) in d.iter() {
            writeln!(w, "{},{}", f, bias_ratio(f, args.r, args.s1, args.s2)?)?;
        }
    }
    println!("per-size ratio curve -> {}", path.display());

    let mut manifest = Manifest::new("model bias", None);
    manifest.add_output("bias_ratio.csv");
    manifest.write(&args.out)?;
    Ok(())
}
