//! Closed form vs Monte-Carlo table for the modified hill-climb rate.

use crate::opts::HillclimbArgs;
use anyhow::{Context, Result};
use evoguide_core::analysis::{modified_rate, simulate_modified_rate, HillClimbParams};
use evoguide_core::rng::{stream_rng, Stream};
use std::fmt::Write as _;
use std::fs;

#[derive(Debug, Clone, Copy)]
pub struct GridRow {
    pub q: f64,
    pub a: f64,
    pub closed_form: f64,
    pub monte_carlo: f64,
}

pub fn grid(
    qs: &[f64],
    accs: &[f64],
    attempts: u32,
    trials: u64,
    seed: u64,
) -> Vec<GridRow> {
    let mut rows = Vec::new();
    for (i, &q) in qs.iter().enumerate() {
        for (j, &a) in accs.iter().enumerate() {
            let hp = HillClimbParams::new(q, a);
            let mut rng = stream_rng(seed, Stream::Oracle, (i * accs.len() + j) as u64 + 1);
            rows.push(GridRow {
                q,
                a,
                closed_form: modified_rate(hp),
                monte_carlo: simulate_modified_rate(hp, attempts, trials, &mut rng),
            });
        }
    }
    rows
}

pub fn main(args: &HillclimbArgs) -> Result<()> {
    let rows = grid(&args.qs, &args.accs, args.attempts, args.trials, args.seed);
    let mut s = String::from("schema_version,q,a,closed_form,monte_carlo,abs_error\n");
    for r in &rows {
        writeln!(
            s,
            "1,{},{},{},{},{}",
            r.q,
            r.a,
            r.closed_form,
            r.monte_carlo,
            (r.closed_form - r.monte_carlo).abs()
        )?;
    }
    fs::write(&args.out, s).with_context(|| format!("writing {}", args.out.display()))?;
    let worst = rows
        .iter()
        .map(|r| (r.closed_form - r.monte_carlo).abs())
        .fold(0.0f64, f64::max);
    println!("hill-climb grid written to {} (worst abs error {worst:.5})", args.out.display());
    Ok(())
}
