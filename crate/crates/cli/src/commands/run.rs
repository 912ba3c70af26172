use crate::opts::RunArgs;
use crate::runs;
use anyhow::Result;

pub fn main(args: &RunArgs) -> Result<()> {
    let log = if args.resume {
        runs::resume_run(&args.out_dir)?
    } else {
        let cfg = runs::resolve_config(args)?;
        runs::execute_run(&cfg, &args.out_dir)?
    };
    println!(
        "run complete: samples={} best_fitness={} evaluations={} fec_hits={}",
        log.steps.len(),
        log.best_fitness,
        log.evaluations,
        log.fec_hits
    );
    Ok(())
}
