//! Two sources over a three-hypothesis frame where t3 excludes the others.

use std::sync::Arc;

use dsmt::{
    decide, dsm_hybrid_combine, gpt, singleton_candidates, LoadOptions, MassFunction, Model,
};

fn main() -> dsmt::Result<()> {
    let model = Arc::new(Model::build(3, &["t1^t3", "t2^t3"])?);

    let radar = MassFunction::from_exprs(
        Arc::clone(&model),
        &[("t1", 0.5), ("t2", 0.3), ("t1vt2vt3", 0.2)],
        LoadOptions::default(),
    )?;
    let sonar = MassFunction::from_exprs(
        Arc::clone(&model),
        &[("t3", 0.4), ("t1vt2", 0.6)],
        LoadOptions::default(),
    )?;

    let fused = dsm_hybrid_combine(&[radar, sonar])?.combined;
    for (e, m) in fused.focal_elements() {
        println!("m({e}) = {m}");
    }

    let betting = gpt(&fused)?;
    let pick = decide(&betting, &singleton_candidates(&model))?;
    println!("decision: {} at {:.4}", pick.element, pick.probability);
    Ok(())
}
