//! Teacher and apprentice talking over an in-memory pipe, compared with the
//! in-process simulation of the same seed.
//!
//!     cargo run --example loopback_session

use std::thread;

use semid::protocol::{apprentice_session, duplex, teacher_session};
use semid::{
    build_semantic_base, gen_synthetic, identify, SyntheticParams, Threshold, TransmitPlan,
};

fn main() -> semid::Result<()> {
    let rows = gen_synthetic(&SyntheticParams {
        classes: 4,
        features: 48,
        per_class: 5,
        spread: 1.0,
        separation: 3.0,
        seed: 8,
    })?;
    let base = build_semantic_base(&rows, 64)?;
    let lambda = Threshold::new(0.85)?;
    let seed = 2026;
    let identity = rows[13].clone();

    let (mut teacher_end, mut apprentice_end) = duplex();
    let (teacher, apprentice) = thread::scope(|s| {
        let t = s.spawn(|| {
            teacher_session(
                TransmitPlan::new(identity.clone(), seed),
                &base,
                &mut teacher_end,
            )
        });
        let a = apprentice_session(&base, lambda, &mut apprentice_end);
        (t.join().expect("teacher thread"), a)
    });
    let (teacher, apprentice) = (teacher?, apprentice?);

    println!("teacher: {teacher:?}");
    println!("apprentice: {apprentice:?}");
    let local = identify(&base, &identity, lambda, seed)?;
    println!(
        "in-process decision matches: {}",
        local == apprentice.decision
    );
    Ok(())
}
