//! Builds a semantic base from synthetic clusters and identifies one noisy
//! identity packet by packet, printing the posterior leader as it goes.
//!
//!     cargo run --example identify_once -- [lambda]

use semid::{
    build_semantic_base, gen_synthetic, PosteriorState, SyntheticParams, Threshold, TransmitPlan,
};

fn main() -> semid::Result<()> {
    let lambda: f64 = std::env::args()
        .nth(1)
        .map_or(Ok(0.9), |s| s.parse())
        .expect("lambda must be a number");
    let lambda = Threshold::new(lambda)?;
    let rows = gen_synthetic(&SyntheticParams {
        classes: 5,
        features: 32,
        per_class: 10,
        spread: 1.0,
        separation: 4.0,
        seed: 3,
    })?;
    let base = build_semantic_base(&rows, 64)?;
    let identity = &rows[27];
    println!("true label {}", identity.label().unwrap_or("?"));

    let mut state = PosteriorState::new(&base);
    let plan = TransmitPlan::new(identity.clone(), 11);
    let mut decision = None;
    for packet in plan {
        state.receive(packet, &base)?;
        let (leader, p) = semid::identifier::argmax(state.probs());
        println!(
            "packet {:>2} position {:>2}: leader {} p = {p:.4}",
            state.packets_used(),
            packet.position,
            base.elements()[leader.index()].name
        );
        if let Some(d) = state.check_stop(lambda) {
            decision = Some(d);
            break;
        }
    }
    let d = match decision {
        Some(d) => d,
        None => state.force_decision()?,
    };
    println!(
        "decided {} with confidence {:.4} after {} of {} packets (saturated: {})",
        base.elements()[d.element.index()].name,
        d.confidence,
        d.packets_used,
        base.n(),
        d.saturated
    );
    Ok(())
}
