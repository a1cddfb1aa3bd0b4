//! A teacher serving three identities over TCP and three apprentices
//! connecting to it.
//!
//!     cargo run --example tcp_session

use std::net::TcpListener;
use std::thread;

use semid::protocol::{connect_apprentice, serve_teacher};
use semid::{
    build_semantic_base, derive_seed, gen_synthetic, SyntheticParams, Threshold, TransmitPlan,
};

fn main() -> semid::Result<()> {
    let rows = gen_synthetic(&SyntheticParams {
        classes: 6,
        features: 64,
        per_class: 4,
        spread: 1.0,
        separation: 5.0,
        seed: 5,
    })?;
    let base = build_semantic_base(&rows, 64)?;
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    println!("teacher listening on {addr}");

    let picks = [0usize, 9, 20];
    let plans = picks.map(|i| TransmitPlan::new(rows[i].clone(), derive_seed(77, i)));
    thread::scope(|s| -> semid::Result<()> {
        let server = s.spawn(|| serve_teacher(&listener, &base, plans));
        for &i in &picks {
            let report = connect_apprentice(addr, &base, Threshold::new(0.9)?)?;
            let d = report.decision;
            println!(
                "sent {}: got {} after {} packets ({} of {} bits)",
                rows[i].label().unwrap_or("?"),
                base.elements()[d.element.index()].name,
                d.packets_used,
                report.bits_semantic,
                report.bits_syntactic
            );
        }
        for r in server.join().expect("server thread")? {
            r?;
        }
        Ok(())
    })
}
