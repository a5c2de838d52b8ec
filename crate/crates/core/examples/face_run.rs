//! Runs the bundled face scenario and prints the trace.

use ouroboros_core::{fixtures, run_episode, Limits, MemoryLedger, MonitorState, Params};

fn main() {
    let store = fixtures::face_store();
    let mut monitor = MonitorState::new();
    let mut ledger = MemoryLedger::new();
    let trace = run_episode(
        &store,
        &mut monitor,
        &mut ledger,
        &fixtures::face_scenario(),
        &Params::default(),
        &Limits { max_ticks: 50 },
    )
    .expect("episode runs");
    print!("{}", trace.to_jsonl());
    println!("terminal: {:?}", trace.terminal);
}
