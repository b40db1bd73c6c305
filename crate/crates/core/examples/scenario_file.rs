// Scenario files drive the command line tool; the same JSON loads here.

use resetq::cli::Scenario;
use resetq::Result;

const SCENARIO: &str = include_str!("../scenarios/multiplicative_ig_queue.json");

pub fn run_example() -> Result<()> {
    let s = Scenario::from_json(SCENARIO)?;
    let q = s.queue()?;
    println!("{}", s.to_json());
    println!("E[L] = {:.6}", q.mean_queue_length()?);

    let mut out = Vec::new();
    let mut err = Vec::new();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/multiplicative_ig_queue.json");
    let code = resetq::cli::run(["resetq", "--scenario", path, "optimize", "--kind", "both"], &mut out, &mut err);
    print!("{}", String::from_utf8_lossy(&out));
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
