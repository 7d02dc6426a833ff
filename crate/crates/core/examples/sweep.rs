//! A scenario sweep built in code: bound versus antenna count in a square.

use ma_lab::bench::{run_scenario, write_csv, ScenarioConfig};

const SCENARIO: &str = r#"
seed = 7
trials = 0
schemes = ["sca-2d", "upah", "upaf"]

[scene]
antennas = 16
snr_db = 15
min_spacing = 0.5
u = 0.35
v = 0.71

[region]
shape = "square"
min = [-2.5, -2.5]
side = 5

[sweep]
axis = "antennas"
values = [8, 9, 16]
"#;

fn main() -> ma_lab::Result<()> {
    let cfg = ScenarioConfig::from_toml(SCENARIO)?;
    let rows = run_scenario(&cfg)?;
    write_csv(&rows, std::io::stdout().lock())?;
    for n in &cfg.sweep.values {
        let crb = |s: &str| {
            rows.iter()
                .find(|r| r.sweep == *n && r.scheme.name() == s)
                .and_then(|r| r.crb_u.zip(r.crb_v).map(|(u, v)| u.max(v)))
                .unwrap_or(f64::NAN)
        };
        println!("N={n}: optimized minmax crb is {:.1}% below upah", 100.0 * (1.0 - crb("sca-2d") / crb("upah")));
    }
    Ok(())
}
