//! Run the `pulse synth` pipeline from a JSON config and list its outputs.

use drivecal::pipeline::{run, Command, RunOptions};

fn main() -> drivecal::Result<()> {
    let dir = std::env::temp_dir().join("drivecal-pipeline-example");
    std::fs::create_dir_all(&dir).map_err(|e| drivecal::Error::Config(e.to_string()))?;
    let config = dir.join("pulse.json");
    let json = r#"{
  "pulse": {
    "gate": "Xpi",
    "duration_s": 5e-9,
    "model": { "rl1_db": 15.0, "rl2_db": 15.0, "length_m": 0.276 }
  }
}
"#;
    std::fs::write(&config, json).map_err(|e| drivecal::Error::Config(e.to_string()))?;
    let opts = RunOptions { config, out: dir.join("out"), preset: None, threads: Some(2) };
    let report = run(Command::PulseSynth, &opts)?;
    for p in &report.outputs {
        println!("{}", p.display());
    }
    for o in &report.manifest.outputs {
        println!("{}  {}", o.sha256, o.path);
    }
    Ok(())
}
