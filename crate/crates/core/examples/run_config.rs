//! Drive an experiment from TOML text, the way the binary does, and list what
//! it wrote.

use photon_decay::experiment::{parse_config_str, run, Overrides};

const CONFIG: &str = r#"
experiment = "fgr"
seed = 1

[fgr]
z = 0.5
ej = 20.0
omega_max = 200.0
points = 9
closed_form = true
"#;

fn main() -> photon_decay::Result<()> {
    let out = std::env::temp_dir().join("photon-decay-run-config");
    let ov = Overrides { out: Some(out.clone()), threads: Some(1), ..Default::default() };
    let (cfg, plan) = parse_config_str(CONFIG, &ov)?;
    println!("resolved config:\n{}", cfg.to_toml());
    let manifest = run(&cfg, &plan)?;
    for o in &manifest.outputs {
        println!("{} ({} rows)", out.join(&o.file).display(), o.rows);
    }
    Ok(())
}
